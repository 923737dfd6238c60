import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import random_pair_dict  # noqa: E402

from callnet import PairStats, build_dcn, build_mcn  # noqa: E402


@pytest.fixture
def toy_stats():
    return PairStats.from_dict({("A", "B"): (2, 90), ("B", "A"): (1, 10), ("A", "C"): (4, 50)})


def random_networks(seed, n_nodes=60, n_pairs=150):
    stats = PairStats.from_dict(random_pair_dict(np.random.default_rng(seed), n_nodes, n_pairs))
    return stats, build_dcn(stats), build_mcn(stats)


@pytest.fixture(params=range(6))
def rand_nets(request):
    return random_networks(request.param)


# criterion id -> (passed, detail); filled by test_acceptance, printed at the end
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
