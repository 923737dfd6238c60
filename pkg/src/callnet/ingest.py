"""Reading call detail records and turning them into per-pair call statistics.

Records are held column-wise in a :class:`CallTable`: identifiers are
interned into integer codes against a sorted label array, so tens of
millions of rows fit in a few hundred megabytes. Iterating a table yields
:class:`CallRecord` rows.
"""
from __future__ import annotations

import datetime as dt
import logging
import os
from array import array
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

logger = logging.getLogger(__name__)

__all__ = [
    "CallRecord",
    "CallTable",
    "IngestConfig",
    "ParseReport",
    "PairStats",
    "parse_records",
    "read_cdr",
    "filter_valid",
    "aggregate_pairs",
]

SECONDS_PER_DAY = 86400
MAX_SAMPLED_ERRORS = 100


@dataclass(frozen=True)
class CallRecord:
    caller: str
    callee: str
    start_time: int
    duration: int
    status: int

    def __post_init__(self):
        if not self.caller or not self.callee:
            raise ValueError("caller and callee must be non-empty")
        if self.duration < 0:
            raise ValueError("duration must be non-negative")


@dataclass
class IngestConfig:
    """Options controlling how CDR text is read and which calls are kept."""

    delimiter: str = ","
    has_header: bool = False
    timezone_offset_minutes: int = 480
    excluded_dates: frozenset = frozenset()

    def __post_init__(self):
        self.excluded_dates = frozenset(
            d if isinstance(d, dt.date) else dt.date.fromisoformat(str(d).strip())
            for d in self.excluded_dates
        )


class CallTable(Sequence):
    """Column store of call records.

    ``caller`` and ``callee`` are int codes into ``labels``; ``labels`` is
    sorted so code order is lexicographic identifier order.
    """

    def __init__(self, labels, caller, callee, start_time, duration, status):
        self.labels = np.asarray(labels, dtype=object)
        self.caller = np.asarray(caller, dtype=np.int64)
        self.callee = np.asarray(callee, dtype=np.int64)
        self.start_time = np.asarray(start_time, dtype=np.int64)
        self.duration = np.asarray(duration, dtype=np.int64)
        self.status = np.asarray(status, dtype=np.int64)
        n = len(self.caller)
        if not all(len(a) == n for a in (self.callee, self.start_time, self.duration, self.status)):
            raise ValueError("column lengths differ")

    @classmethod
    def empty(cls) -> "CallTable":
        z = np.zeros(0, dtype=np.int64)
        return cls(np.array([], dtype=object), z, z, z, z, z)

    @classmethod
    def from_records(cls, records: Iterable[CallRecord]) -> "CallTable":
        records = list(records)
        if not records:
            return cls.empty()
        ids = [r.caller for r in records] + [r.callee for r in records]
        labels, codes = np.unique(np.array(ids, dtype=object), return_inverse=True)
        n = len(records)
        return cls(
            labels, codes[:n], codes[n:],
            [r.start_time for r in records],
            [r.duration for r in records],
            [r.status for r in records],
        )

    def __len__(self) -> int:
        return len(self.caller)

    def __getitem__(self, i):
        if isinstance(i, slice) or isinstance(i, np.ndarray):
            return self.take(np.arange(len(self))[i] if isinstance(i, slice) else i)
        return CallRecord(
            str(self.labels[self.caller[i]]), str(self.labels[self.callee[i]]),
            int(self.start_time[i]), int(self.duration[i]), int(self.status[i]),
        )

    def __iter__(self) -> Iterator[CallRecord]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other):
        if not isinstance(other, CallTable):
            return NotImplemented
        return list(self) == list(other)

    def __repr__(self):
        return f"CallTable({len(self)} records, {len(self.labels)} identifiers)"

    def take(self, index) -> "CallTable":
        """Subset of rows (boolean mask or integer index), labels unchanged."""
        return CallTable(self.labels, self.caller[index], self.callee[index],
                         self.start_time[index], self.duration[index], self.status[index])

    def compact(self) -> "CallTable":
        """Drop labels no longer referenced by any row."""
        used = np.union1d(self.caller, self.callee)
        remap = np.full(len(self.labels), -1, dtype=np.int64)
        remap[used] = np.arange(len(used))
        return CallTable(self.labels[used], remap[self.caller], remap[self.callee],
                         self.start_time, self.duration, self.status)


@dataclass
class ParseReport:
    """Malformed-row bookkeeping for one parse."""

    lines_read: int = 0
    records: int = 0
    error_counts: Counter = field(default_factory=Counter)
    error_lines: list = field(default_factory=list)

    @property
    def n_errors(self) -> int:
        return sum(self.error_counts.values())

    def add(self, kind: str, line_no: int):
        self.error_counts[kind] += 1
        if len(self.error_lines) < MAX_SAMPLED_ERRORS:
            self.error_lines.append((line_no, kind))

    def to_text(self) -> str:
        out = [f"lines_read={self.lines_read}", f"records={self.records}",
               f"errors={self.n_errors}"]
        for kind in sorted(self.error_counts):
            out.append(f"error.{kind}={self.error_counts[kind]}")
        out.append("first_error_lines=" + ",".join(f"{n}:{k}" for n, k in self.error_lines))
        return "\n".join(out) + "\n"


def parse_records(stream, config: IngestConfig | None = None) -> tuple[CallTable, ParseReport]:
    """Parse delimiter-separated CDR rows from a text stream.

    Columns: caller, callee, start time (epoch seconds), duration (seconds),
    status. Malformed rows are skipped and tallied in the returned report.
    """
    config = config or IngestConfig()
    delim = config.delimiter
    report = ParseReport()
    codes: dict[str, int] = {}
    caller = array("q")
    callee = array("q")
    start = array("q")
    dur = array("q")
    status = array("q")

    line_no = 0
    for line in stream:
        line_no += 1
        if line_no == 1 and config.has_header:
            continue
        line = line.rstrip("\r\n")
        if not line:
            report.add("empty_line", line_no)
            continue
        parts = line.split(delim)
        if len(parts) != 5:
            report.add("field_count", line_no)
            continue
        a, b, t, d, s = parts
        if not a or not b:
            report.add("empty_identifier", line_no)
            continue
        try:
            t, d, s = int(t), int(d), int(s)
        except ValueError:
            report.add("bad_integer", line_no)
            continue
        if d < 0:
            report.add("negative_duration", line_no)
            continue
        ca = codes.get(a)
        if ca is None:
            ca = codes[a] = len(codes)
        cb = codes.get(b)
        if cb is None:
            cb = codes[b] = len(codes)
        caller.append(ca)
        callee.append(cb)
        start.append(t)
        dur.append(d)
        status.append(s)

    report.lines_read = line_no
    report.records = len(caller)
    if report.n_errors:
        logger.warning("skipped %d malformed CDR rows", report.n_errors)

    labels = np.empty(len(codes), dtype=object)
    labels[:] = list(codes)
    order = np.argsort(labels, kind="stable")
    rank = np.empty(len(order), dtype=np.int64)
    rank[order] = np.arange(len(order))

    def col(a):
        return np.frombuffer(a, dtype=np.int64) if len(a) else np.zeros(0, dtype=np.int64)

    table = CallTable(labels[order], rank[col(caller)], rank[col(callee)],
                      col(start), col(dur), col(status))
    return table, report


def read_cdr(path: str | os.PathLike, config: IngestConfig | None = None):
    """Open ``path`` and parse it; identifiers keep arbitrary bytes via surrogateescape."""
    with open(path, encoding="utf-8", errors="surrogateescape", newline="") as fh:
        return parse_records(fh, config)


def _epoch_days(dates) -> np.ndarray:
    return np.array(sorted((d - dt.date(1970, 1, 1)).days for d in dates), dtype=np.int64)


def filter_valid(records: CallTable, excluded_dates=(), timezone_offset_minutes: int = 480) -> CallTable:
    """Keep successful calls (status 1) between distinct users, off excluded days.

    Calendar days are evaluated in local time ``UTC + timezone_offset_minutes``
    and keyed on the call's start time.
    """
    if not isinstance(records, CallTable):
        records = CallTable.from_records(records)
    keep = (records.status == 1) & (records.caller != records.callee)
    dates = [d if isinstance(d, dt.date) else dt.date.fromisoformat(str(d)) for d in excluded_dates]
    if dates:
        local = records.start_time + 60 * int(timezone_offset_minutes)
        day = np.floor_divide(local, SECONDS_PER_DAY)
        keep &= ~np.isin(day, _epoch_days(dates))
    return records.take(keep)


class PairStats:
    """Directed per-pair call counts and total durations.

    Pairs are stored sorted by (caller, callee) code, i.e. lexicographically by
    identifier. ``labels`` lists exactly the users appearing in some pair.
    Instances are treated as immutable; :meth:`merge` returns a new object.
    """

    def __init__(self, labels, src, dst, count, duration):
        self.labels = np.asarray(labels, dtype=object)
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.count = np.asarray(count, dtype=np.int64)
        self.duration = np.asarray(duration, dtype=np.int64)
        if np.any(self.src == self.dst):
            raise ValueError("self-pairs are not allowed")
        if np.any(self.count < 1):
            raise ValueError("every stored pair needs at least one call")
        if np.any(self.duration < 0):
            raise ValueError("durations must be non-negative")

    @classmethod
    def empty(cls) -> "PairStats":
        z = np.zeros(0, dtype=np.int64)
        return cls(np.array([], dtype=object), z, z, z, z)

    @classmethod
    def from_dict(cls, mapping) -> "PairStats":
        """Build from ``{(i, j): (count, duration)}``."""
        records = []
        for (i, j), (c, d) in mapping.items():
            records.append((str(i), str(j), int(c), int(d)))
        if not records:
            return cls.empty()
        ids = np.array([r[0] for r in records] + [r[1] for r in records], dtype=object)
        labels, codes = np.unique(ids, return_inverse=True)
        n = len(records)
        return _pairs_from_codes(labels, codes[:n], codes[n:],
                                 np.array([r[2] for r in records]),
                                 np.array([r[3] for r in records]))

    def __len__(self):
        return len(self.src)

    def __contains__(self, pair):
        return self._find(pair) is not None

    def __getitem__(self, pair):
        k = self._find(pair)
        if k is None:
            raise KeyError(pair)
        return int(self.count[k]), int(self.duration[k])

    def _find(self, pair):
        i, j = pair
        a = np.searchsorted(self.labels, i)
        b = np.searchsorted(self.labels, j)
        if a >= len(self.labels) or b >= len(self.labels) or self.labels[a] != i or self.labels[b] != j:
            return None
        n = len(self.labels)
        keys = self.src * n + self.dst
        k = np.searchsorted(keys, a * n + b)
        return k if k < len(keys) and keys[k] == a * n + b else None

    def items(self):
        for s, d, c, t in zip(self.src, self.dst, self.count, self.duration):
            yield (self.labels[s], self.labels[d]), (int(c), int(t))

    def to_dict(self) -> dict:
        return dict(self.items())

    def __eq__(self, other):
        if not isinstance(other, PairStats):
            return NotImplemented
        return (np.array_equal(self.labels, other.labels)
                and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst)
                and np.array_equal(self.count, other.count)
                and np.array_equal(self.duration, other.duration))

    def __repr__(self):
        return f"PairStats({len(self)} pairs, {len(self.labels)} users)"

    @property
    def total_calls(self) -> int:
        return int(self.count.sum())

    def merge(self, other: "PairStats") -> "PairStats":
        """Sum two partial aggregates (commutative and associative)."""
        if len(self) == 0:
            return other
        if len(other) == 0:
            return self
        labels, inv = np.unique(np.concatenate([self.labels, other.labels]), return_inverse=True)
        ma, mb = inv[: len(self.labels)], inv[len(self.labels):]
        return _pairs_from_codes(
            labels,
            np.concatenate([ma[self.src], mb[other.src]]),
            np.concatenate([ma[self.dst], mb[other.dst]]),
            np.concatenate([self.count, other.count]),
            np.concatenate([self.duration, other.duration]),
        )


def _pairs_from_codes(labels, src, dst, count, duration) -> PairStats:
    n = len(labels)
    keys = np.asarray(src, dtype=np.int64) * n + np.asarray(dst, dtype=np.int64)
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]]) if len(keys) else np.zeros(0, np.int64)
    uniq = keys[starts]
    cnt = np.add.reduceat(np.asarray(count, dtype=np.int64)[order], starts) if len(keys) else uniq
    tot = np.add.reduceat(np.asarray(duration, dtype=np.int64)[order], starts) if len(keys) else uniq
    s, d = np.divmod(uniq, n) if n else (uniq, uniq)
    used = np.union1d(s, d)
    remap = np.full(n, -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    return PairStats(labels[used], remap[s], remap[d], cnt, tot)


def aggregate_pairs(records: CallTable) -> PairStats:
    """Count calls and sum durations per ordered (caller, callee) pair.

    Expects records that already went through :func:`filter_valid`.
    """
    if not isinstance(records, CallTable):
        records = CallTable.from_records(records)
    if len(records) == 0:
        return PairStats.empty()
    if np.any(records.caller == records.callee):
        raise ValueError("self-calls present; run filter_valid first")
    return _pairs_from_codes(records.labels, records.caller, records.callee,
                             np.ones(len(records), dtype=np.int64), records.duration)
