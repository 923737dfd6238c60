"""Command-line pipeline: generate -> build -> validate -> components/analyze -> fit.

Every stage reads and writes plain-text artifacts in a working directory, so
each can be rerun on its own. Options may also come from a ``key=value``
config file (``--config``); flags given on the command line win.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import logging
import os
import resource
import sys
import time
from pathlib import Path

import numpy as np

from . import formats
from .components import component_size_distribution, connected_components, giant_component, snowball_growth
from .figures import FIGURES, build_tables
from .fitting import FitError, EmpiricalPdf, fit_bipowerlaw, fit_powerlaw_tail, fit_truncated_powerlaw
from .ingest import IngestConfig, aggregate_pairs, filter_valid, read_cdr
from .netbuild import build_dcn, build_mcn
from .synth import SynthConfig, generate_null_cdr, generate_social_cdr, plant_random_ties
from .validate import ThresholdPolicy, validate_dcn, validate_mcn

log = logging.getLogger("callnet")

NETWORK_FILES = {"DCN": "dcn.tsv", "MCN": "mcn.tsv", "SVDCN": "svdcn.tsv", "SVMCN": "svmcn.tsv",
                 "SVGCDCN": "svgcdcn.tsv", "SVGCMCN": "svgcmcn.tsv"}


class UsageError(Exception):
    pass


def _truthy(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {v!r}")


class Options:
    """Command-line values with config-file fallback."""

    def __init__(self, args, cfg):
        self.args = args
        self.cfg = cfg

    def get(self, name, default=None, conv=None):
        v = getattr(self.args, name, None)
        if v is None:
            v = self.cfg.get(name, self.cfg.get(name.replace("_", "-")))
        if v is None:
            return default
        if conv is not None:
            try:
                return conv(v)
            except (TypeError, ValueError) as exc:
                raise UsageError(f"bad value for {name}: {v!r} ({exc})") from None
        return v


def _peak_rss_mb() -> float:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0


def _table1_rows(nets):
    lines = [f"{'CN':>8} {'N_node':>10} {'N_edge':>10} {'N_comp':>8} {'N_GC,node':>10} {'N_GC,edge':>10}"]
    for name in ("DCN", "SVDCN", "MCN", "SVMCN"):
        if name not in nets:
            continue
        net = nets[name]
        if net.n_nodes:
            part = connected_components(net)
            gc = giant_component(net, part)
            ncomp, gn, ge = part.n_components, gc.n_nodes, gc.n_edges
        else:
            ncomp = gn = ge = 0
        lines.append(f"{name:>8} {net.n_nodes:>10} {net.n_edges:>10} {ncomp:>8} {gn:>10} {ge:>10}")
    return "\n".join(lines)


def _load_networks(workdir: Path, names=None):
    out = {}
    for name, fname in NETWORK_FILES.items():
        if names is not None and name not in names:
            continue
        p = workdir / fname
        if p.exists():
            out[name] = formats.read_network(p)
    return out


# -- subcommands ---------------------------------------------------------------

def cmd_generate(opt: Options) -> int:
    out = opt.get("out")
    if not out:
        raise UsageError("generate needs --out")
    preset = opt.get("preset", "null")
    seed = opt.get("seed", 0, int)
    n_users = opt.get("users", 10_000, int)
    activity = opt.get("activity", "uniform")
    if activity != "uniform":
        try:
            kind, g, xc = activity.split(":")
            activity = ("truncated_powerlaw", float(g), float(xc))
        except ValueError:
            raise UsageError(f"bad activity spec {activity!r}; use uniform or tpl:gamma:x_c") from None
    cfg = SynthConfig(n_users=n_users, n_calls=opt.get("calls", 100_000, int), activity=activity)
    try:
        if preset == "social":
            cfg.ties = plant_random_ties(n_users, opt.get("ties", 20, int), opt.get("tie_calls", 40, int), seed)
            cfg.hotlines = tuple(int(x) for x in opt.get("hotlines", "0:0").split(":"))
            cfg.robots = tuple(int(x) for x in opt.get("robots", "0:0").split(":"))
        cfg.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if preset == "null":
        records = generate_null_cdr(cfg, seed)
        truth = None
    elif preset == "social":
        records, truth = generate_social_cdr(cfg, seed)
    else:
        raise UsageError(f"unknown preset {preset!r}")
    formats.write_cdr(records, out)
    print(f"wrote {len(records)} records to {out}")
    if truth is not None:
        tpath = opt.get("truth") or str(out) + ".truth"
        formats.write_truth(truth, tpath)
        print(f"wrote {len(truth)} planted ties to {tpath}")
    return 0


def _ingest_config(opt: Options) -> IngestConfig:
    dates = opt.get("excluded_dates", "")
    try:
        return IngestConfig(
            delimiter=opt.get("delimiter", ","),
            has_header=opt.get("has_header", False, _truthy),
            timezone_offset_minutes=opt.get("timezone_offset_minutes", 480, int),
            excluded_dates=[d for d in str(dates).split(",") if d.strip()],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_build(opt: Options) -> int:
    inp = opt.get("input")
    workdir = Path(opt.get("dir", "."))
    if not inp:
        raise UsageError("build needs --input")
    if not Path(inp).exists():
        raise UsageError(f"input file {inp} does not exist")
    workdir.mkdir(parents=True, exist_ok=True)
    icfg = _ingest_config(opt)
    t0 = time.perf_counter()
    table, report = read_cdr(inp, icfg)
    (workdir / "parse_errors.txt").write_text(report.to_text())
    if report.n_errors:
        print(f"{report.n_errors} malformed rows skipped; see {workdir / 'parse_errors.txt'}", file=sys.stderr)
        if report.records == 0:
            return 1
    valid = filter_valid(table, icfg.excluded_dates, icfg.timezone_offset_minutes)
    del table
    stats = aggregate_pairs(valid)
    del valid
    dcn, mcn = build_dcn(stats), build_mcn(stats)
    formats.write_network(dcn, workdir / "dcn.tsv")
    formats.write_network(mcn, workdir / "mcn.tsv")
    elapsed = time.perf_counter() - t0
    if dcn.n_edges == 0:
        print("warning: no valid calls; networks are empty", file=sys.stderr)
    print(_table1_rows({"DCN": dcn, "MCN": mcn}))
    log.info("build: %.1f s wall, peak RSS %.0f MB", elapsed, _peak_rss_mb())
    print(f"# wall_seconds={elapsed:.2f} peak_rss_mb={_peak_rss_mb():.0f}")
    return 0


def cmd_validate(opt: Options) -> int:
    workdir = Path(opt.get("dir", "."))
    nets = _load_networks(workdir, {"DCN", "MCN"})
    if set(nets) != {"DCN", "MCN"}:
        raise UsageError(f"{workdir} lacks dcn.tsv/mcn.tsv; run build first")
    try:
        policy = ThresholdPolicy(opt.get("alpha", 0.01, float), opt.get("correction", "per-test"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    scope = opt.get("mcn_n_scope", "mcn")
    if scope not in ("mcn", "dcn"):
        raise UsageError("--mcn-n-scope must be mcn or dcn")
    threads = opt.get("threads", 1, int)
    dcn, mcn = nets["DCN"], nets["MCN"]
    svdcn, rep_d = validate_dcn(dcn, policy, threads=threads)
    svmcn, rep_m = validate_mcn(mcn, policy, n_scope=scope, dcn=dcn, threads=threads)
    formats.write_network(svdcn, workdir / "svdcn.tsv")
    formats.write_network(svmcn, workdir / "svmcn.tsv")
    formats.write_report(rep_d, workdir / "report_dcn.tsv")
    formats.write_report(rep_m, workdir / "report_mcn.tsv")
    # validated networks of the giant components: extract first, then validate inside
    for base, name in ((dcn, "SVGCDCN"), (mcn, "SVGCMCN")):
        if base.n_nodes == 0:
            sv = base
        else:
            gc = giant_component(base)
            sv = (validate_dcn(gc, policy, threads=threads)[0] if gc.directed
                  else validate_mcn(gc, policy, n_scope="mcn", threads=threads)[0])
        formats.write_network(sv, workdir / NETWORK_FILES[name])
    print(f"# DCN: N={rep_d.n_total} N_T={rep_d.n_tests} p_b={rep_d.p_b:.6e} validated={rep_d.n_validated}")
    print(f"# MCN: N={rep_m.n_total} N_T={rep_m.n_tests} p_b={rep_m.p_b:.6e} validated_edges={svmcn.n_edges}")
    print(_table1_rows({"DCN": dcn, "SVDCN": svdcn, "MCN": mcn, "SVMCN": svmcn}))
    truth_path = opt.get("truth")
    if truth_path:
        truth = formats.read_truth(truth_path)
        found = set(map(tuple, (sorted(k) for k in svmcn.edge_dict())))
        hit = sum(1 for t in truth if tuple(sorted(t)) in found)
        recall = hit / len(truth) if truth else float("nan")
        print(f"planted_tie_recall={recall:.4f} ({hit}/{len(truth)})")
    return 0


def cmd_components(opt: Options) -> int:
    workdir = Path(opt.get("dir", "."))
    nets = _load_networks(workdir)
    if not nets:
        raise UsageError(f"no networks in {workdir}; run build first")
    n_sources = opt.get("sources", 10, int)
    max_d = opt.get("max_distance", 12, int)
    seed = opt.get("seed", 0, int)
    for name, net in nets.items():
        if net.n_nodes == 0:
            continue
        hist = component_size_distribution(connected_components(net), exclude_giant=True)
        with open(workdir / f"components_{name.lower()}.tsv", "w", newline="\n") as fh:
            fh.write("size\tcount\n")
            fh.writelines(f"{s}\t{c}\n" for s, c in hist.items())
        if name in ("DCN", "MCN"):
            gc = giant_component(net)
            sb = snowball_growth(gc, min(n_sources, gc.n_nodes), max_d, seed)
            with open(workdir / f"snowball_gc{name.lower()}.tsv", "w", newline="\n") as fh:
                fh.write("\t".join(["l"] + [str(s) for s in sb.sources] + ["mean"]) + "\n")
                for l in range(max_d + 1):
                    vals = "\t".join(str(int(v)) for v in sb.curves[:, l])
                    fh.write(f"{l}\t{vals}\t{sb.mean[l]:.12g}\n")
    print(f"component tables written to {workdir}")
    return 0


def cmd_analyze(opt: Options) -> int:
    workdir = Path(opt.get("dir", "."))
    nets = _load_networks(workdir)
    if not {"DCN", "MCN"} <= set(nets):
        raise UsageError(f"{workdir} lacks dcn.tsv/mcn.tsv; run build first")
    only = opt.get("only")
    only = [s.strip() for s in only.split(",") if s.strip()] if only else None
    if only:
        bad = [f for f in only if f not in FIGURES]
        if bad:
            raise UsageError(f"unknown figure ids: {', '.join(bad)}")
    outdir = Path(opt.get("out") or workdir / "tables")
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        tables = build_tables(nets, only, seed=opt.get("seed", 0, int),
                              n_sources=opt.get("sources", 10, int),
                              max_distance=opt.get("max_distance", 12, int))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    manifest = []
    for fid, table in tables.items():
        fname = f"{fid}.tsv"
        formats.write_table(table, outdir / fname)
        manifest.append(f"{fid}\t{table.name}\t{fname}\t{len(table)}\t{FIGURES[fid][0]}\n")
    with open(outdir / "manifest.tsv", "w", newline="\n") as fh:
        fh.write("figure\ttable\tfile\trows\tdescription\n")
        fh.writelines(manifest)
    print(f"{len(tables)} tables written to {outdir}")
    return 0


DEFAULT_MODELS = {
    "fig1a": "powerlaw_tail", "fig1b": "powerlaw_tail",
    "fig2a": "truncated_powerlaw", "fig2b": "truncated_powerlaw",
    "fig2c": "truncated_powerlaw", "fig2d": "truncated_powerlaw",
    "fig4a": "bipowerlaw", "fig4b": "truncated_powerlaw",
    "fig6a": "truncated_powerlaw", "fig6b": "truncated_powerlaw",
}


def _parse_range(s):
    if s is None:
        return None
    lo, hi = s.split(":")
    conv = lambda v: None if v.strip().lower() in ("", "inf", "-inf") else float(v)
    return conv(lo), conv(hi)


def _pdf_from_rows(rows, discrete=True) -> EmpiricalPdf:
    lo = np.array([r[0] for r in rows], dtype=float)
    hi = np.array([r[1] for r in rows], dtype=float)
    edges = np.r_[lo, hi[-1]] if len(rows) else np.zeros(1)
    # tables only carry occupied bins; gaps become zero-count bins
    if len(rows) > 1 and np.any(lo[1:] != hi[:-1]):
        edges = np.unique(np.r_[lo, hi])
    x = np.sqrt(edges[:-1] * edges[1:])
    density = np.zeros(len(edges) - 1)
    count = np.zeros(len(edges) - 1, dtype=np.int64)
    pos = np.searchsorted(edges, lo)
    for p, r in zip(pos, rows):
        x[p], density[p], count[p] = r[2], r[3], r[4]
    return EmpiricalPdf(edges, x, density, count, discrete)


def _components_pdf(rows):
    sizes = np.repeat([r[0] for r in rows], [r[1] for r in rows])
    from .fitting import empirical_pdf
    return empirical_pdf(sizes, discrete=True)


def cmd_fit(opt: Options) -> int:
    workdir = Path(opt.get("dir", "."))
    tdir = Path(opt.get("tables") or workdir / "tables")
    only = opt.get("only")
    figs = [s.strip() for s in only.split(",")] if only else list(DEFAULT_MODELS)
    blocks = []
    failures = 0
    for fid in figs:
        path = tdir / f"{fid}.tsv"
        if not path.exists():
            if only:
                raise UsageError(f"table {path} not found; run analyze first")
            continue
        table = formats.read_table(path)
        model = opt.cfg.get(f"model.{fid}", DEFAULT_MODELS.get(fid, "truncated_powerlaw"))
        frange = _parse_range(opt.cfg.get(f"fit_range.{fid}"))
        groups = {}
        if fid in ("fig1a", "fig1b"):
            for net, size, count in table.rows:
                groups.setdefault((net, "size"), []).append((size, count))
        else:
            for r in table.rows:
                groups.setdefault((r[0], r[1]), []).append(r[2:])
        for (net, series), rows in sorted(groups.items()):
            head = f"[{fid} {net} {series}]"
            try:
                pdf = _components_pdf(rows) if fid in ("fig1a", "fig1b") else _pdf_from_rows(rows)
                if model == "truncated_powerlaw":
                    res = fit_truncated_powerlaw(pdf, frange)
                elif model == "powerlaw_tail":
                    xmin = float(opt.cfg.get(f"x_min.{fid}", frange[0] if frange and frange[0] else 1.0))
                    res = fit_powerlaw_tail(pdf, xmin)
                elif model == "bipowerlaw":
                    res = fit_bipowerlaw(pdf, float(opt.cfg.get(f"breakpoint.{fid}", 120)))
                else:
                    raise UsageError(f"unknown model {model!r} for {fid}")
                blocks.append(f"{head}\n{res.to_text()}")
            except FitError as exc:
                failures += 1
                blocks.append(f"{head}\nerror={exc}\n")
                print(f"fit failed {head}: {exc}", file=sys.stderr)
    out = Path(opt.get("out") or workdir / "fits.txt")
    out.write_text("\n".join(blocks))
    print(f"{len(blocks)} fit blocks written to {out}")
    return 1 if failures else 0


def cmd_report(opt: Options) -> int:
    workdir = Path(opt.get("dir", "."))
    nets = _load_networks(workdir)
    if not nets:
        raise UsageError(f"no networks in {workdir}")
    print(_table1_rows(nets))
    return 0


COMMANDS = {
    "generate": cmd_generate, "build": cmd_build, "validate": cmd_validate,
    "components": cmd_components, "analyze": cmd_analyze, "fit": cmd_fit, "report": cmd_report,
}


def make_parser() -> argparse.ArgumentParser:
    def global_flags(default):
        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--config", default=default, help="flat key=value config file")
        g.add_argument("--threads", type=int, default=default,
                       help="worker threads (results do not depend on it)")
        g.add_argument("--seed", type=int, default=default)
        g.add_argument("-v", "--verbose", action="store_true", default=default)
        return g

    # subcommands repeat the global flags without clobbering values given before them
    glob = global_flags(argparse.SUPPRESS)
    p = argparse.ArgumentParser(prog="callnet", parents=[global_flags(None)],
                                description="Calling-network construction, validation and analysis.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[glob], help="write a synthetic CDR file")
    g.add_argument("--preset", choices=["null", "social"])
    g.add_argument("--calls", type=int)
    g.add_argument("--users", type=int)
    g.add_argument("--activity", help="uniform or tpl:gamma:x_c")
    g.add_argument("--ties", type=int)
    g.add_argument("--tie-calls", dest="tie_calls", type=int)
    g.add_argument("--hotlines", help="count:calls")
    g.add_argument("--robots", help="count:calls")
    g.add_argument("--out", required=True)
    g.add_argument("--truth")

    b = sub.add_parser("build", parents=[glob], help="CDR file -> DCN and MCN")
    b.add_argument("--input", required=True)
    b.add_argument("--dir")
    b.add_argument("--delimiter")
    b.add_argument("--has-header", dest="has_header", action="store_const", const=True)
    b.add_argument("--timezone-offset-minutes", dest="timezone_offset_minutes", type=int)
    b.add_argument("--excluded-dates", dest="excluded_dates", help="comma-separated ISO dates")

    v = sub.add_parser("validate", parents=[glob], help="Bonferroni networks SVDCN and SVMCN")
    v.add_argument("--dir")
    v.add_argument("--alpha", type=float)
    v.add_argument("--correction", choices=["per-test", "per-pair", "fixed"])
    v.add_argument("--mcn-n-scope", dest="mcn_n_scope", choices=["mcn", "dcn"])
    v.add_argument("--truth")

    c = sub.add_parser("components", parents=[glob], help="component sizes and snowball curves")
    c.add_argument("--dir")
    c.add_argument("--sources", type=int)
    c.add_argument("--max-distance", dest="max_distance", type=int)

    a = sub.add_parser("analyze", parents=[glob], help="per-figure tables")
    a.add_argument("--dir")
    a.add_argument("--only", help="comma-separated figure ids, e.g. fig3a,fig9b")
    a.add_argument("--out")
    a.add_argument("--sources", type=int)
    a.add_argument("--max-distance", dest="max_distance", type=int)

    f = sub.add_parser("fit", parents=[glob], help="fit distribution tables")
    f.add_argument("--dir")
    f.add_argument("--tables")
    f.add_argument("--only")
    f.add_argument("--out")

    r = sub.add_parser("report", parents=[glob], help="network size summary")
    r.add_argument("--dir")
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)  # exits with 2 on usage errors
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = formats.read_config(args.config) if args.config else {}
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.threads is None:
        args.threads = int(cfg.get("threads", os.cpu_count() or 1))
    opt = Options(args, cfg)
    try:
        return COMMANDS[args.command](opt)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
