"""Plain-text artifacts: CDR files, networks, validation reports, tables, configs.

All writers are deterministic so reruns give byte-identical files. Networks
and reports are tab-separated; labels therefore may not contain tabs or
newlines.
"""
from __future__ import annotations

import os
from typing import Iterable

import numpy as np

from .ingest import CallTable
from .netbuild import DIRECTED, MUTUAL, CallNetwork
from .validate import ValidationReport

__all__ = [
    "write_cdr",
    "write_truth",
    "read_truth",
    "write_network",
    "read_network",
    "write_report",
    "read_report",
    "Table",
    "write_table",
    "read_table",
    "read_config",
]

_CHUNK = 200_000


def _check_labels(labels):
    for lab in labels:
        if "\t" in lab or "\n" in lab:
            raise ValueError(f"label {lab!r} contains a tab or newline")


def write_cdr(table: CallTable, path, delimiter: str = ",", header: bool = False):
    """Write records as ``caller,callee,start,duration,status`` lines."""
    lab = table.labels
    with open(path, "w", encoding="utf-8", errors="surrogateescape", newline="\n") as fh:
        if header:
            fh.write(delimiter.join(["caller", "callee", "start_time", "duration", "status"]) + "\n")
        for lo in range(0, len(table), _CHUNK):
            hi = min(lo + _CHUNK, len(table))
            a = lab[table.caller[lo:hi]]
            b = lab[table.callee[lo:hi]]
            t = table.start_time[lo:hi].tolist()
            d = table.duration[lo:hi].tolist()
            s = table.status[lo:hi].tolist()
            fh.write("".join(f"{a[k]}{delimiter}{b[k]}{delimiter}{t[k]}{delimiter}{d[k]}{delimiter}{s[k]}\n"
                             for k in range(hi - lo)))


def write_truth(pairs: Iterable, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, j in pairs:
            fh.write(f"{i}\t{j}\n")


def read_truth(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [tuple(line.rstrip("\n").split("\t")) for line in fh if line.strip()]


def write_network(net: CallNetwork, path):
    """Header ``kind<TAB>nodes<TAB>edges``, then one edge per line in (src, dst) order.

    Directed rows: src, dst, a_ij, d_ij. Mutual rows: i, j, a_ij, a_ji, d_ij, d_ji.
    """
    _check_labels(net.labels)
    lab = net.labels
    with open(path, "w", encoding="utf-8", errors="surrogateescape", newline="\n") as fh:
        fh.write(f"{net.kind}\t{net.n_nodes}\t{net.n_edges}\n")
        for lo in range(0, net.n_edges, _CHUNK):
            sl = slice(lo, min(lo + _CHUNK, net.n_edges))
            s, t = lab[net.src[sl]], lab[net.dst[sl]]
            if net.kind == DIRECTED:
                cols = (net.a[sl].tolist(), net.d[sl].tolist())
                fh.write("".join(f"{s[k]}\t{t[k]}\t{cols[0][k]}\t{cols[1][k]}\n"
                                 for k in range(len(s))))
            else:
                a, ar, d, dr = (x[sl].tolist() for x in (net.a, net.a_rev, net.d, net.d_rev))
                fh.write("".join(f"{s[k]}\t{t[k]}\t{a[k]}\t{ar[k]}\t{d[k]}\t{dr[k]}\n"
                                 for k in range(len(s))))


def read_network(path) -> CallNetwork:
    """Inverse of :func:`write_network`; checks the header counts.

    Rows are parsed in chunks straight into integer arrays, so memory stays
    proportional to the edge count rather than to the text size.
    """
    codes: dict = {}
    src, dst, nums = [], [], []
    n_rows = 0
    with open(path, encoding="utf-8", errors="surrogateescape") as fh:
        head = fh.readline().rstrip("\n").split("\t")
        if len(head) != 3 or head[0] not in (DIRECTED, MUTUAL):
            raise ValueError(f"{path}: bad network header")
        kind, n_nodes, n_edges = head[0], int(head[1]), int(head[2])
        ncol = 4 if kind == DIRECTED else 6
        while True:
            lines = fh.readlines(1 << 25)
            if not lines:
                break
            lines = [line.rstrip("\n") for line in lines if line.strip()]
            fields = "\t".join(lines).split("\t")
            if len(fields) != ncol * len(lines):
                raise ValueError(f"{path}: edge rows must have {ncol} columns")
            intern = codes.setdefault
            src.append(np.array([intern(x, len(codes)) for x in fields[0::ncol]], dtype=np.int64))
            dst.append(np.array([intern(x, len(codes)) for x in fields[1::ncol]], dtype=np.int64))
            try:
                nums.append(np.array([fields[c::ncol] for c in range(2, ncol)], dtype=np.int64))
            except ValueError:
                raise ValueError(f"{path}: non-integer weight") from None
            n_rows += len(lines)
    if n_rows != n_edges:
        raise ValueError(f"{path}: {n_rows} edge rows, header says {n_edges}")
    raw = np.empty(len(codes), dtype=object)
    raw[:] = list(codes)
    order = np.argsort(raw, kind="stable")
    rank = np.empty(len(order), dtype=np.int64)
    rank[order] = np.arange(len(order))
    labels = raw[order]
    z = np.zeros(0, dtype=np.int64)
    src = rank[np.concatenate(src)] if src else z
    dst = rank[np.concatenate(dst)] if dst else z
    nums = np.concatenate(nums, axis=1) if nums else np.zeros((ncol - 2, 0), dtype=np.int64)
    if kind == DIRECTED:
        net = CallNetwork(kind, labels, src, dst, nums[0], nums[1])
    else:
        net = CallNetwork(kind, labels, src, dst, nums[0], nums[2], a_rev=nums[1], d_rev=nums[3])
    if net.n_nodes != n_nodes:
        raise ValueError(f"{path}: header says {n_nodes} nodes, edges span {net.n_nodes}")
    return net


def write_report(report: ValidationReport, path):
    """Header lines ``# key=value``, a column line, then one line per tested link."""
    lab = report.labels
    with open(path, "w", encoding="utf-8", errors="surrogateescape", newline="\n") as fh:
        fh.write(f"# kind={report.kind}\n# N={report.n_total}\n# N_T={report.n_tests}\n"
                 f"# alpha={report.alpha!r}\n# mode={report.mode}\n# p_b={report.p_b:.16e}\n"
                 f"# n_scope={report.n_scope}\n")
        fh.write("src\tdst\tX_obs\tN_ic\tN_jr\tp_value\tverdict\n")
        val = report.validated
        cols = [x.tolist() for x in (report.x_obs, report.n_ic, report.n_jr)]
        pv = report.p_value
        for k in range(len(report)):
            verdict = "validated" if val[k] else "rejected"
            fh.write(f"{lab[report.src[k]]}\t{lab[report.dst[k]]}\t{cols[0][k]}\t{cols[1][k]}\t"
                     f"{cols[2][k]}\t{pv[k]:.16e}\t{verdict}\n")


def read_report(path) -> ValidationReport:
    meta = {}
    rows = []
    with open(path, encoding="utf-8", errors="surrogateescape") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                k, v = line[2:].split("=", 1)
                meta[k] = v
            elif line.startswith("src\t"):
                continue
            elif line:
                rows.append(line.split("\t"))
    ends = np.array([r[0] for r in rows] + [r[1] for r in rows], dtype=object)
    labels, codes = np.unique(ends, return_inverse=True) if rows else (np.array([], dtype=object), np.zeros(0, np.int64))
    n = len(rows)
    ints = np.array([r[2:5] for r in rows], dtype=np.int64).reshape(n, 3)
    pv = np.array([float(r[5]) for r in rows])
    return ValidationReport(meta["kind"], labels, codes[:n], codes[n:], ints[:, 0], ints[:, 1],
                            ints[:, 2], pv, int(meta["N"]), int(meta["N_T"]),
                            float(meta["alpha"]), meta["mode"], float(meta["p_b"]),
                            meta.get("n_scope", "self"))


class Table:
    """A named tidy table: ``columns`` names plus a list of row tuples."""

    def __init__(self, name: str, columns, rows=(), meta=None):
        self.name = name
        self.columns = list(columns)
        self.rows = [tuple(r) for r in rows]
        self.meta = dict(meta or {})

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def where(self, **match) -> "Table":
        idx = [self.columns.index(k) for k in match]
        vals = list(match.values())
        rows = [r for r in self.rows if all(r[i] == v for i, v in zip(idx, vals))]
        return Table(self.name, self.columns, rows, self.meta)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return "nan" if np.isnan(v) else f"{float(v):.12g}"
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_table(table: Table, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {table.name}\n")
        for k, v in table.meta.items():
            fh.write(f"# {k}={v}\n")
        fh.write("\t".join(table.columns) + "\n")
        for r in table.rows:
            fh.write("\t".join(_fmt(v) for v in r) + "\n")


def _parse_cell(s: str):
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def read_table(path) -> Table:
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or not lines[0].startswith("# "):
        raise ValueError(f"{path}: not a table file")
    name = lines[0][2:]
    meta = {}
    k = 1
    while k < len(lines) and lines[k].startswith("# "):
        key, val = lines[k][2:].split("=", 1)
        meta[key] = val
        k += 1
    columns = lines[k].split("\t")
    rows = [tuple(_parse_cell(c) for c in line.split("\t")) for line in lines[k + 1:] if line]
    return Table(name, columns, rows, meta)


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(os.fspath(path), encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out
