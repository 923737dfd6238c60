"""Tidy tables behind each figure panel of the calling-network analysis.

``build_tables`` takes a dict of networks keyed by name (``DCN``, ``SVDCN``,
``MCN``, ``SVMCN``; optionally ``SVGCDCN``/``SVGCMCN``) and returns
:class:`~callnet.formats.Table` objects keyed by figure id. Giant components
(``GCDCN`` ...) are derived on demand.
"""
from __future__ import annotations

from functools import cached_property

import numpy as np

from . import metrics as M
from .components import component_size_distribution, connected_components, giant_component, snowball_growth
from .fitting import FitError, empirical_pdf
from .formats import Table
from .netbuild import CallNetwork

__all__ = ["FIGURES", "SV_DEPENDENT", "Analysis", "build_tables"]

DIRECTED_GC = ("GCDCN", "GCSVDCN")
MUTUAL_GC = ("GCMCN", "GCSVMCN")
ALL_GC = DIRECTED_GC + MUTUAL_GC

PDF_COLS = ["network", "series", "bin_lo", "bin_hi", "x", "density", "count"]
CURVE_COLS = ["network", "series", "x_mean", "y_mean", "y_std", "count"]


class Analysis:
    """Lazily computed per-network quantities."""

    def __init__(self, net: CallNetwork):
        self.net = net

    @cached_property
    def degrees(self):
        return M.degree_sequences(self.net)

    @cached_property
    def k(self):
        return self.degrees["k"]

    def s(self, weight="number", direction="all"):
        return self._strengths[(weight, direction)]

    @cached_property
    def _strengths(self):
        dirs = ("all", "in", "out") if self.net.directed else ("all",)
        return {(w, d): M.node_strengths(self.net, w, d)
                for w in ("number", "duration") for d in dirs}

    @cached_property
    def edges(self):
        return self.net.undirected

    @cached_property
    def clustering(self):
        return M.clustering_coefficient(self.net)

    @cached_property
    def overlap(self):
        return M.edge_overlap(self.net)


class _Networks:
    def __init__(self, nets: dict):
        self.nets = dict(nets)
        self._an = {}

    def has(self, name):
        if name in self.nets:
            return True
        return name.startswith("GC") and name[2:] in self.nets

    def __getitem__(self, name) -> CallNetwork:
        if name not in self.nets:
            if name.startswith("GC") and name[2:] in self.nets:
                base = self.nets[name[2:]]
                self.nets[name] = giant_component(base) if base.n_nodes else base
            else:
                raise KeyError(name)
        return self.nets[name]

    def an(self, name) -> Analysis:
        if name not in self._an:
            self._an[name] = Analysis(self[name])
        return self._an[name]

    def present(self, names):
        return [n for n in names if self.has(n)]


def _pdf_rows(net_name, series, values, discrete):
    values = np.asarray(values)
    values = values[values > 0]
    if len(values) == 0:
        return []
    try:
        pdf = empirical_pdf(values, discrete=discrete)
    except FitError:
        return []
    return [(net_name, series, lo, hi, x, d, c)
            for lo, hi, x, d, c in zip(pdf.edges[:-1], pdf.edges[1:], pdf.x, pdf.density, pdf.count)
            if c > 0]


def _curve_rows(net_name, series, curve: M.BinnedCurve):
    c = curve.occupied()
    return [(net_name, series, x, y, s, n) for x, y, s, n in zip(c.x_mean, c.y_mean, c.y_std, c.count)]


_WEIGHTS = (("N", "number"), ("D", "duration"))


def _component_table(fid, nets: _Networks, names):
    rows = []
    for name in nets.present(names):
        net = nets[name]
        if net.n_nodes == 0:
            continue
        hist = component_size_distribution(connected_components(net), exclude_giant=True)
        rows += [(name, s, c) for s, c in hist.items()]
    return Table(fid, ["network", "size", "count"], rows)


def _snowball_table(fid, nets: _Networks, name, n_sources, max_distance, seed):
    net = nets[name]
    n_src = min(n_sources, net.n_nodes)
    if n_src == 0:
        return Table(fid, ["l", "mean"], [])
    sb = snowball_growth(net, n_src, max_distance, seed)
    cols = ["l"] + [f"src_{s}" for s in sb.sources] + ["mean"]
    rows = [(l, *sb.curves[:, l].tolist(), float(sb.mean[l])) for l in range(max_distance + 1)]
    return Table(fid, cols, rows, {"network": name, "giant_size": net.n_nodes})


def _degree_pdf(fid, nets, names):
    rows = []
    for name in nets.present(names):
        an = nets.an(name)
        keys = ("k_in", "k_out") if nets[name].directed else ("k",)
        for key in keys:
            rows += _pdf_rows(name, key, an.degrees[key], discrete=True)
    return Table(fid, PDF_COLS, rows)


def _weight_pdf(fid, nets, names, wk):
    rows = []
    for name in nets.present(names):
        _, _, wn, wd = nets.an(name).edges
        rows += _pdf_rows(name, "w" + wk, wn if wk == "N" else wd, discrete=True)
    return Table(fid, PDF_COLS, rows)


def _strength_pdf(fid, nets, names, wk, weight):
    rows = []
    for name in nets.present(names):
        an = nets.an(name)
        dirs = ("in", "out") if nets[name].directed else ("all",)
        for d in dirs:
            series = f"s{wk}" + ("" if d == "all" else f"_{d}")
            rows += _pdf_rows(name, series, an.s(weight, d), discrete=True)
    return Table(fid, PDF_COLS, rows)


def _knn_table(fid, nets, names, weighted):
    rows = []
    for name in nets.present(names):
        net = nets[name]
        if net.n_edges == 0:
            continue
        if weighted:
            for wk, weight in _WEIGHTS:
                rows += _curve_rows(name, f"knn{wk}", M.weighted_ann_degree(net, weight))
        else:
            rows += _curve_rows(name, "knn", M.avg_nearest_neighbor_degree(net))
    return Table(fid, CURVE_COLS, rows)


def _ratio_table(fid, nets, names, on_edges):
    rows = []
    for name in nets.present(names):
        an = nets.an(name)
        if on_edges:
            _, _, wn, wd = an.edges
            x, y = wn, wd
            series = "wD/wN"
        else:
            x, y = an.s("number"), an.s("duration")
            series = "sD/sN"
        if len(x) == 0:
            continue
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(x > 0, y / np.where(x > 0, x, 1), np.nan)
        rows += _curve_rows(name, series, M.conditional_average(x, ratio, "log"))
    return Table(fid, CURVE_COLS, rows)


def _scatter_table(fid, nets, names, n_sample, seed):
    rows = []
    meta = {}
    rng = np.random.default_rng(seed)
    for name in nets.present(names):
        _, _, wn, wd = nets.an(name).edges
        if len(wn) < 2:
            continue
        meta[f"pearson.{name}"] = f"{M.pearson(wn, wd):.6f}"
        meta[f"spearman.{name}"] = f"{M.spearman(wn, wd):.6f}"
        pick = np.sort(rng.choice(len(wn), size=min(n_sample, len(wn)), replace=False))
        rows += [(name, int(a), int(b)) for a, b in zip(wn[pick], wd[pick])]
    return Table(fid, ["network", "wN", "wD"], rows, meta)


def _snn_table(fid, nets, names, weight, wk):
    rows = []
    for name in nets.present(names):
        if nets[name].n_edges == 0:
            continue
        _, curve = M.strength_nn(nets[name], weight)
        rows += _curve_rows(name, f"s{wk}nn", curve)
    return Table(fid, CURVE_COLS, rows)


def _s_vs_k(fid, nets, names):
    rows = []
    for name in nets.present(names):
        an = nets.an(name)
        if nets[name].directed:
            pairs = [(d, an.degrees[f"k_{d}"]) for d in ("out", "in")]
        else:
            pairs = [("all", an.k)]
        for d, k in pairs:
            for wk, weight in _WEIGHTS:
                series = f"s{wk}" + ("" if d == "all" else f"_{d}")
                s = an.s(weight, d).astype(float)
                mask = k > 0
                rows += _curve_rows(name, series, M.conditional_average(k[mask], s[mask], "integer"))
    return Table(fid, CURVE_COLS, rows)


def _products(fid, nets, names, kind):
    rows = []
    for name in nets.present(names):
        an = nets.an(name)
        net = nets[name]
        if net.n_edges == 0:
            continue
        _, _, wn, wd = an.edges
        kk = M.endpoint_products(net, an.k)
        for wk, weight in _WEIGHTS:
            ss = M.endpoint_products(net, an.s(weight))
            w = wn if wk == "N" else wd
            if kind == "ss_kk":
                x, y, series = kk, ss, f"s{wk}s{wk}|kk"
            elif kind == "w_kk":
                x, y, series = kk, w, f"w{wk}|kk"
            else:
                x, y, series = ss, w, f"w{wk}|s{wk}s{wk}"
            rows += _curve_rows(name, series, M.conditional_average(x, y, "log"))
    return Table(fid, CURVE_COLS, rows)


def _c_vs_k(fid, nets, names):
    rows = []
    meta = {}
    for name in nets.present(names):
        an = nets.an(name)
        if nets[name].n_nodes == 0:
            continue
        cl = an.clustering
        meta[f"mean_C.{name}"] = f"{cl.mean:.6f}"
        meta[f"zero_C_fraction.{name}"] = f"{cl.zero_fraction:.6f}"
        rows += _curve_rows(name, "C", M.conditional_average(an.k, cl.values, "integer"))
    return Table(fid, CURVE_COLS, rows, meta)


def _wc_vs_s(fid, nets, names):
    rows = []
    for name in nets.present(names):
        net = nets[name]
        if net.n_edges == 0:
            continue
        an = nets.an(name)
        for wk, weight in _WEIGHTS:
            cw = M.weighted_clustering(net, weight)
            rows += _curve_rows(name, f"C{wk}", M.conditional_average(an.s(weight), cw, "log"))
    return Table(fid, CURVE_COLS, rows)


def _overlap(fid, nets, names, wk, cumulative):
    rows = []
    meta = {}
    for name in nets.present(names):
        an = nets.an(name)
        if nets[name].n_edges == 0:
            continue
        ov = an.overlap
        _, _, wn, wd = an.edges
        w = (wn if wk == "N" else wd).astype(float)
        x = M.cumulative_rank(w) if cumulative else w
        meta[f"undefined_edges.{name}"] = ov.n_undefined
        d = ov.defined
        series = f"O|Pc(w{wk})" if cumulative else f"O|w{wk}"
        rows += _curve_rows(name, series, M.conditional_average(x[d], ov.overlap[d], "log"))
    return Table(fid, CURVE_COLS, rows, meta)


# figure id -> (description, builder(nets, opts))
FIGURES = {
    "fig1a": ("component size histogram, directed networks",
              lambda n, o: _component_table("fig1a_component_sizes_directed", n, ("DCN", "SVDCN", "SVGCDCN"))),
    "fig1b": ("component size histogram, mutual networks",
              lambda n, o: _component_table("fig1b_component_sizes_mutual", n, ("MCN", "SVMCN", "SVGCMCN"))),
    "fig1d": ("snowball growth N_s(l), GCDCN",
              lambda n, o: _snowball_table("fig1d_snowball_gcdcn", n, "GCDCN", o["n_sources"], o["max_distance"], o["seed"])),
    "fig1e": ("snowball growth N_s(l), GCMCN",
              lambda n, o: _snowball_table("fig1e_snowball_gcmcn", n, "GCMCN", o["n_sources"], o["max_distance"], o["seed"])),
    "fig2a": ("in/out-degree pdf, DCN and SVDCN", lambda n, o: _degree_pdf("fig2a_degree_pdf_directed", n, ("DCN", "SVDCN"))),
    "fig2b": ("in/out-degree pdf, giant components", lambda n, o: _degree_pdf("fig2b_degree_pdf_directed_gc", n, DIRECTED_GC)),
    "fig2c": ("degree pdf, MCN and SVMCN", lambda n, o: _degree_pdf("fig2c_degree_pdf_mutual", n, ("MCN", "SVMCN"))),
    "fig2d": ("degree pdf, mutual giant components", lambda n, o: _degree_pdf("fig2d_degree_pdf_mutual_gc", n, MUTUAL_GC)),
    "fig3a": ("<k_nn|k>, directed giant components", lambda n, o: _knn_table("fig3a_knn_vs_k", n, DIRECTED_GC, False)),
    "fig3b": ("<k_nn|k>, mutual giant components", lambda n, o: _knn_table("fig3b_knn_vs_k", n, MUTUAL_GC, False)),
    "fig3c": ("weighted <k_nn|k>, directed giant components", lambda n, o: _knn_table("fig3c_wknn_vs_k", n, DIRECTED_GC, True)),
    "fig3d": ("weighted <k_nn|k>, mutual giant components", lambda n, o: _knn_table("fig3d_wknn_vs_k", n, MUTUAL_GC, True)),
    "fig4a": ("w^N pdf, directed giant components", lambda n, o: _weight_pdf("fig4a_wN_pdf_directed", n, DIRECTED_GC, "N")),
    "fig4b": ("w^N pdf, mutual giant components", lambda n, o: _weight_pdf("fig4b_wN_pdf_mutual", n, MUTUAL_GC, "N")),
    "fig4c": ("w^D pdf, directed giant components", lambda n, o: _weight_pdf("fig4c_wD_pdf_directed", n, DIRECTED_GC, "D")),
    "fig4d": ("w^D pdf, mutual giant components", lambda n, o: _weight_pdf("fig4d_wD_pdf_mutual", n, MUTUAL_GC, "D")),
    "fig5a": ("w^D vs w^N edge sample, GCMCN", lambda n, o: _scatter_table("fig5a_wD_vs_wN_gcmcn", n, ("GCMCN",), o["sample"], o["seed"])),
    "fig5b": ("w^D vs w^N edge sample, GCSVMCN", lambda n, o: _scatter_table("fig5b_wD_vs_wN_gcsvmcn", n, ("GCSVMCN",), o["sample"], o["seed"])),
    "fig5c": ("<w^D/w^N|w^N>, directed giant components", lambda n, o: _ratio_table("fig5c_wD_over_wN", n, DIRECTED_GC, True)),
    "fig5d": ("<w^D/w^N|w^N>, mutual giant components", lambda n, o: _ratio_table("fig5d_wD_over_wN", n, MUTUAL_GC, True)),
    "fig6a": ("s^N pdf (in/out), directed giant components", lambda n, o: _strength_pdf("fig6a_sN_pdf_directed", n, DIRECTED_GC, "N", "number")),
    "fig6b": ("s^N pdf, mutual giant components", lambda n, o: _strength_pdf("fig6b_sN_pdf_mutual", n, MUTUAL_GC, "N", "number")),
    "fig6c": ("s^D pdf (in/out), directed giant components", lambda n, o: _strength_pdf("fig6c_sD_pdf_directed", n, DIRECTED_GC, "D", "duration")),
    "fig6d": ("s^D pdf, mutual giant components", lambda n, o: _strength_pdf("fig6d_sD_pdf_mutual", n, MUTUAL_GC, "D", "duration")),
    "fig7a": ("<s^N_nn|s^N>, directed giant components", lambda n, o: _snn_table("fig7a_sNnn_vs_sN", n, DIRECTED_GC, "number", "N")),
    "fig7b": ("<s^N_nn|s^N>, mutual giant components", lambda n, o: _snn_table("fig7b_sNnn_vs_sN", n, MUTUAL_GC, "number", "N")),
    "fig7c": ("<s^D_nn|s^D>, directed giant components", lambda n, o: _snn_table("fig7c_sDnn_vs_sD", n, DIRECTED_GC, "duration", "D")),
    "fig7d": ("<s^D_nn|s^D>, mutual giant components", lambda n, o: _snn_table("fig7d_sDnn_vs_sD", n, MUTUAL_GC, "duration", "D")),
    "fig7e": ("<s^D/s^N|s^N>, directed giant components", lambda n, o: _ratio_table("fig7e_sD_over_sN", n, DIRECTED_GC, False)),
    "fig7f": ("<s^D/s^N|s^N>, mutual giant components", lambda n, o: _ratio_table("fig7f_sD_over_sN", n, MUTUAL_GC, False)),
    "fig8a": ("<s|k>, directed giant components", lambda n, o: _s_vs_k("fig8a_s_vs_k", n, DIRECTED_GC)),
    "fig8b": ("<s|k>, mutual giant components", lambda n, o: _s_vs_k("fig8b_s_vs_k", n, MUTUAL_GC)),
    "fig8c": ("<s_i s_j|k_i k_j>, directed giant components", lambda n, o: _products("fig8c_ss_vs_kk", n, DIRECTED_GC, "ss_kk")),
    "fig8d": ("<s_i s_j|k_i k_j>, mutual giant components", lambda n, o: _products("fig8d_ss_vs_kk", n, MUTUAL_GC, "ss_kk")),
    "fig8e": ("<w_ij|k_i k_j>, directed giant components", lambda n, o: _products("fig8e_w_vs_kk", n, DIRECTED_GC, "w_kk")),
    "fig8f": ("<w_ij|k_i k_j>, mutual giant components", lambda n, o: _products("fig8f_w_vs_kk", n, MUTUAL_GC, "w_kk")),
    "fig8g": ("<w_ij|s_i s_j>, directed giant components", lambda n, o: _products("fig8g_w_vs_ss", n, DIRECTED_GC, "w_ss")),
    "fig8h": ("<w_ij|s_i s_j>, mutual giant components", lambda n, o: _products("fig8h_w_vs_ss", n, MUTUAL_GC, "w_ss")),
    "fig9a": ("<C|k>, directed giant components", lambda n, o: _c_vs_k("fig9a_C_vs_k", n, DIRECTED_GC)),
    "fig9b": ("<C|k>, mutual giant components", lambda n, o: _c_vs_k("fig9b_C_vs_k", n, MUTUAL_GC)),
    "fig9c": ("<C~|s>, directed giant components", lambda n, o: _wc_vs_s("fig9c_wC_vs_s", n, DIRECTED_GC)),
    "fig9d": ("<C~|s>, mutual giant components", lambda n, o: _wc_vs_s("fig9d_wC_vs_s", n, MUTUAL_GC)),
    "fig10a": ("<O|w^N>, four giant components", lambda n, o: _overlap("fig10a_O_vs_wN", n, ALL_GC, "N", False)),
    "fig10b": ("<O|w^D>, four giant components", lambda n, o: _overlap("fig10b_O_vs_wD", n, ALL_GC, "D", False)),
    "fig10c": ("<O|P_c(w^N)>, four giant components", lambda n, o: _overlap("fig10c_O_vs_PcwN", n, ALL_GC, "N", True)),
    "fig10d": ("<O|P_c(w^D)>, four giant components", lambda n, o: _overlap("fig10d_O_vs_PcwD", n, ALL_GC, "D", True)),
}

# panels that make no sense without the validated networks
SV_DEPENDENT = {"fig5b"}

DEFAULT_OPTIONS = {"n_sources": 10, "max_distance": 12, "seed": 0, "sample": 5000}


def build_tables(nets: dict, only=None, **options) -> dict:
    """Compute the requested figure tables (all by default) from ``nets``."""
    opts = {**DEFAULT_OPTIONS, **options}
    wanted = list(FIGURES) if not only else list(only)
    unknown = [f for f in wanted if f not in FIGURES]
    if unknown:
        raise KeyError(f"unknown figure ids: {', '.join(unknown)}")
    have_sv = "SVDCN" in nets and "SVMCN" in nets
    missing = [f for f in wanted if f in SV_DEPENDENT and not have_sv]
    if missing:
        raise ValueError(f"{', '.join(missing)} need validated networks; run validate first")
    pool = _Networks(nets)
    return {fid: FIGURES[fid][1](pool, opts) for fid in wanted}
