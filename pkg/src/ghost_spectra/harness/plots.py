"""SVG companions for result tables."""
from __future__ import annotations

from pathlib import Path

from .experiments import METHODS, parse_power_metric
from .svg import write_chart
from .table import ResultTable


def _by(rows, key):
    out = {}
    for r in rows:
        out.setdefault(key(r), []).append(r)
    return out


def size_charts(table: ResultTable, stem: Path) -> list:
    paths = []
    for method in METHODS:
        rows = table.select(method=method, metric="rejection_rate")
        series = {m: ([r.p for r in rs], [r.value for r in rs])
                  for m, rs in _by(rows, lambda r: r.model).items()}
        if series:
            paths.append(write_chart(f"{stem}_size_{method}.svg", series,
                                     title=f"Empirical size ({method})", xlabel="p",
                                     ylabel="rejection rate"))
    return paths


def power_charts(table: ResultTable, stem: Path) -> list:
    paths = []
    rows = [r for r in table if parse_power_metric(r.metric) is not None]
    for (model, p), rs in _by(rows, lambda r: (r.model, r.p)).items():
        series = {}
        for method, mr in _by(rs, lambda r: r.method).items():
            pts = sorted((parse_power_metric(r.metric), r.value) for r in mr)
            series[method] = ([a for a, _ in pts], [v for _, v in pts])
        paths.append(write_chart(f"{stem}_power_{model}_p{p}.svg", series,
                                 title=f"Size-adjusted power, {model}, p={p}", xlabel="a",
                                 ylabel="power"))
    return paths


def phase_charts(table: ResultTable, stem: Path) -> list:
    paths = []
    for method in ("raw", "rescaled"):
        rows = table.select(method=method, metric="variance")
        series = {m: ([r.p for r in rs], [r.value for r in rs])
                  for m, rs in _by(rows, lambda r: r.model).items()}
        if series:
            paths.append(write_chart(f"{stem}_phase_{method}.svg", series,
                                     title=f"Variance of L(x^2), {method}", xlabel="p",
                                     ylabel="variance", logx=True, logy=True))
    return paths


CHARTS = {"size": size_charts, "power": power_charts, "phase": phase_charts}


def write_charts(kind: str, table: ResultTable, out_csv) -> list:
    out_csv = Path(out_csv)
    return CHARTS[kind](table, out_csv.with_suffix(""))
