"""Benchmark sweeps: generate networks, run detectors, aggregate and report.

A plan file uses the same ``key = value`` stanza dialect as spec files.  A
stanza without ``family`` configures the run::

    detectors = lpa, greedy-q, multilevel-q, greedy-s
    replicates = 20
    seed = 1

Every other stanza is a network family; comma-separated values sweep a
parameter, and ``replicates``/``seed`` may be overridden per stanza::

    family = rc
    k = 512
    communities = 16
    pielou = 0.75
    R = 10, 20, 30, 40, 50

External partitions join the candidate pool through ``candidates``, a glob
in which ``{stem}`` expands to the network's file stem and ``{seed}`` to its
seed.  LFR stanzas take ``edges_path``/``truth_path`` with the same
placeholders.
"""

from __future__ import annotations

import csv
import glob
import io
import itertools
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .algorithms import DETECTORS, DetectionResult, run_detector, select_smax
from .errors import DomainError, ParseError
from .generators import BenchmarkSpec, generate, parse_stanzas, spec_from_mapping
from .graph import parse_partition
from .metrics import quality, variation_of_information
from .stats import (
    HIGHER_BETTER,
    LOWER_BETTER,
    kendall_tau,
    mean_sem,
    performance_scores,
    performance_sem,
    two_sample_t,
)

log = logging.getLogger(__name__)

ROW_COLUMNS = ["family", "params", "seed", "detector", "communities", "S", "Q",
               "vi_nats", "vi_norm", "wall_ms", "status"]
DESK_REPLICATES = 20
PAPER_REPLICATES = 100
SIGNIFICANCE = 0.01

# Beyond these the planted structure is mostly gone; rows are kept but the
# groups are flagged and left out of the performance ranking.
QUASI_RANDOM_R = 50
QUASI_RANDOM_MU = 0.7


@dataclass
class NetworkSweep:
    spec: BenchmarkSpec
    replicates: int
    seed: int

    def seeds(self) -> list[int]:
        return list(range(self.seed, self.seed + self.replicates))


@dataclass
class ExperimentPlan:
    networks: list[NetworkSweep]
    detectors: list[str]
    candidates: list[str] = field(default_factory=list)
    output: str | None = None

    def validate(self) -> None:
        for name in self.detectors:
            if name not in DETECTORS:
                raise DomainError(f"unknown detector {name!r}; available: {', '.join(DETECTORS)}")
        for sweep in self.networks:
            if sweep.replicates < 1:
                raise DomainError("replicates must be at least 1")
        if not self.detectors and not self.candidates:
            raise DomainError("plan has neither detectors nor candidates")


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def parse_plan(text: str, source: str | None = None, paper_scale: bool = False) -> ExperimentPlan:
    header: dict[str, str] = {}
    network_stanzas = []
    for stanza in parse_stanzas(text, source):
        if "family" in stanza:
            network_stanzas.append(stanza)
        elif header:
            raise ParseError("more than one plan header stanza", None, source)
        else:
            header = stanza
    unknown = set(header) - {"detectors", "replicates", "seed", "candidates", "output"}
    if unknown:
        raise ParseError(f"unknown plan keys: {', '.join(sorted(unknown))}", None, source)
    try:
        base_reps = int(header.get("replicates", DESK_REPLICATES))
        base_seed = int(header.get("seed", 1))
    except ValueError as exc:
        raise ParseError(str(exc), None, source) from None
    detectors = _split(header.get("detectors", ""))
    candidates = _split(header.get("candidates", ""))
    networks = []
    for stanza in network_stanzas:
        stanza = dict(stanza)
        try:
            reps = int(stanza.pop("replicates", base_reps))
            seed = int(stanza.pop("seed", base_seed))
        except ValueError as exc:
            raise ParseError(str(exc), None, source) from None
        if paper_scale:
            reps = max(reps, PAPER_REPLICATES)
        keys = list(stanza)
        choices = [_split(stanza[k]) if k not in ("edges_path", "truth_path") else [stanza[k]] for k in keys]
        for combo in itertools.product(*choices):
            try:
                spec = spec_from_mapping(dict(zip(keys, combo)))
            except (DomainError, ValueError) as exc:
                raise ParseError(str(exc), None, source) from None
            networks.append(NetworkSweep(spec, reps, seed))
    plan = ExperimentPlan(networks, detectors, candidates, header.get("output"))
    plan.validate()
    return plan


def _expand(pattern: str, spec: BenchmarkSpec) -> str:
    return pattern.replace("{stem}", spec.stem()).replace("{seed}", str(spec.seed))


def _concrete(spec: BenchmarkSpec) -> BenchmarkSpec:
    if spec.family == "lfr":
        return replace(spec, edges_path=_expand(spec.edges_path or "", spec),
                       truth_path=_expand(spec.truth_path or "", spec))
    return spec


def quasi_random(spec: BenchmarkSpec) -> bool:
    if spec.R is not None:
        return spec.R > QUASI_RANDOM_R
    if spec.mu is not None:
        return spec.mu > QUASI_RANDOM_MU
    return False


def _row(spec, detector, part, truth, S, Q, wall, status):
    vi = variation_of_information(part, truth)
    return {
        "family": spec.family, "params": spec.label(), "seed": spec.seed, "detector": detector,
        "communities": part.count, "S": S, "Q": Q, "vi_nats": vi.vi_nats, "vi_norm": vi.vi_normalized,
        "wall_ms": wall * 1000.0, "status": status,
    }


def _failed_row(spec, detector, status):
    return {"family": spec.family, "params": spec.label(), "seed": spec.seed, "detector": detector,
            "communities": "", "S": "", "Q": "", "vi_nats": "", "vi_norm": "", "wall_ms": "",
            "status": status}


def evaluate_network(spec: BenchmarkSpec, detectors: list[str], candidates: list[str]) -> dict:
    """Rows for one network: ``truth``, each detector, each external
    candidate and the ``smax`` selection.  Returns ``{"rows", "S_orig",
    "S_max"}``."""
    spec = _concrete(spec)
    net = generate(spec)
    g, truth = net.graph, net.truth
    rows = []
    tq = quality(g, truth)
    rows.append(_row(spec, "truth", truth, truth, tq.surprise, tq.modularity, 0.0, "ok"))
    pool: list[DetectionResult] = []
    for name in detectors:
        try:
            res = run_detector(name, g, spec.seed)
        except Exception as exc:  # recorded per row; the sweep goes on
            log.warning("%s failed on %s: %s", name, spec.stem(), exc)
            rows.append(_failed_row(spec, name, f"error: {exc}"))
            continue
        pool.append(res)
        rows.append(_row(spec, name, res.partition, truth, res.scores.surprise,
                         res.scores.modularity, res.wall_time, "ok"))
    for pattern in candidates:
        for path in sorted(glob.glob(_expand(pattern, spec))):
            label = f"external:{Path(path).name}"
            try:
                part = parse_partition(Path(path).read_text(), k=g.k, source=path)
            except (ParseError, OSError) as exc:
                rows.append(_failed_row(spec, label, f"error: {exc}"))
                continue
            score = quality(g, part)
            res = DetectionResult(label, part, score, 0.0)
            pool.append(res)
            rows.append(_row(spec, label, part, truth, score.surprise, score.modularity, 0.0, "ok"))
    s_max = None
    if pool:
        winner, table = select_smax(g, pool)
        best = next(r for r in table if r.partition == winner)
        s_max = best.scores.surprise
        rows.append(_row(spec, "smax", winner, truth, best.scores.surprise, best.scores.modularity,
                         0.0, f"ok ({best.detector})"))
    return {"rows": rows, "S_orig": tq.surprise, "S_max": s_max}


def _workers() -> int:
    raw = os.environ.get("SURPRISE_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"SURPRISE_THREADS must be an integer, got {raw!r}") from None
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass
class ExperimentReport:
    rows: list[dict]
    aggregates: list[dict]
    performance: list[dict]
    correlations: list[dict]
    smax_vs_orig: list[dict]

    def write(self, outdir, timing: bool = True) -> list[Path]:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        rows = self.rows if timing else [dict(r, wall_ms=0.0 if r["wall_ms"] != "" else "") for r in self.rows]
        files = {
            "rows.csv": (ROW_COLUMNS, rows),
            "aggregates.csv": (AGG_COLUMNS, self.aggregates),
            "performance.csv": (PERF_COLUMNS, self.performance),
            "correlations.csv": (CORR_COLUMNS, self.correlations),
            "smax_vs_orig.csv": (SMAX_COLUMNS, self.smax_vs_orig),
        }
        written = []
        for name, (cols, data) in files.items():
            (out / name).write_text(to_csv(cols, data))
            written.append(out / name)
        svg = vi_plot_svg(self.aggregates)
        if svg:
            (out / "vi.svg").write_text(svg)
            written.append(out / "vi.svg")
        return written


AGG_COLUMNS = ["family", "params", "detector", "networks", "S_mean", "S_sem", "Q_mean", "Q_sem",
               "vi_mean", "vi_sem", "vi_norm_mean", "vi_norm_sem", "regime"]
PERF_COLUMNS = ["family", "metric", "detector", "networks", "score", "sem"]
CORR_COLUMNS = ["family", "first", "second", "tau", "p_one_tailed"]
SMAX_COLUMNS = ["family", "params", "networks", "S_orig_mean", "S_orig_sem", "S_max_mean",
                "S_max_sem", "t", "p_two_tailed", "significant", "regime"]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in columns])
    return buf.getvalue()


def _ok(row) -> bool:
    return str(row["status"]).startswith("ok")


def aggregate_rows(rows: list[dict]) -> list[dict]:
    """Mean and standard error per (family, params, detector)."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        if _ok(r):
            groups.setdefault((r["family"], r["params"], r["detector"]), []).append(r)
    out = []
    for (family, params, detector), rs in groups.items():
        entry = {"family": family, "params": params, "detector": detector, "networks": len(rs)}
        for col, name in (("S", "S"), ("Q", "Q"), ("vi_nats", "vi"), ("vi_norm", "vi_norm")):
            vals = [float(r[col]) for r in rs if r[col] not in ("", None)]
            m, s = mean_sem(vals)
            entry[f"{name}_mean"], entry[f"{name}_sem"] = m, s
        entry["regime"] = _regime_of(family, params)
        out.append(entry)
    return out


def _param_value(params: str, key: str) -> float | None:
    for part in params.split(";"):
        if part.startswith(key + "="):
            return float(part.split("=", 1)[1])
    return None


def _regime_of(family: str, params: str) -> str:
    R = _param_value(params, "R")
    mu = _param_value(params, "mu")
    if (R is not None and R > QUASI_RANDOM_R) or (mu is not None and mu > QUASI_RANDOM_MU):
        return "quasi-random"
    return "structured"


def performance_rows(rows: list[dict]) -> tuple[list[dict], list[dict]]:
    """Rank-based performance per family over structured networks, plus
    Kendall correlations between the VI ranking and the S and Q rankings."""
    perf, corr = [], []
    by_family: dict[str, dict[tuple, dict[str, dict]]] = {}
    for r in rows:
        if r["detector"] == "truth" or not _ok(r) or _regime_of(r["family"], r["params"]) != "structured":
            continue
        net = (r["params"], r["seed"])
        by_family.setdefault(r["family"], {}).setdefault(net, {})[r["detector"]] = r
    for family, nets in by_family.items():
        names = sorted(set.intersection(*(set(d) for d in nets.values())))
        if len(names) < 2:
            continue
        keys = sorted(nets)
        scores = {}
        for metric, col, direction in (("VI", "vi_nats", LOWER_BETTER), ("S", "S", HIGHER_BETTER),
                                       ("Q", "Q", HIGHER_BETTER)):
            matrix = [[float(nets[key][a][col]) for a in names] for key in keys]
            sc = performance_scores(matrix, direction)
            se = performance_sem(matrix, direction)
            scores[metric] = sc
            for a, s, e in zip(names, sc, se):
                perf.append({"family": family, "metric": metric, "detector": a, "networks": len(keys),
                             "score": s, "sem": e})
        if len(names) >= 3:
            for other in ("S", "Q"):
                try:
                    res = kendall_tau(scores["VI"], scores[other])
                except DomainError:
                    continue
                corr.append({"family": family, "first": "VI", "second": other,
                             "tau": res.tau, "p_one_tailed": res.p_one_tailed})
    return perf, corr


def smax_rows(results: list[tuple[BenchmarkSpec, dict]]) -> list[dict]:
    groups: dict[tuple, list[tuple[float, float]]] = {}
    for spec, res in results:
        if res["S_max"] is not None:
            groups.setdefault((spec.family, spec.label()), []).append((res["S_orig"], res["S_max"]))
    out = []
    for (family, params), pairs in groups.items():
        orig = [a for a, _ in pairs]
        best = [b for _, b in pairs]
        om, osem = mean_sem(orig)
        bm, bsem = mean_sem(best)
        if len(pairs) >= 2:
            t, p = two_sample_t(orig, best)
        else:
            t, p = math.nan, math.nan
        out.append({"family": family, "params": params, "networks": len(pairs),
                    "S_orig_mean": om, "S_orig_sem": osem, "S_max_mean": bm, "S_max_sem": bsem,
                    "t": t, "p_two_tailed": p,
                    "significant": "" if math.isnan(p) else ("yes" if p < SIGNIFICANCE else "ns"),
                    "regime": _regime_of(family, params)})
    return out


def _evaluate_task(args):
    spec, detectors, candidates = args
    return evaluate_network(spec, detectors, candidates)


def run_experiment(plan: ExperimentPlan, outdir=None, timing: bool = True) -> ExperimentReport:
    plan.validate()
    tasks = [(sweep.spec.with_seed(s), plan.detectors, plan.candidates)
             for sweep in plan.networks for s in sweep.seeds()]
    workers = min(_workers(), len(tasks)) if tasks else 1
    t0 = time.perf_counter()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_task, tasks))
    else:
        results = [_evaluate_task(t) for t in tasks]
    log.info("evaluated %d networks in %.1f s", len(tasks), time.perf_counter() - t0)
    rows = [r for res in results for r in res["rows"]]
    perf, corr = performance_rows(rows)
    report = ExperimentReport(
        rows=rows,
        aggregates=aggregate_rows(rows),
        performance=perf,
        correlations=corr,
        smax_vs_orig=smax_rows([(t[0], res) for t, res in zip(tasks, results)]),
    )
    target = outdir if outdir is not None else plan.output
    if target is not None:
        report.write(target, timing=timing)
    return report


_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]


def vi_plot_svg(aggregates: list[dict], width: int = 640, height: int = 400) -> str | None:
    """Line chart of mean VI against the swept R (or mu), one line per
    detector.  ``None`` when no group has a sweep parameter."""
    series: dict[str, list[tuple[float, float]]] = {}
    axis = None
    for a in aggregates:
        if a["detector"] == "truth":
            continue
        for key in ("R", "mu"):
            x = _param_value(a["params"], key)
            if x is not None:
                axis = axis or key
                if key == axis:
                    series.setdefault(a["detector"], []).append((x, a["vi_mean"]))
    if not series:
        return None
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts if not math.isnan(y)]
    x0, x1 = min(xs), max(xs)
    y1 = max(ys + [1e-9])
    left, right, top, bottom = 60, 150, 20, 50
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (pw * (x - x0) / (x1 - x0) if x1 > x0 else pw / 2)

    def py(y):
        return top + ph - ph * y / y1

    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f"<!-- generated {stamp} by smax {__version__} -->",
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
        f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">{axis}</text>',
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">mean VI (nats)</text>',
    ]
    for x in sorted(set(xs)):
        out.append(f'<text x="{px(x):.1f}" y="{top + ph + 16}" text-anchor="middle">{x:g}</text>')
    for frac in (0.0, 0.5, 1.0):
        out.append(f'<text x="{left - 6}" y="{py(y1 * frac) + 4:.1f}" text-anchor="end">{y1 * frac:.3g}</text>')
    for idx, (name, pts) in enumerate(sorted(series.items())):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = sorted(p for p in pts if not math.isnan(p[1]))
        coords = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        ly = top + 14 + 16 * idx
        out.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 28}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 32}" y="{ly}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
