"""Lambda/mu sweeps, Pareto filtering and the tradeoff AUC."""

from __future__ import annotations

import csv
import hashlib
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .admm import AdmmConfig, solve_admm
from .graph import ClusterAssignment, Graph, SensitiveAttributes
from .metrics import Scores, balance
from .spectral import SolverConfig, solve_spectral

log = logging.getLogger(__name__)

METRICS = ("ami", "ari", "v")

CSV_COLUMNS = (
    "mu", "lambda", "seed", "degenerate",
    "temporal_ami", "specificity_ami",
    "temporal_ari", "specificity_ari",
    "temporal_v", "specificity_v",
    "balance", "assignment_hash",
)


def default_lambda_grid(lo: float = -1.0, hi: float = 1.0, steps: int = 101) -> list[float]:
    if steps == 1:
        return [float(lo)]
    return [round(float(x), 12) for x in np.linspace(lo, hi, steps)]


@dataclass(frozen=True)
class SweepSpec:
    graph: Graph
    sensitive: SensitiveAttributes
    truth: np.ndarray | None = None
    lambda_grid: Sequence[float] = field(default_factory=default_lambda_grid)
    mu_values: Sequence[float] = (-1.0, 1.0)
    algo: str = "svd"
    seeds: Sequence[int] = (0,)
    k: int = 2
    eig_order: str = "magnitude"
    admm: AdmmConfig = field(default_factory=AdmmConfig)
    workers: int = 1

    def __post_init__(self):
        if not len(self.lambda_grid) or not len(self.mu_values) or not len(self.seeds):
            raise ValueError("lambda grid, mu values and seeds must be non-empty")
        if any(b <= a for a, b in zip(self.lambda_grid, self.lambda_grid[1:])):
            raise ValueError("lambda grid must be strictly increasing")
        if self.algo not in ("svd", "admm"):
            raise ValueError(f"unknown algo {self.algo!r}")
        if self.graph.n != self.sensitive.n:
            raise ValueError("graph and sensitive attributes differ in size")
        if self.truth is not None and len(self.truth) != self.graph.n:
            raise ValueError("truth labels differ in size from the graph")


@dataclass(frozen=True)
class SweepPoint:
    mu: float
    lam: float
    seed: int
    degenerate: bool
    temporal_ami: float
    specificity_ami: float
    temporal_ari: float
    specificity_ari: float
    temporal_v: float
    specificity_v: float
    balance: float
    assignment_hash: str
    error: str | None = None

    def temporal(self, metric: str) -> float:
        return getattr(self, f"temporal_{metric}")

    def specificity(self, metric: str) -> float:
        return getattr(self, f"specificity_{metric}")


def assignment_hash(c: ClusterAssignment) -> str:
    return hashlib.sha256(np.asarray(c.labels, dtype=np.int64).tobytes()).hexdigest()[:16]


def solve_point(spec: SweepSpec, lam: float, mu: float, seed: int) -> ClusterAssignment:
    cfg = SolverConfig(lambda_weights=lam, mu=mu, k=spec.k, eig_order=spec.eig_order, seed=seed)
    if spec.algo == "svd":
        return solve_spectral(spec.graph, spec.sensitive, cfg)
    return solve_admm(spec.graph, spec.sensitive, replace(spec.admm, solver_config=cfg))


def score_point(spec: SweepSpec, c: ClusterAssignment, lam: float, mu: float, seed: int) -> SweepPoint:
    nan = math.nan
    temporal = Scores.of(spec.truth, c) if spec.truth is not None else Scores(nan, nan, nan)
    specificity = Scores.of(spec.sensitive.group_labels(), c)
    return SweepPoint(
        mu=mu,
        lam=lam,
        seed=seed,
        degenerate=c.is_degenerate,
        temporal_ami=temporal.ami,
        specificity_ami=specificity.ami,
        temporal_ari=temporal.ari,
        specificity_ari=specificity.ari,
        temporal_v=temporal.v_measure,
        specificity_v=specificity.v_measure,
        balance=balance(c, spec.sensitive),
        assignment_hash=assignment_hash(c),
    )


def _run_one(args) -> SweepPoint:
    spec, lam, mu, seed = args
    try:
        c = solve_point(spec, lam, mu, seed)
    except Exception as exc:  # recorded per point; the sweep carries on
        log.warning("sweep point mu=%g lambda=%g seed=%d failed: %s", mu, lam, seed, exc)
        return SweepPoint(mu, lam, seed, True, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, "error", str(exc))
    return score_point(spec, c, lam, mu, seed)


def run_sweep(spec: SweepSpec, progress=None) -> list[SweepPoint]:
    """Solve and score every (mu, lambda, seed) combination, in grid order."""
    jobs = [
        (spec, float(lam), float(mu), int(seed))
        for mu in sorted(spec.mu_values)
        for lam in spec.lambda_grid
        for seed in spec.seeds
    ]
    results: list[SweepPoint] = []
    if spec.workers <= 1:
        for i, job in enumerate(jobs):
            results.append(_run_one(job))
            if progress:
                progress(i + 1, len(jobs))
    else:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            for i, point in enumerate(pool.map(_run_one, jobs)):
                results.append(point)
                if progress:
                    progress(i + 1, len(jobs))
    return results


def transition_brackets(points: Sequence[SweepPoint]) -> list[tuple[float, float, float, int]]:
    """Adjacent lambda pairs (same mu and seed) whose assignments differ.

    Returns ``(mu, lam_lo, lam_hi, seed)`` tuples; a finer grid between the
    two values zooms in on the transition.
    """
    out = []
    by_key: dict[tuple[float, int], list[SweepPoint]] = {}
    for p in points:
        by_key.setdefault((p.mu, p.seed), []).append(p)
    for (mu, seed), pts in by_key.items():
        pts = sorted(pts, key=lambda p: p.lam)
        for a, b in zip(pts, pts[1:]):
            if a.assignment_hash != b.assignment_hash and not (a.degenerate and b.degenerate):
                out.append((mu, a.lam, b.lam, seed))
    return out


# --- tradeoff curve ---------------------------------------------------------


def _clamp01(x: float) -> float:
    return min(max(x, 0.0), 1.0)


def _dominates(q: SweepPoint, p: SweepPoint, metric: str) -> bool:
    qs, qt = q.specificity(metric), q.temporal(metric)
    ps, pt = p.specificity(metric), p.temporal(metric)
    return qs <= ps and qt >= pt and (qs < ps or qt > pt)


def pareto_front(points: Iterable[SweepPoint], metric: str = "ami") -> list[SweepPoint]:
    """Non-dominated points under (low specificity, high temporal) scores.

    Sorted by specificity ascending; among identical score pairs the point
    with the smaller |lambda| is kept.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    pts = [p for p in points if not (math.isnan(p.temporal(metric)) or math.isnan(p.specificity(metric)))]
    # best-first: spec asc, temporal desc, |lambda| asc
    pts.sort(key=lambda p: (p.specificity(metric), -p.temporal(metric), abs(p.lam)))
    front: list[SweepPoint] = []
    best_temporal = -math.inf
    for p in pts:
        t = p.temporal(metric)
        if t > best_temporal:
            front.append(p)
            best_temporal = t
    return front


def tradeoff_auc(points: Iterable[SweepPoint], metric: str = "ami") -> float:
    """Area under the fairness/accuracy Pareto frontier.

    Each non-degenerate point maps to ``x = 1 - specificity`` and
    ``y = temporal`` (negative scores clamped to 0); the frontier is
    integrated with the trapezoid rule and extended flat to x=0 and x=1.
    """
    usable = [p for p in points if not p.degenerate and p.error is None]
    if not usable:
        return 0.0
    if any(math.isnan(p.temporal(metric)) for p in usable):
        raise ValueError("tradeoff AUC needs ground-truth (temporal) scores")
    clamped = [
        replace(
            p,
            **{
                f"temporal_{metric}": _clamp01(p.temporal(metric)),
                f"specificity_{metric}": _clamp01(p.specificity(metric)),
            },
        )
        for p in usable
    ]
    front = pareto_front(clamped, metric)
    # 1 - s can round distinct specificities onto the same x; filter again
    # in (x, y) so each x keeps only its best y
    xy = []
    for x, y in sorted(((1.0 - p.specificity(metric), p.temporal(metric)) for p in front), reverse=True):
        if not xy or y > xy[-1][1]:
            xy.append((x, y))
    xy.reverse()
    xs = [0.0] + [x for x, _ in xy] + [1.0]
    ys = [xy[0][1]] + [y for _, y in xy] + [xy[-1][1]]
    area = 0.0
    for i in range(len(xs) - 1):
        area += (xs[i + 1] - xs[i]) * (ys[i] + ys[i + 1]) / 2
    return area


# --- CSV --------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return "" if math.isnan(x) else f"{x:.17g}"
    return str(x)


def format_sweep_csv(points: Sequence[SweepPoint]) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for p in points:
        row = [p.mu, p.lam, p.seed, p.degenerate, p.temporal_ami, p.specificity_ami,
               p.temporal_ari, p.specificity_ari, p.temporal_v, p.specificity_v,
               p.balance, p.assignment_hash]
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    has_truth = any(not math.isnan(p.temporal_ami) for p in points)
    if has_truth:
        aucs = {m: tradeoff_auc(points, m) for m in METRICS}
        buf.write("# " + ",".join(f"auc_{m}={aucs[m]:.17g}" for m in METRICS) + "\n")
    return buf.getvalue()


def write_sweep_csv(points: Sequence[SweepPoint], path: str | Path) -> None:
    Path(path).write_text(format_sweep_csv(points))


def read_sweep_csv(path: str | Path) -> list[SweepPoint]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected sweep CSV header")

    def num(s: str) -> float:
        return math.nan if s == "" else float(s)

    out = []
    for row in reader:
        try:
            out.append(
                SweepPoint(
                    mu=float(row["mu"]),
                    lam=float(row["lambda"]),
                    seed=int(row["seed"]),
                    degenerate=row["degenerate"] == "1",
                    temporal_ami=num(row["temporal_ami"]),
                    specificity_ami=num(row["specificity_ami"]),
                    temporal_ari=num(row["temporal_ari"]),
                    specificity_ari=num(row["specificity_ari"]),
                    temporal_v=num(row["temporal_v"]),
                    specificity_v=num(row["specificity_v"]),
                    balance=num(row["balance"]),
                    assignment_hash=row["assignment_hash"],
                )
            )
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{path}: malformed row {row}") from exc
    return out
