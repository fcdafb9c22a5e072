"""Clustering quality, fairness and likelihood metrics.

Entropies use natural logarithms. Degenerate labelings follow fixed
conventions: a labeling with a single cluster gets AMI 0 and ARI 0 against
anything; identical partitions with at least two clusters score 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .graph import ClusterAssignment, Graph, SensitiveAttributes
from .spectral import PenalizedMatrix, objective_value


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray

    @classmethod
    def from_labels(cls, u, v) -> "ContingencyTable":
        u, v = _pair(u, v)
        _, ui = np.unique(u, return_inverse=True)
        _, vi = np.unique(v, return_inverse=True)
        counts = np.zeros((ui.max() + 1, vi.max() + 1), dtype=np.int64)
        np.add.at(counts, (ui, vi), 1)
        return cls(counts)

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _pair(u, v) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(getattr(u, "labels", u)).ravel()
    v = np.asarray(getattr(v, "labels", v)).ravel()
    if u.size != v.size:
        raise ValueError(f"label vectors differ in length ({u.size} vs {v.size})")
    if u.size == 0:
        raise ValueError("empty label vectors")
    return u, v


def _entropy(counts: np.ndarray) -> float:
    counts = counts[counts > 0].astype(float)
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


def mutual_info(table: ContingencyTable) -> float:
    c = table.counts.astype(float)
    n = c.sum()
    a, b = c.sum(1), c.sum(0)
    nz = c > 0
    outer = np.outer(a, b)
    return float((c[nz] / n * (np.log(c[nz] * n) - np.log(outer[nz]))).sum())


def expected_mutual_info(table: ContingencyTable) -> float:
    """E[MI] under the hypergeometric (permutation) model."""
    a = table.row_sums.astype(np.int64)
    b = table.col_sums.astype(np.int64)
    n = int(table.total)
    lg_a, lg_b = gammaln(a + 1), gammaln(b + 1)
    lg_na, lg_nb = gammaln(n - a + 1), gammaln(n - b + 1)
    lg_n = gammaln(n + 1)
    emi = 0.0
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            if lo > hi:
                continue
            nij = np.arange(lo, hi + 1)
            term = nij / n * (np.log(n * nij) - math.log(ai * bj))
            log_p = (
                lg_a[i] + lg_b[j] + lg_na[i] + lg_nb[j] - lg_n
                - gammaln(nij + 1) - gammaln(ai - nij + 1) - gammaln(bj - nij + 1)
                - gammaln(n - ai - bj + nij + 1)
            )
            emi += float((term * np.exp(log_p)).sum())
    return emi


def _same_partition(u: np.ndarray, v: np.ndarray) -> bool:
    t = ContingencyTable.from_labels(u, v).counts
    return bool(np.all((t > 0).sum(axis=1) == 1) and np.all((t > 0).sum(axis=0) == 1))


def ami(u, v) -> float:
    u, v = _pair(u, v)
    table = ContingencyTable.from_labels(u, v)
    if min(table.counts.shape) < 2:
        return 0.0
    if _same_partition(u, v):
        return 1.0
    mi = mutual_info(table)
    emi = expected_mutual_info(table)
    norm = (_entropy(table.row_sums) + _entropy(table.col_sums)) / 2
    denom = norm - emi
    if abs(denom) < 1e-15:
        return 0.0
    return float((mi - emi) / denom)


def ari(u, v) -> float:
    u, v = _pair(u, v)
    table = ContingencyTable.from_labels(u, v)
    if min(table.counts.shape) < 2:
        return 0.0
    if _same_partition(u, v):
        return 1.0

    def comb2(x):
        x = x.astype(float)
        return x * (x - 1) / 2

    index = comb2(table.counts).sum()
    sa, sb = comb2(table.row_sums).sum(), comb2(table.col_sums).sum()
    expected = sa * sb / comb2(np.array([table.total]))[0]
    max_index = (sa + sb) / 2
    denom = max_index - expected
    if denom == 0:
        return 0.0
    return float((index - expected) / denom)


def _conditional_entropy(counts: np.ndarray) -> float:
    """H(rows | columns), summed directly so identical partitions give exactly 0."""
    n = counts.sum()
    col = counts.sum(axis=0)
    i, j = np.nonzero(counts)
    nij = counts[i, j].astype(float)
    return float(-np.sum(nij / n * np.log(nij / col[j])))


def homogeneity_completeness_v(truth, pred) -> tuple[float, float, float]:
    truth, pred = _pair(truth, pred)
    table = ContingencyTable.from_labels(truth, pred)
    h_truth = _entropy(table.row_sums)
    h_pred = _entropy(table.col_sums)
    homogeneity = 1.0 if h_truth == 0 else 1.0 - _conditional_entropy(table.counts) / h_truth
    completeness = 1.0 if h_pred == 0 else 1.0 - _conditional_entropy(table.counts.T) / h_pred
    if homogeneity + completeness == 0:
        return homogeneity, completeness, 0.0
    v = 2 * homogeneity * completeness / (homogeneity + completeness)
    return homogeneity, completeness, float(v)


def v_measure(truth, pred) -> float:
    return homogeneity_completeness_v(truth, pred)[2]


def balance(c: ClusterAssignment, s: SensitiveAttributes) -> float:
    """Min over non-empty clusters and group pairs of count(g)/count(h)."""
    labels = np.asarray(getattr(c, "labels", c))
    groups = s.group_labels()
    if labels.size != groups.size:
        raise ValueError("assignment and attributes differ in length")
    # declared groups, so a group absent from the data still counts as missing
    group_ids = np.arange(s.num_groups)
    if group_ids.size < 2:
        return 1.0
    best = 1.0
    for cl in np.unique(labels):
        counts = np.array([np.sum((labels == cl) & (groups == g)) for g in group_ids])
        if counts.min() == 0:
            return 0.0
        best = min(best, counts.min() / counts.max())
    return float(best)


def estimate_psi(g: Graph, c: ClusterAssignment) -> np.ndarray:
    if not g.is_binary():
        warnings.warn("estimating block probabilities from a weighted graph", stacklevel=2)
    labels = np.asarray(c.labels)
    k = c.k
    a = g.adjacency
    psi = np.zeros((k, k))
    for x in range(k):
        ix = np.flatnonzero(labels == x)
        for y in range(x, k):
            iy = np.flatnonzero(labels == y)
            if x == y:
                pairs = ix.size * (ix.size - 1) / 2
                total = np.triu(a[np.ix_(ix, ix)], 1).sum()
            else:
                pairs = ix.size * iy.size
                total = a[np.ix_(ix, iy)].sum()
            psi[x, y] = psi[y, x] = total / pairs if pairs else 0.0
    return psi


def sbm_loglik(g: Graph, c: ClusterAssignment, psi: np.ndarray, eps: float = 1e-12) -> float:
    psi = np.asarray(psi, dtype=float)
    if psi.shape != (c.k, c.k) or c.n != g.n:
        raise ValueError("dimension mismatch between graph, assignment and psi")
    if not g.is_binary():
        warnings.warn("log-likelihood on a weighted graph uses weights as fractional edges", stacklevel=2)
    labels = np.asarray(c.labels)
    iu, ju = np.triu_indices(g.n, 1)
    m = np.clip(psi[labels[iu], labels[ju]], eps, 1 - eps)
    a = g.adjacency[iu, ju]
    return float((a * np.log(m) + (1 - a) * np.log(1 - m)).sum())


@dataclass(frozen=True)
class Scores:
    ami: float
    ari: float
    v_measure: float

    @classmethod
    def of(cls, reference, pred) -> "Scores":
        return cls(ami(reference, pred), ari(reference, pred), v_measure(reference, pred))


@dataclass(frozen=True)
class ScoreReport:
    temporal: Scores | None
    specificity: Scores
    balance: float
    objective: float | None

    COLUMNS = (
        "temporal_ami", "temporal_ari", "temporal_v",
        "specificity_ami", "specificity_ari", "specificity_v",
        "balance", "objective",
    )

    def row(self) -> dict:
        t = self.temporal
        return {
            "temporal_ami": None if t is None else t.ami,
            "temporal_ari": None if t is None else t.ari,
            "temporal_v": None if t is None else t.v_measure,
            "specificity_ami": self.specificity.ami,
            "specificity_ari": self.specificity.ari,
            "specificity_v": self.specificity.v_measure,
            "balance": self.balance,
            "objective": self.objective,
        }

    def to_csv(self) -> str:
        row = self.row()
        cells = ["" if row[c] is None else f"{row[c]:.17g}" for c in self.COLUMNS]
        return ",".join(self.COLUMNS) + "\n" + ",".join(cells) + "\n"


def score_report(
    pred: ClusterAssignment,
    truth,
    s: SensitiveAttributes,
    at: PenalizedMatrix | None = None,
) -> ScoreReport:
    groups = s.group_labels()
    if pred.n != groups.size:
        raise ValueError("prediction and attributes differ in length")
    temporal = None if truth is None else Scores.of(truth, pred)
    objective = None
    if at is not None and pred.k == 2:
        objective = objective_value(at, pred)
    return ScoreReport(temporal, Scores.of(groups, pred), balance(pred, s), objective)
