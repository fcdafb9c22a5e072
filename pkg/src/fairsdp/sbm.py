"""Synthetic instance generators.

All randomness comes from numpy's PCG64 bit generator seeded with the
caller's integer seed. Pair-level draws are taken for the strict upper
triangle in row-major order (i < j), one uniform per pair, so a stream can
be replayed by any PCG64 implementation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import ClusterAssignment, Graph, SensitiveAttributes


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class SbmParams:
    sizes: tuple[int, ...]
    psi: np.ndarray
    seed: int = 0

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        psi = np.asarray(self.psi, dtype=float)
        if not sizes or any(s <= 0 for s in sizes):
            raise ValueError("community sizes must be positive")
        if psi.shape != (len(sizes), len(sizes)):
            raise ValueError(f"psi must be {len(sizes)}x{len(sizes)}")
        if not np.array_equal(psi, psi.T):
            raise ValueError("psi must be symmetric")
        if psi.min() < 0 or psi.max() > 1:
            raise ValueError("psi entries must lie in [0, 1]")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "psi", psi)

    @classmethod
    def planted(cls, sizes: Sequence[int], p_in: float, p_out: float, seed: int = 0) -> "SbmParams":
        k = len(sizes)
        psi = np.full((k, k), float(p_out))
        np.fill_diagonal(psi, float(p_in))
        return cls(tuple(sizes), psi, seed)

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return sum(self.sizes)


@dataclass(frozen=True)
class WeightedTwoClusterParams:
    sizes: tuple[int, int] = (20, 10)
    within_range: tuple[float, float] = (0.5, 1.0)
    between_range: tuple[float, float] = (0.0, 0.5)
    seed: int = 0
    bernoulli: bool = False  # draw 0/1 edges with the sampled value as probability

    def __post_init__(self):
        if len(self.sizes) != 2 or min(self.sizes) <= 0:
            raise ValueError("sizes must be a pair of positive integers")
        for lo, hi in (self.within_range, self.between_range):
            if not 0.0 <= lo <= hi <= 1.0:
                raise ValueError(f"invalid weight interval [{lo}, {hi}]")


def _truth_labels(sizes: Sequence[int]) -> np.ndarray:
    return np.repeat(np.arange(len(sizes)), sizes)


def _symmetric_from_upper(n: int, values: np.ndarray) -> np.ndarray:
    a = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    a[iu] = values
    return a + a.T


def generate_sbm(params: SbmParams) -> tuple[Graph, ClusterAssignment]:
    labels = _truth_labels(params.sizes)
    n = labels.size
    rng = make_rng(params.seed)
    iu, ju = np.triu_indices(n, 1)
    prob = params.psi[labels[iu], labels[ju]]
    u = rng.random(iu.size)
    a = _symmetric_from_upper(n, (u < prob).astype(float))
    return Graph(a), ClusterAssignment(labels, params.k)


def generate_weighted_two_cluster(params: WeightedTwoClusterParams) -> tuple[Graph, ClusterAssignment]:
    labels = _truth_labels(params.sizes)
    n = labels.size
    rng = make_rng(params.seed)
    iu, ju = np.triu_indices(n, 1)
    same = labels[iu] == labels[ju]
    lo = np.where(same, params.within_range[0], params.between_range[0])
    hi = np.where(same, params.within_range[1], params.between_range[1])
    w = lo + (hi - lo) * rng.random(iu.size)
    if params.bernoulli:
        w = (rng.random(iu.size) < w).astype(float)
    return Graph(_symmetric_from_upper(n, w)), ClusterAssignment(labels, 2)


def sample_sensitive(
    n: int,
    p: float = 0.5,
    seed: int = 0,
    truth: ClusterAssignment | None = None,
    correlation: float = 0.0,
) -> SensitiveAttributes:
    """Binary attribute, +1 with probability ``p`` independently per node.

    With ``truth`` and ``correlation`` c > 0, each node instead copies its
    community side (label 0 -> -1, otherwise +1) with probability c.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if not 0.0 <= correlation <= 1.0:
        raise ValueError("correlation must lie in [0, 1]")
    rng = make_rng(seed)
    s = np.where(rng.random(n) < p, 1.0, -1.0)
    if correlation > 0:
        if truth is None or truth.n != n:
            raise ValueError("correlation needs a truth assignment of matching size")
        copy = rng.random(n) < correlation
        s = np.where(copy, np.where(truth.labels == 0, -1.0, 1.0), s)
    return SensitiveAttributes.binary(s)
