"""Fair spectral clustering on the penalized matrix A - mu*11' - sum_g lambda_g s_g s_g'."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import ClusterAssignment, Graph, SensitiveAttributes
from .numerics import build_laplacian, kmeans, leading_eigenpairs, sym_eig


@dataclass(frozen=True)
class SolverConfig:
    """Penalty weights and strategy for the spectral solvers.

    ``eig_order`` picks which eigenvector counts as "second": ``magnitude``
    ranks eigenpairs like singular values of the (indefinite) penalized
    matrix; ``algebraic`` ranks by signed eigenvalue.
    """

    lambda_weights: float | tuple[float, ...] = 0.0
    mu: float = 1.0
    k: int = 2
    multi_k_strategy: str = "laplacian_kmeans"
    eig_order: str = "magnitude"
    normalize_rows: bool = False
    center_indicators: bool = False
    restarts: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.multi_k_strategy not in ("laplacian_kmeans", "recursive_bisection"):
            raise ValueError(f"unknown multi_k_strategy {self.multi_k_strategy!r}")
        if self.eig_order not in ("magnitude", "algebraic"):
            raise ValueError(f"unknown eig_order {self.eig_order!r}")
        if not isinstance(self.lambda_weights, (int, float)):
            object.__setattr__(self, "lambda_weights", tuple(float(x) for x in self.lambda_weights))
        if not np.all(np.isfinite(np.append(self.lambda_weights, self.mu))):
            raise ValueError("lambda and mu must be finite")

    def lambdas_for(self, s: SensitiveAttributes) -> list[float]:
        lw = self.lambda_weights
        if s.is_binary:
            if not isinstance(lw, (int, float)):
                if len(lw) != 1:
                    raise ValueError("binary attribute takes a single lambda")
                lw = lw[0]
            return [float(lw)]
        m = s.num_groups
        if isinstance(lw, (int, float)):
            return [float(lw)] * m
        if len(lw) != m:
            raise ValueError(f"expected {m} lambda weights, got {len(lw)}")
        return list(lw)


@dataclass(frozen=True)
class PenalizedMatrix:
    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def build_penalized(g: Graph, s: SensitiveAttributes, cfg: SolverConfig) -> PenalizedMatrix:
    if g.n != s.n:
        raise ValueError(f"graph has {g.n} nodes but attributes cover {s.n}")
    n = g.n
    m = g.adjacency - cfg.mu * np.ones((n, n))
    for lam, vec in zip(cfg.lambdas_for(s), s.vectors()):
        if lam == 0:
            continue
        if cfg.center_indicators and not s.is_binary:
            vec = vec - vec.mean()
        m -= lam * np.outer(vec, vec)
    m.setflags(write=False)
    return PenalizedMatrix(m)


def _sign_split(v: np.ndarray) -> np.ndarray:
    # sign(0) -> +1 -> label 1
    return (v >= 0).astype(int)


def second_eigenvector(m: np.ndarray, order: str = "magnitude") -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of the top two pairs and the second eigenvector."""
    eig = leading_eigenpairs(m, 2, order)
    return eig.eigenvalues, eig.eigenvectors[:, 1]


def fair_spectral_binary(at: PenalizedMatrix, order: str = "magnitude") -> ClusterAssignment:
    """Two-way split by the sign pattern of the second eigenvector."""
    if at.n < 2:
        raise ValueError("need at least two nodes")
    _, v2 = second_eigenvector(at.matrix, order)
    return ClusterAssignment(_sign_split(v2), 2)


def spectral_embedding(at: PenalizedMatrix, k: int, normalize_rows: bool = False) -> np.ndarray:
    lap = build_laplacian(at.matrix, "degree")
    eig = sym_eig(lap)
    emb = eig.eigenvectors[:, ::-1][:, :k]  # k smallest eigenvalues
    if normalize_rows:
        norms = np.linalg.norm(emb, axis=1, keepdims=True)
        emb = emb / np.where(norms == 0, 1.0, norms)
    return emb


def fair_spectral_k(at: PenalizedMatrix, cfg: SolverConfig) -> ClusterAssignment:
    if cfg.k > at.n:
        raise ValueError(f"k={cfg.k} exceeds node count {at.n}")
    emb = spectral_embedding(at, cfg.k, cfg.normalize_rows)
    labels = kmeans(emb, cfg.k, restarts=cfg.restarts, seed=cfg.seed)
    return ClusterAssignment(labels, cfg.k)


def _split_score(sub: np.ndarray, order: str) -> float:
    if sub.shape[0] < 2:
        return -np.inf
    vals, _ = second_eigenvector(sub, order)
    return float(abs(vals[1]) if order == "magnitude" else vals[1])


def _forced_split(sub: np.ndarray, order: str) -> np.ndarray:
    """Fallback when the sign split is one-sided: cut at the widest gap of v2."""
    _, v2 = second_eigenvector(sub, order)
    idx = np.argsort(v2, kind="stable")
    gaps = np.diff(v2[idx])
    if gaps.size == 0 or gaps.max() <= 0:
        side = np.zeros(sub.shape[0], dtype=int)
        side[0] = 1
        return side
    cut = int(np.argmax(gaps)) + 1
    side = np.zeros(sub.shape[0], dtype=int)
    side[idx[cut:]] = 1
    return side


def recursive_bisection(at: PenalizedMatrix, cfg: SolverConfig) -> ClusterAssignment:
    """Split clusters two ways until ``cfg.k`` clusters exist.

    The cluster to split next is the one whose principal submatrix has the
    largest second eigenvalue (ties: larger cluster, then lower min node id).
    """
    n = at.n
    if cfg.k > n:
        raise ValueError(f"k={cfg.k} exceeds node count {n}")
    order = cfg.eig_order
    first = fair_spectral_binary(at, order).labels
    if cfg.k == 2:
        return ClusterAssignment(first, 2)
    clusters = [np.flatnonzero(first == c) for c in (0, 1)]
    clusters = [c for c in clusters if c.size]
    if len(clusters) == 1:
        clusters = [np.flatnonzero(_forced_split(at.matrix, order) == c) for c in (0, 1)]
    unsplittable: set[int] = set()
    while len(clusters) < cfg.k:
        candidates = []
        for members in clusters:
            if members.size < 2:
                continue
            sub = at.matrix[np.ix_(members, members)]
            score = _split_score(sub, order)
            candidates.append((-score, -members.size, int(members.min()), members, sub))
        candidates.sort(key=lambda t: t[:3])
        chosen = None
        for *_, members, sub in candidates:
            if int(members.min()) in unsplittable:
                continue
            side = fair_spectral_binary(PenalizedMatrix(sub), order).labels
            if 0 < side.sum() < side.size:
                chosen = (members, side)
                break
            unsplittable.add(int(members.min()))
        if chosen is None:
            # no cluster splits cleanly by sign; force the best-ranked one
            _, _, _, members, sub = candidates[0]
            chosen = (members, _forced_split(sub, order))
        members, side = chosen
        clusters = [c for c in clusters if c is not members]
        clusters += [members[side == 0], members[side == 1]]
        unsplittable.clear()
    labels = np.empty(n, dtype=int)
    for j, members in enumerate(sorted(clusters, key=lambda c: int(c.min()))):
        labels[members] = j
    return ClusterAssignment(labels, cfg.k)


def objective_value(at: PenalizedMatrix, c: ClusterAssignment) -> float:
    """y' A~ y for the +-1 view of a two-way assignment."""
    if c.k != 2:
        raise ValueError("objective is defined for k=2 assignments only")
    y = c.signs()
    return float(y @ at.matrix @ y)


def solve_spectral(g: Graph, s: SensitiveAttributes, cfg: SolverConfig) -> ClusterAssignment:
    at = build_penalized(g, s, cfg)
    if cfg.k == 2:
        return fair_spectral_binary(at, cfg.eig_order)
    if cfg.multi_k_strategy == "recursive_bisection":
        return recursive_bisection(at, cfg)
    return fair_spectral_k(at, cfg)
