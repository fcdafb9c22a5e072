"""Dense symmetric linear algebra and k-means used by both solvers."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

log = logging.getLogger(__name__)

# above this size the solvers switch to a Lanczos partial eigensolver
PARTIAL_EIG_MIN_N = 400


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class SymmetricEigen:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # column j pairs with eigenvalues[j]


def _check_symmetric(m: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = max(np.abs(m).max(initial=0.0), 1.0)
    if np.abs(m - m.T).max(initial=0.0) > rtol * scale:
        raise ValueError("matrix is not symmetric")
    return m


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry (lowest index on ties) is positive."""
    vectors = np.array(vectors, dtype=float, copy=True)
    idx = np.argmax(np.abs(vectors), axis=0)
    flip = vectors[idx, np.arange(vectors.shape[1])] < 0
    vectors[:, flip] *= -1
    return vectors


def _order(values: np.ndarray, order: str) -> np.ndarray:
    if order == "algebraic":
        return np.argsort(-values, kind="stable")
    if order == "magnitude":
        # ties in |value| resolved by algebraic value, descending
        return np.lexsort((-values, -np.abs(values)))
    raise ValueError(f"unknown eigen ordering {order!r}")


def sym_eig(m: np.ndarray, order: str = "algebraic") -> SymmetricEigen:
    """Full eigendecomposition of a symmetric matrix.

    ``order="algebraic"`` sorts eigenvalues in descending algebraic order;
    ``order="magnitude"`` sorts by absolute value, which is the order the
    singular values of a symmetric matrix come in.
    """
    m = _check_symmetric(m)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    idx = _order(w, order)
    return SymmetricEigen(w[idx], fix_signs(v[:, idx]))


def leading_eigenpairs(m: np.ndarray, count: int, order: str = "algebraic") -> SymmetricEigen:
    """The first ``count`` eigenpairs under ``order``.

    Small matrices go through :func:`sym_eig`; large ones use ARPACK with a
    fixed start vector so results stay reproducible.
    """
    m = _check_symmetric(m)
    n = m.shape[0]
    if n < PARTIAL_EIG_MIN_N or count + 2 >= n:
        full = sym_eig(m, order)
        return SymmetricEigen(full.eigenvalues[:count], full.eigenvectors[:, :count])
    which = {"algebraic": "LA", "magnitude": "LM"}[order]
    v0 = np.random.Generator(np.random.PCG64(12345)).standard_normal(n)
    # one extra pair guards against a near-tie at the cut-off
    k = min(count + 1, n - 1)
    try:
        w, v = eigsh(m, k=k, which=which, v0=v0, tol=0.0)
    except ArpackNoConvergence:
        log.warning("ARPACK did not converge; falling back to dense eigensolver")
        full = sym_eig(m, order)
        return SymmetricEigen(full.eigenvalues[:count], full.eigenvectors[:, :count])
    idx = _order(w, order)[:count]
    return SymmetricEigen(w[idx], fix_signs(v[:, idx]))


def svt_psd(m: np.ndarray, threshold: float) -> np.ndarray:
    """Soft-threshold the eigenvalues of ``m`` by ``threshold`` and clip at zero.

    This is the proximal map of ``threshold * ||P||_*`` over the PSD cone.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    m = _check_symmetric(m, rtol=1e-8)
    w, v = np.linalg.eigh((m + m.T) / 2)
    shrunk = np.maximum(w - threshold, 0.0)
    keep = shrunk > 0
    vk = v[:, keep]
    p = (vk * shrunk[keep]) @ vk.T
    return (p + p.T) / 2


def power_iteration(m: np.ndarray, tol: float = 1e-10, max_iter: int = 1000, seed: int = 12345):
    """Leading eigenpair of a PSD matrix.

    Raises ConvergenceError when the residual ||mv - lv|| does not fall
    below ``tol * ||m||_F`` within ``max_iter`` steps.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    fro = np.linalg.norm(m)
    if fro == 0:
        v = np.zeros(n)
        v[0] = 1.0
        return 0.0, v
    v = np.random.Generator(np.random.PCG64(seed)).standard_normal(n)
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        w = m @ v
        lam = float(v @ w)
        if np.linalg.norm(w - lam * v) < tol * fro:
            return lam, fix_signs(v[:, None])[:, 0]
        norm = np.linalg.norm(w)
        if norm == 0:
            break
        v = w / norm
    raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")


def build_laplacian(m: np.ndarray, mode: str = "degree") -> np.ndarray:
    m = _check_symmetric(m)
    if mode == "degree":
        return np.diag(m.sum(axis=1)) - m
    if mode == "literal_diag":
        return np.diag(np.diag(m)) - m
    raise ValueError(f"unknown laplacian mode {mode!r}")


# --- k-means ---------------------------------------------------------------


def _sq_dists(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d = (x**2).sum(1)[:, None] - 2 * x @ centers.T + (centers**2).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = [x[rng.integers(n)]]
    closest = _sq_dists(x, np.array(centers))[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total == 0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers.append(x[idx])
        closest = np.minimum(closest, _sq_dists(x, x[idx][None, :])[:, 0])
    return np.array(centers)


def lloyd(x: np.ndarray, centers: np.ndarray, max_iter: int = 300, tol: float = 1e-9):
    """Lloyd iterations from given centers.

    Returns ``(labels, centers, history)`` where ``history`` lists the
    within-cluster sum of squares after every assignment step.
    """
    k = centers.shape[0]
    history = []
    labels = None
    for _ in range(max_iter):
        d = _sq_dists(x, centers)
        labels = np.argmin(d, axis=1)
        history.append(float(d[np.arange(len(x)), labels].sum()))
        new = centers.copy()
        for j in range(k):
            members = x[labels == j]
            if len(members):
                new[j] = members.mean(axis=0)
        shift = np.abs(new - centers).max()
        centers = new
        if shift < tol:
            break
    # final assignment against the final centers
    d = _sq_dists(x, centers)
    labels = np.argmin(d, axis=1)
    history.append(float(d[np.arange(len(x)), labels].sum()))
    return labels, centers, history


def wcss(x: np.ndarray, labels: np.ndarray) -> float:
    total = 0.0
    for j in np.unique(labels):
        members = x[labels == j]
        total += float(((members - members.mean(axis=0)) ** 2).sum())
    return total


def kmeans(rows: np.ndarray, k: int, restarts: int = 10, seed: int = 0, max_iter: int = 300) -> np.ndarray:
    """k-means++ seeded Lloyd, best of ``restarts`` runs by WCSS. Returns labels."""
    x = np.asarray(rows, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] == 0:
        raise ValueError("empty input")
    if not 1 <= k <= x.shape[0]:
        raise ValueError(f"k={k} must be between 1 and the number of rows ({x.shape[0]})")
    rng = np.random.Generator(np.random.PCG64(seed))
    best, best_cost = None, np.inf
    for _ in range(max(restarts, 1)):
        labels, _, _ = lloyd(x, _kmeans_pp_init(x, k, rng), max_iter=max_iter)
        cost = wcss(x, labels)
        if cost < best_cost - 1e-12:
            best, best_cost = labels, cost
    return _relabel_by_first_seen(best)


def _relabel_by_first_seen(labels: np.ndarray) -> np.ndarray:
    _, first = np.unique(labels, return_index=True)
    order = labels[np.sort(first)]
    mapping = {old: new for new, old in enumerate(order)}
    return np.array([mapping[v] for v in labels], dtype=int)
