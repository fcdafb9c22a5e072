"""ADMM for the penalized SDP relaxation.

Minimizes ``Tr(BZ) + beta*||P||_*`` with ``B = -A~`` subject to
``diag(Z) = 1`` (multiplier ``alpha``) and ``P = Z`` (multiplier ``Gamma``),
``P`` PSD. Both constraints enter through an augmented Lagrangian with
penalty ``rho``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .graph import ClusterAssignment, Graph, SensitiveAttributes
from .numerics import ConvergenceError, power_iteration, svt_psd, sym_eig
from .spectral import SolverConfig, build_penalized

log = logging.getLogger(__name__)


class AdmmDivergenceError(RuntimeError):
    def __init__(self, iteration: int, what: str = "iterate"):
        super().__init__(f"ADMM diverged at iteration {iteration}: non-finite {what}")
        self.iteration = iteration


@dataclass(frozen=True)
class AdmmConfig:
    rho: float = 1.0
    beta: float = 1.0
    max_iter: int = 1000
    tol: float = 1e-6
    solver_config: SolverConfig = field(default_factory=SolverConfig)
    # reproduce the iterate indices exactly as written in the original
    # update rules (previous Z in the P-step proximity term, previous
    # diagonal in the alpha step) instead of the standard ADMM sweep
    literal_p_step: bool = False
    literal_alpha_step: bool = False

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class AdmmState:
    Z: np.ndarray
    P: np.ndarray
    alpha: np.ndarray
    Gamma: np.ndarray
    iteration: int = 0
    residual_primal_split: float = np.inf
    residual_diag: float = np.inf

    @classmethod
    def initial(cls, n: int) -> "AdmmState":
        return cls(
            Z=np.zeros((n, n)),
            P=np.zeros((n, n)),
            alpha=np.ones(n),
            Gamma=np.ones((n, n)),
        )

    @property
    def n(self) -> int:
        return self.Z.shape[0]


class TraceRow(NamedTuple):
    iteration: int
    residual_split: float
    residual_diag: float


def z_update(state: AdmmState, B: np.ndarray, cfg: AdmmConfig) -> np.ndarray:
    """Closed-form minimizer of the Z-subproblem (an unconstrained quadratic)."""
    rho = cfg.rho
    # overflow here surfaces as AdmmDivergenceError in admm_step
    with np.errstate(over="ignore", invalid="ignore"):
        Z = state.P + (state.Gamma - B) / rho
        diag = (rho * (1.0 + np.diag(state.P)) + np.diag(state.Gamma) - np.diag(B) - state.alpha) / (2.0 * rho)
    np.fill_diagonal(Z, diag)
    return Z


def p_update(state: AdmmState, cfg: AdmmConfig, z_prox: np.ndarray | None = None) -> np.ndarray:
    """PSD nuclear-norm prox at ``Z - Gamma/rho``.

    ``z_prox`` overrides the Z used in the proximity term (the literal
    variant passes the previous iterate here).
    """
    z = state.Z if z_prox is None else z_prox
    return svt_psd(z - state.Gamma / cfg.rho, cfg.beta / cfg.rho)


def augmented_lagrangian(state: AdmmState, B: np.ndarray, cfg: AdmmConfig) -> float:
    z = np.diag(state.Z)
    split = state.P - state.Z
    nuc = np.abs(np.linalg.eigvalsh((state.P + state.P.T) / 2)).sum()
    return float(
        np.sum(B * state.Z)
        + cfg.beta * nuc
        + state.alpha @ (z - 1)
        + cfg.rho / 2 * np.sum((z - 1) ** 2)
        + np.sum(state.Gamma * split)
        + cfg.rho / 2 * np.sum(split**2)
    )


def _check_finite(state: AdmmState, it: int) -> None:
    for name in ("Z", "P", "alpha", "Gamma"):
        if not np.all(np.isfinite(getattr(state, name))):
            raise AdmmDivergenceError(it, name)


def admm_step(state: AdmmState, B: np.ndarray, cfg: AdmmConfig) -> AdmmState:
    """One full sweep: Z, P, then both dual updates. Returns a new state."""
    it = state.iteration + 1
    z_prev = state.Z
    Z = z_update(state, B, cfg)
    mid = AdmmState(Z, state.P, state.alpha, state.Gamma, it)
    if not np.all(np.isfinite(Z)):
        raise AdmmDivergenceError(it, "Z")
    P = p_update(mid, cfg, z_prox=z_prev if cfg.literal_p_step else None)
    z_for_alpha = np.diag(z_prev) if cfg.literal_alpha_step else np.diag(Z)
    alpha = state.alpha + cfg.rho * (z_for_alpha - 1.0)
    Gamma = state.Gamma + cfg.rho * (P - Z)
    new = AdmmState(
        Z=Z,
        P=P,
        alpha=alpha,
        Gamma=Gamma,
        iteration=it,
        residual_primal_split=float(np.linalg.norm(P - Z)),
        residual_diag=float(np.abs(np.diag(Z) - 1.0).max()),
    )
    _check_finite(new, it)
    return new


def admm_solve(
    g: Graph,
    s: SensitiveAttributes,
    cfg: AdmmConfig,
    state: AdmmState | None = None,
) -> tuple[AdmmState, list[TraceRow]]:
    B = -build_penalized(g, s, cfg.solver_config).matrix
    return admm_solve_matrix(B, cfg, state)


def admm_solve_matrix(
    B: np.ndarray, cfg: AdmmConfig, state: AdmmState | None = None
) -> tuple[AdmmState, list[TraceRow]]:
    state = AdmmState.initial(B.shape[0]) if state is None else state
    trace: list[TraceRow] = []
    for _ in range(cfg.max_iter):
        state = admm_step(state, B, cfg)
        trace.append(TraceRow(state.iteration, state.residual_primal_split, state.residual_diag))
        if state.iteration % 50 == 0:
            for name in ("Z", "P", "Gamma"):
                m = getattr(state, name)
                if np.abs(m - m.T).max() > 1e-12:
                    raise AssertionError(f"{name} lost symmetry at iteration {state.iteration}")
        if state.residual_primal_split < cfg.tol and state.residual_diag < cfg.tol:
            break
    return state, trace


def _top_two(p: np.ndarray) -> tuple[float, float, np.ndarray]:
    try:
        lam1, v = power_iteration(p)
        # a fresh start vector; reusing the first one would lie in the
        # deflated direction
        lam2, _ = power_iteration(p - lam1 * np.outer(v, v), seed=54321)
        return lam1, lam2, v
    except ConvergenceError:
        eig = sym_eig(p)
        return float(eig.eigenvalues[0]), float(eig.eigenvalues[1]), eig.eigenvectors[:, 0]


def round_assignment(state: AdmmState) -> ClusterAssignment:
    """Sign pattern of the leading eigenvector of P."""
    p = (state.P + state.P.T) / 2
    if p.shape[0] == 1:
        return ClusterAssignment(np.ones(1, dtype=int), 2)
    lam1, lam2, v = _top_two(p)
    low = abs(lam1 - lam2) <= 1e-6 * max(abs(lam1), 1e-300)
    if low:
        log.warning("leading eigenvalues of P are nearly tied; rounding is low-confidence")
    return ClusterAssignment((v >= 0).astype(int), 2, low_confidence=low)


def solve_admm(g: Graph, s: SensitiveAttributes, cfg: AdmmConfig) -> ClusterAssignment:
    state, _ = admm_solve(g, s, cfg)
    return round_assignment(state)
