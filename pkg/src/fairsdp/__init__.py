"""Fair graph clustering through a penalized semidefinite relaxation."""

from .admm import AdmmConfig, AdmmState, admm_solve, round_assignment, solve_admm
from .graph import (
    ClusterAssignment,
    Graph,
    SensitiveAttributes,
    adjacency_from_points,
    load_edge_list,
    load_labels,
    save_edge_list,
    save_labels,
)
from .metrics import ami, ari, balance, score_report, v_measure
from .sbm import SbmParams, WeightedTwoClusterParams, generate_sbm, generate_weighted_two_cluster, sample_sensitive
from .spectral import (
    PenalizedMatrix,
    SolverConfig,
    build_penalized,
    fair_spectral_binary,
    fair_spectral_k,
    objective_value,
    recursive_bisection,
    solve_spectral,
)
from .sweep import SweepPoint, SweepSpec, pareto_front, run_sweep, tradeoff_auc

__version__ = "0.1.0"
