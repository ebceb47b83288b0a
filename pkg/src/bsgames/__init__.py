"""Behavioral security games on attack graphs."""

__version__ = "0.1.0"

from .graph import AttackGraph, Edge, PathSet, enumerate_paths, min_edge_cut
from .perception import edge_exponent, prelec_weight, true_edge_prob
from .scenario import Defender, Diagnostic, Scenario, ScenarioError, build_scenario, validate
from .costs import aggregate, perceived_cost, total_true_cost, true_cost, vulnerability
from .best_response import (
    SolverConfig,
    SolveReport,
    best_response,
    best_response_restarts,
    check_uniqueness,
    project_budget_simplex,
)
from .equilibrium import (
    DynamicsConfig,
    EquilibriumResult,
    best_response_dynamics,
    find_equilibria,
    is_pne,
    verify_pne,
)
from .metrics import PobaReport, SocialOptimum, poba, social_optimum, sweep
from .io import emit_sweep_csv, load_scenario, read_sweep_csv, save_scenario
from . import instances
