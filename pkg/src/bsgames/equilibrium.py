"""Best-response dynamics, PNE verification and multi-start equilibrium search."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .best_response import BestResponseProblem, SolverConfig, best_response
from .costs import AssetPaths, aggregate, check_profile
from .scenario import Scenario

log = logging.getLogger(__name__)

DEDUP_TOL = 1e-4


@dataclass(frozen=True)
class DynamicsConfig:
    max_rounds: int = 200
    tol: float = 1e-6
    verify_tol: float = 1e-6
    order: str | tuple = "round-robin"  # "round-robin", "random", or explicit id sequence
    n_starts: int = 10
    seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if not (self.tol > 0 and self.verify_tol > 0):
            raise ValueError("tolerances must be positive")
        if isinstance(self.order, str) and self.order not in ("round-robin", "random"):
            raise ValueError(f"unknown update order {self.order!r}")


@dataclass
class EquilibriumResult:
    profile: np.ndarray
    converged: bool
    rounds: int
    perceived_costs: dict
    true_costs: dict
    residuals: dict
    trace: list
    dynamics_converged: bool = False
    leader: str | None = None

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0

    @property
    def total_true_cost(self) -> float:
        return float(sum(self.true_costs.values()))

    def to_dict(self) -> dict:
        return {
            "profile": self.profile.tolist(),
            "converged": self.converged,
            "dynamics_converged": self.dynamics_converged,
            "rounds": self.rounds,
            "leader": self.leader,
            "perceived_costs": self.perceived_costs,
            "true_costs": self.true_costs,
            "total_true_cost": self.total_true_cost,
            "residuals": self.residuals,
            "max_residual": self.max_residual,
            "trace": self.trace,
        }


def _costs(scenario: Scenario, profile: np.ndarray):
    totals = aggregate(profile)
    perceived, true = {}, {}
    for d in scenario.defenders:
        ap = AssetPaths.for_assets(scenario, d.assets)
        perceived[d.id] = ap.cost(totals, d.alpha)
        true[d.id] = ap.cost(totals, 1.0)
    return perceived, true


def verify_pne(scenario: Scenario, profile, config: SolverConfig | None = None) -> dict:
    """Relative gain each defender could get by deviating unilaterally.

    ``(C_k(profile) - C_k(best response)) / C_k(profile)``, keyed by defender
    id.  A profile is a PNE when every value is below a small tolerance
    (see :func:`is_pne`).
    """
    profile = check_profile(scenario, profile)
    residuals = {}
    for d in scenario.defenders:
        ap = AssetPaths.for_assets(scenario, d.assets)
        current = ap.cost(aggregate(profile), d.alpha)
        br = best_response(scenario, d.id, profile, config)
        if current <= 0:
            residuals[d.id] = 0.0
        else:
            residuals[d.id] = float((current - br.perceived_cost) / current)
    return residuals


def is_pne(scenario: Scenario, profile, tol: float = 1e-6, config=None) -> bool:
    return max(verify_pne(scenario, profile, config).values(), default=0.0) <= tol


def _round_order(ids: list[str], order, first: str | None, rng) -> list[str]:
    if isinstance(order, str):
        if order == "random":
            return [ids[i] for i in rng.permutation(len(ids))]
        seq = list(ids)
    else:
        seq = list(order)
        if sorted(seq) != sorted(ids):
            raise ValueError("explicit update order must list every defender once")
    if first is not None:
        i = seq.index(first)
        seq = seq[i:] + seq[:i]
    return seq


def best_response_dynamics(scenario: Scenario, initial=None, config: DynamicsConfig | None = None,
                           first: str | None = None) -> EquilibriumResult:
    """Sequential best-response dynamics from ``initial``.

    Each round replaces every defender's row, one at a time, with her best
    response to the current profile.  Stops once a round leaves every row
    but the first mover's within ``config.tol`` (sup-norm), which is then a
    fixed point; a lone defender therefore stops after one round.  ``first``
    names the defender who moves first in every round.

    Non-convergence is reported via ``converged=False``; the final profile
    is always checked with :func:`verify_pne`.
    """
    config = config or DynamicsConfig()
    profile = scenario.zero_profile() if initial is None else check_profile(scenario, initial).copy()
    rng = np.random.default_rng(config.seed)
    ids = scenario.ids
    trace = []
    settled = False
    rounds = 0
    for rounds in range(1, config.max_rounds + 1):
        prev = profile.copy()
        order = _round_order(ids, config.order, first, rng)
        for did in order:
            k = scenario.index(did)
            d = scenario.defenders[k]
            before = AssetPaths.for_assets(scenario, d.assets).cost(aggregate(profile), d.alpha)
            # round 1 solves cold so the result does not depend on the
            # defender's own starting row; later rounds refine the last answer
            rep = best_response(scenario, did, profile, config.solver,
                                x0=profile[k] if rounds > 1 else None, warm=rounds > 1)
            profile[k] = rep.x
            trace.append({
                "round": rounds, "defender": did,
                "perceived_before": before, "perceived_after": rep.perceived_cost,
                "solver_converged": rep.converged,
            })
        change = np.max(np.abs(profile - prev), axis=1) if profile.size else np.zeros(len(ids))
        trace[-1]["round_delta"] = float(change.max(initial=0.0))
        # Everyone after the round's first mover answered the final rows, and
        # the first mover answered rows that have not moved since, so a round
        # in which only the first mover changed ends at a fixed point.
        rest = np.delete(change, scenario.index(order[0])) if order else change
        if rest.max(initial=0.0) < config.tol:
            settled = True
            break
    residuals = verify_pne(scenario, profile, config.solver)
    perceived, true = _costs(scenario, profile)
    ok = settled and max(residuals.values(), default=0.0) <= config.verify_tol
    if not ok:
        log.info("dynamics stopped after %d rounds without a verified PNE", rounds)
    return EquilibriumResult(profile, ok, rounds, perceived, true, residuals, trace,
                             dynamics_converged=settled, leader=first or None)


def random_profile(scenario: Scenario, rng) -> np.ndarray:
    """Each defender spends her full budget, Dirichlet-uniform over useful edges."""
    profile = scenario.zero_profile()
    for k, d in enumerate(scenario.defenders):
        prob = BestResponseProblem(scenario, k, np.zeros(scenario.graph.n_edges))
        if prob.trivial:
            continue
        profile[k, prob.edges] = rng.dirichlet(np.ones(prob.edges.size)) * d.budget
    return profile


def find_equilibria(scenario: Scenario, config: DynamicsConfig | None = None,
                    starts: Sequence = ()) -> list[EquilibriumResult]:
    """Distinct verified PNE reached from several starting profiles.

    ``starts`` holds extra starting profiles, or ``(profile, first_mover)``
    pairs; ``config.n_starts`` seeded random profiles follow, with the
    first mover rotating through the defenders.  Results are deduplicated
    by sup-norm distance on the investment profile.
    """
    config = config or DynamicsConfig()
    rng = np.random.default_rng(config.seed)
    ids = scenario.ids
    runs = []
    for s in starts:
        if isinstance(s, tuple):
            runs.append((np.asarray(s[0], dtype=float), s[1]))
        else:
            runs.append((np.asarray(s, dtype=float), None))
    for i in range(config.n_starts):
        runs.append((random_profile(scenario, rng), ids[i % len(ids)] if ids else None))

    found: list[EquilibriumResult] = []
    for init, first in runs:
        res = best_response_dynamics(scenario, init, config, first=first)
        if not res.converged:
            continue
        if any(np.max(np.abs(res.profile - f.profile)) <= DEDUP_TOL for f in found):
            continue
        found.append(res)
    if not found:
        warnings.warn("no verified PNE found from any start", RuntimeWarning, stacklevel=2)
    return found
