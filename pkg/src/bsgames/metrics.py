"""Social optimum, Price of Behavioral Anarchy and parameter sweeps."""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .best_response import SolveReport, SolverConfig, best_response
from .equilibrium import DynamicsConfig, EquilibriumResult, find_equilibria
from .scenario import Defender, Scenario

log = logging.getLogger(__name__)

PLANNER_ID = "planner"


class PobaError(ValueError):
    pass


@dataclass
class SocialOptimum:
    budget: float
    x: np.ndarray
    cost: float
    converged: bool
    report: SolveReport | None = None

    def to_dict(self) -> dict:
        return {"budget": self.budget, "x": self.x.tolist(), "cost": self.cost,
                "converged": self.converged}


def planner_scenario(scenario: Scenario) -> Scenario:
    """Single non-behavioral defender holding every asset entry and the pooled budget.

    An asset owned by several defenders keeps one entry whose loss is the
    sum of their losses, which leaves the total true cost unchanged.
    """
    merged: dict = {}
    for d in scenario.defenders:
        for node, loss in d.assets:
            merged[node] = merged.get(node, 0.0) + loss
    planner = Defender(PLANNER_ID, float(scenario.budgets.sum()), 1.0, tuple(merged.items()))
    return scenario.with_defenders([planner])


def social_optimum(scenario: Scenario, config: SolverConfig | None = None) -> SocialOptimum:
    ps = planner_scenario(scenario)
    rep = best_response(ps, PLANNER_ID, None, config)
    if not rep.converged:
        log.warning("social optimum solve did not converge: %s", rep.message)
    return SocialOptimum(float(ps.budgets[0]), rep.x, rep.true_cost, rep.converged, rep)


@dataclass
class PobaReport:
    worst_pne_cost: float
    social_cost: float
    poba: float
    upper_bound: float
    inefficiencies: list = field(default_factory=list)
    n_equilibria: int = 0

    def to_dict(self) -> dict:
        return {
            "worst_pne_cost": self.worst_pne_cost,
            "social_cost": self.social_cost,
            "poba_estimate": self.poba,
            "poba_is_lower_bound": True,
            "upper_bound": self.upper_bound,
            "inefficiencies": self.inefficiencies,
            "n_equilibria": self.n_equilibria,
        }


def poba(scenario: Scenario, equilibria: Sequence[EquilibriumResult],
         social: SocialOptimum) -> PobaReport:
    """Worst supplied PNE over the planner's cost.

    Only the equilibria passed in are considered, so the ratio is a lower
    estimate of the PoBA over all equilibria.
    """
    eqs = [e for e in equilibria if e.converged]
    if not eqs:
        raise PobaError("no verified equilibrium supplied")
    costs = [e.total_true_cost for e in eqs]
    worst = max(costs)
    bound = math.exp(float(scenario.budgets.sum()))
    if social.cost <= 0:
        # nothing can be lost (no reachable positive-loss asset)
        ratio, ineff = 1.0, [1.0] * len(costs)
    else:
        ratio = worst / social.cost
        ineff = [c / social.cost for c in costs]
    if ratio < 1 - 1e-9:
        raise PobaError(f"PNE beats the social optimum (ratio {ratio:.12g}); planner solve is off")
    if ratio > bound * (1 + 1e-9) + 1e-6:
        raise PobaError(f"ratio {ratio:.6g} exceeds the exp(B) bound {bound:.6g}")
    return PobaReport(worst, social.cost, ratio, bound, ineff, len(eqs))


# -- sweeps -----------------------------------------------------------------

SWEEP_COLUMNS = ("alpha", "budget", "pne_cost", "social_cost", "inefficiency")


def split_proportional(template: Scenario, budget: float) -> Scenario:
    """Rescale defender budgets so they sum to ``budget``, keeping the template's shares.

    Templates whose budgets are all zero get an equal split.
    """
    b = template.budgets
    shares = b / b.sum() if b.sum() > 0 else np.full(len(b), 1.0 / max(len(b), 1))
    return template.with_defenders(
        replace(d, budget=float(budget * s)) for d, s in zip(template.defenders, shares)
    )


@dataclass
class SweepRow:
    alpha: float
    budget: float
    pne_cost: float = math.nan
    social_cost: float = math.nan
    inefficiency: float = math.nan
    n_equilibria: int = 0
    error: str = ""
    seconds: float = 0.0

    def values(self) -> tuple:
        return tuple(getattr(self, c) for c in SWEEP_COLUMNS)


def evaluate_cell(scenario: Scenario, config: DynamicsConfig) -> SweepRow:
    """Equilibria, planner and inefficiency for one fully specified scenario."""
    t0 = time.perf_counter()
    alpha = scenario.defenders[0].alpha if scenario.defenders else math.nan
    row = SweepRow(alpha, float(scenario.budgets.sum()))
    try:
        eqs = find_equilibria(scenario, config)
        soc = social_optimum(scenario, config.solver)
        rep = poba(scenario, eqs, soc)
        row.pne_cost, row.social_cost, row.inefficiency = rep.worst_pne_cost, rep.social_cost, rep.poba
        row.n_equilibria = rep.n_equilibria
    except Exception as exc:  # recorded in-row; the sweep carries on
        row.error = f"{type(exc).__name__}: {exc}"
        log.warning("sweep cell alpha=%g budget=%g failed: %s", row.alpha, row.budget, row.error)
    row.seconds = time.perf_counter() - t0
    return row


def _cache_key(digest: str, alpha: float, budget: float) -> str:
    return f"{digest}_{alpha!r}_{budget!r}.json"


def sweep(template: Scenario, alphas: Sequence[float], budgets: Sequence[float],
          config: DynamicsConfig | None = None, cache_dir=None,
          split: Callable[[Scenario, float], Scenario] = split_proportional,
          progress: Callable[[SweepRow], None] | None = None) -> list[SweepRow]:
    """Inefficiency of the worst equilibrium found on an (alpha, budget) grid.

    Every defender gets the same alpha; ``split`` divides the total budget.
    Rows come budget-major, alpha-minor.  With ``cache_dir`` each finished
    cell is stored as JSON keyed by the template digest, alpha and budget, so
    an interrupted sweep resumes where it stopped.
    """
    alphas, budgets = list(alphas), list(budgets)
    if not alphas or not budgets:
        raise ValueError("alpha and budget grids must be non-empty")
    config = config or DynamicsConfig()
    cache = Path(cache_dir) if cache_dir is not None else None
    if cache is not None:
        cache.mkdir(parents=True, exist_ok=True)
    digest = template.digest()
    rows = []
    for B in budgets:
        for a in alphas:
            path = cache / _cache_key(digest, float(a), float(B)) if cache is not None else None
            if path is not None and path.exists():
                row = SweepRow(**json.loads(path.read_text()))
            else:
                row = evaluate_cell(split(template, float(B)).with_alpha(float(a)), config)
                row.alpha, row.budget = float(a), float(B)
                if path is not None and not row.error:
                    path.write_text(json.dumps(row.__dict__))
            rows.append(row)
            if progress is not None:
                progress(row)
    return rows
