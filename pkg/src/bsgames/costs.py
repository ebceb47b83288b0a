"""True and perceived expected costs, vulnerabilities and critical paths.

Costs are evaluated in log space per path: a path's (perceived) attack
probability is ``exp(-sum_e (x_e + a_e)**alpha)`` and an asset's
vulnerability is the largest such value over its simple paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import AttackGraph, Node, PathSet
from .perception import _exp_neg, check_alpha
from .scenario import Scenario

TIE_TOL = 1e-9
FEAS_TOL = 1e-9


class InfeasibleProfileError(ValueError):
    pass


def aggregate(profile) -> np.ndarray:
    """Per-edge total investment (column sums of the defender x edge matrix)."""
    profile = np.atleast_2d(np.asarray(profile, dtype=float))
    return profile.sum(axis=0)


def check_profile(scenario: Scenario, profile, tol: float = FEAS_TOL) -> np.ndarray:
    profile = np.asarray(profile, dtype=float)
    shape = (len(scenario.defenders), scenario.graph.n_edges)
    if profile.shape != shape:
        raise InfeasibleProfileError(f"profile shape {profile.shape}, expected {shape}")
    if np.any(~np.isfinite(profile)):
        raise InfeasibleProfileError("non-finite investment")
    if np.any(profile < -tol):
        raise InfeasibleProfileError("negative investment")
    over = profile.sum(axis=1) - scenario.budgets
    if np.any(over > tol * np.maximum(1.0, scenario.budgets)):
        k = int(np.argmax(over))
        raise InfeasibleProfileError(
            f"defender {scenario.defenders[k].id!r} exceeds budget by {over[k]:.3g}"
        )
    return np.maximum(profile, 0.0)


def _exponents(totals, offsets, alpha):
    return np.power(np.maximum(totals, 0.0) + offsets, alpha)


class AssetPaths:
    """Loss-weighted assets with their path incidence, compiled for fast evaluation.

    Rows of ``A`` are paths, grouped contiguously by asset.  Assets with no
    path from the source have vulnerability 0.
    """

    def __init__(self, graph: AttackGraph, pathsets: Sequence[PathSet], losses):
        for ps in pathsets:
            ps.require_complete()
        self.graph = graph
        self.nodes = [ps.target for ps in pathsets]
        self.losses = np.asarray(losses, dtype=float)
        self.counts = np.array([len(ps) for ps in pathsets], dtype=int)
        self.paths = [p for ps in pathsets for p in ps.paths]
        n_e = graph.n_edges
        self.A = np.zeros((len(self.paths), n_e))
        for r, p in enumerate(self.paths):
            self.A[r, list(p)] = 1.0
        self.group = np.repeat(np.arange(len(pathsets)), self.counts)
        self.starts = np.concatenate([[0], np.cumsum(self.counts)[:-1]]).astype(int)
        self.reachable = self.counts > 0

    @classmethod
    def for_assets(cls, scenario: Scenario, assets) -> "AssetPaths":
        assets = list(assets)
        return cls(scenario.graph, [scenario.paths(n) for n, _ in assets],
                   [loss for _, loss in assets])

    def path_exponents(self, totals, alpha: float) -> np.ndarray:
        g = _exponents(totals, self.graph.offsets, alpha)
        return self.A @ g

    def min_exponents(self, h: np.ndarray) -> np.ndarray:
        """Per-asset smallest path exponent; +inf where no path exists."""
        out = np.full(len(self.counts), np.inf)
        r = self.reachable
        if np.any(r):
            out[r] = np.minimum.reduceat(h, self.starts[r])
        return out

    def log_cost(self, totals, alpha: float) -> float:
        """log of sum_m L_m * exp(-min_P h_P); -inf when the cost is zero."""
        hmin = self.min_exponents(self.path_exponents(totals, alpha))
        with np.errstate(divide="ignore"):
            terms = np.log(self.losses) - hmin
        if not np.any(np.isfinite(terms)):
            return -np.inf
        t = terms[np.isfinite(terms)]
        m = t.max()
        return float(m + np.log(np.exp(t - m).sum()))

    def cost(self, totals, alpha: float) -> float:
        return float(np.exp(self.log_cost(totals, alpha)))


def vulnerability(graph: AttackGraph, pathset: PathSet, totals, alpha="true"):
    """Largest path attack probability to ``pathset.target`` and its maximizers.

    ``alpha="true"`` (or 1) uses raw probabilities; a float in (0, 1] uses
    Prelec-weighted edge probabilities.  Returns ``(value, critical)`` with
    every path index whose value is within the tie tolerance of the max.
    """
    pathset.require_complete()
    a = 1.0 if alpha == "true" else check_alpha(alpha)
    if len(pathset) == 0:
        return 0.0, []
    totals = np.asarray(totals, dtype=float)
    if np.any(totals < 0):
        raise ValueError("negative investment")
    g = _exponents(totals, graph.offsets, a)
    h = np.array([g[list(p)].sum() for p in pathset.paths])
    hmin = h.min()
    critical = np.flatnonzero(h - hmin <= TIE_TOL)
    return float(_exp_neg(hmin)), [int(i) for i in critical]


@dataclass
class CostBreakdown:
    """Costs of one joint profile.

    ``asset_*`` entries are keyed by ``(defender id, node)``.
    """

    true_vulnerability: dict
    perceived_vulnerability: dict
    critical_paths: dict
    true_costs: dict
    perceived_costs: dict

    @property
    def total_true(self) -> float:
        return float(sum(self.true_costs.values()))

    @property
    def total_perceived(self) -> float:
        return float(sum(self.perceived_costs.values()))


def cost_breakdown(scenario: Scenario, profile) -> CostBreakdown:
    profile = check_profile(scenario, profile)
    totals = aggregate(profile)
    g = scenario.graph
    tv, pv, crit, tc, pc = {}, {}, {}, {}, {}
    for d in scenario.defenders:
        t_sum = p_sum = 0.0
        for node, loss in d.assets:
            ps = scenario.paths(node)
            vt, cp = vulnerability(g, ps, totals, "true")
            vp, _ = vulnerability(g, ps, totals, d.alpha)
            tv[(d.id, node)] = vt
            pv[(d.id, node)] = vp
            crit[(d.id, node)] = [ps.paths[i] for i in cp]
            t_sum += loss * vt
            p_sum += loss * vp
        tc[d.id] = t_sum
        pc[d.id] = p_sum
    return CostBreakdown(tv, pv, crit, tc, pc)


def true_cost(scenario: Scenario, profile) -> CostBreakdown:
    """Full cost breakdown; ``.true_costs`` holds each defender's true expected cost."""
    return cost_breakdown(scenario, profile)


def perceived_cost(scenario: Scenario, defender_id: str, profile) -> float:
    profile = check_profile(scenario, profile)
    d = scenario.defender(defender_id)
    return AssetPaths.for_assets(scenario, d.assets).cost(aggregate(profile), d.alpha)


def defender_true_cost(scenario: Scenario, defender_id: str, profile) -> float:
    profile = check_profile(scenario, profile)
    d = scenario.defender(defender_id)
    return AssetPaths.for_assets(scenario, d.assets).cost(aggregate(profile), 1.0)


def total_true_cost(scenario: Scenario, profile) -> float:
    """Sum over defenders of true expected cost (shared assets count once per owner)."""
    profile = check_profile(scenario, profile)
    assets = [a for d in scenario.defenders for a in d.assets]
    return AssetPaths.for_assets(scenario, assets).cost(aggregate(profile), 1.0)
