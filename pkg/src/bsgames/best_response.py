"""One defender's perceived-cost minimization over her budget simplex.

The objective is

    C(x) = sum_m L_m * max_P exp(-sum_{e in P} (x_e + o_e + a_e)**alpha)

with ``o`` the other defenders' investments.  It is convex in ``x`` but
nonsmooth (max over paths) and, for alpha < 1, has unbounded slope where an
edge carries no investment at all.

Solving happens in two phases on ``log C`` (same minimizer, better scaled):

1. projected gradient on a log-sum-exp smoothing of the per-asset max, with
   the temperature annealed toward zero and Armijo backtracking;
2. an SLSQP polish of the epigraph form
   ``min logsumexp(log L - t)  s.t.  t_m <= h_P(x) for P to m``,
   warm-started from phase 1.

The better of the two points (on the exact objective) is returned.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .costs import AssetPaths, aggregate, check_profile
from .scenario import Scenario


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 2000
    abs_tol: float = 1e-8
    rel_tol: float = 1e-7
    x_tol: float = 1e-6
    tau0: float = 0.5
    tau_min: float = 1e-3
    tau_decay: float = 0.2
    inner_iter: int = 100
    grad_floor: float = 1e-9
    restarts: int = 5
    seed: int = 0
    polish: bool = True
    polish_maxiter: int = 500

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "x_tol", "tau0", "tau_min", "grad_floor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iter < 1 or self.inner_iter < 1:
            raise ValueError("iteration limits must be >= 1")
        if not 0 < self.tau_decay < 1:
            raise ValueError("tau_decay must lie in (0, 1)")


@dataclass
class SolveReport:
    defender: str
    x: np.ndarray
    perceived_cost: float
    true_cost: float
    critical_paths: dict
    iterations: int
    converged: bool
    spread: float | None = None
    unique: bool | None = None
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "defender": self.defender,
            "x": self.x.tolist(),
            "perceived_cost": self.perceived_cost,
            "true_cost": self.true_cost,
            "critical_paths": {str(k): [list(p) for p in v] for k, v in self.critical_paths.items()},
            "iterations": self.iterations,
            "converged": self.converged,
            "spread": self.spread,
            "unique": self.unique,
            "message": self.message,
        }


def _lse(v: np.ndarray) -> float:
    m = v.max()
    return float(m + np.log(np.exp(v - m).sum()))


def project_budget_simplex(v, budget: float) -> np.ndarray:
    """Euclidean projection of ``v`` onto ``{x >= 0, sum(x) = budget}``."""
    v = np.asarray(v, dtype=float)
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    if v.size == 0:
        return v.copy()
    if budget == 0:
        return np.zeros_like(v)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - budget
    ks = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ks >= 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


class BestResponseProblem:
    """Compiled best-response instance over the edges that can matter.

    Only edges lying on some path to a positive-loss, reachable asset are
    decision variables; investing anywhere else is pure waste.
    """

    def __init__(self, scenario: Scenario, k: int, others_total: np.ndarray,
                 alpha: float | None = None, assets=None, budget: float | None = None):
        d = scenario.defenders[k]
        self.defender = d
        self.alpha = d.alpha if alpha is None else float(alpha)
        self.budget = d.budget if budget is None else float(budget)
        assets = d.assets if assets is None else assets
        live = [(n, L) for n, L in assets if L > 0 and len(scenario.paths(n)) > 0]
        self.n_edges = scenario.graph.n_edges
        self.others_total = np.asarray(others_total, dtype=float)
        if not live:
            self.edges = np.zeros(0, dtype=int)
            self.ap = None
            return
        ap = AssetPaths.for_assets(scenario, live)
        used = np.flatnonzero(ap.A.sum(axis=0) > 0)
        self.ap = ap
        self.edges = used
        self.A = ap.A[:, used]
        self.group = ap.group
        self.starts = ap.starts
        self.log_losses = np.log(ap.losses)
        self.c = self.others_total[used] + scenario.graph.offsets[used]
        self.n_assets = len(live)

    @property
    def trivial(self) -> bool:
        return self.budget <= 0 or self.edges.size == 0

    def embed(self, xr: np.ndarray) -> np.ndarray:
        x = np.zeros(self.n_edges)
        x[self.edges] = xr
        return x

    def restrict(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float)[self.edges]

    def path_exponents(self, xr):
        g = np.power(np.maximum(xr, 0.0) + self.c, self.alpha)
        return self.A @ g

    def objective(self, xr) -> float:
        """Exact log perceived cost."""
        h = self.path_exponents(xr)
        hmin = np.minimum.reduceat(h, self.starts)
        return float(_lse(self.log_losses - hmin))

    def _slopes(self, xr, floor):
        return self.alpha * np.power(np.maximum(xr + self.c, floor), self.alpha - 1.0)

    def smoothed(self, xr, tau: float, floor: float = 1e-9):
        """Log-sum-exp smoothed log cost and its gradient.

        Upper-bounds the exact objective and converges to it as tau -> 0.
        """
        h = self.path_exponents(xr)
        hmin = np.minimum.reduceat(h, self.starts)
        z = np.exp(-(h - hmin[self.group]) / tau)
        Z = np.add.reduceat(z, self.starts)
        s = hmin - tau * np.log(Z)
        pi = z / Z[self.group]
        terms = self.log_losses - s
        F = float(_lse(terms))
        w = np.exp(terms - F)
        dh = (w[self.group] * pi) @ self.A
        grad = -dh * self._slopes(xr, floor)
        return F, grad

    def critical_paths(self, xr) -> dict:
        h = self.path_exponents(xr)
        out = {}
        for m, node in enumerate(self.ap.nodes):
            lo = self.starts[m]
            hi = lo + self.ap.counts[m]
            hm = h[lo:hi]
            idx = np.flatnonzero(hm - hm.min() <= 1e-9)
            out[node] = [self.ap.paths[lo + i] for i in idx]
        return out

    # -- phase 1 ---------------------------------------------------------

    def descend(self, x0, config: SolverConfig, trace: list | None = None):
        x = project_budget_simplex(x0, self.budget)
        eta = self.budget / max(1, x.size)
        tau = config.tau0
        iters = 0
        settled = False
        while True:
            F, g = self.smoothed(x, tau, config.grad_floor)
            stalled = False
            for _ in range(config.inner_iter):
                if iters >= config.max_iter:
                    break
                iters += 1
                eta = min(eta * 2.0, 10.0 * self.budget)
                while True:
                    xn = project_budget_simplex(x - eta * g, self.budget)
                    d = xn - x
                    Fn, gn = self.smoothed(xn, tau, config.grad_floor)
                    if Fn <= F + g @ d + (d @ d) / (2 * eta) + 1e-15 or eta < 1e-14:
                        break
                    eta *= 0.5
                if trace is not None:
                    trace.append((tau, Fn))
                step = np.max(np.abs(d)) if d.size else 0.0
                x, F, g = xn, Fn, gn
                if step < 0.1 * config.x_tol:
                    stalled = True
                    break
            if tau <= config.tau_min or iters >= config.max_iter:
                settled = stalled and tau <= config.tau_min
                break
            tau = max(tau * config.tau_decay, config.tau_min)
        return x, iters, settled

    # -- phase 2 ---------------------------------------------------------

    def polish(self, x0, config: SolverConfig):
        n, M = self.edges.size, self.n_assets
        A, group, floor = self.A, self.group, config.grad_floor
        sel = np.zeros((A.shape[0], M))
        sel[np.arange(A.shape[0]), group] = 1.0

        def fun(z):
            t = z[n:]
            terms = self.log_losses - t
            F = _lse(terms)
            gz = np.zeros_like(z)
            gz[n:] = -np.exp(terms - F)
            return F, gz

        def cons(z):
            return self.path_exponents(z[:n]) - z[n:][group]

        def cons_jac(z):
            return np.hstack([A * self._slopes(np.maximum(z[:n], 0.0), floor), -sel])

        h0 = self.path_exponents(x0)
        t0 = np.minimum.reduceat(h0, self.starts)
        z0 = np.concatenate([x0, t0])
        bounds = [(0.0, self.budget)] * n + [(None, None)] * M
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = minimize(
                fun, z0, jac=True, method="SLSQP", bounds=bounds,
                constraints=[
                    {"type": "ineq", "fun": cons, "jac": cons_jac},
                    {"type": "eq", "fun": lambda z: z[:n].sum() - self.budget,
                     "jac": lambda z: np.concatenate([np.ones(n), np.zeros(M)])},
                ],
                options={"ftol": 1e-15, "maxiter": config.polish_maxiter},
            )
        x = project_budget_simplex(np.maximum(res.x[:n], 0.0), self.budget)
        return x, res

    def solve(self, config: SolverConfig, x0=None, warm: bool = False):
        """Phase 1 then polish.  ``warm`` skips phase 1 and polishes ``x0`` directly,
        falling back to a cold solve if that fails."""
        if warm and x0 is not None and config.polish:
            x0 = project_budget_simplex(x0, self.budget)
            x2, res = self.polish(x0, config)
            if res.success:
                return x2, self.objective(x2), int(res.nit), True, f"slsqp (warm): {res.message}"
            x0 = None
        if x0 is None:
            x0 = np.full(self.edges.size, self.budget / self.edges.size)
        x1, iters, settled = self.descend(x0, config)
        F1 = self.objective(x1)
        best, Fbest, ok, msg = x1, F1, settled, "projected gradient"
        if config.polish:
            x2, res = self.polish(x1, config)
            F2 = self.objective(x2)
            iters += int(res.nit)
            tol = max(config.abs_tol, config.rel_tol * abs(F1))
            if F2 <= F1 + tol:
                best, Fbest = x2, F2
                ok = bool(res.success) or settled
                msg = f"slsqp: {res.message}"
            else:
                msg = f"polish rejected ({res.message})"
        return best, Fbest, iters, ok, msg


def _others_total(scenario: Scenario, k: int, others) -> np.ndarray:
    if others is None:
        return np.zeros(scenario.graph.n_edges)
    others = check_profile(scenario, others)
    return aggregate(others) - others[k]


def best_response(scenario: Scenario, defender_id: str, others=None,
                  config: SolverConfig | None = None, x0=None, warm: bool = False) -> SolveReport:
    """Perceived-cost-minimizing investment for one defender.

    ``others`` is a full joint profile (defender x edge); the acting
    defender's own row is ignored.  ``x0`` is an optional full-length
    starting vector; with ``warm=True`` it is refined directly by the
    polish step, which is much cheaper when ``x0`` is already close.
    """
    config = config or SolverConfig()
    k = scenario.index(defender_id)
    o = _others_total(scenario, k, others)
    prob = BestResponseProblem(scenario, k, o)
    return _solve(scenario, k, o, prob, config, x0, warm)


def _solve(scenario, k, o, prob: BestResponseProblem, config, x0=None, warm=False) -> SolveReport:
    d = scenario.defenders[k]
    if prob.trivial:
        x = np.zeros(scenario.graph.n_edges)
        crit = prob.critical_paths(prob.restrict(x)) if prob.edges.size else {}
        return SolveReport(d.id, x, _cost(scenario, d, o, d.alpha), _cost(scenario, d, o, 1.0),
                           crit, 0, True, message="trivial")
    start = None if x0 is None else prob.restrict(x0)
    xr, _, iters, ok, msg = prob.solve(config, start, warm)
    x = prob.embed(xr)
    total = o + x
    return SolveReport(
        d.id, x,
        _cost(scenario, d, total, d.alpha),
        _cost(scenario, d, total, 1.0),
        prob.critical_paths(xr), iters, ok, message=msg,
    )


def _cost(scenario, d, totals, alpha) -> float:
    return AssetPaths.for_assets(scenario, d.assets).cost(totals, alpha)


def check_uniqueness(reports, alpha: float, x_tol: float = 1e-6) -> tuple[bool, float]:
    """Largest pairwise sup-norm distance between optima from different starts.

    For alpha < 1 the optimum is unique, so a spread above ``10 * x_tol``
    is flagged.  For alpha = 1 optima may legitimately differ and the
    spread is only reported.
    """
    xs = [r.x for r in reports]
    spread = 0.0
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            spread = max(spread, float(np.max(np.abs(xs[i] - xs[j]))))
    if alpha >= 1.0:
        return True, spread
    return spread <= 10 * x_tol, spread


def best_response_restarts(scenario: Scenario, defender_id: str, others=None,
                           config: SolverConfig | None = None) -> tuple[SolveReport, list[SolveReport]]:
    """Solve from ``config.restarts`` seeded random starts on the simplex.

    Returns the lowest-cost report (annotated with spread and uniqueness)
    together with all individual reports.
    """
    config = config or SolverConfig()
    k = scenario.index(defender_id)
    o = _others_total(scenario, k, others)
    prob = BestResponseProblem(scenario, k, o)
    rng = np.random.default_rng(config.seed)
    reports = []
    for _ in range(max(1, config.restarts)):
        x0 = None
        if not prob.trivial:
            x0 = prob.embed(rng.dirichlet(np.ones(prob.edges.size)) * prob.budget)
        reports.append(_solve(scenario, k, o, prob, config, x0))
    best = min(reports, key=lambda r: r.perceived_cost)
    unique, spread = check_uniqueness(reports, scenario.defenders[k].alpha, config.x_tol)
    best = replace(best, spread=spread, unique=unique)
    return best, reports
