"""Prelec probability weighting and the exponential attack-probability model.

With ``p(x) = p0 * exp(-x)`` the perceived probability of an edge under
Prelec weighting is ``exp(-(x + a)**alpha)`` where ``a = -log(p0)``.  Every
cost in the package is assembled from that per-edge exponent.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

UNDERFLOW = 1e-300


class ProbabilityUnderflowWarning(RuntimeWarning):
    pass


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha out of (0,1]: {alpha}")
    return alpha


_MAX_EXPONENT = -np.log(UNDERFLOW)


def _exp_neg(t):
    """``exp(-t)``, with values below 1e-300 set to 0 and reported."""
    t = np.asarray(t, dtype=float)
    small = np.isfinite(t) & (t > _MAX_EXPONENT)
    if np.any(small):
        warnings.warn(
            "probability below 1e-300 clamped to 0", ProbabilityUnderflowWarning, stacklevel=3
        )
    return np.where(small, 0.0, np.exp(-t))


def prelec_weight(p, alpha: float):
    """``w(p) = exp(-(-log p)**alpha)``; ``w(0) = 0`` by continuity."""
    alpha = check_alpha(alpha)
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("probability outside [0, 1]")
    with np.errstate(divide="ignore"):
        t = -np.log(p)
    out = np.where(p == 0, 0.0, _exp_neg(np.power(t, alpha)))
    return out if out.ndim else float(out)


def edge_exponent(x_total, offset, alpha: float):
    """``(x_total + offset)**alpha``: minus log of the perceived edge probability.

    Concave and nondecreasing in ``x_total`` for alpha in (0, 1].
    """
    alpha = check_alpha(alpha)
    x = np.asarray(x_total, dtype=float)
    if np.any(x < 0):
        raise ValueError("negative investment")
    out = np.power(x + np.asarray(offset, dtype=float), alpha)
    return out if out.ndim else float(out)


def true_edge_prob(x_total, offset):
    """``exp(-(x_total + offset))`` = ``p0 * exp(-x_total)``."""
    x = np.asarray(x_total, dtype=float)
    if np.any(x < 0):
        raise ValueError("negative investment")
    out = _exp_neg(x + np.asarray(offset, dtype=float))
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class ProbabilityModel:
    """Per-edge offsets ``a_e = -log(p0_e)`` of the exponential model.

    Only the exponential family is implemented.  Any log-convex, strictly
    decreasing, twice differentiable ``p(x)`` would keep the costs convex,
    but nothing here depends on that generality.
    """

    offsets: np.ndarray
    kind: str = "exponential"

    def __post_init__(self):
        if self.kind != "exponential":
            raise NotImplementedError(f"probability model {self.kind!r}")
        if np.any(np.asarray(self.offsets) < 0):
            raise ValueError("offsets must be nonnegative")

    @classmethod
    def from_p0(cls, p0) -> "ProbabilityModel":
        p0 = np.asarray(p0, dtype=float)
        if np.any((p0 <= 0) | (p0 > 1)):
            raise ValueError("p0 out of (0,1]")
        return cls(-np.log(p0))

    def exponents(self, x_total, alpha: float) -> np.ndarray:
        return edge_exponent(x_total, self.offsets, alpha)

    def true_probs(self, x_total) -> np.ndarray:
        return true_edge_prob(x_total, self.offsets)
