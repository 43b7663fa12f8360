"""Distances between an empirical spectral CDF and a reference CDF."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .ensembles import DimensionTriple
from .errors import ConfigurationError
from .mp_law import MPLaw, MomentVector, finite_n_tree_moment, mp_moment
from .spectra import EmpiricalCDF


@dataclass(frozen=True)
class DistanceResult:
    value: float
    tolerance: float
    method: str


class ContinuousCDF:
    """Adapter for a continuous, vectorized CDF evaluator."""

    continuous = True

    def __init__(self, func: Callable[[np.ndarray], np.ndarray]):
        self.func = func

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=np.float64)), dtype=np.float64)

    def left_limit(self, x):
        return self(x)


class StepCDF:
    """Adapter exposing an :class:`EmpiricalCDF` as a reference distribution."""

    continuous = False

    def __init__(self, ecdf: EmpiricalCDF):
        self.ecdf = ecdf

    def __call__(self, x):
        return np.asarray(self.ecdf(np.asarray(x, dtype=np.float64)), dtype=np.float64)

    def left_limit(self, x):
        return np.asarray(self.ecdf.left_limit(np.asarray(x, dtype=np.float64)), dtype=np.float64)


def as_reference(G) -> ContinuousCDF | StepCDF:
    if isinstance(G, (ContinuousCDF, StepCDF)):
        return G
    if isinstance(G, EmpiricalCDF):
        return StepCDF(G)
    if isinstance(G, MPLaw):
        return ContinuousCDF(G.cdf_array)
    if callable(G):
        return ContinuousCDF(G)
    raise ConfigurationError(f"cannot use {type(G).__name__} as a CDF")


def _check_monotone(G, xs: np.ndarray) -> None:
    lo, hi = xs[0], xs[-1]
    span = max(hi - lo, 1.0)
    probe = np.union1d(xs, np.linspace(lo - span, hi + span, 513))
    vals = G(probe)
    if not np.all(np.isfinite(vals)):
        raise ConfigurationError("reference CDF returned non-finite values")
    if np.any(np.diff(vals) < -1e-12) or vals.min() < -1e-12 or vals.max() > 1 + 1e-12:
        raise ConfigurationError("reference CDF is not a nondecreasing function into [0, 1]")


def levy_distance(F: EmpiricalCDF, G, tol: float = 1e-6) -> DistanceResult:
    """Lévy distance ``inf{eps > 0: G(x-eps)-eps <= F(x) <= G(x+eps)+eps for all x}``.

    Bisection over ``eps`` in ``[0, 1]`` (``eps = 1`` is always feasible);
    the returned value is within ``tol`` of the infimum.
    """
    if not tol > 0:
        raise ConfigurationError(f"tol must be positive, got {tol}")
    G = as_reference(G)
    x = F.points
    n = F.n
    _check_monotone(G, x)
    # F equals i/n on [x_i, x_{i+1}) and (i-1)/n on [x_{i-1}, x_i).
    # Upper condition: G(x+eps) is nondecreasing in x, so on [x_i, x_{i+1})
    # it is tightest at x = x_i:  i/n <= G(x_i + eps) + eps.
    # Lower condition: on [x_{i-1}, x_i) the sup of G(x-eps) is the left
    # limit at x_i:  G((x_i - eps)-) - eps <= (i-1)/n.  For x >= x_n, F = 1
    # and for x < x_1 the upper condition is trivial. Ties are covered since
    # the binding index of each tie group is checked.
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n

    def feasible(eps: float) -> bool:
        if np.any(upper > G(x + eps) + eps):
            return False
        return not np.any(G.left_limit(x - eps) - eps > lower)

    if feasible(0.0):
        # both conditions hold with eps = 0 only when F == G at every jump
        return DistanceResult(0.0, 0.0, "levy-exact-zero")
    lo, hi = 0.0, 1.0
    while hi - lo > 2.0 * tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return DistanceResult(0.5 * (lo + hi), 0.5 * (hi - lo), "levy-bisection")


def ks_distance(F: EmpiricalCDF, G) -> DistanceResult:
    """Kolmogorov-Smirnov ``sup |F - G|``; exact for continuous ``G``."""
    G = as_reference(G)
    x = F.points
    n = F.n
    if G.continuous:
        g = G(x)
        d = max(np.max(np.abs(np.arange(1, n + 1) / n - g)), np.max(np.abs(np.arange(0, n) / n - g)))
    else:
        # both are step functions: compare right values and left limits on
        # the union of jump points
        pts = np.union1d(x, G.ecdf.points)
        d = max(np.max(np.abs(F(pts) - G(pts))), np.max(np.abs(F.left_limit(pts) - G.left_limit(pts))))
    return DistanceResult(float(d), 0.0, "ks")


class MomentGap(NamedTuple):
    k: int
    gap: float
    tree_gap: Optional[float] = None


def moment_gap(
    sample_moments: MomentVector | Sequence[float],
    gamma: float,
    dims: Optional[DimensionTriple] = None,
) -> list[MomentGap]:
    """``|m_hat_k - mp_moment(k, gamma)|`` per k, plus the gap to the finite-n
    double-tree prediction when ``dims`` is given."""
    values = sample_moments.values if isinstance(sample_moments, MomentVector) else tuple(sample_moments)
    out = []
    for k, m in enumerate(values, start=1):
        tree = None
        if dims is not None:
            tree = abs(m - finite_n_tree_moment(k, dims.n, dims.d, dims.p))
        out.append(MomentGap(k, abs(m - mp_moment(k, gamma)), tree))
    return out
