"""Eigenvalues of a realized matrix, empirical CDFs, moments and histograms."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .ensembles import DimensionTriple, SymmetricMatrix
from .errors import ConfigurationError, NumericalError
from .mp_law import MPLaw


@dataclass
class SpectralSample:
    eigenvalues: np.ndarray
    dims: Optional[DimensionTriple] = None
    spec_summary: str = ""
    seed: Optional[int] = None
    wall_time: float = 0.0
    trace: Optional[float] = None
    frobenius_sq: Optional[float] = None

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


def eigenvalues(
    M: SymmetricMatrix,
    dims: Optional[DimensionTriple] = None,
    spec_summary: str = "",
    seed: Optional[int] = None,
    validate: bool = False,
) -> SpectralSample:
    """Ascending eigenvalues of ``M`` via LAPACK's symmetric solver.

    With ``validate=True`` eigenvectors are also computed and the residual
    ``max_i ||M v_i - lambda_i v_i||`` is checked against ``1e-8 ||M||_F``.
    """
    a = M.entries
    if not np.all(np.isfinite(a)):
        raise NumericalError("matrix has non-finite entries")
    t0 = time.perf_counter()
    try:
        if validate:
            vals, vecs = np.linalg.eigh(a)
            resid = np.linalg.norm(a @ vecs - vecs * vals, axis=0).max()
            fro = np.linalg.norm(a)
            if resid > 1e-8 * max(fro, np.finfo(float).tiny):
                raise NumericalError(f"eigen residual {resid:.3e} exceeds 1e-8 * ||M||_F = {1e-8 * fro:.3e}")
        else:
            vals = np.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigensolver did not converge: {exc}") from exc
    wall = time.perf_counter() - t0
    return SpectralSample(
        eigenvalues=np.sort(vals),
        dims=dims,
        spec_summary=spec_summary,
        seed=seed,
        wall_time=wall,
        trace=math.fsum(np.diag(a).tolist()),
        frobenius_sq=math.fsum(np.einsum("ij,ij->i", a, a).tolist()),
    )


def empirical_moment(sample: SpectralSample, k: int) -> float:
    """``(1/n) sum lambda_i^k`` with compensated summation."""
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    lam = np.asarray(sample.eigenvalues, dtype=np.float64)
    return math.fsum((lam**k).tolist()) / len(lam)


def empirical_moments(sample: SpectralSample, k_max: int) -> list[float]:
    return [empirical_moment(sample, k) for k in range(1, k_max + 1)]


@dataclass
class EmpiricalCDF:
    """Right-continuous step function ``F(x) = #{i: x_i <= x} / n``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.sort(np.asarray(self.points, dtype=np.float64).ravel())
        if pts.size == 0:
            raise ConfigurationError("empirical CDF needs at least one point")
        self.points = pts

    @property
    def n(self) -> int:
        return len(self.points)

    def __call__(self, x) -> np.ndarray | float:
        out = np.searchsorted(self.points, x, side="right") / self.n
        return float(out) if np.ndim(out) == 0 else out

    def left_limit(self, x) -> np.ndarray | float:
        """``F(x-) = #{i: x_i < x} / n``."""
        out = np.searchsorted(self.points, x, side="left") / self.n
        return float(out) if np.ndim(out) == 0 else out


def empirical_cdf(sample: SpectralSample | np.ndarray) -> EmpiricalCDF:
    pts = sample.eigenvalues if isinstance(sample, SpectralSample) else sample
    return EmpiricalCDF(pts)


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    n: int
    underflow: int = 0
    overflow: int = 0

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.n * self.widths)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def total_mass(self) -> Fraction:
        """Exact ``sum density_j width_j + (under + over) / n``; always 1."""
        return Fraction(int(self.counts.sum()) + self.underflow + self.overflow, self.n)


def default_range(sample: SpectralSample, gamma: Optional[float] = None) -> tuple[float, float]:
    """MP support of the realized gamma padded by 5% per side, extended down
    to cover negative eigenvalues."""
    if gamma is None:
        if sample.dims is None:
            raise ConfigurationError("histogram range needs either dims or an explicit gamma")
        gamma = sample.dims.realized_gamma
    law = MPLaw(gamma)
    a, b = law.edge_low, law.edge_high
    pad = 0.05 * (b - a)
    lo, hi = a - pad, b + pad
    lam_min = float(sample.eigenvalues[0])
    if lam_min < 0 and lam_min < lo:
        lo = lam_min - pad
    return lo, hi


def histogram(
    sample: SpectralSample,
    bins: int,
    range: Optional[tuple[float, float]] = None,
    gamma: Optional[float] = None,
) -> Histogram:
    """Equal-width, density-normalized histogram; out-of-range values are
    tallied as underflow/overflow (the last bin is closed on the right)."""
    if bins < 1:
        raise ConfigurationError(f"bins must be >= 1, got {bins}")
    lo, hi = range if range is not None else default_range(sample, gamma)
    if not lo < hi:
        raise ConfigurationError(f"histogram range must satisfy lo < hi, got ({lo}, {hi})")
    lam = np.asarray(sample.eigenvalues)
    counts, edges = np.histogram(lam, bins=bins, range=(lo, hi))
    under = int(np.count_nonzero(lam < lo))
    over = int(np.count_nonzero(lam > hi))
    return Histogram(edges=edges, counts=counts.astype(np.int64), n=len(lam), underflow=under, overflow=over)
