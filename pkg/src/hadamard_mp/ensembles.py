"""Random matrix ensembles: i.i.d. entry catalog, the Hadamard product of two
sample covariance matrices, truncation/centering and dimension schedules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, stats

from .errors import ConfigurationError, DimensionError
from .seeding import derive_trial_seed

FAMILIES = ("gaussian", "rademacher", "uniform", "student_t")

#: Default tile edge for the blocked Gram/Hadamard kernel.
DEFAULT_BLOCK_SIZE = 64


@dataclass(frozen=True)
class EntryDistribution:
    """Centered, symmetric entry law with standard deviation ``scale``.

    Student-t draws are rescaled by ``sqrt((nu - 2) / nu)`` so that ``scale``
    is the true standard deviation. ``nu <= 4`` (infinite fourth moment) is
    rejected unless ``allow_infinite_fourth_moment`` is set.
    """

    family: str = "gaussian"
    scale: float = 1.0
    nu: Optional[float] = None
    allow_infinite_fourth_moment: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(
                f"unknown family {self.family!r}; expected one of {FAMILIES}"
            )
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ConfigurationError(f"scale must be positive and finite, got {self.scale}")
        if self.family == "student_t":
            if self.nu is None or not self.nu > 0:
                raise ConfigurationError(f"student_t needs nu > 0, got {self.nu}")
            if self.nu <= 2:
                raise ConfigurationError(
                    f"student_t with nu={self.nu} has infinite variance and cannot be standardized"
                )
            if self.nu <= 4 and not self.allow_infinite_fourth_moment:
                raise ConfigurationError(
                    f"student_t with nu={self.nu} has an infinite fourth moment; "
                    "pass allow_infinite_fourth_moment=True to explore it anyway"
                )
        elif self.nu is not None:
            raise ConfigurationError(f"nu only applies to student_t, not {self.family}")

    @property
    def variance(self) -> float:
        return self.scale**2

    @property
    def finite_fourth_moment(self) -> bool:
        return self.family != "student_t" or self.nu > 4

    @property
    def essential_sup(self) -> float:
        """Largest attainable ``|X|`` (``inf`` for unbounded families)."""
        if self.family == "rademacher":
            return self.scale
        if self.family == "uniform":
            return math.sqrt(3.0) * self.scale
        return math.inf

    def describe(self) -> str:
        if self.family == "student_t":
            return f"student_t(nu={self.nu:g}, scale={self.scale:g})"
        return f"{self.family}(scale={self.scale:g})"

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        s = self.scale
        if self.family == "gaussian":
            return rng.standard_normal(shape) * s
        if self.family == "rademacher":
            return (2.0 * rng.integers(0, 2, size=shape) - 1.0) * s
        if self.family == "uniform":
            h = math.sqrt(3.0) * s
            return rng.uniform(-h, h, size=shape)
        return rng.standard_t(self.nu, size=shape) * (s * math.sqrt((self.nu - 2.0) / self.nu))

    def _continuous_pdf(self, x: float) -> float:
        if self.family == "gaussian":
            return stats.norm.pdf(x, scale=self.scale)
        if self.family == "uniform":
            h = math.sqrt(3.0) * self.scale
            return 1.0 / (2.0 * h) if abs(x) <= h else 0.0
        t_scale = self.scale * math.sqrt((self.nu - 2.0) / self.nu)
        return stats.t.pdf(x, self.nu, scale=t_scale)

    def truncated_moment(self, c: float, power: int) -> float:
        """Population ``E[X**power * 1{|X| <= c}]`` (quadrature, abs. tol 1e-10)."""
        if not c > 0:
            raise ConfigurationError(f"truncation level must be positive, got {c}")
        if self.family == "rademacher":
            if c < self.scale:
                return 0.0
            return 0.5 * (self.scale**power + (-self.scale) ** power)
        lim = min(c, self.essential_sup)
        if power % 2:
            return 0.0
        # even integrand: 2 * int_0^lim, split so wide ranges keep the bulk resolved
        knots = [0.0] + [k * self.scale for k in (4.0, 32.0, 256.0) if k * self.scale < lim] + [lim]
        total = 0.0
        for lo, hi in zip(knots[:-1], knots[1:]):
            val, _err = integrate.quad(
                lambda x: x**power * self._continuous_pdf(x),
                lo,
                hi,
                epsabs=1e-13,
                epsrel=1e-12,
                limit=200,
            )
            total += val
        return 2.0 * total

    def truncated_mean(self, c: float) -> float:
        """``E[X * 1{|X| <= c}]``; zero for every family in the catalog by symmetry."""
        if not c > 0:
            raise ConfigurationError(f"truncation level must be positive, got {c}")
        return 0.0


@dataclass(frozen=True)
class EnsembleSpec:
    dist_x: EntryDistribution = field(default_factory=EntryDistribution)
    dist_y: EntryDistribution = field(default_factory=EntryDistribution)
    normalize: bool = True
    truncation_c: Optional[float] = None

    def __post_init__(self):
        if self.truncation_c is not None and not self.truncation_c > 0:
            raise ConfigurationError(f"truncation_c must be positive, got {self.truncation_c}")

    @property
    def normalization(self) -> float:
        """Divisor applied to ``M`` (``sigma_x**2 * sigma_y**2`` or 1)."""
        return self.dist_x.variance * self.dist_y.variance if self.normalize else 1.0


@dataclass(frozen=True)
class DimensionTriple:
    n: int
    d: int
    p: int

    def __post_init__(self):
        for name in ("n", "d", "p"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise DimensionError(f"{name} must be a positive integer, got {v!r}")

    @property
    def realized_gamma(self) -> float:
        return self.n / (self.d * self.p)

    @property
    def realized_a(self) -> float:
        return self.p / self.d

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "p": self.p,
            "realized_gamma": self.realized_gamma,
            "realized_a": self.realized_a,
        }


@dataclass(frozen=True)
class DimensionSchedule:
    gamma: float
    a: float
    triples: tuple

    def __iter__(self):
        return iter(self.triples)

    def __len__(self):
        return len(self.triples)

    def __getitem__(self, i):
        return self.triples[i]


@dataclass
class RandomMatrix:
    entries: np.ndarray
    generator_seed: int

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


@dataclass
class SymmetricMatrix:
    """Dense symmetric matrix stored in full; symmetry is exact by construction."""

    entries: np.ndarray

    @property
    def order(self) -> int:
        return self.entries.shape[0]


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def sample_matrix(dist: EntryDistribution, rows: int, cols: int, seed: int) -> RandomMatrix:
    """Draw a ``rows x cols`` matrix of i.i.d. entries from ``dist``.

    The stream is a Philox (counter-based) generator keyed by ``seed``, so
    output depends only on the arguments.
    """
    if rows < 1 or cols < 1:
        raise DimensionError(f"matrix shape must be positive, got {rows}x{cols}")
    rng = np.random.Generator(np.random.Philox(seed))
    entries = dist.sample(rng, (rows, cols))
    return RandomMatrix(np.ascontiguousarray(entries, dtype=np.float64), seed)


def hadamard_covariance(
    X: RandomMatrix,
    Y: RandomMatrix,
    spec: EnsembleSpec,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> SymmetricMatrix:
    """``M = (X X^T / d) * (Y Y^T / p)`` (entrywise), optionally normalized.

    Only tiles on or above the block diagonal are computed; each is mirrored
    into the lower triangle, and diagonal tiles copy their strict upper
    triangle down, so ``M == M.T`` holds bitwise.
    """
    x, y = X.entries, Y.entries
    if x.shape[0] != y.shape[0]:
        raise DimensionError(f"row counts differ: X has {x.shape[0]}, Y has {y.shape[0]}")
    if block_size < 1:
        raise ConfigurationError("block_size must be positive")
    n, d = x.shape
    p = y.shape[1]
    if spec.normalize:
        # standardize first: s / s == 1 exactly, so Rademacher rows become
        # +-1 and their Gram diagonals are exact integers
        x = x / spec.dist_x.scale
        y = y / spec.dist_y.scale
    # divide (not multiply by a reciprocal) so integer Gram products stay exact
    denom = d * p
    out = np.empty((n, n), dtype=np.float64)
    starts = range(0, n, block_size)
    for i0 in starts:
        i1 = min(i0 + block_size, n)
        xi, yi = x[i0:i1], y[i0:i1]
        for j0 in range(i0, n, block_size):
            j1 = min(j0 + block_size, n)
            tile = (xi @ x[j0:j1].T) * (yi @ y[j0:j1].T)
            tile /= denom
            if j0 == i0:
                iu = np.triu_indices(i1 - i0, 1)
                tile[(iu[1], iu[0])] = tile[iu]
                out[i0:i1, i0:i1] = tile
            else:
                out[i0:i1, j0:j1] = tile
                out[j0:j1, i0:i1] = tile.T
    return SymmetricMatrix(out)


def truncate_center(X: RandomMatrix, c: float, dist: EntryDistribution) -> RandomMatrix:
    """Entrywise ``x * 1{|x| <= c} - E[X * 1{|X| <= c}]`` with the population mean."""
    if not c > 0:
        raise ConfigurationError(f"truncation level must be positive, got {c}")
    mean = dist.truncated_mean(c)
    e = X.entries
    out = np.where(np.abs(e) <= c, e, 0.0)
    if mean != 0.0:
        out = out - mean
    return RandomMatrix(out, X.generator_seed)


def dimension_schedule(gamma: float, a: float, n_values: Sequence[int]) -> DimensionSchedule:
    """Integer dims for each ``n``: ``d = round(sqrt(n / (gamma a)))``, ``p = round(a d)``.

    Rounding is half-up. Downstream code must use the realized ratios of the
    returned triples, not ``gamma`` and ``a``.
    """
    if not (gamma > 0 and a > 0):
        raise ConfigurationError(f"gamma and a must be positive, got gamma={gamma}, a={a}")
    if len(n_values) == 0:
        raise ConfigurationError("n_values must be nonempty")
    triples = []
    for n in n_values:
        if int(n) != n or n < 4:
            raise ConfigurationError(f"every n must be an integer >= 4, got {n}")
        n = int(n)
        d = _round_half_up(math.sqrt(n / (gamma * a)))
        p = _round_half_up(a * d)
        if d < 1 or p < 1:
            raise ConfigurationError(
                f"n={n}, gamma={gamma}, a={a} rounds to d={d}, p={p}; "
                "increase n or decrease gamma*a so that n >= gamma*a/4 and a*d >= 1/2"
            )
        triples.append(DimensionTriple(n, d, p))
    return DimensionSchedule(gamma, a, tuple(triples))


def realize(
    spec: EnsembleSpec, dims: DimensionTriple, master_seed: int, trial_index: int
) -> tuple[RandomMatrix, RandomMatrix]:
    """Sample the (X, Y) pair of one trial from independent derived streams."""
    X = sample_matrix(spec.dist_x, dims.n, dims.d, derive_trial_seed(master_seed, trial_index, "X"))
    Y = sample_matrix(spec.dist_y, dims.n, dims.p, derive_trial_seed(master_seed, trial_index, "Y"))
    return X, Y
