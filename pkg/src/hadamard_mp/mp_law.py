"""Marchenko-Pastur law of shape gamma: density, CDF, quantiles, moments,
the finite-n double-tree moment and the Stieltjes transform."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np
from scipy import integrate

from .errors import ConfigurationError, DomainError, NumericalError

MAX_MOMENT_ORDER = 30


@dataclass(frozen=True)
class MPLaw:
    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ConfigurationError(f"gamma must be positive, got {self.gamma}")

    @property
    def edge_low(self) -> float:
        return (1.0 - math.sqrt(self.gamma)) ** 2

    @property
    def edge_high(self) -> float:
        return (1.0 + math.sqrt(self.gamma)) ** 2

    @property
    def atom_mass(self) -> float:
        return max(0.0, 1.0 - 1.0 / self.gamma)

    @property
    def continuous_mass(self) -> float:
        return min(1.0, 1.0 / self.gamma)

    def density(self, x):
        return density(x, self)

    def cdf(self, x: float) -> float:
        return cdf(x, self)

    def cdf_array(self, x) -> np.ndarray:
        return cdf_closed_form(x, self)

    def quantile(self, q: float) -> float:
        return quantile(q, self)

    def moment(self, k: int) -> float:
        return mp_moment(k, self.gamma)


def density(x, law: MPLaw):
    """Continuous part of the MP law; 0 at the edges and outside ``(a, b)``.

    The atom at 0 (``gamma > 1``) is not included. Accepts scalars or arrays.
    """
    a, b = law.edge_low, law.edge_high
    xa = np.asarray(x, dtype=np.float64)
    inside = (xa > a) & (xa < b)
    safe = np.where(inside, xa, 0.5 * (a + b))
    val = np.sqrt((b - safe) * (safe - a)) / (2.0 * math.pi * law.gamma * safe)
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


def _theta_integrand(law: MPLaw, power: int = 0):
    # x = a + (b - a) sin^2(t): sqrt((b-x)(x-a)) dx = 2 (b-a)^2 sin^2 cos^2 dt
    a, b = law.edge_low, law.edge_high
    w = b - a
    c = 1.0 / (math.pi * law.gamma)

    def f(t):
        s2 = math.sin(t) ** 2
        c2 = 1.0 - s2
        x = a + w * s2
        return c * w * w * s2 * c2 * x ** (power - 1)

    return f


def _theta_of(x: float, law: MPLaw) -> float:
    a, b = law.edge_low, law.edge_high
    r = (x - a) / (b - a)
    return math.asin(math.sqrt(min(1.0, max(0.0, r))))


def _quad(f, lo, hi, what):
    val, err, info = integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=200, full_output=True)[:3]
    # absolute for O(1) integrals, relative for large moments
    if err > 1e-10 * max(1.0, abs(val)):
        raise NumericalError(
            f"quadrature for {what} did not reach 1e-10 relative (estimate {err:.3e}, "
            f"{info.get('neval')} evaluations)"
        )
    return val


def cdf(x: float, law: MPLaw) -> float:
    """``atom * 1{x >= 0} + integral of the density up to min(x, b)``.

    Adaptive quadrature in the variable ``theta`` with
    ``x = a + (b - a) sin^2 theta``, which removes both square-root edge
    singularities.
    """
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x}")
    atom = law.atom_mass if x >= 0 else 0.0
    if x <= law.edge_low:
        return atom
    if x >= law.edge_high:
        return 1.0
    cont = _quad(_theta_integrand(law), 0.0, _theta_of(x, law), "the MP CDF")
    return min(1.0, atom + cont)


def cdf_closed_form(x, law: MPLaw) -> np.ndarray:
    """Vectorized MP CDF from the antiderivative of ``sqrt((b-t)(t-a))/t``.

    With ``u = (2t - a - b)/(b - a)`` and ``v = ((a + b)t - 2ab)/(t(b - a))``
    an antiderivative is ``sqrt((b-t)(t-a)) + (a+b)/2 asin(u) - sqrt(ab) asin(v)``.
    Used where thousands of evaluations are needed; agrees with :func:`cdf`.
    """
    a, b = law.edge_low, law.edge_high
    g = law.gamma
    xa = np.asarray(x, dtype=np.float64)
    t = np.clip(xa, a, b)
    w = b - a
    # asin(u) + pi/2 = 2 atan2(sqrt(1+u), sqrt(1-u)); 1 +/- u and 1 +/- v are
    # simplified by hand so neither edge suffers cancellation
    ta = t - a
    tb = b - t
    half_u = 2.0 * np.arctan2(np.sqrt(ta), np.sqrt(tb))
    sab = math.sqrt(a * b)
    if sab > 0:
        half_v = 2.0 * np.arctan2(np.sqrt(b * ta), np.sqrt(a * tb))
    else:
        half_v = 0.0
    root = np.sqrt(ta * tb)
    integral = root + 0.5 * (a + b) * half_u - sab * half_v
    cont = integral / (2.0 * math.pi * g)
    out = np.where(xa >= 0, law.atom_mass, 0.0) + cont
    out = np.where(xa >= b, 1.0, np.clip(out, 0.0, 1.0))
    return out


def quantile(q: float, law: MPLaw, xtol: float = 1e-8) -> float:
    """Smallest ``x`` with ``cdf(x) >= q``, by bisection on ``[a, b]``."""
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie strictly inside (0, 1), got {q}")
    if q <= law.atom_mass:
        return 0.0
    lo, hi = law.edge_low, law.edge_high
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if cdf(mid, law) >= q:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def quadrature_moment(k: int, law: MPLaw) -> float:
    """``integral x^k dmu_MP`` by quadrature (the atom at 0 contributes nothing)."""
    if k == 0:
        return law.atom_mass + _quad(_theta_integrand(law), 0.0, math.pi / 2, "the MP mass")
    return _quad(_theta_integrand(law, k), 0.0, math.pi / 2, f"the MP moment {k}")


def _as_fraction(v) -> Fraction:
    if isinstance(v, Rational):
        return Fraction(v)
    return Fraction(float(v))


def mp_moment_exact(k: int, gamma) -> Fraction:
    """Exact ``sum_{s<k} gamma^s / (s+1) C(k-1, s) C(k, s)`` for rational ``gamma``."""
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    if k > MAX_MOMENT_ORDER:
        raise ConfigurationError(f"moment order {k} exceeds the supported maximum {MAX_MOMENT_ORDER}")
    g = _as_fraction(gamma)
    total = Fraction(0)
    for s in range(k):
        total += g**s * Fraction(math.comb(k - 1, s) * math.comb(k, s), s + 1)
    return total


def mp_moment(k: int, gamma: float) -> float:
    """Limiting moment ``m_k`` of MP(gamma); exact rational sum rounded once."""
    if not gamma > 0:
        raise ConfigurationError(f"gamma must be positive, got {gamma}")
    return float(mp_moment_exact(k, gamma))


@dataclass(frozen=True)
class MomentVector:
    """Moments ``m_1 .. m_kmax`` (``values[0]`` is ``m_1``)."""

    values: tuple

    @property
    def k_max(self) -> int:
        return len(self.values)

    def __getitem__(self, k: int) -> float:
        if not 1 <= k <= self.k_max:
            raise IndexError(k)
        return self.values[k - 1]


def mp_moment_vector(k_max: int, gamma: float) -> MomentVector:
    return MomentVector(tuple(mp_moment(k, gamma) for k in range(1, k_max + 1)))


def _falling(x: int, m: int) -> int:
    out = 1
    for i in range(m):
        out *= x - i
    return out


def finite_n_tree_moment(k: int, n: int, d: int, p: int, sigma_x=1, sigma_y=1, exact: bool = False):
    """Expected k-th moment carried by double-tree walks at finite ``(n, d, p)``.

    ``sum_s n^(s+1) d^(k-s) p^(k-s) / (n d^k p^k) * (sx sy)^(2k) / (s+1) C(k-1,s) C(k,s)``
    with ``x^(m)`` the falling factorial (zero once a factor hits zero).
    ``exact=True`` returns a :class:`~fractions.Fraction`.
    """
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    if min(n, d, p) < 1:
        raise ConfigurationError("dimensions must be positive")
    total = Fraction(0)
    for s in range(k):
        num = _falling(n, s + 1) * _falling(d, k - s) * _falling(p, k - s)
        if num == 0:
            continue
        total += Fraction(num * math.comb(k - 1, s) * math.comb(k, s), n * d**k * p**k * (s + 1))
    total *= (_as_fraction(sigma_x) * _as_fraction(sigma_y)) ** (2 * k)
    return total if exact else float(total)


def stieltjes(z: complex, gamma: float) -> complex:
    """``m(z) = integral dmu_MP(x) / (x - z)`` for ``Im z > 0``.

    ``m`` solves ``gamma z m^2 + (z - 1 + gamma) m + 1 = 0``; of the two roots
    ``(1 - gamma - z +/- sqrt((z - 1 - gamma)^2 - 4 gamma)) / (2 gamma z)``
    exactly one lies in the upper half-plane, and that one is returned.
    """
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"Im z must be positive, got {z}")
    if not gamma > 0:
        raise ConfigurationError(f"gamma must be positive, got {gamma}")
    r = cmath.sqrt((z - 1.0 - gamma) ** 2 - 4.0 * gamma)
    m1 = (1.0 - gamma - z + r) / (2.0 * gamma * z)
    m2 = (1.0 - gamma - z - r) / (2.0 * gamma * z)
    return m1 if m1.imag > m2.imag else m2
