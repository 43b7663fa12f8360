import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hadamard_mp.errors import ConfigurationError, DomainError
from hadamard_mp.mp_law import (
    MPLaw,
    cdf,
    cdf_closed_form,
    density,
    finite_n_tree_moment,
    mp_moment,
    mp_moment_exact,
    mp_moment_vector,
    quadrature_moment,
    quantile,
    stieltjes,
)

GAMMAS = (0.1, 0.25, 0.5, 1.0, 2.0, 4.0)
CATALAN = [1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796, 58786, 208012]
# median of MP(1), mpmath findroot on the 40-digit quadrature CDF
MP1_MEDIAN = 0.652775941633570369324144825548


def mp_cdf_reference(x, gamma):
    """Independent mpmath CDF at 30 digits."""
    mpmath.mp.dps = 30
    g = mpmath.mpf(gamma)
    a = (1 - mpmath.sqrt(g)) ** 2
    b = (1 + mpmath.sqrt(g)) ** 2
    atom = max(mpmath.mpf(0), 1 - 1 / g)
    if x < 0:
        return mpmath.mpf(0)
    if x <= a:
        return atom
    top = min(mpmath.mpf(x), b)
    f = lambda t: mpmath.sqrt((b - t) * (t - a)) / (2 * mpmath.pi * g * t)
    return atom + mpmath.quad(f, [a, top])


def test_density_examples():
    assert density(2.0, MPLaw(1.0)) == pytest.approx(1 / (2 * math.pi), abs=1e-15)
    assert density(1.0, MPLaw(0.25)) == pytest.approx(math.sqrt(1.25 * 0.75) / (2 * math.pi * 0.25), rel=1e-14)
    law = MPLaw(0.5)
    assert density(law.edge_low, law) == 0.0
    assert density(law.edge_high, law) == 0.0
    assert density(-1.0, law) == 0.0
    assert np.all(density(np.linspace(-1, 8, 50), law) >= 0)


@pytest.mark.parametrize("gamma", GAMMAS)
def test_total_mass(gamma):
    assert abs(quadrature_moment(0, MPLaw(gamma)) - 1.0) <= 1e-8


@pytest.mark.parametrize("gamma", GAMMAS)
def test_quadrature_moments_match_closed_form(gamma):
    law = MPLaw(gamma)
    for k in range(1, 9):
        m = mp_moment(k, gamma)
        assert abs(quadrature_moment(k, law) - m) <= 1e-6 * max(1.0, m)


def test_catalan():
    for k in range(1, 13):
        assert mp_moment_exact(k, 1) == CATALAN[k]
        assert mp_moment(k, 1.0) == CATALAN[k]


def test_moment_examples():
    assert mp_moment(1, 0.37) == 1.0
    assert mp_moment(2, 0.37) == pytest.approx(1.37, abs=1e-15)
    assert mp_moment_exact(3, Fraction(1, 2)) == 1 + 3 * Fraction(1, 2) + Fraction(1, 4)
    v = mp_moment_vector(4, 1.0)
    assert v.k_max == 4 and v[4] == 14
    with pytest.raises(ConfigurationError):
        mp_moment(0, 1.0)
    with pytest.raises(ConfigurationError):
        mp_moment(31, 1.0)
    with pytest.raises(ConfigurationError):
        mp_moment(2, 0.0)


@pytest.mark.parametrize("gamma", (0.25, 0.5, 1.0, 2.0))
def test_cdf_against_mpmath(gamma):
    law = MPLaw(gamma)
    xs = np.linspace(-0.5, law.edge_high + 0.5, 17)
    for x in xs:
        ref = float(mp_cdf_reference(float(x), gamma))
        assert cdf(float(x), law) == pytest.approx(ref, abs=1e-9)
        assert float(cdf_closed_form(float(x), law)) == pytest.approx(ref, abs=1e-12)


def test_cdf_atom():
    law = MPLaw(2.0)
    assert cdf(0.0, law) == pytest.approx(0.5, abs=1e-15)
    assert cdf(-1e-12, law) == 0.0
    assert quantile(0.3, law) == 0.0
    assert cdf(law.edge_high, law) == pytest.approx(1.0, abs=1e-10)


def test_median_gamma_one():
    assert quantile(0.5, MPLaw(1.0)) == pytest.approx(MP1_MEDIAN, abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(gamma=st.sampled_from(GAMMAS), q=st.floats(0.001, 0.999))
def test_quantile_inverts_cdf(gamma, q):
    law = MPLaw(gamma)
    x = quantile(q, law)
    if q <= law.atom_mass:
        assert x == 0.0
    else:
        assert cdf(x, law) == pytest.approx(q, abs=1e-6)


def test_quantile_domain():
    with pytest.raises(DomainError):
        quantile(0.0, MPLaw(1.0))
    with pytest.raises(DomainError):
        quantile(1.0, MPLaw(1.0))


@settings(max_examples=60, deadline=None)
@given(
    gamma=st.floats(0.05, 6.0),
    re=st.floats(-3.0, 12.0),
    im=st.floats(1e-3, 10.0),
)
def test_stieltjes_herglotz(gamma, re, im):
    m = stieltjes(complex(re, im), gamma)
    assert m.imag > 0
    # satisfies the quadratic
    z = complex(re, im)
    assert abs(gamma * z * m * m + (z - 1 + gamma) * m + 1) <= 1e-9 * max(1.0, abs(z * m * m))


def test_stieltjes_recovers_density():
    for gamma in (0.25, 0.5, 1.0, 2.0):
        law = MPLaw(gamma)
        for x in np.linspace(law.edge_low, law.edge_high, 9)[1:-1]:
            est = stieltjes(complex(x, 1e-4), gamma).imag / math.pi
            assert est == pytest.approx(density(x, law), abs=5e-3)


def test_stieltjes_asymptotic():
    for gamma in (0.5, 3.0):
        z = complex(0.0, 1e6)
        assert -z * stieltjes(z, gamma) == pytest.approx(1.0, abs=1e-5)


@pytest.mark.parametrize("gamma", (0.5, 2.0))
def test_stieltjes_matches_quadrature(gamma):
    mpmath.mp.dps = 30
    g = mpmath.mpf(gamma)
    a = (1 - mpmath.sqrt(g)) ** 2
    b = (1 + mpmath.sqrt(g)) ** 2
    atom = max(mpmath.mpf(0), 1 - 1 / g)
    z = mpmath.mpc(1.3, 0.7)
    f = lambda t: mpmath.sqrt((b - t) * (t - a)) / (2 * mpmath.pi * g * t) / (t - z)
    ref = complex(mpmath.quad(f, [a, b]) + atom / (0 - z))
    assert abs(stieltjes(complex(1.3, 0.7), gamma) - ref) <= 1e-10


def test_stieltjes_domain():
    with pytest.raises(DomainError):
        stieltjes(1.0, 1.0)
    with pytest.raises(DomainError):
        stieltjes(complex(1.0, -1.0), 1.0)


def test_finite_tree_moment_low_orders():
    for n, d, p in ((1, 1, 1), (5, 3, 4), (100, 7, 9), (20000, 141, 282)):
        assert finite_n_tree_moment(1, n, d, p, exact=True) == 1
        expected = Fraction(d - 1, d) * Fraction(p - 1, p) + Fraction(n - 1, d * p)
        assert finite_n_tree_moment(2, n, d, p, exact=True) == expected
    assert finite_n_tree_moment(2, 4, 1, 1, exact=True) == 3
    assert finite_n_tree_moment(1, 3, 2, 2, sigma_x=2, sigma_y=Fraction(1, 2), exact=True) == 1


def test_finite_tree_moment_converges():
    gamma, a = 0.5, 2.0
    for k in (2, 3, 5):
        errs = []
        for d in (10, 40, 160, 640):
            p = int(a * d)
            n = int(gamma * d * p)
            errs.append(abs(finite_n_tree_moment(k, n, d, p) - mp_moment(k, n / (d * p))))
        assert all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))
        assert errs[-1] < 0.02 * mp_moment(k, gamma)
