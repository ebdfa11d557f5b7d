"""Distribution catalog: construction validation, closed moments vs the
Levy route, samplers vs moments, convolution powers, cdfs."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from scipy.special import gammainc

from levy_stein import (BGD, CGMY, GTSD, VGD, AtomicJumps, CompoundPoisson,
                        Gamma, GammaJumps, InverseGaussian, Laplace, Poisson,
                        QuadratureConfig, TwoSidedExp, ValidationError,
                        convert_drift, make_spec, mean_levy, vgd_from_alt,
                        vgd_to_alt)
from levy_stein.dist_catalog import VGDAltParams

QCFG = QuadratureConfig()

ALL_SPECS = [
    Poisson(2.0),
    CompoundPoisson(1.5, AtomicJumps(((1.0, 0.4), (2.5, 0.6)))),
    CompoundPoisson(2.0, GammaJumps(2.0, 1.5)),
    Gamma(2.0, 1.5),
    InverseGaussian(1.5, 2.0),
    Laplace(0.3, 0.8),
    TwoSidedExp(2.0, 3.0),
    BGD(2.0, 3.0, 1.0, 4.0),
    VGD(0.5, 2.0, 3.0, 4.0),
    CGMY(1.0, 0.5, 2.0, 3.0),
    CGMY(1.0, 0.0, 2.0, 3.0),
    GTSD(0.7, 0.5, 1.0, 2.0, 0.5, 3.0),
]

IDS = [f"{s.family}-{i}" for i, s in enumerate(ALL_SPECS)]


# -- construction validation -------------------------------------------------


@pytest.mark.parametrize("family,params,fragment", [
    ("nope", {}, "unknown family"),
    ("gamma", {"a": 2.0}, "missing"),
    ("gamma", {"a": 2.0, "b": 1.0, "c": 3.0}, "unexpected"),
    ("gamma", {"a": -1.0, "b": 1.0}, ""),
    ("cgmy", {"alpha": 1.0, "beta": 1.2, "lam_pos": 2.0, "lam_neg": 3.0},
     "beta"),
    ("cgmy", {"alpha": 1.0, "beta": -0.1, "lam_pos": 2.0, "lam_neg": 3.0},
     "beta"),
    ("poisson", {"lam": -2.0}, ""),
    ("vgd", {"mu0": 0.0, "alpha": 2.0, "lam_pos": -3.0, "lam_neg": 4.0}, ""),
    ("compound_poisson", {"rate": 1.0, "jumps": {"kind": "bogus"}}, "jump"),
    ("compound_poisson", {"rate": 1.0}, "jumps"),
    ("laplace", {"mu0": 0.0, "delta": "x"}, "numeric"),
])
def test_make_spec_rejects(family, params, fragment):
    with pytest.raises(ValidationError) as exc:
        make_spec(family, params)
    assert fragment.lower() in str(exc.value).lower()


def test_make_spec_roundtrip():
    spec = make_spec("gamma", {"a": 2, "b": 1})
    assert spec == Gamma(2.0, 1.0)
    spec = make_spec("compound_poisson",
                     {"rate": 1.5,
                      "jumps": {"kind": "atoms",
                                "atoms": [[1.0, 0.4], [2.5, 0.6]]}})
    assert spec.jumps == AtomicJumps(((1.0, 0.4), (2.5, 0.6)))


# -- moments: closed vs Levy-representation route ----------------------------


@pytest.mark.parametrize("spec", ALL_SPECS, ids=IDS)
def test_mean_closed_vs_levy_route(spec):
    assert mean_levy(spec, QCFG) == pytest.approx(spec.mean(QCFG),
                                                  rel=1e-8, abs=1e-10)


@pytest.mark.parametrize("spec", ALL_SPECS, ids=IDS)
def test_variance_is_second_levy_moment(spec):
    want = spec.measure.moment(2, QCFG, method="quad")
    assert spec.variance(QCFG) == pytest.approx(want, rel=1e-8)


def test_gamma_closed_moments():
    g = Gamma(2.0, 1.5)
    assert g.mean(QCFG) == pytest.approx(2.0 / 1.5, rel=1e-14)
    assert g.variance(QCFG) == pytest.approx(2.0 / 1.5**2, rel=1e-14)


# -- samplers vs moments ------------------------------------------------------


@pytest.mark.parametrize("spec", ALL_SPECS, ids=IDS)
def test_sampler_matches_moments(spec):
    rng = np.random.default_rng(99)
    n = 200_000
    x = spec.sample(rng, n)
    assert x.shape == (n,)
    mu, var = spec.mean(QCFG), spec.variance(QCFG)
    se_mean = math.sqrt(var / n)
    assert abs(np.mean(x) - mu) < 5 * se_mean, f"{spec.family} mean off"
    # crude SE for the sample variance via the fourth central moment
    c4 = np.mean((x - mu) ** 4)
    se_var = math.sqrt(max(c4 - var**2, 0.0) / n)
    assert abs(np.var(x) - var) < 5 * se_var + 1e-9, f"{spec.family} var off"


@pytest.mark.parametrize("spec", ALL_SPECS, ids=IDS)
def test_sample_conv_fractional_power(spec):
    """A draw of X^{*s} has mean s*mu and variance s*var."""
    rng = np.random.default_rng(7)
    n = 100_000
    s = np.full(n, 0.35)
    x = spec.sample_conv(rng, s)
    mu, var = spec.mean(QCFG), spec.variance(QCFG)
    assert abs(np.mean(x) - 0.35 * mu) < 5 * math.sqrt(0.35 * var / n) + 1e-9
    c4 = np.mean((x - 0.35 * mu) ** 4)
    se_var = math.sqrt(max(c4 - (0.35 * var) ** 2, 0.0) / n)
    assert abs(np.var(x) - 0.35 * var) < 5 * se_var + 1e-9


# -- convolution powers via the cf --------------------------------------------


TGRID = np.linspace(-3.0, 3.0, 1201)


def _log_cf(spec, t):
    """Continuous branch of log cf, anchored at log cf(0) = 0.

    A plain f**s uses the principal branch and breaks once arg(cf) winds
    past pi (it does for inverse Gaussian already at |t| ~ 3), so unwrap
    the phase along the grid instead.
    """
    f = spec.cf(t)
    arg = np.unwrap(np.angle(f))
    arg = arg - arg[np.argmin(np.abs(t))]
    return np.log(np.abs(f)) + 1j * arg


@pytest.mark.parametrize("spec", ALL_SPECS, ids=IDS)
@pytest.mark.parametrize("s", [0.3, 0.7])
def test_conv_power_cf_law(spec, s):
    """phi_s = exp(s log phi) for the continuous log branch, plus the
    branch-free product form phi_s * phi_{1-s} = phi."""
    conv = spec.conv_power(s)
    fs = conv.cf(TGRID)
    assert np.max(np.abs(fs - np.exp(s * _log_cf(spec, TGRID)))) < 1e-10
    f = spec.cf(TGRID)
    assert np.max(np.abs(fs * spec.conv_power(1.0 - s).cf(TGRID) - f)) < 1e-10


@pytest.mark.parametrize("spec", ALL_SPECS, ids=IDS)
def test_conv_power_semigroup(spec):
    got = spec.conv_power(0.6).conv_power(0.5).cf(TGRID)
    assert np.max(np.abs(got - np.exp(0.3 * _log_cf(spec, TGRID)))) < 1e-10


def test_conv_power_rejects_outside_unit_interval():
    from levy_stein import InvalidParams
    with pytest.raises(InvalidParams):
        Gamma(2.0, 1.5).conv_power(2.0)
    with pytest.raises(InvalidParams):
        Gamma(2.0, 1.5).conv_power(-0.1)


def test_conv_power_preserves_family():
    assert isinstance(Gamma(2.0, 1.5).conv_power(0.5), Gamma)
    assert isinstance(Laplace(0.1, 1.0).conv_power(0.5), VGD)
    assert isinstance(TwoSidedExp(2.0, 3.0).conv_power(0.5), BGD)


# -- cdfs ----------------------------------------------------------------------


def test_gamma_cdf_closed():
    F = Gamma(2.0, 1.5).cdf_fn(QCFG)
    x = np.linspace(0.01, 8.0, 40)
    assert np.max(np.abs(F(x) - gammainc(2.0, 1.5 * x))) < 1e-12


def test_poisson_cdf_steps():
    F = Poisson(2.0).cdf_fn(QCFG)
    x = np.array([-0.5, 0.0, 0.7, 1.0, 3.2])
    want = stats.poisson(2.0).cdf(np.floor(x))
    assert np.max(np.abs(F(x) - want)) < 1e-12


def test_two_sided_exp_cdf_closed():
    a, b = 2.0, 3.0
    F = TwoSidedExp(a, b).cdf_fn(QCFG)
    x = np.array([-1.5, -0.2, 0.0, 0.4, 2.0])
    want = np.where(x >= 0,
                    1.0 - (b / (a + b)) * np.exp(-a * x),
                    (a / (a + b)) * np.exp(b * x))
    assert np.max(np.abs(F(x) - want)) < 1e-12


def test_atomic_cpd_cdf_enumeration():
    # jumps at 1 and 2.5; P(X <= x) by direct lattice enumeration
    spec = CompoundPoisson(1.5, AtomicJumps(((1.0, 0.4), (2.5, 0.6))))
    F = spec.cdf_fn(QCFG)
    # brute force over Poisson counts and jump compositions
    want = 0.0
    x0 = 3.6
    for n in range(0, 40):
        pn = stats.poisson(1.5).pmf(n)
        if pn < 1e-14:
            continue
        for j in range(n + 1):  # j jumps of size 1, n-j of size 2.5
            tot = j * 1.0 + (n - j) * 2.5
            if tot <= x0:
                want += pn * math.comb(n, j) * 0.4**j * 0.6 ** (n - j)
    assert F(np.array([x0]))[0] == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("spec", [
    BGD(2.0, 3.0, 1.0, 4.0),
    VGD(0.5, 2.0, 3.0, 4.0),
    CGMY(1.0, 0.5, 2.0, 3.0),
    InverseGaussian(1.5, 2.0),
    CompoundPoisson(2.0, GammaJumps(2.0, 1.5)),
    GTSD(0.7, 0.5, 1.0, 2.0, 0.5, 3.0),
], ids=lambda s: s.family)
def test_cdf_vs_empirical(spec):
    rng = np.random.default_rng(11)
    n = 100_000
    x = np.sort(spec.sample(rng, n))
    F = spec.cdf_fn(QCFG)
    # atom-aware KS: at each distinct value v compare F(v) with the
    # fraction <= v and the left limit F(v-) with the fraction < v
    vals, counts = np.unique(x, return_counts=True)
    cum_hi = np.cumsum(counts) / n
    cum_lo = cum_hi - counts / n
    f_hi = F(vals)
    f_lo = F(vals - 1e-9 * np.maximum(np.abs(vals), 1.0))
    ks = max(np.max(np.abs(f_hi - cum_hi)), np.max(np.abs(f_lo - cum_lo)))
    # KS_0.999 ~ 1.95/sqrt(n); tabulated cdfs get some slack on top
    assert ks < 0.02, f"{spec.family}: KS {ks:.4f}"


def test_cdf_monotone_and_limits():
    for spec in (CGMY(1.0, 0.5, 2.0, 3.0), VGD(0.5, 2.0, 3.0, 4.0)):
        F = spec.cdf_fn(QCFG)
        x = np.linspace(-15, 15, 301)
        fx = F(x)
        assert np.all(np.diff(fx) >= -1e-12)
        assert fx[0] < 1e-3 and fx[-1] > 1 - 1e-3
        assert np.all((fx >= 0) & (fx <= 1))


# -- parametrization maps ------------------------------------------------------


@given(sigma2=st.floats(0.1, 5.0), r=st.floats(0.1, 5.0),
       theta=st.floats(-2.0, 2.0), mu0=st.floats(-1.0, 1.0))
@settings(max_examples=50, deadline=None)
def test_vgd_alt_roundtrip(sigma2, r, theta, mu0):
    alt = VGDAltParams(mu0=mu0, sigma2=sigma2, r=r, theta=theta)
    back = vgd_to_alt(vgd_from_alt(alt))
    assert back.sigma2 == pytest.approx(sigma2, rel=1e-9)
    assert back.r == pytest.approx(r, rel=1e-9)
    assert back.theta == pytest.approx(theta, rel=1e-9, abs=1e-12)
    assert back.mu0 == pytest.approx(mu0, rel=1e-9, abs=1e-12)


def test_convert_drift_roundtrip():
    spec = GTSD(0.7, 0.5, 1.0, 2.0, 0.5, 3.0)
    mu_unc = convert_drift(spec, to="uncompensated")
    mu_comp = convert_drift(spec, to="compensated")
    assert mu_comp == pytest.approx(spec.mean(QCFG), rel=1e-10)
    # uncompensated drift + jump mean = mean
    jump_mean = spec.measure.moment(1, QCFG)
    assert mu_unc + jump_mean == pytest.approx(spec.mean(QCFG), rel=1e-9)


def test_esscher_kappa_max():
    assert Gamma(2.0, 1.5).esscher_kappa_max() == pytest.approx(1.5)
    assert BGD(2.0, 3.0, 1.0, 4.0).esscher_kappa_max() == pytest.approx(3.0)
    assert math.isinf(Poisson(2.0).esscher_kappa_max())
