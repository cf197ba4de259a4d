import numpy as np
import pytest

from heavenly_star.background import flat_background
from heavenly_star.contour import Contour, ContourSeries, broadcast
from heavenly_star.errors import GuardBand, InterpolationOverflow, LiouvilleViolation, NotInGroup
from heavenly_star.gauge import sdym_residual
from heavenly_star.hilbert import (
    birkhoff_factorize,
    cauchy_transform,
    datum_from_spectral,
    extract_connection,
    extract_theta,
    gauge_normalize,
    hilbert_solve,
    plemelj_boundary,
    plemelj_limits,
    psi_at_origin,
)
from heavenly_star.ring import Poly, RingElement
from heavenly_star.spectral import SpectralSeries, spectral_from_spec
from heavenly_star.star import GradedSeries, series_exp

pytestmark = pytest.mark.filterwarnings("ignore::heavenly_star.errors.DegradedPrecision")
FLAT = flat_background()
C64, C256 = Contour(64), Contour(256)


def scalar_samples(values, points):
    """A t^0 series with a single array-valued constant coefficient."""
    c = RingElement(Poly({(0,) * 6: np.asarray(values, dtype=complex)}))
    return ContourSeries(GradedSeries({(0, 0): c}, 0, 0), points)


def value(series):
    s = series.get(0, 0)
    return 0 if s is None or s.is_zero else s.num.terms[(0,) * 6]


def spec(text, t_max=3, k_max=6):
    return spectral_from_spec(text, FLAT, t_max, k_max).map(lambda s: s.to_float())


def nodes_series(series, contour):
    return broadcast(series.evaluate(contour.nodes), contour.n)


@pytest.mark.parametrize("lam, expected", [(0.3 + 0.2j, 1.0), (2.0 - 1.0j, 0.0)])
def test_cauchy_constant(lam, expected):
    f = scalar_samples(np.ones(64), C64.nodes)
    assert abs(value(cauchy_transform(f, lam, C64)) - expected) < 1e-14


def test_cauchy_monomials():
    tau = C64.nodes
    lam = 0.4 - 0.3j
    assert abs(value(cauchy_transform(scalar_samples(tau, tau), lam, C64)) - lam) < 1e-14
    assert abs(value(cauchy_transform(scalar_samples(1 / tau, tau), lam, C64))) < 1e-14
    assert abs(value(cauchy_transform(scalar_samples(1 / tau, tau), 3.0, C64)) + 1 / 3.0) < 1e-14


def test_guard_band():
    f = scalar_samples(np.ones(64), C64.nodes)
    with pytest.raises(GuardBand):
        cauchy_transform(f, 1.0005, C64)


def test_plemelj_constant():
    pv = plemelj_boundary(scalar_samples(np.ones(64), C64.nodes), C64)
    assert np.max(np.abs(value(pv.series) - 0.5)) < 1e-13


@pytest.mark.parametrize("j", [1, 3, -1, -5])
def test_plemelj_monomial_split(j):
    f = scalar_samples(C256.nodes ** j, C256.nodes)
    plus, minus = plemelj_limits(f, C256)
    xi = C256.targets ** j
    if j >= 0:
        assert np.max(np.abs(value(plus.series) - xi)) < 1e-10
        assert np.max(np.abs(value(minus.series))) < 1e-10
    else:
        assert np.max(np.abs(value(plus.series))) < 1e-10
        assert np.max(np.abs(value(minus.series) + xi)) < 1e-10


def test_interpolation_overflow():
    rng = np.random.default_rng(1)
    with pytest.raises(InterpolationOverflow):
        plemelj_boundary(scalar_samples(rng.normal(size=64), C64.nodes), C64)


def test_hilbert_trivial():
    H = datum_from_spectral(spec("0"), C64)
    sol = hilbert_solve(H, SpectralSeries.one(H.series.like({}).to_float()), C64)
    assert sol.psi.powers() == [0] and sol.psi_under.powers() == [0]
    assert sol.diagnostics["sweeps"] == 4 and sol.diagnostics["accompanying_trivial"]


def test_hilbert_interior_datum():
    H = datum_from_spectral(spec("-I*hbar^-1*t*q*lam"), C64)
    sol = hilbert_solve(H, SpectralSeries.one(H.series.like({}).to_float()), C64)
    one = broadcast(GradedSeries.one(3, 6).to_float(), 64)
    assert (sol.phi_minus.series - one).norm() < 1e-12
    oracle = broadcast(series_exp(spec("-I*hbar^-1*t*q*lam").evaluate(C64.targets)), 64)
    assert (sol.phi_plus.series - oracle).norm() < 1e-12


def test_birkhoff_abelian_split():
    H = datum_from_spectral(spec("-I*hbar^-1*t*q*(lam + 1/lam)"), C256)
    sol = birkhoff_factorize(H, C256)
    psi = nodes_series(sol.psi, C256)
    psi_under = nodes_series(sol.psi_under, C256)
    assert (psi - broadcast(series_exp(spec("-I*hbar^-1*t*q*lam").evaluate(C256.nodes)), 256)).norm() < 1e-10
    assert (psi_under - broadcast(series_exp(spec("I*hbar^-1*t*q/lam").evaluate(C256.nodes)), 256)).norm() < 1e-10


def test_birkhoff_noncommuting():
    H = datum_from_spectral(spec("-I*hbar^-1*t*(q*lam + p/lam)"), C256)
    sol = birkhoff_factorize(H, C256)
    assert sol.diagnostics["factor_residual"] <= 1e-8
    assert sol.diagnostics["leakage"] <= 1e-8
    assert sol.psi.min_power() >= 0 and sol.psi_under.max_power() <= 0


def test_not_in_group():
    H = datum_from_spectral(spec("2 + t*q*lam"), C64, exponentiate=False)
    with pytest.raises(NotInGroup):
        birkhoff_factorize(H, C64)


def test_unit_datum_gives_zero_fields():
    sol = birkhoff_factorize(datum_from_spectral(spec("0"), C64), C64)
    A, report = extract_connection(sol, FLAT)
    assert all(A[c].is_zero() for c in ("w", "z", "wt", "zt"))
    tf, _ = extract_theta(sol, FLAT)
    assert tf.theta.is_zero()


def test_gauge_normalization_idempotent():
    sol = birkhoff_factorize(datum_from_spectral(spec("-I*hbar^-1*t*(q*Pw + p*Pz)/lam"), C64), C64)
    once = gauge_normalize(sol.phi_plus.series, psi_at_origin(sol.phi_plus.series))
    twice = gauge_normalize(once, psi_at_origin(once))
    assert (once - twice).norm() < 1e-12


def test_connection_from_twistor_datum():
    sol = birkhoff_factorize(datum_from_spectral(spec("-I*hbar^-1*t*(q*Pw^2/lam + p*Pz)"), C64), C64)
    A, report = extract_connection(sol, FLAT)
    assert report["liouville_leakage"] <= 1e-8
    assert max(r.norm() for r in sdym_residual(A, FLAT)) <= 1e-8


def test_liouville_violation():
    sol = birkhoff_factorize(datum_from_spectral(spec("-I*hbar^-1*t*q*w*(lam^2 + lam^-2)"), C64), C64)
    with pytest.raises(LiouvilleViolation) as info:
        extract_connection(sol, FLAT)
    assert info.value.power == 2
