import pytest
from hypothesis import given

from heavenly_star.background import COORDS, flat_background
from heavenly_star.errors import NotInAlgebraQ, NotInGroup
from heavenly_star.gauge import (
    ConnectionData,
    covariant_curl,
    curvature,
    gauge_transform,
    pure_gauge,
    sdym_residual,
    yang_residual,
)
from heavenly_star.star import GradedSeries, adjoint_action, series_exp
from strategies import series

pytestmark = pytest.mark.filterwarnings("ignore::heavenly_star.errors.DegradedPrecision")
S = GradedSeries.from_expr_terms
FLAT = flat_background()


def conn(**parts):
    t = parts.pop("t_max", 3)
    return ConnectionData({c: S(parts.get(c, []), t, 4) for c in COORDS})


def test_zero_connection():
    A = ConnectionData.zero(GradedSeries.zero(3, 4))
    assert curvature(A).is_zero()
    assert all(r.is_zero() for r in sdym_residual(A, FLAT))


def test_connection_must_be_in_Q():
    with pytest.raises(NotInAlgebraQ):
        conn(w=[(0, 0, "q")])


def test_pure_gauge_is_flat():
    a = series_exp(S([(1, -1, "-I*w*q")], 3, 4))
    assert curvature(pure_gauge(a)).is_zero()


def test_wz_curvature():
    F = curvature(conn(w=[(1, 0, "q")], z=[(1, 0, "p")]))
    assert F[("w", "z")] == S([(2, 0, "1")], 3, 4)
    assert F[("z", "w")] == S([(2, 0, "-1")], 3, 4)
    assert all(F[pair].is_zero() for pair in F.components if pair != ("w", "z"))


def test_mixed_pure_gauges_violate_third_equation():
    a = series_exp(S([(1, -1, "-I*q*w")], 2, 4))
    b = series_exp(S([(1, -1, "-I*p*wt")], 2, 4))
    Aa, Ab = pure_gauge(a), pure_gauge(b)
    A = ConnectionData({"w": Aa["w"], "z": Aa["z"], "wt": Ab["wt"], "zt": Ab["zt"]})
    first, second, third = sdym_residual(A, FLAT)
    assert first.is_zero() and second.is_zero()
    assert not third.is_zero()


def test_gauge_transform():
    A = conn(w=[(1, 0, "q")], z=[(1, 0, "p*w")], zt=[(1, 0, "q*z")])
    assert gauge_transform(A, GradedSeries.one(3, 4)).components == A.components
    c = series_exp(S([(1, -1, "-I*q*wt")], 3, 4))
    A0 = ConnectionData.zero(GradedSeries.zero(3, 4))
    assert curvature(gauge_transform(A0, c)).is_zero()
    with pytest.raises(NotInGroup):
        gauge_transform(A, S([(0, 0, "2")], 3, 4))


def test_curvature_covariance():
    A = conn(w=[(1, 0, "q")], z=[(1, 0, "p*w")], wt=[(1, 0, "p")], zt=[(1, 0, "q*z")])
    c = series_exp(S([(1, -1, "-I*q*p"), (1, 0, "z*w")], 3, 4))
    F, F2 = curvature(A), curvature(gauge_transform(A, c))
    for pair in F.components:
        assert F2[pair] == adjoint_action(c, F[pair])
    r1, r2 = sdym_residual(A, FLAT), sdym_residual(gauge_transform(A, c), FLAT)
    assert r2[0] == adjoint_action(c, r1[0]) and r2[1] == adjoint_action(c, r1[1])


def test_yang():
    assert yang_residual(GradedSeries.one(2, 3), FLAT).is_zero()
    assert yang_residual(series_exp(S([(1, -1, "-I*w*z")], 2, 3)), FLAT).is_zero()
    r = yang_residual(series_exp(S([(1, -1, "-I*w*wt*q")], 2, 3)), FLAT)
    assert r.t_slice(1) == S([(1, -1, "-I*q")], 2, 3)


@given(series(free=False, t_max=2, k_max=3, max_terms=2), series(free=False, t_max=2, k_max=3, max_terms=2))
def test_bianchi(Aw, Azt):
    A = ConnectionData({"w": Aw, "z": Azt.like({}), "wt": Aw.like({}), "zt": Azt})
    for value in covariant_curl(A, curvature(A)).values():
        assert value.is_zero()


@given(series(free=False, t_max=3, k_max=5, max_terms=2, floor=1))
def test_bch_expansion_of_gauge_transform(B):
    # c^{-1} = exp(B / i hbar):  A'_i = sum_n (-1)^n/(n+1)! ad_B^n (d_i B),  ad_B = {B, .}
    from fractions import Fraction
    from math import factorial

    from heavenly_star.star import star_bracket

    c = series_exp(B.div_ihbar().scale(-1))
    A = gauge_transform(ConnectionData.zero(B.like({})), c)
    for name in COORDS:
        term = B.diff(name)
        total = term
        for n in range(1, B.t_max):
            term = star_bracket(B, term)
            total = total + term.scale(Fraction((-1) ** n, factorial(n + 1)))
        assert A[name] == total
