import pytest
from hypothesis import given

from heavenly_star.errors import NotInAlgebraQ, NotInGroup, TruncationMismatch
from heavenly_star.ring import Poly, RingElement, gaussian
from heavenly_star.star import (
    MOYAL,
    GradedSeries,
    adjoint_action,
    adjoint_action_series,
    free_element,
    poisson_bracket,
    series_exp,
    series_inverse,
    series_log,
    star_bracket,
    star_multiply,
)
from strategies import polys, series

# random inputs reach past k_max; truncation is compatible with the product, so flags are expected
pytestmark = pytest.mark.filterwarnings("ignore::heavenly_star.errors.DegradedPrecision")

S = GradedSeries.from_expr_terms


def one(t_max=3, k_max=6):
    return GradedSeries.one(t_max, k_max)


def test_q_star_p():
    qp = star_multiply(S([(0, 0, "q")], 2, 3), S([(0, 0, "p")], 2, 3))
    assert qp == S([(0, 0, "q*p"), (0, 1, "I/2")], 2, 3)


def test_commutator_of_tq_tp():
    a, b = S([(1, 0, "q")], 2, 3), S([(1, 0, "p")], 2, 3)
    assert star_multiply(a, b) - star_multiply(b, a) == S([(2, 1, "I")], 2, 3)
    assert star_bracket(a, b) == S([(2, 0, "1")], 2, 3)


def test_bracket_poisson_limit():
    assert star_bracket(S([(0, 0, "q")], 1, 2), S([(0, 0, "p")], 1, 2)) == S([(0, 0, "1")], 1, 2)


def test_moyal_terminates():
    f, g = Poly.from_expr("q**2*w"), Poly.from_expr("p**3")
    assert max(MOYAL.delta_terms(f, g)) <= 2


def test_degraded_precision_flag():
    from heavenly_star.errors import DegradedPrecision

    a = S([(0, 1, "q")], 1, 1)
    with pytest.warns(DegradedPrecision):
        star_multiply(a, S([(0, 1, "p")], 1, 1))


def test_truncation_mismatch():
    with pytest.raises(TruncationMismatch):
        star_multiply(S([(0, 0, "q")], 2, 3), S([(0, 0, "q")], 3, 3))


@pytest.mark.parametrize("f, g, expected", [("q", "p", "1"), ("q**2", "p", "2*q"), ("w*q", "zt*p", "w*zt")])
def test_poisson_bracket(f, g, expected):
    R = RingElement.from_expr
    assert poisson_bracket(R(f), R(g)) == R(expected)


def test_free_element():
    assert free_element(S([(0, 0, "1"), (1, 0, "q")], 2, 3)) == one(2, 3)
    assert free_element(S([(1, 0, "q")], 2, 3)).is_zero()
    a = S([(0, 2, "w"), (1, -1, "p")], 2, 3)
    assert free_element(a) == S([(0, 2, "w")], 2, 3)


def test_exp_examples():
    assert series_exp(GradedSeries.zero(2, 3)) == one(2, 3)
    assert series_exp(S([(1, 0, "q")], 2, 3)) == S([(0, 0, "1"), (1, 0, "q"), (2, 0, "q**2/2")], 2, 3)
    e = series_exp(S([(1, -1, "-I*q")], 2, 3))
    assert (1, -1) in e.terms and (2, -2) in e.terms
    with pytest.raises(NotInAlgebraQ):
        series_exp(one(2, 3))


def test_log_and_inverse_examples():
    assert series_log(one(2, 3)).is_zero()
    assert series_log(S([(0, 0, "1"), (1, 0, "q")], 2, 3)) == S([(1, 0, "q"), (2, 0, "-q**2/2")], 2, 3)
    assert series_inverse(S([(0, 0, "1"), (1, 0, "q")], 2, 3)) == S([(0, 0, "1"), (1, 0, "-q"), (2, 0, "q**2")], 2, 3)
    with pytest.raises(NotInGroup):
        series_log(S([(1, 0, "q")], 2, 3))
    with pytest.raises(NotInGroup):
        series_inverse(S([(0, 0, "2")], 2, 3))


def test_adjoint_example_both_paths():
    a = series_exp(S([(1, -1, "-I*q")], 3, 4))
    p = S([(0, 0, "p")], 3, 4)
    expected = S([(0, 0, "p"), (1, 0, "1")], 3, 4)
    assert adjoint_action(a, p) == expected
    assert adjoint_action_series(a, p) == expected


@given(series(), series(), series())
def test_associative(a, b, c):
    assert star_multiply(star_multiply(a, b), c) == star_multiply(a, star_multiply(b, c))


@given(series())
def test_unit(a):
    u = one(a.t_max, a.k_max)
    assert star_multiply(u, a) == a == star_multiply(a, u)


@given(series(free=False), series(free=False), series(free=False))
def test_jacobi(x, y, z):
    jac = (star_bracket(x, star_bracket(y, z)) + star_bracket(y, star_bracket(z, x))
           + star_bracket(z, star_bracket(x, y)))
    assert jac.is_zero()


@given(series(free=False), series(free=False))
def test_bracket_antisymmetric_and_graded(x, y):
    assert star_bracket(x, y) == -star_bracket(y, x)
    assert all(k >= -m for (m, k) in star_bracket(x, y).terms)


@given(series(free=False))
def test_exp_log_roundtrip(A):
    assert series_log(series_exp(A)) == A
    assert series_exp(series_log(one(A.t_max, A.k_max) + A)) == one(A.t_max, A.k_max) + A


@given(series(free=False))
def test_inverse_is_exp_of_minus(A):
    g = series_exp(A)
    assert series_inverse(g) == series_exp(-A)
    assert star_multiply(g, series_inverse(g)) == one(A.t_max, A.k_max)


@given(series(free=False, floor=1), series())
def test_adjoint_paths_agree_and_keep_free_element(A, f):
    a = series_exp(A.div_ihbar())
    direct = adjoint_action(a, f)
    assert direct == adjoint_action_series(a, f)
    assert free_element(direct) == free_element(f)


@given(polys(), polys())
def test_moyal_poisson_bridge(f, g):
    d = MOYAL.delta_terms(f, g).get(1, Poly()) - MOYAL.delta_terms(g, f).get(1, Poly())
    pb = poisson_bracket(RingElement.from_poly(f), RingElement.from_poly(g)).num
    assert d == pb.scale(gaussian(0, 1))
