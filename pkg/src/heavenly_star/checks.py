"""Seeded random exact series and the star-algebra property suite."""

import warnings

import numpy as np

from .ring import Poly, RingElement, gaussian
from .star import (
    GradedSeries,
    poisson_bracket,
    series_exp,
    series_inverse,
    series_log,
    star_bracket,
    star_multiply,
)


def random_poly(rng, phase_degree=3, base_degree=2, n_terms=3, base=True):
    terms = {}
    for _ in range(n_terms):
        a = int(rng.integers(0, phase_degree + 1))
        b = int(rng.integers(0, phase_degree + 1 - a))
        e = [a, b, 0, 0, 0, 0]
        if base:
            for _ in range(int(rng.integers(0, base_degree + 1))):
                e[2 + int(rng.integers(0, 4))] += 1
        c = gaussian(int(rng.integers(-3, 4)), int(rng.integers(-2, 3)))
        if c:
            terms[tuple(e)] = terms.get(tuple(e), gaussian(0)) + c
    return Poly.from_dict(terms)


def random_series(rng, t_max=3, k_max=None, free=True, n_terms=3, phase_degree=3, base=True):
    """Exact series with random terms; ``free=False`` gives an element of the algebra Q (no t^0 slice)."""
    k_max = t_max + phase_degree if k_max is None else k_max
    terms = {}
    for _ in range(n_terms):
        m = int(rng.integers(0 if free else 1, t_max + 1))
        k = int(rng.integers(-m, min(k_max, 1) + 1))
        poly = random_poly(rng, phase_degree, base=base)
        if not poly.is_zero:
            c = RingElement.from_poly(poly)
            terms[(m, k)] = terms[(m, k)] + c if (m, k) in terms else c
    return GradedSeries(terms, t_max, k_max)


def random_group_element(rng, t_max=3, **kw):
    return GradedSeries.one(t_max, kw.get("k_max") or t_max + kw.get("phase_degree", 3)) + random_series(
        rng, t_max, free=False, **kw)


def algebra_suite(n=100, seed=0, t_max=3, phase_degree=3):
    """Run every identity on n random inputs.

    Returns {"failures": {identity: count}, "degraded_flags": count}; truncation
    at k_max is compatible with the product, so flags do not spoil exactness.
    """
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        failures = _suite(n, seed, t_max, phase_degree)
    return {"failures": failures, "degraded_flags": len(caught)}


def _suite(n, seed, t_max, phase_degree):
    rng = np.random.default_rng(seed)
    failures = {name: 0 for name in ("associativity", "unit", "jacobi", "grading", "exp_log",
                                     "log_exp", "inverse", "moyal_poisson")}
    for _ in range(n):
        a, b, c = (random_series(rng, t_max, phase_degree=phase_degree) for _ in range(3))
        one = GradedSeries.one(a.t_max, a.k_max)
        if star_multiply(star_multiply(a, b), c) != star_multiply(a, star_multiply(b, c)):
            failures["associativity"] += 1
        if star_multiply(one, a) != a or star_multiply(a, one) != a:
            failures["unit"] += 1
        x, y, z = (random_series(rng, t_max, free=False, phase_degree=phase_degree) for _ in range(3))
        jac = (star_bracket(x, star_bracket(y, z)) + star_bracket(y, star_bracket(z, x))
               + star_bracket(z, star_bracket(x, y)))
        if not jac.is_zero():
            failures["jacobi"] += 1
        if any(k < -m or k > a.k_max or m > a.t_max for (m, k) in star_multiply(a, b).terms):
            failures["grading"] += 1
        A = random_series(rng, t_max, free=False, phase_degree=phase_degree)
        if series_log(series_exp(A)) != A:
            failures["exp_log"] += 1
        g = one + A
        if series_exp(series_log(g)) != g:
            failures["log_exp"] += 1
        inv = series_inverse(g)
        if star_multiply(g, inv) != one or star_multiply(inv, g) != one:
            failures["inverse"] += 1
        if not moyal_poisson_bridge(random_poly(rng, phase_degree), random_poly(rng, phase_degree)):
            failures["moyal_poisson"] += 1
    return failures


def moyal_poisson_bridge(f, g):
    """Delta_1(f, g) - Delta_1(g, f) == i {f, g}_Poisson, exactly."""
    from .star import MOYAL

    d_fg = MOYAL.delta_terms(f, g).get(1, Poly())
    d_gf = MOYAL.delta_terms(g, f).get(1, Poly())
    pb = poisson_bracket(RingElement.from_poly(f), RingElement.from_poly(g)).num
    return d_fg - d_gf == pb.scale(gaussian(0, 1))


__all__ = ["random_poly", "random_series", "random_group_element", "algebra_suite", "moyal_poisson_bridge"]
