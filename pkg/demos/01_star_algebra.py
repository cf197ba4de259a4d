"""
Graded Moyal series
===================

Exact arithmetic in the t/hbar-graded Moyal algebra.
"""

import warnings

from heavenly_star import GradedSeries, star_bracket, star_multiply, series_exp, series_log, series_inverse
from heavenly_star.checks import algebra_suite

warnings.simplefilter("ignore")
S = GradedSeries.from_expr_terms

# q * p picks up the i hbar / 2 correction; the grading keeps hbar powers
# at or above -m in every t^m slice.
q, p = S([(0, 0, "q")], 3, 6), S([(0, 0, "p")], 3, 6)
print("q * p      =", star_multiply(q, p))

# The bracket (1/i hbar)[f, g] starts with the Poisson bracket.
print("{tq, tp}   =", star_bracket(q.shift_t(1), p.shift_t(1)))

# exp and log are inverse on elements with zero free part.
A = S([(1, 0, "q*w"), (2, -1, "p**2")], 3, 6)
g = series_exp(A)
print("log(exp A) == A:", series_log(g) == A)
print("g * g^-1 == 1:", star_multiply(g, series_inverse(g)) == GradedSeries.one(3, 6))

# The randomized identity suite used by the acceptance tests.
print(algebra_suite(20, seed=1))
