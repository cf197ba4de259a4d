"""
Hidden symmetries from twistor functions
========================================

delta Theta as a residue, and the commutator of two symmetries against the
symmetry generated by the bracket of their twistor functions.
"""

import warnings

from heavenly_star import GradedSeries, ThetaField, flat_background, lme_residual, theta_star
from heavenly_star.lax import symmetry_bracket_check, symmetry_delta

warnings.simplefilter("ignore")
bg = flat_background()

# At Theta = 0 the residue of (P^w)^2 / lam^2 with P^w = wt - lam z is -z^2.
zero = ThetaField(GradedSeries.zero(3, 6), bg)
delta = symmetry_delta(zero, "Pw^2/lam")
print("delta Theta =", delta, " solves the LME:", lme_residual(zero, delta).is_zero())

# The same spec on both charts cancels.
print("both charts:", symmetry_delta(zero, "t*Pw^2/lam", "t*Pw^2/lam"))

# Brute-force commutator vs bracket, through t^2, around Theta*.
tf = ThetaField(theta_star(2, 4), bg)
r = symmetry_bracket_check(tf, "t*q*Pw^2/lam", None, "t*p*Pz^2/lam", None)
print("bracket side  :", r["bracket"])
print("commutator    :", r["commutator"])
print("agree:", r["agree"])
