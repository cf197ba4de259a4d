"""
Charges, towers and the wavefunction
====================================

The canonical exact solution Theta* = t(qw + pz) - t^2 w wt on the flat
background, its D-tower, and the two wavefunctions glued by H.
"""

import warnings

from heavenly_star import (
    GradedSeries,
    ThetaField,
    flat_background,
    hierarchy_generate,
    lax_defect,
    me_residual,
    solve_underline_wavefunction,
    theta_star,
    transition_function,
    wavefunction,
)

warnings.simplefilter("ignore")
bg = flat_background()
tf = ThetaField(theta_star(), bg)
print("master equation residual is zero:", me_residual(tf).is_zero())

# D-tower seeded with 1: the first charge is Theta / (i hbar).
tower = hierarchy_generate(tf, "D", GradedSeries.one(3, 6), 3)
print("c_1 == Theta/(i hbar):", tower[1] == tf.theta.div_ihbar())
for n, c in enumerate(tower.members):
    print(f"c_{n} t-orders:", sorted({m for m, _ in c.terms}))

# Psi = sum lam^n c_n solves the Lax pair.  With depth = t_max the grading
# truncates the series and the defect vanishes identically.
psi = wavefunction(tf, 3)
d = lax_defect(tf, psi)
print("Lax defect vanishes through lam^3:", d.vanishes_through(3))

# The infinity-chart partner comes from a bounded polynomial ansatz.
psi_under = solve_underline_wavefunction(tf, degree_budget=6, depth=3)
rep = transition_function(psi, psi_under, bg)
print("H = Psi_^-1 * Psi is constant on twistor surfaces:", rep.constant)
print("H lambda powers:", rep.H.powers())
