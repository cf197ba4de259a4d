"""
From a transition function back to Theta
========================================

Birkhoff-factorize a sampled H on the unit circle, read off the SDYM
connection, gauge to A_alpha = 0 and integrate Theta.
"""

import time
import warnings

from heavenly_star import flat_background
from heavenly_star.contour import Contour
from heavenly_star.hierarchy import me_bracket_term
from heavenly_star.hilbert import birkhoff_factorize, datum_from_spectral, extract_connection, extract_theta
from heavenly_star.spectral import spectral_from_spec

warnings.simplefilter("ignore")
bg = flat_background()
C = Contour(256)


def run(log_datum):
    start = time.perf_counter()
    F = spectral_from_spec(log_datum, bg, 3, 4).map(lambda s: s.to_float())
    sol = birkhoff_factorize(datum_from_spectral(F, C), C)
    A, conn = extract_connection(sol, bg)
    tf, th = extract_theta(sol, bg)
    print(log_datum)
    print("  factor residual %.1e  leakage %.1e" % (sol.diagnostics["factor_residual"], sol.diagnostics["leakage"]))
    print("  SDYM residuals", ["%.1e" % x for x in conn["sdym_residuals"]])
    print("  me_residual %.1e  |t^2 bracket| %.2f" % (th["me_residual"], me_bracket_term(tf).t_slice(2).norm()))
    print("  Theta =", tf.theta)
    print("  %.2f s" % (time.perf_counter() - start))


# With the 1/lam, the exponent splits as (q wt + p zt)/lam + (p w - q z) plus a
# central commutator, so Psi is lam-independent and Theta comes out zero.
run("-I*hbar^-1*t*(q*Pw + p*Pz)/lam")

# Without it, Theta = t(pw - qz) - t^2 (w wt + z zt)/2 and the bracket is active.
run("-I*hbar^-1*t*(q*Pw + p*Pz)")
