"""Homogeneous Hilbert problem on the unit circle, Birkhoff factorisation and the inverse transform.

Node data live on tau_j = exp(2 pi i j / N); the Fredholm iteration runs on the
staggered targets xi_j = tau_j exp(i pi / N).  For band-limited data the
staggered trapezoid rule for the principal value is exact:

    PV[tau^k](xi) = +xi^k / 2   (k >= 0),   -xi^k / 2   (k < 0),   |k| < N.
"""

from dataclasses import dataclass, field

import numpy as np

from .background import BARRED, UNBARRED
from .contour import Contour, ContourSeries, broadcast
from .errors import (
    GuardBand,
    InterpolationOverflow,
    LiouvilleViolation,
    NotInGroup,
    ResidualExceeded,
)
from .gauge import ConnectionData, sdym_residual
from .hierarchy import ThetaField, integrate_alpha, me_residual
from .lax import _tangential
from .ring import Poly, RingElement, to_complex
from .spectral import SpectralSeries
from .star import GradedSeries, series_exp, series_inverse, star_multiply

DECAY_GATE = 1e-12
GUARD = 1e-3


# ---------------------------------------------------------------------------
# coefficientwise array plumbing
# ---------------------------------------------------------------------------

def _flatten(series):
    """[(key, exps, den)], 2-D array of samples (one row per coefficient monomial)."""
    labels, rows = [], []
    for key, c in sorted(series.terms.items()):
        for e, v in sorted(c.num.terms.items()):
            labels.append((key, e, c.den))
            rows.append(v)
    if not rows:
        return labels, np.zeros((0, 0), dtype=complex)
    shape = max((np.shape(r) for r in rows), key=len)
    return labels, np.vstack([np.broadcast_to(np.asarray(r if isinstance(r, np.ndarray) else to_complex(r),
                                                         dtype=complex), shape) for r in rows])


def _rebuild(template, labels, matrix, scalar=False, chop=0.0):
    grouped = {}
    for (key, e, den), row in zip(labels, matrix):
        value = complex(row) if scalar else np.array(row, dtype=complex)
        if scalar and abs(value) <= chop:
            continue
        grouped.setdefault((key, den), {})[e] = value
    terms = {}
    for (key, den), monos in grouped.items():
        c = RingElement(Poly(monos), den, _reduced=True)
        if not c.is_zero:
            terms[key] = terms[key] + c if key in terms else c
    return template.like(terms)


def _modes(samples, shift=0.0):
    """Laurent coefficients c_n (n in fft order) of samples at exp(2 pi i (j + shift)/N)."""
    n = samples.shape[-1]
    c = np.fft.fft(samples, axis=-1) / n
    if shift:
        k = np.fft.fftfreq(n, d=1.0 / n)
        c = c * np.exp(-2j * np.pi * k * shift / n)
    return c


def _check_decay(samples, shift=0.0, label="data"):
    if samples.size == 0:
        return 0.0
    c = _modes(samples, shift)
    n = samples.shape[-1]
    k = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    # relative to the largest coefficient of the whole series, so rows that are pure round-off pass
    scale = float(np.max(np.abs(c))) or 1.0
    tail = float(np.max(np.abs(c[:, k > n // 4]))) / scale
    if tail > DECAY_GATE:
        raise InterpolationOverflow(
            f"{label}: Fourier tail {tail:.3e} above {DECAY_GATE:g} at |n| > N/4; increase N")
    return float(tail)


def _half_step(samples):
    """Trigonometric interpolation from the nodes to the staggered targets; Nyquist mode dropped."""
    n = samples.shape[-1]
    c = _modes(samples)
    k = np.fft.fftfreq(n, d=1.0 / n)
    c[..., n // 2] = 0.0
    return np.fft.ifft(c * np.exp(1j * np.pi * k / n), axis=-1) * n


def _targets_to_nodes(series):
    labels, mat = _flatten(series)
    if mat.size == 0:
        return series
    n = mat.shape[-1]
    c = _modes(mat, 0.5)
    c[..., n // 2] = 0.0
    return _rebuild(series, labels, np.fft.ifft(c, axis=-1) * n)


# ---------------------------------------------------------------------------
# Cauchy integrals
# ---------------------------------------------------------------------------

def cauchy_transform(f, lam, contour):
    """(1/2 pi i) contour integral of f(tau)/(tau - lam), f sampled at the nodes.

    Evaluated from the discrete Laurent coefficients of the node data, which is
    the band-limited limit of the trapezoid rule and avoids its lam^N aliasing
    error near the contour.
    """
    lam = complex(lam) / contour.radius
    if abs(abs(lam) - 1.0) < GUARD:
        raise GuardBand(f"|lambda| = {abs(lam):.6f} within {GUARD:g} of the contour")
    labels, mat = _flatten(f.series)
    if mat.size == 0:
        return f.series.like({})
    n = mat.shape[-1]
    c = _modes(mat)
    k = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    if abs(lam) < 1:
        mask = k >= 0
        values = c[:, mask] @ (lam ** k[mask])
    else:
        mask = k < 0
        values = -(c[:, mask] @ (lam ** k[mask].astype(float)))
    return _rebuild(f.series, labels, values, scalar=True)


def cauchy_matrix(contour):
    """C[j, k] = (1/N) tau_k / (tau_k - xi_j): staggered trapezoid weights for the principal value."""
    tau = contour.nodes / contour.radius
    xi = contour.targets / contour.radius
    return (tau[None, :] / (tau[None, :] - xi[:, None])) / contour.n


def _pv_matrix(mat, contour, at_targets=None):
    """Principal value at the targets by subtraction: sum C (f - f(xi)) + f(xi)/2."""
    C = cauchy_matrix(contour)
    if at_targets is None:
        at_targets = _half_step(mat)
    row_sums = C.sum(axis=1)
    return mat @ C.T - at_targets * row_sums[None, :] + 0.5 * at_targets


def plemelj_boundary(f, contour):
    """Principal-value transform of node data, returned at the staggered targets."""
    labels, mat = _flatten(f.series)
    if mat.size == 0:
        return ContourSeries(f.series, contour.targets, "off")
    _check_decay(mat, 0.0, "plemelj input")
    pv = _pv_matrix(mat, contour)
    return ContourSeries(_rebuild(f.series, labels, pv), contour.targets, "off")


def plemelj_limits(f, contour):
    """(Phi+, Phi-) = (PV + f/2, PV - f/2) at the targets."""
    labels, mat = _flatten(f.series)
    _check_decay(mat, 0.0, "plemelj input")
    at_t = _half_step(mat)
    pv = _pv_matrix(mat, contour, at_t)
    plus = _rebuild(f.series, labels, pv + 0.5 * at_t)
    minus = _rebuild(f.series, labels, pv - 0.5 * at_t)
    return (ContourSeries(plus, contour.targets, "plus"), ContourSeries(minus, contour.targets, "minus"))


# ---------------------------------------------------------------------------
# the Hilbert problem
# ---------------------------------------------------------------------------

def sample_spectral(spectral, points):
    """Evaluate a SpectralSeries at the given points (array coefficients)."""
    return spectral.evaluate(points)


def datum_from_spectral(log_datum, contour, exponentiate=True):
    """Node samples of exp(F) (or F itself) for a lambda-series F."""
    values = log_datum.evaluate(contour.nodes)
    values = broadcast(values, contour.n)
    if exponentiate:
        values = broadcast(series_exp(values), contour.n)
    return ContourSeries(values, contour.nodes, "off")


@dataclass
class HilbertSolution:
    phi_minus: ContourSeries       # at targets
    phi_plus: ContourSeries        # at targets
    psi: SpectralSeries            # origin chart, modes n >= 0 of phi_plus
    psi_under: SpectralSeries      # infinity chart, modes n <= 0 of phi_minus
    contour: Contour
    diagnostics: dict = field(default_factory=dict)


def _group_check(cs, label):
    free = cs.series.t_slice(0)
    one = broadcast(GradedSeries.one(cs.series.t_max, cs.series.k_max).to_float(), cs.n)
    if (free - one).norm() > 1e-12:
        raise NotInGroup(f"{label}: free element differs from 1 at some node")


def _unit_free(series):
    """Replace the t^0 slice (1 up to interpolation round-off) by the exact unit."""
    rest = series.like({key: c for key, c in series.terms.items() if key[0] > 0})
    return rest + GradedSeries.one(series.t_max, series.k_max, series.product)


def _fredholm(G_nodes, G_targets_inv, gamma_targets, contour, t_max):
    """Phi-_m(xi) = gamma_m + [C(Phi- G) * G^{-1}(xi)]_m - [C(Phi-)]_m, m = 0..t_max."""
    C = cauchy_matrix(contour)
    phi = gamma_targets.like({})
    sweeps = 0
    for m in range(t_max + 1):
        phi_nodes = _targets_to_nodes(phi)
        prod = star_multiply(phi_nodes, G_nodes)
        labels, mat = _flatten(prod)
        cp = _rebuild(prod, labels, mat @ C.T) if mat.size else prod.like({})
        labels, mat = _flatten(phi_nodes)
        cm = _rebuild(phi_nodes, labels, mat @ C.T) if mat.size else phi_nodes.like({})
        rhs = gamma_targets + star_multiply(cp, G_targets_inv) - cm
        phi = phi + rhs.t_slice(m)
        sweeps += 1
    assert sweeps == t_max + 1
    return phi


def _split_modes(series, positive, shift=0.5, chop=1e-14):
    """Laurent coefficients of target samples as {power: GradedSeries}, plus wrong-side leakage."""
    labels, mat = _flatten(series)
    out = {}
    leakage = 0.0
    if mat.size == 0:
        return out, leakage
    n = mat.shape[-1]
    c = _modes(mat, shift)
    k = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    scale = max(1.0, float(np.max(np.abs(c))))
    for idx, power in enumerate(k):
        if abs(power) > n // 4:
            continue
        col = c[:, idx]
        wanted = power >= 0 if positive else power <= 0
        if not wanted:
            leakage = max(leakage, float(np.max(np.abs(col))))
            continue
        s = _rebuild(series, labels, col, scalar=True, chop=chop * scale)
        if not s.is_zero():
            out[int(power)] = s
    return out, leakage


def hilbert_solve(G, gamma, contour, tol=1e-8):
    """Solve Phi+ = Phi- * G with Phi- - gamma holomorphic outside and vanishing at infinity."""
    G = ContourSeries(broadcast(G.series, contour.n), contour.nodes, G.side)
    _group_check(G, "datum")
    labels, mat = _flatten(G.series)
    tail = _check_decay(mat, 0.0, "datum")
    t_max = G.series.t_max
    G_targets = _unit_free(_rebuild(G.series, labels, _half_step(mat)))
    G_inv_targets = series_inverse(G_targets)

    template = G.series.like({})
    gamma_t = broadcast(gamma.evaluate(contour.targets), contour.n)
    if gamma_t.t_max != t_max:
        raise ValueError("gamma and datum truncations differ")
    phi_minus = _fredholm(G.series, G_inv_targets, gamma_t, contour, t_max)

    # accompanying problem: the same iteration with gamma = 0 must return 0 exactly
    zero = _fredholm(G.series, G_inv_targets, template, contour, t_max)
    assert zero.is_zero(), "accompanying problem has a nontrivial solution"

    phi_plus = star_multiply(phi_minus, G_targets)
    plus_modes, plus_leak = _split_modes(phi_plus, positive=True)
    minus_modes, minus_leak = _split_modes(phi_minus - gamma_t, positive=False)
    gamma_modes, _ = _split_modes(gamma_t, positive=True)
    for j, s in gamma_modes.items():
        if j == 0:
            minus_modes[0] = minus_modes[0] + s if 0 in minus_modes else s

    # boundary-condition residual: Phi+ must be the boundary value of an interior function
    labels, mat = _flatten(phi_plus)
    _, at_nodes = _flatten(_targets_to_nodes(phi_plus))
    pv = _pv_matrix(at_nodes, contour, mat)
    residual = _rebuild(phi_plus, labels, pv - 0.5 * mat)
    norms = {f"{m},{k}": v for (m, k), v in residual.norms().items()}
    res = residual.norm()
    psi = SpectralSeries(plus_modes, "origin", template)
    psi_under = SpectralSeries(minus_modes, "infinity", template)
    diagnostics = {
        "boundary_residual": res,
        "boundary_residual_by_grade": norms,
        "leakage_plus": plus_leak,
        "leakage_minus": minus_leak,
        "fourier_tail": tail,
        "sweeps": t_max + 1,
        "accompanying_trivial": True,
    }
    if res > tol:
        raise ResidualExceeded(f"boundary residual {res:.3e} above {tol:g}", norms)
    return HilbertSolution(
        ContourSeries(phi_minus, contour.targets, "minus"),
        ContourSeries(phi_plus, contour.targets, "plus"),
        psi, psi_under, contour, diagnostics)


def birkhoff_factorize(H, contour, tol=1e-8):
    """H = Psi_^{-1} * Psi with Psi holomorphic inside and Psi_(infinity) = 1."""
    gamma = SpectralSeries.one(H.series.like({}).to_float(), "origin")
    sol = hilbert_solve(H, gamma, contour, tol)
    nodes = contour.nodes
    psi_n = broadcast(sol.psi.evaluate(nodes), contour.n)
    psi_u = broadcast(sol.psi_under.evaluate(nodes), contour.n)
    recon = star_multiply(series_inverse(psi_u), psi_n)
    residual = (recon - H.series).norm()
    sol.diagnostics["factor_residual"] = residual
    sol.diagnostics["leakage"] = max(sol.diagnostics["leakage_plus"], sol.diagnostics["leakage_minus"])
    if residual > tol:
        raise ResidualExceeded(f"factorisation residual {residual:.3e} above {tol:g}",
                               {"factor_residual": residual})
    return sol


# ---------------------------------------------------------------------------
# inverse Penrose-Ward steps
# ---------------------------------------------------------------------------

def _ell_at(bg, alpha, samples, lam):
    return samples.diff(alpha) + _tangential(bg, alpha, samples).scale(lam)


def _log_derivative_modes(bg, samples, points, alpha):
    """Laurent modes of ell_alpha Psi * Psi^{-1} from target samples."""
    X = star_multiply(_ell_at(bg, alpha, samples, points), series_inverse(samples))
    modes, _ = _split_modes_all(X)
    return modes


def _split_modes_all(series, shift=0.5):
    labels, mat = _flatten(series)
    out = {}
    if mat.size == 0:
        return out, 0.0
    n = mat.shape[-1]
    c = _modes(mat, shift)
    k = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    for idx, power in enumerate(k):
        out[int(power)] = _rebuild(series, labels, c[:, idx], scalar=True)
    return out, 0.0


def _liouville(modes, allowed, tol):
    worst = 0.0
    for power, s in modes.items():
        if power in allowed:
            continue
        size = s.norm()
        worst = max(worst, size)
        if size > tol:
            raise LiouvilleViolation(f"lambda^{power} coefficient has size {size:.3e}", power, size)
    return worst


def extract_connection(sol, bg, tol=1e-8):
    """Potentials from ell_alpha Psi * Psi^{-1} = (1/i hbar)(-A_alpha + lam eps_{ab} G g^{s~b} A_s~)."""
    samples = sol.phi_plus.series
    points = sol.contour.targets
    lowest = {}
    first = {}
    leak = 0.0
    for a in UNBARRED:
        modes = _log_derivative_modes(bg, samples, points, a)
        leak = max(leak, _liouville(modes, (0, 1), tol))
        template = samples.like({})
        lowest[a] = modes.get(0, template).mul_ihbar().scale(-1)
        first[a] = modes.get(1, template).mul_ihbar()
    # B_w = M^z, B_z = -M^w with M^b = G g^{s~b} A_s~
    M = {"z": first["w"], "w": -first["z"]}
    A_bar = {}
    for s in BARRED:
        total = None
        for b in UNBARRED:
            f = bg.g(b, s) * bg.inv_G()
            if f.is_zero:
                continue
            term = M[b].times_function(f)
            total = term if total is None else total + term
        A_bar[s] = total if total is not None else samples.like({})
    A = ConnectionData({"w": _chop(lowest["w"]), "z": _chop(lowest["z"]),
                        "wt": _chop(A_bar["wt"]), "zt": _chop(A_bar["zt"])})
    residuals = sdym_residual(A, bg)
    norms = [r.norm() for r in residuals]
    report = {"liouville_leakage": leak, "sdym_residuals": norms}
    if max(norms) > tol:
        raise ResidualExceeded(f"SDYM residuals {norms} above {tol:g}", {"sdym": norms})
    return A, report


def _chop(series, eps=1e-13):
    def clean(c):
        num = Poly({e: v for e, v in c.num.terms.items() if abs(v) > eps})
        return RingElement(num, c.den, _reduced=True) if not num.is_zero else RingElement(num)

    return series.map_coefficients(clean)


def gauge_normalize(samples, psi0):
    """Left-multiply boundary samples by Psi(0)^{-1}."""
    n = None
    for c in samples.terms.values():
        for v in c.num.terms.values():
            n = len(v)
            break
        break
    inv = series_inverse(psi0)
    return star_multiply(broadcast(inv, n), samples)


def psi_at_origin(samples):
    modes, _ = _split_modes_all(samples)
    return modes.get(0, samples.like({}))


def extract_theta(sol, bg, tol=1e-8):
    """Theta from the gauge A_alpha = 0: ell_alpha Psi' * Psi'^{-1} = (lam / i hbar) d_alpha Theta."""
    samples = sol.phi_plus.series
    points = sol.contour.targets
    normalized = gauge_normalize(samples, psi_at_origin(samples))
    grads = {}
    leak = 0.0
    lowest = 0.0
    for a in UNBARRED:
        modes = _log_derivative_modes(bg, normalized, points, a)
        leak = max(leak, _liouville(modes, (0, 1), tol))
        lowest = max(lowest, modes.get(0, samples.like({})).norm())
        grads[a] = _chop(modes.get(1, samples.like({})).mul_ihbar())
    if lowest > tol:
        raise ResidualExceeded(f"gauge normalisation left A_alpha of size {lowest:.3e}")
    theta = _chop(integrate_alpha(grads["w"], grads["z"], tol=tol))
    tf = ThetaField(theta, bg)
    residual = me_residual(tf).norm()
    report = {"liouville_leakage": leak, "gauge_residual": lowest, "me_residual": residual}
    if residual > tol:
        raise ResidualExceeded(f"master equation residual {residual:.3e} above {tol:g}",
                               {"me_residual": residual})
    return tf, report
