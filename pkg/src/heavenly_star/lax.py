"""Twistor vector fields, Lax operators, wavefunctions, dressing and hidden symmetries."""

from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np
from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

from .background import BARRED, UNBARRED
from .contour import Contour, ContourSeries
from .errors import AnsatzExhausted, ChartMismatch, ContourSingularity, NotInGroup
from .hierarchy import ThetaField, hierarchy_generate, lme_residual, star_me_residual
from .ring import BASE, ONE, Poly, RingElement
from .spectral import SpectralSeries, check_chart, spectral_from_spec
from .star import GradedSeries, star_multiply

FORMAL = None


# ---------------------------------------------------------------------------
# twistor vector fields
# ---------------------------------------------------------------------------

def _as_spectral(f):
    if isinstance(f, SpectralSeries):
        return f
    return SpectralSeries.constant(f, "origin")


def _tangential(bg, alpha, f):
    """-G g^{s~z} d_s~ f for alpha = w, +G g^{s~w} d_s~ f for alpha = z (the lambda part of ell)."""
    other, sign = ("z", -1) if alpha == "w" else ("w", 1)

    def apply(series):
        total = series.like({})
        for s in BARRED:
            c = bg.G_ginv(s, other)
            if not c.is_zero:
                total = total + series.diff(s).times_function(c)
        return total.scale(sign)

    if isinstance(f, SpectralSeries):
        return f.map(apply)
    return apply(f)


def ell_apply(bg, lam, alpha, f):
    """ell_alpha f.  lam=None means formal: the result is a SpectralSeries."""
    if alpha not in UNBARRED:
        raise ValueError("alpha must be 'w' or 'z'")
    if lam is FORMAL:
        f = _as_spectral(f)
        return f.diff(alpha) + _tangential(bg, alpha, f).times_lambda(1)
    if isinstance(f, SpectralSeries):
        f = f.evaluate(lam)
    return f.diff(alpha) + _tangential(bg, alpha, f).scale(lam)


def ell_components(bg, alpha):
    """Vector components of ell_alpha as {coordinate: {lam power: RingElement}}."""
    other, sign = ("z", -1) if alpha == "w" else ("w", 1)
    comps = {c: {} for c in UNBARRED + BARRED}
    comps[alpha][0] = RingElement.constant(ONE)
    for s in BARRED:
        c = bg.G_ginv(s, other)
        if not c.is_zero:
            comps[s][1] = c.scale(sign)
    return comps


def null_check(bg):
    """ds^2(ell_a, ell_b) as lambda-polynomials; all should vanish."""
    out = {}
    for a, b in (("w", "w"), ("w", "z"), ("z", "z")):
        u, v = ell_components(bg, a), ell_components(bg, b)
        poly = {}
        for al in UNBARRED:
            for bt in BARRED:
                g = bg.g(al, bt)
                for x, y in ((u[al], v[bt]), (v[al], u[bt])):
                    for i, xi in x.items():
                        for j, yj in y.items():
                            term = g * xi * yj
                            poly[i + j] = poly[i + j] + term if i + j in poly else term
        out[(a, b)] = {j: c for j, c in poly.items() if not c.is_zero}
    return out


# ---------------------------------------------------------------------------
# Lax operators
# ---------------------------------------------------------------------------

def lax_apply(tf, alpha, psi, hi=None):
    """M_alpha psi = ell_alpha psi - (lam / i hbar) d_alpha Theta * psi."""
    psi = _as_spectral(psi)
    ell = ell_apply(tf.background, FORMAL, alpha, psi)
    theta_part = psi.star_series(tf.d_over_ihbar(alpha)).times_lambda(1)
    out = ell - theta_part
    return out.truncate(hi=hi) if hi is not None else out


@dataclass
class LaxDefect:
    m_w: SpectralSeries
    m_z: SpectralSeries
    contraction_ok: bool
    contraction_residual: SpectralSeries

    def vanishes_through(self, power):
        return all(s.coefficient(j).is_zero() for s in (self.m_w, self.m_z) for j in range(power + 1))


def default_probe(theta):
    return GradedSeries.from_expr_terms(
        [(0, 0, "q*w + p*zt"), (1, 0, "q**2*z + p*wt*w")], theta.t_max, theta.k_max)


def lax_contraction(tf, probe):
    """eps^{ab} M_a M_b probe and the expected (lam^2/i hbar) G [star ME residual] * probe."""
    lhs = (lax_apply(tf, "w", lax_apply(tf, "z", probe))
           - lax_apply(tf, "z", lax_apply(tf, "w", probe)))
    res = star_me_residual(tf).times_function(tf.background.G).div_ihbar()
    rhs = SpectralSeries({2: star_multiply(res, probe)}, "origin", probe.like({}))
    return lhs, rhs


def lax_defect(tf, psi, probe=None):
    check_chart(psi, "origin")
    m_w = lax_apply(tf, "w", psi)
    m_z = lax_apply(tf, "z", psi)
    probe = default_probe(tf.theta) if probe is None else probe
    lhs, rhs = lax_contraction(tf, probe)
    residual = lhs - rhs
    return LaxDefect(m_w, m_z, residual.is_zero(), residual)


def assemble_wavefunction(tower, chart="origin"):
    if tower.kind != "D":
        raise ValueError("wavefunctions are assembled from D-towers")
    template = tower.members[0].like({})
    if chart == "origin":
        return SpectralSeries({j: c for j, c in enumerate(tower.members)}, "origin", template)
    if chart == "infinity":
        return SpectralSeries({-j: c for j, c in enumerate(tower.members)}, "infinity", template)
    raise ChartMismatch("chart must be 'origin' or 'infinity'")


def wavefunction(tf, depth):
    one = GradedSeries.one(tf.theta.t_max, tf.theta.k_max, tf.theta.product)
    return assemble_wavefunction(hierarchy_generate(tf, "D", one, depth))


# ---------------------------------------------------------------------------
# the infinity-chart wavefunction by polynomial ansatz
# ---------------------------------------------------------------------------

def _base_monomials(budget):
    out = []
    for d in range(budget + 1):
        for combo in combinations_with_replacement(range(4), d):
            e = [0, 0, 0, 0]
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return sorted(set(out), key=lambda e: (sum(e), e))


def _zeroth_order_ops(bg):
    """N0_w = -G g^{s~z} d_s~, N0_z = +G g^{s~w} d_s~ as lists of (coordinate, polynomial)."""
    ops = {}
    for alpha, other, sign in (("w", "z", -1), ("z", "w", 1)):
        terms = []
        for s in BARRED:
            c = bg.G_ginv(s, other)
            if c.is_zero:
                continue
            if not c.is_polynomial:
                raise AnsatzExhausted(f"G g^({s},{other}) is not polynomial; the ansatz needs polynomial fields")
            terms.append((s, c.num.scale(sign)))
        ops[alpha] = terms
    return ops


def _apply_base_op(terms, mono):
    """Apply sum_s c_s d_s to a single base monomial (4-tuple); returns {base exps: coeff}."""
    out = {}
    for s, poly in terms:
        i = BASE.index(s)
        n = mono[i]
        if not n:
            continue
        d = mono[:i] + (n - 1,) + mono[i + 1:]
        for e, c in poly.terms.items():
            ne = tuple(a + b for a, b in zip(e[2:], d))
            v = c * n
            out[ne] = out[ne] + v if ne in out else v
    return {e: c for e, c in out.items() if c}


def _diff_base(alpha, mono):
    i = BASE.index(alpha)
    n = mono[i]
    if not n:
        return {}
    return {mono[:i] + (n - 1,) + mono[i + 1:]: QQ_I(n, 0)}


def solve_underline_wavefunction(tf, degree_budget, depth, extra_depth=1):
    """Infinity-chart wavefunction Psi_(zeta) = sum_k zeta^{-k} eta'_k with eta'_0 free element 1.

    Solves zeta M_(alpha) = M_alpha at lam = zeta order by order in t: with
    M_alpha = d_alpha + zeta N_alpha the conditions are N_alpha eta'_0 = 0 and
    d_alpha eta'_{k-1} + N_alpha eta'_k = 0.  Each t-order splits into blocks
    labelled by (hbar power, phase monomial); each block is an exact linear
    system for the coefficients of a bounded-degree polynomial ansatz in
    (w, z, wt, zt).  The result is verified; failures raise AnsatzExhausted.
    """
    theta = tf.theta
    t_max, k_max = theta.t_max, theta.k_max
    ops = _zeroth_order_ops(tf.background)
    levels = depth + extra_depth
    T = {a: tf.d_over_ihbar(a) for a in UNBARRED}
    monos = _base_monomials(degree_budget)
    col_of = {(k, b): i for i, (k, b) in enumerate((k, b) for k in range(levels + 1) for b in monos)}
    op_cache = {}

    def column_entries(k, mono):
        key = (k, mono)
        if key not in op_cache:
            rows = []
            for a in UNBARRED:
                for g, c in _apply_base_op(ops[a], mono).items():
                    rows.append(((a, k, g), c))
                if k + 1 <= levels:
                    for g, c in _diff_base(a, mono).items():
                        rows.append(((a, k + 1, g), c))
            op_cache[key] = rows
        return op_cache[key]

    # eta'[k] is a dict (m, h) -> Poly
    eta = [dict() for _ in range(levels + 1)]
    eta[0][(0, 0)] = Poly({(0,) * 6: ONE})

    def as_series(k):
        return GradedSeries({key: RingElement.from_poly(p) for key, p in eta[k].items() if not p.is_zero},
                            t_max, k_max, theta.product)

    for m in range(1, t_max + 1):
        blocks = {}
        for k in range(levels + 1):
            current = as_series(k)
            for a in UNBARRED:
                rhs = star_multiply(T[a], current).t_slice(m)
                for (_, h), c in rhs.terms.items():
                    if not c.is_polynomial:
                        raise AnsatzExhausted("right-hand side has a denominator")
                    for e, v in c.num.terms.items():
                        blk = blocks.setdefault((h, e[0], e[1]), {})
                        blk[(a, k, e[2:])] = blk.get((a, k, e[2:]), 0) + v
        for block in sorted(blocks):
            rhs = {r: v for r, v in blocks[block].items() if v}
            if not rhs:
                continue
            solution = _solve_block(rhs, monos, levels, col_of, column_entries, (m,) + block)
            h, qe, pe = block
            for (k, mono), value in solution.items():
                e = (qe, pe) + mono
                bucket = eta[k].setdefault((m, h), Poly())
                eta[k][(m, h)] = bucket + Poly({e: value})

    template = GradedSeries.zero(t_max, k_max, theta.product)
    psi = SpectralSeries({-k: as_series(k) for k in range(depth + 1)}, "infinity", template)
    bad = sorted({j for d in underline_defect(tf, psi) for j in d.powers() if j > -(depth + 1)})
    if bad:
        raise AnsatzExhausted(f"verification failed: defect at zeta powers {bad}")
    return psi


def _solve_block(rhs, monos, levels, col_of, column_entries, label):
    row_of = {}
    entries = {}
    for (k, mono), col in col_of.items():
        for row, c in column_entries(k, mono):
            r = row_of.setdefault(row, len(row_of))
            entries.setdefault(r, {})[col] = c
    for row in rhs:
        row_of.setdefault(row, len(row_of))
    ncols = len(col_of)
    for row, v in rhs.items():
        entries.setdefault(row_of[row], {})[ncols] = v
    matrix = DomainMatrix(entries, (len(row_of), ncols + 1), QQ_I)
    reduced, pivots = matrix.rref()
    if ncols in pivots:
        raise AnsatzExhausted(
            f"no polynomial solution within the degree budget at t-order {label[0]}, "
            f"hbar^{label[1]}, phase monomial q^{label[2]} p^{label[3]}",
            system={"rows": len(row_of), "cols": ncols})
    rows = reduced.to_sdm()
    inverse_cols = {col: key for key, col in col_of.items()}
    solution = {}
    for i, col in enumerate(pivots):
        value = rows.get(i, {}).get(ncols)
        if value:
            solution[inverse_cols[col]] = value
    return solution


def underline_defect(tf, psi_under):
    """(M_(w) Psi_, M_(z) Psi_) with M_(alpha) = zeta^{-1} M_alpha."""
    check_chart(psi_under, "infinity")
    return tuple(lax_apply(tf, a, psi_under).times_lambda(-1) for a in UNBARRED)


# ---------------------------------------------------------------------------
# transition function and dressing
# ---------------------------------------------------------------------------

@dataclass
class TransitionReport:
    H: object
    constant: bool
    max_defect: float


def _require_group(psi, label):
    if not psi.is_group_like():
        raise NotInGroup(f"{label} does not have free element 1")


def transition_function(psi, psi_under, bg, nodes=None, tol=1e-10):
    """H = Psi_^{-1} * Psi and its twistor-constancy check (exact if nodes is None)."""
    _require_group(psi, "Psi")
    _require_group(psi_under, "Psi_")
    H = psi_under.inverse().star(psi)
    if nodes is None:
        defects = [ell_apply(bg, FORMAL, a, H) for a in UNBARRED]
        constant = all(d.is_zero() for d in defects)
        return TransitionReport(H, constant, 0.0 if constant else max(d.norm() for d in defects))
    nodes = np.asarray(nodes, dtype=complex)
    values = H.evaluate(nodes)
    defects = [ell_apply(bg, nodes, a, values) for a in UNBARRED]
    worst = max(d.norm() for d in defects)
    return TransitionReport(ContourSeries(values, nodes, "off"), worst <= tol, worst)


def dressing_extract(psi, phi, bg, depth=None):
    """F = Psi^{-1} * Phi * Psi to lambda-order depth, with its twistor-constancy check."""
    _require_group(psi, "Psi")
    check_chart(psi, "origin")
    phi = _as_spectral(phi)
    depth = min(psi.max_power(), phi.max_power()) if depth is None else depth
    F = psi.inverse(hi=depth).star(phi, hi=depth).star(psi, hi=depth)
    constant = True
    for a in UNBARRED:
        d = ell_apply(bg, FORMAL, a, F)
        if any(not d.coefficient(j).is_zero() for j in range(depth + 1)):
            constant = False
    return F, constant


# ---------------------------------------------------------------------------
# hidden symmetries
# ---------------------------------------------------------------------------

def _spec(spec, tf, chart=None):
    theta = tf.theta
    if spec is None or spec == 0:
        return SpectralSeries({}, "annulus", theta.like({}))
    return spectral_from_spec(spec, tf.background, theta.t_max, theta.k_max, chart)


def _residue_origin(psi, F, depth):
    return psi.star(F, hi=1).star(psi.inverse(hi=depth), hi=1).coefficient(1)


def _residue_infinity(psi_under, F, depth):
    return psi_under.star(F, lo=1).star(psi_under.inverse(lo=-depth), lo=1).coefficient(1)


def symmetry_delta(tf, F_spec, F_under_spec=None, contour=None, psi=None, psi_under=None,
                   method="residue", check=True, tol=None, degree_budget=None):
    """delta Theta = (1/2 pi i) contour integral of dlam/lam^2 (-Psi F Psi^{-1} + Psi_ F_ Psi_^{-1})."""
    F = _spec(F_spec, tf)
    Fu = _spec(F_under_spec, tf)
    template = tf.theta.like({})
    delta = template
    need_origin = max(0, 1 - F.min_power()) if not F.is_zero() else 0
    need_inf = max(0, Fu.max_power() - 1) if not Fu.is_zero() else 0
    if not F.is_zero():
        if psi is None:
            psi = wavefunction(tf, need_origin)
    if not Fu.is_zero() and psi_under is None:
        budget = degree_budget if degree_budget is not None else 2 * tf.theta.t_max + 2
        psi_under = solve_underline_wavefunction(tf, budget, need_inf)

    if method == "residue":
        if not F.is_zero():
            delta = delta - _residue_origin(psi, F, need_origin)
        if not Fu.is_zero():
            delta = delta + _residue_infinity(psi_under, Fu, need_inf)
    elif method == "quadrature":
        contour = contour or Contour(64)
        if not isinstance(contour, Contour):
            raise ContourSingularity("quadrature needs a Contour")
        nodes = contour.nodes
        integrand = None
        if not F.is_zero():
            full = psi.star(F).star(psi.inverse(hi=need_origin))
            integrand = (-full).evaluate(nodes)
        if not Fu.is_zero():
            full = psi_under.star(Fu).star(psi_under.inverse(lo=-need_inf))
            part = full.evaluate(nodes)
            integrand = part if integrand is None else integrand + part
        if integrand is None:
            return template
        delta = integrand.map_coefficients(
            lambda c: RingElement(Poly({e: complex(np.mean(v / nodes)) for e, v in c.num.terms.items()}),
                                  c.den, _reduced=True))
        delta = _chop(delta)
    else:
        raise ValueError("method must be 'residue' or 'quadrature'")
    if check:
        residual = lme_residual(tf, delta)
        ok = residual.is_zero() if tol is None else residual.norm() <= tol
        assert ok, "symmetry_delta output fails the linearised master equation"
    return delta


def _chop(series, eps=1e-13):
    def clean(c):
        num = Poly({e: v for e, v in c.num.terms.items() if abs(v) > eps})
        return RingElement(num, c.den, _reduced=True) if not num.is_zero else RingElement(num)

    return series.map_coefficients(clean)


def spec_bracket(tf, F1, F2):
    """Star bracket of two twistor functions as lambda-series."""
    a, b = _spec(F1, tf), _spec(F2, tf)
    if a.is_zero() or b.is_zero():
        return SpectralSeries({}, "annulus", tf.theta.like({}))
    return a.bracket(b)


def symmetry_bracket_check(tf, F1, Fu1, F2, Fu2, order=2, degree_budget=None):
    """Compare [delta_1, delta_2] Theta with delta_{{F1,F2},{F1_,F2_}} Theta through t^order."""
    bg = tf.background
    theta = tf.theta.retruncate(t_max=order)
    base = ThetaField(theta, bg)

    def delta(field, Fa, Fua, **kw):
        return symmetry_delta(field, _spec(Fa, field) if Fa is not None else None,
                              _spec(Fua, field) if Fua is not None else None,
                              check=False, degree_budget=degree_budget, **kw)

    d1 = delta(base, F1, Fu1)
    d2 = delta(base, F2, Fu2)

    def shifted(Fa, Fua, shift):
        # Psi of Theta + shift is only needed through t^(order-1) because F is O(t)
        low = ThetaField((theta + shift).retruncate(t_max=order - 1), bg)
        F = _spec(Fa, base)
        Fu = _spec(Fua, base)
        kw = {}
        if not F.is_zero():
            depth = max(0, 1 - F.min_power())
            kw["psi"] = wavefunction(low, depth).retruncate(t_max=order)
        if not Fu.is_zero():
            depth = max(0, Fu.max_power() - 1)
            budget = degree_budget if degree_budget is not None else 2 * order + 2
            kw["psi_under"] = solve_underline_wavefunction(low, budget, depth).retruncate(t_max=order)
        return symmetry_delta(ThetaField(theta + shift, bg), F, Fu, check=False, **kw)

    commutator = shifted(F1, Fu1, d2) - d1 - shifted(F2, Fu2, d1) + d2
    bracket = delta(base, spec_bracket(base, F1, F2), spec_bracket(base, Fu1, Fu2))
    difference = commutator - bracket
    return {
        "commutator": commutator,
        "bracket": bracket,
        "difference": difference,
        "agree": difference.is_zero(),
        "order": order,
    }


__all__ = [
    "ell_apply", "null_check", "lax_apply", "lax_defect", "LaxDefect", "assemble_wavefunction",
    "wavefunction", "solve_underline_wavefunction", "underline_defect", "transition_function",
    "dressing_extract", "symmetry_delta", "symmetry_bracket_check", "spec_bracket", "FORMAL",
]
