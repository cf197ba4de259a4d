"""Master equation on heavenly backgrounds, its linearisation, and the two charge towers."""

from dataclasses import dataclass, field

from .background import BARRED, UNBARRED, eps
from .errors import (
    GradingViolation,
    NonCompatibleOneForm,
    NonPolynomialIntegrand,
    NotInAlgebraQ,
    SeedRejected,
)
from .ring import RingElement
from .star import free_element, star_bracket, star_multiply

CONVENTION = "drop-wz-free"


@dataclass(frozen=True, eq=False)
class ThetaField:
    theta: object
    background: object
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not free_element(self.theta).is_zero():
            raise NotInAlgebraQ("Theta must have zero free element")
        if not self.background.heavenly:
            raise ValueError("Theta fields live on heavenly backgrounds only")

    def d(self, alpha):
        key = ("d", alpha)
        if key not in self._cache:
            self._cache[key] = self.theta.diff(alpha)
        return self._cache[key]

    def d_over_ihbar(self, alpha):
        """(1/i hbar) d_alpha Theta; requires Theta to sit one hbar-step above the grading floor."""
        key = ("d/ih", alpha)
        if key not in self._cache:
            d = self.d(alpha)
            offset = d.min_k_offset()
            if offset is not None and offset < 1:
                raise GradingViolation("(1/i hbar) d Theta leaves the algebra: need k >= -m + 1 in Theta")
            self._cache[key] = d.div_ihbar()
        return self._cache[key]


def _small(series, tol):
    if tol is None:
        return series.is_zero()
    return series.norm() <= tol


def wave(bg, f):
    """g^{b~a} d_b~ d_a f."""
    total = f.like({})
    for a in UNBARRED:
        fa = f.diff(a)
        for b in BARRED:
            gi = bg.ginv(b, a)
            if not gi.is_zero:
                total = total + fa.diff(b).times_function(gi)
    return total


def _over_G(bg, s):
    return s.times_function(bg.inv_G())


def me_bracket_term(tf):
    """(1/2G) eps^{ab} {d_a Theta, d_b Theta} = (1/G) {Theta_w, Theta_z}."""
    return _over_G(tf.background, star_bracket(tf.d("w"), tf.d("z")))


def me_residual(tf):
    return wave(tf.background, tf.theta) + me_bracket_term(tf)


def star_me_residual(tf):
    """Same residual with the bracket written through star products: (1/(i hbar G)) eps^{ab} Theta_a * Theta_b."""
    tw, tz = tf.d("w"), tf.d("z")
    prod = star_multiply(tf.d_over_ihbar("w"), tz) - star_multiply(tf.d_over_ihbar("z"), tw)
    return wave(tf.background, tf.theta) + _over_G(tf.background, prod)


def lme_residual(tf, phi):
    bracket = star_bracket(tf.d("w"), phi.diff("z")) - star_bracket(tf.d("z"), phi.diff("w"))
    return wave(tf.background, phi) + _over_G(tf.background, bracket)


def _dolbeault(bg, alpha, f):
    total = f.like({})
    for b in BARRED:
        gi = bg.ginv(b, alpha)
        if not gi.is_zero:
            total = total + f.diff(b).times_function(gi)
    return total


def apply_L(tf, alpha, f):
    """L^a f = g^{b~a} d_b~ f + (eps^{ba}/G) {d_b Theta, f}."""
    bg = tf.background
    total = _dolbeault(bg, alpha, f)
    for beta in UNBARRED:
        e = eps(beta, alpha)
        if e:
            total = total + _over_G(bg, star_bracket(tf.d(beta), f)).scale(e)
    return total


def apply_D(tf, alpha, f):
    """D^a f = g^{b~a} d_b~ f + (1/i hbar)(eps^{ba}/G) d_b Theta * f."""
    bg = tf.background
    total = _dolbeault(bg, alpha, f)
    for beta in UNBARRED:
        e = eps(beta, alpha)
        if e:
            total = total + _over_G(bg, star_multiply(tf.d_over_ihbar(beta), f)).scale(e)
    return total


def _op(kind):
    if kind == "L":
        return apply_L
    if kind == "D":
        return apply_D
    raise ValueError(f"kind must be 'L' or 'D', got {kind!r}")


def linear_constraint(tf, kind, c):
    """op^a d_a c: the LME for kind L, the second linear equation for kind D."""
    op = _op(kind)
    return op(tf, "w", c.diff("w")) + op(tf, "z", c.diff("z"))


def current_divergence(tf, kind, c):
    """d_a (G op^a c), the density form of the conservation law."""
    op = _op(kind)
    G = tf.background.G
    return (op(tf, "w", c).times_function(G).diff("w")
            + op(tf, "z", c).times_function(G).diff("z"))


def _integrate_coefficient(c, name):
    if c.den.depends_on(name):
        raise NonPolynomialIntegrand(f"denominator depends on {name}: {c!r}")
    return RingElement(c.num.integrate(name), c.den, _reduced=True)


def _drop_w(c):
    num = c.num.filter(lambda e: e[2] == 0)
    return RingElement(num, c.den) if not num.is_zero else RingElement(num)


def integrate_alpha(V_w, V_z, tol=None):
    """phi with d_w phi = V_w, d_z phi = V_z; monomials free of both w and z are set to zero.

    ``tol`` switches the compatibility test to a norm bound (float mode).
    """
    curl = V_z.diff("w") - V_w.diff("z")
    if not _small(curl, tol):
        raise NonCompatibleOneForm("d_w V_z - d_z V_w does not vanish", witness=curl)
    phi = V_w.map_coefficients(lambda c: _integrate_coefficient(c, "w"))
    rest = V_z - phi.diff("z")
    if tol is None:
        if any(c.depends_on("w") for c in rest.terms.values()):
            raise NonCompatibleOneForm("residual z-component still depends on w", witness=rest)
    else:
        rest = rest.map_coefficients(_drop_w)
    return phi + rest.map_coefficients(lambda c: _integrate_coefficient(c, "z"))


@dataclass
class ChargeTower:
    members: list
    kind: str
    theta: ThetaField
    convention: str = CONVENTION

    def __len__(self):
        return len(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def check(self, tol=None):
        """Re-run the defining equations; returns per-member booleans."""
        ok_linear = [_small(linear_constraint(self.theta, self.kind, c), tol) for c in self.members]
        ok_steps = []
        for prev, nxt in zip(self.members, self.members[1:]):
            rhs_w, rhs_z = recursion_rhs(self.theta, self.kind, prev)
            ok_steps.append(_small(nxt.diff("w") - rhs_w, tol) and _small(nxt.diff("z") - rhs_z, tol))
        return {"linear": ok_linear, "recursion": ok_steps}


def recursion_rhs(tf, kind, c):
    """(G eps_{wb} op^b c, G eps_{zb} op^b c) = (G op^z c, -G op^w c)."""
    op = _op(kind)
    G = tf.background.G
    return op(tf, "z", c).times_function(G), -op(tf, "w", c).times_function(G)


def hierarchy_step(tf, kind, c, tol=None):
    rhs_w, rhs_z = recursion_rhs(tf, kind, c)
    return integrate_alpha(rhs_w, rhs_z, tol)


def hierarchy_generate(tf, kind, seed, depth, tol=None):
    """Tower [seed, c_1, ..., c_depth]; each member is checked against its linear equation."""
    _op(kind)
    if not _small(linear_constraint(tf, kind, seed), tol):
        raise SeedRejected(f"seed does not satisfy the {kind}-linear equation")
    members = [seed]
    for _ in range(depth):
        nxt = hierarchy_step(tf, kind, members[-1], tol)
        assert _small(linear_constraint(tf, kind, nxt), tol), "tower member fails its linear equation"
        members.append(nxt)
    return ChargeTower(members, kind, tf)


def master_residual_density(Xi, bg):
    """g^{a~b} nabla_a~ nabla_b Xi + (1/2g) eps^{ab} {nabla_a Xi, nabla_b Xi}, nabla_a~ X = d_a~ X - (g,_a~/g) X."""
    total = Xi.like({})
    for b in UNBARRED:
        Xb = Xi.diff(b)
        for a in BARRED:
            gi = bg.ginv(a, b)
            if gi.is_zero:
                continue
            nabla = Xb.diff(a) - Xb.times_function(bg.log_det_derivative(a))
            total = total + nabla.times_function(gi)
    inv_det = RingElement(bg.det.den, bg.det.num)
    return total + star_bracket(Xi.diff("w"), Xi.diff("z")).times_function(inv_det)


def theta_star(t_max=3, k_max=None):
    """Canonical exact solution t (q w + p z) - t^2 w wt on the flat background."""
    from .star import GradedSeries

    k_max = t_max + 3 if k_max is None else k_max
    return GradedSeries.from_expr_terms([(1, 0, "q*w + p*z"), (2, 0, "-w*wt")], t_max, k_max)
