"""Complexified Kähler backgrounds in coordinates (w, z, wt, zt)."""

from dataclasses import dataclass, field

from .errors import SingularBackground
from .ring import RING_ZERO, RingElement

UNBARRED = ("w", "z")
BARRED = ("wt", "zt")
COORDS = UNBARRED + BARRED

# eps_{ab} = eps^{ab} = [[0, 1], [-1, 0]], same for tilde indices
_EPS = {("w", "z"): 1, ("z", "w"): -1, ("wt", "zt"): 1, ("zt", "wt"): -1}


def eps(a, b):
    return _EPS.get((a, b), 0)


def _check_eps_convention():
    # eps_{ab} eps^{cb} = delta_a^c
    for a in UNBARRED:
        for c in UNBARRED:
            s = sum(eps(a, b) * eps(c, b) for b in UNBARRED)
            assert s == (1 if a == c else 0)


_check_eps_convention()


def partner(alpha):
    """The other unbarred (or barred) index."""
    return {"w": "z", "z": "w", "wt": "zt", "zt": "wt"}[alpha]


@dataclass(frozen=True, eq=False)
class KahlerBackground:
    potential: RingElement
    G: RingElement
    Gt: RingElement
    metric: dict
    inverse: dict
    det: RingElement
    heavenly: bool
    darboux: tuple = None
    name: str = "custom"
    _cache: dict = field(default_factory=dict, repr=False)

    def g(self, alpha, beta_t):
        """Lower metric g_{alpha beta~}."""
        return self.metric[(alpha, beta_t)]

    def ginv(self, beta_t, alpha):
        """Inverse metric g^{beta~ alpha}."""
        return self.inverse[(beta_t, alpha)]

    def G_ginv(self, beta_t, alpha):
        """G * g^{beta~ alpha}, the combination appearing in the twistor fields."""
        key = ("G_ginv", beta_t, alpha)
        if key not in self._cache:
            self._cache[key] = self.G * self.ginv(beta_t, alpha)
        return self._cache[key]

    def inv_G(self):
        if "inv_G" not in self._cache:
            self._cache["inv_G"] = _reciprocal(self.G)
        return self._cache["inv_G"]

    def log_det_derivative(self, name):
        """g,_name / g as a rational function."""
        key = ("dlog", name)
        if key not in self._cache:
            self._cache[key] = self.det.diff(name) / self.det
        return self._cache[key]

    def __repr__(self):
        return f"KahlerBackground({self.name}, heavenly={self.heavenly})"


def _reciprocal(f):
    return RingElement(f.den, f.num)


def build_background(potential, G, Gt, darboux=None, name="custom"):
    """Metric, inverse, determinant and heavenly flag from a Kähler potential."""
    potential, G, Gt = (_ring(x) for x in (potential, G, Gt))
    for label, f in (("potential", potential), ("G", G), ("Gt", Gt)):
        if not f.is_phase_free():
            raise ValueError(f"{label} must not depend on (q, p)")
    if G.is_zero or Gt.is_zero:
        raise SingularBackground("G and Gt must be nonzero")
    if any(G.depends_on(v) for v in BARRED):
        raise ValueError("G may depend on (w, z) only")
    if any(Gt.depends_on(v) for v in UNBARRED):
        raise ValueError("Gt may depend on (wt, zt) only")

    metric = {(a, b): potential.diff(a).diff(b) for a in UNBARRED for b in BARRED}
    det = metric[("w", "wt")] * metric[("z", "zt")] - metric[("w", "zt")] * metric[("z", "wt")]
    if det.is_zero:
        raise SingularBackground("det g vanishes identically")
    inv_det = _reciprocal(det)
    inverse = {
        ("wt", "w"): metric[("z", "zt")] * inv_det,
        ("wt", "z"): -metric[("w", "zt")] * inv_det,
        ("zt", "w"): -metric[("z", "wt")] * inv_det,
        ("zt", "z"): metric[("w", "wt")] * inv_det,
    }
    heavenly = (det - G * Gt).is_zero
    return KahlerBackground(potential, G, Gt, metric, inverse, det, heavenly, darboux, name)


def _ring(x):
    if isinstance(x, RingElement):
        return x
    return RingElement.from_expr(x)


def flat_background():
    """K = w wt + z zt with G = Gt = 1; twistor coordinates P^w = wt - lam z, P^z = zt + lam w."""
    darboux = ({0: _ring("wt"), 1: _ring("-z")}, {0: _ring("zt"), 1: _ring("w")})
    return build_background("w*wt + z*zt", "1", "1", darboux=darboux, name="flat")


def cubic_background():
    """K = (w + w^3) wt + z zt, heavenly with G = 1 + 3 w^2."""
    darboux = ({0: _ring("wt"), 1: _ring("-z")}, {0: _ring("zt"), 1: _ring("w + w**3")})
    return build_background("(w + w**3)*wt + z*zt", "1 + 3*w**2", "1", darboux=darboux, name="cubic")


BUILTIN_BACKGROUNDS = {"flat": flat_background, "cubic": cubic_background}


# ---------------------------------------------------------------------------
# anti-self-dual basis
# ---------------------------------------------------------------------------

_PAIRS = [(i, j) for i in range(4) for j in range(i + 1, 4)]


def _two_form(entries):
    """entries keyed by coordinate-name pairs -> antisymmetric dict on index pairs i<j."""
    out = {pair: RING_ZERO for pair in _PAIRS}
    for (a, b), value in entries.items():
        i, j = COORDS.index(a), COORDS.index(b)
        if i < j:
            out[(i, j)] = out[(i, j)] + value
        else:
            out[(j, i)] = out[(j, i)] - value
    return out


def omega_form(bg):
    """Omega = g_{alpha beta~} dz^alpha ^ dz^beta~."""
    return _two_form({(a, b): bg.g(a, b) for a in UNBARRED for b in BARRED})


def sigma_family(bg, omega=None):
    """Coefficients [lam^0, lam^1, lam^2] of Sigma(lam) = Gt dwt^dzt - lam Omega + lam^2 G dw^dz."""
    omega = omega_form(bg) if omega is None else omega
    s0 = _two_form({("wt", "zt"): bg.Gt})
    s1 = {pair: -value for pair, value in omega.items()}
    s2 = _two_form({("w", "z"): bg.G})
    return [s0, s1, s2]


def exterior_derivative(form):
    """d of a 2-form; returns 3-form components keyed by i<j<k."""
    out = {}
    for i in range(4):
        for j in range(i + 1, 4):
            for k in range(j + 1, 4):
                out[(i, j, k)] = (form[(j, k)].diff(COORDS[i]) - form[(i, k)].diff(COORDS[j])
                                  + form[(i, j)].diff(COORDS[k]))
    return out


def wedge(a, b):
    """Single component of the 4-form a ^ b on coordinates (w, z, wt, zt)."""
    return (a[(0, 1)] * b[(2, 3)] - a[(0, 2)] * b[(1, 3)] + a[(0, 3)] * b[(1, 2)]
            + a[(1, 2)] * b[(0, 3)] - a[(1, 3)] * b[(0, 2)] + a[(2, 3)] * b[(0, 1)])


def verify_asd_basis(bg, omega=None):
    """Closure and degeneracy of Sigma(lam), power by power in lam.

    ``omega`` overrides the middle form (used for negative controls).
    """
    sigma = sigma_family(bg, omega)
    report = {"closed": {}, "degenerate": {}, "witness": {}}
    for n, form in enumerate(sigma):
        d = exterior_derivative(form)
        bad = {str(key): repr(v) for key, v in d.items() if not v.is_zero}
        report["closed"][n] = not bad
        if bad:
            report["witness"][f"d_lam{n}"] = bad
    for n in range(5):
        total = RING_ZERO
        for i in range(3):
            j = n - i
            if 0 <= j <= 2:
                total = total + wedge(sigma[i], sigma[j])
        report["degenerate"][n] = total.is_zero
        if not total.is_zero:
            report["witness"][f"wedge_lam{n}"] = repr(total)
    report["passed"] = all(report["closed"].values()) and all(report["degenerate"].values())
    return report


def corrupt_omega(bg, alpha="w", beta_t="wt"):
    """Omega with one metric component sign-flipped.

    Flipping the whole of Omega leaves Sigma ^ Sigma untouched (it only enters
    quadratically or against itself), so the negative control flips a single entry.
    """
    entries = {(a, b): bg.g(a, b) for a in UNBARRED for b in BARRED}
    entries[(alpha, beta_t)] = -entries[(alpha, beta_t)]
    return _two_form(entries)
