"""Connections with values in the algebra Q, curvature, gauge law and the SDYM equations."""

from dataclasses import dataclass

from .background import BARRED, COORDS, UNBARRED
from .errors import NotInAlgebraQ
from .star import (
    free_element,
    series_inverse,
    star_bracket,
    star_multiply,
)


@dataclass(frozen=True)
class ConnectionData:
    """Components A_w, A_z, A_wt, A_zt."""

    components: dict

    def __post_init__(self):
        series = list(self.components.values())
        if set(self.components) != set(COORDS):
            raise ValueError(f"connection needs components {COORDS}")
        for s in series[1:]:
            series[0].check_compatible(s)
        for name, s in self.components.items():
            if not free_element(s).is_zero():
                raise NotInAlgebraQ(f"A_{name} has a nonzero free element")

    @classmethod
    def from_components(cls, A_w, A_z, A_wt, A_zt):
        return cls({"w": A_w, "z": A_z, "wt": A_wt, "zt": A_zt})

    @classmethod
    def zero(cls, template):
        z = template.like({})
        return cls({c: z for c in COORDS})

    def __getitem__(self, name):
        return self.components[name]

    def norm(self):
        return max(s.norm() for s in self.components.values())


@dataclass(frozen=True)
class CurvatureData:
    """Upper triangle F_{ij}, i < j in the order (w, z, wt, zt)."""

    components: dict

    def __getitem__(self, pair):
        i, j = pair
        if (i, j) in self.components:
            return self.components[(i, j)]
        return -self.components[(j, i)]

    def is_zero(self):
        return all(s.is_zero() for s in self.components.values())


def _pairs():
    return [(COORDS[i], COORDS[j]) for i in range(4) for j in range(i + 1, 4)]


def field_strength(A, i, j):
    return A[j].diff(i) - A[i].diff(j) + star_bracket(A[i], A[j])


def curvature(A):
    return CurvatureData({(i, j): field_strength(A, i, j) for i, j in _pairs()})


def sdym_residual(A, bg):
    """(F_wz, F_wt zt, g^{b~a} F_{a b~})."""
    first = field_strength(A, "w", "z")
    second = field_strength(A, "wt", "zt")
    third = first.like({})
    for a in UNBARRED:
        for b in BARRED:
            gi = bg.ginv(b, a)
            if gi.is_zero:
                continue
            third = third + field_strength(A, a, b).times_function(gi)
    return first, second, third


def gauge_transform(A, c):
    """A'_i = c*A_i*c^{-1} + i hbar c * d_i(c^{-1})."""
    c_inv = series_inverse(c)
    out = {}
    for name in COORDS:
        conj = star_multiply(star_multiply(c, A[name]), c_inv)
        out[name] = conj + star_multiply(c, c_inv.diff(name)).mul_ihbar()
    return ConnectionData(out)


def pure_gauge(a):
    """A_i = i hbar a^{-1} * d_i a (flat by construction)."""
    a_inv = series_inverse(a)
    return ConnectionData({name: star_multiply(a_inv, a.diff(name)).mul_ihbar() for name in COORDS})


def yang_residual(J, bg):
    """g^{b~a} d_a (J^{-1} * d_b~ J)."""
    J_inv = series_inverse(J)
    total = J.like({})
    for b in BARRED:
        current = star_multiply(J_inv, J.diff(b))
        for a in UNBARRED:
            gi = bg.ginv(b, a)
            if gi.is_zero:
                continue
            total = total + current.diff(a).times_function(gi)
    return total


def covariant_curl(A, F):
    """Components (DF)_{ijk} = cyclic sum of d_i F_jk + {A_i, F_jk}; zero by Bianchi."""
    out = {}
    for x in range(4):
        for y in range(x + 1, 4):
            for z in range(y + 1, 4):
                i, j, k = COORDS[x], COORDS[y], COORDS[z]
                total = None
                for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
                    term = F[(b, c)].diff(a) + star_bracket(A[a], F[(b, c)])
                    total = term if total is None else total + term
                out[(i, j, k)] = total
    return out
