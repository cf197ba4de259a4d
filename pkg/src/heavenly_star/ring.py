"""Sparse multivariate polynomials and rational functions in (q, p, w, z, wt, zt).

Coefficients come in three flavours that never mix silently:

* exact Gaussian rationals (sympy ``QQ_I`` elements),
* complex doubles,
* complex numpy arrays, one entry per contour node (used by the Hilbert solver).

Mixing exact with inexact coefficients promotes the exact side to complex.
"""

from fractions import Fraction
from math import comb

import numpy as np
import sympy
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.rings import ring as _sympy_ring

VARIABLES = ("q", "p", "w", "z", "wt", "zt")
INDEX = {name: i for i, name in enumerate(VARIABLES)}
PHASE = ("q", "p")
BASE = ("w", "z", "wt", "zt")
NVARS = 6
ZERO_EXP = (0,) * NVARS

GaussianRational = QQ_I.dtype
ONE = QQ_I(1, 0)
IMAG = QQ_I(0, 1)

_SYMBOLS = sympy.symbols(VARIABLES)
_SYMPY_RING, *_ = _sympy_ring(",".join(VARIABLES), QQ_I)


def gaussian(re, im=0):
    """Exact scalar re + i*im from ints, Fractions, strings like '1/3' or mpq."""
    return QQ_I(_rational(re), _rational(im))


def _rational(x):
    if isinstance(x, str):
        x = Fraction(x)
    if isinstance(x, Fraction):
        return QQ(x.numerator, x.denominator)
    if isinstance(x, float):
        raise TypeError("float given where an exact rational is required")
    return QQ.convert(x)


def is_exact_scalar(c):
    return isinstance(c, GaussianRational)


def to_complex(c):
    if isinstance(c, GaussianRational):
        return complex(float(c.x), float(c.y))
    return c


def scalar_abs(c):
    if isinstance(c, np.ndarray):
        return float(np.max(np.abs(c))) if c.size else 0.0
    return abs(to_complex(c))


def nonzero(c):
    if isinstance(c, np.ndarray):
        return bool(np.any(c))
    return bool(c)


def exact_power_of_i(n):
    return (ONE, IMAG, -ONE, -IMAG)[n % 4]


def from_sympy_scalar(value):
    return QQ_I.from_sympy(sympy.nsimplify(value) if isinstance(value, sympy.Float) else value)


class Poly:
    """Sparse polynomial: dict exponent-tuple -> coefficient, zero entries never stored."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = terms if terms is not None else {}

    # construction ---------------------------------------------------------
    @classmethod
    def constant(cls, c):
        return cls({ZERO_EXP: c}) if nonzero(c) else cls()

    @classmethod
    def variable(cls, name, power=1):
        e = [0] * NVARS
        e[INDEX[name]] = power
        return cls({tuple(e): ONE})

    @classmethod
    def from_dict(cls, terms):
        return cls({tuple(e): c for e, c in terms.items() if nonzero(c)})

    @classmethod
    def from_expr(cls, expr):
        expr = sympy.sympify(expr, locals={v: s for v, s in zip(VARIABLES, _SYMBOLS)})
        expr = sympy.expand(expr)
        if expr == 0:
            return cls()
        sp = sympy.Poly(expr, *_SYMBOLS)
        out = {}
        for exps, c in sp.terms():
            out[tuple(int(e) for e in exps)] = from_sympy_scalar(c)
        return cls(out)

    # inspection -------------------------------------------------------------
    @property
    def is_zero(self):
        return not self.terms

    def kind(self):
        for c in self.terms.values():
            if isinstance(c, GaussianRational):
                return "exact"
            if isinstance(c, np.ndarray):
                return "array"
            return "float"
        return None

    def is_constant(self):
        return not self.terms or (len(self.terms) == 1 and ZERO_EXP in self.terms)

    def constant_term(self):
        return self.terms.get(ZERO_EXP)

    def phase_degree(self):
        return max((e[0] + e[1] for e in self.terms), default=0)

    def degree(self, name=None):
        if name is None:
            return max((sum(e) for e in self.terms), default=0)
        i = INDEX[name]
        return max((e[i] for e in self.terms), default=0)

    def depends_on(self, name):
        i = INDEX[name]
        return any(e[i] for e in self.terms)

    def is_phase_free(self):
        return all(e[0] == 0 and e[1] == 0 for e in self.terms)

    def leading(self):
        """(exponent, coefficient) of the grlex-largest monomial."""
        e = max(self.terms, key=monomial_key)
        return e, self.terms[e]

    def norm(self):
        return max((scalar_abs(c) for c in self.terms.values()), default=0.0)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        if self.terms.keys() != other.terms.keys():
            return False
        for e, c in self.terms.items():
            d = other.terms[e]
            if isinstance(c, np.ndarray) or isinstance(d, np.ndarray):
                if not np.array_equal(np.asarray(to_complex(c)), np.asarray(to_complex(d))):
                    return False
            elif type(c) is not type(d):
                if to_complex(c) != to_complex(d):
                    return False
            elif c != d:
                return False
        return True

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # coercion ---------------------------------------------------------------
    def to_float(self):
        return Poly({e: to_complex(c) for e, c in self.terms.items()})

    def _pair(self, other):
        ka, kb = self.kind(), other.kind()
        if ka == "exact" and kb not in (None, "exact"):
            return self.to_float(), other
        if kb == "exact" and ka not in (None, "exact"):
            return self, other.to_float()
        return self, other

    # arithmetic ---------------------------------------------------------------
    def __neg__(self):
        return Poly({e: -c for e, c in self.terms.items()})

    def __add__(self, other):
        a, b = self._pair(other)
        out = dict(a.terms)
        for e, c in b.terms.items():
            if e in out:
                s = out[e] + c
                if nonzero(s):
                    out[e] = s
                else:
                    del out[e]
            else:
                out[e] = c
        return Poly(out)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        a, b = self._pair(other)
        out = {}
        for ea, ca in a.terms.items():
            for eb, cb in b.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = out[e] + ca * cb if e in out else ca * cb
        return Poly({e: c for e, c in out.items() if nonzero(c)})

    def scale(self, c):
        kind = self.kind()
        if kind not in (None, "exact") and isinstance(c, GaussianRational):
            c = to_complex(c)
        elif kind == "exact" and not isinstance(c, (GaussianRational, int)):
            return self.to_float().scale(c)
        out = {}
        for e, x in self.terms.items():
            y = x * c
            if nonzero(y):
                out[e] = y
        return Poly(out)

    def diff(self, name, order=1):
        i = INDEX[name]
        out = {}
        for e, c in self.terms.items():
            n = e[i]
            if n < order:
                continue
            f = 1
            for j in range(order):
                f *= n - j
            ne = e[:i] + (n - order,) + e[i + 1:]
            out[ne] = c * f
        return Poly(out)

    def integrate(self, name):
        """Antiderivative in one variable with zero constant of integration."""
        i = INDEX[name]
        out = {}
        for e, c in self.terms.items():
            n = e[i] + 1
            ne = e[:i] + (n,) + e[i + 1:]
            out[ne] = c / n if isinstance(c, GaussianRational) else c * (1.0 / n)
        return Poly(out)

    def filter(self, keep):
        return Poly({e: c for e, c in self.terms.items() if keep(e)})

    def substitute_monomials(self, fn):
        """Map each monomial through fn(e) -> new exponent (for variable renames)."""
        out = {}
        for e, c in self.terms.items():
            ne = fn(e)
            out[ne] = out[ne] + c if ne in out else c
        return Poly({e: c for e, c in out.items() if nonzero(c)})

    # conversion -------------------------------------------------------------
    def to_sympy_ring(self):
        return _SYMPY_RING.from_dict(dict(self.terms))

    @classmethod
    def from_sympy_ring(cls, element):
        return cls({tuple(e): c for e, c in element.items() if c})

    def to_expr(self):
        total = sympy.Integer(0)
        for e, c in sorted(self.terms.items(), key=lambda t: monomial_key(t[0])):
            if isinstance(c, GaussianRational):
                coeff = QQ_I.to_sympy(c)
            elif isinstance(c, np.ndarray):
                coeff = sympy.Symbol("<array>")
            else:
                coeff = sympy.sympify(c)
            mono = sympy.Integer(1)
            for s, n in zip(_SYMBOLS, e):
                mono *= s ** n
            total += coeff * mono
        return total

    def __repr__(self):
        return f"Poly({self.to_expr()})"


def monomial_key(e):
    """Graded lexicographic order on (q, p, w, z, wt, zt)."""
    return (sum(e), e)


class RingElement:
    """Reduced fraction num/den with den a monic polynomial in the base variables."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _reduced=False):
        if den is None:
            den = _ONE_POLY
        if den.is_zero:
            raise ZeroDivisionError("zero denominator")
        if not _reduced:
            if not all(e[0] == 0 and e[1] == 0 for e in den.terms):
                raise ValueError("denominator may only depend on (w, z, wt, zt)")
            num, den = _reduce(num, den)
        self.num = num
        self.den = den

    # construction -------------------------------------------------------------
    @classmethod
    def from_poly(cls, poly):
        return cls(poly, _ONE_POLY, _reduced=True)

    @classmethod
    def constant(cls, c):
        return cls(Poly.constant(c), _ONE_POLY, _reduced=True)

    @classmethod
    def variable(cls, name, power=1):
        return cls(Poly.variable(name, power), _ONE_POLY, _reduced=True)

    @classmethod
    def from_expr(cls, expr):
        expr = sympy.sympify(expr, locals={v: s for v, s in zip(VARIABLES, _SYMBOLS)})
        num, den = sympy.fraction(sympy.together(expr))
        return cls(Poly.from_expr(num), Poly.from_expr(den))

    # inspection ---------------------------------------------------------------
    @property
    def is_zero(self):
        return self.num.is_zero

    @property
    def is_polynomial(self):
        return self.den is _ONE_POLY or self.den.is_constant()

    def kind(self):
        return self.num.kind()

    def norm(self):
        if not self.is_polynomial:
            raise ValueError("norm is defined for polynomial coefficients only")
        return self.num.norm()

    def phase_degree(self):
        return self.num.phase_degree()

    def is_phase_free(self):
        return self.num.is_phase_free()

    def depends_on(self, name):
        return self.num.depends_on(name) or self.den.depends_on(name)

    def __eq__(self, other):
        if isinstance(other, (int, GaussianRational)):
            other = RingElement.constant(QQ_I.convert(other) if isinstance(other, int) else other)
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def to_float(self):
        return RingElement(self.num.to_float(), self.den.to_float(), _reduced=True)

    # arithmetic ---------------------------------------------------------------
    def __neg__(self):
        return RingElement(-self.num, self.den, _reduced=True)

    def __add__(self, other):
        if not isinstance(other, RingElement):
            other = RingElement.constant(other)
        if self.den is _ONE_POLY and other.den is _ONE_POLY:
            return RingElement(self.num + other.num, _ONE_POLY, _reduced=True)
        if self.den == other.den:
            return RingElement(self.num + other.num, self.den)
        return RingElement(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other):
        if not isinstance(other, RingElement):
            other = RingElement.constant(other)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, RingElement):
            return RingElement(self.num.scale(other), self.den, _reduced=True)
        if self.den is _ONE_POLY and other.den is _ONE_POLY:
            return RingElement(self.num * other.num, _ONE_POLY, _reduced=True)
        return RingElement(self.num * other.num, self.den * other.den)

    def __truediv__(self, other):
        if not isinstance(other, RingElement):
            inv = 1 / to_complex(other) if not isinstance(other, GaussianRational) else ONE / other
            return RingElement(self.num.scale(inv), self.den, _reduced=True)
        if not other.num.is_phase_free():
            raise ValueError("division only by functions of the base variables")
        return RingElement(self.num * other.den, self.den * other.num)

    def scale(self, c):
        return RingElement(self.num.scale(c), self.den, _reduced=True)

    def diff(self, name):
        if self.den is _ONE_POLY:
            return RingElement(self.num.diff(name), _ONE_POLY, _reduced=True)
        if name in PHASE or not self.den.depends_on(name):
            return RingElement(self.num.diff(name), self.den)
        num = self.num.diff(name) * self.den - self.num * self.den.diff(name)
        return RingElement(num, self.den * self.den)

    def __repr__(self):
        if self.den is _ONE_POLY:
            return f"RingElement({self.num.to_expr()})"
        return f"RingElement(({self.num.to_expr()})/({self.den.to_expr()}))"


_ONE_POLY = Poly({ZERO_EXP: ONE})


def _reduce(num, den):
    """Cancel common factors and make the denominator monic under grlex."""
    if num.is_zero:
        return Poly(), _ONE_POLY
    if den.is_constant():
        c = den.constant_term()
        if isinstance(c, GaussianRational) and c == ONE:
            return num, _ONE_POLY
        inv = ONE / c if isinstance(c, GaussianRational) else 1 / c
        return num.scale(inv), _ONE_POLY
    if num.kind() == "exact" and den.kind() == "exact":
        _, n, d = num.to_sympy_ring().cofactors(den.to_sympy_ring())
        num, den = Poly.from_sympy_ring(n), Poly.from_sympy_ring(d)
    if den.is_constant():
        return _reduce(num, den)
    _, lc = den.leading()
    inv = ONE / lc if isinstance(lc, GaussianRational) else 1 / lc
    if isinstance(lc, GaussianRational) and lc == ONE:
        return num, den
    return num.scale(inv), den.scale(inv)


def binomial(n, k):
    return comb(n, k) if 0 <= k <= n else 0


RING_ONE = RingElement.constant(ONE)
RING_ZERO = RingElement(Poly(), _ONE_POLY, _reduced=True)
