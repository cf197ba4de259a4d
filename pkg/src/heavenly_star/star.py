"""The bigraded formal algebra: series in t and hbar with ring-valued coefficients.

A :class:`GradedSeries` stores terms t^m hbar^k c_{m,k} with 0 <= m <= t_max and
-m <= k <= k_max.  Products go through a pluggable :class:`StarProduct`; the only
shipped instance is Moyal on the (q, p) plane.
"""

import warnings
from functools import lru_cache
from math import comb, factorial

from .errors import (
    DegradedPrecision,
    GradingViolation,
    NotInAlgebraQ,
    NotInGroup,
    TruncationMismatch,
)
from .ring import (
    IMAG,
    RING_ONE,
    GaussianRational,
    Poly,
    RingElement,
    exact_power_of_i,
    gaussian,
    to_complex,
)


class StarProduct:
    """Bidifferential family Delta_n; subclasses override :meth:`delta_terms`."""

    name = "abstract"

    def delta_terms(self, f, g):
        """Return {n: Delta_n(f, g)} for polynomials f, g (Poly)."""
        raise NotImplementedError

    def commutator_terms(self, f, g):
        """{n: Delta_n(f,g) - Delta_n(g,f)}."""
        a = self.delta_terms(f, g)
        b = self.delta_terms(g, f)
        out = {}
        for n in set(a) | set(b):
            d = a.get(n, Poly()) - b.get(n, Poly())
            if not d.is_zero:
                out[n] = d
        return out


@lru_cache(maxsize=None)
def _moyal_table(qa, pa, qb, pb):
    """Integer weights W_n for the monomial pair q^qa p^pa, q^qb p^pb.

    Every j in the Moyal sum lowers both the q- and p-degree by n, so
    Delta_n = i^n W_n / 2^n * q^(qa+qb-n) p^(pa+pb-n).
    """
    rows = []
    for n in range(min(qa + pa, qb + pb) + 1):
        total = 0
        for j in range(n + 1):
            a = n - j
            if a > qa or j > pa or a > pb or j > qb:
                continue
            w = comb(qa, a) * comb(pb, a) * factorial(a) * comb(pa, j) * comb(qb, j) * factorial(j)
            total += -w if j % 2 else w
        if total:
            rows.append((n, total))
    return tuple(rows)


class Moyal(StarProduct):
    """Moyal product on the plane with canonical pair (q, p)."""

    name = "moyal"

    def delta_terms(self, f, g):
        f, g = f._pair(g)
        exact = f.kind() == "exact" and g.kind() == "exact"
        acc = {}
        for ea, ca in f.terms.items():
            qa, pa = ea[0], ea[1]
            for eb, cb in g.terms.items():
                qb, pb = eb[0], eb[1]
                table = _moyal_table(qa, pa, qb, pb)
                if not table:
                    continue
                cc = ca * cb
                base = (ea[2] + eb[2], ea[3] + eb[3], ea[4] + eb[4], ea[5] + eb[5])
                for n, w in table:
                    e = (qa + qb - n, pa + pb - n) + base
                    bucket = acc.setdefault(n, {})
                    term = cc * w
                    bucket[e] = bucket[e] + term if e in bucket else term
        out = {}
        for n, bucket in acc.items():
            if exact:
                factor = exact_power_of_i(n) / (2 ** n)
            else:
                factor = (1j ** n) / (2 ** n)
            poly = Poly.from_dict(bucket).scale(factor)
            if not poly.is_zero:
                out[n] = poly
        return out

    def commutator_terms(self, f, g):
        # Delta_n(g, f) = (-1)^n Delta_n(f, g) for Moyal
        return {n: d.scale(2) for n, d in self.delta_terms(f, g).items() if n % 2}


MOYAL = Moyal()


class GradedSeries:
    """Truncated element of the bigraded algebra."""

    __slots__ = ("terms", "t_max", "k_max", "product")

    def __init__(self, terms, t_max, k_max, product=MOYAL, _trusted=False):
        if not _trusted:
            clean = {}
            for (m, k), c in terms.items():
                if not isinstance(c, RingElement):
                    c = _as_ring(c)
                if c.is_zero:
                    continue
                if not (0 <= m <= t_max and -m <= k <= k_max):
                    raise GradingViolation(f"key (m={m}, k={k}) outside 0<=m<={t_max}, -m<=k<={k_max}")
                clean[(m, k)] = c
            terms = clean
        self.terms = terms
        self.t_max = t_max
        self.k_max = k_max
        self.product = product

    # construction -------------------------------------------------------------
    @classmethod
    def zero(cls, t_max, k_max, product=MOYAL):
        return cls({}, t_max, k_max, product, _trusted=True)

    @classmethod
    def one(cls, t_max, k_max, product=MOYAL):
        return cls({(0, 0): RING_ONE}, t_max, k_max, product, _trusted=True)

    @classmethod
    def monomial(cls, m, k, coeff, t_max, k_max, product=MOYAL):
        return cls({(m, k): coeff}, t_max, k_max, product)

    @classmethod
    def from_expr_terms(cls, pieces, t_max, k_max, product=MOYAL):
        """pieces: iterable of (m, k, expression-string)."""
        terms = {}
        for m, k, expr in pieces:
            c = RingElement.from_expr(expr)
            terms[(m, k)] = terms[(m, k)] + c if (m, k) in terms else c
        return cls(terms, t_max, k_max, product)

    def like(self, terms):
        return GradedSeries(terms, self.t_max, self.k_max, self.product, _trusted=True)

    # inspection ---------------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def keys(self):
        return sorted(self.terms)

    def __getitem__(self, key):
        return self.terms[key]

    def get(self, m, k):
        return self.terms.get((m, k))

    def kind(self):
        for c in self.terms.values():
            return c.kind()
        return None

    def norm(self):
        return max((c.norm() for c in self.terms.values()), default=0.0)

    def norms(self):
        return {key: c.norm() for key, c in sorted(self.terms.items())}

    def min_k_offset(self):
        """min over terms of k + m; the series lies in iħ^s-shifted A iff this is >= s."""
        return min((k + m for (m, k) in self.terms), default=None)

    def phase_degree(self):
        return max((c.phase_degree() for c in self.terms.values()), default=0)

    def is_phase_free(self):
        return all(c.is_phase_free() for c in self.terms.values())

    def __eq__(self, other):
        if not isinstance(other, GradedSeries):
            return NotImplemented
        return (self.t_max == other.t_max and self.k_max == other.k_max
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.t_max, self.k_max, frozenset(self.terms.items())))

    def __repr__(self):
        parts = [f"t^{m} hbar^{k} [{c}]" for (m, k), c in sorted(self.terms.items())]
        return f"GradedSeries(t_max={self.t_max}, k_max={self.k_max}: " + (" + ".join(parts) or "0") + ")"

    def check_compatible(self, other):
        if self.t_max != other.t_max or self.k_max != other.k_max:
            raise TruncationMismatch(
                f"(t_max, k_max) = ({self.t_max}, {self.k_max}) vs ({other.t_max}, {other.k_max})")
        if self.product is not other.product:
            raise TruncationMismatch("series use different star products")

    # linear structure ---------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, GradedSeries):
            return NotImplemented
        self.check_compatible(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            if key in out:
                s = out[key] + c
                if s.is_zero:
                    del out[key]
                else:
                    out[key] = s
            else:
                out[key] = c
        return self.like(out)

    def __neg__(self):
        return self.like({key: -c for key, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        """Multiply by a scalar (exact Gaussian rational, int or complex)."""
        out = {}
        for key, x in self.terms.items():
            y = x.scale(c)
            if not y.is_zero:
                out[key] = y
        return self.like(out)

    def __mul__(self, c):
        if isinstance(c, GradedSeries):
            raise TypeError("use star_multiply (or @) for the algebra product")
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return star_multiply(self, other)

    def times_function(self, f):
        """Pointwise product with a phase-free function of the base variables."""
        if not isinstance(f, RingElement):
            f = _as_ring(f)
        if not f.is_phase_free():
            raise ValueError("times_function expects a function of (w, z, wt, zt) only")
        out = {}
        for key, c in self.terms.items():
            y = c * f
            if not y.is_zero:
                out[key] = y
        return self.like(out)

    def diff(self, name):
        out = {}
        for key, c in self.terms.items():
            d = c.diff(name)
            if not d.is_zero:
                out[key] = d
        return self.like(out)

    def map_coefficients(self, fn):
        out = {}
        for key, c in self.terms.items():
            y = fn(c)
            if not y.is_zero:
                out[key] = y
        return self.like(out)

    # grading ------------------------------------------------------------------
    def t_slice(self, m):
        return self.like({key: c for key, c in self.terms.items() if key[0] == m})

    def t_part(self, lo, hi):
        return self.like({key: c for key, c in self.terms.items() if lo <= key[0] <= hi})

    def shift_hbar(self, s):
        """Multiply by hbar^s (no scalar factor)."""
        out = {}
        for (m, k), c in self.terms.items():
            nk = k + s
            if nk < -m:
                raise GradingViolation(f"hbar shift {s} moves ({m},{k}) below k=-m")
            if nk > self.k_max:
                _degraded(f"hbar shift {s} pushes ({m},{k}) above k_max={self.k_max}")
                continue
            out[(m, nk)] = c
        return self.like(out)

    def mul_ihbar(self):
        return self.shift_hbar(1).scale(_imag(self))

    def div_ihbar(self):
        return self.shift_hbar(-1).scale(-_imag(self))

    def shift_t(self, s):
        """Multiply by t^s, dropping anything above t_max."""
        out = {}
        for (m, k), c in self.terms.items():
            if m + s <= self.t_max:
                if k < -(m + s):
                    raise GradingViolation("t shift leaves the graded algebra")
                out[(m + s, k)] = c
        return self.like(out)

    def retruncate(self, t_max=None, k_max=None):
        t_max = self.t_max if t_max is None else t_max
        k_max = self.k_max if k_max is None else k_max
        out = {}
        for (m, k), c in self.terms.items():
            if m > t_max:
                continue
            if k > k_max:
                _degraded(f"retruncation to k_max={k_max} drops ({m},{k})")
                continue
            out[(m, k)] = c
        return GradedSeries(out, t_max, k_max, self.product, _trusted=True)

    def to_float(self):
        return self.like({key: c.to_float() for key, c in self.terms.items()})


def _imag(series):
    return IMAG if series.kind() in (None, "exact") else 1j


def _as_ring(c):
    if isinstance(c, RingElement):
        return c
    if isinstance(c, Poly):
        return RingElement.from_poly(c)
    if isinstance(c, int):
        return RingElement.constant(gaussian(c))
    if isinstance(c, str):
        return RingElement.from_expr(c)
    return RingElement.constant(c)


def _degraded(message):
    warnings.warn(DegradedPrecision(message), stacklevel=3)


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------

def _star_raw(a, b, k_ceiling, commutator=False):
    """Accumulate star products (or commutators) of all term pairs up to k_ceiling."""
    a.check_compatible(b)
    t_max = a.t_max
    product = a.product
    acc = {}
    dropped = False
    for (m1, k1), c1 in a.terms.items():
        for (m2, k2), c2 in b.terms.items():
            m = m1 + m2
            if m > t_max:
                continue
            k0 = k1 + k2
            num = (product.commutator_terms(c1.num, c2.num) if commutator
                   else product.delta_terms(c1.num, c2.num))
            den = None
            for n, poly in num.items():
                k = k0 + n
                if k > k_ceiling:
                    dropped = True
                    continue
                if den is None:
                    den = c1.den * c2.den
                term = RingElement(poly, den) if not den.is_constant() else RingElement.from_poly(poly)
                key = (m, k)
                acc[key] = acc[key] + term if key in acc else term
    if dropped:
        _degraded(f"terms above hbar^{k_ceiling} were dropped")
    return {key: c for key, c in acc.items() if not c.is_zero}


def star_multiply(a, b):
    terms = _star_raw(a, b, a.k_max)
    for (m, k) in terms:
        assert k >= -m, "grading violated in star product"
    return a.like(terms)


def star_commutator(a, b):
    return a.like(_star_raw(a, b, a.k_max, commutator=True))


def star_bracket(a, b):
    """(a*b - b*a)/(i hbar)."""
    raw = _star_raw(a, b, a.k_max + 1, commutator=True)
    imag = IMAG if (a.kind() in (None, "exact") and b.kind() in (None, "exact")) else 1j
    out = {}
    for (m, k), c in raw.items():
        if k - 1 < -m:
            raise GradingViolation(f"bracket term at (m={m}, k={k - 1}) violates k >= -m")
        out[(m, k - 1)] = c.scale(-imag)
    return a.like(out)


def poisson_bracket(f, g):
    return f.diff("q") * g.diff("p") - f.diff("p") * g.diff("q")


def free_element(a):
    return a.t_slice(0)


FREE_TOL = 1e-12


def _require_free(a, target, err):
    free = free_element(a)
    expected = GradedSeries.one(a.t_max, a.k_max, a.product) if target == 1 else a.like({})
    if a.kind() in ("float", "array"):
        bad = (free - expected).norm() > FREE_TOL
    else:
        bad = free != expected
    if bad:
        raise err(f"free element is {free!r}, expected {target}")


def series_exp(A):
    _require_free(A, 0, NotInAlgebraQ)
    result = GradedSeries.one(A.t_max, A.k_max, A.product)
    power = result
    for n in range(1, A.t_max + 1):
        power = star_multiply(power, A).scale(_rational_scalar(A, 1, n))
        if power.is_zero():
            break
        result = result + power
    return result


def series_log(a):
    _require_free(a, 1, NotInGroup)
    x = a - GradedSeries.one(a.t_max, a.k_max, a.product)
    result = a.like({})
    power = GradedSeries.one(a.t_max, a.k_max, a.product)
    for n in range(1, a.t_max + 1):
        power = star_multiply(power, x)
        if power.is_zero():
            break
        sign = 1 if n % 2 else -1
        result = result + power.scale(_rational_scalar(a, sign, n))
    return result


def series_inverse(a):
    _require_free(a, 1, NotInGroup)
    x = a - GradedSeries.one(a.t_max, a.k_max, a.product)
    result = GradedSeries.one(a.t_max, a.k_max, a.product)
    power = result
    for n in range(1, a.t_max + 1):
        power = -star_multiply(power, x)
        if power.is_zero():
            break
        result = result + power
    return result


def _rational_scalar(series, num, den):
    if series.kind() in ("float", "array"):
        return num / den
    return gaussian(num) / den


def adjoint_action(a, f):
    """a * f * a^{-1}."""
    return star_multiply(star_multiply(a, f), series_inverse(a))


def adjoint_action_series(a, f):
    """f + sum_l (1/l!) {A, ... {A, f}} with A = i hbar log(a); the BCH path."""
    A = series_log(a).mul_ihbar()
    result = f
    nested = f
    for l in range(1, f.t_max + 1):
        nested = star_bracket(A, nested).scale(_rational_scalar(f, 1, l))
        if nested.is_zero():
            break
        result = result + nested
    return result


def one_like(a):
    return GradedSeries.one(a.t_max, a.k_max, a.product)


def exact_or_float(series, value):
    """Scalar in the coefficient mode of series."""
    if series.kind() in ("float", "array"):
        return to_complex(value) if isinstance(value, GaussianRational) else complex(value)
    return value if isinstance(value, GaussianRational) else gaussian(value)
