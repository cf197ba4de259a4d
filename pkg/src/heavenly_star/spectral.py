"""Laurent series in the spectral parameter with GradedSeries coefficients, and twistor-function specs."""

import numpy as np
import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    implicit_multiplication_application,
    parse_expr,
    standard_transformations,
)

from .errors import ChartMismatch, SpecParseError
from .ring import RING_ONE, VARIABLES, Poly, RingElement, from_sympy_scalar
from .star import (
    GradedSeries,
    star_bracket,
    star_multiply,
)

CHARTS = ("origin", "infinity", "annulus")


class SpectralSeries:
    """Finite map lambda-power -> GradedSeries with a chart tag.

    Keys are always powers of lambda; in the infinity chart they are <= 0
    (lambda^{-j} = zeta^{-j} with zeta the same coordinate read near infinity).
    """

    __slots__ = ("coeffs", "chart", "template")

    def __init__(self, coeffs, chart="annulus", template=None):
        if chart not in CHARTS:
            raise ValueError(f"unknown chart {chart!r}")
        coeffs = {j: s for j, s in coeffs.items() if not s.is_zero()}
        if template is None:
            if not coeffs:
                raise ValueError("template series needed for an empty SpectralSeries")
            template = next(iter(coeffs.values()))
        template = template.like({})
        for s in coeffs.values():
            template.check_compatible(s)
        if chart == "origin" and any(j < 0 for j in coeffs):
            raise ChartMismatch("origin chart holds only nonnegative powers")
        if chart == "infinity" and any(j > 0 for j in coeffs):
            raise ChartMismatch("infinity chart holds only nonpositive powers")
        self.coeffs = coeffs
        self.chart = chart
        self.template = template

    # construction -------------------------------------------------------------
    @classmethod
    def constant(cls, series, chart="origin"):
        return cls({0: series}, chart, series)

    @classmethod
    def one(cls, template, chart="origin"):
        return cls({0: GradedSeries.one(template.t_max, template.k_max, template.product)}, chart, template)

    def like(self, coeffs, chart=None):
        return SpectralSeries(coeffs, chart or self.chart, self.template)

    # inspection ---------------------------------------------------------------
    @property
    def t_max(self):
        return self.template.t_max

    @property
    def k_max(self):
        return self.template.k_max

    def powers(self):
        return sorted(self.coeffs)

    def min_power(self):
        return min(self.coeffs, default=0)

    def max_power(self):
        return max(self.coeffs, default=0)

    def coefficient(self, j):
        return self.coeffs.get(j, self.template)

    def is_zero(self):
        return not self.coeffs

    def norm(self):
        return max((s.norm() for s in self.coeffs.values()), default=0.0)

    def kind(self):
        for s in self.coeffs.values():
            return s.kind()
        return None

    def __eq__(self, other):
        if not isinstance(other, SpectralSeries):
            return NotImplemented
        return self.coeffs == other.coeffs and self.template == other.template

    def __repr__(self):
        body = ", ".join(f"lam^{j}: {self.coeffs[j]!r}" for j in self.powers())
        return f"SpectralSeries[{self.chart}]({body or '0'})"

    def free_element(self):
        """lambda-series of t^0 slices."""
        return self.like({j: s.t_slice(0) for j, s in self.coeffs.items()})

    def is_group_like(self):
        free = self.free_element()
        one = GradedSeries.one(self.t_max, self.k_max, self.template.product)
        return free.powers() == [0] and free.coefficient(0) == one

    # algebra ------------------------------------------------------------------
    def _combine_chart(self, other):
        return self.chart if self.chart == other.chart else "annulus"

    def __add__(self, other):
        out = dict(self.coeffs)
        for j, s in other.coeffs.items():
            out[j] = out[j] + s if j in out else s
        return self.like(out, self._combine_chart(other))

    def __neg__(self):
        return self.like({j: -s for j, s in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return self.like({j: s.scale(c) for j, s in self.coeffs.items()})

    def map(self, fn):
        return self.like({j: fn(s) for j, s in self.coeffs.items()})

    def diff(self, name):
        return self.map(lambda s: s.diff(name))

    def times_lambda(self, n=1):
        chart = self.chart
        if chart == "origin" and n < 0 or chart == "infinity" and n > 0:
            chart = "annulus"
        return self.like({j + n: s for j, s in self.coeffs.items()}, chart)

    def truncate(self, lo=None, hi=None):
        return self.like({j: s for j, s in self.coeffs.items()
                          if (lo is None or j >= lo) and (hi is None or j <= hi)})

    def retruncate(self, t_max=None, k_max=None):
        template = self.template.retruncate(t_max, k_max)
        return SpectralSeries({j: s.retruncate(t_max, k_max) for j, s in self.coeffs.items()},
                              self.chart, template)

    def star(self, other, lo=None, hi=None):
        """Convolution in lambda with star products; powers outside [lo, hi] are skipped."""
        out = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                n = i + j
                if (lo is not None and n < lo) or (hi is not None and n > hi):
                    continue
                prod = star_multiply(a, b)
                out[n] = out[n] + prod if n in out else prod
        return self.like(out, self._combine_chart(other))

    __matmul__ = star

    def star_series(self, series, left=True):
        """Multiply every coefficient by a lambda-independent series on the left (or right)."""
        if left:
            return self.map(lambda s: star_multiply(series, s))
        return self.map(lambda s: star_multiply(s, series))

    def bracket(self, other, lo=None, hi=None):
        out = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                n = i + j
                if (lo is not None and n < lo) or (hi is not None and n > hi):
                    continue
                br = star_bracket(a, b)
                out[n] = out[n] + br if n in out else br
        return self.like(out, self._combine_chart(other))

    def inverse(self, lo=None, hi=None):
        """Neumann inverse for group-like series (free element 1), truncated to powers in [lo, hi]."""
        one = SpectralSeries.one(self.template, self.chart)
        x = self - one
        result = one
        power = one
        for _ in range(self.t_max):
            power = -power.star(x, lo, hi)
            if power.is_zero():
                break
            result = result + power
        return result.like(result.coeffs, self.chart)

    def evaluate(self, lam):
        """Sum_j lam^j c_j for a complex number or an array of nodes."""
        total = self.template.to_float() if self.template.kind() != "array" else self.template
        total = total.like({})
        for j, s in self.coeffs.items():
            total = total + s.scale(np.asarray(lam, dtype=complex) ** j if np.ndim(lam) else complex(lam) ** j)
        return total


def check_chart(psi, chart):
    if psi.chart != chart:
        raise ChartMismatch(f"expected a {chart}-chart series, got {psi.chart}")


# ---------------------------------------------------------------------------
# twistor function specs
# ---------------------------------------------------------------------------

_SPEC_SYMBOLS = {name: sympy.Symbol(name) for name in VARIABLES + ("t", "hbar", "lam", "Pw", "Pz")}
_SPEC_SYMBOLS["I"] = sympy.I
_SPEC_SYMBOLS["i"] = sympy.I
_TRANSFORMS = standard_transformations + (convert_xor, implicit_multiplication_application)


class TwistorFunctionSpec:
    """Laurent polynomial in lam, polynomial in P^w, P^z, with graded phase-space coefficients.

    Textual form, e.g. ``"t*hbar^-1*q*Pw^2*lam^-1"``.  Coefficients multiply
    pointwise (they are symbols; P^w, P^z are phase-free so no ordering arises).
    """

    def __init__(self, text):
        self.text = text
        try:
            expr = parse_expr(text, local_dict=dict(_SPEC_SYMBOLS), transformations=_TRANSFORMS)
        except Exception as exc:  # sympy raises many error types
            raise SpecParseError(f"cannot parse {text!r}: {exc}") from exc
        self.terms = _spec_terms(sympy.expand(expr))

    def __repr__(self):
        return f"TwistorFunctionSpec({self.text!r})"

    def is_phase_free(self):
        return all(e[0] == 0 and e[1] == 0 for *_, poly in self.terms for e in poly.terms)

    def evaluate(self, darboux, t_max, k_max, chart=None):
        """Substitute the twistor coordinates (lam-polynomials of RingElements)."""
        Pw, Pz = darboux
        template = GradedSeries.zero(t_max, k_max)
        acc = {}
        for m, k, j, a, b, poly in self.terms:
            if m > t_max:
                continue
            lam_poly = _lam_power_product(Pw, a, Pz, b)
            coeff = RingElement.from_poly(poly)
            for jj, f in lam_poly.items():
                key = j + jj
                c = coeff * f
                if c.is_zero:
                    continue
                series = GradedSeries({(m, k): c}, t_max, k_max)
                acc[key] = acc[key] + series if key in acc else series
        if chart is None:
            powers = [j for j, s in acc.items() if not s.is_zero()]
            chart = ("origin" if all(j >= 0 for j in powers) else
                     "infinity" if all(j <= 0 for j in powers) else "annulus")
        return SpectralSeries(acc, chart, template)


def _lam_power_product(Pw, a, Pz, b):
    result = {0: RING_ONE}
    for poly, n in ((Pw, a), (Pz, b)):
        for _ in range(n):
            nxt = {}
            for i, x in result.items():
                for j, y in poly.items():
                    v = x * y
                    nxt[i + j] = nxt[i + j] + v if i + j in nxt else v
            result = nxt
    return result


def _spec_terms(expr):
    terms = []
    grading = ("t", "hbar", "lam", "Pw", "Pz")
    for term in sympy.Add.make_args(expr):
        if term == 0:
            continue
        coeff, rest = term.as_coeff_Mul()
        exps = {name: 0 for name in grading + VARIABLES}
        extra = sympy.Integer(1)
        for factor, power in rest.as_powers_dict().items():
            name = str(factor)
            if factor.is_number:
                extra *= factor ** power
                continue
            if name not in exps or not power.is_integer:
                raise SpecParseError(f"unsupported factor {factor}**{power}")
            exps[name] += int(power)
        for name in ("t", "Pw", "Pz") + VARIABLES:
            if exps[name] < 0:
                raise SpecParseError(f"negative power of {name} in {term}")
        e = tuple(exps[name] for name in VARIABLES)
        scalar = from_sympy_scalar(sympy.nsimplify(coeff * extra))
        poly = Poly({e: scalar})
        terms.append((exps["t"], exps["hbar"], exps["lam"], exps["Pw"], exps["Pz"], poly))
    return terms


def spectral_from_spec(spec, bg, t_max, k_max, chart=None):
    if isinstance(spec, SpectralSeries):
        return spec
    if isinstance(spec, str):
        spec = TwistorFunctionSpec(spec)
    if bg.darboux is None:
        raise ValueError("background has no twistor coordinates; supply a Darboux pair")
    return spec.evaluate(bg.darboux, t_max, k_max, chart)
