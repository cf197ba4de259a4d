"""Canonical JSON forms for series, spectral series, connections, towers and backgrounds.

Exact coefficients are written as [re_num, re_den, im_num, im_den], float ones as
[re, im].  Terms and monomials are sorted, so in exact mode equal objects give
byte-identical output.
"""

import json
from fractions import Fraction

import numpy as np

from .errors import SpecParseError
from .ring import VARIABLES, Poly, RingElement, gaussian, is_exact_scalar, monomial_key
from .spectral import SpectralSeries
from .star import GradedSeries

SCHEMA_VERSION = 1


def _scalar_out(c):
    if is_exact_scalar(c):
        re, im = Fraction(int(c.x.numerator), int(c.x.denominator)), Fraction(int(c.y.numerator), int(c.y.denominator))
        return [re.numerator, re.denominator, im.numerator, im.denominator]
    c = complex(c)
    return [c.real, c.imag]


def _scalar_in(c):
    if len(c) == 4:
        re = Fraction(int(c[0]), int(c[1]))
        im = Fraction(int(c[2]), int(c[3]))
        return gaussian(re, im)
    if len(c) == 2:
        return complex(float(c[0]), float(c[1]))
    raise SpecParseError(f"bad coefficient {c!r}")


def poly_to_json(p):
    if p.kind() == "array":
        raise ValueError("array-valued polynomials are serialised per node")
    return [{"e": list(e), "c": _scalar_out(p.terms[e])} for e in sorted(p.terms, key=monomial_key)]


def poly_from_json(data):
    if isinstance(data, str):
        return Poly.from_expr(data)
    out = {}
    for mono in data:
        e = tuple(int(x) for x in mono["e"])
        if len(e) != len(VARIABLES):
            raise SpecParseError(f"monomial needs {len(VARIABLES)} exponents, got {e}")
        out[e] = _scalar_in(mono["c"])
    return Poly.from_dict(out)


def series_to_dict(s):
    terms = []
    for (m, k) in sorted(s.terms):
        c = s.terms[(m, k)]
        terms.append({"m": m, "k": k, "num": poly_to_json(c.num), "den": poly_to_json(c.den)})
    return {"t_max": s.t_max, "k_max": s.k_max, "terms": terms}


def series_from_dict(data):
    try:
        t_max, k_max = int(data["t_max"]), int(data["k_max"])
        terms = {}
        for item in data["terms"]:
            num = poly_from_json(item["num"])
            den = poly_from_json(item.get("den", [{"e": [0] * 6, "c": [1, 1, 0, 1]}]))
            terms[(int(item["m"]), int(item["k"]))] = RingElement(num, den)
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecParseError(f"malformed series JSON: {exc}") from exc
    return GradedSeries(terms, t_max, k_max)


def spectral_to_dict(s):
    return {"chart": s.chart, "t_max": s.t_max, "k_max": s.k_max,
            "coefficients": [{"j": j, "series": series_to_dict(s.coeffs[j])} for j in s.powers()]}


def spectral_from_dict(data):
    try:
        template = GradedSeries.zero(int(data["t_max"]), int(data["k_max"]))
        coeffs = {int(c["j"]): series_from_dict(c["series"]) for c in data["coefficients"]}
        return SpectralSeries(coeffs, data.get("chart", "annulus"), template)
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecParseError(f"malformed spectral JSON: {exc}") from exc


def node_series_to_list(series, n):
    """Array-valued series -> list of per-node scalar series dicts."""
    out = []
    for j in range(n):
        out.append(series_to_dict(series.map_coefficients(
            lambda c: RingElement(Poly({e: complex(v[j]) if isinstance(v, np.ndarray) else v
                                        for e, v in c.num.terms.items()}), c.den))))
    return out


def node_series_from_list(items):
    """Per-node series dicts -> one array-valued series (same truncation at every node)."""
    parts = [series_from_dict(d).to_float() for d in items]
    if not parts:
        raise SpecParseError("empty node list")
    t_max, k_max = parts[0].t_max, parts[0].k_max
    if any((p.t_max, p.k_max) != (t_max, k_max) for p in parts):
        raise SpecParseError("all nodes must share truncation parameters")
    n = len(parts)
    grouped = {}
    for j, p in enumerate(parts):
        for key, c in p.terms.items():
            for e, v in c.num.terms.items():
                grouped.setdefault((key, c.den), {}).setdefault(e, np.zeros(n, dtype=complex))[j] = v
    terms = {}
    for (key, den), monos in grouped.items():
        c = RingElement(Poly(monos), den, _reduced=True)
        terms[key] = terms[key] + c if key in terms else c
    return GradedSeries(terms, t_max, k_max)


def connection_to_dict(A):
    return {f"A_{name}": series_to_dict(A.components[name]) for name in sorted(A.components)}


def tower_to_dict(tower, background_ref=None):
    return {"kind": tower.kind, "convention": tower.convention,
            "members": [series_to_dict(c) for c in tower.members],
            "theta": series_to_dict(tower.theta.theta),
            "background": background_ref}


def background_from_dict(data):
    """{"potential", "G", "Gt"} as strings or monomial lists; or {"builtin": name}."""
    from .background import BUILTIN_BACKGROUNDS, build_background

    if isinstance(data, str):
        data = {"builtin": data}
    if "builtin" in data:
        name = data["builtin"]
        if name not in BUILTIN_BACKGROUNDS:
            raise SpecParseError(f"unknown background {name!r}; have {sorted(BUILTIN_BACKGROUNDS)}")
        return BUILTIN_BACKGROUNDS[name]()
    try:
        K = RingElement.from_poly(poly_from_json(data["potential"]))
        G = RingElement.from_poly(poly_from_json(data.get("G", "1")))
        Gt = RingElement.from_poly(poly_from_json(data.get("Gt", "1")))
    except KeyError as exc:
        raise SpecParseError(f"background config lacks {exc}") from exc
    darboux = None
    if "darboux" in data:
        darboux = tuple({int(j): RingElement.from_poly(poly_from_json(v)) for j, v in part.items()}
                        for part in data["darboux"])
    return build_background(K, G, Gt, darboux=darboux, name=data.get("name", "custom"))


def _default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, GradedSeries):
        return series_to_dict(obj)
    if isinstance(obj, SpectralSeries):
        return spectral_to_dict(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_default)


def loads(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"invalid JSON: {exc}") from exc
