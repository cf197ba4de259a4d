"""Batch driver: ``heavenly-star <subcommand> [--config PATH] [--out PATH] ...``.

Exit codes: 0 when every asserted residual is within tolerance, 1 when one is
not (the report is still written), 2 for configuration or parse errors.
"""

import argparse
import json
import os
import sys
import time
import warnings
from pathlib import Path

from . import __version__
from .errors import (
    AnsatzExhausted,
    DegradedPrecision,
    HeavenlyError,
    LiouvilleViolation,
    NonCompatibleOneForm,
    NotInGroup,
    ResidualExceeded,
    SeedRejected,
    SpecParseError,
)
from .serialize import (
    SCHEMA_VERSION,
    background_from_dict,
    connection_to_dict,
    dumps,
    loads,
    node_series_from_list,
    series_from_dict,
    series_to_dict,
    spectral_to_dict,
)

SUBCOMMANDS = ("algebra-check", "background", "hierarchy", "lax", "symmetry", "factorize", "inverse-pw")
DEFAULT_TOL = 1e-8


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

def _load_json(path):
    try:
        return loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"file not found: {path}") from exc


def _resolve(config, args):
    cfg = dict(config)
    for key in ("tolerance", "nodes", "tmax", "kmax", "depth", "kind", "seed", "theta"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if args.exact is not None:
        cfg["exact"] = args.exact
    cfg.setdefault("tolerance", DEFAULT_TOL)
    if not cfg["tolerance"] > 0:
        raise ConfigError("tolerance must be positive")
    cfg.setdefault("background", "flat")
    return cfg


def _threads():
    raw = os.environ.get("HEAVENLY_STAR_THREADS")
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"HEAVENLY_STAR_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError("HEAVENLY_STAR_THREADS must be >= 1")
    return n


def _theta(cfg, t_max=None, k_max=None):
    from .hierarchy import theta_star
    from .star import GradedSeries

    spec = cfg.get("theta", "theta_star")
    if isinstance(spec, str) and spec == "theta_star":
        return theta_star(t_max or cfg.get("tmax", 3), k_max or cfg.get("kmax"))
    if isinstance(spec, str) and spec == "zero":
        t = t_max or cfg.get("tmax", 3)
        return GradedSeries.zero(t, k_max or cfg.get("kmax") or t + 3)
    if isinstance(spec, str):
        spec = _load_json(spec)
    return series_from_dict(spec)


def _series_arg(value, like):
    """A seed or probe: expression string or series JSON."""
    from .star import GradedSeries

    if isinstance(value, dict):
        return series_from_dict(value)
    return GradedSeries.from_expr_terms([(0, 0, str(value))], like.t_max, like.k_max)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_algebra_check(cfg):
    from .checks import algebra_suite

    result = algebra_suite(int(cfg.get("samples", 100)), int(cfg.get("rng_seed", 0)),
                           int(cfg.get("tmax", 3)), int(cfg.get("phase_degree", 3)))
    ok = not any(result["failures"].values())
    return ok, result


def cmd_background(cfg):
    from .background import verify_asd_basis

    bg = background_from_dict(cfg["background"])
    asd = verify_asd_basis(bg)
    report = {
        "name": bg.name,
        "heavenly": bg.heavenly,
        "det": str(bg.det),
        "asd_closed": asd["closed"],
        "asd_degenerate": asd["degenerate"],
        "witness": {key: str(v) for key, v in asd["witness"].items()} if asd["witness"] else None,
    }
    return bg.heavenly and asd["passed"], report


def cmd_hierarchy(cfg):
    from .hierarchy import ThetaField, current_divergence, hierarchy_generate, linear_constraint
    from .serialize import tower_to_dict

    bg = background_from_dict(cfg["background"])
    theta = _theta(cfg)
    exact = cfg.get("exact", True)
    tol = None if exact else cfg["tolerance"]
    if not exact:
        theta = theta.to_float()
    tf = ThetaField(theta, bg)
    kind = cfg.get("kind", "D")
    seed = _series_arg(cfg.get("seed", "1"), theta)
    if not exact:
        seed = seed.to_float()
    tower = hierarchy_generate(tf, kind, seed, int(cfg.get("depth", 3)), tol)
    members = []
    for c in tower.members:
        lin = linear_constraint(tf, kind, c)
        div = current_divergence(tf, kind, c)
        members.append({
            "linear_zero": lin.is_zero() if exact else lin.norm() <= tol,
            "linear_norm": lin.norm(),
            "divergence_zero": div.is_zero() if exact else div.norm() <= tol,
            "divergence_norm": div.norm(),
        })
    checks = tower.check(tol)
    ok = all(m["linear_zero"] and m["divergence_zero"] for m in members) and all(checks["recursion"])
    bg_ref = cfg["background"] if isinstance(cfg["background"], (str, dict)) else None
    return ok, {"members": members, "recursion": checks["recursion"],
                "tower": tower_to_dict(tower, bg_ref)}


def cmd_lax(cfg):
    from .hierarchy import ThetaField
    from .lax import lax_defect, solve_underline_wavefunction, transition_function, wavefunction

    bg = background_from_dict(cfg["background"])
    tf = ThetaField(_theta(cfg), bg)
    depth = int(cfg.get("depth", 3))
    psi = wavefunction(tf, depth)
    defect = lax_defect(tf, psi)
    report = {
        "psi": spectral_to_dict(psi),
        "defect_vanishes_through_depth": defect.vanishes_through(depth),
        "contraction_identity": defect.contraction_ok,
    }
    ok = report["defect_vanishes_through_depth"] and report["contraction_identity"]
    if "degree_budget" in cfg:
        try:
            under = solve_underline_wavefunction(tf, int(cfg["degree_budget"]), int(cfg.get("underline_depth", 1)))
        except AnsatzExhausted as exc:
            report["underline"] = {"solved": False, "message": str(exc), "system": exc.system}
        else:
            tr = transition_function(psi, under, bg)
            report["underline"] = {"solved": True, "psi_under": spectral_to_dict(under),
                                   "transition_constant": tr.constant}
            ok = ok and tr.constant
    return ok, report


def cmd_symmetry(cfg):
    from .hierarchy import ThetaField, lme_residual
    from .lax import symmetry_bracket_check, symmetry_delta

    bg = background_from_dict(cfg["background"])
    tf = ThetaField(_theta(cfg), bg)
    report = {}
    ok = True
    if "F" in cfg or "F_under" in cfg:
        delta = symmetry_delta(tf, cfg.get("F"), cfg.get("F_under"),
                               degree_budget=cfg.get("degree_budget"), check=False)
        lme = lme_residual(tf, delta)
        report["delta"] = series_to_dict(delta)
        report["lme_zero"] = lme.is_zero()
        ok = ok and report["lme_zero"]
    for i, pair in enumerate(cfg.get("pairs", [])):
        r = symmetry_bracket_check(tf, pair.get("F1"), pair.get("F_under1"), pair.get("F2"),
                                   pair.get("F_under2"), order=int(cfg.get("order", 2)),
                                   degree_budget=cfg.get("degree_budget"))
        report.setdefault("bracket_checks", []).append({
            "index": i, "agree": r["agree"], "bracket": series_to_dict(r["bracket"]),
            "commutator": series_to_dict(r["commutator"])})
        ok = ok and r["agree"]
    return ok, report


def _datum(cfg, contour, bg):
    from .contour import ContourSeries
    from .hilbert import datum_from_spectral
    from .spectral import spectral_from_spec

    t_max = int(cfg.get("tmax", 3))
    k_max = int(cfg.get("kmax") or t_max + 1)
    if "datum_nodes" in cfg:
        items = cfg["datum_nodes"]
        if isinstance(items, str):
            items = _load_json(items)
        if len(items) != contour.n:
            raise ConfigError(f"datum has {len(items)} nodes, contour has {contour.n}")
        return ContourSeries(node_series_from_list(items), contour.nodes, "off")
    if "log_datum" in cfg:
        F = spectral_from_spec(str(cfg["log_datum"]), bg, t_max, k_max).map(lambda s: s.to_float())
        return datum_from_spectral(F, contour, exponentiate=True)
    if "datum" in cfg:
        F = spectral_from_spec(str(cfg["datum"]), bg, t_max, k_max).map(lambda s: s.to_float())
        return datum_from_spectral(F, contour, exponentiate=False)
    raise ConfigError("factorisation needs one of 'log_datum', 'datum' or 'datum_nodes'")


def _contour(cfg):
    from .contour import Contour

    try:
        return Contour(int(cfg.get("nodes", 256)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_factorize(cfg):
    from .hilbert import birkhoff_factorize

    bg = background_from_dict(cfg["background"])
    contour = _contour(cfg)
    sol = birkhoff_factorize(_datum(cfg, contour, bg), contour, cfg["tolerance"])
    return True, {"psi": spectral_to_dict(sol.psi), "psi_under": spectral_to_dict(sol.psi_under),
                  "diagnostics": sol.diagnostics}


def cmd_inverse_pw(cfg):
    from .hierarchy import me_bracket_term
    from .hilbert import birkhoff_factorize, extract_connection, extract_theta

    bg = background_from_dict(cfg["background"])
    contour = _contour(cfg)
    tol = cfg["tolerance"]
    sol = birkhoff_factorize(_datum(cfg, contour, bg), contour, tol)
    A, conn = extract_connection(sol, bg, tol)
    tf, th = extract_theta(sol, bg, tol)
    bracket = me_bracket_term(tf)
    report = {
        "factorization": sol.diagnostics,
        "connection": connection_to_dict(A),
        "connection_report": conn,
        "theta": series_to_dict(tf.theta),
        "theta_report": th,
        "bracket_norm_by_order": {str(m): bracket.t_slice(m).norm() for m in range(bracket.t_max + 1)},
    }
    return True, report


HANDLERS = {
    "algebra-check": cmd_algebra_check,
    "background": cmd_background,
    "hierarchy": cmd_hierarchy,
    "lax": cmd_lax,
    "symmetry": cmd_symmetry,
    "factorize": cmd_factorize,
    "inverse-pw": cmd_inverse_pw,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="heavenly-star", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="report path (default: stdout)")
        p.add_argument("--tolerance", type=float)
        p.add_argument("--nodes", type=int)
        p.add_argument("--tmax", type=int)
        p.add_argument("--kmax", type=int)
        p.add_argument("--depth", type=int)
        p.add_argument("--theta", help="series JSON path, or 'theta_star' / 'zero'")
        p.add_argument("--kind", choices=("L", "D"))
        p.add_argument("--seed", help="tower seed expression")
        mode = p.add_mutually_exclusive_group()
        mode.add_argument("--exact", dest="exact", action="store_true", default=None)
        mode.add_argument("--float", dest="exact", action="store_false")
        p.add_argument("--deterministic", action="store_true",
                       help="omit timing so identical runs give identical bytes")
    return parser


def _write(report, out):
    text = dumps(report) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    report = {"schema_version": SCHEMA_VERSION, "subcommand": args.command, "version": __version__}
    code = 0
    try:
        config = _load_json(args.config) if args.config else {}
        if not isinstance(config, dict):
            raise ConfigError("config must be a JSON object")
        cfg = _resolve(config, args)
        report["config"] = json.loads(dumps(cfg))
        report["threads"] = _threads()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", DegradedPrecision)
            ok, result = HANDLERS[args.command](cfg)
        report["degraded_precision_flags"] = sum(isinstance(w.message, DegradedPrecision) for w in caught)
        report["result"] = result
        report["ok"] = bool(ok)
        code = 0 if ok else 1
    except (ResidualExceeded, LiouvilleViolation, NonCompatibleOneForm, AssertionError) as exc:
        report.update(ok=False, error=type(exc).__name__, message=str(exc))
        norms = getattr(exc, "norms", None)
        if norms is not None:
            report["residual_norms"] = norms
        code = 1
    except (ConfigError, SpecParseError, NotInGroup, SeedRejected, HeavenlyError, ValueError, KeyError) as exc:
        report.update(ok=False, error=type(exc).__name__, message=str(exc))
        code = 2
    if not args.deterministic:
        report["timing_seconds"] = round(time.perf_counter() - start, 6)
    _write(report, args.out)
    if code:
        print(f"{args.command}: {report.get('error', 'residual check failed')}: {report.get('message', '')}",
              file=sys.stderr)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
