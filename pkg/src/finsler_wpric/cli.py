"""Command-line interface: eval, verify, volume, theorem, catalog.

Exit status: 0 on success or all checks passing, 1 when a check fails,
2 on usage or domain errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import alphabeta as ab
from . import core, harness
from .errors import FinslerError
from .metrics import (
    CATALOG,
    BusemannHausdorff,
    DensityOf,
    Metric,
    RiemannianDensity,
    closed_form_volume,
    resolve_metric,
)
from .volume import bh_volume_density

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

INVARIANTS = {
    "f": "F",
    "g": "g",
    "g_inv": "g_inv",
    "spray": "G",
    "n": "N",
    "r": "R",
    "ric": "Ric",
    "sigma": "sigma_F",
    "sigma_f": "sigma_F",
    "tau": "tau",
    "s": "S",
    "sfrak": "Sfrak",
    "sigma_ratio": "Sigma",
    "theta": "theta",
    "pric": "PRic",
    "wpric": "WPRic0",
    "wpric0": "WPRic0",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _vector(text: str) -> tuple[float, ...]:
    try:
        out = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not all(math.isfinite(v) for v in out):
        raise argparse.ArgumentTypeError(f"non-finite coordinate in {text!r}")
    return out


def _invariant_names(text: str) -> list[str]:
    names = []
    for raw in text.split(","):
        key = raw.strip().lower()
        if key == "g" and raw.strip() == "G":
            key = "spray"
        if key not in INVARIANTS:
            raise argparse.ArgumentTypeError(f"unknown invariant {raw!r}; choose from {', '.join(sorted(INVARIANTS))}")
        names.append(INVARIANTS[key])
    return names


def _volume_for(metric: Metric, choice: str):
    if choice == "quadrature" or (choice == "auto" and metric.dim in (2, 3)):
        return BusemannHausdorff()
    return closed_form_volume(metric)


def _reference(metric: Metric, ref: str | None, vol):
    if ref is None:
        ref = "alpha" if metric.alpha is not None else "self"
    if ref == "alpha":
        return RiemannianDensity()
    if ref == "self":
        return vol
    other = resolve_metric(ref)
    return DensityOf(other, _volume_for(other, "auto"))


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    return float(v)


def _write_json(path: str | None, payload: dict) -> None:
    if path:
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _fmt_value(v) -> str:
    if isinstance(v, np.ndarray):
        return np.array2string(v, precision=10, separator=", ")
    return f"{float(v):.10g}"


def cmd_eval(args) -> int:
    metric = resolve_metric(args.metric)
    if len(args.x) != metric.dim or len(args.y) != metric.dim:
        raise UsageError(f"--x and --y need {metric.dim} coordinates for {metric.name}")
    vol = _volume_for(metric, args.volume)
    ref = _reference(metric, args.ref, vol)
    bundle = core.curvature_bundle(metric, vol, ref, (args.x, args.y))
    values = {name: getattr(bundle, name) for name in args.invariants}
    print(f"{metric.name}  x = {list(args.x)}  y = {list(args.y)}")
    for name, v in values.items():
        print(f"  {name:8s} {_fmt_value(v)}")
    if "WPRic0" in values:
        print(f"  {'WPRic0 - Ric':8s} {bundle.WPRic0 - bundle.Ric:.10g}")
    _write_json(args.json, {
        "schema": harness.SCHEMA,
        "metric": args.metric,
        "x": list(args.x),
        "y": list(args.y),
        "volume": type(vol).__name__,
        "invariants": {k: _jsonable(v) for k, v in values.items()},
    })
    return EXIT_OK


def cmd_verify(args) -> int:
    names = harness.resolve_suite(args.suite)
    reports = []
    for name in names:
        rep = harness.run_scenario(name, seed=args.seed, samples=args.samples, tol=args.tol)
        print(rep.summary(), flush=True)
        reports.append(rep)
    passed = sum(r.passed for r in reports)
    print(f"{passed}/{len(reports)} scenarios passed")
    if args.json:
        Path(args.json).write_text(harness.reports_json(reports) + "\n", encoding="utf-8")
    return EXIT_OK if passed == len(reports) else EXIT_FAIL


def cmd_volume(args) -> int:
    metric = resolve_metric(args.metric)
    if len(args.x) != metric.dim:
        raise UsageError(f"--x needs {metric.dim} coordinates for {metric.name}")
    sigma = bh_volume_density(metric, args.x, args.method)
    print(f"sigma_F({', '.join(map(str, args.x))}) = {sigma:.12g}  [{args.method}]")
    _write_json(args.json, {"schema": harness.SCHEMA, "metric": args.metric, "x": list(args.x),
                            "method": args.method, "sigma": sigma})
    return EXIT_OK


CHECKERS = {
    "randers-flat": ab.check_randers_wpric_flat,
    "randers-reversible": ab.check_reversible_wpric,
    "kropina-flat": ab.check_kropina_wpric_flat,
    "kropina-isotropic-s": ab.check_isotropic_s_equivalences,
}


def cmd_theorem(args) -> int:
    metric = resolve_metric(args.metric)
    rep = CHECKERS[args.which](metric, points=args.points, directions=args.directions, tol=args.tol, seed=args.seed)
    print(f"{args.which} on {metric.name}: verdict {rep.verdict}" + (f"  ({rep.note})" if rep.note else ""))
    for c in rep.checks:
        print(f"    {'ok  ' if c.ok else 'fail'} {c.name}: max_abs={c.max_abs:.3e} max_rel={c.max_rel:.3e}")
    _write_json(args.json, {
        "schema": harness.SCHEMA,
        "metric": args.metric,
        "checker": args.which,
        "verdict": rep.verdict,
        "applicable": rep.applicable,
        "checks": [{"name": c.name, "max_abs": c.max_abs, "max_rel": c.max_rel, "pass": c.ok} for c in rep.checks],
    })
    return EXIT_OK if rep.verdict else EXIT_FAIL


def cmd_catalog(args) -> int:
    print("builtin metrics:")
    for name, (desc, _) in CATALOG.items():
        print(f"  builtin:{name:18s} {desc}")
    print("scenarios:")
    for name, sc in harness.SCENARIOS.items():
        print(f"  {name:28s} {sc.description}")
    print("suites: " + ", ".join(harness.SUITES))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="finsler-wpric", description="Weighted projective Ricci curvature of Finsler metrics.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", help="evaluate invariants at one tangent vector")
    e.add_argument("--metric", required=True, help="builtin:NAME or a metric file")
    e.add_argument("--ref", help="reference density: alpha, self, builtin:NAME or a metric file")
    e.add_argument("--x", required=True, type=_vector, help="base point, e.g. 0.3,0 (use --x=-0.3,0 for negatives)")
    e.add_argument("--y", required=True, type=_vector, help="direction, e.g. 1,0")
    e.add_argument("--invariants", type=_invariant_names, default=_invariant_names("F,Ric,S,wpric"),
                   help="comma-separated list: " + ", ".join(sorted(INVARIANTS)))
    e.add_argument("--volume", choices=["auto", "quadrature", "closed-form"], default="auto")
    e.add_argument("--json")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="run a scenario suite")
    v.add_argument("--suite", default="all", help="suite name or a single scenario")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--samples", type=int)
    v.add_argument("--tol", type=float, help="override every check tolerance")
    v.add_argument("--json")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("volume", help="Busemann-Hausdorff density at a point")
    o.add_argument("--metric", required=True)
    o.add_argument("--x", required=True, type=_vector)
    o.add_argument("--method", choices=["quadrature", "closed-form"], default="quadrature")
    o.add_argument("--json")
    o.set_defaults(func=cmd_volume)

    t = sub.add_parser("theorem", help="run an (alpha, beta) flatness checker on a grid")
    t.add_argument("--metric", required=True)
    t.add_argument("--which", choices=sorted(CHECKERS), required=True)
    t.add_argument("--points", type=int, default=8)
    t.add_argument("--directions", type=int, default=16)
    t.add_argument("--tol", type=float, default=1e-7)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--json")
    t.set_defaults(func=cmd_theorem)

    c = sub.add_parser("catalog", help="list builtin metrics and scenarios")
    c.set_defaults(func=cmd_catalog)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (FinslerError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
