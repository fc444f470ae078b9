"""Command-line entry point.

Exit status: 0 success, 1 mathematical failure (metric axiom broken,
certificate invalid, audit or oracle mismatch), 2 input error.
"""

import argparse
from pathlib import Path
import sys

from . import __version__
from .coarse import (
    certify,
    coarse_surjectivity_constant,
    instance_map,
    lipschitz_constant,
    min_additive_for,
    theorem_audit,
    verify_certificate,
)
from .io import (
    InputError,
    digest,
    dumps,
    instance_to_dict,
    load,
    read_instance,
    read_space,
    scenario_config,
    space_to_csv,
    surgered_to_dict,
)
from .metric import MetricStructureError, validate_metric
from .oracle import DEFAULT_BUDGET, OracleBudgetExceeded, oracle_compare
from .rational import both, fmt, to_rational
from .report import (
    MAX_LISTED,
    ScenarioError,
    cert_dict,
    degree_report,
    parse_params,
    ray_depth_scan,
    run_scenario,
)
from .scenarios import SCENARIOS, iterate_partial_fold
from .surgery import SurgeryInputError, surgered_metric

OK, FAILED, BAD_INPUT = 0, 1, 2


def _emit(report, path=None):
    text = dumps(report)
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _header(args, inputs):
    return {
        "tool": {"name": "pseudosurgery", "version": __version__},
        "command": [args.command, *args.echo],
        "inputs": inputs,
    }


def _file_digest(path):
    return {"path": str(path), "sha256": digest(load(path))}


def cmd_validate(args):
    space = read_space(args.space, check=False)
    result = validate_metric(space)
    report = _header(args, {"space": _file_digest(args.space)})
    report["points"] = len(space)
    report["ok"] = result.ok
    report["violations"] = [{"axiom": kind, "witness": list(w)}
                            for kind, w in result.violations[:MAX_LISTED]]
    report["violations_total"] = len(result.violations)
    _emit(report)
    return OK if result.ok else FAILED


def cmd_surgery(args):
    inst = read_instance(args.file)
    surgered = surgered_metric(inst, quotient_graph=args.quotient_graph)
    check = validate_metric(surgered.space)
    export = surgered_to_dict(surgered)
    report = _header(args, {"surgery": _file_digest(args.file)})
    report["classes"] = len(surgered.space)
    report["metric_ok"] = check.ok
    report["diameter"] = both(surgered.space.diameter())
    if surgered.quotient_graph is not None:
        report["degree_spectrum"] = degree_report(surgered.quotient_graph)
    if args.out:
        Path(args.out).write_text(dumps(export), encoding="utf-8")
        report["output"] = str(args.out)
    else:
        report["surgered"] = export
    if args.csv:
        Path(args.csv).write_text(space_to_csv(surgered.space), encoding="utf-8")
        report["csv"] = str(args.csv)
    _emit(report)
    return OK if check.ok else FAILED


def _interior(inst, args):
    if args.interior_radius is None:
        return None
    root = args.root or inst.meta.get("root")
    if root is None:
        raise InputError("--interior-radius needs --root or a provenance root")
    if root not in inst.X:
        raise InputError(f"root {root!r} is not a point of X")
    r = to_rational(args.interior_radius)
    return [p for p in inst.X.points if inst.X.d(root, p) <= r]


def cmd_certify(args):
    inst = read_instance(args.file)
    f, S, T = instance_map(inst)
    points = _interior(inst, args)
    if args.K is None and args.C is None:
        cert = certify(f, S, T, args.kind, points)
    else:
        K = to_rational(args.K) if args.K is not None else certify(f, S, T, args.kind, points).K
        C = args.C
        if C is None:
            C = min_additive_for(f, S, T, K, args.kind, points)
            C = 0 if C is None else C
        cert = verify_certificate(f, S, T, K, to_rational(C), args.kind, points,
                                  max_violations=MAX_LISTED)
    report = _header(args, {"surgery": _file_digest(args.file)})
    report["certificate"] = cert_dict(cert)
    report["lipschitz"] = both(lipschitz_constant(f, S, T, points))
    report["coarse_surjectivity"] = both(coarse_surjectivity_constant(f, S, T))
    if points is not None:
        report["pairs_restricted_to"] = {"points": len(points),
                                         "interior_radius": fmt(to_rational(args.interior_radius))}
    if args.kind == "pseudo" and cert.valid and args.audit:
        surgered = surgered_metric(inst)
        audit = theorem_audit(inst, surgered, cert.K, cert.C, points, points)
        report["theorem_audit"] = audit.to_dict()
        report["theorem_audit"]["failures"] = report["theorem_audit"]["failures"][:MAX_LISTED]
        if not audit.passed:
            _emit(report)
            return FAILED
    if args.kind == "pseudo" and inst.meta.get("scenario") == "ray":
        N = int(inst.meta["params"]["N"])
        scan, grows = ray_depth_scan(N)
        report["K_by_depth"] = scan
        report["diverges_with_depth"] = grows
    _emit(report)
    return OK if cert.valid else FAILED


def cmd_scenario(args):
    name, params = args.name, args.params
    if args.config:
        name, params = scenario_config(load(args.config))
        params = {k: (v if isinstance(v, str) else str(v)) for k, v in params.items()}
    if name is None:
        raise InputError("give a scenario name or --config")
    if args.out:
        gen_params = parse_params(name, params)
        if name == "partial-fold":
            steps = gen_params.pop("steps", None)
            inst = iterate_partial_fold(gen_params.get("degree", 5),
                                        gen_params.get("radius", 3), steps)[0].instance
        else:
            inst = SCENARIOS[name](**gen_params)
        Path(args.out).write_text(dumps(instance_to_dict(inst)), encoding="utf-8")
    report, ok = run_scenario(name, params, args.budget,
                              command=[args.command, *args.echo],
                              timing=not args.no_timing)
    _emit(report, args.report)
    return OK if ok else FAILED


def cmd_oracle_compare(args):
    inst = read_instance(args.file)
    surgered = surgered_metric(inst)
    report = _header(args, {"surgery": _file_digest(args.file)})
    try:
        mismatches, n = oracle_compare(inst, surgered, args.max_pairs, args.budget)
    except OracleBudgetExceeded as exc:
        report["refused"] = str(exc)
        report["ok"] = False
        _emit(report)
        return BAD_INPUT
    report["pairs"] = n
    report["ok"] = not mismatches
    report["mismatches"] = [{"pair": [x, y], "engine": fmt(e), "oracle": fmt(o)}
                            for x, y, e, o in mismatches[:MAX_LISTED]]
    _emit(report)
    return OK if not mismatches else FAILED


def build_parser():
    p = argparse.ArgumentParser(
        prog="pseudosurgery",
        description="Exact metric surgery on finite metric spaces.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check the metric axioms of a space file")
    v.add_argument("space")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("surgery", help="compute the surgered metric")
    s.add_argument("file")
    s.add_argument("--out", help="write the surgered space here")
    s.add_argument("--quotient-graph", action="store_true",
                   help="also build the quotient graph and its degree spectrum")
    s.add_argument("--csv", help="write the surgered distance matrix as CSV")
    s.set_defaults(func=cmd_surgery)

    c = sub.add_parser("certify", help="certify or verify coarse constants for f")
    c.add_argument("file")
    c.add_argument("--kind", choices=("pseudo", "quasi"), default="pseudo")
    c.add_argument("--K")
    c.add_argument("--C")
    c.add_argument("--interior-radius",
                   help="only use points within this distance of the root")
    c.add_argument("--root", help="root point for --interior-radius")
    c.add_argument("--no-audit", dest="audit", action="store_false",
                   help="skip the theorem audit on valid pseudo certificates")
    c.set_defaults(func=cmd_certify)

    sc = sub.add_parser("scenario", help="run a built-in scenario end to end")
    sc.add_argument("name", nargs="?", choices=sorted(SCENARIOS))
    sc.add_argument("params", nargs="*", help="key=value generator parameters")
    sc.add_argument("--config", help="JSON file with scenario and params")
    sc.add_argument("--report", help="write the report here instead of stdout")
    sc.add_argument("--out", help="also write the generated surgery file")
    sc.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    sc.add_argument("--no-timing", action="store_true",
                    help="omit the timing block")
    sc.set_defaults(func=cmd_scenario)

    o = sub.add_parser("oracle-compare",
                       help="compare the engine with brute-force admissible sequences")
    o.add_argument("file")
    o.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    o.add_argument("--max-pairs", type=int)
    o.set_defaults(func=cmd_oracle_compare)
    return p


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    args.echo = argv[1:]
    try:
        return args.func(args)
    except (InputError, ScenarioError, SurgeryInputError, MetricStructureError,
            ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
