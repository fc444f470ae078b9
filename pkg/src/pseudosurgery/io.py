"""JSON and CSV formats for spaces, surgery instances and results.

All numbers are written as exact rational strings. Readers accept rational
strings, decimal literals and JSON integers; JSON decimals are read as
``Decimal`` so they convert exactly.
"""

import csv
from decimal import Decimal
import hashlib
import io
import json
from pathlib import Path

from .metric import (
    FiniteMetricSpace,
    MetricStructureError,
    metric_from_graph,
    space_from_rows,
)
from .oracle import AdmissibleSequence
from .rational import fmt, to_rational
from .surgery import SurgeryInstance


class InputError(ValueError):
    """Malformed or unreadable input (CLI exit status 2)."""


def loads(text):
    try:
        return json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc


def load(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    return loads(text)


def dumps(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def digest(obj):
    return hashlib.sha256(dumps(obj).encode("utf-8")).hexdigest()


# -- spaces ----------------------------------------------------------------


def space_to_dict(space):
    if space.graph is not None:
        metric = {"type": "graph",
                  "edges": [[u, v, fmt(w)] for u, v, w in space.graph]}
    else:
        metric = {"type": "matrix",
                  "rows": [[fmt(x) for x in row] for row in space.rows]}
    return {"points": list(space.points), "metric": metric}


def _require(d, key, kind, where):
    if not isinstance(d, dict) or key not in d:
        raise InputError(f"{where}: missing {key!r}")
    if not isinstance(d[key], kind):
        raise InputError(f"{where}: {key!r} has the wrong type")
    return d[key]


def space_from_dict(d, base_dir=None, check=False):
    """Build a space from its JSON form, or from a path to such a file.

    With ``check=False`` a matrix is accepted even if it breaks an axiom,
    so that validation can report every violation.
    """
    if isinstance(d, str):
        path = Path(d)
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return space_from_dict(load(path), path.parent, check)
    points = _require(d, "points", list, "space")
    if not all(isinstance(p, str) for p in points):
        raise InputError("space: point ids must be strings")
    metric = _require(d, "metric", dict, "space")
    kind = metric.get("type")
    try:
        if kind == "matrix":
            rows = _require(metric, "rows", list, "metric")
            return space_from_rows(points, rows, check=check)
        if kind == "graph":
            edges = _require(metric, "edges", list, "metric")
            parsed = []
            for e in edges:
                if not (isinstance(e, list) and len(e) == 3):
                    raise InputError(f"graph edge must be [u, v, weight], got {e!r}")
                parsed.append((e[0], e[1], to_rational(e[2])))
            return metric_from_graph(parsed, points)
    except (MetricStructureError, TypeError, KeyError) as exc:
        raise InputError(f"space: {exc}") from exc
    raise InputError(f"space: unknown metric type {kind!r}")


def read_space(path, check=False):
    return space_from_dict(load(path), Path(path).parent, check)


def space_to_csv(space):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["", *space.points])
    for p, row in zip(space.points, space.rows):
        w.writerow([p, *(fmt(x) for x in row)])
    return buf.getvalue()


# -- surgery instances -----------------------------------------------------


def _json_safe(value):
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    return value


PROVENANCE_KEYS = ("scenario", "params", "root", "interior_radius", "step")


def instance_to_dict(inst, provenance=True):
    d = {
        "space": space_to_dict(inst.X),
        "subset": list(inst.S),
        "target": space_to_dict(inst.T),
        "map": [[s, inst.f[s]] for s in inst.S],
    }
    if provenance and inst.meta.get("scenario"):
        d["provenance"] = {k: _json_safe(inst.meta[k])
                           for k in PROVENANCE_KEYS if k in inst.meta}
        for k in ("subdivision", "interior"):
            if k in inst.meta:
                d["provenance"][k] = _json_safe(inst.meta[k])
    return d


def instance_from_dict(d, base_dir=None):
    if not isinstance(d, dict):
        raise InputError("surgery file must be a JSON object")
    X = _space_checked(d, "space", base_dir)
    T = _space_checked(d, "target", base_dir)
    subset = _require(d, "subset", list, "surgery")
    pairs = _require(d, "map", list, "surgery")
    f = {}
    for pair in pairs:
        if not (isinstance(pair, list) and len(pair) == 2):
            raise InputError(f"map entries must be [s, t], got {pair!r}")
        s, t = pair
        if s in f and f[s] != t:
            raise InputError(f"map is not single-valued at {s!r}")
        f[s] = t
    meta = dict(d.get("provenance") or {})
    for k in ("subdivision", "interior"):
        if k in meta:
            meta[k] = set(meta[k])
    try:
        return SurgeryInstance(X, tuple(subset), T, f, meta)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _space_checked(d, key, base_dir):
    raw = _require(d, key, (dict, str), "surgery")
    try:
        return space_from_dict(raw, base_dir, check=True)
    except InputError:
        raise
    except ValueError as exc:
        raise InputError(f"{key}: {exc}") from exc


def read_instance(path):
    return instance_from_dict(load(path), Path(path).parent)


# -- surgered spaces -------------------------------------------------------


def surgered_to_dict(surgered):
    d = space_to_dict(surgered.space)
    d["F"] = [[x, c] for x, c in surgered.F.items()]
    d["classes"] = [[c, [[tag, p] for tag, p in surgered.glued.class_members[c]]]
                    for c in surgered.space.points]
    if surgered.quotient_graph is not None:
        qg = surgered.quotient_graph
        d["quotient_graph"] = {
            "nodes": list(qg.nodes),
            "edges": [[u, v, fmt(w)] for u, v, w in qg.edges],
        }
    return d


def surgered_from_dict(d):
    """Parse an export back into plain data: (space, F, classes, graph)."""
    space = space_from_dict({"points": d["points"], "metric": d["metric"]})
    F = {x: c for x, c in d["F"]}
    classes = {c: [tuple(m) for m in ms] for c, ms in d["classes"]}
    return space, F, classes, d.get("quotient_graph")


def roundtrip_surgered(d):
    space, F, classes, qg = surgered_from_dict(d)
    out = space_to_dict(space)
    out["F"] = [[x, c] for x, c in F.items()]
    out["classes"] = [[c, [list(m) for m in classes[c]]] for c in space.points]
    if qg is not None:
        out["quotient_graph"] = {
            "nodes": list(qg["nodes"]),
            "edges": [[u, v, fmt(to_rational(w))] for u, v, w in qg["edges"]],
        }
    return out


# -- certificates and witnesses --------------------------------------------


def certificate_from_dict(d):
    from .coarse import CoarseCertificate, Violation
    viol = [Violation(tuple(v["pair"]), v["side"], to_rational(v["slack"]))
            for v in d.get("violations", [])]
    worst = {k: (None if v is None else to_rational(v))
             for k, v in d.get("worst_slack", {}).items()}
    return CoarseCertificate(d["kind"], to_rational(d["K"]), to_rational(d["C"]),
                             bool(d["valid"]), viol, worst)


def witness_from_dict(d):
    pairs = tuple((p["space"], p["pair"][0], p["pair"][1]) for p in d["pairs"])
    return AdmissibleSequence(pairs, to_rational(d["length"]))


def scenario_config(d):
    """``{"scenario": name, "params": {...}}`` -> (name, params)."""
    if not isinstance(d, dict) or "scenario" not in d:
        raise InputError("scenario config needs a 'scenario' key")
    params = d.get("params") or {}
    if not isinstance(params, dict):
        raise InputError("scenario params must be an object")
    return d["scenario"], params


def is_space(obj):
    return isinstance(obj, FiniteMetricSpace)
