"""Algebra-spec documents (JSON) and report serialization."""

import copy
import json
from importlib import resources

import jsonschema
import numpy as np

from .algebra import Base, Block, Conflict, Element, FiberedAlgebra
from .errors import SchemaError


def load_schema():
    text = resources.files("dixlab").joinpath("schema/algebra-spec.schema.json").read_text("utf-8")
    return json.loads(text)


def _lax(schema):
    """Copy of the schema that tolerates unknown keys."""
    out = copy.deepcopy(schema)

    def walk(node):
        if isinstance(node, dict):
            if node.get("additionalProperties") is False:
                node.pop("additionalProperties")
            for v in node.values():
                walk(v)
        elif isinstance(node, list):
            for v in node:
                walk(v)

    walk(out)
    return out


def _pointer(parts):
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def _reject_constant(name):
    raise SchemaError(f"non-finite number {name} is not allowed", "")


def _decode(document):
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError(f"document is not UTF-8: {exc}", "") from None
    if isinstance(document, str):
        try:
            return json.loads(document, parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}", "") from None
    return document


def _matrix(rows, path):
    m = np.array([[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128) \
        if all(len(r) == len(rows) for r in rows) else None
    if m is None or m.shape != (len(rows), len(rows)):
        raise SchemaError("matrix must be square", path)
    return m


def parse_spec(document, lax=False):
    """Parse a spec document (text, bytes or decoded JSON).

    Returns ``(algebra, elements)``.  Strict mode rejects unknown keys; every
    problem raises :class:`SchemaError` carrying a JSON-pointer path.
    """
    doc = _decode(document)
    schema = load_schema()
    if lax:
        schema = _lax(schema)
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        err = errors[0]
        parts = list(err.absolute_path)
        if err.validator == "required":
            missing = [k for k in err.validator_value if k not in err.instance]
            if missing:
                parts.append(missing[0])
        raise SchemaError(err.message, _pointer(parts))

    b = doc["base"]
    kind = b["kind"]
    try:
        base = Base(kind, b["points"], float(b.get("t_min", 0.0)), float(b.get("t_max", 1.0)))
    except ValueError as exc:
        raise SchemaError(str(exc), "/base") from None
    if len(doc["fibers"]) != base.points:
        raise SchemaError(f"{len(doc['fibers'])} fibers for {base.points} points", "/fibers")
    fibers = []
    for p, fib in enumerate(doc["fibers"]):
        row = []
        for i, blk in enumerate(fib):
            try:
                row.append(Block(blk["dim"], blk["has_trace"], blk["is_maximal"]))
            except ValueError as exc:
                raise SchemaError(str(exc), f"/fibers/{p}/{i}") from None
        if not any(x.is_maximal for x in row):
            raise SchemaError("fiber has no maximal block", f"/fibers/{p}")
        fibers.append(tuple(row))
    algebra = FiberedAlgebra(base, fibers, doc.get("name", ""), tuple(doc.get("notes", ())))

    elements = {}
    for name, pts in doc["elements"].items():
        path = f"/elements{_pointer([name])}"
        if len(pts) != base.points:
            raise SchemaError(f"element has {len(pts)} points, base has {base.points}", path)
        blocks = []
        for p, (fib, mats) in enumerate(zip(fibers, pts)):
            if len(mats) != len(fib):
                raise SchemaError(f"{len(mats)} blocks for a fiber of {len(fib)}", f"{path}/{p}")
            row = []
            for i, (blk, rows) in enumerate(zip(fib, mats)):
                m = _matrix(rows, f"{path}/{p}/{i}")
                if m.shape[0] != blk.dim:
                    raise SchemaError(f"matrix is {m.shape[0]}x{m.shape[0]}, block dim is {blk.dim}",
                                      f"{path}/{p}/{i}")
                row.append(m)
            blocks.append(row)
        elements[name] = Element(algebra, blocks)
    return algebra, elements


def load_spec(path, lax=False):
    with open(path, "rb") as fh:
        return parse_spec(fh.read(), lax=lax)


def _num(x):
    x = float(x)
    return 0.0 if x == 0 else x  # no negative zero in canonical output


def encode_matrix(m):
    return [[[_num(z.real), _num(z.imag)] for z in row] for row in np.asarray(m)]


def encode_element(element):
    return [[encode_matrix(m) for m in row] for row in element.blocks]


def spec_document(algebra, elements):
    b = algebra.base
    doc = {"base": {"kind": b.kind, "points": b.points}}
    if b.is_path:
        doc["base"]["t_min"] = _num(b.t_min)
        doc["base"]["t_max"] = _num(b.t_max)
    doc["fibers"] = [[{"dim": x.dim, "has_trace": x.has_trace, "is_maximal": x.is_maximal}
                      for x in fib] for fib in algebra.fibers]
    doc["elements"] = {k: encode_element(e) for k, e in sorted(elements.items())}
    if algebra.name:
        doc["name"] = algebra.name
    if algebra.notes:
        doc["notes"] = list(algebra.notes)
    return doc


def dumps(obj):
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=1, separators=(",", ": "), allow_nan=False) + "\n"


def emit_spec(algebra, elements):
    return dumps(spec_document(algebra, elements))


def jsonable(obj):
    """Convert reports (numpy values, complex numbers, elements) to JSON data."""
    if isinstance(obj, Element):
        return {"element": encode_element(obj)}
    if isinstance(obj, Conflict):
        return {"conflict": [jsonable(v) for v in obj.values]}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        if z.imag == 0:
            return _finite(z.real)
        return [_finite(z.real), _finite(z.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _finite(float(obj))
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _finite(x):
    if np.isfinite(x):
        return _num(x)
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
