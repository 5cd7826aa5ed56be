"""JSON instance/config files and CSV result tables."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import jsonschema

from ..dist import DiscreteDistribution, LabeledProductDistribution, ProductDistribution
from ..errors import SchemaError

_NUMBERS = {"type": "array", "items": {"type": "number"}, "minItems": 1}

DISTRIBUTION_SCHEMA = {
    "type": "object",
    "properties": {"support": _NUMBERS, "probs": _NUMBERS},
    "required": ["support", "probs"],
}

PRODUCT_SCHEMA = {
    "type": "object",
    "properties": {
        "marginals": {"type": "array", "items": DISTRIBUTION_SCHEMA, "minItems": 1},
        "costs": {"type": "array", "items": {"type": "number", "minimum": 0}},
    },
    "required": ["marginals"],
}

LABELED_SCHEMA = {
    "type": "object",
    "properties": {
        "labels": DISTRIBUTION_SCHEMA,
        "conditionals": {"type": "array", "items": PRODUCT_SCHEMA, "minItems": 1},
    },
    "required": ["labels", "conditionals"],
}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "problem": {"enum": ["prophet", "pandora", "auction", "finite-generic"]},
        "instance": {"type": ["string", "object"]},
        "N_grid": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "trials": {"type": "integer", "minimum": 1},
        "eps": {"type": "number", "exclusiveMinimum": 0},
        "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "grid": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "budget": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "output": {"type": ["string", "null"]},
    },
    "required": ["problem", "instance", "N_grid", "trials", "seed"],
}


def _validate(doc, schema, where: str):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {path}: {exc.message}") from None


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from None


def _distribution(doc, where: str) -> DiscreteDistribution:
    try:
        return DiscreteDistribution(doc["support"], doc["probs"])
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from None


def product_from_dict(doc: dict, where: str = "instance") -> ProductDistribution:
    _validate(doc, PRODUCT_SCHEMA, where)
    return ProductDistribution(
        tuple(_distribution(m, f"{where}: marginals/{i}") for i, m in enumerate(doc["marginals"]))
    )


def costs_from_dict(doc: dict, where: str = "instance") -> tuple:
    _validate(doc, PRODUCT_SCHEMA, where)
    if "costs" not in doc:
        raise SchemaError(f"{where}: a Pandora instance needs 'costs'")
    if len(doc["costs"]) != len(doc["marginals"]):
        raise SchemaError(f"{where}: {len(doc['costs'])} costs for {len(doc['marginals'])} boxes")
    return tuple(float(c) for c in doc["costs"])


def labeled_from_dict(doc: dict, where: str = "instance") -> LabeledProductDistribution:
    _validate(doc, LABELED_SCHEMA, where)
    try:
        return LabeledProductDistribution(
            _distribution(doc["labels"], f"{where}: labels"),
            tuple(product_from_dict(c, f"{where}: conditionals/{i}") for i, c in enumerate(doc["conditionals"])),
        )
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from None


def load_product(path) -> ProductDistribution:
    return product_from_dict(load_json(path), str(path))


def dump_json(doc, path=None) -> str:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def format_float(x: float) -> str:
    """12 significant digits; integers and specials keep a stable spelling."""
    return format(float(x), ".12g")


def write_csv(header, rows, path=None) -> str:
    """Render rows as CSV (floats at 12 significant digits); write to ``path`` if given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
