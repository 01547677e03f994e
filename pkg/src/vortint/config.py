"""
Experiment configuration: YAML in, validated dataclass out.

Numbers may be written as simple expressions in ``pi`` ("2*pi", "pi/2").
Validation runs the JSON schema first and then the semantic checks
(names exist, surface/integral/flow dimensions are compatible), so every
error names the offending field, e.g. ``integrals[0].kind``.
"""
from __future__ import annotations

import ast
import copy
import json
import math
import operator
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Dict, List, Optional

import jsonschema
import yaml

from .errors import ConfigError
from .integrals import INTEGRALS, required_parity
from .meshes import BUILDERS

FLOW_NAMES = ("rigid_rotation", "taylor_green", "abc", "boosted_abc", "isentropic_vortex", "stratified_shear",
              "uniform", "baroclinic_affine", "taylor_green_4d", "spectral2d")

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_CONSTS = {"pi": math.pi, "tau": 2 * math.pi}


def eval_number(text: str, path: str = "") -> float:
    """Evaluate numbers, pi/tau and + - * / ** without eval()."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _CONSTS:
            return _CONSTS[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise ValueError("unsupported expression")

    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(path or "<value>", f"cannot evaluate {text!r} ({exc})") from None


def _looks_numeric(text: str) -> bool:
    return any(c.isdigit() for c in text) or any(k in text for k in _CONSTS)


_TEXT_KEYS = {"name", "builder", "kind", "label", "dir", "formats", "type", "rule", "metric"}


def resolve_numbers(obj, path=""):
    """Replace numeric-expression strings by floats, recursively.

    Values of name-like keys and strings that do not look like expressions
    pass through.
    """
    if isinstance(obj, dict):
        return {k: v if k in _TEXT_KEYS else resolve_numbers(v, f"{path}.{k}" if path else k)
                for k, v in obj.items()}
    if isinstance(obj, list):
        return [resolve_numbers(v, f"{path}[{i}]") for i, v in enumerate(obj)]
    if isinstance(obj, str) and _looks_numeric(obj) and not obj.isidentifier():
        return eval_number(obj, path)
    if isinstance(obj, str) and obj in _CONSTS:
        return _CONSTS[obj]
    return obj


def load_schema() -> dict:
    with resources.files("vortint").joinpath("docs/config.schema.json").open() as fh:
        return json.load(fh)


def _error_path(err: jsonschema.ValidationError) -> str:
    out = ""
    for p in err.absolute_path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    if err.validator == "required":
        missing = err.message.split("'")[1]
        out = f"{out}.{missing}" if out else missing
    if err.validator == "additionalProperties" and "'" in err.message:
        extra = err.message.split("'")[1]
        out = f"{out}.{extra}" if out else extra
    return out or "<root>"


@dataclass
class ExperimentConfig:
    flow: Dict[str, Any]
    surface: Dict[str, Any]
    integrals: List[Dict[str, Any]]
    grid: Dict[str, Any]
    name: str = "experiment"
    refinement: Dict[str, Any] = field(default_factory=dict)
    tolerances: Dict[str, Any] = field(default_factory=dict)
    output: Dict[str, Any] = field(default_factory=lambda: {"dir": "vortint_out", "formats": ["csv", "json"]})

    def to_dict(self) -> dict:
        return {"name": self.name, "flow": copy.deepcopy(self.flow), "surface": copy.deepcopy(self.surface),
                "integrals": copy.deepcopy(self.integrals), "grid": copy.deepcopy(self.grid),
                "refinement": copy.deepcopy(self.refinement), "tolerances": copy.deepcopy(self.tolerances),
                "output": copy.deepcopy(self.output)}

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @property
    def cadence(self) -> int:
        return int(self.grid.get("cadence", 10))


def _normalize(doc: dict) -> dict:
    doc = copy.deepcopy(doc)
    doc.setdefault("name", "experiment")
    doc["flow"].setdefault("params", {})
    doc["surface"].setdefault("params", {})
    for item in doc["integrals"]:
        item.setdefault("f", None)
        item.setdefault("params", {})
    doc["grid"].setdefault("t0", 0.0)
    doc["grid"].setdefault("cadence", 10)
    doc.setdefault("refinement", {})
    doc.setdefault("tolerances", {})
    out = doc.setdefault("output", {})
    out.setdefault("dir", "vortint_out")
    out.setdefault("formats", ["csv", "json"])
    return doc


# --- static dimension bookkeeping ------------------------------------------

def flow_dim(name: str, params: dict) -> int:
    if name in ("taylor_green", "isentropic_vortex", "spectral2d"):
        return 2
    if name in ("abc", "boosted_abc"):
        return 3
    if name == "taylor_green_4d":
        return 4
    if name in ("rigid_rotation", "stratified_shear", "baroclinic_affine"):
        return int(params.get("n", 2))
    if name == "uniform":
        return len(params.get("U", (1.0, 0.0)))
    raise KeyError(name)


def surface_dims(builder: str, params: dict):
    """(sdim, ambient dim or None, closed) without building the mesh."""
    p = params
    if builder == "circle":
        c = p.get("center", (0.0, 0.0))
        return 1, p.get("dim") or len(c), True
    if builder == "polyline":
        return 1, len(p["points"][0]), bool(p.get("closed", False))
    if builder == "segment":
        return 1, len(p["a"]), False
    if builder == "disk":
        return 2, p.get("dim") or len(p.get("center", (0.0, 0.0))), False
    if builder == "rectangle":
        return 2, p.get("dim", 2), False
    if builder == "sphere_s2":
        return 2, 3, True
    if builder == "torus":
        return 2, 3, True
    if builder == "ball":
        return 3, 3, False
    if builder == "box_domain":
        n = int(p.get("n", 2))
        per = p.get("periodic", False)
        return n, n, per is True or (isinstance(per, list) and len(per) == n)
    if builder == "parallelepiped":
        edges = p["edges"]
        per = p.get("periodic", [])
        return len(edges[0]), len(edges), len(per) == len(edges[0])
    if builder == "simplex_patch":
        v = p["vertices"]
        return len(v) - 1, len(v[0]), False
    raise KeyError(builder)


def validate(doc: dict) -> ExperimentConfig:
    try:
        jsonschema.validate(doc, load_schema())
    except jsonschema.ValidationError as err:
        raise ConfigError(_error_path(err), err.message) from None
    doc = _normalize(resolve_numbers(doc))

    fname = doc["flow"]["name"]
    if fname not in FLOW_NAMES:
        raise ConfigError("flow.name", f"unknown flow {fname!r}; known: {', '.join(FLOW_NAMES)}")
    try:
        n = flow_dim(fname, doc["flow"]["params"])
    except (TypeError, ValueError) as exc:
        raise ConfigError("flow.params", str(exc)) from None

    builder = doc["surface"]["builder"]
    if builder not in BUILDERS:
        raise ConfigError("surface.builder", f"unknown builder {builder!r}; known: {', '.join(sorted(BUILDERS))}")
    try:
        sdim, amb, closed = surface_dims(builder, doc["surface"]["params"])
    except (KeyError, IndexError, TypeError) as exc:
        raise ConfigError("surface.params", f"missing or malformed parameter ({exc})") from None
    placement = doc["surface"].get("placement") or {}
    if "matrix" in placement:
        amb = len(placement["matrix"])
    if amb is not None and amb != n:
        raise ConfigError("surface.params", f"surface lives in R^{amb} but flow {fname!r} is {n}-dimensional")

    for i, item in enumerate(doc["integrals"]):
        kind = item["kind"]
        if kind not in INTEGRALS:
            raise ConfigError(f"integrals[{i}].kind", f"unknown integral {kind!r}")
        parity, needs_closed = required_parity(kind)
        ok = {"odd": sdim % 2 == 1, "even": sdim % 2 == 0, "full": sdim == n}[parity]
        if kind == "circulation":
            ok = sdim == 1
        if not ok:
            want = {"odd": "an odd", "even": "an even", "full": "a full"}[parity]
            raise ConfigError(f"integrals[{i}].kind",
                              f"{kind} needs {want}-dimensional surface, {builder} has sdim={sdim}")
        if needs_closed and not closed:
            raise ConfigError(f"integrals[{i}].kind", f"{kind} needs a closed surface")
        if kind == "enstrophy" and n % 2 and item["f"] is not None and not isinstance(item["f"], (int, float)):
            raise ConfigError(f"integrals[{i}].f", "non-constant enstrophy weight needs even flow dimension")

    g = doc["grid"]
    if not g["dt"] > 0 or not g["t1"] > g["t0"]:
        raise ConfigError("grid", "needs dt > 0 and t1 > t0")
    r = (g["t1"] - g["t0"]) / g["dt"]
    if abs(r - round(r)) > 1e-9 * max(1.0, r):
        raise ConfigError("grid.dt", f"(t1 - t0)/dt = {r} is not an integer")
    levels = doc["refinement"].get("dt_levels")
    if levels is not None and len(levels) < 3:
        raise ConfigError("refinement.dt_levels", "order fits need at least three levels")
    mlevels = doc["refinement"].get("mesh_levels")
    if mlevels is not None and len(mlevels) < 3:
        raise ConfigError("refinement.mesh_levels", "order fits need at least three levels")
    return ExperimentConfig(**doc)


def loads(text: str) -> ExperimentConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"YAML parse error: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a mapping")
    return validate(doc)


def load(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            return loads(fh.read())
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from None
