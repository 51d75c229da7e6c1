"""JSON Schemas for scenario files, one payload schema per kind.

Payloads are ``{"tasks": [...]}``; every task carries an ``op`` and may
carry a ``name`` and an ``expect`` value.
"""
from __future__ import annotations

KINDS = ("cantor", "density", "ad", "slalom", "kelley", "bell")

DEFS = {
    "rational": {"type": "string", "pattern": r"^-?[0-9]+(/[0-9]*[1-9][0-9]*)?$"},
    "nat": {"type": "integer", "minimum": 0},
    "pos": {"type": "integer", "minimum": 1},
    "assignment": {
        "type": "object",
        "propertyNames": {"pattern": "^(0|[1-9][0-9]*)$"},
        "additionalProperties": {"enum": [0, 1]},
    },
    "clopen": {"type": "array", "items": {"$ref": "#/$defs/assignment"}},
    "periodic": {
        "type": "object",
        "required": ["mod", "residues"],
        "properties": {
            "mod": {"type": "integer", "minimum": 1, "maximum": 2**22},
            "residues": {"type": "array", "items": {"$ref": "#/$defs/nat"}},
            "added": {"type": "array", "items": {"$ref": "#/$defs/nat"}},
            "removed": {"type": "array", "items": {"$ref": "#/$defs/nat"}},
        },
        "additionalProperties": False,
    },
    "scenario": {
        "type": "object",
        "required": ["points", "family", "ad_bound"],
        "properties": {
            "points": {"type": "object", "additionalProperties": {
                "type": "array", "items": {"type": "string", "pattern": "^[01]+$"}}},
            "family": {"type": "object", "additionalProperties": {
                "type": "array", "minItems": 1, "items": {"$ref": "#/$defs/nat"}}},
            "ad_bound": {"$ref": "#/$defs/nat"},
        },
        "additionalProperties": False,
    },
    "slalom": {
        "type": "object",
        "required": ["levels"],
        "properties": {"levels": {
            "type": "object",
            "propertyNames": {"pattern": "^(0|[1-9][0-9]*)$"},
            "additionalProperties": {"type": "array", "items": {"$ref": "#/$defs/nat"}},
        }},
        "additionalProperties": False,
    },
    "expr": {
        "type": "object",
        "minProperties": 1,
        "maxProperties": 1,
        "properties": {
            "const": {"type": "boolean"},
            "posT": {"$ref": "#/$defs/slalom"},
            "height": {
                "type": "object",
                "required": ["S", "n"],
                "properties": {"S": {"$ref": "#/$defs/slalom"}, "n": {"$ref": "#/$defs/nat"}},
                "additionalProperties": False,
            },
            "and": {"type": "array", "items": {"$ref": "#/$defs/expr"}},
            "or": {"type": "array", "items": {"$ref": "#/$defs/expr"}},
            "not": {"$ref": "#/$defs/expr"},
        },
        "additionalProperties": False,
    },
    "family": {
        "type": "object",
        "required": ["atoms", "sets"],
        "properties": {
            "atoms": {"type": "array", "items": {"type": "string"}},
            "sets": {"type": "array", "items": {
                "type": "array", "minItems": 1, "items": {"type": "string"}}},
        },
        "additionalProperties": False,
    },
    "node": {"type": "array", "items": {"$ref": "#/$defs/nat"}},
    "pi": {
        "type": "object",
        "required": ["rows"],
        "properties": {"rows": {"type": "array", "minItems": 1, "items": {"$ref": "#/$defs/node"}}},
        "additionalProperties": False,
    },
}


def _ref(name: str) -> dict:
    return {"$ref": f"#/$defs/{name}"}


def _list(name: str, **kw) -> dict:
    return {"type": "array", "items": _ref(name), **kw}


# op -> (required fields, field schemas); "name" is allowed everywhere
OPS: dict[str, dict[str, tuple[list[str], dict]]] = {
    "cantor": {
        "measure": (["set"], {"set": _ref("clopen"), "expect": _ref("rational")}),
        "support": (["set"], {"set": _ref("clopen"), "expect": _list("nat")}),
        "product": (["a", "b"], {"a": _ref("clopen"), "b": _ref("clopen"),
                                 "expect": _ref("rational")}),
    },
    "density": {
        "density": (["set"], {"set": _ref("periodic"), "expect": _ref("rational")}),
        "transfer": (["a"], {"a": _ref("clopen"), "b": _ref("clopen")}),
        "buck_union": (["chain", "budget", "probes"], {
            "chain": _list("periodic", minItems=1), "supremum": _ref("rational"),
            "budget": _ref("pos"), "probes": _list("pos", minItems=1)}),
    },
    "ad": {
        "lower_bound": (["scenario", "alphas", "tau"], {
            "scenario": _ref("scenario"), "alphas": {"type": "array", "items": {"type": "string"}},
            "tau": _ref("assignment")}),
        "emptiness": (["scenario", "C", "betas", "alphas", "depth"], {
            "scenario": _ref("scenario"), "C": _ref("clopen"),
            "betas": {"type": "array", "items": {"type": "string"}},
            "alphas": {"type": "array", "items": {"type": "string"}},
            "depth": _ref("nat"), "expect": {"enum": ["empty", "nonempty", "unknown"]}}),
        "contains": (["scenario", "alpha", "n"], {
            "scenario": _ref("scenario"), "alpha": {"type": "string"}, "n": _ref("nat")}),
    },
    "slalom": {
        "decide": (["expr"], {"expr": _ref("expr"), "expect": {"type": "boolean"}}),
        "w_delta_class": (["W", "delta"], {"W": _ref("slalom"), "delta": _ref("rational"),
                                           "expect": _ref("nat")}),
        "a_w_measure": (["W", "n"], {"W": _ref("slalom"), "n": _ref("nat"),
                                     "expect": _ref("rational")}),
        "cl2": (["vs", "delta"], {"vs": _list("slalom", minItems=1), "delta": _ref("rational")}),
        "cl2_random": (["count", "delta"], {"count": {"type": "integer", "minimum": 1, "maximum": 1000},
                                            "delta": _ref("rational"),
                                            "k": {"type": "integer", "minimum": 1, "maximum": 16}}),
        "diagonal": (["wns", "H"], {"wns": _list("slalom"), "H": _ref("nat")}),
    },
    "kelley": {
        "kappa": (["family"], {"family": _ref("family"),
                               "L": {"type": "integer", "minimum": 1, "maximum": 16},
                               "expect": _ref("rational")}),
        "fragmentation": (["families", "delta"], {"families": _list("family"),
                                                  "delta": _ref("rational")}),
    },
    "bell": {
        "measure": (["nodes"], {"nodes": _list("node"), "expect": _ref("rational")}),
        "taylor": (["m", "n"], {"m": _ref("pos"), "n": _ref("pos"), "expect": {"type": "boolean"}}),
        "taylor_grid": (["m_max", "n_max"], {"m_max": _ref("pos"), "n_max": _ref("pos")}),
        "v_trunc": (["pi"], {"pi": _ref("pi"), "H": _ref("nat"), "expect": _ref("rational")}),
        "iso": (["pos", "neg", "H"], {"pos": _list("pi"), "neg": _list("pi"), "H": _ref("nat"),
                                      "s": _ref("node")}),
        "positivity": (["s", "pis", "n"], {"s": _ref("node"), "pis": _list("pi", minItems=1),
                                           "n": _ref("pos")}),
    },
}


def task_schema(kind: str) -> dict:
    ops = OPS[kind]
    branches = []
    for op, (required, props) in ops.items():
        branches.append({
            "if": {"properties": {"op": {"const": op}}},
            "then": {
                "required": required,
                "properties": {"op": {}, "name": {"type": "string"}, **props},
                "additionalProperties": False,
            },
        })
    return {
        "type": "object",
        "required": ["op"],
        "properties": {"op": {"enum": sorted(ops)}},
        "allOf": branches,
    }


def payload_schema(kind: str) -> dict:
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "required": ["tasks"],
        "properties": {"tasks": {"type": "array", "minItems": 1, "items": task_schema(kind)}},
        "additionalProperties": False,
        "$defs": DEFS,
    }


SCENARIO_FILE = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["kind", "payload"],
    "properties": {
        "kind": {"enum": list(KINDS)},
        "payload": {"type": "object"},
        "seed": {"type": "integer"},
    },
    "additionalProperties": False,
}


def all_schemas() -> dict:
    return {"scenario_file": SCENARIO_FILE, "payloads": {k: payload_schema(k) for k in KINDS}}
