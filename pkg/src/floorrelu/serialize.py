"""JSON and CSV formats for networks, certificates and error reports.

Every number that a network or certificate depends on is stored as a
dyadic ``{"m": "<integer>", "e": <int>}`` so round trips are bit-exact.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Union

import jsonschema

from .constructor import Certificate
from .dyadic import Dyadic
from .modulus import ModulusSpec
from .network import ActivationKind, Affine, Layer, Network
from .verification import ErrorReport

__all__ = [
    "SchemaError",
    "network_to_json",
    "network_from_json",
    "certificate_to_json",
    "certificate_from_json",
    "report_to_json",
    "report_from_json",
    "report_to_csv",
    "save_json",
    "load_json",
    "dumps",
]

FORMAT_VERSION = 1


class SchemaError(ValueError):
    """Input does not match the expected schema; the message names the offending path."""


_DYADIC = {
    "type": "object",
    "properties": {"m": {"type": "string", "pattern": r"^-?(0|[1-9][0-9]*)$"},
                   "e": {"type": "integer"}},
    "required": ["m", "e"],
    "additionalProperties": False,
}
_VEC = {"type": "array", "items": {"$ref": "#/$defs/dyadic"}}
_MAT = {"type": "array", "items": _VEC}
_OPT_DYADIC = {"anyOf": [{"$ref": "#/$defs/dyadic"}, {"type": "null"}]}

NETWORK_SCHEMA = {
    "$defs": {"dyadic": _DYADIC},
    "type": "object",
    "properties": {
        "format": {"const": "floor-relu-network"},
        "version": {"type": "integer"},
        "input_dim": {"type": "integer", "minimum": 1},
        "layers": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "w": _MAT,
                    "b": _VEC,
                    "act": {"type": "array", "items": {"enum": ["relu", "floor"]}},
                    "nonneg": {"type": "array", "items": {"type": "boolean"}},
                },
                "required": ["w", "b", "act"],
                "additionalProperties": False,
            },
        },
        "out": {
            "type": "object",
            "properties": {"w": _MAT, "b": _VEC},
            "required": ["w", "b"],
            "additionalProperties": False,
        },
    },
    "required": ["input_dim", "layers", "out"],
    "additionalProperties": False,
}

CERTIFICATE_SCHEMA = {
    "$defs": {"dyadic": _DYADIC},
    "type": "object",
    "properties": {
        "format": {"const": "floor-relu-certificate"},
        "version": {"type": "integer"},
        "theorem": {"enum": [1, 2]},
        "d": {"type": "integer", "minimum": 1},
        "N": {"type": "integer", "minimum": 1},
        "L": {"type": "integer", "minimum": 1},
        "N_tilde": {"type": ["integer", "null"]},
        "L_tilde": {"type": ["integer", "null"]},
        "K": {"type": "integer", "minimum": 1},
        "omega": {"$ref": "#/$defs/dyadic"},
        "guard_bits": {"type": "integer", "minimum": 0},
        "eps_guard": {"$ref": "#/$defs/dyadic"},
        "anchor": {"$ref": "#/$defs/dyadic"},
        "width": {"type": "integer"},
        "depth": {"type": "integer"},
        "nonzero_params": {"type": "integer"},
        "error_bound": {"$ref": "#/$defs/dyadic"},
        "inner_error_bound": _OPT_DYADIC,
        "domain_M": _OPT_DYADIC,
        "target": {"type": "object"},
        "modulus": {"type": ["object", "null"]},
        "created": {"type": "string"},
    },
    "required": ["theorem", "d", "N", "L", "K", "omega", "guard_bits", "eps_guard", "anchor",
                 "width", "depth", "nonzero_params", "error_bound", "target"],
    "additionalProperties": False,
}

REPORT_SCHEMA = {
    "$defs": {"dyadic": _DYADIC},
    "type": "object",
    "properties": {
        "format": {"const": "floor-relu-report"},
        "version": {"type": "integer"},
        "sample_count": {"type": "integer", "minimum": 0},
        "max_abs_error": {"$ref": "#/$defs/dyadic"},
        "max_abs_error_float": {"type": "number"},
        "argmax": _VEC,
        "bound": _OPT_DYADIC,
        "passed": {"type": ["boolean", "null"]},
        "seed": {"type": ["integer", "null"]},
        "residual": _OPT_DYADIC,
    },
    "required": ["sample_count", "max_abs_error", "argmax"],
    "additionalProperties": False,
}


def _validate(obj: Any, schema: dict, what: str) -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise SchemaError(f"invalid {what} at {path}: {err.message}")


def _dv(v: Dyadic) -> dict:
    return v.to_json()


def _opt(v):
    return None if v is None else v.to_json()


def _vec(vs) -> list:
    return [v.to_json() for v in vs]


def _rd(obj) -> Dyadic:
    return Dyadic.from_json(obj)


def _ropt(obj):
    return None if obj is None else Dyadic.from_json(obj)


# -- networks ------------------------------------------------------------


def network_to_json(net: Network) -> dict:
    layers = []
    for layer in net.hidden_layers:
        entry = {
            "w": [_vec(row) for row in layer.weights],
            "b": _vec(layer.bias),
            "act": [a.value for a in layer.activations],
        }
        if any(layer.nonneg):
            entry["nonneg"] = list(layer.nonneg)
        layers.append(entry)
    return {
        "format": "floor-relu-network",
        "version": FORMAT_VERSION,
        "input_dim": net.input_dim,
        "layers": layers,
        "out": {"w": [_vec(row) for row in net.output.weights], "b": _vec(net.output.bias)},
    }


def network_from_json(obj: dict) -> Network:
    _validate(obj, NETWORK_SCHEMA, "network")
    layers = []
    dim = obj["input_dim"]
    try:
        for k, entry in enumerate(obj["layers"]):
            acts = tuple(ActivationKind(a) for a in entry["act"])
            layer = Layer(tuple(tuple(_rd(v) for v in row) for row in entry["w"]),
                          tuple(_rd(v) for v in entry["b"]), acts,
                          tuple(entry.get("nonneg", ())), in_dim=dim)
            layers.append(layer)
            dim = layer.out_dim
        out = Affine(tuple(tuple(_rd(v) for v in row) for row in obj["out"]["w"]),
                     tuple(_rd(v) for v in obj["out"]["b"]), dim)
        return Network(obj["input_dim"], tuple(layers), out)
    except ValueError as exc:
        raise SchemaError(f"invalid network: {exc}") from exc


# -- certificates --------------------------------------------------------


def certificate_to_json(cert: Certificate) -> dict:
    return {
        "format": "floor-relu-certificate",
        "version": FORMAT_VERSION,
        "theorem": cert.theorem,
        "d": cert.d,
        "N": cert.N,
        "L": cert.L,
        "N_tilde": cert.N_tilde,
        "L_tilde": cert.L_tilde,
        "K": cert.K,
        "omega": _dv(cert.omega),
        "guard_bits": cert.guard_bits,
        "eps_guard": _dv(cert.eps_guard),
        "anchor": _dv(cert.anchor),
        "width": cert.width,
        "depth": cert.depth,
        "nonzero_params": cert.nonzero_params,
        "error_bound": _dv(cert.error_bound),
        "inner_error_bound": _opt(cert.inner_error_bound),
        "domain_M": _opt(cert.domain_M),
        "target": dict(cert.target),
        "modulus": None if cert.modulus is None else cert.modulus.to_json(),
        "created": cert.created,
    }


def certificate_from_json(obj: dict) -> Certificate:
    _validate(obj, CERTIFICATE_SCHEMA, "certificate")
    mod = obj.get("modulus")
    return Certificate(
        theorem=obj["theorem"], d=obj["d"], N=obj["N"], L=obj["L"], K=obj["K"],
        omega=_rd(obj["omega"]), guard_bits=obj["guard_bits"], eps_guard=_rd(obj["eps_guard"]),
        anchor=_rd(obj["anchor"]), width=obj["width"], depth=obj["depth"],
        nonzero_params=obj["nonzero_params"], error_bound=_rd(obj["error_bound"]),
        target=obj["target"], N_tilde=obj.get("N_tilde"), L_tilde=obj.get("L_tilde"),
        inner_error_bound=_ropt(obj.get("inner_error_bound")), domain_M=_ropt(obj.get("domain_M")),
        modulus=None if mod is None else ModulusSpec.from_json(mod), created=obj.get("created", ""),
    )


# -- reports -------------------------------------------------------------


def report_to_json(rep: ErrorReport) -> dict:
    return {
        "format": "floor-relu-report",
        "version": FORMAT_VERSION,
        "sample_count": rep.sample_count,
        "max_abs_error": _dv(rep.max_abs_error),
        "max_abs_error_float": float(rep.max_abs_error),
        "argmax": _vec(rep.argmax),
        "bound": _opt(rep.bound),
        "passed": rep.passed,
        "seed": rep.seed,
        "residual": _opt(rep.residual),
    }


def report_from_json(obj: dict) -> ErrorReport:
    _validate(obj, REPORT_SCHEMA, "report")
    return ErrorReport(obj["sample_count"], _rd(obj["max_abs_error"]),
                       tuple(_rd(v) for v in obj["argmax"]), _ropt(obj.get("bound")),
                       obj.get("seed"), _ropt(obj.get("residual")))


def report_to_csv(rep: ErrorReport, d: int) -> str:
    """Rows kept by the measurement, columns ``x1..xd, f, phi, abs_err`` (floats)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{j}" for j in range(1, d + 1)] + ["f", "phi", "abs_err"])
    for x, fx, phi, err in rep.rows:
        w.writerow([repr(float(v)) for v in x] + [repr(float(fx)), repr(float(phi)), repr(float(err))])
    return buf.getvalue()


# -- files ---------------------------------------------------------------


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def save_json(path: Union[str, Path], obj: Any) -> None:
    Path(path).write_text(dumps(obj))


def load_json(path: Union[str, Path]) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from exc
