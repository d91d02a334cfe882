"""Run configuration: JSON schema, semantic checks and typed accessors.

Every problem in a document is reported at once, each with a JSON pointer
to the offending location.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import jsonschema

from .substitution import SubstitutionSystem, build_system
from .symbolic import MeasureSampler, parse_word

COMMANDS = ("validate", "exponents", "twist", "veech", "spectral-bound", "deform", "decompose")

_real = {"oneOf": [
    {"type": "number"},
    {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"},
    {"type": "object", "required": ["poly", "root"],
     "properties": {"poly": {"type": "array", "items": {"type": "integer"}, "minItems": 2},
                    "root": {"type": "number"}},
     "additionalProperties": False},
]}
_vector = {"type": "array", "items": _real, "minItems": 1}
_grid = {"type": "object", "required": ["lo", "hi", "count"],
         "properties": {"lo": {"type": "number", "exclusiveMinimum": 0}, "hi": {"type": "number", "exclusiveMinimum": 0},
                        "count": {"type": "integer", "minimum": 1}},
         "additionalProperties": False}
_lambda_grid = {"type": "object", "required": ["lo", "hi", "count"],
                "properties": {"lo": {"type": "number"}, "hi": {"type": "number"},
                               "count": {"type": "integer", "minimum": 1}, "direction": _vector},
                "additionalProperties": False}
_lambdas = {"type": "array", "items": _vector, "minItems": 1}
_prob = {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["system", "sampler", "seed"],
    "properties": {
        "system": {
            "type": "object",
            "required": ["dim", "basis", "expansions", "prototiles", "rules"],
            "properties": {
                "name": {"type": "string"},
                "dim": {"enum": [1, 2]},
                "basis": {"type": "object", "required": ["generators", "mult_tables"],
                          "properties": {"generators": {"type": "array", "items": _vector, "minItems": 1},
                                         "mult_tables": {"type": "array", "minItems": 1, "items": {
                                             "type": "array", "items": {"type": "array", "items": {"type": "integer"}}}}},
                          "additionalProperties": False},
                "expansions": {"type": "array", "items": _real, "minItems": 1},
                "prototiles": {"type": "array", "minItems": 1, "items": {
                    "type": "object", "required": ["label"],
                    "properties": {"label": {"type": "string", "minLength": 1},
                                   "length": {"type": "array", "items": {"type": "integer"}},
                                   "cells": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}}},
                    "additionalProperties": False}},
                "rules": {"type": "array", "minItems": 1, "items": {
                    "type": "object", "required": ["digits"],
                    "properties": {"name": {"type": "string"},
                                   "digits": {"type": "object", "additionalProperties": {
                                       "type": "array", "items": {
                                           "type": "array", "prefixItems": [
                                               {"type": "string"},
                                               {"type": "array", "items": {"type": "integer"}}],
                                           "minItems": 2, "maxItems": 2}}}},
                    "additionalProperties": False}},
                "choice": {"type": "object"},
            },
            "additionalProperties": False,
        },
        "sampler": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["bernoulli", "markov", "word"]},
                "p": _prob,
                "matrix": {"type": "array", "items": _prob},
                "initial": _prob,
                "word": {"type": "string", "pattern": r"^[1-9]+$"},
            },
            "allOf": [
                {"if": {"properties": {"kind": {"const": "bernoulli"}}}, "then": {"required": ["p"]}},
                {"if": {"properties": {"kind": {"const": "markov"}}}, "then": {"required": ["matrix", "initial"]}},
                {"if": {"properties": {"kind": {"const": "word"}}}, "then": {"required": ["word"]}},
            ],
            "additionalProperties": False,
        },
        "seed": {"type": "integer", "minimum": 0},
        "horizon": {"type": "integer", "minimum": 8},
        "function": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["indicator", "boxes"]},
                "weights": {"type": "object", "additionalProperties": {"type": "number"}},
                "boxes": {"type": "object", "additionalProperties": {
                    "type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 3,
                                               "prefixItems": [_vector, _vector, {"type": "number"}]}}},
            },
            "allOf": [
                {"if": {"properties": {"kind": {"const": "indicator"}}}, "then": {"required": ["weights"]}},
                {"if": {"properties": {"kind": {"const": "boxes"}}}, "then": {"required": ["boxes"]}},
            ],
            "additionalProperties": False,
        },
        "experiments": {
            "type": "object",
            "properties": {
                "validate": {"type": "object", "properties": {"n_max": {"type": "integer", "minimum": 1}},
                             "additionalProperties": False},
                "exponents": {"type": "object",
                              "properties": {"n_steps": {"type": "integer", "minimum": 10},
                                             "n_segments": {"type": "integer", "minimum": 2},
                                             "k_max": {"type": "integer", "minimum": 1},
                                             "trials": {"type": "integer", "minimum": 1}},
                              "additionalProperties": False},
                "twist": {"type": "object",
                          "properties": {"lambda": _lambdas, "lambda_grid": _lambda_grid, "R_grid": _grid,
                                         "method": {"enum": ["cocycle", "brute"]}},
                          "required": ["R_grid"], "additionalProperties": False},
                "veech": {"type": "object", "required": ["lambda", "word", "rho", "N"],
                          "properties": {"lambda": _lambdas, "word": {"type": "string", "pattern": r"^[1-9]+$"},
                                         "split": {"type": "integer", "minimum": 1},
                                         "rho": _real, "N": {"type": "integer", "minimum": 1},
                                         "lift": {"type": "boolean"}, "lengths": _vector},
                          "additionalProperties": False},
                "spectral-bound": {"type": "object", "required": ["lambda", "r"],
                                   "properties": {"lambda": _lambdas,
                                                  "r": {"type": "array", "minItems": 1,
                                                        "items": {"type": "number", "exclusiveMinimum": 0,
                                                                  "exclusiveMaximum": 0.5}},
                                                  "n_samples": {"type": "integer", "minimum": 2}},
                                   "additionalProperties": False},
                "deform": {"type": "object", "required": ["lambda", "R_grid"],
                           "properties": {"lengths": {"type": "array", "items": _vector, "minItems": 1},
                                          "linear": {"type": "array", "items": {"type": "array", "items": _vector}},
                                          "lambda": _lambdas, "R_grid": _grid,
                                          "levels": {"type": "integer", "minimum": 1}},
                           "additionalProperties": False},
                "decompose": {"type": "object", "required": ["R"],
                              "properties": {"R": {"type": "array", "minItems": 1,
                                                   "items": {"type": "number", "exclusiveMinimum": 0}},
                                             "n_tilings": {"type": "integer", "minimum": 1}},
                              "additionalProperties": False},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


@dataclass
class ConfigError(Exception):
    errors: list  # [{"pointer": str, "message": str}]

    def __str__(self):
        return "; ".join(f"{e['pointer'] or '/'}: {e['message']}" for e in self.errors)

    def as_dict(self) -> dict:
        return {"error": "config", "errors": self.errors}


def _pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def parse_real_like(v):
    """Fractions stay exact; floats stay floats."""
    if isinstance(v, str):
        return Fraction(v.replace(" ", ""))
    if isinstance(v, dict):
        from .geometry import parse_real
        return parse_real(v)[0]
    return v


def _semantic_errors(doc: dict) -> list:
    errs = []
    system = doc["system"]
    labels = [p["label"] for p in system["prototiles"]]
    if len(set(labels)) != len(labels):
        errs.append(("/system/prototiles", "duplicate prototile labels"))
    n_rules = len(system["rules"])
    for i, rule in enumerate(system["rules"]):
        for parent, digits in rule["digits"].items():
            if parent not in labels:
                errs.append((f"/system/rules/{i}/digits/{parent}", f"undefined label {parent!r}"))
            for j, (child, _) in enumerate(digits):
                if child not in labels:
                    errs.append((f"/system/rules/{i}/digits/{parent}/{j}/0", f"undefined label {child!r}"))
    if len(system["expansions"]) != n_rules:
        errs.append(("/system/expansions", f"{len(system['expansions'])} expansions for {n_rules} rules"))
    sampler = doc["sampler"]
    kind = sampler["kind"]
    if kind == "bernoulli" and "p" in sampler:
        p = sampler["p"]
        if len(p) != n_rules:
            errs.append(("/sampler/p", f"{len(p)} probabilities for {n_rules} rules"))
        if abs(sum(p) - 1.0) > 1e-12:
            errs.append(("/sampler/p", f"probabilities sum {sum(p):g}"))
    if kind == "markov" and "matrix" in sampler:
        for i, row in enumerate(sampler["matrix"]):
            if abs(sum(row) - 1.0) > 1e-12:
                errs.append((f"/sampler/matrix/{i}", f"probabilities sum {sum(row):g}"))
        if "initial" in sampler and abs(sum(sampler["initial"]) - 1.0) > 1e-12:
            errs.append(("/sampler/initial", f"probabilities sum {sum(sampler['initial']):g}"))
    for where, word in (("/sampler/word", sampler.get("word")),
                        ("/experiments/veech/word", doc.get("experiments", {}).get("veech", {}).get("word"))):
        if word and any(int(c) > n_rules for c in word):
            errs.append((where, f"word {word!r} uses a rule beyond {n_rules}"))
    fn = doc.get("function", {})
    for key in ("weights", "boxes"):
        for label in fn.get(key, {}):
            if label not in labels:
                errs.append((f"/function/{key}/{label}", f"undefined label {label!r}"))
    d = system["dim"]
    exps = doc.get("experiments", {})
    for name, section in exps.items():
        for i, lam in enumerate(section.get("lambda", [])):
            if len(lam) != d:
                errs.append((f"/experiments/{name}/lambda/{i}", f"lambda has {len(lam)} coordinates, need {d}"))
        g = section.get("R_grid")
        if g and g["hi"] < g["lo"]:
            errs.append((f"/experiments/{name}/R_grid", "hi below lo"))
    if "twist" in exps and "lambda" not in exps["twist"] and "lambda_grid" not in exps["twist"]:
        errs.append(("/experiments/twist", "needs 'lambda' or 'lambda_grid'"))
    if "deform" in exps and "lengths" not in exps["deform"] and "linear" not in exps["deform"]:
        errs.append(("/experiments/deform", "needs 'lengths' or 'linear'"))
    return [{"pointer": p, "message": m} for p, m in errs]


def canonical_hash(doc: dict) -> str:
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class RunConfig:
    doc: dict
    system: SubstitutionSystem
    sampler: MeasureSampler
    seed: int
    horizon: int
    config_hash: str
    experiments: dict = field(default_factory=dict)

    def experiment(self, name: str) -> dict:
        return dict(self.experiments.get(name, {}))

    def with_seed(self, seed: int) -> "RunConfig":
        doc = dict(self.doc, seed=int(seed))
        return parse_config(json.dumps(doc))

    def lambdas(self, name: str) -> list:
        """Spectral parameters of an experiment; strings become exact fractions."""
        section = self.experiments.get(name, {})
        if "lambda" in section:
            return [tuple(parse_real_like(c) for c in lam) for lam in section["lambda"]]
        grid = section["lambda_grid"]
        n, lo, hi = grid["count"], grid["lo"], grid["hi"]
        direction = [float(parse_real_like(c)) for c in grid.get("direction", [1] * self.system.dim)]
        ts = [lo + (hi - lo) * i / (n - 1) for i in range(n)] if n > 1 else [lo]
        return [tuple(t * c for c in direction) for t in ts]


def parse_config(text: str | bytes) -> RunConfig:
    """Validate a JSON document and build the objects it describes.

    Raises :class:`ConfigError` carrying every problem found.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([{"pointer": "", "message": f"invalid JSON: {exc}"}]) from None
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = [{"pointer": _pointer(e.absolute_path), "message": e.message}
              for e in sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))]
    if errors:
        raise ConfigError(errors)
    errors = _semantic_errors(doc)
    if errors:
        raise ConfigError(errors)
    try:
        system = build_system(doc["system"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError([{"pointer": "/system", "message": str(exc)}]) from None
    s = doc["sampler"]
    try:
        sampler = MeasureSampler(s["kind"], system.n_rules, seed=int(doc["seed"]),
                                 p=tuple(s["p"]) if "p" in s else None,
                                 matrix=tuple(map(tuple, s["matrix"])) if "matrix" in s else None,
                                 initial=tuple(s["initial"]) if "initial" in s else None,
                                 word=parse_word(s["word"]) if "word" in s else None)
    except ValueError as exc:
        raise ConfigError([{"pointer": "/sampler", "message": str(exc)}]) from None
    return RunConfig(doc, system, sampler, int(doc["seed"]), int(doc.get("horizon", 200)), canonical_hash(doc),
                     dict(doc.get("experiments", {})))


def bundled(name: str) -> str:
    """Text of a configuration shipped with the package (``tmpd``, ``fibonacci``, ...)."""
    return resources.files("tilecocycle").joinpath("data", f"{name}.json").read_text(encoding="utf-8")


def bundled_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("tilecocycle").joinpath("data").iterdir()
                  if p.name.endswith(".json"))
