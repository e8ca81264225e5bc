"""Run configuration: a TOML or JSON document.

Example::

    family = "axb"
    beta = [1, 3]

    [weights]          # optional; generator -> "p/q"
    x = "1"

    [cutoffs]
    class_cutoff = 16

    [[traces]]
    type = "character"
    z = [1, 0]

Unknown keys are rejected with the line they appear on.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import LcmKmsError
from .kms import Trace, trace_from_spec
from .monoids import Element, Monoid, make_monoid
from .numeric import parse_beta
from .scale import Scale, make_scale

SCHEMA = "kms-lcm/1"

TOP_KEYS = {"schema", "family", "params", "weights", "beta", "cutoffs", "traces", "output", "kms", "boundary"}
CUTOFF_DEFAULTS: dict[str, Any] = {
    "class_cutoff": 16,
    "zeta_cutoff": 10_000,
    "kms_cutoff": 10_000,
    "depth": 4,
    "kernel_depth": 10,
    "ladder_height": None,
    "max_subset": 6,
    "subset_budget": 200_000,
    "tolerance": None,
}
PARAM_KEYS = {"free": {"k"}, "free_abelian": {"k"}, "axb": {"primes"}, "c3": set(), "lamplighter": set()}
TRACE_KEYS = {"character": {"type", "z"}, "fourier": {"type", "coeffs"}, "lamp_character": {"type", "signs"}}


class ConfigError(LcmKmsError):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line else source
        super().__init__(f"{where}: {message}")


@dataclass
class Config:
    monoid: Monoid
    scale: Scale
    betas: list[Any]
    cutoffs: dict[str, Any]
    traces: list[Trace]
    trace_specs: list[dict]
    output: str | None = None
    kms_pairs: list[tuple[Element, Element]] = field(default_factory=list)
    boundary_sets: list[list[Element]] = field(default_factory=list)


def _line_of(text: str, key: str) -> int | None:
    pats = [rf'^\s*\[*\s*{re.escape(key)}\s*[\]=]', rf'"{re.escape(key)}"\s*:', rf'^\s*{re.escape(key)}\s*=']
    for i, line in enumerate(text.splitlines(), 1):
        if any(re.search(p, line) for p in pats):
            return i
    return None


def load_config(path: str | Path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", source=str(path)) from None
    return parse_config(text, source=str(path), is_json=path.suffix == ".json")


def parse_config(text: str, source: str = "<config>", is_json: bool | None = None) -> Config:
    if is_json is None:
        is_json = text.lstrip().startswith("{")
    try:
        doc = json.loads(text) if is_json else tomllib.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno, source) from None
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"invalid TOML: {exc}", int(m.group(1)) if m else None, source) from None
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a table", 1, source)

    def fail(msg: str, key: str | None = None):
        raise ConfigError(msg, _line_of(text, key) if key else None, source)

    for key in doc:
        if key not in TOP_KEYS:
            fail(f"unknown key {key!r}", key)
    if doc.get("schema", SCHEMA) != SCHEMA:
        fail(f"unsupported schema {doc['schema']!r}; expected {SCHEMA!r}", "schema")
    if "family" not in doc:
        fail("missing required key 'family'")
    family = doc["family"]
    if family not in PARAM_KEYS:
        fail(f"unknown family {family!r}; choose from {sorted(PARAM_KEYS)}", "family")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        fail("params must be a table", "params")
    for key in params:
        if key not in PARAM_KEYS[family]:
            fail(f"unknown parameter {key!r} for family {family!r}", key)
    try:
        monoid = make_monoid(family, **params)
    except (TypeError, ValueError) as exc:
        fail(f"bad parameters: {exc}", "params")

    weights = doc.get("weights", {})
    if not isinstance(weights, dict):
        fail("weights must be a table", "weights")
    try:
        parsed = {k: Fraction(str(v)) for k, v in weights.items()}
    except (ValueError, ZeroDivisionError) as exc:
        fail(f"bad weight: {exc}", "weights")
    try:
        scale = make_scale(monoid, parsed)
    except (ValueError, LcmKmsError) as exc:
        key = next((k for k in weights if k not in monoid.generators()), "weights")
        fail(f"invalid scale: {exc}", key)

    raw_beta = doc.get("beta", [])
    if not isinstance(raw_beta, list):
        raw_beta = [raw_beta]
    try:
        betas = [parse_beta(b) for b in raw_beta]
    except (TypeError, ValueError):
        fail("beta must be a list of numbers", "beta")

    cutoffs = dict(CUTOFF_DEFAULTS)
    given = doc.get("cutoffs", {})
    if not isinstance(given, dict):
        fail("cutoffs must be a table", "cutoffs")
    for key, v in given.items():
        if key not in CUTOFF_DEFAULTS:
            fail(f"unknown cutoff {key!r}", key)
        if isinstance(v, bool) or not isinstance(v, (int, float, str)):
            fail(f"cutoff {key!r} must be a number", key)
        cutoffs[key] = v

    specs = doc.get("traces", [{"type": "character", "z": [1, 0]}])
    if not isinstance(specs, list):
        fail("traces must be an array of tables", "traces")
    traces = []
    for spec in specs:
        if not isinstance(spec, dict) or spec.get("type") not in TRACE_KEYS:
            fail(f"trace needs type in {sorted(TRACE_KEYS)}", "traces")
        for key in spec:
            if key not in TRACE_KEYS[spec["type"]]:
                fail(f"unknown trace key {key!r}", key)
        try:
            traces.append(trace_from_spec(spec))
        except (ValueError, KeyError, TypeError, IndexError) as exc:
            fail(f"bad trace: {exc}", "traces")

    kms = doc.get("kms", {})
    if not isinstance(kms, dict):
        fail("kms must be a table", "kms")
    pairs = []
    for key in kms:
        if key != "pairs":
            fail(f"unknown key {key!r} in [kms]", key)
    for pair in kms.get("pairs", []):
        try:
            s, t = pair
            pairs.append((monoid.parse(s), monoid.parse(t)))
        except (ValueError, TypeError) as exc:
            fail(f"bad kms pair {pair!r}: {exc}", "pairs")

    boundary = doc.get("boundary", {})
    if not isinstance(boundary, dict):
        fail("boundary must be a table", "boundary")
    for key in boundary:
        if key != "sets":
            fail(f"unknown key {key!r} in [boundary]", key)
    sets = []
    for F in boundary.get("sets", []):
        try:
            sets.append([monoid.parse(f) for f in F])
        except (ValueError, TypeError) as exc:
            fail(f"bad boundary set {F!r}: {exc}", "sets")

    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        fail("output must be a path string", "output")
    return Config(monoid, scale, betas, cutoffs, traces, specs, output, pairs, sets)
