"""Experiment configuration: an INI file with [scenario], [run.N] and [output].

[scenario] holds ``name``, the builder parameters, and the experiment-wide
``seed``, ``tol`` and ``n_max``. Each [run.N] section is one operation request,
executed in increasing N. Numbers accept ``2^k``; lists are comma separated.
"""
from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from typing import Any

from .averaging import DEFAULT_N_MAX, DEFAULT_TOL
from .errors import ConfigError, ScenarioError
from .scenarios import SCENARIO_NAMES, ScenarioSpec, build

SCHEMA_VERSION = 1

_POINT_KEYS = {"grid": "int", "sample": "int", "points": "points"}
_AVG_KEYS = {"function": "names", "tol": "float", "n_max": "int"}
_PROBE_KEYS = {"eps": "floats", "probe_radius": "float", "horizon": "int", "trials": "int",
               "seed": "int"}
_CENSUS_KEYS = {"sample_size": "int", "cutoff": "int", "cluster_sep": "float", "seed": "int"}

OPERATIONS: dict[str, dict[str, str]] = {
    "folner_average": {**_POINT_KEYS, **_AVG_KEYS},
    "orbit_closure_average": {**_POINT_KEYS, "function": "names", "quadrature_size": "int"},
    "expectation_field": {**_POINT_KEYS, **_AVG_KEYS, "jump_window": "float",
                          "jump_threshold": "float"},
    "stability_probe": {**_POINT_KEYS, **_PROBE_KEYS},
    "uniform_continuity_probe": {**_POINT_KEYS, **_PROBE_KEYS},
    "almost_periodicity_test": {**_POINT_KEYS, "function": "names", "eps": "floats",
                                "translate_count": "int", "probe_count": "int",
                                "net_cap": "int", "seed": "int"},
    "census": dict(_CENSUS_KEYS),
    "classify_module": {**_CENSUS_KEYS, "card_bound": "int", "cluster_bound": "int"},
    "invariant_measure": {"points": "points", "subset": "name", "start": "float",
                          "length": "float", "a0_length": "float", "prefix": "ints",
                          "tol": "float", "translate_pool_size": "int",
                          "universe_size": "int", "seed": "int"},
}

# operations whose requests must name catalog functions
_NEEDS_FUNCTION = {"folner_average", "orbit_closure_average", "expectation_field",
                   "almost_periodicity_test"}
_EXPERIMENT_KEYS = {"seed": "int", "tol": "float", "n_max": "int"}
_OUTPUT_KEYS = {"dir": "str"}
_NAME_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
_POINT_RE = re.compile(r"\s*([A-Za-z][\w+\-]*)\(([^()]*)\)\s*(?:,|\Z)")


@dataclass(frozen=True)
class OperationRequest:
    index: int
    op: str
    params: dict[str, Any]
    line: int | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioSpec
    operations: tuple[OperationRequest, ...]
    output_dir: str = "orbitavg_out"
    seed: int = 0
    tol: float = DEFAULT_TOL
    n_max: int = DEFAULT_N_MAX
    overrides: dict[str, Any] = field(default_factory=dict)


def parse_number(text: str, kind: str = "float"):
    """Parse an int or float literal; ``a^b`` means a ** b."""
    t = text.strip()
    m = re.fullmatch(r"([+-]?\d+)\s*\^\s*(\d+)", t)
    if m:
        v = int(m.group(1)) ** int(m.group(2))
        return v if kind == "int" else float(v)
    if kind == "int":
        v = float(t) if re.fullmatch(r"[+-]?\d+(\.0*)?([eE]\+?\d+)?", t) else None
        if v is None or v != int(v):
            raise ValueError(f"not an integer: {text!r}")
        return int(v)
    return float(t)


def parse_points(text: str) -> tuple[tuple[str, tuple[float, ...]], ...]:
    """``S+(0.25), Sigma(-3.5), apex()`` -> ((stratum, coords), ...)."""
    out, pos, t = [], 0, text.strip()
    while pos < len(t):
        m = _POINT_RE.match(t, pos)
        if not m:
            raise ValueError(f"malformed point list near {t[pos:]!r}")
        coords = tuple(float(c) for c in m.group(2).split(",") if c.strip())
        out.append((m.group(1), coords))
        pos = m.end()
    if not out:
        raise ValueError("empty point list")
    return tuple(out)


def _convert(kind: str, raw: str):
    items = [s.strip() for s in raw.split(",")]
    if kind == "int":
        return parse_number(raw, "int")
    if kind == "float":
        return parse_number(raw)
    if kind == "floats":
        return tuple(parse_number(s) for s in items)
    if kind == "ints":
        return tuple(parse_number(s, "int") for s in items if s)
    if kind == "names":
        return tuple(s for s in items if s)
    if kind == "points":
        return parse_points(raw)
    return raw.strip()


def _scenario_value(raw: str):
    try:
        return parse_number(raw, "int")
    except ValueError:
        pass
    try:
        return parse_number(raw)
    except ValueError:
        return raw.strip()


def _line_index(text: str) -> dict[tuple[str, str | None], int]:
    """(section, key) -> 1-based line number; key None marks the section header."""
    where, section = {}, None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip()
            where[(section, None)] = n
        elif section is not None and ("=" in s or ":" in s):
            key = re.split(r"[=:]", s, maxsplit=1)[0].strip().lower()
            where.setdefault((section, key), n)
    return where


def parse_config(text: str) -> ExperimentConfig:
    """Validate a configuration text and fill defaults (tol=1e-3, n_max=2^20, seed=0)."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of any section", exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", lineno) from None
    lines = _line_index(text)

    def fail(msg, section, key=None):
        raise ConfigError(msg, lines.get((section, key), lines.get((section, None))))

    for section in parser.sections():
        if section not in ("scenario", "output") and not re.fullmatch(r"run\.\d+", section):
            fail(f"unknown section [{section}]", section)
        for key in parser[section]:
            if not _NAME_RE.match(key):
                fail(f"keys are lowercase snake_case, got {key!r}", section, key)

    if "scenario" not in parser or "name" not in parser["scenario"]:
        raise ConfigError("missing scenario name ([scenario] name = ...)",
                          lines.get(("scenario", None)))
    sc = parser["scenario"]
    name = sc["name"].strip()
    if name not in SCENARIO_NAMES:
        fail(f"unknown scenario {name!r}; choose from {', '.join(SCENARIO_NAMES)}", "scenario", "name")
    experiment, params = {}, {}
    for key, raw in sc.items():
        if key == "name":
            continue
        if key in _EXPERIMENT_KEYS:
            try:
                experiment[key] = _convert(_EXPERIMENT_KEYS[key], raw)
            except ValueError as exc:
                fail(f"malformed number for {key}: {exc}", "scenario", key)
        else:
            params[key] = _scenario_value(raw)
    spec = ScenarioSpec(name, params)
    try:
        scenario = build(spec)
    except ScenarioError as exc:
        fail(str(exc), "scenario")

    output_dir = "orbitavg_out"
    if "output" in parser:
        for key, raw in parser["output"].items():
            if key not in _OUTPUT_KEYS:
                fail(f"unknown key {key!r} in [output]", "output", key)
        output_dir = parser["output"].get("dir", output_dir).strip()

    runs = sorted((int(s.split(".")[1]), s) for s in parser.sections() if s.startswith("run."))
    ops = []
    for idx, section in runs:
        body = parser[section]
        if "op" not in body:
            fail(f"[{section}] needs op = <operation>", section)
        op = body["op"].strip()
        if op not in OPERATIONS:
            fail(f"unknown operation {op!r} (key op); choose from {', '.join(OPERATIONS)}",
                 section, "op")
        allowed = OPERATIONS[op]
        req = {}
        for key, raw in body.items():
            if key == "op":
                continue
            if key not in allowed:
                fail(f"unknown key {key!r} for operation {op}", section, key)
            try:
                req[key] = _convert(allowed[key], raw)
            except ValueError as exc:
                fail(f"malformed value for {key}: {exc}", section, key)
        if op in _NEEDS_FUNCTION:
            if not req.get("function"):
                fail(f"operation {op} needs function = <catalog name>", section)
            for f in req["function"]:
                if f not in scenario.functions:
                    fail(f"function {f!r} is not in the {name} catalog "
                         f"({', '.join(scenario.functions)})", section, "function")
        if "points" in req:
            for stratum, _ in req["points"]:
                if stratum not in scenario.space.strata:
                    fail(f"unknown stratum {stratum!r} for {name}", section, "points")
        ops.append(OperationRequest(idx, op, req, lines.get((section, None))))
    if not ops:
        raise ConfigError("no [run.N] sections")
    return ExperimentConfig(spec, tuple(ops), output_dir,
                            seed=experiment.get("seed", 0),
                            tol=experiment.get("tol", DEFAULT_TOL),
                            n_max=experiment.get("n_max", DEFAULT_N_MAX),
                            overrides=experiment)
