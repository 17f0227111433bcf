"""Config-driven batch runner: one CSV per operation plus a text summary.

Exit codes: 0 success, 1 ground-truth mismatch or operation error, 2 config
error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from . import averaging, census as census_mod, measure, stability
from .action import ActionScenario
from .config import SCHEMA_VERSION, ExperimentConfig, OperationRequest, parse_config
from .errors import ConfigError
from .scenarios import BUILDERS, build
from .space import Point, sample_points

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
DEFAULT_GRID = 16


@dataclass
class Check:
    key: str
    expected: Any
    observed: Any
    passed: bool


@dataclass
class OperationResult:
    request: OperationRequest
    status: str  # ok, non-converged, error
    path: str | None
    wall_time: float
    summary: str
    checks: list[Check] = field(default_factory=list)


@dataclass
class RunSummary:
    scenario_id: str
    results: list[OperationResult]
    overrides: dict[str, Any]

    @property
    def checks(self) -> list[Check]:
        return [c for r in self.results for c in r.checks]

    @property
    def success(self) -> bool:
        return all(r.status != "error" for r in self.results) and all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = [f"scenario {self.scenario_id}"]
        if self.overrides:
            out.append("overrides " + ", ".join(f"{k}={v}" for k, v in sorted(self.overrides.items())))
        for r in self.results:
            out.append(f"[run.{r.request.index}] {r.request.op}: {r.status} "
                       f"({r.wall_time:.2f}s) {r.summary}" + (f" -> {r.path}" if r.path else ""))
            for c in r.checks:
                mark = "PASS" if c.passed else "FAIL"
                out.append(f"    {mark} {c.key}: expected {c.expected}, observed {c.observed}")
        out.append("result: " + ("success" if self.success else "failure"))
        return out


def fmt(v) -> str:
    """Deterministic text for CSV cells."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, complex):
        return f"{v.real!r}{v.imag:+}j"
    if isinstance(v, (tuple, list)):
        return ";".join(fmt(x) for x in v)
    return str(v)


def _points(scenario: ActionScenario, params: dict, seed: int) -> list[Point]:
    if "points" in params:
        return [scenario.space.point(s, *c) for s, c in params["points"]]
    if "sample" in params:
        return sample_points(scenario.space, params["sample"], seed)
    return scenario.grid(params.get("grid", DEFAULT_GRID))


def _stages(report: averaging.AverageReport) -> str:
    return ";".join(str(k) for k, _ in report.stages)


def _truth(scenario: ActionScenario) -> dict:
    return scenario.metadata.get("ground_truth", {})


def _mean_checks(scenario, fname, rows, tol) -> list[Check]:
    """``mean:f`` and ``mean:f:stratum`` ground truths against per-point averages."""
    checks = []
    for key, expected in _truth(scenario).items():
        parts = key.split(":")
        if parts[0] != "mean" or parts[1] != fname:
            continue
        stratum = parts[2] if len(parts) > 2 else None
        vals = [v for x, v in rows if stratum is None or x.stratum == stratum]
        if not vals:
            continue
        worst = max(abs(v - expected) for v in vals)
        checks.append(Check(key, expected, f"max deviation {worst:.3g}", worst <= 10 * tol))
    return checks


# operations ------------------------------------------------------------------

Row = list
OpOutput = tuple[list[str], list[Row], str, str, list[Check]]


def op_folner_average(sc, p, cfg) -> OpOutput:
    tol, n_max = p.get("tol", cfg.tol), p.get("n_max", cfg.n_max)
    pts = _points(sc, p, cfg.seed)
    header = ["point_repr", "function", "value_re", "value_im", "converged", "stages",
              "fast_path", "orbit_size"]
    rows, checks, all_conv = [], [], True
    for fname in p["function"]:
        got = []
        for x in pts:
            r = averaging.folner_average(sc, fname, x, tol, n_max)
            all_conv &= r.converged
            got.append((x, r.value))
            rows.append([repr(x), fname, r.value.real, r.value.imag, r.converged, _stages(r),
                         r.fast_path, r.orbit_size])
        checks += _mean_checks(sc, fname, got, tol)
    status = "ok" if all_conv else "non-converged"
    return header, rows, status, f"{len(rows)} averages", checks


def op_orbit_closure_average(sc, p, cfg) -> OpOutput:
    pts = _points(sc, p, cfg.seed)
    header = ["point_repr", "function", "value_re", "value_im"]
    rows = []
    for fname in p["function"]:
        for x in pts:
            v = averaging.orbit_closure_average(sc, fname, x, p.get("quadrature_size", 4096))
            rows.append([repr(x), fname, v.real, v.imag])
    return header, rows, "ok", f"{len(rows)} closure integrals", []


def op_expectation_field(sc, p, cfg) -> OpOutput:
    tol, n_max = p.get("tol", cfg.tol), p.get("n_max", cfg.n_max)
    pts = _points(sc, p, cfg.seed)
    header = ["point_repr", "function", "value_re", "value_im", "converged", "stages"]
    rows, checks, notes, all_conv = [], [], [], True
    for fname in p["function"]:
        field_ = averaging.expectation_field(sc, fname, pts, tol, n_max,
                                             jump_window=p.get("jump_window"),
                                             jump_threshold=p.get("jump_threshold", 0.1))
        for x, r in zip(field_.grid, field_.reports):
            all_conv &= r.converged
            rows.append([repr(x), fname, r.value.real, r.value.imag, r.converged, _stages(r)])
        verdict = field_.continuity_verdict
        if field_.jump_detected:
            a, b = field_.jump_location
            notes.append(f"{fname}: {verdict} (magnitude {field_.jump_magnitude:.3g} between {a!r} and {b!r})")
        else:
            notes.append(f"{fname}: {verdict} (max jump {field_.max_jump:.3g})")
        expected = _truth(sc).get(f"expectation_field:{fname}")
        if expected is not None:
            checks.append(Check(f"expectation_field:{fname}", expected, verdict, expected == verdict))
        checks += _mean_checks(sc, fname, [(x, r.value) for x, r in zip(field_.grid, field_.reports)], tol)
    status = "ok" if all_conv else "non-converged"
    return header, rows, status, "; ".join(notes), checks


def _op_probe(probe: Callable) -> Callable:
    def run(sc, p, cfg) -> OpOutput:
        pts = _points(sc, p, cfg.seed)
        header = ["point_repr", "eps", "probe_radius", "verdict", "delta_estimate", "witness_y",
                  "witness_g", "witness_distance", "samples_drawn", "horizon", "tested_elements"]
        rows, verdicts = [], []
        for eps in p.get("eps", (0.1,)):
            for x in pts:
                r = probe(sc, x, eps, probe_radius=p.get("probe_radius"), horizon=p.get("horizon"),
                          trials=p.get("trials", 200), seed=p.get("seed", cfg.seed))
                w = r.witness
                verdicts.append(r.verdict)
                rows.append([repr(x), eps, r.probe_radius, r.verdict, r.delta_estimate,
                             repr(w.y) if w else None, repr(w.g) if w else None,
                             w.attained_distance if w else None, r.samples_drawn, r.horizon,
                             r.tested_elements])
        found = "witness" if "witness" in verdicts else "no-witness"
        checks = []
        expected = _truth(sc).get("stability")
        if expected is not None and probe is stability.stability_probe:
            checks.append(Check("stability", expected, found, expected == found))
        n_w = verdicts.count("witness")
        return header, rows, "ok", f"{n_w} of {len(verdicts)} probes found a witness", checks
    return run


def op_almost_periodicity(sc, p, cfg) -> OpOutput:
    pts = _points(sc, p, cfg.seed)
    header = ["point_repr", "function", "eps", "verdict", "net_size", "separated_family_size",
              "covering_radius", "net_cap"]
    rows, checks = [], []
    for fname in p["function"]:
        for eps in p.get("eps", (0.2,)):
            for x in pts:
                r = stability.almost_periodicity_test(
                    sc, fname, x, eps, translate_count=p.get("translate_count", 400),
                    probe_count=p.get("probe_count", 400), net_cap=p.get("net_cap", 64),
                    seed=p.get("seed", cfg.seed))
                rows.append([repr(x), fname, eps, r.verdict, r.net_size, r.separated_family_size,
                             r.covering_radius, r.net_cap])
                expected = _truth(sc).get(f"almost_periodic:{fname}:{x.stratum}")
                if expected is not None:
                    checks.append(Check(f"almost_periodic:{fname}:{x.stratum}", expected,
                                        r.verdict, expected == r.verdict))
    return header, rows, "ok", f"{len(rows)} tests", checks


def _census(sc, p, cfg):
    return census_mod.census(sc, p.get("sample_size", 60), p.get("cutoff", 256),
                             p.get("cluster_sep"), p.get("seed", cfg.seed))


def op_census(sc, p, cfg) -> OpOutput:
    c = _census(sc, p, cfg)
    header = ["kind", "key", "value"]
    rows = [["cardinality", k, v] for k, v in c.cardinality_histogram.items()]
    rows.append(["infinite", "count", c.infinite_count])
    rows += [["clusters", s, n] for s, n in c.cluster_ladder]
    checks = []
    q = _truth(sc).get("orbit_cardinality")
    if q is not None:
        observed = sorted(set(c.finite_cardinalities))
        checks.append(Check("orbit_cardinality", q, observed, observed == [q] and not c.infinite_count))
    summary = f"{len(c.finite_cardinalities)} finite, {c.infinite_count} infinite"
    return header, rows, "ok", summary, checks


def op_classify(sc, p, cfg) -> OpOutput:
    c = _census(sc, p, cfg)
    cls = census_mod.classify_module(c, sc.flags, p.get("card_bound", 16), p.get("cluster_bound", 4))
    header = ["label", "rules", "reasons", "finite_cardinalities", "infinite_count", "cluster_ladder"]
    hist = ";".join(f"{k}x{v}" for k, v in c.cardinality_histogram.items())
    ladder = ";".join(f"{s!r}:{n}" for s, n in c.cluster_ladder)
    rows = [[cls.label, cls.rules, " | ".join(cls.reasons), hist, c.infinite_count, ladder]]
    checks = []
    expected = _truth(sc).get("classification")
    if expected is not None:
        checks.append(Check("classification", expected, cls.label, expected == cls.label))
    return header, rows, "ok", cls.summary, checks


def op_invariant_measure(sc, p, cfg) -> OpOutput:
    kind = p.get("subset", "arc")
    if "points" in p:
        stratum, coords = p["points"][0]
        a = sc.space.point(stratum, *coords)
    else:
        a = sc.grid(1)[0]
    if kind == "arc":
        K = measure.arc(sc, p.get("start", 0.0), p.get("length", 0.25))
        A0 = measure.arc(sc, p.get("start", 0.0), p.get("a0_length", 1.0))
    elif kind == "cylinder":
        K = measure.cylinder(sc, p.get("prefix", (1,)), a.stratum)
        A0 = measure.cylinder(sc, (), a.stratum)
    else:
        raise ValueError(f"subset must be arc or cylinder, got {kind!r}")
    est = measure.invariant_measure_estimate(
        sc, K, A0, a, tol=p.get("tol", 2e-2),
        translate_pool_size=p.get("translate_pool_size", measure.DEFAULT_POOL),
        universe_size=p.get("universe_size", 4096), seed=p.get("seed", cfg.seed))
    header = ["eps", "ratio", "k_index", "a0_index"]
    rows = [list(s) for s in est.stages]
    status = "ok" if est.converged else "non-converged"
    return header, rows, status, f"{K.label} / {A0.label} = {est.value:.6g}", []


HANDLERS: dict[str, Callable[..., OpOutput]] = {
    "folner_average": op_folner_average,
    "orbit_closure_average": op_orbit_closure_average,
    "expectation_field": op_expectation_field,
    "stability_probe": _op_probe(stability.stability_probe),
    "uniform_continuity_probe": _op_probe(stability.uniform_continuity_probe),
    "almost_periodicity_test": op_almost_periodicity,
    "census": op_census,
    "classify_module": op_classify,
    "invariant_measure": op_invariant_measure,
}


def write_csv(path: str, header: list[str], rows: list[Row]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["schema_version", *header])
        for row in rows:
            w.writerow([SCHEMA_VERSION, *(fmt(v) for v in row)])


def run(config: ExperimentConfig, out_dir: str | None = None) -> RunSummary:
    """Execute the requests in order; operation errors are recorded and the run continues.

    I/O failures propagate as OSError.
    """
    sc = build(config.scenario)
    out = out_dir or config.output_dir
    os.makedirs(out, exist_ok=True)
    results = []
    for req in config.operations:
        t0 = time.perf_counter()
        path = os.path.join(out, f"run{req.index:02d}_{req.op}.csv")
        try:
            header, rows, status, summary, checks = HANDLERS[req.op](sc, req.params, config)
        except (ValueError, RuntimeError) as exc:
            write_csv(path, ["error"], [[f"{type(exc).__name__}: {exc}"]])
            results.append(OperationResult(req, "error", path, time.perf_counter() - t0,
                                           f"{type(exc).__name__}: {exc}"))
            continue
        write_csv(path, header, rows)
        results.append(OperationResult(req, status, path, time.perf_counter() - t0, summary, checks))
    return RunSummary(sc.scenario_id, results, dict(config.overrides))


def _with_seed(config: ExperimentConfig, seed: int | None) -> ExperimentConfig:
    if seed is None:
        return config
    from dataclasses import replace
    return replace(config, seed=seed, overrides={**config.overrides, "seed": seed})


def verify_fixtures(out_dir: str, seed: int | None = None, echo=print) -> bool:
    """Run every built-in fixture config into ``out_dir/<fixture>`` and compare ground truths."""
    from .fixtures import FIXTURE_CONFIGS
    ok = True
    for name, text in FIXTURE_CONFIGS.items():
        summary = run(_with_seed(parse_config(text), seed), os.path.join(out_dir, name))
        for line in summary.lines():
            echo(line)
        ok &= summary.success
    return ok


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="orbitavg", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="experiment configuration (INI)")
    ap.add_argument("--seed", type=int, help="override the configured seed")
    ap.add_argument("--out", help="output directory (overrides [output] dir)")
    ap.add_argument("--list-scenarios", action="store_true", help="print scenario names and exit")
    ap.add_argument("--verify-fixtures", action="store_true",
                    help="run the built-in ground-truth suite")
    args = ap.parse_args(argv)

    if args.list_scenarios:
        for name, builder in BUILDERS.items():
            doc = (builder.__doc__ or "").strip().splitlines()
            print(f"{name}: {doc[0] if doc else ''}")
        return EXIT_OK
    try:
        if args.verify_fixtures:
            ok = verify_fixtures(args.out or "orbitavg_fixtures", args.seed)
            return EXIT_OK if ok else EXIT_MISMATCH
        if not args.config:
            ap.print_usage(sys.stderr)
            print("orbitavg: error: --config is required", file=sys.stderr)
            return EXIT_CONFIG
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"orbitavg: cannot read config: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        config = _with_seed(parse_config(text), args.seed)
        summary = run(config, args.out)
    except ConfigError as exc:
        print(f"orbitavg: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"orbitavg: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for line in summary.lines():
        print(line)
    return EXIT_OK if summary.success else EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
