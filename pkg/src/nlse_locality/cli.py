"""Command-line entry point: ``nlse-locality <subcommand> [--config PATH] ...``.

Exit codes: 0 success, 2 configuration error, 3 numerical guard tripped,
4 acceptance failure under ``--strict``.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import sys
from importlib import resources
from typing import Any, Callable, Dict, List, Optional, Sequence

import jsonschema
import numpy as np

from .gauge import apply_gauge, residual_convergence
from .gaussian import ExactScalar
from .locality.appendix import appendix_signal
from .locality.werner import DEFAULT_C0, werner_test
from .nonlinearity import (
    DensityFloorError,
    DoebnerGoldin,
    Logarithmic,
    NoNonlinearity,
    from_config,
    is_galilei_covariant,
    is_linearizable,
)
from .report import SignalReport, fmt_float
from .simulator.experiments import SimConfig, identical_particle_experiment, lambda_sensitivity
from .simulator.grid import Grid2D, WaveField, set_threads
from .simulator.observables import Observable
from .simulator.specs import BoxMarginError, ClosedForm, SymmetrizedPair, potential_from_config
from .simulator.splitstep import NumericalGuardError, evolve

EXIT_OK, EXIT_CONFIG, EXIT_GUARD, EXIT_ACCEPTANCE = 0, 2, 3, 4

SUBCOMMANDS = ("bbm-signal", "dg-werner", "simulate", "gauge-check", "identical")

# Reference values for the appendix chain.
APPENDIX_RAW = "-32/3*pi*sqrt(3)"
APPENDIX_NORM = "1/3*pi*sqrt(3)"

GALILEI_TOL = 1e-8
NONZERO_TOL = 1e-3

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "bbm-signal": {},
    "dg-werner": {
        "test": {
            "n": 3,
            "test": "test1",
            "lambda": 1.0,
            "delta": 1e-4,
            "C0": [[2, 1], [1, 2]],
            "tuples": [
                {"name": "el", "D": 1, "c": [1, -1, 0, -1, 0.5]},
                {"name": "galilei", "D": 1, "c": [1, 0.3, 0, -1, 0.7]},
                {"name": "c3", "D": 1, "c": [1, -1, 1, -1, 0.5]},
            ],
        }
    },
    "simulate": {
        "grid": {"N": 128, "L": 8.0},
        "dt": 1e-3,
        "sample_every": 20,
        "nonlinearity": {"type": "none"},
        "potential": {"type": "harmonic", "lambda": 1.0},
        "initial": {"type": "closed-form", "expr": "exp(-x^2 - y^2 - x*y)"},
        "test": {"n": [0, 1, 2, 3], "weight": "x1^2", "delta": 1e-2, "test": "test2"},
    },
    "gauge-check": {
        "seed": 0,
        "grid": {"N": 256, "L": 12.0},
        "dt": 1e-4,
        "steps": 1000,
        "potential": {"type": "harmonic", "lambda": 1.0},
        "initial": {"type": "closed-form", "expr": "exp(-x^2 - y^2 - x*y)"},
        "test": {"D": 0.2, "random_fields": 4, "halvings": 2},
    },
    "identical": {
        "grid": {"N": 128, "L": 12.0},
        "dt": 1e-3,
        "sample_every": 10,
        "test": {
            "f": "exp(-x^2 - y^2)",
            "d_list": [2, 4, 6],
            "sigma": 1,
            "n": 2,
            "interval": [-2, 2],
            "b": 0.1,
            "lambda": 1.0,
            "width": 1.0,
            "delta": 1e-2,
        },
    },
}


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ config

def load_schema(name: str) -> dict:
    return json.loads(resources.files("nlse_locality.schemas").joinpath(f"{name}.schema.json").read_text())


def _reject_constant(token: str):
    raise ConfigError(f"non-finite number {token} in configuration")


def parse_config(text: str) -> dict:
    try:
        cfg = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("configuration must be a JSON object")
    return cfg


MERGED_SECTIONS = ("grid", "test")  # merged key by key; every other section is replaced whole


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if k in MERGED_SECTIONS and isinstance(out.get(k), dict):
            out[k] = {**out[k], **copy.deepcopy(v)}
        else:
            out[k] = copy.deepcopy(v)
    return out


def resolve_config(subcommand: str, user: Optional[dict]) -> dict:
    """Validate the user document, then fill subcommand defaults."""
    user = user or {}
    try:
        jsonschema.validate(user, load_schema("run_config"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    return _merge(DEFAULTS[subcommand], user)


def _grid(cfg: dict) -> Grid2D:
    g = cfg.get("grid", {})
    return Grid2D(int(g.get("N", 256)), float(g.get("L", 12.0)))


def _initial(spec: dict):
    if spec["type"] == "closed-form":
        return ClosedForm(spec["expr"], spec.get("params"), float(spec.get("shift", 0.0)), spec.get("normalize", True))
    return SymmetrizedPair(spec["f"], float(spec["d"]), int(spec.get("sigma", 1)), spec.get("part", "full"),
                           spec.get("params"))


def _orders(test: dict) -> List[int]:
    n = test.get("n", 3)
    return [int(v) for v in (n if isinstance(n, list) else [n])]


def _complex(v) -> complex:
    return complex(v[0], v[1]) if isinstance(v, list) else complex(v)


# ----------------------------------------------------------------- reports

def _check(name: str, passed: bool, detail: str) -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


def _report(sub: str, cfg: dict, rows: list, summary: dict, acceptance: list) -> dict:
    status = "ok" if all(a["passed"] for a in acceptance) else "fail"
    return {"subcommand": sub, "config": cfg, "rows": rows, "summary": summary, "acceptance": acceptance,
            "status": status}


def run_bbm_signal(cfg: dict) -> dict:
    f = from_config(cfg.get("nonlinearity"))
    if not isinstance(f, (Logarithmic, NoNonlinearity)):
        raise ConfigError("bbm-signal needs the logarithmic nonlinearity")
    res = appendix_signal(f if isinstance(f, Logarithmic) else None)
    summary = {"raw": str(res.raw), "norm": str(res.norm), "signal": res.signal_text()}
    if isinstance(f, Logarithmic):
        summary["b"] = str(ExactScalar(res.b))
        summary["signal_value"] = str(res.signal)
    acceptance = [
        _check("raw", str(res.raw) == APPENDIX_RAW, str(res.raw)),
        _check("norm", str(res.norm) == APPENDIX_NORM, str(res.norm)),
        _check("signal", res.signal_text() == "32*b", res.signal_text()),
    ]
    if "b" in summary:
        row = SignalReport("appendix", 6, res.signal, "symbolic", params={"b": summary["b"]})
    else:
        row = SignalReport("appendix", 6, res.per_b, "symbolic", params={"b": "b", "per_b": True})
    rows = [{"signal": row.to_row()}]
    return _report("bbm-signal", cfg, rows, summary, acceptance)


def run_dg_werner(cfg: dict) -> dict:
    test = cfg["test"]
    C0 = [[_complex(v) for v in row] for row in test.get("C0", DEFAULT_C0)]
    rows, acceptance = [], []
    for i, spec in enumerate(test["tuples"]):
        f = DoebnerGoldin(spec["D"], tuple(spec["c"]))
        name = spec.get("name", f"tuple{i}")
        galilei = is_galilei_covariant(f)
        lin = is_linearizable(f)
        for n in _orders(test):
            rep = werner_test(f, C0, n, test.get("test", "test1"), float(test.get("lambda", 1.0)),
                              float(test.get("delta", 1e-4)))
            v = abs(float(rep.value))
            rows.append({
                "name": name,
                "D": float(f.D),
                "c": [float(c) for c in f.c],
                "galilei": galilei,
                "linearizable": lin is not None,
                "signal": rep.to_row(),
            })
            if galilei:
                acceptance.append(_check(f"{name} n={n} zero", v < GALILEI_TOL, fmt_float(rep.value)))
            else:
                acceptance.append(_check(f"{name} n={n} nonzero", v > NONZERO_TOL, fmt_float(rep.value)))
    return _report("dg-werner", cfg, rows, {"tuples": len(test["tuples"])}, acceptance)


def _sim_config(cfg: dict) -> SimConfig:
    return SimConfig(
        _grid(cfg),
        float(cfg.get("dt", 1e-4)),
        _initial(cfg["initial"]),
        potential_from_config(cfg.get("potential")),
        from_config(cfg.get("nonlinearity")),
        float(cfg.get("floor", 1e-12)),
    )


def run_simulate(cfg: dict) -> dict:
    sim = _sim_config(cfg)
    test = cfg["test"]
    interval = test.get("interval")
    obs = Observable(test.get("weight", "x1^2"), float(test.get("k", 0.0)), tuple(interval) if interval else None)
    rows, acceptance = [], []
    null = isinstance(sim.nonlinearity, NoNonlinearity)
    for n in _orders(test):
        rep = lambda_sensitivity(sim, obs, n, float(test.get("delta", 1e-2)), int(cfg.get("sample_every", 20)),
                                 test.get("test", "test2"))
        rows.append({"signal": rep.to_row()})
        acceptance.append(_check(f"n={n} conclusive", not rep.inconclusive, rep.status))
        if null:
            acceptance.append(_check(f"n={n} null", rep.status == "zero",
                                     f"{fmt_float(rep.value)} +- {fmt_float(rep.error)}"))
    return _report("simulate", cfg, rows, {"null_test": null}, acceptance)


def run_gauge_check(cfg: dict) -> dict:
    grid = _grid(cfg)
    test = cfg["test"]
    D = float(test.get("D", 0.2))
    floor = float(cfg.get("floor", 1e-12))
    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    worst = 0.0
    for _ in range(int(test.get("random_fields", 4))):
        field = WaveField(rng.standard_normal((grid.N, grid.N)) + 1j * rng.standard_normal((grid.N, grid.N)), grid)
        gauged = apply_gauge(field, D, floor)
        a = np.abs(field.psi)
        worst = max(worst, float(np.max(np.abs(np.abs(gauged.psi) - a) / a.max())))

    psi0 = _initial(cfg["initial"]).sample(grid)
    pot = potential_from_config(cfg.get("potential"))
    dt, steps = float(cfg.get("dt", 1e-4)), int(cfg.get("steps", 1000))
    linear = evolve(psi0, pot, dt=dt, steps=steps, floor=floor)
    gauged = evolve(apply_gauge(psi0, D, floor), pot, DoebnerGoldin.gauge_generated(D), dt=dt, steps=steps,
                    floor=floor)
    a, b = linear.samples[-1], gauged.samples[-1]
    mod_l2 = float(np.sqrt(grid.integrate((np.abs(a.psi) - np.abs(b.psi)) ** 2)))
    full_l2 = float(np.sqrt(grid.integrate(np.abs(apply_gauge(a, D, floor).psi - b.psi) ** 2)))

    halvings = int(test.get("halvings", 2))
    span = 2 ** (halvings + 1)
    every = max(1, steps // (4 * span))
    conv_traj = evolve(psi0, pot, dt=dt, steps=span * every, sample_every=every, floor=floor)
    V = pot.sample(grid)
    conv = residual_convergence(conv_traj.samples, D, V, halvings, floor)
    base = residual_convergence(conv_traj.samples, 0.0, V, halvings, floor)
    t = steps * dt
    rows = [
        {"check": "modulus", "value": worst},
        {"check": "evolution_modulus_l2", "t": t, "value": mod_l2},
        {"check": "evolution_full_l2", "t": t, "value": full_l2},
    ]
    for s, r, r0 in zip(conv.spacings, conv.residuals, base.residuals):
        rows.append({"check": "residual", "spacing": s, "value": r, "baseline": r0})
    summary = {"D": D, "order": conv.order, "baseline_order": base.order, "ratios": list(conv.ratios)}
    acceptance = [
        _check("modulus preserved", worst <= 1e-14, fmt_float(worst)),
        _check("evolution modulus L2 <= 1e-6", mod_l2 <= 1e-6, fmt_float(mod_l2)),
        _check("residual order 2", abs(conv.order - 2) <= 0.2, fmt_float(conv.order)),
    ]
    return _report("gauge-check", cfg, rows, summary, acceptance)


def run_identical(cfg: dict) -> dict:
    test = cfg["test"]
    grid = _grid(cfg)
    kw = dict(
        f=test["f"],
        d_list=[float(d) for d in test["d_list"]],
        n=_orders(test)[0],
        interval=tuple(float(v) for v in test["interval"]),
        b=float(test.get("b", 0.1)),
        lam=float(test.get("lambda", 1.0)),
        width=float(test.get("width", 1.0)),
        grid=grid,
        dt=float(cfg.get("dt", 1e-3)),
        delta=float(test.get("delta", 1e-2)),
        sample_every=int(cfg.get("sample_every", 10)),
    )
    sigma = int(test.get("sigma", 1))
    rep = identical_particle_experiment(sigma=sigma, **kw)
    flipped = identical_particle_experiment(sigma=-sigma, signals=False, **kw)
    rows = [r.to_row() for r in rep.rows]
    negatives = all(a.cross == -b.cross for a, b in zip(rep.rows, flipped.rows))
    inconclusive = [f"d={r.d} {p}" for r in rep.rows for p, s in sorted(r.signals.items()) if s.inconclusive]
    acceptance = [
        _check("overlap decreasing in d", rep.overlaps_decreasing(),
               " ".join(fmt_float(r.cross) for r in rep.rows)),
        _check("chi/phi signals agree", rep.chi_phi_agree(), ""),
        _check("sigma cross terms negate", negatives, ""),
        _check("signals conclusive", not inconclusive, ", ".join(inconclusive)),
    ]
    summary = {"largest_d_overlap": abs(max(rep.rows, key=lambda r: r.d).cross)}
    return _report("identical", cfg, rows, summary, acceptance)


RUNNERS: Dict[str, Callable[[dict], dict]] = {
    "bbm-signal": run_bbm_signal,
    "dg-werner": run_dg_werner,
    "simulate": run_simulate,
    "gauge-check": run_gauge_check,
    "identical": run_identical,
}


# ------------------------------------------------------------------ output

def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _flat(prefix: str, value, out: dict) -> None:
    if isinstance(value, dict):
        for k in sorted(value):
            _flat(f"{prefix}.{k}" if prefix else k, value[k], out)
    elif isinstance(value, float):
        out[prefix] = fmt_float(value)
    elif isinstance(value, list):
        out[prefix] = json.dumps(value)
    else:
        out[prefix] = "" if value is None else str(value)


def to_csv(report: dict) -> str:
    """One line per row; nested per-part signals are split into separate lines."""
    flat_rows = []
    for row in report["rows"]:
        if "signals" in row:
            base = {k: v for k, v in row.items() if k != "signals"}
            for part, sig in sorted(row["signals"].items()):
                flat = {}
                _flat("", {**base, "part": part, "signal": sig}, flat)
                flat_rows.append(flat)
        else:
            flat = {}
            _flat("", row, flat)
            flat_rows.append(flat)
    fields = sorted({k for r in flat_rows for k in r})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(flat_rows)
    return buf.getvalue()


def render_text(report: dict) -> str:
    lines = [f"{report['subcommand']}: {report['status']}"]
    for k in sorted(report["summary"]):
        v = report["summary"][k]
        lines.append(f"  {k} = {fmt_float(v) if isinstance(v, float) else v}")
    for a in report["acceptance"]:
        lines.append(f"  [{'PASS' if a['passed'] else 'FAIL'}] {a['name']}" + (f": {a['detail']}" if a["detail"] else ""))
    return "\n".join(lines) + "\n"


# -------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nlse-locality", description="Nonlocality tests for nonlinear Schroedinger equations.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", metavar="PATH", help="JSON run configuration")
    p.add_argument("--out", metavar="PATH", help="write the report (.csv for CSV, otherwise JSON)")
    p.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    p.add_argument("--strict", action="store_true", help="exit 4 when an acceptance row fails")
    p.add_argument("--threads", type=int, metavar="N", help="FFT worker threads (-1 = all cores)")
    return p


def run(subcommand: str, config: Optional[dict] = None, threads: Optional[int] = None) -> dict:
    """Resolve, execute and schema-check one report (raises on configuration or guard errors)."""
    cfg = resolve_config(subcommand, config)
    n_threads = threads if threads is not None else cfg.get("threads")
    if n_threads is not None:
        set_threads(int(n_threads))
    report = RUNNERS[subcommand](cfg)
    jsonschema.validate(report, load_schema("report"))
    return report


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        user = None
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                user = parse_config(fh.read())
        report = run(args.subcommand, user, args.threads)
    except (ConfigError, BoxMarginError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalGuardError, DensityFloorError) as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    text = dumps(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(to_csv(report) if args.out.endswith(".csv") else text)
    sys.stdout.write(text if args.json else render_text(report))
    if args.strict and report["status"] != "ok":
        return EXIT_ACCEPTANCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
