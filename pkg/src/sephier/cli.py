"""Command-line runner: ``sephier <check> --config cfg.json [--seed N] [--out report.json] ...``.

Exit status: 0 when the outcome matches ``expect`` (default ``pass``),
2 when it does not, 1 on operational errors (bad config, missing files,
validation or domain errors).
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .derivation import (conglomerate_reduce, flow_field_sweep, flow_invariance_sweep, linearity_certificate,
                         plain_sweep, replay as replay_witness, sym_sweep)
from .evolution import export_csv, separation_gap
from .gauge import GaugeParams, apply_gauge, deformed_separation_gap, gauge_inverse
from .grid import Grid, GridState
from .jetcore import JetSpec
from .opdsl import Hierarchy, HierarchyError, ParseError, load_hierarchy, preset
from .opdsl.evaluate import DomainError
from .tensor import Statistics

CHECKS = ("plain-derivation", "sym-derivation", "flow-invariance", "flow-field", "certify-linearity",
          "conglomerate", "evolve-gap", "gauge-demo")

DEFAULT_TOLERANCES = {
    "plain-derivation": 1e-8, "sym-derivation": 1e-8, "flow-invariance": 1e-12, "flow-field": 1e-8,
    "certify-linearity": 1e-6, "conglomerate": 1e-8, "evolve-gap": 1e-6, "gauge-demo": 1e-5,
}

DEFAULTS = {
    "hierarchy": "linear_schrodinger",
    "d": 1, "K": 2, "m": 1, "f": 0,
    "samples": 100, "seed": 0, "N": 2, "fermi_sign": False,
    "grid": {"L": 2 * np.pi, "n": 64, "dt": 1e-4, "t": 0.01},
    "states": {"amplitude": 0.3, "wavenumber": 2},
    "gauge": {"gamma": 0.3, "lambda": 1.0},
    "expect": "pass",
}


class ConfigError(ValueError):
    pass


def load_config(path=None, overrides=None) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    base = Path(".")
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            user = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        base = path.parent
        for key, value in user.items():
            if isinstance(value, dict) and isinstance(cfg.get(key), dict):
                cfg[key].update(value)
            else:
                cfg[key] = value
    for key, value in (overrides or {}).items():
        if value is not None:
            cfg[key] = value
    hier = cfg["hierarchy"]
    if isinstance(hier, dict) and "file" in hier:
        file = Path(hier["file"])
        if not file.is_absolute():
            file = base / file
        if not file.exists():
            raise ConfigError(f"hierarchy file not found: {file}")
        cfg["hierarchy"] = {**hier, "file": str(file)}
    for key in ("samples", "d", "K", "m"):
        if int(cfg[key]) < 1 and key != "K":
            raise ConfigError(f"'{key}' must be positive")
    if cfg["expect"] not in ("pass", "fail"):
        raise ConfigError("'expect' must be 'pass' or 'fail'")
    return cfg


def build_hierarchy(cfg: dict) -> Hierarchy:
    stats = Statistics(int(cfg["f"]))
    hier = cfg["hierarchy"]
    if isinstance(hier, str):
        hier = {"preset": hier}
    if "file" in hier:
        loaded = load_hierarchy(hier["file"])
        return loaded.with_stats(stats)
    params = {k: v for k, v in hier.items() if k != "preset"}
    if "potential" in params:
        params["potential"] = tuple(params["potential"])
    spec = JetSpec(d=int(cfg["d"]), K=int(cfg["K"]), m=int(cfg["m"]))
    return preset(hier["preset"], spec=spec, stats=stats, **params)


def probe_states(cfg: dict):
    g = cfg["grid"]
    grid = Grid(float(g["L"]), int(g["n"]))
    a, k = float(cfg["states"]["amplitude"]), int(cfg["states"]["wavenumber"])
    phi = GridState.from_function(grid, lambda x: 1 + a * np.exp(1j * k * x)).normalized()
    psi = GridState.from_function(grid, lambda x: 1 + a * np.exp(-1j * k * x)).normalized()
    return phi, psi


def _tolerance(cfg, check):
    per = cfg.get("tolerances", {})
    if check in per:
        return float(per[check])
    if "tolerance" in cfg:
        return float(cfg["tolerance"])
    return DEFAULT_TOLERANCES[check]


def _entry(name, samples, value, tol, passed, witness, verdict=None, **extra):
    entry = {"name": name, "samples": samples, "max_residual": value, "tolerance": tol,
             "verdict": verdict or ("pass" if passed else "fail"), "passed": bool(passed), "witness": witness}
    entry.update(extra)
    return entry


def _grid_witness(check, cfg, **params):
    return {"check": check, "params": {"grid": cfg["grid"], "states": cfg["states"], **params}}


def run_check(check: str, cfg: dict, hier: Hierarchy, csv_path=None) -> dict:
    tol = _tolerance(cfg, check)
    n, seed = int(cfg["samples"]), int(cfg["seed"])
    sweeps = {"plain-derivation": plain_sweep, "sym-derivation": sym_sweep,
              "flow-field": flow_field_sweep, "flow-invariance": flow_invariance_sweep}
    if check in sweeps:
        rep = sweeps[check](hier, n, seed, tol)
        return _entry(check, n, rep.max_residual, tol, rep.passed, rep.witness, per_sample=rep.per_sample)
    if check == "conglomerate":
        rep = conglomerate_reduce(hier, int(cfg["N"]), n, seed, tol, bool(cfg["fermi_sign"]))
        return _entry(check, n, rep.max_residual, tol, rep.passed, rep.witness, per_sample=rep.per_sample,
                      N=int(cfg["N"]))
    if check == "certify-linearity":
        cert = linearity_certificate(hier, n, seed, tol)
        return _entry(check, n, cert.max_dev, tol, cert.linear, cert.witness, verdict=cert.verdict,
                      k_hat=[cert.k_hat.real, cert.k_hat.imag])
    g = cfg["grid"]
    t, dt = float(g["t"]), float(g["dt"])
    phi, psi = probe_states(cfg)
    if check == "evolve-gap":
        plain = separation_gap(hier, phi, psi, t, dt, "plain")
        sym, lhs, _ = separation_gap(hier, phi, psi, t, dt, "sym", return_states=True)
        if csv_path:
            export_csv(lhs, csv_path)
        value = max(plain, sym)
        return _entry(check, 1, value, tol, value < tol, _grid_witness(check, cfg),
                      gaps={"plain": plain, "sym": sym})
    if check == "gauge-demo":
        params = GaugeParams(float(cfg["gauge"]["gamma"]), float(cfg["gauge"]["lambda"]))
        deformed = deformed_separation_gap(params, hier, phi, psi, t, dt, "deformed")
        undeformed = deformed_separation_gap(params, hier, phi, psi, t, dt, "sym")
        roundtrip = float(np.max(np.abs(gauge_inverse(params, apply_gauge(params, phi)).data - phi.data)))
        return _entry(check, 1, deformed, tol, deformed < tol, _grid_witness(check, cfg, gauge=cfg["gauge"]),
                      gaps={"deformed": deformed, "undeformed": undeformed}, gauge_roundtrip=roundtrip)
    raise ConfigError(f"unknown check '{check}'")


def replay_entry(entry: dict, cfg: dict, hier: Hierarchy) -> float:
    """Recompute the reported value of one check from its witness."""
    witness = entry["witness"]
    check = witness["check"]
    if check in ("evolve-gap", "gauge-demo"):
        sub = dict(cfg, grid=witness["params"]["grid"], states=witness["params"]["states"])
        if check == "gauge-demo":
            sub["gauge"] = witness["params"]["gauge"]
        return run_check(check, sub, hier)["max_residual"]
    return replay_witness(witness, hier)


def run(check: str, cfg: dict, out=None, csv_path=None) -> tuple[dict, int]:
    hier = build_hierarchy(cfg)
    checks = CHECKS if check == "all" else (check,)
    entries = []
    for name in checks:
        start = time.perf_counter()
        entry = run_check(name, cfg, hier, csv_path if name == "evolve-gap" else None)
        entry["wall_time"] = time.perf_counter() - start
        entries.append(entry)
    all_passed = all(e["passed"] for e in entries)
    ok = all_passed if cfg["expect"] == "pass" else not all_passed
    report = {
        "toolkit": "sephier", "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "check": check, "config": cfg, "hierarchy": hier.to_json(),
        "checks": entries, "all_passed": all_passed, "expect": cfg["expect"],
        "exit_status": 0 if ok else 2,
    }
    if out:
        with open(out, "w") as fh:
            json.dump(report, fh, indent=2)
    return report, report["exit_status"]


def _summary(report, stream):
    for e in report["checks"]:
        extra = f" k_hat={complex(*e['k_hat']):.3g}" if "k_hat" in e else ""
        print(f"{e['name']:<18} {e['verdict']:<18} max={e['max_residual']:.3e} "
              f"tol={e['tolerance']:.1e}{extra}", file=stream)


def _replay_main(path) -> int:
    report = json.loads(Path(path).read_text())
    cfg = report["config"]
    hier = build_hierarchy(cfg)
    status = 0
    for entry in report["checks"]:
        value = replay_entry(entry, cfg, hier)
        diff = abs(value - entry["max_residual"])
        ok = diff <= 1e-12
        status = status if ok else 2
        print(f"{entry['name']:<18} reported={entry['max_residual']:.6e} replayed={value:.6e} "
              f"{'ok' if ok else 'MISMATCH'}")
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sephier", description=__doc__.splitlines()[0])
    parser.add_argument("check", choices=CHECKS + ("all", "replay"))
    parser.add_argument("report", nargs="?", help="report file (replay only)")
    parser.add_argument("--config")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--out")
    parser.add_argument("--csv")
    parser.add_argument("--expect", choices=("pass", "fail"))
    args = parser.parse_args(argv)
    try:
        if args.check == "replay":
            if not args.report:
                raise ConfigError("replay needs a report file")
            return _replay_main(args.report)
        cfg = load_config(args.config, {"seed": args.seed, "samples": args.samples, "expect": args.expect})
        report, status = run(args.check, cfg, args.out, args.csv)
    except (ConfigError, HierarchyError, ParseError, DomainError, OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    _summary(report, sys.stdout)
    return status


if __name__ == "__main__":
    sys.exit(main())
