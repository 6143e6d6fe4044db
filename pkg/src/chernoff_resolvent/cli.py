"""Batch front door: run evolve/resolve/solve/diagnostic pipelines from a config.

Usage:
    chernoff-resolvent <command> [--config PATH] [--n INT] [--eps FLOAT]
                       [--lambda-re FLOAT] [--lambda-im FLOAT]
                       [--convention paper|corrected] [--out DIR]

Commands:
    validate     check the standing assumptions; findings exit with status 2
    evolve       apply the n-step composed operator at time t to the data
    resolve      apply the approximate resolvent to the data
    solve        solve a f'' + b f' + (c - lambda) f = -g with residual checks
    tangency     first-order tangency defect table over t_list
    convergence  composition-count convergence study over n_list

The configuration is one JSON file; command-line flags override file fields.
All fields with their defaults:

    {
      "grid": {"x_min": -20.0, "x_max": 20.0, "n_points": 801},
      "coefficients": {
        "a": {"kind": "constant", "value": 1.0},
        "b": {"kind": "constant", "value": 0.0},
        "c": {"kind": "constant", "value": 0.0},
        "a_floor": null,          // default: grid minimum of a
        "c_sup": null             // optional certified sup of c
      },
      "rhs": {"kind": "gaussian-bump", "amplitude": 1.0, "width": 1.0},
      "lambda": {"re": 1.0, "im": 0.0},
      "n": 64,
      "eps": 0.001,
      "convention": "corrected",
      "t": 1.0,                   // evolve horizon
      "t_list": [0.1, 0.01, 0.001, 0.0001],
      "n_list": [4, 8, 16, 32, 64],
      "out": "."
    }

Coefficient presets (the "kind" field; every slot shown with its default):
    constant        value=0
    rational-decay  base=0 + amplitude=1 / (1 + ((x - center=0)/scale=1)^2)
    gaussian-bump   base=0 + amplitude=1 * exp(-(x - center=0)^2 / (2 width=1^2))
    sinusoidal      base=0 + amplitude=1 * sin(frequency=1 x + phase=0)
                            / (1 + x^2)^decay_power=0
    table           path (CSV "x,value") or inline points [[x, v], ...];
                    linear interpolation, end values held beyond the range

Emitted files (in --out): solution.csv ("x,value"; complex "x,re,im"),
convergence.csv ("n,distance" or "t,defect" for studies), report.json with
every effective parameter, residual_sup, tail_bound, and timing.  CSV uses
full double precision so identical configs give bit-identical outputs.

Exit codes: 0 success, 2 validation findings, 1 runtime error,
64 unknown command, 66 unreadable config or coefficient table.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .grid import Grid1D, sample, sup_norm, write_csv
from .kernel import ChernoffConfig, KernelConvention, tangency_defect
from .problem import (
    ProblemSpec,
    TableReadError,
    ValidationFailure,
    coefficients_from_config,
    function_from_preset,
    validate,
)
from .resolvent import solve_ode
from .semigroup import convergence_study, evolve, write_convergence_csv

__all__ = ["RunConfig", "main", "run"]

COMMANDS = ("validate", "evolve", "resolve", "solve", "tangency", "convergence")

_USAGE = (
    "usage: chernoff-resolvent <command> [--config PATH] [--n INT] [--eps FLOAT]\n"
    "                          [--lambda-re FLOAT] [--lambda-im FLOAT]\n"
    "                          [--convention paper|corrected] [--out DIR]\n"
    f"commands: {', '.join(COMMANDS)}\n"
    "see the module docstring (pydoc chernoff_resolvent.cli) for the config schema"
)

_DEFAULTS: dict[str, Any] = {
    "grid": {"x_min": -20.0, "x_max": 20.0, "n_points": 801},
    "coefficients": {},
    "rhs": {"kind": "gaussian-bump", "amplitude": 1.0, "width": 1.0},
    "lambda": {"re": 1.0, "im": 0.0},
    "n": 64,
    "eps": 1e-3,
    "convention": "corrected",
    "t": 1.0,
    "t_list": [1e-1, 1e-2, 1e-3, 1e-4],
    "n_list": [4, 8, 16, 32, 64],
    "out": ".",
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run description (file fields with flag overrides applied)."""

    command: str
    grid: dict[str, Any]
    coefficients: dict[str, Any]
    rhs: Any
    lam: complex
    n: int
    eps: float
    convention: str
    t: float
    t_list: tuple[float, ...]
    n_list: tuple[int, ...]
    out: Path
    effective: dict[str, Any] = field(default_factory=dict)


def _merge_config(command: str, file_cfg: dict[str, Any], args: argparse.Namespace) -> RunConfig:
    cfg = {**_DEFAULTS, **file_cfg}
    lam_cfg = {**_DEFAULTS["lambda"], **cfg.get("lambda", {})}
    if args.n is not None:
        cfg["n"] = args.n
    if args.eps is not None:
        cfg["eps"] = args.eps
    if args.lambda_re is not None:
        lam_cfg["re"] = args.lambda_re
    if args.lambda_im is not None:
        lam_cfg["im"] = args.lambda_im
    if args.convention is not None:
        cfg["convention"] = args.convention
    if args.out is not None:
        cfg["out"] = args.out
    if cfg["convention"] not in ("paper", "corrected"):
        raise ValueError(f"unknown convention {cfg['convention']!r}")
    effective = {**cfg, "lambda": lam_cfg, "command": command}
    effective["out"] = str(cfg["out"])
    return RunConfig(
        command=command,
        grid={**_DEFAULTS["grid"], **cfg.get("grid", {})},
        coefficients=cfg.get("coefficients", {}),
        rhs=cfg["rhs"],
        lam=complex(float(lam_cfg["re"]), float(lam_cfg["im"])),
        n=int(cfg["n"]),
        eps=float(cfg["eps"]),
        convention=str(cfg["convention"]),
        t=float(cfg["t"]),
        t_list=tuple(float(t) for t in cfg["t_list"]),
        n_list=tuple(int(n) for n in cfg["n_list"]),
        out=Path(cfg["out"]),
        effective=effective,
    )


def _write_report(out: Path, payload: dict[str, Any]) -> None:
    with (out / "report.json").open("w") as fh:
        json.dump(payload, fh, indent=2, default=str)
        fh.write("\n")


def _write_pairs_csv(path: Path, header: tuple[str, str], rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for a, b in rows:
            writer.writerow([f"{a:.17g}" if isinstance(a, float) else a, f"{b:.17g}"])


def run(config: RunConfig) -> int:
    """Execute the named pipeline; returns the process exit status."""
    started = time.perf_counter()
    out = config.out
    out.mkdir(parents=True, exist_ok=True)

    grid = Grid1D(float(config.grid["x_min"]), float(config.grid["x_max"]),
                  int(config.grid["n_points"]))
    coeffs = coefficients_from_config(config.coefficients, grid)
    rhs = function_from_preset(config.rhs)
    spec = ProblemSpec(coefficients=coeffs, lam=config.lam, rhs=rhs)
    convention = (KernelConvention.PAPER_LITERAL if config.convention == "paper"
                  else KernelConvention.CORRECTED)
    kconfig = ChernoffConfig(convention=convention, n_compose=config.n)
    report: dict[str, Any] = {"command": config.command, "effective_config": config.effective}

    findings = validate(spec, grid)
    if config.command == "validate":
        report["findings"] = [{"code": f.code, "message": f.message} for f in findings]
        report["timing_seconds"] = time.perf_counter() - started
        _write_report(out, report)
        if findings:
            for f in findings:
                print(f"finding {f}")
            print(f"validate: {len(findings)} finding(s); report in {out}")
            return 2
        print(f"validate: all assumptions hold; report in {out}")
        return 0
    if findings:
        for f in findings:
            print(f"finding {f}")
        print(f"{config.command}: aborted on {len(findings)} validation finding(s)")
        return 2

    if config.command == "evolve":
        f0 = sample(rhs, grid)
        result = evolve(config.t, f0, coeffs, kconfig)
        write_csv(result, out / "solution.csv")
        report.update({
            "t": config.t,
            "sup_norm": sup_norm(result),
            "residual_sup": None,
            "tail_bound": None,
        })
        summary = f"evolve: t={config.t:g} n={config.n} sup|f|={sup_norm(result):.6g}"

    elif config.command in ("resolve", "solve"):
        rep = solve_ode(spec, grid, kconfig, config.eps)
        write_csv(rep.solution, out / "solution.csv")
        report.update(rep.summary())
        summary = (
            f"{config.command}: n={config.n} T={rep.parameters['horizon']:.4g} "
            f"nodes={rep.parameters['node_count']} residual_sup={rep.residual_sup:.3e} "
            f"tail_bound={rep.tail_bound:.3e}")

    elif config.command == "tangency":
        f0 = sample(rhs, grid)
        rows = [(t, tangency_defect(f0, t, coeffs, kconfig)) for t in config.t_list]
        _write_pairs_csv(out / "convergence.csv", ("t", "defect"), rows)
        slope = None
        positive = [(t, d) for t, d in rows if d > 0.0]
        if len(positive) >= 2:
            slope = float(np.polyfit(np.log([t for t, _ in positive]),
                                     np.log([d for _, d in positive]), 1)[0])
        report.update({"rows": [{"t": t, "defect": d} for t, d in rows],
                       "loglog_slope": slope})
        summary = f"tangency: {len(rows)} step sizes, log-log slope = {slope}"

    elif config.command == "convergence":
        f0 = sample(rhs, grid)
        study = convergence_study(config.t, f0, coeffs, kconfig, list(config.n_list))
        write_convergence_csv(study, out / "convergence.csv")
        report.update({
            "rows": [{"n": n, "distance": d} for n, d in study.rows],
            "order": study.order,
            "reference": study.reference,
        })
        summary = f"convergence: reference={study.reference} estimated order={study.order}"

    else:  # pragma: no cover - guarded by main()
        raise ValueError(f"unknown command {config.command!r}")

    report["timing_seconds"] = time.perf_counter() - started
    _write_report(out, report)
    print(summary)
    print(f"artifacts written to {out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print(_USAGE)
        return 0
    command, rest = argv[0], argv[1:]
    if command not in COMMANDS:
        print(f"unknown command {command!r}", file=sys.stderr)
        print(_USAGE, file=sys.stderr)
        return 64

    parser = argparse.ArgumentParser(prog=f"chernoff-resolvent {command}", add_help=True)
    parser.add_argument("--config", type=Path, default=None)
    parser.add_argument("--n", type=int, default=None)
    parser.add_argument("--eps", type=float, default=None)
    parser.add_argument("--lambda-re", dest="lambda_re", type=float, default=None)
    parser.add_argument("--lambda-im", dest="lambda_im", type=float, default=None)
    parser.add_argument("--convention", choices=("paper", "corrected"), default=None)
    parser.add_argument("--out", type=Path, default=None)
    try:
        args = parser.parse_args(rest)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 64

    file_cfg: dict[str, Any] = {}
    if args.config is not None:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"cannot read config {args.config}: {exc}", file=sys.stderr)
            return 66

    try:
        config = _merge_config(command, file_cfg, args)
        return run(config)
    except TableReadError as exc:
        print(f"cannot read coefficient table: {exc}", file=sys.stderr)
        return 66
    except ValidationFailure as exc:
        for finding in exc.findings:
            print(f"finding {finding}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
