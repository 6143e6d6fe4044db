"""Coefficient data for a(x) f'' + b(x) f' + c(x) f, assumption checks, bounds.

Smoothness (Hoelder continuity) of the coefficients is the caller's contract
and is not verified here; only boundedness, positivity of a, and decay of the
right-hand side are spot-checked on the working grid.  All types are
immutable and all operations pure.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .grid import Grid1D

__all__ = [
    "CoefficientSet",
    "Finding",
    "KernelConvention",
    "ProblemSpec",
    "SemigroupBounds",
    "TableReadError",
    "ValidationFailure",
    "bounds_for",
    "coefficients_from_config",
    "function_from_preset",
    "growth_bound",
    "potential",
    "validate",
]


class KernelConvention(enum.Enum):
    """Selects the variance/tilt scaling of the one-step Gaussian kernels.

    CORRECTED (default) uses variance 2 t a(x), making the composed step
    tangent to a f'' + b f' + c f.  PAPER_LITERAL keeps the narrower
    variance t a(x), which is tangent to (a/2) f'' + b f' + c f instead;
    it is retained so the factor-two discrepancy can be demonstrated.
    """

    PAPER_LITERAL = "paper"
    CORRECTED = "corrected"


@dataclass(frozen=True)
class CoefficientSet:
    """The coefficient functions a, b, c with certified scalar bounds.

    ``a_floor`` is a certified positive lower bound for a(x); ``c_sup`` an
    optional certified upper bound for sup c(x) (used to refine the growth
    bound beyond what the grid samples show).
    """

    a: Callable
    b: Callable
    c: Callable
    a_floor: float
    c_sup: float | None = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.a_floor) and self.a_floor > 0.0):
            raise ValueError(f"a_floor must be a positive real, got {self.a_floor}")
        if self.c_sup is not None and not np.isfinite(self.c_sup):
            raise ValueError("c_sup must be finite when given")


@dataclass(frozen=True)
class SemigroupBounds:
    """Stability constant M >= 1 and exponential growth rate omega >= 0."""

    M: float
    omega: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.M) and self.M >= 1.0):
            raise ValueError(f"M must be >= 1, got {self.M}")
        if not (np.isfinite(self.omega) and self.omega >= 0.0):
            raise ValueError(f"omega must be >= 0, got {self.omega}")


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients, the resolvent/ODE parameter lambda, and the data g."""

    coefficients: CoefficientSet
    lam: complex
    rhs: Callable

    def __post_init__(self) -> None:
        lam = complex(self.lam)
        if not (np.isfinite(lam.real) and np.isfinite(lam.imag)):
            raise ValueError("lambda must be finite")
        object.__setattr__(self, "lam", lam)


@dataclass(frozen=True)
class Finding:
    """A violated standing assumption; callers decide whether to abort."""

    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class ValidationFailure(ValueError):
    """Raised by operations whose precondition is a clean validation."""

    def __init__(self, findings: list[Finding]):
        self.findings = list(findings)
        super().__init__("; ".join(str(f) for f in findings))


def growth_bound(coeffs: CoefficientSet, grid: Grid1D | None = None) -> float:
    """w = max(0, sup c), the exponential growth rate of the evolution.

    The sup is estimated over the working grid and refined by the certified
    ``c_sup`` field when present; at least one of the two must be available.
    """
    candidates = []
    if grid is not None:
        cv = np.asarray(coeffs.c(grid.nodes), dtype=float)
        cv = np.broadcast_to(cv, grid.nodes.shape)
        if not np.all(np.isfinite(cv)):
            raise ValueError("coefficient not finite: c has non-finite samples on the grid")
        candidates.append(float(cv.max()))
    if coeffs.c_sup is not None:
        candidates.append(float(coeffs.c_sup))
    if not candidates:
        raise ValueError("growth_bound needs a grid or a certified c_sup")
    return max(0.0, max(candidates))


def potential(coeffs: CoefficientSet, x, convention: KernelConvention):
    """c(x) - b(x)^2 / (2 a(x)) literal variant, or denominator 4 a(x) corrected.

    The corrected denominator is what the wider-variance kernel's tilt mass
    requires; see the kernel module for the derivation.
    """
    a = np.asarray(coeffs.a(x), dtype=float)
    b = np.asarray(coeffs.b(x), dtype=float)
    c = np.asarray(coeffs.c(x), dtype=float)
    a, b, c = np.broadcast_arrays(a, b, c, np.asarray(x, dtype=float))[:3]
    if np.any(a <= 0.0):
        raise ValueError("a(x) must be positive wherever the potential is evaluated")
    denom = 2.0 * a if convention is KernelConvention.PAPER_LITERAL else 4.0 * a
    out = c - b * b / denom
    return out if out.ndim else float(out)


def bounds_for(coeffs: CoefficientSet, grid: Grid1D) -> SemigroupBounds:
    """Bounds with M fixed to 1: the composed step satisfies |S(t)| <= e^{w t}."""
    return SemigroupBounds(M=1.0, omega=growth_bound(coeffs, grid))


def validate(spec: ProblemSpec, grid: Grid1D, *, decay_threshold: float = 1e-3) -> list[Finding]:
    """Check the standing assumptions on the working grid.

    Returns every violation as a named finding (empty list = valid); never
    raises.  Deterministic: identical inputs yield identical findings.
    """
    xs = grid.nodes
    coeffs = spec.coefficients
    findings: list[Finding] = []

    sampled = {}
    for name, func in (("a", coeffs.a), ("b", coeffs.b), ("c", coeffs.c), ("g", spec.rhs)):
        vals = np.broadcast_to(np.asarray(func(xs), dtype=float), xs.shape)
        if not np.all(np.isfinite(vals)):
            bad = int(np.flatnonzero(~np.isfinite(vals))[0])
            findings.append(Finding(
                f"{name}-not-finite",
                f"{name} is non-finite at node {bad} (x = {xs[bad]:g})",
            ))
        else:
            sampled[name] = vals

    if "a" in sampled:
        a_min = float(sampled["a"].min())
        if a_min <= 0.0 or a_min < coeffs.a_floor:
            findings.append(Finding(
                "a-not-positive",
                "a not bounded below by positive constant: "
                f"min a = {a_min:g}, certified floor = {coeffs.a_floor:g}",
            ))

    if "c" in sampled:
        w = max(0.0, float(sampled["c"].max()))
        if coeffs.c_sup is not None:
            w = max(w, max(0.0, float(coeffs.c_sup)))
        if spec.lam.real <= w:
            findings.append(Finding(
                "lambda-below-growth-bound",
                f"Re lambda <= growth bound: Re lambda = {spec.lam.real:g}, w = {w:g}",
            ))

    if "g" in sampled:
        gv = sampled["g"]
        g_sup = float(np.max(np.abs(gv)))
        if g_sup > 0.0:
            edge = float(max(np.max(np.abs(gv[:2])), np.max(np.abs(gv[-2:]))))
            if edge > decay_threshold * g_sup:
                findings.append(Finding(
                    "rhs-not-decaying",
                    "g does not vanish toward the grid boundary: "
                    f"edge magnitude {edge:g} exceeds {decay_threshold:g} * sup|g| = "
                    f"{decay_threshold * g_sup:g}",
                ))

    return findings


# ---------------------------------------------------------------------------
# Coefficient presets and sampled tables (see the CLI module for the grammar).

class TableReadError(Exception):
    """A coefficient table could not be read."""


def _load_table(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    try:
        rows = []
        with Path(path).open(newline="") as fh:
            for row in csv.reader(fh):
                if not row:
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except ValueError:
                    continue  # header line
        if not rows:
            raise TableReadError(f"{path}: no numeric rows")
    except OSError as exc:
        raise TableReadError(f"{path}: {exc}") from exc
    data = np.asarray(sorted(rows))
    return data[:, 0], data[:, 1]


def function_from_preset(spec) -> Callable:
    """Build a coefficient/data function from a preset description.

    ``spec`` is a callable (returned unchanged), a number (constant), or a
    dict with a ``kind`` field: constant, rational-decay, gaussian-bump,
    sinusoidal, or table.  Tables are linearly interpolated with end values
    held beyond their range.
    """
    if callable(spec):
        return spec
    if isinstance(spec, (int, float)):
        value = float(spec)
        return lambda x: np.full_like(np.asarray(x, dtype=float), value)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError(f"preset must be a callable, a number, or a dict with 'kind': {spec!r}")

    kind = spec["kind"]
    p = {k: v for k, v in spec.items() if k != "kind"}
    if kind == "constant":
        value = float(p.get("value", 0.0))
        return lambda x: np.full_like(np.asarray(x, dtype=float), value)
    if kind == "rational-decay":
        base = float(p.get("base", 0.0))
        amp = float(p.get("amplitude", 1.0))
        center = float(p.get("center", 0.0))
        scale = float(p.get("scale", 1.0))
        return lambda x: base + amp / (1.0 + ((np.asarray(x, dtype=float) - center) / scale) ** 2)
    if kind == "gaussian-bump":
        base = float(p.get("base", 0.0))
        amp = float(p.get("amplitude", 1.0))
        center = float(p.get("center", 0.0))
        width = float(p.get("width", 1.0))
        if width <= 0.0:
            raise ValueError("gaussian-bump width must be positive")
        return lambda x: base + amp * np.exp(
            -((np.asarray(x, dtype=float) - center) ** 2) / (2.0 * width * width))
    if kind == "sinusoidal":
        base = float(p.get("base", 0.0))
        amp = float(p.get("amplitude", 1.0))
        freq = float(p.get("frequency", 1.0))
        phase = float(p.get("phase", 0.0))
        decay = float(p.get("decay_power", 0.0))
        def sinusoid(x):
            x = np.asarray(x, dtype=float)
            env = (1.0 + x * x) ** (-decay) if decay else 1.0
            return base + amp * np.sin(freq * x + phase) * env
        return sinusoid
    if kind == "table":
        if "path" in p:
            tx, tv = _load_table(p["path"])
        elif "points" in p:
            pts = sorted((float(a), float(b)) for a, b in p["points"])
            tx = np.asarray([a for a, _ in pts])
            tv = np.asarray([b for _, b in pts])
        else:
            raise ValueError("table preset needs 'path' or 'points'")
        return lambda x: np.interp(np.asarray(x, dtype=float), tx, tv)
    raise ValueError(f"unknown preset kind {kind!r}")


def coefficients_from_config(cfg: dict, grid: Grid1D) -> CoefficientSet:
    """Assemble a CoefficientSet from preset descriptions.

    ``a_floor`` defaults to the grid minimum of a; a certificate should be
    supplied when the true infimum is known.
    """
    a = function_from_preset(cfg.get("a", {"kind": "constant", "value": 1.0}))
    b = function_from_preset(cfg.get("b", {"kind": "constant", "value": 0.0}))
    c = function_from_preset(cfg.get("c", {"kind": "constant", "value": 0.0}))
    a_floor = cfg.get("a_floor")
    if a_floor is None:
        av = np.broadcast_to(np.asarray(a(grid.nodes), dtype=float), grid.nodes.shape)
        a_floor = float(av.min())
        if a_floor <= 0.0:
            raise ValidationFailure([Finding(
                "a-not-positive",
                f"a not bounded below by positive constant: min a = {a_floor:g}",
            )])
    c_sup = cfg.get("c_sup")
    return CoefficientSet(a=a, b=b, c=c, a_floor=float(a_floor),
                          c_sup=None if c_sup is None else float(c_sup))
