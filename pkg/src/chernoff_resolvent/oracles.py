"""Independent ground-truth references for testing the main pipeline.

Closed-form constant-coefficient evolution and resolvent kernels evaluated
by fine quadrature on a refined grid, and a finite-difference boundary-value
solver for variable coefficients.  These deliberately share no quadrature
code with the kernel module so failure modes are anti-correlated.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from .grid import Grid1D, GridFunction
from .problem import ProblemSpec, ValidationFailure, validate

__all__ = ["fd_bvp_solve", "green_reference", "heat_reference"]

_REFINE = 4


def _refined_samples(f: GridFunction, refine: int) -> tuple[Grid1D, np.ndarray, np.ndarray]:
    rg = f.grid.refined(refine)
    ys = rg.nodes
    fy = CubicSpline(f.grid.nodes, f.values)(ys)
    tau = np.full(rg.n_points, rg.spacing)
    tau[0] *= 0.5
    tau[-1] *= 0.5
    return rg, fy, tau


def heat_reference(t: float, f: GridFunction, a_const: float, b_const: float,
                   c_const: float, *, refine: int = _REFINE) -> GridFunction:
    """Exact constant-coefficient evolution of a d2 + b d1 + c, fine quadrature.

    e^{c t} times the convolution of f with a Gaussian of mean -b t and
    variance 2 a t, evaluated by trapezoid quadrature on a ``refine``-times
    finer grid (f interpolated by a cubic spline).  Kernel weights are
    normalized to unit mass so the t -> 0 limit returns f.
    """
    if t <= 0.0:
        raise ValueError("t must be positive")
    if a_const <= 0.0:
        raise ValueError("a must be positive")
    rg, fy, tau = _refined_samples(f, refine)
    # rows: output node x_i; columns: refined node y
    u = f.grid.nodes[:, None] - rg.nodes[None, :]   # x - y
    w = np.exp(-((u + b_const * t) ** 2) / (4.0 * a_const * t)) * tau[None, :]
    w /= w.sum(axis=1, keepdims=True)
    return GridFunction(f.grid, np.exp(c_const * t) * (w @ fy))


def green_reference(lam: complex, g: GridFunction, a_const: float,
                    *, refine: int = _REFINE) -> GridFunction:
    """Exact resolvent of a d2 applied to g: kernel e^{-sqrt(lam/a)|x-y|}/(2 sqrt(lam a)).

    Valid for Re lam > 0 with b = c = 0; fine trapezoid quadrature, no
    renormalization (the kernel integrates to 1/lam analytically).
    """
    lam = complex(lam)
    if lam.real <= 0.0:
        raise ValueError("Re lambda must be positive")
    if a_const <= 0.0:
        raise ValueError("a must be positive")
    rg, gy, tau = _refined_samples(g, refine)
    kappa = np.sqrt(lam / a_const)
    pref = 1.0 / (2.0 * np.sqrt(lam * a_const))
    dist = np.abs(g.grid.nodes[:, None] - rg.nodes[None, :])
    w = pref * np.exp(-kappa * dist) * tau[None, :]
    out = w @ gy
    if lam.imag == 0.0 and not g.is_complex:
        out = out.real
    return GridFunction(g.grid, out)


def fd_bvp_solve(spec: ProblemSpec, grid: Grid1D) -> GridFunction:
    """Second-order central-difference solve of a f'' + b f' + (c - lam) f = -g.

    Zero Dirichlet values at the grid edges stand in for vanishing at
    infinity; the tridiagonal system is solved directly.  The returned field
    satisfies the discrete equations to rounding.
    """
    findings = validate(spec, grid)
    if findings:
        raise ValidationFailure(findings)

    xs = grid.nodes
    h = grid.spacing
    n = grid.n_points
    coeffs = spec.coefficients
    av = np.broadcast_to(np.asarray(coeffs.a(xs), dtype=float), xs.shape)
    bv = np.broadcast_to(np.asarray(coeffs.b(xs), dtype=float), xs.shape)
    cv = np.broadcast_to(np.asarray(coeffs.c(xs), dtype=float), xs.shape)
    gv = np.broadcast_to(np.asarray(spec.rhs(xs), dtype=float), xs.shape)

    lam = spec.lam if spec.lam.imag != 0.0 else spec.lam.real
    dtype = np.complex128 if spec.lam.imag != 0.0 else np.float64

    diag = (-2.0 * av / h**2 + cv - lam).astype(dtype)
    upper = (av / h**2 + bv / (2.0 * h)).astype(dtype)
    lower = (av / h**2 - bv / (2.0 * h)).astype(dtype)
    rhs = (-gv).astype(dtype)

    diag[0] = diag[-1] = 1.0
    upper[0] = 0.0
    lower[-1] = 0.0
    rhs[0] = rhs[-1] = 0.0

    ab = np.zeros((3, n), dtype=dtype)
    ab[0, 1:] = upper[:-1]
    ab[1, :] = diag
    ab[2, :-1] = lower[1:]
    try:
        sol = solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - needs adversarial input
        raise RuntimeError(
            "tridiagonal system is singular; with a > 0 and Re lambda above sup c this "
            "indicates too coarse a grid") from exc
    return GridFunction(grid, sol)
