"""Vector fields and Jacobians for the soliton ODE systems.

Each system is a numba kernel ``f(y, params) -> dy`` over a flat float array.
The same kernels run interpreted (``kernel.py_func``) when an integration asks
for extended precision, so there is a single source for every right-hand side.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numba import njit

from .model import (DomainError, SolitonParams, Spec, TwoSummandsSpec,
                    WarpedProductSpec, XYState, ZState)


# ---------------------------------------------------------------------------
# kernels

@njit(cache=True)
def warped_kernel(y, p):
    # p = [r, eps, C, d_1..d_r, lam_1..lam_r]
    r = int(p[0])
    eps = p[1]
    C = p[2]
    out = np.empty_like(y)
    trL = 0.0 * y[0]
    for i in range(r):
        trL += p[3 + i] * y[r + i] / y[i]
    ud = y[2 * r + 1]
    for i in range(r):
        g = y[i]
        gd = y[r + i]
        out[i] = gd
        out[r + i] = p[3 + r + i] / g - (trL - gd / g - ud) * gd + 0.5 * eps * g
    out[2 * r] = ud
    out[2 * r + 1] = -ud * trL + ud * ud + eps * y[2 * r] + C
    return out


@njit(cache=True)
def warped_res2(y, p):
    r = int(p[0])
    C = p[2]
    trL = 0.0 * y[0]
    trL2 = 0.0 * y[0]
    S = 0.0 * y[0]
    for i in range(r):
        L = y[r + i] / y[i]
        trL += p[3 + i] * L
        trL2 += p[3 + i] * L * L
        S += p[3 + i] * p[3 + r + i] / (y[i] * y[i])
    xi = trL - y[2 * r + 1]
    return S + trL2 - xi * xi - C


@njit(cache=True)
def two_summands_kernel(y, p):
    # p = [d1, d2, A1, A2, A3, eps, C]; y = [g1, g2, gd1, gd2, u, ud]
    d1 = p[0]
    d2 = p[1]
    eps = p[5]
    g1 = y[0]
    g2 = y[1]
    gd1 = y[2]
    gd2 = y[3]
    ud = y[5]
    q = g1 * g1 / (g2 * g2 * g2 * g2)
    r1 = (p[2] / d1) / (g1 * g1) + (p[4] / d1) * q
    r2 = (p[3] / d2) / (g2 * g2) - (2.0 * p[4] / d2) * q
    trL = d1 * gd1 / g1 + d2 * gd2 / g2
    out = np.empty_like(y)
    out[0] = gd1
    out[1] = gd2
    out[2] = r1 * g1 - (trL - gd1 / g1 - ud) * gd1 + 0.5 * eps * g1
    out[3] = r2 * g2 - (trL - gd2 / g2 - ud) * gd2 + 0.5 * eps * g2
    out[4] = ud
    out[5] = -ud * trL + ud * ud + eps * y[4] + p[6]
    return out


@njit(cache=True)
def two_summands_res2(y, p):
    d1 = p[0]
    d2 = p[1]
    g1 = y[0]
    g2 = y[1]
    q = g1 * g1 / (g2 * g2 * g2 * g2)
    r1 = (p[2] / d1) / (g1 * g1) + (p[4] / d1) * q
    r2 = (p[3] / d2) / (g2 * g2) - (2.0 * p[4] / d2) * q
    L1 = y[2] / g1
    L2 = y[3] / g2
    trL = d1 * L1 + d2 * L2
    xi = trL - y[5]
    return d1 * r1 + d2 * r2 + d1 * L1 * L1 + d2 * L2 * L2 - xi * xi - p[6]


@njit(cache=True)
def xy_kernel(y, p):
    # p = [r, d_1..d_r, lam_1..lam_r]; y = [X_1..X_r, Y_1..Y_r]
    r = int(p[0])
    G = 0.0 * y[0]
    for i in range(r):
        G += y[i] * y[i]
    out = np.empty_like(y)
    for i in range(r):
        sd = np.sqrt(p[1 + i])
        X = y[i]
        Y = y[r + i]
        out[i] = X * (G - 1.0) + p[1 + r + i] * Y * Y / sd
        out[r + i] = Y * (G - X / sd)
    return out


@njit(cache=True)
def xy_sub_kernel(y, p):
    # y = [X_1..X_r, Y_2..Y_r]; requires lambda_1 = 0
    r = int(p[0])
    G = 0.0 * y[0]
    for i in range(r):
        G += y[i] * y[i]
    out = np.empty_like(y)
    out[0] = y[0] * (G - 1.0)
    for i in range(1, r):
        sd = np.sqrt(p[1 + i])
        X = y[i]
        Y = y[r + i - 1]
        out[i] = X * (G - 1.0) + p[1 + r + i] * Y * Y / sd
        out[r + i - 1] = Y * (G - X / sd)
    return out


@njit(cache=True)
def zero_residual(y, p):
    return 0.0 * y[0]


@njit(cache=True)
def identity_projection(y, p):
    return y


@njit(cache=True)
def ricci_flat_projection(y, p):
    """Rescale X and Y onto {L = 0, H = 1}: X -> X / H, Y -> b Y."""
    r = int(p[0])
    H = 0.0 * y[0]
    for i in range(r):
        H += np.sqrt(p[1 + i]) * y[i]
    a = 1.0 / H
    G = 0.0 * y[0]
    Q = 0.0 * y[0]
    for i in range(r):
        G += (a * y[i]) * (a * y[i])
        Q += p[1 + r + i] * y[r + i] * y[r + i]
    out = y.copy()
    if Q <= 0.0 or G >= 1.0:
        return out
    b = np.sqrt((1.0 - G) / Q)
    for i in range(r):
        out[i] = a * y[i]
        out[r + i] = b * y[r + i]
    return out


@njit
def rk4_kernel_step(f, y, h, p):
    k1 = f(y, p)
    k2 = f(y + (0.5 * h) * k1, p)
    k3 = f(y + (0.5 * h) * k2, p)
    k4 = f(y + h * k3, p)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# ---------------------------------------------------------------------------
# vector field objects

@dataclass(frozen=True)
class VectorField:
    """A right-hand side bound to its parameters.

    ``positive`` lists state indices that must stay strictly positive
    (the warping functions); ``residual`` evaluates the conservation residual
    checked by the integrator and ``projection`` is applied after each step
    when an integration enables it.
    """

    label: str
    arity: int
    kernel: Callable
    params: np.ndarray
    positive: tuple = ()
    residual: Callable = zero_residual
    projection: Callable = identity_projection

    def __call__(self, y):
        y = np.asarray(y)
        if y.dtype == np.float64:
            return self.kernel(y, self.params)
        return self.python_kernel(y, self.params.astype(y.dtype))

    @property
    def python_kernel(self):
        return getattr(self.kernel, "py_func", self.kernel)

    @property
    def jitted(self) -> bool:
        return hasattr(self.kernel, "py_func")


def warped_params(spec: WarpedProductSpec, p: SolitonParams) -> np.ndarray:
    return np.concatenate([[spec.r, p.epsilon, p.C], spec.dims, np.asarray(spec.lam)])


def two_summands_params(spec: TwoSummandsSpec, p: SolitonParams) -> np.ndarray:
    return np.array([spec.d1, spec.d2, spec.A1, spec.A2, spec.A3, p.epsilon, p.C], dtype=float)


def xy_params(spec: Spec) -> np.ndarray:
    return np.concatenate([[spec.r], spec.dims, np.asarray(spec.lam, dtype=float)])


def warped_z_field(spec: WarpedProductSpec, p: SolitonParams) -> VectorField:
    return VectorField("warped-z", 2 * spec.r + 2, warped_kernel, warped_params(spec, p),
                       positive=tuple(range(spec.r)), residual=warped_res2)


def two_summands_z_field(spec: TwoSummandsSpec, p: SolitonParams) -> VectorField:
    return VectorField("two-summands-z", 6, two_summands_kernel, two_summands_params(spec, p),
                       positive=(0, 1), residual=two_summands_res2)


def z_field(spec: Spec, p: SolitonParams) -> VectorField:
    if isinstance(spec, TwoSummandsSpec):
        return two_summands_z_field(spec, p)
    return warped_z_field(spec, p)


def xy_field(spec: WarpedProductSpec, project: bool = False) -> VectorField:
    """Full phase-space field; ``project=True`` attaches the Ricci-flat projection."""
    return VectorField("xy-full", 2 * spec.r, xy_kernel, xy_params(spec),
                       projection=ricci_flat_projection if project else identity_projection)


def xy_subsystem_field(spec: WarpedProductSpec) -> VectorField:
    if spec.lam[0] != 0.0:
        raise DomainError("the subsystem drops Y_1 and needs lambda_1 = 0")
    return VectorField("xy-subsystem", 2 * spec.r - 1, xy_sub_kernel, xy_params(spec))


# ---------------------------------------------------------------------------
# state-level right-hand sides

def _check_positive(g):
    if np.any(np.asarray(g) <= 0):
        raise DomainError(f"singular right-hand side: some g_i <= 0 ({np.asarray(g)})")


def warped_z_rhs(z: ZState, spec: WarpedProductSpec, p: SolitonParams) -> np.ndarray:
    """Time derivative of ``z.to_array()`` for the r-factor warped product."""
    y = z.to_array() if isinstance(z, ZState) else np.asarray(z, dtype=float)
    _check_positive(y[:spec.r])
    return warped_kernel(y, warped_params(spec, p))


def two_summands_z_rhs(z: ZState, spec: TwoSummandsSpec, p: SolitonParams) -> np.ndarray:
    y = z.to_array() if isinstance(z, ZState) else np.asarray(z, dtype=float)
    _check_positive(y[:2])
    return two_summands_kernel(y, two_summands_params(spec, p))


def xy_rhs(xy, spec: Spec) -> np.ndarray:
    """Phase-space field ``(X', Y')``; polynomial, defined everywhere."""
    y = xy.to_array() if isinstance(xy, XYState) else np.asarray(xy, dtype=float)
    return xy_kernel(y, xy_params(spec))


def xy_subsystem_rhs(v, spec: WarpedProductSpec) -> np.ndarray:
    """Field on ``(X_1..X_r, Y_2..Y_r)``, i.e. the full field without the Y_1 row."""
    if spec.lam[0] != 0.0:
        raise DomainError("the subsystem drops Y_1 and needs lambda_1 = 0")
    return xy_sub_kernel(np.asarray(v, dtype=float), xy_params(spec))


def project_ricci_flat(xy, spec: WarpedProductSpec) -> np.ndarray:
    """Nearest-by-rescaling point on {L = 0, H = 1} (X scaled by 1/H, Y by a common factor)."""
    y = xy.to_array() if isinstance(xy, XYState) else np.asarray(xy, dtype=float)
    return ricci_flat_projection(y, xy_params(spec))


def xy_jacobian(xy, spec: Spec) -> np.ndarray:
    """Analytic Jacobian of :func:`xy_rhs`, ordered ``(X_1..X_r, Y_1..Y_r)``."""
    y = xy.to_array() if isinstance(xy, XYState) else np.asarray(xy, dtype=float)
    r = spec.r
    X, Y = y[:r], y[r:]
    sd = np.sqrt(spec.dims)
    lam = np.asarray(spec.lam, dtype=float)
    G = X @ X
    J = np.zeros((2 * r, 2 * r))
    J[:r, :r] = (G - 1.0) * np.eye(r) + 2.0 * np.outer(X, X)
    J[:r, r:] = np.diag(2.0 * lam * Y / sd)
    J[r:, :r] = 2.0 * np.outer(Y, X) - np.diag(Y / sd)
    J[r:, r:] = np.diag(G - X / sd)
    return J


def recover_Y1(sub_traj, Y1_at_s0: float) -> np.ndarray:
    """Y_1 along a subsystem (or full) trajectory from ``Y_1' = Y_1 (G - X_1)``.

    The exponent is accumulated with the composite trapezoid rule on the
    trajectory's uniform s-grid.
    """
    from .integrate import quadrature

    if not Y1_at_s0 > 0:
        raise DomainError(f"Y_1(s0) must be positive, got {Y1_at_s0}")
    r = sub_traj.spec.r
    X = sub_traj.states[:, :r]
    integrand = np.sum(X**2, axis=1) - X[:, 0]
    return Y1_at_s0 * np.exp(quadrature(integrand, sub_traj.spacing))


__all__ = [
    "VectorField", "warped_kernel", "two_summands_kernel", "xy_kernel", "xy_sub_kernel",
    "warped_z_field", "two_summands_z_field", "z_field", "xy_field", "xy_subsystem_field",
    "warped_z_rhs", "two_summands_z_rhs", "xy_rhs", "xy_subsystem_rhs", "xy_jacobian",
    "project_ricci_flat", "recover_Y1", "warped_params", "two_summands_params", "xy_params",
]
