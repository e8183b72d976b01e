"""Series initial data near the singular orbit.

The equations are singular at ``t = 0`` where the first factor collapses, so
integrations start at a small ``t0`` from a truncated Taylor series obeying the
C^2 smoothness conditions: ``g_1(0) = 0, gdot_1(0) = 1``, ``g_i(0) = l_i``,
``gdot_i(0) = 0`` and ``udot(0) = 0``.  The second-order coefficients follow
from the t -> 0 limit of the shape-operator equation,

    (d_1 + 1) gddot_i(0) = l_i (r_i(0) + eps/2),    (d_1 + 1) uddot(0) = C + eps u_0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import (SolitonParams, SpecError, TwoSummandsSpec, WarpedProductSpec,
                    XYState, ZState, xy_from_z)

DEFAULT_T0 = 1e-3
TWO_SUMMANDS_T0 = 1e-2


@dataclass(frozen=True)
class SeedConfig:
    """Where and how to evaluate the series.

    ``t0=None`` picks the per-system default: 1e-3 for warped products and
    1e-2 for two-summands orbits, whose first step is otherwise dominated by
    the cancelling ``(d_1 - 1)/g_1`` terms.
    """

    l: tuple
    t0: Optional[float] = None
    u0: float = 0.0
    mode: str = "soliton"

    def __post_init__(self):
        l = tuple(float(x) for x in np.atleast_1d(self.l))
        object.__setattr__(self, "l", l)
        if self.t0 is not None:
            t0 = float(self.t0)
            if not 0.0 < t0 <= 0.01:
                raise SpecError(f"t0 must lie in (0, 0.01], got {t0}")
            object.__setattr__(self, "t0", t0)
        if any(not x > 0 for x in l):
            raise SpecError(f"initial radii must be positive, got {l}")
        if self.mode not in ("soliton", "ricci-flat"):
            raise SpecError(f"mode must be 'soliton' or 'ricci-flat', got {self.mode!r}")


def _check_mode(p: SolitonParams, mode: str):
    if p.epsilon != 0.0:
        raise SpecError("only steady solitons (epsilon = 0) are supported")
    if mode == "soliton" and not p.C < 0:
        raise SpecError(f"soliton mode needs C < 0, got C = {p.C}")
    if mode == "ricci-flat" and p.C != 0:
        raise SpecError(f"ricci-flat mode needs C = 0, got C = {p.C}")


def series_coefficients(spec: WarpedProductSpec, p: SolitonParams, l: Sequence[float],
                        u0: float = 0.0):
    """Second derivatives at the singular orbit: ``(gddot_i(0) for i >= 2, uddot(0))``."""
    l = np.asarray(l, dtype=float)
    d1 = spec.d[0]
    ric0 = np.asarray(spec.lam[1:]) / l**2
    gdd = l * (ric0 + 0.5 * p.epsilon) / (d1 + 1)
    udd = (p.C + p.epsilon * u0) / (d1 + 1)
    return gdd, udd


def soliton_seed(spec: WarpedProductSpec, p: SolitonParams, cfg: SeedConfig) -> ZState:
    """Order-2 series state at ``t0`` for a warped product with a collapsing circle."""
    spec.validate_construction()
    _check_mode(p, cfg.mode)
    if len(cfg.l) != spec.r - 1:
        raise SpecError(f"need {spec.r - 1} initial radii, got {len(cfg.l)}")
    t0 = DEFAULT_T0 if cfg.t0 is None else cfg.t0
    l = np.asarray(cfg.l)
    gdd, udd = series_coefficients(spec, p, l, cfg.u0)
    if cfg.mode == "ricci-flat":
        udd = 0.0
    g = np.concatenate([[t0], l + 0.5 * gdd * t0**2])
    gdot = np.concatenate([[1.0], gdd * t0])
    return ZState(t=t0, g=g, gdot=gdot, u=cfg.u0 + 0.5 * udd * t0**2, udot=udd * t0)


def two_summands_seed(spec: TwoSummandsSpec, p: SolitonParams, cfg: SeedConfig) -> ZState:
    """Series state for the two-summands system with ``g_2(0) = h_bar``.

    When ``d1 > 1`` the sphere's curvature ``(d1 - 1)/g_1^2`` forces the cubic
    coefficient of ``g_1``; without it the seed violates the conservation law
    at order one.  It is included, which leaves a defect of order ``t0^2``.
    """
    _check_mode(p, cfg.mode)
    if len(cfg.l) != 1:
        raise SpecError("two-summands seeds take a single initial radius h_bar")
    hbar = cfg.l[0]
    t0 = TWO_SUMMANDS_T0 if cfg.t0 is None else cfg.t0
    d1, d2 = spec.d1, spec.d2
    # the A3 term of r_2 vanishes with g_1
    r2 = spec.A2 / (d2 * hbar**2)
    g2dd = hbar * (r2 + 0.5 * p.epsilon) / (d1 + 1)
    udd = 0.0 if cfg.mode == "ricci-flat" else (p.C + p.epsilon * cfg.u0) / (d1 + 1)
    # g_1 = t + c t^3 from the constant term of the collapsing factor's equation
    c = (udd + 0.5 * p.epsilon - d2 * g2dd / hbar) / (6.0 * d1) if d1 > 1 else 0.0
    g = np.array([t0 + c * t0**3, hbar + 0.5 * g2dd * t0**2])
    gdot = np.array([1.0 + 3.0 * c * t0**2, g2dd * t0])
    return ZState(t=t0, g=g, gdot=gdot, u=cfg.u0 + 0.5 * udd * t0**2, udot=udd * t0)


def z_seed(spec, p: SolitonParams, cfg: SeedConfig) -> ZState:
    if isinstance(spec, TwoSummandsSpec):
        return two_summands_seed(spec, p, cfg)
    return soliton_seed(spec, p, cfg)


def xy_seed(spec: WarpedProductSpec, p: SolitonParams, cfg: SeedConfig) -> XYState:
    """Phase point of the series seed; lies near the critical point P0 = (X_1 = Y_1 = 1)."""
    return xy_from_z(soliton_seed(spec, p, cfg), spec, p)


__all__ = ["SeedConfig", "series_coefficients", "soliton_seed", "two_summands_seed",
           "z_seed", "xy_seed", "DEFAULT_T0", "TWO_SUMMANDS_T0"]
