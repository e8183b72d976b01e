"""Domain types and pointwise scalar functions on soliton states.

Two coordinate systems are used throughout:

* metric coordinates ``(g_i, gdot_i, u, udot)`` at arclength ``t`` (``ZState``);
* autonomous phase coordinates ``(X_i, Y_i)`` at phase time ``s`` (``XYState``),
  with ``X_i = sqrt(d_i) gdot_i / (xi g_i)`` and ``Y_i = sqrt(d_i) / (xi g_i)``.

Array layouts are block-ordered: a z-vector is ``[g_1..g_r, gdot_1..gdot_r, u, udot]``
and an xy-vector is ``[X_1..X_r, Y_1..Y_r]``.  Every scalar function here is pure
and accepts either a state object or a stacked array whose last axis is a state
vector, so the same code evaluates single states and whole trajectories.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np


class SpecError(ValueError):
    """Orbit data or parameters outside the supported configuration."""


class DomainError(ValueError):
    """A map or function evaluated outside its domain of definition."""


def _as_float_tuple(values) -> tuple:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class WarpedProductSpec:
    """Multiply warped product ``dt^2 + sum g_i(t)^2 h_i`` over Einstein factors.

    ``d[i]`` is the dimension of the i-th factor and ``lam[i]`` its Einstein
    constant.  A factor is flat exactly when it is a circle.
    """

    d: tuple
    lam: tuple

    def __post_init__(self):
        d = tuple(int(x) for x in self.d)
        lam = _as_float_tuple(self.lam)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "lam", lam)
        if len(d) != len(lam):
            raise SpecError(f"d has {len(d)} entries but lambda has {len(lam)}")
        if len(d) < 2:
            raise SpecError("a warped product needs r >= 2 factors")
        if any(x < 1 for x in d):
            raise SpecError(f"factor dimensions must be >= 1, got {d}")
        if sum(d) < 3:
            raise SpecError(f"total dimension n = {sum(d)} must be >= 3")
        for i, (di, li) in enumerate(zip(d, lam)):
            if li < 0:
                raise SpecError(f"lambda_{i + 1} = {li} is negative")
            if (li == 0.0) != (di == 1):
                raise SpecError(
                    f"factor {i + 1}: lambda = 0 exactly when d = 1 (got d={di}, lambda={li})"
                )

    @property
    def r(self) -> int:
        return len(self.d)

    @property
    def n(self) -> int:
        return sum(self.d)

    @property
    def dims(self) -> np.ndarray:
        return np.asarray(self.d, dtype=float)

    def ricci_diagonal(self, g):
        """Ricci endomorphism entries ``lambda_i / g_i^2`` (last axis indexes factors)."""
        g = np.asarray(g)
        return np.asarray(self.lam, dtype=g.dtype if g.dtype.kind == "f" else float) / g**2

    def validate_construction(self):
        """Check the circle-collapse setting: d_1 = 1 and every other factor curved."""
        if self.d[0] != 1:
            raise SpecError("the collapsing factor must be a circle (d_1 = 1)")
        if any(x == 1 for x in self.d[1:]):
            raise SpecError("only the first factor may be a circle")


@dataclass(frozen=True)
class TwoSummandsSpec:
    """Principal orbit ``G/K`` with two inequivalent isotropy summands.

    ``d1`` is the dimension of the collapsing sphere ``H/K`` and ``d2`` that of
    the singular orbit directions.  ``A1 = d1 (d1 - 1)`` is fixed by the choice
    of background metric.
    """

    d1: int
    d2: int
    A2: float
    A3: float
    A1: Optional[float] = None

    def __post_init__(self):
        d1, d2 = int(self.d1), int(self.d2)
        object.__setattr__(self, "d1", d1)
        object.__setattr__(self, "d2", d2)
        expected = float(d1 * (d1 - 1))
        a1 = expected if self.A1 is None else float(self.A1)
        if a1 != expected:
            raise SpecError(f"A1 must equal d1 (d1 - 1) = {expected}, got {a1}")
        object.__setattr__(self, "A1", a1)
        object.__setattr__(self, "A2", float(self.A2))
        object.__setattr__(self, "A3", float(self.A3))
        if d1 < 1 or d2 < 2:
            raise SpecError(f"need d1 >= 1 and d2 >= 2, got d1={d1}, d2={d2}")
        if self.A2 <= 0:
            raise SpecError(f"A2 must be positive, got {self.A2}")
        # A3 = 0 is the decoupled (warped) limit and is allowed.
        if self.A3 < 0:
            raise SpecError(f"A3 must be non-negative, got {self.A3}")

    @classmethod
    def example2(cls, m: int) -> "TwoSummandsSpec":
        """Sp(m+1)/Sp(m)U(1) over HP^m (principal orbit CP^{2m+1})."""
        return cls(d1=2, d2=4 * m, A2=2.0 * m * (m + 2), A3=m / 2.0)

    @classmethod
    def example3(cls, m: int) -> "TwoSummandsSpec":
        """Sp(m+1)Sp(1)/Sp(m)diag Sp(1) over HP^m (principal orbit S^{4m+3})."""
        return cls(d1=3, d2=4 * m, A2=4.0 * m * (m + 2), A3=3.0 * m / 4.0)

    @property
    def r(self) -> int:
        return 2

    @property
    def d(self) -> tuple:
        return (self.d1, self.d2)

    @property
    def n(self) -> int:
        return self.d1 + self.d2

    @property
    def dims(self) -> np.ndarray:
        return np.asarray(self.d, dtype=float)

    def ricci_diagonal(self, g):
        g = np.asarray(g)
        r1, r2 = two_summands_ricci(g[..., 0], g[..., 1], self)
        return np.stack([r1, r2], axis=-1)


Spec = Union[WarpedProductSpec, TwoSummandsSpec]


@dataclass(frozen=True)
class SolitonParams:
    """Soliton constant ``epsilon`` and conservation constant ``C``.

    Steady runs use ``epsilon = 0``; ``C < 0`` selects a nontrivial soliton and
    ``C = 0`` the Ricci-flat (trivial soliton) mode.
    """

    C: float
    epsilon: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "C", float(self.C))
        object.__setattr__(self, "epsilon", float(self.epsilon))
        if not (np.isfinite(self.C) and np.isfinite(self.epsilon)):
            raise SpecError("C and epsilon must be finite")

    @property
    def mode(self) -> str:
        if self.C < 0:
            return "soliton"
        if self.C == 0:
            return "ricci-flat"
        return "invalid"

    def require_steady(self, mode: Optional[str] = None):
        if self.epsilon != 0.0:
            raise SpecError("only steady solitons (epsilon = 0) are supported")
        if self.C > 0:
            raise SpecError(f"C = {self.C}: steady solitons need C < 0 (C = 0 for Ricci-flat)")
        if mode is not None and mode != self.mode:
            raise SpecError(f"mode {mode!r} is inconsistent with C = {self.C}")


def _frozen_array(values) -> np.ndarray:
    a = np.array(values, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ZState:
    """Metric coordinates at arclength ``t``."""

    t: float
    g: np.ndarray
    gdot: np.ndarray
    u: float = 0.0
    udot: float = 0.0

    def __post_init__(self):
        g = _frozen_array(self.g)
        gdot = _frozen_array(self.gdot)
        if g.shape != gdot.shape or g.ndim != 1:
            raise DomainError("g and gdot must be 1-d arrays of equal length")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "gdot", gdot)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "udot", float(self.udot))
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(gdot))
                and np.isfinite(self.u) and np.isfinite(self.udot)):
            raise DomainError("state has non-finite entries")
        if np.any(g <= 0):
            raise DomainError(f"warping functions must be positive, got g = {g}")

    @property
    def r(self) -> int:
        return self.g.size

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.g, self.gdot, [self.u, self.udot]])

    @classmethod
    def from_array(cls, t: float, y) -> "ZState":
        y = np.asarray(y, dtype=float)
        r = (y.size - 2) // 2
        return cls(t=t, g=y[:r], gdot=y[r:2 * r], u=y[2 * r], udot=y[2 * r + 1])

    def paper_order(self) -> np.ndarray:
        """Interleaved vector ``(g_1, gdot_1, ..., g_r, gdot_r, u, udot)``."""
        pairs = np.column_stack([self.g, self.gdot]).ravel()
        return np.concatenate([pairs, [self.u, self.udot]])


@dataclass(frozen=True)
class XYState:
    """Phase coordinates at phase time ``s``."""

    s: float
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = _frozen_array(self.X)
        Y = _frozen_array(self.Y)
        if X.shape != Y.shape or X.ndim != 1:
            raise DomainError("X and Y must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise DomainError("state has non-finite entries")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "s", float(self.s))

    @property
    def r(self) -> int:
        return self.X.size

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.X, self.Y])

    @classmethod
    def from_array(cls, s: float, y) -> "XYState":
        y = np.asarray(y, dtype=float)
        r = y.size // 2
        return cls(s=s, X=y[:r], Y=y[r:])


@dataclass(frozen=True)
class GeometryScalars:
    """Scalar geometry of one state.  ``H`` and ``Lcal`` are ``None`` where xi = 0."""

    trL: float
    trL2: float
    S: float
    xi: float
    Rbar: float
    H: Optional[float]
    G: float
    Lcal: Optional[float]
    relvol: float


# ---------------------------------------------------------------------------
# metric-coordinate scalars

def _z_parts(z):
    if isinstance(z, ZState):
        return z.g, z.gdot, np.float64(z.u), np.float64(z.udot)
    y = np.asarray(z)
    r = (y.shape[-1] - 2) // 2
    return y[..., :r], y[..., r:2 * r], y[..., 2 * r], y[..., 2 * r + 1]


def z_columns(z, spec: Spec, p: SolitonParams) -> dict:
    """Vectorised scalar columns for a state or a stack of z-vectors.

    Returns a dict with ``trL, trL2, trL0sq, S, xi, Rbar, G, H, Lcal, relvol,
    X, Y`` where ``H``, ``Lcal``, ``X``, ``Y`` are NaN wherever xi vanishes
    (or is non-positive, for ``X`` and ``Y``).
    """
    g, gdot, u, udot = _z_parts(z)
    d = spec.dims
    n = spec.n
    Li = gdot / g
    trL = np.sum(d * Li, axis=-1)
    trL2 = np.sum(d * Li**2, axis=-1)
    S = np.sum(d * spec.ricci_diagonal(g), axis=-1)
    xi = trL - udot
    eps = p.epsilon
    Rbar = -p.C - udot**2 - eps * u - 0.5 * eps * (n + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ok = xi != 0
        safe = np.where(ok, xi, 1.0)
        H = np.where(ok, trL / safe, np.nan)
        Lcal = np.where(ok, p.C / safe**2, np.nan)
        pos = (xi > 0)[..., None]
        safe_pos = np.where(pos, np.asarray(xi)[..., None], 1.0)
        sd = np.sqrt(d)
        X = np.where(pos, sd * Li / safe_pos, np.nan)
        Y = np.where(pos, sd / (safe_pos * g), np.nan)
        G = np.where(ok, trL2 / safe**2, np.nan)
    relvol = np.prod(g**d, axis=-1)
    return dict(trL=trL, trL2=trL2, trL0sq=trL2 - trL**2 / n, S=S, xi=xi,
                Rbar=Rbar, H=H, G=G, Lcal=Lcal, relvol=relvol, X=X, Y=Y)


def scalars_from_z(z: ZState, spec: Spec, p: SolitonParams) -> GeometryScalars:
    """Mean curvature, scalar curvatures and Lyapunov quantities of a z-state."""
    c = z_columns(z, spec, p)
    undefined = c["xi"] == 0
    return GeometryScalars(
        trL=float(c["trL"]), trL2=float(c["trL2"]), S=float(c["S"]),
        xi=float(c["xi"]), Rbar=float(c["Rbar"]),
        H=None if undefined else float(c["H"]),
        G=float("nan") if undefined else float(c["G"]),
        Lcal=None if undefined else float(c["Lcal"]),
        relvol=float(c["relvol"]),
    )


def xy_from_z(z: ZState, spec: Spec, p: SolitonParams) -> XYState:
    """Phase point of a z-state; ``s`` is left at 0 for the caller to assign.

    Raises DomainError when xi <= 0 (the change of variables is undefined).
    """
    c = z_columns(z, spec, p)
    if not c["xi"] > 0:
        raise DomainError(f"xi = {float(c['xi'])} <= 0, phase coordinates undefined")
    return XYState(s=0.0, X=c["X"], Y=c["Y"])


def xy_array_from_z(zs, spec: Spec, p: SolitonParams) -> np.ndarray:
    """Stacked version of :func:`xy_from_z` for arrays of z-vectors."""
    c = z_columns(zs, spec, p)
    if np.any(~(c["xi"] > 0)):
        raise DomainError("xi <= 0 at some sample, phase coordinates undefined")
    return np.concatenate([c["X"], c["Y"]], axis=-1)


def two_summands_ricci(g1, g2, spec: TwoSummandsSpec):
    """Ricci components ``(r1, r2)`` of the two-summands orbit metric."""
    q = g1**2 / g2**4
    r1 = (spec.A1 / spec.d1) / g1**2 + (spec.A3 / spec.d1) * q
    r2 = (spec.A2 / spec.d2) / g2**2 - (2.0 * spec.A3 / spec.d2) * q
    return r1, r2


def z_accelerations(z, spec: Spec, p: SolitonParams):
    """Second derivatives ``(gddot, uddot)`` from the shape-operator and potential equations."""
    g, gdot, u, udot = _z_parts(z)
    d = spec.dims
    trL = np.sum(d * gdot / g, axis=-1)
    ric = spec.ricci_diagonal(g)
    trL_ = np.asarray(trL)[..., None]
    udot_ = np.asarray(udot)[..., None]
    gdd = ric * g - (trL_ - gdot / g - udot_) * gdot + 0.5 * p.epsilon * g
    udd = -udot * trL + udot**2 + p.epsilon * u + p.C
    return gdd, udd


def conservation_residual(z, spec: Spec, p: SolitonParams):
    """Residuals of the two conservation laws.

    ``res1`` evaluates the first-order law with ``uddot`` taken from the flow,
    so it vanishes identically up to rounding.  ``res2`` is the steady first
    integral ``S + tr L^2 - xi^2 - C`` and is a genuine check.
    """
    g, gdot, u, udot = _z_parts(z)
    _, udd = z_accelerations(z, spec, p)
    c = z_columns(z, spec, p)
    res1 = udd + c["xi"] * udot - p.epsilon * u - p.C
    res2 = c["S"] + c["trL2"] - c["xi"] ** 2 - p.C
    if isinstance(z, ZState):
        return float(res1), float(res2)
    return res1, res2


def rbar_direct(z, spec: Spec, p: SolitonParams):
    """Ambient scalar curvature ``-2 tr Ldot - tr L^2 - (tr L)^2 + S``.

    ``tr Ldot`` is taken from the flow's own second derivatives.  The result
    differs from the Hamilton form ``-C - udot^2`` by exactly ``-res2``.
    """
    g, gdot, u, udot = _z_parts(z)
    gdd, _ = z_accelerations(z, spec, p)
    d = spec.dims
    trLdot = np.sum(d * (gdd / g - (gdot / g) ** 2), axis=-1)
    c = z_columns(z, spec, p)
    out = -2.0 * trLdot - c["trL2"] - c["trL"] ** 2 + c["S"]
    return float(out) if isinstance(z, ZState) else out


def f0_and_calF(z, spec: Spec, p: SolitonParams):
    """Scale-invariant Lyapunov pair ``(F0, F)``.

    ``F0 = v^(2/n) (S + tr L0^2)`` uses the trace-free part of the shape
    operator and ``F = v^(2/n) (S + tr L^2)``, with ``v = prod g_i^d_i``.
    """
    c = z_columns(z, spec, p)
    w = c["relvol"] ** (2.0 / spec.n)
    F0 = w * (c["S"] + c["trL0sq"])
    F = w * (c["S"] + c["trL2"])
    if isinstance(z, ZState):
        return float(F0), float(F)
    return F0, F


# ---------------------------------------------------------------------------
# phase-space scalars

def _xy_parts(xy):
    if isinstance(xy, XYState):
        return xy.X, xy.Y
    a = np.asarray(xy)
    r = a.shape[-1] // 2
    return a[..., :r], a[..., r:]


def _ret(xy, value):
    return float(value) if isinstance(xy, XYState) else value


def script_G(xy):
    """``G = sum X_i^2``."""
    X, _ = _xy_parts(xy)
    return _ret(xy, np.sum(X**2, axis=-1))


def script_H(xy, spec: Spec):
    """``H = sum sqrt(d_i) X_i`` (equals tr L / xi)."""
    X, _ = _xy_parts(xy)
    return _ret(xy, np.sum(np.sqrt(spec.dims) * X, axis=-1))


def lyapunov_L(xy, spec: Spec):
    """``L = sum (X_i^2 + lambda_i Y_i^2) - 1`` (equals C / xi^2)."""
    X, Y = _xy_parts(xy)
    lam = np.asarray(spec.lam)
    return _ret(xy, np.sum(X**2 + lam * Y**2, axis=-1) - 1.0)


def f_hat(xy, spec: WarpedProductSpec):
    """Modified Lyapunov function on the Ricci-flat locus.

    Uses the form that depends only on ``X_1`` and ``Y_2..Y_r``; it stays
    well defined slightly off the constraint manifold.
    """
    X, Y = _xy_parts(xy)
    n = spec.n
    d = spec.dims[1:]
    lam = np.asarray(spec.lam[1:])
    X1 = X[..., 0]
    Yr = Y[..., 1:]
    if np.any(Yr <= 0):
        raise DomainError("f_hat needs Y_i > 0 for i >= 2")
    if np.any(np.abs(X1 - 1.0) >= np.sqrt(2.0)):
        raise DomainError("f_hat needs |X_1 - 1| < sqrt(2)")
    num = 1.0 - (1.0 - X1) ** 2 / (n - 1)
    den = np.prod((np.sqrt(lam) * Yr) ** (2.0 * d / (n - 1)), axis=-1)
    return _ret(xy, num / den)


def f_hat_full_form(xy, spec: WarpedProductSpec):
    """Second expression of ``f_hat``; agrees with :func:`f_hat` on {L = 0, H = 1}."""
    X, Y = _xy_parts(xy)
    n = spec.n
    d = spec.dims[1:]
    lam = np.asarray(spec.lam[1:])
    Yr = Y[..., 1:]
    H = np.sum(np.sqrt(spec.dims) * X, axis=-1)
    num = (np.sum(X**2, axis=-1) + np.sum(lam * Yr**2, axis=-1)
           - (H - X[..., 0]) ** 2 / (n - 1))
    den = np.prod((np.sqrt(lam) * Yr) ** (2.0 * d / (n - 1)), axis=-1)
    return _ret(xy, num / den)


def f_hat_minimum(spec: WarpedProductSpec) -> float:
    """Closed-form global minimum ``(n-1) prod_{i>=2} d_i^(-d_i/(n-1))``."""
    n = spec.n
    d = spec.dims[1:]
    return float((n - 1) * np.prod(d ** (-d / (n - 1))))


def f_bohm(xy, spec: Spec):
    """Product Lyapunov ``prod Y_j^(-2 d_j / n)`` over all factors."""
    _, Y = _xy_parts(xy)
    if np.any(Y <= 0):
        raise DomainError("f_bohm needs every Y_j > 0")
    return _ret(xy, np.prod(Y ** (-2.0 * spec.dims / spec.n), axis=-1))


__all__ = [
    "SpecError", "DomainError", "WarpedProductSpec", "TwoSummandsSpec", "SolitonParams",
    "ZState", "XYState", "GeometryScalars", "z_columns", "scalars_from_z", "xy_from_z",
    "xy_array_from_z", "two_summands_ricci", "z_accelerations", "conservation_residual",
    "rbar_direct", "f0_and_calF", "script_G", "script_H", "lyapunov_L", "f_hat",
    "f_hat_full_form", "f_hat_minimum", "f_bohm",
]
