"""Stationary points, metric reconstruction, monotonicity and asymptotic diagnostics."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .integrate import IntegratorConfig, Trajectory, integrate, quadrature
from .linalg import eigvals_qr
from .model import (DomainError, SolitonParams, SpecError, WarpedProductSpec, XYState,
                    f0_and_calF, f_hat, f_hat_minimum, lyapunov_L, script_G, script_H,
                    xy_array_from_z, z_accelerations, z_columns)
from .systems import recover_Y1, xy_field, xy_jacobian, xy_rhs

SLACK = 1e-10
SKIP = 10


# ---------------------------------------------------------------------------
# stationary points

@dataclass(frozen=True)
class StationaryPoint:
    """A zero of the phase-space field.

    For the line and sphere families ``coordinates`` is a canonical sample
    and ``family`` names the free parameter.
    """

    kind: str
    coordinates: XYState
    Lcal: float
    subset: Optional[frozenset] = None
    family: Optional[str] = None


def _xy(spec, X, Y):
    return XYState(s=0.0, X=np.asarray(X, dtype=float), Y=np.asarray(Y, dtype=float))


def _check_lemma_hypotheses(spec: WarpedProductSpec):
    if not isinstance(spec, WarpedProductSpec):
        raise SpecError("stationary points are classified for warped products only")
    spec.validate_construction()
    if spec.lam[0] != 0 or any(l <= 0 for l in spec.lam[1:]):
        raise SpecError("need lambda_1 = 0 and lambda_i > 0 for i >= 2")


def subset_point(spec: WarpedProductSpec, A) -> XYState:
    """Case (iii) point for a nonempty ``A`` of factor indices (1-based, all >= 2)."""
    A = sorted(A)
    if not A or A[0] < 2 or A[-1] > spec.r:
        raise SpecError(f"subset must be a nonempty part of 2..{spec.r}, got {A}")
    d = spec.dims
    rho = 1.0 / sum(d[i - 1] for i in A)
    X = np.zeros(spec.r)
    Y = np.zeros(spec.r)
    for i in A:
        X[i - 1] = np.sqrt(d[i - 1]) * rho
        Y[i - 1] = np.sqrt(d[i - 1] / spec.lam[i - 1] * rho * (1.0 - rho))
    return _xy(spec, X, Y)


def critical_points(spec: WarpedProductSpec) -> list:
    """All stationary points, with families represented by canonical samples.

    Order: origin, sphere locus (one sample per coordinate axis), the
    ``2^(r-1) - 1`` subset points, the Y_1-line and the X_1-line.
    """
    _check_lemma_hypotheses(spec)
    r = spec.r
    zero = np.zeros(r)
    pts = [StationaryPoint("origin", _xy(spec, zero, zero), -1.0)]
    for i in range(r):
        X = zero.copy()
        X[i] = 1.0
        pts.append(StationaryPoint("sphere-locus", _xy(spec, X, zero), 0.0,
                                   family="Y = 0, sum X_i^2 = 1"))
    for k in range(1, r):
        for A in itertools.combinations(range(2, r + 1), k):
            pts.append(StationaryPoint("subset-type", subset_point(spec, A), 0.0,
                                       subset=frozenset(A)))
    Y = zero.copy()
    Y[0] = 1.0
    pts.append(StationaryPoint("y1-line", _xy(spec, zero, Y), -1.0,
                               family="X = 0, Y_i = 0 (i > 1), Y_1 free"))
    X = zero.copy()
    X[0] = 1.0
    pts.append(StationaryPoint("x1-line", _xy(spec, X, Y), 0.0,
                               family="X_1 = 1, X_i = Y_i = 0 (i > 1), Y_1 free"))
    return pts


def point_P0(spec: WarpedProductSpec) -> XYState:
    """The singular-orbit point X_1 = Y_1 = 1, all else 0."""
    X = np.zeros(spec.r)
    Y = np.zeros(spec.r)
    X[0] = Y[0] = 1.0
    return _xy(spec, X, Y)


def point_E(spec: WarpedProductSpec) -> XYState:
    """Global minimum of the modified Lyapunov, the limit of Ricci-flat orbits.

    ``Y_1`` is not determined there and is set to 0.
    """
    if spec.r < 2 or any(l <= 0 for l in spec.lam[1:]):
        raise SpecError("point E needs r >= 2 and lambda_i > 0 for i >= 2")
    n = spec.n
    d = spec.dims
    X = np.sqrt(d) / (n - 1)
    X[0] = 0.0
    Y = np.zeros(spec.r)
    Y[1:] = np.sqrt((n - 2) / np.asarray(spec.lam[1:])) * X[1:]
    return _xy(spec, X, Y)


def linearization_eigenvalues(xy, spec) -> np.ndarray:
    """Eigenvalues of the analytic Jacobian at ``xy``."""
    return eigvals_qr(xy_jacobian(xy, spec))


def distance_to_point(xy, point: StationaryPoint) -> float:
    """Max-norm distance, with the family's free parameters projected out."""
    a = xy.to_array() if isinstance(xy, XYState) else np.asarray(xy, dtype=float)
    b = point.coordinates.to_array().copy()
    r = len(a) // 2
    if point.kind in ("y1-line", "x1-line"):
        b[r] = a[r]
    elif point.kind == "sphere-locus":
        norm = np.linalg.norm(a[:r])
        if norm > 0:
            b[:r] = a[:r] / norm
    return float(np.max(np.abs(a - b)))


# ---------------------------------------------------------------------------
# metric reconstruction

@dataclass(frozen=True)
class MetricSeries:
    """Metric-coordinate series recovered on a phase-space grid ``s``."""

    s: np.ndarray
    t: np.ndarray
    g: np.ndarray
    gdot: np.ndarray
    u: np.ndarray
    udot: np.ndarray

    def z_array(self) -> np.ndarray:
        return np.column_stack([self.g, self.gdot, self.u, self.udot])


def _xy_states(xy_traj: Trajectory, Y1_at_s0):
    spec = xy_traj.spec
    r = spec.r
    states = np.asarray(xy_traj.states, dtype=float)
    if states.shape[1] == 2 * r:
        return states
    if Y1_at_s0 is None:
        raise DomainError("a subsystem trajectory needs Y1_at_s0 to recover Y_1")
    Y1 = recover_Y1(xy_traj, Y1_at_s0)
    return np.column_stack([states[:, :r], Y1, states[:, r:]])


def reconstruct_soliton_metric(xy_traj: Trajectory, C: float, Y1_at_s0: float = None,
                               u_at_s0: float = 0.0, t_at_s0: float = 0.0) -> MetricSeries:
    """Recover ``(t, g_i, u)`` from a soliton trajectory inside {L < 0}.

    ``dt = sqrt(L/C) ds``, ``g_i = sqrt(d_i) / Y_i * sqrt(L/C)`` and
    ``du/ds = H - 1``.  Subsystem trajectories (without ``Y_1``) need the
    initial value ``Y1_at_s0``.
    """
    if not C < 0:
        raise SpecError(f"soliton reconstruction needs C < 0, got {C}")
    spec = xy_traj.spec
    xy = _xy_states(xy_traj, Y1_at_s0)
    L = lyapunov_L(xy, spec)
    if np.any(L >= 0):
        raise DomainError("trajectory leaves {L < 0}; the metric map is undefined")
    r = spec.r
    X, Y = xy[:, :r], xy[:, r:]
    w = np.sqrt(L / C)
    sd = np.sqrt(spec.dims)
    h = xy_traj.spacing
    t = t_at_s0 + quadrature(w, h)
    g = sd / Y * w[:, None]
    gdot = g * X / sd / w[:, None]
    H = script_H(xy, spec)
    u = u_at_s0 + quadrature(H - 1.0, h)
    udot = (H - 1.0) / w
    return MetricSeries(s=xy_traj.t, t=t, g=g, gdot=gdot, u=u, udot=udot)


def reconstruct_ricci_flat_metric(xy_traj: Trajectory, scale: float = 1.0,
                                  t_at_s0: float = 0.0, tol: float = 1e-3,
                                  Y1_at_s0: float = None) -> MetricSeries:
    """Recover ``(t, g_i)`` on {L = 0, H = 1} from ``dt/ds = scale * exp(int G ds)``.

    ``scale`` is ``dt/ds`` at the first sample (``1/tr L`` there).
    """
    spec = xy_traj.spec
    xy = _xy_states(xy_traj, Y1_at_s0)
    L = lyapunov_L(xy, spec)
    H = script_H(xy, spec)
    drift = max(np.max(np.abs(L)), np.max(np.abs(H - 1.0)))
    if drift > tol:
        raise DomainError(f"constraint drift {drift:.3g} exceeds {tol}")
    r = spec.r
    X, Y = xy[:, :r], xy[:, r:]
    h = xy_traj.spacing
    w = scale * np.exp(quadrature(script_G(xy), h))
    t = t_at_s0 + quadrature(w, h)
    sd = np.sqrt(spec.dims)
    g = sd / Y * w[:, None]
    gdot = g * X / sd / w[:, None]
    zeros = np.zeros_like(t)
    return MetricSeries(s=xy_traj.t, t=t, g=g, gdot=gdot, u=zeros, udot=zeros)


# ---------------------------------------------------------------------------
# claims

@dataclass(frozen=True)
class ClaimFlag:
    """Outcome of one monitored claim: measured value against a tolerance."""

    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"[{mark}] {self.name}: value={self.value:.6g} tol={self.tolerance:.3g}{extra}"

    def as_dict(self) -> dict:
        return dict(name=self.name, value=float(self.value), tolerance=float(self.tolerance),
                    passed=bool(self.passed), detail=self.detail)


def _flag(name, value, tol, passed, detail=""):
    return ClaimFlag(name, float(value), float(tol), bool(passed), detail)


def _central_diff(y, h):
    return (y[2:] - y[:-2]) / (2.0 * h)


def _at(t, k):
    return f"worst at t={t[k]:.6g}"


def monotonicity_monitors(traj: Trajectory, skip: int = SKIP, slack: float = SLACK) -> list:
    """Sign, monotonicity and bound claims along a soliton z-trajectory.

    Derivatives are central differences on the stored grid.  The first
    ``skip`` samples after the seed are excluded and decrease claims pass
    when the largest derivative estimate is below ``slack``.
    """
    spec, p = traj.spec, traj.params
    z = np.asarray(traj.states, dtype=float)
    t = traj.t
    h = traj.spacing
    n = spec.n
    c = z_columns(z, spec, p)
    _, udd = z_accelerations(z, spec, p)
    udot = z[:, -1]
    F0, F = f0_and_calF(z, spec, p)
    sl = slice(skip + 1, None)
    inner_t = t[1:-1][skip:]
    flags = []

    def sign(name, values, tol=0.0):
        v = values[sl]
        k = int(np.argmax(v))
        flags.append(_flag(name, v[k], tol, v[k] < tol, _at(t[sl], k)))

    def decreasing(name, series, tol=slack):
        dv = _central_diff(series, h)[skip:]
        k = int(np.argmax(dv))
        flags.append(_flag(name, dv[k], tol, dv[k] < tol, _at(inner_t, k)))

    sign("udot negative", udot)
    sign("uddot negative", udd)
    sign("trL positive", -c["trL"])
    sign("trL bounded by n/t", c["trL"] * t - n, slack)
    decreasing("trL strictly decreasing", c["trL"])
    decreasing("xi strictly decreasing", c["xi"])
    decreasing("Rbar strictly decreasing", c["Rbar"])
    sign("Rbar above -udot trL", -(c["Rbar"] + udot * c["trL"]))
    upper = 2.0 * np.sqrt(-p.C) * n / t + n**2 / t**2
    sign("Rbar below 2 sqrt(-C) n/t + n^2/t^2", c["Rbar"] - upper)
    decreasing("F strictly decreasing", F)
    decreasing("F0 non-increasing", F0)
    return flags


# ---------------------------------------------------------------------------
# asymptotics

@dataclass
class DiagnosticsReport:
    """Tail estimates of limits and rates plus the claims checked against them."""

    termination: str
    tail_window: Optional[tuple] = None
    udot_limit: Optional[float] = None
    xi_limit: Optional[float] = None
    g1_limit: Optional[float] = None
    g1_tail_change: Optional[float] = None
    growth_ratios: dict = field(default_factory=dict)
    growth_exponents: dict = field(default_factory=dict)
    xy_limits: dict = field(default_factory=dict)
    claim_flags: list = field(default_factory=list)

    def as_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "claim_flags"}
        out["claim_flags"] = [f.as_dict() for f in self.claim_flags]
        return _plain(out)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _series(obj):
    """``(t, g, gdot, u, udot)`` from a z-trajectory or a MetricSeries."""
    if isinstance(obj, MetricSeries):
        return obj.t, obj.g, obj.gdot, obj.u, obj.udot
    z = np.asarray(obj.states, dtype=float)
    r = obj.spec.r
    return obj.t, z[:, :r], z[:, r:2 * r], z[:, 2 * r], z[:, 2 * r + 1]


def asymptotic_report(traj, tail_fraction: float = 0.2, spec=None,
                      params: Optional[SolitonParams] = None) -> DiagnosticsReport:
    """Tail fits: least-squares slope of ``u`` for the udot limit, means for limits,
    log-log slopes for growth exponents.

    Accepts a z-trajectory or a :class:`MetricSeries` (pass ``spec`` and
    ``params`` for the latter).
    """
    if isinstance(traj, Trajectory):
        if not traj.completed:
            return DiagnosticsReport(termination=traj.termination)
        spec, params = traj.spec, traj.params
        termination = traj.termination
    else:
        termination = "reconstructed"
    t, g, gdot, u, udot = _series(traj)
    N = len(t)
    k0 = int(np.floor(N * (1.0 - tail_fraction)))
    tail = slice(k0, None)
    tt = t[tail]
    rep = DiagnosticsReport(termination=termination, tail_window=(float(tt[0]), float(tt[-1])))
    rep.udot_limit = float(np.polyfit(tt, u[tail], 1)[0])
    d = spec.dims
    trL = np.sum(d * gdot / g, axis=1)
    xi = trL - udot
    rep.xi_limit = float(np.mean(xi[tail]))
    rep.g1_limit = float(np.mean(g[tail, 0]))
    rep.g1_tail_change = float((g[-1, 0] - g[k0, 0]) / g[-1, 0])
    C = params.C if params is not None else 0.0
    lam = np.asarray(getattr(spec, "lam", (np.nan,) * spec.r), dtype=float)
    for i in range(1, spec.r):
        if C < 0 and np.isfinite(lam[i]) and lam[i] > 0:
            ratio = g[tail, i] ** 2 * np.sqrt(-C) / (2.0 * lam[i] * tt)
            rep.growth_ratios[f"g_{i + 1}"] = float(np.mean(ratio))
        rep.growth_exponents[f"g_{i + 1}^2"] = float(
            np.polyfit(np.log(tt), np.log(g[tail, i] ** 2), 1)[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        sd = np.sqrt(d)
        Xt = (gdot / g) / xi[:, None]
        Yt = 1.0 / (xi[:, None] * g)
    for i in range(spec.r):
        rep.xy_limits[f"Xtilde_{i + 1}"] = float(np.mean(Xt[tail, i]))
        rep.xy_limits[f"Ytilde_{i + 1}"] = float(np.mean(Yt[tail, i]))
    for i in range(1, spec.r):
        X = sd[i] * Xt[tail, i]
        Y = sd[i] * Yt[tail, i]
        rep.xy_limits[f"X_{i + 1}/Y_{i + 1}^2"] = float(np.mean(X / Y**2))
    rep.xy_limits["Xtilde_1/Xtilde_2"] = float(np.mean(Xt[tail, 0] / Xt[tail, 1]))
    rep.xy_limits["Ytilde_1/Ytilde_2"] = float(np.mean(Yt[tail, 0] / Yt[tail, 1]))

    if C < 0:
        target = np.sqrt(-C)
        rep.claim_flags.append(_flag("udot tail near -sqrt(-C)", rep.udot_limit + target, 0.05,
                                     abs(rep.udot_limit + target) <= 0.05))
        rep.claim_flags.append(_flag("xi tail near sqrt(-C)", rep.xi_limit - target, 0.05,
                                     abs(rep.xi_limit - target) <= 0.05))
        if isinstance(spec, WarpedProductSpec):
            for i in range(1, spec.r):
                key = f"X_{i + 1}/Y_{i + 1}^2"
                want = lam[i] / sd[i]
                rel = rep.xy_limits[key] / want - 1.0
                rep.claim_flags.append(_flag(f"{key} near lambda/sqrt(d)", rel, 0.05,
                                             abs(rel) <= 0.05))
    return rep


def ricci_flat_convergence(xy_traj: Trajectory, spec: WarpedProductSpec = None,
                           s_check: float = 50.0, tail_fraction: float = 0.2,
                           distance_tol: float = 1e-3, fhat_tol: float = 1e-3,
                           drift_tol: float = 1e-3, slack: float = SLACK) -> list:
    """Convergence of a Ricci-flat phase trajectory to E and the behaviour of f_hat.

    The distance to E ignores ``Y_1``, which is unbounded along these orbits.
    """
    spec = spec or xy_traj.spec
    xy = np.asarray(xy_traj.states, dtype=float)
    s = xy_traj.t
    r = spec.r
    E = point_E(spec).to_array()
    keep = np.r_[0:r, r + 1:2 * r]
    dist = np.max(np.abs(xy[:, keep] - E[keep]), axis=1)
    k = min(int(np.searchsorted(s, s_check - 1e-9)), len(s) - 1)
    fh = f_hat(xy, spec)
    inc = np.diff(fh)
    j = int(np.argmax(inc))
    tail = slice(int(len(s) * (1 - tail_fraction)), None)
    fmin = f_hat_minimum(spec)
    ftail = float(np.mean(fh[tail]))
    L = lyapunov_L(xy, spec)
    H = script_H(xy, spec)
    return [
        _flag(f"distance to E at s={s[k]:.4g}", dist[k], distance_tol, dist[k] < distance_tol),
        _flag("f_hat non-increasing", inc[j], slack, inc[j] <= slack, f"worst at s={s[j + 1]:.6g}"),
        _flag("f_hat tail minus closed-form minimum", ftail - fmin, fhat_tol,
              abs(ftail - fmin) <= fhat_tol, f"minimum {fmin:.10g}"),
        _flag("max |L| drift", np.max(np.abs(L)), drift_tol, np.max(np.abs(L)) < drift_tol),
        _flag("max |H - 1| drift", np.max(np.abs(H - 1)), drift_tol,
              np.max(np.abs(H - 1)) < drift_tol),
    ]


# ---------------------------------------------------------------------------
# z-system versus phase-space oracle

@dataclass(frozen=True)
class OracleReport:
    t: np.ndarray
    s: np.ndarray
    deviation: np.ndarray
    per_coordinate: np.ndarray
    max_deviation: float
    Lcal_deviation: np.ndarray

    def as_dict(self) -> dict:
        return dict(max_deviation=self.max_deviation,
                    per_coordinate=[float(v) for v in self.per_coordinate],
                    max_Lcal_deviation=float(np.max(self.Lcal_deviation)),
                    window=[float(self.t[0]), float(self.t[-1])])


def _window(traj: Trajectory, window):
    t = traj.t
    lo = int(np.searchsorted(t, window[0] - 1e-9))
    hi = int(np.searchsorted(t, window[1] + 1e-9))
    return lo, hi


def matching_xy_run(z_traj: Trajectory, window=(1.0, 50.0), h: float = 1e-3,
                    project: bool = False) -> Trajectory:
    """Phase-space run started from the z-trajectory's state at ``window[0]``,
    long enough in s to cover ``window[1]``."""
    spec, p = z_traj.spec, z_traj.params
    lo, hi = _window(z_traj, window)
    z = np.asarray(z_traj.states[lo:hi], dtype=float)
    xi = z_columns(z, spec, p)["xi"]
    s_end = float(quadrature(xi, z_traj.spacing)[-1])
    steps = int(np.ceil(s_end / h)) + 1
    y0 = xy_array_from_z(z[0], spec, p)
    start = XYState.from_array(0.0, y0)
    return integrate(xy_field(spec, project=project), start,
                     IntegratorConfig(t_max=steps * h, h=h, residual_abort=np.inf,
                                      project=project), spec, p)


def compare_states(s_a, a, s_b, b) -> np.ndarray:
    """Absolute deviation of samples ``a`` at ``s_a`` from ``b`` linearly interpolated."""
    b = np.asarray(b, dtype=float)
    interp = np.column_stack([np.interp(s_a, s_b, b[:, j]) for j in range(b.shape[1])])
    return np.abs(np.asarray(a, dtype=float) - interp)


def oracle_compare(z_traj: Trajectory, xy_traj: Trajectory, C: float = None,
                   window=(1.0, 50.0)) -> OracleReport:
    """Map z-samples in ``window`` to (X, Y), reparameterise by ``s = int xi dt``
    from ``window[0]`` and compare with the phase-space run.

    ``Lcal_deviation`` compares the run's L with ``C / xi^2`` for the supplied
    ``C``; a wrong ``C`` shows up there.
    """
    spec, p = z_traj.spec, z_traj.params
    C = p.C if C is None else C
    lo, hi = _window(z_traj, window)
    z = np.asarray(z_traj.states[lo:hi], dtype=float)
    t = z_traj.t[lo:hi]
    xi = z_columns(z, spec, p)["xi"]
    s = xy_traj.t[0] + quadrature(xi, z_traj.spacing)
    if s[-1] > xy_traj.t[-1] + 1e-12:
        raise DomainError("phase-space run is shorter than the comparison window")
    mapped = xy_array_from_z(z, spec, p)
    dev = compare_states(s, mapped, xy_traj.t, xy_traj.states)
    L_run = np.interp(s, xy_traj.t, lyapunov_L(np.asarray(xy_traj.states, dtype=float), spec))
    Ldev = np.abs(L_run - C / xi**2)
    return OracleReport(t=t, s=s, deviation=np.max(dev, axis=1),
                        per_coordinate=np.max(dev, axis=0), max_deviation=float(dev.max()),
                        Lcal_deviation=Ldev)


def stationary_residual(point: StationaryPoint, spec) -> float:
    return float(np.max(np.abs(xy_rhs(point.coordinates, spec))))


__all__ = [
    "StationaryPoint", "ClaimFlag", "DiagnosticsReport", "MetricSeries", "OracleReport",
    "critical_points", "subset_point", "point_E", "point_P0", "linearization_eigenvalues",
    "distance_to_point", "reconstruct_soliton_metric", "reconstruct_ricci_flat_metric",
    "monotonicity_monitors", "asymptotic_report", "ricci_flat_convergence",
    "matching_xy_run", "compare_states", "oracle_compare", "stationary_residual",
]
