"""Fixed-step classical Runge-Kutta integration with stop conditions and monitors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit
from scipy.integrate import cumulative_trapezoid

from .model import (SolitonParams, SpecError, XYState, ZState, conservation_residual,
                    script_G, script_H, lyapunov_L, z_columns)
from .systems import VectorField

POSITIVITY_FLOOR = 1e-12
ALL_MONITORS = frozenset({"res2", "Rbar", "xi", "trL", "Lcal", "H"})

REACHED = "reached t_max"
NONPOSITIVE = "g nonpositive"
NONFINITE = "nonfinite"
BLOWUP = "residual blowup"
_REASONS = {0: REACHED, 1: NONPOSITIVE, 2: NONFINITE, 3: BLOWUP}


class StageError(ArithmeticError):
    """A Runge-Kutta stage left the domain of the vector field."""

    def __init__(self, stage: int, reason: str):
        super().__init__(f"RK4 stage {stage}: {reason}")
        self.stage = stage
        self.reason = reason


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size, horizon and stop thresholds.

    ``decimate`` keeps every k-th step; ``project`` applies the vector field's
    projection after each step; ``dtype='longdouble'`` runs the interpreted
    kernels in extended precision (slow, for convergence studies).
    """

    t_max: float
    h: float = 1e-3
    residual_abort: float = 1e-3
    monitors: frozenset = ALL_MONITORS
    decimate: int = 1
    project: bool = False
    dtype: str = "float64"

    def __post_init__(self):
        if not self.h > 0:
            raise SpecError(f"step size must be positive, got {self.h}")
        if int(self.decimate) < 1:
            raise SpecError(f"decimate must be >= 1, got {self.decimate}")
        if self.dtype not in ("float64", "longdouble"):
            raise SpecError(f"dtype must be 'float64' or 'longdouble', got {self.dtype!r}")
        unknown = set(self.monitors) - ALL_MONITORS
        if unknown:
            raise SpecError(f"unknown monitors {sorted(unknown)}")
        object.__setattr__(self, "monitors", frozenset(self.monitors))
        object.__setattr__(self, "decimate", int(self.decimate))

    def steps_from(self, t0: float) -> int:
        span = (self.t_max - t0) / self.h
        n = int(round(span))
        if n < 1:
            raise SpecError(f"t_max = {self.t_max} must exceed the start time {t0}")
        if abs(span - n) > 1e-6 * max(1.0, span):
            raise SpecError(f"(t_max - t0)/h = {span} is not an integer step count")
        return n


@dataclass(frozen=True)
class Trajectory:
    """Samples of one integration on a uniform grid.

    ``t`` is time for z-runs and the phase parameter s for xy-runs.  The last
    accepted state is kept in ``final_state`` even if it falls between
    decimated samples.
    """

    kind: str
    t: np.ndarray
    states: np.ndarray
    spec: object
    params: Optional[SolitonParams]
    h: float
    decimate: int
    termination: str
    final_t: float
    final_state: np.ndarray
    scalars: dict = field(default_factory=dict)
    monitors: dict = field(default_factory=dict)
    failed_stage: int = 0

    @property
    def spacing(self) -> float:
        return self.h * self.decimate

    @property
    def completed(self) -> bool:
        return self.termination == REACHED

    def __len__(self):
        return len(self.t)


# ---------------------------------------------------------------------------
# stepping

def _bad_positive(y, positive, floor):
    for i in positive:
        if not y[i] > floor:
            return True
    return False


def _bad_finite(y):
    for v in y:
        if not np.isfinite(v):
            return True
    return False


def _stage_check(y, positive, floor):
    if _bad_finite(y):
        return 2
    if _bad_positive(y, positive, floor):
        return 1
    return 0


def _loop(f, res, proj, check, y0, t0, h, nsteps, p, positive, abort, decimate, floor):
    dim = y0.size
    nkeep = nsteps // decimate + 1
    out = np.empty((nkeep, dim), dtype=y0.dtype)
    res_out = np.empty(nkeep, dtype=y0.dtype)
    corr_out = np.zeros(nkeep, dtype=y0.dtype)
    y = y0.copy()
    out[0] = y
    res_out[0] = res(y, p)
    kept = 1
    code = 0
    stage = 0
    steps = 0
    max_corr = 0.0 * y0[0]
    half = 0.5 * h
    for step in range(1, nsteps + 1):
        k1 = f(y, p)
        y2 = y + half * k1
        code = check(y2, positive, floor)
        if code != 0:
            stage = 2
            break
        k2 = f(y2, p)
        y3 = y + half * k2
        code = check(y3, positive, floor)
        if code != 0:
            stage = 3
            break
        k3 = f(y3, p)
        y4 = y + h * k3
        code = check(y4, positive, floor)
        if code != 0:
            stage = 4
            break
        k4 = f(y4, p)
        ynew = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        code = check(ynew, positive, floor)
        if code != 0:
            stage = 5
            break
        yp = proj(ynew, p)
        c = 0.0 * y0[0]
        for i in range(dim):
            dv = abs(yp[i] - ynew[i])
            if dv > c:
                c = dv
        rv = res(yp, p)
        if not abs(rv) <= abort:
            code = 3
            break
        y = yp
        steps = step
        if c > max_corr:
            max_corr = c
        if step % decimate == 0:
            out[kept] = y
            res_out[kept] = rv
            corr_out[kept] = c
            kept += 1
    return out[:kept], res_out[:kept], corr_out[:kept], y, steps, code, stage, max_corr


_bad_positive_jit = njit(cache=True)(_bad_positive)
_bad_finite_jit = njit(cache=True)(_bad_finite)


@njit(cache=True)
def _stage_check_jit(y, positive, floor):
    if _bad_finite_jit(y):
        return 2
    if _bad_positive_jit(y, positive, floor):
        return 1
    return 0


# function-typed arguments make on-disk caching unreliable
_loop_jit = njit(_loop)


def rk4_step(f, state, h):
    """One classical RK4 step.

    ``f`` is a :class:`VectorField` or any callable ``y -> dy``.  States may be
    arrays, :class:`ZState` or :class:`XYState`; the same type is returned.
    Raises :class:`StageError` when a stage point leaves the domain.
    """
    positive = getattr(f, "positive", ())
    if isinstance(state, ZState):
        y, t = state.to_array(), state.t
    elif isinstance(state, XYState):
        y, t = state.to_array(), state.s
    else:
        y, t = np.asarray(state, dtype=float), None
    scalar = y.ndim == 0
    y = np.atleast_1d(y)

    def check(z, stage):
        if not np.all(np.isfinite(z)):
            raise StageError(stage, NONFINITE)
        if any(not z[i] > POSITIVITY_FLOOR for i in positive):
            raise StageError(stage, NONPOSITIVE)

    def ev(z):
        return np.atleast_1d(np.asarray(f(z), dtype=z.dtype))

    check(y, 1)
    k1 = ev(y)
    y2 = y + 0.5 * h * k1
    check(y2, 2)
    k2 = ev(y2)
    y3 = y + 0.5 * h * k2
    check(y3, 3)
    k3 = ev(y3)
    y4 = y + h * k3
    check(y4, 4)
    k4 = ev(y4)
    out = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if isinstance(state, ZState):
        return ZState.from_array(t + h, out)
    if isinstance(state, XYState):
        return XYState.from_array(t + h, out)
    return out[0] if scalar else out


def integrate(f: VectorField, seed_state, cfg: IntegratorConfig, spec=None,
              p: Optional[SolitonParams] = None, t0: float = None) -> Trajectory:
    """Run ``f`` from ``seed_state`` to ``cfg.t_max`` or the first stop condition.

    Stop conditions: a positive component at or below 1e-12 at any stage,
    a nonfinite entry, or ``|res2| > cfg.residual_abort``.  The offending step
    is rejected and the reason recorded in ``termination``.
    """
    if isinstance(seed_state, ZState):
        kind, start, y0 = "z", seed_state.t, seed_state.to_array()
    elif isinstance(seed_state, XYState):
        kind, start, y0 = "xy", seed_state.s, seed_state.to_array()
    else:
        kind, start, y0 = "raw", (0.0 if t0 is None else t0), np.asarray(seed_state, dtype=float)
    if y0.size != f.arity:
        raise SpecError(f"state has {y0.size} entries, field {f.label} expects {f.arity}")
    nsteps = cfg.steps_from(start)
    positive = np.asarray(f.positive, dtype=np.int64)
    proj = f.projection if cfg.project else _identity_of(f)

    if cfg.dtype == "longdouble" or not f.jitted:
        ld = np.longdouble if cfg.dtype == "longdouble" else np.float64
        y0c = y0.astype(ld)
        args = (_py(f.kernel), _py(f.residual), _py(proj), _stage_check, y0c, ld(start), ld(cfg.h),
                nsteps, f.params.astype(ld), positive, ld(cfg.residual_abort),
                cfg.decimate, ld(POSITIVITY_FLOOR))
        result = _loop(*args)
    else:
        result = _loop_jit(f.kernel, f.residual, proj, _stage_check_jit, y0.astype(np.float64),
                                 float(start), float(cfg.h), nsteps, f.params, positive,
                                 float(cfg.residual_abort), cfg.decimate, POSITIVITY_FLOOR)
    states, res, corr, last, steps, code, stage, max_corr = result
    grid = start + cfg.h * cfg.decimate * np.arange(len(states))
    monitors = {"res2": np.asarray(res, dtype=float), "steps": int(steps)}
    if cfg.project:
        monitors["projection_correction"] = np.asarray(corr, dtype=float)
        monitors["max_projection_correction"] = float(max_corr)
    traj = Trajectory(kind=kind, t=grid, states=states, spec=spec, params=p, h=cfg.h,
                      decimate=cfg.decimate, termination=_REASONS[int(code)],
                      final_t=float(start + cfg.h * steps), final_state=np.asarray(last),
                      monitors=monitors, failed_stage=int(stage))
    if spec is not None:
        traj.scalars.update(compute_scalars(traj, cfg.monitors))
    return traj


def _py(fn):
    return getattr(fn, "py_func", fn)


def _identity_of(f):
    from .systems import identity_projection
    return identity_projection


def compute_scalars(traj: Trajectory, monitors=ALL_MONITORS) -> dict:
    """Vectorised geometry columns for every stored sample."""
    out = {}
    states = np.asarray(traj.states, dtype=float)
    if traj.kind == "z" and traj.params is not None:
        c = z_columns(states, traj.spec, traj.params)
        _, res2 = conservation_residual(states, traj.spec, traj.params)
        c["res2"] = res2
        for key in monitors:
            out[key] = c[key]
        out["X"], out["Y"] = c["X"], c["Y"]
    elif traj.kind == "xy":
        if "Lcal" in monitors:
            out["Lcal"] = lyapunov_L(states, traj.spec)
        if "H" in monitors:
            out["H"] = script_H(states, traj.spec)
        out["G"] = script_G(states)
    return out


def quadrature(series, h: float) -> np.ndarray:
    """Cumulative composite trapezoid on a uniform grid, starting at 0."""
    y = np.asarray(series)
    if y.shape[0] < 2:
        raise ValueError("quadrature needs at least 2 samples")
    return cumulative_trapezoid(y, dx=h, axis=0, initial=0.0)


__all__ = ["IntegratorConfig", "Trajectory", "StageError", "rk4_step", "integrate",
           "quadrature", "compute_scalars", "REACHED", "NONPOSITIVE", "NONFINITE", "BLOWUP",
           "POSITIVITY_FLOOR"]
