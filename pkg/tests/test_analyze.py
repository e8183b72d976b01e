import json

import numpy as np
import pytest

from solitonflow.analyze import (asymptotic_report, critical_points, distance_to_point,
                                 matching_xy_run, monotonicity_monitors, oracle_compare,
                                 point_E, reconstruct_ricci_flat_metric,
                                 reconstruct_soliton_metric, ricci_flat_convergence,
                                 stationary_residual, subset_point)
from solitonflow.integrate import REACHED, IntegratorConfig, Trajectory, integrate
from solitonflow.model import (DomainError, SolitonParams, SpecError, WarpedProductSpec, XYState,
                               lyapunov_L, script_G, z_columns)
from solitonflow.seed import SeedConfig, soliton_seed, xy_seed
from solitonflow.systems import warped_z_field, xy_field

EX1 = WarpedProductSpec(d=(1, 2, 3), lam=(0, 1, 1))
SOL = SolitonParams(C=-1.0)
FLAT = SolitonParams(C=0.0)


@pytest.fixture(scope="module")
def ex1_run():
    z0 = soliton_seed(EX1, SOL, SeedConfig(l=(6.0, 3.0)))
    return integrate(warped_z_field(EX1, SOL), z0, IntegratorConfig(t_max=100.001), EX1, SOL)


def _const_traj(point, spec, n=2001, h=1e-3):
    states = np.tile(point.to_array(), (n, 1))
    return Trajectory(kind="xy", t=h * np.arange(n), states=states, spec=spec, params=None,
                      h=h, decimate=1, termination=REACHED, final_t=h * (n - 1),
                      final_state=states[-1])


# ---------------------------------------------------------------- stationary points

def test_subset_points():
    a = subset_point(EX1, {2, 3})
    np.testing.assert_allclose(a.X, [0, np.sqrt(2) / 5, np.sqrt(3) / 5], rtol=1e-15)
    np.testing.assert_allclose(a.Y**2, [0, 8 / 25, 12 / 25], rtol=1e-14)
    b = subset_point(EX1, {2})
    np.testing.assert_allclose(b.X, [0, np.sqrt(2) / 2, 0], rtol=1e-15)
    np.testing.assert_allclose(b.Y**2, [0, 0.5, 0], rtol=1e-14)
    with pytest.raises(SpecError):
        subset_point(EX1, {1, 2})


@pytest.mark.parametrize("r", [2, 3, 4])
def test_critical_point_census(r):
    spec = WarpedProductSpec(d=tuple(range(1, r + 1)), lam=(0,) + tuple(range(1, r)))
    pts = critical_points(spec)
    kinds = [p.kind for p in pts]
    assert kinds.count("origin") == 1
    assert kinds.count("sphere-locus") == r
    assert kinds.count("subset-type") == 2 ** (r - 1) - 1
    assert kinds.count("y1-line") == kinds.count("x1-line") == 1
    for p in pts:
        assert stationary_residual(p, spec) < 1e-14
        assert lyapunov_L(p.coordinates, spec) == pytest.approx(p.Lcal, abs=1e-14)


def test_E_is_the_full_subset_point():
    np.testing.assert_allclose(point_E(EX1).to_array(), subset_point(EX1, {2, 3}).to_array(),
                               rtol=1e-14)


def test_distance_ignores_family_parameters():
    pts = {p.kind: p for p in critical_points(EX1)}
    on_line = np.array([1.0, 0, 0, 7.5, 0, 0])
    assert distance_to_point(on_line, pts["x1-line"]) == 0.0
    on_sphere = np.array([0.6, 0.8, 0, 0, 0, 0])
    assert distance_to_point(on_sphere, pts["sphere-locus"]) == pytest.approx(0.0, abs=1e-16)
    assert distance_to_point(on_sphere, pts["origin"]) == 0.8


# ---------------------------------------------------------------- reconstruction

def test_ricci_flat_reconstruction_at_E_is_exponential():
    E = point_E(EX1).to_array()
    E[3] = 1.0
    tr = _const_traj(XYState.from_array(0.0, E), EX1)
    m = reconstruct_ricci_flat_metric(tr, scale=2.0, t_at_s0=1.0)
    G = script_G(E)
    s = tr.t
    np.testing.assert_allclose(m.t, 1.0 + 2.0 * np.expm1(G * s) / G, rtol=1e-7)
    ratio = m.g[:, 2] / m.g[:, 1]
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-14)
    assert np.all(m.u == 0)


def test_reconstruction_domain_errors():
    tr = _const_traj(point_E(EX1), EX1)
    with pytest.raises(DomainError):
        reconstruct_soliton_metric(tr, C=-1.0)
    with pytest.raises(SpecError):
        reconstruct_soliton_metric(tr, C=0.0)
    origin = critical_points(EX1)[0].coordinates
    with pytest.raises(DomainError):
        reconstruct_ricci_flat_metric(_const_traj(origin, EX1))


def test_soliton_round_trip(ex1_run):
    xy = matching_xy_run(ex1_run, (1.0, 20.0))
    k = int(np.searchsorted(ex1_run.t, 1.0 - 1e-9))
    z1 = ex1_run.states[k]
    m = reconstruct_soliton_metric(xy, SOL.C, u_at_s0=z1[-2], t_at_s0=ex1_run.t[k])
    sel = m.t <= 20.0
    for j in range(3):
        ref = np.interp(m.t[sel], ex1_run.t, ex1_run.states[:, j])
        np.testing.assert_allclose(m.g[sel, j], ref, rtol=1e-6)
    ref_u = np.interp(m.t[sel], ex1_run.t, ex1_run.states[:, -2])
    np.testing.assert_allclose(m.u[sel], ref_u, atol=1e-6)


# ---------------------------------------------------------------- claims

def test_example1_monotonicity(ex1_run):
    flags = monotonicity_monitors(ex1_run)
    assert len(flags) == 11
    assert all(f.passed for f in flags), [f.line() for f in flags if not f.passed]
    c = z_columns(ex1_run.states, EX1, SOL)
    assert np.all(c["trL"][1:] * ex1_run.t[1:] <= EX1.n)


def test_monotonicity_holds_for_other_C():
    p = SolitonParams(C=-1.2)
    z0 = soliton_seed(EX1, p, SeedConfig(l=(6.0, 3.0)))
    tr = integrate(warped_z_field(EX1, p), z0, IntegratorConfig(t_max=30.001), EX1, p)
    assert all(f.passed for f in monotonicity_monitors(tr))


def test_oracle_identity_and_negative_control(ex1_run):
    xy = matching_xy_run(ex1_run, (1.0, 20.0))
    rep = oracle_compare(ex1_run, xy, window=(1.0, 20.0))
    assert rep.max_deviation < 1e-6
    assert np.max(rep.Lcal_deviation) < 1e-6
    bad = oracle_compare(ex1_run, xy, C=-1.2, window=(1.0, 20.0))
    assert np.max(bad.Lcal_deviation) > 1e-2
    assert rep.deviation[0] < 1e-15


def test_report_is_pure_and_serialisable(ex1_run):
    before = ex1_run.states.copy()
    a = asymptotic_report(ex1_run).as_dict()
    b = asymptotic_report(ex1_run).as_dict()
    assert a == b
    assert np.array_equal(before, ex1_run.states)
    json.dumps(a)
    assert a["udot_limit"] < 0


def test_early_termination_report_has_no_fits():
    z0 = soliton_seed(EX1, SOL, SeedConfig(l=(6.0, 1e-6)))
    tr = integrate(warped_z_field(EX1, SOL), z0, IntegratorConfig(t_max=10.001), EX1, SOL)
    rep = asymptotic_report(tr)
    assert rep.termination != REACHED
    assert rep.udot_limit is None and rep.claim_flags == [] and rep.growth_exponents == {}


def test_ricci_flat_convergence_projected():
    seed = xy_seed(EX1, FLAT, SeedConfig(l=(6.0, 3.0), mode="ricci-flat"))
    tr = integrate(xy_field(EX1, project=True), seed,
                   IntegratorConfig(t_max=60.0, residual_abort=np.inf, project=True, decimate=10),
                   EX1, FLAT)
    flags = ricci_flat_convergence(tr)
    assert all(f.passed for f in flags), [f.line() for f in flags if not f.passed]
