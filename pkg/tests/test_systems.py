import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from solitonflow.analyze import critical_points, point_E, point_P0
from solitonflow.integrate import IntegratorConfig, integrate
from solitonflow.linalg import eigvals_qr
from solitonflow.model import (DomainError, SolitonParams, TwoSummandsSpec, WarpedProductSpec,
                               XYState, ZState, lyapunov_L, script_G, script_H,
                               two_summands_ricci)
from solitonflow.seed import SeedConfig, xy_seed
from solitonflow.systems import (project_ricci_flat, recover_Y1, two_summands_z_rhs,
                                 warped_z_rhs, xy_field, xy_jacobian, xy_rhs,
                                 xy_subsystem_field, xy_subsystem_rhs)

D12 = WarpedProductSpec(d=(1, 2), lam=(0, 1))
D123 = WarpedProductSpec(d=(1, 2, 3), lam=(0, 1, 1))
SOL = SolitonParams(C=-1.0)


def triple_printed(zz, d2, d3, eps, C):
    """The r = 3 system exactly as printed, with z = (g1, g1', g2, g2', g3, g3', u, u')."""
    z1, z2, z3, z4, z5, z6, z7, z8 = zz
    return np.array([
        z2,
        -d2 * z2 * z4 / z3 - d3 * z2 * z6 / z5 + z2 * z8 + eps / 2 * z1,
        z4,
        -(d2 - 1) * z4**2 / z3 - z2 * z4 / z1 - d3 * z4 * z6 / z5 + z4 * z8
        + (d2 - 1) / z3 + eps / 2 * z3,
        z6,
        -(d3 - 1) * z6**2 / z5 - z2 * z6 / z1 - d2 * z4 * z6 / z3 + z6 * z8
        + (d3 - 1) / z5 + eps / 2 * z5,
        z8,
        -z8 * (z2 / z1 + d2 * z4 / z3 + d3 * z6 / z5) + z8**2 + eps * z7 + C,
    ])


def two_summands_printed(zz, s, C):
    z1, z2, z3, z4, z5, z6 = zz
    d1, d2 = s.d1, s.d2
    return np.array([
        z2,
        -(d1 - 1) * z2**2 / z1 - d2 * z2 * z4 / z3 + z2 * z6 + (d1 - 1) / z1
        + s.A3 / d1 * z1**3 / z3**4,
        z4,
        -d1 * z2 * z4 / z1 - (d2 - 1) * z4**2 / z3 + z4 * z6 + s.A2 / d2 / z3
        - 2 * s.A3 / d2 * z1**2 / z3**3,
        z6,
        -z6 * (d1 * z2 / z1 + d2 * z4 / z3) + z6**2 + C,
    ])


def zs(y, t=1.0):
    return ZState.from_array(t, np.asarray(y, float))


# ---------------------------------------------------------------- z systems

def test_warped_velocity_free_example():
    out = warped_z_rhs(zs([1, 1, 0, 0, 0, 0]), D12, SOL)
    np.testing.assert_allclose(out, [0, 0, 0, 1, 0, -1])


def test_warped_velocity_free_general():
    g = np.array([0.5, 2.0, 3.0])
    out = warped_z_rhs(zs(np.r_[g, 0, 0, 0, 0, 0]), D123, SOL)
    np.testing.assert_allclose(out[3:6], np.asarray(D123.lam) / g)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 6), st.integers(2, 6),
       st.lists(st.floats(0.1, 5), min_size=8, max_size=8))
def test_warped_matches_printed_triple_system(d2, d3, v):
    spec = WarpedProductSpec(d=(1, d2, d3), lam=(0, d2 - 1, d3 - 1))
    p = SolitonParams(C=-1.0)
    g = np.array(v[:3])
    gd = np.array(v[3:6]) - 2.5
    y = np.r_[g, gd, v[6], v[7] - 2.5]
    ours = warped_z_rhs(zs(y), spec, p)
    paper = np.r_[y[0], y[3], y[1], y[4], y[2], y[5], y[6], y[7]]
    ref = triple_printed(paper, d2, d3, 0.0, -1.0)
    ours_paper = ours[[0, 3, 1, 4, 2, 5, 6, 7]]
    np.testing.assert_allclose(ours_paper, ref, rtol=1e-14, atol=1e-14 * np.abs(ref).max())


def test_warped_rejects_nonpositive():
    with pytest.raises(DomainError):
        warped_z_rhs(np.array([1.0, 0.0, 0, 0, 0, 0]), D12, SOL)


def test_two_summands_examples():
    s = TwoSummandsSpec.example2(1)
    out = two_summands_z_rhs(zs([1, 1, 0, 0, 0, 0]), s, SOL)
    np.testing.assert_allclose(out, [0, 0, 1.25, 1.25, 0, -1])


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([TwoSummandsSpec.example2(1), TwoSummandsSpec.example3(2)]),
       st.lists(st.floats(0.1, 5), min_size=6, max_size=6))
def test_two_summands_matches_printed(s, v):
    y = np.array([v[0], v[1], v[2] - 2.5, v[3] - 2.5, v[4], v[5] - 2.5])
    ours = two_summands_z_rhs(zs(y), s, SOL)
    ref = two_summands_printed(y[[0, 2, 1, 3, 4, 5]], s, -1.0)
    np.testing.assert_allclose(ours[[0, 2, 1, 3, 4, 5]], ref, rtol=1e-13,
                               atol=1e-13 * np.abs(ref).max())


def test_two_summands_velocity_free_is_ricci():
    s = TwoSummandsSpec.example3(1)
    g = np.array([0.7, 1.9])
    out = two_summands_z_rhs(zs(np.r_[g, 0, 0, 0, 0]), s, SOL)
    np.testing.assert_allclose(out[2:4], np.array(two_summands_ricci(*g, s)) * g)


def test_two_summands_decoupling_limit():
    lam2 = 1.5
    d1, d2 = 2, 3
    s = TwoSummandsSpec(d1=d1, d2=d2, A2=lam2 * d2, A3=0.0)
    w = WarpedProductSpec(d=(d1, d2), lam=(d1 - 1, lam2))
    y = np.array([0.8, 2.0, 0.3, -0.2, 0.1, -0.4])
    np.testing.assert_allclose(two_summands_z_rhs(zs(y), s, SOL), warped_z_rhs(zs(y), w, SOL),
                               rtol=1e-14)


# ---------------------------------------------------------------- xy system

def test_xy_rhs_zeros():
    assert np.max(np.abs(xy_rhs(point_P0(D123), D123))) == 0
    assert np.max(np.abs(xy_rhs(point_E(D123), D123))) < 1e-15


def test_xy_rhs_substitution():
    out = xy_rhs(XYState(0.0, np.array([0.5, 0, 0]), np.array([1.0, 0, 0])), D123)
    np.testing.assert_allclose(out, [-0.375, 0, 0, -0.25, 0, 0])


def test_invariant_loci():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = rng.uniform(-1, 1, 6)
        a[0] = 0.0
        assert xy_rhs(a, D123)[0] == 0.0
        b = rng.uniform(-1, 1, 6)
        b[4] = 0.0
        assert xy_rhs(b, D123)[4] == 0.0


def test_subsystem_consistency():
    rng = np.random.default_rng(2)
    for _ in range(100):
        a = rng.uniform(-1, 1, 6)
        full = xy_rhs(a, D123)
        sub = xy_subsystem_rhs(np.delete(a, 3), D123)
        np.testing.assert_allclose(sub, np.delete(full, 3), rtol=1e-15, atol=1e-15)
    assert np.all(xy_subsystem_rhs(np.array([1.0, 0, 0, 0, 0]), D123) == 0)


def test_L_on_subsystem_ignores_Y1():
    a = np.array([0.3, 0.2, 0.1, 5.0, 0.4, 0.2])
    b = a.copy()
    b[3] = -7.0
    assert lyapunov_L(a, D123) == lyapunov_L(b, D123)


def _dL(a, spec):
    r = spec.r
    dy = xy_rhs(a, spec)
    return 2 * a[:r] @ dy[:r] + 2 * np.sum(np.asarray(spec.lam) * a[r:] * dy[r:])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=6, max_size=6))
def test_lyapunov_and_H_evolution(v):
    a = np.array(v)
    L, G, H = lyapunov_L(a, D123), script_G(a), script_H(a, D123)
    assert abs(_dL(a, D123) - 2 * L * G) <= 1e-12 * max(1, abs(L * G))
    dH = np.sqrt(D123.dims) @ xy_rhs(a, D123)[:3]
    assert abs(dH - ((H - 1) * (G - 1) + L)) <= 1e-12 * max(1.0, abs(H * G))


def test_f_hat_decrease_formula_on_constraint_locus():
    rng = np.random.default_rng(3)
    n = D123.n
    d = D123.dims
    checked = 0
    for _ in range(200):
        a = project_ricci_flat(rng.uniform(0.05, 1.0, 6), D123)
        if abs(lyapunov_L(a, D123)) > 1e-12 or not (0 < a[0] < 1) or np.any(a[4:] <= 0):
            continue
        X = a[:3]
        dy = xy_rhs(a, D123)
        G = script_G(a)
        num = 1 - (1 - X[0]) ** 2 / (n - 1)
        chain = ((1 - X[0]) * dy[0] / ((n - 1) * num)
                 - np.sum(d[1:] / (n - 1) * (G - X[1:] / np.sqrt(d[1:]))))
        X1 = X[0]
        q = n - 2 + 2 * X1 - X1**2
        paper = (X1 * (1 - X1) * (G - 1) + q * ((1 - X1) / (n - 1) - G)) / q
        assert abs(chain - paper) <= 1e-10
        assert chain <= 1e-12
        checked += 1
    assert checked > 20


def test_projection_lands_on_constraints():
    a = project_ricci_flat(np.array([0.9, 0.1, 0.2, 0.8, 0.3, 0.4]), D123)
    assert abs(lyapunov_L(a, D123)) < 1e-15
    assert abs(script_H(a, D123) - 1) < 1e-15


def test_sign_structure_on_example1_orbit():
    seed = xy_seed(D123, SOL, SeedConfig(l=(6.0, 3.0)))
    tr = integrate(xy_field(D123), seed, IntegratorConfig(t_max=30.0, residual_abort=np.inf),
                   D123, SOL)
    assert np.all(tr.states > 0)


# ---------------------------------------------------------------- Jacobian

def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(4)
    for spec in (D12, D123, WarpedProductSpec(d=(1, 2, 3, 4), lam=(0, 1, 2, 3))):
        m = 2 * spec.r
        for _ in range(100):
            a = rng.uniform(-1.5, 1.5, m)
            J = xy_jacobian(a, spec)
            fd = np.empty_like(J)
            for j in range(m):
                e = np.zeros(m)
                e[j] = 1e-6
                fd[:, j] = (xy_rhs(a + e, spec) - xy_rhs(a - e, spec)) / 2e-6
            np.testing.assert_allclose(J, fd, atol=1e-6)


def test_eigenvalues_at_P0_and_origin():
    for spec in (D12, D123, WarpedProductSpec(d=(1, 2, 3, 4), lam=(0, 1, 2, 3))):
        r = spec.r
        ev = eigvals_qr(xy_jacobian(point_P0(spec), spec))
        np.testing.assert_allclose(np.sort(ev), sorted([2.0] + [1.0] * (r - 1) + [0.0] * r),
                                   atol=1e-10)
        ev0 = eigvals_qr(xy_jacobian(np.zeros(2 * r), spec))
        np.testing.assert_allclose(np.sort(ev0), [-1.0] * r + [0.0] * r, atol=1e-10)


def test_every_critical_point_is_stationary():
    for pt in critical_points(D123):
        assert np.max(np.abs(xy_rhs(pt.coordinates, D123))) < 1e-12


# ---------------------------------------------------------------- Y1 recovery

class _Traj:
    def __init__(self, states, spacing, spec):
        self.states, self.spacing, self.spec = states, spacing, spec


def test_recover_Y1_trivial_cases():
    zeros = np.zeros((50, 5))
    np.testing.assert_allclose(recover_Y1(_Traj(zeros, 0.1, D123), 0.7), 0.7)
    ones = zeros.copy()
    ones[:, 0] = 1.0
    np.testing.assert_allclose(recover_Y1(_Traj(ones, 0.1, D123), 0.7), 0.7)
    with pytest.raises(DomainError):
        recover_Y1(_Traj(zeros, 0.1, D123), 0.0)


def test_recover_Y1_matches_full_system():
    seed = xy_seed(D123, SOL, SeedConfig(l=(6.0, 3.0)))
    cfg = IntegratorConfig(t_max=20.0, residual_abort=np.inf)
    full = integrate(xy_field(D123), seed, cfg, D123, SOL)
    sub_seed = np.delete(seed.to_array(), 3)
    sub = integrate(xy_subsystem_field(D123), sub_seed, cfg, D123, SOL, t0=0.0)
    Y1 = recover_Y1(sub, seed.Y[0])
    assert np.max(np.abs(Y1 - full.states[:, 3])) < 1e-5
