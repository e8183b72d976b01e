import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from solitonflow.linalg import eigvals_qr, hessenberg


def _sorted(ev):
    ev = np.asarray(ev, dtype=complex)
    return ev[np.lexsort((np.round(ev.imag, 8), np.round(ev.real, 8)))]


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 8).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.floats(-5, 5))))
def test_eigenvalues_match_numpy(A):
    ours = _sorted(eigvals_qr(A))
    ref = _sorted(np.linalg.eigvals(A))
    scale = max(1.0, np.abs(A).max())
    # defective matrices lose accuracy like eps^(1/k); compare as multisets of roots
    for z in ref:
        assert np.min(np.abs(ours - z)) < 1e-5 * scale


def test_hessenberg_is_similar_and_upper():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(6, 6))
    H, Q = hessenberg(A)
    assert np.all(np.tril(H, -2) == 0)
    np.testing.assert_allclose(Q.conj().T @ Q, np.eye(6), atol=1e-14)
    np.testing.assert_allclose(Q.conj().T @ A @ Q, H, atol=1e-13)


def test_known_spectra():
    np.testing.assert_allclose(sorted(eigvals_qr(np.diag([3.0, -1.0, 2.0])).real), [-1, 2, 3])
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    ev = eigvals_qr(rot)
    np.testing.assert_allclose(sorted(ev.imag), [-1, 1], atol=1e-14)
