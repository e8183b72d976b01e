"""Eigenvalues of small dense matrices.

Householder reduction to upper Hessenberg form followed by a Wilkinson-shifted
QR iteration with deflation.  The iteration runs in complex arithmetic so real
matrices with complex-conjugate pairs need no special 2x2 handling.  Intended
for the 2r x 2r Jacobians here (r <= 6); not tuned for large matrices.
"""
import numpy as np


def hessenberg(A):
    """Return ``(H, Q)`` with ``H = Q^* A Q`` upper Hessenberg and Q unitary."""
    H = np.array(A, dtype=complex)
    n = H.shape[0]
    Q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = H[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = np.exp(1j * np.angle(x[0])) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        H[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ H[k + 1:, :])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v.conj())
        Q[:, k + 1:] -= 2.0 * np.outer(Q[:, k + 1:] @ v, v.conj())
        H[k + 2:, k] = 0.0
    return H, Q


def _givens(a, b):
    r = np.hypot(abs(a), abs(b))
    if r == 0.0:
        return 1.0, 0.0
    return a / r, b / r


def _wilkinson_shift(H, m):
    a, b = H[m - 1, m - 1], H[m - 1, m]
    c, d = H[m, m - 1], H[m, m]
    tr = a + d
    det = a * d - b * c
    disc = np.sqrt(tr * tr / 4.0 - det)
    mu1 = tr / 2.0 + disc
    mu2 = tr / 2.0 - disc
    return mu1 if abs(mu1 - d) < abs(mu2 - d) else mu2


def eigvals_qr(A, tol=1e-14, max_iter=10_000):
    """Eigenvalues of a square matrix, sorted by (real part, imaginary part).

    Values whose imaginary part is below ``1e-12 * scale`` are returned as real
    floats in a real array when every eigenvalue qualifies.
    """
    A = np.asarray(A)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if n == 0:
        return np.zeros(0)
    H, _ = hessenberg(A)
    scale = max(np.abs(H).max(), 1.0)
    eigs = []
    hi = n - 1
    it = 0
    while hi >= 0:
        if hi == 0:
            eigs.append(H[0, 0])
            break
        # find the start of the active unreduced block
        lo = hi
        while lo > 0:
            if abs(H[lo, lo - 1]) <= tol * (abs(H[lo, lo]) + abs(H[lo - 1, lo - 1]) + tol * scale):
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eigs.append(H[hi, hi])
            hi -= 1
            it = 0
            continue
        it += 1
        if it > max_iter:
            raise RuntimeError("QR iteration did not converge")
        mu = _wilkinson_shift(H, hi)
        if it % 11 == 0:
            # exceptional shift breaks rare cycles
            mu = H[hi, hi] + abs(H[hi, hi - 1])
        block = slice(lo, hi + 1)
        m = hi - lo + 1
        B = H[block, block] - mu * np.eye(m)
        rots = []
        for k in range(m - 1):
            c, s = _givens(B[k, k], B[k + 1, k])
            G = np.array([[np.conj(c), np.conj(s)], [-s, c]])
            B[k:k + 2, k:] = G @ B[k:k + 2, k:]
            rots.append(G)
        for k, G in enumerate(rots):
            B[:k + 2, k:k + 2] = B[:k + 2, k:k + 2] @ G.conj().T
        H[block, block] = B + mu * np.eye(m)
    w = np.array(eigs, dtype=complex)
    if np.all(np.abs(w.imag) <= 1e-12 * scale):
        w = np.sort(w.real)
    else:
        w = w[np.lexsort((w.imag, w.real))]
    return w


__all__ = ["hessenberg", "eigvals_qr"]
