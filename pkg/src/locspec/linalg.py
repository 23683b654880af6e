"""Small dense linear-algebra kernels used by the eigensolver.

Only two factorizations live here: a thin Householder QR for tall-skinny
blocks and a cyclic Jacobi eigendecomposition for small symmetric matrices.
Both are written for the sizes the randomized solver produces (a few dozen
columns), not as general BLAS/LAPACK replacements.
"""

from __future__ import annotations

import numpy as np

__all__ = ["ConvergenceError", "qr_thin", "symmetric_evd_dense", "fix_signs"]


class ConvergenceError(RuntimeError):
    """An iterative numerical routine failed to reach its tolerance."""


def _as_finite_matrix(M, name: str) -> np.ndarray:
    M = np.array(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


def fix_signs(V: np.ndarray) -> np.ndarray:
    """Flip columns in place so each column's largest-magnitude entry is positive."""
    if V.size == 0:
        return V
    rows = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[rows, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    V *= signs
    return V


def qr_thin(M) -> tuple[np.ndarray, np.ndarray]:
    """Thin QR factorization by Householder reflections.

    Parameters
    ----------
    M : array_like, shape (m, l)
        Input with ``m >= l``.

    Returns
    -------
    Q : ndarray, shape (m, l)
        Orthonormal columns.
    R : ndarray, shape (l, l)
        Upper triangular with a nonnegative diagonal.

    Notes
    -----
    A column whose trailing part has norm below ``1e-12 * max|M|`` gets no
    reflector. The corresponding column of Q is then the image of a unit
    basis vector under the previous reflectors, which is orthogonal to the
    columns already produced, so Q stays orthonormal for rank-deficient M.
    """
    A = _as_finite_matrix(M, "M")
    m, l = A.shape
    if m < l:
        raise ValueError(f"qr_thin needs rows >= cols, got {m}x{l}")

    # Work at unit scale so column norms neither underflow nor overflow.
    scale = np.max(np.abs(A))
    if scale > 0:
        A /= scale
    tol = 1e-12
    reflectors: list[np.ndarray | None] = []
    for j in range(l):
        x = A[j:, j]
        alpha = np.linalg.norm(x)
        if alpha <= tol:
            A[j:, j] = 0.0
            reflectors.append(None)
            continue
        v = x.copy()
        v[0] += np.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        A[j:, j:] -= 2.0 * np.outer(v, v @ A[j:, j:])
        A[j + 1 :, j] = 0.0
        reflectors.append(v)

    Q = np.zeros((m, l))
    Q[:l, :l] = np.eye(l)
    for j in range(l - 1, -1, -1):
        v = reflectors[j]
        if v is not None:
            Q[j:, j:] -= 2.0 * np.outer(v, v @ Q[j:, j:])

    R = np.triu(A[:l, :l])
    if scale > 0:
        R *= scale
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    Q *= signs
    R *= signs[:, None]
    return Q, R


def _jacobi_rotation(a_pp: float, a_qq: float, a_pq: float) -> tuple[float, float]:
    diff = a_qq - a_pp
    if abs(a_pq) < 1e-150 * abs(diff):
        t = a_pq / diff
    else:
        theta = diff / (2.0 * a_pq)
        t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
        if theta < 0:
            t = -t
    c = 1.0 / np.sqrt(t * t + 1.0)
    return c, t * c


def symmetric_evd_dense(S, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a small symmetric matrix by cyclic Jacobi sweeps.

    Sweeps stop once the off-diagonal Frobenius norm is at most
    ``1e-12 * ||S||_F``. Eigenvalues come back in descending order (stable
    with respect to the diagonal position on ties) and each eigenvector is
    signed so that its largest-magnitude entry is positive.

    Raises
    ------
    ValueError
        If S is not square or ``max|S - S^T| > 1e-10 * max|S|``.
    ConvergenceError
        If ``max_sweeps`` sweeps do not reach the threshold.
    """
    S = _as_finite_matrix(S, "S")
    n = S.shape[0]
    if S.shape[1] != n:
        raise ValueError(f"S must be square, got {S.shape}")
    scale = np.max(np.abs(S))
    if np.max(np.abs(S - S.T)) > 1e-10 * scale:
        raise ValueError("S is not symmetric")

    a = 0.5 * (S + S.T)
    V = np.eye(n)
    tol = 1e-12 * np.linalg.norm(a)

    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                c, s = _jacobi_rotation(a[p, p], a[q, q], apq)
                col_p = a[:, p].copy()
                a[:, p] = c * col_p - s * a[:, q]
                a[:, q] = s * col_p + c * a[:, q]
                row_p = a[p, :].copy()
                a[p, :] = c * row_p - s * a[q, :]
                a[q, :] = s * row_p + c * a[q, :]
                v_p = V[:, p].copy()
                V[:, p] = c * v_p - s * V[:, q]
                V[:, q] = s * v_p + c * V[:, q]
    else:
        off = np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off > tol:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")

    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = fix_signs(V[:, order])
    return values, vectors
