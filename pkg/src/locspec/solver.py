"""Top eigenpairs of a normalized kernel operator.

Two routes: a full dense eigendecomposition for small problems and a
randomized subspace iteration (Gaussian sketch, power steps, Rayleigh-Ritz)
that touches the operator only through block matrix products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import NormalizedOperator, apply_operator
from .linalg import fix_signs, qr_thin, symmetric_evd_dense

__all__ = [
    "SolverConfig",
    "EigenBasis",
    "evd_dense_full",
    "evd_randomized",
    "residual_check",
    "compute_eigenbasis",
]

DENSE_AUTO_LIMIT = 2000
DENSE_MAX = 10000


@dataclass(frozen=True)
class SolverConfig:
    l: int = 15
    oversample: int = 10
    power_iters: int = 10
    seed: int = 0
    method: str = "auto"

    def __post_init__(self):
        if self.l < 1:
            raise ValueError(f"l must be >= 1, got {self.l}")
        if self.oversample < 0 or self.power_iters < 0:
            raise ValueError("oversample and power_iters must be >= 0")
        if self.method not in ("dense", "randomized", "auto"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """Eigenvalues (descending) and matching orthonormal eigenvectors as columns."""

    values: np.ndarray
    vectors: np.ndarray
    residual: float

    @property
    def l(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    def weighted(self) -> "EigenBasis":
        """Basis with each eigenvector scaled by its eigenvalue (U -> U diag(values))."""
        return EigenBasis(self.values, self.vectors * self.values, self.residual)


def residual_check(op: NormalizedOperator, basis: EigenBasis) -> float:
    """Largest eigen-residual ``max_j ||A u_j - lambda_j u_j||_2``."""
    U = np.asarray(basis.vectors)
    if U.ndim != 2 or U.shape[0] != op.m or U.shape[1] != len(basis.values):
        raise ValueError(f"basis of shape {U.shape} does not match operator of size {op.m}")
    R = apply_operator(op, U) - U * basis.values
    return float(np.max(np.linalg.norm(R, axis=0)))


def _finish(op, values, vectors) -> EigenBasis:
    values = np.ascontiguousarray(values)
    vectors = np.ascontiguousarray(vectors)
    residual = residual_check(op, EigenBasis(values, vectors, 0.0))
    values.setflags(write=False)
    vectors.setflags(write=False)
    return EigenBasis(values, vectors, residual)


def evd_dense_full(op: NormalizedOperator) -> EigenBasis:
    """Full eigendecomposition of a materialized operator (LAPACK ``syevd``)."""
    if op.matrix is None:
        raise ValueError("dense EVD needs a dense operator")
    if op.m > DENSE_MAX:
        raise ValueError(f"dense EVD limited to {DENSE_MAX} points, got {op.m}")
    A = op.matrix
    values, vectors = np.linalg.eigh(0.5 * (A + A.T))
    values = values[::-1].copy()
    vectors = fix_signs(vectors[:, ::-1].copy())
    return _finish(op, values, vectors)


def evd_randomized(op: NormalizedOperator, cfg: SolverConfig) -> EigenBasis:
    """Top ``cfg.l`` eigenpairs by randomized subspace iteration.

    The sketch ``Omega`` (m x (l + p)) is drawn from
    ``numpy.random.default_rng(cfg.seed)``; every QR and the projected
    eigenproblem use the in-house Householder and Jacobi routines, so a fixed
    (operator, config) pair always gives the same basis.
    """
    m = op.m
    width = cfg.l + cfg.oversample
    if width > m:
        raise ValueError(f"l + oversample = {width} exceeds the number of points {m}")

    rng = np.random.default_rng(cfg.seed)
    Y = apply_operator(op, rng.standard_normal((m, width)))
    for _ in range(cfg.power_iters):
        Q, _ = qr_thin(Y)
        Y = apply_operator(op, Q)
    Q, _ = qr_thin(Y)
    B = Q.T @ apply_operator(op, Q)
    B = 0.5 * (B + B.T)
    lam, W = symmetric_evd_dense(B)
    U = fix_signs(Q @ W[:, : cfg.l])
    return _finish(op, lam[: cfg.l].copy(), U)


def compute_eigenbasis(op: NormalizedOperator, cfg: SolverConfig) -> EigenBasis:
    """Dispatch on ``cfg.method``; ``auto`` is dense iff m <= 2000 and A is materialized.

    The dense route keeps only the leading ``cfg.l`` pairs.
    """
    if cfg.l > op.m:
        raise ValueError(f"l = {cfg.l} exceeds the number of points {op.m}")
    method = cfg.method
    if method == "auto":
        method = "dense" if (op.m <= DENSE_AUTO_LIMIT and op.matrix is not None) else "randomized"
    if method == "randomized":
        return evd_randomized(op, cfg)
    full = evd_dense_full(op)
    if cfg.l == op.m:
        return full
    values = full.values[: cfg.l].copy()
    vectors = full.vectors[:, : cfg.l].copy()
    return _finish(op, values, vectors)
