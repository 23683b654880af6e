import numpy as np
import pytest

from locspec.kernel import KernelConfig, KernelGraph, build_gaussian_kernel, normalize_symmetric
from locspec.solver import (
    EigenBasis,
    SolverConfig,
    compute_eigenbasis,
    evd_dense_full,
    evd_randomized,
    residual_check,
)


def op_2x2():
    return normalize_symmetric(KernelGraph.from_kernel([[1, 0.5], [0.5, 1]]))


def gapped_op(m=300):
    # n=2 standard normal cloud; lambda_15 - lambda_16 ~ 5e-3 under the median bandwidth
    X = np.random.default_rng(1).standard_normal((m, 2))
    return normalize_symmetric(build_gaussian_kernel(X))


def test_dense_identity():
    op = normalize_symmetric(KernelGraph.from_kernel(np.eye(3)))
    basis = evd_dense_full(op)
    np.testing.assert_allclose(basis.values, [1, 1, 1], atol=1e-15)


def test_dense_analytic_2x2():
    basis = evd_dense_full(op_2x2())
    np.testing.assert_allclose(basis.values, [1, 1 / 3], atol=1e-15)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(basis.vectors[:, 0], [s, s], atol=1e-15)
    np.testing.assert_allclose(np.abs(basis.vectors[:, 1]), [s, s], atol=1e-15)
    assert basis.residual <= 1e-14


def test_dense_reconstruction_on_surface_sample():
    from locspec.datasets import SurfaceSpec, generate_surface

    X = generate_surface(SurfaceSpec(g=10, seed=0)).X[:100]
    op = normalize_symmetric(build_gaussian_kernel(X))
    b = evd_dense_full(op)
    A = op.toarray()
    assert np.max(np.abs(b.vectors @ np.diag(b.values) @ b.vectors.T - A)) <= 1e-9
    assert b.residual <= 1e-9
    assert np.max(np.abs(b.vectors.T @ b.vectors - np.eye(100))) <= 1e-8
    assert b.values[0] == pytest.approx(1.0, abs=1e-8)
    assert np.all(b.values >= -1e-8)


def test_dense_guard():
    op = normalize_symmetric(build_gaussian_kernel(np.arange(5.0)[:, None], KernelConfig(mode="matrix-free")))
    with pytest.raises(ValueError):
        evd_dense_full(op)


def test_randomized_near_identity():
    X = np.array([[0.0], [100.0], [200.0]])
    op = normalize_symmetric(build_gaussian_kernel(X, KernelConfig(bandwidth=1.0)))
    b = evd_randomized(op, SolverConfig(l=2, oversample=1, power_iters=2))
    np.testing.assert_allclose(b.values, [1, 1], atol=1e-6)


def test_randomized_matches_dense():
    op = gapped_op()
    dense = evd_dense_full(op)
    assert dense.values[14] - dense.values[15] >= 1e-3
    rnd = evd_randomized(op, SolverConfig(l=15, oversample=10, power_iters=10, seed=0))
    assert np.max(np.abs(rnd.values - dense.values[:15])) <= 1e-8
    Pr = rnd.vectors @ rnd.vectors.T
    Pd = dense.vectors[:, :15] @ dense.vectors[:, :15].T
    assert np.linalg.norm(Pr - Pd, 2) <= 1e-6
    assert np.max(np.abs(rnd.vectors.T @ rnd.vectors - np.eye(15))) <= 1e-8
    assert rnd.residual <= 1e-6
    assert np.all(np.diff(rnd.values) <= 0)


def test_randomized_is_deterministic():
    op = gapped_op(120)
    cfg = SolverConfig(l=8, seed=42)
    a = evd_randomized(op, cfg)
    b = evd_randomized(op, cfg)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.vectors.tobytes() == b.vectors.tobytes()
    assert a.residual == b.residual


def test_randomized_matrix_free_agrees_with_dense_operator():
    X = np.random.default_rng(1).standard_normal((300, 2))
    free = normalize_symmetric(build_gaussian_kernel(X, KernelConfig(mode="matrix-free")))
    a = evd_randomized(free, SolverConfig(l=15))
    b = evd_randomized(gapped_op(), SolverConfig(l=15))
    assert np.max(np.abs(a.values - b.values)) <= 1e-10


def test_randomized_rejects_oversized_sketch():
    with pytest.raises(ValueError):
        evd_randomized(op_2x2(), SolverConfig(l=2, oversample=1))


def test_residual_check():
    op = op_2x2()
    exact = evd_dense_full(op)
    assert residual_check(op, exact) <= 1e-14
    rng = np.random.default_rng(0)
    U = exact.vectors + 1e-3 * rng.standard_normal((2, 2))
    U /= np.linalg.norm(U, axis=0)
    assert residual_check(op, EigenBasis(exact.values, U, 0.0)) >= 1e-4
    with pytest.raises(ValueError):
        residual_check(op, EigenBasis(np.ones(1), np.ones((3, 1)), 0.0))


def test_auto_dispatch():
    op = gapped_op(60)
    b = compute_eigenbasis(op, SolverConfig(l=5, method="auto"))
    full = evd_dense_full(op)
    np.testing.assert_array_equal(b.values, full.values[:5])
    with pytest.raises(ValueError):
        compute_eigenbasis(op, SolverConfig(l=61))


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(l=0)
    with pytest.raises(ValueError):
        SolverConfig(oversample=-1)
    with pytest.raises(ValueError):
        SolverConfig(method="lanczos")
