"""
Randomized versus full eigendecomposition
=========================================

The randomized subspace iteration only ever multiplies the operator by a
thin block, so it also works when the kernel is never stored. Here we
check it against a full decomposition and watch the residual fall as the
number of power iterations grows.
"""

import time

import numpy as np

from locspec import (
    KernelConfig,
    SolverConfig,
    build_gaussian_kernel,
    evd_dense_full,
    evd_randomized,
    normalize_symmetric,
    residual_check,
)

X = np.random.default_rng(1).standard_normal((1500, 2))
op = normalize_symmetric(build_gaussian_kernel(X))

t = time.perf_counter()
full = evd_dense_full(op)
print("full decomposition: %.2fs" % (time.perf_counter() - t))
print("top eigenvalues:", np.round(full.values[:6], 6))
print("gap after the 15th: %.2e" % (full.values[14] - full.values[15]))

for q in (0, 1, 2, 5, 10):
    b = evd_randomized(op, SolverConfig(l=15, oversample=10, power_iters=q, seed=0, method="randomized"))
    err = np.max(np.abs(b.values - full.values[:15]))
    print("q = %2d  eigenvalue error %.1e  residual %.1e" % (q, err, residual_check(op, b)))

# The same solve without ever forming the kernel matrix.
mf = normalize_symmetric(build_gaussian_kernel(X, KernelConfig(mode="matrix-free")))
t = time.perf_counter()
b = evd_randomized(mf, SolverConfig(l=15, method="randomized"))
print("matrix-free: %.2fs, eigenvalue error %.1e" % (time.perf_counter() - t, np.max(np.abs(b.values - full.values[:15]))))
