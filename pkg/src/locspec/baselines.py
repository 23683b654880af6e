"""Nearest-neighbour comparison rankers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import KernelGraph

__all__ = ["BaselineRanking", "nn_rank", "kernel_nn_rank"]


@dataclass(frozen=True, eq=False)
class BaselineRanking:
    method: str
    order: np.ndarray
    r: int
    distances: np.ndarray


def _order_by_distance(dist: np.ndarray, r: int) -> np.ndarray:
    order = np.lexsort((np.arange(dist.shape[0]), dist))
    return order[order != r]


def nn_rank(X, r: int) -> BaselineRanking:
    """Rank points by Euclidean distance to row ``r`` (closest first)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    m = X.shape[0]
    if m < 2:
        raise ValueError("need at least 2 points")
    if not 0 <= r < m:
        raise ValueError(f"reference index {r} out of range [0, {m})")
    dist = np.sqrt(np.sum((X - X[r]) ** 2, axis=1))
    return BaselineRanking("nn", _order_by_distance(dist, r), r, dist)


def kernel_nn_rank(g: KernelGraph, r: int) -> BaselineRanking:
    """Rank points by the kernel feature-space distance ``K_rr - 2 K_ri + K_ii``."""
    m = g.m
    if m < 2:
        raise ValueError("need at least 2 points")
    if not 0 <= r < m:
        raise ValueError(f"reference index {r} out of range [0, {m})")
    row = g.kernel_row(r)
    if g.K is not None:
        diag = np.diag(g.K)
        d2 = row[r] - 2.0 * row + diag
    else:
        # Gaussian kernels have a unit diagonal.
        d2 = 2.0 - 2.0 * row
    return BaselineRanking("kernel-nn", _order_by_distance(d2, r), r, d2)
