"""Localized eigenvector selection and similarity scoring.

For a reference row ``r`` the eigenvectors are reordered by the magnitude of
their entry at ``r``; the leading ``k`` of them form a localized embedding
``T_k`` and every point is scored by projecting its row of ``T_k`` onto the
unit vector through the reference row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import KernelConfig, build_gaussian_kernel, normalize_symmetric
from .solver import EigenBasis, SolverConfig, compute_eigenbasis

__all__ = [
    "LocalizedSelection",
    "ScoreVector",
    "Ranking",
    "select_top_coordinates",
    "build_localized_embedding",
    "score",
    "rank",
    "rank_of",
    "SimilarityResult",
    "find_kernel_similarities",
]

MODES = ("magnitude", "signed")


@dataclass(frozen=True, eq=False)
class LocalizedSelection:
    r: int
    perm: np.ndarray
    k: int
    mode: str
    u_r_local: np.ndarray
    """Sorted magnitudes ``|u_{r, perm[c]}|``."""
    reference: np.ndarray
    """Row ``r`` of the localized embedding (equals ``u_r_local`` in magnitude mode)."""


@dataclass(frozen=True, eq=False)
class ScoreVector:
    s: np.ndarray
    r: int


@dataclass(frozen=True, eq=False)
class Ranking:
    order: np.ndarray
    r: int
    scores: np.ndarray


def select_top_coordinates(
    basis: EigenBasis, r: int, k: int, mode: str = "magnitude"
) -> LocalizedSelection:
    """Pick the ``k`` eigenvectors with the largest ``|u_rj|``.

    Ties go to the lower column index, i.e. to the larger eigenvalue.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    U = basis.vectors
    m, l = U.shape
    if not 0 <= r < m:
        raise ValueError(f"reference index {r} out of range [0, {m})")
    if not 1 <= k <= l:
        raise ValueError(f"k must be in [1, {l}], got {k}")
    row = U[r]
    mags = np.abs(row)
    if not np.any(mags > 0):
        raise ValueError(f"row {r} of the eigenvector matrix is identically zero")
    perm = np.argsort(-mags, kind="stable")[:k]
    u_local = mags[perm]
    reference = u_local.copy() if mode == "magnitude" else row[perm].copy()
    return LocalizedSelection(r=r, perm=perm, k=k, mode=mode, u_r_local=u_local, reference=reference)


def build_localized_embedding(basis: EigenBasis, sel: LocalizedSelection) -> np.ndarray:
    """The ``m x k`` matrix of selected eigenvector columns, in selection order."""
    U = basis.vectors
    if sel.perm.max() >= U.shape[1] or not 0 <= sel.r < U.shape[0]:
        raise ValueError("selection does not match basis")
    T = U[:, sel.perm]
    return np.abs(T) if sel.mode == "magnitude" else T.copy()


def score(T_k: np.ndarray, sel: LocalizedSelection) -> ScoreVector:
    """``|T_k @ (ref / ||ref||)|`` for the reference row ``ref``."""
    norm = np.linalg.norm(sel.reference)
    if norm == 0.0:
        raise ValueError("reference coordinates have zero norm")
    s = np.abs(T_k @ (sel.reference / norm))
    return ScoreVector(s=s, r=sel.r)


def rank(scores: ScoreVector) -> Ranking:
    """Order all points except the reference by descending score, ties by index."""
    s = np.asarray(scores.s)
    m = s.shape[0]
    if m < 2:
        raise ValueError("ranking needs at least 2 points")
    order = np.lexsort((np.arange(m), -s))
    order = order[order != scores.r]
    return Ranking(order=order, r=scores.r, scores=s)


def rank_of(ranking, target: int) -> int:
    """1-based position of ``target`` in ``ranking.order``."""
    order = np.asarray(ranking.order)
    if target == ranking.r:
        raise ValueError(f"target {target} is the reference point")
    hits = np.flatnonzero(order == target)
    if hits.size == 0:
        raise ValueError(f"target {target} is not in the ranking")
    return int(hits[0]) + 1


@dataclass(frozen=True, eq=False)
class SimilarityResult:
    scores: ScoreVector
    ranking: Ranking
    selection: LocalizedSelection
    basis: EigenBasis
    epsilon: float


def find_kernel_similarities(
    X,
    r: int,
    k: int = 3,
    *,
    kernel: KernelConfig | None = None,
    solver: SolverConfig | None = None,
    mode: str = "magnitude",
    weight_eigenvalues: bool = False,
    basis: EigenBasis | None = None,
    epsilon: float | None = None,
) -> SimilarityResult:
    """Run the whole pipeline: kernel, normalization, eigenbasis, selection, scores.

    Pass a precomputed ``basis`` (with its ``epsilon``) to rescore the same
    data for different references or ``k`` without re-solving.
    """
    if basis is None:
        graph = build_gaussian_kernel(X, kernel or KernelConfig())
        solver = solver or SolverConfig(l=min(15, graph.m))
        basis = compute_eigenbasis(normalize_symmetric(graph), solver)
        epsilon = graph.epsilon
    work = basis.weighted() if weight_eigenvalues else basis
    sel = select_top_coordinates(work, r, k, mode)
    sv = score(build_localized_embedding(work, sel), sel)
    return SimilarityResult(scores=sv, ranking=rank(sv), selection=sel, basis=basis, epsilon=epsilon)
