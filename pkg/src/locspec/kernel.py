"""Gaussian kernel graphs and their normalized operators.

The kernel is ``K_ij = exp(-||x_i - x_j||^2 / eps)``. A graph is either
*dense* (K is materialized) or *matrix-free* (only the data, the bandwidth
and the degree vector are stored; kernel rows are rebuilt block by block on
every application).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "KernelConfig",
    "KernelGraph",
    "NormalizedOperator",
    "median_heuristic",
    "build_gaussian_kernel",
    "degrees",
    "normalize_symmetric",
    "normalize_row_stochastic",
    "apply_operator",
]

MEDIAN_EXACT_LIMIT = 2000
MEDIAN_SAMPLE_PAIRS = 2000
BLOCK_ROWS = 2048


@dataclass(frozen=True)
class KernelConfig:
    """Bandwidth and storage mode for a Gaussian kernel.

    ``bandwidth`` is either a positive float or ``"median"`` for the median
    heuristic; ``mode`` is ``"dense"`` or ``"matrix-free"``.
    """

    bandwidth: float | str = "median"
    mode: str = "dense"
    median_seed: int = 0

    def __post_init__(self):
        if isinstance(self.bandwidth, str):
            if self.bandwidth != "median":
                raise ValueError(f"unknown bandwidth rule {self.bandwidth!r}")
        elif not (np.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        if self.mode not in ("dense", "matrix-free"):
            raise ValueError(f"mode must be 'dense' or 'matrix-free', got {self.mode!r}")


@dataclass(frozen=True, eq=False)
class KernelGraph:
    """A kernel matrix (or the recipe for one) together with its degrees."""

    config: KernelConfig
    degrees: np.ndarray
    K: np.ndarray | None = None
    X: np.ndarray | None = None
    epsilon: float | None = None
    _sqnorms: np.ndarray | None = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.degrees.shape[0]

    @property
    def dense(self) -> bool:
        return self.K is not None

    @classmethod
    def from_kernel(cls, K) -> "KernelGraph":
        """Wrap an explicit symmetric kernel matrix (mainly for tests and custom kernels)."""
        K = np.array(K, dtype=np.float64)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValueError(f"kernel must be square, got shape {K.shape}")
        if not np.all(np.isfinite(K)):
            raise ValueError("kernel contains non-finite entries")
        if not np.array_equal(K, K.T):
            raise ValueError("kernel must be symmetric")
        K.setflags(write=False)
        d = degrees(K)
        d.setflags(write=False)
        return cls(config=KernelConfig(bandwidth=1.0), degrees=d, K=K)

    def kernel_row(self, i: int) -> np.ndarray:
        """Row ``i`` of K, computed on the fly in matrix-free mode."""
        if self.K is not None:
            return self.K[i].copy()
        return self._block(slice(i, i + 1), slice(None))[0]

    def _block(self, rows: slice, cols: slice) -> np.ndarray:
        # Expanded-norm form: one GEMM per block, clipped at 0 against cancellation.
        X, sq = self.X, self._sqnorms
        G = X[rows] @ X[cols].T
        G *= 2.0
        G -= sq[cols]
        G -= sq[rows][:, None]
        np.minimum(G, 0.0, out=G)
        G *= 1.0 / self.epsilon
        np.exp(G, out=G)
        return G

    def kernel_matvec(self, V: np.ndarray) -> np.ndarray:
        """Compute ``K @ V`` for a 2-D block ``V`` without storing K.

        Only blocks on or above the block diagonal are evaluated; each is
        used for both ``K_IJ V_J`` and ``K_JI V_I``. The block schedule is
        fixed, so results are reproducible bit for bit.
        """
        if self.K is not None:
            return self.K @ V
        m = self.X.shape[0]
        out = np.zeros((m, V.shape[1]))
        starts = range(0, m, BLOCK_ROWS)
        for a in starts:
            ia = slice(a, min(a + BLOCK_ROWS, m))
            for b in starts:
                if b < a:
                    continue
                ib = slice(b, min(b + BLOCK_ROWS, m))
                Kab = self._block(ia, ib)
                out[ia] += Kab @ V[ib]
                if b != a:
                    out[ib] += Kab.T @ V[ia]
        return out


@dataclass(frozen=True, eq=False)
class NormalizedOperator:
    """``A = D^-1/2 K D^-1/2`` (kind ``"symmetric"``) or ``P = D^-1 K`` (``"row-stochastic"``)."""

    graph: KernelGraph
    kind: str
    matrix: np.ndarray | None = None

    @property
    def m(self) -> int:
        return self.graph.m

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.m)

    def matvec(self, V) -> np.ndarray:
        V = np.asarray(V, dtype=np.float64)
        if V.shape[0] != self.m:
            raise ValueError(f"operand has {V.shape[0]} rows, operator has {self.m}")
        if self.matrix is not None:
            return self.matrix @ V
        d = self.graph.degrees
        vec = V.ndim == 1
        W = V[:, None] if vec else V
        if self.kind == "symmetric":
            s = 1.0 / np.sqrt(d)
            out = s[:, None] * self.graph.kernel_matvec(s[:, None] * W)
        else:
            out = self.graph.kernel_matvec(W) / d[:, None]
        return out[:, 0] if vec else out

    def toarray(self) -> np.ndarray:
        if self.matrix is None:
            raise ValueError("operator is matrix-free; refusing to materialize it")
        return self.matrix


def _check_data(X) -> np.ndarray:
    X = np.array(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError(f"data must be a 2-D array, got shape {X.shape}")
    if X.shape[0] < 2:
        raise ValueError(f"need at least 2 points, got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise ValueError("data contains non-finite entries")
    return X


def _sq_dists_direct(Xa: np.ndarray, Xb: np.ndarray) -> np.ndarray:
    # Feature-by-feature differences: exactly symmetric, exactly 0 for equal rows.
    D = np.zeros((Xa.shape[0], Xb.shape[0]))
    for f in range(Xa.shape[1]):
        diff = np.subtract.outer(Xa[:, f], Xb[:, f])
        diff *= diff
        D += diff
    return D


def median_heuristic(X, seed: int = 0) -> float:
    """Median of squared pairwise distances over distinct pairs.

    Exact for up to 2000 points; above that the median is taken over 2000
    index pairs ``i != j`` drawn with ``numpy.random.default_rng(seed)``.
    """
    X = _check_data(X)
    m = X.shape[0]
    if m <= MEDIAN_EXACT_LIMIT:
        vals = []
        for start in range(0, m, 256):
            D = _sq_dists_direct(X[start : start + 256], X)
            rows = np.arange(start, min(start + 256, m))
            mask = np.arange(m)[None, :] > rows[:, None]
            vals.append(D[mask])
        d2 = np.concatenate(vals)
    else:
        rng = np.random.default_rng(seed)
        i = rng.integers(0, m, size=MEDIAN_SAMPLE_PAIRS)
        j = rng.integers(0, m - 1, size=MEDIAN_SAMPLE_PAIRS)
        j = j + (j >= i)
        d2 = np.sum((X[i] - X[j]) ** 2, axis=1)
    eps = float(np.median(d2))
    if eps <= 0.0:
        raise ValueError("median squared distance is 0 (points identical); pass an explicit bandwidth")
    return eps


def build_gaussian_kernel(X, config: KernelConfig | None = None) -> KernelGraph:
    """Build the Gaussian kernel graph of the rows of ``X``."""
    config = config or KernelConfig()
    X = _check_data(X)
    if config.bandwidth == "median":
        eps = median_heuristic(X, seed=config.median_seed)
    else:
        eps = float(config.bandwidth)
    X.setflags(write=False)

    if config.mode == "dense":
        K = np.exp(_sq_dists_direct(X, X) * (-1.0 / eps))
        K.setflags(write=False)
        d = degrees(K)
        d.setflags(write=False)
        return KernelGraph(config=config, degrees=d, K=K, X=X, epsilon=eps)

    sq = np.einsum("ij,ij->i", X, X)
    sq.setflags(write=False)
    g = KernelGraph(config=config, degrees=np.empty(0), X=X, epsilon=eps, _sqnorms=sq)
    d = g.kernel_matvec(np.ones((X.shape[0], 1)))[:, 0]
    d.setflags(write=False)
    return KernelGraph(config=config, degrees=d, X=X, epsilon=eps, _sqnorms=sq)


def degrees(K) -> np.ndarray:
    """Row sums of a kernel matrix."""
    K = np.asarray(K, dtype=np.float64)
    return K.sum(axis=1)


def _checked_degrees(g: KernelGraph) -> np.ndarray:
    d = g.degrees
    if np.any(d <= 0):
        raise ValueError("graph has a zero-degree vertex; cannot normalize")
    return d


def normalize_symmetric(g: KernelGraph) -> NormalizedOperator:
    """``A = D^-1/2 K D^-1/2``; materialized only for dense graphs."""
    d = _checked_degrees(g)
    if g.K is None:
        return NormalizedOperator(graph=g, kind="symmetric")
    A = g.K / np.sqrt(np.outer(d, d))
    A.setflags(write=False)
    return NormalizedOperator(graph=g, kind="symmetric", matrix=A)


def normalize_row_stochastic(g: KernelGraph) -> NormalizedOperator:
    """``P = D^-1 K``, the Markov transition matrix of the graph."""
    d = _checked_degrees(g)
    if g.K is None:
        return NormalizedOperator(graph=g, kind="row-stochastic")
    P = g.K / d[:, None]
    P.setflags(write=False)
    return NormalizedOperator(graph=g, kind="row-stochastic", matrix=P)


def apply_operator(op: NormalizedOperator, v) -> np.ndarray:
    """Apply a normalized operator to a vector or to the columns of a block."""
    return op.matvec(v)
