"""Synthetic surface with hovering anomalies, PGM image I/O and patch matrices."""

from __future__ import annotations

import io
import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "peaks",
    "SurfaceSpec",
    "SurfaceInstance",
    "generate_surface",
    "surface_to_csv",
    "load_pgm",
    "write_pgm",
    "read_pgm_file",
    "write_pgm_file",
    "PatchGrid",
    "extract_patches",
    "patch_index_of",
    "scores_to_heatmap",
    "eigvec_to_map",
]


def peaks(x, y):
    """The three-bump "peaks" test surface."""
    return (
        3.0 * (1.0 - x) ** 2 * np.exp(-(x**2) - (y + 1.0) ** 2)
        - 10.0 * (x / 5.0 - x**3 - y**5) * np.exp(-(x**2) - y**2)
        - np.exp(-((x + 1.0) ** 2) - y**2) / 3.0
    )


@dataclass(frozen=True)
class SurfaceSpec:
    """Grid side, square domain, anomaly height, anomaly spacing and seed.

    ``delta=None`` means ``delta_fraction`` times the z-range of the sampled
    surface; with the default fraction 1 every anomaly lies above the highest
    surface point. The target cell is drawn from the cells whose horizontal
    distance to the reference cell is at least the ``separation_quantile``
    quantile of all such distances (0 allows any distinct cell).
    """

    g: int = 50
    bounds: tuple[float, float] = (-3.0, 3.0)
    delta: float | None = None
    delta_fraction: float = 1.0
    separation_quantile: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if self.g < 2:
            raise ValueError(f"grid side must be >= 2, got {self.g}")
        if self.delta is not None and not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not self.delta_fraction > 0:
            raise ValueError("delta_fraction must be positive")
        if not 0.0 <= self.separation_quantile < 1.0:
            raise ValueError("separation_quantile must lie in [0, 1)")


@dataclass(frozen=True, eq=False)
class SurfaceInstance:
    X: np.ndarray
    ref_index: int
    target_index: int
    delta: float
    anomaly_cells: tuple[int, int]


def generate_surface(spec: SurfaceSpec | None = None) -> SurfaceInstance:
    """Sample ``peaks`` on a g x g grid and append two hovering anomalies.

    Grid rows are ordered with x varying fastest. The anomalies copy the
    (x, y, z) of two distinct grid cells drawn with
    ``numpy.random.default_rng(seed)`` and add ``delta`` to z; the first is
    the reference (row g^2), the second the target (row g^2 + 1), placed
    far from the reference according to ``spec.separation_quantile``.
    """
    spec = spec or SurfaceSpec()
    t = np.linspace(spec.bounds[0], spec.bounds[1], spec.g)
    xx, yy = np.meshgrid(t, t)
    z = peaks(xx, yy)
    grid = np.column_stack([xx.ravel(), yy.ravel(), z.ravel()])
    delta = spec.delta if spec.delta is not None else spec.delta_fraction * float(z.max() - z.min())

    rng = np.random.default_rng(spec.seed)
    ref_cell = int(rng.integers(spec.g * spec.g))
    dist = np.hypot(grid[:, 0] - grid[ref_cell, 0], grid[:, 1] - grid[ref_cell, 1])
    far = dist >= np.quantile(dist, spec.separation_quantile)
    far[ref_cell] = False
    candidates = np.flatnonzero(far)
    cells = np.array([ref_cell, candidates[rng.integers(candidates.size)]])
    anomalies = grid[cells].copy()
    anomalies[:, 2] = grid[cells, 2] + delta
    X = np.vstack([grid, anomalies])
    X.setflags(write=False)
    n = spec.g * spec.g
    return SurfaceInstance(X, n, n + 1, delta, (int(cells[0]), int(cells[1])))


def surface_to_csv(inst: SurfaceInstance) -> str:
    buf = io.StringIO()
    buf.write("x,y,z\n")
    for x, y, z in inst.X:
        buf.write(f"{x:.12g},{y:.12g},{z:.12g}\n")
    return buf.getvalue()


# --------------------------------------------------------------------- PGM I/O

_WS = b" \t\r\n\v\f"


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    tokens: list[bytes] = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos] in _WS:
            pos += 1
        if pos >= n:
            raise ValueError("truncated PGM header")
        if data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < n and data[pos] not in _WS and data[pos] != ord("#"):
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def load_pgm(data: bytes) -> np.ndarray:
    """Parse a P2 or P5 graymap with maxval <= 255 into an ``(H, W)`` uint8 array."""
    tokens, pos = _header_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"not a P2/P5 PGM (magic {magic!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ValueError("malformed PGM header") from None
    if width < 1 or height < 1:
        raise ValueError("PGM dimensions must be positive")
    if not 0 < maxval <= 255:
        raise ValueError(f"unsupported maxval {maxval} (need 1..255)")
    count = width * height

    if magic == b"P5":
        if pos >= len(data) or data[pos] not in _WS:
            raise ValueError("malformed PGM header")
        payload = data[pos + 1 : pos + 1 + count]
        if len(payload) < count:
            raise ValueError(f"truncated PGM payload: {len(payload)} of {count} bytes")
        pixels = np.frombuffer(payload, dtype=np.uint8)
    else:
        body = re.sub(rb"#[^\r\n]*", b" ", data[pos:])
        values = body.split()
        if len(values) < count:
            raise ValueError(f"truncated PGM payload: {len(values)} of {count} values")
        try:
            pixels = np.array([int(v) for v in values[:count]], dtype=np.int64)
        except ValueError:
            raise ValueError("non-integer pixel in P2 payload") from None
    if pixels.max(initial=0) > maxval or pixels.min(initial=0) < 0:
        raise ValueError("pixel value exceeds maxval")
    return pixels.astype(np.uint8).reshape(height, width)


def write_pgm(img, binary: bool = True) -> bytes:
    """Serialize an ``(H, W)`` array of 0..255 integers as P5 (default) or P2."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {img.shape}")
    if img.size and (img.min() < 0 or img.max() > 255):
        raise ValueError("pixel values must lie in 0..255")
    pix = img.astype(np.uint8)
    h, w = pix.shape
    if binary:
        return f"P5\n{w} {h}\n255\n".encode() + pix.tobytes()
    lines = [" ".join(str(v) for v in row) for row in pix]
    return (f"P2\n{w} {h}\n255\n" + "\n".join(lines) + "\n").encode()


def read_pgm_file(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return load_pgm(fh.read())


def write_pgm_file(path, img, binary: bool = True) -> None:
    with open(path, "wb") as fh:
        fh.write(write_pgm(img, binary=binary))


# ------------------------------------------------------------------- patches


@dataclass(frozen=True)
class PatchGrid:
    """Geometry of the sliding ``s x s`` windows over an ``H x W`` image."""

    height: int
    width: int
    s: int = 3

    @property
    def out_height(self) -> int:
        return self.height - self.s + 1

    @property
    def out_width(self) -> int:
        return self.width - self.s + 1

    @property
    def rows(self) -> int:
        return self.out_height * self.out_width

    def top_left(self, index: int) -> tuple[int, int]:
        return divmod(index, self.out_width)


def extract_patches(img, s: int = 3) -> tuple[np.ndarray, PatchGrid]:
    """One row per window position (row-major over top-left corners), pixels flattened row-major."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    H, W = img.shape
    if H < s or W < s:
        raise ValueError(f"image {H}x{W} is smaller than the {s}x{s} patch")
    windows = np.lib.stride_tricks.sliding_window_view(img, (s, s))
    X = windows.reshape(-1, s * s).astype(np.float64)
    return X, PatchGrid(H, W, s)


def patch_index_of(grid: PatchGrid, center_y: int, center_x: int) -> int:
    """Row index of the patch centred at pixel ``(center_y, center_x)`` (0-based)."""
    h = grid.s // 2
    if not (h <= center_y <= grid.height - 1 - h and h <= center_x <= grid.width - 1 - h):
        raise ValueError(
            f"center ({center_y}, {center_x}) is too close to the border of a "
            f"{grid.height}x{grid.width} image"
        )
    return (center_y - h) * grid.out_width + (center_x - h)


def scores_to_heatmap(scores, grid: PatchGrid, invert: bool = False) -> np.ndarray:
    """Affinely map per-patch values to 0..255 (round half up).

    With ``invert`` the largest value becomes 0 (dark). Constant input maps to 128.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.shape != (grid.rows,):
        raise ValueError(f"expected {grid.rows} scores, got shape {s.shape}")
    lo, hi = s.min(), s.max()
    if hi == lo:
        pix = np.full(s.shape, 128, dtype=np.uint8)
    else:
        v = (s - lo) / (hi - lo)
        if invert:
            v = 1.0 - v
        pix = np.floor(v * 255.0 + 0.5).astype(np.uint8)
    return pix.reshape(grid.out_height, grid.out_width)


def eigvec_to_map(basis, j: int, grid: PatchGrid, invert: bool = False) -> np.ndarray:
    """Heatmap of ``|U[:, j]|``."""
    U = basis.vectors
    if not 0 <= j < U.shape[1]:
        raise ValueError(f"eigenvector index {j} out of range [0, {U.shape[1]})")
    return scores_to_heatmap(np.abs(U[:, j]), grid, invert=invert)
