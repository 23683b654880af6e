import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from locspec.datasets import (
    PatchGrid,
    SurfaceSpec,
    eigvec_to_map,
    extract_patches,
    generate_surface,
    load_pgm,
    patch_index_of,
    peaks,
    scores_to_heatmap,
    surface_to_csv,
    write_pgm,
)
from locspec.solver import EigenBasis


def test_surface_shape_and_indices():
    inst = generate_surface(SurfaceSpec(g=50, seed=0))
    assert inst.X.shape == (2502, 3)
    assert (inst.ref_index, inst.target_index) == (2500, 2501)


@pytest.mark.parametrize("seed", range(5))
def test_surface_anomalies_hover_by_delta(seed):
    inst = generate_surface(SurfaceSpec(g=20, seed=seed))
    X = inst.X
    grid_z = X[:400, 2]
    for row, cell in zip((inst.ref_index, inst.target_index), inst.anomaly_cells):
        x, y, z = X[row]
        assert (x, y) == (X[cell, 0], X[cell, 1])
        assert z == X[cell, 2] + inst.delta
    assert inst.anomaly_cells[0] != inst.anomaly_cells[1]
    offset = X[:, 2] - peaks(X[:, 0], X[:, 1])
    assert set(np.argsort(offset)[-2:]) == {400, 401}
    np.testing.assert_allclose(offset[400:], inst.delta, rtol=1e-14)
    np.testing.assert_allclose(offset[:400], 0.0, atol=0)
    assert inst.delta == pytest.approx(grid_z.max() - grid_z.min())
    assert np.all(X[400:, 2] >= grid_z.max())


def test_surface_target_is_far_from_reference():
    g = 30
    for seed in range(10):
        inst = generate_surface(SurfaceSpec(g=g, seed=seed))
        a, b = inst.anomaly_cells
        xy = inst.X[: g * g, :2]
        dist = np.hypot(*(xy - xy[a]).T)
        assert dist[b] >= np.quantile(dist, 0.75)


def test_surface_explicit_delta_and_determinism():
    a = generate_surface(SurfaceSpec(g=10, delta=0.5, seed=3, separation_quantile=0.0))
    b = generate_surface(SurfaceSpec(g=10, delta=0.5, seed=3, separation_quantile=0.0))
    assert a.delta == 0.5
    assert a.X.tobytes() == b.X.tobytes()
    with pytest.raises(ValueError):
        SurfaceSpec(g=1)
    with pytest.raises(ValueError):
        SurfaceSpec(delta=-1.0)


def test_surface_csv():
    inst = generate_surface(SurfaceSpec(g=3, seed=0))
    lines = surface_to_csv(inst).splitlines()
    assert lines[0] == "x,y,z"
    assert len(lines) == 1 + 11
    assert np.allclose(np.array(lines[-1].split(","), dtype=float), inst.X[-1])


def test_pgm_p2_example():
    img = load_pgm(b"P2\n2 2\n255\n0 128 255 7\n")
    np.testing.assert_array_equal(img, [[0, 128], [255, 7]])


def test_pgm_comment_in_p5_header():
    img = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
    plain = write_pgm(img)
    commented = b"P5\n# made by hand\n4  3 # trailing\n255\n" + img.tobytes()
    np.testing.assert_array_equal(load_pgm(commented), load_pgm(plain))


@pytest.mark.parametrize(
    "data",
    [
        b"P6\n1 1\n255\n\x00\x00\x00",
        b"P5\n2 2\n65535\n" + b"\x00" * 8,
        b"P5\n2 2\n255\n\x00\x00\x00",
        b"P2\n2 2\n255\n1 2 3",
        b"P2\n2 x\n255\n1 2 3 4",
        b"P2\n1 1\n100\n200",
        b"P5\n2",
    ],
)
def test_pgm_malformed(data):
    with pytest.raises(ValueError):
        load_pgm(data)


@settings(max_examples=60, deadline=None)
@given(
    st.tuples(st.integers(1, 12), st.integers(1, 12)).flatmap(
        lambda hw: arrays(np.uint8, hw)
    ),
    st.booleans(),
)
def test_pgm_roundtrip(img, binary):
    np.testing.assert_array_equal(load_pgm(write_pgm(img, binary=binary)), img)


def test_patches_counts():
    X, grid = extract_patches(np.zeros((256, 256), dtype=np.uint8))
    assert X.shape == (64516, 9)
    assert grid.rows == 64516 == 254 * 254
    img = np.arange(16).reshape(4, 4)
    X, grid = extract_patches(img)
    assert X.shape == (4, 9)
    np.testing.assert_array_equal(X[0], img[:3, :3].ravel())
    img = np.arange(9).reshape(3, 3)
    X, _ = extract_patches(img)
    np.testing.assert_array_equal(X, [img.ravel()])
    with pytest.raises(ValueError):
        extract_patches(np.zeros((2, 5)))


@settings(max_examples=40, deadline=None)
@given(st.tuples(st.integers(3, 15), st.integers(3, 15)).flatmap(lambda hw: arrays(np.uint8, hw)))
def test_patch_roundtrip(img):
    X, grid = extract_patches(img)
    H, W = img.shape
    assert grid.rows == (H - 2) * (W - 2)
    for i in range(grid.rows):
        ty, tx = grid.top_left(i)
        np.testing.assert_array_equal(X[i], img[ty : ty + 3, tx : tx + 3].ravel())
        assert patch_index_of(grid, ty + 1, tx + 1) == i


def test_patch_index_of():
    grid = PatchGrid(256, 256)
    assert patch_index_of(grid, 1, 1) == 0
    assert patch_index_of(grid, 166, 96) == 165 * 254 + 95 == 42005
    assert patch_index_of(grid, 254, 254) == 253 * 254 + 253
    img = np.random.default_rng(0).integers(0, 256, (256, 256)).astype(np.uint8)
    X, _ = extract_patches(img)
    np.testing.assert_array_equal(X[42005], img[165:168, 95:98].ravel())
    for bad in [(0, 5), (5, 0), (255, 5), (5, 255)]:
        with pytest.raises(ValueError):
            patch_index_of(grid, *bad)


def test_heatmap_rules():
    grid = PatchGrid(4, 5)  # 2x3 patches
    np.testing.assert_array_equal(scores_to_heatmap(np.full(6, 0.7), grid), np.full((2, 3), 128))
    grid = PatchGrid(3, 4)  # 1x2 patches
    np.testing.assert_array_equal(scores_to_heatmap([0.0, 1.0], grid, invert=True), [[255, 0]])
    np.testing.assert_array_equal(scores_to_heatmap([0.0, 1.0], grid), [[0, 255]])
    assert scores_to_heatmap(np.zeros(254 * 254), PatchGrid(256, 256)).shape == (254, 254)
    with pytest.raises(ValueError):
        scores_to_heatmap([1.0], grid)


def test_heatmap_half_up_rounding():
    grid = PatchGrid(3, 5)
    # 0.5/255 of the range rounds up to 1
    pix = scores_to_heatmap([0.0, 0.5, 127.5, 255.0], PatchGrid(3, 6))
    np.testing.assert_array_equal(pix, [[0, 1, 128, 255]])
    assert grid.rows == 3


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 12, elements=st.floats(-1e6, 1e6)), st.booleans())
def test_heatmap_monotone(s, invert):
    pix = scores_to_heatmap(s, PatchGrid(5, 6), invert=invert).ravel().astype(int)
    order = np.argsort(s, kind="stable")
    steps = np.diff(pix[order])
    assert np.all(steps <= 0) if invert else np.all(steps >= 0)


def test_eigvec_map():
    grid = PatchGrid(4, 4)
    U = np.array([[0.5, 0.1], [-0.5, 0.7], [0.5, -0.2], [-0.5, 0.3]])
    b = EigenBasis(np.array([1.0, 0.5]), U, 0.0)
    np.testing.assert_array_equal(eigvec_to_map(b, 0, grid), np.full((2, 2), 128))
    np.testing.assert_array_equal(eigvec_to_map(b, 1, grid), scores_to_heatmap(np.abs(U[:, 1]), grid))
    with pytest.raises(ValueError):
        eigvec_to_map(b, 2, grid)
