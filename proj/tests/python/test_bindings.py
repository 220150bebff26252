"""Smoke tests for the pysogmm extension module."""

import struct

import numpy as np
import pytest

pysogmm = pytest.importorskip("pysogmm")


def two_plane_scene(h=24, w=32):
    depth = np.zeros((h, w))
    gray = np.zeros((h, w))
    for v in range(h):
        for u in range(w):
            fu = u / (w - 1)
            fv = v / (h - 1)
            if u < w // 2:
                depth[v, u] = 1.0 + 0.12 * fv
                gray[v, u] = 0.30 + 0.08 * fu
            else:
                depth[v, u] = 2.0 + 0.12 * (1.0 - fv)
                gray[v, u] = 0.68 + 0.08 * fu
    return depth, gray


INTR = dict(fx=300.0, fy=300.0, cx=15.5, cy=11.5)


def test_depth_to_pointcloud_counts_valid_pixels():
    depth, gray = two_plane_scene()
    depth[0, 0] = 0.0
    cloud = pysogmm.depth_to_pointcloud(depth, gray, **INTR)
    assert cloud.shape == (depth.size - 1, 4)
    assert np.all(cloud[:, 2] > 0)


def test_fit_regress_and_metrics():
    depth, gray = two_plane_scene()
    model = pysogmm.fit(depth, gray, sigma=0.02, seed=7, **INTR)
    assert len(model) >= 2
    assert model.weights.sum() == pytest.approx(1.0, abs=1e-9)
    assert model.means.shape == (len(model), 4)
    assert model.covariances.shape == (len(model), 4, 4)

    regressed = pysogmm.regress_image(model, depth, **INTR)
    assert regressed.shape == depth.shape
    assert regressed.min() >= 0.0 and regressed.max() <= 1.0

    score = pysogmm.psnr(gray, regressed, (depth > 0).astype(float))
    assert score > 15.0

    truth = pysogmm.depth_to_pointcloud(depth, gray, **INTR)
    recon = pysogmm.reconstruct(model, 3 * truth.shape[0], seed=0)
    mre = pysogmm.mean_reconstruction_error(recon, truth)
    assert 0.0 <= mre < 0.05


def test_estimate_num_components_monotone():
    depth, gray = two_plane_scene()
    counts = [
        pysogmm.estimate_num_components(depth, gray, sigma) for sigma in (0.01, 0.03, 0.05)
    ]
    assert counts == sorted(counts, reverse=True)
    assert counts[-1] >= 1


def test_model_file_round_trip(tmp_path):
    depth, gray = two_plane_scene()
    model = pysogmm.fit(depth, gray, sigma=0.02, seed=3, **INTR)
    path = tmp_path / "model.sgmm"
    pysogmm.save_model(model, 0.02, str(path))
    assert path.stat().st_size == 12 + 60 * len(model)

    loaded, sigma = pysogmm.load_model(str(path))
    assert sigma == pytest.approx(0.02, abs=1e-7)
    assert len(loaded) == len(model)
    np.testing.assert_allclose(loaded.means, model.means, rtol=1e-6, atol=1e-6)


def test_sampling_is_deterministic():
    depth, gray = two_plane_scene()
    model = pysogmm.fit(depth, gray, sigma=0.03, seed=1, **INTR)
    a = pysogmm.sample(model, 500, seed=11)
    b = pysogmm.sample(model, 500, seed=11)
    np.testing.assert_array_equal(a, b)
    assert np.all((a[:, 3] >= 0.0) & (a[:, 3] <= 1.0))


def test_export_ply_parses_independently(tmp_path):
    cloud = np.array([[1.0, 2.0, 3.0, 0.5], [0.0, -1.0, 2.0, 1.0]])
    path = tmp_path / "cloud.ply"
    pysogmm.export_ply(cloud, str(path))

    blob = path.read_bytes()
    header, _, payload = blob.partition(b"end_header\n")
    lines = header.decode().splitlines()
    assert lines[0] == "ply"
    assert lines[1] == "format binary_little_endian 1.0"
    assert "element vertex 2" in lines
    assert len(payload) == 2 * 13
    x, y, z, g = struct.unpack("<fffB", payload[:13])
    assert (x, y, z) == (1.0, 2.0, 3.0)
    assert g == 128


def test_memory_formula():
    assert pysogmm.model_memory_bytes(2000, "gmm4") == 120000
    assert pysogmm.model_memory_bytes(6482, "ndt_cell") == 259280


def test_run_mean_shift_two_clusters():
    rng = np.random.default_rng(5)
    pts = np.concatenate(
        [
            rng.normal(0.0, 0.02, size=(50, 2)),
            rng.normal(1.0, 0.02, size=(50, 2)),
        ]
    )
    modes = pysogmm.run_mean_shift(pts, sigma=0.1)
    assert modes.shape == (2, 2)


def test_parameter_errors_surface_as_value_errors():
    with pytest.raises(ValueError):
        pysogmm.model_memory_bytes(10, "bogus")
