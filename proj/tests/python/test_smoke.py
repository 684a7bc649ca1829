import numpy as np
import pytest

import dflow


def rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def test_default_config():
    c = dflow.default_config()
    assert c["k"] == 20
    assert c["surface_gate"] == 7e-5
    assert c["iterations"] == 3000


def test_global_rigid_field_roundtrip():
    rng = np.random.default_rng(0)
    anchors = rng.uniform(-1, 1, (300, 3))
    r = rot_z(0.7)
    t = np.array([0.2, -0.1, 0.4])
    moved = anchors @ r.T + t
    field = dflow.TransformField(anchors, np.repeat(r[None], len(anchors), 0), moved - anchors, k=5)
    q = rng.uniform(-1, 1, (100, 3))
    assert np.abs(field.forward(q) - (q @ r.T + t)).max() < 1e-10
    assert np.abs(field.backward(field.forward(q)) - q).max() < 1e-10
    assert field.near_surface(anchors[:3]) == [True, True, True]


def test_identity_field_and_io(tmp_path):
    pts = np.random.default_rng(1).uniform(size=(50, 3))
    field = dflow.TransformField.identity(pts)
    path = str(tmp_path / "f.dfield")
    field.save(path)
    back = dflow.TransformField.load(path)
    assert len(back) == 50
    assert np.array_equal(back.forward(pts), pts)


def test_knn_matches_brute_force():
    rng = np.random.default_rng(2)
    pts = rng.uniform(size=(500, 3))
    q = rng.uniform(size=(20, 3))
    ids, dist = dflow.knn(pts, q, 5)
    d = np.linalg.norm(q[:, None, :] - pts[None], axis=2)
    assert np.array_equal(ids, np.argsort(d, axis=1, kind="stable")[:, :5])
    assert np.allclose(dist, np.sort(d, axis=1)[:, :5])


def test_synthetic_optimize_and_evaluate():
    scene = dflow.make_synthetic("bend", angle_deg=30, pairs=300, contamination=0.3, seed=1)
    assert sum(scene["outlier"]) == 90
    rv, rf = scene["rest"]
    tv, tf = scene["transformed"]
    out = dflow.optimize(rv, rf, scene["vertices"], scene["targets"],
                         {"iterations": 400, "target_nodes": 300})
    assert out["history"].shape == (400, 3)
    assert out["history"][-1, 2] < out["history"][0, 2]
    pv, pf = out["field"].warp_mesh(rv, rf)
    report = dflow.evaluate(pv, pf, tv, tf, {"metric_samples": 5000, "metric_resolution": 32})
    assert set(report) == {"cd", "cd_x1000", "vmiou", "success"}
    assert report["cd"] < dflow.evaluate(rv, rf, tv, tf, {"metric_samples": 5000, "metric_resolution": 32})["cd"]


def test_filter_pairs_drops_outlier():
    rng = np.random.default_rng(3)
    src = 0.5 + rng.uniform(-0.01, 0.01, (10, 3))
    dst = src + [0.1, 0.0, 0.0]
    dst[9] += [1.0, 0.0, 0.0]
    assert dflow.filter_pairs(src, dst, radius=0.05) == list(range(9))


def test_metrics_and_poses():
    a = np.zeros((1, 3))
    b = np.array([[0.3, 0.0, 0.4]])
    assert dflow.chamfer_distance(a, b) == pytest.approx(0.5)
    assert dflow.success(0.001) and not dflow.success(0.004)
    poses = dflow.hemisphere_poses(200, 1.0, np.zeros(3))
    assert poses.shape == (1400, 4, 4)


def test_errors_are_python_exceptions():
    with pytest.raises(dflow.InvalidInput):
        dflow._dflow.check_config('{"bogus": 1}')
    with pytest.raises(ValueError):
        dflow.make_synthetic("bend", angle_deg=120)
