import numpy as np
import pytest

import mtsb


def small_spec(seed=7):
    spec = mtsb.make_scenario_preset("I", 6, 5)
    spec.T = 120
    spec.seed = seed
    return spec


def test_generate_shapes():
    spec = small_spec()
    series, truth = mtsb.generate(spec)
    assert series.length == 120
    assert series.rows == 18
    assert series.cols == 15
    assert truth.R.shape == (18, 3)
    assert truth.Lambda.shape == (15, 6)
    assert list(np.unique(np.asarray(truth.row_truth))) == [1, 2, 3]


def test_generate_deterministic():
    a, _ = mtsb.generate(small_spec())
    b, _ = mtsb.generate(small_spec())
    assert np.allclose(a.frame(5), b.frame(5))
    c, _ = mtsb.generate(small_spec(seed=8))
    assert not np.allclose(a.frame(5), c.frame(5))


def test_estimation_and_pipeline():
    spec = small_spec()
    series, truth = mtsb.generate(spec)
    fn = mtsb.estimate_factor_numbers(series, 1)
    assert fn.k0 >= 1 and fn.r0 >= 1

    R, C = mtsb.estimate_global_loadings(series, 3, 2, 1)
    assert R.values.shape == (18, 3)
    Q = R.values.T @ R.values
    assert np.allclose(Q, np.eye(3), atol=1e-8)
    assert mtsb.space_distance(R.values, truth.R) < 0.5

    opts = mtsb.PipelineOptions()
    opts.l0 = 1
    known = mtsb.FactorNumbers()
    known.k0, known.k, known.r0, known.r = 3, 9, 2, 6
    opts.factor_numbers = known
    result, loadings, fn2 = mtsb.bicluster_pipeline(series, opts)
    assert result.row_membership.shape[0] == 18
    assert fn2.k0 == 3 and fn2.r == 6
    assert result.m_hat >= 1


def test_misclustering_rate():
    found = np.array([1, 1, 2, 2, 3, 3], dtype=np.int32)
    truth = np.array([2, 2, 3, 3, 1, 1], dtype=np.int32)
    assert mtsb.misclustering_rate(found, truth) == 0.0


def test_tensor_csv_roundtrip(tmp_path):
    series, _ = mtsb.generate(small_spec())
    path = str(tmp_path / "series.csv")
    mtsb.save_tensor_csv(series, path)
    back = mtsb.load_tensor_csv(path)
    assert back.length == series.length
    assert np.allclose(back.frame(3), series.frame(3))


def test_error_maps_to_python():
    with pytest.raises(mtsb.MtsbError):
        mtsb.load_tensor_csv("/nonexistent/path.csv")
