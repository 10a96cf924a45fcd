"""Synthetic data generation, CSV ingestion with strict validation, and
seeded splitting plus standardization."""

import json

import numpy as np
import pytest

from nodeprune import (
    CsvFormatError,
    Dataset,
    SimSpec,
    SplitSpec,
    UnknownTargetError,
    check_minimal,
    load_csv,
    predict,
    save_csv,
    simulate_dataset,
    split_standardize,
)
from nodeprune.network import from_dict as params_from_dict


# --------------------------------------------------------------- simulation


def test_simulation_is_deterministic():
    spec = SimSpec(d=3, h_star=2, n=50, sigma2=1.0, seed=11)
    data_a, truth_a = simulate_dataset(spec)
    data_b, truth_b = simulate_dataset(spec)
    assert np.array_equal(data_a.X, data_b.X)
    assert np.array_equal(data_a.Y, data_b.Y)
    assert np.array_equal(truth_a.u, truth_b.u)
    assert truth_a.b2 == truth_b.b2


def test_distinct_seeds_differ():
    data_a, _ = simulate_dataset(SimSpec(d=2, h_star=1, n=30, seed=0))
    data_b, _ = simulate_dataset(SimSpec(d=2, h_star=1, n=30, seed=1))
    assert not np.array_equal(data_a.Y, data_b.Y)


def test_zero_noise_reproduces_teacher_exactly():
    data, truth = simulate_dataset(SimSpec(d=4, h_star=3, n=200, sigma2=0.0, seed=5))
    assert np.array_equal(data.Y, predict(truth, data.X))


def test_noise_variance_matches_spec():
    data, truth = simulate_dataset(SimSpec(d=2, h_star=1, n=100_000, sigma2=1.0, seed=2))
    residual = data.Y - predict(truth, data.X)
    assert 0.97 <= residual.var() <= 1.03
    assert abs(residual.mean()) <= 0.02


def test_noise_scales_with_sigma():
    base, truth = simulate_dataset(SimSpec(d=2, h_star=2, n=64, sigma2=1.0, seed=9))
    wide, _ = simulate_dataset(SimSpec(d=2, h_star=2, n=64, sigma2=4.0, seed=9))
    clean = predict(truth, base.X)
    # the underlying draws are shared, only addition rounding differs
    assert np.allclose(wide.Y - clean, 2.0 * (base.Y - clean), rtol=0.0, atol=1e-12)


def test_teacher_is_minimal_across_seeds():
    for seed in range(20):
        data, truth = simulate_dataset(SimSpec(d=3, h_star=4, n=5, seed=seed))
        assert truth.n_nodes == 4
        assert truth.n_features == 3
        assert check_minimal(truth).minimal


def test_sim_spec_validation():
    for bad in [dict(d=0), dict(h_star=0), dict(n=0), dict(sigma2=-0.1)]:
        with pytest.raises(ValueError):
            SimSpec(**{"d": 2, "h_star": 1, "n": 10, **bad})


# ----------------------------------------------------------------------- csv


def write_file(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_csv_toy_file(tmp_path):
    path = write_file(tmp_path, "a,b,y\n1.0,2.0,3.0\n4.5,-1.25,0.5\n0.0,1e-3,2.5\n")
    data = load_csv(path, "y")
    assert np.array_equal(data.X, np.array([[1.0, 2.0], [4.5, -1.25], [0.0, 1e-3]]))
    assert np.array_equal(data.Y, np.array([3.0, 0.5, 2.5]))


def test_load_csv_target_in_middle_keeps_feature_order(tmp_path):
    path = write_file(tmp_path, "a,y,b\n1.0,9.0,2.0\n3.0,8.0,4.0\n")
    data = load_csv(path, "y")
    assert np.array_equal(data.X, np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert np.array_equal(data.Y, np.array([9.0, 8.0]))


def test_load_csv_reports_bad_cell_location(tmp_path):
    path = write_file(tmp_path, "a,b,y\n1.0,2.0,3.0\n1.0,NA,3.0\n")
    with pytest.raises(CsvFormatError, match=r"row 3, column 'b'.*'NA'"):
        load_csv(path, "y")


def test_load_csv_rejects_non_finite(tmp_path):
    path = write_file(tmp_path, "a,y\ninf,1.0\n")
    with pytest.raises(CsvFormatError, match="row 2"):
        load_csv(path, "y")
    path = write_file(tmp_path, "a,y\n0.5,nan\n", name="other.csv")
    with pytest.raises(CsvFormatError, match="column 'y'"):
        load_csv(path, "y")


def test_load_csv_unknown_target_lists_columns(tmp_path):
    path = write_file(tmp_path, "a,b,y\n1,2,3\n")
    with pytest.raises(UnknownTargetError, match="medv.*a, b, y"):
        load_csv(path, "medv")


def test_load_csv_rejects_ragged_row(tmp_path):
    path = write_file(tmp_path, "a,b,y\n1.0,2.0,3.0,4.0\n")
    with pytest.raises(CsvFormatError, match="row 2 has 4 fields, expected 3"):
        load_csv(path, "y")


def test_load_csv_structural_failures(tmp_path):
    with pytest.raises(CsvFormatError, match="duplicate column"):
        load_csv(write_file(tmp_path, "a,a,y\n1,2,3\n"), "y")
    with pytest.raises(CsvFormatError, match="empty"):
        load_csv(write_file(tmp_path, "", name="empty.csv"), "y")
    with pytest.raises(CsvFormatError, match="feature column"):
        load_csv(write_file(tmp_path, "y\n1.0\n", name="only.csv"), "y")
    with pytest.raises(CsvFormatError, match="no data rows"):
        load_csv(write_file(tmp_path, "a,y\n", name="norows.csv"), "y")


def test_save_load_round_trip(tmp_path):
    data, truth = simulate_dataset(SimSpec(d=3, h_star=2, n=40, seed=4))
    path = tmp_path / "sim.csv"
    save_csv(data, path, true_params=truth)

    loaded = load_csv(path, "y")
    assert np.array_equal(loaded.X, data.X)
    assert np.array_equal(loaded.Y, data.Y)

    sidecar = tmp_path / "sim.truth.json"
    stored = params_from_dict(json.loads(sidecar.read_text()))
    assert np.array_equal(stored.u, truth.u)
    assert np.array_equal(stored.v, truth.v)
    assert np.array_equal(stored.b1, truth.b1)
    assert stored.b2 == truth.b2


def test_save_csv_without_truth_writes_no_sidecar(tmp_path):
    data, _ = simulate_dataset(SimSpec(d=2, h_star=1, n=5, seed=1))
    save_csv(data, tmp_path / "plain.csv")
    assert not (tmp_path / "plain.truth.json").exists()
    assert (tmp_path / "plain.csv").read_text().splitlines()[0] == "x1,x2,y"


# --------------------------------------------------------------------- split


def make_raw(n, d=2, seed=3):
    gen = np.random.default_rng(seed)
    return Dataset(X=gen.standard_normal((n, d)), Y=gen.standard_normal(n))


def test_split_sizes_floor_rule():
    train, test, _ = split_standardize(make_raw(506), SplitSpec(test_fraction=0.25, seed=0))
    assert test.n_samples == 126
    assert train.n_samples == 380


def test_split_covers_every_row_once():
    data = make_raw(37)
    train, test, stats = split_standardize(data, SplitSpec(test_fraction=0.3, seed=8))
    recovered = np.vstack(
        [
            np.column_stack([train.X * stats.x_scale + stats.x_mean, stats.invert_targets(train.Y)]),
            np.column_stack([test.X * stats.x_scale + stats.x_mean, stats.invert_targets(test.Y)]),
        ]
    )
    original = np.column_stack([data.X, data.Y])
    order = np.lexsort(recovered.T)
    want = np.lexsort(original.T)
    assert np.allclose(recovered[order], original[want], atol=1e-10)


def test_training_split_is_standardized():
    train, _, _ = split_standardize(make_raw(200), SplitSpec(test_fraction=0.25, seed=1))
    assert np.abs(train.X.mean(axis=0)).max() <= 1e-12
    assert np.abs(train.X.std(axis=0) - 1.0).max() <= 1e-12
    assert abs(train.Y.mean()) <= 1e-12
    assert abs(train.Y.std() - 1.0) <= 1e-12


def test_same_seed_same_split():
    data = make_raw(60)
    first = split_standardize(data, SplitSpec(seed=5))
    second = split_standardize(data, SplitSpec(seed=5))
    assert np.array_equal(first[0].X, second[0].X)
    assert np.array_equal(first[1].Y, second[1].Y)
    other = split_standardize(data, SplitSpec(seed=6))
    assert not np.array_equal(first[1].X, other[1].X)


def test_constant_column_scale_pinned():
    gen = np.random.default_rng(2)
    X = gen.standard_normal((20, 3))
    X[:, 1] = 3.7
    data = Dataset(X=X, Y=gen.standard_normal(20))
    train, test, stats = split_standardize(data, SplitSpec(test_fraction=0.25, seed=0))
    assert stats.x_scale[1] == 1.0
    assert any("column 1" in w for w in stats.warnings)
    assert np.abs(train.X[:, 1]).max() <= 1e-12
    assert np.abs(test.X[:, 1]).max() <= 1e-12


def test_constant_target_scale_pinned():
    gen = np.random.default_rng(3)
    data = Dataset(X=gen.standard_normal((12, 2)), Y=np.full(12, -2.5))
    _, _, stats = split_standardize(data, SplitSpec(test_fraction=0.25, seed=0))
    assert stats.y_scale == 1.0
    assert any("target" in w for w in stats.warnings)


def test_standardizer_round_trip():
    data = make_raw(50)
    _, _, stats = split_standardize(data, SplitSpec(seed=4))
    transformed = stats.transform(data)
    assert np.allclose(stats.invert_targets(transformed.Y), data.Y, atol=1e-10)
    assert np.allclose(transformed.X * stats.x_scale + stats.x_mean, data.X, atol=1e-10)
    assert set(stats.to_dict()) == {"x_mean", "x_scale", "y_mean", "y_scale", "warnings"}


def test_split_validation():
    with pytest.raises(ValueError):
        split_standardize(make_raw(3), SplitSpec())
    with pytest.raises(ValueError):
        split_standardize(make_raw(10), SplitSpec(test_fraction=0.05))
    with pytest.raises(ValueError):
        SplitSpec(test_fraction=0.0)
    with pytest.raises(ValueError):
        SplitSpec(test_fraction=1.0)
