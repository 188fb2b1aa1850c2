import numpy as np
import pytest

from sparsetime.exceptions import (
    ConfigError,
    DataError,
    DataFileNotFoundError,
    EmptyDataError,
    MalformedCsvError,
    MissingColumnError,
)
from sparsetime.pipeline.dataset import (
    NormStats,
    build_split_dataset,
    chrono_split,
    ingest_csv,
    make_windows,
    zscore,
)
from sparsetime.pipeline.synthetic import synth_series


def _write(tmp_path, text, name="series.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_ingest_csv_reads_selected_columns(tmp_path):
    path = _write(tmp_path, "a,b\n1,2\n3,4\n5,6\n")
    table = ingest_csv(path, ["a", "b"], "b")
    assert table.columns == ["a", "b"]
    assert table.target_index == 1
    assert np.array_equal(table.values, [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    assert not table.missing_mask.any()


def test_ingest_csv_forward_fills_missing_cells(tmp_path):
    path = _write(tmp_path, "a,b\n1,2\n,4\nNaN,6\n")
    table = ingest_csv(path, None, "b")
    assert np.array_equal(table.values[:, 0], [1.0, 1.0, 1.0])
    assert table.missing_mask[:, 0].tolist() == [False, True, True]


def test_ingest_csv_treats_sentinel_as_missing(tmp_path):
    path = _write(tmp_path, "co,temp\n2.6,13.6\n-200,13.3\n2.2,11.9\n")
    table = ingest_csv(path, None, "temp", missing_sentinel=-200)
    assert np.array_equal(table.values[:, 0], [2.6, 2.6, 2.2])


def test_ingest_csv_back_fills_leading_gap(tmp_path):
    path = _write(tmp_path, "a,b\n,1\n,2\n7,3\n")
    table = ingest_csv(path, None, "b")
    assert np.array_equal(table.values[:, 0], [7.0, 7.0, 7.0])


def test_ingest_csv_drops_non_numeric_columns(tmp_path):
    path = _write(tmp_path, "date;x;y\n2004-03-10;1,5;2\n2004-03-11;x;3\n")
    table = ingest_csv(path, None, "y", delimiter=";")
    assert table.columns == ["y"]

    path = _write(tmp_path, "date,x,y\nmon,1,2\ntue,2,3\n", name="named.csv")
    table = ingest_csv(path, None, "y")
    assert table.columns == ["x", "y"]


def test_ingest_csv_errors(tmp_path):
    with pytest.raises(DataFileNotFoundError, match="csv not found"):
        ingest_csv(tmp_path / "missing.csv", None, "a")
    with pytest.raises(MissingColumnError, match="zzz"):
        ingest_csv(_write(tmp_path, "a,b\n1,2\n"), ["a"], "zzz")
    with pytest.raises(EmptyDataError, match="zero rows"):
        ingest_csv(_write(tmp_path, "a,b\n", name="header.csv"), None, "a")
    with pytest.raises(EmptyDataError, match="no content"):
        ingest_csv(_write(tmp_path, "", name="empty.csv"), None, "a")
    with pytest.raises(DataError, match="no numeric"):
        ingest_csv(_write(tmp_path, "a,b\nx,1\ny,2\n", name="text.csv"), ["a"], "b")


@pytest.mark.parametrize(
    "content",
    [b"a,b\n1,2\n3,4,5\n6,7\n", b"a,b\n\xff\xfe,1\n2,3\n"],
    ids=["ragged-row", "invalid-utf8"],
)
def test_ingest_csv_wraps_parse_failures(tmp_path, content):
    path = tmp_path / "broken.csv"
    path.write_bytes(content)
    with pytest.raises(MalformedCsvError, match="cannot be parsed"):
        ingest_csv(path, None, "a")


def test_zscore_uses_training_rows_only():
    x = np.array([[1.0], [3.0], [100.0]])
    normalized, stats = zscore(x, range(0, 2))
    assert stats.mean.tolist() == [2.0]
    assert stats.std.tolist() == [1.0]
    np.testing.assert_allclose(normalized[:, 0], [-1.0, 1.0, 98.0], rtol=1e-7)


def test_zscore_constant_feature_stays_finite():
    normalized, stats = zscore(np.full((5, 2), 4.0), range(0, 5))
    assert np.all(normalized == 0.0)
    assert np.all(stats.std == 0.0)


def test_norm_stats_round_trip_inverse():
    stats = NormStats(mean=np.array([1.0, -2.0]), std=np.array([0.5, 3.0]))
    x = np.array([[0.3, 4.0], [2.0, -1.0]])
    np.testing.assert_allclose(stats.inverse_transform(stats.transform(x)), x, rtol=1e-12)
    restored = NormStats.from_dict(stats.to_dict())
    assert np.array_equal(restored.mean, stats.mean)
    assert restored.eps == stats.eps


def test_make_windows_example():
    x = np.arange(10.0).reshape(5, 2)
    samples = make_windows(x, 2, 1)
    assert len(samples) == 3
    assert np.array_equal(samples.windows[0], [[0.0, 1.0], [2.0, 3.0]])
    assert samples.targets.tolist() == [5.0, 7.0, 9.0]
    assert [target for _, target in samples] == [5.0, 7.0, 9.0]


def test_make_windows_errors():
    x = np.zeros((5, 2))
    with pytest.raises(DataError, match="too short"):
        make_windows(x, 5, 0)
    with pytest.raises(ConfigError, match=">= 2"):
        make_windows(x, 1, 0)
    with pytest.raises(ConfigError, match="out of range"):
        make_windows(x, 2, 2)


@pytest.mark.parametrize(("n_rows", "sizes"), [(100, (70, 15, 15)), (101, (70, 15, 16)), (10, (7, 1, 2))])
def test_chrono_split_sizes(n_rows, sizes):
    train, val, test = chrono_split(n_rows)
    assert (len(train), len(val), len(test)) == sizes
    assert train.stop == val.start
    assert val.stop == test.start
    assert test.stop == n_rows


def test_chrono_split_rejects_short_series():
    with pytest.raises(DataError, match="at least 10"):
        chrono_split(9)


def test_build_split_dataset_window_counts():
    data = build_split_dataset(synth_series("seasonal", 400, 3, seed=1), window=8, smooth_window=3)
    assert data.d == 3
    assert len(data.train) == 280 - 8
    assert len(data.validation) == 60 - 8
    assert len(data.test) == 60 - 8
    assert data.train.s.shape == (272, 8, 3)
    assert len(data.fingerprint()) == 16


def test_build_split_dataset_rejects_split_shorter_than_window():
    with pytest.raises(DataError, match="validation split"):
        build_split_dataset(synth_series("seasonal", 100, 1, seed=0), window=15)


def test_test_rows_do_not_leak_into_training_split():
    series = synth_series("random_walk", 300, 2, seed=4)
    base = build_split_dataset(series, window=10, smooth_window=3)
    mutated = series.copy()
    mutated[base.test.row_range.start + 5, 1] += 1e6
    changed = build_split_dataset(mutated, window=10, smooth_window=3)
    assert changed.norm_stats.mean.tobytes() == base.norm_stats.mean.tobytes()
    assert changed.norm_stats.std.tobytes() == base.norm_stats.std.tobytes()
    assert changed.train.fingerprint() == base.train.fingerprint()
    assert changed.validation.fingerprint() == base.validation.fingerprint()
    assert changed.test.fingerprint() != base.test.fingerprint()


def test_split_samples_index_yields_decomposition():
    data = build_split_dataset(synth_series("trend", 200, 2, seed=0), window=6, smooth_window=3)
    dec, target = data.train[3]
    assert np.array_equal(dec.m, data.train.windows[3])
    assert target == data.train.targets[3]
