import csv

import numpy as np
import pytest

from tuckercomplete import sample_uniform
from tuckercomplete.experiments import TrialRecord
from tuckercomplete.textio import (
    CSV_HEADER,
    emit_csv,
    read_observations,
    read_tensor,
    write_observations,
    write_tensor,
)


def test_tensor_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    t = rng.standard_normal((3, 4, 2)) * np.exp(rng.uniform(-20, 20, (3, 4, 2)))
    path = tmp_path / "t.txt"
    write_tensor(path, t)
    back = read_tensor(path)
    np.testing.assert_array_equal(t, back)
    first = path.read_text().splitlines()[0]
    assert first == "3 4 2"


def test_tensor_storage_order_last_index_fastest(tmp_path):
    t = np.arange(8.0).reshape(2, 2, 2)
    path = tmp_path / "t.txt"
    write_tensor(path, t)
    tokens = path.read_text().split()[3:]
    assert [float(v) for v in tokens] == list(range(8))


def test_tensor_read_errors(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 2\n1 2 3 4\n")
    with pytest.raises(ValueError):
        read_tensor(path)
    path.write_text("2 2 2\n1 2 3\n")
    with pytest.raises(ValueError):
        read_tensor(path)


def test_observation_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    t = rng.standard_normal((4, 3, 5))
    obs = sample_uniform(t, 37, 3)
    path = tmp_path / "obs.txt"
    write_observations(path, obs)
    back = read_observations(path)
    assert back.dims == obs.dims
    np.testing.assert_array_equal(back.idx, obs.idx)
    np.testing.assert_array_equal(back.values, obs.values)
    header = path.read_text().splitlines()[0]
    assert header == "4 3 5 37"
    # 1-based indices on disk
    first = path.read_text().splitlines()[1].split()
    assert all(int(v) >= 1 for v in first[:3])


def record(**kw):
    base = dict(
        d=8,
        r=1,
        alpha=2.0,
        n=45,
        trial=3,
        seed=17,
        success=True,
        rel_error=1.2345678901234567e-09,
        iterations=14,
        dp_init=0.25,
        runtime_ms=12.5,
    )
    base.update(kw)
    return TrialRecord(**base)


def test_emit_csv_header_only_for_empty_stream(tmp_path):
    path = tmp_path / "empty.csv"
    emit_csv([], path)
    assert path.read_text() == CSV_HEADER + "\n"


def test_emit_csv_roundtrip(tmp_path):
    path = tmp_path / "one.csv"
    rec = record()
    emit_csv([rec], path)
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    row = rows[0]
    assert int(row["d"]) == rec.d
    assert int(row["r"]) == rec.r
    assert float(row["alpha"]) == rec.alpha
    assert int(row["n"]) == rec.n
    assert int(row["trial"]) == rec.trial
    assert int(row["seed"]) == rec.seed
    assert row["success"] == "1"
    assert float(row["rel_error"]) == rec.rel_error  # 17 digits round-trips
    assert int(row["iterations"]) == rec.iterations
    assert float(row["dp_init"]) == rec.dp_init


def test_emit_csv_success_flag_zero(tmp_path):
    path = tmp_path / "zero.csv"
    emit_csv([record(success=False)], path)
    assert path.read_text().splitlines()[1].split(",")[6] == "0"
