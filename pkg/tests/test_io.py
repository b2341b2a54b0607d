import numpy as np
import pytest

from regwlra.io import load_matrix, read_csv, save_matrix


@pytest.mark.parametrize("name", ["m.csv", "m.bin"])
def test_round_trip_is_exact(tmp_path, name):
    M = np.random.default_rng(0).standard_normal((7, 3)) * 1e-7
    save_matrix(tmp_path / name, M)
    np.testing.assert_array_equal(load_matrix(tmp_path / name), M)


def test_csv_header_mismatch(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("2,2\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(path)


def test_binary_truncated(tmp_path):
    path = tmp_path / "bad.bin"
    save_matrix(path, np.ones((3, 3)))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError):
        load_matrix(path)


def test_nan_rejected(tmp_path):
    path = tmp_path / "nan.csv"
    path.write_text("1,2\n1.0,nan\n")
    with pytest.raises(ValueError):
        read_csv(path)
