import numpy as np
import pytest

from abench.errors import DataError
from abench.tensorio import (
    read_sidecar,
    read_tensor,
    sha256_array,
    sha256_file,
    write_tensor,
)


@pytest.mark.parametrize("dtype", [np.float32, np.float64])
@pytest.mark.parametrize("shape", [(7,), (3, 5), (2, 3, 4)])
def test_roundtrip(tmp_path, dtype, shape):
    rng = np.random.default_rng(0)
    arr = rng.standard_normal(shape).astype(dtype)
    p = tmp_path / "a.tnsr"
    write_tensor(p, arr)
    back = read_tensor(p)
    assert back.dtype == dtype
    assert back.shape == shape
    np.testing.assert_array_equal(back, arr)


def test_header_layout(tmp_path):
    arr = np.arange(6, dtype=np.float32).reshape(2, 3)
    p = tmp_path / "a.tnsr"
    write_tensor(p, arr)
    raw = p.read_bytes()
    assert raw[:6] == b"UTNSR1"
    assert raw[6] == 0  # f32
    assert raw[7] == 2  # rank
    assert int.from_bytes(raw[8:16], "little") == 2
    assert int.from_bytes(raw[16:24], "little") == 3
    assert len(raw) == 24 + 6 * 4


def test_sidecar(tmp_path):
    p = tmp_path / "a.tnsr"
    write_tensor(p, np.zeros(3, dtype=np.float64), sidecar={"seed": 7, "kind": "profile"})
    assert read_sidecar(p) == {"seed": 7, "kind": "profile"}
    q = tmp_path / "b.tnsr"
    write_tensor(q, np.zeros(3, dtype=np.float64))
    assert read_sidecar(q) is None


def test_rejects_bad_dtype(tmp_path):
    with pytest.raises(DataError):
        write_tensor(tmp_path / "a.tnsr", np.zeros(3, dtype=np.int32))


def test_rejects_bad_magic(tmp_path):
    p = tmp_path / "a.tnsr"
    p.write_bytes(b"NOTATENSOR")
    with pytest.raises(DataError):
        read_tensor(p)


def test_rejects_truncated_payload(tmp_path):
    p = tmp_path / "a.tnsr"
    write_tensor(p, np.zeros(4, dtype=np.float32))
    raw = p.read_bytes()
    p.write_bytes(raw[:-4])
    with pytest.raises(DataError):
        read_tensor(p)


def test_hash_helpers(tmp_path):
    arr = np.arange(5, dtype=np.float64)
    p = tmp_path / "a.tnsr"
    write_tensor(p, arr)
    assert len(sha256_file(p)) == 64
    assert sha256_array(arr) == sha256_array(arr.copy())
    assert sha256_array(arr) != sha256_array(arr.reshape(5, 1))
