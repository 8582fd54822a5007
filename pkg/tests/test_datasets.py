import numpy as np
import pytest

from pimsim import datasets


def test_same_seed_identical_bytes():
    a = datasets.int_vector(7, 1000, "int64", tag="t")
    b = datasets.int_vector(7, 1000, "int64", tag="t")
    assert a.tobytes() == b.tobytes()
    assert datasets.int_vector(8, 1000, "int64", tag="t").tobytes() != a.tobytes()


def test_array_roundtrip(tmp_path):
    path = tmp_path / "data.bin"
    arrays = {
        "m": datasets.image_12bit(3, 16, 32),
        "v": np.linspace(0, 1, 17),
        "i": np.arange(11, dtype=np.int64),
    }
    datasets.save_arrays(path, arrays)
    loaded = datasets.load_arrays(path)
    assert set(loaded) == set(arrays)
    for name in arrays:
        assert loaded[name].dtype == arrays[name].dtype
        assert np.array_equal(loaded[name], arrays[name])


def test_header_is_one_text_line(tmp_path):
    path = tmp_path / "one.bin"
    with open(path, "wb") as fh:
        datasets.save_array(fh, np.arange(4, dtype=np.int32))
    raw = path.read_bytes()
    header, payload = raw.split(b"\n", 1)
    assert header == b"pimdata int32 4"
    assert payload == np.arange(4, dtype="<i4").tobytes()


def test_csr_roundtrip(tmp_path):
    ro, ci, vals = datasets.sparse_csr(5, 64, 64, 0.05)
    path = tmp_path / "m.csr"
    datasets.save_csr(path, ro, ci, vals)
    ro2, ci2, vals2 = datasets.load_csr(path)
    assert np.array_equal(ro, ro2)
    assert np.array_equal(ci, ci2)
    assert np.array_equal(vals, vals2)


def test_sparse_csr_structure():
    ro, ci, vals = datasets.sparse_csr(11, 128, 96, 0.02)
    assert ro[0] == 0 and ro[-1] == len(ci) == len(vals)
    assert np.all(np.diff(ro) >= 0)
    assert ci.min() >= 0 and ci.max() < 96
    for r in range(128):
        row = ci[ro[r]:ro[r + 1]]
        assert np.all(np.diff(row) > 0)      # sorted, no duplicates


def test_rmat_edge_ratio():
    vertices = 4096
    ro, ci = datasets.rmat_graph(3, vertices)
    edges = len(ci)
    assert 8 * vertices <= edges <= 14 * vertices
    assert ci.min() >= 0 and ci.max() < vertices


def test_rmat_symmetric():
    ro, ci = datasets.rmat_graph(5, 256)
    pairs = {(u, int(v)) for u in range(256)
             for v in ci[ro[u]:ro[u + 1]]}
    assert all((v, u) in pairs for (u, v) in pairs)


def test_image_range():
    img = datasets.image_12bit(9, 32, 64)
    assert img.shape == (32, 64)
    assert img.min() >= 0 and img.max() <= 4095


def test_sorted_unique():
    arr = datasets.sorted_unique_int64(2, 500)
    assert np.all(np.diff(arr) > 0)


def test_bundled_matrix_is_fixed():
    a = datasets.bundled_spmv_matrix()
    b = datasets.bundled_spmv_matrix()
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    ro, ci, vals = a
    density = len(vals) / (1024 * 1024)
    assert 0.001 < density < 0.005
