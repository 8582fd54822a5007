"""Deterministic dataset generators and the on-disk dataset container.

File format: a one-line ASCII header ``pimdata <dtype> <dim0>[,<dim1>...]``
followed by the raw little-endian array bytes. CSR matrices are three arrays
(row offsets, column indices, values) stored back to back in one container.
"""

from __future__ import annotations

import zlib

import numpy as np

from .errors import ConfigError

_MAGIC = "pimdata"


def save_array(fh, array: np.ndarray) -> None:
    dims = ",".join(str(d) for d in array.shape)
    fh.write(f"{_MAGIC} {array.dtype.name} {dims}\n".encode("ascii"))
    data = np.ascontiguousarray(array)
    if data.dtype.byteorder == ">":
        data = data.astype(data.dtype.newbyteorder("<"))
    fh.write(data.tobytes())


def load_array(fh) -> np.ndarray:
    header = bytearray()
    while True:
        ch = fh.read(1)
        if not ch:
            raise ConfigError("truncated dataset header")
        if ch == b"\n":
            break
        header.extend(ch)
    parts = header.decode("ascii").split()
    if len(parts) != 3 or parts[0] != _MAGIC:
        raise ConfigError(f"bad dataset header {header!r}")
    dtype = np.dtype(parts[1]).newbyteorder("<")
    shape = tuple(int(d) for d in parts[2].split(","))
    count = int(np.prod(shape))
    raw = fh.read(count * dtype.itemsize)
    if len(raw) != count * dtype.itemsize:
        raise ConfigError("truncated dataset payload")
    return np.frombuffer(raw, dtype=dtype).reshape(shape).copy()


def save_arrays(path, arrays: dict) -> None:
    with open(path, "wb") as fh:
        fh.write(f"{len(arrays)}\n".encode("ascii"))
        for name, array in arrays.items():
            fh.write(f"{name}\n".encode("ascii"))
            save_array(fh, array)


def load_arrays(path) -> dict:
    out = {}
    with open(path, "rb") as fh:
        n = int(_read_line(fh))
        for _ in range(n):
            name = _read_line(fh)
            out[name] = load_array(fh)
    return out


def _read_line(fh) -> str:
    buf = bytearray()
    while True:
        ch = fh.read(1)
        if not ch or ch == b"\n":
            return buf.decode("ascii")
        buf.extend(ch)


def save_csr(path, row_offsets, col_indices, values) -> None:
    save_arrays(path, {"row_offsets": row_offsets,
                       "col_indices": col_indices, "values": values})


def load_csr(path):
    data = load_arrays(path)
    return data["row_offsets"], data["col_indices"], data["values"]


# ---------------------------------------------------------------------------
# generators (all deterministic in the seed)

def rng_for(seed: int, tag: str) -> np.random.Generator:
    # crc32 keeps the (seed, tag) -> stream mapping stable across processes
    return np.random.default_rng((seed, zlib.crc32(tag.encode("ascii"))))


def int_vector(seed: int, n: int, dtype="int32", lo=-1000, hi=1000,
               tag="vec") -> np.ndarray:
    return rng_for(seed, tag).integers(lo, hi, size=n).astype(dtype)


def sorted_unique_int64(seed: int, n: int) -> np.ndarray:
    """Strictly increasing int64 values (binary-search haystack)."""
    steps = rng_for(seed, "sorted").integers(1, 10, size=n).astype(np.int64)
    return np.cumsum(steps)


def random_walk(seed: int, n: int, dtype="int32") -> np.ndarray:
    steps = rng_for(seed, "walk").integers(-8, 9, size=n)
    return np.cumsum(steps).astype(dtype)


def image_12bit(seed: int, height: int, width: int) -> np.ndarray:
    """Pixel sampler with a smooth gradient plus noise, clipped to 12 bits."""
    rng = rng_for(seed, "image")
    base = np.linspace(0, 4095, width, dtype=np.float64)[None, :]
    noise = rng.normal(0.0, 400.0, size=(height, width))
    img = np.clip(base + noise, 0, 4095)
    return img.astype(np.uint32)


def sparse_csr(seed: int, rows: int, cols: int, density: float = 0.01):
    """Random CSR matrix with float64 values; every row may be empty."""
    rng = rng_for(seed, "csr")
    nnz_per_row = rng.binomial(cols, density, size=rows)
    row_offsets = np.zeros(rows + 1, dtype=np.int64)
    np.cumsum(nnz_per_row, out=row_offsets[1:])
    total = int(row_offsets[-1])
    col_indices = np.empty(total, dtype=np.int64)
    for r in range(rows):
        k = nnz_per_row[r]
        if k:
            col_indices[row_offsets[r]:row_offsets[r + 1]] = np.sort(
                rng.choice(cols, size=k, replace=False))
    values = rng.normal(0.0, 1.0, size=total)
    return row_offsets, col_indices, values


def bundled_spmv_matrix():
    """Fixed stand-in for the structural-engineering test matrix: a symmetric
    banded system of matching sparsity character, generated deterministically."""
    return sparse_csr(123457, 1024, 1024, density=0.0024)


def rmat_graph(seed: int, vertices: int, edges_per_vertex: int = 12):
    """Recursive-matrix style power-law graph as a CSR adjacency structure.

    Partition probabilities (0.57, 0.19, 0.19, 0.05); undirected edges are
    inserted in both directions, self-loops and duplicates removed.
    """
    rng = rng_for(seed, "rmat")
    n_bits = max(1, int(np.ceil(np.log2(max(vertices, 2)))))
    size = 1 << n_bits
    n_edges = vertices * edges_per_vertex // 2
    a, b, c = 0.57, 0.19, 0.19
    src = np.zeros(n_edges, dtype=np.int64)
    dst = np.zeros(n_edges, dtype=np.int64)
    for bit in range(n_bits):
        r = rng.random(n_edges)
        quadrant_src = (r >= a + b).astype(np.int64)
        quadrant_dst = (((r >= a) & (r < a + b)) | (r >= a + b + c)).astype(np.int64)
        src = (src << 1) | quadrant_src
        dst = (dst << 1) | quadrant_dst
    src %= vertices
    dst %= vertices
    keep = src != dst
    src, dst = src[keep], dst[keep]
    pairs = np.unique(np.stack([np.concatenate([src, dst]),
                                np.concatenate([dst, src])], axis=1), axis=0)
    row_offsets = np.zeros(vertices + 1, dtype=np.int64)
    counts = np.bincount(pairs[:, 0], minlength=vertices)
    np.cumsum(counts, out=row_offsets[1:])
    return row_offsets, pairs[:, 1].astype(np.int64)


def dna_sequence(seed: int, n: int, tag="seq") -> np.ndarray:
    """Sequence over a 4-letter alphabet encoded as 0..3."""
    return rng_for(seed, tag).integers(0, 4, size=n).astype(np.int32)


def transpose_array(seed: int, mp: int, m: int, np_: int, n: int) -> np.ndarray:
    total = mp * m * np_ * n
    return rng_for(seed, "trns").integers(-10**6, 10**6, size=total).astype(np.int64)
