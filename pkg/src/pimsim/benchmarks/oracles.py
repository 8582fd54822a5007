"""Sequential reference implementations every kernel is checked against.

Each oracle is written in the most direct form available (dense expansion,
full-matrix dynamic programming, brute-force window scans) and never shares
code with the kernel implementations.
"""

from __future__ import annotations

import math

import numpy as np


def va(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a + b


def _wrap_to(value: int, dtype):
    """Wrap an unbounded integer to a fixed-width register value."""
    bits = np.dtype(dtype).itemsize * 8
    value &= (1 << bits) - 1
    if np.dtype(dtype).kind == "i" and value >= 1 << (bits - 1):
        value -= 1 << bits
    return np.dtype(dtype).type(value)


def gemv(matrix: np.ndarray, vector: np.ndarray) -> np.ndarray:
    """Row-by-row dot products; sums wrap to the element width like the
    fixed-width hardware registers do."""
    m = matrix.shape[0]
    out = np.zeros(m, dtype=matrix.dtype)
    for r in range(m):
        acc = 0
        for j in range(matrix.shape[1]):
            acc += int(matrix[r, j]) * int(vector[j])
        out[r] = _wrap_to(acc, matrix.dtype)
    return out


def spmv(row_offsets, col_indices, values, x) -> np.ndarray:
    """Dense-expansion reference: materialize the matrix, then multiply."""
    rows = len(row_offsets) - 1
    dense = np.zeros((rows, len(x)), dtype=np.float64)
    for r in range(rows):
        for k in range(row_offsets[r], row_offsets[r + 1]):
            dense[r, col_indices[k]] = values[k]
    return dense @ x


def sel(array: np.ndarray, predicate) -> np.ndarray:
    return np.array([v for v in array if predicate(v)], dtype=array.dtype)


def uni(array: np.ndarray) -> np.ndarray:
    out = []
    for v in array:
        if not out or v != out[-1]:
            out.append(v)
    return np.array(out, dtype=array.dtype)


def bs(sorted_array: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Linear-scan positions of each query in the sorted array."""
    positions = np.empty(len(queries), dtype=np.int64)
    for i, q in enumerate(queries):
        pos = -1
        for j, v in enumerate(sorted_array):
            if v == q:
                pos = j
                break
        positions[i] = pos
    return positions


def ts(series: np.ndarray, query: np.ndarray):
    """Brute-force all-windows z-normalized Euclidean distance scan.

    Zero-variance windows have no defined z-normalization and are skipped;
    when nothing is comparable the result is (inf, -1).
    """
    m = len(query)
    qf = query.astype(np.float64)
    q_std = qf.std()
    if q_std == 0.0:
        return math.inf, -1
    qn = (qf - qf.mean()) / q_std
    best, best_at = math.inf, -1
    for i in range(len(series) - m + 1):
        w = series[i:i + m].astype(np.float64)
        w_std = w.std()
        if w_std == 0.0:
            continue
        wn = (w - w.mean()) / w_std
        d = math.sqrt(float(np.sum((qn - wn) ** 2)))
        if d < best:
            best, best_at = d, i
    return best, best_at


def bfs(row_offsets, col_indices, source: int, n_vertices: int) -> np.ndarray:
    """Sequential queue BFS; unreached vertices are labeled -1."""
    dist = np.full(n_vertices, -1, dtype=np.int32)
    dist[source] = 0
    queue = [source]
    while queue:
        nxt = []
        for v in queue:
            for k in range(row_offsets[v], row_offsets[v + 1]):
                u = col_indices[k]
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
        queue = nxt
    return dist


def mlp(weights: list, x: np.ndarray) -> np.ndarray:
    """Dense forward pass with ReLU after every layer."""
    out = x
    for w in weights:
        out = gemv(w, out)
        out = np.maximum(out, out.dtype.type(0))
    return out


def nw(seq_a: np.ndarray, seq_b: np.ndarray, match: int = 0,
       mismatch: int = -1, gap: int = -1) -> np.ndarray:
    """Full score-matrix dynamic program, row by row."""
    la, lb = len(seq_a), len(seq_b)
    score = np.zeros((la + 1, lb + 1), dtype=np.int32)
    score[0, :] = np.arange(lb + 1, dtype=np.int32) * gap
    score[:, 0] = np.arange(la + 1, dtype=np.int32) * gap
    for i in range(1, la + 1):
        for j in range(1, lb + 1):
            sub = match if seq_a[i - 1] == seq_b[j - 1] else mismatch
            score[i, j] = max(score[i - 1, j - 1] + sub,
                              score[i - 1, j] + gap,
                              score[i, j - 1] + gap)
    return score


def hst(image: np.ndarray, bins: int) -> np.ndarray:
    counts = np.zeros(bins, dtype=np.uint32)
    shift = max(0, 12 - int(math.log2(bins)))
    for v in image.ravel():
        counts[int(v) >> shift] += 1
    return counts


def red(array: np.ndarray) -> np.int64:
    total = np.int64(0)
    for v in array:
        total = np.int64(total + v)
    return total


def scan_exclusive(array: np.ndarray) -> np.ndarray:
    out = np.zeros_like(array)
    running = array.dtype.type(0)
    for i, v in enumerate(array):
        out[i] = running
        running = array.dtype.type(running + v)
    return out


def trns(array: np.ndarray, mp: int, m: int, np_: int, n: int) -> np.ndarray:
    """Index-formula transpose of an (M'*m) x (N'*n) matrix stored row-major."""
    mat = array.reshape(mp * m, np_ * n)
    return mat.T.copy().ravel()
