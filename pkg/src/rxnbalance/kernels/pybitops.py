"""NumPy fallback for the packed bit-vector kernels.

Same contracts as the compiled module: fingerprints are rows of uint64
words; similarities are Tanimoto over set bits with the 0/0 case defined
as 1.0.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 512  # query rows per block keeps the intersection buffer small


def popcounts(rows: np.ndarray) -> np.ndarray:
    """Set-bit count per row of a (n, words) uint64 array."""
    return np.bitwise_count(rows).sum(axis=1, dtype=np.int64)


def tanimoto_pair(a: np.ndarray, b: np.ndarray) -> float:
    inter = int(np.bitwise_count(a & b).sum())
    union = int(np.bitwise_count(a | b).sum())
    return 1.0 if union == 0 else inter / union


def tanimoto_row(query: np.ndarray, corpus: np.ndarray,
                 corpus_pops: np.ndarray | None = None) -> np.ndarray:
    """Similarities of one query against every corpus row."""
    if corpus_pops is None:
        corpus_pops = popcounts(corpus)
    q_pop = int(np.bitwise_count(query).sum())
    inter = np.bitwise_count(corpus & query).sum(axis=1, dtype=np.int64)
    union = corpus_pops + q_pop - inter
    out = np.ones(len(corpus), dtype=np.float64)
    nz = union > 0
    out[nz] = inter[nz] / union[nz]
    return out


def tanimoto_matrix(queries: np.ndarray, corpus: np.ndarray) -> np.ndarray:
    corpus_pops = popcounts(corpus)
    out = np.empty((len(queries), len(corpus)), dtype=np.float64)
    for start in range(0, len(queries), _BLOCK):
        block = queries[start : start + _BLOCK]
        for i, row in enumerate(block):
            out[start + i] = tanimoto_row(row, corpus, corpus_pops)
    return out


def topk_neighbors(queries: np.ndarray, corpus: np.ndarray, k: int
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Indices and similarities of the k most similar corpus rows per query,
    similarity-descending (ties by lower index)."""
    n = len(corpus)
    k = min(k, n)
    corpus_pops = popcounts(corpus)
    idx_out = np.empty((len(queries), k), dtype=np.int64)
    sim_out = np.empty((len(queries), k), dtype=np.float64)
    for qi, row in enumerate(queries):
        sims = tanimoto_row(row, corpus, corpus_pops)
        if k < n:
            part = np.argpartition(-sims, k - 1)[:k]
        else:
            part = np.arange(n)
        order = part[np.lexsort((part, -sims[part]))]
        idx_out[qi] = order
        sim_out[qi] = sims[order]
    return idx_out, sim_out
