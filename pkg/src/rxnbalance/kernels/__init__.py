"""Packed bit-vector similarity kernels.

A compiled Cython core is preferred when built; the NumPy fallback is
selected automatically otherwise, or forced with RXNBALANCE_PURE_PYTHON=1.
Both expose the same functions over (n, words) uint64 arrays.
"""

from __future__ import annotations

import os

__all__ = ["BACKEND", "popcounts", "tanimoto_pair", "tanimoto_row",
           "tanimoto_matrix", "topk_neighbors"]

_force_pure = os.environ.get("RXNBALANCE_PURE_PYTHON", "") not in ("", "0")

if not _force_pure:
    try:
        from ._bitops import (  # type: ignore[attr-defined]
            popcounts,
            tanimoto_matrix,
            tanimoto_pair,
            tanimoto_row,
            topk_neighbors,
        )

        BACKEND = "cython"
    except ImportError:
        _force_pure = True

if _force_pure:
    from .pybitops import (  # noqa: F811
        popcounts,
        tanimoto_matrix,
        tanimoto_pair,
        tanimoto_row,
        topk_neighbors,
    )

    BACKEND = "python"
