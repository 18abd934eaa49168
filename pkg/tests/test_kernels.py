"""Kernel backends must agree with each other and with a naive reference."""

import numpy as np
import pytest

from rxnbalance import kernels
from rxnbalance.kernels import pybitops

try:
    from rxnbalance.kernels import _bitops
except ImportError:
    _bitops = None

BACKENDS = [pybitops] + ([_bitops] if _bitops is not None else [])


def _naive_tanimoto(a: np.ndarray, b: np.ndarray) -> float:
    inter = bin(int.from_bytes((a & b).tobytes(), "little")).count("1")
    union = bin(int.from_bytes((a | b).tobytes(), "little")).count("1")
    return 1.0 if union == 0 else inter / union


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(42)
    A = rng.integers(0, 2**63, size=(40, 32), dtype=np.uint64)
    B = rng.integers(0, 2**63, size=(60, 32), dtype=np.uint64)
    A[5] = 0  # all-zero row exercises the 0/0 convention
    return A, B


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.__name__)
class TestBackend:
    def test_pair_matches_naive(self, backend, data):
        A, B = data
        for i in range(0, 40, 7):
            for j in range(0, 60, 11):
                assert backend.tanimoto_pair(A[i], B[j]) == pytest.approx(
                    _naive_tanimoto(A[i], B[j]))

    def test_zero_zero(self, backend):
        z = np.zeros(4, dtype=np.uint64)
        assert backend.tanimoto_pair(z, z) == 1.0

    def test_popcounts(self, backend, data):
        A, _ = data
        expect = [bin(int.from_bytes(row.tobytes(), "little")).count("1")
                  for row in A]
        assert list(backend.popcounts(A)) == expect

    def test_matrix_row_consistency(self, backend, data):
        A, B = data
        M = backend.tanimoto_matrix(A, B)
        for i in (0, 5, 39):
            assert np.allclose(M[i], backend.tanimoto_row(A[i], B))

    def test_topk_sorted_and_correct(self, backend, data):
        A, B = data
        idx, sims = backend.topk_neighbors(A, B, 9)
        M = backend.tanimoto_matrix(A, B)
        for i in range(len(A)):
            assert all(sims[i][k] >= sims[i][k + 1] for k in range(8))
            best = np.sort(M[i])[::-1][:9]
            assert np.allclose(np.sort(sims[i])[::-1], best)
            assert np.allclose(M[i][idx[i]], sims[i])


def test_backends_agree(data):
    if _bitops is None:
        pytest.skip("compiled kernels not built")
    A, B = data
    assert np.allclose(pybitops.tanimoto_matrix(A, B),
                       _bitops.tanimoto_matrix(A, B))
    i1, s1 = pybitops.topk_neighbors(A, B, 5)
    i2, s2 = _bitops.topk_neighbors(A, B, 5)
    assert (i1 == i2).all() and np.allclose(s1, s2)


def test_selected_backend_exports():
    assert kernels.BACKEND in ("cython", "python")
    assert callable(kernels.tanimoto_pair)
