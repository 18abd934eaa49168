"""Transformation-centric reaction fingerprints.

The fingerprint is the symmetric difference of the circular-environment
string sets of the two reaction sides (agents merged onto reactants),
hashed onto a fixed-width bit vector. Environments are Morgan-style
iterated neighborhood identifiers of radii 0..radius_max, so the bits
describe what changes in the reaction while staying insensitive to
untouched scaffold, and are invariant to input atom order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import kernels
from .chem import ReactionRecord, merge_agents
from .chem.mol import Molecule

DEFAULT_RADIUS = 3
DEFAULT_BITS = 2048


def _stable_hash64(s: str) -> int:
    return int.from_bytes(hashlib.blake2b(s.encode(), digest_size=8).digest(), "big")


def environment_strings(mol: Molecule, radius_max: int) -> set[str]:
    """Canonical circular-environment identifiers of radii 0..radius_max."""
    inv = {
        i: f"{a.element}|{a.charge}|{a.isotope or 0}|{mol.degree(i)}|"
           f"{a.h_count}|{int(a.aromatic)}"
        for i, a in enumerate(mol.atoms)
    }
    out = {f"0~{v}" for v in inv.values()}
    for radius in range(1, radius_max + 1):
        nxt: dict[int, str] = {}
        for i in inv:
            nbrs = sorted(
                f"{9 if b.aromatic else b.order}:{inv[j]}"
                for j, b in mol.neighbors(i)
            )
            digest = hashlib.blake2b(
                (inv[i] + "||" + ";".join(nbrs)).encode(), digest_size=8
            ).hexdigest()
            nxt[i] = digest
        inv = nxt
        out |= {f"{radius}~{v}" for v in inv.values()}
    return out


@dataclass(frozen=True)
class ReactionFingerprint:
    """Fixed-width bit vector packed into uint64 words."""

    words: np.ndarray  # shape (n_bits // 64,), dtype uint64, read-only
    n_bits: int

    @property
    def popcount(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def on_bits(self) -> list[int]:
        out = []
        for w, word in enumerate(self.words):
            word = int(word)
            while word:
                low = word & -word
                out.append(w * 64 + low.bit_length() - 1)
                word ^= low
        return out

    @classmethod
    def from_bits(cls, bits, n_bits: int = DEFAULT_BITS) -> "ReactionFingerprint":
        words = np.zeros(n_bits // 64, dtype=np.uint64)
        for b in bits:
            words[b // 64] |= np.uint64(1) << np.uint64(b % 64)
        words.setflags(write=False)
        return cls(words, n_bits)


def fingerprint(r: ReactionRecord, radius_max: int = DEFAULT_RADIUS,
                n_bits: int = DEFAULT_BITS) -> ReactionFingerprint:
    if n_bits % 64:
        raise ValueError("n_bits must be a multiple of 64")
    merged = merge_agents(r)
    left: set[str] = set()
    for m in merged.reactants:
        left |= environment_strings(m, radius_max)
    right: set[str] = set()
    for m in merged.products:
        right |= environment_strings(m, radius_max)
    bits = {_stable_hash64(s) % n_bits for s in left ^ right}
    return ReactionFingerprint.from_bits(bits, n_bits)


def fold(fp: ReactionFingerprint, n_bits: int) -> ReactionFingerprint:
    """XOR-fold to a narrower width (both multiples of 64)."""
    if n_bits % 64 or fp.n_bits % n_bits:
        raise ValueError("folded width must divide the original width")
    words = fp.words.reshape(-1, n_bits // 64)
    out = np.bitwise_xor.reduce(words, axis=0)
    out.setflags(write=False)
    return ReactionFingerprint(out, n_bits)


class WidthMismatch(ValueError):
    pass


def tanimoto(a: ReactionFingerprint, b: ReactionFingerprint) -> float:
    """|a AND b| / |a OR b|; defined as 1.0 when both vectors are all-zero."""
    if a.n_bits != b.n_bits:
        raise WidthMismatch(f"{a.n_bits} != {b.n_bits}")
    return kernels.tanimoto_pair(a.words, b.words)


def pack_matrix(fps: list[ReactionFingerprint]) -> np.ndarray:
    """Stack fingerprints into one (n, words) uint64 matrix for the kernels."""
    if not fps:
        return np.zeros((0, DEFAULT_BITS // 64), dtype=np.uint64)
    width = fps[0].n_bits
    for fp in fps:
        if fp.n_bits != width:
            raise WidthMismatch("mixed fingerprint widths")
    return np.vstack([fp.words for fp in fps])
