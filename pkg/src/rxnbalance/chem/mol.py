"""Molecular graph types: Atom, Bond, Molecule, and Formula."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Atom:
    """A resolved atom: hydrogen count and aromaticity are final."""

    element: str
    charge: int = 0
    isotope: int | None = None
    h_count: int = 0
    aromatic: bool = False
    # Opaque stereo mark from the input (@, @@, ...); dropped on canonical output.
    stereo: str | None = None


@dataclass(frozen=True)
class Bond:
    """Bond between atom indices i < j with a Kekule order of 1, 2 or 3.

    `aromatic` marks bonds inside a perceived aromatic ring; the Kekule order
    is retained so valence arithmetic stays integral.
    """

    i: int
    j: int
    order: int = 1
    aromatic: bool = False
    stereo: str | None = None  # opaque /- or \\-mark from the input


@dataclass(frozen=True)
class Formula:
    """Element counts (implicit hydrogens included) plus net formal charge."""

    counts: dict[str, int] = field(default_factory=dict)
    net_charge: int = 0

    def __post_init__(self) -> None:
        # Invariant: no zero entries.
        object.__setattr__(
            self, "counts", {el: n for el, n in self.counts.items() if n != 0}
        )

    def __add__(self, other: "Formula") -> "Formula":
        merged = dict(self.counts)
        for el, n in other.counts.items():
            merged[el] = merged.get(el, 0) + n
        return Formula(merged, self.net_charge + other.net_charge)

    def __getitem__(self, element: str) -> int:
        return self.counts.get(element, 0)

    def total_atoms(self, include_hydrogen: bool = True) -> int:
        return sum(
            n for el, n in self.counts.items() if include_hydrogen or el != "H"
        )

    def as_text(self) -> str:
        """Hill-order rendering, e.g. C2H6O or H2O4S."""
        parts = []
        for el in sorted(self.counts, key=_hill_key):
            n = self.counts[el]
            parts.append(el if n == 1 else f"{el}{n}")
        return "".join(parts)


def _hill_key(element: str) -> tuple[int, str]:
    order = {"C": 0, "H": 1}
    return (order.get(element, 2), element)


class Molecule:
    """Immutable molecular graph.

    `source` keeps the original SMILES text (stereo marks and all) when the
    molecule came from a parser; canonical serialization ignores it.
    """

    __slots__ = ("atoms", "bonds", "source", "_neighbors", "_canonical")

    def __init__(
        self,
        atoms: tuple[Atom, ...],
        bonds: tuple[Bond, ...],
        source: str | None = None,
    ):
        n = len(atoms)
        seen: set[tuple[int, int]] = set()
        for b in bonds:
            if not (0 <= b.i < n and 0 <= b.j < n):
                raise ValueError(f"bond endpoint out of range: {b}")
            if b.i == b.j:
                raise ValueError(f"self-bond on atom {b.i}")
            key = (min(b.i, b.j), max(b.i, b.j))
            if key in seen:
                raise ValueError(f"duplicate bond {key}")
            seen.add(key)
        self.atoms = atoms
        self.bonds = bonds
        self.source = source
        nbrs: list[list[tuple[int, Bond]]] = [[] for _ in range(n)]
        for b in bonds:
            nbrs[b.i].append((b.j, b))
            nbrs[b.j].append((b.i, b))
        self._neighbors = tuple(tuple(x) for x in nbrs)
        self._canonical: str | None = None

    def __len__(self) -> int:
        return len(self.atoms)

    def neighbors(self, idx: int) -> tuple[tuple[int, Bond], ...]:
        return self._neighbors[idx]

    def degree(self, idx: int) -> int:
        return len(self._neighbors[idx])

    def formula(self) -> Formula:
        counts: dict[str, int] = {}
        charge = 0
        for a in self.atoms:
            counts[a.element] = counts.get(a.element, 0) + 1
            if a.h_count:
                counts["H"] = counts.get("H", 0) + a.h_count
            charge += a.charge
        return Formula(counts, charge)

    def components(self) -> list[list[int]]:
        """Connected components as sorted atom-index lists."""
        n = len(self.atoms)
        seen = [False] * n
        out: list[list[int]] = []
        for start in range(n):
            if seen[start]:
                continue
            stack, comp = [start], []
            seen[start] = True
            while stack:
                v = stack.pop()
                comp.append(v)
                for w, _ in self._neighbors[v]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            out.append(sorted(comp))
        return out


def formula(m: Molecule) -> Formula:
    """Element counts of `m` including implicit hydrogens, plus net charge."""
    return m.formula()
