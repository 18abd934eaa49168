"""Reaction SMILES: the three-part record and its (de)serialization.

Format: ``reactants > agents > products`` with ``.`` separating molecules
inside each part. Both separators are structural only at the top nesting
level; inside brackets they never occur in valid SMILES anyway.
"""

from __future__ import annotations

from dataclasses import dataclass

from .canon import canonical_smiles
from .mol import Formula, Molecule
from .smiles import SmilesError, SmilesSyntaxError, parse_molecule

_PART_NAMES = ("reactant", "agent", "product")


@dataclass(frozen=True)
class ReactionRecord:
    """Multisets of parsed molecules for each side, plus an opaque id."""

    reactants: tuple[Molecule, ...]
    agents: tuple[Molecule, ...]
    products: tuple[Molecule, ...]
    id: str = ""

    def serialize(self, canonical: bool = True) -> str:
        """One-line reaction SMILES.

        Canonical mode renders every molecule canonically (stereo dropped)
        and sorts within each side; raw mode keeps the original molecule
        texts and order, preserving stereo marks.
        """
        def part(mols: tuple[Molecule, ...]) -> str:
            if canonical:
                return ".".join(sorted(canonical_smiles(m) for m in mols))
            return ".".join(m.source if m.source else canonical_smiles(m)
                            for m in mols)

        return f"{part(self.reactants)}>{part(self.agents)}>{part(self.products)}"

    def side_multiset(self, side: str, merged: bool = True) -> dict[str, int]:
        """Canonical-SMILES multiset of one side; agents fold into reactants
        when `merged`."""
        mols = getattr(self, side)
        if side == "reactants" and merged:
            mols = mols + self.agents
        counts: dict[str, int] = {}
        for m in mols:
            s = canonical_smiles(m)
            counts[s] = counts.get(s, 0) + 1
        return counts


def parse_reaction(rxn_smiles: str, id: str = "") -> ReactionRecord:
    """Parse a reaction SMILES with exactly two ``>`` separators.

    Molecule parse failures are re-raised with the fragment position
    (side name and index) prepended.
    """
    text = rxn_smiles.strip()
    parts = text.split(">")
    if len(parts) != 3:
        raise SmilesSyntaxError(
            f"expected 2 '>' separators, found {text.count('>')}")
    sides: list[tuple[Molecule, ...]] = []
    for name, part in zip(_PART_NAMES, parts):
        mols = []
        for k, frag in enumerate(part.split(".")):
            frag = frag.strip()
            if not frag:
                continue
            try:
                mols.append(parse_molecule(frag))
            except SmilesError as exc:
                raise type(exc)(f"{name} {k + 1} ({frag!r}): {exc}") from exc
        sides.append(tuple(mols))
    return ReactionRecord(sides[0], sides[1], sides[2], id=id)


def merge_agents(r: ReactionRecord) -> ReactionRecord:
    """Move agents onto the reactant side (the artifact's convention)."""
    if not r.agents:
        return r
    return ReactionRecord(r.reactants + r.agents, (), r.products, id=r.id)


def reverse_reaction(r: ReactionRecord) -> ReactionRecord:
    return ReactionRecord(r.products, r.agents, r.reactants, id=r.id)


def side_formula(mols: tuple[Molecule, ...]) -> Formula:
    total = Formula()
    for m in mols:
        total = total + m.formula()
    return total
