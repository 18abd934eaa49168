"""Molecule/reaction parsing, canonicalization, and serialization."""

from .canon import canonical_smiles
from .mol import Atom, Bond, Formula, Molecule, formula
from .reaction import ReactionRecord, merge_agents, parse_reaction, reverse_reaction, side_formula
from .smiles import SmilesError, SmilesSyntaxError, ValenceError, parse_molecule

__all__ = [
    "Atom",
    "Bond",
    "Formula",
    "Molecule",
    "ReactionRecord",
    "SmilesError",
    "SmilesSyntaxError",
    "ValenceError",
    "canonical_smiles",
    "formula",
    "merge_agents",
    "parse_molecule",
    "parse_reaction",
    "reverse_reaction",
    "side_formula",
]
