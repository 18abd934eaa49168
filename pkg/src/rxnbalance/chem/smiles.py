"""SMILES reader: tokenization, graph construction, Kekule assignment,
implicit-hydrogen resolution, and aromaticity perception.

The reader accepts the organic subset (B C N O P S F Cl Br I, aromatic
b c n o p s), bracket atoms for everything else, ring closures (including
%nn), branches, charges, isotopes, and dot-separated components. Stereo
marks are carried opaquely and never interpreted.
"""

from __future__ import annotations

import re

import networkx as nx

from .elements import (
    AROMATIC_BRACKET,
    AROMATIC_ORGANIC,
    ELEMENTS,
    KEKULE_BASE_VALENCE,
    ORGANIC_SUBSET,
    default_valence,
)
from .mol import Atom, Bond, Molecule


class SmilesError(ValueError):
    """Base class for classified parse failures."""


class SmilesSyntaxError(SmilesError):
    """Malformed text: unbalanced brackets/rings, unknown element, bad token."""


class ValenceError(SmilesError):
    """Structurally valid text whose valences cannot be resolved."""


_BRACKET_RE = re.compile(
    r"""\[
        (?P<isotope>\d+)?
        (?P<element>\*|[A-Za-z][a-z]?)
        (?P<stereo>@@|@(?:TH|AL|SP|OH|TB)?\d*)?
        (?P<hcount>H\d*)?
        (?P<charge>\+\d+|-\d+|\++|-+)?
        (?::(?P<cls>\d+))?
    \]$""",
    re.VERBOSE,
)

_ORDER_FOR_SYMBOL = {"-": 1, "=": 2, "#": 3, "$": 4, ":": -1}
_AROMATIC_ORDER = -1  # sentinel replaced during Kekule assignment


class _AtomDraft:
    __slots__ = ("element", "charge", "isotope", "explicit_h", "aromatic_in",
                 "stereo", "bracket")

    def __init__(self, element, charge, isotope, explicit_h, aromatic_in,
                 stereo, bracket):
        self.element = element
        self.charge = charge
        self.isotope = isotope
        self.explicit_h = explicit_h      # None for bare organic-subset atoms
        self.aromatic_in = aromatic_in    # lowercase in the input
        self.stereo = stereo
        self.bracket = bracket


def _parse_bracket_atom(token: str) -> _AtomDraft:
    m = _BRACKET_RE.match(token)
    if m is None:
        raise SmilesSyntaxError(f"malformed bracket atom {token!r}")
    raw = m.group("element")
    aromatic = raw.islower()
    if aromatic and raw not in AROMATIC_BRACKET:
        raise SmilesSyntaxError(f"element {raw!r} cannot be aromatic")
    element = raw if raw == "*" else raw.capitalize()
    if element not in ELEMENTS:
        raise SmilesSyntaxError(f"unknown element {raw!r} in {token!r}")
    hcount = m.group("hcount")
    if hcount is None:
        explicit_h = 0
    elif hcount == "H":
        explicit_h = 1
    else:
        explicit_h = int(hcount[1:])
    if element == "H" and explicit_h:
        raise SmilesSyntaxError(f"hydrogen with hydrogens in {token!r}")
    charge_s = m.group("charge")
    if charge_s is None:
        charge = 0
    elif charge_s in ("+", "-") or charge_s[1:].isdigit() is False:
        charge = charge_s.count("+") - charge_s.count("-")
    else:
        charge = int(charge_s)
    isotope = int(m.group("isotope")) if m.group("isotope") else None
    return _AtomDraft(element, charge, isotope, explicit_h, aromatic,
                      m.group("stereo"), bracket=True)


def _scan(text: str):
    """Yield (kind, value) lexemes: atom/bond/open/close/ring/dot/stereo."""
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "[":
            end = text.find("]", i)
            if end < 0:
                raise SmilesSyntaxError(f"unclosed bracket at offset {i}")
            yield "atom", _parse_bracket_atom(text[i : end + 1])
            i = end + 1
        elif c == "%":
            if i + 2 >= n or not text[i + 1 : i + 3].isdigit():
                raise SmilesSyntaxError(f"bad ring marker at offset {i}")
            yield "ring", int(text[i + 1 : i + 3])
            i += 3
        elif c.isdigit():
            yield "ring", int(c)
            i += 1
        elif c in "-=#$:":
            yield "bond", _ORDER_FOR_SYMBOL[c]
            i += 1
        elif c in "/\\":
            yield "stereo_bond", c
            i += 1
        elif c == "(":
            yield "open", None
            i += 1
        elif c == ")":
            yield "close", None
            i += 1
        elif c == ".":
            yield "dot", None
            i += 1
        else:
            two = text[i : i + 2]
            if two in ("Cl", "Br"):
                yield "atom", _AtomDraft(two, 0, None, None, False, None, False)
                i += 2
            elif c in ORGANIC_SUBSET:
                yield "atom", _AtomDraft(c, 0, None, None, False, None, False)
                i += 1
            elif c in AROMATIC_ORGANIC:
                yield "atom", _AtomDraft(c.upper(), 0, None, None, True, None, False)
                i += 1
            else:
                raise SmilesSyntaxError(f"unexpected character {c!r} at offset {i}")


def parse_molecule(smiles: str) -> Molecule:
    """Parse one (possibly dot-disconnected) molecule SMILES.

    Raises SmilesSyntaxError for malformed text and ValenceError when
    implicit hydrogens or the Kekule assignment cannot be resolved.
    """
    if not smiles:
        raise SmilesSyntaxError("empty SMILES")
    if ">" in smiles:
        raise SmilesSyntaxError("reaction arrow inside molecule SMILES")

    drafts: list[_AtomDraft] = []
    bonds: dict[tuple[int, int], tuple[int, str | None]] = {}
    anchor: int | None = None
    pending_order: int | None = None
    pending_stereo: str | None = None
    branch_stack: list[int | None] = []
    open_rings: dict[int, tuple[int, int | None, str | None]] = {}

    def add_bond(i: int, j: int, order: int | None, stereo: str | None) -> None:
        key = (min(i, j), max(i, j))
        if i == j:
            raise SmilesSyntaxError(f"ring bond from atom {i} to itself")
        if key in bonds:
            raise SmilesSyntaxError(f"duplicate bond between atoms {i} and {j}")
        if order is None:
            both_aromatic = drafts[i].aromatic_in and drafts[j].aromatic_in
            order = _AROMATIC_ORDER if both_aromatic else 1
        bonds[key] = (order, stereo)

    for kind, value in _scan(smiles):
        if kind == "atom":
            idx = len(drafts)
            drafts.append(value)
            if anchor is not None:
                add_bond(anchor, idx, pending_order, pending_stereo)
            elif pending_order is not None:
                raise SmilesSyntaxError("bond symbol with no preceding atom")
            pending_order = None
            pending_stereo = None
            anchor = idx
        elif kind == "bond":
            if pending_order is not None:
                raise SmilesSyntaxError("two consecutive bond symbols")
            pending_order = value
        elif kind == "stereo_bond":
            pending_stereo = value
        elif kind == "open":
            if anchor is None:
                raise SmilesSyntaxError("branch before any atom")
            branch_stack.append(anchor)
        elif kind == "close":
            if not branch_stack:
                raise SmilesSyntaxError("unbalanced ')'")
            anchor = branch_stack.pop()
        elif kind == "dot":
            if pending_order is not None:
                raise SmilesSyntaxError("bond symbol before '.'")
            anchor = None
            pending_stereo = None
        elif kind == "ring":
            if anchor is None:
                raise SmilesSyntaxError(f"ring marker {value} before any atom")
            if value in open_rings:
                j, order0, stereo0 = open_rings.pop(value)
                order = pending_order if pending_order is not None else order0
                if (order0 is not None and pending_order is not None
                        and order0 != pending_order):
                    raise SmilesSyntaxError(
                        f"conflicting orders on ring closure {value}")
                add_bond(anchor, j, order, pending_stereo or stereo0)
            else:
                open_rings[value] = (anchor, pending_order, pending_stereo)
            pending_order = None
            pending_stereo = None

    if branch_stack:
        raise SmilesSyntaxError("unbalanced '('")
    if open_rings:
        raise SmilesSyntaxError(f"unclosed ring markers {sorted(open_rings)}")
    if pending_order is not None:
        raise SmilesSyntaxError("dangling bond symbol at end of input")
    if not drafts:
        raise SmilesSyntaxError("no atoms in SMILES")

    orders = _kekulize(drafts, bonds)
    atoms = _resolve_hydrogens(drafts, bonds, orders)
    final_bonds = tuple(
        Bond(i, j, orders[(i, j)], False, stereo)
        for (i, j), (_, stereo) in sorted(bonds.items())
    )
    mol = Molecule(tuple(atoms), final_bonds, source=smiles)
    return perceive_aromaticity(mol)


def _sigma_count(idx, drafts, bonds, treat_aromatic_as=1) -> int:
    total = 0
    for (i, j), (order, _) in bonds.items():
        if idx in (i, j):
            total += treat_aromatic_as if order == _AROMATIC_ORDER else order
    if drafts[idx].explicit_h:
        total += drafts[idx].explicit_h
    return total


def effective_valence(element: str, charge: int) -> int | None:
    """Charge-adjusted valence used by the Kekule wants-a-double-bond test.

    Electron-rich elements gain a bond per positive charge (N+ ~ C); the
    electron-deficient C/Si/B group loses one per unit of either sign
    (carbocation and carbanion are both trivalent, borohydride is 4).
    """
    base = KEKULE_BASE_VALENCE.get(element)
    if base is None:
        return None
    if element in ("C", "Si"):
        return base - abs(charge)
    if element == "B":
        return base - charge
    return base + charge


def _kekulize(drafts, bonds) -> dict[tuple[int, int], int]:
    """Replace aromatic-order bonds with an alternating single/double pattern.

    An atom takes one double bond when its charge-adjusted base valence
    exceeds its sigma framework; a perfect matching over those atoms along
    aromatic bonds must exist, otherwise the input is unkekulizable.
    """
    orders = {key: (order if order != _AROMATIC_ORDER else None)
              for key, (order, _) in bonds.items()}
    aromatic_edges = [key for key, val in orders.items() if val is None]
    if not aromatic_edges:
        return {k: v for k, v in orders.items()}

    needs_double: set[int] = set()
    touched = {i for e in aromatic_edges for i in e}
    for idx in touched:
        d = drafts[idx]
        v_eff = effective_valence(d.element, d.charge)
        if v_eff is None:
            continue  # exotic aromatic-flagged atom: leave as lone-pair donor
        if v_eff - _sigma_count(idx, drafts, bonds) >= 1:
            needs_double.add(idx)

    graph = nx.Graph(
        e for e in aromatic_edges if e[0] in needs_double and e[1] in needs_double
    )
    matching = nx.max_weight_matching(graph, maxcardinality=True)
    matched_atoms = {i for pair in matching for i in pair}
    if needs_double - matched_atoms:
        raise ValenceError(
            "cannot kekulize aromatic system "
            f"(unmatched atoms {sorted(needs_double - matched_atoms)})")
    double_edges = {(min(a, b), max(a, b)) for a, b in matching}
    for e in aromatic_edges:
        orders[e] = 2 if e in double_edges else 1
    return {k: v for k, v in orders.items()}


def _resolve_hydrogens(drafts, bonds, orders) -> list[Atom]:
    atoms: list[Atom] = []
    for idx, d in enumerate(drafts):
        if d.bracket:
            h = d.explicit_h or 0
        else:
            total = sum(order for (i, j), order in orders.items()
                        if idx in (i, j))
            valence = default_valence(d.element, total)
            if valence is None:
                raise ValenceError(
                    f"{d.element} with total bond order {total} exceeds "
                    "its default valences")
            h = valence - total
        atoms.append(Atom(d.element, d.charge, d.isotope, h,
                          aromatic=False, stereo=d.stereo))
    return atoms


# ---------------------------------------------------------------------------
# Aromaticity perception (Hueckel-style ring check on the Kekule graph)
# ---------------------------------------------------------------------------

_LONE_PAIR_DONORS = {"N", "P", "As"}
_DIVALENT_DONORS = {"O", "S", "Se", "Te"}


def _pi_contribution(mol: Molecule, idx: int, ring: set[int],
                     aromatic_atoms: set[int]) -> int | None:
    """Electrons atom `idx` donates to the ring's pi system; None = ineligible."""
    atom = mol.atoms[idx]
    total = sum(b.order for _, b in mol.neighbors(idx)) + atom.h_count
    if total > 4:
        return None  # hypervalent centers are not planar pi members
    doubles = [(j, b) for j, b in mol.neighbors(idx) if b.order == 2]
    if any(b.order >= 3 for _, b in mol.neighbors(idx)) or len(doubles) > 1:
        return None
    if len(doubles) == 1:
        partner = doubles[0][0]
        if partner in ring or partner in aromatic_atoms:
            return 1
        return 0  # exocyclic double bond: sp2 but contributes nothing
    sigma = mol.degree(idx) + atom.h_count
    if sigma > 3:
        return None
    el, q = atom.element, atom.charge
    if el in _LONE_PAIR_DONORS and q <= 0:
        return 2
    if el in _DIVALENT_DONORS and q == 0:
        return 2
    if el == "C":
        if q == -1:
            return 2
        if q == 1:
            return 0
        return None
    if el == "B":
        return 2 if q < 0 else 0
    return None


_MAX_AROMATIC_RING = 7


def perceive_aromaticity(mol: Molecule) -> Molecule:
    """Return `mol` with aromatic flags set on atoms/bonds of Hueckel rings.

    Perception is structural (independent of how the input was drawn), which
    makes canonical output invariant across Kekule forms. Rings are the
    simple cycles up to size 7; marking iterates to a fixpoint so fused
    systems whose Kekule pattern crosses ring borders still resolve.
    Macrocyclic pi systems (azulene's 10-perimeter and the like) are outside
    this perception, a declared corner-case divergence.
    """
    if not mol.bonds:
        return mol
    graph = nx.Graph((b.i, b.j) for b in mol.bonds)
    cycles = [c for c in nx.simple_cycles(graph, length_bound=_MAX_AROMATIC_RING)
              if len(c) >= 3]
    if not cycles:
        return mol

    aromatic_atoms: set[int] = set()
    aromatic_edges: set[tuple[int, int]] = set()
    remaining = cycles
    changed = True
    while changed and remaining:
        changed = False
        still = []
        for cycle in remaining:
            ring = set(cycle)
            contribs = [_pi_contribution(mol, i, ring, aromatic_atoms)
                        for i in cycle]
            if any(c is None for c in contribs):
                continue  # permanently ineligible ring
            if sum(contribs) % 4 == 2:
                aromatic_atoms |= ring
                for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                    aromatic_edges.add((min(a, b), max(a, b)))
                changed = True
            else:
                still.append(cycle)
        remaining = still

    if not aromatic_atoms:
        return mol
    if not _rekekulizable(mol, aromatic_atoms, aromatic_edges):
        return mol  # lowercase output would not reparse: keep Kekule form
    atoms = tuple(
        a if i not in aromatic_atoms
        else Atom(a.element, a.charge, a.isotope, a.h_count, True, a.stereo)
        for i, a in enumerate(mol.atoms)
    )
    bonds = tuple(
        Bond(b.i, b.j, b.order, (b.i, b.j) in aromatic_edges, b.stereo)
        for b in mol.bonds
    )
    return Molecule(atoms, bonds, source=mol.source)


def _rekekulizable(mol: Molecule, aromatic_atoms: set[int],
                   aromatic_edges: set[tuple[int, int]]) -> bool:
    """Would a reader of the aromatic-flagged serialization find a Kekule
    assignment? Mirrors the reader's wants-a-double test and matching."""
    wants: set[int] = set()
    for idx in aromatic_atoms:
        a = mol.atoms[idx]
        sigma = sum(
            1 if (min(idx, j), max(idx, j)) in aromatic_edges else b.order
            for j, b in mol.neighbors(idx))
        bare = (a.isotope is None and a.charge == 0
                and a.element.lower() in AROMATIC_ORGANIC)
        if not bare:
            sigma += a.h_count
        else:
            # a bare atom whose hydrogen count the reader cannot infer will
            # be bracketed by the writer, making its hydrogens explicit
            v_eff = effective_valence(a.element, a.charge)
            want = v_eff is not None and v_eff - sigma >= 1
            total = sigma + (1 if want else 0)
            valence = default_valence(a.element, total)
            if valence is None or valence - total != a.h_count:
                sigma += a.h_count
        v_eff = effective_valence(a.element, a.charge)
        if v_eff is None:
            continue
        if v_eff - sigma >= 1:
            wants.add(idx)
    graph = nx.Graph(
        e for e in aromatic_edges if e[0] in wants and e[1] in wants)
    matching = nx.max_weight_matching(graph, maxcardinality=True)
    matched = {i for pair in matching for i in pair}
    return not (wants - matched)
