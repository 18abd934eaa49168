"""Canonical SMILES writer.

Atom ranks come from iterative partition refinement over
(element, charge, isotope, degree, H-count, aromaticity); remaining ties are
resolved by individualizing each candidate in the lowest ambiguous cell and
keeping the lexicographically smallest rendered string. Internal consistency
is the contract: the output is deterministic and invariant under input atom
order, not aligned with any external toolkit. Stereo marks are dropped.
"""

from __future__ import annotations

from .elements import AROMATIC_BRACKET, AROMATIC_ORGANIC, ORGANIC_SUBSET, default_valence
from .mol import Bond, Molecule
from .smiles import effective_valence

_BOND_SYMBOL = {1: "", 2: "=", 3: "#", 4: "$"}


def canonical_smiles(mol: Molecule) -> str:
    """Deterministic, atom-order-invariant serialization of `mol`.

    Dot-disconnected components are canonicalized independently and joined
    in sorted order.
    """
    if mol._canonical is None:
        parts = sorted(_canonical_component(mol, comp) for comp in mol.components())
        mol._canonical = ".".join(parts)
    return mol._canonical


def _canonical_component(mol: Molecule, atoms: list[int]) -> str:
    ranks = _refine(mol, atoms, _initial_ranks(mol, atoms))
    return _search_min(mol, atoms, ranks)


def _initial_ranks(mol: Molecule, atoms: list[int]) -> dict[int, int]:
    def key(i: int):
        a = mol.atoms[i]
        return (a.element, a.charge, a.isotope or 0, mol.degree(i),
                a.h_count, a.aromatic)

    ordered = sorted({key(i) for i in atoms})
    index = {k: r for r, k in enumerate(ordered)}
    return {i: index[key(i)] for i in atoms}


def _bond_key(b: Bond) -> int:
    return 9 if b.aromatic else b.order


def _refine(mol: Molecule, atoms: list[int], ranks: dict[int, int]) -> dict[int, int]:
    n_cells = len(set(ranks.values()))
    while True:
        def key(i: int):
            nbr = sorted((_bond_key(b), ranks[j]) for j, b in mol.neighbors(i))
            return (ranks[i], tuple(nbr))

        ordered = sorted({key(i) for i in atoms})
        index = {k: r for r, k in enumerate(ordered)}
        ranks = {i: index[key(i)] for i in atoms}
        if len(ordered) == n_cells:
            return ranks
        n_cells = len(ordered)


def _search_min(mol: Molecule, atoms: list[int], ranks: dict[int, int]) -> str:
    # Branch over every member of the lowest tied cell; equivalent members
    # render identical strings, so min() is order-invariant. Exponential only
    # for graphs far more symmetric than reaction corpora contain.
    cells: dict[int, list[int]] = {}
    for i in atoms:
        cells.setdefault(ranks[i], []).append(i)
    tied = [r for r, members in cells.items() if len(members) > 1]
    if not tied:
        return _render(mol, atoms, ranks)
    cell = cells[min(tied)]
    best: str | None = None
    for chosen in cell:
        bumped = {i: (r * 2 + (0 if i == chosen else 1)) for i, r in ranks.items()}
        candidate = _search_min(mol, atoms, _refine(mol, atoms, bumped))
        if best is None or candidate < best:
            best = candidate
    return best


def _render(mol: Molecule, atoms: list[int], ranks: dict[int, int]) -> str:
    root = min(atoms, key=lambda i: ranks[i])

    # Pass 1: DFS in rank order. Undirected lazy DFS yields tree edges plus
    # back edges only, each back edge discovered at its later endpoint.
    visited = {root}
    emit_pos = {root: 0}
    tree_children: dict[int, list[int]] = {i: [] for i in atoms}
    back_edges: list[tuple[int, int]] = []  # (earlier, later) in emit order
    seen_edges: set[tuple[int, int]] = set()

    def nbr_iter(v: int):
        return iter(sorted((w for w, _ in mol.neighbors(v)),
                           key=lambda w: ranks[w]))

    stack = [(root, nbr_iter(root))]
    while stack:
        v, it = stack[-1]
        for w in it:
            edge = (min(v, w), max(v, w))
            if edge in seen_edges:
                continue
            seen_edges.add(edge)
            if w in visited:
                back_edges.append((w, v))
            else:
                visited.add(w)
                emit_pos[w] = len(emit_pos)
                tree_children[v].append(w)
                stack.append((w, nbr_iter(w)))
                break
        else:
            stack.pop()

    open_at: dict[int, list[tuple[int, int]]] = {}
    close_at: dict[int, list[tuple[int, int]]] = {}
    for earlier, later in back_edges:
        open_at.setdefault(earlier, []).append((earlier, later))
        close_at.setdefault(later, []).append((earlier, later))
    for lst in open_at.values():
        lst.sort(key=lambda e: emit_pos[e[1]])
    for lst in close_at.values():
        lst.sort(key=lambda e: emit_pos[e[0]])

    bond_lookup = {(min(b.i, b.j), max(b.i, b.j)): b for b in mol.bonds}
    ring_digit: dict[tuple[int, int], int] = {}
    in_use: set[int] = set()
    out: list[str] = []

    def bond_symbol(b: Bond) -> str:
        if b.aromatic:
            return ""
        if b.order == 1 and mol.atoms[b.i].aromatic and mol.atoms[b.j].aromatic:
            return "-"  # single bond between aromatic atoms must be explicit
        return _BOND_SYMBOL[b.order]

    def digit_text(d: int) -> str:
        return str(d) if d < 10 else f"%{d:02d}"

    def emit(v: int, incoming: Bond | None) -> None:
        if incoming is not None:
            out.append(bond_symbol(incoming))
        out.append(_atom_text(mol, v))
        for e in open_at.get(v, ()):
            d = 1
            while d in in_use:
                d += 1
            in_use.add(d)
            ring_digit[e] = d
            out.append(bond_symbol(bond_lookup[(min(e), max(e))]) + digit_text(d))
        for e in close_at.get(v, ()):
            d = ring_digit.pop(e)
            in_use.discard(d)
            out.append(digit_text(d))
        children = tree_children[v]
        for k, w in enumerate(children):
            b = bond_lookup[(min(v, w), max(v, w))]
            if k < len(children) - 1:
                out.append("(")
                emit(w, b)
                out.append(")")
            else:
                emit(w, b)

    emit(root, None)
    return "".join(out)


def _atom_text(mol: Molecule, idx: int) -> str:
    a = mol.atoms[idx]
    sym = a.element.lower() if a.aromatic else a.element

    plain_allowed = (
        a.isotope is None
        and a.charge == 0
        and (a.element in ORGANIC_SUBSET if not a.aromatic
             else sym in AROMATIC_ORGANIC)
    )
    if plain_allowed and _inferred_h(mol, idx) == a.h_count:
        return sym

    if a.aromatic and sym not in AROMATIC_BRACKET:
        sym = a.element  # no lowercase spelling: keep uppercase in brackets
    parts = ["["]
    if a.isotope is not None:
        parts.append(str(a.isotope))
    parts.append(sym)
    if a.h_count == 1:
        parts.append("H")
    elif a.h_count > 1:
        parts.append(f"H{a.h_count}")
    if a.charge == 1:
        parts.append("+")
    elif a.charge == -1:
        parts.append("-")
    elif a.charge > 0:
        parts.append(f"+{a.charge}")
    elif a.charge < 0:
        parts.append(str(a.charge))
    parts.append("]")
    return "".join(parts)


def _inferred_h(mol: Molecule, idx: int) -> int | None:
    """Hydrogen count a reader would infer for this atom written bare."""
    a = mol.atoms[idx]
    if a.aromatic:
        sigma = sum(1 if b.aromatic else b.order for _, b in mol.neighbors(idx))
        v_eff = effective_valence(a.element, a.charge)
        if v_eff is None:
            return None
        total = sigma + (1 if v_eff - sigma >= 1 else 0)
    else:
        total = sum(b.order for _, b in mol.neighbors(idx))
    valence = default_valence(a.element, total)
    if valence is None:
        return None
    return valence - total
