"""Independent test oracles.

`char_formula` recomputes molecular formulas by direct character-level
summation over the SMILES text, sharing no code with the package's graph
pipeline: its own scanner, its own branch/ring bookkeeping, its own
valence table (re-declared literally). The random generators emit
kekulized/aliphatic structures only, so the oracle never needs aromatic
perception.
"""

from __future__ import annotations

import random
import re

# Deliberately re-declared, not imported from the package under test.
ORACLE_VALENCES = {
    "B": (3,), "C": (4,), "N": (3,), "O": (2,), "P": (3, 5),
    "S": (2, 4, 6), "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,),
}

_BRACKET = re.compile(
    r"\[(\d+)?([A-Za-z][a-z]?|\*)(@+[A-Z]{0,2}\d*)?(H\d*)?((?:\+\d+|-\d+|\++|-+))?(?::\d+)?\]"
)
_BOND_ORDER = {"-": 1, "=": 2, "#": 3, "$": 4}


def char_formula(smiles: str) -> tuple[dict[str, int], int]:
    """(element counts incl. implicit H, net charge) by text scanning."""
    counts: dict[str, int] = {}
    charge = 0
    # per-atom record: (element, bracket?, explicit_h, bond_order_sum index)
    atoms: list[list] = []  # [element, bracket, explicit_h]
    bond_sum: list[int] = []
    prev: int | None = None
    pending = 1
    stack: list[int | None] = []
    rings: dict[str, tuple[int, int | None]] = {}

    def bump(el: str, n: int = 1) -> None:
        counts[el] = counts.get(el, 0) + n

    def connect(a: int, b: int, order: int) -> None:
        bond_sum[a] += order
        bond_sum[b] += order

    i = 0
    while i < len(smiles):
        ch = smiles[i]
        if ch == "[":
            m = _BRACKET.match(smiles, i)
            assert m, f"oracle cannot scan bracket at {i} in {smiles!r}"
            isotope, el, _stereo, hpart, chpart = m.group(1, 2, 3, 4, 5)
            el = el if el == "*" else el[0].upper() + el[1:]
            h = 0 if hpart is None else (1 if hpart == "H" else int(hpart[1:]))
            q = 0
            if chpart:
                if chpart in ("+", "-") or not chpart[1:].lstrip("+-").isdigit():
                    q = chpart.count("+") - chpart.count("-")
                else:
                    q = int(chpart)
            atoms.append([el, True, h])
            bond_sum.append(0)
            idx = len(atoms) - 1
            if prev is not None:
                connect(prev, idx, pending)
            prev, pending = idx, 1
            i = m.end()
        elif smiles[i : i + 2] in ("Cl", "Br"):
            atoms.append([smiles[i : i + 2], False, 0])
            bond_sum.append(0)
            idx = len(atoms) - 1
            if prev is not None:
                connect(prev, idx, pending)
            prev, pending = idx, 1
            i += 2
        elif ch in "BCNOPSFI":
            atoms.append([ch, False, 0])
            bond_sum.append(0)
            idx = len(atoms) - 1
            if prev is not None:
                connect(prev, idx, pending)
            prev, pending = idx, 1
            i += 1
        elif ch in "-=#$":
            pending = _BOND_ORDER[ch]
            i += 1
        elif ch in "/\\":
            i += 1
        elif ch == "(":
            stack.append(prev)
            i += 1
        elif ch == ")":
            prev = stack.pop()
            i += 1
        elif ch == ".":
            prev = None
            pending = 1
            i += 1
        elif ch == "%":
            key = smiles[i : i + 3]
            i += 3
            _ring(rings, key, prev, pending, connect)
            pending = 1
        elif ch.isdigit():
            _ring(rings, ch, prev, pending, connect)
            pending = 1
            i += 1
        else:
            raise AssertionError(f"oracle cannot scan {ch!r} in {smiles!r}")

    assert not rings, f"unclosed rings in {smiles!r}"
    for (el, bracket, h), total in zip(atoms, bond_sum):
        bump(el)
        if bracket:
            if h:
                bump("H", h)
        else:
            valence = next(v for v in ORACLE_VALENCES[el] if v >= total)
            bump("H", valence - total)
    # charges only exist in brackets; rescan for them
    for m in _BRACKET.finditer(smiles):
        chpart = m.group(5)
        if not chpart:
            continue
        if chpart in ("+", "-") or not chpart[1:].lstrip("+-").isdigit():
            charge += chpart.count("+") - chpart.count("-")
        else:
            charge += int(chpart)
    return {el: n for el, n in counts.items() if n}, charge


def _ring(rings, key, prev, pending, connect) -> None:
    assert prev is not None
    if key in rings:
        other, order0 = rings.pop(key)
        order = order0 if order0 is not None else (pending if pending else 1)
        connect(prev, other, order)
    else:
        rings[key] = (prev, pending if pending != 1 else None)


def char_reaction_delta(rxn: str) -> tuple[dict[str, int], int]:
    """Reactants+agents minus products, by character-level summation."""
    left_text, agents_text, right_text = rxn.split(">")
    totals: dict[str, int] = {}
    charge = 0
    for text, sign in ((left_text, 1), (agents_text, 1), (right_text, -1)):
        for frag in text.split("."):
            frag = frag.strip()
            if not frag:
                continue
            counts, q = char_formula(frag)
            for el, n in counts.items():
                totals[el] = totals.get(el, 0) + sign * n
            charge += sign * q
    return {el: n for el, n in totals.items() if n}, charge


# ---------------------------------------------------------------------------
# Random structure generators (aliphatic/kekulized only, by construction)
# ---------------------------------------------------------------------------

# (token text, construction capacity). Brackets carry their own H/charge, so
# capacity is just a construction bound, not a valence claim.
_ATOM_POOL = (
    [("C", 4)] * 10 + [("N", 3), ("O", 2)] * 3
    + [("S", 6), ("P", 5), ("F", 1), ("Cl", 1), ("Br", 1), ("I", 1), ("B", 3)]
    + [("[13CH3]", 1), ("[O-]", 1), ("[Se]", 2), ("[2H]", 1), ("[Si]", 4)]
)
_STANDALONE_POOL = ["[Na+]", "[K+]", "[Cl-]", "[Br-]", "[OH-]", "[NH4+]",
                    "[13CH4]", "[Fe]", "[Mg+2]", "[CH3-]", "[H+]", "[H][H]"]
_BOND_SYMBOL = {1: "", 2: "=", 3: "#"}


def random_molecule(rng: random.Random, max_atoms: int = 12) -> str:
    """Random valid SMILES built as a tree (plus at most one ring) with
    explicit capacity bookkeeping, then rendered trivially."""
    if rng.random() < 0.08:
        return rng.choice(_STANDALONE_POOL)
    n_atoms = rng.randint(1, max_atoms)
    texts: list[str] = []
    caps: list[int] = []
    parent: list[int | None] = []
    order_up: list[int] = []

    def add(el: str, cap: int, p: int | None, order: int) -> None:
        texts.append(el)
        caps.append(cap - order)
        parent.append(p)
        order_up.append(order)
        if p is not None:
            caps[p] -= order

    el, cap = rng.choice(_ATOM_POOL)
    add(el, cap, None, 0)
    for _ in range(n_atoms - 1):
        hosts = [i for i in range(len(texts)) if caps[i] >= 1]
        if not hosts:
            break
        p = rng.choice(hosts)
        el, cap = rng.choice(_ATOM_POOL)
        max_order = min(caps[p], cap, 3)
        order = 1
        if max_order >= 2 and rng.random() < 0.20:
            order = 2
        elif max_order >= 3 and rng.random() < 0.08:
            order = 3
        add(el, cap, p, order)

    ring: tuple[int, int] | None = None
    if len(texts) >= 4 and rng.random() < 0.35:
        cands = [i for i in range(len(texts)) if caps[i] >= 1]
        rng.shuffle(cands)
        for ai in range(len(cands)):
            for bi in range(ai + 1, len(cands)):
                a, b = sorted((cands[ai], cands[bi]))
                if parent[b] != a:
                    ring = (a, b)
                    break
            if ring:
                break
        if ring:
            caps[ring[0]] -= 1
            caps[ring[1]] -= 1

    children: dict[int, list[int]] = {}
    for i in range(1, len(texts)):
        children.setdefault(parent[i], []).append(i)

    def render(i: int) -> str:
        s = texts[i]
        if ring and i in ring:
            s += "1"
        kids = children.get(i, [])
        parts = []
        for k, c in enumerate(kids):
            seg = _BOND_SYMBOL[order_up[c]] + render(c)
            parts.append(f"({seg})" if k < len(kids) - 1 else seg)
        return s + "".join(parts)

    return render(0)


def random_reaction(rng: random.Random) -> str:
    reactants = [random_molecule(rng) for _ in range(rng.randint(1, 3))]
    agents = [random_molecule(rng) for _ in range(rng.randint(0, 2))]
    products = [random_molecule(rng) for _ in range(rng.randint(1, 3))]
    return f"{'.'.join(reactants)}>{'.'.join(agents)}>{'.'.join(products)}"
