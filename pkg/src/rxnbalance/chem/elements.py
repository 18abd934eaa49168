"""Element symbols and default-valence tables used by the SMILES machinery."""

from __future__ import annotations

# Periodic table symbols (1..118) plus "*" as an explicit wildcard/unknown
# placeholder accepted only inside brackets.
ELEMENTS = frozenset(
    """
    H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni
    Cu Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I
    Xe Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt
    Au Hg Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr
    Rf Db Sg Bh Hs Mt Ds Rg Cn Nh Fl Mc Lv Ts Og
    """.split()
) | {"*"}

# Shorthand atoms allowed outside brackets.
ORGANIC_SUBSET = frozenset("B C N O P S F Cl Br I".split())
AROMATIC_ORGANIC = frozenset("b c n o p s".split())

# Lowercase element spellings accepted inside brackets, e.g. [se].
AROMATIC_BRACKET = frozenset("b c n o p s se as te si".split())

# Default valences for implicit-hydrogen resolution of organic-subset atoms.
# Multi-valent entries are tried smallest-first.
DEFAULT_VALENCES: dict[str, tuple[int, ...]] = {
    "B": (3,),
    "C": (4,),
    "N": (3,),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

# Base valence used when deciding whether an aromatic atom takes a double
# bond in the Kekule assignment (charge-adjusted: V_eff = base + charge).
KEKULE_BASE_VALENCE: dict[str, int] = {
    "B": 3,
    "C": 4,
    "N": 3,
    "O": 2,
    "P": 3,
    "S": 2,
    "Se": 2,
    "As": 3,
    "Te": 2,
    "Si": 4,
}


def default_valence(element: str, total_order: int) -> int | None:
    """Smallest default valence >= total_order, or None if over all of them."""
    valences = DEFAULT_VALENCES.get(element)
    if valences is None:
        return None
    for v in valences:
        if total_order <= v:
            return v
    return None
