"""Atom/charge balance accounting between reaction sides."""

from __future__ import annotations

from dataclasses import dataclass, field

from .chem import ReactionRecord, merge_agents, side_formula


@dataclass(frozen=True)
class ElementDelta:
    """Signed per-element difference, reactant side minus product side.

    Positive entries mean the product side is short of that element;
    negative entries mean the reactant side is. Hydrogen is included; the
    aggregate counters can exclude it via `missing_atoms(include_hydrogen=False)`
    because published per-reaction averages do not say which convention they
    use.
    """

    per_element: dict[str, int] = field(default_factory=dict)
    charge_delta: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "per_element",
            {el: n for el, n in self.per_element.items() if n != 0})

    def missing_atoms(self, include_hydrogen: bool = True) -> int:
        return sum(abs(n) for el, n in self.per_element.items()
                   if include_hydrogen or el != "H")

    @property
    def missing_carbons(self) -> int:
        return abs(self.per_element.get("C", 0))

    def is_zero(self) -> bool:
        return not self.per_element and self.charge_delta == 0

    def __neg__(self) -> "ElementDelta":
        return ElementDelta({el: -n for el, n in self.per_element.items()},
                            -self.charge_delta)


def element_delta(r: ReactionRecord) -> ElementDelta:
    """Per-element and net-charge difference of `r`, agents merged first."""
    merged = merge_agents(r)
    left = side_formula(merged.reactants)
    right = side_formula(merged.products)
    elements = set(left.counts) | set(right.counts)
    per_element = {el: left[el] - right[el] for el in sorted(elements)}
    return ElementDelta(per_element, left.net_charge - right.net_charge)


def is_balanced(r: ReactionRecord) -> bool:
    return element_delta(r).is_zero()


def balance_signature(delta: ElementDelta | ReactionRecord) -> str:
    """Canonical text rendering of a delta, e.g. ``H:+2,O:-1|q:0``.

    Balanced reactions render as the sentinel ``0|q:0``. Equal signatures
    if and only if equal deltas.
    """
    if isinstance(delta, ReactionRecord):
        delta = element_delta(delta)
    if not delta.per_element:
        body = "0"
    else:
        body = ",".join(f"{el}:{n:+d}" for el, n in sorted(delta.per_element.items()))
    return f"{body}|q:{delta.charge_delta:+d}"
