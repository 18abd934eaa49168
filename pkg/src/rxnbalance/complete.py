"""Rule-based completion baseline for carbon-balanced reactions.

Adds small molecules/ions chosen from a rule library to whichever side the
element delta says is short, applying the highest-priority covered rule
greedily. Reactions missing carbon are declined immediately: fragment
reconstruction is a different algorithm family and out of this baseline's
reach. Failure is a value (solved=False), never an exception.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .balance import ElementDelta, element_delta, is_balanced
from .chem import ReactionRecord, canonical_smiles, merge_agents, parse_molecule
from .chem.smiles import SmilesError
from .equivalence import RuleError


@dataclass(frozen=True)
class CompletionRule:
    """Trigger pattern plus the molecules that exactly cancel it.

    Trigger entries are signed like ElementDelta (positive: product side is
    short, so additions go to the products; negative: reactant side).
    All entries of one rule share a sign.
    """

    trigger: dict[str, int]
    charge: int
    additions: tuple[str, ...]  # canonical SMILES, one entry per molecule
    priority: int
    confidence: float
    line: str

    @property
    def rule_id(self) -> str:
        return f"p{self.priority}"

    @property
    def side(self) -> str:
        # Element entries determine the short side; the charge sign floats
        # (a missing reactant-side anion gives delta {El:-1, q:+1}).
        return "products" if next(iter(self.trigger.values())) > 0 else "reactants"

    def covers(self, delta: ElementDelta) -> bool:
        for el, need in self.trigger.items():
            have = delta.per_element.get(el, 0)
            if need * have <= 0 or abs(need) > abs(have):
                return False
        if self.charge:
            have_q = delta.charge_delta
            if self.charge * have_q <= 0 or abs(self.charge) > abs(have_q):
                return False
        return True


@dataclass(frozen=True)
class RuleResult:
    completed: ReactionRecord
    applied_rules: tuple[str, ...]
    confidence: float
    solved: bool


_TRIGGER_PART = re.compile(r"^([A-Z][a-z]?):([+-]\d+)$")


def _parse_trigger(text: str) -> tuple[dict[str, int], int]:
    body, _, charge_part = text.partition("|")
    charge = 0
    if charge_part:
        if not charge_part.startswith("q:"):
            raise RuleError(f"bad charge clause in trigger {text!r}")
        charge = int(charge_part[2:])
    trigger: dict[str, int] = {}
    for part in body.split(","):
        part = part.strip()
        if not part:
            continue
        m = _TRIGGER_PART.match(part)
        if m is None:
            raise RuleError(f"bad trigger entry {part!r}")
        trigger[m.group(1)] = int(m.group(2))
    if not trigger and not charge:
        raise RuleError(f"empty trigger {text!r}")
    return trigger, charge


def parse_completion_rules(text: str) -> tuple[CompletionRule, ...]:
    """Parse ``TRIGGER_DELTA => ADDITIONS @ priority, confidence`` lines."""
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            trigger_text, rest = line.split("=>")
            additions_text, meta = rest.split("@")
            priority_s, confidence_s = meta.split(",")
        except ValueError as exc:
            raise RuleError(f"line {lineno}: cannot parse {line!r}") from exc
        trigger, charge = _parse_trigger(trigger_text.strip())
        try:
            additions = tuple(
                canonical_smiles(parse_molecule(frag.strip()))
                for frag in additions_text.strip().split("."))
        except SmilesError as exc:
            raise RuleError(f"line {lineno}: {exc}") from exc
        rules.append(CompletionRule(
            trigger, charge, additions, int(priority_s),
            float(confidence_s), line))
    validate_rules(rules)
    return tuple(rules)


def validate_rules(rules) -> list[dict]:
    """Check conservation (additions cancel the trigger exactly) and
    priority uniqueness; raises RuleError naming the offending rule."""
    report = []
    seen_priorities: dict[int, str] = {}
    for rule in rules:
        if rule.priority in seen_priorities:
            raise RuleError(
                f"{rule.rule_id}: duplicate priority with {seen_priorities[rule.priority]}")
        seen_priorities[rule.priority] = rule.rule_id
        if not rule.trigger:
            raise RuleError(f"{rule.rule_id}: trigger needs element entries")
        signs = {1 if v > 0 else -1 for v in rule.trigger.values()}
        if len(signs) > 1:
            raise RuleError(f"{rule.rule_id}: trigger elements mix sides")
        if not (0.0 <= rule.confidence <= 1.0):
            raise RuleError(f"{rule.rule_id}: confidence outside [0, 1]")
        added: dict[str, int] = {}
        charge = 0
        for smi in rule.additions:
            f = parse_molecule(smi).formula()
            for el, n in f.counts.items():
                added[el] = added.get(el, 0) + n
            charge += f.net_charge
        expect = {el: abs(n) for el, n in rule.trigger.items()}
        expect_charge = rule.charge if rule.side == "products" else -rule.charge
        if added != expect or charge != expect_charge:
            raise RuleError(
                f"{rule.rule_id}: additions do not cancel trigger ({rule.line!r})")
        report.append({"rule_id": rule.rule_id, "side": rule.side,
                       "additions": rule.additions, "ok": True})
    return report


def load_completion_rules(path) -> tuple[CompletionRule, ...]:
    with open(path, encoding="utf-8") as fh:
        return parse_completion_rules(fh.read())


def default_completion_rules() -> tuple[CompletionRule, ...]:
    text = resources.files("rxnbalance.data").joinpath(
        "completion_rules.txt").read_text(encoding="utf-8")
    return parse_completion_rules(text)


def complete_by_rules(r: ReactionRecord, rules=None,
                      max_applications: int = 5) -> RuleResult:
    """Greedy highest-priority completion; declines carbon-unbalanced input."""
    if rules is None:
        rules = default_completion_rules()
    record = merge_agents(r)
    delta = element_delta(record)
    if delta.missing_carbons != 0:
        return RuleResult(record, (), 0.0, False)

    applied: list[str] = []
    confidence = 1.0
    by_priority = sorted(rules, key=lambda x: -x.priority)
    for _ in range(max_applications):
        if delta.is_zero():
            break
        chosen = next((rule for rule in by_priority if rule.covers(delta)), None)
        if chosen is None:
            break
        new_mols = tuple(parse_molecule(s) for s in chosen.additions)
        if chosen.side == "products":
            record = ReactionRecord(record.reactants, (),
                                    record.products + new_mols, id=record.id)
        else:
            record = ReactionRecord(record.reactants + new_mols, (),
                                    record.products, id=record.id)
        applied.append(chosen.rule_id)
        confidence *= chosen.confidence
        delta = element_delta(record)

    solved = is_balanced(record)
    if not applied:
        confidence = 1.0 if solved else 0.0
    return RuleResult(record, tuple(applied), confidence, solved)
