"""Exact-match and chemistry-aware equivalence metrics.

Both metrics compare canonical molecule multisets per reaction side after
merging agents onto the reactant side and dropping stereo marks. The
equivalence metric additionally tries a pipeline of normalization views:

  canonical -> small-molecule expansion -> ionic normalization
            -> proton-shuffle -> full composed rewrites

and reports the first view under which both records agree on both sides.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources

from .chem import ReactionRecord, canonical_smiles, merge_agents, parse_molecule
from .chem.mol import Molecule
from .chem.smiles import SmilesError


class RuleError(ValueError):
    """A rule file entry is malformed or violates conservation."""


@dataclass(frozen=True)
class RewriteRule:
    lhs: dict[str, int]  # canonical SMILES -> count
    rhs: dict[str, int]
    tag: str
    line: str


@dataclass(frozen=True)
class EquivalenceRuleSet:
    expansion_rules: tuple[RewriteRule, ...]  # tag: bidirectional
    ionic_pairs: tuple[RewriteRule, ...]      # tag: ionic
    conjugate_pairs: tuple[RewriteRule, ...]  # tag: conjugate (acid => base)


@dataclass(frozen=True)
class MatchOutcome:
    matched: bool
    view: str | None = None

    def __bool__(self) -> bool:
        return self.matched


_VALID_TAGS = ("bidirectional", "ionic", "conjugate")


def _parse_side(text: str) -> dict[str, int]:
    counts: dict[str, int] = {}
    for frag in text.split("."):
        frag = frag.strip()
        if not frag:
            raise RuleError(f"empty molecule in rule side {text!r}")
        s = canonical_smiles(parse_molecule(frag))
        counts[s] = counts.get(s, 0) + 1
    return counts


def _side_totals(counts: dict[str, int]) -> tuple[dict[str, int], int]:
    elements: dict[str, int] = {}
    charge = 0
    for smi, n in counts.items():
        f = parse_molecule(smi).formula()
        for el, k in f.counts.items():
            elements[el] = elements.get(el, 0) + k * n
        charge += f.net_charge * n
    return {el: n for el, n in elements.items() if n}, charge


def parse_rules(text: str) -> EquivalenceRuleSet:
    """Parse the line-oriented rule format: ``LHS => RHS tag`` with # comments."""
    expansion, ionic, conjugate = [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            lhs_text, rest = line.split("=>")
            rhs_text, tag = rest.rsplit(None, 1)
        except ValueError as exc:
            raise RuleError(f"line {lineno}: cannot parse {line!r}") from exc
        if tag not in _VALID_TAGS:
            raise RuleError(f"line {lineno}: unknown tag {tag!r}")
        try:
            lhs = _parse_side(lhs_text)
            rhs = _parse_side(rhs_text)
        except SmilesError as exc:
            raise RuleError(f"line {lineno}: {exc}") from exc
        rule = RewriteRule(lhs, rhs, tag, line)
        _validate_rule(rule, lineno)
        {"bidirectional": expansion, "ionic": ionic,
         "conjugate": conjugate}[tag].append(rule)
    return EquivalenceRuleSet(tuple(expansion), tuple(ionic), tuple(conjugate))


def _validate_rule(rule: RewriteRule, lineno: int) -> None:
    lhs_el, lhs_q = _side_totals(rule.lhs)
    rhs_el, rhs_q = _side_totals(rule.rhs)
    if rule.tag == "conjugate":
        if len(rule.lhs) != 1 or len(rule.rhs) != 1 or set(rule.lhs.values()) != {1} \
                or set(rule.rhs.values()) != {1}:
            raise RuleError(
                f"line {lineno}: conjugate pairs take one molecule per side")
        # Acid on the left, base on the right: acid = base + one proton.
        rhs_el = dict(rhs_el)
        rhs_el["H"] = rhs_el.get("H", 0) + 1
        rhs_q += 1
    if lhs_el != {k: v for k, v in rhs_el.items() if v} or lhs_q != rhs_q:
        raise RuleError(
            f"line {lineno}: rule does not conserve atoms/charge: {rule.line!r}")


def load_rules(path) -> EquivalenceRuleSet:
    with open(path, encoding="utf-8") as fh:
        return parse_rules(fh.read())


def default_rules() -> EquivalenceRuleSet:
    text = resources.files("rxnbalance.data").joinpath(
        "equivalence_rules.txt").read_text(encoding="utf-8")
    return parse_rules(text)


# ---------------------------------------------------------------------------
# Multiset machinery
# ---------------------------------------------------------------------------

_MAX_REWRITES = 200


def _contains(ms: dict[str, int], lhs: dict[str, int]) -> bool:
    return all(ms.get(smi, 0) >= n for smi, n in lhs.items())


def _apply_rules(ms: dict[str, int], rules) -> dict[str, int]:
    """Apply oriented rewrites to fixpoint (bounded); deterministic order."""
    ms = dict(ms)
    for _ in range(_MAX_REWRITES):
        fired = False
        for rule in rules:
            while _contains(ms, rule.lhs):
                for smi, n in rule.lhs.items():
                    left = ms[smi] - n
                    if left:
                        ms[smi] = left
                    else:
                        del ms[smi]
                for smi, n in rule.rhs.items():
                    ms[smi] = ms.get(smi, 0) + n
                fired = True
        if not fired:
            return ms
    return ms


_PROTON = "[H+]"


def _neutral_conjugate(smi: str, table: dict[str, str]) -> tuple[str, int]:
    """Map one molecule toward its neutral conjugate form.

    Returns (normalized SMILES, proton flow): +1 per proton released
    (deprotonation), -1 per proton consumed (protonation). The table maps
    base form -> acid form; molecules outside it are normalized
    structurally: anionic O/S sites gain a hydrogen, protonated N/P sites
    (with at least one H) lose one.
    """
    flow = 0
    seen = set()
    while smi in table and smi not in seen:
        seen.add(smi)
        smi = table[smi]
        flow -= 1
    try:
        mol = parse_molecule(smi)
    except SmilesError:
        raise RuleError(f"conjugate normalization produced unparseable {smi!r}")
    atoms = list(mol.atoms)
    changed = False
    for i, a in enumerate(atoms):
        if a.element in ("O", "S") and a.charge == -1:
            atoms[i] = replace(a, charge=0, h_count=a.h_count + 1)
            flow -= 1
            changed = True
        elif a.element in ("N", "P") and a.charge == 1 and a.h_count >= 1:
            atoms[i] = replace(a, charge=0, h_count=a.h_count - 1)
            flow += 1
            changed = True
    if changed:
        smi = canonical_smiles(Molecule(tuple(atoms), mol.bonds))
    return smi, flow


def _proton_normalize(ms: dict[str, int], rules: EquivalenceRuleSet
                      ) -> tuple[dict[str, int], int]:
    """Normalize protonation states; returns (multiset, free-proton counter)."""
    table = {}
    for rule in rules.conjugate_pairs:
        (acid,) = rule.lhs  # validated single-molecule sides
        (base,) = rule.rhs
        table[base] = acid
    counter = ms.get(_PROTON, 0)
    out: dict[str, int] = {}
    for smi, n in ms.items():
        if smi == _PROTON:
            continue
        norm, flow = _neutral_conjugate(smi, table)
        out[norm] = out.get(norm, 0) + n
        counter += flow * n
    return out, counter


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def _sides(r: ReactionRecord) -> tuple[dict[str, int], dict[str, int]]:
    merged = merge_agents(r)
    return merged.side_multiset("reactants"), merged.side_multiset("products")


def exact_match(pred: ReactionRecord, target: ReactionRecord) -> bool:
    """Canonical multisets equal per side: stoichiometry respected, molecule
    order ignored, agents merged, stereo dropped."""
    return _sides(pred) == _sides(target)


def equivalence_match(pred: ReactionRecord, target: ReactionRecord,
                      rules: EquivalenceRuleSet | None = None) -> MatchOutcome:
    """True when some composition of the normalization views equalizes both
    sides; reports the first succeeding view label."""
    if rules is None:
        rules = default_rules()
    p_r, p_p = _sides(pred)
    t_r, t_p = _sides(target)
    if p_r == t_r and p_p == t_p:
        return MatchOutcome(True, "canonical")

    stages = [
        ("expansion", rules.expansion_rules),
        ("ionic", rules.ionic_pairs),
    ]
    pn = [dict(p_r), dict(p_p)]
    tn = [dict(t_r), dict(t_p)]
    for label, stage_rules in stages:
        pn = [_apply_rules(m, stage_rules) for m in pn]
        tn = [_apply_rules(m, stage_rules) for m in tn]
        if pn == tn:
            return MatchOutcome(True, label)

    p_sh = [_proton_normalize(m, rules) for m in pn]
    t_sh = [_proton_normalize(m, rules) for m in tn]
    if p_sh == t_sh:
        return MatchOutcome(True, "proton-shuffle")

    # Full composition: interleave expansion+ionic to a joint fixpoint, then
    # normalize protons; catches rules enabled only by other rules' output.
    combined = rules.expansion_rules + rules.ionic_pairs
    pf = [_proton_normalize(_apply_rules(m, combined), rules)
          for m in (p_r, p_p)]
    tf = [_proton_normalize(_apply_rules(m, combined), rules)
          for m in (t_r, t_p)]
    if pf == tf:
        return MatchOutcome(True, "rewrite")
    return MatchOutcome(False, None)
