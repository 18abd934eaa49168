"""Benchmark evaluation: report columns, difficulty bins, confidence export,
and cross-method agreement."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from ..balance import element_delta, is_balanced
from ..chem import ReactionRecord, parse_reaction
from ..chem.smiles import SmilesError
from ..equivalence import EquivalenceRuleSet, equivalence_match, exact_match

BIN_EDGES = (0, 1, 2, 3, 4)  # missing-carbon bins 0,1,2,3,4,5+
OUTCOMES = ("accurate", "balanced_inaccurate", "unbalanced", "invalid")


class UnknownId(KeyError):
    pass


@dataclass(frozen=True)
class PredictionRecord:
    id: str
    rank: int
    prediction: str
    score: float | None = None       # raw ranking score (normalized logprob)
    confidence: float | None = None  # probability-like scalar in [0, 1]
    method: str = ""

    @classmethod
    def from_json_line(cls, line: str) -> "PredictionRecord":
        rec = json.loads(line)
        confidence = rec.get("confidence")
        score = rec.get("logprob", rec.get("score"))
        if confidence is None and score is not None:
            confidence = math.exp(min(score, 0.0))
        return cls(id=str(rec["id"]), rank=int(rec.get("rank", 1)),
                   prediction=rec["prediction"], score=score,
                   confidence=confidence, method=rec.get("method", ""))


@dataclass
class EvalReport:
    n: int
    top1_exact: float
    top1_equiv: float
    invalid_smiles: float
    balanced: float
    conf_gt_50: float | None
    per_bin: list[dict]  # {bin, n, equiv_accuracy}
    confidence_by_outcome: dict[str, list[float]]
    outcome_counts: dict[str, int]
    method: str = ""

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "n": self.n,
            "top1_exact": round(self.top1_exact, 6),
            "top1_equiv": round(self.top1_equiv, 6),
            "invalid_smiles": round(self.invalid_smiles, 6),
            "balanced": round(self.balanced, 6),
            "conf_gt_50": None if self.conf_gt_50 is None
                          else round(self.conf_gt_50, 6),
            "per_bin": self.per_bin,
            "outcome_counts": self.outcome_counts,
        }

    def table_row(self) -> dict:
        """Columns named like the published results tables (percentages)."""
        pct = lambda x: None if x is None else round(100.0 * x, 2)
        return {
            "Model": self.method,
            "Top-1 Acc (exact) (%)": pct(self.top1_exact),
            "Top-1 Acc (equiv.) (%)": pct(self.top1_equiv),
            "Conf. >50% (%)": pct(self.conf_gt_50),
            "Inv. SMILES (%)": pct(self.invalid_smiles),
            "Balanced (%)": pct(self.balanced),
        }


def _bin_label(missing_carbons: int) -> str:
    top = BIN_EDGES[-1]
    return str(missing_carbons) if missing_carbons <= top else f"{top + 1}+"


def _top1(predictions: list[PredictionRecord]) -> dict[str, PredictionRecord]:
    best: dict[str, PredictionRecord] = {}
    for p in predictions:
        cur = best.get(p.id)
        if cur is None or p.rank < cur.rank:
            best[p.id] = p
    return best


def _decode_pred(p: PredictionRecord, incomplete: ReactionRecord | None,
                 union_with_input: bool) -> ReactionRecord | None:
    try:
        record = parse_reaction(p.prediction)
    except SmilesError:
        return None
    if union_with_input and incomplete is not None:
        # Missing-molecules mode: prediction carries only the additions.
        record = ReactionRecord(
            incomplete.reactants + incomplete.agents + record.reactants,
            (), incomplete.products + record.products, id=p.id)
    return record


def evaluate(predictions: list[PredictionRecord],
             targets: dict[str, ReactionRecord],
             rules: EquivalenceRuleSet,
             incompletes: dict[str, ReactionRecord] | None = None,
             union_with_input: bool = False,
             method: str = "") -> EvalReport:
    """Score top-1 predictions against their targets.

    `incompletes` feeds the difficulty bins (missing carbons of the input);
    `union_with_input` switches to missing-molecules scoring where the
    prediction is united with the input before comparison.
    """
    top1 = _top1(predictions)
    for rid in top1:
        if rid not in targets:
            raise UnknownId(rid)

    n = len(top1)
    exact = equiv = invalid = balanced = 0
    conf_present = False
    conf_hits = 0
    outcome_counts = {k: 0 for k in OUTCOMES}
    confidence_by_outcome: dict[str, list[float]] = {k: [] for k in OUTCOMES}
    bin_totals: dict[str, int] = {}
    bin_correct: dict[str, int] = {}

    for rid in sorted(top1):
        p = top1[rid]
        target = targets[rid]
        incomplete = (incompletes or {}).get(rid)
        record = _decode_pred(p, incomplete, union_with_input)

        if record is None:
            outcome = "invalid"
            invalid += 1
        else:
            rec_balanced = is_balanced(record)
            balanced += rec_balanced
            if exact_match(record, target):
                exact += 1
                equiv += 1
                outcome = "accurate"
            elif equivalence_match(record, target, rules):
                equiv += 1
                outcome = "accurate"
            elif rec_balanced:
                outcome = "balanced_inaccurate"
            else:
                outcome = "unbalanced"
        outcome_counts[outcome] += 1
        if p.confidence is not None:
            conf_present = True
            confidence_by_outcome[outcome].append(p.confidence)
            if p.confidence > 0.5:
                conf_hits += 1

        if incomplete is not None:
            label = _bin_label(element_delta(incomplete).missing_carbons)
            bin_totals[label] = bin_totals.get(label, 0) + 1
            bin_correct[label] = bin_correct.get(label, 0) + (outcome == "accurate")

    per_bin = [
        {"bin": label, "n": bin_totals[label],
         "equiv_accuracy": bin_correct[label] / bin_totals[label]}
        for label in sorted(bin_totals, key=lambda x: (len(x), x))
    ]
    return EvalReport(
        n=n,
        top1_exact=exact / n if n else 0.0,
        top1_equiv=equiv / n if n else 0.0,
        invalid_smiles=invalid / n if n else 0.0,
        balanced=balanced / n if n else 0.0,
        conf_gt_50=(conf_hits / n if n else 0.0) if conf_present else None,
        per_bin=per_bin,
        confidence_by_outcome=confidence_by_outcome,
        outcome_counts=outcome_counts,
        method=method,
    )


@dataclass
class AgreementReport:
    n_shared: int
    n_agree: int
    agreement: float
    precision: float | None  # None when nothing agrees

    def to_dict(self) -> dict:
        return {
            "n_shared": self.n_shared,
            "n_agree": self.n_agree,
            "agreement": round(self.agreement, 6),
            "precision": None if self.precision is None
                         else round(self.precision, 6),
        }


def agreement(preds_a: list[PredictionRecord], preds_b: list[PredictionRecord],
              targets: dict[str, ReactionRecord],
              rules: EquivalenceRuleSet) -> AgreementReport:
    """Cross-method agreement rate and agreement precision on shared ids."""
    top_a = _top1(preds_a)
    top_b = _top1(preds_b)
    shared = sorted(set(top_a) & set(top_b))
    for rid in shared:
        if rid not in targets:
            raise UnknownId(rid)
    n_agree = 0
    n_agree_correct = 0
    for rid in shared:
        ra = _decode_pred(top_a[rid], None, False)
        rb = _decode_pred(top_b[rid], None, False)
        if ra is None or rb is None:
            continue
        if not (exact_match(ra, rb) or equivalence_match(ra, rb, rules)):
            continue
        n_agree += 1
        target = targets[rid]
        if exact_match(ra, target) or equivalence_match(ra, target, rules):
            n_agree_correct += 1
    return AgreementReport(
        n_shared=len(shared),
        n_agree=n_agree,
        agreement=n_agree / len(shared) if shared else 0.0,
        precision=n_agree_correct / n_agree if n_agree else None,
    )
