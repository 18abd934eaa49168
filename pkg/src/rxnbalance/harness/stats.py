"""Corpus- and template-level incompleteness statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..balance import balance_signature, element_delta, is_balanced
from ..chem import parse_reaction
from ..chem.smiles import SmilesError


@dataclass
class CorpusStats:
    n_lines: int = 0
    n_parsed: int = 0
    n_parse_failures: int = 0
    balanced_fraction: float = 0.0
    mean_missing_atoms: float = 0.0
    median_missing_atoms: float = 0.0
    mean_missing_atoms_heavy: float = 0.0  # hydrogen excluded
    mean_missing_carbons: float = 0.0
    median_missing_carbons: float = 0.0
    missing_atoms_histogram: dict[int, int] = field(default_factory=dict)
    missing_carbons_histogram: dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n_lines": self.n_lines,
            "n_parsed": self.n_parsed,
            "n_parse_failures": self.n_parse_failures,
            "balanced_fraction": round(self.balanced_fraction, 6),
            "mean_missing_atoms": round(self.mean_missing_atoms, 6),
            "median_missing_atoms": self.median_missing_atoms,
            "mean_missing_atoms_heavy": round(self.mean_missing_atoms_heavy, 6),
            "mean_missing_carbons": round(self.mean_missing_carbons, 6),
            "median_missing_carbons": self.median_missing_carbons,
            "missing_atoms_histogram":
                {str(k): v for k, v in sorted(self.missing_atoms_histogram.items())},
            "missing_carbons_histogram":
                {str(k): v for k, v in sorted(self.missing_carbons_histogram.items())},
        }


def corpus_stats(lines: list[str]) -> CorpusStats:
    """Balance statistics over reaction-SMILES lines; parse failures are
    tallied, not fatal."""
    stats = CorpusStats(n_lines=len(lines))
    missing, missing_heavy, missing_c, balanced = [], [], [], 0
    for line in lines:
        line = line.strip()
        if not line:
            stats.n_lines -= 1
            continue
        try:
            record = parse_reaction(line)
        except SmilesError:
            stats.n_parse_failures += 1
            continue
        stats.n_parsed += 1
        delta = element_delta(record)
        if delta.is_zero():
            balanced += 1
        m = delta.missing_atoms()
        mc = delta.missing_carbons
        missing.append(m)
        missing_heavy.append(delta.missing_atoms(include_hydrogen=False))
        missing_c.append(mc)
        stats.missing_atoms_histogram[m] = stats.missing_atoms_histogram.get(m, 0) + 1
        stats.missing_carbons_histogram[mc] = \
            stats.missing_carbons_histogram.get(mc, 0) + 1
    if stats.n_parsed:
        stats.balanced_fraction = balanced / stats.n_parsed
        stats.mean_missing_atoms = float(np.mean(missing))
        stats.median_missing_atoms = float(np.median(missing))
        stats.mean_missing_atoms_heavy = float(np.mean(missing_heavy))
        stats.mean_missing_carbons = float(np.mean(missing_c))
        stats.median_missing_carbons = float(np.median(missing_c))
    return stats


@dataclass
class TemplateRow:
    template: str
    n: int
    n_signatures: int
    balanced_fraction: float
    mean_missing_atoms: float
    mean_missing_carbons: float


def template_stats(records_with_templates: list[tuple[str, str]]
                   ) -> list[TemplateRow]:
    """Per-template balance behavior from (template_hash, rxn_smiles) rows."""
    groups: dict[str, list] = {}
    for template, text in records_with_templates:
        try:
            record = parse_reaction(text)
        except SmilesError:
            continue
        groups.setdefault(template, []).append(record)
    rows = []
    for template in sorted(groups):
        records = groups[template]
        deltas = [element_delta(r) for r in records]
        sigs = {balance_signature(d) for d in deltas}
        rows.append(TemplateRow(
            template=template,
            n=len(records),
            n_signatures=len(sigs),
            balanced_fraction=sum(d.is_zero() for d in deltas) / len(records),
            mean_missing_atoms=float(np.mean([d.missing_atoms() for d in deltas])),
            mean_missing_carbons=float(np.mean([d.missing_carbons for d in deltas])),
        ))
    return rows


def error_concentration(template_of: dict[str, str],
                        correct_of: dict[str, bool]
                        ) -> list[tuple[float, float]]:
    """Cumulative error share vs. template share, worst templates first.

    Supports statements like "half the errors come from k templates": the
    curve point after k templates gives the error fraction they cover.
    """
    errors: dict[str, int] = {}
    for rid, correct in correct_of.items():
        if rid not in template_of:
            continue
        if not correct:
            template = template_of[rid]
            errors[template] = errors.get(template, 0) + 1
    templates = sorted(set(template_of.values()))
    total_errors = sum(errors.values())
    if total_errors == 0 or not templates:
        return [(0.0, 0.0)]
    ranked = sorted(templates, key=lambda t: (-errors.get(t, 0), t))
    curve = []
    acc = 0
    for k, template in enumerate(ranked, 1):
        acc += errors.get(template, 0)
        curve.append((k / len(templates), acc / total_errors))
    return curve
