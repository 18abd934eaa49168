"""Corpus ingestion: aligning incomplete records to balanced targets.

Multi-step mechanistic sequences are merged into single overall reactions,
an incomplete record maps to the unique merged reaction that fully contains
it, and stereo annotations are copied back from the incomplete source (the
targets carry none). Malformed or non-conforming rows are quarantined with
a reason code, never dropped silently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..balance import is_balanced
from ..chem import (
    ReactionRecord,
    canonical_smiles,
    merge_agents,
    parse_molecule,
    parse_reaction,
)
from ..chem.mol import Molecule
from ..chem.smiles import SmilesError


@dataclass(frozen=True)
class AlignedPair:
    id: str
    incomplete: ReactionRecord
    complete: ReactionRecord
    template_hash: str | None = None


@dataclass(frozen=True)
class Reject:
    id: str
    reason: str
    detail: str = ""

    def to_json(self) -> str:
        return json.dumps({"id": self.id, "reason": self.reason,
                           "detail": self.detail})


def merge_steps(steps: list[ReactionRecord]) -> ReactionRecord:
    """Reactants of the first step, products of the last, agents dropped."""
    if not steps:
        raise ValueError("empty step list")
    return ReactionRecord(steps[0].reactants, (), steps[-1].products,
                          id=steps[0].id)


def _contains(big: dict[str, int], small: dict[str, int]) -> bool:
    return all(big.get(smi, 0) >= n for smi, n in small.items())


def containment_map(uspto: ReactionRecord,
                    candidates: list[ReactionRecord]) -> str | None:
    """Id of the unique candidate containing the record on both sides.

    Containment is multiset-wise over canonical (stereo-stripped) molecule
    SMILES, comparing uspto reactants+agents against candidate reactants and
    products against products. Zero or several qualifying candidates yield
    None.
    """
    merged = merge_agents(uspto)
    reactant_ms = merged.side_multiset("reactants")
    product_ms = merged.side_multiset("products")
    hits = []
    for cand in candidates:
        if (_contains(cand.side_multiset("reactants"), reactant_ms)
                and _contains(cand.side_multiset("products"), product_ms)):
            hits.append(cand)
    if len(hits) != 1:
        return None
    return hits[0].id


def _stereo_sources(source: ReactionRecord) -> dict[str, str | None]:
    """Map stereo-stripped canonical SMILES -> original text with stereo.

    None marks an ambiguous entry (two distinct stereo texts share the same
    skeleton), which transfer leaves untouched.
    """
    out: dict[str, str | None] = {}
    for mols in (source.reactants, source.agents, source.products):
        for m in mols:
            if m.source is None or not _has_stereo(m):
                continue
            key = canonical_smiles(m)
            if key in out and out[key] != m.source:
                out[key] = None
            else:
                out.setdefault(key, m.source)
    return out


def _has_stereo(m: Molecule) -> bool:
    return any(a.stereo for a in m.atoms) or any(b.stereo for b in m.bonds)


def transfer_stereo(source: ReactionRecord,
                    target: ReactionRecord) -> ReactionRecord:
    """Substitute stereo-annotated source molecules into the target wherever
    the stereo-stripped skeletons coincide; ambiguous skeletons stay as-is."""
    lookup = _stereo_sources(source)
    if not lookup:
        return target

    def swap(mols: tuple[Molecule, ...]) -> tuple[Molecule, ...]:
        out = []
        for m in mols:
            text = lookup.get(canonical_smiles(m))
            if text:
                try:
                    out.append(parse_molecule(text))
                except SmilesError:
                    out.append(m)
            else:
                out.append(m)
        return tuple(out)

    return ReactionRecord(swap(target.reactants), swap(target.agents),
                          swap(target.products), id=target.id)


def validate_pair(pair: AlignedPair) -> str | None:
    """Reason code when a pair violates the alignment invariants, else None."""
    if not is_balanced(pair.complete):
        return "unbalanced_target"
    merged = merge_agents(pair.incomplete)
    complete = merge_agents(pair.complete)
    if not _contains(complete.side_multiset("reactants"),
                     merged.side_multiset("reactants")):
        return "input_not_contained"
    if not _contains(complete.side_multiset("products"),
                     merged.side_multiset("products")):
        return "input_not_contained"
    return None


def ingest(uspto_rows: list[tuple[str, str]],
           mechanism_rows: list[tuple[str, list[str]]]
           ) -> tuple[list[AlignedPair], list[Reject]]:
    """Align raw incomplete rows against merged mechanistic candidates.

    uspto_rows: (id, reaction SMILES). mechanism_rows: (id, step SMILES
    list). Deterministic: outputs ordered by input row order.
    """
    candidates: list[ReactionRecord] = []
    rejects: list[Reject] = []
    for mid, steps in mechanism_rows:
        try:
            parsed = [parse_reaction(s) for s in steps]
            merged = merge_steps(parsed)
            candidates.append(ReactionRecord(
                merged.reactants, (), merged.products, id=mid))
        except SmilesError as exc:
            rejects.append(Reject(mid, "candidate_parse_error", str(exc)))

    by_id = {c.id: c for c in candidates}
    pairs: list[AlignedPair] = []
    for rid, text in uspto_rows:
        try:
            record = parse_reaction(text, id=rid)
        except SmilesError as exc:
            rejects.append(Reject(rid, "parse_error", str(exc)))
            continue
        match = containment_map(record, candidates)
        if match is None:
            rejects.append(Reject(rid, "no_unique_containment"))
            continue
        target = transfer_stereo(record, by_id[match])
        target = ReactionRecord(target.reactants, target.agents,
                                target.products, id=rid)
        pair = AlignedPair(rid, record, target)
        reason = validate_pair(pair)
        if reason is not None:
            rejects.append(Reject(rid, reason))
            continue
        pairs.append(pair)
    return pairs, rejects
