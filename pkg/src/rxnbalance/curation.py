"""Expert-curation backend: queue, live validation, verdicts, export.

State is an append-only JSON-lines event log replayed into memory at
startup; writes go through one lock so concurrent annotators either both
persist or one gets a clean 409. Edits are gated server-side: nothing
unbalanced is ever persisted.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from fastapi import FastAPI, Header, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .balance import balance_signature, element_delta, is_balanced
from .chem import merge_agents, parse_reaction
from .chem.smiles import SmilesError
from .equivalence import EquivalenceRuleSet, default_rules, equivalence_match

STRATEGIES = ("disagreement", "complexity", "coverage")
ACTIONS = ("accept", "edit", "reject", "flag")


@dataclass
class Candidate:
    candidate_id: str
    method: str
    prediction: str
    score: float | None = None
    balanced: bool = False


@dataclass
class Annotation:
    item_id: str
    curator: str
    action: str
    candidate_id: str | None = None
    edited_text: str | None = None
    note: str = ""
    timestamp: float = 0.0

    def resolved_text(self, item: "CurationItem") -> str | None:
        """The reaction this verdict endorses, if any."""
        if self.action == "accept":
            for c in item.candidates:
                if c.candidate_id == self.candidate_id:
                    return c.prediction
            return None
        if self.action == "edit":
            return self.edited_text
        return None


@dataclass
class CurationItem:
    id: str
    incomplete: str
    candidates: list[Candidate] = field(default_factory=list)
    selection_reason: str = "disagreement"
    template_hash: str | None = None
    status: str = "open"
    annotations: list[Annotation] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        return d


class CurationStore:
    """In-memory index over an append-only event log."""

    def __init__(self, log_path: str | Path, items: list[CurationItem],
                 min_annotations: int = 2,
                 rules: EquivalenceRuleSet | None = None):
        self.log_path = Path(log_path)
        self.min_annotations = min_annotations
        self.rules = rules or default_rules()
        self.items: dict[str, CurationItem] = {i.id: i for i in items}
        self._lock = threading.Lock()
        self._replay()

    # -- persistence --------------------------------------------------------

    def _replay(self) -> None:
        if not self.log_path.exists():
            return
        with open(self.log_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                if event.get("type") == "annotation":
                    ann = Annotation(**event["annotation"])
                    item = self.items.get(ann.item_id)
                    if item is not None:
                        item.annotations.append(ann)
                        self._update_status(item)

    def _append_event(self, event: dict) -> None:
        self.log_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event) + "\n")
            fh.flush()

    # -- domain logic --------------------------------------------------------

    def _concordance_classes(self, item: CurationItem) -> list[list[Annotation]]:
        """Group accept/edit verdicts by pairwise reaction equivalence."""
        classes: list[tuple[object, list[Annotation]]] = []
        for ann in item.annotations:
            text = ann.resolved_text(item)
            if text is None:
                continue
            try:
                record = parse_reaction(text)
            except SmilesError:
                continue
            placed = False
            for rep, members in classes:
                if equivalence_match(record, rep, self.rules):
                    members.append(ann)
                    placed = True
                    break
            if not placed:
                classes.append((record, [ann]))
        return [members for _, members in classes]

    def _update_status(self, item: CurationItem) -> None:
        if any(len(c) >= self.min_annotations
               for c in self._concordance_classes(item)):
            item.status = "resolved"
        elif item.annotations:
            item.status = "in-review"
        else:
            item.status = "open"

    def add_annotation(self, ann: Annotation) -> CurationItem:
        """Validate and persist one verdict; raises HTTPException on rejects."""
        with self._lock:
            item = self.items.get(ann.item_id)
            if item is None:
                raise HTTPException(404, f"unknown item {ann.item_id!r}")
            if item.status == "resolved":
                raise HTTPException(409, f"item {ann.item_id!r} already resolved")
            if any(a.curator == ann.curator for a in item.annotations):
                raise HTTPException(
                    409, f"curator {ann.curator!r} already annotated this item")
            if ann.action not in ACTIONS:
                raise HTTPException(422, f"unknown action {ann.action!r}")
            if ann.action == "accept":
                if not any(c.candidate_id == ann.candidate_id
                           for c in item.candidates):
                    raise HTTPException(422, "accept names no known candidate")
            if ann.action == "edit":
                problem = _edit_problem(ann.edited_text or "")
                if problem is not None:
                    raise HTTPException(422, problem)
            self._append_event({"type": "annotation",
                                "annotation": asdict(ann)})
            item.annotations.append(ann)
            self._update_status(item)
            return item

    def queue(self, strategy: str, limit: int) -> list[CurationItem]:
        if strategy not in STRATEGIES:
            raise HTTPException(400, f"unknown strategy {strategy!r}")
        open_items = [i for i in self.items.values()
                      if i.status in ("open", "in-review")]
        if strategy == "disagreement":
            ordered = sorted(open_items,
                             key=lambda i: (not self._disagrees(i), i.id))
        elif strategy == "complexity":
            ordered = sorted(open_items,
                             key=lambda i: (-self._missing_carbons(i), i.id))
        else:  # coverage: round-robin over template hashes
            by_template: dict[str, list[CurationItem]] = {}
            for item in sorted(open_items, key=lambda i: i.id):
                by_template.setdefault(item.template_hash or "", []).append(item)
            ordered = []
            pools = [by_template[t] for t in sorted(by_template)]
            while pools:
                next_pools = []
                for pool in pools:
                    ordered.append(pool.pop(0))
                    if pool:
                        next_pools.append(pool)
                pools = next_pools
        return ordered[:limit]

    def _disagrees(self, item: CurationItem) -> bool:
        records = []
        for c in item.candidates:
            try:
                records.append(parse_reaction(c.prediction))
            except SmilesError:
                return True  # an unparseable candidate is disagreement enough
        for i in range(len(records)):
            for j in range(i + 1, len(records)):
                if not equivalence_match(records[i], records[j], self.rules):
                    return True
        return False

    def _missing_carbons(self, item: CurationItem) -> int:
        try:
            return element_delta(parse_reaction(item.incomplete)).missing_carbons
        except SmilesError:
            return 0

    def export_lines(self) -> list[str]:
        lines = []
        for rid in sorted(self.items):
            item = self.items[rid]
            if item.status != "resolved":
                continue
            classes = self._concordance_classes(item)
            outcome_classes = []
            for members in classes:
                text = members[0].resolved_text(item)
                outcome_classes.append({
                    "reaction": text,
                    "n_verdicts": len(members),
                    "curators": sorted(a.curator for a in members),
                })
            lines.append(json.dumps({
                "id": item.id,
                "incomplete": item.incomplete,
                "status": item.status,
                "selection_reason": item.selection_reason,
                "outcome_classes": outcome_classes,
                "history": [asdict(a) for a in item.annotations],
            }))
        return lines


def _edit_problem(text: str) -> str | None:
    """Reason an edited reaction must be rejected, or None when acceptable."""
    if not text.strip():
        return "empty edit"
    try:
        record = parse_reaction(text)
    except SmilesError as exc:
        return f"unparseable edit: {exc}"
    delta = element_delta(record)
    if not delta.is_zero():
        return (f"edit is not balanced: delta {balance_signature(delta)} "
                f"({dict(delta.per_element)}, charge {delta.charge_delta:+d})")
    return None


def load_items(path: str | Path) -> list[CurationItem]:
    items = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            items.append(CurationItem(
                id=str(rec["id"]),
                incomplete=rec["incomplete"],
                candidates=[Candidate(**c) for c in rec.get("candidates", [])],
                selection_reason=rec.get("selection_reason", "disagreement"),
                template_hash=rec.get("template_hash"),
            ))
    return items


# ---------------------------------------------------------------------------
# HTTP app
# ---------------------------------------------------------------------------


class AnnotationBody(BaseModel):
    item_id: str
    curator: str | None = None
    action: str
    candidate_id: str | None = None
    edited_text: str | None = None
    note: str = ""


class ValidateBody(BaseModel):
    reaction: str


def create_app(store: CurationStore,
               cors_origins: list[str] | None = None) -> FastAPI:
    app = FastAPI(title="reaction curation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    @app.get("/api/queue")
    def queue(strategy: str = "disagreement", limit: int = 20):
        return [item.to_dict() for item in store.queue(strategy, limit)]

    @app.post("/api/annotations", status_code=201)
    def annotate(body: AnnotationBody,
                 x_curator_id: str | None = Header(default=None)):
        curator = body.curator or x_curator_id
        if not curator:
            raise HTTPException(422, "no curator id (body or X-Curator-Id)")
        ann = Annotation(
            item_id=body.item_id, curator=curator, action=body.action,
            candidate_id=body.candidate_id, edited_text=body.edited_text,
            note=body.note, timestamp=time.time())
        item = store.add_annotation(ann)
        return {"status": item.status, "item_id": item.id,
                "n_annotations": len(item.annotations)}

    @app.post("/api/validate")
    def validate(body: ValidateBody):
        try:
            record = parse_reaction(body.reaction)
        except SmilesError as exc:
            return {"valid": False, "balanced": False, "delta": None,
                    "canonical": None, "message": str(exc)}
        delta = element_delta(record)
        return {
            "valid": True,
            "balanced": delta.is_zero(),
            "delta": {"per_element": dict(delta.per_element),
                      "charge": delta.charge_delta,
                      "signature": balance_signature(delta)},
            "canonical": merge_agents(record).serialize(),
            "message": None,
        }

    @app.get("/api/export")
    def export():
        return PlainTextResponse("\n".join(store.export_lines()) + "\n",
                                 media_type="application/jsonl")

    return app


def build_items(incompletes: dict[str, str],
                preds_by_method: dict[str, dict[str, tuple[str, float | None]]],
                rules: EquivalenceRuleSet | None = None,
                template_of: dict[str, str] | None = None,
                ood_ids: set[str] | None = None) -> list[CurationItem]:
    """Assemble curation items from per-method top-1 predictions.

    Selection reasons, in priority order: unbalanced (no balanced
    candidate), disagreement (methods differ), low-confidence, ood.
    """
    rules = rules or default_rules()
    items = []
    for rid in sorted(incompletes):
        candidates = []
        records = []
        for method in sorted(preds_by_method):
            entry = preds_by_method[method].get(rid)
            if entry is None:
                continue
            text, score = entry
            balanced = False
            record = None
            try:
                record = parse_reaction(text)
                balanced = is_balanced(record)
            except SmilesError:
                pass
            records.append(record)
            candidates.append(Candidate(
                candidate_id=f"{method}:{rid}", method=method,
                prediction=text, score=score, balanced=balanced))
        if not candidates:
            continue
        parsed = [r for r in records if r is not None]
        disagree = len(parsed) < len(records) or any(
            not equivalence_match(parsed[i], parsed[j], rules)
            for i in range(len(parsed)) for j in range(i + 1, len(parsed)))
        if not any(c.balanced for c in candidates):
            reason = "unbalanced"
        elif disagree:
            reason = "disagreement"
        elif any(c.score is not None and c.score < 0.5 for c in candidates):
            reason = "low-confidence"
        elif ood_ids and rid in ood_ids:
            reason = "ood"
        else:
            continue  # nothing hard about this one
        items.append(CurationItem(
            id=rid, incomplete=incompletes[rid], candidates=candidates,
            selection_reason=reason,
            template_hash=(template_of or {}).get(rid)))
    return items
