"""Command-line entry point for scripted benchmark runs.

One subcommand per pipeline stage; all randomness flows from --seed (or the
RXN_SEED environment variable), so fold repetitions are scripted as seeds.
Exit codes: 0 success, 1 usage error, 2 data error with a nonempty reject
file.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .balance import balance_signature, element_delta
from .chem import merge_agents, parse_reaction
from .chem.smiles import SmilesError
from .complete import complete_by_rules, default_completion_rules, load_completion_rules
from .decode import TokenVocabulary, beam_search, toy_scorer
from .equivalence import default_rules, load_rules
from .fingerprint import fingerprint
from .harness import PredictionRecord, agreement, corpus_stats, evaluate, ingest
from .splits import (
    SplitAssignment,
    SplitConfig,
    extreme_ood_split,
    group_split,
    leakage_groups,
    random_split,
    shift_report,
)

USAGE_ERROR, DATA_ERROR = 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]


def _read_corpus_tsv(path: str) -> list[dict]:
    """Rows of {id, incomplete_rxn, complete_rxn?, template_hash?}."""
    rows = []
    for line in _read_lines(path):
        parts = line.split("\t")
        if len(parts) < 2:
            raise SystemExit(f"bad corpus row (need >=2 tab fields): {line!r}")
        row = {"id": parts[0], "incomplete_rxn": parts[1]}
        if len(parts) > 2 and parts[2]:
            row["complete_rxn"] = parts[2]
        if len(parts) > 3 and parts[3]:
            row["template_hash"] = parts[3]
        rows.append(row)
    return rows


def _write(path: str, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _finish_with_rejects(rejects: list[str], path: str | None) -> int:
    if not rejects:
        return 0
    if path:
        _write(path, "\n".join(rejects) + "\n")
        print(f"{len(rejects)} rejected rows -> {path}", file=sys.stderr)
    return DATA_ERROR


def _seed_default() -> int:
    return int(os.environ.get("RXN_SEED", "0"))


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------


def _cmd_canon(args) -> int:
    out, rejects = [], []
    for n, line in enumerate(_read_lines(args.infile), 1):
        try:
            out.append(merge_agents(parse_reaction(line)).serialize()
                       if args.merge_agents else parse_reaction(line).serialize())
        except SmilesError as exc:
            rejects.append(json.dumps({"line": n, "text": line, "error": str(exc)}))
    _write(args.out, "\n".join(out) + ("\n" if out else ""))
    return _finish_with_rejects(rejects, args.rejects)


def _cmd_balance(args) -> int:
    out, rejects = [], []
    for n, line in enumerate(_read_lines(args.infile), 1):
        try:
            delta = element_delta(parse_reaction(line))
        except SmilesError as exc:
            rejects.append(json.dumps({"line": n, "text": line, "error": str(exc)}))
            continue
        out.append(json.dumps({
            "line": n, "balanced": delta.is_zero(),
            "signature": balance_signature(delta),
            "missing_atoms": delta.missing_atoms(),
            "missing_carbons": delta.missing_carbons,
        }))
    _write(args.out, "\n".join(out) + ("\n" if out else ""))
    return _finish_with_rejects(rejects, args.rejects)


def _cmd_stats(args) -> int:
    stats = corpus_stats(_read_lines(args.infile))
    _write(args.out, json.dumps(stats.to_dict(), indent=2) + "\n")
    return 0


def _cmd_fingerprint(args) -> int:
    out, rejects = [], []
    for row in _read_corpus_tsv(args.infile):
        try:
            fp = fingerprint(parse_reaction(row["incomplete_rxn"]),
                             radius_max=args.radius, n_bits=args.n_bits)
        except SmilesError as exc:
            rejects.append(json.dumps({"id": row["id"], "error": str(exc)}))
            continue
        out.append(json.dumps({"id": row["id"], "n_bits": fp.n_bits,
                               "bits": fp.on_bits()}))
    _write(args.out, "\n".join(out) + ("\n" if out else ""))
    return _finish_with_rejects(rejects, args.rejects)


def _split_config(args) -> SplitConfig:
    return SplitConfig(
        knn_k=args.knn_k, tanimoto_threshold=args.threshold,
        n_clusters=args.n_clusters, ood_top_fraction=args.ood_top_fraction,
        train_fraction=args.train_fraction, reduced_bits=args.reduced_bits,
        seed=args.seed)


def _load_split_corpus(args):
    rows = _read_corpus_tsv(args.infile)
    ids, records, rejects = [], [], []
    for row in rows:
        try:
            records.append(parse_reaction(row["incomplete_rxn"]))
            ids.append(row["id"])
        except SmilesError as exc:
            rejects.append(json.dumps({"id": row["id"], "error": str(exc)}))
    return ids, records, rejects


def _cmd_split(args) -> int:
    cfg = _split_config(args)
    ids, records, rejects = _load_split_corpus(args)
    if args.type == "random":
        assignment = random_split(ids, cfg)
    else:
        fps = [fingerprint(r) for r in records]
        groups = leakage_groups(fps, cfg)
        if args.type == "group":
            assignment = group_split(groups, fps, ids, cfg)
        else:
            deltas = [element_delta(r) for r in records]
            assignment = extreme_ood_split(groups, fps, deltas, ids, cfg)
    _write(args.out, assignment.to_jsonl())
    return _finish_with_rejects(rejects, args.rejects)


def _cmd_shift_report(args) -> int:
    assignment = SplitAssignment.from_jsonl(Path(args.split).read_text())
    ids, records, rejects = _load_split_corpus(args)
    fps = {rid: fingerprint(r) for rid, r in zip(ids, records)}
    curves = shift_report(assignment, fps, top=args.top)
    lines = ["curve,similarity,cumulative_fraction"]
    for name, points in curves.items():
        for x, y in points:
            lines.append(f"{name},{x:.6f},{y:.6f}")
    _write(args.out, "\n".join(lines) + "\n")
    return _finish_with_rejects(rejects, args.rejects)


def _cmd_decode(args) -> int:
    train_rows = [r for r in _read_corpus_tsv(args.train) if "complete_rxn" in r]
    pairs = []
    for row in train_rows:
        try:
            inc = merge_agents(parse_reaction(row["incomplete_rxn"])).serialize()
            comp = merge_agents(parse_reaction(row["complete_rxn"])).serialize()
            pairs.append((inc, comp))
        except SmilesError:
            continue
    scorer = toy_scorer(pairs)
    out, rejects = [], []
    for row in _read_corpus_tsv(args.infile):
        try:
            record = merge_agents(parse_reaction(row["incomplete_rxn"]))
        except SmilesError as exc:
            rejects.append(json.dumps({"id": row["id"], "error": str(exc)}))
            continue
        hyps = beam_search(record, scorer, beam=args.beam,
                           max_tokens=args.max_tokens,
                           constrained=not args.unconstrained)
        for rank, h in enumerate(hyps, 1):
            out.append(json.dumps({
                "id": row["id"], "rank": rank, "prediction": h.text,
                "logprob": round(h.logprob, 6), "balanced": h.balanced,
                "valid": h.valid, "constrained": h.constrained,
            }))
    _write(args.out, "\n".join(out) + ("\n" if out else ""))
    return _finish_with_rejects(rejects, args.rejects)


def _cmd_rulecomplete(args) -> int:
    rules = (load_completion_rules(args.rules) if args.rules
             else default_completion_rules())
    out, rejects = [], []
    for row in _read_corpus_tsv(args.infile):
        try:
            record = merge_agents(parse_reaction(row["incomplete_rxn"]))
        except SmilesError as exc:
            rejects.append(json.dumps({"id": row["id"], "error": str(exc)}))
            continue
        result = complete_by_rules(record, rules, args.max_applications)
        out.append(json.dumps({
            "id": row["id"], "rank": 1,
            "prediction": result.completed.serialize(),
            "confidence": round(result.confidence if result.solved else 0.0, 6),
            "solved": result.solved,
            "applied_rules": list(result.applied_rules),
            "method": "rulecomplete",
        }))
    _write(args.out, "\n".join(out) + ("\n" if out else ""))
    return _finish_with_rejects(rejects, args.rejects)


def _load_predictions(path: str) -> list[PredictionRecord]:
    return [PredictionRecord.from_json_line(line) for line in _read_lines(path)]


def _load_targets(path: str, fold_ids: set[str] | None = None):
    targets, incompletes = {}, {}
    for row in _read_corpus_tsv(path):
        if "complete_rxn" not in row:
            continue
        if fold_ids is not None and row["id"] not in fold_ids:
            continue
        try:
            targets[row["id"]] = parse_reaction(row["complete_rxn"])
            incompletes[row["id"]] = parse_reaction(row["incomplete_rxn"])
        except SmilesError:
            continue
    return targets, incompletes


def _cmd_eval(args) -> int:
    rules = load_rules(args.rules) if args.rules else default_rules()
    fold_ids = None
    if args.split:
        assignment = SplitAssignment.from_jsonl(Path(args.split).read_text())
        fold_ids = set(assignment.ids(args.fold))
    targets, incompletes = _load_targets(args.targets, fold_ids)
    predictions = [p for p in _load_predictions(args.pred) if p.id in targets]
    report = evaluate(predictions, targets, rules, incompletes=incompletes,
                      union_with_input=args.union_with_input,
                      method=args.method)
    _write(args.out, json.dumps(report.to_dict(), indent=2) + "\n")
    if args.csv:
        row = report.table_row()
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(row))
            writer.writeheader()
            writer.writerow(row)
    if args.confidence_csv:
        lines = ["outcome,confidence"]
        for outcome, values in report.confidence_by_outcome.items():
            for v in values:
                lines.append(f"{outcome},{v:.6f}")
        _write(args.confidence_csv, "\n".join(lines) + "\n")
    print(json.dumps(report.table_row()))
    return 0


def _cmd_agree(args) -> int:
    rules = load_rules(args.rules) if args.rules else default_rules()
    targets, _ = _load_targets(args.targets)
    preds_a = [p for p in _load_predictions(args.pred_a) if p.id in targets]
    preds_b = [p for p in _load_predictions(args.pred_b) if p.id in targets]
    report = agreement(preds_a, preds_b, targets, rules)
    _write(args.out, json.dumps(report.to_dict(), indent=2) + "\n")
    print(json.dumps(report.to_dict()))
    return 0


def _cmd_ingest(args) -> int:
    uspto_rows = []
    for line in _read_lines(args.uspto):
        rid, _, text = line.partition("\t")
        uspto_rows.append((rid, text))
    mech_rows = []
    for line in _read_lines(args.mech):
        rid, _, steps = line.partition("\t")
        mech_rows.append((rid, [s for s in steps.split("|") if s]))
    pairs, rejects = ingest(uspto_rows, mech_rows)
    lines = []
    for p in pairs:
        lines.append(f"{p.id}\t{p.incomplete.serialize(canonical=False)}"
                     f"\t{p.complete.serialize(canonical=False)}")
    _write(args.out, "\n".join(lines) + ("\n" if lines else ""))
    return _finish_with_rejects([r.to_json() for r in rejects], args.rejects)


def _cmd_serve(args) -> int:
    import uvicorn

    from .curation import CurationStore, create_app, load_items

    items = load_items(args.items) if args.items else []
    store = CurationStore(args.log, items,
                          min_annotations=args.min_annotations)
    app = create_app(store)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# Argument wiring
# ---------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="rxnbalance",
                     description="reaction-completion benchmark toolkit")
    parser.add_argument("--config", help="JSON file of default flag values")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        return p

    p = add("canon", _cmd_canon, help="canonicalize reaction SMILES lines")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rejects")
    p.add_argument("--merge-agents", action="store_true")

    p = add("balance", _cmd_balance, help="per-line balance deltas")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rejects")

    p = add("stats", _cmd_stats, help="corpus incompleteness statistics")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)

    p = add("fingerprint", _cmd_fingerprint, help="reaction fingerprints")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rejects")
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("--n-bits", type=int, default=2048)

    for name in ("split",):
        p = add(name, _cmd_split, help="build a benchmark split")
        p.add_argument("--in", dest="infile", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--rejects")
        p.add_argument("--type", choices=("random", "group", "extreme-ood"),
                       required=True)
        p.add_argument("--seed", type=int, default=_seed_default())
        p.add_argument("--knn-k", type=int, default=100)
        p.add_argument("--threshold", type=float, default=0.55)
        p.add_argument("--n-clusters", type=int, default=10)
        p.add_argument("--ood-top-fraction", type=float, default=0.20)
        p.add_argument("--train-fraction", type=float, default=0.80)
        p.add_argument("--reduced-bits", type=int, default=256)

    p = add("shift-report", _cmd_shift_report,
            help="nearest-neighbor similarity CDFs for a split")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rejects")
    p.add_argument("--top", type=int, default=5)

    p = add("decode", _cmd_decode, help="beam-search completion")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--train", required=True,
                   help="corpus TSV with complete_rxn for the toy scorer")
    p.add_argument("--out", required=True)
    p.add_argument("--rejects")
    p.add_argument("--beam", type=int, default=5)
    p.add_argument("--max-tokens", type=int, default=256)
    p.add_argument("--unconstrained", action="store_true")

    p = add("rulecomplete", _cmd_rulecomplete, help="rule-based completion")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rejects")
    p.add_argument("--rules")
    p.add_argument("--max-applications", type=int, default=5)

    p = add("eval", _cmd_eval, help="score predictions against targets")
    p.add_argument("--pred", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.add_argument("--confidence-csv")
    p.add_argument("--rules")
    p.add_argument("--split")
    p.add_argument("--fold", default="test")
    p.add_argument("--union-with-input", action="store_true")
    p.add_argument("--method", default="")

    p = add("agree", _cmd_agree, help="cross-method agreement")
    p.add_argument("--pred-a", required=True)
    p.add_argument("--pred-b", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rules")

    p = add("ingest", _cmd_ingest, help="align incomplete rows to targets")
    p.add_argument("--uspto", required=True)
    p.add_argument("--mech", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rejects")

    p = add("serve", _cmd_serve, help="run the curation service")
    p.add_argument("--items")
    p.add_argument("--log", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8470)
    p.add_argument("--min-annotations", type=int, default=2)

    return parser


def _apply_config(argv: list[str], parser: _Parser) -> list[str]:
    """Prepend defaults from --config JSON as flags (explicit flags win)."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        parser.error("--config needs a path")
    with open(path, encoding="utf-8") as fh:
        config = json.load(fh)
    extra: list[str] = []
    for key, value in config.items():
        flag = "--" + key.replace("_", "-")
        if flag in argv:
            continue
        if isinstance(value, bool):
            if value:
                extra.append(flag)
        else:
            extra.extend([flag, str(value)])
    rest = argv[:idx] + argv[idx + 2:]
    if not rest:
        return rest + extra
    return [rest[0]] + extra + rest[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    argv = _apply_config(argv, parser)
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
