"""Dataset ingestion, corpus statistics, and the evaluation pipeline."""

from .evaluate import (
    AgreementReport,
    EvalReport,
    PredictionRecord,
    UnknownId,
    agreement,
    evaluate,
)
from .ingest import AlignedPair, Reject, containment_map, ingest, merge_steps, transfer_stereo, validate_pair
from .stats import CorpusStats, corpus_stats, error_concentration, template_stats

__all__ = [
    "AgreementReport",
    "AlignedPair",
    "CorpusStats",
    "EvalReport",
    "PredictionRecord",
    "Reject",
    "UnknownId",
    "agreement",
    "containment_map",
    "corpus_stats",
    "error_concentration",
    "evaluate",
    "ingest",
    "merge_steps",
    "template_stats",
    "transfer_stereo",
    "validate_pair",
]
