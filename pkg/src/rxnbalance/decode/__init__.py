"""Constrained (and unconstrained) beam-search reaction completion."""

from .beam import DecodedHypothesis, beam_search, enumerate_reachable
from .scorers import EmptyCorpus, NgramScorer, NoisyScorer, OracleScorer, Scorer, UniformScorer, toy_scorer
from .state import DecodeState, compute_mask
from .vocab import BOS, EOS, OOV, TokenVocabulary, detokenize, tokenize

__all__ = [
    "BOS",
    "EOS",
    "OOV",
    "DecodeState",
    "DecodedHypothesis",
    "EmptyCorpus",
    "NgramScorer",
    "NoisyScorer",
    "OracleScorer",
    "Scorer",
    "TokenVocabulary",
    "UniformScorer",
    "beam_search",
    "compute_mask",
    "detokenize",
    "enumerate_reachable",
    "tokenize",
    "toy_scorer",
]
