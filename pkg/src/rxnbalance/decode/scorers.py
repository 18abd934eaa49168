"""Pluggable scorers for the beam decoder.

The real system the benchmark targets uses a trained sequence model; at desk
scale a source-conditioned token n-gram stands in. Scorers only need
`next_logits(prefix, source) -> finite vector over the vocabulary` and must
be safe for concurrent read-only queries.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from typing import Protocol

import numpy as np

from .vocab import TokenVocabulary, tokenize


class EmptyCorpus(ValueError):
    pass


class Scorer(Protocol):
    vocab: TokenVocabulary

    def next_logits(self, prefix: tuple[int, ...],
                    source: tuple[int, ...]) -> np.ndarray: ...


class OracleScorer:
    """Assigns near-total probability to one target sequence per source."""

    def __init__(self, vocab: TokenVocabulary,
                 targets: dict[str, str], off_logit: float = -30.0):
        self.vocab = vocab
        self.off_logit = off_logit
        self._target_tokens = {
            tuple(tokenize(src, vocab)): tokenize(tgt, vocab) + [vocab.eos_id]
            for src, tgt in targets.items()
        }

    def next_logits(self, prefix, source):
        logits = np.full(len(self.vocab), self.off_logit)
        target = self._target_tokens.get(tuple(source))
        if target is not None and len(prefix) < len(target):
            logits[target[len(prefix)]] = 0.0
        else:
            logits[self.vocab.eos_id] = 0.0
        return logits


_ORDER = 4  # n-gram order: three tokens of context predict the next


class NgramScorer:
    """Source-conditioned add-one-smoothed token n-gram model."""

    def __init__(self, vocab: TokenVocabulary):
        self.vocab = vocab
        self._by_source: dict[tuple, Counter] = {}
        self._global: dict[tuple, Counter] = {}

    def _pad(self, prefix: tuple[int, ...]) -> tuple[int, ...]:
        ctx = (self.vocab.bos_id,) * (_ORDER - 1) + tuple(prefix)
        return ctx[-(_ORDER - 1):]

    def train_pair(self, source: tuple[int, ...], target: list[int]) -> None:
        seq = list(target) + [self.vocab.eos_id]
        prefix: tuple[int, ...] = ()
        for nxt in seq:
            ctx = self._pad(prefix)
            self._by_source.setdefault((source, ctx), Counter())[nxt] += 1
            self._global.setdefault(ctx, Counter())[nxt] += 1
            prefix = prefix + (nxt,)

    def next_logits(self, prefix, source):
        ctx = self._pad(tuple(prefix))
        counts = self._by_source.get((tuple(source), ctx))
        if counts is None:
            counts = self._global.get(ctx, Counter())
        total = sum(counts.values())
        v = len(self.vocab)
        probs = np.full(v, 1.0 / (total + v))
        for tid, c in counts.items():
            probs[tid] = (c + 1.0) / (total + v)
        return np.log(probs)


def toy_scorer(corpus: list[tuple[str, str]],
               vocab: TokenVocabulary | None = None) -> NgramScorer:
    """Train the n-gram stand-in from (incomplete, complete) text pairs."""
    if not corpus:
        raise EmptyCorpus("no training pairs")
    if vocab is None:
        vocab = TokenVocabulary.from_corpus(
            [s for pair in corpus for s in pair])
    scorer = NgramScorer(vocab)
    for incomplete, complete in corpus:
        scorer.train_pair(tuple(tokenize(incomplete, vocab)),
                          tokenize(complete, vocab))
    return scorer


class NoisyScorer:
    """Deterministic pseudo-random perturbation of a base scorer.

    Noise depends only on (prefix, source, seed), so decoding stays
    reproducible and safe to parallelize.
    """

    def __init__(self, base, scale: float = 1.0, seed: int = 0):
        self.base = base
        self.vocab = base.vocab
        self.scale = scale
        self.seed = seed

    def next_logits(self, prefix, source):
        logits = self.base.next_logits(prefix, source)
        key = f"{self.seed}|{tuple(prefix)}|{tuple(source)}".encode()
        digest = hashlib.blake2b(key, digest_size=8).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "big"))
        return logits + self.scale * rng.standard_normal(len(logits))


class UniformScorer:
    """Flat logits; beam order is then fully determined by the tie-break."""

    def __init__(self, vocab: TokenVocabulary):
        self.vocab = vocab

    def next_logits(self, prefix, source):
        return np.zeros(len(self.vocab))
