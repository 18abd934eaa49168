"""Length-normalized beam search with the optional balance mask.

With `constrained=False` the mask is identically zero (the unconstrained
baseline); with `constrained=True` the mask from `compute_mask` is added to
the scorer logits before the softmax. Unparseable hypotheses are returned
flagged, not dropped; running out of budget yields unfinished, flagged
hypotheses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..balance import is_balanced
from ..chem import ReactionRecord, parse_reaction
from ..chem.smiles import SmilesError
from .state import DecodeState, compute_mask
from .vocab import TokenVocabulary, detokenize, tokenize


@dataclass(frozen=True)
class DecodedHypothesis:
    text: str
    tokens: tuple[int, ...]
    logprob: float            # length-normalized
    raw_logprob: float
    record: ReactionRecord | None
    valid: bool
    balanced: bool
    finished: bool            # EOS emitted (vs. token budget exhausted)
    constrained: bool
    oov: bool


def _log_softmax(scores: np.ndarray) -> np.ndarray:
    finite = scores[np.isfinite(scores)]
    if finite.size == 0:
        return np.full_like(scores, float("-inf"))
    m = finite.max()
    log_z = m + np.log(np.exp(np.clip(scores - m, -700, 0)).sum())
    return scores - log_z


def _finalize(state: DecodeState, vocab: TokenVocabulary, finished: bool,
              constrained: bool) -> DecodedHypothesis:
    tokens = state.prefix
    gen = tuple(t for t in tokens if t != vocab.eos_id)
    text = detokenize(gen, vocab)
    record = None
    valid = False
    balanced = False
    try:
        record = parse_reaction(text)
        valid = True
        balanced = is_balanced(record)
    except SmilesError:
        record = None
    norm = state.logprob / max(len(tokens), 1)
    return DecodedHypothesis(
        text=text, tokens=tokens, logprob=norm, raw_logprob=state.logprob,
        record=record, valid=valid, balanced=balanced, finished=finished,
        constrained=constrained, oov=state.oov)


def _token_key(tokens: tuple[int, ...], vocab: TokenVocabulary) -> tuple[str, ...]:
    return tuple(vocab.tokens[t] for t in tokens)


def beam_search(input_record: ReactionRecord, scorer, beam: int = 5,
                max_tokens: int = 256, constrained: bool = True
                ) -> list[DecodedHypothesis]:
    """Decode completions of `input_record`, best (length-normalized) first.

    The source context is the canonical serialization of the input; a source
    containing out-of-vocabulary tokens disables the constraints (the mask
    is then all-zero even in constrained mode).
    """
    if beam < 1 or max_tokens < 1:
        raise ValueError("beam and max_tokens must be >= 1")
    vocab: TokenVocabulary = scorer.vocab
    source_text = input_record.serialize(canonical=True)
    source = tuple(tokenize(source_text, vocab))
    oov = vocab.oov_id in source
    root = DecodeState.initial(vocab, input_record, oov=oov)

    alive: list[DecodeState] = [root]
    done: list[DecodedHypothesis] = []
    for _step in range(max_tokens):
        if not alive:
            break
        candidates: list[tuple[float, tuple[str, ...], DecodeState, int]] = []
        for state in alive:
            logits = scorer.next_logits(state.prefix, source)
            if constrained:
                logits = logits + compute_mask(state)
            logp = _log_softmax(logits)
            for tid in range(len(vocab)):
                if logp[tid] == float("-inf"):
                    continue
                key = _token_key(state.prefix + (tid,), vocab)
                candidates.append((state.logprob + logp[tid], key, state, tid))
        if not candidates:
            break
        # Highest score first; ties resolved by lexicographic token order.
        candidates.sort(key=lambda c: (-c[0], c[1]))
        next_alive: list[DecodeState] = []
        for pos, (score, _key, state, tid) in enumerate(candidates):
            if len(next_alive) >= beam and pos >= 2 * beam:
                break
            new = state.advance(tid, score - state.logprob)
            if tid == vocab.eos_id:
                done.append(_finalize(new, vocab, True, constrained))
            elif len(next_alive) < beam:
                next_alive.append(new)
        alive = next_alive

    for state in alive:  # budget exhausted: flagged, not dropped
        done.append(_finalize(state, vocab, False, constrained))

    done.sort(key=lambda h: (-h.logprob, _token_key(h.tokens, vocab)))
    return done[:beam]


def enumerate_reachable(input_record: ReactionRecord, vocab: TokenVocabulary,
                        max_tokens: int) -> list[DecodedHypothesis]:
    """Exhaustively expand every mask-allowed prefix up to the budget.

    This is constrained decoding with an unbounded beam: the returned set is
    exactly the strings a masked decoder can emit with EOS within
    `max_tokens` tokens. Intended for small toy vocabularies.
    """
    root = DecodeState.initial(vocab, input_record, oov=False)
    out: list[DecodedHypothesis] = []
    stack = [root]
    while stack:
        state = stack.pop()
        if len(state.prefix) >= max_tokens:
            continue
        mask = compute_mask(state)
        for tid in range(len(vocab)):
            if mask[tid] == float("-inf"):
                continue
            new = state.advance(tid)
            if tid == vocab.eos_id:
                out.append(_finalize(new, vocab, True, True))
            else:
                stack.append(new)
    out.sort(key=lambda h: h.text)
    return out
