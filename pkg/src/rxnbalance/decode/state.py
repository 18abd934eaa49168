"""Decode-time balance ledger and the additive token mask.

The mask keeps hypotheses completable: in the reactant phase the arrow is
blocked while the generated reactants still lack atoms the input's product
side requires; in the product phase atom tokens of already-balanced elements
are blocked and end-of-sequence stays blocked until every non-hydrogen
element and the net formal charge balance. Hydrogen is exempt throughout
because implicit counts are invisible at token level. Sources containing
out-of-vocabulary tokens disable the constraints entirely.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..chem import ReactionRecord, merge_agents, side_formula
from .vocab import TokenVocabulary

NEG_INF = float("-inf")


@dataclass(frozen=True)
class DecodeState:
    vocab: TokenVocabulary
    prefix: tuple[int, ...] = ()
    phase: str = "reactant"  # flips exactly once, at the first arrow token
    reactant_counts: tuple[tuple[str, int], ...] = ()
    product_counts: tuple[tuple[str, int], ...] = ()
    reactant_charge: int = 0
    product_charge: int = 0
    # Non-hydrogen element counts of the incomplete input's product side.
    input_product_need: tuple[tuple[str, int], ...] = ()
    oov: bool = False
    logprob: float = 0.0

    @classmethod
    def initial(cls, vocab: TokenVocabulary, input_record: ReactionRecord,
                oov: bool = False) -> "DecodeState":
        need = side_formula(merge_agents(input_record).products)
        need_items = tuple(sorted(
            (el, n) for el, n in need.counts.items() if el != "H"))
        return cls(vocab=vocab, input_product_need=need_items, oov=oov)

    # -- ledger ------------------------------------------------------------

    def _counts(self, side: str) -> dict[str, int]:
        return dict(self.reactant_counts if side == "reactant"
                    else self.product_counts)

    def advance(self, token_id: int, logprob: float = 0.0) -> "DecodeState":
        info = self.vocab.info[token_id]
        changes = {"prefix": self.prefix + (token_id,),
                   "logprob": self.logprob + logprob}
        if info.kind == "arrow" and self.phase == "reactant":
            changes["phase"] = "product"
        elif info.kind == "atom":
            counts = self._counts(self.phase)
            counts[info.element] = counts.get(info.element, 0) + 1
            if info.h_count:
                counts["H"] = counts.get("H", 0) + info.h_count
            packed = tuple(sorted(counts.items()))
            if self.phase == "reactant":
                changes["reactant_counts"] = packed
                changes["reactant_charge"] = self.reactant_charge + info.charge
            else:
                changes["product_counts"] = packed
                changes["product_charge"] = self.product_charge + info.charge
        return replace(self, **changes)

    def recount(self) -> "DecodeState":
        """Rebuild the ledger from the prefix alone (debug cross-check)."""
        state = DecodeState(vocab=self.vocab,
                            input_product_need=self.input_product_need,
                            oov=self.oov)
        for tid in self.prefix:
            state = state.advance(tid)
        return replace(state, logprob=self.logprob)

    def ledger_balanced(self) -> bool:
        """Non-hydrogen element and charge balance of the generated ledger."""
        left = {el: n for el, n in self.reactant_counts if el != "H"}
        right = {el: n for el, n in self.product_counts if el != "H"}
        return left == right and self.reactant_charge == self.product_charge


def compute_mask(state: DecodeState) -> np.ndarray:
    """Additive mask over the vocabulary with entries in {0, -inf}."""
    vocab = state.vocab
    mask = np.zeros(len(vocab))
    if state.oov:
        return mask  # constraints disabled: atom counting is unreliable

    mask[vocab.bos_id] = NEG_INF
    mask[vocab.oov_id] = NEG_INF

    if state.phase == "reactant":
        reactant = dict(state.reactant_counts)
        missing = any(n > reactant.get(el, 0)
                      for el, n in state.input_product_need)
        if missing:
            for tid, info in enumerate(vocab.info):
                if info.kind == "arrow":
                    mask[tid] = NEG_INF
    else:
        reactant = dict(state.reactant_counts)
        product = dict(state.product_counts)
        for tid, info in enumerate(vocab.info):
            if (info.kind == "atom" and info.element != "H"
                    and product.get(info.element, 0)
                    >= reactant.get(info.element, 0)):
                mask[tid] = NEG_INF

    if not state.ledger_balanced():
        mask[vocab.eos_id] = NEG_INF
    return mask
