"""Token vocabulary for reaction-SMILES decoding.

Bracket atoms are single tokens, as are Cl/Br, %nn ring markers, and the
arrow. Every atom-bearing token maps to exactly one element plus its
explicit-hydrogen and formal-charge contribution; those numbers drive the
balance ledger during constrained decoding. Implicit hydrogens are invisible
at token level by design.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..chem.elements import AROMATIC_ORGANIC, ORGANIC_SUBSET
from ..chem.smiles import SmilesSyntaxError, _parse_bracket_atom

BOS = "<s>"
EOS = "</s>"
OOV = "<unk>"

_STRUCTURAL = ("(", ")", "-", "=", "#", "$", ":", "/", "\\", ".")


@dataclass(frozen=True)
class TokenInfo:
    text: str
    kind: str  # atom | arrow | dot | bond | ring | branch | bos | eos | oov
    element: str | None = None
    h_count: int = 0
    charge: int = 0


def _classify(text: str) -> TokenInfo:
    if text == BOS:
        return TokenInfo(text, "bos")
    if text == EOS:
        return TokenInfo(text, "eos")
    if text == OOV:
        return TokenInfo(text, "oov")
    if text in (">", ">>"):
        return TokenInfo(text, "arrow")
    if text == ".":
        return TokenInfo(text, "dot")
    if text in ("-", "=", "#", "$", ":", "/", "\\"):
        return TokenInfo(text, "bond")
    if text == "(" or text == ")":
        return TokenInfo(text, "branch")
    if text.isdigit() or (text.startswith("%") and text[1:].isdigit()):
        return TokenInfo(text, "ring")
    if text.startswith("["):
        draft = _parse_bracket_atom(text)
        return TokenInfo(text, "atom", draft.element, draft.explicit_h or 0,
                         draft.charge)
    if text in ORGANIC_SUBSET or text in AROMATIC_ORGANIC:
        element = text if text in ORGANIC_SUBSET else text.upper()
        return TokenInfo(text, "atom", element)
    raise SmilesSyntaxError(f"cannot classify vocabulary token {text!r}")


_LEXEME_RE = re.compile(
    r"(\[[^\]]*\]|>>|%\d\d|Cl|Br|<s>|</s>|<unk>|.)"
)


def lex(text: str) -> list[str]:
    """Split reaction-SMILES text into candidate lexemes (vocab-independent)."""
    return _LEXEME_RE.findall(text)


class TokenVocabulary:
    """Ordered token list with per-token element/charge contributions."""

    def __init__(self, tokens: list[str]):
        ordered = [BOS, EOS, OOV]
        ordered += [t for t in tokens if t not in ordered]
        self.tokens: tuple[str, ...] = tuple(ordered)
        self.index: dict[str, int] = {t: i for i, t in enumerate(self.tokens)}
        self.info: tuple[TokenInfo, ...] = tuple(_classify(t) for t in self.tokens)
        self.bos_id = self.index[BOS]
        self.eos_id = self.index[EOS]
        self.oov_id = self.index[OOV]

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    @classmethod
    def default(cls, extra: list[str] | None = None) -> "TokenVocabulary":
        tokens = [">>", ">", "."]
        tokens += list(_STRUCTURAL[:2])  # ( )
        tokens += ["-", "=", "#", ":", "/", "\\"]
        tokens += [str(d) for d in range(1, 10)]
        tokens += sorted(ORGANIC_SUBSET) + sorted(AROMATIC_ORGANIC)
        tokens += ["[H]", "[H+]", "[H-]", "[Na+]", "[K+]", "[Li+]", "[Cl-]",
                   "[Br-]", "[I-]", "[F-]", "[OH-]", "[O-]", "[NH4+]",
                   "[N+]", "[N-]", "[nH]", "[Mg+2]", "[Ca+2]", "[O]"]
        if extra:
            tokens += [t for t in extra if t not in tokens]
        return cls(tokens)

    @classmethod
    def from_corpus(cls, texts: list[str]) -> "TokenVocabulary":
        seen: dict[str, None] = {}
        for text in texts:
            for lexeme in lex(text):
                seen.setdefault(lexeme)
        return cls(list(seen))


def tokenize(s: str, vocab: TokenVocabulary) -> list[int]:
    """Maximal-munch token ids; unknown lexemes become the OOV marker."""
    out = []
    for lexeme in lex(s):
        out.append(vocab.index.get(lexeme, vocab.oov_id))
    return out


def detokenize(token_ids, vocab: TokenVocabulary) -> str:
    parts = []
    for tid in token_ids:
        if tid in (vocab.bos_id, vocab.eos_id):
            continue
        parts.append(vocab.tokens[tid])
    return "".join(parts)
