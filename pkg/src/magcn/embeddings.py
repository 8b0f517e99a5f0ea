"""Sentiment-lexicon ingestion and construction of the language input.

Each token contributes its word vector concatenated with a trainable
sentiment embedding row selected by lexicon membership, so the flag
"is this a sentiment word" enters the model as a learnable feature.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ConfigError, DimensionError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Lexicon:
    """Case-insensitive sets of opinion words. Disjoint by construction."""

    positive_words: frozenset[str]
    negative_words: frozenset[str]
    conflicts: int = 0

    def is_sentiment_word(self, word: str) -> bool:
        w = word.lower()
        return w in self.positive_words or w in self.negative_words

    def polarity(self, word: str) -> int:
        """0 = not in lexicon, 1 = positive, 2 = negative."""
        w = word.lower()
        if w in self.positive_words:
            return 1
        if w in self.negative_words:
            return 2
        return 0


def _read_words(path) -> set[str]:
    words: set[str] = set()
    with open(path, encoding="utf-8", errors="replace") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith(";"):
                continue
            words.add(line.lower())
    return words


def load_lexicon(positive_path, negative_path) -> Lexicon:
    """Load one-word-per-line files; ';' lines are comments.

    A word listed in both files is dropped from both and counted as a
    conflict, which keeps loading order-independent.
    """
    pos = _read_words(positive_path)
    neg = _read_words(negative_path)
    both = pos & neg
    if both:
        log.warning("lexicon: %d words appear in both files; dropped", len(both))
    return Lexicon(
        positive_words=frozenset(pos - both),
        negative_words=frozenset(neg - both),
        conflicts=len(both),
    )


def sentiment_flags(tokens: list[str], lex: Lexicon, polarity_aware: bool = False) -> list[int]:
    """Per-token lexicon membership: 1 for sentiment words, else 0.

    With ``polarity_aware`` the flag distinguishes positive (1) from
    negative (2) words instead of pooling them.
    """
    if polarity_aware:
        return [lex.polarity(t) for t in tokens]
    return [1 if lex.is_sentiment_word(t) else 0 for t in tokens]


@dataclass
class SentimentEmbedding:
    """Trainable lookup table keyed by sentiment flag.

    Row 0 encodes "not a sentiment word"; the remaining rows encode
    sentiment words (one row in the binary variant, positive/negative rows
    in the polarity-aware variant).
    """

    table: Tensor
    width: int

    @classmethod
    def create(cls, width: int, rng: np.random.Generator,
               polarity_aware: bool = False) -> "SentimentEmbedding":
        if width < 0:
            raise ConfigError(f"sentiment width must be >= 0, got {width}")
        rows = 3 if polarity_aware else 2
        # one independent draw per row so the rows start distinct
        data = np.stack([
            np.random.default_rng(rng.integers(2**63)).uniform(-0.1, 0.1, width)
            for _ in range(rows)
        ]) if width else np.zeros((rows, 0))
        return cls(table=Tensor(data, requires_grad=True), width=width)

    @property
    def num_rows(self) -> int:
        return self.table.shape[0]


@dataclass
class TokenInput:
    """Either pre-extracted word vectors or token ids into a trainable table."""

    word_vectors: Tensor | None = None
    token_ids: list[int] | None = None
    embedding_table: Tensor | None = None

    def __post_init__(self):
        has_vec = self.word_vectors is not None
        has_ids = self.token_ids is not None
        if has_vec == has_ids:
            raise ConfigError("TokenInput: exactly one of word_vectors / token_ids")
        if has_ids and self.embedding_table is None:
            raise ConfigError("TokenInput: token_ids require an embedding_table")
        if self.length() < 1:
            raise ConfigError("TokenInput: empty sequence")

    def length(self) -> int:
        if self.word_vectors is not None:
            return self.word_vectors.shape[0]
        return len(self.token_ids)

    def vectors(self) -> Tensor:
        if self.word_vectors is not None:
            return self.word_vectors
        return ad.gather_rows(self.embedding_table, self.token_ids)


def build_language_input(tok: TokenInput, flags: list[int],
                         se: SentimentEmbedding) -> tuple[Tensor, Tensor]:
    """Rows of [word vector; sentiment embedding of its flag].

    Returns the concatenated language input and the sentiment rows
    separately; the sentiment rows are reused later when fusing the
    bimodal representations.
    """
    n = tok.length()
    if len(flags) != n:
        raise DimensionError(f"flags length {len(flags)} != token count {n}")
    if any(f < 0 or f >= se.num_rows for f in flags):
        raise DimensionError("flag outside sentiment table rows")
    vectors = tok.vectors()
    sentiment = ad.gather_rows(se.table, flags)
    if se.width == 0:
        return vectors, sentiment
    return ad.concat_cols([vectors, sentiment]), sentiment
