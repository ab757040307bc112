"""Left/right seed-word lexicons from PMI, and majority-seed article labels."""

import logging
import math
import re
from collections import Counter
from enum import Enum
from pathlib import Path

import pandas as pd
from pydantic import BaseModel, Field

from app.errors import InputError
from app.ingestion.corpus import ArticleDoc

logger = logging.getLogger(__name__)

# runs of Unicode letters (so æ, ø, å are kept), digits and underscore excluded
TOKEN_PATTERN = re.compile(r"[^\W\d_]+")
MIN_TOKEN_LENGTH = 2

LABEL_COLUMNS = ["article_id", "label", "left_hits", "right_hits"]


class LexiconConfig(BaseModel):
    top_n: int = Field(default=25, ge=1)
    min_count: int = Field(default=3, ge=1)


class Side(str, Enum):
    LEFT = "Left"
    RIGHT = "Right"
    NEUTRAL = "Neutral"


class SeedWord(BaseModel):
    word: str
    pmi: float = Field(gt=0)


class SeedLexicon(BaseModel):
    """Seed words per side, highest PMI first. A word sits on one side only."""

    left: list[SeedWord]
    right: list[SeedWord]
    top_n: int
    incomplete: bool = False  # fewer than top_n eligible words on some side

    def words(self, side: Side) -> set[str]:
        seeds = self.left if side is Side.LEFT else self.right
        return {s.word for s in seeds}


class ArticleLabel(BaseModel):
    article_id: str
    label: Side
    left_hits: int
    right_hits: int


def tokenize(text: str) -> list[str]:
    """Lowercase letter runs of length >= 2; no stemming, no stopwords."""
    return [t for t in TOKEN_PATTERN.findall(text.lower()) if len(t) >= MIN_TOKEN_LENGTH]


def _count_tokens(corpus: list[ArticleDoc]) -> Counter:
    counts: Counter = Counter()
    for doc in corpus:
        counts.update(tokenize(doc.body))
    return counts


def build_lexicon(
    left_corpus: list[ArticleDoc],
    right_corpus: list[ArticleDoc],
    top_n: int = 25,
    min_count: int = 3,
) -> SeedLexicon:
    """
    Pick seed words by class-conditional PMI over the pooled token stream.

    PMI(w, c) = log2(P(w, c) / (P(w) P(c))) for c in {left, right}. Words seen
    fewer than ``min_count`` times overall are ignored. A word is a candidate
    for the side where its PMI is strictly positive and higher than on the other
    side; each side keeps its ``top_n`` candidates (ties by word).

    Args:
        left_corpus: Documents from left-leaning sources
        right_corpus: Documents from right-leaning sources
        top_n: Seeds kept per side
        min_count: Minimum total occurrences of a word

    Returns:
        SeedLexicon, flagged ``incomplete`` when a side has fewer than top_n seeds
    """
    if not left_corpus or not right_corpus:
        raise InputError("both training corpora must be non-empty", stage="lexicon")
    if top_n < 1:
        raise InputError(f"top_n must be >= 1, got {top_n}", stage="lexicon")

    left_counts = _count_tokens(left_corpus)
    right_counts = _count_tokens(right_corpus)
    n_left = sum(left_counts.values())
    n_right = sum(right_counts.values())
    total = n_left + n_right
    if not n_left or not n_right:
        raise InputError("a training corpus has no tokens", stage="lexicon")

    def pmi(joint: int, word_total: int, class_total: int) -> float:
        if joint == 0:
            return -math.inf
        return math.log2(joint * total / (word_total * class_total))

    candidates: dict[Side, list[SeedWord]] = {Side.LEFT: [], Side.RIGHT: []}
    for word in sorted(set(left_counts) | set(right_counts)):
        in_left, in_right = left_counts[word], right_counts[word]
        word_total = in_left + in_right
        if word_total < min_count:
            continue
        left_pmi = pmi(in_left, word_total, n_left)
        right_pmi = pmi(in_right, word_total, n_right)
        if left_pmi > 0 and left_pmi > right_pmi:
            candidates[Side.LEFT].append(SeedWord(word=word, pmi=left_pmi))
        elif right_pmi > 0 and right_pmi > left_pmi:
            candidates[Side.RIGHT].append(SeedWord(word=word, pmi=right_pmi))

    chosen = {
        side: sorted(words, key=lambda s: (-s.pmi, s.word))[:top_n]
        for side, words in candidates.items()
    }
    incomplete = any(len(words) < top_n for words in chosen.values())
    if incomplete:
        logger.warning(
            "Only %d left / %d right eligible seed words (wanted %d per side)",
            len(chosen[Side.LEFT]),
            len(chosen[Side.RIGHT]),
            top_n,
        )
    logger.info(
        "Lexicon built from %d left / %d right tokens: %d + %d seeds",
        n_left,
        n_right,
        len(chosen[Side.LEFT]),
        len(chosen[Side.RIGHT]),
    )
    return SeedLexicon(
        left=chosen[Side.LEFT], right=chosen[Side.RIGHT], top_n=top_n, incomplete=incomplete
    )


def _hits(tokens: list[str], left: set[str], right: set[str]) -> tuple[int, int]:
    return sum(t in left for t in tokens), sum(t in right for t in tokens)


def label_article(doc: ArticleDoc, lex: SeedLexicon) -> ArticleLabel:
    """
    Label an article by which side's seeds occur more often in it.

    Ties, including no seed occurrences at all, are Neutral.
    """
    if not lex.left and not lex.right:
        raise InputError("lexicon has no seed words", stage="label")
    left_hits, right_hits = _hits(tokenize(doc.body), lex.words(Side.LEFT), lex.words(Side.RIGHT))
    if left_hits > right_hits:
        label = Side.LEFT
    elif right_hits > left_hits:
        label = Side.RIGHT
    else:
        label = Side.NEUTRAL
    return ArticleLabel(
        article_id=doc.article_id, label=label, left_hits=left_hits, right_hits=right_hits
    )


def label_corpus(docs: list[ArticleDoc], lex: SeedLexicon) -> list[ArticleLabel]:
    labels = [label_article(doc, lex) for doc in docs]
    counts = Counter(label.label for label in labels)
    logger.info(
        "Labelled %d articles: %d left, %d right, %d neutral",
        len(labels),
        counts[Side.LEFT],
        counts[Side.RIGHT],
        counts[Side.NEUTRAL],
    )
    return labels


def count_seed_hits(docs: list[ArticleDoc], lex: SeedLexicon) -> tuple[int, int]:
    """Total (leftCount, rightCount) seed occurrences over a set of articles."""
    left, right = lex.words(Side.LEFT), lex.words(Side.RIGHT)
    left_count = right_count = 0
    for doc in docs:
        l, r = _hits(tokenize(doc.body), left, right)
        left_count += l
        right_count += r
    return left_count, right_count


def write_lexicon(lex: SeedLexicon, path: str | Path) -> None:
    Path(path).write_text(lex.model_dump_json(indent=2) + "\n", encoding="utf-8")


def read_lexicon(path: str | Path) -> SeedLexicon:
    return SeedLexicon.model_validate_json(Path(path).read_text(encoding="utf-8"))


def write_labels(labels: list[ArticleLabel], path: str | Path) -> None:
    frame = pd.DataFrame([label.model_dump(mode="json") for label in labels], columns=LABEL_COLUMNS)
    frame.to_csv(path, index=False, lineterminator="\n")


def read_labels(path: str | Path) -> list[ArticleLabel]:
    frame = pd.read_csv(path, dtype={"article_id": str, "label": str}, keep_default_na=False)
    return [ArticleLabel.model_validate(row) for row in frame.to_dict(orient="records")]
