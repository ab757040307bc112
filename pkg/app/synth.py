"""Synthetic users, articles and reading logs with planted ideological structure."""

import itertools
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field

from app.fairness.lexicon import ArticleLabel, Side, write_labels
from app.ingestion.corpus import ArticleDoc, serialize_corpus
from app.ingestion.events import InteractionEvent, InteractionLog, serialize_events

logger = logging.getLogger(__name__)

CONSONANTS = "bdfgklmnprstv"
VOWELS = "aeiouyæøå"
FILLER_VOCAB_SIZE = 120
FILLER_PER_DOC = 60
MARKERS_PER_DOC = 6
OWN_SIDE_BOOST = 3.0  # own-side mean reading time is (1 + boost * polarization) x base
REREAD_PROBABILITY = 0.1
MIN_TRAINING_DOCS = 25


class SynthConfig(BaseModel):
    """Shape of a generated dataset."""

    n_users: int = Field(default=200, gt=0)
    n_articles: int = Field(default=50, gt=0)
    left_fraction: float = Field(default=0.5, ge=0, le=1)
    polarization: float = Field(default=0.8, ge=0, le=1)
    seed_vocab_size: int = Field(default=25, gt=0)  # planted marker words per side
    reads_per_user: int = Field(default=6, gt=0)
    mean_active_time: float = Field(default=60.0, gt=0)  # seconds
    rng_seed: int | None = None


@dataclass(frozen=True)
class SyntheticDataset:
    log: InteractionLog
    corpus: list[ArticleDoc]
    ground_truth_labels: list[ArticleLabel]
    left_training: list[ArticleDoc]
    right_training: list[ArticleDoc]
    left_markers: tuple[str, ...]
    right_markers: tuple[str, ...]

    def write(self, directory: str | Path) -> dict[str, Path]:
        """Write the dataset in the formats the ingest stage reads."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = {
            "events": directory / "events.jsonl",
            "corpus": directory / "corpus.jsonl",
            "left_corpus": directory / "left_corpus.jsonl",
            "right_corpus": directory / "right_corpus.jsonl",
            "labels": directory / "ground_truth_labels.csv",
        }
        paths["events"].write_bytes(serialize_events(self.log))
        paths["corpus"].write_bytes(serialize_corpus(self.corpus))
        paths["left_corpus"].write_bytes(serialize_corpus(self.left_training))
        paths["right_corpus"].write_bytes(serialize_corpus(self.right_training))
        write_labels(self.ground_truth_labels, paths["labels"])
        return paths


def _vocabulary(rng: np.random.Generator, size: int) -> list[str]:
    """``size`` distinct two-syllable pseudo-words."""
    syllables = [c + v for c, v in itertools.product(CONSONANTS, VOWELS)]
    words = [a + b for a, b in itertools.product(syllables, repeat=2)]
    if size > len(words):
        raise ValueError(f"cannot make {size} distinct words from {len(words)}")
    picked = rng.choice(len(words), size=size, replace=False)
    return [words[i] for i in picked]


def _round_robin(markers: list[str], start: int, count: int) -> list[str]:
    return [markers[(start + j) % len(markers)] for j in range(count)]


def _body(
    rng: np.random.Generator,
    filler: list[str],
    own: list[str],
    other: list[str],
    slot: int,
    cross_markers: int,
) -> str:
    tokens = [filler[i] for i in rng.integers(len(filler), size=FILLER_PER_DOC)]
    tokens += _round_robin(own, slot * MARKERS_PER_DOC, MARKERS_PER_DOC)
    tokens += _round_robin(other, slot * cross_markers, cross_markers)
    order = rng.permutation(len(tokens))
    return " ".join(tokens[i] for i in order)


def _training_corpus(
    rng: np.random.Generator,
    side: Side,
    n_docs: int,
    filler: list[str],
    own: list[str],
    other: list[str],
    polarization: float,
) -> list[ArticleDoc]:
    cross = round(MARKERS_PER_DOC * (1 - polarization))
    prefix = "l" if side is Side.LEFT else "r"
    return [
        ArticleDoc(
            article_id=f"{prefix}{i:04d}",
            body=_body(rng, filler, own, other, i, cross),
            source=f"{side.value.lower()}-media",
        )
        for i in range(n_docs)
    ]


def generate(cfg: SynthConfig) -> SyntheticDataset:
    """
    Generate a reading log, platform corpus and ground-truth labels.

    Articles carry side-specific marker words; each user leans to a side and
    spends longer, on average, on articles of that side the higher the
    polarization. Everything is drawn from one generator seeded by
    ``cfg.rng_seed``.

    Args:
        cfg: Dataset shape and seed

    Returns:
        SyntheticDataset, including left/right training corpora for the lexicon
    """
    rng = np.random.default_rng(cfg.rng_seed)
    size = cfg.seed_vocab_size
    words = _vocabulary(rng, 2 * size + FILLER_VOCAB_SIZE)
    left_markers, right_markers, filler = words[:size], words[size : 2 * size], words[2 * size :]
    markers = {Side.LEFT: left_markers, Side.RIGHT: right_markers}
    opposite = {Side.LEFT: Side.RIGHT, Side.RIGHT: Side.LEFT}

    # platform articles
    n_left = round(cfg.left_fraction * cfg.n_articles)
    sides = [Side.LEFT] * n_left + [Side.RIGHT] * (cfg.n_articles - n_left)
    sides = [sides[i] for i in rng.permutation(cfg.n_articles)]
    width = len(str(cfg.n_articles))
    article_ids = [f"a{i:0{width}d}" for i in range(1, cfg.n_articles + 1)]

    article_cross = round(MARKERS_PER_DOC * (1 - cfg.polarization) / 2)
    corpus: list[ArticleDoc] = []
    labels: list[ArticleLabel] = []
    slots = {Side.LEFT: 0, Side.RIGHT: 0}
    for article_id, side in zip(article_ids, sides):
        own, other = markers[side], markers[opposite[side]]
        body = _body(rng, filler, own, other, slots[side], article_cross)
        slots[side] += 1
        corpus.append(ArticleDoc(article_id=article_id, body=body))
        own_hits, other_hits = MARKERS_PER_DOC, article_cross
        labels.append(
            ArticleLabel(
                article_id=article_id,
                label=side,
                left_hits=own_hits if side is Side.LEFT else other_hits,
                right_hits=own_hits if side is Side.RIGHT else other_hits,
            )
        )

    # reading log
    user_width = len(str(cfg.n_users))
    events: list[InteractionEvent] = []
    for u in range(1, cfg.n_users + 1):
        user_id = f"u{u:0{user_width}d}"
        user_side = Side.LEFT if rng.random() < cfg.left_fraction else Side.RIGHT
        n_reads = min(cfg.n_articles, 1 + int(rng.poisson(cfg.reads_per_user - 1)))
        for j in rng.choice(cfg.n_articles, size=n_reads, replace=False).tolist():
            mean = cfg.mean_active_time
            if sides[j] is user_side:
                mean *= 1 + OWN_SIDE_BOOST * cfg.polarization
            sessions = 2 if rng.random() < REREAD_PROBABILITY else 1
            for _ in range(sessions):
                seconds = round(max(1.0, float(rng.exponential(mean))), 1)
                events.append(
                    InteractionEvent(user_id=user_id, article_id=article_ids[j], active_time=seconds)
                )

    # stand-ins for partisan media houses
    n_train = max(MIN_TRAINING_DOCS, cfg.n_articles // 2)
    left_training = _training_corpus(
        rng, Side.LEFT, n_train, filler, left_markers, right_markers, cfg.polarization
    )
    right_training = _training_corpus(
        rng, Side.RIGHT, n_train, filler, right_markers, left_markers, cfg.polarization
    )

    log = InteractionLog.from_events(events)
    logger.info(
        "Generated %d users, %d articles (%d left), %d events",
        cfg.n_users,
        cfg.n_articles,
        n_left,
        len(events),
    )
    return SyntheticDataset(
        log=log,
        corpus=corpus,
        ground_truth_labels=labels,
        left_training=left_training,
        right_training=right_training,
        left_markers=tuple(left_markers),
        right_markers=tuple(right_markers),
    )
