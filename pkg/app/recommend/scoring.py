"""Turn reading time into the observed user x article score matrix V."""

import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import pandas as pd

from app.errors import InputError
from app.ingestion.events import InteractionLog

logger = logging.getLogger(__name__)

SCORE_MIN = 1.0
SCORE_MAX = 10.0
DEGENERATE_SCORE = (SCORE_MIN + SCORE_MAX) / 2  # users whose raw scores are all equal

TRIPLET_COLUMNS = ["user_id", "article_id", "score"]


@dataclass(frozen=True)
class ArticleStats:
    article_id: str
    total_time: float  # seconds, summed over all users
    viewer_count: int  # N_a


@dataclass(frozen=True)
class ScoreMatrix:
    """
    Observed scores V and, once completed, the dense matrix V*.

    Users and articles are kept in ascending id order, so column index order is
    also the global tie-break order.
    """

    users: tuple[str, ...]
    articles: tuple[str, ...]
    observed: dict[tuple[str, str], float] = field(compare=False)
    completed: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScoreMatrix):
            return NotImplemented
        if (self.users, self.articles, self.observed) != (other.users, other.articles, other.observed):
            return False
        if self.completed is None or other.completed is None:
            return self.completed is None and other.completed is None
        return np.array_equal(self.completed, other.completed)

    __hash__ = None  # type: ignore[assignment]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.users), len(self.articles)

    def user_position(self) -> dict[str, int]:
        return {u: i for i, u in enumerate(self.users)}

    def article_position(self) -> dict[str, int]:
        return {a: j for j, a in enumerate(self.articles)}

    def observed_entries(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Observed (row, col, value) arrays in user-major, then article order."""
        rows_of = self.user_position()
        cols_of = self.article_position()
        keyed = sorted((rows_of[u], cols_of[a], v) for (u, a), v in self.observed.items())
        rows = np.array([k[0] for k in keyed], dtype=np.intp)
        cols = np.array([k[1] for k in keyed], dtype=np.intp)
        values = np.array([k[2] for k in keyed], dtype=np.float64)
        return rows, cols, values

    def dense_observed(self) -> np.ndarray:
        """V as a dense array with NaN where no score was observed."""
        dense = np.full(self.shape, np.nan)
        rows, cols, values = self.observed_entries()
        dense[rows, cols] = values
        return dense

    def with_completed(self, completed: np.ndarray) -> "ScoreMatrix":
        if completed.shape != self.shape:
            raise InputError(
                f"completed matrix has shape {completed.shape}, expected {self.shape}",
                stage="factorize",
            )
        return replace(self, completed=completed)

    def require_completed(self) -> np.ndarray:
        if self.completed is None:
            raise InputError("score matrix has not been completed; run factorize first")
        return self.completed


def article_stats(log: InteractionLog) -> dict[str, ArticleStats]:
    """Per-article total active time and viewer count N_a."""
    totals: dict[str, float] = defaultdict(float)
    viewers: dict[str, int] = defaultdict(int)
    for (_, article), seconds in log.total_time().items():
        totals[article] += seconds
        viewers[article] += 1
    return {
        a: ArticleStats(article_id=a, total_time=totals[a], viewer_count=viewers[a])
        for a in sorted(totals)
    }


def raw_scores(log: InteractionLog) -> dict[tuple[str, str], float]:
    """
    Score(u, a) = ActTime(u, a) / sum_u' ActTime(u', a) * N_a.

    For a fixed article the scores sum to N_a.

    Args:
        log: Non-empty interaction log

    Returns:
        Map (user, article) -> raw score for every observed pair
    """
    if not len(log):
        raise InputError("interaction log is empty", stage="score")

    stats = article_stats(log)
    return {
        (user, article): seconds / stats[article].total_time * stats[article].viewer_count
        for (user, article), seconds in sorted(log.total_time().items())
    }


def rescale_per_user(raw: dict[tuple[str, str], float]) -> ScoreMatrix:
    """
    Map each user's raw scores affinely onto [1, 10].

    The user's minimum goes to 1 and maximum to 10; a user with a single score
    or all-equal scores gets 5.5 everywhere.

    Args:
        raw: Non-empty map (user, article) -> raw score

    Returns:
        ScoreMatrix holding the observed scores only
    """
    if not raw:
        raise InputError("no raw scores to rescale", stage="score")

    by_user: dict[str, list[tuple[str, float]]] = defaultdict(list)
    for (user, article), value in raw.items():
        by_user[user].append((article, value))

    observed: dict[tuple[str, str], float] = {}
    for user, entries in by_user.items():
        values = [v for _, v in entries]
        low, high = min(values), max(values)
        span = high - low
        for article, value in entries:
            if span == 0:
                observed[(user, article)] = DEGENERATE_SCORE
            else:
                scaled = SCORE_MIN + (value - low) / span * (SCORE_MAX - SCORE_MIN)
                # pin the extremes so rounding never leaves [1, 10]
                observed[(user, article)] = min(SCORE_MAX, max(SCORE_MIN, scaled))

    users = tuple(sorted(by_user))
    articles = tuple(sorted({a for _, a in raw}))
    logger.info(
        "Score matrix: %d users x %d articles, %d observed (%.1f%% dense)",
        len(users),
        len(articles),
        len(observed),
        100.0 * len(observed) / (len(users) * len(articles)),
    )
    return ScoreMatrix(users=users, articles=articles, observed=observed)


def build_score_matrix(log: InteractionLog) -> ScoreMatrix:
    return rescale_per_user(raw_scores(log))


def write_triplets(matrix: ScoreMatrix, path: str | Path, completed: bool = False) -> None:
    """
    Write scores as ``user_id,article_id,score`` rows.

    Args:
        matrix: Score matrix
        path: Output CSV
        completed: Write every cell of V* instead of the observed entries
    """
    if completed:
        dense = matrix.require_completed()
        frame = pd.DataFrame(
            {
                "user_id": np.repeat(matrix.users, len(matrix.articles)),
                "article_id": np.tile(matrix.articles, len(matrix.users)),
                "score": dense.ravel(),
            }
        )
    else:
        rows, cols, values = matrix.observed_entries()
        frame = pd.DataFrame(
            {
                "user_id": [matrix.users[i] for i in rows],
                "article_id": [matrix.articles[j] for j in cols],
                "score": values,
            }
        )
    frame.to_csv(path, index=False, columns=TRIPLET_COLUMNS, lineterminator="\n")


def _read_triplet_frame(path: str | Path) -> pd.DataFrame:
    frame = pd.read_csv(
        path,
        dtype={"user_id": str, "article_id": str, "score": np.float64},
        float_precision="round_trip",
        keep_default_na=False,
    )
    if list(frame.columns) != TRIPLET_COLUMNS:
        raise InputError(f"{path}: expected columns {TRIPLET_COLUMNS}, got {list(frame.columns)}")
    return frame


def read_triplets(path: str | Path, completed_path: str | Path | None = None) -> ScoreMatrix:
    """Load observed triplets, plus a dense completed matrix when given."""
    frame = _read_triplet_frame(path)
    observed = {
        (u, a): float(s) for u, a, s in zip(frame["user_id"], frame["article_id"], frame["score"])
    }
    matrix = ScoreMatrix(
        users=tuple(sorted(set(frame["user_id"]))),
        articles=tuple(sorted(set(frame["article_id"]))),
        observed=observed,
    )
    if completed_path is None:
        return matrix

    full = _read_triplet_frame(completed_path)
    rows_of = matrix.user_position()
    cols_of = matrix.article_position()
    if len(full) != len(matrix.users) * len(matrix.articles):
        raise InputError(f"{completed_path}: expected {matrix.shape[0] * matrix.shape[1]} rows")
    dense = np.full(matrix.shape, np.nan)
    try:
        dense[[rows_of[u] for u in full["user_id"]], [cols_of[a] for a in full["article_id"]]] = full[
            "score"
        ].to_numpy()
    except KeyError as e:
        raise InputError(f"{completed_path}: id {e} not present in observed scores") from e
    return matrix.with_completed(dense)
