"""User satisfaction, reference bias rho, and the bias of a recommended set."""

import logging
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from app.errors import InputError, MetricError
from app.fairness.lexicon import ArticleLabel, SeedLexicon, Side, count_seed_hits
from app.ingestion.corpus import ArticleDoc
from app.ingestion.events import InteractionLog
from app.recommend.elections import Committee, RuleId, rank_by_score
from app.recommend.scoring import ScoreMatrix

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["rule", "kappa", "satisfaction", "bias", "rho", "left_count", "right_count"]


class FairnessReport(BaseModel):
    """One row of the results table: how a committee fares for users and balance."""

    rule: RuleId
    satisfaction: float = Field(ge=0, le=1)
    bias: float = Field(ge=-1, le=1)
    rho: float = Field(gt=0)
    left_count: int
    right_count: int
    kappa: int


def top_kappa_sets(matrix: ScoreMatrix, kappa: int) -> list[set[str]]:
    """Each user's kappa best articles in V*, ranked exactly as their ballot."""
    completed = matrix.require_completed()
    top = rank_by_score(completed)[:, :kappa]
    return [{matrix.articles[j] for j in row} for row in top.tolist()]


def satisfaction(committee: Committee, matrix: ScoreMatrix, kappa: int) -> float:
    """
    Mean over users of |W intersect Top-kappa_u| / kappa.

    Args:
        committee: Winners W (must have exactly kappa members)
        matrix: Completed score matrix V*
        kappa: Committee size

    Returns:
        Satisfaction in [0, 1]
    """
    if len(committee.winners) != kappa:
        raise InputError(
            f"committee has {len(committee.winners)} winners but kappa={kappa}", stage="evaluate"
        )
    winners = set(committee.winners)
    overlaps = [len(winners & top) for top in top_kappa_sets(matrix, kappa)]
    return float(np.mean(overlaps)) / kappa


def reference_bias(log: InteractionLog, labels: list[ArticleLabel]) -> float:
    """
    rho = total reading time on Left articles / total reading time on Right articles.

    Neutral articles count towards neither side.
    """
    side_of = {label.article_id: label.label for label in labels}
    time_on = {Side.LEFT: 0.0, Side.RIGHT: 0.0, Side.NEUTRAL: 0.0}
    for article, seconds in sorted(log.total_time_by_article().items()):
        time_on[side_of.get(article, Side.NEUTRAL)] += seconds

    if time_on[Side.RIGHT] <= 0:
        raise MetricError("no reading time on right-labelled articles; rho is undefined", stage="evaluate")
    if time_on[Side.LEFT] <= 0:
        raise MetricError("no reading time on left-labelled articles; rho would be 0", stage="evaluate")

    rho = time_on[Side.LEFT] / time_on[Side.RIGHT]
    logger.info(
        "Reference bias rho=%.4f (left %.1fs, right %.1fs, neutral %.1fs)",
        rho,
        time_on[Side.LEFT],
        time_on[Side.RIGHT],
        time_on[Side.NEUTRAL],
    )
    return rho


def bias(left_count: int, right_count: int, rho: float) -> float:
    """
    (-leftCount + rho * rightCount) / (leftCount + rho * rightCount).

    Negative means left-leaning, positive right-leaning, relative to rho.
    """
    if rho <= 0:
        raise MetricError(f"rho must be positive, got {rho}", stage="evaluate")
    denominator = left_count + rho * right_count
    if denominator <= 0:
        raise MetricError("no ideological evidence in set", stage="evaluate")
    return (-left_count + rho * right_count) / denominator


def evaluate_committee(
    committee: Committee,
    matrix: ScoreMatrix,
    corpus: list[ArticleDoc],
    lexicon: SeedLexicon,
    rho: float,
) -> FairnessReport:
    """Satisfaction and bias of one committee; bias counts seeds in the winners' bodies."""
    by_id = {doc.article_id: doc for doc in corpus}
    missing = [a for a in committee.winners if a not in by_id]
    if missing:
        raise InputError(f"winning articles missing from corpus: {', '.join(missing)}", stage="evaluate")

    left_count, right_count = count_seed_hits([by_id[a] for a in committee.winners], lexicon)
    try:
        value = bias(left_count, right_count, rho)
    except MetricError as e:
        raise MetricError(f"{committee.rule.value}: {e}", stage="evaluate") from e

    return FairnessReport(
        rule=committee.rule,
        satisfaction=satisfaction(committee, matrix, committee.kappa),
        bias=value,
        rho=rho,
        left_count=left_count,
        right_count=right_count,
        kappa=committee.kappa,
    )


def write_reports(reports: list[FairnessReport], path: str | Path) -> None:
    frame = pd.DataFrame([r.model_dump(mode="json") for r in reports], columns=REPORT_COLUMNS)
    frame.to_csv(path, index=False, lineterminator="\n")


def read_reports(path: str | Path) -> list[FairnessReport]:
    frame = pd.read_csv(path, dtype={"rule": str}, float_precision="round_trip")
    return [FairnessReport.model_validate(row) for row in frame.to_dict(orient="records")]
