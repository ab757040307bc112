"""End-to-end pipeline: ingest -> score -> factorize -> elect -> lexicon -> label -> evaluate -> report."""

import functools
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from pydantic import ValidationError

from app.errors import InputError, MissingArtifactError, PipelineError
from app.fairness import metrics
from app.fairness.lexicon import (
    build_lexicon,
    label_corpus,
    read_labels,
    read_lexicon,
    write_labels,
    write_lexicon,
)
from app.fairness.metrics import FairnessReport, evaluate_committee, reference_bias
from app.fairness.report import write_report
from app.ingestion.corpus import load_corpus, serialize_corpus
from app.ingestion.events import load_events, serialize_events
from app.recommend.elections import (
    Committee,
    RuleId,
    ballots_from_scores,
    read_committee,
    run_rule,
    write_committee,
)
from app.recommend.factorize import factorize, merge, write_factors
from app.recommend.scoring import build_score_matrix, read_triplets, write_triplets
from app.settings import PipelineSettings

logger = logging.getLogger(__name__)

STAGES = ("ingest", "score", "factorize", "elect", "lexicon", "label", "evaluate", "report")

# artifact -> stage that writes it
EVENTS = ("events.jsonl", "ingest")
CORPUS = ("corpus.jsonl", "ingest")
SCORES = ("scores.csv", "score")
COMPLETED = ("completed.csv", "factorize")
LEXICON = ("lexicon.json", "lexicon")
LABELS = ("labels.csv", "label")
EVALUATION = ("evaluation.csv", "evaluate")


def _stage(name: str):
    """Tag PipelineErrors raised inside a stage with the stage name.

    Malformed or unreadable artifacts surface as an InputError of that stage.
    """

    def decorator(func):
        @functools.wraps(func)
        def wrapper(self, *args, **kwargs):
            logger.info("Stage %s (run dir %s)", name, self.run_dir)
            try:
                return func(self, *args, **kwargs)
            except PipelineError as e:
                if e.stage is None:
                    e.stage = name
                raise
            except (ValidationError, ValueError, OSError) as e:
                raise InputError(f"unreadable input: {e}", stage=name) from e

        return wrapper

    return decorator


class Pipeline:
    """Runs stages against one run directory; each stage reads the previous stage's files."""

    def __init__(self, settings: PipelineSettings, run_dir: str | Path | None = None):
        self.settings = settings
        self.run_dir = Path(run_dir) if run_dir else settings.run_dir()
        self.run_dir.mkdir(parents=True, exist_ok=True)

    def path(self, artifact: tuple[str, str]) -> Path:
        return self.run_dir / artifact[0]

    def require(self, artifact: tuple[str, str], stage: str) -> Path:
        path = self.path(artifact)
        if not path.is_file():
            raise MissingArtifactError(str(path), required_stage=artifact[1], stage=stage)
        return path

    def committee_path(self, rule: RuleId) -> Path:
        return self.run_dir / "committees" / f"{rule.value}.json"

    @_stage("ingest")
    def ingest(self) -> None:
        log = load_events(self.settings.paths.events)
        corpus = load_corpus(self.settings.paths.corpus)
        self.path(EVENTS).write_bytes(serialize_events(log))
        self.path(CORPUS).write_bytes(serialize_corpus(corpus))
        print(f"   Ingested {len(log)} events ({log.dropped} dropped), {len(corpus)} articles")

    @_stage("score")
    def score(self) -> None:
        log = load_events(self.require(EVENTS, "score"))
        matrix = build_score_matrix(log)
        write_triplets(matrix, self.path(SCORES))
        print(f"   Scored {len(matrix.observed)} user-article pairs")

    @_stage("factorize")
    def factorize(self) -> None:
        observed = read_triplets(self.require(SCORES, "factorize"))
        result = factorize(observed, self.settings.factorization)
        completed = merge(observed, result)
        write_factors(result, observed, self.run_dir)
        write_triplets(completed, self.path(COMPLETED), completed=True)
        state = "converged" if result.converged else "did not converge"
        print(f"   Factorization {state} after {result.epochs_run} epochs (cost {result.final_cost:.4f})")

    def _completed_matrix(self, stage: str):
        return read_triplets(self.require(SCORES, stage), self.require(COMPLETED, stage))

    @_stage("elect")
    def elect(self, rules: list[RuleId] | None = None, kappa: int | None = None) -> list[Committee]:
        rules = rules or self.settings.rules
        kappa = kappa or self.settings.kappa
        profile = ballots_from_scores(self._completed_matrix("elect"))

        # rules only read the shared profile
        with ThreadPoolExecutor(max_workers=len(rules)) as pool:
            committees = list(pool.map(lambda rule: run_rule(rule, profile, kappa), rules))

        (self.run_dir / "committees").mkdir(exist_ok=True)
        for committee in committees:
            write_committee(committee, self.committee_path(committee.rule))
            print(f"   {committee.rule.display_name}: {', '.join(committee.winners)}")
        return committees

    @_stage("lexicon")
    def lexicon(self) -> None:
        paths = self.settings.paths
        lex = build_lexicon(
            load_corpus(paths.left_corpus),
            load_corpus(paths.right_corpus),
            top_n=self.settings.lexicon.top_n,
            min_count=self.settings.lexicon.min_count,
        )
        write_lexicon(lex, self.path(LEXICON))
        flag = " (incomplete)" if lex.incomplete else ""
        print(f"   Lexicon: {len(lex.left)} left / {len(lex.right)} right seed words{flag}")

    @_stage("label")
    def label(self) -> None:
        corpus = load_corpus(self.require(CORPUS, "label"))
        labels = label_corpus(corpus, read_lexicon(self.require(LEXICON, "label")))
        write_labels(labels, self.path(LABELS))

    @_stage("evaluate")
    def evaluate(self, rules: list[RuleId] | None = None) -> list[FairnessReport]:
        rules = rules or self.settings.rules
        matrix = self._completed_matrix("evaluate")
        corpus = load_corpus(self.require(CORPUS, "evaluate"))
        lex = read_lexicon(self.require(LEXICON, "evaluate"))
        labels = read_labels(self.require(LABELS, "evaluate"))
        rho = reference_bias(load_events(self.require(EVENTS, "evaluate")), labels)

        reports = []
        for rule in rules:
            path = self.committee_path(rule)
            if not path.is_file():
                raise MissingArtifactError(str(path), required_stage="elect", stage="evaluate")
            reports.append(evaluate_committee(read_committee(path), matrix, corpus, lex, rho))

        metrics.write_reports(reports, self.path(EVALUATION))
        return reports

    @_stage("report")
    def report(self) -> list[FairnessReport]:
        reports = metrics.read_reports(self.require(EVALUATION, "report"))
        csv_path, md_path = write_report(reports, self.run_dir)
        print(f"   Wrote {csv_path} and {md_path}")
        return reports

    def run(self) -> list[FairnessReport]:
        for name in STAGES:
            print(f"▶ {name}")
            result = getattr(self, name)()
        return result


def run_pipeline(settings: PipelineSettings) -> list[FairnessReport]:
    """
    Run every stage in order into ``settings.run_dir()``.

    Args:
        settings: Pipeline settings (inputs, hyperparameters, rules, kappa, seed)

    Returns:
        One FairnessReport per configured rule
    """
    pipeline = Pipeline(settings)
    reports = pipeline.run()
    logger.info("Pipeline finished: %d rules evaluated in %s", len(reports), pipeline.run_dir)
    return reports
