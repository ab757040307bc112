"""Main entry point for the fairvote-news pipeline CLI."""

import argparse
import logging
import sys
from pathlib import Path

from app.errors import InputError, PipelineError
from app.fairness.report import format_markdown
from app.pipeline import Pipeline, run_pipeline
from app.recommend.elections import parse_rule
from app.settings import PipelineSettings, load_settings
from app.synth import generate

logger = logging.getLogger(__name__)

STAGE_COMMANDS = ("ingest", "score", "factorize", "elect", "lexicon", "label", "evaluate", "report")


def _rule(name: str):
    try:
        return parse_rule(name)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="Flat key = value config file")
    common.add_argument("--seed", type=int, help="Single RNG seed for every random step")
    common.add_argument("--out", type=str, help="Output directory (run root, or dataset dir for synth)")
    common.add_argument("--verbose", action="store_true", help="Enable debug logging")

    voting = argparse.ArgumentParser(add_help=False)
    voting.add_argument(
        "--rule",
        type=_rule,
        action="append",
        help="Voting rule (repeatable): sntv, bloc, kborda, stv, cc, monroe, ccexact, monroeexact",
    )
    voting.add_argument("--kappa", type=int, help="Committee size (default: 10)")

    parser = argparse.ArgumentParser(
        prog="fairvote-news",
        description="Non-personalised news recommendation via voting rules, audited for fairness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("run", parents=[common, voting], help="Run every stage end to end")
    for name in STAGE_COMMANDS:
        parents = [common, voting] if name in ("elect", "evaluate", "report") else [common]
        sub.add_parser(name, parents=parents, help=f"Run the {name} stage only")

    synth = sub.add_parser("synth", parents=[common], help="Generate a synthetic dataset")
    synth.add_argument("--n-users", type=int, help="Number of users (default: 200)")
    synth.add_argument("--n-articles", type=int, help="Number of articles (default: 50)")
    synth.add_argument("--polarization", type=float, help="Own-side reading preference in [0, 1]")
    return parser


def _settings_from_args(args: argparse.Namespace) -> PipelineSettings:
    return load_settings(
        args.config,
        rng_seed=args.seed,
        kappa=getattr(args, "kappa", None),
        rules=getattr(args, "rule", None),
        paths__out_dir=args.out if args.command != "synth" else None,
        synth__n_users=getattr(args, "n_users", None),
        synth__n_articles=getattr(args, "n_articles", None),
        synth__polarization=getattr(args, "polarization", None),
    )


def _run_synth(settings: PipelineSettings, out: str | None) -> None:
    directory = Path(out) if out else Path(settings.paths.events).parent
    dataset = generate(settings.synth)
    paths = dataset.write(directory)
    print(f"✅ Synthetic dataset written to {directory}")
    for name, path in paths.items():
        print(f"   {name}: {path}")


def dispatch(args: argparse.Namespace, settings: PipelineSettings) -> None:
    if args.command == "synth":
        _run_synth(settings, args.out)
        return

    if args.command == "run":
        reports = run_pipeline(settings)
        print()
        print(format_markdown(reports))
        print(f"✅ Run complete: {settings.run_dir()}")
        return

    pipeline = Pipeline(settings)
    if args.command == "report":
        reports = pipeline.report()
        print()
        print(format_markdown(reports))
    else:
        getattr(pipeline, args.command)()
    print(f"✅ {args.command} complete: {pipeline.run_dir}")


def main(argv: list[str] | None = None) -> int:
    """
    Main entry point.

    Parses the subcommand, loads settings, runs the stage(s), and maps pipeline
    failures onto exit codes (1 input, 2 numerical, 3 instance too large).

    Args:
        argv: Command-line arguments (defaults to sys.argv[1:])

    Returns:
        Process exit code
    """
    args = build_parser().parse_args(argv)

    try:
        settings = _settings_from_args(args)
    except InputError as e:
        print(f"❌ [config] {e}", file=sys.stderr)
        return e.exit_code

    level = logging.DEBUG if args.verbose else getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        dispatch(args, settings)
    except PipelineError as e:
        stage = e.stage or args.command
        logger.debug("Stage %s failed", stage, exc_info=True)
        print(f"❌ [{stage}] {e}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        print("\nInterrupted.", file=sys.stderr)
        return 130

    return 0


if __name__ == "__main__":
    sys.exit(main())
