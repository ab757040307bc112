"""Generate a synthetic dataset and run the whole pipeline over it."""

import argparse
import logging
import sys
from pathlib import Path

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from app.errors import PipelineError
from app.fairness.report import format_markdown
from app.pipeline import run_pipeline
from app.settings import load_settings
from app.synth import generate


def main():
    """Synthesize, run every stage, and print the results table."""
    parser = argparse.ArgumentParser(description="Run the pipeline end to end on synthetic data")
    parser.add_argument("--out", type=str, default="demo", help="Directory for the dataset and runs")
    parser.add_argument("--seed", type=int, default=7, help="RNG seed")
    parser.add_argument("--n-users", type=int, default=200, help="Number of synthetic users")
    parser.add_argument("--n-articles", type=int, default=50, help="Number of synthetic articles")
    parser.add_argument("--polarization", type=float, default=0.8, help="Own-side reading preference")
    parser.add_argument("--kappa", type=int, default=10, help="Committee size")
    args = parser.parse_args()

    logging.basicConfig(level=logging.WARNING)

    out = Path(args.out)
    data_dir = out / "data"
    settings = load_settings(
        None,
        rng_seed=args.seed,
        kappa=args.kappa,
        synth__n_users=args.n_users,
        synth__n_articles=args.n_articles,
        synth__polarization=args.polarization,
        paths__events=str(data_dir / "events.jsonl"),
        paths__corpus=str(data_dir / "corpus.jsonl"),
        paths__left_corpus=str(data_dir / "left_corpus.jsonl"),
        paths__right_corpus=str(data_dir / "right_corpus.jsonl"),
        paths__out_dir=str(out / "runs"),
    )

    print(f"🧪 Generating {args.n_users} users x {args.n_articles} articles (seed {args.seed})...")
    generate(settings.synth).write(data_dir)

    try:
        reports = run_pipeline(settings)
    except PipelineError as e:
        print(f"❌ [{e.stage}] {e}")
        sys.exit(e.exit_code)

    print()
    print(format_markdown(reports))
    print(f"✅ Artifacts in {settings.run_dir()}")


if __name__ == "__main__":
    main()
