"""Render evaluation rows as the Satisfaction / Bias results table."""

from pathlib import Path

import pandas as pd

from app.fairness.metrics import FairnessReport
from app.recommend.elections import RuleId

# results table row order, exact solvers last
TABLE_ORDER = [
    RuleId.SNTV,
    RuleId.KBORDA,
    RuleId.BLOC,
    RuleId.STV,
    RuleId.CC,
    RuleId.MONROE,
    RuleId.CC_EXACT,
    RuleId.MONROE_EXACT,
]


def order_reports(reports: list[FairnessReport]) -> list[FairnessReport]:
    return sorted(reports, key=lambda r: TABLE_ORDER.index(r.rule))


def report_frame(reports: list[FairnessReport]) -> pd.DataFrame:
    rows = [
        {
            "Election Method": r.rule.display_name,
            "Satisfaction": round(r.satisfaction, 3),
            "Bias": round(r.bias, 3),
        }
        for r in order_reports(reports)
    ]
    return pd.DataFrame(rows, columns=["Election Method", "Satisfaction", "Bias"])


def format_markdown(reports: list[FairnessReport]) -> str:
    """
    Format rows as a Markdown table.

    Args:
        reports: One FairnessReport per rule

    Returns:
        Table with columns Election Method | Satisfaction | Bias, followed by a
        line naming rho and the most balanced rule
    """
    if not reports:
        return "No results.\n"

    ordered = order_reports(reports)
    kappa = ordered[0].kappa
    output = [
        f"User Satisfaction and Organisational Bias (kappa = {kappa})",
        "",
        "| Election Method | Satisfaction | Bias |",
        "|:--|--:|--:|",
    ]
    for r in ordered:
        output.append(f"| {r.rule.display_name} | {r.satisfaction:.3f} | {r.bias:.3f} |")

    # bias closest to zero is the best balanced relative to rho
    balanced = min(ordered, key=lambda r: (abs(r.bias), TABLE_ORDER.index(r.rule)))
    output.append("")
    output.append(
        f"Reference bias rho = {ordered[0].rho:.3f}; most balanced: "
        f"{balanced.rule.display_name} (|bias| = {abs(balanced.bias):.3f})"
    )
    return "\n".join(output) + "\n"


def write_report(reports: list[FairnessReport], directory: str | Path) -> tuple[Path, Path]:
    """Write report.csv and report.md into ``directory``."""
    directory = Path(directory)
    csv_path = directory / "report.csv"
    md_path = directory / "report.md"
    report_frame(reports).to_csv(csv_path, index=False, lineterminator="\n")
    md_path.write_text(format_markdown(reports), encoding="utf-8")
    return csv_path, md_path
