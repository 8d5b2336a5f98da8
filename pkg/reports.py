"""
Report templates for every command.

Each renderer takes a pydantic report and an output format: json
(model_dump_json), tsv (fixed column order) or text (aligned columns with
a banner).
"""

from typing import List

import pandas as pd

from algebra import format_rat
from state import ApproxSummary, LambdaRow, PolyReport, VerifyReport

OUTPUT_FORMATS = ("json", "tsv", "text")

POLY_COLUMNS = ["polynomial", "k", "j", "coefficient"]
APPROX_COLUMNS = ["k", "j", "exact", "stationary_at", "N_max", "final_error", "tail_non_increasing"]
VERIFY_COLUMNS = ["check", "passed", "reason"]
LAMBDA_COLUMNS = ["m", "n", "recurrence", "closed_form", "quadrature", "dev_closed_form", "dev_quadrature", "flagged"]

BANNER = "=" * 80

POLY_TEMPLATE = """
{banner}
LINK: {name}   μ={mu}   crossings={crossings}   writhe={writhe}
{banner}
{body}
"""

APPROX_TEMPLATE = """
{banner}
APPROXIMATION: {name} ({which})   μ={mu}   d={d}   B round trip: {round_trip}
{banner}
{body}
"""

VERIFY_TEMPLATE = """
{banner}
INVARIANT SUITE   score {score:.2f}   {verdict}
{banner}
{body}
"""

LAMBDA_TEMPLATE = """
{banner}
LAMBDA WEIGHTS   {count} entries   {flagged} flagged
{banner}
{body}
"""


def _table(frame: pd.DataFrame, fmt: str) -> str:
    if fmt == "tsv":
        return frame.to_csv(sep="\t", index=False)
    if frame.empty:
        return "(no rows)"
    return frame.to_string(index=False)


def render_poly(report: PolyReport, fmt: str = "text") -> str:
    if fmt == "json":
        return report.model_dump_json(indent=2)
    rows = [
        {"polynomial": name, "k": m.k, "j": m.j, "coefficient": format_rat(m.coefficient)}
        for name, monomials in report.polynomials.items()
        for m in monomials
    ]
    frame = pd.DataFrame(rows, columns=POLY_COLUMNS)
    if fmt == "tsv":
        return _table(frame, fmt)
    width = max(len(name) for name in report.rendered) if report.rendered else 0
    body = "\n".join(f"{name.ljust(width)}  {text}" for name, text in report.rendered.items())
    return POLY_TEMPLATE.format(
        banner=BANNER,
        name=report.name or "(unnamed)",
        mu=report.mu,
        crossings=report.crossings,
        writhe=report.writhe,
        body=body,
    )


def render_approx(summary: ApproxSummary, fmt: str = "text") -> str:
    if fmt == "json":
        return summary.model_dump_json(indent=2)
    frame = pd.DataFrame(
        [
            {
                "k": r.k,
                "j": r.j,
                "exact": format_rat(r.exact),
                "stationary_at": r.stationary_at,
                "N_max": r.N_max,
                "final_error": f"{r.final_error:.3e}",
                "tail_non_increasing": r.tail_non_increasing,
            }
            for r in summary.rows
        ],
        columns=APPROX_COLUMNS,
    )
    if fmt == "tsv":
        return _table(frame, fmt)
    return APPROX_TEMPLATE.format(
        banner=BANNER,
        name=summary.name or "(unnamed)",
        which=summary.which,
        mu=summary.mu,
        d=summary.d,
        round_trip="exact" if summary.b_round_trip else "FAILED",
        body=_table(frame, fmt),
    )


def render_verify(report: VerifyReport, fmt: str = "text", hints: List[str] = ()) -> str:
    if fmt == "json":
        return report.model_dump_json(indent=2)
    frame = pd.DataFrame(
        [{"check": name, "passed": c.passed, "reason": c.reason} for name, c in report.checks.items()],
        columns=VERIFY_COLUMNS,
    )
    if fmt == "tsv":
        return _table(frame, fmt)
    body = _table(frame, fmt)
    if hints:
        body += "\n\nSuggestions:\n" + "\n".join(f"  - {h}" for h in hints)
    return VERIFY_TEMPLATE.format(
        banner=BANNER,
        score=report.score,
        verdict="ALL PASSED" if report.all_passed else "FAILURES",
        body=body,
    )


def render_lambda(rows: List[LambdaRow], fmt: str = "text") -> str:
    if fmt == "json":
        return "[\n" + ",\n".join(r.model_dump_json(indent=2) for r in rows) + "\n]"
    frame = pd.DataFrame([r.model_dump() for r in rows], columns=LAMBDA_COLUMNS)
    if fmt == "tsv":
        return _table(frame, fmt)
    return LAMBDA_TEMPLATE.format(
        banner=BANNER,
        count=len(rows),
        flagged=sum(1 for r in rows if r.flagged),
        body=_table(frame, fmt),
    )
