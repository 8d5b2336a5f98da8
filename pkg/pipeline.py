"""
Approximation pipeline using LangGraph.

Orchestrates a multi-step workflow:
1. Load input → link diagram (PD code / braid) or a coefficient table
2. Compute polynomial → skein engine
3. Build table → a_{kj} grid, z-floor enforced
4. Recover intermediates → w_{Nq} and B_{mj} via the row Vandermonde system
5. Recover coefficients → a_{kj} via the transposed system, stationarity index
6. Approximate → lambda-weighted partial sums per (k, j)
7. Certify → collect rows and flag anything that did not converge
"""

import json
import logging
from pathlib import Path
from typing import Dict

from langgraph.graph import END, StateGraph

from algebra import DUBROVNIK_LABELS, HOMFLY_LABELS, DiagramParseError, DomainError, UnsupportedInputError
from approx import (
    CONVERGENCE_TARGET,
    B_coeff,
    CoeffTable,
    approx_sequence,
    coeff_table,
    recover_B_from_w,
    stationarity_index,
    w_direct,
)
from corpus import load_link
from diagram import components, from_braid, parse_braid
from skein import SkeinEngine
from state import ApproxState, CoeffTableFile, CoefficientRow, RunConfig

logger = logging.getLogger(__name__)


def load_table(path: str, which: str = "homflypt") -> CoeffTable:
    """Read a coefficient table from JSON: {"mu": m, "d": d, "entries": [[k, j, "num/den"], ...]}."""
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise DiagramParseError(f"cannot read coefficient table {path}: {e}", 0) from e
    parsed = CoeffTableFile.model_validate(raw)
    labels = HOMFLY_LABELS if which == "homflypt" else DUBROVNIK_LABELS
    entries = parsed.rational_entries()
    derived = max([max(abs(k), j) for (k, j), c in entries.items() if c] + [0])
    if derived > parsed.d:
        raise DomainError(f"table declares d={parsed.d} but holds an entry of degree {derived}")
    return CoeffTable(parsed.mu, parsed.d, entries, labels)


# ============================================================================
# NODES
# ============================================================================

def load_input(state: ApproxState) -> Dict:
    """Read the link or table named in the config."""
    config = state.run_config
    logger.info("📥 Loading input...")
    if config.table_path:
        table = load_table(config.table_path, config.which_or_default)
        state.log_step("load_input", {"table": config.table_path}, f"mu={table.mu}")
        return {"name": Path(config.table_path).stem, "table": table, "mu": table.mu, "steps": state.steps}
    if config.braid:
        diagram = from_braid(parse_braid(config.braid), name=config.braid)
    elif config.pd_path:
        diagram = load_link(config.pd_path)
    else:
        raise UnsupportedInputError("no input given: pass --pd, --braid or --table")
    logger.info(f"  ✓ {diagram.crossing_count} crossings, {components(diagram)} components")
    state.log_step("load_input", {"pd": config.pd_path, "braid": config.braid}, diagram.crossing_count)
    return {"name": diagram.name, "diagram": diagram, "mu": components(diagram), "steps": state.steps}


def compute_polynomial(state: ApproxState) -> Dict:
    if state.diagram is None:
        return {}
    which = state.run_config.which_or_default
    logger.info(f"🧮 Computing {which} polynomial...")
    engine = SkeinEngine(state.run_config.crossing_cap)
    polynomial = engine.polynomial(state.diagram, which)
    logger.info(f"  ✓ {which} = {polynomial}")
    state.log_step("compute_polynomial", {"which": which}, str(polynomial))
    return {"polynomial": polynomial, "steps": state.steps}


def build_table(state: ApproxState) -> Dict:
    table = state.table if state.table is not None else coeff_table(state.polynomial, state.mu)
    if state.run_config.q_max < -table.mu + 1:
        raise DomainError(f"q_max={state.run_config.q_max} lies below -mu+1 = {-table.mu + 1}")
    logger.info(f"✓ table built: μ={table.mu} d={table.degree_d}")
    state.log_step("build_table", {"mu": table.mu}, len(table.entries))
    return {"table": table, "steps": state.steps}


def recover_intermediates(state: ApproxState) -> Dict:
    """w_{N,q} for N = 1..q+mu, then B recovered from them and compared with the direct sums."""
    t = state.table
    w_values = {}
    round_trip = {}
    for q in range(-t.mu + 1, state.run_config.q_max + 1):
        n = q + t.mu
        w_values[q] = [w_direct(t, N, q) for N in range(1, n + 1)]
        recovered = recover_B_from_w(t, q, n)
        round_trip[q] = recovered == [B_coeff(t, p, q - p) for p in range(n)]
        if not round_trip[q]:
            logger.warning(f"  ✗ B recovery differs from the direct sums at q={q}")
    logger.info(f"  ✓ B recovered for q ≤ {state.run_config.q_max}")
    state.log_step("recover_intermediates", {"q_max": state.run_config.q_max}, round_trip)
    return {"w_values": w_values, "b_round_trip": round_trip, "steps": state.steps}


def recover_coefficients(state: ApproxState) -> Dict:
    t = state.table
    stationarity = {j: stationarity_index(t, j) for j in t.j_values}
    logger.info(f"  ✓ stationarity indices: {stationarity}")
    state.log_step("recover_coefficients", {}, stationarity)
    return {"stationarity": stationarity, "steps": state.steps}


def approximate(state: ApproxState) -> Dict:
    t = state.table
    config = state.run_config
    logger.info(f"📈 Summing lambda series to N={config.N_max}...")
    reports = [approx_sequence(t, k, j, config.N_max, config.precision_bits) for k, j in t.support]
    for report in reports:
        logger.info(f"  a[{report.target[0]},{report.target[1]}]: final error {report.final_error:.2e}")
    return {"approx_reports": reports}


def certify(state: ApproxState) -> Dict:
    rows = [
        CoefficientRow(
            k=r.target[0],
            j=r.target[1],
            exact=r.exact_value,
            stationary_at=state.stationarity.get(r.target[1]),
            N_max=r.N_max,
            final_error=r.final_error,
            tail_non_increasing=r.tail_non_increasing,
            terms_needed=r.terms_needed,
        )
        for r in state.approx_reports
    ]
    errors = [
        f"a[{row.k},{row.j}] did not converge (error {row.final_error:.2e})"
        for row in rows
        if row.final_error >= CONVERGENCE_TARGET
    ]
    if not all(state.b_round_trip.values()):
        errors.append("B recovery round trip failed")
    for message in errors:
        logger.warning(f"  ✗ {message}")
    return {"rows": rows, "errors": errors, "certified": not errors}


# ============================================================================
# GRAPH
# ============================================================================

def build_pipeline_graph():
    """
    Construct the LangGraph StateGraph for the approximation pipeline.

    Returns: compiled graph
    """
    graph = StateGraph(ApproxState)

    graph.add_node("load_input", load_input)
    graph.add_node("compute_polynomial", compute_polynomial)
    graph.add_node("build_table", build_table)
    graph.add_node("recover_intermediates", recover_intermediates)
    graph.add_node("recover_coefficients", recover_coefficients)
    graph.add_node("approximate", approximate)
    graph.add_node("certify", certify)

    graph.set_entry_point("load_input")
    graph.add_edge("load_input", "compute_polynomial")
    graph.add_edge("compute_polynomial", "build_table")
    graph.add_edge("build_table", "recover_intermediates")
    graph.add_edge("recover_intermediates", "recover_coefficients")
    graph.add_edge("recover_coefficients", "approximate")
    graph.add_edge("approximate", "certify")
    graph.add_edge("certify", END)

    return graph.compile()


def run_pipeline(config: RunConfig) -> ApproxState:
    """Run every step for one input and return the final state."""
    logger.info(f"{'=' * 70}")
    logger.info("APPROXIMATION PIPELINE")
    logger.info(f"{'=' * 70}")
    result = build_pipeline_graph().invoke(ApproxState(run_config=config))
    if isinstance(result, ApproxState):
        return result
    return ApproxState(**result)
