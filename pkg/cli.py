"""
Command-line front end.

    python cli.py poly    --braid "2: 1 1 1"
    python cli.py approx  --pd trefoil-right --format tsv
    python cli.py verify  --only lambda
    python cli.py lambda  --qmax 2 --nmax 2

Reports go to stdout, logs to stderr. Exit codes: 0 success, 1 failed
check or internal error, 2 bad input, 3 crossing cap exceeded, 4 domain
error.
"""

import argparse
import logging
import sys
from typing import List, Optional, Sequence, Tuple

from pydantic import ValidationError

from algebra import (
    CrossingCapExceeded,
    DiagramParseError,
    DomainError,
    KnotVassError,
    UnsupportedInputError,
)
from approx import lambda_table
from corpus import load_link
from diagram import components, crossing_count, from_braid, parse_braid, writhe
from pipeline import run_pipeline
from reports import OUTPUT_FORMATS, render_approx, render_lambda, render_poly, render_verify
from skein import POLYNOMIALS, SkeinEngine
from state import (
    DEFAULT_CAP,
    DEFAULT_NMAX_SUM,
    DEFAULT_PRECISION,
    LOG_LEVEL,
    Monomial,
    PolyReport,
    RunConfig,
)
from verify import InvariantSuite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_CAP = 3
EXIT_DOMAIN = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="knotvass",
        description="Link polynomial coefficients as limits of finite-type invariants",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS, default="text")
        p.add_argument("--precision", dest="precision_bits", type=int, default=DEFAULT_PRECISION)

    def link_input(p: argparse.ArgumentParser, tables: bool) -> None:
        p.add_argument("--pd", dest="pd_path", help="PD/braid file, or a corpus name such as trefoil-right")
        p.add_argument("--braid", help='braid word, e.g. "2: 1 1 1"')
        if tables:
            p.add_argument("--table", dest="table_path", help="coefficient table JSON")
        p.add_argument("--which", choices=POLYNOMIALS)
        p.add_argument("--cap", dest="crossing_cap", type=int, default=DEFAULT_CAP)

    poly = sub.add_parser("poly", help="HOMFLYPT, Dubrovnik and Kauffman polynomials of one link")
    link_input(poly, tables=False)
    common(poly)

    approx = sub.add_parser("approx", help="recover and approximate the coefficient table")
    link_input(approx, tables=True)
    approx.add_argument("--qmax", dest="q_max", type=int, default=4)
    approx.add_argument("--Nmax", dest="N_max", type=int, default=DEFAULT_NMAX_SUM)
    common(approx)

    verify = sub.add_parser("verify", help="run the invariant suite over the bundled corpus")
    verify.add_argument("--qmax", dest="q_max", type=int, default=4)
    verify.add_argument("--nmax", dest="n_max", type=int, default=6)
    verify.add_argument("--Nmax", dest="N_max", type=int, default=DEFAULT_NMAX_SUM)
    verify.add_argument("--cap", dest="crossing_cap", type=int, default=DEFAULT_CAP)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--only", help="comma-separated check names")
    verify.add_argument("--mutate", type=int, default=0, help="inject this many coefficient faults")
    common(verify)

    lam = sub.add_parser("lambda", help="tabulate the lambda weights")
    lam.add_argument("--qmax", dest="q_max", type=int, default=12, help="largest m")
    lam.add_argument("--nmax", dest="n_max", type=int, default=6, help="largest |n|")
    common(lam)

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if v is not None}
    return RunConfig(**values)


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_poly(config: RunConfig) -> Tuple[str, int]:
    if config.braid:
        diagram = from_braid(parse_braid(config.braid), name=config.braid)
    elif config.pd_path:
        diagram = load_link(config.pd_path)
    else:
        raise UnsupportedInputError("poly needs --pd or --braid")
    if diagram.is_singular:
        raise UnsupportedInputError("polynomials are defined on non-singular diagrams only")

    engine = SkeinEngine(config.crossing_cap)
    names = [config.which] if config.which else list(POLYNOMIALS)
    report = PolyReport(
        name=diagram.name,
        mu=components(diagram),
        crossings=crossing_count(diagram),
        writhe=writhe(diagram),
    )
    for name in names:
        p = engine.polynomial(diagram, name)
        report.polynomials[name] = [Monomial(k=k, j=j, coefficient=c) for k, j, c in p.sorted_terms()]
        report.rendered[name] = str(p)
        logger.info(f"✓ {name}: {p}")
    return render_poly(report, config.output_format), EXIT_OK


def cmd_approx(config: RunConfig) -> Tuple[str, int]:
    state = run_pipeline(config)
    code = EXIT_OK if state.certified else EXIT_FAILED
    return render_approx(state.summary(), config.output_format), code


def cmd_verify(config: RunConfig) -> Tuple[str, int]:
    suite = InvariantSuite(
        engine=SkeinEngine(config.crossing_cap),
        q_max=config.q_max,
        n_max=config.n_max,
        N_max=config.N_max,
        precision_bits=config.precision_bits,
        seed=config.seed,
        mutate=config.mutate,
    )
    only = [name.strip() for name in config.only.split(",") if name.strip()] if config.only else None
    results = suite.validate(only)
    report = InvariantSuite.to_report(results)
    hints = InvariantSuite.explain_failures(results)
    return render_verify(report, config.output_format, hints), EXIT_OK if report.all_passed else EXIT_FAILED


def cmd_lambda(config: RunConfig) -> Tuple[str, int]:
    rows = lambda_table(config.q_max, config.n_max, config.precision_bits)
    return render_lambda(rows, config.output_format), EXIT_OK


COMMANDS = {
    "poly": cmd_poly,
    "approx": cmd_approx,
    "verify": cmd_verify,
    "lambda": cmd_lambda,
}


def run(argv: Optional[Sequence[str]] = None) -> Tuple[str, int]:
    """Parse arguments and run one command; errors are logged and mapped to exit codes."""
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        return COMMANDS[config.command](config)
    except ValidationError as e:
        logger.error(f"✗ invalid arguments: {e}")
        return "", EXIT_BAD_INPUT
    except (DiagramParseError, UnsupportedInputError) as e:
        logger.error(f"✗ {e}")
        return "", EXIT_BAD_INPUT
    except CrossingCapExceeded as e:
        logger.error(f"✗ crossing cap exceeded: {e}")
        return "", EXIT_CAP
    except DomainError as e:
        logger.error(f"✗ domain error: {e}")
        return "", EXIT_DOMAIN
    except KnotVassError as e:
        logger.error(f"✗ {type(e).__name__}: {e}")
        return "", EXIT_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL.upper(), logging.WARNING),
        format='%(levelname)-8s | %(name)s | %(message)s',
        stream=sys.stderr,
    )
    output, code = run(argv)
    if output:
        print(output)
    return code


if __name__ == "__main__":
    sys.exit(main())
