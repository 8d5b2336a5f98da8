"""
Coefficients of link polynomials as limits of finite-type invariants.

Pipeline: polynomial -> CoeffTable a_{kj} -> w_{Nq} (substitution v := e^{Nx},
z := x) -> B_{mj} (row Vandermonde in N) -> a_{kj} again (transposed
Vandermonde in k), plus the analytic route a_{kj} = sum_m B_{mj} lambda_{m,k}
with partial sums evaluated in high precision.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from math import factorial
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import mpmath
import numpy as np

from algebra import (
    DEFAULT_PRECISION_BITS,
    HOMFLY_LABELS,
    CxFloat,
    DomainError,
    LaurentPoly2,
    LemmaViolationError,
    MissingFamilyError,
    Series,
    UnderDeterminedError,
    exp_series,
    format_cx,
    mp_context,
    rat_to_mpf,
    solve_vandermonde,
    solve_vandermonde_transposed,
)
from diagram import LinkDiagram, components
from skein import SkeinEngine
from state import ApproxReport, LambdaRow

logger = logging.getLogger(__name__)

TAIL_LENGTH = 20
CONVERGENCE_TARGET = 1e-6
LAMBDA_TOLERANCE = 1e-25


# ============================================================================
# COEFFICIENT TABLES
# ============================================================================

@dataclass(frozen=True)
class CoeffTable:
    """The grid a_{kj}(L): coefficient of x^k z^j, where x is v (or a on the Dubrovnik side)."""
    mu: int
    degree_d: int
    entries: Mapping[Tuple[int, int], Fraction]
    var_labels: Tuple[str, str] = HOMFLY_LABELS

    def __post_init__(self):
        if self.mu < 1:
            raise DomainError("a link has at least one component")
        entries = {(int(k), int(j)): Fraction(c) for (k, j), c in self.entries.items() if c != 0}
        object.__setattr__(self, "entries", entries)
        for (k, j) in entries:
            if j < -self.mu + 1:
                raise LemmaViolationError(
                    f"z^{j} lies below the floor -mu+1 = {-self.mu + 1} for mu={self.mu}"
                )
            if abs(k) > self.degree_d or j > self.degree_d:
                raise DomainError(f"entry ({k},{j}) lies outside degree {self.degree_d}")

    def a(self, k: int, j: int) -> Fraction:
        return self.entries.get((k, j), Fraction(0))

    @cached_property
    def columns(self) -> Dict[int, Dict[int, Fraction]]:
        out: Dict[int, Dict[int, Fraction]] = {}
        for (k, j), c in self.entries.items():
            out.setdefault(j, {})[k] = c
        return out

    def column(self, j: int) -> Dict[int, Fraction]:
        return self.columns.get(j, {})

    @property
    def support(self) -> List[Tuple[int, int]]:
        return sorted(self.entries, key=lambda e: (e[1], e[0]))

    @property
    def j_values(self) -> List[int]:
        return sorted(self.columns)

    def perturbed(self, k: int, j: int, delta=1) -> "CoeffTable":
        """Copy with one entry shifted by delta, for fault injection."""
        entries = dict(self.entries)
        entries[(k, j)] = entries.get((k, j), Fraction(0)) + Fraction(delta)
        degree = max(self.degree_d, abs(k), j)
        return CoeffTable(self.mu, degree, entries, self.var_labels)

    def to_polynomial(self) -> LaurentPoly2:
        return LaurentPoly2(dict(self.entries), self.var_labels)


def coeff_table(p: LaurentPoly2, mu: int) -> CoeffTable:
    low = p.min_exponent(1)
    if low is not None and low < -mu + 1:
        raise LemmaViolationError(
            f"lowest z-exponent {low} is below -mu+1 = {-mu + 1}; wrong component count or an upstream bug"
        )
    return CoeffTable(mu, p.degree, dict(p.terms), p.var_labels)


# ============================================================================
# w_{Nq} AND THE SERIES SUBSTITUTION
# ============================================================================

def w_direct(t: CoeffTable, N: int, q: int) -> Fraction:
    """x^q coefficient of sum a_{kj} e^{Nkx} x^j, summed directly (0^0 = 1)."""
    if q < -t.mu + 1:
        raise DomainError(f"w_(N,q) is defined for q >= -mu+1 = {-t.mu + 1}, got q={q}")
    total = Fraction(0)
    for p in range(q + t.mu):
        col = t.column(q - p)
        if not col:
            continue
        moment = sum(c * k ** p for k, c in col.items())
        total += Fraction(N ** p) * moment / factorial(p)
    return total


def _substituted_series(t: CoeffTable, N: int, order_cap: int) -> Series:
    """sum a_{kj} e^{Nkx} x^{j+mu-1}, known through x^(order_cap+mu-1)."""
    shift = t.mu - 1
    cap = order_cap + shift
    acc = Series.zero(cap)
    for (k, j), c in t.entries.items():
        acc = acc + exp_series(N * k, cap).shifted(j + shift).scaled(c)
    return acc


def substitute_v_exp(t: CoeffTable, N: int, order_cap: int) -> Series:
    """Coefficients x^0..x^order_cap of P_L(e^{Nx}, x)."""
    if order_cap < 0:
        raise DomainError("order_cap must be non-negative")
    full = _substituted_series(t, N, order_cap)
    shift = t.mu - 1
    leftover = [q - shift for q in range(shift) if full.coeffs[q]]
    if leftover:
        raise LemmaViolationError(
            f"negative powers x^{leftover[0]} survive the substitution v = e^({N}x)"
        )
    return full.dropped(shift)


# ============================================================================
# B_{mj} AND THE VANDERMONDE RECOVERIES
# ============================================================================

def B_coeff(t: CoeffTable, m: int, j: int) -> Fraction:
    if m < 0:
        raise DomainError("m must be non-negative")
    col = t.column(j)
    return sum((c * k ** m for k, c in col.items()), Fraction(0)) / factorial(m)


def recover_B_from_w(t: CoeffTable, q: int, n: int) -> List[Fraction]:
    """Solve the system w_{N,q} = sum_p N^p B_{p,q-p} for N = 1..n."""
    if q < -t.mu + 1:
        raise DomainError(f"q must be at least -mu+1 = {-t.mu + 1}")
    if n < q + t.mu:
        raise UnderDeterminedError(f"need at least q+mu = {q + t.mu} rows, got n={n}")
    params = list(range(1, n + 1))
    rhs = [w_direct(t, N, q) for N in params]
    logger.debug(f"Solving {n}x{n} Vandermonde system for B at q={q}")
    return solve_vandermonde(params, rhs)


def recover_a_from_B(t: CoeffTable, j: int, n: int) -> List[Fraction]:
    """
    Solve sum_k k^m s_k = m! B_{mj}, m = 0..2n, for k = -n..n.

    Returns the list indexed by position k+n. Once n >= d this is the
    exact column a_{.,j}.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    params = list(range(-n, n + 1))
    rhs = [factorial(m) * B_coeff(t, m, j) for m in range(2 * n + 1)]
    return solve_vandermonde_transposed(params, rhs)


def column_vector(t: CoeffTable, j: int, n: int) -> List[Fraction]:
    return [t.a(k, j) for k in range(-n, n + 1)]


def stationarity_index(t: CoeffTable, j: int, horizon: int = 2) -> Optional[int]:
    """Smallest n from which recover_a_from_B matches the exact column up to d+horizon."""
    top = max(1, t.degree_d) + horizon
    first = None
    for n in range(top, 0, -1):
        if recover_a_from_B(t, j, n) == column_vector(t, j, n):
            first = n
        else:
            break
    return first


# ============================================================================
# LAMBDA WEIGHTS
# ============================================================================

_I_POWERS = (1, 1j, -1, -1j)


@lru_cache(maxsize=512)
def lambda_column(n: int, m_max: int, precision_bits: int = DEFAULT_PRECISION_BITS) -> Tuple[CxFloat, ...]:
    """lambda_{m,n} for m = 0..m_max by integration by parts."""
    ctx = mp_context(precision_bits)
    two_pi = 2 * ctx.pi
    out = []
    if n == 0:
        for m in range(m_max + 1):
            integral = two_pi ** (m + 1) / (m + 1)
            out.append(ctx.mpc(_I_POWERS[m % 4]) * integral / two_pi)
        return tuple(out)

    integral = ctx.mpc(0)
    step = ctx.mpc(0, n)
    for m in range(m_max + 1):
        if m:
            integral = (-(two_pi ** m) + m * integral) / step
        out.append(ctx.mpc(_I_POWERS[m % 4]) * integral / two_pi)
    return tuple(out)


def lambda_weight(m: int, n: int, precision_bits: int = DEFAULT_PRECISION_BITS) -> CxFloat:
    """(1/2pi) * integral over [0, 2pi] of (it)^m e^{-int} dt."""
    if m < 0:
        raise DomainError("m must be non-negative")
    return lambda_column(n, m, precision_bits)[m]


def lambda_closed_form(m: int, n: int, precision_bits: int = DEFAULT_PRECISION_BITS) -> CxFloat:
    """sum_{p<m} -(2 pi i)^(m-p-1)/n * m!/(n^p (m-p)!), defined for n != 0."""
    if n == 0:
        raise DomainError("the closed form divides by n")
    ctx = mp_context(precision_bits)
    two_pi_i = ctx.mpc(0, 2 * ctx.pi)
    total = ctx.mpc(0)
    for p in range(m):
        total += -(two_pi_i ** (m - p - 1)) / n * factorial(m) / (ctx.mpf(n) ** p * factorial(m - p))
    return total


def lambda_quadrature(m: int, n: int, precision_bits: int = DEFAULT_PRECISION_BITS) -> CxFloat:
    """Adaptive tanh-sinh quadrature of the defining integral, split at the oscillation half-periods."""
    # private context: shared ones from mp_context stay at their own precision
    work = mpmath.MPContext()
    work.prec = precision_bits + 32
    pieces = 2 * abs(n) + 2
    two_pi = 2 * work.pi
    nodes = [two_pi * i / pieces for i in range(pieces + 1)]
    value = work.quad(lambda s: (work.mpc(0, s)) ** m * work.expj(-n * s), nodes) / two_pi
    return mp_context(precision_bits).mpc(value)


def relative_deviation(value: CxFloat, reference: CxFloat) -> float:
    """|value - reference| / max(|reference|, 1); absolute for weights below unit size."""
    return float(abs(value - reference) / max(abs(reference), 1))


def lambda_table(m_max: int, n_max: int, precision_bits: int = DEFAULT_PRECISION_BITS) -> List[LambdaRow]:
    """Recurrence, closed form and quadrature side by side for 0 <= m <= m_max, |n| <= n_max."""
    if m_max < 0 or n_max < 0:
        raise DomainError("lambda table bounds must be non-negative")
    rows = []
    for n in range(-n_max, n_max + 1):
        for m in range(m_max + 1):
            value = lambda_weight(m, n, precision_bits)
            quad = lambda_quadrature(m, n, precision_bits)
            closed = lambda_closed_form(m, n, precision_bits) if n else None
            dev_closed = relative_deviation(closed, value) if closed is not None else None
            flagged = dev_closed is not None and dev_closed > LAMBDA_TOLERANCE
            if flagged:
                logger.warning(f"Closed form deviates at (m,n)=({m},{n}): {dev_closed:.2e}")
            rows.append(
                LambdaRow(
                    m=m,
                    n=n,
                    recurrence=format_cx(value, precision_bits),
                    closed_form=format_cx(closed, precision_bits) if closed is not None else None,
                    quadrature=format_cx(quad, precision_bits),
                    dev_closed_form=dev_closed,
                    dev_quadrature=relative_deviation(value, quad),
                    flagged=flagged,
                )
            )
    return rows


# ============================================================================
# PARTIAL SUMS AND f_{L,j}
# ============================================================================

def approx_sequence(
    t: CoeffTable,
    k: int,
    j: int,
    N_max: int,
    precision_bits: int = DEFAULT_PRECISION_BITS,
) -> ApproxReport:
    """Partial sums v^N = sum_{m<=N} lambda_{m,k} B_{mj} for N = 0..N_max."""
    if N_max < 0:
        raise DomainError("N_max must be non-negative")
    ctx = mp_context(precision_bits)
    weights = lambda_column(k, N_max, precision_bits)
    exact = t.a(k, j)
    target = rat_to_mpf(exact, precision_bits)

    partial = ctx.mpc(0)
    largest_term = ctx.mpf(0)
    sequence = []
    errors = []
    for m in range(N_max + 1):
        b = B_coeff(t, m, j)
        if b:
            term = weights[m] * rat_to_mpf(b, precision_bits)
            largest_term = max(largest_term, abs(term))
            partial = partial + term
        sequence.append((m, partial))
        errors.append(abs(partial - target))

    stabilized_at = None
    for m in range(N_max, -1, -1):
        if sequence[m][1] == target:
            stabilized_at = m
        else:
            break

    tail = errors[-TAIL_LENGTH:]
    # rounding in the summed terms; errors below it count as converged
    noise = max(ctx.mpf(1), largest_term) * (N_max + 1) * ctx.mpf(2) ** (-(precision_bits - 4))
    tail_float = np.array([0.0 if e <= noise else float(e) for e in tail])
    non_increasing = bool(np.all(np.diff(tail_float) <= 0.0)) if len(tail_float) > 1 else True

    terms_needed = None
    for m in range(N_max, -1, -1):
        if float(errors[m]) < CONVERGENCE_TARGET:
            terms_needed = m
        else:
            break

    report = ApproxReport(
        target=(k, j),
        exact_value=exact,
        sequence=sequence,
        stabilized_at=stabilized_at,
        max_abs_error_tail=float(max(tail)),
        final_error=float(errors[-1]),
        tail_non_increasing=non_increasing,
        terms_needed=terms_needed,
        N_max=N_max,
        precision_bits=precision_bits,
    )
    logger.debug(f"v^N for a[{k},{j}]: final error {report.final_error:.3e}")
    return report


def f_eval(t: CoeffTable, j: int, x, precision_bits: int = DEFAULT_PRECISION_BITS) -> CxFloat:
    """f_{L,j}(x) = sum_k a_{kj} x^k on the punctured plane."""
    ctx = mp_context(precision_bits)
    x = ctx.mpc(x)
    col = t.column(j)
    if x == 0:
        if any(k < 0 for k in col):
            raise DomainError("f_(L,j) has negative powers and is undefined at 0")
    total = ctx.mpc(0)
    for k, c in col.items():
        total += rat_to_mpf(c, precision_bits) * x ** k
    return total


def series_remainder_bound(t: CoeffTable, j: int, x, M: int, precision_bits: int = DEFAULT_PRECISION_BITS):
    """Bound on |f(e^x) - sum_{m<=M} B_{mj} x^m| from the Taylor remainder of each e^{kx}."""
    ctx = mp_context(precision_bits)
    r = abs(ctx.mpc(x))
    bound = ctx.mpf(0)
    for k, c in t.column(j).items():
        kr = abs(k) * r
        bound += abs(rat_to_mpf(c, precision_bits)) * kr ** (M + 1) / ctx.factorial(M + 1) * ctx.exp(kr)
    return bound


def truncated_B_series(t: CoeffTable, j: int, x, M: int, precision_bits: int = DEFAULT_PRECISION_BITS) -> CxFloat:
    ctx = mp_context(precision_bits)
    x = ctx.mpc(x)
    return sum((rat_to_mpf(B_coeff(t, m, j), precision_bits) * x ** m for m in range(M + 1)), ctx.mpc(0))


# ============================================================================
# FINITE-TYPE FAMILIES
# ============================================================================

@dataclass(frozen=True)
class ComponentInvariant:
    """An invariant of mu-component links together with its claimed finite-type order."""
    order: int
    evaluate: Callable[[LinkDiagram], Fraction]


class WeakAssembly:
    """Stitches per-component-count invariants into one invariant of all links."""

    def __init__(self, families: Mapping[int, ComponentInvariant], n: int):
        self.families = dict(families)
        self.n = n

    @property
    def order(self) -> int:
        orders = []
        for mu in range(1, self.n + 1):
            if mu not in self.families:
                raise MissingFamilyError(f"no invariant supplied for mu={mu}")
            orders.append(self.families[mu].order)
        return max(orders, default=0)

    def __call__(self, d: LinkDiagram) -> Fraction:
        mu = components(d)
        if mu > self.n:
            return Fraction(0)
        if mu not in self.families:
            raise MissingFamilyError(f"no invariant supplied for mu={mu}")
        return Fraction(self.families[mu].evaluate(d))


def assemble_weak(families: Mapping[int, ComponentInvariant], n: int) -> WeakAssembly:
    return WeakAssembly(families, n)


def table_for(d: LinkDiagram, which: str = "homflypt", engine=None) -> CoeffTable:
    engine = engine or SkeinEngine()
    return coeff_table(engine.polynomial(d, which), components(d))


def approximant_family(k: int, j: int, n: int, which: str = "homflypt", engine=None) -> ComponentInvariant:
    """s_k^{n,j} as an invariant; it combines B_{mj}, m <= 2n, so its order is at most 2n+j."""

    def evaluate(d: LinkDiagram) -> Fraction:
        if abs(k) > n:
            return Fraction(0)
        return recover_a_from_B(table_for(d, which, engine), j, n)[k + n]

    return ComponentInvariant(order=max(0, 2 * n + j), evaluate=evaluate)


def approximant_families(k: int, j: int, n: int, mus: Sequence[int], which: str = "homflypt", engine=None) -> Dict[int, ComponentInvariant]:
    return {mu: approximant_family(k, j, n, which, engine) for mu in mus}
