"""
Exact arithmetic for link polynomials.

Rationals are ``fractions.Fraction``. On top of them this module defines the
sparse two-variable Laurent polynomials that hold P_L(v,z) and F_L(a,z), the
truncated power series used for the v := e^{Nx} substitution, exact
Vandermonde solvers, and the high-precision complex helpers (mpmath) used for
the lambda weights.

All value types are immutable; every operation returns a new value.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import mpmath

logger = logging.getLogger(__name__)

Rat = Fraction
Exponent = Tuple[int, int]
CxFloat = mpmath.mpc

HOMFLY_LABELS: Tuple[str, str] = ("v", "z")
DUBROVNIK_LABELS: Tuple[str, str] = ("a", "z")

DEFAULT_PRECISION_BITS = 256
MIN_PRECISION_BITS = 64


# ============================================================================
# ERRORS
# ============================================================================

class KnotVassError(Exception):
    """Base class for every error raised by this package."""


class LabelMismatchError(KnotVassError):
    """Polynomials over different variable labels were combined."""


class SingularMatrixError(KnotVassError):
    """A Vandermonde system was given repeated parameters."""


class DiagramParseError(KnotVassError):
    """Malformed PD code or braid word."""

    def __init__(self, message: str, position: int = 0):
        super().__init__(f"{message} (at position {position})")
        self.message = message
        self.position = position


class UnsupportedInputError(KnotVassError):
    """The operation is not defined for this diagram or crossing."""


class CrossingCapExceeded(KnotVassError):
    """The skein engine refused a diagram above the configured crossing cap."""


class DomainError(KnotVassError):
    """An argument is outside the range where the quantity is defined."""


class LemmaViolationError(KnotVassError):
    """A polynomial has z-powers below -mu+1, so it cannot come from a mu-component link."""


class UnderDeterminedError(KnotVassError):
    """Too few Vandermonde rows to recover the requested unknowns."""


class KauffmanConsistencyError(KnotVassError):
    """The Dubrovnik/Kauffman substitution left an imaginary coefficient."""


class MissingFamilyError(KnotVassError):
    """No per-component invariant family was supplied for a required mu."""


class DecompositionError(KnotVassError):
    """A polynomial could not be peeled into powers of the split-union factor."""


# ============================================================================
# RATIONALS
# ============================================================================

def parse_rat(text: Union[str, int, Fraction]) -> Fraction:
    """Parse ``"num/den"`` (or an integer) into a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise DomainError(f"not a rational number: {text!r}") from e


def format_rat(value: Fraction) -> str:
    """Render a Fraction as ``"num/den"``, or ``"num"`` for integers."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


# ============================================================================
# LAURENT POLYNOMIALS IN TWO VARIABLES
# ============================================================================

@dataclass(frozen=True)
class LaurentPoly2:
    """
    Sparse Laurent polynomial ``sum c * x^e1 * y^e2`` with rational coefficients.

    ``var_labels`` names the two variables, ("v", "z") for HOMFLYPT and
    ("a", "z") for the Dubrovnik/Kauffman side. Zero coefficients are never
    stored, so the zero polynomial has an empty term map.
    """
    terms: Mapping[Exponent, Fraction]
    var_labels: Tuple[str, str] = HOMFLY_LABELS

    def __post_init__(self):
        cleaned = {
            (int(e1), int(e2)): Fraction(c)
            for (e1, e2), c in self.terms.items()
            if c != 0
        }
        object.__setattr__(self, "terms", cleaned)
        object.__setattr__(self, "var_labels", tuple(self.var_labels))

    def __hash__(self) -> int:
        return hash((frozenset(self.terms.items()), self.var_labels))

    # --- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, labels: Tuple[str, str] = HOMFLY_LABELS) -> "LaurentPoly2":
        return cls({}, labels)

    @classmethod
    def constant(cls, c, labels: Tuple[str, str] = HOMFLY_LABELS) -> "LaurentPoly2":
        return cls({(0, 0): Fraction(c)}, labels)

    @classmethod
    def monomial(cls, c, e1: int, e2: int, labels: Tuple[str, str] = HOMFLY_LABELS) -> "LaurentPoly2":
        return cls({(e1, e2): Fraction(c)}, labels)

    # --- inspection --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, e1: int, e2: int) -> Fraction:
        return self.terms.get((e1, e2), Fraction(0))

    @property
    def degree(self) -> int:
        """Largest absolute exponent over both variables (0 for constants and zero)."""
        if not self.terms:
            return 0
        return max(max(abs(e1), abs(e2)) for e1, e2 in self.terms)

    def min_exponent(self, axis: int) -> Optional[int]:
        if not self.terms:
            return None
        return min(e[axis] for e in self.terms)

    def max_exponent(self, axis: int) -> Optional[int]:
        if not self.terms:
            return None
        return max(e[axis] for e in self.terms)

    def sorted_terms(self) -> List[Tuple[int, int, Fraction]]:
        """Terms ordered by (second exponent, first exponent)."""
        return [(e1, e2, c) for (e1, e2), c in sorted(self.terms.items(), key=lambda t: (t[0][1], t[0][0]))]

    def z_slice(self, e2: int) -> "LaurentPoly2":
        """The coefficient of y^e2, as a polynomial in the first variable only."""
        return LaurentPoly2({(e1, 0): c for (e1, f2), c in self.terms.items() if f2 == e2}, self.var_labels)

    def relabeled(self, labels: Tuple[str, str]) -> "LaurentPoly2":
        return LaurentPoly2(dict(self.terms), labels)

    def evaluate(self, x, y):
        """Numeric evaluation; ``x`` and ``y`` may be any ring elements supporting ** with negative ints."""
        total = 0
        for (e1, e2), c in self.terms.items():
            total += c * (x ** e1) * (y ** e2)
        return total

    # --- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "LaurentPoly2":
        if isinstance(other, LaurentPoly2):
            return other
        if isinstance(other, (int, Fraction)):
            return LaurentPoly2.constant(other, self.var_labels)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return lp_add(self, other)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly2":
        return LaurentPoly2({e: -c for e, c in self.terms.items()}, self.var_labels)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return lp_add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return lp_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "LaurentPoly2":
        if exponent < 0:
            raise DomainError("negative powers of a general Laurent polynomial are not defined")
        result = LaurentPoly2.constant(1, self.var_labels)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def shifted(self, d1: int, d2: int) -> "LaurentPoly2":
        """Multiply by the monomial x^d1 y^d2."""
        return LaurentPoly2({(e1 + d1, e2 + d2): c for (e1, e2), c in self.terms.items()}, self.var_labels)

    def divide_exact(self, divisor: "LaurentPoly2") -> Optional["LaurentPoly2"]:
        """
        Exact quotient of two Laurent polynomials in the first variable only.

        Both operands must have every second exponent equal to 0. Returns None
        when the division leaves a remainder.
        """
        _check_labels(self, divisor)
        if divisor.is_zero():
            raise DomainError("division by the zero polynomial")
        if any(e2 for _, e2 in self.terms) or any(e2 for _, e2 in divisor.terms):
            raise DomainError("divide_exact only handles polynomials in the first variable")
        if self.is_zero():
            return LaurentPoly2.zero(self.var_labels)

        num_low = self.min_exponent(0)
        den_low = divisor.min_exponent(0)
        num = _dense(self, num_low)
        den = _dense(divisor, den_low)
        if len(num) < len(den):
            return None

        quotient = [Fraction(0)] * (len(num) - len(den) + 1)
        remainder = list(num)
        lead = den[-1]
        for shift in range(len(quotient) - 1, -1, -1):
            factor = remainder[shift + len(den) - 1] / lead
            quotient[shift] = factor
            if factor:
                for i, d in enumerate(den):
                    remainder[shift + i] -= factor * d
        if any(remainder):
            return None
        offset = num_low - den_low
        return LaurentPoly2({(offset + i, 0): c for i, c in enumerate(quotient)}, self.var_labels)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        x, y = self.var_labels
        pieces = []
        for e1, e2, c in self.sorted_terms():
            monomial = "*".join(
                part for part in (_power(x, e1), _power(y, e2)) if part
            )
            if not monomial:
                pieces.append(format_rat(c))
            elif c == 1:
                pieces.append(monomial)
            elif c == -1:
                pieces.append(f"-{monomial}")
            else:
                pieces.append(f"{format_rat(c)}*{monomial}")
        return " + ".join(pieces).replace("+ -", "- ")


def _power(name: str, exponent: int) -> str:
    if exponent == 0:
        return ""
    if exponent == 1:
        return name
    return f"{name}^{exponent}" if exponent > 0 else f"{name}^({exponent})"


def _dense(p: LaurentPoly2, low: int) -> List[Fraction]:
    high = p.max_exponent(0)
    out = [Fraction(0)] * (high - low + 1)
    for (e1, _), c in p.terms.items():
        out[e1 - low] = c
    return out


def _check_labels(p: LaurentPoly2, q: LaurentPoly2) -> None:
    if p.var_labels != q.var_labels:
        raise LabelMismatchError(f"cannot combine {p.var_labels} with {q.var_labels}")


def lp_add(p: LaurentPoly2, q: LaurentPoly2) -> LaurentPoly2:
    """Coefficient-wise sum; zero terms are pruned by the constructor."""
    _check_labels(p, q)
    out: Dict[Exponent, Fraction] = dict(p.terms)
    for e, c in q.terms.items():
        out[e] = out.get(e, Fraction(0)) + c
    return LaurentPoly2(out, p.var_labels)


def lp_mul(p: LaurentPoly2, q: LaurentPoly2) -> LaurentPoly2:
    """Convolution of the exponent maps."""
    _check_labels(p, q)
    out: Dict[Exponent, Fraction] = {}
    for (a1, a2), c in p.terms.items():
        for (b1, b2), d in q.terms.items():
            key = (a1 + b1, a2 + b2)
            out[key] = out.get(key, Fraction(0)) + c * d
    return LaurentPoly2(out, p.var_labels)


# ============================================================================
# TRUNCATED POWER SERIES
# ============================================================================

@dataclass(frozen=True)
class Series:
    """Power series in x known up to x^order_cap; coeffs[q] is the x^q coefficient."""
    order_cap: int
    coeffs: Tuple[Fraction, ...]

    def __post_init__(self):
        if self.order_cap < 0:
            raise DomainError("order_cap must be non-negative")
        coeffs = tuple(Fraction(c) for c in self.coeffs)
        if len(coeffs) != self.order_cap + 1:
            raise DomainError(f"expected {self.order_cap + 1} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, order_cap: int) -> "Series":
        return cls(order_cap, (Fraction(0),) * (order_cap + 1))

    def coefficient(self, q: int) -> Fraction:
        if q < 0 or q > self.order_cap:
            raise DomainError(f"x^{q} is outside the known range 0..{self.order_cap}")
        return self.coeffs[q]

    def __add__(self, other: "Series") -> "Series":
        cap = min(self.order_cap, other.order_cap)
        return Series(cap, tuple(self.coeffs[q] + other.coeffs[q] for q in range(cap + 1)))

    def __mul__(self, other: "Series") -> "Series":
        cap = min(self.order_cap, other.order_cap)
        out = [Fraction(0)] * (cap + 1)
        for i, a in enumerate(self.coeffs[: cap + 1]):
            if not a:
                continue
            for j in range(cap + 1 - i):
                out[i + j] += a * other.coeffs[j]
        return Series(cap, tuple(out))

    def scaled(self, c) -> "Series":
        c = Fraction(c)
        return Series(self.order_cap, tuple(c * a for a in self.coeffs))

    def shifted(self, s: int) -> "Series":
        """Multiply by x^s (s >= 0); coefficients pushed past order_cap are dropped."""
        if s < 0:
            raise DomainError("use dropped() to divide by powers of x")
        body = ((Fraction(0),) * s + self.coeffs)[: self.order_cap + 1]
        return Series(self.order_cap, body)

    def dropped(self, s: int) -> "Series":
        """Discard the first s coefficients and divide by x^s."""
        if s < 0 or s > self.order_cap:
            raise DomainError(f"cannot drop {s} coefficients from a series of order {self.order_cap}")
        return Series(self.order_cap - s, self.coeffs[s:])


def exp_series(c: int, order_cap: int) -> Series:
    """Taylor coefficients c^q / q! of e^{cx} up to x^order_cap."""
    if order_cap < 0:
        raise DomainError("order_cap must be non-negative")
    coeffs = [Fraction(1)]
    for q in range(1, order_cap + 1):
        coeffs.append(coeffs[-1] * c / q)
    return Series(order_cap, tuple(coeffs))


# ============================================================================
# VANDERMONDE SYSTEMS
# ============================================================================

@lru_cache(maxsize=256)
def _lagrange_basis(params: Tuple[int, ...]) -> Tuple[Tuple[Fraction, ...], ...]:
    """
    Coefficients (low to high) of the Lagrange basis polynomials l_r with
    l_r(params[s]) = [r == s].
    """
    if len(set(params)) != len(params):
        raise SingularMatrixError(f"Vandermonde parameters must be distinct, got {list(params)}")
    n = len(params)

    # master polynomial prod (t - t_s)
    root = [Fraction(1)]
    for t in params:
        nxt = [Fraction(0)] * (len(root) + 1)
        for i, c in enumerate(root):
            nxt[i + 1] += c
            nxt[i] -= c * t
        root = nxt

    basis = []
    for t in params:
        # synthetic division root / (x - t)
        quotient = [Fraction(0)] * n
        carry = Fraction(0)
        for i in range(n, 0, -1):
            carry = root[i] + carry * t
            quotient[i - 1] = carry
        denom = sum(c * t ** i for i, c in enumerate(quotient))
        basis.append(tuple(c / denom for c in quotient))
    logger.debug(f"Built {n}x{n} Lagrange basis for parameters {list(params)}")
    return tuple(basis)


def solve_vandermonde(params: Sequence[int], rhs: Sequence) -> List[Fraction]:
    """
    Solve sum_c params[r]^c * x[c] = rhs[r] for every row r, exactly.

    The solution is the coefficient vector of the interpolating polynomial,
    assembled from the Lagrange basis in O(n^2) rational operations.
    """
    if len(params) != len(rhs):
        raise DomainError("params and rhs must have the same length")
    basis = _lagrange_basis(tuple(int(t) for t in params))
    n = len(params)
    out = [Fraction(0)] * n
    for r, value in enumerate(rhs):
        value = Fraction(value)
        if not value:
            continue
        for c in range(n):
            out[c] += value * basis[r][c]
    return out


def solve_vandermonde_transposed(params: Sequence[int], rhs: Sequence) -> List[Fraction]:
    """
    Solve sum_k params[k]^m * s[k] = rhs[m] for every power m, exactly.

    The k-th unknown is the Lagrange basis polynomial l_k paired with rhs:
    s_k = sum_m coeff_m(l_k) * rhs[m].
    """
    if len(params) != len(rhs):
        raise DomainError("params and rhs must have the same length")
    basis = _lagrange_basis(tuple(int(t) for t in params))
    rhs = [Fraction(b) for b in rhs]
    return [sum((c * b for c, b in zip(row, rhs)), Fraction(0)) for row in basis]


# ============================================================================
# HIGH-PRECISION COMPLEX NUMBERS
# ============================================================================

@lru_cache(maxsize=None)
def mp_context(precision_bits: int = DEFAULT_PRECISION_BITS) -> mpmath.MPContext:
    """An mpmath context fixed at ``precision_bits``; never mutate the returned object."""
    if precision_bits < MIN_PRECISION_BITS:
        raise DomainError(f"precision_bits must be at least {MIN_PRECISION_BITS}, got {precision_bits}")
    ctx = mpmath.MPContext()
    ctx.prec = precision_bits
    return ctx


def rat_to_mpf(value: Fraction, precision_bits: int = DEFAULT_PRECISION_BITS):
    ctx = mp_context(precision_bits)
    value = Fraction(value)
    return ctx.mpf(value.numerator) / value.denominator


def cx(value, precision_bits: int = DEFAULT_PRECISION_BITS) -> CxFloat:
    """Coerce an int, Fraction, float or mpmath number to a CxFloat at the given precision."""
    ctx = mp_context(precision_bits)
    if isinstance(value, Fraction):
        return ctx.mpc(rat_to_mpf(value, precision_bits))
    return ctx.mpc(value)


def format_cx(value: CxFloat, precision_bits: int = DEFAULT_PRECISION_BITS) -> str:
    """Fixed-digit rendering so identical inputs always print identically."""
    ctx = mp_context(precision_bits)
    digits = max(15, precision_bits // 4)
    value = ctx.mpc(value)
    re_part = ctx.nstr(value.real, digits)
    im_part = ctx.nstr(abs(value.imag), digits)
    sign = "-" if value.imag < 0 else "+"
    return f"{re_part}{sign}{im_part}j"
