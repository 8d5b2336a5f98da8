"""
Skein engines for the HOMFLYPT and Dubrovnik polynomials.

Both polynomials are computed by descending-diagram recursion: walk the
components from fixed basepoints, find the first crossing met from below,
and branch on switching and smoothing it. Descending diagrams are unlinks
and evaluate in closed form. Intermediate diagrams are memoized by their
canonical encoding.
"""

import logging
import threading
from typing import Dict, Hashable, Optional, Tuple

from algebra import (
    DUBROVNIK_LABELS,
    HOMFLY_LABELS,
    CrossingCapExceeded,
    KauffmanConsistencyError,
    LaurentPoly2,
    UnsupportedInputError,
)
from diagram import (
    CrossingKind,
    LinkDiagram,
    canonical_key,
    components,
    first_descending_violation,
    simplify,
    smooth_oriented,
    smooth_unoriented,
    switch_crossing,
    writhe,
)

logger = logging.getLogger(__name__)

DEFAULT_CROSSING_CAP = 16
POLYNOMIALS = ("homflypt", "dubrovnik_delta", "dubrovnik", "kauffman")


def _v(k: int, j: int = 0, c=1) -> LaurentPoly2:
    return LaurentPoly2.monomial(c, k, j, HOMFLY_LABELS)


def _a(k: int, j: int = 0, c=1) -> LaurentPoly2:
    return LaurentPoly2.monomial(c, k, j, DUBROVNIK_LABELS)


def homflypt_split_factor() -> LaurentPoly2:
    """(v^-1 - v)/z, the factor for each extra split unknotted component."""
    return _v(-1, -1) - _v(1, -1)


def dubrovnik_split_factor() -> LaurentPoly2:
    """(a - a^-1)/z + 1."""
    return _a(1, -1) - _a(-1, -1) + _a(0)


class SkeinEngine:
    """Evaluates link polynomials by skein recursion, caching every intermediate diagram."""

    def __init__(self, crossing_cap: int = DEFAULT_CROSSING_CAP):
        self.crossing_cap = crossing_cap
        self.cache: Dict[Tuple[str, Hashable], LaurentPoly2] = {}
        self._lock = threading.Lock()
        self.hits = 0

    def clear_cache(self) -> None:
        with self._lock:
            self.cache.clear()
            self.hits = 0

    def _lookup(self, key) -> Optional[LaurentPoly2]:
        with self._lock:
            value = self.cache.get(key)
            if value is not None:
                self.hits += 1
            return value

    def _store(self, key, value: LaurentPoly2) -> None:
        with self._lock:
            self.cache.setdefault(key, value)

    def _admit(self, d: LinkDiagram) -> None:
        if d.is_singular:
            raise UnsupportedInputError("link polynomials are only defined on diagrams without double points")
        if d.crossing_count > self.crossing_cap:
            raise CrossingCapExceeded(
                f"diagram has {d.crossing_count} crossings, cap is {self.crossing_cap}"
            )

    # --- HOMFLYPT ----------------------------------------------------------

    def homflypt(self, d: LinkDiagram) -> LaurentPoly2:
        """P_L(v,z) with v^-1 P(L+) - v P(L-) = z P(L0) and P(unknot) = 1."""
        self._admit(d)
        return self._homflypt(d)

    def _homflypt(self, d: LinkDiagram) -> LaurentPoly2:
        d = simplify(d)
        key = ("homflypt", canonical_key(d))
        cached = self._lookup(key)
        if cached is not None:
            return cached

        bad = first_descending_violation(d)
        if bad is None:
            value = homflypt_split_factor() ** (components(d) - 1)
        else:
            logger.debug(f"HOMFLYPT branch at crossing {bad} of {d.crossing_count}")
            switched = self._homflypt(switch_crossing(d, bad))
            smoothed = self._homflypt(smooth_oriented(d, bad))
            if d.crossings[bad].kind is CrossingKind.POSITIVE:
                # P+ = v^2 P- + v z P0
                value = _v(2) * switched + _v(1, 1) * smoothed
            else:
                # P- = v^-2 P+ - v^-1 z P0
                value = _v(-2) * switched - _v(-1, 1) * smoothed
        self._store(key, value)
        return value

    # --- Dubrovnik ---------------------------------------------------------

    def dubrovnik_delta(self, d: LinkDiagram) -> LaurentPoly2:
        """Regular-isotopy invariant Delta of the unoriented shadow of d."""
        self._admit(d)
        return self._delta(d)

    def _delta(self, d: LinkDiagram) -> LaurentPoly2:
        reduced = simplify(d)
        curl = writhe(d) - writhe(reduced)
        key = ("delta", canonical_key(reduced))
        value = self._lookup(key)
        if value is None:
            bad = first_descending_violation(reduced)
            if bad is None:
                value = _a(writhe(reduced)) * dubrovnik_split_factor() ** (components(reduced) - 1)
            else:
                logger.debug(f"Dubrovnik branch at crossing {bad} of {reduced.crossing_count}")
                switched = self._delta(switch_crossing(reduced, bad))
                zero = self._delta(smooth_unoriented(reduced, bad, "zero"))
                infinity = self._delta(smooth_unoriented(reduced, bad, "infinity"))
                sign = 1 if reduced.crossings[bad].kind is CrossingKind.POSITIVE else -1
                value = switched + _a(0, 1, sign) * (zero - infinity)
            self._store(key, value)
        return _a(curl) * value if curl else value

    def dubrovnik(self, d: LinkDiagram) -> LaurentPoly2:
        """F_L(a,z) = a^-w(D) Delta(D)."""
        return _a(-writhe(d)) * self.dubrovnik_delta(d)

    def kauffman(self, d: LinkDiagram) -> LaurentPoly2:
        return kauffman_from_dubrovnik(self.dubrovnik(d), components(d))

    def polynomial(self, d: LinkDiagram, which: str) -> LaurentPoly2:
        if which == "homflypt":
            return self.homflypt(d)
        if which == "dubrovnik_delta":
            return self.dubrovnik_delta(d)
        if which == "dubrovnik":
            return self.dubrovnik(d)
        if which == "kauffman":
            return self.kauffman(d)
        raise UnsupportedInputError(f"unknown polynomial {which!r}; expected one of {POLYNOMIALS}")


# ============================================================================
# KAUFFMAN CONVERSION
# ============================================================================

def _rotate_by_i(f: LaurentPoly2, mu: int, forward: bool) -> LaurentPoly2:
    """
    Each monomial c a^k z^j picks up i^(j-k) (or i^(k-j) going back) and the
    overall sign (-1)^(mu-1). Odd exponent differences would leave an
    imaginary coefficient.
    """
    sign = -1 if (mu - 1) % 2 else 1
    out = {}
    for (k, j), c in f.terms.items():
        diff = (j - k) if forward else (k - j)
        if diff % 2:
            raise KauffmanConsistencyError(
                f"monomial a^{k} z^{j} would keep an imaginary coefficient"
            )
        out[(k, j)] = c * sign * (1 if diff % 4 == 0 else -1)
    return LaurentPoly2(out, DUBROVNIK_LABELS)


def kauffman_from_dubrovnik(f: LaurentPoly2, mu: int) -> LaurentPoly2:
    """F^K(a,z) = (-1)^(mu-1) F^D(-ia, iz)."""
    return _rotate_by_i(f, mu, forward=True)


def dubrovnik_from_kauffman(f: LaurentPoly2, mu: int) -> LaurentPoly2:
    """F^D(a,z) = (-1)^(mu-1) F^K(ia, -iz)."""
    return _rotate_by_i(f, mu, forward=False)


# ============================================================================
# ONE-SHOT HELPERS
# ============================================================================

def homflypt(d: LinkDiagram, crossing_cap: int = DEFAULT_CROSSING_CAP) -> LaurentPoly2:
    return SkeinEngine(crossing_cap).homflypt(d)


def dubrovnik_delta(d: LinkDiagram, crossing_cap: int = DEFAULT_CROSSING_CAP) -> LaurentPoly2:
    return SkeinEngine(crossing_cap).dubrovnik_delta(d)


def dubrovnik(d: LinkDiagram, crossing_cap: int = DEFAULT_CROSSING_CAP) -> LaurentPoly2:
    return SkeinEngine(crossing_cap).dubrovnik(d)


def kauffman(d: LinkDiagram, crossing_cap: int = DEFAULT_CROSSING_CAP) -> LaurentPoly2:
    return SkeinEngine(crossing_cap).kauffman(d)
