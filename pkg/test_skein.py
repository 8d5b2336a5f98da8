"""
Unit tests for the skein engine and the Dubrovnik/Kauffman conversion.

Expected polynomials are worked out by hand from the skein relations:

  HOMFLYPT, P+ = v^2 P- + v z P0, split factor (v^-1 - v)/z
    Hopf+      = v^2 (v^-1 - v)/z + v z            = (v - v^3)/z + v z
    trefoil    = v^2 * 1 + v z * Hopf+             = 2v^2 - v^4 + v^2 z^2
    T(2,4)     = v^2 * Hopf+ + v z * trefoil       = (v^3 - v^5)/z + (3v^3 - v^5) z + v^3 z^3
    mirror     : v -> -v^-1

  Dubrovnik, Delta+ - Delta- = z (Delta0 - Delta_inf), curl factor a,
  split factor (a - a^-1)/z + 1
    Delta(Hopf+) = (a - a^-1)/z + 1 + a z - a^-1 z

Run with: pytest test_skein.py -v
"""

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest

from algebra import (
    DUBROVNIK_LABELS,
    HOMFLY_LABELS,
    CrossingCapExceeded,
    KauffmanConsistencyError,
    LaurentPoly2,
    UnsupportedInputError,
)
from corpus import load_link
from diagram import components, make_singular, mirror
from skein import (
    SkeinEngine,
    dubrovnik_from_kauffman,
    dubrovnik_split_factor,
    homflypt,
    homflypt_split_factor,
    kauffman,
    kauffman_from_dubrovnik,
)


def P(*terms):
    return LaurentPoly2({(k, j): Fraction(c) for c, k, j in terms}, HOMFLY_LABELS)


def F(*terms):
    return LaurentPoly2({(k, j): Fraction(c) for c, k, j in terms}, DUBROVNIK_LABELS)


def homfly_mirror(p):
    """P(-v^-1, z)."""
    return LaurentPoly2({(-k, j): c * (-1) ** (k % 2) for (k, j), c in p.terms.items()}, HOMFLY_LABELS)


def dubrovnik_mirror(f):
    """F(a^-1, -z)."""
    return LaurentPoly2({(-k, j): c * (-1) ** (j % 2) for (k, j), c in f.terms.items()}, DUBROVNIK_LABELS)


HOPF_POSITIVE = P((1, 1, -1), (-1, 3, -1), (1, 1, 1))
TREFOIL_RIGHT = P((2, 2, 0), (-1, 4, 0), (1, 2, 2))
FIGURE_EIGHT = P((1, -2, 0), (-1, 0, 0), (1, 2, 0), (-1, 0, 2))
TORUS_2_4 = P((1, 3, -1), (-1, 5, -1), (3, 3, 1), (-1, 5, 1), (1, 3, 3))


@pytest.fixture(scope="module")
def engine():
    return SkeinEngine()


class TestHomflypt:
    """Test HOMFLYPT values against hand computations."""

    def test_unknot(self, engine):
        """Test P(unknot) = 1, with or without a kink."""
        assert engine.homflypt(load_link("unknot")) == LaurentPoly2.constant(1)
        assert engine.homflypt(load_link("kinked-unknot")) == LaurentPoly2.constant(1)

    def test_unlinks(self, engine):
        """Test P(unlink of mu components) = split factor^(mu-1)."""
        split = homflypt_split_factor()
        assert split == P((1, -1, -1), (-1, 1, -1))
        assert engine.homflypt(load_link("unlink-2")) == split
        assert engine.homflypt(load_link("unlink-3")) == split * split

    def test_hopf(self, engine):
        """Test both Hopf links."""
        assert engine.homflypt(load_link("hopf-positive")) == HOPF_POSITIVE
        assert engine.homflypt(load_link("hopf-negative")) == P((1, -3, -1), (-1, -1, -1), (-1, -1, 1))

    def test_trefoils(self, engine):
        """Test the right trefoil and its mirror."""
        assert engine.homflypt(load_link("trefoil-right")) == TREFOIL_RIGHT
        assert engine.homflypt(load_link("trefoil-left")) == homfly_mirror(TREFOIL_RIGHT)

    def test_tabulated_trefoil_is_left(self, engine):
        """Test the tabulated PD code gives the left trefoil."""
        assert engine.homflypt(load_link("trefoil-tabulated")) == homfly_mirror(TREFOIL_RIGHT)

    def test_figure_eight_is_amphichiral(self, engine):
        """Test the figure-eight value and its mirror symmetry."""
        p = engine.homflypt(load_link("figure-eight"))
        assert p == FIGURE_EIGHT
        assert homfly_mirror(p) == p

    def test_torus_2_4(self, engine):
        """Test the (2,4) torus link."""
        assert engine.homflypt(load_link("torus-2-4")) == TORUS_2_4

    def test_presentations_agree(self, engine):
        """Test stabilized and inflated presentations give the same polynomial."""
        for name in ("trefoil-right-stabilized", "trefoil-right-bigon"):
            assert engine.homflypt(load_link(name)) == TREFOIL_RIGHT

    def test_mirror_rule(self, engine):
        """Test P(mirror) = P(-v^-1, z) on every chiral corpus link."""
        for name in ("hopf-positive", "trefoil-right", "torus-2-4"):
            d = load_link(name)
            assert engine.homflypt(mirror(d)) == homfly_mirror(engine.homflypt(d))

    def test_skein_relation(self, engine):
        """Test v^-1 P+ - v P- = z P0 at a trefoil crossing."""
        plus = TREFOIL_RIGHT
        minus = LaurentPoly2.constant(1)
        zero = HOPF_POSITIVE
        assert P((1, -1, 0)) * plus - P((1, 1, 0)) * minus == P((1, 0, 1)) * zero


class TestDubrovnik:
    """Test the Dubrovnik side."""

    def test_unknot(self, engine):
        """Test F = Delta = 1 on the unknot and Delta picks up a per curl."""
        unknot = load_link("unknot")
        assert engine.dubrovnik(unknot) == LaurentPoly2.constant(1, DUBROVNIK_LABELS)
        assert engine.dubrovnik_delta(load_link("kinked-unknot")) == F((1, 1, 0))
        assert engine.dubrovnik(load_link("kinked-unknot")) == LaurentPoly2.constant(1, DUBROVNIK_LABELS)

    def test_unlink(self, engine):
        """Test F(unlink of 2) = (a - a^-1)/z + 1."""
        split = dubrovnik_split_factor()
        assert split == F((1, 1, -1), (-1, -1, -1), (1, 0, 0))
        assert engine.dubrovnik(load_link("unlink-2")) == split

    def test_hopf_delta(self, engine):
        """Test Delta(Hopf+) by hand."""
        expected = F((1, 1, -1), (-1, -1, -1), (1, 0, 0), (1, 1, 1), (-1, -1, 1))
        assert engine.dubrovnik_delta(load_link("hopf-positive")) == expected

    def test_writhe_normalization(self, engine):
        """Test F = a^-w Delta."""
        d = load_link("trefoil-right")
        assert engine.dubrovnik(d) == F((1, -3, 0)) * engine.dubrovnik_delta(d)

    def test_presentations_agree(self, engine):
        """Test F is unchanged by kinks and bigons."""
        base = engine.dubrovnik(load_link("trefoil-right"))
        for name in ("trefoil-right-stabilized", "trefoil-right-bigon"):
            assert engine.dubrovnik(load_link(name)) == base

    def test_mirror_rule(self, engine):
        """Test F(mirror) = F(a^-1, -z)."""
        for name in ("hopf-positive", "trefoil-right", "figure-eight"):
            d = load_link(name)
            assert engine.dubrovnik(mirror(d)) == dubrovnik_mirror(engine.dubrovnik(d))


class TestKauffman:
    """Test the Dubrovnik/Kauffman change of variables."""

    def test_unlink(self, engine):
        """Test the two-component unlink maps to (a + a^-1)/z - 1."""
        assert engine.kauffman(load_link("unlink-2")) == F((1, 1, -1), (1, -1, -1), (-1, 0, 0))

    def test_unknot(self):
        """Test the one-shot helper on the unknot."""
        assert kauffman(load_link("unknot")) == LaurentPoly2.constant(1, DUBROVNIK_LABELS)

    def test_round_trip(self, engine):
        """Test forward then backward returns the Dubrovnik polynomial."""
        for name in ("unlink-3", "hopf-negative", "torus-2-4", "figure-eight"):
            d = load_link(name)
            f = engine.dubrovnik(d)
            mu = components(d)
            assert dubrovnik_from_kauffman(kauffman_from_dubrovnik(f, mu), mu) == f

    def test_imaginary_residue(self):
        """Test an odd exponent difference cannot be converted."""
        with pytest.raises(KauffmanConsistencyError):
            kauffman_from_dubrovnik(F((1, 1, 0)), 1)


class TestEngine:
    """Test engine bookkeeping."""

    def test_cap(self):
        """Test diagrams above the crossing cap are refused."""
        with pytest.raises(CrossingCapExceeded):
            SkeinEngine(crossing_cap=2).homflypt(load_link("trefoil-right"))

    def test_singular_refused(self, engine):
        """Test double points are rejected."""
        with pytest.raises(UnsupportedInputError):
            engine.homflypt(make_singular(load_link("trefoil-right"), 0))

    def test_unknown_polynomial(self, engine):
        """Test polynomial() checks its selector."""
        with pytest.raises(UnsupportedInputError):
            engine.polynomial(load_link("unknot"), "jones")

    def test_cache(self):
        """Test repeated evaluation is served from the cache."""
        e = SkeinEngine()
        first = e.homflypt(load_link("figure-eight"))
        hits = e.hits
        assert e.homflypt(load_link("figure-eight")) == first
        assert e.hits > hits
        e.clear_cache()
        assert e.cache == {}

    def test_one_shot_helper(self):
        """Test the module-level helper matches the engine."""
        assert homflypt(load_link("hopf-positive")) == HOPF_POSITIVE

    def test_shared_engine_across_threads(self):
        """Test one engine shared by worker threads gives the serial results."""
        names = ["trefoil-right", "figure-eight", "hopf-positive", "unlink-3", "trefoil-right", "figure-eight"]
        jobs = [(name, which) for name in names for which in ("homflypt", "dubrovnik")]
        fresh = SkeinEngine()
        serial = [fresh.polynomial(load_link(name), which) for name, which in jobs]
        shared = SkeinEngine()
        with ThreadPoolExecutor(max_workers=6) as pool:
            concurrent = list(pool.map(lambda job: shared.polynomial(load_link(job[0]), job[1]), jobs))
        assert concurrent == serial


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
