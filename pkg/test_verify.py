"""
Unit tests for the certification checks and the invariant suite.

Run with: pytest test_verify.py -v
"""

from fractions import Fraction

import pytest

from algebra import (
    HOMFLY_LABELS,
    DecompositionError,
    LaurentPoly2,
    UnsupportedInputError,
)
from approx import CoeffTable
from corpus import load_link, singular_samples
from diagram import make_singular
from skein import SkeinEngine
from verify import (
    InvariantSuite,
    TableCache,
    b_round_trip_check,
    b_vanishing_thresholds,
    delta_basis_decompose,
    dubrovnik_kauffman_identity_check,
    extend_to_singular,
    order_check,
    stationarity_check,
    substitution_crosscheck,
    w_invariant,
    writhe_invariant,
    z_lowbound_check,
)

TREFOIL = CoeffTable(1, 4, {(2, 0): 2, (4, 0): -1, (2, 2): 1})
FAULTY = TREFOIL.perturbed(2, 0, 1)


def P(*terms):
    return LaurentPoly2({(k, j): Fraction(c) for c, k, j in terms}, HOMFLY_LABELS)


@pytest.fixture(scope="module")
def tables():
    return TableCache(SkeinEngine())


class TestOrderWitness:
    """Test the singular extension and order checks."""

    def test_writhe_extension(self):
        """Test one double point on the trefoil: writhe 3 minus writhe 1."""
        d = make_singular(load_link("trefoil-right"), 0)
        assert extend_to_singular(writhe_invariant, d) == 2

    def test_w_has_order_zero(self, tables):
        """Test w[N,0] vanishes on every sample with one double point."""
        samples = singular_samples(1, count=6, seed=1)
        report = order_check(w_invariant(2, 0, tables), 0, samples, name="w[2,0]")
        assert report.all_zero_at_q_plus_1
        assert len(report.singular_samples) == 6

    def test_w_has_order_one(self, tables):
        """Test w[N,1] vanishes on every sample with two double points."""
        report = order_check(w_invariant(1, 1, tables), 1, singular_samples(2, count=6, seed=1))
        assert report.all_zero_at_q_plus_1

    def test_dubrovnik_w_order(self, tables):
        """Test wD[N,q] vanishes on every sample with q+1 double points."""
        for q in (0, 1, 2):
            samples = singular_samples(q + 1, count=6, seed=3)
            for N in (1, 2, 3):
                report = order_check(w_invariant(N, q, tables, "dubrovnik"), q, samples, name=f"wD[{N},{q}]")
                assert report.all_zero_at_q_plus_1

    def test_negative_control(self):
        """Test the writhe is caught as not of order zero."""
        report = order_check(writhe_invariant, 0, singular_samples(1, count=10))
        assert not report.all_zero_at_q_plus_1

    def test_wrong_sample_size(self, tables):
        """Test samples must carry exactly claimed_order + 1 double points."""
        with pytest.raises(UnsupportedInputError):
            order_check(w_invariant(1, 0, tables), 0, singular_samples(2, count=2))

    def test_cap_errors_are_recorded(self):
        """Test a crossing cap failure marks the sample instead of aborting."""
        capped = TableCache(SkeinEngine(crossing_cap=1))
        report = order_check(w_invariant(1, 0, capped), 0, singular_samples(1, count=3))
        assert not report.all_zero_at_q_plus_1
        assert all(r.error for r in report.singular_samples)

    def test_b_thresholds(self, tables):
        """Test B[0,0] is seen to vanish from one double point on."""
        samples = {s: singular_samples(s, count=4, seed=2) for s in (1, 2)}
        thresholds = b_vanishing_thresholds(tables, samples, pairs=((0, 0),))
        assert thresholds == {"B[0,0]": 1}


class TestPolynomialStructure:
    """Test the z-floor and the split-factor decomposition."""

    def test_z_floor(self):
        """Test z^-1 is allowed for two components only."""
        hopf = P((1, 1, -1), (-1, 3, -1), (1, 1, 1))
        assert z_lowbound_check(hopf, 2)
        assert not z_lowbound_check(hopf, 1)
        assert z_lowbound_check(LaurentPoly2.zero(), 1)

    def test_hopf_decomposition(self):
        """Test Hopf+ = v^2 * delta + v z with delta = (v^-1 - v)/z."""
        hopf = P((1, 1, -1), (-1, 3, -1), (1, 1, 1))
        result = delta_basis_decompose(hopf, 2)
        assert result.success
        assert result.delta_sign == "skein"
        assert result.coefficients[1] == P((1, 2, 0))
        assert result.coefficients[0] == P((1, 1, 1))
        assert result.recompose() == hopf

    def test_unlink_decomposition(self):
        """Test the three-component unlink is delta^2."""
        p = SkeinEngine().homflypt(load_link("unlink-3"))
        result = delta_basis_decompose(p, 3)
        assert result.success
        assert set(result.coefficients) == {2}
        assert result.recompose() == p

    def test_dubrovnik_basis(self):
        """Test the Dubrovnik split factor peels the unlink."""
        f = SkeinEngine().dubrovnik(load_link("unlink-2"))
        result = delta_basis_decompose(f, 2, basis="dubrovnik")
        assert result.success
        assert result.recompose() == f

    def test_too_deep(self):
        """Test z^-2 on two components cannot be decomposed."""
        p = P((1, 0, -2))
        assert not delta_basis_decompose(p, 2).success
        with pytest.raises(DecompositionError):
            delta_basis_decompose(p, 2, strict=True)

    def test_unknown_basis(self):
        """Test the basis selector is checked."""
        with pytest.raises(UnsupportedInputError):
            delta_basis_decompose(P((1, 0, 0)), 1, basis="jones")

    def test_kauffman_identity(self):
        """Test the Dubrovnik/Kauffman round trip on multi-component links."""
        for name in ("hopf-negative", "unlink-3", "torus-2-4", "trefoil-left"):
            assert dubrovnik_kauffman_identity_check(load_link(name))


class TestCrossChecks:
    """Test the exact cross-checks and their sensitivity to a corrupted entry."""

    def test_substitution(self):
        """Test both w paths agree on an intact table."""
        assert substitution_crosscheck(TREFOIL, range(-3, 4), range(0, 7))

    def test_substitution_detects_fault(self):
        """Test a corrupted direct path disagrees with the reference series."""
        assert not substitution_crosscheck(FAULTY, range(-3, 4), range(0, 7), reference=TREFOIL)

    def test_b_round_trip(self):
        """Test B recovery on an intact and a corrupted table."""
        assert b_round_trip_check(TREFOIL, 4) == (True, "")
        ok, reason = b_round_trip_check(FAULTY, 4, reference=TREFOIL)
        assert not ok
        assert "q=0" in reason

    def test_stationarity(self):
        """Test column recovery on an intact and a corrupted table."""
        assert stationarity_check(TREFOIL) == (True, "")
        ok, _ = stationarity_check(FAULTY, reference=TREFOIL)
        assert not ok


class TestSuite:
    """Test the full invariant suite over the bundled corpus."""

    def test_all_checks_pass(self):
        """Test every check passes on the corpus with default tolerances."""
        results = InvariantSuite(n_max=3).validate()
        failed = {name: c["reason"] for name, c in results["checks"].items() if not c["passed"]}
        assert failed == {}
        assert results["all_passed"]
        assert results["score"] == 1.0

    def test_mutation_is_caught(self):
        """Test one injected fault fails at least one exact cross-check."""
        suite = InvariantSuite(mutate=1)
        results = suite.validate(["two_path_w", "b_round_trip", "stationarity"])
        assert not results["all_passed"]
        assert not results["checks"]["two_path_w"]["passed"]
        hints = InvariantSuite.explain_failures(results)
        assert hints

    def test_only_lambda(self):
        """Test running a single check reports the maximum deviation."""
        results = InvariantSuite(n_max=2).validate(["lambda"])
        assert list(results["checks"]) == ["lambda"]
        assert results["checks"]["lambda"]["passed"]
        assert "max relative deviation" in results["checks"]["lambda"]["reason"]

    def test_unknown_check(self):
        """Test an unknown check name is refused."""
        with pytest.raises(UnsupportedInputError):
            InvariantSuite().validate(["nonsense"])

    def test_report_model(self):
        """Test the aggregated dict converts to the report model."""
        results = InvariantSuite().validate(["unknot_normalization", "z_floor"])
        report = InvariantSuite.to_report(results)
        assert report.all_passed
        assert set(report.checks) == {"unknot_normalization", "z_floor"}


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
