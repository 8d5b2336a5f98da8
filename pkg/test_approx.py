"""
Unit tests for coefficient tables, the w -> B -> a recoveries, the lambda
weights and the partial sums.

Hand values for the right trefoil, P = 2v^2 - v^4 + v^2 z^2:

  P(e^{Nx}, x) = 2e^{2Nx} - e^{4Nx} + x^2 e^{2Nx}
  w[N,0] = 1,  w[N,1] = 0,  w[N,2] = 4N^2 - 8N^2 + 1 = 1 - 4N^2
  B[0,0] = 1,  B[1,0] = 0,  B[2,0] = (8 - 16)/2 = -4,  B[0,2] = 1

and for lambda, integrating by parts:

  lambda[1,0] = i*pi,  lambda[1,n] = -1/n,  lambda[2,n] = -2*pi*i/n - 2/n^2

Run with: pytest test_approx.py -v
"""

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest

from algebra import (
    DomainError,
    LaurentPoly2,
    LemmaViolationError,
    MissingFamilyError,
    UnderDeterminedError,
    mp_context,
)
from approx import (
    B_coeff,
    CoeffTable,
    ComponentInvariant,
    approx_sequence,
    approximant_families,
    approximant_family,
    assemble_weak,
    coeff_table,
    column_vector,
    f_eval,
    lambda_closed_form,
    lambda_quadrature,
    lambda_table,
    lambda_weight,
    recover_a_from_B,
    recover_B_from_w,
    relative_deviation,
    series_remainder_bound,
    stationarity_index,
    substitute_v_exp,
    table_for,
    truncated_B_series,
    w_direct,
)
from corpus import load_link
from skein import SkeinEngine

TREFOIL = CoeffTable(1, 4, {(2, 0): 2, (4, 0): -1, (2, 2): 1})
HOPF = CoeffTable(2, 3, {(1, -1): 1, (3, -1): -1, (1, 1): 1})
UNKNOT = CoeffTable(1, 0, {(0, 0): 1})


class TestCoeffTable:
    """Test table construction and validation."""

    def test_from_polynomial(self):
        """Test coeff_table reads the grid and degree off a polynomial."""
        p = LaurentPoly2({(2, 0): 2, (4, 0): -1, (2, 2): 1})
        t = coeff_table(p, 1)
        assert t == TREFOIL
        assert t.degree_d == 4
        assert t.support == [(2, 0), (4, 0), (2, 2)]
        assert t.j_values == [0, 2]

    def test_z_floor_enforced(self):
        """Test a z^-1 term on a knot violates the floor."""
        with pytest.raises(LemmaViolationError):
            coeff_table(LaurentPoly2({(1, -1): 1}), 1)
        with pytest.raises(LemmaViolationError):
            CoeffTable(1, 1, {(1, -1): 1})

    def test_degree_enforced(self):
        """Test entries beyond the declared degree are refused."""
        with pytest.raises(DomainError):
            CoeffTable(1, 1, {(2, 0): 1})

    def test_perturbed(self):
        """Test fault injection touches exactly one entry."""
        t = TREFOIL.perturbed(2, 0, 1)
        assert t.a(2, 0) == 3
        assert t.a(4, 0) == -1
        assert TREFOIL.a(2, 0) == 2

    def test_round_trip_to_polynomial(self):
        """Test the table converts back to its polynomial."""
        assert TREFOIL.to_polynomial() == LaurentPoly2({(2, 0): 2, (4, 0): -1, (2, 2): 1})


class TestW:
    """Test w[N,q] by direct sum and by series substitution."""

    def test_trefoil_values(self):
        """Test the hand values w[N,0] = 1, w[N,1] = 0, w[N,2] = 1 - 4N^2."""
        for N in (-2, 1, 3):
            assert w_direct(TREFOIL, N, 0) == 1
            assert w_direct(TREFOIL, N, 1) == 0
            assert w_direct(TREFOIL, N, 2) == 1 - 4 * N * N

    def test_hopf_negative_order(self):
        """Test the two-component floor q = -1 and w[N,0] = -2N."""
        assert w_direct(HOPF, 1, -1) == 0
        assert w_direct(HOPF, 5, 0) == -10

    def test_below_floor(self):
        """Test q < -mu+1 is a domain error."""
        with pytest.raises(DomainError):
            w_direct(TREFOIL, 1, -1)

    def test_substitution(self):
        """Test P_Hopf(e^x, x) = -2 - 3x - 10/3 x^2 + ..."""
        s = substitute_v_exp(HOPF, 1, 2)
        assert s.coeffs == (-2, -3, Fraction(-10, 3))

    def test_two_paths_agree(self):
        """Test direct sums equal the substituted series coefficients."""
        for N in range(-3, 4):
            s = substitute_v_exp(TREFOIL, N, 6)
            assert [w_direct(TREFOIL, N, q) for q in range(7)] == list(s.coeffs)

    def test_surviving_negative_power(self):
        """Test a 1/x term that does not cancel is refused."""
        bad = CoeffTable(2, 1, {(0, -1): 1})
        with pytest.raises(LemmaViolationError):
            substitute_v_exp(bad, 1, 2)


class TestRecovery:
    """Test both Vandermonde recoveries."""

    def test_B_values(self):
        """Test B against the hand values."""
        assert B_coeff(TREFOIL, 0, 0) == 1
        assert B_coeff(TREFOIL, 1, 0) == 0
        assert B_coeff(TREFOIL, 2, 0) == -4
        assert B_coeff(TREFOIL, 0, 2) == 1

    def test_B_from_w(self):
        """Test recovering B[p, 2-p] from w[1..3, 2]."""
        assert recover_B_from_w(TREFOIL, 2, 3) == [1, 0, -4]

    def test_B_from_w_overdetermined(self):
        """Test extra rows give trailing zeros."""
        assert recover_B_from_w(TREFOIL, 2, 6) == [1, 0, -4, 0, 0, 0]

    def test_B_from_w_underdetermined(self):
        """Test fewer than q+mu rows are refused."""
        with pytest.raises(UnderDeterminedError):
            recover_B_from_w(TREFOIL, 2, 2)

    def test_a_from_B(self):
        """Test the j=0 column comes back exactly at n = d."""
        assert recover_a_from_B(TREFOIL, 0, 4) == column_vector(TREFOIL, 0, 4)
        assert column_vector(TREFOIL, 0, 4) == [0, 0, 0, 0, 0, 0, 2, 0, -1]

    def test_stationarity(self):
        """Test the first stationary n equals the largest |k| in each column."""
        assert stationarity_index(TREFOIL, 0) == 4
        assert stationarity_index(TREFOIL, 2) == 2
        assert stationarity_index(UNKNOT, 0) == 1

    def test_a_from_B_needs_positive_n(self):
        """Test n = 0 is refused."""
        with pytest.raises(DomainError):
            recover_a_from_B(TREFOIL, 0, 0)


class TestLambda:
    """Test the lambda weights."""

    def test_quadrature_leaves_shared_context_alone(self):
        """Test concurrent quadratures keep the cached context at its precision and agree with serial runs."""
        jobs = [(m, n) for m in range(4) for n in range(-4, 5)]
        serial = [lambda_quadrature(m, n, 256) for m, n in jobs]
        with ThreadPoolExecutor(max_workers=8) as pool:
            concurrent = list(pool.map(lambda job: lambda_quadrature(job[0], job[1], 256), jobs))
        assert mp_context(256).prec == 256
        assert concurrent == serial

    def test_base_values(self):
        """Test lambda[0,0] = 1 and lambda[0,n] = 0."""
        assert lambda_weight(0, 0) == 1
        for n in (-2, -1, 1, 2):
            assert lambda_weight(0, n) == 0

    def test_hand_values(self):
        """Test lambda[1,0], lambda[1,n] and lambda[2,n] against integration by parts."""
        ctx = mp_context(256)
        tol = ctx.mpf(2) ** -240
        assert abs(lambda_weight(1, 0) - ctx.mpc(0, ctx.pi)) < tol
        assert abs(lambda_weight(1, 3) + ctx.mpf(1) / 3) < tol
        expected = ctx.mpc(-ctx.mpf(2) / 4, -ctx.pi)
        assert abs(lambda_weight(2, 2) - expected) < tol

    def test_closed_form(self):
        """Test the closed form matches the recurrence."""
        for m in range(6):
            for n in (-3, 1, 4):
                assert relative_deviation(lambda_closed_form(m, n), lambda_weight(m, n)) < 1e-25

    def test_closed_form_needs_nonzero_n(self):
        """Test the closed form is undefined at n = 0."""
        with pytest.raises(DomainError):
            lambda_closed_form(2, 0)

    def test_quadrature(self):
        """Test the recurrence against numerical integration."""
        for m, n in ((3, 2), (5, -1), (4, 0)):
            assert relative_deviation(lambda_weight(m, n), lambda_quadrature(m, n)) < 1e-25

    def test_negative_m(self):
        """Test m < 0 is refused."""
        with pytest.raises(DomainError):
            lambda_weight(-1, 0)

    def test_table(self):
        """Test the tabulated rows, including the undefined closed form at n = 0."""
        rows = lambda_table(2, 2, 128)
        assert len(rows) == 15
        by_key = {(r.m, r.n): r for r in rows}
        assert by_key[(0, 0)].recurrence == "1.0+0.0j"
        assert by_key[(0, 0)].closed_form is None
        assert by_key[(0, 1)].recurrence == "0.0+0.0j"
        assert not any(r.flagged for r in rows)
        assert all(r.dev_quadrature < 1e-25 for r in rows)


class TestPartialSums:
    """Test the lambda-weighted partial sums."""

    def test_unknot_is_exact(self):
        """Test the unknot converges at N = 0 with zero error."""
        report = approx_sequence(UNKNOT, 0, 0, 10)
        assert report.exact_value == 1
        assert report.final_error == 0.0
        assert report.stabilized_at == 0
        assert len(report.rendered_sequence()) == 11

    def test_trefoil_converges(self):
        """Test a[2,0] of the trefoil is reached well within N = 120."""
        report = approx_sequence(TREFOIL, 2, 0, 120)
        assert report.final_error < 1e-6
        assert report.tail_non_increasing
        assert report.terms_needed is not None

    def test_cancelling_terms_tail(self):
        """Test the figure-eight a[-2,0] tail counts as non-increasing once the error reaches rounding level."""
        eight = CoeffTable(1, 2, {(-2, 0): 1, (0, 0): -1, (2, 0): 1, (0, 2): -1})
        report = approx_sequence(eight, -2, 0, 200)
        assert report.final_error < 1e-60
        assert report.tail_non_increasing
        assert report.terms_needed is not None

    def test_zero_coefficient(self):
        """Test an absent coefficient is approximated by 0."""
        report = approx_sequence(TREFOIL, 3, 0, 120)
        assert report.exact_value == 0
        assert report.final_error < 1e-6

    def test_negative_bound(self):
        """Test N_max < 0 is refused."""
        with pytest.raises(DomainError):
            approx_sequence(TREFOIL, 2, 0, -1)


class TestGeneratingFunction:
    """Test f_{L,j} and its B expansion."""

    def test_f_eval(self):
        """Test f_{Hopf,-1}(2) = 2 - 8."""
        assert f_eval(HOPF, -1, 2) == -6

    def test_pole_at_zero(self):
        """Test negative powers make 0 a pole."""
        eight = CoeffTable(1, 2, {(-2, 0): 1, (0, 0): -1, (2, 0): 1})
        with pytest.raises(DomainError):
            f_eval(eight, 0, 0)

    @pytest.mark.parametrize("x", ["0.3", "1e-2", "1e-3"])
    def test_remainder_bound(self, x):
        """Test the truncated B series stays within the Taylor bound of f(e^x)."""
        ctx = mp_context(256)
        x = ctx.mpf(x)
        exact = f_eval(TREFOIL, 0, ctx.exp(x))
        for M in (10, 20):
            approx = truncated_B_series(TREFOIL, 0, x, M)
            assert abs(exact - approx) <= series_remainder_bound(TREFOIL, 0, x, M)


class TestFamilies:
    """Test finite-type families and their assembly across component counts."""

    def test_approximant_family(self):
        """Test s_k^{n,j} evaluates to a_{kj} once n >= d."""
        engine = SkeinEngine()
        family = approximant_family(2, 0, 4, engine=engine)
        assert family.order == 8
        assert family.evaluate(load_link("trefoil-right")) == 2
        assert approximant_family(5, 0, 4, engine=engine).evaluate(load_link("trefoil-right")) == 0

    def test_table_for(self):
        """Test table_for builds the trefoil table."""
        assert table_for(load_link("trefoil-right")) == TREFOIL

    def test_assemble(self):
        """Test the assembled invariant dispatches on component count."""
        families = {
            1: ComponentInvariant(2, lambda d: Fraction(1)),
            2: ComponentInvariant(3, lambda d: Fraction(2)),
        }
        weak = assemble_weak(families, 2)
        assert weak.order == 3
        assert weak(load_link("trefoil-right")) == 1
        assert weak(load_link("hopf-positive")) == 2
        assert weak(load_link("unlink-3")) == 0

    def test_families_across_component_counts(self):
        """Test one approximant per component count assembles into a single invariant."""
        families = approximant_families(2, 0, 4, [1, 2], engine=SkeinEngine())
        assert set(families) == {1, 2}
        weak = assemble_weak(families, 2)
        assert weak.order == 8
        assert weak(load_link("trefoil-right")) == 2
        assert weak(load_link("hopf-positive")) == 0
        assert weak(load_link("unlink-3")) == 0

    def test_missing_family(self):
        """Test a gap in the component counts is reported."""
        weak = assemble_weak({1: ComponentInvariant(0, lambda d: Fraction(1))}, 2)
        with pytest.raises(MissingFamilyError):
            weak.order
        with pytest.raises(MissingFamilyError):
            weak(load_link("hopf-positive"))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
