import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loan_recovery import (
    Account,
    LoanSpec,
    Portfolio,
    build_account,
    discount_factor,
    monthly_rate,
    principal_for_instalment,
)
from loan_recovery.portfolio import discount_powers

from oracles import annuity_principal, v


# --- rate conversion ----------------------------------------------------


class TestMonthlyRate:
    def test_zero_rate_is_identity(self):
        assert monthly_rate(0.0) == 0.0

    def test_twenty_percent(self):
        assert monthly_rate(0.20) == pytest.approx(0.0153095, abs=1e-6)

    def test_seven_percent(self):
        assert monthly_rate(0.07) == pytest.approx(0.0056541, abs=1e-6)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            monthly_rate(-0.01)
        with pytest.raises(ValueError):
            monthly_rate(1.0)

    @given(st.floats(min_value=0.0, max_value=0.99))
    @settings(max_examples=50)
    def test_compounds_back_to_annual(self, annual):
        """Twelve monthly compoundings recover the annual effective rate."""
        assert (1.0 + monthly_rate(annual)) ** 12 == pytest.approx(
            1.0 + annual, rel=1e-12
        )


class TestDiscountFactor:
    def test_zero_periods_is_one(self):
        assert discount_factor(0.20, 0) == 1.0
        assert discount_factor(0.0, 0) == 1.0

    def test_five_years_at_twenty_percent(self):
        # 60 months = 5 years, so the factor is 1.2**-5
        assert discount_factor(0.20, 60) == pytest.approx(0.401878, abs=1e-6)

    def test_one_year_at_seven_percent(self):
        assert discount_factor(0.07, 12) == pytest.approx(1 / 1.07, abs=1e-6)

    def test_rejects_negative_periods(self):
        with pytest.raises(ValueError):
            discount_factor(0.07, -1)

    def test_strictly_decreasing_in_periods(self):
        factors = [discount_factor(0.2, p) for p in range(25)]
        assert all(a > b for a, b in zip(factors, factors[1:]))

    def test_matches_fractional_exponent_route(self):
        for periods in (1, 7, 30, 60):
            assert discount_factor(0.2, periods) == pytest.approx(
                float(v(0.2, periods)), rel=1e-12
            )


class TestDiscountPowers:
    def test_agrees_with_scalar_factor(self):
        powers = discount_powers(0.07, 12)
        for p in range(13):
            assert powers[p] == pytest.approx(discount_factor(0.07, p), rel=1e-15)

    def test_is_read_only(self):
        powers = discount_powers(0.2, 6)
        with pytest.raises(ValueError):
            powers[0] = 2.0


# --- annuity arithmetic -------------------------------------------------


class TestPrincipalForInstalment:
    def test_default_contract(self):
        value = principal_for_instalment(100.0, 60, 0.20)
        assert value == pytest.approx(3906.87, abs=0.01)
        assert value == pytest.approx(annuity_principal(100.0, 60, 0.20), rel=1e-12)

    def test_zero_rate_degenerates_to_sum(self):
        assert principal_for_instalment(100.0, 12, 0.0) == 1200.0

    def test_single_payment(self):
        assert principal_for_instalment(1.0, 1, 0.20) == pytest.approx(0.98492, abs=1e-4)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            principal_for_instalment(0.0, 60, 0.2)
        with pytest.raises(ValueError):
            principal_for_instalment(100.0, 0, 0.2)

    @given(
        st.floats(min_value=1.0, max_value=1e4),
        st.integers(min_value=1, max_value=120),
        st.floats(min_value=0.0, max_value=0.5),
    )
    @settings(max_examples=50)
    def test_annuity_round_trip(self, instalment, term, rate):
        """Discounting the level schedule recovers the principal."""
        principal = principal_for_instalment(instalment, term, rate)
        powers = discount_powers(rate, term)
        assert float(instalment * powers[1:].sum()) == pytest.approx(
            principal, rel=1e-9
        )


# --- containers ---------------------------------------------------------


@pytest.fixture()
def short_spec() -> LoanSpec:
    return LoanSpec.from_instalment(
        instalment=100.0,
        term_months=3,
        loan_rate_annual_eff=0.20,
        riskfree_rate_annual_eff=0.07,
        max_loan_size=5_000.0,
    )


class TestLoanSpec:
    def test_from_instalment_implies_principal(self, short_spec):
        assert short_spec.principal == pytest.approx(
            annuity_principal(100.0, 3, 0.20), rel=1e-12
        )

    def test_rejects_inconsistent_principal(self, short_spec):
        with pytest.raises(ValueError, match="does not match"):
            LoanSpec(
                term_months=3,
                loan_rate_annual_eff=0.20,
                riskfree_rate_annual_eff=0.07,
                instalment=100.0,
                principal=short_spec.principal * 1.01,
                max_loan_size=5_000.0,
            )

    def test_rejects_max_loan_below_principal(self):
        with pytest.raises(ValueError, match="max_loan_size"):
            LoanSpec.from_instalment(
                instalment=100.0,
                term_months=60,
                loan_rate_annual_eff=0.20,
                riskfree_rate_annual_eff=0.07,
                max_loan_size=100.0,
            )

    def test_rejects_bad_rates_and_term(self):
        with pytest.raises(ValueError):
            LoanSpec.from_instalment(100.0, 0, 0.2, 0.07, 5_000.0)
        with pytest.raises(ValueError):
            LoanSpec.from_instalment(100.0, 60, 1.5, 0.07, 5_000.0)


class TestAccount:
    def test_construction_copies_and_freezes(self, short_spec):
        receipts = np.array([0.0, 100.0, 100.0, 100.0])
        account = build_account(0, short_spec, receipts)
        receipts[1] = 55.0
        assert account.receipts[1] == 100.0
        with pytest.raises(ValueError):
            account.receipts[1] = 0.0

    def test_tenure(self, short_spec):
        account = build_account(0, short_spec, [0.0, 100.0, 100.0, 100.0])
        assert account.tenure == 3

    def test_rejects_length_mismatch(self, short_spec):
        with pytest.raises(ValueError, match="length"):
            Account(
                id=0,
                spec=short_spec,
                instalments=np.array([0.0, 100.0, 100.0]),
                receipts=np.array([0.0, 100.0]),
            )

    def test_rejects_negative_flows(self, short_spec):
        with pytest.raises(ValueError, match="non-negative"):
            Account(
                id=0,
                spec=short_spec,
                instalments=np.array([0.0, 100.0, 100.0, 100.0]),
                receipts=np.array([0.0, -5.0, 100.0, 100.0]),
            )


class TestBuildAccount:
    def test_level_instalment_schedule(self, short_spec):
        account = build_account(0, short_spec, [0.0, 100.0, 100.0, 100.0])
        assert account.instalments.tolist() == [0.0, 100.0, 100.0, 100.0]

    def test_all_zero_receipts_allowed(self, short_spec):
        account = build_account(2, short_spec, [0.0, 0.0, 0.0, 0.0])
        assert account.receipts[1:].sum() == 0.0

    def test_rejects_short_receipts(self, short_spec):
        with pytest.raises(ValueError, match="expected 4 receipts"):
            build_account(1, short_spec, [0.0, 100.0, 100.0])

    def test_rejects_nonzero_origination_receipt(self, short_spec):
        with pytest.raises(ValueError, match="receipts\\[0\\]"):
            build_account(1, short_spec, [1.0, 100.0, 100.0, 100.0])


class TestPortfolio:
    def test_len_iter_and_principal_sum(self, short_spec):
        accounts = [
            build_account(i, short_spec, [0.0, 100.0, 100.0, 100.0]) for i in range(3)
        ]
        portfolio = Portfolio(accounts=tuple(accounts))
        assert len(portfolio) == 3
        assert [a.id for a in portfolio] == [0, 1, 2]
        assert portfolio.principal_sum == pytest.approx(3 * short_spec.principal)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Portfolio(accounts=())
