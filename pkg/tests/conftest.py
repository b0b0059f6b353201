import numpy as np
import pytest

from loan_recovery import Account, LoanSpec, Portfolio, build_account


@pytest.fixture(scope="session")
def default_spec() -> LoanSpec:
    """The standard five-year contract used throughout the suite."""
    return LoanSpec.from_instalment(
        instalment=100.0,
        term_months=60,
        loan_rate_annual_eff=0.20,
        riskfree_rate_annual_eff=0.07,
        max_loan_size=5_000.0,
    )


@pytest.fixture()
def paying_account(default_spec) -> Account:
    receipts = np.full(61, 100.0)
    receipts[0] = 0.0
    return build_account(0, default_spec, receipts)


@pytest.fixture()
def make_binary_account(default_spec):
    """Factory: an account that pays in full except at the given periods."""

    def build(missed, account_id: int = 0, spec: LoanSpec | None = None) -> Account:
        spec = spec or default_spec
        receipts = np.full(spec.term_months + 1, spec.instalment)
        receipts[0] = 0.0
        for t in missed:
            receipts[t] = 0.0
        return build_account(account_id, spec, receipts)

    return build


@pytest.fixture()
def make_portfolio():
    def build(accounts) -> Portfolio:
        return Portfolio(accounts=tuple(accounts))

    return build
