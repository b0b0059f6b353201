"""Amortising-loan arithmetic and the account/portfolio containers.

Loans are level-instalment annuities: a principal is advanced at period 0
and repaid with one fixed monthly instalment over the contractual term.
Cash flows are indexed t = 0..T with nothing due and nothing received at
t = 0, so instalment and receipt vectors have length T + 1.

Two annual effective rates drive all discounting: the loan rate prices
the borrower's schedule, the risk-free rate is the lender's opportunity
cost.  Both convert to monthly effective rates via the 12th root.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "MONTHS_PER_YEAR",
    "LoanSpec",
    "Account",
    "Portfolio",
    "monthly_rate",
    "discount_factor",
    "discount_powers",
    "principal_for_instalment",
    "build_account",
]

MONTHS_PER_YEAR = 12

# Relative tolerance for the principal-vs-schedule identity on LoanSpec.
PRINCIPAL_REL_TOL = 1e-9


def monthly_rate(annual_effective: float) -> float:
    """Monthly effective rate equivalent to an annual effective rate.

    Parameters
    ----------
    annual_effective : float
        Annual effective rate as a fraction, in [0, 1).

    Returns
    -------
    float
        The rate r such that (1 + r)**12 = 1 + annual_effective.
    """
    if not 0.0 <= annual_effective < 1.0:
        raise ValueError(
            f"annual effective rate must lie in [0, 1), got {annual_effective}"
        )
    return (1.0 + annual_effective) ** (1.0 / MONTHS_PER_YEAR) - 1.0


def discount_factor(rate_annual_eff: float, periods: int) -> float:
    """Discount factor over ``periods`` months at an annual effective rate.

    Returns (1 + monthly_rate)**(-periods); equals 1.0 at zero periods.
    """
    if periods < 0:
        raise ValueError(f"periods must be non-negative, got {periods}")
    return (1.0 + monthly_rate(rate_annual_eff)) ** (-periods)


@lru_cache(maxsize=None)
def discount_powers(rate_annual_eff: float, upto: int) -> np.ndarray:
    """Read-only vector [v_0, v_1, ..., v_upto] of monthly discount factors."""
    if upto < 0:
        raise ValueError(f"upto must be non-negative, got {upto}")
    growth = 1.0 + monthly_rate(rate_annual_eff)
    powers = growth ** (-np.arange(upto + 1, dtype=float))
    powers.setflags(write=False)
    return powers


def principal_for_instalment(
    instalment: float, term_months: int, loan_rate_annual_eff: float
) -> float:
    """Principal amortised by a level instalment over ``term_months``.

    The present value of the instalment stream at the monthly-effective
    loan rate.  A zero rate degenerates to instalment * term_months.
    """
    if instalment <= 0:
        raise ValueError(f"instalment must be positive, got {instalment}")
    if term_months < 1:
        raise ValueError(f"term must be at least one month, got {term_months}")
    i_m = monthly_rate(loan_rate_annual_eff)
    if i_m == 0.0:
        return instalment * term_months
    return instalment * (1.0 - (1.0 + i_m) ** (-term_months)) / i_m


@dataclass(frozen=True)
class LoanSpec:
    """Contractual parameters shared by every period of one loan.

    Attributes
    ----------
    term_months : int
        Contractual term t_c in months.
    loan_rate_annual_eff : float
        Annual effective rate the loan is priced at.
    riskfree_rate_annual_eff : float
        Annual effective opportunity rate used for loss discounting.
    instalment : float
        Level monthly instalment.
    principal : float
        Amount advanced; must equal the discounted instalment schedule.
    max_loan_size : float
        Largest principal the lender writes; scales the size penalty of
        the G3 delinquency measure.
    """

    term_months: int
    loan_rate_annual_eff: float
    riskfree_rate_annual_eff: float
    instalment: float
    principal: float
    max_loan_size: float

    def __post_init__(self) -> None:
        if self.term_months < 1:
            raise ValueError(f"term must be at least one month, got {self.term_months}")
        if self.instalment <= 0:
            raise ValueError(f"instalment must be positive, got {self.instalment}")
        if self.principal <= 0:
            raise ValueError(f"principal must be positive, got {self.principal}")
        for name in ("loan_rate_annual_eff", "riskfree_rate_annual_eff"):
            rate = getattr(self, name)
            if not 0.0 <= rate < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {rate}")
        if self.max_loan_size < self.principal:
            raise ValueError(
                f"max_loan_size {self.max_loan_size} is below the principal {self.principal}"
            )
        implied = principal_for_instalment(
            self.instalment, self.term_months, self.loan_rate_annual_eff
        )
        if abs(implied - self.principal) > PRINCIPAL_REL_TOL * max(implied, self.principal):
            raise ValueError(
                f"principal {self.principal} does not match the discounted "
                f"instalment schedule ({implied})"
            )

    @classmethod
    def from_instalment(
        cls,
        instalment: float,
        term_months: int,
        loan_rate_annual_eff: float,
        riskfree_rate_annual_eff: float,
        max_loan_size: float,
    ) -> "LoanSpec":
        """Build a spec whose principal is implied by the instalment."""
        principal = principal_for_instalment(instalment, term_months, loan_rate_annual_eff)
        return cls(
            term_months=term_months,
            loan_rate_annual_eff=loan_rate_annual_eff,
            riskfree_rate_annual_eff=riskfree_rate_annual_eff,
            instalment=instalment,
            principal=principal,
            max_loan_size=max_loan_size,
        )


@dataclass(frozen=True, eq=False)
class Account:
    """One loan: its spec plus observed instalment and receipt vectors.

    Vectors run t = 0..T with I_0 = R_0 = 0 in the simulated testbed
    (the types allow I_0 > 0 for origination fees).  T equals the
    contractual term for simulated accounts; it may exceed it for
    accounts observed through post-maturity collections.
    """

    id: int
    spec: LoanSpec
    instalments: np.ndarray
    receipts: np.ndarray

    def __post_init__(self) -> None:
        inst = np.array(self.instalments, dtype=float)
        rec = np.array(self.receipts, dtype=float)
        if inst.ndim != 1 or rec.ndim != 1:
            raise ValueError("instalments and receipts must be one-dimensional")
        if len(inst) != len(rec):
            raise ValueError(
                f"length mismatch: {len(inst)} instalments vs {len(rec)} receipts"
            )
        if len(inst) < 2:
            raise ValueError("an account needs at least periods t=0 and t=1")
        if np.any(inst < 0) or np.any(rec < 0):
            raise ValueError("cash flows must be non-negative")
        inst.setflags(write=False)
        rec.setflags(write=False)
        object.__setattr__(self, "instalments", inst)
        object.__setattr__(self, "receipts", rec)

    @property
    def tenure(self) -> int:
        """Last observed period T (vectors cover t = 0..T)."""
        return len(self.receipts) - 1


def build_account(id: int, spec: LoanSpec, receipts: Sequence[float]) -> Account:
    """Assemble a fully-observed account from its receipt vector.

    ``receipts`` must cover t = 0..term with receipts[0] = 0; the
    instalment vector [0, I, I, ..., I] comes from ``spec``.
    """
    rec = np.array(receipts, dtype=float)
    expected_len = spec.term_months + 1
    if len(rec) != expected_len:
        raise ValueError(
            f"expected {expected_len} receipts (t = 0..term), got {len(rec)}"
        )
    if rec[0] != 0.0:
        raise ValueError("receipts[0] must be 0: nothing is due at origination")
    instalments = np.full(expected_len, spec.instalment, dtype=float)
    instalments[0] = 0.0
    return Account(id=id, spec=spec, instalments=instalments, receipts=rec)


@dataclass(frozen=True, eq=False)
class Portfolio:
    """A fixed collection of accounts plus the config that generated it."""

    accounts: tuple[Account, ...]
    provenance: object | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "accounts", tuple(self.accounts))
        if not self.accounts:
            raise ValueError("a portfolio needs at least one account")

    def __len__(self) -> int:
        return len(self.accounts)

    def __iter__(self) -> Iterator[Account]:
        return iter(self.accounts)

    @property
    def principal_sum(self) -> float:
        """Sum of principals: the normalising unit for portfolio losses."""
        return float(sum(acc.spec.principal for acc in self.accounts))
