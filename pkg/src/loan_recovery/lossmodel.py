"""Discounted loss components and the portfolio loss objective.

A recovery policy (g, d) forecloses an account at the first time its
delinquency series g reaches the threshold d; accounts that never reach
d run to their contractual term.  The loss assessed at time t blends
two components, each discounted to origination:

* the expected outstanding balance O(t): the remaining contractual
  instalments discounted to t at the loan rate, then discounted to 0 at
  the risk-free rate, charged at rate r_e;
* the arrears balance A(t): the cumulative shortfall of receipts
  against instalments, each period discounted at the risk-free rate,
  charged at rate r_a.

The portfolio objective sums defaulter losses at their individual
default times and performer losses at the contractual term, and is
also reported as a fraction of total principal advanced.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .delinquency import CdParams, DodParams, Measure, SeriesCache
from .portfolio import Account, Portfolio, discount_powers

__all__ = [
    "LossRates",
    "PolicyClassification",
    "PortfolioLoss",
    "LossTable",
    "cum_receipts",
    "expected_balance",
    "arrears",
    "blended_loss",
    "classify",
    "portfolio_loss",
]


@dataclass(frozen=True)
class LossRates:
    """Loss rates on the two blended-loss components."""

    r_e: float = 0.4
    r_a: float = 0.7

    def __post_init__(self) -> None:
        for name in ("r_e", "r_a"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class PolicyClassification:
    """Partition of a portfolio under one (measure, threshold) policy.

    defaulters holds (account_id, default_time) pairs where the default
    time is the earliest threshold crossing; performers holds the ids
    that never cross.
    """

    defaulters: frozenset[tuple[int, int]]
    performers: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "defaulters", frozenset(self.defaulters))
        object.__setattr__(self, "performers", frozenset(self.performers))
        defaulted_ids = {pair[0] for pair in self.defaulters}
        if defaulted_ids & self.performers:
            raise ValueError("an account cannot both default and perform")
        if len(defaulted_ids) != len(self.defaulters):
            raise ValueError("an account cannot have two default times")


class PortfolioLoss(NamedTuple):
    """Total currency loss and the same as a fraction of principal."""

    total: float
    normalised: float


def cum_receipts(account: Account, at: int) -> float:
    """Receipts through ``at``, each discounted at the risk-free rate."""
    if not 0 <= at <= account.tenure:
        raise ValueError(f"at must lie in 0..{account.tenure}, got {at}")
    v = discount_powers(account.spec.riskfree_rate_annual_eff, account.tenure)
    return float(account.receipts[: at + 1] @ v[: at + 1])


def expected_balance(account: Account, at: int) -> float:
    """Outstanding contractual balance at ``at``, discounted to origination.

    Remaining instalments (periods at+1 .. term) discount to ``at`` at
    the loan rate; the result discounts to 0 at the risk-free rate.
    Zero at the term by construction, the full principal at 0.
    """
    term = account.spec.term_months
    if not 0 <= at <= term:
        raise ValueError(f"at must lie in 0..{term}, got {at}")
    flows = np.full(term + 1, account.spec.instalment)
    observed = min(term, account.tenure)
    flows[: observed + 1] = account.instalments[: observed + 1]
    v_loan = discount_powers(account.spec.loan_rate_annual_eff, term)
    inner = flows[at + 1 :] @ v_loan[1 : term - at + 1]
    return float(
        discount_powers(account.spec.riskfree_rate_annual_eff, term)[at] * inner
    )


def arrears(account: Account, at: int) -> float:
    """Cumulative shortfall through ``at``, discounted at the risk-free rate.

    Negative when overpayments dominate; no clamping is applied.
    """
    if not 0 <= at <= account.tenure:
        raise ValueError(f"at must lie in 0..{account.tenure}, got {at}")
    v = discount_powers(account.spec.riskfree_rate_annual_eff, account.tenure)
    shortfall = account.instalments[: at + 1] - account.receipts[: at + 1]
    return float(shortfall @ v[: at + 1])


def blended_loss(account: Account, at: int, rates: LossRates) -> float:
    """Loss assessed at ``at``: balance at r_e plus arrears at r_a."""
    return expected_balance(account, at) * rates.r_e + arrears(account, at) * rates.r_a


def _uniform_terms(portfolio: Portfolio) -> np.ndarray:
    """Per-account contractual terms, as a vector."""
    return np.array([acc.spec.term_months for acc in portfolio], dtype=np.int64)


def _first_crossings(
    cache: SeriesCache, terms: np.ndarray, d: float
) -> tuple[np.ndarray, np.ndarray]:
    """Per account: whether the series reaches d in its admissible window,
    and the earliest such time (meaningful only where it does).

    The window is the series domain clipped at the contractual term;
    padding columns hold -inf and can never fire.
    """
    values = cache.values
    width = values.shape[1]
    last_admissible = np.minimum(cache.lengths - 1, terms)
    admissible = np.arange(width)[None, :] <= last_admissible[:, None]
    hits = (values >= d) & admissible
    reached = hits.any(axis=1)
    earliest = np.argmax(hits, axis=1)
    return reached, earliest


def classify(
    portfolio: Portfolio, measure: Measure, d: float, cache: SeriesCache
) -> PolicyClassification:
    """Split the portfolio into (g, d)-defaulters and performers.

    An account defaults if its series under ``measure`` reaches d at any
    point of the series domain up to the contractual term; the default
    time is the earliest crossing.
    """
    if cache.measure is not measure:
        raise ValueError(
            f"series cache holds {cache.measure.value}, asked to classify {measure.value}"
        )
    if len(cache.account_ids) != len(portfolio):
        raise ValueError("series cache does not cover this portfolio")
    reached, earliest = _first_crossings(cache, _uniform_terms(portfolio), d)
    ids = cache.account_ids
    defaulters = frozenset(
        (ids[i], int(earliest[i])) for i in np.nonzero(reached)[0]
    )
    performers = frozenset(ids[i] for i in np.nonzero(~reached)[0])
    return PolicyClassification(defaulters=defaulters, performers=performers)


@dataclass(frozen=True, eq=False)
class LossTable:
    """Blended loss of every account at every assessment time.

    values[i, t] is account i's loss if assessed at t; the performer
    column is the account's contractual term.  Built once per (portfolio,
    rates) and reused across an entire threshold sweep.
    """

    values: np.ndarray
    terms: np.ndarray

    @classmethod
    def build(cls, portfolio: Portfolio, rates: LossRates) -> "LossTable":
        terms = _uniform_terms(portfolio)
        tenures = np.array([acc.tenure for acc in portfolio], dtype=np.int64)
        if np.any(tenures < terms):
            raise ValueError("every account must be observed to its contractual term")
        spec = portfolio.accounts[0].spec
        for acc in portfolio:
            if (
                acc.spec.term_months != spec.term_months
                or acc.spec.loan_rate_annual_eff != spec.loan_rate_annual_eff
                or acc.spec.riskfree_rate_annual_eff != spec.riskfree_rate_annual_eff
            ):
                raise ValueError(
                    "loss tables need a uniform term and rate structure; "
                    "assess mixed portfolios account by account"
                )
        term = spec.term_months
        width = int(tenures.max()) + 1

        inst = np.zeros((len(portfolio), width))
        rec = np.zeros((len(portfolio), width))
        for i, acc in enumerate(portfolio):
            inst[i, : acc.tenure + 1] = acc.instalments
            rec[i, : acc.tenure + 1] = acc.receipts

        v_rf = discount_powers(spec.riskfree_rate_annual_eff, width - 1)
        v_loan = discount_powers(spec.loan_rate_annual_eff, width - 1)
        arrears_mat = np.cumsum((inst - rec) * v_rf, axis=1)[:, : term + 1]

        # weight[t, l] discounts the period-l instalment back to t
        t_idx = np.arange(term + 1)[:, None]
        l_idx = np.arange(width)[None, :]
        offset = l_idx - t_idx
        weight = np.where(
            (offset >= 1) & (l_idx <= term), v_loan[np.clip(offset, 0, None)], 0.0
        )
        balance_mat = (inst @ weight.T) * v_rf[: term + 1]

        values = balance_mat * rates.r_e + arrears_mat * rates.r_a
        values.setflags(write=False)
        terms.setflags(write=False)
        return cls(values=values, terms=terms)


def portfolio_loss(
    portfolio: Portfolio,
    measure: Measure,
    d: float,
    rates: LossRates,
    cd: CdParams | None = None,
    dod: DodParams | None = None,
    cache: SeriesCache | None = None,
    table: LossTable | None = None,
) -> PortfolioLoss:
    """Total policy loss: defaulters at their default times, the rest at term.

    ``cache`` and ``table`` let sweeps reuse the per-account series and
    loss-at-time table; both are built on the fly when omitted, taking
    measure parameters from the portfolio's provenance when it carries
    them.
    """
    if cache is None:
        cd, dod = _resolve_measure_params(portfolio, cd, dod)
        cache = SeriesCache.build(portfolio, measure, cd, dod)
    if cache.measure is not measure:
        raise ValueError(
            f"series cache holds {cache.measure.value}, asked to price {measure.value}"
        )
    if table is None:
        table = LossTable.build(portfolio, rates)

    reached, earliest = _first_crossings(cache, table.terms, d)
    assessment = np.where(reached, earliest, table.terms)
    per_account = table.values[np.arange(len(portfolio)), assessment]
    total = float(np.sum(per_account))
    return PortfolioLoss(total=total, normalised=total / portfolio.principal_sum)


def _resolve_measure_params(
    portfolio: Portfolio, cd: CdParams | None, dod: DodParams | None
) -> tuple[CdParams, DodParams]:
    """Fill missing measure params from provenance, else defaults."""
    prov = portfolio.provenance
    if cd is None:
        cd = prov.cd_params() if hasattr(prov, "cd_params") else CdParams()
    if dod is None:
        if hasattr(prov, "dod_params"):
            dod = prov.dod_params()
        else:
            dod = DodParams(
                s=1.0, max_loan_size=portfolio.accounts[0].spec.max_loan_size
            )
    return cd, dod
