"""Synthetic receipt generation and observation truncation.

Two generation techniques produce receipt vectors over t = 1..t_c, each
period paying either the full instalment or nothing:

* random defaults: one independent Bernoulli draw per period, paying
  with probability b;
* Markovian defaults: a three-state chain (paying, delinquent,
  written-off) started in the paying state, where only the paying state
  emits a receipt and write-off is absorbing.

(k, g)-truncation emulates a lender that stops collecting once a
delinquency measure first reaches level k: receipts strictly after that
first-crossing period are zeroed.  The crossing is found on the series
of the untruncated receipts, in one pass.

Reproducibility contract: account i's draws come from a dedicated
stream derived from (master_seed, i), so the generated portfolio is
identical however accounts are scheduled across workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .delinquency import CdParams, DodParams, Measure, first_reach, measure_series
from .portfolio import Account, LoanSpec, Portfolio, build_account

if TYPE_CHECKING:
    from .config import ScenarioConfig

__all__ = [
    "RandomDefaultsParams",
    "MarkovParams",
    "TruncationRule",
    "SeededRng",
    "random_receipts",
    "markov_receipts",
    "truncate_receipts",
    "generate_portfolio",
]

# Transition rows may sum a hair off 1 in floating point; reject only
# genuinely negative implied probabilities.
_ROW_TOL = 1e-9

_PAYING, _DELINQUENT, _WRITTEN_OFF = 0, 1, 2


@dataclass(frozen=True)
class RandomDefaultsParams:
    """Independent-defaults technique: pay the instalment w.p. b."""

    b: float = 0.8

    def __post_init__(self) -> None:
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"payment probability b must lie in [0, 1], got {self.b}")


@dataclass(frozen=True)
class MarkovParams:
    """Markovian-defaults technique over states paying/delinquent/written-off.

    The stay probabilities p_pp and p_dd are the levers; the write-off
    hazards p_pw and p_dw are small constants.  The remaining mass in
    each row goes to the other live state and must be non-negative.
    """

    p_pp: float
    p_dd: float
    p_pw: float = 0.001
    p_dw: float = 0.01

    def __post_init__(self) -> None:
        for name in ("p_pp", "p_dd", "p_pw", "p_dw"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.p_pd < 0 or self.p_dp < 0:
            raise ValueError(
                f"transition rows must sum to 1 with non-negative entries: "
                f"p_pd={self.p_pd}, p_dp={self.p_dp}"
            )

    @property
    def p_pd(self) -> float:
        remainder = 1.0 - self.p_pp - self.p_pw
        return 0.0 if -_ROW_TOL < remainder < 0.0 else remainder

    @property
    def p_dp(self) -> float:
        remainder = 1.0 - self.p_dd - self.p_dw
        return 0.0 if -_ROW_TOL < remainder < 0.0 else remainder

    def transition_rows(self) -> np.ndarray:
        """Rows over (paying, delinquent, written-off); write-off absorbs."""
        return np.array(
            [
                [self.p_pp, self.p_pd, self.p_pw],
                [self.p_dp, self.p_dd, self.p_dw],
                [0.0, 0.0, 1.0],
            ]
        )


@dataclass(frozen=True)
class TruncationRule:
    """Stop collecting once the chosen measure first reaches k."""

    k: float
    measure: Measure

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError(f"truncation level k must be non-negative, got {self.k}")
        if self.measure is Measure.G1 and self.k != int(self.k):
            raise ValueError(
                f"k must be an integer for the arrears-count measure, got {self.k}"
            )


@dataclass(frozen=True)
class SeededRng:
    """Derives an independent, order-free draw stream per account."""

    master_seed: int

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 2**64:
            raise ValueError(
                f"master_seed must be an unsigned 64-bit integer, got {self.master_seed}"
            )

    def account_stream(self, account_id: int) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(account_id,))
        return np.random.default_rng(seq)


def random_receipts(
    spec: LoanSpec, params: RandomDefaultsParams, rng: np.random.Generator
) -> np.ndarray:
    """Receipt vector over t = 0..t_c with independent payment draws."""
    term = spec.term_months
    u = rng.random(term)
    receipts = np.zeros(term + 1)
    receipts[1:] = np.where(u < params.b, spec.instalment, 0.0)
    return receipts


def markov_receipts(
    spec: LoanSpec, params: MarkovParams, rng: np.random.Generator
) -> np.ndarray:
    """Receipt vector over t = 0..t_c from the three-state chain.

    The chain starts paying at t = 1.  Each later period samples the
    next state from the current state's row by one uniform draw,
    stacking the row as (paying, delinquent, written-off).
    """
    term = spec.term_months
    receipts = np.zeros(term + 1)
    receipts[1] = spec.instalment
    if term == 1:
        return receipts

    cumulative = np.cumsum(params.transition_rows(), axis=1)
    cumulative[:, -1] = 1.0
    u = rng.random(term - 1)
    state = _PAYING
    for t in range(2, term + 1):
        state = int(np.searchsorted(cumulative[state], u[t - 2], side="right"))
        if state == _WRITTEN_OFF:
            break
        if state == _PAYING:
            receipts[t] = spec.instalment
    return receipts


def truncate_receipts(
    account: Account, rule: TruncationRule, cd: CdParams, dod: DodParams
) -> np.ndarray:
    """Receipts with everything strictly after the first k-crossing zeroed.

    The crossing time is the earliest point of the untruncated account's
    series (over that measure's own domain) with value >= k; if the
    series never reaches k the receipts come back unchanged.
    """
    series = measure_series(account, rule.measure, cd, dod)
    cutoff = first_reach(series, rule.k)
    receipts = np.array(account.receipts)
    if cutoff is not None:
        receipts[cutoff + 1 :] = 0.0
    return receipts


def _build_range(config: "ScenarioConfig", start: int, stop: int) -> list[Account]:
    """Accounts start..stop-1, each generated from its own seed stream."""
    spec = config.loan_spec()
    rng = SeededRng(config.master_seed)
    rule = config.truncation_rule()
    cd = config.cd_params()
    dod = config.dod_params()
    if config.technique == "random":
        params = config.random_params()
        generate = random_receipts
    else:
        params = config.markov_params()
        generate = markov_receipts

    accounts = []
    for account_id in range(start, stop):
        receipts = generate(spec, params, rng.account_stream(account_id))
        account = build_account(account_id, spec, receipts)
        if rule is not None:
            account = build_account(
                account_id, spec, truncate_receipts(account, rule, cd, dod)
            )
        accounts.append(account)
    return accounts


def generate_portfolio(config: "ScenarioConfig", workers: int = 1) -> Portfolio:
    """Generate the configured portfolio, optionally across processes.

    The result is identical for any worker count: every account draws
    from a stream derived only from (master_seed, account_id).
    """
    n = config.n_accounts
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}")
    if workers == 1 or n < 2 * workers:
        accounts: Sequence[Account] = _build_range(config, 0, n)
    else:
        bounds = np.linspace(0, n, workers + 1, dtype=int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = pool.map(
                _build_range,
                [config] * workers,
                bounds[:-1].tolist(),
                bounds[1:].tolist(),
            )
            accounts = [account for chunk in chunks for account in chunk]
    return Portfolio(accounts=tuple(accounts), provenance=config)
