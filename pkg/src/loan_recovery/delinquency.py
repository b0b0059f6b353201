"""Delinquency measurement: three per-account series.

G1 counts payments in arrears, weighted by an underpayment tolerance z:
a period counts as missed when the receipt covers less than z of the
instalment, and a large enough catch-up payment clears backlog.  The
series is integer-valued over t = 0..T.

G2 compares the Macaulay duration of the loan's actual cash position
against its expected duration.  Shortfalls are rolled forward, with
compounding, into the final instalment slot (the last contractual
chance to catch up), and the duration ratio is reported for
t = 0..T-1.  Perfect payment keeps the ratio at exactly 1.

G3 is G2 inflated by a loan-size penalty: while delinquent, the ratio
is scaled by 1 + lambda where lambda = s * principal / max_loan_size.
Larger loans therefore register as more delinquent for the same
payment pattern.  G3 also extends past the contractual term by rolling
the arrears bucket to a moving one-period-ahead target.

Shortfalls compound at the monthly-effective loan rate, the exact
reciprocal of the one-period discount factor, so that rolling a
shortfall forward and discounting it back are inverse operations.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .portfolio import MONTHS_PER_YEAR, Account, Portfolio, discount_powers, monthly_rate

__all__ = [
    "Measure",
    "CdParams",
    "DodParams",
    "DelinquencySeries",
    "SeriesCache",
    "repayment_ratio",
    "cd_series",
    "expected_duration",
    "md_series",
    "dod_series",
    "measure_series",
    "first_reach",
]

# f_ED this small (away from the excluded series endpoint) means the
# remaining schedule carries no weight; treat the schedule as degenerate.
_ED_FLOOR = 1e-12


class Measure(enum.Enum):
    """The three delinquency measures, in tie-break order."""

    G1 = "g1"
    G2 = "g2"
    G3 = "g3"

    def __lt__(self, other: "Measure") -> bool:
        if not isinstance(other, Measure):
            return NotImplemented
        return self.value < other.value


@dataclass(frozen=True)
class CdParams:
    """Parameters of the arrears-count measure G1.

    z is the underpayment tolerance: a receipt below z * instalment
    counts the period as missed.
    """

    z: float = 0.9

    def __post_init__(self) -> None:
        if not 0.0 < self.z <= 1.0:
            raise ValueError(f"z must lie in (0, 1], got {self.z}")


@dataclass(frozen=True)
class DodParams:
    """Parameters of the size-penalised measure G3.

    s scales the loan-size penalty; max_loan_size is the book-wide
    largest principal and must match the account's own figure.
    """

    s: float = 1.0
    max_loan_size: float = 5000.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"s must lie in [0, 1], got {self.s}")
        if self.max_loan_size <= 0:
            raise ValueError(f"max_loan_size must be positive, got {self.max_loan_size}")


@dataclass(frozen=True, eq=False)
class DelinquencySeries:
    """One account's delinquency path under one measure.

    G1 values are integers indexed t = 0..T and start at 0.  G2 and G3
    values are duration ratios indexed t = 0..T-1 and start at 1.
    """

    account_id: int
    measure: Measure
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.measure is Measure.G1:
            vals = np.array(self.values, dtype=np.int64)
            if len(vals) < 1 or vals[0] != 0:
                raise ValueError("a G1 series starts at 0")
            if np.any(vals < 0):
                raise ValueError("G1 arrears counts cannot be negative")
        else:
            vals = np.array(self.values, dtype=float)
            if len(vals) < 1 or vals[0] != 1.0:
                raise ValueError("a duration-ratio series starts at 1.0")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def domain_end(self) -> int:
        """Largest assessment time the series covers."""
        return len(self.values) - 1


def repayment_ratio(receipt: float, instalment: float) -> float:
    """Receipt as a fraction of the instalment due.

    Only meaningful for periods with a positive instalment; the t = 0
    ratio is 0 by convention and never computed through here.
    """
    if instalment <= 0:
        raise ValueError(f"instalment must be positive, got {instalment}")
    if receipt < 0:
        raise ValueError(f"receipt cannot be negative, got {receipt}")
    return receipt / instalment


def cd_series(account: Account, params: CdParams) -> DelinquencySeries:
    """Arrears count under the tolerance-weighted recursion (G1).

    Each period, the ratio h = receipt/instalment either adds one to
    the count (h below z) or repays floor(h/z) - 1 prior arrears from
    the surplus beyond the current instalment.  The count never drops
    below zero.
    """
    receipts = account.receipts
    instalments = account.instalments
    tenure = account.tenure
    z = params.z

    values = np.zeros(tenure + 1, dtype=np.int64)
    prior = 0
    for t in range(1, tenure + 1):
        h = repayment_ratio(receipts[t], instalments[t])
        missed = 1 if h < z else 0
        m = int(np.floor(h / z)) * (1 - missed) - 1
        fresh = 1 if prior == 0 else 0
        prior = max(0, missed * fresh + (1 - fresh) * (prior - m))
        values[t] = prior
    return DelinquencySeries(account_id=account.id, measure=Measure.G1, values=values)


def _duration_weights(loan_rate: float, upto: int) -> np.ndarray:
    """Weight v_j * (j / 12) of a unit flow j months ahead."""
    v = discount_powers(loan_rate, upto)
    return v * (np.arange(upto + 1) / MONTHS_PER_YEAR)


def _ed_profile(account: Account) -> np.ndarray:
    """Expected duration f_ED(t) for every t = 0..T, in years.

    f_ED(t) discounts the remaining schedule to t at the loan rate and
    weights each flow by its distance ahead, normalised by principal.
    """
    instalments = account.instalments
    tenure = account.tenure
    w = _duration_weights(account.spec.loan_rate_annual_eff, tenure)
    # correlate gives out[T + t] = sum_j instalments[t + j] * w[j]
    stacked = np.correlate(instalments, w, mode="full")
    return stacked[tenure:] / account.spec.principal


def expected_duration(account: Account, at: int) -> float:
    """Expected remaining Macaulay duration at assessment time ``at``."""
    if not 0 <= at <= account.tenure:
        raise ValueError(f"at must lie in 0..{account.tenure}, got {at}")
    return float(_ed_profile(account)[at])


def _md_core(
    account: Account, expected_profile: np.ndarray | None
) -> tuple[np.ndarray, np.ndarray]:
    """f_ED and f_AD over t = 0..T-1 for an account observed to T <= t_c.

    The shortfall at each assessed period is compounded to the final
    instalment slot at the monthly loan rate and accumulates there; the
    actual duration re-weights that modified schedule.  Since only the
    final slot ever changes, f_AD(t) = f_ED(t) + bucket_t * w[T - t].
    """
    tenure = account.tenure
    if tenure > account.spec.term_months:
        raise ValueError(
            "duration ratios past the contractual term need the moving-target "
            f"variant; tenure {tenure} exceeds term {account.spec.term_months}"
        )
    f_ed_full = _ed_profile(account) if expected_profile is None else expected_profile
    if len(f_ed_full) != tenure + 1:
        raise ValueError(
            f"expected profile covers {len(f_ed_full) - 1} periods, account has {tenure}"
        )
    f_ed = f_ed_full[:tenure]
    if np.any(f_ed < _ED_FLOOR):
        raise ValueError("expected duration vanished before the final period")

    growth = 1.0 + monthly_rate(account.spec.loan_rate_annual_eff)
    shortfall = account.instalments - account.receipts
    # bucket[t]: cumulative shortfalls through t, compounded to slot T
    compounded = shortfall[1:] * growth ** (tenure - np.arange(1, tenure + 1))
    bucket = np.concatenate(([0.0], np.cumsum(compounded)))[:tenure]

    w = _duration_weights(account.spec.loan_rate_annual_eff, tenure)
    f_ad = f_ed + bucket * w[tenure - np.arange(tenure)] / account.spec.principal
    f_ad[0] = f_ed[0]
    return f_ed, f_ad


def md_series(
    account: Account, expected_profile: np.ndarray | None = None
) -> DelinquencySeries:
    """Duration-ratio series (G2) for an account observed to T <= t_c.

    ``expected_profile`` lets callers reuse a precomputed f_ED vector
    (length T + 1); identical schedules share the same profile.
    """
    f_ed, f_ad = _md_core(account, expected_profile)
    return DelinquencySeries(
        account_id=account.id, measure=Measure.G2, values=f_ad / f_ed
    )


def _moving_target_core(account: Account) -> tuple[np.ndarray, np.ndarray]:
    """f_ED and f_AD over t = 0..T-1 for an account observed past t_c.

    Inside the contract the arrears bucket sits at the term slot.  Once
    assessments pass the term, the bucket rolls one period forward each
    step, picking up one period of compounding, and the duration sums
    run to the moving target with flows weighted one period ahead.
    """
    tenure = account.tenure
    term = account.spec.term_months
    instalments = account.instalments
    receipts = account.receipts
    principal = account.spec.principal
    growth = 1.0 + monthly_rate(account.spec.loan_rate_annual_eff)
    v = discount_powers(account.spec.loan_rate_annual_eff, tenure + 1)

    modified = np.array(instalments, dtype=float)
    target = term
    f_ed = np.zeros(tenure)
    f_ad = np.zeros(tenure)
    for t in range(tenure):
        in_contract = 1 if t < term else 0
        carried = modified[target]
        target = term if in_contract else t
        if t >= 1:
            modified[target] = (
                modified[target] * in_contract
                + (instalments[t] - receipts[t]) * growth ** (target - t)
                + carried * (1 - in_contract) * growth
            )
        m = np.arange(t, target + 1)
        periods_ahead = m - t + 1 - in_contract
        w = v[periods_ahead] * (periods_ahead / MONTHS_PER_YEAR)
        f_ed[t] = instalments[m] @ w / principal
        f_ad[t] = modified[m] @ w / principal
    f_ad[0] = f_ed[0]
    if np.any(f_ed < _ED_FLOOR):
        raise ValueError(
            "expected duration vanished inside the series domain; post-term "
            "periods need a positive expected instalment"
        )
    return f_ed, f_ad


def dod_series(
    account: Account,
    params: DodParams,
    expected_profile: np.ndarray | None = None,
) -> DelinquencySeries:
    """Size-penalised duration-ratio series (G3).

    Wherever the actual duration exceeds the expected one, the ratio is
    inflated by 1 + lambda with lambda = s * principal / max_loan_size.
    Accounts observed past the contractual term roll the arrears bucket
    to a moving one-period-ahead target.
    """
    spec = account.spec
    if params.max_loan_size != spec.max_loan_size:
        raise ValueError(
            f"max_loan_size mismatch: params say {params.max_loan_size}, "
            f"the account says {spec.max_loan_size}"
        )
    if account.tenure > spec.term_months:
        f_ed, f_ad = _moving_target_core(account)
    else:
        f_ed, f_ad = _md_core(account, expected_profile)
    lam = params.s * (1.0 - (params.max_loan_size - spec.principal) / params.max_loan_size)
    delinquent = f_ad > f_ed
    values = (f_ad / f_ed) * np.where(delinquent, lam + 1.0, 1.0)
    return DelinquencySeries(account_id=account.id, measure=Measure.G3, values=values)


def measure_series(
    account: Account,
    measure: Measure,
    cd: CdParams,
    dod: DodParams,
    expected_profile: np.ndarray | None = None,
) -> DelinquencySeries:
    """Dispatch to the series builder for ``measure``."""
    if measure is Measure.G1:
        return cd_series(account, cd)
    if measure is Measure.G2:
        return md_series(account, expected_profile)
    if measure is Measure.G3:
        return dod_series(account, dod, expected_profile)
    raise ValueError(f"unknown measure {measure!r}")


def first_reach(series: DelinquencySeries, threshold: float) -> int | None:
    """Smallest assessment time with value >= threshold, if any."""
    hits = np.nonzero(series.values >= threshold)[0]
    return int(hits[0]) if len(hits) else None


@dataclass(frozen=True, eq=False)
class SeriesCache:
    """All of a portfolio's series under one measure, as a padded matrix.

    Row i holds account i's series; columns beyond a row's domain are
    -inf so that threshold crossings never fire there.
    """

    measure: Measure
    values: np.ndarray
    lengths: np.ndarray
    account_ids: tuple[int, ...]

    @classmethod
    def build(
        cls,
        portfolio: Portfolio,
        measure: Measure,
        cd: CdParams,
        dod: DodParams,
    ) -> "SeriesCache":
        profiles: dict = {}
        rows = []
        for account in portfolio:
            profile = None
            if measure is not Measure.G1 and account.tenure <= account.spec.term_months:
                key = (account.spec, account.instalments.tobytes())
                profile = profiles.get(key)
                if profile is None:
                    profile = _ed_profile(account)
                    profiles[key] = profile
            rows.append(measure_series(account, measure, cd, dod, profile).values)

        lengths = np.array([len(r) for r in rows], dtype=np.int64)
        width = int(lengths.max())
        values = np.full((len(rows), width), -np.inf)
        for i, row in enumerate(rows):
            values[i, : len(row)] = row
        values.setflags(write=False)
        lengths.setflags(write=False)
        return cls(
            measure=measure,
            values=values,
            lengths=lengths,
            account_ids=tuple(acc.id for acc in portfolio),
        )
