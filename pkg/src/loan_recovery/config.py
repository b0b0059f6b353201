"""Scenario configuration: one flat record driving a whole run.

A scenario names everything needed to reproduce a portfolio and its
loss study: the loan terms, the generation technique and its
parameters, optional observation truncation, measure parameters, the
threshold-grid knobs, and the master seed.  Defaults follow the
standard study setup.

Configs load from TOML files whose keys mirror the field names exactly;
unknown keys are rejected rather than ignored.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .delinquency import CdParams, DodParams, Measure
from .lossmodel import LossRates
from .optimizer import GridOptions
from .portfolio import LoanSpec
from .simulation import MarkovParams, RandomDefaultsParams, SeededRng, TruncationRule

__all__ = ["ConfigError", "ScenarioConfig", "load_config"]

TECHNIQUES = ("random", "markov")

_MEASURE_NAMES = tuple(m.value for m in Measure)

_INT_FIELDS = ("n_accounts", "term_months", "n_bins", "master_seed")
_FLOAT_FIELDS = (
    "instalment",
    "loan_rate",
    "riskfree_rate",
    "max_loan_size",
    "r_e",
    "r_a",
    "b",
    "p_pw",
    "p_dw",
    "z",
    "s",
    "threshold_proportion",
)


class ConfigError(ValueError):
    """A scenario configuration that cannot be run."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete, validated description of one scenario."""

    n_accounts: int = 10_000
    term_months: int = 60
    instalment: float = 100.0
    loan_rate: float = 0.20
    riskfree_rate: float = 0.07
    max_loan_size: float = 5_000.0
    r_e: float = 0.40
    r_a: float = 0.70
    technique: str = "random"
    b: float = 0.80
    p_pp: float | None = None
    p_dd: float | None = None
    p_pw: float = 0.001
    p_dw: float = 0.01
    truncation_k: float | None = None
    truncation_measure: str | None = None
    z: float = 0.90
    s: float = 1.0
    measures: tuple[str, ...] = ("g1", "g2", "g3")
    threshold_proportion: float = 0.6
    n_bins: int = 100
    master_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "measures", tuple(self.measures))
        for name in _INT_FIELDS:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
        for name in _FLOAT_FIELDS:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{name} must be a number, got {value!r}")
            object.__setattr__(self, name, float(value))
        self._validate()

    def _validate(self) -> None:
        if self.n_accounts < 1:
            raise ConfigError(f"n_accounts must be positive, got {self.n_accounts}")
        if self.technique not in TECHNIQUES:
            raise ConfigError(
                f"technique must be one of {TECHNIQUES}, got {self.technique!r}"
            )
        if not self.measures:
            raise ConfigError("at least one measure is required")
        if len(set(self.measures)) != len(self.measures):
            raise ConfigError(f"duplicate measures in {self.measures}")
        for name in self.measures:
            if name not in _MEASURE_NAMES:
                raise ConfigError(
                    f"unknown measure {name!r}; choose from {_MEASURE_NAMES}"
                )
        if (self.truncation_k is None) != (self.truncation_measure is None):
            raise ConfigError(
                "truncation_k and truncation_measure must be set together"
            )
        if self.truncation_measure is not None and (
            self.truncation_measure not in _MEASURE_NAMES
        ):
            raise ConfigError(
                f"unknown truncation_measure {self.truncation_measure!r}"
            )
        if self.technique == "markov" and (self.p_pp is None or self.p_dd is None):
            raise ConfigError("the markov technique needs both p_pp and p_dd")

        # construct every component so validation lives in one place
        try:
            self.loan_spec()
            self.loss_rates()
            self.cd_params()
            self.dod_params()
            self.grid_options()
            self.truncation_rule()
            SeededRng(self.master_seed)
            if self.technique == "random":
                self.random_params()
            else:
                self.markov_params()
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def loan_spec(self) -> LoanSpec:
        return LoanSpec.from_instalment(
            instalment=self.instalment,
            term_months=self.term_months,
            loan_rate_annual_eff=self.loan_rate,
            riskfree_rate_annual_eff=self.riskfree_rate,
            max_loan_size=self.max_loan_size,
        )

    def loss_rates(self) -> LossRates:
        return LossRates(r_e=self.r_e, r_a=self.r_a)

    def cd_params(self) -> CdParams:
        return CdParams(z=self.z)

    def dod_params(self) -> DodParams:
        return DodParams(s=self.s, max_loan_size=self.max_loan_size)

    def random_params(self) -> RandomDefaultsParams:
        return RandomDefaultsParams(b=self.b)

    def markov_params(self) -> MarkovParams:
        if self.p_pp is None or self.p_dd is None:
            raise ConfigError("markov parameters p_pp and p_dd are not set")
        return MarkovParams(
            p_pp=float(self.p_pp),
            p_dd=float(self.p_dd),
            p_pw=self.p_pw,
            p_dw=self.p_dw,
        )

    def truncation_rule(self) -> TruncationRule | None:
        if self.truncation_k is None:
            return None
        return TruncationRule(
            k=self.truncation_k, measure=Measure(self.truncation_measure)
        )

    def grid_options(self) -> GridOptions:
        return GridOptions(
            threshold_proportion=self.threshold_proportion, n_bins=self.n_bins
        )

    def measure_list(self) -> tuple[Measure, ...]:
        return tuple(Measure(name) for name in self.measures)

    def replace(self, **changes: object) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def load_config(path: str | Path) -> ScenarioConfig:
    """Read a scenario from a TOML file; unknown keys are errors."""
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc

    known = {field.name for field in dataclasses.fields(ScenarioConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {', '.join(unknown)}")
    if "measures" in raw:
        measures = raw["measures"]
        if not isinstance(measures, list) or not all(
            isinstance(m, str) for m in measures
        ):
            raise ConfigError("measures must be a list of measure names")
        raw["measures"] = tuple(measures)
    try:
        return ScenarioConfig(**raw)
    except TypeError as exc:
        raise ConfigError(f"bad config value in {path}: {exc}") from exc
