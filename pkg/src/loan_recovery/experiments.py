"""Scenario harness: end-to-end runs, parameter sweeps, CSV emission.

A scenario run generates one portfolio, prices the loss curve for each
requested measure, and picks the winning measure.  Sweeps re-run that
pipeline across a parameter axis (truncation depth k, payment
probability b, arrears loss rate r_a, or a Markov transition lattice),
keeping only the G1 curve per cell, which is what the study tables
report.

Seed policy: sweep cells along k, b, and the Markov lattice draw
independent per-cell seeds derived from (master seed, axis label, cell
index), so cells are independent and reorderable.  The r_a sweep keeps
the base seed unchanged: r_a never enters generation, so sharing the
portfolio across cells compares rate effects on common random numbers.

Every emitted number formats via repr, so files are byte-identical for
a fixed master seed whatever the worker count.
"""

from __future__ import annotations

import csv
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .config import ScenarioConfig
from .delinquency import SeriesCache
from .lossmodel import LossTable
from .optimizer import LossCurve, MeasureComparison, best_measure, build_threshold_grid, sweep_loss_curve
from .simulation import MarkovParams, generate_portfolio

__all__ = [
    "ScenarioResult",
    "SweepCell",
    "SweepSpec",
    "SweepResult",
    "derive_cell_seed",
    "run_scenario",
    "run_truncation_sweep",
    "run_payment_prob_sweep",
    "run_loss_rate_sweep",
    "run_markov_grid",
    "emit_results",
    "DEFAULT_P_PP_LATTICE",
    "DEFAULT_P_DD_LATTICE",
]

DEFAULT_P_PP_LATTICE = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.999)
DEFAULT_P_DD_LATTICE = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99)

_SWEEP_PARAMS = ("k", "b", "r_a", "p_pp/p_dd")


@dataclass(frozen=True, eq=False)
class ScenarioResult:
    """Curves and the measure comparison for one scenario run."""

    scenario_id: str
    config: ScenarioConfig
    curves: tuple[LossCurve, ...]
    comparison: MeasureComparison


@dataclass(frozen=True, eq=False)
class SweepCell:
    """One sweep cell: the parameter point and its scenario result."""

    scenario_id: str
    param_name: str
    param_value: object
    result: ScenarioResult

    @property
    def curve(self) -> LossCurve:
        return self.result.curves[0]

    @property
    def optimal_threshold(self) -> float:
        return self.curve.optimal_threshold

    @property
    def min_loss(self) -> float:
        return self.curve.min_loss

    @property
    def min_normalised_loss(self) -> float:
        return self.curve.min_normalised_loss


@dataclass(frozen=True)
class SweepSpec:
    """A validated sweep request: which parameter, which values, on what base."""

    param: str
    values: tuple
    base: ScenarioConfig

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if self.param not in _SWEEP_PARAMS:
            raise ValueError(
                f"sweep parameter must be one of {_SWEEP_PARAMS}, got {self.param!r}"
            )
        if not self.values:
            raise ValueError("a sweep needs at least one value")


@dataclass(frozen=True, eq=False)
class SweepResult:
    """All cells of one sweep, plus any skipped parameter points."""

    sweep_id: str
    param_name: str
    cells: tuple[SweepCell, ...]
    skipped: tuple[tuple[object, str], ...] = ()

    def rows(self) -> list[tuple[object, float, float]]:
        """(parameter value, optimal threshold, minimum loss) per cell."""
        return [
            (cell.param_value, cell.optimal_threshold, cell.min_loss)
            for cell in self.cells
        ]


def derive_cell_seed(master_seed: int, label: str, index: int) -> int:
    """Independent 64-bit seed for sweep cell ``index`` on axis ``label``.

    The axis label hashes into the spawn key, so different sweeps on the
    same master seed get unrelated streams; the two-element spawn key
    also keeps cell seeds disjoint from per-account streams.
    """
    key = zlib.crc32(label.encode("utf-8"))
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(key, index))
    return int(seq.generate_state(1, np.uint64)[0])


def run_scenario(
    config: ScenarioConfig, scenario_id: str = "scenario", workers: int = 1
) -> ScenarioResult:
    """Generate the portfolio, sweep every configured measure, compare."""
    portfolio = generate_portfolio(config, workers=workers)
    rates = config.loss_rates()
    table = LossTable.build(portfolio, rates)
    cd = config.cd_params()
    dod = config.dod_params()
    options = config.grid_options()

    curves = []
    for measure in config.measure_list():
        cache = SeriesCache.build(portfolio, measure, cd, dod)
        grid = build_threshold_grid(measure, portfolio, options, cache=cache)
        curves.append(
            sweep_loss_curve(portfolio, measure, grid, rates, cache=cache, table=table)
        )
    return ScenarioResult(
        scenario_id=scenario_id,
        config=config,
        curves=tuple(curves),
        comparison=best_measure(curves),
    )


def _run_cell(args: tuple[ScenarioConfig, str]) -> ScenarioResult:
    config, scenario_id = args
    return run_scenario(config, scenario_id=scenario_id, workers=1)


def _run_cells(
    jobs: Sequence[tuple[ScenarioConfig, str]], workers: int
) -> list[ScenarioResult]:
    if workers <= 1 or len(jobs) < 2:
        return [_run_cell(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_run_cell, jobs))


def _fmt_value(value: object) -> str:
    if isinstance(value, tuple):
        return "/".join(_fmt_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def run_truncation_sweep(
    base: ScenarioConfig,
    k_values: Iterable[int] = range(1, 11),
    workers: int = 1,
) -> SweepResult:
    """G1 optimum per truncation depth k, each cell independently seeded."""
    spec = SweepSpec(param="k", values=tuple(k_values), base=base)
    if base.technique != "random":
        raise ValueError("the truncation sweep runs on the random-defaults technique")
    jobs = []
    for index, k in enumerate(spec.values):
        config = base.replace(
            truncation_k=float(k),
            truncation_measure="g1",
            measures=("g1",),
            master_seed=derive_cell_seed(base.master_seed, "k", index),
        )
        jobs.append((config, f"k_{_fmt_value(k)}"))
    results = _run_cells(jobs, workers)
    cells = tuple(
        SweepCell(scenario_id=r.scenario_id, param_name="k", param_value=v, result=r)
        for v, r in zip(spec.values, results)
    )
    return SweepResult(sweep_id="k_sweep", param_name="k", cells=cells)


def _require_truncation(base: ScenarioConfig, sweep: str) -> None:
    if base.truncation_rule() is None:
        raise ValueError(
            f"the {sweep} sweep expects the base scenario to configure truncation"
        )


def run_payment_prob_sweep(
    base: ScenarioConfig,
    b_values: Iterable[float],
    workers: int = 1,
) -> SweepResult:
    """G1 optimum per payment probability b, on the base truncation rule."""
    spec = SweepSpec(param="b", values=tuple(b_values), base=base)
    if base.technique != "random":
        raise ValueError("the payment-probability sweep runs on the random-defaults technique")
    _require_truncation(base, "payment-probability")
    jobs = []
    for index, b in enumerate(spec.values):
        config = base.replace(
            b=float(b),
            measures=("g1",),
            master_seed=derive_cell_seed(base.master_seed, "b", index),
        )
        jobs.append((config, f"b_{_fmt_value(float(b))}"))
    results = _run_cells(jobs, workers)
    cells = tuple(
        SweepCell(scenario_id=r.scenario_id, param_name="b", param_value=float(v), result=r)
        for v, r in zip(spec.values, results)
    )
    return SweepResult(sweep_id="b_sweep", param_name="b", cells=cells)


def run_loss_rate_sweep(
    base: ScenarioConfig,
    r_a_values: Iterable[float],
    workers: int = 1,
) -> SweepResult:
    """G1 optimum per arrears loss rate r_a, on the base truncation rule.

    Cells share the base master seed: r_a plays no part in portfolio
    generation, so every cell prices the identical portfolio and the
    curves differ by rate effects alone.
    """
    spec = SweepSpec(param="r_a", values=tuple(r_a_values), base=base)
    if base.technique != "random":
        raise ValueError("the loss-rate sweep runs on the random-defaults technique")
    _require_truncation(base, "loss-rate")
    jobs = []
    for r_a in spec.values:
        config = base.replace(r_a=float(r_a), measures=("g1",))
        jobs.append((config, f"r_a_{_fmt_value(float(r_a))}"))
    results = _run_cells(jobs, workers)
    cells = tuple(
        SweepCell(scenario_id=r.scenario_id, param_name="r_a", param_value=float(v), result=r)
        for v, r in zip(spec.values, results)
    )
    return SweepResult(sweep_id="r_a_sweep", param_name="r_a", cells=cells)


def run_markov_grid(
    base: ScenarioConfig,
    p_pp_values: Iterable[float] | None = None,
    p_dd_values: Iterable[float] | None = None,
    workers: int = 1,
) -> SweepResult:
    """G1 optimum per (p_pp, p_dd) lattice cell.

    Cells whose implied transition rows would go negative are skipped
    and reported in ``skipped`` with the validation message.  Cell seeds
    key on the lattice position, so dropping a cell never reshuffles the
    seeds of the others.
    """
    if base.technique != "markov":
        raise ValueError("the transition grid runs on the markov technique")
    pp_values = tuple(p_pp_values) if p_pp_values is not None else DEFAULT_P_PP_LATTICE
    dd_values = tuple(p_dd_values) if p_dd_values is not None else DEFAULT_P_DD_LATTICE
    SweepSpec(param="p_pp/p_dd", values=tuple((a, b) for a in pp_values for b in dd_values), base=base)

    jobs = []
    kept: list[tuple[float, float]] = []
    skipped: list[tuple[object, str]] = []
    for i, p_pp in enumerate(pp_values):
        for j, p_dd in enumerate(dd_values):
            try:
                MarkovParams(
                    p_pp=float(p_pp), p_dd=float(p_dd), p_pw=base.p_pw, p_dw=base.p_dw
                )
                config = base.replace(
                    p_pp=float(p_pp),
                    p_dd=float(p_dd),
                    measures=("g1",),
                    master_seed=derive_cell_seed(
                        base.master_seed, "p_pp/p_dd", i * len(dd_values) + j
                    ),
                )
            except ValueError as exc:
                skipped.append(((float(p_pp), float(p_dd)), str(exc)))
                continue
            kept.append((float(p_pp), float(p_dd)))
            jobs.append(
                (config, f"markov_pp{_fmt_value(float(p_pp))}_dd{_fmt_value(float(p_dd))}")
            )
    results = _run_cells(jobs, workers)
    cells = tuple(
        SweepCell(
            scenario_id=r.scenario_id,
            param_name="p_pp/p_dd",
            param_value=v,
            result=r,
        )
        for v, r in zip(kept, results)
    )
    return SweepResult(
        sweep_id="markov_grid",
        param_name="p_pp/p_dd",
        cells=cells,
        skipped=tuple(skipped),
    )


def _write_rows(path: Path, header: list[str], rows: Iterable[list[str]]) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


def _curve_rows(curve: LossCurve) -> list[list[str]]:
    return [
        [curve.measure.value, repr(d), repr(total), repr(norm)]
        for d, total, norm in curve.points
    ]


def _summary_row(
    scenario_id: str, param_name: str, param_value: str, curve: LossCurve
) -> list[str]:
    return [
        scenario_id,
        param_name,
        param_value,
        curve.measure.value,
        repr(curve.optimal_threshold),
        repr(curve.min_loss),
        repr(curve.min_normalised_loss),
        "true" if curve.degenerate_flat else "false",
    ]


def emit_results(
    results: ScenarioResult | SweepResult, destination: str | Path
) -> list[Path]:
    """Write curve CSVs and the summary CSV; return the written paths.

    One curve file per (scenario, measure); one summary file covering
    the whole scenario or sweep.
    """
    dest = Path(destination)
    try:
        dest.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {dest}: {exc}") from exc

    if isinstance(results, ScenarioResult):
        scenarios = [(results, "", "")]
        summary_path = dest / f"summary_{results.scenario_id}.csv"
    elif isinstance(results, SweepResult):
        scenarios = [
            (cell.result, cell.param_name, _fmt_value(cell.param_value))
            for cell in results.cells
        ]
        summary_path = dest / f"summary_{results.sweep_id}.csv"
    else:
        raise TypeError(f"cannot emit {type(results).__name__}")

    written = []
    summary_rows = []
    for scenario, param_name, param_value in scenarios:
        for curve in scenario.curves:
            path = dest / f"curve_{scenario.scenario_id}_{curve.measure.value}.csv"
            _write_rows(
                path,
                ["measure", "threshold", "total_loss", "normalised_loss"],
                _curve_rows(curve),
            )
            written.append(path)
            summary_rows.append(
                _summary_row(scenario.scenario_id, param_name, param_value, curve)
            )

    _write_rows(
        summary_path,
        [
            "scenario_id",
            "param_name",
            "param_value",
            "measure",
            "optimal_threshold",
            "min_loss",
            "min_normalised_loss",
            "degenerate_flat",
        ],
        summary_rows,
    )
    written.append(summary_path)
    return written
