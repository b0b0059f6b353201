"""Threshold grids, loss curves, and the measure comparison.

The optimisation itself is an exhaustive sweep: thresholds form a small
grid, every grid point prices the whole portfolio, and the optimum is
the smallest threshold attaining the minimum loss (earliest
intervention among equals).

Arrears counts take a natural integer grid from 0 up to a proportion of
the contractual term.  Duration ratios are real-valued, so their grid
is built from empirical quantiles of all observed series values plus
the mandatory 0 threshold.  A quantile grid at 2n bins contains the one
at n bins, so refining the grid can only match or lower the found
minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .delinquency import CdParams, DodParams, Measure, SeriesCache
from .lossmodel import LossRates, LossTable, _resolve_measure_params, portfolio_loss
from .portfolio import Portfolio

__all__ = [
    "GridOptions",
    "ThresholdGrid",
    "LossCurve",
    "MeasureComparison",
    "build_threshold_grid",
    "sweep_loss_curve",
    "best_measure",
]

# Two grid points this close (normalised) count as one flat minimum.
FLAT_TOL = 1e-9


@dataclass(frozen=True)
class GridOptions:
    """Knobs of grid construction.

    threshold_proportion caps the integer grid at that share of the
    longest contractual term; n_bins sets the quantile resolution for
    the real-valued measures.
    """

    threshold_proportion: float = 0.6
    n_bins: int = 100

    def __post_init__(self) -> None:
        if not 0.0 < self.threshold_proportion <= 1.0:
            raise ValueError(
                f"threshold_proportion must lie in (0, 1], got {self.threshold_proportion}"
            )
        if self.n_bins < 1:
            raise ValueError(f"n_bins must be at least 1, got {self.n_bins}")


@dataclass(frozen=True, eq=False)
class ThresholdGrid:
    """Strictly increasing candidate thresholds for one measure."""

    measure: Measure
    thresholds: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.thresholds, dtype=float)
        if values.ndim != 1 or len(values) == 0:
            raise ValueError("a grid needs at least one threshold")
        if np.any(np.diff(values) <= 0):
            raise ValueError("thresholds must be strictly increasing")
        if values[0] < 0:
            raise ValueError("thresholds cannot be negative")
        if self.measure is Measure.G1:
            if values[0] != 0 or np.any(values != np.arange(len(values))):
                raise ValueError(
                    "an arrears-count grid must be the consecutive integers 0..d_N"
                )
        values.setflags(write=False)
        object.__setattr__(self, "thresholds", values)

    def __len__(self) -> int:
        return len(self.thresholds)


def build_threshold_grid(
    measure: Measure,
    portfolio: Portfolio,
    options: GridOptions = GridOptions(),
    cache: SeriesCache | None = None,
    cd: CdParams | None = None,
    dod: DodParams | None = None,
) -> ThresholdGrid:
    """Candidate thresholds for ``measure`` over this portfolio.

    G1 gets the integers 0..ceil(proportion * max term).  G2 and G3 get
    {0} plus the empirical quantiles of every observed series value at
    levels 1/n_bins .. n_bins/n_bins, deduplicated; negative candidates
    (possible only with overpayment-dominated data) are dropped.
    """
    if measure is Measure.G1:
        d_max = math.ceil(
            options.threshold_proportion
            * max(acc.spec.term_months for acc in portfolio)
        )
        return ThresholdGrid(
            measure=measure, thresholds=np.arange(d_max + 1, dtype=float)
        )

    if cache is None:
        cd, dod = _resolve_measure_params(portfolio, cd, dod)
        cache = SeriesCache.build(portfolio, measure, cd, dod)
    if cache.measure is not measure:
        raise ValueError(
            f"series cache holds {cache.measure.value}, asked to grid {measure.value}"
        )
    observed = cache.values[np.isfinite(cache.values)]
    levels = np.arange(1, options.n_bins + 1) / options.n_bins
    candidates = np.quantile(observed, levels)
    thresholds = np.unique(np.concatenate(([0.0], candidates)))
    return ThresholdGrid(measure=measure, thresholds=thresholds[thresholds >= 0])


@dataclass(frozen=True, eq=False)
class LossCurve:
    """Portfolio loss at every grid threshold, with its minimiser.

    The optimum is the smallest threshold attaining the minimum total
    loss.  degenerate_flat marks curves where at least two grid points
    sit within FLAT_TOL of the minimum normalised loss, so the reported
    minimiser is one of several practically equal choices.
    """

    measure: Measure
    thresholds: np.ndarray
    total_losses: np.ndarray
    normalised_losses: np.ndarray

    def __post_init__(self) -> None:
        t = np.array(self.thresholds, dtype=float)
        tot = np.array(self.total_losses, dtype=float)
        norm = np.array(self.normalised_losses, dtype=float)
        if not len(t) == len(tot) == len(norm) or len(t) == 0:
            raise ValueError("a curve needs equal-length, non-empty columns")
        if np.any(np.diff(t) <= 0):
            raise ValueError("curve points must be ordered by threshold")
        for arr in (t, tot, norm):
            arr.setflags(write=False)
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "total_losses", tot)
        object.__setattr__(self, "normalised_losses", norm)

    @property
    def points(self) -> list[tuple[float, float, float]]:
        """(threshold, total loss, normalised loss) triples in grid order."""
        return list(
            zip(
                self.thresholds.tolist(),
                self.total_losses.tolist(),
                self.normalised_losses.tolist(),
            )
        )

    @property
    def _argmin(self) -> int:
        return int(np.argmin(self.total_losses))

    @property
    def optimal_threshold(self) -> float:
        return float(self.thresholds[self._argmin])

    @property
    def min_loss(self) -> float:
        return float(self.total_losses[self._argmin])

    @property
    def min_normalised_loss(self) -> float:
        return float(self.normalised_losses[self._argmin])

    @property
    def optimum(self) -> tuple[float, float]:
        return (self.optimal_threshold, self.min_loss)

    @property
    def degenerate_flat(self) -> bool:
        near = self.normalised_losses <= self.min_normalised_loss + FLAT_TOL
        return int(np.count_nonzero(near)) >= 2

    def flatness(self) -> float:
        """How far the normalised curve climbs back after its minimum.

        Max minus min over the thresholds from the argmin onward.  A
        pronounced bowl scores high; a curve that declines to the end of
        the grid (no interior optimum, so nothing to trade off) scores
        exactly 0.  This is the bend that makes threshold choice matter,
        which a whole-curve range would mask whenever a monotone decline
        spans more than the bowl depth.
        """
        tail = self.normalised_losses[self._argmin :]
        return float(tail.max() - tail.min())


def sweep_loss_curve(
    portfolio: Portfolio,
    measure: Measure,
    grid: ThresholdGrid,
    rates: LossRates,
    cache: SeriesCache | None = None,
    table: LossTable | None = None,
    cd: CdParams | None = None,
    dod: DodParams | None = None,
) -> LossCurve:
    """Price every grid threshold and assemble the loss curve."""
    if grid.measure is not measure:
        raise ValueError(
            f"grid is for {grid.measure.value}, asked to sweep {measure.value}"
        )
    if cache is None:
        cd, dod = _resolve_measure_params(portfolio, cd, dod)
        cache = SeriesCache.build(portfolio, measure, cd, dod)
    if table is None:
        table = LossTable.build(portfolio, rates)
    totals = np.empty(len(grid))
    normals = np.empty(len(grid))
    for j, d in enumerate(grid.thresholds):
        loss = portfolio_loss(
            portfolio, measure, float(d), rates, cache=cache, table=table
        )
        totals[j] = loss.total
        normals[j] = loss.normalised
    return LossCurve(
        measure=measure,
        thresholds=grid.thresholds,
        total_losses=totals,
        normalised_losses=normals,
    )


@dataclass(frozen=True, eq=False)
class MeasureComparison:
    """Per-measure optima and the overall winner."""

    curves: tuple[LossCurve, ...]
    best: Measure

    @property
    def optima(self) -> dict[Measure, tuple[float, float, float]]:
        """measure -> (optimal threshold, min loss, min normalised loss)."""
        return {
            c.measure: (c.optimal_threshold, c.min_loss, c.min_normalised_loss)
            for c in self.curves
        }

    @property
    def best_curve(self) -> LossCurve:
        for curve in self.curves:
            if curve.measure is self.best:
                return curve
        raise RuntimeError("comparison lost its winning curve")


def best_measure(curves: list[LossCurve] | tuple[LossCurve, ...]) -> MeasureComparison:
    """Pick the measure with the least minimum loss.

    Exact ties go to the earliest measure in the fixed order G1, G2,
    G3.
    """
    if not curves:
        raise ValueError("at least one curve is needed")
    seen = {c.measure for c in curves}
    if len(seen) != len(curves):
        raise ValueError("at most one curve per measure")
    ordered = tuple(sorted(curves, key=lambda c: c.measure.value))
    winner = ordered[0]
    for curve in ordered[1:]:
        if curve.min_loss < winner.min_loss:
            winner = curve
    return MeasureComparison(curves=ordered, best=winner.measure)
