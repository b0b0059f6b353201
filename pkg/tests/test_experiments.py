import csv
from pathlib import Path

import numpy as np
import pytest

from loan_recovery import (
    Measure,
    ScenarioConfig,
    derive_cell_seed,
    emit_results,
    run_loss_rate_sweep,
    run_markov_grid,
    run_payment_prob_sweep,
    run_scenario,
    run_truncation_sweep,
)

SMALL = ScenarioConfig(n_accounts=80, term_months=12, n_bins=12, master_seed=5)
TRUNCATED = SMALL.replace(truncation_k=2.0, truncation_measure="g1", measures=("g1",))


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# --- seed derivation ----------------------------------------------------


class TestDeriveCellSeed:
    def test_deterministic(self):
        assert derive_cell_seed(5, "k", 3) == derive_cell_seed(5, "k", 3)

    def test_distinct_across_axes_and_indices(self):
        seeds = {
            derive_cell_seed(5, label, index)
            for label in ("k", "b", "p_pp/p_dd")
            for index in range(10)
        }
        assert len(seeds) == 30

    def test_uint64_range(self):
        seed = derive_cell_seed(2**63, "b", 0)
        assert 0 <= seed < 2**64


# --- scenario runs ------------------------------------------------------


class TestRunScenario:
    def test_produces_a_curve_per_measure(self):
        result = run_scenario(SMALL, scenario_id="demo")
        assert result.scenario_id == "demo"
        assert tuple(c.measure for c in result.curves) == (Measure.G1, Measure.G2, Measure.G3)
        assert result.comparison.best in {c.measure for c in result.curves}
        for curve in result.curves:
            assert curve.normalised_losses[0] == pytest.approx(0.4, rel=1e-9)

    def test_repeat_runs_agree(self):
        first = run_scenario(SMALL)
        second = run_scenario(SMALL)
        for a, b in zip(first.curves, second.curves):
            np.testing.assert_array_equal(a.total_losses, b.total_losses)


# --- sweeps -------------------------------------------------------------


class TestTruncationSweep:
    def test_cells_and_seeds(self):
        sweep = run_truncation_sweep(SMALL, k_values=(1, 3))
        assert sweep.sweep_id == "k_sweep"
        assert sweep.param_name == "k"
        assert [cell.scenario_id for cell in sweep.cells] == ["k_1", "k_3"]
        for index, cell in enumerate(sweep.cells):
            config = cell.result.config
            assert config.truncation_k == float(sweep.cells[index].param_value)
            assert config.truncation_measure == "g1"
            assert config.measures == ("g1",)
            assert config.master_seed == derive_cell_seed(SMALL.master_seed, "k", index)

    def test_rows_fold_the_optima(self):
        sweep = run_truncation_sweep(SMALL, k_values=(2,))
        ((value, threshold, loss),) = sweep.rows()
        assert value == 2
        assert threshold == sweep.cells[0].curve.optimal_threshold
        assert loss == sweep.cells[0].curve.min_loss

    def test_requires_random_technique(self):
        markov = SMALL.replace(technique="markov", p_pp=0.9, p_dd=0.5)
        with pytest.raises(ValueError, match="random-defaults"):
            run_truncation_sweep(markov, k_values=(1,))


class TestPaymentProbSweep:
    def test_cells_and_seeds(self):
        sweep = run_payment_prob_sweep(TRUNCATED, b_values=(0.6, 0.9))
        assert sweep.sweep_id == "b_sweep"
        assert [cell.param_value for cell in sweep.cells] == [0.6, 0.9]
        for index, cell in enumerate(sweep.cells):
            assert cell.result.config.b == cell.param_value
            assert cell.result.config.master_seed == derive_cell_seed(
                TRUNCATED.master_seed, "b", index
            )

    def test_requires_truncation(self):
        with pytest.raises(ValueError, match="truncation"):
            run_payment_prob_sweep(SMALL, b_values=(0.5,))


class TestLossRateSweep:
    def test_cells_share_the_base_seed(self):
        """r_a does not touch generation, so the portfolio is held fixed
        across cells and differences are purely the rate's."""
        sweep = run_loss_rate_sweep(TRUNCATED, r_a_values=(0.2, 0.8))
        assert sweep.sweep_id == "r_a_sweep"
        for cell in sweep.cells:
            assert cell.result.config.master_seed == TRUNCATED.master_seed
        assert [cell.result.config.r_a for cell in sweep.cells] == [0.2, 0.8]

    def test_requires_truncation(self):
        with pytest.raises(ValueError, match="truncation"):
            run_loss_rate_sweep(SMALL, r_a_values=(0.5,))


class TestMarkovGrid:
    BASE = SMALL.replace(technique="markov", p_pp=0.5, p_dd=0.5, measures=("g1",))

    def test_cells_cover_the_lattice(self):
        sweep = run_markov_grid(self.BASE, p_pp_values=(0.3, 0.6), p_dd_values=(0.4, 0.8))
        assert sweep.sweep_id == "markov_grid"
        assert sweep.param_name == "p_pp/p_dd"
        assert [cell.param_value for cell in sweep.cells] == [
            (0.3, 0.4), (0.3, 0.8), (0.6, 0.4), (0.6, 0.8),
        ]
        assert [cell.scenario_id for cell in sweep.cells] == [
            "markov_pp0.3_dd0.4", "markov_pp0.3_dd0.8",
            "markov_pp0.6_dd0.4", "markov_pp0.6_dd0.8",
        ]

    def test_seed_indices_are_position_stable(self):
        sweep = run_markov_grid(self.BASE, p_pp_values=(0.3, 0.6), p_dd_values=(0.4, 0.8))
        for cell_index, cell in enumerate(sweep.cells):
            assert cell.result.config.master_seed == derive_cell_seed(
                self.BASE.master_seed, "p_pp/p_dd", cell_index
            )

    def test_invalid_cells_are_skipped_with_diagnostics(self):
        # p_pp = 0.9995 leaves negative mass for P -> D
        sweep = run_markov_grid(self.BASE, p_pp_values=(0.9995, 0.5), p_dd_values=(0.5,))
        assert [cell.param_value for cell in sweep.cells] == [(0.5, 0.5)]
        ((skipped_value, message),) = sweep.skipped
        assert skipped_value == (0.9995, 0.5)
        assert "sum" in message
        # the surviving cell keeps its lattice position in the seed layout
        assert sweep.cells[0].result.config.master_seed == derive_cell_seed(
            self.BASE.master_seed, "p_pp/p_dd", 1
        )

    def test_requires_markov_technique(self):
        with pytest.raises(ValueError, match="markov"):
            run_markov_grid(SMALL, p_pp_values=(0.5,), p_dd_values=(0.5,))


# --- emission -----------------------------------------------------------


class TestEmitResults:
    def test_scenario_files_and_schema(self, tmp_path):
        result = run_scenario(SMALL.replace(measures=("g1",)), scenario_id="demo")
        paths = emit_results(result, tmp_path)
        assert sorted(p.name for p in paths) == ["curve_demo_g1.csv", "summary_demo.csv"]

        header, rows = read_csv(tmp_path / "curve_demo_g1.csv")
        assert header == ["measure", "threshold", "total_loss", "normalised_loss"]
        curve = result.curves[0]
        assert len(rows) == len(curve.thresholds)
        for row, (d, total, normalised) in zip(rows, curve.points):
            assert row[0] == "g1"
            assert float(row[1]) == d
            assert float(row[2]) == total
            assert float(row[3]) == normalised

        header, rows = read_csv(tmp_path / "summary_demo.csv")
        assert header == [
            "scenario_id", "param_name", "param_value", "measure",
            "optimal_threshold", "min_loss", "min_normalised_loss", "degenerate_flat",
        ]
        assert rows[0][0] == "demo"
        assert rows[0][7] in ("true", "false")

    def test_summary_minima_match_curve_files(self, tmp_path):
        result = run_scenario(SMALL, scenario_id="full")
        emit_results(result, tmp_path)
        _, summary = read_csv(tmp_path / "summary_full.csv")
        for row in summary:
            measure = row[3]
            _, curve_rows = read_csv(tmp_path / f"curve_full_{measure}.csv")
            column = [float(r[2]) for r in curve_rows]
            assert float(row[5]) == min(column)

    def test_sweep_emission_and_consistency(self, tmp_path):
        sweep = run_truncation_sweep(SMALL, k_values=(1, 2))
        paths = emit_results(sweep, tmp_path)
        names = sorted(p.name for p in paths)
        assert names == ["curve_k_1_g1.csv", "curve_k_2_g1.csv", "summary_k_sweep.csv"]

        _, rows = read_csv(tmp_path / "summary_k_sweep.csv")
        assert [row[0] for row in rows] == ["k_1", "k_2"]
        # each row reproduces independently from the cell's own config
        for row, cell in zip(rows, sweep.cells):
            redone = run_scenario(cell.result.config, scenario_id=row[0])
            assert float(row[4]) == redone.curves[0].optimal_threshold
            assert float(row[5]) == redone.curves[0].min_loss

    def test_markov_grid_summary_cardinality(self, tmp_path):
        base = SMALL.replace(technique="markov", p_pp=0.5, p_dd=0.5, measures=("g1",))
        sweep = run_markov_grid(base, p_pp_values=(0.3, 0.5, 0.7), p_dd_values=(0.4, 0.6, 0.8))
        emit_results(sweep, tmp_path)
        _, rows = read_csv(tmp_path / "summary_markov_grid.csv")
        assert len(rows) == 9
        assert rows[0][1] == "p_pp/p_dd"
        assert rows[0][2] == "0.3/0.4"

    def test_byte_identical_re_emission(self, tmp_path):
        result = run_scenario(SMALL, scenario_id="again")
        first = tmp_path / "first"
        second = tmp_path / "second"
        for destination in (first, second):
            emit_results(run_scenario(SMALL, scenario_id="again"), destination)
        for path in sorted(first.iterdir()):
            assert path.read_bytes() == (second / path.name).read_bytes()

    def test_rejects_unknown_payloads(self, tmp_path):
        with pytest.raises(TypeError):
            emit_results("not a result", tmp_path)

    def test_io_failure_carries_the_path(self, tmp_path):
        blocker = tmp_path / "blocked"
        blocker.write_text("a file, not a directory")
        result = run_scenario(SMALL.replace(measures=("g1",)))
        with pytest.raises(OSError):
            emit_results(result, blocker)
