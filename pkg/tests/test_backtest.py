import math

import pytest

from swapcost.backtest import (
    AGGREGATE_HEADER,
    REPORT_HEADER,
    SWEEP_HEADER,
    BacktestConfig,
    aggregate_table,
    default_config,
    run_backtest,
    sweep_config,
    sweep_gas_volume,
    sweep_tvl,
    write_aggregate_csv,
    write_report_csv,
    write_sweep_csv,
)
from swapcost.errors import EmptyReport
from swapcost.marketdata import scenario_preset


def tiny_config(tiny_fx_path, **overrides):
    return default_config(tiny_fx_path, **overrides)


class TestRunBacktest:
    def test_shape(self, tiny_fx_path):
        report = run_backtest(tiny_config(tiny_fx_path))
        assert len(report.rows) == 5 * 2 * 3
        assert len(report.errors) == 0
        keys = [(r.date, r.scenario, r.volume_eur) for r in report.rows]
        assert len(set(keys)) == len(keys)
        assert keys == sorted(keys)

    def test_component_sum_identity(self, tiny_fx_path):
        report = run_backtest(tiny_config(tiny_fx_path))
        for row in report.rows:
            assert row.total_eur == row.gas_eur + row.lp_fee_eur + row.impact_eur

    def test_exact_constant_columns(self, tiny_fx_path):
        report = run_backtest(tiny_config(tiny_fx_path))
        fee_by_volume = {1e4: 1.0, 1e5: 10.0, 1e6: 100.0}
        for row in report.rows:
            assert row.gas_eur == (15.0 if row.scenario == "l1-mariana" else 0.3)
            assert row.lp_fee_eur == fee_by_volume[row.volume_eur]

    def test_aggregates_are_row_means(self, tiny_fx_path):
        report = run_backtest(tiny_config(tiny_fx_path))
        for agg in report.aggregates:
            rows = [r for r in report.rows
                    if r.scenario == agg.scenario and r.volume_eur == agg.volume_eur]
            assert agg.days == len(rows) == 5
            assert agg.impact_eur == math.fsum(r.impact_eur for r in rows) / len(rows)
            assert agg.total_eur == math.fsum(r.total_eur for r in rows) / len(rows)
            assert agg.gas_eur == rows[0].gas_eur
            assert agg.total_bps == agg.total_eur * (1e4 / agg.volume_eur)

    def test_single_day_aggregates_equal_rows(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("date,chf_eur,chf_sgd\n2023-06-01,0.97,1.47\n")
        report = run_backtest(tiny_config(path))
        assert all(a.days == 1 for a in report.aggregates)
        by_key = {(r.scenario, r.volume_eur): r for r in report.rows}
        for agg in report.aggregates:
            row = by_key[(agg.scenario, agg.volume_eur)]
            assert agg.total_eur == row.total_eur
            assert agg.impact_eur == row.impact_eur

    def test_zero_scenarios_empty_report(self, tiny_fx_path):
        report = run_backtest(tiny_config(tiny_fx_path, scenarios=()))
        assert report.rows == ()
        assert report.aggregates == ()
        assert report.errors == ()

    def test_routed_cheaper_at_bracket_volumes(self, tiny_fx_path):
        report = run_backtest(tiny_config(tiny_fx_path))
        totals = {(a.scenario, a.volume_eur): a.total_eur for a in report.aggregates}
        for volume in (1e4, 1e6):
            assert totals[("l2l3-exchange", volume)] < totals[("l1-mariana", volume)]

    def test_failed_combination_excluded_everywhere(self, tiny_fx_path):
        # 20mn EUR fits the single big pool but exceeds every routed
        # pool's depth; the combination must drop out of both scenarios'
        # means while the error is counted
        report = run_backtest(tiny_config(tiny_fx_path, volumes_eur=(1e4, 2e7)))
        assert len(report.errors) == 5
        assert all(e.scenario == "l2l3-exchange" for e in report.errors)
        assert all(e.volume_eur == 2e7 for e in report.errors)
        assert {a.volume_eur for a in report.aggregates} == {1e4}
        big_rows = [r for r in report.rows if r.volume_eur == 2e7]
        assert len(big_rows) == 5
        assert all(r.scenario == "l1-mariana" for r in big_rows)

    def test_deterministic(self, tiny_fx_path, tmp_path):
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        write_report_csv(run_backtest(tiny_config(tiny_fx_path)), first)
        write_report_csv(run_backtest(tiny_config(tiny_fx_path)), second)
        assert first.read_bytes() == second.read_bytes()

    def test_scale_invariance_of_bps(self, tiny_fx_path):
        small = run_backtest(tiny_config(tiny_fx_path, volumes_eur=(1e4,),
                                         tvl_levels_chf=(100e6,)))
        scaled = run_backtest(tiny_config(tiny_fx_path, volumes_eur=(2e4,),
                                          tvl_levels_chf=(200e6,)))
        impact_small = {a.scenario: a.impact_bps for a in small.aggregates}
        impact_scaled = {a.scenario: a.impact_bps for a in scaled.aggregates}
        for scenario, value in impact_small.items():
            assert impact_scaled[scenario] == pytest.approx(value, rel=1e-9)


class TestConfigValidation:
    def test_grids_must_be_non_empty(self, tiny_fx_path):
        with pytest.raises(ValueError):
            tiny_config(tiny_fx_path, volumes_eur=())
        with pytest.raises(ValueError):
            tiny_config(tiny_fx_path, gas_levels_eur=())
        with pytest.raises(ValueError):
            tiny_config(tiny_fx_path, tvl_levels_chf=())

    def test_grid_values_validated(self, tiny_fx_path):
        with pytest.raises(ValueError):
            tiny_config(tiny_fx_path, volumes_eur=(0.0,))
        with pytest.raises(ValueError):
            tiny_config(tiny_fx_path, gas_levels_eur=(-1.0,))
        with pytest.raises(ValueError):
            tiny_config(tiny_fx_path, tvl_levels_chf=(-5.0,))

    def test_zero_gas_is_legal(self, tiny_fx_path):
        cfg = tiny_config(tiny_fx_path, gas_levels_eur=(0.0,))
        report = run_backtest(cfg)
        assert all(r.gas_eur == 0.0 for r in report.rows)

    def test_duplicate_scenarios_rejected(self, tiny_fx_path):
        with pytest.raises(ValueError):
            BacktestConfig(
                fx_path=tiny_fx_path,
                scenarios=(scenario_preset("l1-mariana"), scenario_preset("l1-mariana")),
            )

    def test_same_pay_receive_rejected(self, tiny_fx_path):
        with pytest.raises(ValueError):
            tiny_config(tiny_fx_path, pay="EUR", receive="EUR")


class TestAggregateTable:
    def test_headers(self, tiny_fx_path):
        table = aggregate_table(run_backtest(tiny_config(tiny_fx_path)))
        for column in ("Total Fee", "Gas Fee", "Swap Fee", "Price Impact"):
            assert column in table
        assert "small (10k)" in table
        assert "large (1mn)" in table

    def test_empty_report(self, tiny_fx_path):
        with pytest.raises(EmptyReport):
            aggregate_table(run_backtest(tiny_config(tiny_fx_path, scenarios=())))


class TestCsvOutput:
    def test_report_header_and_parse(self, tiny_fx_path, tmp_path):
        report = run_backtest(tiny_config(tiny_fx_path))
        path = tmp_path / "report.csv"
        write_report_csv(report, path)
        lines = path.read_text().splitlines()
        assert lines[0] == REPORT_HEADER
        assert len(lines) == 1 + len(report.rows)
        first = lines[1].split(",")
        assert first[0] == "2023-01-02"
        # float cells round-trip exactly
        assert float(first[-1]) == report.rows[0].total_eur

    def test_aggregate_header(self, tiny_fx_path, tmp_path):
        report = run_backtest(tiny_config(tiny_fx_path))
        path = tmp_path / "agg.csv"
        write_aggregate_csv(report, path)
        lines = path.read_text().splitlines()
        assert lines[0] == AGGREGATE_HEADER
        assert len(lines) == 1 + len(report.aggregates)

    def test_aggregate_csv_empty_raises(self, tiny_fx_path, tmp_path):
        report = run_backtest(tiny_config(tiny_fx_path, scenarios=()))
        with pytest.raises(EmptyReport):
            write_aggregate_csv(report, tmp_path / "agg.csv")


class TestSweep:
    def test_matches_single_tvl_sweep(self, tiny_fx_path):
        cfg = tiny_config(tiny_fx_path, gas_levels_eur=(1.0, 15.0),
                          volumes_eur=(1e3, 1e5))
        assert sweep_tvl(cfg)[0] == sweep_gas_volume(cfg)

    def test_vanishing_volume_difference_approaches_gas_gap(self, tiny_fx_path):
        cfg = tiny_config(tiny_fx_path, volumes_eur=(1.0,), gas_levels_eur=(15.0,))
        grid = sweep_gas_volume(cfg)
        assert grid.diff_eur[0][0] == pytest.approx(15.0 - 0.3, abs=1e-3)

    def test_always_cheaper_at_high_gas(self, tiny_fx_path):
        cfg = sweep_config(tiny_fx_path, gas_levels_eur=(800.0,))
        grid = sweep_gas_volume(cfg)
        assert min(grid.diff_eur[0]) >= 0.0

    def test_needs_exactly_two_scenarios(self, tiny_fx_path):
        with pytest.raises(ValueError):
            sweep_gas_volume(tiny_config(tiny_fx_path,
                                         scenarios=(scenario_preset("l1-mariana"),)))

    def test_percentage_normalization(self, tiny_fx_path):
        cfg = tiny_config(tiny_fx_path, gas_levels_eur=(15.0,), volumes_eur=(1e4, 1e6))
        grid = sweep_gas_volume(cfg)
        report = run_backtest(cfg)
        totals = {(a.scenario, a.volume_eur): a.total_eur for a in report.aggregates}
        for vi, volume in enumerate(grid.volumes_eur):
            base = totals[("l1-mariana", volume)]
            routed = totals[("l2l3-exchange", volume)]
            assert grid.diff_eur[0][vi] == pytest.approx(base - routed, rel=1e-12)
            assert grid.diff_pct[0][vi] == pytest.approx((base - routed) / base, rel=1e-12)

    def test_scale_invariance_at_zero_gas(self, tiny_fx_path):
        # doubling both system liquidity and trade volume leaves the
        # percentage difference unchanged once the flat gas charge is off
        base = sweep_gas_volume(tiny_config(
            tiny_fx_path, gas_levels_eur=(0.0,), volumes_eur=(1e4, 1e6)))
        scaled = sweep_gas_volume(tiny_config(
            tiny_fx_path, gas_levels_eur=(0.0,), volumes_eur=(2e4, 2e6),
            tvl_levels_chf=(200e6,)))
        for vi in range(2):
            assert scaled.diff_pct[0][vi] == pytest.approx(base.diff_pct[0][vi], rel=1e-9)

    def test_more_liquidity_less_impact(self, tiny_fx_path):
        thin = sweep_gas_volume(tiny_config(tiny_fx_path, gas_levels_eur=(0.0,),
                                            volumes_eur=(1e6,)))
        deep = sweep_gas_volume(tiny_config(tiny_fx_path, gas_levels_eur=(0.0,),
                                            volumes_eur=(1e6,),
                                            tvl_levels_chf=(200e6,)))
        # absolute cost difference shrinks when both systems get deeper
        assert abs(deep.diff_eur[0][0]) < abs(thin.diff_eur[0][0])

    def test_sweep_csv_format(self, tiny_fx_path, tmp_path):
        cfg = tiny_config(tiny_fx_path, gas_levels_eur=(1.0, 800.0), volumes_eur=(1e3, 1e5))
        grid = sweep_gas_volume(cfg)
        path = tmp_path / "sweep.csv"
        write_sweep_csv(grid, path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("#")
        assert "positive means l2l3-exchange is cheaper" in lines[0]
        assert lines[2] == SWEEP_HEADER
        assert len(lines) == 3 + 2 * 2
        cells = lines[3].split(",")
        assert float(cells[0]) == 1.0
        assert float(cells[3]) == grid.diff_eur[0][0]

    def test_multi_tvl(self, tiny_fx_path):
        cfg = tiny_config(tiny_fx_path, gas_levels_eur=(15.0,), volumes_eur=(1e4,),
                          tvl_levels_chf=(100e6, 200e6))
        grids = sweep_tvl(cfg)
        assert [g.tvl_chf for g in grids] == [100e6, 200e6]
