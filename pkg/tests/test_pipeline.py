"""CSV ingestion, command outputs, determinism and the CLI surface."""

import filecmp
from pathlib import Path

import numpy as np
import pytest

from incomefit import (
    DatasetSpec,
    FitSettings,
    TwoClassParams,
    cmd_baseline,
    cmd_bootstrap,
    cmd_fit,
    cmd_series,
    cmd_synth,
    empirical_gini,
    ingest,
    model_ccdf,
    sample_incomes,
)
from incomefit.cli import main

QUICK = FitSettings(k=800, n_candidates=16, max_iters=50, refine_every=15,
                    refine_max_steps=30)


def write_csv(path: Path, rows: list[str]):
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


@pytest.fixture()
def mixed_csv(tmp_path):
    path = tmp_path / "mixed.csv"
    write_csv(path, [
        "income,gender",
        "0,woman",
        "100,woman",
        ",man",
        "200,man",
        "abc,woman",
        "150,woman",
    ])
    return path


@pytest.fixture(scope="module")
def synth_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth") / "model.csv"
    cmd_synth(TwoClassParams(0.10, 1800.0, 1.8), 20_000, seed=77, out_path=out)
    return out


class TestIngest:
    def test_drop_policy_and_counts(self, mixed_csv):
        result = ingest(DatasetSpec(str(mixed_csv), "income"))
        assert sorted(result.sample.values.tolist()) == [100.0, 150.0, 200.0]
        assert result.n_rows == 6
        assert result.dropped == {"filtered": 0, "missing": 1,
                                  "unparseable": 1, "nonpositive": 1}

    def test_category_filter(self, mixed_csv):
        result = ingest(DatasetSpec(str(mixed_csv), "income",
                                    filters={"gender": "woman"}))
        assert sorted(result.sample.values.tolist()) == [100.0, 150.0]
        assert result.dropped["filtered"] == 2

    def test_stratified_samples(self, tmp_path):
        path = tmp_path / "strata.csv"
        write_csv(path, ["income,g", "10,a", "20,a", "30,b", "40,b", "50,b"])
        result = ingest(DatasetSpec(str(path), "income", stratify_by="g"))
        assert set(result.strata) == {"a", "b"}
        assert result.strata["a"].n == 2
        assert result.strata["b"].n == 3

    def test_values_kept_exactly(self, tmp_path):
        path = tmp_path / "exact.csv"
        values = ["100.07", "1234.5600000001", "3.141592653589793", "17"]
        write_csv(path, ["income"] + values)
        result = ingest(DatasetSpec(str(path), "income"))
        assert sorted(result.sample.values.tolist()) == sorted(float(v) for v in values)

    def test_round_trip_synth(self, synth_csv):
        result = ingest(DatasetSpec(str(synth_csv), "income"))
        original = sample_incomes(TwoClassParams(0.10, 1800.0, 1.8), 20_000, seed=77)
        assert result.sample.n == 20_000
        assert np.array_equal(result.sample.values, original.values)

    def test_missing_column_rejected(self, mixed_csv):
        with pytest.raises(ValueError, match="wages"):
            ingest(DatasetSpec(str(mixed_csv), "wages"))

    def test_all_rows_dropped_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_csv(path, ["income", "0", "-5", ""])
        with pytest.raises(ValueError):
            ingest(DatasetSpec(str(path), "income"))


class TestCmdSynth:
    def test_zero_size_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            cmd_synth(TwoClassParams(0.1, 1000.0, 1.8), 0, 1, tmp_path / "x.csv")

    def test_row_count_round_trip(self, tmp_path):
        out = tmp_path / "n.csv"
        cmd_synth(TwoClassParams(0.1, 1000.0, 1.8), 500, 3, out)
        assert ingest(DatasetSpec(str(out), "income")).sample.n == 500

    def test_exponential_limit_gini(self, tmp_path):
        out = tmp_path / "expo.csv"
        cmd_synth(TwoClassParams(1e-9, 1000.0, 2.0), 100_000, 5, out)
        sample = ingest(DatasetSpec(str(out), "income")).sample
        assert empirical_gini(sample) == pytest.approx(0.5, abs=0.01)

    def test_unwritable_path_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            cmd_synth(TwoClassParams(0.1, 1000.0, 1.8), 5, 1,
                      tmp_path / "missing_dir" / "x.csv")


class TestCmdFit:
    def test_outputs_and_recovery(self, synth_csv, tmp_path):
        out = tmp_path / "fit_out"
        fit = cmd_fit(DatasetSpec(str(synth_csv), "income"), out, QUICK, seed=5)
        for name in ("report.txt", "ccdf_points.csv", "model_curve.csv",
                     "markers.csv", "trace.tsv"):
            assert (out / name).exists()
        assert abs(fit.params.temperature / 1800.0 - 1.0) < 0.05
        report = (out / "report.txt").read_text()
        assert "top_fraction" in report and "[loss]" in report

    def test_pareto_region_error_dominates(self, synth_csv, tmp_path):
        fit = cmd_fit(DatasetSpec(str(synth_csv), "income"),
                      tmp_path / "regions", QUICK, seed=5)
        assert fit.rmsle_pareto >= fit.rmsle_exponential

    def test_region_errors_recombine_to_total(self, synth_csv, tmp_path):
        fit = cmd_fit(DatasetSpec(str(synth_csv), "income"),
                      tmp_path / "recombine", QUICK, seed=5)
        n = fit.n_exponential + fit.n_pareto
        combined = np.sqrt((fit.n_exponential * fit.rmsle_exponential ** 2
                            + fit.n_pareto * fit.rmsle_pareto ** 2) / n)
        assert combined == pytest.approx(fit.loss.rmsle, rel=1e-9)

    def test_plot_curve_consistent_with_report_params(self, synth_csv, tmp_path):
        out = tmp_path / "curve"
        fit = cmd_fit(DatasetSpec(str(synth_csv), "income"), out, QUICK, seed=5)
        rows = (out / "model_curve.csv").read_text().strip().splitlines()[1:]
        incomes = np.array([float(r.split(",")[0]) for r in rows])
        fractions = np.array([float(r.split(",")[1]) for r in rows])
        assert np.allclose(fractions, model_ccdf(fit.params, incomes), rtol=1e-12)
        assert len(rows) == 1000  # 500 points per branch

    def test_byte_identical_outputs_for_same_seed(self, synth_csv, tmp_path):
        spec = DatasetSpec(str(synth_csv), "income")
        out1, out2 = tmp_path / "a", tmp_path / "b"
        cmd_fit(spec, out1, QUICK, seed=9)
        cmd_fit(spec, out2, QUICK, seed=9)
        for name in ("report.txt", "ccdf_points.csv", "model_curve.csv",
                     "markers.csv", "trace.tsv"):
            assert filecmp.cmp(out1 / name, out2 / name, shallow=False), name


class TestCmdBootstrap:
    def test_summary_and_replica_table(self, synth_csv, tmp_path):
        out = tmp_path / "boot"
        summaries = cmd_bootstrap(DatasetSpec(str(synth_csv), "income"), 4, out,
                                  QUICK, seed=2)
        assert summaries["all"].n_effective == 4
        summary_text = (out / "summary.txt").read_text()
        assert "[config]" in summary_text and "seed = 2" in summary_text
        lines = (out / "replicas.csv").read_text().strip().splitlines()
        assert len(lines) == 5  # header + 4 replicas
        assert lines[0].startswith("seed,crossover,top_fraction")

    def test_stratified_two_summaries(self, tmp_path):
        rng = np.random.default_rng(8)
        path = tmp_path / "strat.csv"
        rows = ["income,color"]
        for v in rng.exponential(1000.0, 400) + 1.0:
            rows.append(f"{v},x")
        for v in rng.exponential(1500.0, 400) + 1.0:
            rows.append(f"{v},y")
        write_csv(path, rows)
        out = tmp_path / "strat_out"
        quick = FitSettings(k=200, n_candidates=12, max_iters=30, refine_every=0)
        summaries = cmd_bootstrap(DatasetSpec(str(path), "income", stratify_by="color"),
                                  3, out, quick, seed=4)
        assert set(summaries) == {"x", "y"}
        assert (out / "summary_x.txt").exists()
        assert (out / "summary_y.txt").exists()
        assert (out / "replicas_x.csv").exists()


class TestCmdSeries:
    def test_two_year_run(self, tmp_path):
        for year, seed in ((2001, 1), (2002, 2), (2003, 3)):
            cmd_synth(TwoClassParams(0.08, 1500.0, 1.6), 5_000, seed,
                      tmp_path / f"{year}.csv")
        write_csv(tmp_path / "defl.csv",
                  ["year,index", "2001,50.0", "2002,75.0", "2003,100.0"])
        specs = {y: DatasetSpec(str(tmp_path / f"{y}.csv"), "income")
                 for y in (2001, 2002, 2003)}
        out = tmp_path / "series_out"
        series = cmd_series(specs, tmp_path / "defl.csv", 2003, out, QUICK, seed=0)
        assert [r.year for r in series.records] == [2001, 2002, 2003]
        rec = series.records[0]
        assert rec.temperature_deflated == pytest.approx(2.0 * rec.temperature)
        for name in ("series.csv", "correlations.txt", "regression.txt",
                     "gini_pair.csv", "tail_pair.csv"):
            assert (out / name).exists()

    def test_missing_deflator_named(self, tmp_path):
        cmd_synth(TwoClassParams(0.08, 1500.0, 1.6), 3_000, 1, tmp_path / "y.csv")
        write_csv(tmp_path / "defl.csv", ["year,index", "2019,100.0"])
        specs = {2007: DatasetSpec(str(tmp_path / "y.csv"), "income"),
                 2008: DatasetSpec(str(tmp_path / "y.csv"), "income"),
                 2009: DatasetSpec(str(tmp_path / "y.csv"), "income")}
        with pytest.raises(ValueError, match="2007"):
            cmd_series(specs, tmp_path / "defl.csv", 2019, tmp_path / "o", QUICK)


class TestCli:
    def test_synth_then_fit_exit_codes(self, tmp_path, capsys):
        data = tmp_path / "cli.csv"
        code = main(["synth", "--top-fraction", "0.1", "--temperature", "1500",
                     "--pareto-index", "1.7", "-n", "8000", "--seed", "3",
                     "-o", str(data)])
        assert code == 0
        out_dir = tmp_path / "cli_fit"
        code = main(["fit", str(data), "--out-dir", str(out_dir),
                     "--k", "500", "--n-candidates", "12", "--max-iters", "40",
                     "--seed", "1"])
        assert code == 0
        assert (out_dir / "report.txt").exists()
        printed = capsys.readouterr().out
        assert "temperature=" in printed

    def test_config_file_with_cli_override(self, tmp_path):
        data = tmp_path / "cfg.csv"
        main(["synth", "--top-fraction", "0.1", "--temperature", "1500",
              "--pareto-index", "1.7", "-n", "6000", "--seed", "4", "-o", str(data)])
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"k": 400, "n_candidates": 10, "max_iters": 30, "seed": 8}')
        out_dir = tmp_path / "cfg_out"
        code = main(["fit", str(data), "--out-dir", str(out_dir),
                     "--config", str(cfg), "--max-iters", "35"])
        assert code == 0
        report = (out_dir / "report.txt").read_text()
        assert "k = 400" in report            # from config file
        assert "max_iters = 35" in report     # CLI beats config
        assert "seed = 8" in report           # from config file

    def test_error_exit_code(self, tmp_path, capsys):
        code = main(["fit", str(tmp_path / "nope.csv")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_baseline_command(self, tmp_path, capsys):
        data = tmp_path / "base.csv"
        main(["synth", "--top-fraction", "0.1", "--temperature", "1500",
              "--pareto-index", "1.7", "-n", "20000", "--seed", "6", "-o", str(data)])
        out_dir = tmp_path / "base_out"
        code = main(["baseline", str(data), "--out-dir", str(out_dir),
                     "--k", "800", "--n-candidates", "16", "--max-iters", "50",
                     "--seed", "2"])
        assert code == 0
        assert (out_dir / "baseline.txt").exists()
        printed = capsys.readouterr().out
        assert "baseline rmsle=" in printed
