"""Dataset IO and the command-line interface."""

import numpy as np
import pytest

from underlap.cli import ConfigError, load_config, main, validate_config
from underlap.data import (
    GroupDataset,
    format_float,
    read_dataset,
    read_table,
    write_dataset,
    write_table,
)


@pytest.fixture
def three_group_csv(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text(
        "group,y,age\n"
        "b,1.5,60\n"
        "a,0.25,55\n"
        "c,3.75,70\n"
        "a,0.5,58\n"
        "c,3.5,65\n"
        "b,1.25,62\n"
    )
    return path


class TestReadDataset:
    def test_groups_sorted_by_label(self, three_group_csv):
        datasets = read_dataset(three_group_csv, "group", "y", ["age"])
        assert [d.label for d in datasets] == ["a", "b", "c"]
        assert all(d.n == 2 for d in datasets)
        np.testing.assert_allclose(datasets[0].outcomes, [0.25, 0.5])
        np.testing.assert_allclose(datasets[0].covariates["age"], [55.0, 58.0])

    def test_non_numeric_outcome_names_row_and_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("group,y\na,1.0\nb,oops\n")
        with pytest.raises(ValueError, match="row 3.*'y'.*'oops'"):
            read_dataset(path, "group", "y")

    def test_missing_column_rejected(self, three_group_csv):
        with pytest.raises(ValueError, match="missing required column 'score'"):
            read_dataset(three_group_csv, "group", "score")

    def test_missing_covariate_cell_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("group,y,age\na,1.0,\nb,2.0,50\n")
        with pytest.raises(ValueError, match="row 2.*missing covariate 'age'"):
            read_dataset(path, "group", "y", ["age"])

    def test_categorical_covariate_kept_as_strings(self, tmp_path):
        path = tmp_path / "mix.csv"
        path.write_text("group,y,sex\na,1.0,F\na,2.0,M\nb,0.5,F\nb,0.6,F\nc,1,M\nc,2,M\n")
        datasets = read_dataset(path, "group", "y", ["sex"])
        assert datasets[0].covariates["sex"].tolist() == ["F", "M"]

    def test_round_trip(self, tmp_path, three_group_csv):
        datasets = read_dataset(three_group_csv, "group", "y", ["age"])
        out = tmp_path / "copy.csv"
        write_dataset(out, datasets, "group", "y")
        again = read_dataset(out, "group", "y", ["age"])
        for a, b in zip(datasets, again):
            assert a.label == b.label
            np.testing.assert_array_equal(a.outcomes, b.outcomes)
            np.testing.assert_array_equal(a.covariates["age"], b.covariates["age"])

    def test_group_dataset_validation(self):
        with pytest.raises(ValueError, match="no outcomes"):
            GroupDataset("a", np.array([]))
        with pytest.raises(ValueError, match="length"):
            GroupDataset("a", np.array([1.0, 2.0]), {"x": np.array([1.0])})


class TestWriteTable:
    def test_floats_round_trip_17_digits(self, tmp_path):
        values = [np.pi, 1 / 3, 2.792, 1e-17]
        path = tmp_path / "t.csv"
        write_table(path, ["note"], ["v"], [values])
        comments, colnames, cols = read_table(path)
        assert comments == ["note"]
        assert colnames == ["v"]
        back = [float(v) for v in cols["v"]]
        assert back == values

    def test_format_float(self):
        assert float(format_float(np.pi)) == np.pi


class TestConfig:
    def test_defaults_valid(self):
        cfg = load_config(None)
        assert cfg["grid"]["n_points"] == 501

    def test_invalid_points_named(self):
        with pytest.raises(ConfigError, match="grid.n_points"):
            validate_config(load_config(None, {"grid": {"n_points": 500}}))

    def test_invalid_hyper_named(self):
        with pytest.raises(ConfigError, match="dpm.b2_mu"):
            load_config(None, {"dpm": {"b2_mu": -1.0}})

    def test_spline_on_both_rejected(self):
        effects = {
            "weights": [{"covariate": "x", "kind": "bspline"}],
            "means": [{"covariate": "x", "kind": "bspline"}],
        }
        with pytest.raises(ConfigError, match="effects"):
            load_config(None, {"effects": effects})

    def test_yaml_file_merges(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("seed: 9\nmcmc: {n_burn: 10, n_save: 20}\n")
        cfg = load_config(str(path))
        assert cfg["seed"] == 9
        assert cfg["mcmc"]["n_burn"] == 10
        assert cfg["dpm"]["L"] == 20  # defaults preserved


@pytest.fixture
def densities_yaml(tmp_path):
    path = tmp_path / "dens.yaml"
    path.write_text(
        "groups:\n"
        "  - {family: normal, mean: -3.25, sd: 1.0}\n"
        "  - {family: normal, mean: 0.0, sd: 1.0}\n"
        "  - {family: normal, mean: 3.25, sd: 1.0}\n"
    )
    return path


class TestMeasuresCommand:
    def test_scenario_one_row_one(self, densities_yaml, tmp_path, capsys):
        out = tmp_path / "m.csv"
        inter = tmp_path / "i.csv"
        code = main(
            [
                "measures",
                "--densities", str(densities_yaml),
                "--points", "2001",
                "--out", str(out),
                "--intersections", str(inter),
                "--seed", "3",
            ]
        )
        assert code == 0
        printed = capsys.readouterr().out
        unl_line = [l for l in printed.splitlines() if l.startswith("unl ")][0]
        assert float(unl_line.split()[1]) == pytest.approx(2.792, abs=0.005)
        comments, colnames, cols = read_table(out)
        assert any("underlap" in c for c in comments)
        assert any("config-hash" in c for c in comments)
        got = dict(zip(cols["measure"], [float(v) for v in cols["value"]]))
        assert got["unl"] == pytest.approx(2.792, abs=0.005)
        assert got["unl_from_ovl"] == pytest.approx(got["unl"], abs=1e-6)
        assert got["yi3"] == pytest.approx(got["unl"], abs=1e-3)
        # sampling estimate vs the exact trinormal integral 0.97844
        assert got["vus"] == pytest.approx(0.97844, abs=0.005)
        _, _, icols = read_table(inter)
        kinds = icols["kind"]
        assert kinds.count("outer") == 2

    def test_gridded_input(self, tmp_path, capsys):
        from underlap.densities import Normal, pdf_at
        from underlap.numerics import make_grid

        grid = make_grid(-10.0, 10.0, 1001)
        cols = [list(grid.points)]
        names = ["y"]
        for i, m in enumerate((-2.0, 0.0, 2.0), start=1):
            cols.append(list(pdf_at(Normal(m, 1.0), grid.points)))
            names.append(f"f{i}")
        path = tmp_path / "grid.csv"
        write_table(path, [], names, cols)
        assert main(["measures", "--gridded", str(path)]) == 0
        printed = capsys.readouterr().out
        unl_line = [l for l in printed.splitlines() if l.startswith("unl ")][0]
        from underlap.measures import unl_trinormal

        assert float(unl_line.split()[1]) == pytest.approx(unl_trinormal(-2, 0, 2, 1), abs=1e-3)

    def test_requires_input(self, capsys):
        assert main(["measures"]) == 2
        assert "error:" in capsys.readouterr().err


def _write_three_group_data(path, n=40, seed=0, with_x=False):
    from underlap.numerics import RngStream

    g = RngStream(seed, 0).generator
    rows = ["group,y,x" if with_x else "group,y"]
    for d, mu in enumerate((-3.25, 0.0, 3.25), start=1):
        x = g.uniform(-1, 1, n)
        y = mu + (0.5 * x if with_x else 0.0) + g.standard_normal(n)
        for i in range(n):
            if with_x:
                rows.append(f"{d},{float(y[i])!r},{float(x[i])!r}")
            else:
                rows.append(f"{d},{float(y[i])!r}")
    path.write_text("\n".join(rows) + "\n")


class TestFitCommand:
    def test_fit_outputs_and_compare(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        _write_three_group_data(data, n=40, seed=1)
        prefix = tmp_path / "run"
        code = main(
            [
                "fit",
                "--data", str(data),
                "--out-prefix", str(prefix),
                "--seed", "5",
                "--burn", "100",
                "--save", "200",
            ]
        )
        assert code == 0
        ens = f"{prefix}_unl_ensemble.csv"
        _, _, cols = read_table(ens)
        assert len(cols["unl"]) == 200
        vals = np.array([float(v) for v in cols["unl"]])
        assert np.all((vals >= 0.9) & (vals <= 3.1))
        _, _, s = read_table(f"{prefix}_unl_summary.csv")
        assert 1.0 <= float(s["median"][0]) <= 3.0
        _, _, dd = read_table(f"{prefix}_diagnostics.csv")
        assert dd["chain"] == ["unl", "yi3"]
        for label in ("1", "2", "3"):
            _, colnames, _ = read_table(f"{prefix}_draws_{label}.csv")
            assert len(colnames) == 3 * 20  # L weights, L means, L variances

        capsys.readouterr()
        assert main(["compare", ens, ens]) == 0
        assert capsys.readouterr().out.strip() == "0"

    @pytest.mark.slow
    def test_fit_cov_select_design(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        _write_three_group_data(data, n=50, seed=9, with_x=True)
        prefix = tmp_path / "sel"
        code = main(
            [
                "fit-cov",
                "--data", str(data),
                "--covariates", "x",
                "--x-covariate", "x",
                "--x-values=0",
                "--select-design", "x",
                "--max-knots", "0",
                "--out-prefix", str(prefix),
                "--seed", "6",
                "--burn", "80",
                "--save", "100",
            ]
        )
        assert code == 0
        _, _, cols = read_table(f"{prefix}_selection.csv")
        # three groups, each with linear + means-spline + weights-spline
        assert len(cols["group"]) == 9
        assert cols["status"].count("selected") == 3
        printed = capsys.readouterr().out
        assert printed.count("selected") >= 3

    def test_fit_cov_curve(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        _write_three_group_data(data, n=60, seed=2, with_x=True)
        prefix = tmp_path / "cov"
        code = main(
            [
                "fit-cov",
                "--data", str(data),
                "--covariates", "x",
                "--x-covariate", "x",
                "--x-values=-0.5,0,0.5",
                "--out-prefix", str(prefix),
                "--seed", "5",
                "--burn", "80",
                "--save", "120",
            ]
        )
        assert code == 0
        _, colnames, cols = read_table(f"{prefix}_unl_curve.csv")
        assert colnames == ["x", "median", "lower", "upper"]
        assert len(cols["median"]) == 3
        meds = [float(v) for v in cols["median"]]
        assert all(1.0 - 0.1 <= m <= 3.0 + 0.1 for m in meds)
        _, colnames, _ = read_table(f"{prefix}_draws_1.csv")
        assert any(c.startswith("gamma") for c in colnames)
        assert any(c.startswith("beta") for c in colnames)


class TestSimulateCommand:
    def test_byte_deterministic(self, tmp_path):
        out1 = tmp_path / "r1.csv"
        out2 = tmp_path / "r2.csv"
        argv = [
            "simulate", "U-I", "high",
            "--n", "40", "--reps", "2", "--seed", "7",
            "--burn", "50", "--save", "60",
        ]
        assert main(argv + ["--out", str(out1)]) == 0
        assert main(argv + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        _, _, cols = read_table(out1)
        assert cols["scenario"] == ["U-I"]
        assert 0.0 <= float(cols["coverage"][0]) <= 1.0

    def test_unknown_scenario_rejected(self, capsys):
        with pytest.raises(SystemExit):
            main(["simulate", "U-IX", "high", "--out", "x.csv"])


class TestPpcCommand:
    def test_ppc_output(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        _write_three_group_data(data, n=40, seed=3)
        out = tmp_path / "ppc.csv"
        code = main(
            [
                "ppc",
                "--data", str(data),
                "--group", "2",
                "--stat", "skewness",
                "--n-rep", "100",
                "--seed", "4",
                "--burn", "60",
                "--save", "120",
                "--out", str(out),
            ]
        )
        assert code == 0
        _, _, cols = read_table(out)
        assert cols["kind"][0] == "observed"
        assert cols["kind"].count("replicate") == 100


class TestCompareCommand:
    def test_missing_column_rejected(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        write_table(path, [], ["foo"], [[1.0, 2.0]])
        assert main(["compare", str(path), str(path)]) == 2
        assert "error:" in capsys.readouterr().err
