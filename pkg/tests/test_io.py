import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rbdm.cli import main
from rbdm.gibbs import HyperParams
from rbdm.io import (DateParseError, DuplicateDateError, GapError,
                     MissingColumnError, MissingFileError, RunConfig,
                     ValueParseError, ingest_csv, read_csv_columns, run_analysis,
                     write_csv)
from rbdm.synthetic import KINDS, cpi_like_series, generate_synthetic

DATA = Path(__file__).resolve().parents[1] / "src" / "rbdm" / "data" / "cpi_like.csv"
FAST = ["--iters", "60", "--burn", "20"]


def write(tmp_path, text, name="in.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_ingest_small_file(tmp_path):
    p = write(tmp_path, "date,value\n1980-01,1.5\n1980-02,2.5\n1980-03,2\n")
    s = ingest_csv(p)
    assert len(s) == 3
    assert s.timestamps == ((1980, 1), (1980, 2), (1980, 3))
    assert list(s.values) == [1.5, 2.5, 2.0]


def test_ingest_sorts_rows(tmp_path):
    p = write(tmp_path, "value,date\n2,1980-02\n1,1980-01\n3,1980-03\n")
    assert list(ingest_csv(p).values) == [1.0, 2.0, 3.0]


def test_gap_names_missing_month(tmp_path):
    p = write(tmp_path, "date,value\n1980-01,1\n1980-03,2\n")
    with pytest.raises(GapError, match="1980-02"):
        ingest_csv(p)


def test_annual_gap(tmp_path):
    p = write(tmp_path, "year,cpi\n1984,1\n1986,2\n")
    with pytest.raises(GapError, match="1985"):
        ingest_csv(p, "year", "cpi", annual=True)


def test_annual_ok(tmp_path):
    p = write(tmp_path, "year,cpi\n1984,1\n1985,2\n1986,4\n")
    assert ingest_csv(p, "year", "cpi", annual=True).labels == ["1984", "1985", "1986"]


@pytest.mark.parametrize("text,exc", [
    ("date,value\n1980-01,1\n1980-01,2\n", DuplicateDateError),
    ("date,price\n1980-01,1\n1980-02,2\n", MissingColumnError),
    ("date,value\n1980-01,1\n1980-13,2\n", DateParseError),
    ("date,value\n1980/01,1\n1980-02,2\n", DateParseError),
    ("date,value\n1980-01,1\n1980-02,abc\n", ValueParseError),
    ("date,value\n1980-01,1\n1980-02,\n", ValueParseError),
])
def test_ingest_errors_are_distinct(tmp_path, text, exc):
    with pytest.raises(exc):
        ingest_csv(write(tmp_path, text))


def test_error_reports_row_number(tmp_path):
    with pytest.raises(ValueParseError, match="row 3"):
        ingest_csv(write(tmp_path, "date,value\n1980-01,1\n1980-02,x\n"))


def test_missing_file(tmp_path):
    with pytest.raises(MissingFileError):
        ingest_csv(tmp_path / "nope.csv")


def test_full_cpi_span():
    s = ingest_csv(DATA)
    assert len(s) == 396 == 33 * 12
    assert s.labels[0] == "1980-01" and s.labels[-1] == "2012-12"


def test_bundled_data_is_reproducible():
    assert np.array_equal(ingest_csv(DATA).values, cpi_like_series().values)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e300, 1e300, allow_nan=False), min_size=1, max_size=30))
def test_result_csv_roundtrip(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("rt") / "x.csv"
    write_csv(path, ["t", "v"], [[str(i) for i in range(len(values))], values])
    back = [float(v) for v in read_csv_columns(path)["v"]]
    assert back == values


def test_synthetic_kinds():
    clean, truth = generate_synthetic("clean", 50, seed=3)
    assert truth["t_star"] is None and len(clean) == 50
    out, truth = generate_synthetic("obs-outlier", 50, seed=3)
    diff = out.values - clean.values
    k = truth["t_star"] - 1
    assert k == 24
    assert diff[k] == pytest.approx(8 * np.sqrt(truth["V"]))
    assert np.count_nonzero(np.delete(diff, k)) == 0
    ls, truth = generate_synthetic("level-shift", 50, seed=3)
    level = np.array(truth["level"])
    slope = np.array(truth["slope"])
    jump = level[k] - level[k - 1] - slope[k - 1]
    assert jump == pytest.approx(6 * np.sqrt(truth["W"][0]))
    # persists: the level stays shifted relative to the clean path
    assert np.all(np.array(truth["level"])[k:] - np.array(generate_synthetic(
        "clean", 50, seed=3)[1]["level"])[k:] > 3 * np.sqrt(truth["W"][0]))


def test_synthetic_errors():
    with pytest.raises(ValueError):
        generate_synthetic("seasonal", 50)
    with pytest.raises(ValueError):
        generate_synthetic("clean", 9)
    assert set(KINDS) == {"clean", "obs-outlier", "level-shift", "slope-shift"}


def test_cli_outputs_and_config_echo(tmp_path):
    out = tmp_path / "out"
    code = main(["--input", str(DATA), "--log", "--out-dir", str(out), "--emit-tails",
                 *FAST])
    assert code == 0
    for name in ("summary.json", "states.csv", "weights.csv", "residuals.csv", "tails.csv"):
        assert (out / name).exists()
    summary = json.loads((out / "summary.json").read_text())
    cfg = summary["config"]
    assert set(cfg) == set(RunConfig().to_dict())
    assert cfg["log"] is True and cfg["input"] == str(DATA)
    assert summary["seed"] == 0 and summary["T"] == 396
    states = read_csv_columns(out / "states.csv")
    assert list(states) == ["t", "level_mean", "level_lo", "level_hi",
                            "slope_mean", "slope_lo", "slope_hi"]
    assert len(states["t"]) == 396
    assert list(read_csv_columns(out / "weights.csv")) == ["t", "omega_y", "omega_level", "omega_slope"]
    assert list(read_csv_columns(out / "residuals.csv")) == ["t", "residual"]
    assert list(read_csv_columns(out / "tails.csv")) == ["theta", "stb2", "cauchy", "normal"]


def test_default_config_echo(tmp_path):
    out = tmp_path / "o"
    from rbdm.cli import build_parser, config_from_args
    cfg = config_from_args(build_parser().parse_args(["--input", "x.csv", "--out-dir", str(out)]))
    hyper = cfg.to_dict()["hyper"]
    assert hyper["nu"] == 4 and hyper["p"] == 1 and hyper["q"] == 1
    assert hyper["beta"] == 0.0001
    assert hyper["n_iter"] == 30000 and hyper["n_burn"] == 10000
    assert cfg.level == 0.95 and cfg.threshold == 0.5 and cfg.top_k == 15 and cfg.chains == 1


def test_written_values_roundtrip(tmp_path):
    from rbdm.core import diffuse_linear_growth
    from rbdm.diagnostics import summarize
    from rbdm.gibbs import run_gibbs
    s, _ = generate_synthetic("clean", 30, seed=1)
    cfg = RunConfig(hyper=HyperParams(n_iter=40, n_burn=10), out_dir=str(tmp_path))
    assert run_analysis(cfg, s) == 0
    chain = run_gibbs(diffuse_linear_growth(s), s, cfg.hyper)
    summary = summarize(chain, s)
    cols = read_csv_columns(tmp_path / "weights.csv")
    assert [float(v) for v in cols["omega_level"]] == list(summary.omega_level)
    cols = read_csv_columns(tmp_path / "states.csv")
    assert [float(v) for v in cols["slope_hi"]] == list(summary.slope_hi)


def test_cli_deterministic(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert main(["--input", str(DATA), "--log", "--out-dir", str(out), "--seed", "7",
                     *FAST]) == 0
        outs.append(out)
    for name in ("states.csv", "weights.csv", "residuals.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_cli_generate_synthetic(tmp_path):
    out = tmp_path / "syn"
    code = main(["--generate-synthetic", "level-shift", "--synthetic-length", "40",
                 "--seed", "3", "--out-dir", str(out), *FAST])
    assert code == 0
    truth = json.loads((out / "truth.json").read_text())
    assert truth["kind"] == "level-shift" and truth["t_star"] == 20
    assert truth["timestamp"] == "1981-08"
    assert len(ingest_csv(out / "synthetic.csv")) == 40
    assert (out / "summary.json").exists()


def test_cli_generate_only(tmp_path):
    out = tmp_path / "syn"
    assert main(["--generate-synthetic", "obs-outlier", "--no-fit", "--out-dir", str(out)]) == 0
    assert (out / "synthetic.csv").exists() and not (out / "summary.json").exists()


def test_cli_tails_only(tmp_path):
    assert main(["--emit-tails", "--out-dir", str(tmp_path)]) == 0
    cols = read_csv_columns(tmp_path / "tails.csv")
    i = cols["theta"].index("0")
    assert float(cols["stb2"][i]) == 0.5


def test_failure_gives_error_record(tmp_path, capsys):
    bad = write(tmp_path, "date,value\n1980-01,1\n1980-03,2\n")
    out = tmp_path / "out"
    code = main(["--input", str(bad), "--out-dir", str(out), *FAST])
    assert code != 0
    record = json.loads((out / "error.json").read_text())
    assert record["error"] == "GapError" and "1980-02" in record["message"]
    assert not (out / "summary.json").exists()
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"] == "GapError"


def test_log_of_nonpositive_fails(tmp_path):
    bad = write(tmp_path, "date,value\n1980-01,1\n1980-02,0\n1980-03,2\n")
    assert main(["--input", str(bad), "--log", "--out-dir", str(tmp_path / "o"), *FAST]) == 1


def test_cli_requires_input(tmp_path):
    with pytest.raises(SystemExit):
        main(["--out-dir", str(tmp_path)])


def test_parallel_chains_write_per_chain_outputs(tmp_path):
    s, _ = generate_synthetic("clean", 30, seed=1)
    cfg = RunConfig(hyper=HyperParams(n_iter=40, n_burn=10), out_dir=str(tmp_path),
                    chains=2)
    assert run_analysis(cfg, s) == 0
    assert (tmp_path / "chain_0" / "states.csv").exists()
    assert (tmp_path / "chain_1" / "weights.csv").exists()
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["n_draws"] == 80
    assert set(summary["split_rhat"]) == {"lambda_y", "lambda_level", "lambda_slope"}
