import csv
import os

import numpy as np
import pytest
from click.testing import CliRunner

from rankgossip import experiments as ex
from rankgossip.cli import main
from rankgossip.errors import EstimatorFailure, InvalidParameter

SMALL = ["--n", "30", "--ticks", "2000", "--trials", "3", "--record-every", "200"]


def _invoke(args, cwd):
    runner = CliRunner()
    with runner.isolated_filesystem(temp_dir=cwd):
        result = runner.invoke(main, args, catch_exceptions=False)
        files = {}
        for name in sorted(os.listdir(".")):
            with open(name) as fh:
                files[name] = fh.read()
    return result, files


def _rows(text):
    return list(csv.DictReader(text.splitlines()))


def test_rank_command_writes_trace_and_provenance(tmp_path):
    result, files = _invoke(["rank", *SMALL, "--out", "r.csv"], tmp_path)
    assert result.exit_code == 0, result.output
    assert set(files) == {"r.csv", "r.provenance.txt"}
    rows = _rows(files["r.csv"])
    assert list(rows[0]) == ["tick", "mean_error", "std_error"]
    assert [int(r["tick"]) for r in rows] == list(range(200, 2001, 200))
    errors = [float(r["mean_error"]) for r in rows]
    assert errors[-1] < errors[0]
    prov = files["r.provenance.txt"]
    assert "config.seed = 0" in prov and "graph.spectral_gap_async" in prov
    assert "result.async.final_mean_error" in result.output


def test_rank_both_samplings_write_two_files(tmp_path):
    result, files = _invoke(["rank", *SMALL, "--sampling", "both", "--out", "r.csv"], tmp_path)
    assert result.exit_code == 0
    assert {"r_async.csv", "r_uniform.csv", "r.provenance.txt"} == set(files)


def test_wilcoxon_command(tmp_path):
    result, files = _invoke(["wilcoxon", *SMALL, "--out", "w.csv"], tmp_path)
    assert result.exit_code == 0, result.output
    assert list(_rows(files["w.csv"])[0]) == ["tick", "mean_error", "std_error"]
    assert "test.p = " in result.output and "oracle.t_n = " in result.output


def test_trim_command_columns(tmp_path):
    args = ["trim", *SMALL, "--alpha", "0.2", "--epsilon", "0.2", "--out", "t.csv"]
    result, files = _invoke(args, tmp_path)
    assert result.exit_code == 0, result.output
    rows = _rows(files["t.csv"])
    assert list(rows[0]) == [
        "tick",
        "mean_error",
        "std_error",
        "original_mean_error",
        "original_std_error",
        "corrupted_mean_error",
    ]
    assert len({r["corrupted_mean_error"] for r in rows}) == 1
    assert "data.corrupted_count = 6" in files["t.provenance.txt"]


def test_spectral_command(tmp_path):
    result, _ = _invoke(["spectral", "--n", "500"], tmp_path)
    assert result.exit_code == 0
    line = next(l for l in result.output.splitlines() if l.startswith("spectral_gap_async"))
    assert float(line.split("=")[1]) == pytest.approx(2 / 499, rel=1e-9)


def test_reruns_are_byte_identical(tmp_path):
    args = ["trim", *SMALL, "--alpha", "0.1", "--out", "t.csv"]
    _, a = _invoke(args, tmp_path)
    _, b = _invoke(args, tmp_path)
    assert a == b
    _, c = _invoke(args + ["--seed", "1"], tmp_path)
    assert c["t.csv"] != a["t.csv"]


def test_exit_codes(tmp_path, monkeypatch):
    assert _invoke(["trim", *SMALL], tmp_path)[0].exit_code == 2
    assert _invoke(["rank", *SMALL, "--trials", "0"], tmp_path)[0].exit_code == 2
    assert _invoke(["rank", *SMALL, "--alpha", "0.7"], tmp_path)[0].exit_code == 2
    geo = ["rank", *SMALL, "--graph", "geometric", "--geo-radius", "0.001"]
    assert _invoke(geo, tmp_path)[0].exit_code == 3

    def explode(cfg):
        raise EstimatorFailure("non-finite weight", node=3, tick=12)

    monkeypatch.setattr(ex, "run_rank", explode)
    result = _invoke(["rank", *SMALL], tmp_path)[0]
    assert result.exit_code == 4
    assert "tick=12" in result.output


def test_config_file_and_flag_precedence(tmp_path):
    cfg_file = tmp_path / "run.ini"
    cfg_file.write_text("n = 20\nticks = 1000\ntrials = 2\nrecord-every = 500\nseed = 7\n")
    result, files = _invoke(["rank", "--config", str(cfg_file), "--seed", "8", "--out", "o.csv"], tmp_path)
    assert result.exit_code == 0, result.output
    prov = files["o.provenance.txt"]
    assert "config.n = 20" in prov and "config.seed = 8" in prov
    assert len(_rows(files["o.csv"])) == 2

    cfg_file.write_text("[experiment]\nbogus = 1\n")
    assert _invoke(["rank", "--config", str(cfg_file)], tmp_path)[0].exit_code == 2


def test_config_merging_and_validation():
    cfg = ex.ExperimentConfig.from_mapping({"n": "40", "ties": "auto", "alpha": "none"})
    assert cfg.n == 40 and cfg.ties is None and cfg.alpha is None
    assert cfg.merged({"n": 50, "alpha": None}).n == 50
    with pytest.raises(InvalidParameter):
        ex.ExperimentConfig.from_mapping({"n": "4.5"})
    with pytest.raises(InvalidParameter):
        ex.ExperimentConfig(experiment="trim", sampling="both", alpha=0.1).validate()
    with pytest.raises(InvalidParameter):
        ex.ExperimentConfig(experiment="wilcoxon", n=10, n1=10).validate()


def test_trim_runner_targets_and_ties():
    cfg = ex.ExperimentConfig(
        experiment="trim", n=40, ticks=4000, trials=2, record_every=1000, alpha=0.1, epsilon=0.2
    )
    out = ex.run_trim(cfg)
    prov = out.provenance
    assert prov["oracle.clean_trimmed_mean"] == pytest.approx(20.5)
    assert prov["oracle.naive_mean_error"] > 0
    tr = out.traces["async"]
    assert tr.columns == ("adaptive", "original")
    assert np.all(np.isfinite(tr.values))


def test_workers_do_not_change_results():
    base = dict(experiment="wilcoxon", n=20, ticks=1000, trials=3, record_every=250)
    a = ex.run_wilcoxon(ex.ExperimentConfig(**base)).traces["async"]
    b = ex.run_wilcoxon(ex.ExperimentConfig(**base, workers=2)).traces["async"]
    assert a.values.tobytes() == b.values.tobytes()


@pytest.mark.slow
def test_async_sampling_not_worse_than_uniform():
    cfg = ex.ExperimentConfig(
        experiment="rank", graph="ws", n=100, ticks=20_000, trials=20, sampling="both",
        record_every=20_000,
    )
    traces = ex.run_rank(cfg).traces
    assert traces["async"].mean()[-1] <= 1.2 * traces["uniform"].mean()[-1]


@pytest.mark.slow
def test_untrimmed_clean_run_reaches_plain_mean():
    cfg = ex.ExperimentConfig(
        experiment="trim", n=50, alpha=0.0, ticks=100_000, trials=3, record_every=100_000
    )
    tr = ex.run_trim(cfg).traces["async"]
    assert tr.final("adaptive").max() < 1e-3
    assert tr.final("original").max() < 1e-3
