"""End-to-end command-line runs: outputs, manifests, bit-identical reruns."""

import numpy as np
import pytest

from clsna import GroupLabels, ModelParams
from clsna.cli import main
from clsna.construct import InteractionCounts
from clsna.formats import read_adjacency, write_adjacency, write_counts
from clsna.simulate import SimConfig, simulate


def read_all_bytes(directory):
    return {p.relative_to(directory).as_posix(): p.read_bytes()
            for p in sorted(directory.rglob("*")) if p.is_file()}


def small_series(tmp_path, seed=0, n=12, horizon=5):
    labels = GroupLabels(np.repeat([1, 2], n // 2))
    params = ModelParams(alpha=1.0, delta=1.0, gamma1w=0.4, gamma2w=0.2,
                         gammab=-0.3, tau2=1.0)
    y, _ = simulate(SimConfig(n_nodes=n, horizon=horizon, params=params,
                              labels=labels, seed=seed))
    path = tmp_path / "series.adj"
    write_adjacency(path, y, labels)
    return path


def small_counts_file(tmp_path):
    rng = np.random.default_rng(5)
    raw = np.triu(rng.integers(0, 20, size=(3, 6, 6)), 1)
    counts = InteractionCounts(counts=raw + raw.transpose(0, 2, 1),
                               node_ids=[f"m{i}" for i in range(6)],
                               labels=GroupLabels(np.repeat([1, 2], 3)))
    path = tmp_path / "raw.counts"
    write_counts(path, counts)
    return path


def test_simulate_is_deterministic_and_rerunnable(tmp_path):
    out1, out2, out3 = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert main(["simulate", "--preset", "polarization", "--seed", "7",
                 "--out", str(out1)]) == 0
    assert main(["simulate", "--preset", "polarization", "--seed", "7",
                 "--out", str(out2)]) == 0
    assert read_all_bytes(out1) == read_all_bytes(out2)
    assert main(["rerun", "--manifest", str(out1 / "manifest.json"),
                 "--out", str(out3)]) == 0
    assert read_all_bytes(out1) == read_all_bytes(out3)
    y, labels, _ = read_adjacency(out1 / "series.adj")
    assert y.n_nodes == 100 and y.horizon == 10


def test_simulate_presets_cover_designs(tmp_path):
    out = tmp_path / "flock"
    assert main(["simulate", "--preset", "si-table1-flocking", "--seed", "3",
                 "--out", str(out)]) == 0
    y, labels, _ = read_adjacency(out / "series.adj")
    assert y.n_nodes == 100 and y.horizon == 10
    assert labels.indices(1).size == 50
    out2 = tmp_path / "change"
    assert main(["simulate", "--preset", "si-table3-changepoint", "--seed", "3",
                 "--out", str(out2)]) == 0
    y2, _, _ = read_adjacency(out2 / "series.adj")
    assert y2.horizon == 10


def test_unknown_preset_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["simulate", "--preset", "nope", "--out", str(tmp_path / "x")])
    assert err.value.code == 2


def test_fit_writes_reports_and_reruns_bit_identically(tmp_path):
    series = small_series(tmp_path)
    out1, out2 = tmp_path / "fit1", tmp_path / "fit2"
    argv = ["fit", "--input", str(series), "--seed", "4", "--iterations",
            "200", "--burn-in", "80", "--out", str(out1)]
    assert main(argv) == 0
    for name in ("summary.csv", "auc.csv", "density.csv", "distances.csv",
                 "latent-mean.latent", "manifest.json"):
        assert (out1 / name).exists()
    header = (out1 / "summary.csv").read_text().splitlines()
    assert header[2].startswith("name,kind,mean")
    assert main(["rerun", "--manifest", str(out1 / "manifest.json"),
                 "--out", str(out2)]) == 0
    assert read_all_bytes(out1) == read_all_bytes(out2)


def test_fit_changepoint_outputs(tmp_path):
    series = small_series(tmp_path, horizon=6)
    out = tmp_path / "cp"
    assert main(["fit", "--input", str(series), "--seed", "1", "--iterations",
                 "150", "--burn-in", "60", "--changepoint", "4",
                 "--out", str(out)]) == 0
    assert (out / "dic.csv").exists()
    assert (out / "period-1" / "summary.csv").exists()
    assert (out / "period-2" / "summary.csv").exists()
    table = (out / "dic.csv").read_text().splitlines()
    assert table[2].startswith("4,")


def test_fit_select_changepoint_emits_table_and_best(tmp_path):
    series = small_series(tmp_path, horizon=6)
    out = tmp_path / "sel"
    assert main(["fit", "--input", str(series), "--seed", "1", "--iterations",
                 "150", "--burn-in", "60", "--select-changepoint", "3..4",
                 "--out", str(out)]) == 0
    lines = (out / "dic.csv").read_text().splitlines()
    assert [line.split(",")[0] for line in lines[2:]] == ["3", "4"]
    assert (out / "best" / "dic.csv").exists()
    assert (out / "best" / "period-1" / "summary.csv").exists()


def test_empty_candidate_range_is_usage_error(tmp_path):
    series = small_series(tmp_path, horizon=6)
    with pytest.raises(SystemExit) as err:
        main(["fit", "--input", str(series), "--select-changepoint", "9..4",
              "--out", str(tmp_path / "x")])
    assert err.value.code == 2


def test_fit_replicates_pool_summary(tmp_path):
    series = small_series(tmp_path)
    out = tmp_path / "reps"
    assert main(["fit", "--input", str(series), "--seed", "2", "--iterations",
                 "150", "--burn-in", "60", "--replicates", "2",
                 "--out", str(out)]) == 0
    assert (out / "rep-00" / "summary.csv").exists()
    assert (out / "rep-01" / "summary.csv").exists()
    pooled = (out / "pooled.csv").read_text().splitlines()
    assert pooled[1] == "name,mean,sd,n_replicates"
    assert len(pooled) == 2 + 7  # six parameters plus the overall AUC


def test_construct_policies_and_rerun(tmp_path):
    counts = small_counts_file(tmp_path)
    out1, out2 = tmp_path / "dyn", tmp_path / "dyn2"
    assert main(["construct", "--input", str(counts), "--policy",
                 "dynamic-mean", "--out", str(out1)]) == 0
    thresholds = (out1 / "thresholds.csv").read_text().splitlines()
    assert thresholds[1] == "time,threshold"
    assert len(thresholds) == 2 + 3
    assert main(["rerun", "--manifest", str(out1 / "manifest.json"),
                 "--out", str(out2)]) == 0
    assert read_all_bytes(out1) == read_all_bytes(out2)
    out3 = tmp_path / "static"
    assert main(["construct", "--input", str(counts), "--policy", "static",
                 "--theta", "10", "--out", str(out3)]) == 0
    y, labels, ids = read_adjacency(out3 / "series.adj")
    assert y.horizon == 3 and y.n_nodes == 6


def test_construct_flag_validation(tmp_path, capsys):
    counts = small_counts_file(tmp_path)
    code = main(["construct", "--input", str(counts), "--policy", "static",
                 "--out", str(tmp_path / "x")])
    assert code == 1
    assert "--theta" in capsys.readouterr().err
    code = main(["construct", "--input", str(counts), "--policy",
                 "dynamic-mean", "--theta", "3", "--out", str(tmp_path / "y")])
    assert code == 1


def test_parse_error_reports_line_number(tmp_path, capsys):
    bad = tmp_path / "bad.counts"
    bad.write_text("clsna-counts v1 N=2 T=1\n"
                   "node 0 a 1\n"
                   "node 1 b 2\n"
                   "count 1 0 1 oops\n")
    code = main(["construct", "--input", str(bad), "--policy", "dynamic-mean",
                 "--out", str(tmp_path / "x")])
    assert code == 1
    assert "line 4" in capsys.readouterr().err
