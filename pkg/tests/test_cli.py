"""Data ingestion, file formats, and the four batch commands."""

import time

import numpy as np
import pytest

from copulagraph.cli import main, parse_bins, parse_config
from copulagraph.dataio import (ColumnSchema, default_schema, export_csv, ingest_csv,
                                load_trace, read_edgelist, read_matrix_csv,
                                read_schema, save_trace, write_schema)
from copulagraph.bdmcmc import ChainConfig, run_chain
from copulagraph.latent import MixedDataset
from copulagraph.simgen import MarginalRecipe, gen_mixed_data


@pytest.fixture
def tiny_files(tmp_path):
    schema = tmp_path / "schema.csv"
    data = tmp_path / "data.csv"
    schema.write_text("age,continuous\nsmoking,ordinal,never|stopped|smoking\n")
    data.write_text("age,smoking\n40,never\n55,NA\n61,smoking\n")
    return data, schema


def test_ingest_missing_mask(tiny_files):
    data, schema = tiny_files
    ds = ingest_csv(data, schema)
    assert ds.n == 3 and ds.p == 2
    assert ds.missing.sum() == 1
    assert ds.missing[1, 1]
    assert ds.values[2, 1] == 2.0  # level index per schema order


def test_ingest_unknown_level_names_cell(tiny_files):
    data, schema = tiny_files
    data.write_text("age,smoking\n40,never\n55,vaping\n")
    with pytest.raises(ValueError, match=r"row 2.*smoking.*vaping"):
        ingest_csv(data, schema)


def test_ingest_unknown_column(tiny_files):
    data, schema = tiny_files
    data.write_text("age,weight\n40,80\n41,81\n")
    with pytest.raises(ValueError, match="unknown column"):
        ingest_csv(data, schema)


def test_ingest_all_missing_column(tiny_files):
    data, schema = tiny_files
    data.write_text("age,smoking\n40,NA\n55,NA\n")
    with pytest.raises(ValueError, match="all-missing"):
        ingest_csv(data, schema)


def test_ingest_bad_count_cell(tmp_path):
    schema = tmp_path / "s.csv"
    data = tmp_path / "d.csv"
    schema.write_text("k,count\nx,continuous\n")
    data.write_text("k,x\n3,0.5\n-1,0.7\n")
    with pytest.raises(ValueError, match="nonnegative integers"):
        ingest_csv(data, schema)


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    data = gen_mixed_data(np.eye(5), 40, MarginalRecipe.cycle(5), rng)
    data.missing[3, 2] = True
    data = MixedDataset(data.values, data.kinds, data.missing)
    schema = default_schema(data)
    path = tmp_path / "d.csv"
    export_csv(data, schema, path)
    back = ingest_csv(path, _write(schema, tmp_path / "s.csv"))
    assert back.kinds == data.kinds
    assert np.array_equal(back.missing, data.missing)
    obs = ~data.missing
    assert np.allclose(back.values[obs], data.values[obs], rtol=1e-5)


def _write(schema, path):
    write_schema(schema, path)
    return path


def test_schema_round_trip(tmp_path):
    cols = [ColumnSchema("a", "continuous"),
            ColumnSchema("b", "binary", ("no", "yes")),
            ColumnSchema("c", "ordinal", ("lo", "mid", "hi"))]
    path = tmp_path / "s.csv"
    write_schema(cols, path)
    assert read_schema(path) == cols


def test_schema_validation():
    with pytest.raises(ValueError):
        ColumnSchema("a", "ordinal")  # discrete without levels
    with pytest.raises(ValueError):
        ColumnSchema("a", "continuous", ("x",))
    with pytest.raises(ValueError):
        ColumnSchema("a", "binary", ("x", "y", "z"))


def test_parse_config_repeated_keys(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\nseed = 3\nscenario = random 10 30\n"
                   "scenario = cluster 20 70\n")
    out = parse_config(cfg)
    assert out["seed"] == ["3"]
    assert len(out["scenario"]) == 2


def test_parse_bins_tubiana_spec():
    bins = parse_bins("0;1-45;46-90;91-135;>135")
    assert bins == [(0.0, 1.0), (1.0, 46.0), (46.0, 91.0), (91.0, 136.0),
                    (136.0, float("inf"))]
    assert parse_bins("40:50;50:60") == [(40.0, 50.0), (50.0, 60.0)]


def test_trace_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    data = gen_mixed_data(np.eye(3), 25, MarginalRecipe.cycle(3), rng)
    trace = run_chain(data, ChainConfig(iterations=50, burn_in=10, seed=5, thin=10))
    path = tmp_path / "trace.npz"
    save_trace(trace, path)
    back = load_trace(path)
    assert back.p == trace.p
    assert np.array_equal(back.size_trace, trace.size_trace)
    assert np.array_equal(back.thinned_k, trace.thinned_k)
    assert back.total_weight == trace.total_weight


def test_simulate_command_writes_replicates(tmp_path):
    cfg = tmp_path / "sim.cfg"
    out = tmp_path / "sims"
    cfg.write_text(f"out = {out}\nseed = 9\nreplicates = 2\n"
                   "scenario = random 10 30\n")
    assert main(["simulate", "--config", str(cfg)]) == 0
    rep = out / "random_p10_n30" / "rep000"
    lines = (rep / "data.csv").read_text().splitlines()
    assert len(lines) == 31  # header + 30 rows
    assert len(lines[0].split(",")) == 10
    truth = read_edgelist(rep / "truth_graph.edgelist", 10)
    K = read_matrix_csv(rep / "truth_precision.csv", has_header=False)
    assert K.shape == (10, 10)
    assert truth.p == 10
    other = (out / "random_p10_n30" / "rep001" / "data.csv").read_text()
    assert other != (rep / "data.csv").read_text()


def test_simulate_scenario_matrix_in_one_spec(tmp_path):
    cfg = tmp_path / "sim.cfg"
    out = tmp_path / "sims"
    lines = [f"out = {out}", "seed = 1", "replicates = 1"]
    for p, n in [(10, 30), (10, 100)]:
        for fam in ("random", "cluster", "scale_free"):
            lines.append(f"scenario = {fam} {p} {n}")
    cfg.write_text("\n".join(lines) + "\n")
    assert main(["simulate", "--config", str(cfg)]) == 0
    dirs = sorted(d.name for d in out.iterdir())
    assert len(dirs) == 6


def test_fit_smoke_writes_all_outputs(tmp_path):
    """Tiny example: p=5, n=40, 2k iterations completes fast and writes the
    full artifact set; rerun with the same seed is byte-identical except for
    run_meta (wall time)."""
    sim_cfg = tmp_path / "sim.cfg"
    sims = tmp_path / "sims"
    sim_cfg.write_text(f"out = {sims}\nseed = 4\nreplicates = 1\n"
                       "scenario = random 5 40\n")
    assert main(["simulate", "--config", str(sim_cfg)]) == 0
    rep = sims / "random_p5_n40" / "rep000"
    fit_cfg = tmp_path / "fit.cfg"
    out1 = tmp_path / "fit1"
    fit_cfg.write_text(f"data = {rep / 'data.csv'}\nschema = {rep / 'schema.csv'}\n"
                       f"out = {out1}\niterations = 2000\nburn_in = 500\nseed = 2\n")
    t0 = time.perf_counter()
    assert main(["fit", "--config", str(fit_cfg)]) == 0
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    names = ["edge_probs.csv", "selected_edges.csv", "graph.dot",
             "size_trace.csv", "run_meta.txt", "trace.npz"]
    for name in names:
        assert (out1 / name).exists(), name
    probs = read_matrix_csv(out1 / "edge_probs.csv")
    assert probs.shape == (5, 5)
    assert probs.min() >= 0.0 and probs.max() <= 1.0
    meta = (out1 / "run_meta.txt").read_text()
    assert "seed = 2" in meta and "threshold = 0.5" in meta
    st = (out1 / "size_trace.csv").read_text().splitlines()
    assert st[0] == "iteration,edge_count,waiting_time"
    assert len(st) == 2001
    # deterministic rerun
    out2 = tmp_path / "fit2"
    fit_cfg.write_text(f"data = {rep / 'data.csv'}\nschema = {rep / 'schema.csv'}\n"
                       f"out = {out2}\niterations = 2000\nburn_in = 500\nseed = 2\n")
    assert main(["fit", "--config", str(fit_cfg)]) == 0
    for name in names:
        if name == "run_meta.txt":
            continue
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


def test_fit_eval_pipeline(tmp_path):
    sim_cfg = tmp_path / "sim.cfg"
    sims = tmp_path / "sims"
    sim_cfg.write_text(f"out = {sims}\nseed = 6\nreplicates = 2\n"
                       "scenario = random 5 40\n")
    assert main(["simulate", "--config", str(sim_cfg)]) == 0
    scen = sims / "random_p5_n40"
    fit_cfg = tmp_path / "fit.cfg"
    fits = tmp_path / "fits"
    fit_cfg.write_text(f"replicates_dir = {scen}\nout = {fits}\n"
                       "iterations = 1200\nburn_in = 300\nseed = 3\njobs = 2\n")
    assert main(["fit", "--config", str(fit_cfg)]) == 0
    assert (fits / "rep000" / "edge_probs.csv").exists()
    assert (fits / "rep001" / "edge_probs.csv").exists()
    eval_cfg = tmp_path / "eval.cfg"
    metrics = tmp_path / "metrics"
    eval_cfg.write_text(f"fits = {fits}\ntruth = {scen}\nout = {metrics}\n")
    assert main(["eval", "--config", str(eval_cfg)]) == 0
    rows = (metrics / "metrics.csv").read_text().splitlines()
    assert rows[0] == "replicate,f1,mse,auc"
    assert len(rows) == 3
    agg = (metrics / "metrics_aggregate.csv").read_text().splitlines()
    assert agg[0] == "metric,mean,sd"
    f1_line = [ln for ln in agg if ln.startswith("f1,")][0]
    mean, sd = map(float, f1_line.split(",")[1:])
    assert 0.0 <= mean <= 1.0 and sd >= 0.0
    assert (metrics / "roc_rep000.csv").exists()


def test_eval_single_replicate_aggregate_equals_replicate(tmp_path):
    sims = tmp_path / "sims"
    (tmp_path / "sim.cfg").write_text(
        f"out = {sims}\nseed = 8\nreplicates = 1\nscenario = random 5 40\n")
    assert main(["simulate", "--config", str(tmp_path / "sim.cfg")]) == 0
    scen = sims / "random_p5_n40"
    fits = tmp_path / "fits"
    (tmp_path / "fit.cfg").write_text(
        f"replicates_dir = {scen}\nout = {fits}\niterations = 800\n"
        "burn_in = 200\nseed = 1\n")
    assert main(["fit", "--config", str(tmp_path / "fit.cfg")]) == 0
    metrics = tmp_path / "m"
    (tmp_path / "eval.cfg").write_text(
        f"fits = {fits}\ntruth = {scen}\nout = {metrics}\n")
    assert main(["eval", "--config", str(tmp_path / "eval.cfg")]) == 0
    row = (metrics / "metrics.csv").read_text().splitlines()[1].split(",")
    agg = {ln.split(",")[0]: float(ln.split(",")[1])
           for ln in (metrics / "metrics_aggregate.csv").read_text().splitlines()[1:]}
    assert agg["f1"] == pytest.approx(float(row[1]))
    assert agg["mse"] == pytest.approx(float(row[2]))


def test_ppc_command_deterministic(tmp_path):
    sims = tmp_path / "sims"
    (tmp_path / "sim.cfg").write_text(
        f"out = {sims}\nseed = 11\nreplicates = 1\nscenario = random 5 60\n")
    assert main(["simulate", "--config", str(tmp_path / "sim.cfg")]) == 0
    rep = sims / "random_p5_n60" / "rep000"
    fit_out = tmp_path / "fit"
    (tmp_path / "fit.cfg").write_text(
        f"data = {rep / 'data.csv'}\nschema = {rep / 'schema.csv'}\n"
        f"out = {fit_out}\niterations = 1000\nburn_in = 200\nseed = 5\nthin = 20\n")
    assert main(["fit", "--config", str(tmp_path / "fit.cfg")]) == 0
    names = [c.name for c in read_schema(rep / "schema.csv")]
    ppc_out1 = tmp_path / "ppc1"
    (tmp_path / "ppc.cfg").write_text(
        f"fit = {fit_out}\ndata = {rep / 'data.csv'}\n"
        f"schema = {rep / 'schema.csv'}\nout = {ppc_out1}\nseed = 7\ndraws = 50\n"
        f"check = {names[4]}|{names[0]}|<0;0:1;>0\n")
    assert main(["ppc", "--config", str(tmp_path / "ppc.cfg")]) == 0
    out_file = ppc_out1 / f"ppc_{names[4]}_given_{names[0]}.csv"
    lines = out_file.read_text().splitlines()
    assert lines[0] == "bin,level,frequency,source"
    assert any(",empirical" in ln for ln in lines[1:])
    assert any(",predictive" in ln for ln in lines[1:])
    ppc_out2 = tmp_path / "ppc2"
    (tmp_path / "ppc.cfg").write_text(
        f"fit = {fit_out}\ndata = {rep / 'data.csv'}\n"
        f"schema = {rep / 'schema.csv'}\nout = {ppc_out2}\nseed = 7\ndraws = 50\n"
        f"check = {names[4]}|{names[0]}|<0;0:1;>0\n")
    assert main(["ppc", "--config", str(tmp_path / "ppc.cfg")]) == 0
    assert out_file.read_bytes() == \
        (ppc_out2 / f"ppc_{names[4]}_given_{names[0]}.csv").read_bytes()


def test_ppc_tubiana_bin_spec_accepted(tmp_path):
    assert parse_bins("0;1-45;46-90;91-135;>135")[-1][1] == float("inf")


def test_cli_error_exit_codes(tmp_path, capsys):
    assert main(["fit", "--config", str(tmp_path / "absent.cfg")]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("data = /nonexistent.csv\nschema = /nonexistent2\nout = x\n")
    assert main(["fit", "--config", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "error" in err


def test_cli_rejects_non_identity_prior_scale(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("data = d\nschema = s\nout = x\nprior_scale = wishful\n")
    assert main(["fit", "--config", str(cfg)]) == 1
