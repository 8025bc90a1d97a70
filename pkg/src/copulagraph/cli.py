"""Batch front door: `copulagraph {simulate|fit|eval|ppc} --config <path>`.

Config files are flat `key = value` text; `scenario` and `check` keys may
repeat. CLI flags (--seed, --iterations, --burn-in, --threshold, --jobs)
override file values. Every command is deterministic given (inputs, seed) and
exits nonzero exactly when an error is reported.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bdmcmc import (ChainConfig, ChainTrace, edge_probabilities, mean_precision,
                     run_replicates, select_graph)
from .dataio import (ColumnSchema, default_schema, export_csv, ingest_csv,
                     load_trace, read_edgelist, read_matrix_csv, read_schema,
                     save_trace, write_edgelist, write_matrix_csv, write_schema)
from .evalkit import (conditional_histogram, f1_score, mse, posterior_predictive_sample,
                      roc_points)
from .graphs import Edge, to_dot
from .simgen import (GRAPH_FAMILIES, MarginalRecipe, gen_graph, gen_missing,
                     gen_mixed_data, gen_precision)


class ManifestError(ValueError):
    pass


def parse_config(path: str | Path) -> dict[str, list[str]]:
    """Flat `key = value` lines; repeated keys accumulate in order."""
    out: dict[str, list[str]] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ManifestError(f"{path}:{lineno}: expected `key = value`")
        key, _, value = line.partition("=")
        out.setdefault(key.strip(), []).append(value.strip())
    return out


@dataclass
class RunManifest:
    """Validated invocation: paths checked at parse time."""

    command: str
    out_dir: Path
    seed: int = 0
    iterations: int = 20000
    burn_in: int = 10000
    b_prior: float = 3.0
    prior_edge_logit: float = 0.0
    threshold: float = 0.5
    thin: int = 100
    jobs: int = 1
    latent_mode: str = "rank"
    data: Path | None = None
    schema: Path | None = None
    replicates_dir: Path | None = None
    fit_dir: Path | None = None
    truth_dir: Path | None = None
    scenarios: list[tuple[str, int, int]] = field(default_factory=list)
    replicates: int = 1
    recipe_kinds: list[str] | None = None
    ordinal_levels: int = 4
    count_rate: float = 4.0
    binary_split: float = 0.5
    missing_fraction: float = 0.0
    draws: int = 200
    checks: list[tuple[str, str, str]] = field(default_factory=list)

    def chain_config(self) -> ChainConfig:
        return ChainConfig(iterations=self.iterations, burn_in=self.burn_in,
                           b_prior=self.b_prior,
                           prior_edge_logit=self.prior_edge_logit,
                           seed=self.seed, thin=self.thin,
                           latent_mode=self.latent_mode)


def _single(cfg: dict[str, list[str]], key: str, default=None) -> str | None:
    vals = cfg.get(key)
    if not vals:
        return default
    if len(vals) > 1:
        raise ManifestError(f"config key {key!r} given more than once")
    return vals[0]


def _existing_path(value: str, key: str) -> Path:
    p = Path(value)
    if not p.exists():
        raise ManifestError(f"{key} = {value}: path does not exist")
    return p


def build_manifest(command: str, cfg: dict[str, list[str]],
                   overrides: argparse.Namespace) -> RunManifest:
    man = RunManifest(command=command,
                      out_dir=Path(_single(cfg, "out", "out")))
    for key, attr, cast in [("seed", "seed", int), ("iterations", "iterations", int),
                            ("burn_in", "burn_in", int), ("b_prior", "b_prior", float),
                            ("prior_edge_logit", "prior_edge_logit", float),
                            ("threshold", "threshold", float), ("thin", "thin", int),
                            ("jobs", "jobs", int), ("latent", "latent_mode", str),
                            ("replicates", "replicates", int),
                            ("ordinal_levels", "ordinal_levels", int),
                            ("count_rate", "count_rate", float),
                            ("binary_split", "binary_split", float),
                            ("missing_fraction", "missing_fraction", float),
                            ("draws", "draws", int)]:
        raw = _single(cfg, key)
        if raw is not None:
            setattr(man, attr, cast(raw))
    prior_scale = _single(cfg, "prior_scale", "identity")
    if prior_scale != "identity":
        raise ManifestError(
            "prior_scale must be `identity`: the exact normalizing-constant "
            "ratio used by the rates holds only for the identity scale")
    for flag in ("seed", "iterations", "burn_in", "threshold", "jobs"):
        val = getattr(overrides, flag, None)
        if val is not None:
            setattr(man, flag, val)
    if not 0.0 < man.threshold < 1.0:
        raise ManifestError("threshold must lie strictly between 0 and 1")

    if command == "simulate":
        for spec in cfg.get("scenario", []):
            parts = spec.split()
            if len(parts) != 3:
                raise ManifestError(f"scenario {spec!r}: expected `family p n`")
            family, p, n = parts[0], int(parts[1]), int(parts[2])
            if family not in GRAPH_FAMILIES:
                raise ManifestError(f"unknown graph family {family!r}")
            man.scenarios.append((family, p, n))
        if not man.scenarios:
            family = _single(cfg, "family")
            p = _single(cfg, "p")
            n = _single(cfg, "n")
            if not (family and p and n):
                raise ManifestError("simulate needs `scenario = family p n` lines "
                                    "or family/p/n keys")
            man.scenarios.append((family, int(p), int(n)))
        kinds = _single(cfg, "kinds")
        if kinds:
            man.recipe_kinds = [k.strip() for k in kinds.split(",")]
    elif command == "fit":
        rep = _single(cfg, "replicates_dir")
        if rep:
            man.replicates_dir = _existing_path(rep, "replicates_dir")
        else:
            data = _single(cfg, "data")
            schema = _single(cfg, "schema")
            if not (data and schema):
                raise ManifestError("fit needs data+schema or replicates_dir")
            man.data = _existing_path(data, "data")
            man.schema = _existing_path(schema, "schema")
    elif command == "eval":
        fits = _single(cfg, "fits")
        truth = _single(cfg, "truth")
        if not (fits and truth):
            raise ManifestError("eval needs `fits` and `truth` directories")
        man.fit_dir = _existing_path(fits, "fits")
        man.truth_dir = _existing_path(truth, "truth")
    elif command == "ppc":
        fit = _single(cfg, "fit")
        data = _single(cfg, "data")
        schema = _single(cfg, "schema")
        if not (fit and data and schema):
            raise ManifestError("ppc needs `fit`, `data` and `schema`")
        man.fit_dir = _existing_path(fit, "fit")
        man.data = _existing_path(data, "data")
        man.schema = _existing_path(schema, "schema")
        for spec in cfg.get("check", []):
            parts = [s.strip() for s in spec.split("|")]
            if len(parts) != 3:
                raise ManifestError(f"check {spec!r}: expected `target|given|bins`")
            man.checks.append((parts[0], parts[1], parts[2]))
        if not man.checks:
            raise ManifestError("ppc needs at least one `check = target|given|bins`")
    else:
        raise ManifestError(f"unknown command {command!r}")
    return man


def _child_seed(base: int, *key: int) -> int:
    return int(np.random.SeedSequence([base, *key]).generate_state(1)[0])


def cmd_simulate(man: RunManifest) -> None:
    for family, p, n in man.scenarios:
        scen_id = f"{family}_p{p}_n{n}"
        for r in range(man.replicates):
            rng = np.random.default_rng(
                np.random.SeedSequence([man.seed, hash(scen_id) & 0xFFFF, r]))
            rep_dir = man.out_dir / scen_id / f"rep{r:03d}"
            rep_dir.mkdir(parents=True, exist_ok=True)
            graph = gen_graph(family, p, rng)
            K = gen_precision(graph, rng)
            if man.recipe_kinds:
                kinds = [man.recipe_kinds[j % len(man.recipe_kinds)] for j in range(p)]
                recipe = MarginalRecipe(tuple(kinds),
                                        ordinal_levels=man.ordinal_levels,
                                        count_rate=man.count_rate,
                                        binary_split=man.binary_split)
            else:
                recipe = MarginalRecipe.cycle(p, ordinal_levels=man.ordinal_levels,
                                              count_rate=man.count_rate,
                                              binary_split=man.binary_split)
            data = gen_mixed_data(K, n, recipe, rng)
            if man.missing_fraction > 0:
                data = gen_missing(data, man.missing_fraction, rng)
            schema = default_schema(data)
            export_csv(data, schema, rep_dir / "data.csv")
            write_schema(schema, rep_dir / "schema.csv")
            write_edgelist(graph, rep_dir / "truth_graph.edgelist")
            write_matrix_csv(K, rep_dir / "truth_precision.csv")


def _write_fit_outputs(trace: ChainTrace, names: list[str], out: Path,
                       threshold: float, meta: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    probs = edge_probabilities(trace)
    kbar = mean_precision(trace)
    selected = select_graph(probs, threshold, kbar)
    write_matrix_csv(probs, out / "edge_probs.csv", header=names)
    lines = ["i,j,prob,sign"]
    for e in selected.edges:
        lines.append(f"{e.i},{e.j},{e.prob:.6g},{e.sign}")
    (out / "selected_edges.csv").write_text("\n".join(lines) + "\n")
    labels = {Edge(e.i, e.j): e.sign for e in selected.edges}
    (out / "graph.dot").write_text(to_dot(selected.graph, names, labels))
    st_lines = ["iteration,edge_count,waiting_time"]
    for it, count, w in trace.size_trace:
        st_lines.append(f"{int(it)},{int(count)},{w:.6g}")
    (out / "size_trace.csv").write_text("\n".join(st_lines) + "\n")
    save_trace(trace, out / "trace.npz")
    meta_lines = [f"{k} = {v}" for k, v in meta.items()]
    (out / "run_meta.txt").write_text("\n".join(meta_lines) + "\n")


def cmd_fit(man: RunManifest) -> None:
    t0 = time.perf_counter()
    if man.replicates_dir is not None:
        rep_dirs = sorted(d for d in man.replicates_dir.iterdir()
                          if d.is_dir() and d.name.startswith("rep"))
        if not rep_dirs:
            raise ManifestError(f"no rep*/ directories under {man.replicates_dir}")
        tasks = []
        for idx, d in enumerate(rep_dirs):
            data = ingest_csv(d / "data.csv", d / "schema.csv")
            cfg = ChainConfig(iterations=man.iterations, burn_in=man.burn_in,
                              b_prior=man.b_prior,
                              prior_edge_logit=man.prior_edge_logit,
                              seed=_child_seed(man.seed, idx), thin=man.thin,
                              latent_mode=man.latent_mode)
            tasks.append((data, cfg, None))
        traces = run_replicates(tasks, jobs=man.jobs)
        for d, (data, cfg, _), trace in zip(rep_dirs, tasks, traces):
            names = [c.name for c in read_schema(d / "schema.csv")]
            meta = {"seed": cfg.seed, "iterations": cfg.iterations,
                    "burn_in": cfg.burn_in, "threshold": man.threshold,
                    "b_prior": cfg.b_prior, "data": d / "data.csv",
                    "version": __version__,
                    "wall_time_s": f"{time.perf_counter() - t0:.3f}"}
            _write_fit_outputs(trace, names, man.out_dir / d.name,
                               man.threshold, meta)
        return
    data = ingest_csv(man.data, man.schema)
    names = [c.name for c in read_schema(man.schema)]
    cfg = man.chain_config()
    trace = run_replicates([(data, cfg, None)], jobs=1)[0]
    meta = {"seed": cfg.seed, "iterations": cfg.iterations,
            "burn_in": cfg.burn_in, "threshold": man.threshold,
            "b_prior": cfg.b_prior, "data": man.data, "version": __version__,
            "wall_time_s": f"{time.perf_counter() - t0:.3f}"}
    _write_fit_outputs(trace, names, man.out_dir, man.threshold, meta)


def cmd_eval(man: RunManifest) -> None:
    truth_reps = sorted(d for d in man.truth_dir.iterdir()
                        if d.is_dir() and d.name.startswith("rep"))
    if not truth_reps:
        # allow pointing at a single replicate pair
        truth_reps = [man.truth_dir]
    rows = []
    man.out_dir.mkdir(parents=True, exist_ok=True)
    for d in truth_reps:
        fit_dir = man.fit_dir / d.name if d != man.truth_dir else man.fit_dir
        probs_file = fit_dir / "edge_probs.csv"
        truth_file = d / "truth_graph.edgelist"
        if not probs_file.exists():
            raise ManifestError(f"missing fit output {probs_file}")
        if not truth_file.exists():
            raise ManifestError(f"missing truth file {truth_file}")
        probs = read_matrix_csv(probs_file)
        p = probs.shape[0]
        truth = read_edgelist(truth_file, p)
        est = select_graph(probs, man.threshold).graph
        f1 = f1_score(est, truth)
        mse_val = mse(probs, truth)
        try:
            roc = roc_points(probs, truth)
            auc = roc.auc()
            roc_path = man.out_dir / f"roc_{d.name}.csv"
            lines = ["fpr,tpr"] + [f"{a:.6g},{b:.6g}" for a, b in zip(roc.fpr, roc.tpr)]
            roc_path.write_text("\n".join(lines) + "\n")
        except ValueError:
            auc = float("nan")
        rows.append((d.name, f1, mse_val, auc))
    lines = ["replicate,f1,mse,auc"]
    for name, f1, m, a in rows:
        lines.append(f"{name},{f1:.6g},{m:.6g},{a:.6g}")
    (man.out_dir / "metrics.csv").write_text("\n".join(lines) + "\n")
    arr = np.array([[r[1], r[2], r[3]] for r in rows], dtype=float)
    agg = ["metric,mean,sd"]
    for k, metric in enumerate(("f1", "mse", "auc")):
        col = arr[:, k]
        col = col[~np.isnan(col)]
        mean = col.mean() if col.size else float("nan")
        sd = col.std(ddof=1) if col.size > 1 else 0.0
        agg.append(f"{metric},{mean:.6g},{sd:.6g}")
    (man.out_dir / "metrics_aggregate.csv").write_text("\n".join(agg) + "\n")


def parse_bins(spec: str) -> list[tuple[float, float]]:
    """Bin tokens separated by `;`: `v` -> [v, v+1); `a-b` -> [a, b+1);
    `a:b` -> [a, b); `>c` -> [c+1, inf); `<c` -> [-inf, c)."""
    bins = []
    for token in spec.split(";"):
        token = token.strip()
        if not token:
            continue
        if token.startswith(">"):
            c = float(token[1:])
            bins.append((c + 1.0, float("inf")))
        elif token.startswith("<"):
            bins.append((float("-inf"), float(token[1:])))
        elif ":" in token:
            a, b = token.split(":")
            bins.append((float(a), float(b)))
        elif "-" in token[1:]:  # allow leading minus sign
            k = token.index("-", 1)
            bins.append((float(token[:k]), float(token[k + 1:]) + 1.0))
        else:
            v = float(token)
            bins.append((v, v + 1.0))
    if not bins:
        raise ManifestError(f"empty bin spec {spec!r}")
    return bins


def cmd_ppc(man: RunManifest) -> None:
    trace = load_trace(man.fit_dir / "trace.npz")
    data = ingest_csv(man.data, man.schema)
    schema = read_schema(man.schema)
    names = [c.name for c in schema]
    rng = np.random.default_rng(man.seed)
    predictive = posterior_predictive_sample(trace, data, man.draws, rng)
    man.out_dir.mkdir(parents=True, exist_ok=True)
    for target_name, given_name, binspec in man.checks:
        for nm in (target_name, given_name):
            if nm not in names:
                raise ManifestError(f"unknown column {nm!r} in ppc check")
        target = names.index(target_name)
        given = names.index(given_name)
        bins = parse_bins(binspec)
        emp = conditional_histogram(data, target, given, bins)
        levels = list(emp.levels)
        # pool predictive draws into one table on the empirical level set
        pooled = np.zeros_like(emp.counts)
        for pd in predictive:
            tab = conditional_histogram(pd, target, given, bins, levels=levels)
            pooled += tab.counts
        rowsum = pooled.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            pred_freqs = np.where(rowsum > 0, pooled / rowsum, np.nan)
        lines = ["bin,level,frequency,source"]
        for b, label in enumerate(emp.bin_labels):
            for L, lv in enumerate(levels):
                lines.append(f"{label},{lv:g},{emp.freqs[b, L]:.6g},empirical")
                lines.append(f"{label},{lv:g},{pred_freqs[b, L]:.6g},predictive")
        out = man.out_dir / f"ppc_{target_name}_given_{given_name}.csv"
        out.write_text("\n".join(lines) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="copulagraph",
        description="Graph structure learning for mixed data via birth-death MCMC")
    parser.add_argument("command", choices=["simulate", "fit", "eval", "ppc"])
    parser.add_argument("--config", required=True)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--iterations", type=int)
    parser.add_argument("--burn-in", dest="burn_in", type=int)
    parser.add_argument("--threshold", type=float)
    parser.add_argument("--jobs", type=int)
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config)
        man = build_manifest(args.command, cfg, args)
        {"simulate": cmd_simulate, "fit": cmd_fit,
         "eval": cmd_eval, "ppc": cmd_ppc}[args.command](man)
    except Exception as err:  # noqa: BLE001 - single exit path, nonzero status
        print(f"copulagraph {args.command}: error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
