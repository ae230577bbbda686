"""Command-line entry point: ``corrnet <subcommand> ...``.

Exit status: 0 on success, 1 when a stage invariant fails, 3 on a package
error (bad parameters, malformed files, stage failure).  argparse uses 2
for usage errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import _accel
from .corr import PEARSON, SPEARMAN, corr_matrix, load_corr, mse_rows, save_corr, upper_tri
from .dataset import WindowSpec, assemble, load_dataset, save_dataset
from .dynamics import (KINDS, OscillatorParams, default_sim, draw_frequencies, load_series,
                       save_series, simulate, sync_error)
from .embed import PREDICTED, TRUE, EmbedConfig, cluster_report, embed_2d
from .errors import CorrnetError, ParameterError
from .ingest import load_csv_matrix
from .mlp import TrainConfig, init_model, load_model, predict, save_model, train
from .netgen import Graph, gen_er, gen_sf, select_nodes
from .pipeline import (ExperimentConfig, make_graph, run_ablation, run_pipeline, run_sweep,
                       verify_manifest)
from .plots import line_svg, scatter_svg

EXIT_INVARIANT = 1
EXIT_ERROR = 3


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _strs(text: str) -> list[str]:
    return [v.strip().upper() for v in text.split(",") if v.strip()]


# --------------------------------------------------------------------------
# config-driven commands

def _config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="experiment config JSON")
    g = p.add_argument_group("config overrides")
    g.add_argument("--seed", type=int)
    g.add_argument("--name")
    g.add_argument("--model", dest="net_model", choices=["ER", "SF"])
    g.add_argument("--nodes", type=int)
    g.add_argument("--mean-degree", type=float)
    g.add_argument("--attach", type=int)
    g.add_argument("--realizations", type=int)
    g.add_argument("--kind", choices=KINDS)
    g.add_argument("--couplings", type=_floats)
    g.add_argument("--length", type=int)
    g.add_argument("--dt", type=float)
    g.add_argument("--stride", type=int)
    g.add_argument("--spread", choices=["std", "variance"])
    g.add_argument("--method", choices=[PEARSON, SPEARMAN])
    g.add_argument("--split", type=float)
    g.add_argument("--n", type=int)
    g.add_argument("--w", type=int)
    g.add_argument("--skip", type=int)
    g.add_argument("--mode", choices=["HD", "LD"])
    g.add_argument("--normalize", choices=["NONE", "MINMAX"])
    g.add_argument("--hidden", type=_ints)
    g.add_argument("--epochs", type=int)
    g.add_argument("--batch-size", type=int)
    g.add_argument("--lr", type=float)
    g.add_argument("--sweep-n", type=_ints)
    g.add_argument("--sweep-w", type=_ints)
    g.add_argument("--sweep-skip", type=_ints)
    g.add_argument("--sweep-mode", type=_strs)
    g.add_argument("--retrain-seeds", type=int)
    g.add_argument("--no-embed", action="store_true")


_OVERRIDES = {
    "seed": ("seed",), "name": ("name",), "method": ("corr_method",), "split": ("split_fraction",),
    "net_model": ("network", "model"), "nodes": ("network", "node_count"),
    "mean_degree": ("network", "mean_degree"), "attach": ("network", "attach_count"),
    "realizations": ("network", "realizations"), "kind": ("dynamics", "kind"),
    "couplings": ("dynamics", "couplings"), "length": ("dynamics", "length"),
    "dt": ("dynamics", "dt"), "stride": ("dynamics", "sample_stride"),
    "spread": ("dynamics", "frequency_spread"), "n": ("windows", "n"), "w": ("windows", "w"),
    "skip": ("windows", "skip"), "mode": ("windows", "mode"), "normalize": ("windows", "normalize"),
    "hidden": ("train", "hidden"), "epochs": ("train", "epochs"),
    "batch_size": ("train", "batch_size"), "lr": ("train", "lr"),
    "sweep_n": ("sweep", "n"), "sweep_w": ("sweep", "w"), "sweep_skip": ("sweep", "skip"),
    "sweep_mode": ("sweep", "mode"), "retrain_seeds": ("sweep", "retrain_seeds"),
}


def load_config(args) -> ExperimentConfig:
    data = ExperimentConfig.load(args.config).to_dict() if args.config else ExperimentConfig().to_dict()
    for attr, path in _OVERRIDES.items():
        value = getattr(args, attr, None)
        if value is None:
            continue
        node = data
        for key in path[:-1]:
            node = node[key]
        node[path[-1]] = value
    if getattr(args, "no_embed", False):
        data["embed"]["enabled"] = False
    cfg = ExperimentConfig.from_dict(data)
    cfg.validate()
    return cfg


def cmd_run(args) -> int:
    cfg = load_config(args)
    res = run_pipeline(cfg, args.out)
    ev = res.evaluation
    print(f"avg_mse {ev.avg_mse:.6g}  baseline {ev.baseline_mse:.6g}  "
          f"own_nearest {res.own_nearest_fraction:.3f}")
    for name, ok in res.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return 0 if res.ok else EXIT_INVARIANT


def cmd_sweep(args) -> int:
    cfg = load_config(args)
    rows = run_sweep(cfg, out_dir=args.out)
    for r in rows:
        print(f"n={r['n']} w={r['w']} skip={r['skip']} {r['mode']}: avg_mse {r['avg_mse']:.6g} "
              f"(+/- {r['std_over_windows']:.3g})")
    groups: dict[str, list[float]] = {}
    for r in rows:
        groups.setdefault(f"w={r['w']} skip={r['skip']} {r['mode']}", []).append(r["avg_mse"])
    ns = [r["n"] for r in rows if f"w={r['w']} skip={r['skip']} {r['mode']}" == next(iter(groups))]
    if all(len(v) == len(ns) for v in groups.values()):
        line_svg(ns, groups, Path(args.out) / "sweep.svg", "test MSE vs n", "n", "avg MSE")
    return 0 if all(r["avg_mse"] >= 0 for r in rows) else EXIT_INVARIANT


def cmd_ablate(args) -> int:
    cfg = load_config(args)
    rows = run_ablation(cfg, fractions=args.fractions, out_dir=args.out, seeds=args.seeds)
    for r in rows:
        print(f"fraction {r['fraction']:g} ({r['train_sources']} sources): avg_mse {r['avg_mse']:.6g} "
              f"+/- {r['std_over_seeds']:.3g}")
    line_svg([r["fraction"] for r in rows], {"avg MSE": [r["avg_mse"] for r in rows]},
             Path(args.out) / "ablation.svg", "test MSE vs training fraction", "fraction", "avg MSE")
    return 0


# --------------------------------------------------------------------------
# single-stage commands

def cmd_gen_graph(args) -> int:
    if args.config:
        cfg = load_config(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for j in range(cfg.network.realizations):
            make_graph(cfg, j).save(out / f"graph_{j:04d}.txt")
        print(f"wrote {cfg.network.realizations} graphs to {out}")
        return 0
    if args.nodes is None:
        raise ParameterError("--nodes is required without --config")
    if args.net_model == "SF":
        g = gen_sf(args.nodes, args.attach or 1, args.seed or 0)
    else:
        g = gen_er(args.nodes, args.mean_degree or 6.0, args.seed or 0)
    g.save(args.out)
    print(f"N={g.node_count} edges={g.edge_count} mean_degree={g.mean_degree:.3f}")
    return 0 if g.is_connected() else EXIT_INVARIANT


def cmd_simulate(args) -> int:
    g = Graph.load(args.graph)
    base = default_sim(args.kind, args.length)
    sim = replace(base, dt=args.dt or base.dt, sample_stride=args.stride or base.sample_stride,
                  transient_time=base.transient_time if args.transient is None else args.transient)
    omegas = draw_frequencies(args.kind, g.node_count, args.omega_seed, spread=args.spread)
    traj, x = simulate(g, OscillatorParams(args.kind, args.coupling), omegas, args.init_seed, sim)
    save_series(x, args.out)
    if args.corr_out:
        save_corr(upper_tri(corr_matrix(x, args.method)), args.corr_out)
    err = sync_error(traj).value
    print(f"series {x.shape[0]}x{x.shape[1]}  sync_error {err:.6g}")
    return 0 if np.isfinite(x).all() else EXIT_INVARIANT


def cmd_build_dataset(args) -> int:
    series = [load_series(p) for p in args.series]
    if args.targets:
        if len(args.targets) != len(series):
            raise ParameterError("need one target file per series file")
        targets = [upper_tri(load_corr(p)) for p in args.targets]
    else:
        targets = [upper_tri(corr_matrix(x, args.method)) for x in series]
    if args.graphs:
        if len(args.graphs) != len(series):
            raise ParameterError("need one graph file per series file")
        table = np.vstack([select_nodes(Graph.load(p), args.n, args.mode).indices for p in args.graphs])
        mode = args.mode
    else:
        table = np.tile(np.arange(args.n), (len(series), 1))
        mode = "FILE"
    spec = WindowSpec(args.n, args.w, args.skip, tuple(int(v) for v in table[0]), mode)
    ds = assemble(zip(series, targets), spec, args.normalize, source_ids=args.ids, node_table=table)
    save_dataset(ds, args.out)
    print(f"{len(ds)} windows from {len(series)} sources, input width {ds.inputs.shape[1]}")
    return 0


def cmd_train(args) -> int:
    ds = load_dataset(args.dataset)
    dims = [ds.inputs.shape[1], *args.hidden, ds.pair_count]
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch_size, lr=args.lr,
                      shuffle_seed=args.seed, init_seed=args.seed)
    model = init_model(dims, "selu", args.output_activation, args.seed, use_bias=not args.no_bias)
    model, history = train(model, ds, cfg)
    save_model(model, args.out)
    if args.history:
        Path(args.history).write_text("epoch,loss\n" + "".join(
            f"{e + 1},{v!r}\n" for e, v in enumerate(history)))
    print(f"final loss {history[-1]:.6g}  parameters {model.parameter_count}")
    return 0 if np.isfinite(history).all() else EXIT_INVARIANT


def cmd_predict(args) -> int:
    ds = load_dataset(args.dataset)
    model = load_model(args.model)
    pred = predict(model, ds.inputs)
    np.save(args.out, pred)
    print(f"{pred.shape[0]} predictions of length {pred.shape[1]}")
    return 0


def cmd_evaluate(args) -> int:
    ds = load_dataset(args.dataset)
    pred = np.load(args.predictions) if args.predictions else predict(load_model(args.model), ds.inputs)
    per = mse_rows(ds.target_rows(), pred)
    metrics = {"avg_mse": float(per.mean()), "std_over_windows": float(per.std()), "windows": int(per.size)}
    if args.train_dataset:
        tr = load_dataset(args.train_dataset)
        metrics["baseline_mse"] = float(mse_rows(ds.target_rows(), tr.target_rows().mean(axis=0)[None]).mean())
    text = json.dumps(metrics, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0 if metrics["avg_mse"] >= 0 else EXIT_INVARIANT


def cmd_embed(args) -> int:
    ds = load_dataset(args.dataset)
    pred = predict(load_model(args.model), ds.inputs)
    points = np.vstack([ds.targets, pred])
    sources = np.concatenate([ds.source_ids, ds.source_ids[ds.window_source]])
    kinds = np.array([TRUE] * len(ds.source_ids) + [PREDICTED] * len(pred))
    cfg = EmbedConfig(n_neighbors=args.neighbors, epochs=args.epochs, seed=args.seed)
    emb = embed_2d(points, cfg, sources=sources, kinds=kinds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    emb.to_csv(out / "embedding.csv")
    scatter_svg(emb, out / "embedding.svg")
    rep = cluster_report(emb)
    print(f"own_nearest_fraction {rep.own_nearest_fraction:.3f}")
    return 0


def cmd_ingest_csv(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for p in args.inputs:
        mat = load_csv_matrix(p)
        stem = Path(p).stem
        save_series(mat.values, out / f"{stem}.cnts")
        if args.method:
            save_corr(upper_tri(corr_matrix(mat.values, args.method)), out / f"{stem}.cncm")
        print(f"{p}: {mat.rows} channels x {mat.cols} samples")
    return 0


def cmd_verify(args) -> int:
    bad = verify_manifest(args.dir)
    for path in bad:
        print(f"MISMATCH {path}")
    print("manifest ok" if not bad else f"{len(bad)} mismatched files")
    return 0 if not bad else EXIT_INVARIANT


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="corrnet", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="full pipeline into a run directory")
    _config_flags(p)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("gen-graph", help="generate one graph, or all realizations of a config")
    _config_flags(p)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("simulate", help="integrate one network, write its x series")
    p.add_argument("--graph", required=True, type=Path)
    p.add_argument("--kind", choices=KINDS, default="ROSSLER")
    p.add_argument("--coupling", type=float, required=True)
    p.add_argument("--omega-seed", type=int, default=0)
    p.add_argument("--init-seed", type=int, default=0)
    p.add_argument("--spread", choices=["std", "variance"], default="variance")
    p.add_argument("--length", type=int, default=5000)
    p.add_argument("--dt", type=float)
    p.add_argument("--stride", type=int)
    p.add_argument("--transient", type=float)
    p.add_argument("--method", choices=[PEARSON, SPEARMAN], default=PEARSON)
    p.add_argument("--corr-out", type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("build-dataset", help="window series files into a dataset file")
    p.add_argument("--series", nargs="+", required=True, type=Path)
    p.add_argument("--targets", nargs="+", type=Path)
    p.add_argument("--graphs", nargs="+", type=Path, help="graphs for HD/LD selection")
    p.add_argument("--ids", type=_ints)
    p.add_argument("--method", choices=[PEARSON, SPEARMAN], default=PEARSON)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--skip", type=int, required=True)
    p.add_argument("--mode", choices=["HD", "LD"], default="HD")
    p.add_argument("--normalize", choices=["NONE", "MINMAX"], default="NONE")
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("train", help="train a network on a dataset file")
    p.add_argument("--dataset", required=True, type=Path)
    p.add_argument("--hidden", type=_ints, default=[256, 512])
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-activation", choices=["tanh", "sigmoid", "linear"], default="tanh")
    p.add_argument("--no-bias", action="store_true")
    p.add_argument("--history", type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict correlation vectors for every window")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--dataset", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="per-window and average test MSE")
    p.add_argument("--dataset", required=True, type=Path)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--model", type=Path)
    grp.add_argument("--predictions", type=Path)
    p.add_argument("--train-dataset", type=Path, help="adds the mean-target baseline")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="one model per (n, w, skip, mode) cell")
    _config_flags(p)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ablate", help="retrain on nested subsets of training sources")
    _config_flags(p)
    p.add_argument("--fractions", type=_floats)
    p.add_argument("--seeds", type=int)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("embed", help="2-D embedding of true and predicted vectors")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--dataset", required=True, type=Path)
    p.add_argument("--neighbors", type=int, default=15)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("ingest-csv", help="convert channel x time CSV files to series files")
    p.add_argument("inputs", nargs="+", type=Path)
    p.add_argument("--method", choices=[PEARSON, SPEARMAN])
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_ingest_csv)

    p = sub.add_parser("verify", help="re-hash a run directory against its manifest")
    p.add_argument("dir", type=Path)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger(__name__).info("backend %s", _accel.backend())
    try:
        return args.func(args)
    except CorrnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
