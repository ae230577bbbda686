"""Experiment orchestration: networks -> dynamics -> correlations -> windows
-> network training -> evaluation, plus sweeps and ablations.

Every random stream is derived from ``ExperimentConfig.seed`` through
:mod:`corrnet.seeding`, so a run directory is reproducible file-for-file and
its ``manifest.json`` records a SHA-256 for every artifact.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import _accel
from .corr import PEARSON, corr_matrix, mse_rows, pair_count, save_corr, upper_tri
from .dataset import Dataset, WindowSpec, assemble, save_dataset, split_by_source, window_count
from .dynamics import (OscillatorParams, SimConfig, default_sim, draw_frequencies, save_series,
                       simulate, sync_error)
from .embed import PREDICTED, TRUE, EmbedConfig, cluster_report, embed_2d
from .errors import CorrnetError, ParameterError, StageError
from .mlp import TrainConfig, init_model, predict, save_model, train
from .netgen import Graph, gen_er, gen_sf, select_nodes
from .seeding import derive_seed, rng

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# configuration

@dataclass
class NetworkConfig:
    model: str = "ER"
    node_count: int = 30
    mean_degree: float = 6.0
    attach_count: int = 1
    realizations: int = 12


@dataclass
class DynamicsConfig:
    kind: str = "ROSSLER"
    couplings: list[float] = field(default_factory=lambda: [0.04, 0.05, 0.06])
    length: int = 2000
    dt: float | None = None
    transient_time: float = 200.0
    sample_stride: int | None = 20
    frequency_spread: str = "std"

    def sim(self) -> SimConfig:
        base = default_sim(self.kind, self.length)
        return SimConfig(dt=self.dt or base.dt, transient_time=self.transient_time,
                         sample_stride=self.sample_stride or base.sample_stride, length=self.length)


@dataclass
class WindowConfig:
    n: int = 6
    w: int = 50
    skip: int = 20
    mode: str = "HD"
    normalize: str = "MINMAX"


@dataclass
class TrainSection:
    hidden: list[int] = field(default_factory=lambda: [256, 512])
    epochs: int = 30
    batch_size: int = 64
    lr: float = 1e-3
    use_bias: bool = True
    output_activation: str = "tanh"


@dataclass
class SweepSection:
    n: list[int] = field(default_factory=lambda: [1, 3, 6, 12])
    w: list[int] = field(default_factory=lambda: [50])
    skip: list[int] = field(default_factory=lambda: [20])
    mode: list[str] = field(default_factory=lambda: ["HD", "LD"])
    retrain_seeds: int = 3


@dataclass
class EmbedSection:
    enabled: bool = True
    n_neighbors: int = 15
    epochs: int = 300


@dataclass
class ExperimentConfig:
    """Everything a run depends on; serializes to and from JSON.

    The defaults are the desk-scale setting: 12 connected ER graphs (N=30,
    mean degree 6) x 3 Rossler couplings = 36 sources split 30/6, windows of
    the 6 highest-degree nodes with w=50 and skip=20.
    """

    name: str = "desk"
    seed: int = 20240601
    corr_method: str = PEARSON
    split_fraction: float = 30 / 36
    network: NetworkConfig = field(default_factory=NetworkConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    windows: WindowConfig = field(default_factory=WindowConfig)
    train: TrainSection = field(default_factory=TrainSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    ablation_fractions: list[float] = field(default_factory=lambda: [1.0, 0.5, 0.25])
    ablation_seeds: int = 3
    embed: EmbedSection = field(default_factory=EmbedSection)

    def validate(self) -> None:
        if not self.dynamics.couplings:
            raise ParameterError("coupling grid is empty")
        if self.network.model.upper() not in ("ER", "SF"):
            raise ParameterError(f"unknown network model {self.network.model!r}")
        if self.network.realizations < 1:
            raise ParameterError("need at least one network realization")

    @property
    def source_count(self) -> int:
        return len(self.dynamics.couplings) * self.network.realizations

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        return _build(cls, data)

    @classmethod
    def from_json(cls, text: str) -> ExperimentConfig:
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        return cls.from_json(Path(path).read_text())


def _build(cls, data):
    if not isinstance(data, dict):
        raise ParameterError(f"expected an object for {cls.__name__}")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ParameterError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        default = known[name].default_factory() if known[name].default_factory is not dataclasses.MISSING else None
        kwargs[name] = _build(type(default), value) if dataclasses.is_dataclass(default) else value
    return cls(**kwargs)


def full_scale_config() -> ExperimentConfig:
    """Full-scale Rossler/ER protocol: N=100, L=5000, 5 couplings x 75 graphs."""
    return ExperimentConfig(
        name="full-scale-rossler-er",
        split_fraction=0.8,
        network=NetworkConfig("ER", 100, 6.0, 1, 75),
        dynamics=DynamicsConfig("ROSSLER", [0.012, 0.013, 0.014, 0.015, 0.016], 5000,
                                sample_stride=5),
        windows=WindowConfig(20, 100, 40, "HD", "NONE"),
        train=TrainSection(hidden=[1225, 5041], epochs=50),
        sweep=SweepSection(n=[1, 5, 10, 20, 40], w=[10, 40, 100, 500], skip=[40, 100], mode=["HD", "LD"]),
    )


# --------------------------------------------------------------------------
# sources

@dataclass
class Source:
    id: int
    realization: int
    coupling: float
    graph: Graph = field(repr=False)
    series: np.ndarray = field(repr=False)
    target: np.ndarray = field(repr=False)
    sync_error: float
    omega_seed: int
    init_seed: int


def make_graph(cfg: ExperimentConfig, realization: int) -> Graph:
    seed = derive_seed(cfg.seed, "graph", realization)
    net = cfg.network
    if net.model.upper() == "ER":
        return gen_er(net.node_count, net.mean_degree, seed)
    return gen_sf(net.node_count, net.attach_count, seed)


def frequencies(cfg: ExperimentConfig, realization: int) -> tuple[np.ndarray, int]:
    """Natural frequencies belong to a network realization, shared across couplings."""
    seed = derive_seed(cfg.seed, "omega", realization)
    omegas = draw_frequencies(cfg.dynamics.kind, cfg.network.node_count, seed,
                              spread=cfg.dynamics.frequency_spread)
    return omegas, seed


def build_sources(cfg: ExperimentConfig) -> list[Source]:
    """Simulate every (realization, coupling) pair; id = realization * l + coupling index."""
    cfg.validate()
    sim = cfg.dynamics.sim()
    couplings = cfg.dynamics.couplings
    out = []
    for j in range(cfg.network.realizations):
        graph = make_graph(cfg, j)
        omegas, omega_seed = frequencies(cfg, j)
        for i, lam in enumerate(couplings):
            sid = j * len(couplings) + i
            init_seed = derive_seed(cfg.seed, "init", sid)
            params = OscillatorParams(cfg.dynamics.kind, float(lam))
            traj, x = simulate(graph, params, omegas, init_seed, sim)
            target = upper_tri(corr_matrix(x, cfg.corr_method))
            out.append(Source(sid, j, float(lam), graph, x, target,
                              sync_error(traj).value, omega_seed, init_seed))
    return out


def stratified_order(ids, strata, gen: np.random.Generator) -> np.ndarray:
    """Permute ids within each stratum, then interleave strata round-robin.

    Any prefix of the result is as balanced across strata as its length allows.
    """
    ids = np.asarray(ids)
    strata = np.asarray(strata)
    groups = [gen.permutation(ids[strata == s]) for s in np.unique(strata)]
    groups = [groups[k] for k in gen.permutation(len(groups))]
    out = []
    for r in range(max(len(g) for g in groups)):
        out.extend(int(g[r]) for g in groups if r < len(g))
    return np.asarray(out, dtype=np.int64)


def split_sources(cfg: ExperimentConfig, sources: list[Source]) -> tuple[np.ndarray, np.ndarray]:
    """Source-level train/test split, balanced across coupling strengths.

    The test set takes the tail of a coupling-stratified order, so every
    coupling is represented as evenly as the test size allows.
    """
    ids = np.array([s.id for s in sources], dtype=np.int64)
    strata = np.array([s.coupling for s in sources])
    order = stratified_order(ids, strata, rng(cfg.seed, "split"))[::-1]
    train, test = split_by_source(order, cfg.split_fraction)
    return train, test


@dataclass(frozen=True)
class Cell:
    n: int
    w: int
    skip: int
    mode: str = "HD"

    def label(self) -> str:
        return f"n{self.n}_w{self.w}_s{self.skip}_{self.mode}"


def default_cell(cfg: ExperimentConfig) -> Cell:
    wc = cfg.windows
    return Cell(wc.n, wc.w, wc.skip, wc.mode.upper())


def build_dataset(cfg: ExperimentConfig, sources: list[Source], ids, cell: Cell) -> Dataset:
    by_id = {s.id: s for s in sources}
    chosen = [by_id[int(i)] for i in ids]
    if cell.mode == "FILE":
        table = np.tile(np.arange(cell.n), (len(chosen), 1))
    else:
        table = np.vstack([select_nodes(s.graph, cell.n, cell.mode).indices for s in chosen])
    spec = WindowSpec(cell.n, cell.w, cell.skip, tuple(int(v) for v in table[0]), cell.mode)
    return assemble([(s.series, s.target) for s in chosen], spec, cfg.windows.normalize,
                    source_ids=[s.id for s in chosen], node_table=table)


# --------------------------------------------------------------------------
# training and evaluation

def train_config(cfg: ExperimentConfig, retrain: int = 0) -> TrainConfig:
    t = cfg.train
    return TrainConfig(epochs=t.epochs, batch_size=t.batch_size, lr=t.lr,
                       shuffle_seed=derive_seed(cfg.seed, "shuffle", retrain),
                       init_seed=derive_seed(cfg.seed, "weights", retrain))


def fit(cfg: ExperimentConfig, train_ds: Dataset, retrain: int = 0):
    tc = train_config(cfg, retrain)
    dims = [train_ds.inputs.shape[1], *cfg.train.hidden, train_ds.pair_count]
    model = init_model(dims, "selu", cfg.train.output_activation, tc.init_seed, cfg.train.use_bias)
    return train(model, train_ds, tc)


@dataclass
class Evaluation:
    predictions: np.ndarray = field(repr=False)    # (windows, m)
    window_mse: np.ndarray = field(repr=False)     # (windows,)
    window_source: np.ndarray = field(repr=False)  # source id per window
    avg_mse: float
    std_over_windows: float
    baseline_mse: float


def evaluate(model, test_ds: Dataset, train_ds: Dataset | None = None) -> Evaluation:
    """Per-window MSE against each window's true vector, and its mean."""
    pred = predict(model, test_ds.inputs)
    truth = test_ds.target_rows()
    per = mse_rows(truth, pred)
    baseline = float("nan")
    if train_ds is not None:
        mean_target = train_ds.target_rows().mean(axis=0)
        baseline = float(mse_rows(truth, mean_target[None, :]).mean())
    return Evaluation(pred, per, test_ds.source_ids[test_ds.window_source],
                      float(per.mean()), float(per.std()), baseline)


def embed_predictions(cfg: ExperimentConfig, test_ds: Dataset, ev: Evaluation):
    points = np.vstack([test_ds.targets, ev.predictions])
    srcs = np.concatenate([test_ds.source_ids, ev.window_source])
    kinds = np.array([TRUE] * len(test_ds.source_ids) + [PREDICTED] * len(ev.predictions))
    ec = EmbedConfig(n_neighbors=cfg.embed.n_neighbors, epochs=cfg.embed.epochs,
                     seed=derive_seed(cfg.seed, "embed"))
    emb = embed_2d(points, ec, sources=srcs, kinds=kinds)
    return emb, cluster_report(emb)


# --------------------------------------------------------------------------
# run directory, manifest

def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Manifest:
    def __init__(self, root: Path, cfg: ExperimentConfig):
        self.root = root
        self.stages: dict[str, list[dict[str, Any]]] = {}
        self.checks: dict[str, bool] = {}
        self.cfg = cfg

    def add(self, stage: str, path: Path, seed: int | None = None) -> None:
        entry = {"path": path.relative_to(self.root).as_posix(), "sha256": sha256_file(path)}
        if seed is not None:
            entry["seed"] = int(seed)
        self.stages.setdefault(stage, []).append(entry)

    def check(self, name: str, ok: bool) -> None:
        self.checks[name] = bool(ok)

    def write(self) -> Path:
        doc = {
            "name": self.cfg.name,
            "config": self.cfg.to_dict(),
            "config_sha256": hashlib.sha256(self.cfg.to_json().encode()).hexdigest(),
            "backend": _accel.backend(),
            "stages": self.stages,
            "checks": self.checks,
        }
        path = self.root / "manifest.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return path


def verify_manifest(root: str | Path) -> list[str]:
    """Paths whose content no longer matches the manifest hash."""
    root = Path(root)
    doc = json.loads((root / "manifest.json").read_text())
    bad = []
    for entries in doc["stages"].values():
        for e in entries:
            p = root / e["path"]
            if not p.exists() or sha256_file(p) != e["sha256"]:
                bad.append(e["path"])
    return bad


def _write_csv(path: Path, rows: list[dict[str, Any]]) -> None:
    if not rows:
        raise ParameterError("no rows to write")
    with open(path, "w", newline="") as fh:
        out = csv.DictWriter(fh, fieldnames=list(rows[0]))
        out.writeheader()
        for row in rows:
            out.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


class _Stage:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


@dataclass
class PipelineResult:
    out_dir: Path
    train_ids: np.ndarray
    test_ids: np.ndarray
    evaluation: Evaluation
    history: list[float]
    checks: dict[str, bool]
    manifest_sha256: str
    own_nearest_fraction: float = float("nan")

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def run_pipeline(cfg: ExperimentConfig, out_dir: str | Path, sources: list[Source] | None = None) -> PipelineResult:
    """Run every stage and write artifacts plus ``manifest.json`` under ``out_dir``.

    Failures raise :class:`StageError` naming the stage; files already
    written are left in place.
    """
    root = Path(out_dir)
    for sub in ("graphs", "series", "targets"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    (root / "config.json").write_text(cfg.to_json() + "\n")
    man = Manifest(root, cfg)
    man.add("config", root / "config.json", cfg.seed)

    with _Stage("netgen"):
        graphs = [make_graph(cfg, j) for j in range(cfg.network.realizations)]
        for j, g in enumerate(graphs):
            p = root / "graphs" / f"graph_{j:04d}.txt"
            g.save(p)
            man.add("netgen", p, derive_seed(cfg.seed, "graph", j))
        man.check("graphs_connected", all(g.is_connected() for g in graphs))
        man.check("graphs_symmetric", all(
            np.array_equal(g.adjacency, g.adjacency.T) and not g.adjacency.diagonal().any() for g in graphs))

    with _Stage("dynamics"):
        if sources is None:
            sources = build_sources(cfg)
        rows = []
        for s in sources:
            p = root / "series" / f"source_{s.id:04d}.cnts"
            save_series(s.series, p)
            man.add("dynamics", p, s.init_seed)
            rows.append({"source": s.id, "realization": s.realization, "coupling": s.coupling,
                         "sync_error": s.sync_error, "omega_seed": s.omega_seed, "init_seed": s.init_seed})
        _write_csv(root / "sources.csv", rows)
        man.add("dynamics", root / "sources.csv")
        man.check("series_finite", all(np.isfinite(s.series).all() for s in sources))

    with _Stage("corr"):
        for s in sources:
            p = root / "targets" / f"source_{s.id:04d}.cncm"
            save_corr(s.target, p)
            man.add("corr", p)
        m = pair_count(cfg.network.node_count)
        man.check("targets_in_range", all(
            s.target.shape == (m,) and np.all(np.abs(s.target) <= 1.0) for s in sources))

    with _Stage("dataset"):
        train_ids, test_ids = split_sources(cfg, sources)
        cell = default_cell(cfg)
        train_ds = build_dataset(cfg, sources, train_ids, cell)
        test_ds = build_dataset(cfg, sources, test_ids, cell)
        for tag, ds in (("train", train_ds), ("test", test_ds)):
            p = root / f"dataset_{tag}.cnds"
            save_dataset(ds, p)
            man.add("dataset", p, derive_seed(cfg.seed, "split"))
        f = window_count(cfg.dynamics.length, cell.w, cell.skip)
        man.check("no_leakage", not set(train_ids.tolist()) & set(test_ids.tolist()))
        man.check("window_counts", len(train_ds) == f * len(train_ids) and len(test_ds) == f * len(test_ids))

    with _Stage("mlp"):
        model, history = fit(cfg, train_ds)
        p = root / "model.cnnn"
        save_model(model, p)
        man.add("mlp", p, train_config(cfg).init_seed)
        _write_csv(root / "history.csv", [{"epoch": e + 1, "loss": v} for e, v in enumerate(history)])
        man.add("mlp", root / "history.csv", train_config(cfg).shuffle_seed)
        man.check("loss_finite", all(math.isfinite(v) for v in history))

    with _Stage("evaluate"):
        ev = evaluate(model, test_ds, train_ds)
        np.save(root / "predictions.npy", ev.predictions)
        man.add("evaluate", root / "predictions.npy")
        _write_csv(root / "window_mse.csv", [
            {"window": i, "source": int(s), "mse": float(v)}
            for i, (s, v) in enumerate(zip(ev.window_source, ev.window_mse))])
        man.add("evaluate", root / "window_mse.csv")
        _write_csv(root / "results.csv", [{
            "n": cell.n, "w": cell.w, "skip": cell.skip, "mode": cell.mode,
            "avg_mse": ev.avg_mse, "std_over_windows": ev.std_over_windows,
            "baseline_mse": ev.baseline_mse, "train_size": len(train_ds)}])
        man.add("evaluate", root / "results.csv")
        man.check("mse_nonnegative", ev.avg_mse >= 0)

    own = float("nan")
    if cfg.embed.enabled:
        with _Stage("embed"):
            emb, rep = embed_predictions(cfg, test_ds, ev)
            emb.to_csv(root / "embedding.csv")
            man.add("embed", root / "embedding.csv", derive_seed(cfg.seed, "embed"))
            from .plots import scatter_svg
            scatter_svg(emb, root / "embedding.svg")
            man.add("embed", root / "embedding.svg")
            own = rep.own_nearest_fraction
            man.check("embedding_finite", bool(np.isfinite(emb.coords).all()))

    mpath = man.write()
    return PipelineResult(root, train_ids, test_ids, ev, history, dict(man.checks),
                          sha256_file(mpath), own)


# --------------------------------------------------------------------------
# sweeps and ablation

def sweep_cells(cfg: ExperimentConfig) -> list[Cell]:
    sw = cfg.sweep
    cells = [Cell(n, w, skip, mode.upper()) for mode in sw.mode for w in sw.w for skip in sw.skip for n in sw.n]
    if not cells:
        raise ParameterError("empty sweep grid")
    return cells


def run_sweep(cfg: ExperimentConfig, sources: list[Source] | None = None,
              out_dir: str | Path | None = None, cells: list[Cell] | None = None) -> list[dict[str, Any]]:
    """Train one model per grid cell (and per retraining seed).

    ``avg_mse`` averages the per-window MSE over every test window of every
    retraining seed; ``std_over_windows`` is the spread of that pooled list
    and ``std_over_seeds`` the spread of the per-seed averages.
    """
    if sources is None:
        sources = build_sources(cfg)
    cells = sweep_cells(cfg) if cells is None else cells
    if not cells:
        raise ParameterError("empty sweep grid")
    train_ids, test_ids = split_sources(cfg, sources)
    seeds = max(1, cfg.sweep.retrain_seeds)
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    rows = []
    for cell in cells:
        train_ds = build_dataset(cfg, sources, train_ids, cell)
        test_ds = build_dataset(cfg, sources, test_ids, cell)
        pooled, per_seed = [], []
        for r in range(seeds):
            model, _ = fit(cfg, train_ds, retrain=r)
            ev = evaluate(model, test_ds, train_ds)
            pooled.append(ev.window_mse)
            per_seed.append(ev.avg_mse)
            if out_dir is not None:
                np.save(Path(out_dir) / f"predictions_{cell.label()}_seed{r}.npy", ev.predictions)
        pooled = np.concatenate(pooled)
        rows.append({
            "n": cell.n, "w": cell.w, "skip": cell.skip, "mode": cell.mode,
            "avg_mse": float(pooled.mean()), "std_over_windows": float(pooled.std()),
            "std_over_seeds": float(np.std(per_seed)), "seeds": seeds,
            "baseline_mse": ev.baseline_mse, "train_size": len(train_ds),
        })
        log.info("sweep %s avg_mse %.5f", cell.label(), rows[-1]["avg_mse"])
    if out_dir is not None:
        _write_csv(Path(out_dir) / "results.csv", rows)
    return rows


def nested_subsets(train_ids, fractions, seed: int, strata=None) -> list[np.ndarray]:
    """Training-source subsets, one per fraction, each contained in the previous.

    With ``strata`` (e.g. each source's coupling), subsets are prefixes of a
    stratified order, so shrinking the data does not also skew its balance.
    """
    fr = [float(f) for f in fractions]
    if not fr:
        raise ParameterError("no ablation fractions")
    if any(not 0 < f <= 1 for f in fr) or fr != sorted(fr, reverse=True):
        raise ParameterError("fractions must lie in (0, 1] in descending order")
    gen = rng(seed, "ablation")
    ids = np.asarray(train_ids)
    if strata is None:
        order = ids[gen.permutation(len(ids))]
    else:
        order = stratified_order(ids, strata, gen)
    out = []
    for f in fr:
        k = int(round(f * len(order)))
        if k < 1:
            raise ParameterError(f"fraction {f} removes all training sources")
        out.append(np.sort(order[:k]))
    return out


def run_ablation(cfg: ExperimentConfig, fractions=None, sources: list[Source] | None = None,
                 out_dir: str | Path | None = None, seeds: int | None = None) -> list[dict[str, Any]]:
    """Retrain on nested subsets of the training sources against a fixed test set."""
    if sources is None:
        sources = build_sources(cfg)
    fractions = cfg.ablation_fractions if fractions is None else fractions
    seeds = cfg.ablation_seeds if seeds is None else seeds
    train_ids, test_ids = split_sources(cfg, sources)
    coupling = {s.id: s.coupling for s in sources}
    subsets = nested_subsets(train_ids, fractions, derive_seed(cfg.seed, "ablation"),
                             strata=[coupling[int(i)] for i in train_ids])
    cell = default_cell(cfg)
    test_ds = build_dataset(cfg, sources, test_ids, cell)
    full_train = build_dataset(cfg, sources, train_ids, cell)
    rows = []
    for frac, ids in zip(fractions, subsets):
        train_ds = full_train.subset_sources(ids)
        vals = []
        for r in range(seeds):
            model, _ = fit(cfg, train_ds, retrain=r)
            vals.append(evaluate(model, test_ds).avg_mse)
        rows.append({"fraction": float(frac), "train_sources": len(ids),
                     "avg_mse": float(np.mean(vals)),
                     "std_over_seeds": float(np.std(vals)) if len(vals) > 1 else 0.0,
                     "per_seed": ";".join(repr(v) for v in vals)})
        log.info("ablation %.3f avg_mse %.5f", frac, rows[-1]["avg_mse"])
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        _write_csv(Path(out_dir) / "ablation.csv", rows)
    return rows


__all__ = [
    "ExperimentConfig", "NetworkConfig", "DynamicsConfig", "WindowConfig", "TrainSection",
    "SweepSection", "EmbedSection", "Source", "Cell", "full_scale_config", "build_sources",
    "split_sources", "build_dataset", "fit", "evaluate", "embed_predictions", "run_pipeline",
    "run_sweep", "run_ablation", "nested_subsets", "verify_manifest", "CorrnetError",
]
