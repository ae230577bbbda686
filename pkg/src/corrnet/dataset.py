"""Windowed datasets: slicing n x w windows out of time-series matrices and
pairing them with the correlation vector of their source series."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from ._binio import open_reader, pack_array, pack_header, write_atomic
from .corr import pair_count
from .errors import DegenerateSeriesError, ParameterError, ShapeError
from .netgen import NodeSelection
from .seeding import rng

DS_MAGIC = b"CNDS"
DS_VERSION = 1

NONE = "NONE"
MINMAX = "MINMAX"
_NORM_CODES = {NONE: 0, MINMAX: 1}


def window_count(length: int, w: int, skip: int) -> int:
    """``ceil((L - w) / skip) + 1`` in exact integer arithmetic."""
    if w > length:
        raise ShapeError(f"window exceeds series: w={w} > L={length}")
    if w < 1 or skip < 1:
        raise ParameterError("w and skip must be >= 1")
    return -(-(length - w) // skip) + 1


def window_starts(length: int, w: int, skip: int) -> np.ndarray:
    """Start indices; the last one is clamped to ``L - w`` so every window fits."""
    f = window_count(length, w, skip)
    return np.minimum(np.arange(f, dtype=np.int64) * skip, length - w)


@dataclass(frozen=True)
class WindowSpec:
    n: int
    w: int
    skip: int
    nodes: tuple[int, ...]
    mode: str = "HD"

    @classmethod
    def from_selection(cls, selection: NodeSelection, w: int, skip: int) -> WindowSpec:
        return cls(len(selection), w, skip, tuple(int(i) for i in selection.indices), selection.mode)

    @classmethod
    def first_rows(cls, n: int, w: int, skip: int) -> WindowSpec:
        """Rows ``0..n-1`` in file order (used for channels without degrees)."""
        return cls(n, w, skip, tuple(range(n)), "FILE")

    def validate(self, node_count: int, length: int) -> None:
        if len(self.nodes) != self.n or not 1 <= self.n <= node_count:
            raise ParameterError(f"need 1 <= n <= N with n node indices, got n={self.n}")
        if len(set(self.nodes)) != self.n or min(self.nodes) < 0 or max(self.nodes) >= node_count:
            raise ParameterError("node selection must hold distinct in-range indices")
        if self.skip < 1:
            raise ParameterError("skip must be >= 1")
        window_count(length, self.w, self.skip)


@dataclass(frozen=True)
class Window:
    matrix: np.ndarray = field(repr=False)
    source: int
    start: int

    @property
    def flat(self) -> np.ndarray:
        return flatten_window(self)


def make_windows(x: np.ndarray, spec: WindowSpec, source: int = 0) -> list[Window]:
    x = np.asarray(x)
    spec.validate(*x.shape)
    rows = x[list(spec.nodes)]
    return [Window(rows[:, s:s + spec.w].copy(), source, int(s))
            for s in window_starts(x.shape[1], spec.w, spec.skip)]


def flatten_window(win: Window | np.ndarray) -> np.ndarray:
    """Node-major stacking: row 0's ``w`` values, then row 1's, ..."""
    m = win.matrix if isinstance(win, Window) else np.asarray(win)
    return m.reshape(-1).copy()


def unflatten_window(flat: np.ndarray, n: int, w: int) -> np.ndarray:
    return np.asarray(flat).reshape(n, w)


def _window_block(x: np.ndarray, spec: WindowSpec, nodes) -> np.ndarray:
    """All flattened windows of one source as an ``(f, n*w)`` array."""
    rows = np.asarray(x, dtype=np.float64)[list(nodes)]
    starts = window_starts(rows.shape[1], spec.w, spec.skip)
    idx = starts[:, None] + np.arange(spec.w)[None, :]
    return rows[:, idx].transpose(1, 0, 2).reshape(len(starts), -1)


def minmax_scale(block: np.ndarray) -> np.ndarray:
    lo = block.min(axis=1, keepdims=True)
    hi = block.max(axis=1, keepdims=True)
    span = hi - lo
    bad = np.flatnonzero(span[:, 0] == 0)
    if bad.size:
        raise DegenerateSeriesError(f"degenerate normalization: window {int(bad[0])} has zero range")
    return 2.0 * (block - lo) / span - 1.0


@dataclass
class Dataset:
    """``d * f`` windows in source-major order.

    ``targets`` holds one row per source; ``window_source[i]`` is the row of
    ``targets`` that window ``i`` maps to, so windows never copy targets.
    ``node_table[k]`` lists the rows windowed for source ``k`` (HD/LD
    selections differ between network realizations).
    """

    inputs: np.ndarray = field(repr=False)          # (d*f, n*w)
    targets: np.ndarray = field(repr=False)         # (d, m)
    window_source: np.ndarray = field(repr=False)   # (d*f,) row into targets
    source_ids: np.ndarray = field(repr=False)      # (d,)
    node_table: np.ndarray = field(repr=False)      # (d, n)
    spec: WindowSpec
    node_count: int
    length: int
    normalize: str = NONE

    @property
    def windows_per_source(self) -> int:
        return window_count(self.length, self.spec.w, self.spec.skip)

    @property
    def pair_count(self) -> int:
        return self.targets.shape[1]

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def target_rows(self, idx=None) -> np.ndarray:
        ws = self.window_source if idx is None else self.window_source[idx]
        return self.targets[ws]

    def subset_sources(self, source_ids: Sequence[int]) -> Dataset:
        """Dataset restricted to ``source_ids`` (kept in the given order)."""
        pos = {int(s): k for k, s in enumerate(self.source_ids)}
        missing = [s for s in source_ids if int(s) not in pos]
        if missing:
            raise ParameterError(f"unknown source ids {missing}")
        rows = [pos[int(s)] for s in source_ids]
        f = self.windows_per_source
        win = np.concatenate([np.arange(r * f, (r + 1) * f) for r in rows]) if rows else np.zeros(0, int)
        return Dataset(self.inputs[win].copy(), self.targets[rows].copy(),
                       np.repeat(np.arange(len(rows)), f), np.asarray(source_ids, dtype=np.int64),
                       self.node_table[rows].copy(), self.spec, self.node_count, self.length,
                       self.normalize)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.spec == other.spec and self.node_count == other.node_count
                and self.length == other.length and self.normalize == other.normalize
                and np.array_equal(self.source_ids, other.source_ids)
                and np.array_equal(self.window_source, other.window_source)
                and np.array_equal(self.node_table, other.node_table)
                and self.inputs.tobytes() == other.inputs.tobytes()
                and self.targets.tobytes() == other.targets.tobytes())


def assemble(sources, spec: WindowSpec, normalize: str = NONE, source_ids=None,
             node_table=None) -> Dataset:
    """Build a dataset from ``(X, r)`` pairs.

    Every source must share ``(N, L)``; ``r`` is the source's correlation
    vector of length ``N(N-1)/2``.  ``node_table`` optionally gives each
    source its own ``n`` node indices; otherwise ``spec.nodes`` is used.
    """
    normalize = normalize.upper()
    if normalize not in _NORM_CODES:
        raise ParameterError(f"unknown normalization {normalize!r}")
    sources = list(sources)
    if not sources:
        raise ParameterError("no sources to assemble")
    shape0 = np.shape(sources[0][0])
    if len(shape0) != 2:
        raise ShapeError("source 0: time-series matrix must be 2-D")
    n_nodes, length = shape0
    m = pair_count(n_nodes)
    spec.validate(n_nodes, length)
    if node_table is None:
        node_table = np.tile(np.asarray(spec.nodes, dtype=np.int64), (len(sources), 1))
    node_table = np.asarray(node_table, dtype=np.int64)
    if node_table.shape != (len(sources), spec.n):
        raise ShapeError(f"node_table must have shape {(len(sources), spec.n)}, got {node_table.shape}")
    blocks, targets = [], []
    for k, (x, r) in enumerate(sources):
        replace(spec, nodes=tuple(int(i) for i in node_table[k])).validate(n_nodes, length)
        if np.shape(x) != shape0:
            raise ShapeError(f"source {k}: series shape {np.shape(x)} differs from {shape0}")
        r = np.asarray(r, dtype=np.float64).reshape(-1)
        if r.size != m:
            raise ShapeError(f"source {k}: target length {r.size}, expected {m}")
        block = _window_block(x, spec, node_table[k])
        if normalize == MINMAX:
            try:
                block = minmax_scale(block)
            except DegenerateSeriesError as exc:
                raise DegenerateSeriesError(f"source {k}: {exc}") from None
        blocks.append(block)
        targets.append(r)
    f = blocks[0].shape[0]
    ids = np.arange(len(sources)) if source_ids is None else np.asarray(source_ids)
    if ids.shape != (len(sources),):
        raise ShapeError("source_ids must name every source")
    return Dataset(np.vstack(blocks), np.vstack(targets), np.repeat(np.arange(len(sources)), f),
                   ids.astype(np.int64), node_table, spec, n_nodes, length, normalize)


def split_by_source(source_ids, train_fraction: float, seed: int | None = None):
    """Split source ids into (train, test) so no source straddles the two.

    ``seed=None`` keeps the given order (first block trains); otherwise the
    ids are permuted by the seeded stream first.  Both parts are returned
    sorted.
    """
    ids = np.asarray(list(source_ids), dtype=np.int64)
    if ids.size < 2:
        raise ParameterError("need at least 2 sources to split")
    if not 0.0 < train_fraction < 1.0:
        raise ParameterError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n_train = min(max(int(round(train_fraction * ids.size)), 1), ids.size - 1)
    order = ids if seed is None else ids[rng(seed, "split").permutation(ids.size)]
    train, test = np.sort(order[:n_train]), np.sort(order[n_train:])
    assert not set(train.tolist()) & set(test.tolist())
    return train, test


def save_dataset(ds: Dataset, path: str | Path) -> None:
    f = ds.windows_per_source
    d = ds.targets.shape[0]
    if ds.inputs.shape != (d * f, ds.spec.n * ds.spec.w):
        raise ShapeError("dataset arrays are inconsistent with its spec")
    header = [d, f, ds.node_count, ds.length, ds.spec.n, ds.spec.w, ds.spec.skip,
              ds.pair_count, _NORM_CODES[ds.normalize]]
    mode = ds.spec.mode.encode().ljust(4, b" ")[:4]
    payload = b"".join([
        pack_header(DS_MAGIC, DS_VERSION, header),
        mode,
        pack_array(ds.source_ids, "<i8"),
        pack_array(ds.node_table, "<u4"),
        pack_array(ds.targets, "<f8"),
        pack_array(ds.inputs, "<f8"),
    ])
    write_atomic(path, payload)


def load_dataset(path: str | Path) -> Dataset:
    r = open_reader(path, DS_MAGIC, DS_VERSION, "dataset")
    d, f, n_nodes, length, n, w, skip, m, norm = r.u32s(9)
    mode = r.take(4).decode(errors="replace").strip()
    if m != pair_count(n_nodes) or norm not in _NORM_CODES.values():
        raise ShapeError(f"inconsistent dataset header in {path}")
    ids = r.array("<i8", d)
    table = r.array("<u4", d * n, (d, n)).astype(np.int64)
    targets = r.array("<f8", d * m, (d, m))
    inputs = r.array("<f8", d * f * n * w, (d * f, n * w))
    r.finish()
    spec = WindowSpec(n, w, skip, tuple(int(i) for i in table[0]) if d else tuple(range(n)), mode)
    if window_count(length, w, skip) != f:
        raise ShapeError(f"dataset header window count {f} disagrees with (L, w, skip)")
    normalize = {v: k for k, v in _NORM_CODES.items()}[norm]
    return Dataset(inputs, targets, np.repeat(np.arange(d), f), ids, table, spec, n_nodes, length,
                   normalize)
