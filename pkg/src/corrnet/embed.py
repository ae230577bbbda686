"""Two-dimensional neighbour embedding of correlation vectors.

A compact UMAP-style pipeline: exact distances, a k-NN graph with
per-point bandwidths, fuzzy-union symmetrisation, PCA initialisation, then
attraction/repulsion descent with negative sampling.  It reproduces the
qualitative behaviour needed for diagnostics (predictions cluster around
their true matrix), not reference UMAP coordinates.

The distance and descent loops have numba kernels and numpy twins; the
numpy descent applies each epoch's updates as one batch, so its layout is a
different (still deterministic) solution from the sequential kernel.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import curve_fit

from . import _accel
from .errors import ParameterError, ShapeError
from .seeding import derive_seed

TRUE = "TRUE"
PREDICTED = "PREDICTED"

_BANDWIDTH_TOL = 1e-5
_BISECTION_STEPS = 64


@dataclass(frozen=True)
class EmbedConfig:
    n_neighbors: int = 15
    epochs: int = 300
    min_dist: float = 0.1
    repulsion: float = 1.0
    negative_samples: int = 5
    learning_rate: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_neighbors < 2:
            raise ParameterError("n_neighbors must be >= 2")
        if self.epochs < 1:
            raise ParameterError("epochs must be >= 1")


@dataclass
class Embedding:
    coords: np.ndarray = field(repr=False)   # (P, 2)
    sources: np.ndarray = field(repr=False)  # (P,) int
    kinds: np.ndarray = field(repr=False)    # (P,) str, TRUE | PREDICTED

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["source", "kind", "x", "y"])
            for s, k, (x, y) in zip(self.sources, self.kinds, self.coords):
                out.writerow([int(s), k, repr(float(x)), repr(float(y))])

    @classmethod
    def from_csv(cls, path: str | Path) -> Embedding:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        coords = np.array([[float(r["x"]), float(r["y"])] for r in rows]).reshape(-1, 2)
        return cls(coords, np.array([int(r["source"]) for r in rows]), np.array([r["kind"] for r in rows]))


@_accel.njit
def _distances_loop(x):
    p, dim = x.shape
    out = np.zeros((p, p))
    for i in range(p):
        for j in range(i + 1, p):
            s = 0.0
            for d in range(dim):
                diff = x[i, d] - x[j, d]
                s += diff * diff
            r = math.sqrt(s)
            out[i, j] = r
            out[j, i] = r
    return out


def _distances_numpy(x):
    # accumulate coordinate by coordinate so each pair is summed in the same
    # order as the scalar loop
    p, dim = x.shape
    acc = np.zeros((p, p))
    for d in range(dim):
        diff = x[:, d][:, None] - x[:, d][None, :]
        acc += diff * diff
    return np.sqrt(acc)


def pairwise_distances(points, use_numba: bool | None = None) -> np.ndarray:
    x = np.ascontiguousarray(points, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError("points must form a 2-D array")
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    return (_distances_loop if use_numba else _distances_numpy)(x)


def knn(dist: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """k nearest neighbours of every point, excluding itself; ties by index."""
    d = dist.copy()
    np.fill_diagonal(d, np.inf)
    idx = np.argsort(d, axis=1, kind="stable")[:, :k]
    return idx, np.take_along_axis(d, idx, axis=1)


def bandwidths(knn_dist: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-point ``(rho, sigma)`` with ``sum_j exp(-(d_j - rho)/sigma) = log2 k``."""
    target = math.log2(k)
    p = knn_dist.shape[0]
    rho = knn_dist[:, 0].copy()
    sigma = np.empty(p)
    for i in range(p):
        shifted = np.maximum(knn_dist[i] - rho[i], 0.0)
        lo, hi, mid = 0.0, np.inf, 1.0
        for _ in range(_BISECTION_STEPS):
            total = np.exp(-shifted / mid).sum()
            if abs(total - target) < _BANDWIDTH_TOL:
                break
            if total > target:
                hi = mid
                mid = 0.5 * (lo + hi)
            else:
                lo = mid
                mid = mid * 2.0 if hi == np.inf else 0.5 * (lo + hi)
        sigma[i] = mid
    return rho, sigma


def fuzzy_graph(dist: np.ndarray, k: int) -> np.ndarray:
    """Dense symmetric membership matrix ``w + w.T - w * w.T``."""
    idx, kd = knn(dist, k)
    rho, sigma = bandwidths(kd, k)
    p = dist.shape[0]
    w = np.zeros((p, p))
    rows = np.repeat(np.arange(p), k)
    w[rows, idx.ravel()] = np.exp(-np.maximum(kd - rho[:, None], 0.0) / sigma[:, None]).ravel()
    return w + w.T - w * w.T


def pca_init(points: np.ndarray, scale: float = 10.0) -> np.ndarray:
    x = points - points.mean(axis=0)
    u, s, _ = np.linalg.svd(x, full_matrices=False)
    y = u[:, :2] * s[:2]
    if y.shape[1] < 2:
        y = np.hstack([y, np.zeros((y.shape[0], 2 - y.shape[1]))])
    # fix the SVD sign ambiguity
    for c in range(2):
        if y[np.argmax(np.abs(y[:, c])), c] < 0:
            y[:, c] = -y[:, c]
    span = np.abs(y).max(axis=0)
    span[span == 0] = 1.0
    return scale * y / span


def curve_params(min_dist: float, spread: float = 1.0) -> tuple[float, float]:
    """Fit ``1 / (1 + a d^(2b))`` to the offset-exponential target curve."""
    xv = np.linspace(0, spread * 3, 300)
    yv = np.where(xv < min_dist, 1.0, np.exp(-(xv - min_dist) / spread))
    (a, b), _ = curve_fit(lambda x, a, b: 1.0 / (1.0 + a * x ** (2 * b)), xv, yv)
    return float(a), float(b)


@_accel.njit
def _next_state(state):
    # splitmix64, also reproduced bit-for-bit in _NumpyStream
    state = (state + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = state
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = z ^ (z >> np.uint64(31))
    return state, z


@_accel.njit
def _clip(v):
    return 4.0 if v > 4.0 else (-4.0 if v < -4.0 else v)


@_accel.njit
def _layout_loop(y, head, tail, epochs_per_sample, a, b, gamma, n_neg, lr0, n_epochs, seed):
    p = y.shape[0]
    n_edges = head.shape[0]
    next_sample = epochs_per_sample.copy()
    state = np.uint64(seed)
    for epoch in range(n_epochs):
        lr = lr0 * (1.0 - epoch / n_epochs)
        for e in range(n_edges):
            if next_sample[e] > epoch + 1:
                continue
            i = head[e]
            j = tail[e]
            dx = y[i, 0] - y[j, 0]
            dy = y[i, 1] - y[j, 1]
            d2 = dx * dx + dy * dy
            if d2 > 0.0:
                coef = -2.0 * a * b * d2 ** (b - 1.0) / (a * d2 ** b + 1.0)
            else:
                coef = 0.0
            gx = _clip(coef * dx)
            gy = _clip(coef * dy)
            y[i, 0] += gx * lr
            y[i, 1] += gy * lr
            y[j, 0] -= gx * lr
            y[j, 1] -= gy * lr
            for _ in range(n_neg):
                state, r = _next_state(state)
                k = np.int64(r % np.uint64(p))
                if k == i:
                    continue
                dx = y[i, 0] - y[k, 0]
                dy = y[i, 1] - y[k, 1]
                d2 = dx * dx + dy * dy
                if d2 > 0.0:
                    coef = 2.0 * gamma * b / ((0.001 + d2) * (a * d2 ** b + 1.0))
                    gx = _clip(coef * dx)
                    gy = _clip(coef * dy)
                else:
                    gx = 4.0
                    gy = 4.0
                y[i, 0] += gx * lr
                y[i, 1] += gy * lr
            next_sample[e] += epochs_per_sample[e]
    return y


def _layout_numpy(y, head, tail, epochs_per_sample, a, b, gamma, n_neg, lr0, n_epochs, seed):
    p = y.shape[0]
    next_sample = epochs_per_sample.copy()
    gen = np.random.Generator(np.random.PCG64(seed))
    for epoch in range(n_epochs):
        lr = lr0 * (1.0 - epoch / n_epochs)
        active = np.flatnonzero(next_sample <= epoch + 1)
        if active.size == 0:
            continue
        i, j = head[active], tail[active]
        diff = y[i] - y[j]
        d2 = (diff * diff).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = np.where(d2 > 0, -2.0 * a * b * d2 ** (b - 1.0) / (a * d2 ** b + 1.0), 0.0)
        g = np.clip(coef[:, None] * diff, -4.0, 4.0) * lr
        delta = np.zeros_like(y)
        np.add.at(delta, i, g)
        np.add.at(delta, j, -g)
        neg_i = np.repeat(i, n_neg)
        neg_k = gen.integers(p, size=neg_i.size)
        keep = neg_k != neg_i
        neg_i, neg_k = neg_i[keep], neg_k[keep]
        diff = y[neg_i] - y[neg_k]
        d2 = (diff * diff).sum(axis=1)
        coef = 2.0 * gamma * b / ((0.001 + d2) * (a * d2 ** b + 1.0))
        g = np.where((d2 > 0)[:, None], np.clip(coef[:, None] * diff, -4.0, 4.0), 4.0) * lr
        np.add.at(delta, neg_i, g)
        y += delta
        next_sample[active] += epochs_per_sample[active]
    return y


def embed_2d(points, config: EmbedConfig = EmbedConfig(), sources=None, kinds=None,
             use_numba: bool | None = None) -> Embedding:
    """Embed ``P`` equal-length vectors into the plane."""
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError("points must share one dimension")
    p = x.shape[0]
    k = config.n_neighbors
    if p < k + 1:
        raise ParameterError(f"too few points: {p} points for n_neighbors={k}")
    if not np.isfinite(x).all():
        raise ParameterError("non-finite point coordinates")
    dist = pairwise_distances(x, use_numba)
    if dist.max() == 0.0:
        raise ParameterError("degenerate points: all points coincide")
    graph = fuzzy_graph(dist, k)
    head, tail = np.nonzero(np.triu(graph, k=1))
    weights = graph[head, tail]
    keep = weights >= weights.max() / config.epochs
    head, tail, weights = head[keep].astype(np.int64), tail[keep].astype(np.int64), weights[keep]
    epochs_per_sample = weights.max() / weights
    a, b = curve_params(config.min_dist)
    y = pca_init(x)
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    layout = _layout_loop if use_numba else _layout_numpy
    seed = derive_seed(config.seed, "embed") & 0x7FFFFFFFFFFFFFFF
    y = layout(np.ascontiguousarray(y), head, tail, epochs_per_sample, a, b,
               float(config.repulsion), int(config.negative_samples), float(config.learning_rate),
               int(config.epochs), np.uint64(seed) if use_numba else seed)
    if not np.isfinite(y).all():
        raise ParameterError("embedding diverged")
    src = np.zeros(p, dtype=np.int64) if sources is None else np.asarray(sources, dtype=np.int64)
    knd = np.full(p, PREDICTED) if kinds is None else np.asarray(kinds)
    return Embedding(y, src, knd)


@dataclass(frozen=True)
class SourceReport:
    source: int
    centroid: tuple[float, float]
    dist_own: float
    dist_other: float
    own_nearest: bool


@dataclass(frozen=True)
class ClusterReport:
    per_source: list[SourceReport]

    @property
    def own_nearest_fraction(self) -> float:
        if not self.per_source:
            return float("nan")
        return sum(r.own_nearest for r in self.per_source) / len(self.per_source)


def cluster_report(emb: Embedding) -> ClusterReport:
    """Is each source's predicted-point centroid closest to its own TRUE point?"""
    kinds = np.asarray(emb.kinds)
    true_mask = kinds == TRUE
    true_sources = emb.sources[true_mask]
    true_xy = emb.coords[true_mask]
    reports = []
    for s in np.unique(emb.sources[kinds == PREDICTED]):
        own = np.flatnonzero(true_sources == s)
        if own.size == 0:
            raise ParameterError(f"missing TRUE point for source {int(s)}")
        centroid = emb.coords[(kinds == PREDICTED) & (emb.sources == s)].mean(axis=0)
        d = np.linalg.norm(true_xy - centroid, axis=1)
        d_own = float(d[own].min())
        others = d[true_sources != s]
        d_other = float(others.min()) if others.size else float("inf")
        reports.append(SourceReport(int(s), (float(centroid[0]), float(centroid[1])),
                                    d_own, d_other, d_own < d_other))
    return ClusterReport(reports)


def knn_purity(coords: np.ndarray, labels, k: int = 10) -> float:
    """Mean share of each point's k nearest 2-D neighbours carrying its label."""
    labels = np.asarray(labels)
    idx, _ = knn(_distances_numpy(np.asarray(coords, dtype=np.float64)), k)
    return float((labels[idx] == labels[:, None]).mean())
