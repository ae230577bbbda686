"""Pearson/Spearman correlation matrices, upper-triangle vectors and MSE."""
from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from ._binio import open_reader, pack_array, pack_header, write_atomic
from .errors import DegenerateSeriesError, ParameterError, ShapeError

PEARSON = "PEARSON"
SPEARMAN = "SPEARMAN"

CM_MAGIC = b"CNCM"
CM_VERSION = 1


def _method(method: str) -> str:
    m = method.upper()
    if m not in (PEARSON, SPEARMAN):
        raise ParameterError(f"unknown correlation method {method!r}")
    return m


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def nodes_from_pairs(m: int) -> int:
    """Inverse of :func:`pair_count`; raises for non-triangular ``m``."""
    n = int(round((1 + np.sqrt(1 + 8 * m)) / 2))
    if m < 1 or pair_count(n) != m:
        raise ShapeError(f"bad vector length {m}: not N(N-1)/2 for an integer N >= 2")
    return n


def _standardized_rows(x: np.ndarray) -> np.ndarray:
    centered = x - x.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.einsum("ij,ij->i", centered, centered))
    bad = np.flatnonzero(norms == 0)
    if bad.size:
        raise DegenerateSeriesError("degenerate series", row=int(bad[0]))
    return centered / norms[:, None]


def _prepare(x: np.ndarray, method: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if not np.isfinite(x).all():
        raise ParameterError("series contain non-finite values")
    if _method(method) == SPEARMAN:
        x = rankdata(x, method="average", axis=1)
    return x


def corr_pair(u, v, method: str = PEARSON) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or u.shape != v.shape:
        raise ShapeError(f"series must be 1-D of equal length, got {u.shape} and {v.shape}")
    if u.size < 2:
        raise ParameterError("need at least two samples")
    z = _standardized_rows(_prepare(np.vstack([u, v]), method))
    return float(np.clip(z[0] @ z[1], -1.0, 1.0))


def corr_matrix(x, method: str = PEARSON) -> np.ndarray:
    """``(N, N)`` correlation matrix between the rows of ``x``."""
    x = np.asarray(x)
    if x.ndim != 2:
        raise ShapeError("time-series matrix must be 2-D")
    if x.shape[1] < 2:
        raise ParameterError("need L >= 2 samples")
    z = _standardized_rows(_prepare(x, method))
    r = z @ z.T
    r = 0.5 * (r + r.T)
    np.clip(r, -1.0, 1.0, out=r)
    np.fill_diagonal(r, 1.0)
    return r


def upper_tri(r: np.ndarray) -> np.ndarray:
    """Strict upper triangle in row-major pair order (1,2),(1,3),...,(N-1,N)."""
    r = np.asarray(r)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ShapeError(f"expected a square matrix, got {r.shape}")
    iu = np.triu_indices(r.shape[0], k=1)
    return r[iu].copy()


def unflatten(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=np.float64)
    n = nodes_from_pairs(vec.size)
    r = np.eye(n)
    iu = np.triu_indices(n, k=1)
    r[iu] = vec
    r[(iu[1], iu[0])] = vec
    return r


def mse(r_true, r_pred) -> float:
    a = np.asarray(r_true, dtype=np.float64)
    b = np.asarray(r_pred, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def mse_rows(r_true, r_pred) -> np.ndarray:
    """Per-row MSE of two ``(B, m)`` arrays (or broadcastable targets)."""
    a = np.asarray(r_true, dtype=np.float64)
    b = np.asarray(r_pred, dtype=np.float64)
    if a.shape[-1] != b.shape[-1]:
        raise ShapeError(f"length mismatch: {a.shape} vs {b.shape}")
    return np.mean((a - b) ** 2, axis=-1)


def avg_mse(per_window_mses) -> float:
    vals = np.asarray(list(per_window_mses), dtype=np.float64)
    if vals.size == 0:
        raise ParameterError("avg_mse of an empty list")
    return float(vals.mean())


def save_corr(r: np.ndarray, path: str | Path) -> None:
    """Store the upper triangle of ``r`` (or an already-flat vector)."""
    r = np.asarray(r, dtype=np.float64)
    vec = upper_tri(r) if r.ndim == 2 else r
    n = nodes_from_pairs(vec.size)
    write_atomic(path, pack_header(CM_MAGIC, CM_VERSION, [n]) + pack_array(vec, "<f8"))


def load_corr(path: str | Path) -> np.ndarray:
    """Read a correlation file back as its full symmetric matrix."""
    rd = open_reader(path, CM_MAGIC, CM_VERSION, "correlation-matrix")
    (n,) = rd.u32s(1)
    vec = rd.array("<f8", pair_count(n))
    rd.finish()
    if n < 2:
        raise ShapeError(f"correlation file declares N={n}")
    return unflatten(vec)
