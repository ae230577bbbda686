"""Coupled Rossler and FitzHugh-Nagumo oscillators on a graph.

Both systems are diffusively coupled through the x-variable only::

    Rossler:  x' = -w y - z + lam * sum_j A_ij (x_j - x_i)
              y' =  w x + a y
              z' =  b + z (x - c)

    FHN:      x' = (x (x - a)(1 - x) - y) / delta + lam * sum_j A_ij (x_j - x_i)
              y' =  x - y - b + r sin(w t)

Integration is fixed-step RK4.  The stepping loop exists twice: a numba
kernel (:func:`_integrate_loop`) and a vectorised numpy path
(:func:`_integrate_numpy`); ``CORRNET_NUMBA`` picks one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _accel
from ._binio import open_reader, pack_array, pack_header, write_atomic
from .errors import DivergenceError, ParameterError, ShapeError
from .netgen import Graph
from .seeding import rng

ROSSLER = "ROSSLER"
FHN = "FHN"
KINDS = (ROSSLER, FHN)
STATE_DIM = {ROSSLER: 3, FHN: 2}

# (mean, variance) of the natural / drive frequencies
FREQUENCY_LAW = {ROSSLER: (1.0, 0.03), FHN: (15.0, 0.001)}

TS_MAGIC = b"CNTS"
TS_VERSION = 1


def _check_kind(kind: str) -> str:
    kind = kind.upper()
    if kind not in KINDS:
        raise ParameterError(f"unknown oscillator kind {kind!r}")
    return kind


@dataclass(frozen=True)
class OscillatorParams:
    kind: str = ROSSLER
    coupling: float = 0.0
    rossler_a: float = 0.15
    rossler_b: float = 0.2
    rossler_c: float = 10.0
    fhn_a: float = 0.42
    fhn_b: float = 0.15
    fhn_delta: float = 0.005
    fhn_drive_amp: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "kind", _check_kind(self.kind))
        if not self.coupling >= 0:
            raise ParameterError(f"coupling must be >= 0, got {self.coupling}")
        if not self.fhn_delta > 0:
            raise ParameterError("delta must be positive")

    @property
    def dim(self) -> int:
        return STATE_DIM[self.kind]

    def constants(self) -> tuple[float, float, float, float]:
        if self.kind == ROSSLER:
            return (self.rossler_a, self.rossler_b, self.rossler_c, 0.0)
        return (self.fhn_a, self.fhn_b, self.fhn_delta, self.fhn_drive_amp)


@dataclass(frozen=True)
class SimConfig:
    dt: float
    transient_time: float = 200.0
    sample_stride: int = 5
    length: int = 5000

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError("dt must be positive")
        if self.length < 1:
            raise ParameterError("length_L must be >= 1")
        if self.transient_time < 0:
            raise ParameterError("transient_time must be >= 0")
        if self.sample_stride < 1:
            raise ParameterError("sample_stride must be >= 1")

    @property
    def transient_steps(self) -> int:
        return int(round(self.transient_time / self.dt))

    @property
    def total_steps(self) -> int:
        return self.transient_steps + (self.length - 1) * self.sample_stride


def default_sim(kind: str, length: int = 5000) -> SimConfig:
    if _check_kind(kind) == ROSSLER:
        return SimConfig(dt=0.01, transient_time=200.0, sample_stride=5, length=length)
    return SimConfig(dt=0.001, transient_time=200.0, sample_stride=50, length=length)


@dataclass(frozen=True)
class StateTrajectory:
    states: np.ndarray = field(repr=False)  # (N, L, dim)
    dt_sample: float

    @property
    def node_count(self) -> int:
        return self.states.shape[0]

    @property
    def length(self) -> int:
        return self.states.shape[1]

    def x_matrix(self) -> np.ndarray:
        return np.ascontiguousarray(self.states[:, :, 0])


@dataclass(frozen=True)
class SyncError:
    per_node: np.ndarray
    value: float


def draw_frequencies(kind: str, node_count: int, seed: int, spread: str = "variance") -> np.ndarray:
    """Gaussian natural frequencies.

    ``spread="variance"`` reads the law's second number as a variance;
    ``spread="std"`` reads it as a standard deviation (a narrower spread,
    which puts weak couplings near the onset of partial synchrony).
    """
    kind = _check_kind(kind)
    if node_count < 1:
        raise ParameterError("node_count must be >= 1")
    mean, second = FREQUENCY_LAW[kind]
    if spread == "variance":
        sigma = math.sqrt(second)
    elif spread == "std":
        sigma = second
    else:
        raise ParameterError(f"unknown frequency spread {spread!r}")
    return rng(seed, "omega", kind).normal(mean, sigma, size=node_count)


def initial_state(kind: str, node_count: int, seed: int) -> np.ndarray:
    kind = _check_kind(kind)
    gen = rng(seed, "init", kind)
    if kind == ROSSLER:
        st = np.empty((node_count, 3))
        st[:, :2] = gen.uniform(-1.0, 1.0, size=(node_count, 2))
        st[:, 2] = gen.uniform(0.0, 1.0, size=node_count)
        return st
    return gen.uniform(0.0, 1.0, size=(node_count, 2))


def _csr(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    n = graph.node_count
    e = graph.edge_array()
    src = np.concatenate([e[:, 0], e[:, 1]])
    dst = np.concatenate([e[:, 1], e[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return indptr, dst.astype(np.int64)


def _field_numpy(kind_code, state, t, omegas, src, dst, lam, p0, p1, p2, p3):
    x = state[:, 0]
    y = state[:, 1]
    n = state.shape[0]
    cx = np.bincount(src, weights=x[dst] - x[src], minlength=n) if src.size else np.zeros(n)
    out = np.empty_like(state)
    if kind_code == 0:
        z = state[:, 2]
        out[:, 0] = -omegas * y - z + lam * cx
        out[:, 1] = omegas * x + p0 * y
        out[:, 2] = p1 + z * (x - p2)
    else:
        out[:, 0] = (x * (x - p0) * (1.0 - x) - y) / p2 + lam * cx
        out[:, 1] = x - y - p1 + p3 * np.sin(omegas * t)
    return out


def vector_field(params: OscillatorParams, graph: Graph, omegas, state, t: float = 0.0) -> np.ndarray:
    """Right-hand side of the coupled system at ``(state, t)``."""
    state = np.asarray(state, dtype=np.float64)
    omegas = np.asarray(omegas, dtype=np.float64)
    n = graph.node_count
    if state.shape != (n, params.dim) or omegas.shape != (n,):
        raise ShapeError(
            f"state shape error: expected state {(n, params.dim)} and omegas {(n,)}, "
            f"got {state.shape} and {omegas.shape}"
        )
    indptr, dst = _csr(graph)
    src = np.repeat(np.arange(n), np.diff(indptr))
    code = 0 if params.kind == ROSSLER else 1
    return _field_numpy(code, state, t, omegas, src, dst, params.coupling, *params.constants())


@_accel.njit
def _field_loop(kind_code, state, t, omegas, indptr, indices, lam, p0, p1, p2, p3, out):
    n = state.shape[0]
    for i in range(n):
        xi = state[i, 0]
        cx = 0.0
        for e in range(indptr[i], indptr[i + 1]):
            cx += state[indices[e], 0] - xi
        yi = state[i, 1]
        if kind_code == 0:
            zi = state[i, 2]
            out[i, 0] = -omegas[i] * yi - zi + lam * cx
            out[i, 1] = omegas[i] * xi + p0 * yi
            out[i, 2] = p1 + zi * (xi - p2)
        else:
            out[i, 0] = (xi * (xi - p0) * (1.0 - xi) - yi) / p2 + lam * cx
            out[i, 1] = xi - yi - p1 + p3 * math.sin(omegas[i] * t)


@_accel.njit
def _integrate_loop(kind_code, state0, omegas, indptr, indices, lam, p0, p1, p2, p3,
                    dt, n_transient, stride, length):
    n, dim = state0.shape
    traj = np.empty((n, length, dim))
    s = state0.copy()
    k1 = np.empty_like(s)
    k2 = np.empty_like(s)
    k3 = np.empty_like(s)
    k4 = np.empty_like(s)
    tmp = np.empty_like(s)
    total = n_transient + (length - 1) * stride
    sample = 0
    for step in range(total + 1):
        if step >= n_transient and (step - n_transient) % stride == 0:
            for i in range(n):
                for d in range(dim):
                    traj[i, sample, d] = s[i, d]
            sample += 1
        if step == total:
            break
        t = step * dt
        _field_loop(kind_code, s, t, omegas, indptr, indices, lam, p0, p1, p2, p3, k1)
        for i in range(n):
            for d in range(dim):
                tmp[i, d] = s[i, d] + 0.5 * dt * k1[i, d]
        _field_loop(kind_code, tmp, t + 0.5 * dt, omegas, indptr, indices, lam, p0, p1, p2, p3, k2)
        for i in range(n):
            for d in range(dim):
                tmp[i, d] = s[i, d] + 0.5 * dt * k2[i, d]
        _field_loop(kind_code, tmp, t + 0.5 * dt, omegas, indptr, indices, lam, p0, p1, p2, p3, k3)
        for i in range(n):
            for d in range(dim):
                tmp[i, d] = s[i, d] + dt * k3[i, d]
        _field_loop(kind_code, tmp, t + dt, omegas, indptr, indices, lam, p0, p1, p2, p3, k4)
        ok = True
        for i in range(n):
            for d in range(dim):
                v = s[i, d] + (dt / 6.0) * (k1[i, d] + 2.0 * k2[i, d] + 2.0 * k3[i, d] + k4[i, d])
                s[i, d] = v
                if not math.isfinite(v):
                    ok = False
        if not ok:
            return traj, step + 1
    return traj, -1


def _integrate_numpy(kind_code, state0, omegas, indptr, indices, lam, p0, p1, p2, p3,
                     dt, n_transient, stride, length):
    n, dim = state0.shape
    src = np.repeat(np.arange(n), np.diff(indptr))
    args = (omegas, src, indices, lam, p0, p1, p2, p3)
    traj = np.empty((n, length, dim))
    s = state0.copy()
    total = n_transient + (length - 1) * stride
    sample = 0
    for step in range(total + 1):
        if step >= n_transient and (step - n_transient) % stride == 0:
            traj[:, sample, :] = s
            sample += 1
        if step == total:
            break
        t = step * dt
        k1 = _field_numpy(kind_code, s, t, *args)
        k2 = _field_numpy(kind_code, s + 0.5 * dt * k1, t + 0.5 * dt, *args)
        k3 = _field_numpy(kind_code, s + 0.5 * dt * k2, t + 0.5 * dt, *args)
        k4 = _field_numpy(kind_code, s + dt * k3, t + dt, *args)
        s = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(s).all():
            return traj, step + 1
    return traj, -1


def simulate(graph: Graph, params: OscillatorParams, omegas, init_seed: int,
             sim: SimConfig, state0=None, use_numba: bool | None = None
             ) -> tuple[StateTrajectory, np.ndarray]:
    """Integrate, drop the transient, and sample every ``sample_stride`` steps.

    Sample ``k`` is the state after ``transient_steps + k * sample_stride``
    RK4 steps.  Returns the full trajectory and the ``(N, L)`` x-matrix.
    ``state0`` overrides the seeded initial condition.
    """
    n = graph.node_count
    omegas = np.ascontiguousarray(omegas, dtype=np.float64)
    if omegas.shape != (n,):
        raise ShapeError(f"state shape error: omegas has shape {omegas.shape}, expected {(n,)}")
    if state0 is None:
        state0 = initial_state(params.kind, n, init_seed)
    state0 = np.ascontiguousarray(state0, dtype=np.float64)
    if state0.shape != (n, params.dim):
        raise ShapeError(f"state shape error: expected {(n, params.dim)}, got {state0.shape}")
    indptr, indices = _csr(graph)
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    kernel = _integrate_loop if use_numba else _integrate_numpy
    with np.errstate(over="ignore", invalid="ignore"):
        traj, fail = kernel(0 if params.kind == ROSSLER else 1, state0, omegas, indptr, indices,
                            float(params.coupling), *map(float, params.constants()),
                            float(sim.dt), sim.transient_steps, sim.sample_stride, sim.length)
    if fail >= 0:
        raise DivergenceError(int(fail))
    out = StateTrajectory(traj, sim.dt * sim.sample_stride)
    return out, out.x_matrix()


@_accel.njit
def _pair_distance_sums(states, start, length):
    n, _, dim = states.shape
    acc = np.zeros(n)
    for k in range(start, start + length):
        for i in range(n):
            for j in range(i + 1, n):
                s = 0.0
                for d in range(dim):
                    diff = states[i, k, d] - states[j, k, d]
                    s += diff * diff
                r = math.sqrt(s)
                acc[i] += r
                acc[j] += r
    return acc


def _pair_distance_sums_numpy(states, start, length, chunk=256):
    n = states.shape[0]
    acc = np.zeros(n)
    for lo in range(start, start + length, chunk):
        hi = min(lo + chunk, start + length)
        a = np.transpose(states[:, lo:hi, :], (1, 0, 2))
        d = np.sqrt(((a[:, :, None, :] - a[:, None, :, :]) ** 2).sum(axis=-1))
        acc += d.sum(axis=(0, 2))
    return acc


def sync_error(traj: StateTrajectory, t_start_index: int = 0, length: int | None = None,
               use_numba: bool | None = None) -> SyncError:
    """Global synchronization error over samples ``[t_start, t_start+length)``.

    ``per_node[i] = sum_j sum_k ||s_ik - s_jk|| / (L N)`` using full state
    vectors; the global value is the mean over nodes.
    """
    if length is None:
        length = traj.length - t_start_index
    if length < 1:
        raise ParameterError("empty evaluation window")
    if t_start_index < 0 or t_start_index + length > traj.length:
        raise ParameterError(
            f"window [{t_start_index}, {t_start_index + length}) outside trajectory of length {traj.length}"
        )
    if use_numba is None:
        use_numba = _accel.USE_NUMBA
    states = np.ascontiguousarray(traj.states, dtype=np.float64)
    kernel = _pair_distance_sums if use_numba else _pair_distance_sums_numpy
    sums = kernel(states, int(t_start_index), int(length))
    per_node = sums / (length * traj.node_count)
    return SyncError(per_node, float(per_node.mean()))


def save_series(x: np.ndarray, path: str | Path) -> None:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError("time-series matrix must be 2-D")
    n, length = x.shape
    write_atomic(path, pack_header(TS_MAGIC, TS_VERSION, [n, length]) + pack_array(x, "<f8"))


def load_series(path: str | Path) -> np.ndarray:
    r = open_reader(path, TS_MAGIC, TS_VERSION, "time-series")
    n, length = r.u32s(2)
    x = r.array("<f8", n * length, (n, length))
    r.finish()
    return x


__all__ = [
    "ROSSLER", "FHN", "OscillatorParams", "SimConfig", "StateTrajectory", "SyncError",
    "default_sim", "draw_frequencies", "initial_state", "vector_field", "simulate",
    "sync_error", "save_series", "load_series",
]
