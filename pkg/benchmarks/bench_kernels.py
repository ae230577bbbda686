"""Compare the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--nodes 30] [--length 1000] [--repeat 3]

Each kernel runs once untimed (numba compilation / cache load), then
``--repeat`` timed runs; the best time is reported along with the maximum
absolute difference between the two backends' outputs.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from corrnet import _accel
from corrnet.dynamics import OscillatorParams, SimConfig, draw_frequencies, simulate, sync_error
from corrnet.embed import EmbedConfig, embed_2d, pairwise_distances
from corrnet.netgen import gen_er


def best_time(fn, repeat: int) -> tuple[float, object]:
    out = fn()
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=30)
    ap.add_argument("--length", type=int, default=1000)
    ap.add_argument("--points", type=int, default=300)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    g = gen_er(args.nodes, 6.0, seed=1)
    omegas = draw_frequencies("ROSSLER", args.nodes, 2, spread="std")
    sim = SimConfig(dt=0.01, transient_time=50.0, sample_stride=20, length=args.length)
    params = OscillatorParams("ROSSLER", 0.04)
    pts = np.random.default_rng(3).normal(size=(args.points, args.nodes * (args.nodes - 1) // 2))
    traj = simulate(g, params, omegas, 4, sim)[0]

    cases = {
        "rk4 integrate": lambda nb: simulate(g, params, omegas, 4, sim, use_numba=nb)[1],
        "sync error": lambda nb: np.array([sync_error(traj, use_numba=nb).value]),
        "pairwise distances": lambda nb: pairwise_distances(pts, use_numba=nb),
        "embedding layout": lambda nb: embed_2d(pts, EmbedConfig(epochs=100), use_numba=nb).coords,
    }
    print(f"{'kernel':<20} {'numba s':>10} {'numpy s':>10} {'speedup':>8} {'max |diff|':>12}")
    for name, fn in cases.items():
        t_nb, out_nb = best_time(lambda: fn(True), args.repeat)
        t_np, out_np = best_time(lambda: fn(False), args.repeat)
        diff = float(np.max(np.abs(np.asarray(out_nb) - np.asarray(out_np))))
        note = "  (different descent schedule)" if name == "embedding layout" else ""
        print(f"{name:<20} {t_nb:>10.4f} {t_np:>10.4f} {t_np / t_nb:>8.1f} {diff:>12.3g}{note}")


if __name__ == "__main__":
    main()
