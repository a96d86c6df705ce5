"""Numba vs numpy timings for the two hot quadrature kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Both flavours run in the same process on the same inputs; the first numba
call (compilation) is excluded from the timings and reported separately.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from eventloc import kernels, reduced1d as r1
from eventloc._accel import HAVE_NUMBA
from eventloc.born_amplitude import (QuadratureSettings, _w_nodes, channel_energy, channel_grid, phi0_tilde,
                                     reference_scenario, shell_transfer)


def channel_case(n=(12, 12, 8, 4)):
    beam, atom = reference_scenario()
    st = QuadratureSettings(*n)
    g = channel_grid(atom, beam, *n)
    eps = channel_energy(g, atom, beam)
    w, _ = _w_nodes(shell_transfer(eps, beam.p_mean, beam.mass), beam.coherence_length, st.n_w_panels, st.w_order)
    lc, t = beam.coherence_length, (atom.Z + 2 * beam.coherence_length) / beam.v
    U = 6.0 / lc
    rate = abs(atom.Z) + beam.v * t + abs(atom.Z - beam.v * t)
    h = min(2 * np.pi / rate, 0.5 / lc)
    n_panels = int(np.ceil(2 * U / h)) + 1
    return (g.kappa, g.q, eps, w, g.A_B, g.A_C, phi0_tilde(g.q, atom.a), beam.p_mean, beam.mass, atom.Z, t, lc,
            atom.a, atom.units.e2_natural / np.pi**2, 1.0, U, h, n_panels, kernels.GL8_X, kernels.GL8_W)


def reduced_case(n_out=2000):
    beam, atom = reference_scenario()
    m = r1.Reduced1D.from_physical(beam, atom)
    u1 = np.linspace(-4 * m.kappa, 3 / m.lc, n_out)
    un, uw = r1._composite(-6 / m.lc, 6 / m.lc, 0.1 / m.lc)
    Vpar = np.array([m.coup, m.kappa**2, m.a**2])
    return (u1, un, uw, m.f(un), Vpar, m.pbar, m.M, m.eps, atom.Z, (atom.Z + 6 * m.lc) / m.v)


def best_of(fn, repeat):
    ts = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        ts.append(time.perf_counter() - t)
    return min(ts), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba unavailable or disabled (EVENTLOC_NO_NUMBA); nothing to compare")
        return 0
    cases = [
        ("channel_amplitudes", channel_case(), kernels.channel_amplitudes_numba, kernels.channel_amplitudes_numpy),
        ("amp1d", reduced_case(), r1._amp1d, r1._amp1d_numpy),
    ]
    print(f"{'kernel':<20}{'compile_s':>12}{'numba_s':>12}{'numpy_s':>12}{'speedup':>10}{'max_rel_diff':>15}")
    for name, case, fnb, fnp in cases:
        t = time.perf_counter()
        fnb(*case)
        compile_s = time.perf_counter() - t
        tb, a = best_of(lambda: fnb(*case), args.repeat)
        tn, b = best_of(lambda: fnp(*case), args.repeat)
        diff = float(np.max(np.abs(a - b)) / np.max(np.abs(a)))
        print(f"{name:<20}{compile_s:>12.3f}{tb:>12.4f}{tn:>12.4f}{tn / tb:>10.1f}{diff:>15.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
