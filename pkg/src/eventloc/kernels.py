"""Hot quadrature kernels, each in a numba and a vectorised-numpy flavour.

``channel_amplitudes`` selects the implementation from ``_accel``; the
``*_numba`` / ``*_numpy`` functions are public so the benchmark and the
tests can compare them directly.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import HAVE_NUMBA, njit

GL8_X, GL8_W = np.polynomial.legendre.leggauss(8)
PHI0_NORM = 2.0 * math.sqrt(2.0) / math.pi


@njit(cache=True)
def _g_time(delta, t):
    # (exp(i delta t) - 1)/(i delta) = exp(i delta t/2) sin(delta t/2)/(delta/2)
    x = 0.5 * delta * t
    if abs(x) < 1e-8:
        amp = t
    else:
        amp = math.sin(x) / (0.5 * delta)
    return complex(math.cos(x) * amp, math.sin(x) * amp)


@njit(cache=True)
def _panel_nodes(w, U, h, n_panels, kappa, xg, wg, s_out, wt_out):
    # composite GL over s in [k0 h, (k0 + n_panels) h]; panels touching s = 0
    # use s = kappa sinh(tau) to resolve the 1/(kappa^2 + s^2) peak
    k0 = math.floor((w - U) / h)
    n = xg.shape[0]
    m = 0
    for p in range(n_panels):
        k = k0 + p
        lo = k * h
        if k == 0 or k == -1:
            T = math.asinh(h / kappa)
            for i in range(n):
                tau = 0.5 * T * (xg[i] + 1.0)
                s = kappa * math.sinh(tau)
                jac = kappa * math.cosh(tau) * 0.5 * T * wg[i]
                if k == -1:
                    s = -s
                s_out[m] = s
                wt_out[m] = jac
                m += 1
        else:
            for i in range(n):
                s_out[m] = lo + 0.5 * h * (xg[i] + 1.0)
                wt_out[m] = 0.5 * h * wg[i]
                m += 1


@njit(cache=True)
def channel_amplitudes_numba(kap, qm, eps, wgrid, A_B, A_C, phi0q,
                             pbar, M, Z, t, lc, a, coup, eta, U, h, n_panels, xg, wg):
    """First-order amplitudes c[ik, iq, ic, j] for every channel and p1z offset.

    kap (nk,), qm (nq,): transverse transfer and electron momentum nodes
    eps (nk, nq): channel energy including the transverse recoil
    A_B (nq, nc), A_C (nq, nc): 2 q sin(th) cos(ph) and 2 q cos(th) per angle pair
    phi0q (nq,): ground-state transform at |q| (for the orthogonalised form)
    wgrid (nk, nq, nj): longitudinal transfer pbar - p1z at the output nodes
    """
    nk = kap.shape[0]
    nq = qm.shape[0]
    nc = A_B.shape[1]
    nj = wgrid.shape[2]
    npts = n_panels * xg.shape[0]
    out = np.zeros((nk, nq, nc, nj), dtype=np.complex128)
    s_nodes = np.empty(npts)
    s_wt = np.empty(npts)
    fnorm = (2.0 * lc * lc / math.pi) ** 0.25
    a2 = a * a
    for ik in range(nk):
        kp = kap[ik]
        k2p = kp * kp
        for iq in range(nq):
            q = qm[iq]
            q2 = q * q
            e = eps[ik, iq]
            for j in range(nj):
                w = wgrid[ik, iq, j]
                _panel_nodes(w, U, h, n_panels, kp, xg, wg, s_nodes, s_wt)
                for m in range(npts):
                    s = s_nodes[m]
                    u = s - w
                    fu = fnorm * math.exp(-u * u * lc * lc)
                    if fu < 1e-300:
                        continue
                    delta = e - s * (2.0 * pbar + u - w) / (2.0 * M)
                    g = _g_time(delta, t)
                    ph = s * Z
                    k2 = k2p + s * s
                    base = s_wt[m] * fu * complex(math.cos(ph), math.sin(ph)) * g * (coup / k2)
                    f00 = 0.0
                    if eta != 0.0:
                        x = 1.0 + 0.25 * a2 * k2
                        f00 = eta / (x * x)
                    for c in range(nc):
                        Q2 = q2 + k2 - kp * A_B[iq, c] - s * A_C[iq, c]
                        y = 1.0 + a2 * Q2
                        v = PHI0_NORM * a ** 1.5 / (y * y) - phi0q[iq] * f00
                        out[ik, iq, c, j] += base * v
    return out * (-1j)


def _panel_nodes_numpy(w, U, h, n_panels, kappa, xg, wg):
    k0 = np.floor((w - U) / h)
    k = k0[:, None] + np.arange(n_panels)[None, :]  # (nj, np)
    lo = k * h
    s = lo[:, :, None] + 0.5 * h * (xg[None, None, :] + 1.0)
    wt = np.broadcast_to(0.5 * h * wg, s.shape).copy()
    T = math.asinh(h / kappa)
    tau = 0.5 * T * (xg + 1.0)
    ss = kappa * np.sinh(tau)
    sw = kappa * np.cosh(tau) * 0.5 * T * wg
    for kk, sign in ((0, 1.0), (-1, -1.0)):
        hit = k == kk
        s[hit] = sign * ss
        wt[hit] = sw
    return s.reshape(len(w), -1), wt.reshape(len(w), -1)


def channel_amplitudes_numpy(kap, qm, eps, wgrid, A_B, A_C, phi0q,
                             pbar, M, Z, t, lc, a, coup, eta, U, h, n_panels, xg, wg):
    nk, nq, nc, nj = len(kap), len(qm), A_B.shape[1], wgrid.shape[2]
    out = np.zeros((nk, nq, nc, nj), dtype=complex)
    fnorm = (2.0 * lc * lc / math.pi) ** 0.25
    a2 = a * a
    for ik in range(nk):
        kp = kap[ik]
        for iq in range(nq):
            q = qm[iq]
            w = wgrid[ik, iq]
            s, wt = _panel_nodes_numpy(w, U, h, n_panels, kp, xg, wg)
            u = s - w[:, None]
            fu = fnorm * np.exp(-u * u * lc * lc)
            delta = eps[ik, iq] - s * (2.0 * pbar + u - w[:, None]) / (2.0 * M)
            x = 0.5 * delta * t
            small = np.abs(x) < 1e-8
            amp = np.where(small, t, np.sin(x) / np.where(small, 1.0, 0.5 * delta))
            g = np.exp(1j * x) * amp
            k2 = kp * kp + s * s
            base = wt * fu * np.exp(1j * s * Z) * g * (coup / k2)
            f00 = eta / (1.0 + 0.25 * a2 * k2) ** 2 if eta != 0.0 else 0.0
            Q2 = (q * q + k2)[None] - kp * A_B[iq][:, None, None] - s[None] * A_C[iq][:, None, None]
            v = PHI0_NORM * a**1.5 / (1.0 + a2 * Q2) ** 2 - phi0q[iq] * f00
            out[ik, iq] = np.einsum("jm,cjm->cj", base, v)
    return out * (-1j)


def channel_amplitudes(*args, backend: str | None = None):
    use = backend or ("numba" if HAVE_NUMBA else "numpy")
    if use == "numba":
        return channel_amplitudes_numba(*args)
    return channel_amplitudes_numpy(*args)
