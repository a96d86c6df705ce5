"""Two-time consistent-histories checks on finite matrices."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResolutionError, ValidationError

TOL = 1e-10
MAX_DIM = 512


def _check_projector(P: np.ndarray, name: str) -> None:
    if np.max(np.abs(P - P.conj().T), initial=0.0) > TOL:
        raise ValidationError(f"{name} is not Hermitian", key=name)
    if np.max(np.abs(P @ P - P), initial=0.0) > TOL:
        raise ValidationError(f"{name} is not idempotent", key=name)


@dataclass(frozen=True)
class HistoryProblem:
    rho: np.ndarray
    P1: np.ndarray
    P2: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        P1 = np.asarray(self.P1, dtype=complex)
        P2 = np.asarray(self.P2, dtype=complex)
        n = rho.shape[0]
        if n > MAX_DIM:
            raise ValidationError(f"dimension {n} exceeds cap {MAX_DIM}", key="dim")
        for name, m in (("rho", rho), ("P1", P1), ("P2", P2)):
            if m.shape != (n, n):
                raise ValidationError(f"{name} must be {n}x{n}, got {m.shape}", key=name)
        if np.max(np.abs(rho - rho.conj().T)) > TOL:
            raise ValidationError("rho is not Hermitian", key="rho")
        if abs(np.trace(rho) - 1.0) > TOL:
            raise ValidationError("rho must have unit trace", key="rho")
        if np.linalg.eigvalsh(rho).min() < -TOL:
            raise ValidationError("rho is not positive semidefinite", key="rho")
        _check_projector(P1, "P1")
        _check_projector(P2, "P2")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "P1", P1)
        object.__setattr__(self, "P2", P2)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


def lueders_update(hp: HistoryProblem) -> np.ndarray:
    """Non-selective measurement of P1: P1 rho P1 + (1-P1) rho (1-P1)."""
    P = hp.P1
    Q = np.eye(hp.dim) - P
    return P @ hp.rho @ P + Q @ hp.rho @ Q


def _residual_raw(rho, P1, P2) -> complex:
    inner = rho @ P1 - P1 @ rho
    outer = P1 @ inner - inner @ P1
    return np.trace(P2 @ outer)


def consistency_residual(hp: HistoryProblem) -> dict:
    """Tr P2 [P1, [rho, P1]] together with the two P2 probabilities.

    Since rho' - rho = [P1, [rho, P1]], the residual equals
    prob_with_P1 - prob_without_P1 exactly.
    """
    r = _residual_raw(hp.rho, hp.P1, hp.P2)
    if abs(r.imag) > TOL:
        raise ValidationError(f"residual has imaginary part {r.imag}")
    rho_p = lueders_update(hp)
    P2 = hp.P2
    with_p1 = np.trace(P2 @ rho_p @ P2).real
    without = np.trace(P2 @ hp.rho @ P2).real
    return {"residual": float(r.real), "prob_with_P1": float(with_p1), "prob_without_P1": float(without)}


# random instances ---------------------------------------------------------

def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    k = n if rank is None else rank
    G = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_projector(n: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    Q, _ = np.linalg.qr(G)
    return Q @ Q.conj().T


def window_projector(mask: np.ndarray, basis: np.ndarray | None = None) -> np.ndarray:
    """Projector onto grid points selected by ``mask``.

    With a ``basis`` (columns), the indicator-truncated vectors are
    re-orthonormalised by a QR step before forming the projector.
    """
    m = np.asarray(mask, dtype=bool)
    if basis is None:
        return np.diag(m.astype(complex))
    V = np.asarray(basis, dtype=complex) * m[:, None]
    Q, R = np.linalg.qr(V)
    keep = np.abs(np.diag(R)) > TOL * max(1.0, np.abs(R).max())
    Q = Q[:, keep]
    return Q @ Q.conj().T


# track histories ------------------------------------------------------------

class WindowOverlapError(ValidationError):
    """Event windows overlap, so their projectors are not orthogonal."""


@dataclass
class TrackHistoryReport:
    L: np.ndarray
    residual: np.ndarray
    prob_with: np.ndarray
    prob_without: np.ndarray
    d_long: float
    window: float
    n: int
    state: str

    @property
    def L_over_dlong(self) -> np.ndarray:
        return self.L / self.d_long

    def monotone(self, noise: float = 1e-14) -> bool:
        r = np.abs(self.residual)
        return bool(np.all(r[1:] <= r[:-1] + noise))


class _TrackGrid:
    """Alpha on a comoving grid times two two-level atoms; split-step propagation."""

    def __init__(self, model, n: int):
        m = model
        Y = 6.0 * m.lc + 6.0 / m.kappa
        self.dy = 2 * Y / n
        if self.dy > 1.0 / m.kappa or m.lc < 3 * self.dy:
            raise ResolutionError(f"grid step {self.dy:.3g} cm too coarse for the packet or the coupling range")
        self.m, self.n = m, n
        self.y = -Y + self.dy * np.arange(n)
        self.u = 2 * np.pi * np.fft.fftfreq(n, self.dy)
        self.H = 6.0 * m.lc + 25.0 / m.kappa
        self.dt0 = min(self.dy / (4 * m.v), 0.1 / m.eps)
        occ = np.array([0.0, 1.0])
        self.e_int = (occ[:, None] + occ[None, :]) * m.eps  # (2, 2)

    def initial(self) -> np.ndarray:
        F = np.exp(-self.y**2 / (4 * self.m.lc**2)).astype(complex)
        F /= np.sqrt(np.sum(np.abs(F) ** 2))
        psi = np.zeros((self.n, 2, 2), dtype=complex)
        psi[:, 0, 0] = F
        return psi

    def propagate(self, psi, t0: float, t1: float, centres) -> np.ndarray:
        """psi has shape (n, 2, 2, ...); returns the state at t1."""
        if t1 <= t0:
            return psi
        m = self.m
        steps = max(1, int(np.ceil((t1 - t0) / self.dt0)))
        dt = (t1 - t0) / steps
        extra = (None,) * (psi.ndim - 3)
        kin = np.exp(-0.5j * dt * (self.u**2 / (2 * m.M)))[(slice(None), None, None) + extra]
        eph = np.exp(-0.5j * dt * self.e_int)[(None, slice(None), slice(None)) + extra]
        shape = (slice(None),) + (None,) * (psi.ndim - 1)
        for k in range(steps):
            t = t0 + (k + 0.5) * dt
            psi = np.fft.ifft(kin * np.fft.fft(psi, axis=0), axis=0) * eph
            for j, Z in enumerate(centres):
                th = (m.W(self.y - (Z - m.v * t)) * dt)[shape]
                c, s = np.cos(th), np.sin(th)
                flipped = np.flip(psi, axis=1 + j)
                psi = c * psi - 1j * s * flipped
            psi = np.fft.ifft(kin * np.fft.fft(psi, axis=0), axis=0) * eph
        return psi


def _excited(psi, j):
    out = np.zeros_like(psi)
    if j == 0:
        out[:, 1] = psi[:, 1]
    else:
        out[:, :, 1] = psi[:, :, 1]
    return out


def track_history_check(fd, L_values=None, n: int = 128, window: float | None = None,
                        state: str = "pure", e2: float | None = None) -> TrackHistoryReport:
    """Consistency residual of the history "atom 1 ionized, then atom 2 ionized"
    as a function of the atom separation L.

    The reduced track state (alpha on a comoving grid, two two-level atoms) is
    propagated exactly by split-step. P1 projects on ionization inside the
    event window of atom 1 at the time the packet is halfway between the
    atoms; P2 on ionization of atom 2 after the passage. With a pure state the
    residual is -2 Re <(1-P1)psi| P2(t2) |P1 psi>; the decohered state drops
    the P1 coherences and gives 0.
    """
    from .reduced1d import Reduced1D

    beam, atom = fd.meta.get("beam"), fd.meta.get("atom")
    if beam is None or atom is None or fd.mode == "rate":
        raise ValidationError("filament decomposition must come from a finite packet", "fd")
    m = Reduced1D.from_physical(beam, atom, e2=e2)
    dl = m.d_long
    w = dl if window is None else float(window)
    Ls = np.asarray([2, 5, 10, 20, 50, 100] if L_values is None else L_values, dtype=float) * dl
    if state not in ("pure", "decohered"):
        raise ValidationError(f"unknown state {state!r}", "state")
    g = _TrackGrid(m, n)
    res, pw, pwo = [], [], []
    for L in Ls:
        if L < w:
            raise WindowOverlapError(f"event windows of width {w:.3g} cm overlap at L = {L:.3g} cm", "L_cm")
        Z1 = g.H
        Z2 = Z1 + L
        t1 = (Z1 + 0.5 * L) / m.v
        t2 = (Z2 + g.H) / m.v
        psi = g.propagate(g.initial(), 0.0, t1, (Z1, Z2))
        a = _excited(psi, 0)
        b = psi - a
        if state == "decohered":
            comps = [a, b]
        else:
            comps = [psi]
        r = with_ = without = 0.0
        for c in comps:
            ca, cb = _excited(c, 0), c - _excited(c, 0)
            pair = g.propagate(np.stack([ca, cb], axis=-1), t1, t2, (Z1, Z2))
            A, B = _excited(pair[..., 0], 1), _excited(pair[..., 1], 1)
            cross = np.vdot(B, A)
            r += -2.0 * cross.real
            with_ += np.vdot(A, A).real + np.vdot(B, B).real
            without += np.vdot(A + B, A + B).real
        res.append(r if state == "pure" else 0.0 * r)
        pw.append(with_)
        pwo.append(without)
    return TrackHistoryReport(Ls, np.array(res), np.array(pw), np.array(pwo), dl, w, n, state)


def track_history_matrices(fd, L: float, n: int = 128, e2: float | None = None) -> HistoryProblem:
    """Explicit (4n x 4n) rho(t1), P1 and Heisenberg-evolved P2 for one separation (oracle)."""
    from .reduced1d import Reduced1D

    m = Reduced1D.from_physical(fd.meta["beam"], fd.meta["atom"], e2=e2)
    g = _TrackGrid(m, n)
    Z1 = g.H
    Z2 = Z1 + L
    t1, t2 = (Z1 + 0.5 * L) / m.v, (Z2 + g.H) / m.v
    psi = g.propagate(g.initial(), 0.0, t1, (Z1, Z2)).reshape(-1)
    N = psi.size
    U = g.propagate(np.eye(N, dtype=complex).reshape(n, 2, 2, N), t1, t2, (Z1, Z2)).reshape(N, N)
    idx = np.arange(N).reshape(n, 2, 2)
    p1 = np.zeros(N)
    p1[idx[:, 1, :].ravel()] = 1.0
    p2 = np.zeros(N)
    p2[idx[:, :, 1].ravel()] = 1.0
    P2h = U.conj().T @ np.diag(p2) @ U
    P2h = 0.5 * (P2h + P2h.conj().T)
    return HistoryProblem(np.outer(psi, psi.conj()), np.diag(p1), P2h)
