"""Local hidden variables, CHSH, and a two-qubit quantum oracle."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError

Response = Callable[[np.ndarray, np.ndarray], np.ndarray]

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def setting(theta_deg: float, phi_deg: float = 0.0) -> np.ndarray:
    """Unit vector at polar angle ``theta`` in the x-z plane (rotated by ``phi`` about z)."""
    t, p = np.radians(theta_deg), np.radians(phi_deg)
    return np.array([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)])


def _unit(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (3,) or abs(np.linalg.norm(a) - 1.0) > 1e-10:
        raise ValidationError("setting must be a 3-vector of unit length", key="setting")
    return a


@dataclass
class LHVModel:
    """Hidden variables on a finite set of points.

    ``lam1``/``lam2`` hold the support points of each wing (shape (n1, d)
    and (n2, d)), ``rho`` the joint weights (n1, n2), and ``response1`` /
    ``response2`` return w(lambda; a, +) for every support point.
    """

    lam1: np.ndarray
    lam2: np.ndarray
    rho: np.ndarray
    response1: Response
    response2: Response | None = None

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        if self.rho.shape != (len(self.lam1), len(self.lam2)):
            raise ValidationError("rho shape does not match the lambda supports", key="rho")
        if self.rho.min() < 0:
            raise ValidationError("rho must be nonnegative", key="rho")
        if abs(self.rho.sum() - 1.0) > 1e-12:
            raise ValidationError("rho must sum to 1", key="rho")
        if self.response2 is None:
            self.response2 = self.response1

    def w1(self, a) -> np.ndarray:
        return self._w(self.response1, self.lam1, a)

    def w2(self, b) -> np.ndarray:
        return self._w(self.response2, self.lam2, b)

    @staticmethod
    def _w(resp, lam, a) -> np.ndarray:
        w = np.asarray(resp(lam, _unit(a)), dtype=float)
        if w.min() < 0 or w.max() > 1:
            raise ValidationError("response outside [0, 1]", key="response")
        return w


def grid_model(n: int, density: Callable[[np.ndarray, np.ndarray], np.ndarray],
               response: Response, response2: Response | None = None) -> LHVModel:
    """Midpoint grid of n x n cells on [-1, 1]^2 with a (not yet normalised) density."""
    x = -1.0 + (np.arange(n) + 0.5) * (2.0 / n)
    L1, L2 = np.meshgrid(x, x, indexing="ij")
    r = np.clip(np.asarray(density(L1, L2), dtype=float), 0.0, None)
    return LHVModel(x[:, None], x[:, None], r / r.sum(), response, response2)


def angle_response(lam, a) -> np.ndarray:
    """Deterministic response: outcome +1 when the setting's x-z angle lies
    within 90 deg of the hidden angle ``lam[:, 0]`` (degrees)."""
    ang = np.arctan2(a[0], a[2])
    return (np.cos(np.radians(lam[:, 0]) - ang) >= 0).astype(float)


def sign_model(n: int = 360) -> LHVModel:
    """Perfectly correlated hidden angles on a midpoint grid of the circle.

    Correlations are linear in the angle between settings, so the model
    reaches |S| = 2 at the standard settings.
    """
    lam = ((np.arange(n) + 0.5) * (360.0 / n))[:, None]
    return LHVModel(lam, lam, np.eye(n) / n, angle_response)


def joint_probability(m: LHVModel, a, alpha: int, b, beta: int) -> float:
    wa = m.w1(a) if alpha == 1 else 1.0 - m.w1(a)
    wb = m.w2(b) if beta == 1 else 1.0 - m.w2(b)
    if alpha not in (1, -1) or beta not in (1, -1):
        raise ValidationError("outcomes must be +1 or -1", key="outcome")
    return float(wa @ m.rho @ wb)


def correlation(m: LHVModel, a, b) -> float:
    ma = 2.0 * m.w1(a) - 1.0
    mb = 2.0 * m.w2(b) - 1.0
    return float(ma @ m.rho @ mb)


def chsh(m: LHVModel, a, a2, b, b2) -> float:
    return abs(correlation(m, a, b) + correlation(m, a, b2)
               + correlation(m, a2, b) - correlation(m, a2, b2))


def chsh_terms(corr: Callable, a, a2, b, b2) -> tuple[float, float, float, float, float]:
    e = (corr(a, b), corr(a, b2), corr(a2, b), corr(a2, b2))
    return (abs(e[0] + e[1] + e[2] - e[3]),) + e


def marginal_b(m: LHVModel, b, beta: int, a=None) -> float:
    """Bob's outcome probability; with ``a`` given, summed over Alice's outcomes."""
    if a is None:
        wb = m.w2(b) if beta == 1 else 1.0 - m.w2(b)
        return float(m.rho.sum(axis=0) @ wb)
    return joint_probability(m, a, 1, b, beta) + joint_probability(m, a, -1, b, beta)


# batched random models ----------------------------------------------------

def random_models(rng: np.random.Generator, count: int, n: int = 8, modes: int = 3):
    """Seeded random LHV models in array form.

    Returns ``rho`` (count, n, n) and coefficient arrays for smooth random
    response fields w(lambda, a) = clip(1/2 + sum_k c_k cos(k pi lambda + d_k . a + e_k)).
    The hidden variable is scalar per wing on a midpoint grid of [-1, 1].
    """
    rho = rng.random((count, n, n)) ** 3
    rho /= rho.sum(axis=(1, 2), keepdims=True)
    lam = -1.0 + (np.arange(n) + 0.5) * (2.0 / n)
    coef = {
        wing: (rng.normal(scale=0.8, size=(count, modes)),
               rng.normal(scale=2.0, size=(count, modes, 3)),
               rng.uniform(0, 2 * np.pi, size=(count, modes)))
        for wing in (1, 2)
    }
    return lam, rho, coef


def batched_response(lam, coef, a) -> np.ndarray:
    """w for all models at settings ``a`` (count, 3): returns (count, n)."""
    c, d, e = coef
    k = np.arange(1, c.shape[1] + 1)
    phase = (k[None, :, None] * np.pi * lam[None, None, :]
             + np.einsum("mkj,mj->mk", d, a)[:, :, None] + e[:, :, None])
    return np.clip(0.5 + np.einsum("mk,mkn->mn", c, np.cos(phase)), 0.0, 1.0)


def random_unit_vectors(rng: np.random.Generator, count: int) -> np.ndarray:
    v = rng.normal(size=(count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def batched_chsh(rng: np.random.Generator, count: int, n: int = 8) -> dict:
    """CHSH values for ``count`` random models at random settings."""
    lam, rho, coef = random_models(rng, count, n)
    a, a2, b, b2 = (random_unit_vectors(rng, count) for _ in range(4))
    m = {}
    for key, s, wing in (("a", a, 1), ("a2", a2, 1), ("b", b, 2), ("b2", b2, 2)):
        m[key] = 2.0 * batched_response(lam, coef[wing], s) - 1.0

    def corr(x, y):
        return np.einsum("mi,mij,mj->m", m[x], rho, m[y])

    S = np.abs(corr("a", "b") + corr("a", "b2") + corr("a2", "b") - corr("a2", "b2"))
    # no-signalling: Bob's marginal must not depend on Alice's setting
    wb = (m["b"] + 1.0) / 2.0
    pa = np.einsum("mij,mj->m", rho, wb)  # summed over Alice outcomes (w + 1 - w = 1)
    wa1, wa2 = (m["a"] + 1) / 2, (m["a2"] + 1) / 2
    via_a = np.einsum("mi,mij,mj->m", wa1, rho, wb) + np.einsum("mi,mij,mj->m", 1 - wa1, rho, wb)
    via_a2 = np.einsum("mi,mij,mj->m", wa2, rho, wb) + np.einsum("mi,mij,mj->m", 1 - wa2, rho, wb)
    return {
        "S": S,
        "max_S": float(S.max()),
        "no_signalling": float(max(np.abs(via_a - via_a2).max(), np.abs(via_a - pa).max())),
    }


# quantum oracle -----------------------------------------------------------

def _sigma(a) -> np.ndarray:
    a = _unit(a)
    return a[0] * SX + a[1] * SY + a[2] * SZ


def singlet() -> np.ndarray:
    psi = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    return np.outer(psi, psi.conj())


def quantum_correlation_oracle(state: np.ndarray, a, b) -> float:
    rho = np.asarray(state, dtype=complex)
    if rho.shape != (4, 4):
        raise ValidationError("two-qubit state must be 4x4", key="state")
    if np.abs(rho - rho.conj().T).max() > 1e-10 or abs(np.trace(rho) - 1) > 1e-10:
        raise ValidationError("state must be Hermitian with unit trace", key="state")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise ValidationError("state must be positive semidefinite", key="state")
    return float(np.trace(rho @ np.kron(_sigma(a), _sigma(b))).real)


STANDARD_ANGLES = (0.0, 90.0, 45.0, -45.0)
