"""Gaussian mixed states in one dimension and their two decompositions.

momentum mixture: packets exp(-(x-xb)^2/(2 gamma) + i pb x), centres
    weighted by exp(-xb^2/(2 alpha)), momenta by exp(-beta (pb-p_hat)^2/2)
position mixture: packets exp(-(x-xb)^2/beta' + i p_hat x), centres
    weighted by exp(-xb^2/(2 alpha'))

After the Gaussian integrals both give, with d = x - x' and s = (x+x')/2,

    rho(x, x') = exp(-d^2/(2 beta') - s^2/W + i p_hat d) / sqrt(pi W)

where 1/beta' = 1/beta + 1/(2 gamma) and W = 2 alpha + gamma (momentum
mixture) or W = 2 alpha' + beta'/2 (position mixture).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .estimates import thermal_packet_width
from .physconst import DEFAULT, UnitSystem


def _pos(name, v, allow_inf=False):
    v = float(v)
    if not (v > 0) or (math.isinf(v) and not allow_inf):
        raise ValidationError(f"{name} must be positive and finite, got {v}", key=name)
    return v


@dataclass(frozen=True)
class GaussianEnsemble:
    variant: str  # "momentum_mixture" | "position_mixture"
    params: tuple
    p_hat: float = 0.0

    @classmethod
    def momentum_mixture(cls, alpha, beta, gamma, p_hat=0.0):
        return cls("momentum_mixture", (_pos("alpha", alpha), _pos("beta", beta),
                                        _pos("gamma", gamma, allow_inf=True)), float(p_hat))

    @classmethod
    def position_mixture(cls, alpha_p, beta_p, p_hat=0.0):
        return cls("position_mixture", (_pos("alpha_prime", alpha_p), _pos("beta_prime", beta_p)),
                   float(p_hat))

    @property
    def beta_prime(self) -> float:
        if self.variant == "position_mixture":
            return self.params[1]
        _, beta, gamma = self.params
        return 1.0 / (1.0 / beta + 1.0 / (2.0 * gamma))

    def kernel(self) -> "KernelMatrix":
        return build_rho1(*self.params, self.p_hat) if self.variant == "momentum_mixture" \
            else build_rho2(*self.params, self.p_hat)


@dataclass(frozen=True)
class KernelMatrix:
    """rho(x, x') = norm * exp(-c_d d^2 - c_s s^2 + i p_hat d)."""

    c_d: float
    c_s: float
    p_hat: float
    norm: float
    raw_norm: float  # trace of the kernel before normalisation (constants omitted)

    def __call__(self, x, xp):
        x = np.asarray(x, dtype=float)
        xp = np.asarray(xp, dtype=float)
        d = x - xp
        s = 0.5 * (x + xp)
        return self.norm * np.exp(-self.c_d * d * d - self.c_s * s * s + 1j * self.p_hat * d)

    def sample(self, grid: np.ndarray) -> np.ndarray:
        """Matrix rho[i, j] = rho(x_i, x_j) on a grid."""
        return self(grid[:, None], grid[None, :])

    @property
    def trace(self) -> float:
        return self.norm * math.sqrt(math.pi / self.c_s)

    @property
    def purity(self) -> float:
        # integral of |rho|^2 over d and s
        return self.norm**2 * math.sqrt(math.pi / (2 * self.c_d)) * math.sqrt(math.pi / (2 * self.c_s))

    @property
    def diagonal_variance(self) -> float:
        return 1.0 / (2.0 * self.c_s)

    @property
    def coherence_length(self) -> float:
        """Off-diagonal decay scale sqrt(beta')."""
        return math.sqrt(1.0 / (2.0 * self.c_d))


def _kernel(beta_p: float, W: float, p_hat: float, raw: float) -> KernelMatrix:
    return KernelMatrix(c_d=1.0 / (2.0 * beta_p), c_s=1.0 / W, p_hat=p_hat,
                        norm=1.0 / math.sqrt(math.pi * W), raw_norm=raw)


def build_rho1(alpha, beta, gamma, p_hat=0.0) -> KernelMatrix:
    """Momentum-packet mixture with the p-bar and x-bar integrals done in closed form.

    p-bar integral: sqrt(2 pi/beta) exp(i p_hat d - d^2/(2 beta)).
    x-bar integral: sqrt(pi/(1/(2 alpha) + 1/gamma)) exp(-s^2/(2 alpha + gamma)),
    after (x-xb)^2 + (x'-xb)^2 = 2 (xb - s)^2 + d^2/2.
    """
    e = GaussianEnsemble.momentum_mixture(alpha, beta, gamma, p_hat)
    alpha, beta, gamma = e.params
    W = 2.0 * alpha + gamma
    raw = 0.0 if math.isinf(gamma) else (
        math.sqrt(2 * math.pi / beta) * math.sqrt(math.pi / (0.5 / alpha + 1.0 / gamma))
        * math.sqrt(math.pi * W))
    return _kernel(e.beta_prime, W, e.p_hat, raw)


def build_rho2(alpha_p, beta_p, p_hat=0.0) -> KernelMatrix:
    """Position-packet mixture; (x-xb)^2 + (x'-xb)^2 over beta' gives 2 (xb - s)^2/beta' + d^2/(2 beta')."""
    e = GaussianEnsemble.position_mixture(alpha_p, beta_p, p_hat)
    a, b = e.params
    W = 2.0 * a + 0.5 * b
    raw = math.sqrt(math.pi / (0.5 / a + 2.0 / b)) * math.sqrt(math.pi * W)
    return _kernel(b, W, e.p_hat, raw)


def matched_position_mixture(alpha, beta, gamma, p_hat=0.0) -> GaussianEnsemble:
    """(alpha', beta') satisfying both equality conditions."""
    e = GaussianEnsemble.momentum_mixture(alpha, beta, gamma, p_hat)
    bp = e.beta_prime
    ap = (2.0 * alpha + gamma - 0.5 * bp) / 2.0
    if not ap > 0:
        raise ValidationError("no position mixture exists: alpha' would be <= 0", key="alpha")
    return GaussianEnsemble.position_mixture(ap, bp, p_hat)


def equality_check(e1: GaussianEnsemble, e2: GaussianEnsemble, rtol: float = 1e-10) -> dict:
    if e1.variant != "momentum_mixture" or e2.variant != "position_mixture":
        raise ValidationError("expected (momentum_mixture, position_mixture)", key="variant")
    k1, k2 = e1.kernel(), e2.kernel()
    rel = [abs(k1.c_d - k2.c_d) / k1.c_d, abs(k1.c_s - k2.c_s) / k1.c_s,
           abs(k1.norm - k2.norm) / k1.norm]
    alpha, beta, gamma = e1.params
    ap, bp = e2.params
    cond_beta = abs(1.0 / bp - (1.0 / beta + 0.5 / gamma)) * bp
    cond_w = abs(2 * alpha + gamma - (2 * ap + 0.5 * bp)) / (2 * alpha + gamma)
    residual = max(rel + [abs(e1.p_hat - e2.p_hat)])
    return {
        "equal": bool(cond_beta <= rtol and cond_w <= rtol and e1.p_hat == e2.p_hat),
        "residual": float(residual),
        "beta_condition": float(cond_beta),
        "width_condition": float(cond_w),
    }


def sampled_discrepancy(k1: KernelMatrix, k2: KernelMatrix, x, xp) -> float:
    """Max |rho1 - rho2| over sample pairs, relative to the peak value."""
    return float(np.max(np.abs(k1(x, xp) - k2(x, xp))) / max(k1.norm, k2.norm))


def witness_discrepancy(k1: KernelMatrix, k2: KernelMatrix) -> float:
    """Largest relative kernel difference on a diagonal/off-diagonal probe grid."""
    L = 4.0 * math.sqrt(max(k1.diagonal_variance, k2.diagonal_variance))
    g = np.linspace(-L, L, 161)
    return sampled_discrepancy(k1, k2, g[:, None], g[None, :])


def boltzmann_repackaging(mass: float, temperature: float, units: UnitSystem = DEFAULT) -> dict:
    """Thermal gas as a position mixture of minimal packets.

    The Boltzmann factor exp(-p^2/(2 m kT)) is the momentum weight with
    beta = 1/(m kT); sharp momenta mean gamma = inf, so beta' = beta. The
    pure components exp(-(x-xb)^2/beta') have amplitude width sqrt(beta'/2).
    """
    kT = units.kT(_pos("temperature", temperature))
    beta = 1.0 / (_pos("mass", mass) * kT)
    e = GaussianEnsemble.momentum_mixture(1.0, beta, math.inf)
    a = math.sqrt(e.beta_prime / 2.0)
    ref = thermal_packet_width(mass, temperature, units)
    return {"a": a, "beta": beta, "beta_prime": e.beta_prime,
            "a_estimates": ref, "relative_difference": abs(a - ref) / ref}


# quadrature path (independent of the closed-form coefficient algebra) -----

def _trap_nodes(center, width, n):
    t = np.linspace(-10.0, 10.0, n)
    return center + width * t, width * (t[1] - t[0])


def _centre_nodes(s, coupling, prior, n):
    # nodes follow the x-bar integrand: exp(-xb^2/(2 prior) - coupling (xb - s)^2)
    prec = 1.0 / prior + 2.0 * coupling
    t = np.linspace(-10.0, 10.0, n)
    w = 1.0 / math.sqrt(prec)
    return (2.0 * coupling * s) / prec + w * t, w * (t[1] - t[0])


def kernel_by_quadrature(e: GaussianEnsemble, x, xp, n: int = 121, full: bool = False):
    """Unnormalised kernel from the mixture integrals, done numerically.

    The centre integral always uses the trapezoid rule (spectrally accurate
    for Gaussians). For the momentum mixture the momentum integral is done
    analytically unless ``full`` is set.
    """
    x = np.asarray(x, dtype=float)[..., None]
    xp = np.asarray(xp, dtype=float)[..., None]
    d = x - xp
    s = 0.5 * (x + xp)
    if e.variant == "momentum_mixture":
        alpha, beta, gamma = e.params
        xb, wx = _centre_nodes(s, 1.0 / gamma, alpha, n)
        base = np.exp(-xb**2 / (2 * alpha) - ((x - xb) ** 2 + (xp - xb) ** 2) / (2 * gamma))
        if full:
            pb, wp = _trap_nodes(e.p_hat, 1.0 / math.sqrt(beta), n)
            mom = (np.exp(-beta * (pb - e.p_hat) ** 2 / 2)[None, :]
                   * np.exp(1j * pb[None, :] * d.reshape(-1, 1))).sum(axis=1) * wp
            mom = mom.reshape(d.shape)
        else:
            mom = math.sqrt(2 * math.pi / beta) * np.exp(1j * e.p_hat * d - d * d / (2 * beta))
        return (base.sum(axis=-1) * wx) * mom[..., 0]
    ap, bp = e.params
    xb, wx = _centre_nodes(s, 2.0 / bp, ap, n)
    val = np.exp(-xb**2 / (2 * ap) - ((x - xb) ** 2 + (xp - xb) ** 2) / bp + 1j * e.p_hat * d)
    return val.sum(axis=-1) * wx


def normalised_kernel_by_quadrature(e: GaussianEnsemble, x, xp, n: int = 121, full: bool = False):
    k = e.kernel()
    L = 10.0 * math.sqrt(k.diagonal_variance)
    g = np.linspace(-L, L, 801)
    tr = np.sum(kernel_by_quadrature(e, g, g, n, full).real) * (g[1] - g[0])
    return kernel_by_quadrature(e, x, xp, n, full) / tr
