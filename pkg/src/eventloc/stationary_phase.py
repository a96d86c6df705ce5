"""Stationary-phase analysis of the position-space first-order amplitude.

Phase of the integrand: chi = p1.x1 + q1.xi1 - E1 (t1 - t) - E t, with
x1 measured from the atom. Its stationary point in (p1, q1, t) is closed
form; ``compare_with_direct`` checks the approximation against quadrature in
the single-channel longitudinal model of :mod:`eventloc.reduced1d`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .born_amplitude import BeamSpec, TargetAtom
from .errors import NumericalError, ResolutionError, ValidationError
from .reduced1d import Reduced1D, _composite, first_order_1d

A_FORMS = ("uniform", "printed", "squared")


class NoStationaryPointError(NumericalError):
    """Non-propagating input (E <= binding) or collapsed geometry (A = 0)."""


def A_coefficient(x1, xi1, m_alpha: float, m_e: float, form: str = "uniform") -> float:
    """Geometric coefficient A.

    ``uniform`` (default) m_a x^2 + m_e xi^2 is the form for which E1 = E holds
    at the stationary point; ``printed`` uses m_a^2 on the first term only and
    ``squared`` uses m^2 on both.
    """
    x2 = float(np.dot(x1, x1))
    k2 = float(np.dot(xi1, xi1))
    if form == "uniform":
        return m_alpha * x2 + m_e * k2
    if form == "printed":
        return m_alpha**2 * x2 + m_e * k2
    if form == "squared":
        return m_alpha**2 * x2 + m_e**2 * k2
    raise ValidationError(f"unknown A form {form!r}", "A_form")


@dataclass(frozen=True)
class StationaryPoint:
    p1_bar: np.ndarray
    q1_bar: np.ndarray
    t_bar: float
    t1: float
    A: float
    E: float
    E0: float
    chi1: float
    chi1_approx: float
    chi1_error: float          # |chi1 - approx| relative to the spatial phase
    masses: tuple[float, float]
    widths: dict = field(default_factory=dict)

    @property
    def flight_time(self) -> float:
        return self.t1 - self.t_bar

    def E1(self) -> float:
        ma, me = self.masses
        return (float(self.p1_bar @ self.p1_bar) / (2 * ma)
                + float(self.q1_bar @ self.q1_bar) / (2 * me) + self.E0)


def _masses(masses) -> tuple[float, float]:
    if isinstance(masses, dict):
        return float(masses["alpha"]), float(masses["electron"])
    ma, me = masses
    return float(ma), float(me)


def stationary_point(x1, xi1, t1: float, E: float, masses, X1=(0.0, 0.0, 0.0),
                     E0: float = 0.0, A_form: str = "uniform",
                     beam_axis=(0.0, 0.0, 1.0)) -> StationaryPoint:
    """Closed-form stationary point of chi in (p1, q1, t).

    ``E`` is the incident energy and ``E0`` the binding energy paid on
    ionization (zero recovers the bare formulas). All in natural units.
    """
    ma, me = _masses(masses)
    d = np.asarray(x1, dtype=float) - np.asarray(X1, dtype=float)
    xi = np.asarray(xi1, dtype=float)
    if not (E > 0 and E - E0 > 0):
        raise NoStationaryPointError("no propagating stationary point for E <= E0")
    A = A_coefficient(d, xi, ma, me, A_form)
    if A <= 0:
        raise NoStationaryPointError("A = 0: x1 = X1 and xi1 = 0 collapse the expansion")
    K = E - E0
    tau = math.sqrt(A / (2.0 * K))
    p1 = ma * d / tau
    q1 = me * xi / tau
    chi1 = math.sqrt(2.0 * K * A) - E * t1
    p = math.sqrt(2.0 * ma * E)
    z = float(np.dot(d, np.asarray(beam_axis, dtype=float)))
    approx = p * z - E * t1
    err = abs(chi1 - approx) / max(abs(p * z), 1e-300)
    sp = StationaryPoint(p1, q1, t1 - tau, t1, A, E, E0, chi1, approx, err, (ma, me))
    object.__setattr__(sp, "widths", widths(sp, (ma, me), E))
    return sp


def widths(sp: StationaryPoint, masses, E: float) -> dict:
    """Delta_p, Delta_q and Delta_t as printed; ``dt_hessian`` is the inverse
    square root of the exact second derivative of the reduced phase,
    (A/8E^3)^(1/4)."""
    ma, me = _masses(masses)
    tau = sp.flight_time
    return {
        "dp": math.sqrt(ma / tau),
        "dq": math.sqrt(me / tau),
        "dt": (sp.A / (2.0 * E**3)) ** 0.25,
        "dt_hessian": (sp.A / (8.0 * E**3)) ** 0.25,
    }


def delta_t_chain(z_minus_Z: float, E: float, v: float) -> float:
    """((z - Z)/(E v))^(1/2), the alpha-dominated form of Delta_t."""
    return math.sqrt(z_minus_Z / (E * v))


# comparison against quadrature ----------------------------------------------

@dataclass
class CompareReport:
    nodes: np.ndarray
    direct: np.ndarray
    t_only: np.ndarray
    full: np.ndarray
    const_t: complex
    const_full: complex
    mod_ratio_t: np.ndarray
    phase_diff_t: np.ndarray
    mod_ratio_full: np.ndarray
    phase_diff_full: np.ndarray
    t1: float
    ref_index: int

    @property
    def t_error(self) -> float:
        return float(np.max(np.abs(self.mod_ratio_t - 1.0)))

    @property
    def full_error(self) -> float:
        return float(np.max(np.abs(self.mod_ratio_full - 1.0)))

    @property
    def verdict(self) -> dict:
        return {"t_integration_max_mod_error": self.t_error,
                "p_integration_max_mod_error": self.full_error,
                "t_only_good": self.t_error < 0.1,
                "full_worse": self.full_error > self.t_error}

    def rows(self):
        for i, z in enumerate(self.nodes):
            d, s = self.direct[i], self.t_only[i]
            yield (z, d.real, d.imag, s.real, s.imag, self.mod_ratio_t[i], self.phase_diff_t[i])


def _fit(approx, direct, ref):
    if direct[ref] == 0 or approx[ref] == 0:
        return 1.0 + 0j, np.ones(len(direct)), np.zeros(len(direct))
    C = direct[ref] / approx[ref]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.abs(C * approx) / np.abs(direct)
        ph = np.angle(C * approx / direct)
    return C, r, ph


def _full_sp(m: Reduced1D, z1: float, t1: float, Z: float) -> complex:
    # stationary point of chi(u) = u1*(u)(z1 - Z) + u Z - e(u) t1
    p0 = m.pbar
    u = m.M * z1 / t1 - p0
    for _ in range(60):
        p = p0 + u
        p1 = math.sqrt(p * p - 2 * m.M * m.eps)
        g = (p / p1) * (z1 - Z) + Z - (p / m.M) * t1
        gp = -(2 * m.M * m.eps / p1**3) * (z1 - Z) - t1 / m.M
        du = -g / gp
        u += du
        if abs(du) < 1e-14 * p0:
            break
    p = p0 + u
    p1 = math.sqrt(p * p - 2 * m.M * m.eps)
    u1 = p1 - p0
    chi = u1 * (z1 - Z) + u * Z - (m.v * u + u * u / (2 * m.M)) * t1
    chi2 = -(2 * m.M * m.eps / p1**3) * (z1 - Z) - t1 / m.M
    pref = math.sqrt(2 * math.pi) * (-1j) * (m.M / p1) * float(m.f(u)) * float(m.V(u - u1))
    return pref * math.sqrt(2 * math.pi / abs(chi2)) * np.exp(1j * (chi - math.copysign(math.pi / 4, -chi2)))


def compare_with_direct(beam: BeamSpec, atom: TargetAtom, sample_nodes=None, t1: float | None = None,
                        e2: float | None = None, cycles_per_panel: float = 0.5,
                        model: Reduced1D | None = None) -> CompareReport:
    """Direct transform of the finite-time amplitude against the t-only and
    the full stationary-phase evaluation, at positions ``sample_nodes`` (cm)
    along the beam at time ``t1``. Carrier phases common to all routes are
    dropped."""
    m = model or Reduced1D.from_physical(beam, atom, e2=e2)
    Z = atom.Z
    if t1 is None:
        t1 = (Z + 6 * m.lc + 25 / m.kappa) / m.v
    if sample_nodes is None:
        sample_nodes = m.v * t1 + m.lc * np.linspace(-1.5, 1.5, 7)
    z = np.asarray(sample_nodes, dtype=float)
    ref = len(z) // 2
    # direct: psi(z) = (2 pi)^-1/2 int du1 exp(i u1 z - i (e(u1) + eps) t1) c1(u1, t1)
    U = 6.0 / m.lc
    lo, hi = -m.kappa - U - 30 * m.kappa, U + 30 * m.kappa
    rate = np.max(np.abs(z - m.v * t1)) + abs(Z) + m.v * t1 + 1.0 / m.kappa
    h = min(2 * math.pi * cycles_per_panel / rate, 0.25 / m.lc, 0.25 * m.kappa)
    if (hi - lo) / h > 4e5:
        raise ResolutionError("sample nodes too far from the packet for the momentum grid")
    u1, w1 = _composite(lo, hi, h)
    c1 = first_order_1d(m, u1, t1, Z)
    e1 = m.v * u1 + u1 * u1 / (2 * m.M) + m.eps
    ph = np.exp(1j * (np.outer(z, u1) - e1 * t1))
    direct = ph @ (w1 * c1) / math.sqrt(2 * math.pi)
    # t-only: stationary phase in (p1, t), numerical incident-momentum integral
    un, wn = _composite(-U, U, min(h, 0.25 / m.lc))
    p = m.pbar + un
    p1 = np.sqrt(p * p - 2 * m.M * m.eps)
    us1 = p1 - m.pbar
    amp = (m.M / p1) * m.f(un) * m.V(un - us1)
    chi = np.outer(z - Z, us1) + un * Z - (m.v * un + un * un / (2 * m.M)) * t1
    t_only = math.sqrt(2 * math.pi) * (-1j) * (np.exp(1j * chi) @ (wn * amp))
    full = np.array([_full_sp(m, zi, t1, Z) for zi in z])
    Ct, rt, pt = _fit(t_only, direct, ref)
    Cf, rf, pf = _fit(full, direct, ref)
    return CompareReport(z, direct, t_only, full, Ct, Cf, rt, pt, rf, pf, t1, ref)
