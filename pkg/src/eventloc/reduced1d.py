"""Single-channel longitudinal model shared by the stationary-phase, track and
history computations.

The transverse transfer is frozen at kappa = eps/v and the electron at q = 0,
so that one channel of energy eps remains with the coupling

    V(s) = (e^2 / 2 pi) S(K) / S(kappa),   S(K) = 1 / (K^2 (1 + a^2 K^2)^2),

with K^2 = kappa^2 + s^2, i.e. the Coulomb-times-form-factor profile of the
plane-wave matrix element normalised to a dimensionless strength e^2/v. With

<p1|V|p> = V(p - p1) exp(i (p - p1) Z). Its position profile
W(y) = int V(s) exp(-i s y) ds has a closed form (partial fractions).
Momenta are offsets u = p - pbar from the beam momentum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._accel import HAVE_NUMBA, njit
from .born_amplitude import BeamSpec, TargetAtom
from .errors import ResolutionError, ValidationError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Reduced1D:
    M: float
    pbar: float
    lc: float
    eps: float
    kappa: float
    a: float
    e2: float  # natural units (cm/s)

    @classmethod
    def from_physical(cls, beam: BeamSpec, atom: TargetAtom, kappa_factor: float = 1.0,
                      e2: float | None = None) -> "Reduced1D":
        v = beam.v
        return cls(beam.mass, beam.p_mean, beam.coherence_length, atom.E0,
                   kappa_factor * atom.E0 / v, atom.a,
                   atom.units.e2_natural if e2 is None else e2)

    def with_(self, **kw) -> "Reduced1D":
        return replace(self, **kw)

    @property
    def v(self) -> float:
        return self.pbar / self.M

    @property
    def d_long(self) -> float:
        """pi/Delta with the minimal longitudinal transfer Delta = eps/v."""
        return math.pi * self.v / self.eps

    @property
    def coup(self) -> float:
        k2 = self.kappa**2
        return self.e2 / TWO_PI * k2 * (1.0 + self.a**2 * k2) ** 2

    def V(self, s):
        s = np.asarray(s, dtype=float)
        K2 = self.kappa**2 + s * s
        return self.coup / (K2 * (1.0 + self.a**2 * K2) ** 2)

    def W(self, y):
        """int V(s) exp(-i s y) ds (real and even)."""
        y = np.abs(np.asarray(y, dtype=float))
        k, a = self.kappa, self.a
        b = math.sqrt(k * k + 1.0 / (a * a))
        return self.coup * math.pi * (np.exp(-k * y) / k - np.exp(-b * y) / b
                                      - (1.0 + b * y) * np.exp(-b * y) / (2.0 * a * a * b**3))

    @property
    def range(self) -> float:
        """Length beyond which W has dropped by e^-30."""
        return 30.0 / self.kappa

    def f(self, u):
        u = np.asarray(u, dtype=float)
        return (2.0 * self.lc**2 / math.pi) ** 0.25 * np.exp(-(u * self.lc) ** 2)

    def energy(self, u):
        """Kinetic energy offset E(pbar + u) - E(pbar) = v u + u^2/2M."""
        return self.v * u + u * u / (2.0 * self.M)

    def shell(self, u1):
        """Incident offset u* with E(u*) = E(u1) + eps."""
        p1 = self.pbar + np.asarray(u1, dtype=float)
        ps = np.sqrt(p1 * p1 + 2.0 * self.M * self.eps)
        return ps - self.pbar, ps


# momentum-space first order ----------------------------------------------

@njit(cache=True)
def _amp1d(u1, un, uw, fu, Vpar, pbar, M, eps, Z, t):
    coup, kap2, a2 = Vpar[0], Vpar[1], Vpar[2]
    out = np.zeros(u1.shape[0], dtype=np.complex128)
    for j in range(u1.shape[0]):
        acc = 0j
        for i in range(un.shape[0]):
            s = un[i] - u1[j]
            K2 = kap2 + s * s
            y = 1.0 + a2 * K2
            V = coup / (K2 * y * y)
            d = eps + (u1[j] - un[i]) * (2.0 * pbar + u1[j] + un[i]) / (2.0 * M)
            x = 0.5 * d * t
            amp = t if abs(x) < 1e-8 else math.sin(x) / (0.5 * d)
            ph = s * Z + x
            acc += uw[i] * fu[i] * V * amp * complex(math.cos(ph), math.sin(ph))
        out[j] = -1j * acc
    return out


def _amp1d_numpy(u1, un, uw, fu, Vpar, pbar, M, eps, Z, t, chunk=256):
    coup, kap2, a2 = Vpar
    out = np.empty(u1.shape[0], dtype=complex)
    wf = uw * fu
    for j0 in range(0, u1.shape[0], chunk):
        u = u1[j0:j0 + chunk, None]
        s = un[None, :] - u
        K2 = kap2 + s * s
        V = coup / (K2 * (1.0 + a2 * K2) ** 2)
        x = 0.5 * t * (eps + (u - un[None, :]) * (2.0 * pbar + u + un[None, :]) / (2.0 * M))
        amp = t * np.sinc(x / math.pi)
        out[j0:j0 + chunk] = -1j * ((V * amp * np.exp(1j * (s * Z + x))) @ wf)
    return out


def amp1d(*args, backend: str | None = None):
    use = backend or ("numba" if HAVE_NUMBA else "numpy")
    return _amp1d(*args) if use == "numba" else _amp1d_numpy(*args)


def _composite(lo, hi, h, order=8):
    n = max(1, int(math.ceil((hi - lo) / h)))
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, n + 1)
    a, b = edges[:-1, None], edges[1:, None]
    return (a + 0.5 * (b - a) * (x + 1)).ravel(), (0.5 * (b - a) * w).ravel()


def first_order_1d(m: Reduced1D, u1, t: float, Z: float, cycles_per_panel: float = 1.0):
    """c1(u1, t) by quadrature over the incident momentum with the analytic time integral."""
    U = 6.0 / m.lc
    rate = abs(Z) + abs(Z - m.v * t) + m.v * t
    h = min(TWO_PI * cycles_per_panel / max(rate, 1e-300), 0.25 / m.lc, 0.25 * m.kappa)
    un, uw = _composite(-U, U, h)
    Vpar = np.array([m.coup, m.kappa**2, m.a**2])
    return amp1d(np.asarray(u1, dtype=float), un, uw, m.f(un), Vpar, m.pbar, m.M, m.eps, Z, t)


def asymptotic_1d(m: Reduced1D, u1, Z: float, f=None):
    """t -> inf limit: -2 pi i (M/p*) f(u*) V(u* - u1) exp(i (u* - u1) Z)."""
    u1 = np.asarray(u1, dtype=float)
    us, ps = m.shell(u1)
    fv = m.f(us) if f is None else f(us)
    return -1j * TWO_PI * (m.M / ps) * fv * m.V(us - u1) * np.exp(1j * (us - u1) * Z)


# comoving Dyson sweep -------------------------------------------------------

@dataclass
class ComovingGrid:
    """Uniform y grid moving with the beam and its FFT-conjugate u grid."""
    y: np.ndarray
    u: np.ndarray
    dy: float
    du: float

    @classmethod
    def build(cls, m: Reduced1D, u_max_factor: float = 25.0, y_half: float | None = None,
              n: int | None = None) -> "ComovingGrid":
        Y = y_half if y_half is not None else 6.0 * m.lc + 10.0 / m.kappa
        u_max = max(u_max_factor * m.kappa, 8.0 / m.lc)
        if n is None:
            n = 1 << int(math.ceil(math.log2(2.0 * Y * u_max / math.pi)))
        dy = 2.0 * Y / n
        du = TWO_PI / (n * dy)
        u = (np.arange(n) - n // 2) * du
        if u[-1] < 3.0 * m.kappa + 6.0 / m.lc:
            raise ResolutionError("momentum grid does not cover two transfers plus the packet")
        return cls(-Y + dy * np.arange(n), u, dy, du)

    def __post_init__(self):
        if len(self.y) % 2:
            raise ValidationError("comoving grid size must be even", "n")
        n = len(self.y)
        self._sign = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
        self._ph = np.exp(1j * self.u * self.y[0])

    def to_y(self, c):
        n = len(c)
        return self.du / math.sqrt(TWO_PI) * self._sign * n * np.fft.ifft(c * self._ph)

    def to_u(self, psi):
        return self.dy / math.sqrt(TWO_PI) * np.conj(self._ph) * np.fft.fft(psi * self._sign)

    def norm2(self, c) -> float:
        return float(np.sum(np.abs(c) ** 2) * self.du)


@dataclass
class SweepResult:
    grid: ComovingGrid
    c1: np.ndarray          # one atom ionized, after the sweep
    c2_nested: np.ndarray
    c2_fact: np.ndarray
    P1: float
    P2_nested: float
    P2_fact: float
    T: float
    n_steps: int


def _spans(m: Reduced1D, centres, H: float, t_end: float | None):
    iv = sorted((max(0.0, (Z - H) / m.v), (Z + H) / m.v) for Z in centres)
    out = [list(iv[0])]
    for lo, hi in iv[1:]:
        if lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    if t_end is not None:
        out = [[lo, min(hi, t_end)] for lo, hi in out if lo < t_end]
    return [tuple(s) for s in out if s[1] > s[0]]


class _Coupler:
    """-i e^{i(E_out - E_in) t} <u|V_Z|c> in the interaction picture."""

    def __init__(self, m: Reduced1D, g: ComovingGrid):
        self.m, self.g = m, g
        self.kin = g.u * g.u / (2.0 * m.M)

    def __call__(self, c, t, Zc, e_in):
        m, g = self.m, self.g
        psi = g.to_y(c * np.exp(-1j * (self.kin + e_in) * t))
        out = g.to_u(m.W(g.y - (Zc - m.v * t)) * psi)
        return -1j * np.exp(1j * (self.kin + e_in + m.eps) * t) * out


def _step_count(spans, dt0):
    return [max(2, int(math.ceil((b - a) / dt0))) for a, b in spans]


def dyson_sweep(m: Reduced1D, Z1: float, Z2: float | None = None, grid: ComovingGrid | None = None,
                steps_per_cycle: float = 6.0, cutoff: float = 25.0, t_end: float | None = None,
                initial=None) -> SweepResult:
    """First order at atom Z1 and second order through Z1 then Z2 (Z2 > Z1).

    Only times where a potential overlaps the packet are stepped (trapezoid,
    spectrally accurate since the integrands vanish at the span ends). The
    nested route carries c1(t2) as accumulated so far, the factorized route
    uses c1 after the full passage of atom 1.
    """
    g = grid or ComovingGrid.build(m)
    H = 6.0 * m.lc + cutoff / m.kappa
    if Z1 < H:
        raise ValidationError("first atom too close to the packet at t=0", "Z1")
    two = Z2 is not None
    if two and Z2 <= Z1:
        raise ValidationError("atoms must be ordered along the beam", "Z2")
    dt0 = TWO_PI / ((m.eps + m.v * (g.u[-1] - g.u[0])) * steps_per_cycle)
    h = _Coupler(m, g)
    c0 = m.f(g.u).astype(complex) if initial is None else np.asarray(initial, dtype=complex)
    zero = np.zeros_like(c0)

    # pass 1: atom 1 alone over its own spans (asymptotic c1)
    sp1 = _spans(m, [Z1], H, None)
    c1f = zero.copy()
    n_steps = 0
    for (a, b), n in zip(sp1, _step_count(sp1, dt0)):
        ts = np.linspace(a, b, n + 1)
        prev = h(c0, ts[0], Z1, 0.0)
        for t in ts[1:]:
            cur = h(c0, t, Z1, 0.0)
            c1f += 0.5 * (ts[1] - ts[0]) * (prev + cur)
            prev = cur
        n_steps += n
    if not two:
        T = sp1[-1][1]
        return SweepResult(g, c1f, zero, zero, g.norm2(c1f), 0.0, 0.0, T, n_steps)

    # pass 2: both atoms, nested and factorized side by side
    sp = _spans(m, [Z1, Z2], H, t_end)
    c1 = zero.copy()
    c2n, c2f = zero.copy(), zero.copy()
    for (a, b), n in zip(sp, _step_count(sp, dt0)):
        ts = np.linspace(a, b, n + 1)
        dt = ts[1] - ts[0]
        p1 = h(c0, ts[0], Z1, 0.0)
        pn = h(c1, ts[0], Z2, m.eps)
        pf = h(c1f, ts[0], Z2, m.eps)
        for t in ts[1:]:
            q1 = h(c0, t, Z1, 0.0)
            c1 = c1 + 0.5 * dt * (p1 + q1)
            qn = h(c1, t, Z2, m.eps)
            qf = h(c1f, t, Z2, m.eps)
            c2n += 0.5 * dt * (pn + qn)
            c2f += 0.5 * dt * (pf + qf)
            p1, pn, pf = q1, qn, qf
        n_steps += n
    T = sp[-1][1]
    return SweepResult(g, c1, c2n, c2f, g.norm2(c1), g.norm2(c2n), g.norm2(c2f), T, n_steps)


def second_stage(m: Reduced1D, c_in, Z2: float, grid: ComovingGrid, steps_per_cycle: float = 6.0,
                 cutoff: float = 25.0) -> np.ndarray:
    """Amplitude for ionizing atom Z2 starting from an already ionized wave c_in."""
    H = 6.0 * m.lc + cutoff / m.kappa
    g = grid
    dt0 = TWO_PI / ((m.eps + m.v * (g.u[-1] - g.u[0])) * steps_per_cycle)
    h = _Coupler(m, g)
    sp = _spans(m, [Z2], H, None)
    out = np.zeros_like(c_in)
    for (a, b), n in zip(sp, _step_count(sp, dt0)):
        ts = np.linspace(a, b, n + 1)
        prev = h(c_in, ts[0], Z2, m.eps)
        for t in ts[1:]:
            cur = h(c_in, t, Z2, m.eps)
            out += 0.5 * (ts[1] - ts[0]) * (prev + cur)
            prev = cur
    return out
