"""First-order (Born) ionization of a hydrogenic atom by a fast alpha particle.

Conventions (natural units, hbar = 1, see ``physconst``)
-------------------------------------------------------
* Plane waves are delta-normalised: <x|p> = (2 pi)^(-3/2) exp(i p.x).
* Ground-state transform: phi0~(p) = (2 sqrt2/pi) a^(3/2) / (1 + a^2 p^2)^2,
  so that the integral of |phi0~|^2 over d^3p is 1.
* ``matrix_element_M`` is the unnormalised kernel
  M(dp, q) = (2 pi)^3 (2 e^2/|dp|^2) phi0~(q - dp) exp(i dp.X), dp = p - p1.
* The physical transition element between delta-normalised states is
  V(dp, q) = M 4 pi/(2 pi)^6 = e^2/(pi^2 |dp|^2) phi0~(q - dp) exp(i dp.X).
* Incident packet: psi0(p) = delta^2(p_perp) f(p_z), f = N exp(-(p_z - pbar)^2 lc^2),
  with the integral of |f|^2 equal to 1. Its transverse density is (2 pi)^-2 per cm^2, so
  the time-integrated fluence through the atom is (2 pi)^-2 and the total
  ionization probability is sigma/(2 pi)^2.
* Golden rule: sigma = (2 pi)^4/v  int |V|^2 delta(E1 - E) d^3p1 d^3q.

Final channels are labelled by c = (kappa, |q|, theta, phi): kappa the
transverse momentum transfer, (theta, phi) the electron direction relative
to the beam axis and to k_perp. The dynamical routes use the orthogonalised
plane wave phi0~(q - k) - phi0~(q) F00(k) by default (``final_state="opw"``),
which removes the spurious k -> 0 monopole of plain plane waves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import CoverageError, ResolutionError, SingularityError, ValidationError
from .physconst import DEFAULT, UnitSystem

PHI0_NORM = 2.0 * math.sqrt(2.0) / math.pi
TWO_PI = 2.0 * math.pi


# data types ---------------------------------------------------------------

@dataclass(frozen=True)
class TargetAtom:
    E0_eV: float
    X: tuple = (0.0, 0.0, 0.0)
    bohr_a: float | None = None  # cm; default from E0 = 1/(2 m_e a^2)
    R: float = 1e-8
    units: UnitSystem = field(default=DEFAULT, repr=False)

    def __post_init__(self):
        if not self.E0_eV > 0:
            raise ValidationError("E0 must be > 0", key="E0_eV")
        if self.bohr_a is None:
            object.__setattr__(self, "bohr_a", self.units.bohr_length(self.E0_eV))
        if not self.bohr_a > 0:
            raise ValidationError("bohr_a must be > 0", key="bohr_a")
        object.__setattr__(self, "X", tuple(float(x) for x in self.X))

    @property
    def E0(self) -> float:
        return self.units.energy(self.E0_eV)

    @property
    def a(self) -> float:
        return self.bohr_a

    @property
    def Z(self) -> float:
        return self.X[2]

    def moved(self, X) -> "TargetAtom":
        return TargetAtom(self.E0_eV, tuple(X), self.bohr_a, self.R, self.units)


@dataclass(frozen=True)
class BeamSpec:
    """Beam along +z. ``coherence_length`` = inf means a plane wave."""

    p_mean: float
    mass: float
    coherence_length: float = math.inf
    current_density: float | None = None  # plane-wave mode; default v/(2 pi)^3

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.p_mean, dtype=float))
        if p.size == 3:
            if abs(p[0]) + abs(p[1]) > 1e-12 * abs(p[2]):
                raise ValidationError("beam momentum must point along z", key="p_mean")
            p = p[2:]
        if p.size != 1 or not p[0] > 0:
            raise ValidationError("|p_mean| must be > 0", key="p_mean")
        object.__setattr__(self, "p_mean", float(p[0]))
        if not self.mass > 0:
            raise ValidationError("mass must be > 0", key="mass")
        if not self.coherence_length > 0:
            raise ValidationError("coherence length must be > 0", key="lc_cm")

    @property
    def v(self) -> float:
        return self.p_mean / self.mass

    @property
    def plane_wave(self) -> bool:
        return math.isinf(self.coherence_length)

    @property
    def J(self) -> float:
        return self.current_density if self.current_density is not None else self.v / TWO_PI**3


@dataclass(frozen=True)
class MomentumGap:
    Delta: tuple

    def __post_init__(self):
        d = tuple(float(x) for x in np.broadcast_to(np.asarray(self.Delta, dtype=float), (3,)))
        if min(d) < 0:
            raise ValidationError("gap components must be >= 0", key="Delta")
        object.__setattr__(self, "Delta", d)


@dataclass
class AmplitudeField:
    axes: dict
    values: np.ndarray
    basis: str = "momentum"
    time: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.basis not in ("momentum", "position", "channel"):
            raise ValidationError(f"unknown basis {self.basis!r}", key="basis")
        shape = tuple(len(v) for v in self.axes.values())
        if self.values.shape[: len(shape)] != shape:
            raise ValidationError("values do not match the axes", key="values")
        for name, ax in self.axes.items():
            ax = np.asarray(ax)
            if ax.ndim == 1 and ax.size > 1 and not (np.all(np.diff(ax) > 0) or np.all(np.diff(ax) < 0)):
                raise ValidationError(f"axis {name} is not strictly monotone", key=name)
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("non-finite amplitude values", key="values")


# closed forms -------------------------------------------------------------

def phi0_tilde(p, a: float):
    """Hydrogenic 1s momentum wave function at |p| (real, radial)."""
    p = np.asarray(p, dtype=float)
    return PHI0_NORM * a**1.5 / (1.0 + (a * p) ** 2) ** 2


def elastic_form_factor(k, a: float):
    """<phi0| exp(i k.xi) |phi0> = (1 + a^2 k^2/4)^-2."""
    k = np.asarray(k, dtype=float)
    return 1.0 / (1.0 + 0.25 * (a * k) ** 2) ** 2


def _norm(v):
    return np.linalg.norm(np.asarray(v, dtype=float), axis=-1)


def bound_free_form_factor(k, q, atom: TargetAtom):
    """<q| exp(i k.xi) |phi0> for a plane-wave electron: phi0~(q - k)."""
    k = np.asarray(k, dtype=float)
    q = np.asarray(q, dtype=float)
    return phi0_tilde(_norm(q - k), atom.a).astype(complex)


def opw_form_factor(k, q, atom: TargetAtom):
    """Same with the final plane wave orthogonalised to the ground state."""
    k = np.asarray(k, dtype=float)
    q = np.asarray(q, dtype=float)
    return (phi0_tilde(_norm(q - k), atom.a)
            - phi0_tilde(_norm(q), atom.a) * elastic_form_factor(_norm(k), atom.a)).astype(complex)


def matrix_element_M(dp, q, atom: TargetAtom, final_state: str = "pw", e2: float | None = None):
    """(2 pi)^3 (2 e^2/|dp|^2) F(dp, q) exp(i dp.X); e^2 in natural units (cm/s)."""
    dp = np.asarray(dp, dtype=float)
    k2 = np.sum(dp * dp, axis=-1)
    if np.any(k2 == 0.0):
        raise SingularityError("Coulomb singularity at zero momentum transfer")
    e2n = atom.units.e2_natural if e2 is None else e2
    ff = bound_free_form_factor(dp, q, atom) if final_state == "pw" else opw_form_factor(dp, q, atom)
    phase = np.exp(1j * (dp @ np.asarray(atom.X, dtype=float)))
    return TWO_PI**3 * (2.0 * e2n / k2) * ff * phase


def transition_element(dp, q, atom: TargetAtom, final_state: str = "opw", e2: float | None = None):
    """Delta-normalised V = M 4 pi/(2 pi)^6."""
    return matrix_element_M(dp, q, atom, final_state, e2) * (4.0 * math.pi / TWO_PI**6)


# gapped kernel ------------------------------------------------------------

@dataclass
class GappedProfile:
    field: AmplitudeField | None
    widths: tuple  # full width of the central 50 % interval per axis (cm)
    outside_10a: float  # weight fraction beyond |x - X| = 10 a

    @property
    def half_width(self) -> tuple:
        return tuple(0.5 * w for w in self.widths)


def _central_width(marg: np.ndarray, x: np.ndarray, c: int, frac: float = 0.5) -> float:
    w = marg[c:].copy()
    w[1:] += marg[c - 1:0:-1][: len(w) - 1]
    cw = np.cumsum(w) / marg.sum()
    return 2.0 * float(np.interp(frac, cw, x[c:] - x[c]))


def gapped_profile(atom: TargetAtom, q, gap: MomentumGap, n: int = 256, dk: float | None = None,
                   keep_field: bool = True) -> GappedProfile:
    """Position-space kernel with the momentum transfer restricted to |k_i| > Delta_i.

    The k-space integrand (2 e^2/k^2) phi0~(q - k) is sampled on an n^3
    grid and brought to x by one inverse FFT, scaled to the continuum
    integral; the origin of x is the atom centre.
    """
    D = np.asarray(gap.Delta)
    pos = D[D > 0]
    if pos.size == 0:
        raise ValidationError("at least one gap component must be positive", key="Delta")
    if dk is None:
        dk = pos.min() / 8.0
    if dk > pos.min() / 2.0:
        raise ResolutionError(f"k step {dk:.3g} does not resolve the gap {pos.min():.3g}")
    if 0.5 * n * dk < 2.0 * pos.max():
        raise ResolutionError("k grid does not extend beyond the gap")
    q = np.asarray(q, dtype=float)
    k1 = (np.arange(n) - n // 2) * dk
    kx, ky, kz = np.meshgrid(k1, k1, k1, indexing="ij", sparse=True)
    k2 = kx**2 + ky**2 + kz**2
    k2[n // 2, n // 2, n // 2] = 1.0
    Q2 = (q[0] - kx) ** 2 + (q[1] - ky) ** 2 + (q[2] - kz) ** 2
    e2n = atom.units.e2_natural
    g = (2.0 * e2n / k2) * (PHI0_NORM * atom.a**1.5 / (1.0 + atom.a**2 * Q2) ** 2)
    del k2, Q2
    mask = np.ones((1, 1, 1), dtype=bool)
    for axis, kk in enumerate((kx, ky, kz)):
        if D[axis] > 0:
            mask = mask & (np.abs(kk) > D[axis])
    g = np.where(mask, g, 0.0)
    F = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(g)))
    del g
    F *= (dk * n) ** 3  # sum -> integral: dk^3 times n^3 undoing ifft's 1/n^3
    x = (np.arange(n) - n // 2) * (TWO_PI / (n * dk))
    P = np.abs(F) ** 2
    c = n // 2
    widths = tuple(_central_width(P.sum(axis=tuple(j for j in range(3) if j != i)), x, c)
                   for i in range(3))
    r2 = x[:, None, None] ** 2 + x[None, :, None] ** 2 + x[None, None, :] ** 2
    outside = float(P[r2 > (10 * atom.a) ** 2].sum() / P.sum())
    del P, r2
    axes = {"x": x + atom.X[0], "y": x + atom.X[1], "z": x + atom.X[2]}
    fld = AmplitudeField(axes, F, basis="position",
                         meta={"dk": dk, "n": n, "Delta": tuple(D)}) if keep_field else None
    return GappedProfile(fld, widths, outside)


# channel quadrature -------------------------------------------------------

def _gl(lo: float, hi: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return lo + 0.5 * (hi - lo) * (x + 1.0), 0.5 * (hi - lo) * w


@dataclass(frozen=True)
class ChannelGrid:
    kappa: np.ndarray
    w_kappa: np.ndarray  # includes 2 pi kappa (azimuth of k_perp)
    q: np.ndarray
    w_q: np.ndarray  # includes q^2
    theta: np.ndarray
    phi: np.ndarray
    w_ang: np.ndarray  # sin(theta) dtheta dphi, phi folded onto [0, pi]
    A_B: np.ndarray  # (nq, nc): 2 q sin(theta) cos(phi)
    A_C: np.ndarray  # (nq, nc): 2 q cos(theta)

    @property
    def weights(self) -> np.ndarray:
        return self.w_kappa[:, None, None] * self.w_q[None, :, None] * self.w_ang[None, None, :]

    @property
    def shape(self) -> tuple:
        return (len(self.kappa), len(self.q), len(self.w_ang))


def channel_grid(atom: TargetAtom, beam: BeamSpec, n_kappa: int = 24, n_q: int = 24,
                 n_theta: int = 12, n_phi: int = 6, kappa_lo: float = 0.01,
                 kappa_hi: float = 20.0, q_max: float = 8.0) -> ChannelGrid:
    """Gauss-Legendre channel nodes.

    kappa: log-spaced from ``kappa_lo`` E0/v to ``kappa_hi``/a; |q| on
    [0, q_max/a] in two panels; theta in [0, pi]; phi in [0, pi] (the
    integrand is even in phi).
    """
    s_min = atom.E0 / beam.v
    lk, wlk = _gl(math.log(kappa_lo * s_min), math.log(kappa_hi / atom.a), n_kappa)
    kap = np.exp(lk)
    w_kap = TWO_PI * kap * kap * wlk
    h1 = n_q // 2
    q1, w1 = _gl(0.0, 2.0 / atom.a, h1)
    q2, w2 = _gl(2.0 / atom.a, q_max / atom.a, n_q - h1)
    q = np.concatenate([q1, q2])
    w_q = np.concatenate([w1, w2]) * q * q
    th, wth = _gl(0.0, math.pi, n_theta)
    ph, wph = _gl(0.0, math.pi, n_phi)
    TH, PH = np.meshgrid(th, ph, indexing="ij")
    W = (np.sin(TH) * wth[:, None] * 2.0 * wph[None, :]).ravel()
    A_B = 2.0 * q[:, None] * (np.sin(TH) * np.cos(PH)).ravel()[None, :]
    A_C = 2.0 * q[:, None] * np.cos(TH).ravel()[None, :]
    return ChannelGrid(kap, w_kap, q, w_q, TH.ravel(), PH.ravel(), W, A_B, A_C)


def channel_energy(grid: ChannelGrid, atom: TargetAtom, beam: BeamSpec) -> np.ndarray:
    """E0 + q^2/2m + kappa^2/2M per (kappa, q) block."""
    m_e = atom.units.mass("electron")
    return (atom.E0 + grid.q[None, :] ** 2 / (2 * m_e)
            + grid.kappa[:, None] ** 2 / (2 * beam.mass))


def shell_transfer(eps, pbar: float, M: float):
    """Longitudinal transfer s solving s (2 pbar - s)/(2M) = eps (smaller root)."""
    eps = np.asarray(eps, dtype=float)
    disc = pbar * pbar - 2.0 * M * eps
    if np.any(disc <= 0):
        raise CoverageError("channel energy exceeds the kinetic energy of the beam")
    return 2.0 * M * eps / (pbar + np.sqrt(disc))


def transition_on_grid(grid: ChannelGrid, atom: TargetAtom, s, eta: float = 1.0, e2=None):
    """V_c(s) for all channels; ``s`` broadcast against (nk, nq, nc)."""
    e2n = atom.units.e2_natural if e2 is None else e2
    a = atom.a
    kap = grid.kappa[:, None, None]
    q = grid.q[None, :, None]
    k2 = kap**2 + s**2
    Q2 = q**2 + k2 - kap * grid.A_B[None] - s * grid.A_C[None]
    ff = phi0_tilde(np.sqrt(np.maximum(Q2, 0.0)), a)
    if eta:
        ff = ff - eta * phi0_tilde(q, a) * elastic_form_factor(np.sqrt(k2), a)
    return (e2n / math.pi**2) / k2 * ff


@dataclass
class QuadratureSettings:
    n_kappa: int = 24
    n_q: int = 24
    n_theta: int = 12
    n_phi: int = 6
    n_w_panels: int = 10  # per window, each 1/lc wide
    w_order: int = 6
    cycles_per_panel: float = 1.0
    max_cycles_per_panel: float = 8.0
    final_state: str = "opw"
    backend: str | None = None

    def halved(self) -> "QuadratureSettings":
        return QuadratureSettings(max(4, self.n_kappa // 2 + 2), max(4, self.n_q // 2 + 2),
                                  max(4, self.n_theta // 2 + 2), max(2, self.n_phi // 2 + 1),
                                  max(4, self.n_w_panels // 2 + 1), self.w_order,
                                  min(2 * self.cycles_per_panel, self.max_cycles_per_panel),
                                  self.max_cycles_per_panel, self.final_state, self.backend)


def _w_nodes(sc: np.ndarray, lc: float, n_panels: int, order: int):
    """Output nodes in w = pbar - p1z: the union of windows around the shell and around 0."""
    half = 0.5 * n_panels / lc
    x, wx = np.polynomial.legendre.leggauss(order)
    nk, nq = sc.shape
    nj = 2 * n_panels * order
    W = np.empty((nk, nq, nj))
    Wt = np.empty((nk, nq, nj))
    for ik in range(nk):
        for iq in range(nq):
            c = sc[ik, iq]
            if c - half <= half:  # windows overlap: one interval
                lo, hi = -half, c + half
                edges = np.linspace(lo, hi, 2 * n_panels + 1)
            else:
                edges = np.concatenate([np.linspace(-half, half, n_panels + 1),
                                        np.linspace(c - half, c + half, n_panels + 1)])
                edges = edges.reshape(2, -1)
                edges = [edges[0], edges[1]]
            segs = []
            if isinstance(edges, list):
                for e in edges:
                    segs += list(zip(e[:-1], e[1:]))
            else:
                segs = list(zip(edges[:-1], edges[1:]))
            nodes = np.concatenate([lo_ + 0.5 * (hi_ - lo_) * (x + 1) for lo_, hi_ in segs])
            wts = np.concatenate([0.5 * (hi_ - lo_) * wx for lo_, hi_ in segs])
            W[ik, iq], Wt[ik, iq] = nodes, wts
    return W, Wt


def reference_scenario(lc: float = 2e-7, v: float = 1e9, E0_eV: float = 2.0,
                       z_factor: float = 6.0, units: UnitSystem = DEFAULT):
    """Alpha particle at v = 1e9 cm/s on a 2 eV hydrogenic atom placed at Z = z_factor lc."""
    M = units.mass("alpha")
    beam = BeamSpec(M * v, M, lc)
    atom = TargetAtom(E0_eV, X=(0.0, 0.0, z_factor * lc), units=units)
    return beam, atom


def first_order_amplitude(beam: BeamSpec, atom: TargetAtom, t1: float,
                          settings: QuadratureSettings | None = None,
                          grid: ChannelGrid | None = None, e2: float | None = None) -> AmplitudeField:
    """Channel-resolved first-order amplitude at time t1.

    For every channel and output node w = pbar - p1z,
        c = -i int dp f(p) V_c(p - p1z) exp(i (p - p1z) Z) (exp(i D t1) - 1)/(i D),
    D = E1 - E, with composite Gauss-Legendre panels in the momentum transfer
    holding at most ``cycles_per_panel`` phase cycles each.
    """
    st = settings or QuadratureSettings()
    if not t1 > 0:
        raise ValidationError("t1 must be > 0", key="t1_s")
    if beam.plane_wave:
        raise ValidationError("first_order_amplitude needs a finite coherence length", key="lc_cm")
    grid = grid or channel_grid(atom, beam, st.n_kappa, st.n_q, st.n_theta, st.n_phi)
    lc, M, pbar, Z = beam.coherence_length, beam.mass, beam.p_mean, atom.Z
    eps = channel_energy(grid, atom, beam)
    sc = shell_transfer(eps, pbar, M)
    wgrid, wwt = _w_nodes(sc, lc, st.n_w_panels, st.w_order)
    U = 6.0 / lc
    rate = abs(Z) + beam.v * t1 + abs(Z - beam.v * t1)
    h = min(TWO_PI * st.cycles_per_panel / rate, 0.5 / lc)
    if rate * h / TWO_PI > st.max_cycles_per_panel:
        raise ResolutionError("phase cycles per panel above the refinement threshold")
    n_panels = int(math.ceil(2 * U / h)) + 1
    a = atom.a
    e2n = atom.units.e2_natural if e2 is None else e2
    coup = e2n / math.pi**2
    eta = 1.0 if st.final_state == "opw" else 0.0
    phi0q = phi0_tilde(grid.q, a)
    xg, wg = kernels.GL8_X, kernels.GL8_W
    vals = kernels.channel_amplitudes(
        grid.kappa, grid.q, eps, wgrid, grid.A_B, grid.A_C, phi0q,
        pbar, M, Z, float(t1), lc, a, coup, eta, U, h, n_panels, xg, wg, backend=st.backend)
    nk, nq, nc = grid.shape
    axes = {"kappa": grid.kappa, "q": grid.q, "angle": np.arange(nc), "node": np.arange(wgrid.shape[2])}
    return AmplitudeField(axes, vals, basis="channel", time=float(t1),
                          meta={"w": wgrid, "w_weight": wwt, "grid": grid, "panel": h,
                                "n_panels": n_panels, "settings": st})


def probability(field: AmplitudeField) -> float:
    """Total first-order ionization probability ||psi1||^2 of a channel field."""
    grid: ChannelGrid = field.meta["grid"]
    dens = np.einsum("kqcj,kqj->kqc", np.abs(field.values) ** 2, field.meta["w_weight"])
    return float(np.sum(grid.weights * dens))


def fluence(beam: BeamSpec, atom: TargetAtom, t: float) -> float:
    """Integrated flux (2 pi)^-2 Prob(z > Z) through the atom plane up to time t."""
    x = (beam.v * t - atom.Z) / beam.coherence_length
    return 0.5 * math.erfc(-x / math.sqrt(2.0)) / TWO_PI**2


def rate_W(beam: BeamSpec, atom: TargetAtom, eps_E: float | None = None,
           settings: QuadratureSettings | None = None, grid: ChannelGrid | None = None,
           n_bin: int = 8, e2: float | None = None) -> dict:
    """Golden-rule rate for a plane wave with the energy delta as a top-hat bin.

    ``eps_E`` (natural units) defaults to 1e-2 E0. Returns W = sigma J,
    sigma, the exact on-shell value and the bin-width convergence check.
    """
    st = settings or QuadratureSettings()
    grid = grid or channel_grid(atom, beam, st.n_kappa, st.n_q, st.n_theta, st.n_phi)
    M, pbar = beam.mass, beam.p_mean
    eps_E = 1e-2 * atom.E0 if eps_E is None else float(eps_E)
    if eps_E <= 64 * np.finfo(float).eps * beam.p_mean**2 / (2 * M):
        raise ResolutionError("energy bin below the floating-point energy resolution")
    eta = 1.0 if st.final_state == "opw" else 0.0
    eps = channel_energy(grid, atom, beam)

    def binned(width):
        lo = shell_transfer(np.maximum(eps - 0.5 * width, 1e-300), pbar, M)
        hi = shell_transfer(eps + 0.5 * width, pbar, M)
        x, wx = np.polynomial.legendre.leggauss(n_bin)
        tot = np.zeros(grid.shape)
        for xi, wi in zip(x, wx):
            s = lo + 0.5 * (hi - lo) * (xi + 1.0)
            V = transition_on_grid(grid, atom, s[:, :, None], eta, e2)
            tot += (0.5 * (hi - lo) * wi)[:, :, None] * V**2
        return TWO_PI**4 / beam.v * float(np.sum(grid.weights * tot)) / width

    sc = shell_transfer(eps, pbar, M)
    V = transition_on_grid(grid, atom, sc[:, :, None], eta, e2)
    jac = (M / (pbar - sc))[:, :, None]
    sigma_exact = TWO_PI**4 / beam.v * float(np.sum(grid.weights * V**2 * jac))
    sigma = binned(eps_E)
    sigma_half = binned(0.5 * eps_E)
    J = beam.J
    return {"W": sigma * J, "sigma": sigma, "sigma_on_shell": sigma_exact,
            "sigma_half_bin": sigma_half, "bin_change": abs(sigma_half - sigma) / sigma,
            "eps_E": eps_E, "J": J}


def sigma_time_dependent(beam: BeamSpec, atom: TargetAtom, times=None,
                         settings: QuadratureSettings | None = None, e2: float | None = None) -> dict:
    """Cross-section from the growth of ||psi1(t)||^2 against the fluence.

    Least-squares slope of P(t) on Phi(t) over ``times`` (default: from
    4 lc before the packet reaches the atom to 4 lc after).
    """
    st = settings or QuadratureSettings()
    grid = channel_grid(atom, beam, st.n_kappa, st.n_q, st.n_theta, st.n_phi)
    if times is None:
        t0 = (atom.Z - 4 * beam.coherence_length) / beam.v
        t1 = (atom.Z + 4 * beam.coherence_length) / beam.v
        times = np.linspace(t0, t1, 9)
    times = np.asarray(times, dtype=float)
    P = np.array([probability(first_order_amplitude(beam, atom, t, st, grid, e2)) for t in times])
    Phi = np.array([fluence(beam, atom, t) for t in times])
    A = np.vstack([Phi, np.ones_like(Phi)]).T
    (slope, offset), *_ = np.linalg.lstsq(A, P, rcond=None)
    return {"sigma": float(slope), "offset": float(offset), "times": times, "P": P, "Phi": Phi,
            "sigma_endpoints": float((P[-1] - P[0]) / (Phi[-1] - Phi[0]))}
