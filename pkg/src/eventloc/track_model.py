"""Event formation: filament mixtures, second-order factorization and pairing weights."""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .born_amplitude import (AmplitudeField, BeamSpec, MomentumGap, QuadratureSettings, TargetAtom,
                             channel_grid, elastic_form_factor, gapped_profile, phi0_tilde, rate_W)
from .errors import ValidationError
from .reduced1d import ComovingGrid, Reduced1D, dyson_sweep, second_stage

TWO_PI = 2.0 * math.pi


class RegimeWarning(UserWarning):
    pass


# event scales -----------------------------------------------------------------

def d_transverse(beam: BeamSpec, atom: TargetAtom, n: int = 256) -> float:
    """Measured width of the gapped kernel with the isotropic gap E0/v."""
    prof = gapped_profile(atom, (0.0, 0.0, 0.0), MomentumGap(atom.E0 / beam.v), n=n, keep_field=False)
    return float(np.mean(prof.widths))


def d_longitudinal(beam: BeamSpec, atom: TargetAtom, mode: str = "gap", factor: float = 3.0) -> float:
    """Longitudinal event extent.

    ``gap``: pi v / E0, the width law at the minimal longitudinal transfer.
    ``tr-multiple``: ``factor`` times the measured transverse width.
    """
    if mode == "gap":
        return math.pi * beam.v / atom.E0
    if mode == "tr-multiple":
        return factor * d_transverse(beam, atom)
    raise ValidationError(f"unknown d_long mode {mode!r}", "d_long_mode")


# M-shape ------------------------------------------------------------------------

@dataclass
class TransferDistribution:
    s: np.ndarray
    density: np.ndarray   # normalised on s
    sigma: float          # cross-section implied by the unnormalised density

    @property
    def ds(self) -> float:
        return float(self.s[1] - self.s[0])


def transfer_distribution(beam: BeamSpec, atom: TargetAtom, ds: float | None = None,
                          s_max_factor: float = 40.0, settings: QuadratureSettings | None = None,
                          e2: float | None = None) -> TransferDistribution:
    """Plane-wave distribution of the longitudinal transfer s = p - p1 summed over
    ionization channels (orthogonalised final states)."""
    st = settings or QuadratureSettings(n_kappa=32, n_theta=16, n_phi=8)
    g = channel_grid(atom, beam, st.n_kappa, st.n_q, st.n_theta, st.n_phi)
    m_e = atom.units.mass("electron")
    M, pbar, v = beam.mass, beam.p_mean, beam.v
    smin = atom.E0 / v
    ds = 0.005 * smin if ds is None else ds
    s = np.arange(1, int(s_max_factor * smin / ds) + 1) * ds
    e2n = atom.units.e2_natural if e2 is None else e2
    st_th = np.sin(g.theta) * np.cos(g.phi)
    ct = np.cos(g.theta)
    D = np.zeros_like(s)
    for ik, kap in enumerate(g.kappa):
        need = s * (2 * pbar - s) / (2 * M) - atom.E0 - kap**2 / (2 * M)
        ok = need > 0
        q = np.sqrt(2 * m_e * np.where(ok, need, 0.0))
        dsdq = np.where(ok, (q / m_e) * M / (pbar - s), 1.0)
        k2 = kap**2 + s**2
        ref = phi0_tilde(q, atom.a) * elastic_form_factor(np.sqrt(k2), atom.a)
        for ic in range(len(g.w_ang)):
            Q2 = q**2 + k2 - 2 * q * kap * st_th[ic] - 2 * q * ct[ic] * s
            V = e2n / math.pi**2 / k2 * (phi0_tilde(np.sqrt(np.maximum(Q2, 0.0)), atom.a) - ref)
            D += np.where(ok, g.w_kappa[ik] * g.w_ang[ic] * V**2 * M / (pbar - s) * q**2 / dsdq, 0.0)
    norm = D.sum() * ds
    return TransferDistribution(s, D / norm, norm * TWO_PI**4 / v)


def total_variation(p: np.ndarray, q: np.ndarray, dx: float) -> float:
    return 0.5 * float(np.sum(np.abs(p - q))) * dx


# filaments ---------------------------------------------------------------------

@dataclass
class Filament:
    index: int
    centre: float       # packet-frame centroid at t = 0 (cm)
    t_bar: float        # mean passage time of the atom (s)
    weight: float       # ||Psi_i||^2
    z1: float           # centroid at t1 (cm)
    spread: float       # time spread of the event (s)
    tv: float = float("nan")


@dataclass
class FilamentDecomposition:
    filament_length: float
    filaments: list
    tau: float
    d_long: float
    total: float                  # sum of filament weights
    undecomposed: float           # ||psi1||^2 of the full packet, same route
    interference_dropped: float   # ||sum Psi_i||^2 - sum ||Psi_i||^2 (relative)
    degenerate: bool = False
    mode: str = "mixture"         # or "rate" for a plane wave
    rate: dict | None = None
    window: str = "cosine"
    envelope: str = "gaussian"
    t1: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def weights(self) -> np.ndarray:
        return np.array([f.weight for f in self.filaments])

    @property
    def t_bars(self) -> np.ndarray:
        return np.array([f.t_bar for f in self.filaments])

    @property
    def unscattered(self) -> float:
        """1 - total ionization probability (first order)."""
        return 1.0 - self.total

    def max_tv(self, min_weight: float = 0.01) -> float:
        w = self.weights / self.total
        return max(f.tv for f, wi in zip(self.filaments, w) if wi >= min_weight)


def _envelope(z, lc, kind):
    if kind == "gaussian":
        return (2 * math.pi * lc**2) ** -0.25 * np.exp(-(z**2) / (4 * lc**2))
    if kind == "flat":
        half = math.sqrt(3.0) * lc
        return np.where(np.abs(z) <= half, (2 * half) ** -0.5, 0.0)
    raise ValidationError(f"unknown envelope {kind!r}", "envelope")


def _window(z, c, spacing, kind):
    x = z - c
    if kind == "cosine":
        return np.where(np.abs(x) < spacing, np.cos(0.5 * math.pi * x / spacing), 0.0)
    if kind == "hard":
        return np.where((x >= -0.5 * spacing) & (x < 0.5 * spacing), 1.0, 0.0)
    raise ValidationError(f"unknown window {kind!r}", "window")


def filament_mixture(beam: BeamSpec, atom: TargetAtom, t1: float | None = None,
                     filament_factor: float = 5.0, window: str = "cosine",
                     envelope: str = "gaussian", d_long: float | None = None,
                     momentum: bool = True, transfer: TransferDistribution | None = None,
                     settings: QuadratureSettings | None = None) -> FilamentDecomposition:
    """Split the longitudinal packet into filaments of length filament_factor * d_long.

    Windows satisfy sum w_i^2 = 1, so the mixture keeps the position density of
    the packet; cross-filament interference is dropped (the decoherence step)
    and its size reported. Weights are on-shell first-order norms.
    """
    dl = d_longitudinal(beam, atom) if d_long is None else float(d_long)
    spacing = filament_factor * dl
    v = beam.v
    if t1 is None:
        t1 = (atom.Z + 8 * (beam.coherence_length if not beam.plane_wave else 0) + 5 * dl) / v
    rw = rate_W(beam, atom, settings=settings)
    sigma = rw["sigma_on_shell"]
    if beam.plane_wave:
        return FilamentDecomposition(spacing, [], 5 * dl / v, dl, float("nan"), float("nan"), 0.0,
                                     mode="rate", rate=rw, window=window, envelope=envelope, t1=t1,
                                     meta={"beam": beam, "atom": atom})
    lc = beam.coherence_length
    degenerate = lc <= spacing
    D = transfer if transfer is not None or not momentum else transfer_distribution(beam, atom)
    ext = 8 * lc if envelope == "gaussian" else math.sqrt(3.0) * lc
    ds = D.ds if D is not None else TWO_PI / (40 * ext)
    span = TWO_PI / ds                      # FFT box length so that du = ds
    dz = min(lc, spacing) / 40.0
    n = 1 << int(math.ceil(math.log2(span / dz)))
    if span < 2 * (ext + 2 * spacing):
        raise ValidationError("transfer grid too coarse for this coherence length", "lc_cm")
    dz = span / n
    z = (np.arange(n) - n // 2) * dz
    F = _envelope(z, lc, envelope)
    if degenerate:
        centres = [0.0]
        wins = [np.ones_like(z)]
    else:
        k = int(math.ceil((ext + spacing) / spacing))
        centres = [j * spacing for j in range(-k, k + 1)]
        wins = [_window(z, c, spacing, window) for c in centres]
    norm_full = float(np.sum(F**2) * dz)
    pref = sigma / TWO_PI**2
    fils = []
    amp_sum = np.zeros_like(F)
    for i, (c, w) in enumerate(zip(centres, wins)):
        piece = w * F
        amp_sum += piece
        dens = piece**2
        wt = float(np.sum(dens) * dz)
        if wt <= 1e-14 * norm_full:
            continue
        zc = float(np.sum(z * dens) * dz / wt)
        var = float(np.sum((z - zc) ** 2 * dens) * dz / wt)
        tb = (atom.Z - zc) / v
        fil = Filament(i, zc, tb, pref * wt, zc + v * t1, math.sqrt(var + dl**2) / v)
        if D is not None:
            fil.tv = _filament_tv(piece, dz, D)
        fils.append(fil)
    total = sum(f.weight for f in fils)
    inter = (float(np.sum(amp_sum**2) * dz) - sum(f.weight for f in fils) / pref) / norm_full
    return FilamentDecomposition(spacing, fils, 5 * dl / v, dl, total, pref * norm_full, inter,
                                 degenerate=degenerate, window=window, envelope=envelope, t1=t1,
                                 meta={"sigma": sigma, "dz": dz, "n": n, "beam": beam, "atom": atom})


def _filament_tv(piece: np.ndarray, dz: float, D: TransferDistribution) -> float:
    n = len(piece)
    f = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(piece))) * dz
    g = np.abs(f) ** 2
    g /= g.sum() * D.ds
    # density of s' = s - x with x ~ |f_i|^2 on the u grid (centre index n//2)
    P = fftconvolve(D.density, g[::-1]) * D.ds
    # P[k] sits at s' = s[0] + (k - (n - 1 - n//2)) ds
    off = n - 1 - n // 2
    Dext = np.zeros_like(P)
    Dext[off: off + len(D.density)] = D.density
    return total_variation(P, Dext, D.ds)


def filament_alone(beam: BeamSpec, atom: TargetAtom, index: int, **kw) -> Filament:
    """One filament recomputed on its own (its marginals do not depend on the others)."""
    fd = filament_mixture(beam, atom, **kw)
    for f in fd.filaments:
        if f.index == index:
            return f
    raise ValidationError(f"no filament with index {index}", "index")


def event_time_distribution(fd: FilamentDecomposition) -> dict:
    """Normalised histogram of mean event times, or the rate for a plane wave."""
    if fd.mode == "rate":
        return {"mode": "rate", "W": fd.rate["W"], "sigma": fd.rate["sigma"], "t_bar": np.array([]),
                "weight": np.array([])}
    order = np.argsort(fd.t_bars)
    w = fd.weights[order]
    return {"mode": "histogram", "t_bar": fd.t_bars[order], "weight": w / w.sum(), "tau": fd.tau}


# second order -------------------------------------------------------------------

@dataclass(frozen=True)
class SecondOrderProblem:
    atom1: TargetAtom
    atom2: TargetAtom
    beam: BeamSpec
    L: float
    t2: float | None = None
    reduced_dim: str = "1D"

    def __post_init__(self):
        if not self.L > 0:
            raise ValidationError("separation must be positive", "L_cm")
        if self.atom1 is self.atom2 or np.allclose(self.atom1.X, self.atom2.X):
            raise ValidationError("atoms must be distinct", "atoms")
        if self.reduced_dim not in ("1D", "cylindrical"):
            raise ValidationError(f"unknown reduced_dim {self.reduced_dim!r}", "reduced_dim")


@dataclass
class SecondOrderResult:
    nested: AmplitudeField
    factorized: AmplitudeField
    P_nested: float
    P_fact: float
    declared_error: float
    P_first: float
    P_conditional: float
    conditional_norm: float
    d_long: float
    L: float
    meta: dict = field(default_factory=dict)

    @property
    def discrepancy(self) -> float:
        return abs(self.P_nested - self.P_fact)

    @property
    def relative_discrepancy(self) -> float:
        return self.discrepancy / self.P_fact


def second_order_amplitude(problem: SecondOrderProblem, e2: float | None = None,
                           u_max_factor: float = 25.0, steps_per_cycle: float = 6.0,
                           model: Reduced1D | None = None, estimate_error: bool = True) -> SecondOrderResult:
    """Second ionization in the single-channel longitudinal model.

    Nested: the inner factor is the first-order amplitude accumulated up to
    t2. Factorized: the inner factor is replaced by its asymptotic value. The
    declared error is the change of the factorized probability under a finer
    grid (larger momentum range and more time steps).
    """
    if problem.reduced_dim != "1D":
        raise ValidationError("only the 1D reduced dynamics is available", "reduced_dim")
    beam, a1 = problem.beam, problem.atom1
    m = model or Reduced1D.from_physical(beam, a1, e2=e2)
    H = 6.0 * m.lc + 25.0 / m.kappa
    Z1 = max(a1.Z, 1.01 * H)
    Z2 = Z1 + problem.L
    t2 = problem.t2
    if t2 is not None and m.v * t2 - Z1 < 5 * m.d_long:
        warnings.warn("t2 too small for the first event to complete", RegimeWarning, stacklevel=2)
    g = ComovingGrid.build(m, u_max_factor=u_max_factor)
    r = dyson_sweep(m, Z1, Z2, grid=g, steps_per_cycle=steps_per_cycle, t_end=t2)
    err = float("nan")
    if estimate_error:
        gf = ComovingGrid.build(m, u_max_factor=1.4 * u_max_factor)
        rf = dyson_sweep(m, Z1, Z2, grid=gf, steps_per_cycle=1.5 * steps_per_cycle, t_end=t2)
        err = abs(rf.P2_fact - r.P2_fact) + 1e-13 * r.P2_fact
    # conditional factor from the normalised emanating wave
    first = dyson_sweep(m, Z1, grid=g, steps_per_cycle=steps_per_cycle)
    nrm = math.sqrt(first.P1)
    c1n = first.c1 / nrm
    cond_norm = g.norm2(c1n)
    c_cond = second_stage(m, c1n, Z2, g, steps_per_cycle)
    P_cond = g.norm2(c_cond)
    axes = {"u": g.u}
    meta = {"Z1": Z1, "Z2": Z2, "T": r.T, "n_steps": r.n_steps, "model": m}
    return SecondOrderResult(
        AmplitudeField(axes, r.c2_nested, basis="momentum", time=r.T, meta={"route": "nested"}),
        AmplitudeField(axes, r.c2_fact, basis="momentum", time=r.T, meta={"route": "factorized"}),
        r.P2_nested, r.P2_fact, err, first.P1, P_cond, cond_norm, m.d_long, problem.L, meta)


# pairings ------------------------------------------------------------------------

@dataclass(frozen=True)
class AtomPacket:
    atom: TargetAtom
    spread: float          # transverse std of the atom's centre-of-mass packet (cm)
    norm: float = 1.0


@dataclass(frozen=True)
class BeamTube:
    beam: BeamSpec
    centre: tuple = (0.0, 0.0)   # transverse position of the tube
    width: float = 1e-7          # transverse std (cm)
    norm: float = 1.0


@dataclass(frozen=True)
class PairingScenario:
    atoms: tuple
    beams: tuple
    sigma: float | None = None    # override of the single-pair cross-section

    def __post_init__(self):
        if not self.atoms or not self.beams:
            raise ValidationError("need at least one atom and one beam", "atoms")
        for p in tuple(self.atoms) + tuple(self.beams):
            if abs(p.norm - 1.0) > 1e-9:
                raise ValidationError("packets must be normalised", "norm")
        for p in self.atoms:
            if not p.spread > 0:
                raise ValidationError("atom packet spread must be positive", "spread")
        for b in self.beams:
            if not b.width > 0:
                raise ValidationError("beam tube width must be positive", "width")


def overlap(atom: AtomPacket, tube: BeamTube) -> float:
    """int d^2x |A_i|^2 |psi_rho|^2 for normalised transverse Gaussians (1/cm^2)."""
    s2 = atom.spread**2 + tube.width**2
    d = np.asarray(atom.atom.X[:2], dtype=float) - np.asarray(tube.centre, dtype=float)
    return math.exp(-float(d @ d) / (2 * s2)) / (TWO_PI * s2)


@dataclass
class PairingResult:
    pairings: list        # (i, rho, W, class)
    combinations: list    # (i, rho, k, sigma, class, partner)

    @property
    def total(self) -> float:
        return float(sum(p[2] for p in self.pairings))


def classify(i: int, rho: int, k: int, sigma: int):
    """Coherence class of the second-order combination (i rho, k sigma)."""
    if rho == sigma:
        return "same-track", None
    if i == k:
        return "incoherent", None
    return "coherent-hbt", (k, rho, i, sigma)


def pairing_weights(scenario: PairingScenario, sigma_cache: dict | None = None) -> PairingResult:
    cache = {} if sigma_cache is None else sigma_cache
    out = []
    for i, ap in enumerate(scenario.atoms):
        for r, bt in enumerate(scenario.beams):
            if scenario.sigma is not None:
                sig = scenario.sigma
            else:
                key = (ap.atom.E0, bt.beam.p_mean, bt.beam.mass)
                if key not in cache:
                    cache[key] = rate_W(bt.beam, ap.atom)["sigma_on_shell"]
                sig = cache[key]
            out.append((i, r, sig * overlap(ap, bt), "incoherent"))
    combos = []
    idx = [(i, r) for i in range(len(scenario.atoms)) for r in range(len(scenario.beams))]
    for (i, r), (k, s) in itertools.combinations(idx, 2):
        cls, partner = classify(i, r, k, s)
        combos.append((i, r, k, s, cls, partner))
    return PairingResult(out, combos)
