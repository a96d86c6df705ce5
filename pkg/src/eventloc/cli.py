"""Command-line entry point: ``eventloc <subcommand> [options]``.

Every subcommand writes CSV files plus ``manifest.json`` into ``--out``.
Exit codes: 0 ok, 1 numerical quality not met, 2 invalid input, 3 internal.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import platform
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import backend as accel_backend
from .errors import NumericalError, ValidationError
from .physconst import UnitError

EXIT_OK, EXIT_NUMERICAL, EXIT_VALIDATION, EXIT_INTERNAL = 0, 1, 2, 3

_PHYS = {
    "E0_eV": 2.0, "R_cm": 1e-8, "v_cms": 1e9, "lc_cm": 2e-7, "Z_cm": None, "e2_cmeV": 2e-7,
    "species": "alpha", "n_kappa": None, "n_q": None, "n_theta": None, "n_phi": None,
}

SCHEMAS: dict[str, dict] = {
    "constants": {"e2_cmeV": 2e-7},
    "estimate": {"scenario": "alpha-track", "E0_eV": 2.0, "R_cm": 1e-8, "T_K": 293.0,
                 "mass_species": "H2", "e2_cmeV": 2e-7},
    "formfactor": {"E0_eV": 2.0, "gap_times_a": [1.0, 2.0, 4.0, 10.0], "n_grid": 256},
    "amplitude": {**_PHYS, "t1_s": None},
    "rate": {**_PHYS, "eps_E_fraction": 1e-2, "time_dependent": False},
    "stationary": {**_PHYS, "z_minus_Z_cm": 1e-6, "E_natural": 1e21, "sp_v_cms": 1e9,
                   "A_form": "uniform", "nodes_cm": None, "t1_s": None},
    "track": {**_PHYS, "filament_factor": 5.0, "window": "cosine", "envelope": "gaussian",
              "d_long_mode": "gap", "L_cm": None, "atoms": None, "t1_s": None},
    "pairings": {**_PHYS, "atoms": None, "beams": None, "sigma_cm2": None},
    "histories": {**_PHYS, "rho_csv": None, "P1_csv": None, "P2_csv": None,
                  "L_over_dlong": [2, 5, 10, 20, 50, 100], "n_grid": 128, "state": "pure"},
    "chsh": {"model": "singlet", "angles": [0.0, 90.0, 45.0, -45.0], "n_random": 10000,
             "n_support": 8},
    "gaussmix": {"alpha": None, "beta": None, "gamma": None, "alpha_prime": None,
                 "beta_prime": None, "p_hat": 0.0, "n_samples": 1000},
    "reproduce": {"all": False},
}

# "grid" is (n_kappa, n_q, n_theta, n_phi); reproduce uses the same grids and fft_n
PROFILES = {
    "strict": {"grid": (24, 24, 12, 6), "fft_n": 256, "bin_change_tol": 1e-3},
    "fast": {"grid": (12, 12, 8, 4), "fft_n": 128, "bin_change_tol": 1e-2},
}


# io helpers -------------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    if x is None:
        return ""
    return str(x)


def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    path.write_bytes(buf.getvalue().encode("utf-8"))


def read_matrix_csv(path: str, key: str) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}", key) from None
    if not rows or set(rows[0]) != {"i", "j", "re", "im"}:
        raise ValidationError(f"{path}: header must be i,j,re,im", key)
    n = 1 + max(max(int(r["i"]), int(r["j"])) for r in rows)
    m = np.zeros((n, n), dtype=complex)
    for r in rows:
        m[int(r["i"]), int(r["j"])] = float(r["re"]) + 1j * float(r["im"])
    return m


class Context:
    def __init__(self, command: str, params: dict, out: Path, seed: int, profile: str):
        self.command, self.params, self.out, self.seed = command, params, out, seed
        self.profile = profile
        self.tol = PROFILES[profile]
        self.outputs: list[str] = []
        self.extra: dict = {}

    def csv(self, name: str, header, rows) -> Path:
        p = self.out / name
        write_csv(p, header, rows)
        self.outputs.append(name)
        return p

    def manifest(self) -> None:
        import scipy

        try:
            import numba
            nb = numba.__version__
        except ImportError:  # pragma: no cover
            nb = None
        files = {}
        for name in self.outputs:
            files[name] = hashlib.sha256((self.out / name).read_bytes()).hexdigest()
        man = {
            "command": self.command, "parameters": self.params, "seed": self.seed,
            "tolerance_profile": self.profile, "tolerances": self.tol, "backend": accel_backend(),
            "versions": {"eventloc": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                         "numba": nb, "python": platform.python_version()},
            "outputs": files, **self.extra,
        }
        (self.out / "manifest.json").write_bytes(
            (json.dumps(man, indent=2, sort_keys=True, default=_jsonable) + "\n").encode("utf-8"))


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, tuple):
        return list(x)
    return str(x)


def load_params(command: str, config: str | None, overrides: dict) -> dict:
    schema = SCHEMAS[command]
    params = dict(schema)
    if config:
        try:
            data = json.loads(Path(config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ValidationError(f"cannot read config: {exc}", "config") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}", "config") from None
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object", "config")
        data = dict(data)
        data.pop("name", None)
        target = data.pop("target", command)
        if target != command:
            raise ValidationError(f"config targets {target!r}, not {command!r}", "target")
        for k, v in data.items():
            if k not in schema:
                raise ValidationError(f"unknown key {k!r} for {command}", k)
            params[k] = v
    for k, v in overrides.items():
        if k not in schema:
            raise ValidationError(f"unknown key {k!r} for {command}", k)
        params[k] = v
    for k, v in params.items():
        d = schema[k]
        if v is None or d is None:
            continue
        if isinstance(d, bool) and not isinstance(v, bool):
            raise ValidationError(f"{k} must be true/false", k)
        if isinstance(d, (int, float)) and not isinstance(d, bool):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValidationError(f"{k} must be a finite number", k)
        if isinstance(d, str) and not isinstance(v, str):
            raise ValidationError(f"{k} must be a string", k)
        if isinstance(d, list) and not isinstance(v, list):
            raise ValidationError(f"{k} must be a list", k)
    return params


def _physical(p: dict, ctx: Context):
    from .born_amplitude import BeamSpec, QuadratureSettings, TargetAtom
    from .physconst import UnitSystem

    units = UnitSystem(e2=float(p["e2_cmeV"]))
    try:
        M = units.mass(p["species"])
    except KeyError:
        raise ValidationError(f"unknown species {p['species']!r}", "species") from None
    for k in ("E0_eV", "R_cm", "v_cms", "lc_cm"):
        if not p[k] > 0:
            raise ValidationError(f"{k} must be > 0", k)
    beam = BeamSpec(M * p["v_cms"], M, float(p["lc_cm"]))
    Z = 6.0 * p["lc_cm"] if p["Z_cm"] is None else float(p["Z_cm"])
    atom = TargetAtom(float(p["E0_eV"]), X=(0.0, 0.0, Z), R=float(p["R_cm"]), units=units)
    g = ctx.tol["grid"]
    n = [p[k] if p[k] is not None else d for k, d in zip(("n_kappa", "n_q", "n_theta", "n_phi"), g)]
    for k, v in zip(("n_kappa", "n_q", "n_theta", "n_phi"), n):
        if not (isinstance(v, int) and v > 0):
            raise ValidationError(f"{k} must be a positive integer", k)
    return beam, atom, QuadratureSettings(*n)


# subcommands -------------------------------------------------------------------

def cmd_constants(p, ctx):
    from .physconst import UnitSystem

    ctx.csv("constants.csv", ["name", "value", "unit"], UnitSystem(e2=float(p["e2_cmeV"])).rows())


def alpha_track_rows(e2: float = 2e-7, E0_eV: float = 2.0, R: float = 1e-8):
    from . import estimates as est
    from .physconst import UnitSystem
    from .stationary_phase import stationary_point

    units = UnitSystem(e2=e2)
    E, v = 1e21, 1e9
    sp = stationary_point([0, 0, 1e-6], [0, 0, 0], 1e-13, E, (2 * E / v**2, units.mass("electron")))
    dt = sp.widths["dt"]
    t_pass = est.passage_time(1e-7, v)
    M = units.mass("alpha")
    lc = est.thermal_coherence_length(est.ThermalSourceInput(1e4, v, 2 * math.pi / (M * v)))
    rr = est.classical_range_report(est.ClassicalRangeInput(E0_eV, R), units)
    rows = [
        ("Delta_t", dt, "s", 1e-18),
        ("passage_time", t_pass, "s", 1e-16),
        ("Delta_t_over_passage", dt / t_pass, "1", 1e-2),
        ("delta_p_over_p", lc["delta_p_over_p"], "1", 1e-5),
        ("l_c", lc["l_c"], "cm", 2e-7),
        ("d2_over_R", rr["d2_over_R"], "cm", rr["d2_over_R_printed"]),
    ]
    return [(q, v_, u, pv, est.decade_match(v_, pv)) for q, v_, u, pv in rows]


def thermal_rows(T: float = 293.0, species: str = "H2"):
    from . import estimates as est
    from .gaussian_mix import boltzmann_repackaging
    from .physconst import DEFAULT

    try:
        m = DEFAULT.mass(species)
    except KeyError:
        raise ValidationError(f"unknown species {species!r}", "mass_species") from None
    a = est.thermal_packet_width(m, T)
    b = boltzmann_repackaging(m, T)
    return [("thermal_packet_" + species, a, "cm", 3e-9, est.decade_match(a, 3e-9)),
            ("thermal_packet_gaussmix", b["a"], "cm", 3e-9, est.decade_match(b["a"], 3e-9))]


def cmd_estimate(p, ctx):
    hdr = ["quantity", "value", "unit", "paper_value", "decade_match"]
    if p["scenario"] == "alpha-track":
        rows = alpha_track_rows(p["e2_cmeV"], p["E0_eV"], p["R_cm"])
    elif p["scenario"] == "thermal-gas":
        rows = thermal_rows(p["T_K"], p["mass_species"])
    else:
        raise ValidationError(f"unknown scenario {p['scenario']!r}", "scenario")
    ctx.csv("estimate.csv", hdr, rows)


def cmd_formfactor(p, ctx):
    from .born_amplitude import MomentumGap, TargetAtom, gapped_profile

    atom = TargetAtom(float(p["E0_eV"]))
    rows = []
    for g in p["gap_times_a"]:
        if not g > 0:
            raise ValidationError("gap_times_a entries must be > 0", "gap_times_a")
        D = g / atom.a
        prof = gapped_profile(atom, (0.0, 0.0, 0.0), MomentumGap(D), n=int(p["n_grid"]), keep_field=False)
        rows.append((D, g, prof.widths[2], math.pi / D, prof.widths[2] * D / math.pi, prof.outside_10a))
    ctx.csv("formfactor.csv", ["Delta_cm_inv", "Delta_a", "width_cm", "pi_over_Delta_cm", "ratio",
                               "outside_10a"], rows)


def cmd_amplitude(p, ctx):
    from .born_amplitude import first_order_amplitude, probability

    beam, atom, st = _physical(p, ctx)
    t1 = (atom.Z + 4 * beam.coherence_length) / beam.v if p["t1_s"] is None else float(p["t1_s"])
    f = first_order_amplitude(beam, atom, t1, st)
    g = f.meta["grid"]
    w = f.meta["w"]
    nk, nq, nc, nj = f.values.shape
    rows = []
    for ik in range(nk):
        for iq in range(nq):
            for ic in range(nc):
                for j in range(nj):
                    c = f.values[ik, iq, ic, j]
                    rows.append((g.kappa[ik], g.q[iq], ic, w[ik, iq, j], c.real, c.imag))
    ctx.csv("amplitude.csv", ["kappa", "q", "angle", "w", "re", "im"], rows)
    ctx.csv("amplitude_meta.csv", ["quantity", "value"],
            [("t1_s", t1), ("probability", probability(f)), ("panel", f.meta["panel"]),
             ("n_panels", f.meta["n_panels"])])


def cmd_rate(p, ctx):
    from .born_amplitude import rate_W, sigma_time_dependent

    beam, atom, st = _physical(p, ctx)
    r = rate_W(beam, atom, eps_E=p["eps_E_fraction"] * atom.E0, settings=st)
    rows = [("sigma_cm2", r["sigma"]), ("W_per_s", r["W"]), ("sigma_on_shell_cm2", r["sigma_on_shell"]),
            ("bin_change", r["bin_change"]), ("eps_E", r["eps_E"])]
    if p["time_dependent"]:
        td = sigma_time_dependent(beam, atom, settings=st)
        rows += [("sigma_time_dependent_cm2", td["sigma"]), ("ratio", td["sigma"] / r["sigma"])]
    ctx.csv("rate.csv", ["quantity", "value"], rows)
    if r["bin_change"] > ctx.tol["bin_change_tol"]:
        raise NumericalError(f"energy-bin change {r['bin_change']:.3g} above tolerance")


def cmd_stationary(p, ctx):
    from .physconst import DEFAULT
    from .stationary_phase import compare_with_direct, stationary_point

    E, v = float(p["E_natural"]), float(p["sp_v_cms"])
    sp = stationary_point([0, 0, p["z_minus_Z_cm"]], [0, 0, 0], 1e-13, E,
                          (2 * E / v**2, DEFAULT.mass("electron")), A_form=p["A_form"])
    ctx.csv("stationary_point.csv", ["quantity", "value"],
            [("A", sp.A), ("flight_time", sp.flight_time), ("chi1", sp.chi1),
             ("chi1_approx_error", sp.chi1_error), ("dp", sp.widths["dp"]), ("dq", sp.widths["dq"]),
             ("dt", sp.widths["dt"]), ("dt_hessian", sp.widths["dt_hessian"]),
             ("dt_over_passage", sp.widths["dt"] / (1e-7 / v))])
    beam, atom, _ = _physical(p, ctx)
    rep = compare_with_direct(beam, atom, p["nodes_cm"], p["t1_s"])
    ctx.csv("stationary.csv", ["node", "re_direct", "im_direct", "re_sp", "im_sp", "mod_ratio", "phase_diff"],
            rep.rows())
    ctx.csv("stationary_verdict.csv", ["quantity", "value"], sorted(rep.verdict.items()))


def _atoms_from(p, atom):
    out = []
    for i, a in enumerate(p["atoms"] or []):
        if not isinstance(a, dict):
            raise ValidationError("atoms[] entries must be objects", f"atoms[{i}]")
        for k in a:
            if k not in ("x_cm", "y_cm", "z_cm", "spread_cm"):
                raise ValidationError(f"unknown key {k!r}", f"atoms[{i}].{k}")
        out.append((atom.moved((a.get("x_cm", 0.0), a.get("y_cm", 0.0), a.get("z_cm", atom.Z))),
                    a.get("spread_cm", 1e-8)))
    return out


def cmd_track(p, ctx):
    from .track_model import (SecondOrderProblem, d_longitudinal, event_time_distribution,
                              filament_mixture, second_order_amplitude)

    beam, atom, st = _physical(p, ctx)
    dl = d_longitudinal(beam, atom, mode=p["d_long_mode"])
    fd = filament_mixture(beam, atom, t1=p["t1_s"], filament_factor=p["filament_factor"],
                          window=p["window"], envelope=p["envelope"], d_long=dl, settings=st)
    ev = event_time_distribution(fd)
    if ev["mode"] == "rate":
        ctx.csv("track_rate.csv", ["quantity", "value"], [("W_per_s", ev["W"]), ("sigma_cm2", ev["sigma"])])
    else:
        ctx.csv("track.csv", ["t_bar_s", "weight"], zip(ev["t_bar"], ev["weight"]))
        ctx.csv("filaments.csv", ["index", "centre_cm", "t_bar_s", "weight", "z1_cm", "spread_s", "tv"],
                [(f.index, f.centre, f.t_bar, f.weight, f.z1, f.spread, f.tv) for f in fd.filaments])
        ctx.csv("track_summary.csv", ["quantity", "value"],
                [("d_long_cm", fd.d_long), ("filament_length_cm", fd.filament_length), ("tau_s", fd.tau),
                 ("total", fd.total), ("undecomposed", fd.undecomposed),
                 ("interference_dropped", fd.interference_dropped), ("degenerate", fd.degenerate)])
    if p["L_cm"] is not None:
        L = float(p["L_cm"])
        a2 = atom.moved((0.0, 0.0, atom.Z + L))
        r = second_order_amplitude(SecondOrderProblem(atom, a2, beam, L))
        ctx.csv("second_order.csv", ["quantity", "value"],
                [("L_over_dlong", L / r.d_long), ("P_nested", r.P_nested), ("P_factorized", r.P_fact),
                 ("declared_error", r.declared_error), ("relative_discrepancy", r.relative_discrepancy),
                 ("P_first", r.P_first), ("P_conditional", r.P_conditional)])


def cmd_pairings(p, ctx):
    from .track_model import AtomPacket, BeamTube, PairingScenario, pairing_weights

    beam, atom, _ = _physical(p, ctx)
    atoms = [AtomPacket(a, s) for a, s in _atoms_from(p, atom)] or [AtomPacket(atom, 1e-8)]
    tubes = []
    for i, b in enumerate(p["beams"] or [{}]):
        for k in b:
            if k not in ("x_cm", "y_cm", "width_cm"):
                raise ValidationError(f"unknown key {k!r}", f"beams[{i}].{k}")
        tubes.append(BeamTube(beam, (b.get("x_cm", 0.0), b.get("y_cm", 0.0)), b.get("width_cm", 1e-7)))
    res = pairing_weights(PairingScenario(tuple(atoms), tuple(tubes), p["sigma_cm2"]))
    ctx.csv("pairings.csv", ["atom", "beam", "weight", "class"], res.pairings)
    ctx.csv("pairing_combinations.csv", ["atom_i", "beam_rho", "atom_k", "beam_sigma", "class", "partner"],
            [(i, r, k, s, c, "" if q is None else "%d:%d,%d:%d" % q) for i, r, k, s, c, q in res.combinations])


def cmd_histories(p, ctx):
    from .histories import HistoryProblem, consistency_residual, track_history_check
    from .track_model import filament_mixture

    if p["rho_csv"] or p["P1_csv"] or p["P2_csv"]:
        if not (p["rho_csv"] and p["P1_csv"] and p["P2_csv"]):
            raise ValidationError("rho_csv, P1_csv and P2_csv must be given together", "rho_csv")
        hp = HistoryProblem(read_matrix_csv(p["rho_csv"], "rho_csv"), read_matrix_csv(p["P1_csv"], "P1_csv"),
                            read_matrix_csv(p["P2_csv"], "P2_csv"))
        r = consistency_residual(hp)
        ctx.csv("histories.csv", ["residual", "prob_with_P1", "prob_without_P1"],
                [(r["residual"], r["prob_with_P1"], r["prob_without_P1"])])
        return
    beam, atom, st = _physical(p, ctx)
    fd = filament_mixture(beam, atom, momentum=False, settings=st)
    rep = track_history_check(fd, p["L_over_dlong"], n=int(p["n_grid"]), state=p["state"])
    ctx.csv("histories.csv", ["L_over_dlong", "residual", "prob_with_P1", "prob_without_P1"],
            zip(rep.L_over_dlong, rep.residual, rep.prob_with, rep.prob_without))


def _lhv_from_file(path: str):
    from .bell import LHVModel, angle_response

    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot load LHV model: {exc}", "model") from None
    for k in d:
        if k not in ("lam1_deg", "lam2_deg", "rho"):
            raise ValidationError(f"unknown key {k!r} in LHV model", k)

    l1 = np.asarray(d["lam1_deg"], dtype=float)[:, None]
    l2 = np.asarray(d["lam2_deg"], dtype=float)[:, None]
    return LHVModel(l1, l2, np.asarray(d["rho"], dtype=float), angle_response)


def cmd_chsh(p, ctx):
    from .bell import batched_chsh, chsh_terms, correlation, quantum_correlation_oracle, setting, singlet

    ang = p["angles"]
    if len(ang) != 4:
        raise ValidationError("angles needs four values", "angles")
    a, a2, b, b2 = (setting(float(x)) for x in ang)
    model = p["model"]
    if model == "singlet":
        rho = singlet()
        terms = chsh_terms(lambda x, y: quantum_correlation_oracle(rho, x, y), a, a2, b, b2)
    elif model.startswith("lhv:"):
        m = _lhv_from_file(model[4:])
        terms = chsh_terms(lambda x, y: correlation(m, x, y), a, a2, b, b2)
    elif model == "random":
        rng = np.random.default_rng(ctx.seed)
        r = batched_chsh(rng, int(p["n_random"]), int(p["n_support"]))
        ctx.csv("chsh_random.csv", ["count", "max_S", "no_signalling"],
                [(int(p["n_random"]), r["max_S"], r["no_signalling"])])
        return
    else:
        raise ValidationError(f"unknown model {model!r}", "model")
    ctx.csv("chsh.csv", ["S", "corr_ab", "corr_ab'", "corr_a'b", "corr_a'b'"], [terms])


def cmd_gaussmix(p, ctx):
    from .gaussian_mix import (GaussianEnsemble, equality_check, matched_position_mixture,
                               sampled_discrepancy)

    fwd = [p[k] for k in ("alpha", "beta", "gamma")]
    rev = [p[k] for k in ("alpha_prime", "beta_prime")]
    if all(x is not None for x in fwd[:2]) and all(x is None for x in rev):
        gamma = math.inf if fwd[2] is None else fwd[2]
        e1 = GaussianEnsemble.momentum_mixture(fwd[0], fwd[1], gamma, p["p_hat"])
        e2 = matched_position_mixture(fwd[0], fwd[1], gamma, p["p_hat"])
    elif all(x is not None for x in rev) and fwd[0] is None and fwd[1] is None:
        ap, bp = rev
        W = 2 * ap + 0.5 * bp
        # gamma must lie in (beta'/2, W); default is the midpoint
        gamma = 0.5 * (W + 0.5 * bp) if fwd[2] is None else fwd[2]
        if not (0.5 * bp < gamma < W):
            raise ValidationError("gamma must lie in (beta'/2, 2 alpha' + beta'/2)", "gamma")
        beta = 1.0 / (1.0 / bp - 0.5 / gamma)
        e1 = GaussianEnsemble.momentum_mixture(0.5 * (W - gamma), beta, gamma, p["p_hat"])
        e2 = GaussianEnsemble.position_mixture(ap, bp, p["p_hat"])
    else:
        raise ValidationError("give alpha, beta [, gamma] or alpha_prime, beta_prime [, gamma]", "alpha")
    chk = equality_check(e1, e2)
    rng = np.random.default_rng(ctx.seed)
    sd = math.sqrt(e1.kernel().diagonal_variance)
    x = rng.normal(scale=2 * sd, size=int(p["n_samples"]))
    xp = rng.normal(scale=2 * sd, size=int(p["n_samples"]))
    disc = sampled_discrepancy(e1.kernel(), e2.kernel(), x, xp)
    a, b, g = e1.params
    ap, bp = e2.params
    ctx.csv("gaussmix.csv", ["alpha", "beta", "gamma", "alpha_prime", "beta_prime", "residual", "sampled",
                             "equal"], [(a, b, g, ap, bp, chk["residual"], disc, chk["equal"])])


def cmd_reproduce(p, ctx):
    from .reproduce import reproduce_paper_table

    if not p["all"]:
        raise ValidationError("reproduce needs --all", "all")
    rows = reproduce_paper_table(ctx.profile, ctx.seed)
    ctx.csv("summary.csv", ["name", "paper_value", "computed", "unit", "verdict"], rows)
    if any(r[4] == "FAIL" for r in rows):
        raise NumericalError("some reproduced quantities failed their tolerance")


COMMANDS = {
    "constants": cmd_constants, "estimate": cmd_estimate, "formfactor": cmd_formfactor,
    "amplitude": cmd_amplitude, "rate": cmd_rate, "stationary": cmd_stationary, "track": cmd_track,
    "pairings": cmd_pairings, "histories": cmd_histories, "chsh": cmd_chsh, "gaussmix": cmd_gaussmix,
    "reproduce": cmd_reproduce,
}


def _parse_set(items):
    out = {}
    for it in items or []:
        if "=" not in it:
            raise ValidationError(f"--set expects key=value, got {it!r}", "set")
        k, v = it.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        m = re.search(r"argument (?:--)?([\w-]+)", message)
        raise ValidationError(message, m.group(1).replace("-", "_") if m else "argv")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON scenario file (flat keys)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tolerance-profile", choices=sorted(PROFILES), default="strict")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a scenario key")
    ap = _Parser(prog="eventloc", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "estimate":
            sp.add_argument("--scenario", choices=["alpha-track", "thermal-gas"])
            sp.add_argument("--E0", type=float, dest="E0_eV")
            sp.add_argument("--R", type=float, dest="R_cm")
            sp.add_argument("--T", type=float, dest="T_K")
            sp.add_argument("--mass", dest="mass_species")
        elif name == "chsh":
            sp.add_argument("--model")
            sp.add_argument("--angles", type=lambda s: [float(x) for x in s.split(",")])
        elif name == "gaussmix":
            for flag in ("alpha", "beta", "gamma", "alpha-prime", "beta-prime"):
                sp.add_argument("--" + flag, type=float, dest=flag.replace("-", "_"))
        elif name == "reproduce":
            sp.add_argument("--all", action="store_true", default=None)
    return ap


_GLOBAL = {"command", "config", "out", "seed", "tolerance_profile", "set"}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        try:
            args = ap.parse_args(argv)
        except SystemExit as exc:
            return EXIT_OK if not exc.code else EXIT_VALIDATION
        overrides = {k: v for k, v in vars(args).items() if k not in _GLOBAL and v is not None}
        overrides.update(_parse_set(args.set))
        if args.seed < 0 or args.seed >= 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer", "seed")
        params = load_params(args.command, args.config, overrides)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        ctx = Context(args.command, params, out, args.seed, args.tolerance_profile)
        try:
            COMMANDS[args.command](params, ctx)
        finally:
            if ctx.outputs:
                ctx.manifest()
        return EXIT_OK
    except (ValidationError, UnitError) as exc:
        key = getattr(exc, "key", None)
        print(json.dumps({"error": "validation", "key": key, "message": str(exc)}), file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(json.dumps({"error": "numerical", "type": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_NUMERICAL
    except Exception as exc:  # noqa: BLE001
        print(json.dumps({"error": "internal", "type": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
