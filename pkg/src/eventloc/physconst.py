"""Physical constants and the natural unit system (hbar = 1, cm, s).

Inside the package every quantity is stored in natural units:

    energy    s^-1        (E[eV] / hbar[eV s])
    momentum  cm^-1
    mass      s cm^-2     (m c^2[eV] / (hbar[eV s] c^2))
    length    cm,  time s,  speed cm/s

so that E = p^2 / 2m holds without extra factors. The Coulomb constant is
kept in cm*eV as quoted and turned into natural units by ``e2_natural``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

HBAR_EVS = 6.582119569e-16  # eV s
C_CMS = 2.99792458e10  # cm/s
KB_EVK = 8.617333262e-5  # eV/K
EV_ERG = 1.602176634e-12  # erg per eV
AMU_EV = 931.49410242e6  # eV per atomic mass unit
E2_REAL = 1.439964548e-7  # cm eV, physical e^2/(4 pi eps0)
E2_DEFAULT = 2e-7  # cm eV, rounded value used for the estimates

DEFAULT_MASSES_EV = {
    "alpha": 3.7273794066e9,
    "electron": 0.51099895000e6,
    "proton": 938.27208816e6,
    "H2": 2.01588 * AMU_EV,
}


class UnitError(ValueError):
    """Unknown unit tag or dimension mismatch."""


# tag -> (dimension, factor): natural = value * factor
_TAGS: dict[str, tuple[str, float]] = {
    "s^-1": ("energy", 1.0),
    "eV": ("energy", 1.0 / HBAR_EVS),
    "keV": ("energy", 1e3 / HBAR_EVS),
    "MeV": ("energy", 1e6 / HBAR_EVS),
    "erg": ("energy", 1.0 / (EV_ERG * HBAR_EVS)),
    "J": ("energy", 1e7 / (EV_ERG * HBAR_EVS)),
    "cm": ("length", 1.0),
    "m": ("length", 100.0),
    "nm": ("length", 1e-7),
    "angstrom": ("length", 1e-8),
    "s": ("time", 1.0),
    "fs": ("time", 1e-15),
    "as": ("time", 1e-18),
    "cm/s": ("speed", 1.0),
    "m/s": ("speed", 100.0),
    "beta": ("speed", C_CMS),
    "cm^-1": ("momentum", 1.0),
    "eV/c": ("momentum", 1.0 / (HBAR_EVS * C_CMS)),
    "g*cm/s": ("momentum", 1.0 / (EV_ERG * HBAR_EVS)),
    "s/cm^2": ("mass", 1.0),
    "eV/c^2": ("mass", 1.0 / (HBAR_EVS * C_CMS**2)),
    "g": ("mass", 1.0 / (EV_ERG * HBAR_EVS)),
    "u": ("mass", AMU_EV / (HBAR_EVS * C_CMS**2)),
    "K": ("temperature", 1.0),
    "cm*eV": ("action_length", 1.0),
}


def dimension(tag: str) -> str:
    try:
        return _TAGS[tag][0]
    except KeyError:
        raise UnitError(f"unknown unit tag {tag!r}") from None


def to_natural(value: float, unit: str) -> float:
    dimension(unit)
    return value * _TAGS[unit][1]


def from_natural(value: float, unit: str) -> float:
    dimension(unit)
    return value / _TAGS[unit][1]


def convert(value: float, src: str, dst: str) -> float:
    """Convert ``value`` from unit ``src`` to unit ``dst``."""
    ds, dd = dimension(src), dimension(dst)
    if ds != dd:
        raise UnitError(f"cannot convert {src!r} ({ds}) to {dst!r} ({dd})")
    if src == dst:
        return value
    return value * (_TAGS[src][1] / _TAGS[dst][1])


def known_units() -> dict[str, str]:
    return {t: d for t, (d, _) in _TAGS.items()}


@dataclass(frozen=True)
class UnitSystem:
    """Immutable set of constants; masses given as rest energies in eV."""

    hbar_eVs: float = HBAR_EVS
    c: float = C_CMS
    kB: float = KB_EVK
    e2: float = E2_DEFAULT
    masses_eV: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_MASSES_EV))

    def __post_init__(self):
        object.__setattr__(self, "masses_eV", MappingProxyType(dict(self.masses_eV)))
        for name in ("hbar_eVs", "c", "kB", "e2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")

    def mass(self, species: str) -> float:
        """Natural-unit mass (s/cm^2) of a named species."""
        try:
            m_ev = self.masses_eV[species]
        except KeyError:
            raise KeyError(f"unknown species {species!r}") from None
        return m_ev / (self.hbar_eVs * self.c**2)

    def energy(self, e_ev: float) -> float:
        return e_ev / self.hbar_eVs

    def energy_eV(self, e_nat: float) -> float:
        return e_nat * self.hbar_eVs

    @property
    def e2_natural(self) -> float:
        """e^2 in cm/s (so e^2/r is an energy in s^-1)."""
        return self.e2 / self.hbar_eVs

    def kT(self, temperature: float) -> float:
        return self.kB * temperature / self.hbar_eVs

    def bohr_length(self, E0_eV: float, species: str = "electron") -> float:
        """Hydrogenic 1s length a with binding 1/(2 m a^2) = E0."""
        return 1.0 / math.sqrt(2.0 * self.mass(species) * self.energy(E0_eV))

    def rows(self) -> list[tuple[str, float, str]]:
        out = [
            ("hbar", self.hbar_eVs, "eV*s"),
            ("c", self.c, "cm/s"),
            ("kB", self.kB, "eV/K"),
            ("e2", self.e2, "cm*eV"),
        ]
        for k in sorted(self.masses_eV):
            out.append((f"mass_{k}", self.masses_eV[k], "eV/c^2"))
        return out


DEFAULT = UnitSystem()
