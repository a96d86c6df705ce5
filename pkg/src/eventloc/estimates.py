"""Closed-form order-of-magnitude estimators."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError, require_positive
from .physconst import DEFAULT, UnitSystem


@dataclass(frozen=True)
class ClassicalRangeInput:
    E0: float  # eV
    R: float  # cm
    charge_product: float = 2.0

    def __post_init__(self):
        require_positive("E0", self.E0)
        require_positive("R", self.R)
        require_positive("charge_product", self.charge_product)


@dataclass(frozen=True)
class ThermalSourceInput:
    v_source: float  # cm/s
    v_particle: float  # cm/s
    wavelength: float  # cm
    mass: float | None = None  # natural units, optional consistency check

    def __post_init__(self):
        if not self.v_particle > 0:
            raise ValidationError("particle speed must be > 0", key="v_particle")
        if self.v_source < 0:
            raise ValidationError("source speed must be >= 0", key="v_source")
        require_positive("wavelength", self.wavelength)
        if self.mass is not None:
            lam = 2.0 * math.pi / (self.mass * self.v_particle)
            if abs(lam - self.wavelength) > 1e-6 * lam:
                raise ValidationError(
                    f"wavelength {self.wavelength} inconsistent with mass and speed ({lam})",
                    key="wavelength",
                )


def classical_transverse_range(inp: ClassicalRangeInput, units: UnitSystem = DEFAULT) -> float:
    """Largest impact parameter at which a straight passage can ionize.

    The Coulomb pull ``charge_product*e2/d**2`` acting over the atomic size
    ``R`` must supply the binding energy; beyond ``d_max`` it cannot.
    """
    return math.sqrt(inp.charge_product * units.e2 * inp.R / inp.E0)


def classical_range_report(inp: ClassicalRangeInput, units: UnitSystem = DEFAULT) -> dict:
    d = classical_transverse_range(inp, units)
    printed = 4e-7
    return {
        "d_max": d,
        "d2_over_R": d * d / inp.R,
        "d2_over_R_printed": printed,
        "coefficient_ratio": printed / (d * d / inp.R),
    }


def thermal_coherence_length(inp: ThermalSourceInput) -> dict:
    """Doppler-limited coherence length of a matter wave.

    Returns both conventions: ``l_c`` = wavelength/(dp/p) (cycle) and
    ``l_c_radian`` = 1/dp with dp = (2 pi/wavelength) * dp/p.
    """
    r = inp.v_source / inp.v_particle
    p = 2.0 * math.pi / inp.wavelength
    dp = p * r
    if r == 0.0:
        return {
            "delta_p_over_p": 0.0, "delta_p": 0.0,
            "l_c": math.inf, "l_c_radian": math.inf,
            "unbounded": True, "convention": "cycle",
        }
    return {
        "delta_p_over_p": r,
        "delta_p": dp,
        "l_c": inp.wavelength / r,
        "l_c_radian": 1.0 / dp,
        "unbounded": False,
        "convention": "cycle",
    }


def thermal_packet_width(mass: float, temperature: float, units: UnitSystem = DEFAULT) -> float:
    """a = (2 m kB T)^(-1/2), mass in natural units, result in cm."""
    require_positive("mass", mass)
    require_positive("temperature", temperature)
    return (2.0 * mass * units.kT(temperature)) ** -0.5


def passage_time(extent: float, speed: float) -> float:
    if extent < 0:
        raise ValidationError("extent must be >= 0", key="extent")
    require_positive("speed", speed)
    return extent / speed


def decade_match(value: float, reference: float) -> bool:
    """Same order of magnitude: the two values differ by less than a factor 10."""
    if value <= 0 or reference <= 0:
        return False
    return abs(math.log10(value / reference)) < 1.0
