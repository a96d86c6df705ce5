import math

import pytest

from eventloc.physconst import DEFAULT, UnitError, UnitSystem, convert, from_natural, to_natural


def test_ev_to_erg_codata():
    # CODATA: 1 eV = 1.602176634e-12 erg (exact since 2019)
    assert convert(1.0, "eV", "erg") == pytest.approx(1.602176634e-12, rel=1e-15)


@pytest.mark.parametrize("tag,value", [("eV", 2.0), ("cm", 3e-8), ("s", 1e-18), ("u", 4.0), ("K", 293.0)])
def test_natural_roundtrip(tag, value):
    assert from_natural(to_natural(value, tag), tag) == pytest.approx(value, rel=1e-15)


def test_dimension_mismatch_rejected():
    with pytest.raises(UnitError):
        convert(1.0, "eV", "cm")
    with pytest.raises(UnitError):
        to_natural(1.0, "furlong")


def test_energy_is_frequency():
    # hbar = 1: 1 eV corresponds to 1/(6.582119569e-16 s)
    assert DEFAULT.energy(1.0) == pytest.approx(1.0 / 6.582119569e-16, rel=1e-15)


def test_bohr_length_for_13_6_eV_is_bohr_radius():
    assert DEFAULT.bohr_length(13.605693) == pytest.approx(0.529177e-8, rel=1e-5)


def test_alpha_mass_and_wavelength():
    M = DEFAULT.mass("alpha")
    lam = 2 * math.pi / (M * 1e9)
    assert 0.9e-12 < lam < 1.1e-12


def test_unknown_species_and_bad_constant():
    with pytest.raises(KeyError):
        DEFAULT.mass("unobtainium")
    with pytest.raises(ValueError):
        UnitSystem(e2=-1.0)


def test_rows_are_stable():
    names = [r[0] for r in DEFAULT.rows()]
    assert names[:4] == ["hbar", "c", "kB", "e2"]
    assert names == [r[0] for r in UnitSystem().rows()]
