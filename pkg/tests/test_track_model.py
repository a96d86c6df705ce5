import math
import warnings

import numpy as np
import pytest

from eventloc.born_amplitude import BeamSpec, rate_W
from eventloc.errors import ValidationError
from eventloc.reduced1d import Reduced1D
from eventloc.track_model import (AtomPacket, BeamTube, PairingScenario, RegimeWarning, SecondOrderProblem,
                                  classify, d_longitudinal, event_time_distribution, filament_alone,
                                  filament_mixture, overlap, pairing_weights, second_order_amplitude,
                                  total_variation, transfer_distribution)


@pytest.fixture(scope="module")
def transfer(ref):
    return transfer_distribution(*ref)


def long_packet(ref, factor):
    beam, atom = ref
    dl = d_longitudinal(beam, atom)
    return BeamSpec(beam.p_mean, beam.mass, factor * dl), atom.moved((0, 0, 6 * factor * dl))


def test_d_long_default(ref):
    beam, atom = ref
    assert d_longitudinal(beam, atom) == pytest.approx(math.pi * beam.v / atom.E0)
    with pytest.raises(ValidationError):
        d_longitudinal(beam, atom, mode="guess")


def test_transfer_distribution_shape(ref, transfer):
    beam, atom = ref
    assert np.sum(transfer.density) * transfer.ds == pytest.approx(1.0, rel=1e-12)
    smin = atom.E0 / beam.v
    assert np.all(transfer.density[transfer.s < 0.99 * smin] == 0)
    # implied cross-section agrees with the on-shell rate (independent channel sum)
    sig = rate_W(beam, atom)["sigma_on_shell"]
    assert transfer.sigma == pytest.approx(sig, rel=0.02)


def test_total_variation_basic():
    p = np.array([0.5, 0.5, 0.0])
    q = np.array([0.0, 0.5, 0.5])
    assert total_variation(p, q, 2.0) == pytest.approx(1.0)
    assert total_variation(p, p, 1.0) == 0.0


def test_filament_weights_sum_and_saturation(ref, transfer):
    fd = filament_mixture(*long_packet(ref, 10.0), transfer=transfer)
    assert not fd.degenerate and len(fd.filaments) > 3
    assert abs(fd.total - fd.undecomposed) <= 1e-3 * fd.undecomposed
    assert fd.max_tv() < 0.05
    ev = event_time_distribution(fd)
    assert np.all(np.diff(ev["t_bar"]) > 0)
    assert ev["weight"].sum() == pytest.approx(1.0)
    # neighbouring filaments pass the atom one filament-length apart
    gaps = np.diff(ev["t_bar"])
    assert np.allclose(gaps, fd.filament_length / fd.meta["beam"].v, rtol=1e-6)


def test_short_packet_deviates(ref, transfer):
    fd = filament_mixture(*long_packet(ref, 0.5), transfer=transfer)
    assert fd.degenerate
    assert fd.max_tv() > 0.05


def test_filament_is_independent_of_others(ref, transfer):
    beam, atom = long_packet(ref, 10.0)
    fd = filament_mixture(beam, atom, transfer=transfer)
    f = fd.filaments[len(fd.filaments) // 2]
    alone = filament_alone(beam, atom, f.index, transfer=transfer)
    assert alone.weight == pytest.approx(f.weight, rel=1e-12)
    assert alone.tv == pytest.approx(f.tv, rel=1e-12)
    with pytest.raises(ValidationError):
        filament_alone(beam, atom, 10_000, transfer=transfer)


def test_hard_windows_lose_more_fidelity(ref, transfer):
    beam, atom = long_packet(ref, 10.0)
    soft = filament_mixture(beam, atom, transfer=transfer)
    hard = filament_mixture(beam, atom, transfer=transfer, window="hard")
    assert hard.max_tv() > soft.max_tv()


def test_plane_wave_gives_rate(ref):
    beam, atom = ref
    fd = filament_mixture(BeamSpec(beam.p_mean, beam.mass), atom, momentum=False)
    ev = event_time_distribution(fd)
    assert ev["mode"] == "rate" and ev["W"] > 0


def test_second_order_routes(ref):
    beam, atom = ref
    dl = d_longitudinal(beam, atom)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        near = second_order_amplitude(SecondOrderProblem(atom, atom.moved((0, 0, atom.Z + 2 * dl)), beam, 2 * dl),
                                      estimate_error=False)
    far = second_order_amplitude(SecondOrderProblem(atom, atom.moved((0, 0, atom.Z + 100 * dl)), beam, 100 * dl),
                                 estimate_error=False)
    assert far.relative_discrepancy < 1e-6
    assert near.relative_discrepancy > 1e-4
    # factorized route equals first order times the conditional second step
    assert far.P_fact == pytest.approx(far.P_first * far.P_conditional, rel=1e-10)


def test_second_order_scales_as_e2_to_fourth(ref):
    beam, atom = ref
    dl = d_longitudinal(beam, atom)
    p = SecondOrderProblem(atom, atom.moved((0, 0, atom.Z + 20 * dl)), beam, 20 * dl)
    e2 = atom.units.e2_natural
    a = second_order_amplitude(p, e2=e2, estimate_error=False)
    b = second_order_amplitude(p, e2=2 * e2, estimate_error=False)
    assert b.P_fact / a.P_fact == pytest.approx(16.0, rel=1e-10)


def test_second_order_warns_and_validates(ref):
    beam, atom = ref
    dl = d_longitudinal(beam, atom)
    m = Reduced1D.from_physical(beam, atom)
    Z1 = 1.01 * (6 * m.lc + 25 / m.kappa)
    early = (Z1 + dl) / beam.v  # first event not yet complete
    with pytest.warns(RegimeWarning):
        second_order_amplitude(SecondOrderProblem(atom, atom.moved((0, 0, atom.Z + 2 * dl)), beam, 2 * dl,
                                                  t2=early), estimate_error=False)
    with pytest.raises(ValidationError):
        SecondOrderProblem(atom, atom, beam, dl)
    with pytest.raises(ValidationError):
        SecondOrderProblem(atom, atom.moved((0, 0, 1.0)), beam, -1.0)
    with pytest.raises(ValidationError):
        second_order_amplitude(SecondOrderProblem(atom, atom.moved((0, 0, 1.0)), beam, 1.0,
                                                  reduced_dim="cylindrical"))


def test_overlap_matches_grid_quadrature(ref):
    beam, atom = ref
    ap = AtomPacket(atom.moved((3e-8, -1e-8, atom.Z)), 2e-8)
    bt = BeamTube(beam, (0.0, 1e-8), 5e-8)
    x = np.linspace(-6e-7, 6e-7, 1201)
    X, Y = np.meshgrid(x, x, indexing="ij")
    A = np.exp(-((X - 3e-8) ** 2 + (Y + 1e-8) ** 2) / (2 * 2e-8**2)) / (2 * math.pi * 2e-8**2)
    B = np.exp(-(X**2 + (Y - 1e-8) ** 2) / (2 * 5e-8**2)) / (2 * math.pi * 5e-8**2)
    oracle = np.sum(A * B) * (x[1] - x[0]) ** 2
    assert overlap(ap, bt) == pytest.approx(oracle, rel=1e-8)


def test_pairings_classes_and_partner(ref):
    beam, atom = ref
    atoms = (AtomPacket(atom, 1e-8), AtomPacket(atom.moved((1e-7, 0, atom.Z)), 1e-8))
    beams = (BeamTube(beam, (0, 0)), BeamTube(beam, (1e-7, 0)))
    res = pairing_weights(PairingScenario(atoms, beams, sigma=1e-15))
    assert len(res.pairings) == 4 and len(res.combinations) == 6
    w = {(i, r): x for i, r, x, _ in res.pairings}
    assert w[0, 0] == pytest.approx(w[1, 1]) and w[0, 1] == pytest.approx(w[1, 0])
    assert w[0, 0] > w[0, 1]
    classes = {(c[0], c[1], c[2], c[3]): (c[4], c[5]) for c in res.combinations}
    assert classes[0, 0, 1, 1] == ("coherent-hbt", (1, 0, 0, 1))
    assert classes[0, 0, 0, 1] == ("incoherent", None)
    assert classes[0, 0, 1, 0] == ("same-track", None)
    assert classify(0, 1, 1, 0) == ("coherent-hbt", (1, 1, 0, 0))


def test_pairing_sigma_from_rate_is_cached(ref):
    beam, atom = ref
    cache = {}
    sc = PairingScenario((AtomPacket(atom, 1e-8),), (BeamTube(beam),))
    a = pairing_weights(sc, cache)
    assert len(cache) == 1
    b = pairing_weights(sc, cache)
    assert a.total == b.total > 0


@pytest.mark.parametrize("kw", [dict(spread=0.0), dict(norm=2.0)])
def test_pairing_validation(ref, kw):
    beam, atom = ref
    args = dict(spread=1e-8)
    args.update(kw)
    with pytest.raises(ValidationError):
        PairingScenario((AtomPacket(atom, **args),), (BeamTube(beam),))
