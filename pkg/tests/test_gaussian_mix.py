import math

import numpy as np
import pytest

from eventloc import gaussian_mix as gm
from eventloc.errors import ValidationError
from eventloc.estimates import thermal_packet_width
from eventloc.physconst import DEFAULT


def test_closed_form_kernel_matches_quadrature():
    # oracle: mixture integrals done numerically, momentum integral included
    for e in (gm.GaussianEnsemble.momentum_mixture(0.7, 1.3, 2.1, p_hat=0.4),
              gm.GaussianEnsemble.position_mixture(0.9, 1.7, p_hat=-0.3)):
        x = np.array([-1.0, 0.0, 0.5, 2.0])
        xp = np.array([0.3, 0.0, -1.2, 1.5])
        q = gm.normalised_kernel_by_quadrature(e, x, xp, full=True)
        assert np.allclose(q, e.kernel()(x, xp), rtol=1e-8, atol=1e-12)


def test_matched_mixtures_equal(rng):
    for alpha, beta, gamma in np.exp(rng.uniform(-2, 2, size=(200, 3))):
        e1 = gm.GaussianEnsemble.momentum_mixture(alpha, beta, gamma)
        e2 = gm.matched_position_mixture(alpha, beta, gamma)
        chk = gm.equality_check(e1, e2)
        assert chk["equal"] and chk["residual"] < 1e-12
        assert gm.witness_discrepancy(e1.kernel(), e2.kernel()) < 1e-12


def test_perturbed_mixture_detected():
    e1 = gm.GaussianEnsemble.momentum_mixture(1.0, 2.0, 3.0)
    ap, bp = gm.matched_position_mixture(1.0, 2.0, 3.0).params
    for bad in (gm.GaussianEnsemble.position_mixture(1.01 * ap, bp),
                gm.GaussianEnsemble.position_mixture(ap, 1.01 * bp)):
        assert not gm.equality_check(e1, bad)["equal"]
        assert gm.witness_discrepancy(e1.kernel(), bad.kernel()) > 1e-4


def test_kernel_properties():
    k = gm.GaussianEnsemble.momentum_mixture(1.0, 2.0, 3.0).kernel()
    assert k.trace == pytest.approx(1.0)
    assert 0 < k.purity <= 1
    x = np.linspace(-3, 3, 7)
    R = k.sample(x)
    assert np.allclose(R, R.conj().T)
    # effective coherence length is sqrt(beta')
    assert k.coherence_length == pytest.approx(math.sqrt(1 / (1 / 2.0 + 1 / 6.0)))


def test_infinite_gamma_and_validation():
    e = gm.GaussianEnsemble.momentum_mixture(1.0, 2.0, math.inf)
    assert e.beta_prime == pytest.approx(2.0)
    with pytest.raises(ValidationError):
        gm.GaussianEnsemble.momentum_mixture(-1.0, 2.0, 3.0)
    with pytest.raises(ValidationError):
        gm.GaussianEnsemble.position_mixture(1.0, math.inf)
    with pytest.raises(ValidationError):
        gm.equality_check(gm.GaussianEnsemble.position_mixture(1, 1), gm.GaussianEnsemble.position_mixture(1, 1))


def test_boltzmann_identity():
    m = DEFAULT.mass("H2")
    b = gm.boltzmann_repackaging(m, 293.0)
    assert b["a"] == pytest.approx(thermal_packet_width(m, 293.0), rel=1e-12)
    assert b["beta_prime"] == pytest.approx(b["beta"])
