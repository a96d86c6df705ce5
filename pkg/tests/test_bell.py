import math

import numpy as np
import pytest

from eventloc import bell
from eventloc.errors import ValidationError

STD = [bell.setting(x) for x in bell.STANDARD_ANGLES]


def test_singlet_tsirelson():
    rho = bell.singlet()
    S, *e = bell.chsh_terms(lambda a, b: bell.quantum_correlation_oracle(rho, a, b), *STD)
    assert S == pytest.approx(2 * math.sqrt(2), abs=1e-12)
    # singlet correlation is -cos of the angle between settings
    assert e[0] == pytest.approx(-math.cos(math.radians(45)))


def test_product_state_within_bound():
    up = np.array([1, 0, 0, 0], dtype=complex)
    rho = np.outer(up, up)
    S = bell.chsh_terms(lambda a, b: bell.quantum_correlation_oracle(rho, a, b), *STD)[0]
    assert S <= 2 + 1e-12


def test_sign_model_saturates_classical_bound():
    m = bell.sign_model()
    assert bell.chsh(m, *STD) == pytest.approx(2.0, abs=1e-12)
    # linear correlation law: E = 1 - 2 * angle/pi for perfectly correlated angles
    assert bell.correlation(m, bell.setting(0), bell.setting(60)) == pytest.approx(1 - 2 / 3, abs=1e-12)


def test_random_models_respect_bound(rng):
    r = bell.batched_chsh(rng, 10_000)
    assert r["max_S"] <= 2.0 + 1e-12
    assert r["no_signalling"] <= 1e-12


def test_grid_model_marginals_no_signalling():
    resp = lambda lam, a: 0.5 + 0.5 * np.cos(3 * lam[:, 0] + a[0] - 2 * a[2])
    m = bell.grid_model(16, lambda x, y: np.exp(-(x - y) ** 2), resp)
    b = bell.setting(30)
    p = [bell.marginal_b(m, b, 1, a=bell.setting(t)) for t in (0, 45, 170)]
    assert np.ptp(p) < 1e-12 and p[0] == pytest.approx(bell.marginal_b(m, b, 1))
    probs = [bell.joint_probability(m, STD[0], x, b, y) for x in (1, -1) for y in (1, -1)]
    assert sum(probs) == pytest.approx(1.0)
    assert bell.chsh(m, *STD) <= 2 + 1e-12


def test_validation():
    with pytest.raises(ValidationError):
        bell.LHVModel(np.zeros((2, 1)), np.zeros((2, 1)), np.ones((2, 2)), lambda l, a: np.ones(2))
    m = bell.LHVModel(np.zeros((2, 1)), np.zeros((2, 1)), np.ones((2, 2)) / 4, lambda l, a: 2 * np.ones(2))
    with pytest.raises(ValidationError):
        m.w1(bell.setting(0))
    with pytest.raises(ValidationError):
        bell.quantum_correlation_oracle(np.eye(4), STD[0], STD[1])
    with pytest.raises(ValidationError):
        bell.correlation(bell.sign_model(8), np.array([1.0, 1.0, 0.0]), STD[0])
