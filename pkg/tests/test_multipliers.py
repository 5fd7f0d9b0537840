import numpy as np
import pytest

from heisenberg_hodge import multipliers as mp
from heisenberg_hodge import oscillator as osc
from heisenberg_hodge.oscillator import ScalarField

from conftest import single_slice


def safe_form(model, rng):
    return osc.random_form(model, 1, rng, max_grade=model.M - 1)


def test_heat_value():
    assert mp.heat(1.0)(2.0) == pytest.approx(np.exp(-2.0))


def test_library_parameters():
    assert mp.multiplier_library("heat", t=0.5).params == {"t": 0.5}
    with pytest.raises(ValueError):
        mp.multiplier_library("heat")
    with pytest.raises(ValueError):
        mp.multiplier_library("nope", t=1)
    with pytest.raises(ValueError):
        mp.heat(0.0)
    assert mp.jump(1.5)([1.0, 2.0]).tolist() == [1.0, 0.0]


def test_imaginary_power_derivative_matches_fd():
    m = mp.imaginary_power(1.3)
    s, h = 2.0, 1e-6
    fd = (m(s + h) - m(s - h)) / (2 * h)
    assert abs(m.derivative(1)(s) - fd) < 1e-8


def test_phi_plus_symbol_at_hand_point():
    m = single_slice(1, 1.0)
    sym = mp.calculus_symbol(m, "PhiPlus")
    assert sym[0, 0] == pytest.approx(4.0)


def test_constant_one_is_identity(model_n2, rng):
    w = safe_form(model_n2, rng)
    out = mp.m_delta1_product(mp.constant(1.0), w)
    assert (out - w).norm() < 1e-10 * w.norm()


def test_identity_multiplier_is_delta1(model_n1, rng):
    w = safe_form(model_n1, rng)
    out = mp.m_delta1_product(mp.identity(), w)
    ref = osc.apply_hodge(1, w)
    assert (out - ref).norm() < 1e-10 * ref.norm()


@pytest.mark.parametrize("m", [mp.heat(0.1), mp.heat(1.0), mp.imaginary_power(1.0)], ids=lambda m: m.label)
def test_product_path_matches_oracle(m, model_n1, model_n2, rng):
    for model in (model_n1, model_n2):
        w = safe_form(model, rng)
        err = (mp.m_delta1_product(m, w) - mp.m_delta1_oracle(m, w)).norm() / w.norm()
        assert err < 1e-8


def test_block_spectrum_matches_prediction(model_n2):
    for l in range(model_n2.L):
        for g in (0, 1, 3):
            assert np.allclose(mp.block_spectrum(model_n2, l, g), mp.predicted_block_spectrum(model_n2, l, g),
                               atol=1e-10)


def test_scalar_calculus_rejects_undefined():
    m = single_slice(1, 1.0)
    bad = mp.MultiplierSpec(lambda s: np.divide(1.0, s - 2.0, where=s != 2.0, out=np.full(np.shape(s), np.inf)),
                            "pole")
    with pytest.raises(mp.MultiplierDomainError):
        mp.scalar_calculus(bad, "Delta0", ScalarField.basis_vector(m, 0))


def test_wrong_degree_rejected(model_n1, rng):
    with pytest.raises(Exception):
        mp.m_delta1_product(mp.heat(1.0), osc.random_form(model_n1, 2, rng))
