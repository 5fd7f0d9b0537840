import numpy as np
import pytest

from heisenberg_hodge import exterior as ext
from heisenberg_hodge import oscillator as osc
from heisenberg_hodge.exterior import Form
from heisenberg_hodge.oscillator import FormField, ScalarField

from conftest import single_slice


def e(model, alpha):
    return ScalarField.basis_vector(model, alpha)


def test_annihilation_and_creation_lambda_positive():
    m = single_slice(1, 2.0)
    assert np.allclose(osc.apply_invariant_scalar_op(m, "B", e(m, 0), 1).data, 0)
    got = osc.apply_invariant_scalar_op(m, "Bbar", e(m, 0), 1)
    assert np.allclose(got.data, -np.sqrt(2) * e(m, 1).data)


def test_ccr_negative_lambda():
    m = single_slice(1, -3.0)
    B, Bb = m.B[0, 0], m.Bbar[0, 0]
    C = B @ Bb - Bb @ B
    # away from the top level the commutator is multiplication by 3
    assert np.allclose(np.diag(C)[:-1], 3)
    assert np.allclose(C - np.diag(np.diag(C)), 0)


def test_sublaplacian_and_delta0():
    m = single_slice(1, 2.0)
    assert np.allclose(osc.apply_invariant_scalar_op(m, "L", e(m, 1)).data, 6 * e(m, 1).data)
    m1 = single_slice(1, 1.0)
    assert np.allclose(osc.apply_hodge(0, e(m1, 0)).data, 2 * e(m1, 0).data)


def test_boxbar_kills_vacuum_for_negative_lambda():
    m = single_slice(1, -1.0)
    assert np.allclose(osc.apply_invariant_scalar_op(m, "Boxbar", e(m, 0)).data, 0)


def test_delbar_b_of_vacuum():
    m = single_slice(1, 1.0)
    got = osc.apply_cr_op(m, "delbar_b", e(m, 0))
    want = FormField.from_form(m, Form.betabar(1, 1), ScalarField(m, -e(m, 1).data))
    assert np.allclose(got.data, want.data)


def test_box_on_10_form():
    m = single_slice(1, 1.0)
    w = FormField.from_form(m, Form.beta(1, 1), e(m, 0))
    assert np.allclose(osc.apply_cr_op(m, "Box", w).data, w.data)


def test_d_of_vacuum_lambda_two():
    m = single_slice(1, 2.0)
    got = osc.apply_d(FormField.from_scalar(e(m, 0)))
    want = (FormField.from_form(m, Form.betabar(1, 1), ScalarField(m, -np.sqrt(2) * e(m, 1).data))
            + FormField.from_form(m, Form.theta(1), ScalarField(m, 2j * e(m, 0).data)))
    assert np.allclose(got.data, want.data)


def test_d_star_of_beta_component(rng):
    m = single_slice(1, 1.5)
    f = osc.random_scalar(m, rng, max_level=m.M - 1)
    got = osc.apply_d_star(FormField.from_form(m, Form.beta(1, 1), f)).to_scalar()
    want = -osc.apply_invariant_scalar_op(m, "Bbar", f, 1).data
    assert np.allclose(got.data, want)


def test_safe_band_examples():
    assert osc.safe_band(["Bbar"], 8) == (0, 7)
    assert osc.safe_band([], 8) == (0, 8)
    with pytest.raises(ValueError):
        osc.safe_band(["nope"], 8)


def test_dimension_and_indices():
    assert osc.dimension(2, 3) == 10
    assert len(osc.fock_indices(2, 3)) == 10


@pytest.mark.parametrize("kw", [dict(n=0), dict(M=3), dict(lambdas=(0.0, 1.0)), dict(lambdas=(1.0, 1.0)),
                                dict(lambdas=())])
def test_model_config_rejects(kw):
    with pytest.raises(osc.ConfigError):
        osc.ModelConfig(**kw)


def test_trapezoid_weights_split_by_sign():
    w = osc.trapezoid_weights([-2.0, -1.0, 1.0, 3.0])
    assert np.allclose(w, [0.5, 0.5, 1.0, 1.0])


def test_d_squared_zero_on_safe_grades(model_n2, rng):
    f = osc.random_form(model_n2, 0, rng, max_grade=osc.safe_grade(model_n2))
    dd = osc.apply_d(osc.apply_d(FormField.from_scalar(f) if isinstance(f, ScalarField) else f))
    assert dd.norm() < 1e-10 * f.norm() * 64


def test_hodge_blocks_match_composition(model_n1, rng):
    w = osc.random_form(model_n1, 1, rng, max_grade=osc.safe_grade(model_n1))
    a = osc.apply_hodge(1, w)
    b = osc.apply_hodge_composed(w)
    assert (a - b).norm() < 1e-10 * max(a.norm(), 1.0)


def test_form_field_json_roundtrip(model_n2, rng):
    w = osc.random_form(model_n2, 1, rng)
    back = FormField.from_json(model_n2, w.to_json())
    assert np.array_equal(back.data, w.data)


def test_degree_mismatch_raises(model_n1, rng):
    w = osc.random_form(model_n1, 1, rng)
    with pytest.raises((ext.DegreeError, ValueError)):
        w + osc.random_form(model_n1, 2, rng)
