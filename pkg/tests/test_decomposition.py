import numpy as np
import pytest

from heisenberg_hodge import decomposition as dc
from heisenberg_hodge import fan
from heisenberg_hodge import oscillator as osc
from heisenberg_hodge.exterior import Form
from heisenberg_hodge.oscillator import FormField, ScalarField

from conftest import single_slice


def vacuum(m):
    return ScalarField.basis_vector(m, 0)


def test_R_of_vacuum():
    m = single_slice(1, 1.0)
    got = dc.apply_R("fwd", vacuum(m))
    e1 = ScalarField.basis_vector(m, 1)
    want = (FormField.from_form(m, Form.betabar(1, 1), e1 * (-1 / np.sqrt(2)))
            + FormField.from_form(m, Form.theta(1), vacuum(m) * (1j / np.sqrt(2))))
    assert np.allclose(got.data, want.data)
    assert got.norm() == pytest.approx(1.0)


def test_S_plus_of_vacuum_on_szego_ray():
    m = single_slice(1, 1.0)
    t = dc.apply_S("plus", "fwd", vacuum(m))
    idx = 0
    vec = t.stack()[0, idx]
    assert abs(abs(np.vdot(vec, [0, 1j / np.sqrt(2), 1 / np.sqrt(2)])) - 1) < 1e-12


def test_S_minus_rejects_ray_mass():
    m = single_slice(1, 1.0)
    with pytest.raises(dc.MembershipError):
        dc.apply_S("minus", "fwd", vacuum(m))


def test_Gamma_rejects_non_member():
    m = single_slice(1, 1.0)
    z = ScalarField(m)
    with pytest.raises(dc.MembershipError):
        dc.apply_Gamma("fwd", dc.WTriple(vacuum(m), z, z))


def test_isometries(model_n2, rng):
    f = osc.random_scalar(model_n2, rng, max_level=model_n2.M - 1)
    err = (dc.apply_R("adj", dc.apply_R("fwd", f)) - f).norm() / f.norm()
    assert err < 1e-10
    t = dc.random_w_triple(model_n2, rng, max_level=model_n2.M - 1)
    back = dc.apply_Gamma("adj", dc.apply_Gamma("fwd", t))
    assert (back - t).norm() < 1e-10 * t.norm()
    for branch in ("0", "plus"):
        g = dc.apply_S(branch, "adj", dc.apply_S(branch, "fwd", f))
        assert (g - f).norm() < 1e-10 * f.norm()


def test_Gamma_star_conjugates_delta1_to_d1():
    m = single_slice(1, 0.75)
    s = dc.symbols(m)
    t = dc.random_w_triple(m, np.random.default_rng(1), max_level=m.M - 1)
    lhs = dc.apply_Gamma("adj", osc.apply_hodge(1, dc.apply_Gamma("fwd", t))).stack()
    d1 = fan.d1_matrix(1, s.lam, s.xi)
    rhs = np.einsum("ldij,ldj->ldi", d1, t.stack())
    keep = m.levels <= m.M - 1
    assert np.allclose(lhs[:, keep], rhs[:, keep], atol=1e-10)


def test_five_way_decomposition(model_n2, rng):
    w = osc.random_form(model_n2, 1, rng, max_grade=model_n2.M - 1)
    res = dc.decompose_1form(w)
    assert res.diagnostics["ok"]
    assert (res.total() - w).norm() < 1e-10 * w.norm()
    assert max(dc.subspace_symbol_errors(res).values()) < 1e-10


def test_coclosed_n1_is_minus_T_squared(model_n1, rng):
    w = osc.random_form(model_n1, 1, rng, max_grade=model_n1.M - 1)
    c = dc.project("P2plus", w)
    lam = model_n1.lambdas[:, None, None]
    # -T^2 is multiplication by lambda^2
    err = (osc.apply_hodge(1, c) - c._new(lam ** 2 * c.data)).norm()
    assert err < 1e-10 * max(c.norm(), 1.0)


def test_injectivity_hand_numbers():
    # d = 2, lambda = 1, n = 1: both sides equal 9
    rep = dc.injectivity_audit([fan.FanPoint(1.0, 0, 1)])
    assert rep["max_rel_error"] < 1e-15
    assert rep["min_factor"] == pytest.approx(8.0)
    assert rep["injective"]


def test_q_box_identity(model_n2):
    assert dc.q_box_identity(model_n2) < 1e-12


def test_decompose_rejects_wrong_degree(model_n1, rng):
    with pytest.raises(Exception):
        dc.decompose_1form(osc.random_form(model_n1, 2, rng))
    with pytest.raises(ValueError):
        dc.project("P9", osc.random_form(model_n1, 1, rng))
