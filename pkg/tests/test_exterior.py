import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heisenberg_hodge import exterior as ext
from heisenberg_hodge.exterior import BasisWord, Form

b1, bb1 = Form.beta(1, 1), Form.betabar(1, 1)


def test_wedge_repeated_factor_vanishes():
    assert (b1 * b1).is_zero()


def test_wedge_anticommutes_in_degree_one():
    assert (bb1 * b1).allclose(-(b1 * bb1))


def test_wedge_moves_theta_to_front_with_even_sign():
    w = Form.beta(2, 1) * Form.betabar(2, 2) * Form.theta(2)
    assert w == Form.word(BasisWord(2, (1,), (2,), theta=True))


@pytest.mark.parametrize("j,I,J,want", [(2, {1, 3}, {1, 2, 3}, -1), (1, {1}, {1, 2}, 0), (1, set(), {1}, 1)])
def test_epsilon_sign(j, I, J, want):
    assert ext.epsilon_sign(j, I, J) == want


def test_e_dtheta_of_one_is_dtheta():
    assert ext.e_dtheta(Form.scalar(1)).allclose(-1j * (b1 * bb1))
    assert ext.e_dtheta(Form.scalar(1)).allclose(Form.dtheta(1))


def test_e_dtheta_top_horizontal_degree_is_zero():
    top = Form.beta(2, 1) * Form.beta(2, 2) * Form.betabar(2, 1) * Form.betabar(2, 2)
    assert ext.e_dtheta(top).is_zero()


def test_e_dtheta_n2_beta1():
    want = -1j * (Form.beta(2, 1) * Form.beta(2, 2) * Form.betabar(2, 2))
    assert ext.e_dtheta(Form.beta(2, 1)).allclose(want)


def test_i_dtheta_examples():
    assert ext.i_dtheta(b1 * bb1).allclose(Form.scalar(1, 1j))
    assert ext.i_dtheta(Form.scalar(1)).is_zero()
    assert ext.i_dtheta(Form.dtheta(1)).allclose(Form.scalar(1))
    # i(dθ)e(dθ) 1 = (n - k) 1 with k = 0
    assert ext.i_dtheta(ext.e_dtheta(Form.scalar(3))).allclose(Form.scalar(3, 3))


def test_hermitian_inner_examples():
    assert ext.hermitian_inner(b1, b1) == 1
    assert ext.hermitian_inner(b1, bb1) == 0
    for n in (1, 2, 3):
        assert ext.hermitian_inner(Form.dtheta(n), Form.dtheta(n)) == pytest.approx(n)


def test_lefschetz_n1_top_form():
    comps = ext.lefschetz_decompose(b1 * bb1)
    assert [c.j for c in comps] == [1]
    assert comps[0].form.allclose(Form.scalar(1, 1j))


def test_lefschetz_primitive_form():
    w = Form.beta(2, 1) * Form.betabar(2, 2)
    comps = ext.lefschetz_decompose(w)
    assert [c.j for c in comps] == [0]
    assert comps[0].form.allclose(w)


def test_lefschetz_n2_11_dimensions_and_eigenvalues():
    assert ext.lefschetz_dimensions(2, 1, 1) == {0: 3, 1: 1}
    EI = ext.edtheta_bidegree(2, 0, 0) @ ext.idtheta_bidegree(2, 1, 1)
    ev = np.sort(np.linalg.eigvalsh(EI))
    assert np.allclose(ev, [0, 0, 0, 2], atol=1e-12)


def test_lefschetz_rejects_mixed_and_theta():
    with pytest.raises(ext.DegreeError):
        ext.lefschetz_decompose(b1 + b1 * bb1)
    with pytest.raises(ext.DegreeError):
        ext.lefschetz_decompose(Form.theta(1))
    assert ext.lefschetz_decompose(Form(1)) == []


def test_dimension_mismatch_raises():
    with pytest.raises(ext.DimensionError):
        ext.wedge(Form.beta(1, 1), Form.beta(2, 1))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_dimension_counts_and_ranges(n):
    for p in range(n + 1):
        for q in range(n + 1):
            dims = ext.lefschetz_dimensions(n, p, q)
            assert sum(dims.values()) == ext.expected_total_dimension(n, p, q)
            assert {j for j, d in dims.items() if d} == set(ext.lefschetz_range(n, p, q))


def test_form_json_roundtrip():
    w = Form.beta(2, 1) * Form.theta(2) * 2.5j + Form.betabar(2, 2) * Form.beta(2, 1) * Form.theta(2)
    assert Form.from_json(2, w.to_json()) == w


words = st.integers(1, 3).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.integers(0, 2 * n), unique=True, max_size=2 * n + 1),
    st.lists(st.integers(0, 2 * n), unique=True, max_size=2 * n + 1)))


@settings(max_examples=60, deadline=None)
@given(words)
def test_graded_commutativity(data):
    n, g1, g2 = data
    a = Form.word(BasisWord.from_gens(n, g1)) * ext.sort_sign(g1)[0] if g1 else Form.scalar(n)
    b = Form.word(BasisWord.from_gens(n, g2)) if g2 else Form.scalar(n)
    sign = (-1) ** (len(g1) * len(g2))
    assert (a * b).allclose(sign * (b * a))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.data())
def test_edtheta_idtheta_adjoint(n, data):
    k = data.draw(st.integers(0, 2 * n - 1))
    seed = data.draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    B1, B2 = ext.degree_basis(n, k), ext.degree_basis(n, k + 2)
    a = Form.from_vector(n, B1, rng.standard_normal(len(B1)) + 1j * rng.standard_normal(len(B1)))
    b = Form.from_vector(n, B2, rng.standard_normal(len(B2)) + 1j * rng.standard_normal(len(B2)))
    lhs = ext.hermitian_inner(ext.e_dtheta(a), b)
    rhs = ext.hermitian_inner(a, ext.i_dtheta(b))
    assert abs(lhs - rhs) < 1e-12 * max(1.0, a.norm() * b.norm())
