import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from heisenberg_hodge import fan
from heisenberg_hodge.fan import FanPoint

HAND = FanPoint(1.0, 0, 1)  # xi = n |lambda| = 1


def test_fan_point_xi_and_grid():
    assert FanPoint(0.5, 1, 1).xi == pytest.approx(1.5)
    assert FanPoint(-2.0, 0, 2).xi == pytest.approx(4.0)
    assert len(fan.fan_grid(1, [-1.0, 1.0], 2)) == 6
    with pytest.raises(fan.DomainError):
        FanPoint(0.0, 0, 1)
    with pytest.raises(ValueError):
        FanPoint(1.0, -1, 1)


def test_d1_at_hand_point():
    want = np.array([[1, 0, 0], [0, 3, 1j], [0, -1j, 3]])
    assert np.allclose(fan.d1_at(HAND), want, atol=1e-14)


@pytest.mark.parametrize("pt", [FanPoint(0.3, 2, 1), FanPoint(-1.7, 0, 3), FanPoint(4.0, 5, 2)])
def test_d1_hermitian_with_trace(pt):
    d1 = fan.d1_at(pt)
    d = pt.xi + pt.lam ** 2
    assert np.allclose(d1, d1.conj().T)
    assert np.trace(d1 - d * np.eye(3)).real == pytest.approx(pt.n)


def test_hand_point_eigensystem():
    es = fan.fan_eigensystem(HAND)
    assert np.allclose(es.eigenvalues, [2, 4, 1], atol=1e-12)
    assert np.allclose(es.vectors["-"], [1j, 0, 0], atol=1e-12)
    v0, vp = es.vectors["0"], es.vectors["+"]
    # eigenvectors are fixed up to a phase
    assert abs(abs(np.vdot(v0, np.array([0, 1, 1j]) / np.sqrt(2))) - 1) < 1e-12
    assert abs(abs(np.vdot(vp, np.array([0, 1j, 1]) / np.sqrt(2))) - 1) < 1e-12
    assert es.q == pytest.approx({(1, 1): 3, (1, -1): 1, (-1, 1): 2, (-1, -1): 0}, abs=1e-12)


def test_ray_vplus_matches_closed_form():
    for n, lam in [(1, 1.0), (2, 0.5), (3, 4.0)]:
        _, vp, _ = fan.eigenvectors_of(n, np.array(lam), np.array(n * lam))
        assert abs(abs(np.vdot(vp, fan.ray_vplus(n, lam))) - 1) < 1e-12


def test_synthesis_matches_expm():
    for pt in [HAND, FanPoint(-0.7, 3, 2), FanPoint(2.5, 1, 1)]:
        got = fan.synth_matrix_multiplier(lambda s: np.exp(-s), pt)
        assert np.allclose(got, expm(-fan.d1_at(pt)), atol=1e-10)


def test_szego_projection_symbols():
    assert fan.ray_projection_symbol("Cbar", FanPoint(1.0, 0, 1)) == 1
    assert fan.ray_projection_symbol("C", FanPoint(1.0, 0, 1)) == 0
    assert fan.ray_projection_symbol("C", FanPoint(-1.0, 0, 1)) == 1
    assert fan.ray_projection_symbol("C", FanPoint(-1.0, 1, 1)) == 0


def test_symbol_sups():
    grid = fan.fan_grid(1, np.concatenate([-np.geomspace(1e-2, 1e2, 30), np.geomspace(1e-2, 1e2, 30)]), 40)
    assert fan.symbol_sup_audit("mu1", {"r": 1.0, "alpha": 0.0}, grid) <= 1 + 1e-12
    # off the ray xi - n lambda >= 2 lambda so xi / (xi - n lambda) <= 1.5
    assert fan.symbol_sup_audit("szego_minus", {"r": 1.0}, grid) <= 1.5 + 1e-12
    assert fan.symbol_sup_audit("mu1", {"r": 1.0, "alpha": 0.5}, grid) <= 4
    with pytest.raises(fan.PreconditionError):
        fan.symbol_sup_audit("mu1", {"alpha": 1.0}, grid)
    with pytest.raises(ValueError):
        fan.symbol_sup_audit("mu1", {}, [])


def test_off_fan_point_rejected():
    with pytest.raises(fan.DomainError):
        fan.d1_matrix(1, np.array(2.0), np.array(1.0))


def test_jacobi_matches_numpy():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    A = A + A.conj().T
    w, V = fan.jacobi_eigh(A)
    assert np.allclose(np.sort(w), np.linalg.eigvalsh(A), atol=1e-12)
    assert np.allclose(A @ V, V * w, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4), st.floats(1e-3, 1e3).flatmap(lambda x: st.sampled_from([x, -x])), st.integers(0, 200))
def test_closed_form_pairs(n, lam, m):
    pt = FanPoint(lam, m, n)
    es = fan.fan_eigensystem(pt)
    scale = pt.xi + lam ** 2 + n
    assert max(es.residuals().values()) < 1e-10 * scale
    P = sum(es.projections.values())
    assert np.allclose(P, np.eye(3), atol=1e-12)
    ids = fan.q_identities(n, np.array(lam), np.array(pt.xi))
    assert max(float(v) for v in ids.values()) < 1e-12
    mu0, mup, mum = es.eigenvalues
    assert mum <= mu0 + 1e-9 and mu0 <= mup and mum >= -1e-12
