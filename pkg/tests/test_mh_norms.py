import numpy as np
import pytest

from heisenberg_hodge import fan
from heisenberg_hodge import mh_norms as mh
from heisenberg_hodge import multipliers as mp
from heisenberg_hodge.mh_norms import SampledFunction1D, SampledFunction2D, SlocParams


def test_zero_function_has_zero_norm():
    assert mh.sobolev_norm_1d(SampledFunction1D(0.0, 0.1, np.zeros(64)), 2.0) == 0
    assert mh.mixed_sobolev_norm(SampledFunction2D((0, 0), (0.1, 0.1), np.zeros((16, 16))), 1, 1) == 0


def test_gaussian_l2_norm():
    g = SampledFunction1D.from_callable(lambda s: np.exp(-s ** 2), -8, 8, 1024)
    assert mh.sobolev_norm_1d(g, 0.0) == pytest.approx(np.sqrt(np.sqrt(np.pi / 2)), rel=1e-2)


def test_product_gaussian_l2_norm():
    F = SampledFunction2D.from_callable(lambda l, x: np.exp(-l ** 2 - x ** 2), ((-7, 7), (-7, 7)), (128, 128))
    assert mh.mixed_sobolev_norm(F, 0, 0) == pytest.approx(np.sqrt(np.pi / 2), rel=1e-2)


def test_tent_function_diverges_at_tau_two():
    tent = lambda s: np.maximum(0.0, 1 - np.abs(s))
    norms = [mh.sobolev_norm_1d(SampledFunction1D.from_callable(tent, -2, 2, N), 2.0) for N in (129, 513, 2049)]
    assert norms[1] > 1.5 * norms[0] and norms[2] > 1.5 * norms[1]


def test_boundary_warning():
    with pytest.warns(mh.AccuracyWarning):
        mh.sobolev_norm_1d(SampledFunction1D(0.0, 0.1, np.ones(32)), 1.0)


def test_constant_multiplier_scale_invariant():
    rep = mh.mh_sloc_norm(mp.constant(1.0), SlocParams(tau=2.0, J=6))
    vals = np.array(list(rep.per_r.values()))
    assert np.ptp(vals) <= 1e-12 * vals.max()


def test_imaginary_power_norms_increase_in_u():
    p = SlocParams(tau=1.0, J=6, resolution=256)
    sups = [mh.mh_sloc_norm(mp.imaginary_power(u), p).sup for u in (1, 2, 4)]
    assert sups[0] < sups[1] < sups[2]


def test_heat_norm_stable_under_refinement():
    a, b = (mh.mh_sloc_norm(mp.heat(1.0), SlocParams(tau=1.5, J=6, resolution=r)).sup for r in (512, 1024))
    assert abs(a / b - 1) < 0.02


def test_tau_monotone():
    sups = [mh.mh_sloc_norm(mp.heat(1.0), SlocParams(tau=t, J=5, resolution=256)).sup for t in (0.5, 1, 2)]
    assert sups == sorted(sups)


def test_sloc_params_validation():
    with pytest.raises(ValueError):
        SlocParams(tau=1.0, J=3)
    with pytest.raises(ValueError):
        mh.mh_sloc_norm(mp.heat(1.0), SlocParams())


def test_angle_cutoff_properties():
    n, delta = 2, 0.5
    psi = mh.angle_cutoff(delta, n)
    pts = fan.fan_grid(n, [-3.0, -0.2, 0.4, 5.0], 6)
    lam, xi, _ = fan.fan_arrays(pts)
    assert np.all(psi(lam, xi) == 1)
    rng = np.random.default_rng(0)
    l, x = rng.standard_normal(50), np.abs(rng.standard_normal(50)) * 3
    for t in (0.5, 2, 7):
        assert np.allclose(psi(t * l, t * x), psi(l, x))
    assert psi(1.0, (n - delta) * 0.9) == 0
    with pytest.raises(ValueError):
        mh.angle_cutoff(2.5, 2)


def test_fan_multiplier_values():
    mu = mh.build_fan_multiplier(mp.heat(1.0), 0.5, 0.25, 1)
    assert mu(1.0, 1.0) == pytest.approx(np.exp(-1.5))
    mu0 = mh.build_fan_multiplier(mp.heat(0.3), 0.0, 0.5, 2)
    lam, xi, _ = fan.fan_arrays(fan.fan_grid(2, [-1.5, 0.5, 2.0], 4))
    assert np.allclose(mu0(lam, xi), np.exp(-0.3 * (xi + lam ** 2)), rtol=1e-12)
    with pytest.raises(ValueError):
        mh.build_fan_multiplier(mp.heat(1.0), 1.0, 0.1, 1)


def test_square_transform_ratio_bounded():
    bump = mh.bump_2d(mh.canonical_bump)
    rep = mh.norm_transform_audit("square", bump, {"rho": 1.0, "sigma": 1.0})
    assert rep.finite
    assert all(0.25 <= r <= 4 for r in rep.ratios)


def test_translate_transform_stable():
    rep = mh.norm_transform_audit("translate", mp.dyadic_bump(0), {"a": 1.0, "J": 6})
    assert rep.finite and rep.stability < 2


def test_nu0_bound_and_closed_form():
    assert mh.nu_estimate_audit("nu0", 1, 0, 0, c=2.0, n_xi=60, n_t=40) <= np.sqrt(3)
    lam, xi = mh.nu_region_grid(2.0, 30, 20)
    got = mh.nu_derivative("nu0", 1, 1, 1, 1, 0)(lam, xi)
    want = mh.nu0_dlambda_closed_form(1, 1, 1, lam, xi)
    assert np.allclose(got, want, rtol=1e-9, atol=1e-300)


def test_nu_region_rejects_small_c():
    with pytest.raises(ValueError):
        mh.nu_estimate_audit("nu0", 2, 0, 0, c=2.0)


def test_nu_minus_third_xi_derivative_finite():
    coarse = mh.nu_estimate_audit("nuMinus", 1, 0, 3, c=2.0, eps=-1, n_xi=50, n_t=30)
    fine = mh.nu_estimate_audit("nuMinus", 1, 0, 3, c=2.0, eps=-1, n_xi=100, n_t=60)
    assert np.isfinite(fine) and 0.5 < fine / coarse < 2


def test_jump_norm_grows_like_sqrt_resolution():
    # the jump multiplier is not in L^2_1; its measured norm grows about 2x per 4x refinement
    g = mh.resolution_growth(mp.jump(1.5), 1.0, resolutions=(128, 512, 2048))
    ratios = np.array(g["norms"][1:]) / np.array(g["norms"][:-1])
    assert np.all((ratios > 1.7) & (ratios < 2.3))
