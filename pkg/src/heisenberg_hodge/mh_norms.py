"""Discrete Mihlin-Hormander norms.

Sobolev norms are computed from zero-padded FFTs with the unitary angular
convention: for samples ``f_k = f(x0 + k h)`` padded to length ``N``,

    |f|_tau^2 = h / N * sum_k (1 + |zeta_k|)^(2 tau) |F_k|^2,  zeta = 2 pi fftfreq(N, h),

which tends to ``(2 pi)^-1 int (1 + |zeta|)^(2 tau) |f^(zeta)|^2`` as h -> 0.
Scale-invariant local norms take a sup over dyadic dilations of the
multiplier against a fixed bump on [1, 2].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
import sympy as sp

from .fan import a_of, q_of
from .multipliers import MultiplierSpec, smooth_step


class AccuracyWarning(UserWarning):
    """Samples do not decay at the edge of the grid."""


class MultiplierRangeError(ValueError):
    """A multiplier is not finite where it must be sampled."""


# -- sampled functions ------------------------------------------------------

def _next_pow2(k: int) -> int:
    return 1 << max(4, int(np.ceil(np.log2(max(k, 1)))))


@dataclass
class SampledFunction1D:
    origin: float
    step: float
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 1:
            raise ValueError("1-D samples expected")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("samples must be finite")

    @classmethod
    def from_callable(cls, f, a: float, b: float, count: int):
        x = np.linspace(a, b, count)
        return cls(a, x[1] - x[0], f(x))

    @property
    def grid(self) -> np.ndarray:
        return self.origin + self.step * np.arange(len(self.values))


@dataclass
class SampledFunction2D:
    origin: tuple
    step: tuple
    values: np.ndarray  # axis 0: lambda, axis 1: xi

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2:
            raise ValueError("2-D samples expected")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("samples must be finite")

    @classmethod
    def from_callable(cls, f, box, counts):
        (a0, b0), (a1, b1) = box
        x = np.linspace(a0, b0, counts[0])
        y = np.linspace(a1, b1, counts[1])
        X, Y = np.meshgrid(x, y, indexing="ij")
        return cls((a0, a1), (x[1] - x[0], y[1] - y[0]), f(X, Y))


def _edge_check(values, axis_count):
    scale = np.abs(values).max()
    if scale == 0:
        return
    edges = [np.take(values, [0, -1], axis=ax) for ax in range(axis_count)]
    if max(np.abs(e).max() for e in edges) > 1e-8 * scale:
        warnings.warn("samples do not vanish at the grid boundary; norm is inaccurate",
                      AccuracyWarning, stacklevel=3)


def _weight_1d(zeta, tau, weight):
    if weight == "printed":
        return (1 + np.abs(zeta)) ** (2 * tau)
    if weight == "polynomial":
        return (1 + zeta ** 2) ** tau
    raise ValueError(f"unknown weight {weight!r}")


def sobolev_norm_1d(f: SampledFunction1D, tau: float, pad_factor: int = 4,
                    weight: str = "printed") -> float:
    """Discrete ``|| (1 + |zeta|)^tau f^ ||_2`` of a compactly supported sample."""
    _edge_check(f.values, 1)
    N = _next_pow2(pad_factor * len(f.values))
    F = np.fft.fft(f.values, N)
    zeta = 2 * np.pi * np.fft.fftfreq(N, f.step)
    return float(np.sqrt(f.step / N * np.sum(_weight_1d(zeta, tau, weight) * np.abs(F) ** 2)))


def mixed_sobolev_norm(F: SampledFunction2D, rho: float, sigma: float, pad_factor: int = 2,
                       weight: str = "printed") -> float:
    """Discrete ``(1 + |xi'|)^rho (1 + |lambda'| + |xi'|)^sigma`` weighted L^2 norm of F^.

    ``weight='polynomial'`` uses ``(1 + xi'^2)^(rho/2) (1 + lambda'^2 + xi'^2)^(sigma/2)``
    instead, which has an exact derivative expansion for integer orders.
    """
    _edge_check(F.values, 2)
    shape = tuple(_next_pow2(pad_factor * c) for c in F.values.shape)
    G = np.fft.fft2(F.values, shape)
    zl = 2 * np.pi * np.fft.fftfreq(shape[0], F.step[0])[:, None]
    zx = 2 * np.pi * np.fft.fftfreq(shape[1], F.step[1])[None, :]
    if weight == "printed":
        w = (1 + np.abs(zx)) ** (2 * rho) * (1 + np.abs(zl) + np.abs(zx)) ** (2 * sigma)
    elif weight == "polynomial":
        w = (1 + zx ** 2) ** rho * (1 + zl ** 2 + zx ** 2) ** sigma
    else:
        raise ValueError(f"unknown weight {weight!r}")
    cell = F.step[0] * F.step[1] / (shape[0] * shape[1])
    return float(np.sqrt(cell * np.sum(w * np.abs(G) ** 2)))


# -- bumps ------------------------------------------------------------------

def canonical_bump(s):
    """``exp(1 - 1/(1 - (2s - 3)^2))`` on (1, 2), zero elsewhere; peak 1 at s = 3/2."""
    s = np.asarray(s, dtype=float)
    x = 2 * s - 3
    inside = np.abs(x) < 1
    with np.errstate(divide="ignore", over="ignore"):
        val = np.exp(1 - 1 / (1 - np.where(inside, x, 0) ** 2))
    return np.where(inside, val, 0.0)


def narrow_bump(s):
    """A second bump, supported in (1.1, 1.9), for equivalence audits."""
    s = np.asarray(s, dtype=float)
    x = (s - 1.5) / 0.4
    inside = np.abs(x) < 1
    with np.errstate(divide="ignore", over="ignore"):
        val = np.exp(1 - 1 / (1 - np.where(inside, x, 0) ** 2))
    return np.where(inside, val, 0.0)


BUMPS = {"canonical": canonical_bump, "narrow": narrow_bump}


@dataclass
class SlocParams:
    tau: float | None = None
    rho: float | None = None
    sigma: float | None = None
    J: int = 8
    resolution: int = 512
    pad_factor: int = 4
    bump: str | Callable = "canonical"

    def __post_init__(self):
        errs = []
        if self.J < 4:
            errs.append(f"J must be >= 4, got {self.J}")
        if self.resolution < 16:
            errs.append(f"resolution must be >= 16, got {self.resolution}")
        for name in ("tau", "rho", "sigma"):
            v = getattr(self, name)
            if v is not None and v < 0:
                errs.append(f"{name} must be nonnegative")
        if errs:
            raise ValueError("; ".join(errs))

    def bump_fn(self):
        return BUMPS[self.bump] if isinstance(self.bump, str) else self.bump

    def dyadic(self) -> np.ndarray:
        return 2.0 ** np.arange(-self.J, self.J + 1)


@dataclass
class SlocReport:
    per_r: dict
    sup: float
    argmax: object
    flags: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "per_r_norms": {repr(k): v for k, v in self.per_r.items()},
            "sup": self.sup,
            "argmax": repr(self.argmax),
            "flags": self.flags,
        }


def _eval_multiplier(m, x):
    vals = np.asarray(m(x), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise MultiplierRangeError(f"{getattr(m, 'label', 'm')} is not finite on the sampled range")
    return vals


def mh_sloc_norm(m, params: SlocParams) -> SlocReport:
    """``sup_r || m(r .) phi ||_{L^2_tau}`` over dyadic r in [2^-J, 2^J]."""
    if params.tau is None:
        raise ValueError("mh_sloc_norm needs tau")
    bump = params.bump_fn()
    s = np.linspace(1.0, 2.0, params.resolution)
    h = s[1] - s[0]
    phi = bump(s)
    per_r = {}
    for r in params.dyadic():
        g = SampledFunction1D(1.0, h, _eval_multiplier(m, r * s) * phi)
        per_r[float(r)] = sobolev_norm_1d(g, params.tau, params.pad_factor)
    arg = max(per_r, key=per_r.get)
    return SlocReport(per_r, per_r[arg], arg)


def bump_2d(bump):
    return lambda lam, xi: bump(lam) * bump(xi)


def mixed_sloc_norm(mu, params: SlocParams, signs=(1, -1), weight="printed") -> SlocReport:
    """``sup_r || mu(+-r1 lambda, r2 xi) eta ||_{L^2_{rho,sigma}}`` over dyadic r.

    ``mu`` is a callable ``mu(lambda, xi)``; both signs of lambda are measured
    unless ``signs`` restricts them (use ``(1,)`` for functions on the open quadrant).
    """
    if params.rho is None or params.sigma is None:
        raise ValueError("mixed_sloc_norm needs rho and sigma")
    bump = params.bump_fn()
    t = np.linspace(1.0, 2.0, params.resolution)
    h = t[1] - t[0]
    L, X = np.meshgrid(t, t, indexing="ij")
    eta = bump(L) * bump(X)
    per_r = {}
    rs = params.dyadic()
    for sgn in signs:
        for r1 in rs:
            for r2 in rs:
                vals = _eval_multiplier_2d(mu, sgn * r1 * L, r2 * X, eta)
                F = SampledFunction2D((1.0, 1.0), (h, h), vals)
                per_r[(int(sgn), float(r1), float(r2))] = mixed_sobolev_norm(
                    F, params.rho, params.sigma, params.pad_factor, weight)
    arg = max(per_r, key=per_r.get)
    return SlocReport(per_r, per_r[arg], arg)


def _eval_multiplier_2d(mu, lam, xi, eta):
    vals = np.zeros(lam.shape, dtype=complex)
    live = eta > 0
    vals[live] = np.asarray(mu(lam[live], xi[live]), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise MultiplierRangeError("multiplier is not finite on the sampled range")
    return vals * eta


# -- finite differences and the windowed-derivative functional --------------

_D1_STENCIL = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0  # sixth order, offsets -3..3


def central_diff(values: np.ndarray, step: float, axis: int, order: int = 1) -> np.ndarray:
    """Repeated sixth-order central first differences; shrinks the axis by 6 per order."""
    out = np.asarray(values)
    for _ in range(order):
        n = out.shape[axis]
        acc = 0
        for k, c in enumerate(_D1_STENCIL):
            if c == 0:
                continue
            acc = acc + c * np.take(out, np.arange(k, n - 6 + k), axis=axis)
        out = acc / step
    return out


def derivative_norm_2d(f, box, counts, rho: int, sigma: int) -> float:
    """``sqrt(sum_{i<=sigma, i+j<=rho+sigma} ||d_lambda^i d_xi^j f||^2)`` over ``box``.

    ``f`` is a callable sampled with a margin so every difference is centred
    inside the box.
    """
    (a0, b0), (a1, b1) = box
    h0 = (b0 - a0) / (counts[0] - 1)
    h1 = (b1 - a1) / (counts[1] - 1)
    top = int(rho + sigma)
    pad = 3 * top
    x = a0 + h0 * np.arange(-pad, counts[0] + pad)
    y = a1 + h1 * np.arange(-pad, counts[1] + pad)
    X, Y = np.meshgrid(x, y, indexing="ij")
    vals = f(X, Y)
    total = 0.0
    for i in range(int(sigma) + 1):
        for j in range(top - i + 1):
            d = central_diff(vals, h0, 0, i)
            d = central_diff(d, h1, 1, j)
            ci, cj = 3 * (top - i), 3 * (top - j)
            core = d[ci:d.shape[0] - ci, cj:d.shape[1] - cj]
            total += float(np.sum(np.abs(core) ** 2) * h0 * h1)
    return float(np.sqrt(total))


def derivative_norm_rho_sigma_1(F_callable, box, counts) -> float:
    """Derivative expansion equal to the polynomial-weight norm at rho = sigma = 1.

    ``(1 + xi'^2)(1 + lambda'^2 + xi'^2) = 1 + lambda'^2 + 2 xi'^2 + lambda'^2 xi'^2 + xi'^4``.
    """
    (a0, b0), (a1, b1) = box
    h0 = (b0 - a0) / (counts[0] - 1)
    h1 = (b1 - a1) / (counts[1] - 1)
    pad = 6
    x = a0 + h0 * np.arange(-pad, counts[0] + pad)
    y = a1 + h1 * np.arange(-pad, counts[1] + pad)
    X, Y = np.meshgrid(x, y, indexing="ij")
    vals = F_callable(X, Y)
    terms = {(0, 0): 1, (1, 0): 1, (0, 1): 2, (1, 1): 1, (0, 2): 1}
    total = 0.0
    for (i, j), c in terms.items():
        d = central_diff(central_diff(vals, h0, 0, i), h1, 1, j)
        ci, cj = pad - 3 * i, pad - 3 * j
        core = d[ci:d.shape[0] - ci, cj:d.shape[1] - cj]
        total += c * float(np.sum(np.abs(core) ** 2) * h0 * h1)
    return float(np.sqrt(total))


def windowed_derivative_sloc(mu, rho: int, sigma: int, J: int = 6, resolution: int = 64,
                             signs=(1,)) -> SlocReport:
    """Sup over dyadic windows of the scaled derivative integrals.

    Substituting ``lambda = r1 t``, ``xi = r2 s`` turns the weight
    ``r1^(2i-1) r2^(2j-1)`` into plain derivatives of ``mu(r1 t, r2 s)`` on [1, 2]^2.
    """
    per_r = {}
    for sgn in signs:
        for r1 in 2.0 ** np.arange(-J, J + 1):
            for r2 in 2.0 ** np.arange(-J, J + 1):
                f = lambda t, s, r1=r1, r2=r2: np.asarray(mu(sgn * r1 * t, r2 * s), dtype=complex)
                per_r[(sgn, float(r1), float(r2))] = derivative_norm_2d(
                    f, ((1.0, 2.0), (1.0, 2.0)), (resolution, resolution), rho, sigma)
    arg = max(per_r, key=per_r.get)
    return SlocReport(per_r, per_r[arg], arg)


# -- fan extension ----------------------------------------------------------

def angle_cutoff(delta: float, n: int):
    """Degree-0 homogeneous cutoff: 1 on ``xi >= n|lambda|``, 0 on ``xi <= (n - delta)|lambda|``."""
    if not 0 < delta < n:
        raise ValueError(f"need 0 < delta < n, got delta={delta}, n={n}")

    def psi(lam, xi):
        lam = np.asarray(lam, dtype=float)
        xi = np.asarray(xi, dtype=float)
        L = np.abs(lam)
        safe = np.where(L > 0, L, 1.0)
        x = (xi - (n - delta) * L) / (delta * safe)
        return np.where(L > 0, smooth_step(x), np.where(xi > 0, 1.0, 0.0))

    return psi


def build_fan_multiplier(m, alpha: float, delta: float, n: int):
    """``mu3(lambda, xi) = m(lambda^2 + xi - alpha lambda) psi(lambda, xi)``."""
    if abs(alpha) >= n:
        raise ValueError(f"need |alpha| < n, got alpha={alpha}")
    if not 0 < delta < n - abs(alpha):
        raise ValueError(f"need 0 < delta < n - |alpha|, got delta={delta}")
    psi = angle_cutoff(delta, n)

    def mu3(lam, xi):
        lam = np.asarray(lam, dtype=float)
        xi = np.asarray(xi, dtype=float)
        cut = psi(lam, xi)
        arg = lam ** 2 + xi - alpha * lam
        live = cut > 0
        out = np.zeros(np.broadcast(lam, xi).shape, dtype=complex)
        out[live] = np.asarray(m(np.broadcast_to(arg, out.shape)[live]), dtype=complex)
        return out * cut

    return mu3


# -- transform audits -------------------------------------------------------

def phi_map(sign: int, n: int):
    return lambda s: s + n / 2 + sign * np.sqrt(s + n * n / 4)


@dataclass
class TransformReport:
    kind: str
    before: list
    after: list
    ratios: list
    stability: float
    finite: bool

    def to_json(self):
        return {"kind": self.kind, "before": self.before, "after": self.after,
                "ratios": self.ratios, "stability": self.stability, "finite": self.finite}


def _report(kind, pairs):
    before = [b for b, _ in pairs]
    after = [a for _, a in pairs]
    ratios = [a / b for b, a in pairs]
    finite = all(np.isfinite(r) and r > 0 for r in ratios)
    stab = max(ratios) / min(ratios) if finite else float("inf")
    return TransformReport(kind, before, after, ratios, float(stab), bool(finite))


def norm_transform_audit(kind: str, input, params: dict) -> TransformReport:
    """Ratio of norms after/before a transform, at two resolutions.

    kinds: ``square`` (mu(l, x) -> mu(l^2, x)), ``shear`` (mu -> mu(l, x - alpha l) psi),
    ``translate`` (m -> m(. + a)), ``compose_phi`` (m -> m o phi+-), ``bump_swap``
    (canonical bump -> narrow bump).
    """
    resolutions = params.get("resolutions", (256, 512) if kind in ("translate", "compose_phi", "bump_swap") else (32, 64))
    J = params.get("J", 8 if kind in ("translate", "compose_phi", "bump_swap") else 4)
    pairs = []
    for res in resolutions:
        if kind in ("translate", "compose_phi", "bump_swap"):
            m = input
            tau = params.get("tau", 1.0)
            base = SlocParams(tau=tau, J=J, resolution=res)
            if kind == "translate":
                a = params.get("a", 1.0)
                after_m = lambda s, a=a: m(np.asarray(s) + a)
                after_p = base
            elif kind == "compose_phi":
                phi = phi_map(params.get("sign", 1), params.get("n", 1))
                after_m = lambda s: m(phi(s))
                after_p = base
            else:
                after_m = m
                after_p = SlocParams(tau=tau, J=J, resolution=res, bump="narrow")
            pairs.append((mh_sloc_norm(m, base).sup, mh_sloc_norm(after_m, after_p).sup))
        elif kind in ("square", "shear"):
            mu = input
            rho, sigma = params.get("rho", 1.0), params.get("sigma", 1.0)
            p = SlocParams(rho=rho, sigma=sigma, J=J, resolution=res, pad_factor=2)
            before = mixed_sloc_norm(mu, p, signs=(1,)).sup
            if kind == "square":
                after_mu = lambda l, x: mu(np.asarray(l) ** 2, x)
            else:
                n = params.get("n", 1)
                alpha = params.get("alpha", -1.0)
                delta = params.get("delta", n / 2)
                psi = angle_cutoff(delta, n)
                after_mu = lambda l, x: mu(l, np.asarray(x) - alpha * np.asarray(l)) * psi(l, x)
            after = mixed_sloc_norm(after_mu, p, signs=(1, -1) if kind == "square" else (1,)).sup
            pairs.append((before, after))
        else:
            raise ValueError(f"unknown transform {kind!r}")
    return _report(kind, pairs)


def separable_ratio(m, rho: float, sigma: float, resolution: int = 32, J: int = 4) -> float:
    """``mixed_sloc(m(xi); rho, sigma) / mh_sloc(m; rho + sigma)``."""
    p2 = SlocParams(rho=rho, sigma=sigma, J=J, resolution=resolution, pad_factor=2)
    mixed = mixed_sloc_norm(lambda l, x: m(x), p2, signs=(1,)).sup
    p1 = SlocParams(tau=rho + sigma, J=J, resolution=8 * resolution)
    return mixed / mh_sloc_norm(m, p1).sup


def resolution_growth(m, tau: float, resolutions=(128, 512), J: int = 4) -> dict:
    """Sloc norm at two resolutions and their ratio (divergence detector)."""
    norms = [mh_sloc_norm(m, SlocParams(tau=tau, J=J, resolution=r)).sup for r in resolutions]
    return {"resolutions": list(resolutions), "norms": norms, "growth": norms[-1] / norms[0]}


# -- pointwise estimates for the S+- factors --------------------------------

_lam, _xi, _A, _Q, _P, _AM = sp.symbols("lam xi A Q P AM", real=True)


def _dtotal(expr, var, delta):
    """Total derivative, treating A, Q, P, AM as functions of (lam, xi)."""
    if var == "xi":
        rates = {_A: 1 / (2 * _A), _Q: 1 / (2 * _A), _P: 1 / (2 * _A), _AM: 1 / (2 * _A)}
        base = _xi
    else:
        rates = {_A: _lam / _A, _Q: delta * _P / _A, _P: delta * _P / _A, _AM: _lam / _A}
        base = _lam
    out = sp.diff(expr, base)
    for sym, rate in rates.items():
        out += sp.diff(expr, sym) * rate
    return out


def nu_expression(nu_id: str, n: int):
    h = sp.Rational(n, 2)
    if nu_id == "nu0":
        return sp.sqrt(_Q) / sp.sqrt(_A)
    if nu_id == "nuPlus":
        return sp.sqrt(_Q) / sp.sqrt(_A + h)
    if nu_id == "nuMinus":
        return sp.sqrt(_Q) / sp.sqrt(_AM)
    raise ValueError(f"unknown nu {nu_id!r}")


@lru_cache(maxsize=None)
def nu_derivative(nu_id: str, n: int, eps: int, delta: int, i: int, j: int):
    """Vectorized ``d_lambda^i d_xi^j nu`` as a function of (lam, xi)."""
    if nu_id == "nuMinus" and eps != -1:
        raise ValueError("nuMinus uses eps = -1")
    expr = nu_expression(nu_id, n)
    for _ in range(i):
        expr = _dtotal(expr, "lam", delta)
    for _ in range(j):
        expr = _dtotal(expr, "xi", delta)
    f = sp.lambdify((_lam, _xi, _A, _Q, _P, _AM), expr, "numpy")

    def evaluate(lam, xi):
        lam = np.asarray(lam, dtype=float)
        xi = np.asarray(xi, dtype=float)
        a = a_of(n, lam, xi)
        q = q_of(n, lam, xi)[eps, delta]
        L = np.abs(lam)
        p = np.where(delta * lam >= 0, a + L, (xi + n * n / 4) / (a + L))
        am = (xi + lam ** 2) / (a + n / 2)
        return np.broadcast_to(f(lam, xi, a, q, p, am), np.broadcast(lam, xi).shape)

    return evaluate


def nu_region_grid(c: float, n_xi: int, n_t: int, xi_range=(1e-3, 1e6)):
    """Log-spaced points with ``xi > c |lambda|`` on both sides of lambda = 0."""
    xi = np.geomspace(*xi_range, n_xi)
    t = np.geomspace(1e-6, 1 - 1e-9, n_t)
    t = np.concatenate([-t[::-1], t])
    X, T = np.meshgrid(xi, t, indexing="ij")
    return T * X / c, X


def nu_estimate_audit(nu_id: str, n: int, i: int, j: int, c: float, eps: int = 1, delta: int = 1,
                      n_xi: int = 200, n_t: int = 100, xi_range=(1e-3, 1e6)) -> float:
    """``sup |d_lambda^i d_xi^j nu| |lambda|^i xi^j`` on a log grid of ``xi > c|lambda|``."""
    if c <= n:
        raise ValueError(f"region factor c = {c} must exceed n = {n}")
    if i not in (0, 1) or j < 0:
        raise ValueError("need i in {0, 1} and j >= 0")
    lam, xi = nu_region_grid(c, n_xi, n_t, xi_range)
    vals = np.abs(nu_derivative(nu_id, n, eps, delta, i, j)(lam, xi)) * np.abs(lam) ** i * xi ** j
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("non-finite derivative on the region grid")
    return float(vals.max())


def nu0_dlambda_closed_form(n, eps, delta, lam, xi):
    """``(delta xi + delta n^2/4 - eps n lambda/2) / (2 sqrt(q) a^(5/2))``."""
    a = a_of(n, lam, xi)
    q = q_of(n, lam, xi)[eps, delta]
    return 0.5 * (delta * xi + delta * n * n / 4 - eps * n * lam / 2) / (np.sqrt(q) * a ** 2.5)
