"""Verification batteries run by ``heisenberg-hodge verify``.

Every check returns a single nonnegative error; a check passes when that
error is strictly below its tolerance.  Equalities ``A = B`` are measured as
``|A - B| / max |term|`` over the individual terms on both sides, so the
same formula covers identities whose two sides cancel to zero.

Random inputs come from ``numpy.random.default_rng([seed, crc32(suite/check)])``
(PCG64), one stream per check, so checks do not perturb each other.
"""

from __future__ import annotations

import time
import zlib
from dataclasses import dataclass
from functools import lru_cache
from math import comb, sqrt
from typing import Callable

import numpy as np

from . import decomposition as dc
from . import exterior as ext
from . import fan
from . import mh_norms as mh
from . import multipliers as mp
from . import oscillator as osc
from .config import SUITES, RunConfig

INDICATOR_TOL = 0.5  # for checks whose error is a count of violations


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    check: str
    anchor: str
    max_error: float
    tolerance: float
    runtime_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.max_error < self.tolerance)

    def to_json(self) -> dict:
        return {
            "suite": self.suite, "check": self.check, "anchor": self.anchor,
            "max_error": float(self.max_error), "tolerance": float(self.tolerance),
            "pass": self.passed, "runtime_ms": float(self.runtime_ms),
        }


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    anchor: str
    tolerance: float
    fn: Callable


CHECKS: dict[str, list[Check]] = {s: [] for s in SUITES}


def check(suite, name, anchor, tol):
    def deco(fn):
        CHECKS[suite].append(Check(suite, name, anchor, tol, fn))
        return fn
    return deco


def check_rng(seed: int, suite: str, name: str) -> np.random.Generator:
    return np.random.default_rng([int(seed), zlib.crc32(f"{suite}/{name}".encode())])


def run_suite(name: str, cfg: RunConfig | None = None, timing: bool = False) -> list[SuiteReport]:
    """Run one suite (or ``all``) and return reports sorted by (suite, check)."""
    cfg = cfg or RunConfig()
    if name == "all":
        names = SUITES
    elif name in SUITES:
        names = (name,)
    else:
        raise ValueError(f"unknown suite {name!r}; expected one of {SUITES + ('all',)}")
    out = []
    for suite in names:
        for c in CHECKS[suite]:
            rng = check_rng(cfg.seed, suite, c.name)
            t0 = time.perf_counter()
            err = float(c.fn(cfg, rng))
            ms = (time.perf_counter() - t0) * 1e3 if timing else 0.0
            if np.isnan(err):
                err = float("inf")
            out.append(SuiteReport(suite, c.name, c.anchor, err, c.tolerance, round(ms, 3)))
    return sorted(out, key=lambda r: (r.suite, r.check))


def all_passed(reports) -> bool:
    return all(r.passed for r in reports)


# -- shared helpers ---------------------------------------------------------

@lru_cache(maxsize=16)
def _model(n, M, lambdas, weights):
    return osc.build_model(osc.ModelConfig(n=n, lambdas=lambdas, M=M, weights=weights))


def models(cfg: RunConfig):
    """Models for n = 1, 2 and the configured n, sharing M and the lambda grid."""
    m = cfg.model
    ns = sorted({1, 2, m.n})
    return [_model(n, m.M, tuple(m.lambdas), tuple(m.weights)) for n in ns]


def _norm(x):
    return 0.0 if x is None else x.norm()


def _sum(vals):
    vals = [v for v in vals if v is not None]
    if not vals:
        return None
    out = vals[0]
    for v in vals[1:]:
        out = out + v
    return out


def identity_error(lhs, rhs, x) -> float:
    """``|sum lhs - sum rhs| / max |term|``; terms are (coef, op) pairs."""
    lv = [None if (y := op(x)) is None else c * y for c, op in lhs]
    rv = [None if (y := op(x)) is None else c * y for c, op in rhs]
    scale = max([_norm(v) for v in lv + rv] + [0.0])
    if scale == 0:
        return 0.0
    a, b = _sum(lv), _sum(rv)
    if a is None and b is None:
        return 0.0
    diff = a if b is None else (-b if a is None else a - b)
    return diff.norm() / scale


def zero_error(terms, x, order: int) -> float:
    """``|sum terms| / (Lambda^order |x|)`` with ``Lambda^2`` the largest Delta_0 symbol."""
    vals = [None if (y := op(x)) is None else c * y for c, op in terms]
    total = _sum(vals)
    if total is None or x.norm() == 0:
        return 0.0
    lam = float(np.sqrt(x.model.delta0.max()))
    return total.norm() / (lam ** order * x.norm())


def rel(a, b) -> float:
    s = max(a.norm(), b.norm())
    return (a - b).norm() / s if s > 0 else 0.0


def compose(*ops):
    def f(x):
        for op in reversed(ops):
            if x is None:
                return None
            x = op(x)
        return x
    return f


def cr(name):
    def f(x):
        try:
            return osc.apply_cr_op(x.model, name, x)
        except ext.DegreeError:
            return None
    return f


def exterior_op(*op):
    return lambda x: osc.apply_exterior(x, op)


def T_op(x):
    return x._new(1j * x.model.lambdas[:, None, None] * x.data)


def comm(A, B):
    return [(1, compose(A, B)), (-1, compose(B, A))]


E_DT = exterior_op("e_dtheta")
I_DT = exterior_op("i_dtheta")


def _horizontal_inputs(model, rng, trials, max_grade=None):
    for _ in range(trials):
        for k in range(0, 2 * model.n + 1):
            yield osc.random_form(model, k, rng, max_grade=max_grade, horizontal=True)


def _worst_identity(cfg, rng, lhs_fn, rhs_fn, inputs="horizontal", trials=None):
    worst = 0.0
    trials = trials or max(1, cfg.trials // 5)
    for model in models(cfg):
        lhs, rhs = lhs_fn(model), rhs_fn(model)
        if inputs == "horizontal":
            xs = _horizontal_inputs(model, rng, trials)
        else:
            xs = (osc.random_form(model, k, rng) for _ in range(trials) for k in inputs(model))
        for x in xs:
            worst = max(worst, identity_error(lhs, rhs, x))
    return worst


# -- exterior ---------------------------------------------------------------

def _random_form(n, basis, rng):
    v = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    return ext.Form.from_vector(n, basis, v)


def _pq(nmax=4):
    for n in range(1, nmax + 1):
        for p in range(n + 1):
            for q in range(n + 1):
                yield n, p, q


@check("exterior", "edtheta_adjoint", "e(dθ) adjoint to i(dθ)", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for n in range(1, 5):
        for k in range(0, 2 * n):
            a = _random_form(n, ext.degree_basis(n, k), rng)
            b = _random_form(n, ext.degree_basis(n, k + 2), rng)
            lhs = ext.hermitian_inner(ext.e_dtheta(a), b)
            rhs = ext.hermitian_inner(a, ext.i_dtheta(b))
            worst = max(worst, abs(lhs - rhs) / max(a.norm() * b.norm(), 1e-300))
    return worst


@check("exterior", "lefschetz_commutator", "[i(dθ), e(dθ)] = (n-k) on horizontal k-forms", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for n in range(1, 5):
        for k in range(0, 2 * n + 1):
            basis = ext.degree_basis(n, k)
            hor = np.array([not w.theta for w in basis])
            EI_in = ext.degree_matrix(n, ("i_dtheta",), k + 2) @ ext.degree_matrix(n, ("e_dtheta",), k) \
                if k + 2 <= 2 * n + 1 else np.zeros((len(basis), len(basis)))
            IE = ext.degree_matrix(n, ("e_dtheta",), k - 2) @ ext.degree_matrix(n, ("i_dtheta",), k) \
                if k >= 2 else np.zeros((len(basis), len(basis)))
            C = (EI_in - IE)[np.ix_(hor, hor)]
            worst = max(worst, np.abs(C - (n - k) * np.eye(hor.sum())).max())
    return worst


@check("exterior", "lefschetz_reconstruction", "sum_j e(dθ)^j ω_j = ω", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for n, p, q in _pq():
        w = _random_form(n, ext.bidegree_basis(n, p, q), rng)
        comps = ext.lefschetz_decompose(w)
        total = ext.Form(n)
        for c in comps:
            total = total + c.lifted
        worst = max(worst, (total - w).norm() / w.norm())
    return worst


@check("exterior", "lefschetz_orthogonality", "Lefschetz components pairwise orthogonal", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for n, p, q in _pq():
        w = _random_form(n, ext.bidegree_basis(n, p, q), rng)
        lifted = [c.lifted for c in ext.lefschetz_decompose(w)]
        for i, a in enumerate(lifted):
            for b in lifted[i + 1:]:
                worst = max(worst, abs(ext.hermitian_inner(a, b)) / (a.norm() * b.norm()))
    return worst


@check("exterior", "lefschetz_eigenvalues", "e(dθ)i(dθ), i(dθ)e(dθ) scalar on V_j^{p,q}", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for n, p, q in _pq():
        w = _random_form(n, ext.bidegree_basis(n, p, q), rng)
        for c in ext.lefschetz_decompose(w):
            v = c.lifted
            ei, ie = ext.lefschetz_eigenvalues(n, p, q, c.j)
            r1 = (ext.e_dtheta(ext.i_dtheta(v)) - ei * v).norm() / v.norm()
            r2 = (ext.i_dtheta(ext.e_dtheta(v)) - ie * v).norm() / v.norm()
            worst = max(worst, r1, r2)
        for j in ext.lefschetz_range(n, p, q):
            V = ext.lefschetz_subspace(n, p, q, j)
            EI = ext.edtheta_bidegree(n, p - 1, q - 1) @ ext.idtheta_bidegree(n, p, q) \
                if p >= 1 and q >= 1 else np.zeros((V.shape[0],) * 2)
            IE = ext.idtheta_bidegree(n, p + 1, q + 1) @ ext.edtheta_bidegree(n, p, q)
            ei, ie = ext.lefschetz_eigenvalues(n, p, q, j)
            worst = max(worst, np.abs(EI @ V - ei * V).max(initial=0), np.abs(IE @ V - ie * V).max(initial=0))
    return worst


@check("exterior", "lefschetz_dimensions", "dim sum and non-triviality range of V_j^{p,q}", INDICATOR_TOL)
def _(cfg, rng):
    bad = 0
    for n, p, q in _pq():
        dims = ext.lefschetz_dimensions(n, p, q)
        bad += sum(dims.values()) != comb(n, p) * comb(n, q)
        bad += {j for j, d in dims.items() if d > 0} != set(ext.lefschetz_range(n, p, q))
    return bad


# -- operators --------------------------------------------------------------

def _scalar_ladder_error(model, f, g):
    """Worst of the commutation relations: ``[B, Bbar]`` on ``f``, ``[B, B]``, ``[Bbar, Bbar]`` on ``g``.

    Two creations in a row leave the truncation from level M - 1, so the
    like-type pairs are tested one level lower.
    """
    worst = 0.0
    B, Bb = model.B, model.Bbar
    ap = lambda A, x: np.einsum("lde,le->ld", A, x)
    for j in range(model.n):
        for k in range(model.n):
            pairs = [(B[:, j], Bb[:, k], f, -model.lambdas[:, None] * f.data * (j == k)),
                     (B[:, j], B[:, k], g, 0 * g.data), (Bb[:, j], Bb[:, k], g, 0 * g.data)]
            for X, Y, x, want in pairs:
                xy, yx = ap(X, ap(Y, x.data)), ap(Y, ap(X, x.data))
                scale = max(np.linalg.norm(xy), np.linalg.norm(yx), np.linalg.norm(want), 1e-300)
                worst = max(worst, np.linalg.norm(xy - yx - want) / scale)
    return worst


@check("operators", "ccr", "[B_j, Bbar_k] = iT δ_jk, [B_j, B_k] = [Bbar_j, Bbar_k] = 0", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for model in models(cfg):
        for _ in range(cfg.trials):
            f = osc.random_scalar(model, rng, model.M - 1)
            g = osc.random_scalar(model, rng, model.M - 2)
            worst = max(worst, _scalar_ladder_error(model, f, g))
    return worst


@check("operators", "sublaplacian_spectrum", "spectrum of L is |λ|(2m+n)", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for model in models(cfg):
        keep = model.levels <= model.M - 1
        for l in range(model.L):
            Lm = -sum(model.B[l, j] @ model.Bbar[l, j] + model.Bbar[l, j] @ model.B[l, j]
                      for j in range(model.n))
            blk = Lm[np.ix_(keep, keep)]
            ev = np.sort(np.linalg.eigvalsh(blk))
            want = np.sort(model.xi[l, keep])
            worst = max(worst, np.abs(ev - want).max() / want.max())
    return worst


def _worst_zero(cfg, rng, terms, order, inputs="horizontal"):
    worst = 0.0
    for model in models(cfg):
        if inputs == "horizontal":
            xs = _horizontal_inputs(model, rng, max(1, cfg.trials // 5))
        else:
            xs = (osc.random_form(model, k, rng) for _ in range(max(1, cfg.trials // 5)) for k in inputs(model))
        for x in xs:
            worst = max(worst, zero_error(terms, x, order))
    return worst


@check("operators", "del_b_squares", "del_b^2 = delbar_b^2 = 0 and mixed anticommutators vanish", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for terms in ([(1, compose(cr("del_b"), cr("del_b")))],
                  [(1, compose(cr("delbar_b"), cr("delbar_b")))],
                  [(1, compose(cr("del_b"), cr("delbar_b*"))), (1, compose(cr("delbar_b*"), cr("del_b")))],
                  [(1, compose(cr("delbar_b"), cr("del_b*"))), (1, compose(cr("del_b*"), cr("delbar_b")))]):
        worst = max(worst, _worst_zero(cfg, rng, terms, 2))
    return worst


@check("operators", "d_H_split", "d_H = del_b + delbar_b", 1e-12)
def _(cfg, rng):
    return _worst_identity(cfg, rng, lambda m: [(1, cr("d_H"))],
                           lambda m: [(1, cr("del_b")), (1, cr("delbar_b"))])


@check("operators", "d_H_squared", "d_H^2 = -T e(dθ)", 1e-12)
def _(cfg, rng):
    return _worst_identity(cfg, rng, lambda m: [(1, compose(cr("d_H"), cr("d_H")))],
                           lambda m: [(-1, compose(T_op, E_DT))])


@check("operators", "kohn_box", "Box = (1/2)L + i(n/2 - p)T on (p,q)-forms", 1e-12)
def _(cfg, rng):
    return _worst_identity(cfg, rng,
                           lambda m: [(1, compose(cr("del_b"), cr("del_b*"))), (1, compose(cr("del_b*"), cr("del_b")))],
                           lambda m: [(1, cr("Box"))])


@check("operators", "kohn_boxbar", "Boxbar = (1/2)L - i(n/2 - q)T on (p,q)-forms", 1e-12)
def _(cfg, rng):
    return _worst_identity(cfg, rng,
                           lambda m: [(1, compose(cr("delbar_b"), cr("delbar_b*"))),
                                      (1, compose(cr("delbar_b*"), cr("delbar_b")))],
                           lambda m: [(1, cr("Boxbar"))])


@check("operators", "horizontal_laplacian", "Delta_H = Box + Boxbar = L + i(q-p)T", 1e-12)
def _(cfg, rng):
    return _worst_identity(cfg, rng,
                           lambda m: [(1, compose(cr("d_H"), cr("d_H*"))), (1, compose(cr("d_H*"), cr("d_H")))],
                           lambda m: [(1, cr("Delta_H"))])


_KAHLER = {
    "kahler_idtheta_del": (comm(I_DT, cr("del_b")), [(-1j, cr("delbar_b*"))]),
    "kahler_idtheta_delbar": (comm(I_DT, cr("delbar_b")), [(1j, cr("del_b*"))]),
    "kahler_del_star_edtheta": (comm(cr("del_b*"), E_DT), [(1j, cr("delbar_b"))]),
    "kahler_delbar_star_edtheta": (comm(cr("delbar_b*"), E_DT), [(-1j, cr("del_b"))]),
    "kahler_idtheta_dH": (comm(I_DT, cr("d_H")), [(1j, cr("del_b*")), (-1j, cr("delbar_b*"))]),
    "kahler_dH_star_edtheta": (comm(cr("d_H*"), E_DT), [(1j, cr("delbar_b")), (-1j, cr("del_b"))]),
}

for _name, (_l, _r) in _KAHLER.items():
    check("operators", _name, "Kähler-type commutators of i(dθ), e(dθ) with del_b", 1e-12)(
        lambda cfg, rng, l=_l, r=_r: _worst_identity(cfg, rng, lambda m: l, lambda m: r))


def _iT(x):
    return 1j * T_op(x)


_BOX = {
    "box_delbar": ([(1, compose(cr("Box"), cr("delbar_b")))],
                   [(1, compose(cr("delbar_b"), cr("Box"))), (-1, compose(_iT, cr("delbar_b")))]),
    "boxbar_del": ([(1, compose(cr("Boxbar"), cr("del_b")))],
                   [(1, compose(cr("del_b"), cr("Boxbar"))), (1, compose(_iT, cr("del_b")))]),
    "delbar_star_box": ([(1, compose(cr("delbar_b*"), cr("Box")))],
                        [(1, compose(cr("Box"), cr("delbar_b*"))), (-1, compose(_iT, cr("delbar_b*")))]),
    "del_star_boxbar": ([(1, compose(cr("del_b*"), cr("Boxbar")))],
                        [(1, compose(cr("Boxbar"), cr("del_b*"))), (1, compose(_iT, cr("del_b*")))]),
}

for _name, (_l, _r) in _BOX.items():
    check("operators", _name, "Box, Boxbar intertwined by del_b, delbar_b", 1e-12)(
        lambda cfg, rng, l=_l, r=_r: _worst_identity(cfg, rng, lambda m: l, lambda m: r))


def _all_degrees(lo, hi_offset):
    return lambda model: range(lo, 2 * model.n + 1 + hi_offset)


@check("operators", "d_squared", "d^2 = 0", 1e-12)
def _(cfg, rng):
    return _worst_zero(cfg, rng, [(1, compose(osc.apply_d, osc.apply_d))], 2, inputs=_all_degrees(0, -1))


@check("operators", "block_laplacian", "block form of Delta_k = dd* + d*d", 1e-10)
def _(cfg, rng):
    worst = 0.0
    for model in models(cfg):
        for _ in range(max(1, cfg.trials // 5)):
            for k in range(1, 2 * model.n + 1):
                w = osc.random_form(model, k, rng)
                worst = max(worst, rel(osc.apply_block_laplacian(w), osc.apply_hodge_composed(w)))
    return worst


@check("operators", "hodge_1form_blocks", "Delta_1 in (omega_+, omega_-, h) blocks = dd* + d*d", 1e-10)
def _(cfg, rng):
    worst = 0.0
    for model in models(cfg):
        for _ in range(cfg.trials):
            w = osc.random_form(model, 1, rng)
            worst = max(worst, rel(osc.apply_hodge(1, w), osc.apply_hodge_composed(w)))
    return worst


@check("operators", "d_adjoint", "<d w, v> = <w, d* v>", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for model in models(cfg):
        for k in range(0, 2 * model.n + 1):
            w = osc.random_form(model, k, rng)
            v = osc.random_form(model, k + 1, rng)
            a, b = osc.apply_d(w).inner(v), w.inner(osc.apply_d_star(v))
            worst = max(worst, abs(a - b) / max(osc.apply_d(w).norm() * v.norm(), 1e-300))
    return worst


@check("operators", "hodge_hermitian", "Delta_0, Delta_1 self-adjoint and nonnegative", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for model in models(cfg):
        if np.any(model.delta0 < 0):
            worst = max(worst, float(-model.delta0.min()))
        for _ in range(cfg.trials):
            w = osc.random_form(model, 1, rng, max_grade=model.M - 1)
            v = osc.random_form(model, 1, rng, max_grade=model.M - 1)
            a, b = osc.apply_hodge(1, w).inner(v), w.inner(osc.apply_hodge(1, v))
            worst = max(worst, abs(a - b) / (osc.apply_hodge(1, w).norm() * v.norm()))
        for l in range(model.L):
            A = mp.delta1_slice_matrix(model, l)
            for g, idx in mp.grade_blocks(model, l).items():
                if g >= model.M:
                    continue
                blk = A[np.ix_(idx, idx)]
                scale = np.abs(blk).max()
                worst = max(worst, np.abs(blk - blk.conj().T).max() / scale)
                worst = max(worst, max(0.0, -np.linalg.eigvalsh(blk).min()) / scale)
    return worst


def _fan_points(cfg, n):
    return fan.fan_grid(n, cfg.fan_lambdas(), cfg.fan["m_max"])


@check("operators", "injectivity_identity", "(d^2-l^2)(d+n) = d^2 - l^2(d+n) + d^2(d+n-1)", 1e-12)
def _(cfg, rng):
    return max(dc.injectivity_audit(_fan_points(cfg, m.n))["max_rel_error"] for m in models(cfg))


@check("operators", "injectivity_positive", "d^2(d+n-1) > 0 on the fan grid", INDICATOR_TOL)
def _(cfg, rng):
    return sum(not dc.injectivity_audit(_fan_points(cfg, m.n))["injective"] for m in models(cfg))


# -- fan eigensystem --------------------------------------------------------

def _fan_arrays(cfg, n):
    return fan.fan_arrays(_fan_points(cfg, n))


def _fan_ns(cfg):
    return sorted({1, 2, cfg.model.n})


@check("fan-eigen", "eigen_residuals", "d1 v = mu v for the three closed-form pairs", 1e-10)
def _(cfg, rng):
    worst = 0.0
    for n in _fan_ns(cfg):
        lam, xi, _ = _fan_arrays(cfg, n)
        d1 = fan.d1_matrix(n, lam, xi)
        ev = fan.eigenvalues_of(n, lam, xi)
        for k, v in enumerate(fan.eigenvectors_of(n, lam, xi)):
            r = np.linalg.norm(np.einsum("pij,pj->pi", d1, v) - ev[:, k, None] * v, axis=1)
            worst = max(worst, r.max())
    return worst


def _projectors(n, lam, xi):
    return [np.einsum("pi,pj->pij", v, v.conj()) for v in fan.eigenvectors_of(n, lam, xi)]


@check("fan-eigen", "projector_sum", "p0 + p+ + p- = I", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for n in _fan_ns(cfg):
        lam, xi, _ = _fan_arrays(cfg, n)
        worst = max(worst, np.abs(sum(_projectors(n, lam, xi)) - np.eye(3)).max())
    return worst


@check("fan-eigen", "projector_orthogonal", "p^2 = p = p*", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for n in _fan_ns(cfg):
        lam, xi, _ = _fan_arrays(cfg, n)
        for p in _projectors(n, lam, xi):
            worst = max(worst, np.abs(p @ p - p).max(), np.abs(p - np.conj(np.swapaxes(p, 1, 2))).max())
    return worst


@check("fan-eigen", "q_identities", "product and sum identities of q[eps, delta]", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for n in _fan_ns(cfg):
        lam, xi, _ = _fan_arrays(cfg, n)
        worst = max(worst, max(v.max() for v in fan.q_identities(n, lam, xi).values()))
    return worst


@check("fan-eigen", "q_positivity", "q++ q-- = xi - n lambda >= 0, q+- q-+ = xi + n lambda >= 0", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for n in _fan_ns(cfg):
        lam, xi, _ = _fan_arrays(cfg, n)
        q = fan.q_of(n, lam, xi)
        a2 = fan.a_of(n, lam, xi) ** 2
        for prod, want in ((q[1, 1] * q[-1, -1], xi - n * lam), (q[1, -1] * q[-1, 1], xi + n * lam)):
            worst = max(worst, (np.abs(prod - want) / a2).max(), max(0.0, -prod.min()))
    return worst


@check("fan-eigen", "eigen_ordering", "mu- <= xi + lambda^2 <= mu+, mu+ - d >= n, all >= 0", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for n in _fan_ns(cfg):
        lam, xi, _ = _fan_arrays(cfg, n)
        ev = fan.eigenvalues_of(n, lam, xi)
        d, plus, minus = ev[:, 0], ev[:, 1], ev[:, 2]
        viol = np.maximum.reduce([minus - d, d - plus, n - (plus - d), -minus, np.zeros_like(d)])
        worst = max(worst, (viol / np.maximum(plus, 1.0)).max())
    return worst


@check("fan-eigen", "szego_ray", "on xi = n lambda: q-- = 0, v- = (i,0,0), entry decouples", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for n in _fan_ns(cfg):
        lam = cfg.fan_lambdas()
        lam = lam[lam > 0]
        xi = n * lam
        q = fan.q_of(n, lam, xi)
        _, vp, vm = fan.eigenvectors_of(n, lam, xi)
        ev = fan.eigenvalues_of(n, lam, xi)
        d1 = fan.d1_matrix(n, lam, xi)
        d = xi + lam ** 2
        worst = max(worst, np.abs(q[-1, -1]).max(),
                    np.abs(vm - np.array([1j, 0, 0])).max(),
                    (np.abs(ev[:, 2] - (d - lam)) / d).max(),
                    np.abs(d1[:, 0, 1:]).max(), np.abs(d1[:, 1:, 0]).max(),
                    max(np.abs(vp[i] - fan.ray_vplus(n, lam[i])).max() for i in range(len(lam))))
    return worst


@check("fan-eigen", "hand_point", "n=1, lambda=1, xi=1: eigenvalues {1,2,4}, v- = (i,0,0)", 1e-12)
def _(cfg, rng):
    es = fan.fan_eigensystem(fan.FanPoint(1.0, 0, 1))
    return max(np.abs(np.sort(es.eigenvalues) - [1, 2, 4]).max(),
               np.abs(es.vectors["-"] - np.array([1j, 0, 0])).max())


@check("fan-eigen", "synthesis_vs_oracle", "m(d1) from closed forms = m(d1) by hermitian eigensolver", 1e-10)
def _(cfg, rng):
    funcs = [mp.heat(1.0), mp.imaginary_power(1.0), mp.riesz_ratio(1.0)]
    worst = 0.0
    for n in _fan_ns(cfg):
        pts = _fan_points(cfg, n)
        for i in rng.choice(len(pts), size=min(200, len(pts)), replace=False):
            pt = pts[int(i)]
            A = fan.d1_at(pt)
            w, V = fan.jacobi_eigh(A)
            for m in funcs:
                want = (V * np.asarray(m(w), dtype=complex)) @ V.conj().T
                got = fan.synth_matrix_multiplier(m, pt)
                worst = max(worst, np.abs(got - want).max() / max(np.abs(want).max(), 1e-300))
    return worst


# -- decomposition ----------------------------------------------------------

def _scalars(cfg, rng):
    for model in models(cfg):
        for _ in range(cfg.trials):
            yield model, osc.random_scalar(model, rng, model.M - 1)


def _rays_off(f):
    s = dc.symbols(f.model)
    return osc.ScalarField(f.model, (1 - s.C - s.Cbar) * f.data)


@check("decomposition", "R_isometry", "R*R = I", 1e-10)
def _(cfg, rng):
    return max(rel(dc.apply_R("adj", dc.apply_R("fwd", f)), f) for _, f in _scalars(cfg, rng))


@check("decomposition", "Rhol_partial_isometry", "Rhol* Rhol = I - Cbar", 1e-10)
def _(cfg, rng):
    worst = 0.0
    for model, f in _scalars(cfg, rng):
        s = dc.symbols(model)
        want = osc.ScalarField(model, (1 - s.Cbar) * f.data)
        worst = max(worst, rel(dc.apply_Ri("hol", "adj", dc.apply_Ri("hol", "fwd", f)), want))
    return worst


@check("decomposition", "Rantihol_partial_isometry", "Rantihol* Rantihol = I - C", 1e-10)
def _(cfg, rng):
    worst = 0.0
    for model, f in _scalars(cfg, rng):
        s = dc.symbols(model)
        want = osc.ScalarField(model, (1 - s.C) * f.data)
        worst = max(worst, rel(dc.apply_Ri("antihol", "adj", dc.apply_Ri("antihol", "fwd", f)), want))
    return worst


@check("decomposition", "Gamma_isometry", "Gamma* Gamma = I on W", 1e-10)
def _(cfg, rng):
    worst = 0.0
    for model in models(cfg):
        for _ in range(cfg.trials):
            t = dc.random_w_triple(model, rng, model.M - 1)
            back = dc.apply_Gamma("adj", dc.apply_Gamma("fwd", t))
            worst = max(worst, (back - t).norm() / t.norm())
    return worst


def _s_iso(branch):
    def fn(cfg, rng):
        worst = 0.0
        for _, f in _scalars(cfg, rng):
            if branch == "minus":
                f = _rays_off(f)
            worst = max(worst, rel(dc.apply_S(branch, "adj", dc.apply_S(branch, "fwd", f)), f))
        return worst
    return fn


for _b, _label in ((0, "S0"), ("plus", "Splus"), ("minus", "Sminus")):
    check("decomposition", f"{_label}_isometry", "S* S = I on its domain", 1e-10)(_s_iso(_b))


@check("decomposition", "P1_via_W0", "P1 = Gamma S0 S0* Gamma*", 1e-10)
def _(cfg, rng):
    worst = 0.0
    for model in models(cfg):
        for _ in range(cfg.trials):
            w = osc.random_form(model, 1, rng, max_grade=model.M - 1)
            alt = dc.apply_Gamma("fwd", dc.apply_S(0, "fwd", dc.apply_S(0, "adj", dc.apply_Gamma("adj", w))))
            worst = max(worst, (dc.project("P1", w) - alt).norm() / w.norm())
    return worst


def _decompositions(cfg, rng):
    for model in models(cfg):
        for _ in range(cfg.trials):
            w = osc.random_form(model, 1, rng, max_grade=model.M - 1)
            yield model, w, dc.decompose_1form(w)


@check("decomposition", "five_way_residual", "parts sum to the input", 1e-10)
def _(cfg, rng):
    return max(r.residual for _, _, r in _decompositions(cfg, rng))


@check("decomposition", "five_way_orthogonality", "parts pairwise orthogonal", 1e-10)
def _(cfg, rng):
    return max(r.diagnostics["orthogonality"] for _, _, r in _decompositions(cfg, rng))


@check("decomposition", "five_way_symbols", "Delta_1 acts on each part by its scalar symbol", 1e-10)
def _(cfg, rng):
    return max(max(dc.subspace_symbol_errors(r).values()) for _, _, r in _decompositions(cfg, rng))


@check("decomposition", "coclosed_n1", "n = 1: Delta_1 = -T^2 on co-closed (1,0) and (0,1) forms", 1e-10)
def _(cfg, rng):
    m = cfg.model
    model = _model(1, m.M, tuple(m.lambdas), tuple(m.weights))
    worst = 0.0
    for _ in range(cfg.trials):
        r = dc.decompose_1form(osc.random_form(model, 1, rng, max_grade=model.M - 1))
        for part in (r.coclosed10, r.coclosed01):
            minus_T2 = part._new(model.lambdas[:, None, None] ** 2 * part.data)
            worst = max(worst, rel(osc.apply_hodge(1, part), minus_T2))
    return worst


@check("decomposition", "intertwine_R", "Delta_1 R = R Delta_0", 1e-10)
def _(cfg, rng):
    worst = 0.0
    for model, f in _scalars(cfg, rng):
        lhs = osc.apply_hodge(1, dc.apply_R("fwd", f))
        rhs = dc.apply_R("fwd", osc.ScalarField(model, model.delta0 * f.data))
        worst = max(worst, rel(lhs, rhs))
    return worst


def _intertwine(branch):
    def fn(cfg, rng):
        worst = 0.0
        for model, f in _scalars(cfg, rng):
            s = dc.symbols(model)
            if branch == "minus":
                f = _rays_off(f)
            phi = s.phi_plus if branch == "plus" else s.phi_minus
            GS = lambda g: dc.apply_Gamma("fwd", dc.apply_S(branch, "fwd", g), check=False)
            lhs = osc.apply_hodge(1, GS(f))
            rhs = GS(osc.ScalarField(model, phi * f.data))
            worst = max(worst, rel(lhs, rhs))
        return worst
    return fn


check("decomposition", "intertwine_plus", "Delta_1 Gamma S+ = Gamma S+ Phi+", 1e-10)(_intertwine("plus"))
check("decomposition", "intertwine_minus", "Delta_1 Gamma S- = Gamma S- Phi-", 1e-10)(_intertwine("minus"))


@check("decomposition", "W_relations", "linear relations on W0, W+, W-", 1e-10)
def _(cfg, rng):
    worst = 0.0
    for _, f in _scalars(cfg, rng):
        for branch in (0, "plus", "minus"):
            t = dc.apply_S(branch, "fwd", f, auto_project=True)
            worst = max(worst, max(dc.w_relations(branch, t).values()))
    return worst


@check("decomposition", "q_box", "Q++ Q-- = 2 Box, Q+- Q-+ = 2 Boxbar", 1e-12)
def _(cfg, rng):
    return max(dc.q_box_identity(model) for model in models(cfg))


# -- multipliers ------------------------------------------------------------

AGREEMENT = {"heat_0.1": mp.heat(0.1), "heat_1": mp.heat(1.0), "imaginary_power_1": mp.imaginary_power(1.0)}


def _one_forms(cfg, rng):
    for model in models(cfg):
        for _ in range(cfg.trials):
            yield model, osc.random_form(model, 1, rng, max_grade=model.M - 1)


for _name, _m in AGREEMENT.items():
    def _agree(cfg, rng, m=_m):
        worst = 0.0
        for _, w in _one_forms(cfg, rng):
            worst = max(worst, (mp.m_delta1_product(m, w) - mp.m_delta1_oracle(m, w)).norm() / w.norm())
        return worst
    check("multiplier", f"agreement_{_name}", "m(Delta_1) by subspaces = block eigendecomposition", 1e-8)(_agree)


@check("multiplier", "multiplicativity", "m1(Delta_1) m2(Delta_1) = (m1 m2)(Delta_1)", 1e-8)
def _(cfg, rng):
    m1, m2 = mp.heat(0.5), mp.imaginary_power(1.0)
    worst = 0.0
    for _, w in _one_forms(cfg, rng):
        a = mp.m_delta1_product(m1, mp.m_delta1_product(m2, w))
        b = mp.m_delta1_product(m1 * m2, w)
        worst = max(worst, (a - b).norm() / w.norm())
    return worst


@check("multiplier", "self_adjoint", "real m gives self-adjoint m(Delta_1)", 1e-10)
def _(cfg, rng):
    m = mp.heat(1.0)
    worst = 0.0
    for model, w in _one_forms(cfg, rng):
        v = osc.random_form(model, 1, rng, max_grade=model.M - 1)
        a = mp.m_delta1_product(m, w).inner(v)
        b = w.inner(mp.m_delta1_product(m, v))
        worst = max(worst, abs(a - b) / (w.norm() * v.norm()))
    return worst


@check("multiplier", "heat_contraction", "|heat(t)(Delta_1) w| <= |w|", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for _, w in _one_forms(cfg, rng):
        for t in (0.1, 1.0):
            worst = max(worst, mp.m_delta1_product(mp.heat(t), w).norm() / w.norm() - 1.0)
    return max(worst, 0.0)


@check("multiplier", "projection_commute", "m(Delta_1) commutes with the five projections", 1e-9)
def _(cfg, rng):
    m = mp.heat(0.5)
    worst = 0.0
    for _, w in _one_forms(cfg, rng):
        mw = mp.m_delta1_product(m, w)
        for space in ("P1", "P2plus", "P2minus", "PiPlus", "PiMinus"):
            a = dc.project(space, mw)
            b = mp.m_delta1_product(m, dc.project(space, w))
            worst = max(worst, (a - b).norm() / w.norm())
    return worst


@check("multiplier", "block_spectrum", "grade-block spectra match the fan eigenvalues", 1e-10)
def _(cfg, rng):
    worst = 0.0
    for model in models(cfg):
        for l in range(model.L):
            for g in range(0, model.M):
                a = mp.block_spectrum(model, l, g)
                b = mp.predicted_block_spectrum(model, l, g)
                if len(a) != len(b):
                    return float("inf")
                worst = max(worst, np.abs(a - b).max() / max(np.abs(a).max(), 1.0))
    return worst


# -- MH norms ---------------------------------------------------------------

def _sloc(m, cfg, **kw):
    p = dict(tau=cfg.norms["tau"], J=cfg.norms["J"], resolution=cfg.norms["resolution"])
    p.update(kw)
    return mh.mh_sloc_norm(m, mh.SlocParams(**p))


@check("mh-norms", "constant_r_independent", "m = 1 has the same norm at every scale", 1e-12)
def _(cfg, rng):
    rep = _sloc(lambda s: np.ones_like(s), cfg)
    v = np.array(list(rep.per_r.values()))
    return float(v.max() - v.min()) / float(v.max())


@check("mh-norms", "jump_divergence", "jump at tau = 1: 1/growth under 4x resolution (needs growth >= 10)", 0.1)
def _(cfg, rng):
    g = mh.resolution_growth(mp.jump(1.5), 1.0, resolutions=(128, 512), J=4)
    return 1.0 / g["growth"]


@check("mh-norms", "imaginary_power_constant", "s^{iu} <= C (1+u)^tau with C stable over J in {8, 10}", 2.0)
def _(cfg, rng):
    tau = cfg.norms["tau"]
    C = []
    for J in (8, 10):
        C.append(max(_sloc(mp.imaginary_power(u), cfg, J=J).sup / (1 + u) ** tau for u in (1, 2, 4, 8)))
    return max(C[0] / C[1], C[1] / C[0])


@check("mh-norms", "dyadic_scale_invariance", "norm of m(2 .) equals norm of m", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for m in (mp.dyadic_bump(0), mp.imaginary_power(1.0)):
        a = _sloc(m, cfg).sup
        b = _sloc(lambda s, m=m: m(2.0 * np.asarray(s)), cfg).sup
        worst = max(worst, abs(a - b) / a)
    return worst


@check("mh-norms", "tau_monotone", "norm nondecreasing in tau", 1e-12)
def _(cfg, rng):
    worst = 0.0
    for m in (mp.heat(1.0), mp.imaginary_power(1.0), mp.dyadic_bump(0)):
        vals = [_sloc(m, cfg, tau=t).sup for t in (0.0, 0.5, 1.0, 1.5, 2.0)]
        worst = max(worst, max(max(0.0, a - b) / a for a, b in zip(vals, vals[1:])))
    return worst


@check("mh-norms", "separable_ratio_stable", "mixed norm of m(xi) vs 1D norm, stable in resolution", 2.0)
def _(cfg, rng):
    worst = 1.0
    for m in (mp.heat(1.0), mp.dyadic_bump(0)):
        r = [mh.separable_ratio(m, 1.0, 1.0, resolution=res) for res in (32, 64)]
        if not all(np.isfinite(r)):
            return float("inf")
        worst = max(worst, max(r) / min(r))
    return worst


def _gauss2(l, x):
    return np.exp(-l ** 2 - 2 * x ** 2)


@check("mh-norms", "mixed_sobolev_fd_oracle", "FFT mixed Sobolev norm vs finite-difference derivatives", 0.02)
def _(cfg, rng):
    box = ((-7.0, 7.0), (-7.0, 7.0))
    F = mh.SampledFunction2D.from_callable(_gauss2, box, (256, 256))
    a = mh.mixed_sobolev_norm(F, 1, 1, weight="polynomial")
    b = mh.derivative_norm_rho_sigma_1(_gauss2, box, (256, 256))
    return abs(a / b - 1)


@check("mh-norms", "weight_equivalence", "printed weight / polynomial weight within [1, sqrt 6]", 1e-12)
def _(cfg, rng):
    box = ((-7.0, 7.0), (-7.0, 7.0))
    worst = 0.0
    for f in (_gauss2, lambda l, x: np.exp(-(l - 1) ** 2 - x ** 2 / 2) * np.cos(2 * x)):
        F = mh.SampledFunction2D.from_callable(f, box, (128, 128))
        r = mh.mixed_sobolev_norm(F, 1, 1) / mh.mixed_sobolev_norm(F, 1, 1, weight="polynomial")
        worst = max(worst, 1 - r, r - sqrt(6))
    return max(worst, 0.0)


_TRANSFORMS = {
    "translate": (mp.dyadic_bump(0), {"a": 1.0}),
    "compose_phi_plus": (mp.heat(1.0), {"n": 1, "sign": 1}),
    "compose_phi_minus": (mp.heat(1.0), {"n": 1, "sign": -1}),
    "bump_swap": (mp.heat(1.0), {}),
    "square": (lambda l, x: mp.dyadic_bump(0)(l) * mp.dyadic_bump(0)(x), {}),
    "shear": (lambda l, x: mp.heat(1.0)(x), {"alpha": -1.0, "n": 1, "delta": 0.5}),
}

for _name, (_inp, _par) in _TRANSFORMS.items():
    def _audit(cfg, rng, name=_name, inp=_inp, par=_par):
        kind = name.rsplit("_", 1)[0] if name.startswith("compose_phi") else name
        rep = mh.norm_transform_audit(kind, inp, par)
        return rep.stability if rep.finite else float("inf")
    check("mh-norms", f"transform_{_name}", "norm ratio finite and stable across resolutions", 2.0)(_audit)


@check("mh-norms", "fan_extension", "extension equals m(xi + lambda^2 - alpha lambda) on the fan", 1e-12)
def _(cfg, rng):
    m = mp.imaginary_power(1.0)
    worst = 0.0
    for n, alpha, delta in ((1, 0.5, 0.25), (2, -1.0, 0.5)):
        lam, xi, _ = fan.fan_arrays(fan.fan_grid(n, cfg.fan_lambdas(), 20))
        mu3 = mh.build_fan_multiplier(m, alpha, delta, n)
        worst = max(worst, np.abs(mu3(lam, xi) - m(xi + lam ** 2 - alpha * lam)).max())
    return worst


_NU = [("nu0", 1), ("nu0", -1), ("nuPlus", 1), ("nuPlus", -1), ("nuMinus", -1)]


@check("mh-norms", "nu_refinement", "scaled nu derivatives finite and stable under grid refinement", 2.0)
def _(cfg, rng):
    worst = 1.0
    n = 1
    for nu, eps in _NU:
        for delta in (1, -1):
            for i in (0, 1):
                for j in range(4):
                    try:
                        a = mh.nu_estimate_audit(nu, n, i, j, n + 1, eps, delta)
                        b = mh.nu_estimate_audit(nu, n, i, j, n + 1, eps, delta, n_xi=400, n_t=200)
                    except FloatingPointError:
                        return float("inf")
                    if a == 0 and b == 0:
                        continue
                    worst = max(worst, max(a, b) / max(min(a, b), 1e-300))
    return worst


@check("mh-norms", "nu0_bound", "sup of nu0 on xi > 2|lambda| (n = 1) below sqrt 3", sqrt(3))
def _(cfg, rng):
    return max(mh.nu_estimate_audit("nu0", 1, 0, 0, 2.0, eps, delta)
               for eps in (1, -1) for delta in (1, -1))
