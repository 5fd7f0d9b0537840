"""Functional calculus ``m(Delta_1)`` on 1-form fields.

The product path assembles ``m(Delta_1)`` from the five invariant parts:

    R m(Delta0) R*  +  m(Delta0 - iT) P2+  +  m(Delta0 + iT) P2-
      +  Gamma S+ m(Phi+) S+* Gamma* P3  +  Gamma S- m(Phi-) S-* Gamma* P3

with ``Phi+- = Delta0 + n/2 +- sqrt(Delta0 + n^2/4)``.  The oracle instead
diagonalises Delta_1 numerically on each slice and weight-grade block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Callable

import numpy as np

from . import decomposition as dc
from .exterior import DegreeError
from .oscillator import FormField, ScalarField


class MultiplierDomainError(ValueError):
    """The multiplier is undefined at a required symbol value."""


class ConsistencyError(RuntimeError):
    """An internal invariant of the oracle failed."""


@dataclass
class MultiplierSpec:
    """Scalar function on the positive half-line with optional exact derivatives."""

    func: Callable
    label: str = "m"
    derivatives: dict = field(default_factory=dict)  # order -> callable
    params: dict = field(default_factory=dict)

    def __call__(self, s):
        return self.func(np.asarray(s, dtype=float))

    def derivative(self, k: int):
        if k == 0:
            return self.func
        if k not in self.derivatives:
            raise KeyError(f"{self.label} has no exact derivative of order {k}")
        return self.derivatives[k]

    def evaluate(self, s) -> np.ndarray:
        """Evaluate on symbol values, rejecting non-finite results."""
        vals = np.asarray(self(s), dtype=complex)
        if not np.all(np.isfinite(vals)):
            bad = np.asarray(s)[~np.isfinite(vals)]
            raise MultiplierDomainError(f"{self.label} undefined at s = {bad.ravel()[:3]}")
        return vals

    def __mul__(self, other: "MultiplierSpec") -> "MultiplierSpec":
        return MultiplierSpec(lambda s: self(s) * other(s), f"({self.label})*({other.label})")


# -- library ----------------------------------------------------------------

def smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1 / np.where(x > 0, x, 1)), 0.0)
        b = np.where(x < 1, np.exp(-1 / np.where(x < 1, 1 - x, 1)), 0.0)
    return a / (a + b)


def heat(t: float) -> MultiplierSpec:
    if not t > 0:
        raise ValueError(f"heat needs t > 0, got {t}")
    derivs = {k: (lambda s, k=k: (-t) ** k * np.exp(-t * s)) for k in range(1, 7)}
    return MultiplierSpec(lambda s: np.exp(-t * s), f"heat({t})", derivs, {"t": t})


def imaginary_power(u: float) -> MultiplierSpec:
    if not np.isfinite(u):
        raise ValueError("u must be finite")

    def deriv(k):
        coef = np.prod([1j * u - i for i in range(k)])
        return lambda s: coef * np.asarray(s, dtype=float) ** (1j * u - k)

    derivs = {k: deriv(k) for k in range(1, 7)}
    return MultiplierSpec(lambda s: np.asarray(s, dtype=float) ** (1j * u),
                          f"imaginary_power({u})", derivs, {"u": u})


def dyadic_bump(j: int) -> MultiplierSpec:
    """Smooth bump equal to 1 on ``[1.25, 1.75] 2^j`` and supported in ``[1, 2] 2^j``."""
    j = int(j)
    scale = 2.0 ** j

    def f(s):
        x = np.asarray(s, dtype=float) / scale
        return smooth_step((x - 1) / 0.25) * smooth_step((2 - x) / 0.25)

    return MultiplierSpec(f, f"dyadic_bump({j})", {}, {"j": j})


def riesz_ratio(r: float, c: float = 1.0) -> MultiplierSpec:
    """``(s / (s + c))^r``."""
    if not r > 0 or not c > 0:
        raise ValueError("riesz_ratio needs r > 0 and c > 0")

    def f(s):
        s = np.asarray(s, dtype=float)
        return (s / (s + c)) ** r

    d1 = lambda s: r * c * np.asarray(s, float) ** (r - 1) / (np.asarray(s, float) + c) ** (r + 1)
    return MultiplierSpec(f, f"riesz_ratio({r})", {1: d1}, {"r": r, "c": c})


def jump(s0: float = 1.5) -> MultiplierSpec:
    """Indicator of ``s < s0``; not a Mihlin-Hormander multiplier of any order > 1/2."""
    return MultiplierSpec(lambda s: (np.asarray(s, float) < s0).astype(float), f"jump({s0})", {}, {"s0": s0})


def identity() -> MultiplierSpec:
    return MultiplierSpec(lambda s: np.asarray(s, dtype=float), "identity", {1: lambda s: np.ones_like(s)})


def constant(c: complex = 1.0) -> MultiplierSpec:
    return MultiplierSpec(lambda s: np.full(np.shape(s), c, dtype=complex), f"constant({c})")


LIBRARY = {
    "heat": (heat, "t"),
    "imaginary_power": (imaginary_power, "u"),
    "dyadic_bump": (dyadic_bump, "j"),
    "riesz_ratio": (riesz_ratio, "r"),
    "jump": (jump, "s0"),
}


def multiplier_library(name: str, **params) -> MultiplierSpec:
    if name == "identity":
        return identity()
    if name == "constant":
        return constant(params.get("c", 1.0))
    if name not in LIBRARY:
        raise ValueError(f"unknown multiplier {name!r}; expected one of {sorted(LIBRARY)}")
    factory, key = LIBRARY[name]
    if key not in params:
        raise ValueError(f"{name} needs parameter {key!r}")
    return factory(**params)


# -- scalar calculi ---------------------------------------------------------

SCALAR_CALCULI = ("Delta0", "Delta0-iT", "Delta0+iT", "PhiPlus", "PhiMinus")


def calculus_symbol(model, op: str) -> np.ndarray:
    s = dc.symbols(model)
    if op == "Delta0":
        return s.delta0
    if op == "Delta0-iT":
        return s.delta0 + s.lam
    if op == "Delta0+iT":
        return s.delta0 - s.lam
    if op == "PhiPlus":
        return s.phi_plus
    if op == "PhiMinus":
        return s.phi_minus
    raise ValueError(f"unknown operator {op!r}; expected one of {SCALAR_CALCULI}")


def scalar_calculus(m: MultiplierSpec, op: str, f: ScalarField) -> ScalarField:
    sym = calculus_symbol(f.model, op)
    return ScalarField(f.model, m.evaluate(sym) * f.data)


# -- m(Delta_1) -------------------------------------------------------------

def m_delta1_product(m: MultiplierSpec, omega: FormField) -> FormField:
    if omega.degree != 1:
        raise DegreeError(f"m(Delta_1) acts on 1-forms, got degree {omega.degree}")
    model = omega.model
    exact = dc.apply_R("fwd", scalar_calculus(m, "Delta0", dc.apply_R("adj", omega)))
    p2p = dc.project("P2plus", omega)
    p2m = dc.project("P2minus", omega)
    c10 = p2p._new(m.evaluate(calculus_symbol(model, "Delta0-iT"))[:, None, :] * p2p.data)
    c01 = p2m._new(m.evaluate(calculus_symbol(model, "Delta0+iT"))[:, None, :] * p2m.data)
    p3 = dc.project("P3", omega)
    t = dc.apply_Gamma("adj", p3)
    out = exact + c10 + c01
    for branch, op in (("plus", "PhiPlus"), ("minus", "PhiMinus")):
        f = scalar_calculus(m, op, dc.apply_S(branch, "adj", t))
        out = out + dc.apply_Gamma("fwd", dc.apply_S(branch, "fwd", f, auto_project=True), check=False)
    return out


def delta1_slice_matrix(model, l: int) -> np.ndarray:
    """Dense matrix of Delta_1 on slice ``l`` in (word, Fock index) order."""
    n, D = model.n, model.D
    lam = model.lambdas[l]
    d0 = model.delta0[l]
    N = (2 * n + 1) * D
    A = np.zeros((N, N), dtype=complex)

    def blk(i, j):
        return slice(i * D, (i + 1) * D), slice(j * D, (j + 1) * D)

    A[blk(0, 0)] = np.diag(d0 + n)
    for j in range(n):
        B, Bb = model.B[l, j], model.Bbar[l, j]
        up, dn = 1 + j, 1 + n + j
        A[blk(up, up)] = np.diag(d0 + lam)  # Delta0 - iT
        A[blk(dn, dn)] = np.diag(d0 - lam)
        A[blk(up, 0)] = -1j * B
        A[blk(dn, 0)] = 1j * Bb
        A[blk(0, up)] = -1j * Bb  # i del_b*, del_b* = -sum Bbar_j
        A[blk(0, dn)] = 1j * B
    return A


def grade_blocks(model, l: int) -> dict:
    """Flat indices of each weight grade on slice ``l``."""
    grades = model.grades(1)[l].ravel()
    return {int(g): np.flatnonzero(grades == g) for g in np.unique(grades)}


def m_delta1_oracle(m: MultiplierSpec, omega: FormField, herm_tol: float = 1e-10) -> FormField:
    """Block eigendecomposition of Delta_1; grades >= M are not represented and map to 0."""
    if omega.degree != 1:
        raise DegreeError(f"m(Delta_1) acts on 1-forms, got degree {omega.degree}")
    model = omega.model
    out = np.zeros_like(omega.data)
    for l in range(model.L):
        A = delta1_slice_matrix(model, l)
        x = omega.data[l].ravel()
        y = np.zeros_like(x)
        for g, idx in grade_blocks(model, l).items():
            if g >= model.M:
                continue
            blk = A[np.ix_(idx, idx)]
            if np.abs(blk - blk.conj().T).max() > herm_tol * max(1.0, np.abs(blk).max()):
                raise ConsistencyError(f"Delta_1 block (slice {l}, grade {g}) is not hermitian")
            w, V = np.linalg.eigh(blk)
            y[idx] = V @ (m.evaluate(w) * (V.conj().T @ x[idx]))
        out[l] = y.reshape(omega.data.shape[1:])
    return omega._new(out)


def block_spectrum(model, l: int, grade: int) -> np.ndarray:
    A = delta1_slice_matrix(model, l)
    idx = grade_blocks(model, l)[grade]
    return np.linalg.eigvalsh(A[np.ix_(idx, idx)])


def predicted_block_spectrum(model, l: int, grade: int) -> np.ndarray:
    """Eigenvalues of a grade block from the fan closed forms.

    A grade-g block of a slice with sign s couples h on level g with
    ``omega_+`` on level ``g - s`` and ``omega_-`` on level ``g + s``.  Its
    spectrum consists of the three d1 eigenvalues on the scalar level g
    (minus the absent ones on the Szego rays) and the co-closed values
    ``Delta0 -+ iT`` on the remaining (1,0) and (0,1) directions.
    """
    n = model.n
    lam = model.lambdas[l]
    s = int(np.sign(lam))
    L = abs(lam)

    def xi(level):
        return (n + 2 * level) * L

    def mult(level):
        return comb(level + n - 1, n - 1) if level >= 0 else 0

    vals = []
    g = grade
    x = xi(g)
    d = x + lam ** 2
    a = np.sqrt(d + n * n / 4)
    n_h = mult(g)
    n_up = mult(g - s) * n
    n_dn = mult(g + s) * n
    # triples (u, v, h) built on the n_h scalar states of level g
    eig0, eigp, eigm = d, d + n / 2 + a, d * (d + n - 1) / (d + n / 2 + a)
    on_cbar = lam > 0 and g == 0
    on_c = lam < 0 and g == 0
    vals += [eig0] * n_h + [eigp] * n_h
    if not (on_cbar or on_c):
        vals += [eigm] * n_h
    # W-triples use at most one up and one down direction per scalar state
    used_up = n_h if not on_cbar else 0
    used_dn = n_h if not on_c else 0
    vals += [xi(g - s) + lam ** 2 + lam] * (n_up - used_up)
    vals += [xi(g + s) + lam ** 2 - lam] * (n_dn - used_dn)
    return np.sort(np.array(vals))
