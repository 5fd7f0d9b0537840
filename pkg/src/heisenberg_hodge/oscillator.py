"""Truncated Fock-space model of scalar and form fields on H_n.

Each nonzero lambda carries a copy of the Fock space spanned by multi-indices
alpha with ``|alpha| <= M``.  On that slice

    lambda > 0:  B_j = sqrt(lambda) a_j,      Bbar_j = -sqrt(lambda) a_j^dagger
    lambda < 0:  B_j = -sqrt(|lambda|) a_j^dagger,  Bbar_j = sqrt(|lambda|) a_j

and ``T`` is multiplication by ``i lambda``, so ``[B_j, Bbar_j] = iT`` below
the truncation level.  Creation out of level M is dropped.  A form field of
degree k stores its coefficients as an array of shape ``(L, nwords, D)``
indexed by slice, basis word (see :func:`exterior.degree_basis`) and Fock
index.

Every invariant operator preserves the weight grade

    w = |alpha| + sign(lambda) * (#beta - #betabar)

so identities are exact on components of low enough grade; see
:func:`safe_grade` and :func:`safe_band`.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from math import comb

import numpy as np

from . import exterior as ext


class ConfigError(ValueError):
    """Invalid model configuration."""


DEFAULT_LAMBDAS = tuple(sorted(s * 2.0 ** e for s in (-1.0, 1.0) for e in range(-2, 4)))


def trapezoid_weights(lambdas) -> np.ndarray:
    """Trapezoid weights computed separately on each sign branch."""
    lam = np.asarray(lambdas, dtype=float)
    w = np.zeros_like(lam)
    for branch in (lam > 0, lam < 0):
        idx = np.flatnonzero(branch)
        if idx.size == 0:
            continue
        if idx.size == 1:
            w[idx] = 1.0
            continue
        order = idx[np.argsort(lam[idx])]
        x = lam[order]
        h = np.diff(x)
        ww = np.zeros(len(x))
        ww[:-1] += h / 2
        ww[1:] += h / 2
        w[order] = ww
    return w


@dataclass
class ModelConfig:
    n: int = 1
    lambdas: tuple = DEFAULT_LAMBDAS
    M: int = 8
    weights: tuple | None = None
    tol: float = 1e-10

    def __post_init__(self):
        errors = self.validate()
        if errors:
            raise ConfigError("; ".join(errors))
        self.lambdas = tuple(float(x) for x in self.lambdas)
        if self.weights is None:
            self.weights = tuple(float(x) for x in trapezoid_weights(self.lambdas))
        else:
            self.weights = tuple(float(x) for x in self.weights)

    def validate(self) -> list[str]:
        return model_errors(self.n, self.lambdas, self.M, self.weights, self.tol)


def model_errors(n, lambdas, M, weights=None, tol=1e-10) -> list[str]:
    """All validation failures of a model configuration."""
    errs = []
    if not isinstance(n, (int, np.integer)) or n < 1:
        errs.append(f"n must be a positive integer, got {n!r}")
    if not isinstance(M, (int, np.integer)) or M < 4:
        errs.append(f"M must be an integer >= 4, got {M!r}")
    lams = list(lambdas)
    if not lams:
        errs.append("lambda grid is empty")
    if any(float(x) == 0.0 for x in lams):
        errs.append("lambda = 0 is not allowed in the grid")
    if len(set(float(x) for x in lams)) != len(lams):
        errs.append("lambda grid has repeated values")
    if weights is not None:
        if len(weights) != len(lams):
            errs.append("weights and lambdas differ in length")
        elif any(float(w) <= 0 for w in weights):
            errs.append("quadrature weights must be positive")
    if not tol > 0:
        errs.append(f"tol must be positive, got {tol!r}")
    return errs


def fock_indices(n: int, M: int) -> np.ndarray:
    """Multi-indices with ``|alpha| <= M``, ordered by level then lexicographically."""
    out = []
    for level in range(M + 1):
        for combo in itertools.combinations_with_replacement(range(n), level):
            alpha = [0] * n
            for c in combo:
                alpha[c] += 1
            out.append(tuple(alpha))
    # combinations_with_replacement yields reverse-lex inside a level; sort for stability
    out.sort(key=lambda a: (sum(a), tuple(-x for x in a)))
    return np.array(out, dtype=int).reshape(-1, n)


def ladder_matrices(alphas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Annihilation a_j and (truncated) creation a_j^dagger, shape (n, D, D)."""
    D, n = alphas.shape
    index = {tuple(a): i for i, a in enumerate(alphas)}
    ann = np.zeros((n, D, D))
    for col, a in enumerate(alphas):
        for j in range(n):
            if a[j] == 0:
                continue
            b = list(a)
            b[j] -= 1
            ann[j, index[tuple(b)], col] = np.sqrt(a[j])
    return ann, np.transpose(ann, (0, 2, 1)).copy()


class GeneratorSet:
    """Per-slice matrices of B_j, Bbar_j and the scalar symbol of T."""

    def __init__(self, cfg: ModelConfig):
        self.cfg = cfg
        self.n = cfg.n
        self.M = cfg.M
        self.lambdas = np.array(cfg.lambdas)
        self.weights = np.array(cfg.weights)
        self.sign = np.sign(self.lambdas).astype(int)
        self.alphas = fock_indices(self.n, self.M)
        self.levels = self.alphas.sum(axis=1)
        self.D = len(self.alphas)
        self.L = len(self.lambdas)
        ann, cre = ladder_matrices(self.alphas)
        B = np.zeros((self.L, self.n, self.D, self.D), dtype=complex)
        Bb = np.zeros_like(B)
        for l, lam in enumerate(self.lambdas):
            r = np.sqrt(abs(lam))
            if lam > 0:
                B[l], Bb[l] = r * ann, -r * cre
            else:
                B[l], Bb[l] = -r * cre, r * ann
        self.B = B
        self.Bbar = Bb
        self.T = 1j * self.lambdas
        # xi = (n + 2|alpha|)|lambda| on every Fock index
        self.xi = np.abs(self.lambdas)[:, None] * (self.n + 2 * self.levels)[None, :]

    def __repr__(self):
        return f"GeneratorSet(n={self.n}, M={self.M}, L={self.L}, D={self.D})"

    @property
    def shape(self):
        return self.L, self.D

    def grade(self, word: ext.BasisWord) -> np.ndarray:
        """Weight grade of each (slice, Fock index) for a coefficient of ``word``."""
        offset = len(word.I) - len(word.Ib)
        return self.levels[None, :] + self.sign[:, None] * offset

    def grades(self, degree: int) -> np.ndarray:
        basis = ext.degree_basis(self.n, degree)
        return np.stack([self.grade(w) for w in basis], axis=1)

    def X(self, j):
        return (self.B[:, j - 1] + self.Bbar[:, j - 1]) / np.sqrt(2)

    def Y(self, j):
        return 1j * (self.B[:, j - 1] - self.Bbar[:, j - 1]) / np.sqrt(2)

    @cached_property
    def delta0(self) -> np.ndarray:
        return self.xi + self.lambdas[:, None] ** 2


def build_model(cfg: ModelConfig) -> GeneratorSet:
    return GeneratorSet(cfg)


def safe_grade(model: GeneratorSet) -> int:
    """Largest grade on which any composition of d, d* and CR operators is exact."""
    return model.M - model.n


# -- fields -----------------------------------------------------------------

class _FieldBase:
    model: GeneratorSet
    data: np.ndarray

    def _check(self, other):
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.model is not self.model:
            raise ValueError("fields belong to different models")
        if getattr(other, "degree", None) != getattr(self, "degree", None):
            raise ext.DegreeError("form fields of different degree")

    def _new(self, data):
        raise NotImplementedError

    def __add__(self, other):
        self._check(other)
        return self._new(self.data + other.data)

    def __sub__(self, other):
        self._check(other)
        return self._new(self.data - other.data)

    def __neg__(self):
        return self._new(-self.data)

    def __mul__(self, c):
        return self._new(self.data * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self._new(self.data / c)

    def _weights(self):
        w = self.model.weights
        return w.reshape((-1,) + (1,) * (self.data.ndim - 1))

    def inner(self, other) -> complex:
        self._check(other)
        return complex(np.sum(self._weights() * self.data * np.conj(other.data)))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self._weights() * np.abs(self.data) ** 2)))

    def copy(self):
        return self._new(self.data.copy())


class ScalarField(_FieldBase):
    """Scalar function on H_n: coefficients of shape (L, D)."""

    def __init__(self, model: GeneratorSet, data=None):
        self.model = model
        if data is None:
            data = np.zeros(model.shape, dtype=complex)
        data = np.asarray(data, dtype=complex)
        if data.shape != model.shape:
            raise ValueError(f"scalar data must have shape {model.shape}, got {data.shape}")
        self.data = data

    degree = None

    def _new(self, data):
        return ScalarField(self.model, data)

    def slice(self, l: int) -> np.ndarray:
        return self.data[l]

    @classmethod
    def basis_vector(cls, model, alpha, lam=None):
        """``e_alpha`` on the slice ``lam`` (on every slice if ``lam`` is None)."""
        alpha = tuple(alpha) if np.iterable(alpha) else (int(alpha),) + (0,) * (model.n - 1)
        idx = [tuple(a) for a in model.alphas].index(alpha)
        data = np.zeros(model.shape, dtype=complex)
        if lam is None:
            data[:, idx] = 1
        else:
            data[slice_index(model, lam), idx] = 1
        return cls(model, data)

    def to_json(self) -> dict:
        return {"re": self.data.real.tolist(), "im": self.data.imag.tolist()}


class FormField(_FieldBase):
    """k-form field: coefficients of shape (L, nwords, D) over ``degree_basis(n, k)``."""

    def __init__(self, model: GeneratorSet, degree: int, data=None):
        self.model = model
        self.degree = int(degree)
        if not 0 <= self.degree <= 2 * model.n + 1:
            raise ext.DegreeError(f"degree {degree} out of range for H_{model.n}")
        shape = (model.L, len(self.basis), model.D)
        if data is None:
            data = np.zeros(shape, dtype=complex)
        data = np.asarray(data, dtype=complex)
        if data.shape != shape:
            raise ValueError(f"form data must have shape {shape}, got {data.shape}")
        self.data = data

    def _new(self, data):
        return FormField(self.model, self.degree, data)

    @property
    def basis(self):
        return ext.degree_basis(self.model.n, self.degree)

    def component(self, word: ext.BasisWord) -> ScalarField:
        return ScalarField(self.model, self.data[:, self.basis.index(word)])

    @classmethod
    def from_scalar(cls, f: ScalarField) -> "FormField":
        return cls(f.model, 0, f.data[:, None, :].copy())

    def to_scalar(self) -> ScalarField:
        if self.degree != 0:
            raise ext.DegreeError("only 0-form fields convert to scalars")
        return ScalarField(self.model, self.data[:, 0])

    @classmethod
    def from_components(cls, model, comps: dict) -> "FormField":
        """Build from ``{BasisWord: ScalarField}``; all words must share a degree."""
        degrees = {w.degree for w in comps}
        if len(degrees) != 1:
            raise ext.DegreeError(f"mixed degrees {sorted(degrees)}")
        out = cls(model, degrees.pop())
        for w, f in comps.items():
            out.data[:, out.basis.index(w)] += f.data
        return out

    @classmethod
    def from_form(cls, model, form: ext.Form, f: ScalarField) -> "FormField":
        """Constant form times a scalar field."""
        if form.n != model.n:
            raise ext.DimensionError("form and model have different n")
        degrees = form.degrees()
        if len(degrees) > 1:
            raise ext.DegreeError(f"mixed degrees {sorted(degrees)}")
        out = cls(model, degrees.pop() if degrees else 0)
        for w, c in form.coeffs.items():
            out.data[:, out.basis.index(w)] += c * f.data
        return out

    def theta_part(self) -> np.ndarray:
        return np.array([w.theta for w in self.basis])

    def to_json(self) -> dict:
        return {
            "n": self.model.n,
            "degree": self.degree,
            "M": self.model.M,
            "lambdas": self.model.lambdas.tolist(),
            "components": [
                {"word": w.to_json(), "re": self.data[:, i].real.tolist(),
                 "im": self.data[:, i].imag.tolist()}
                for i, w in enumerate(self.basis)
                if np.any(self.data[:, i] != 0)
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, model, obj) -> "FormField":
        if obj.get("n", model.n) != model.n:
            raise ext.DimensionError(f"field is over H_{obj['n']}, model is H_{model.n}")
        if "lambdas" in obj and not np.allclose(obj["lambdas"], model.lambdas, rtol=0, atol=0):
            raise ValueError("field lambda grid does not match the model")
        if "M" in obj and obj["M"] != model.M:
            raise ValueError(f"field truncation M={obj['M']} does not match model M={model.M}")
        out = cls(model, obj["degree"])
        for comp in obj["components"]:
            w = ext.BasisWord.from_json(model.n, comp["word"])
            out.data[:, out.basis.index(w)] = np.array(comp["re"]) + 1j * np.array(comp["im"])
        return out


def slice_index(model: GeneratorSet, lam: float) -> int:
    hits = np.flatnonzero(model.lambdas == lam)
    if hits.size == 0:
        raise KeyError(f"lambda={lam} is not on the grid")
    return int(hits[0])


def as_form(x) -> FormField:
    return FormField.from_scalar(x) if isinstance(x, ScalarField) else x


# -- random inputs ----------------------------------------------------------

def random_scalar(model, rng, max_level=None) -> ScalarField:
    """Gaussian coefficients on Fock levels ``<= max_level`` (default M - n)."""
    max_level = safe_grade(model) if max_level is None else max_level
    data = rng.standard_normal(model.shape) + 1j * rng.standard_normal(model.shape)
    data[:, model.levels > max_level] = 0
    return ScalarField(model, data)


def random_form(model, degree, rng, max_grade=None, horizontal=False) -> FormField:
    """Gaussian form field supported on grades ``<= max_grade`` (default M - n)."""
    max_grade = safe_grade(model) if max_grade is None else max_grade
    f = FormField(model, degree)
    shape = f.data.shape
    data = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    data[model.grades(degree) > max_grade] = 0
    if horizontal:
        data[:, f.theta_part()] = 0
    f.data = data
    return f


# -- operator assembly ------------------------------------------------------

def apply_coef(G, data: np.ndarray) -> np.ndarray:
    """Apply a per-slice coefficient to ``data`` of shape (L, W, D).

    ``G`` is a (L, D, D) matrix, a (L, D) diagonal or a (L,) scalar.
    """
    G = np.asarray(G)
    if G.ndim == 3:
        return np.einsum("lde,lwe->lwd", G, data)
    if G.ndim == 2:
        return G[:, None, :] * data
    return G[:, None, None] * data


def apply_terms(terms, data: np.ndarray, n_out: int) -> np.ndarray:
    """Sum of ``E ⊗ G`` over ``terms``; E acts on the word axis."""
    L, _, D = data.shape
    out = np.zeros((L, n_out, D), dtype=complex)
    for E, G in terms:
        if not np.any(E):
            continue
        out += np.einsum("ow,lwd->lod", E, apply_coef(G, data))
    return out


def _E(n, op, k):
    return ext.degree_matrix(n, op, k)


def horizontal_terms(model, k, which):
    """Terms of del_b, delbar_b or their adjoints on degree-k forms."""
    n = model.n
    terms = []
    for j in range(1, n + 1):
        if which == "del":
            terms.append((_E(n, ("e", j), k), model.B[:, j - 1]))
        elif which == "delbar":
            terms.append((_E(n, ("e", n + j), k), model.Bbar[:, j - 1]))
        elif which == "del*":
            terms.append((_E(n, ("i", j), k), -model.Bbar[:, j - 1]))
        elif which == "delbar*":
            terms.append((_E(n, ("i", n + j), k), -model.B[:, j - 1]))
        else:
            raise ValueError(f"unknown horizontal operator {which!r}")
    return terms


def d_terms(model, k):
    n = model.n
    return (
        horizontal_terms(model, k, "del")
        + horizontal_terms(model, k, "delbar")
        + [(_E(n, ("e", 0), k), model.T)]
        + [(_E(n, ("e_dtheta",), k - 1) @ _E(n, ("i", 0), k), np.ones(model.L))]
    )


def d_star_terms(model, k):
    n = model.n
    return (
        horizontal_terms(model, k, "del*")
        + horizontal_terms(model, k, "delbar*")
        + [(_E(n, ("i", 0), k), np.conj(model.T))]
        + [(_E(n, ("e", 0), k - 2) @ _E(n, ("i_dtheta",), k), np.ones(model.L))]
    )


def _check_degree(omega, lo, hi, name):
    if not lo <= omega.degree <= hi:
        raise ext.DegreeError(f"{name} needs degree in [{lo}, {hi}], got {omega.degree}")


def apply_d(omega, k: int | None = None) -> FormField:
    """Exterior derivative of a k-form field."""
    omega = as_form(omega)
    k = omega.degree if k is None else k
    if k != omega.degree:
        raise ext.DegreeError(f"expected degree {k}, got {omega.degree}")
    _check_degree(omega, 0, 2 * omega.model.n, "d")
    nout = len(ext.degree_basis(omega.model.n, k + 1))
    return FormField(omega.model, k + 1, apply_terms(d_terms(omega.model, k), omega.data, nout))


def apply_d_star(omega, k: int | None = None) -> FormField:
    """Formal adjoint of :func:`apply_d` for the model inner product."""
    k = omega.degree if k is None else k
    if k != omega.degree:
        raise ext.DegreeError(f"expected degree {k}, got {omega.degree}")
    _check_degree(omega, 1, 2 * omega.model.n + 1, "d*")
    nout = len(ext.degree_basis(omega.model.n, k - 1))
    out = FormField(omega.model, k - 1, apply_terms(d_star_terms(omega.model, k), omega.data, nout))
    return out


# -- scalar operators -------------------------------------------------------

SCALAR_OPS = ("B", "Bbar", "T", "X", "Y", "L", "Delta0", "Box", "Boxbar")


def scalar_symbol(model, op_id: str) -> np.ndarray:
    """Diagonal symbol (L, D) of L, Delta0, Box or Boxbar."""
    lam = model.lambdas[:, None]
    n = model.n
    if op_id == "L":
        return model.xi
    if op_id == "Delta0":
        return model.xi + lam ** 2
    if op_id == "Box":
        return 0.5 * (model.xi - n * lam)
    if op_id == "Boxbar":
        return 0.5 * (model.xi + n * lam)
    raise ValueError(f"{op_id!r} is not a diagonal scalar operator")


def apply_invariant_scalar_op(model, op_id: str, f: ScalarField, j: int | None = None) -> ScalarField:
    if op_id not in SCALAR_OPS:
        raise ValueError(f"unknown scalar operator {op_id!r}; expected one of {SCALAR_OPS}")
    if op_id in ("B", "Bbar", "X", "Y"):
        if j is None or not 1 <= j <= model.n:
            raise ValueError(f"{op_id} needs an index j in 1..{model.n}")
        mat = {
            "B": lambda: model.B[:, j - 1],
            "Bbar": lambda: model.Bbar[:, j - 1],
            "X": lambda: model.X(j),
            "Y": lambda: model.Y(j),
        }[op_id]()
        return ScalarField(model, np.einsum("lde,le->ld", mat, f.data))
    if op_id == "T":
        return ScalarField(model, model.T[:, None] * f.data)
    return ScalarField(model, scalar_symbol(model, op_id) * f.data)


def apply_scalar_symbol(f: ScalarField, symbol: np.ndarray) -> ScalarField:
    return ScalarField(f.model, symbol * f.data)


# -- CR operators on form fields --------------------------------------------

CR_OPS = ("del_b", "delbar_b", "del_b*", "delbar_b*", "d_H", "d_H*", "Box", "Boxbar", "Delta_H")
_SHIFT = {"del_b": 1, "delbar_b": 1, "d_H": 1, "del_b*": -1, "delbar_b*": -1, "d_H*": -1}


def _word_pq(model, degree):
    basis = ext.degree_basis(model.n, degree)
    p = np.array([len(w.I) for w in basis])
    q = np.array([len(w.Ib) for w in basis])
    return p, q


def cr_symbol(model, op_id, degree) -> np.ndarray:
    """Componentwise symbol (L, W, D) of Box, Boxbar or Delta_H on (p,q)-words."""
    p, q = _word_pq(model, degree)
    lam = model.lambdas[:, None, None]
    xi = model.xi[:, None, :]
    n = model.n
    iT = -lam  # i * (i lambda)
    if op_id == "Box":
        return 0.5 * xi + (n / 2 - p)[None, :, None] * iT
    if op_id == "Boxbar":
        return 0.5 * xi - (n / 2 - q)[None, :, None] * iT
    if op_id == "Delta_H":
        return xi + (q - p)[None, :, None] * iT
    raise ValueError(op_id)


def apply_cr_op(model, op_id: str, omega) -> FormField:
    """CR operators; Box, Boxbar and Delta_H act on horizontal forms componentwise."""
    if op_id not in CR_OPS:
        raise ValueError(f"unknown CR operator {op_id!r}; expected one of {CR_OPS}")
    omega = as_form(omega)
    k = omega.degree
    if op_id in ("Box", "Boxbar", "Delta_H"):
        return omega._new(cr_symbol(model, op_id, k) * omega.data)
    shift = _SHIFT[op_id]
    if not 0 <= k + shift <= 2 * model.n + 1:
        raise ext.DegreeError(f"{op_id} leaves the exterior algebra from degree {k}")
    if op_id == "d_H":
        terms = horizontal_terms(model, k, "del") + horizontal_terms(model, k, "delbar")
    elif op_id == "d_H*":
        terms = horizontal_terms(model, k, "del*") + horizontal_terms(model, k, "delbar*")
    else:
        which = {"del_b": "del", "delbar_b": "delbar", "del_b*": "del*", "delbar_b*": "delbar*"}[op_id]
        terms = horizontal_terms(model, k, which)
    nout = len(ext.degree_basis(model.n, k + shift))
    return FormField(model, k + shift, apply_terms(terms, omega.data, nout))


def apply_exterior(omega: FormField, op: tuple) -> FormField:
    """Constant exterior operator (e, i, e_dtheta, i_dtheta) on a form field."""
    k = omega.degree
    k2 = k + ext.op_degree_shift(op)
    if not 0 <= k2 <= 2 * omega.model.n + 1:
        return None
    E = ext.degree_matrix(omega.model.n, op, k)
    return FormField(omega.model, k2, np.einsum("ow,lwd->lod", E, omega.data))


def split_theta(omega: FormField) -> tuple[FormField, FormField | None]:
    """``omega = omega1 + theta ^ omega2`` with omega1, omega2 horizontal."""
    if omega.degree == 0:
        return omega, None
    omega2 = apply_exterior(omega, ("i", 0))
    omega1 = omega - apply_exterior(omega2, ("e", 0))
    return omega1, omega2


def join_theta(omega1: FormField, omega2: FormField | None) -> FormField:
    if omega2 is None:
        return omega1
    return omega1 + apply_exterior(omega2, ("e", 0))


# -- Laplacians -------------------------------------------------------------

def apply_hodge(k: int, omega) -> FormField | ScalarField:
    """Delta_0 as a diagonal symbol, or Delta_1 by the explicit 3-block form.

    On a 1-form ``omega_+ + omega_- + h theta`` the block form reads

        (Delta0 - iT) omega_+ - i del_b h
        (Delta0 + iT) omega_- + i delbar_b h
        i del_b* omega_+ - i delbar_b* omega_- + (Delta0 + n) h
    """
    if k == 0:
        if isinstance(omega, ScalarField):
            return apply_scalar_symbol(omega, omega.model.delta0)
        if omega.degree != 0:
            raise ext.DegreeError("apply_hodge(0, .) needs a 0-form")
        return omega._new(omega.model.delta0[:, None, :] * omega.data)
    if k != 1:
        raise NotImplementedError("only k = 0, 1 have closed forms; use d and d* for general k")
    if omega.degree != 1:
        raise ext.DegreeError(f"apply_hodge(1, .) needs a 1-form, got degree {omega.degree}")
    model = omega.model
    n = model.n
    d0 = model.delta0
    lam = model.lambdas[:, None]
    x = omega.data
    h = x[:, 0]
    up = x[:, 1:n + 1]
    dn = x[:, n + 1:]
    out = np.zeros_like(x)
    iT = -lam
    out[:, 1:n + 1] = (d0 - iT)[:, None, :] * up - 1j * np.einsum("ljde,le->ljd", model.B, h)
    out[:, n + 1:] = (d0 + iT)[:, None, :] * dn + 1j * np.einsum("ljde,le->ljd", model.Bbar, h)
    del_star = -np.einsum("ljde,lje->ld", model.Bbar, up)
    delbar_star = -np.einsum("ljde,lje->ld", model.B, dn)
    out[:, 0] = 1j * del_star - 1j * delbar_star + (d0 + n) * h
    return omega._new(out)


def apply_hodge_composed(omega: FormField) -> FormField:
    """``d d* + d* d`` on a k-form field (k >= 1), or ``d* d`` on 0-forms."""
    k = omega.degree
    out = apply_d_star(apply_d(omega)) if k < 2 * omega.model.n + 1 else None
    if k >= 1:
        dd = apply_d(apply_d_star(omega))
        out = dd if out is None else out + dd
    return out


def apply_block_laplacian(omega: FormField) -> FormField:
    """Hodge Laplacian assembled blockwise from horizontal operators.

    In the splitting ``omega = omega1 + theta ^ omega2``:

        [ Delta_H - T^2 + e(dθ)i(dθ)    [d_H*, e(dθ)]              ]
        [ [i(dθ), d_H]                  Delta_H - T^2 + i(dθ)e(dθ) ]

    with ``Delta_H = d_H d_H* + d_H* d_H`` computed by composition.
    """
    model = omega.model
    top = 2 * model.n

    def dH(x):
        return apply_cr_op(model, "d_H", x) if x.degree < top else None

    def dHs(x):
        return apply_cr_op(model, "d_H*", x) if x.degree > 0 else None

    def add(*xs):
        xs = [x for x in xs if x is not None]
        out = xs[0]
        for x in xs[1:]:
            out = out + x
        return out

    def delta_H(x):
        a = dHs(dH(x)) if x.degree < top else None
        b = dH(dHs(x)) if x.degree > 0 else None
        return add(a, b)

    def minus_T2(x):
        return x._new(model.lambdas[:, None, None] ** 2 * x.data)

    def e_(x):
        return apply_exterior(x, ("e_dtheta",))

    def i_(x):
        return apply_exterior(x, ("i_dtheta",))

    def compose(f, g, x):
        y = g(x)
        return None if y is None else f(y)

    def diag(x, first):
        parts = [delta_H(x), minus_T2(x)]
        if first:
            parts.append(compose(e_, i_, x))
        else:
            parts.append(compose(i_, e_, x))
        return add(*parts)

    def comm(f, g, x, like):
        a, b = compose(f, g, x), compose(g, f, x)
        if a is None and b is None:
            return like._new(np.zeros_like(like.data))
        if b is None:
            return a
        if a is None:
            return -b
        return a - b

    omega1, omega2 = split_theta(omega)
    # zero template for the theta block of degree k-1
    if omega2 is None:
        return diag(omega1, True)
    new1 = add(diag(omega1, True), comm(dHs, e_, omega2, omega1))
    new2 = add(diag(omega2, False), comm(i_, dH, omega1, omega2))
    return join_theta(new1, new2)


# -- truncation bookkeeping -------------------------------------------------

RAISE = {
    "B": 1, "Bbar": 1, "X": 1, "Y": 1,
    "T": 0, "L": 0, "Delta0": 0, "Box": 0, "Boxbar": 0,
    "d": 1, "d*": 1, "del_b": 1, "delbar_b": 1, "del_b*": 1, "delbar_b*": 1,
    "Delta1": 1,
}


def safe_band(op_chain, M: int) -> tuple[int, int]:
    """Fock-level band ``(lo, hi)`` on which ``op_chain`` is exactly represented.

    Each operator may raise the level by at most one; Delta1 preserves the
    weight grade and is exact on grades up to M - 1.
    """
    unknown = [op for op in op_chain if op not in RAISE]
    if unknown:
        raise ValueError(f"no weight displacement declared for {unknown}")
    hi = M - sum(RAISE[op] for op in op_chain)
    return 0, max(hi, -1)


def dimension(n: int, M: int) -> int:
    return comb(M + n, n)
