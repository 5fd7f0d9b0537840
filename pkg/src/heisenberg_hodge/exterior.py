"""Constant-coefficient exterior algebra on the Heisenberg coframe.

Generators are encoded by integer codes: ``0`` is the contact form theta,
``j`` (1..n) is beta_j and ``n + j`` is betabar_j.  Basis words are kept in
canonical order -- theta first, then the beta factors ascending, then the
betabar factors ascending -- which is exactly the numerical order of the
codes, so sorting a code sequence (and tracking the permutation sign) puts
any product into canonical form.

The words ``beta^I ^ betabar^I'`` and ``theta ^ beta^J ^ betabar^J'`` are
orthonormal for the hermitian inner product.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

PRUNE_TOL = 1e-12


class DimensionError(ValueError):
    """Operands live over Heisenberg groups of different dimension."""


class DegreeError(ValueError):
    """A form does not have the (bi)degree an operation requires."""


def _check_subset(idx, n, name):
    idx = tuple(int(i) for i in idx)
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValueError(f"{name} must be strictly increasing, got {idx}")
    if idx and (idx[0] < 1 or idx[-1] > n):
        raise ValueError(f"{name} indices must lie in 1..{n}, got {idx}")
    return idx


@dataclass(frozen=True, order=True)
class BasisWord:
    """``theta^[has_theta] ^ beta^I ^ betabar^Ib`` over H_n."""

    n: int
    I: tuple = ()
    Ib: tuple = ()
    theta: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        object.__setattr__(self, "I", _check_subset(self.I, self.n, "I"))
        object.__setattr__(self, "Ib", _check_subset(self.Ib, self.n, "Ib"))
        object.__setattr__(self, "theta", bool(self.theta))

    @property
    def degree(self) -> int:
        return len(self.I) + len(self.Ib) + int(self.theta)

    @property
    def bidegree(self) -> tuple[int, int]:
        return len(self.I), len(self.Ib)

    @property
    def gens(self) -> tuple[int, ...]:
        head = (0,) if self.theta else ()
        return head + self.I + tuple(self.n + j for j in self.Ib)

    @classmethod
    def from_gens(cls, n: int, gens) -> "BasisWord":
        gens = tuple(sorted(gens))
        return cls(
            n,
            tuple(g for g in gens if 1 <= g <= n),
            tuple(g - n for g in gens if g > n),
            0 in gens,
        )

    def to_json(self) -> list:
        return [list(self.I), list(self.Ib), self.theta]

    @classmethod
    def from_json(cls, n: int, obj) -> "BasisWord":
        I, Ib, theta = obj
        return cls(n, tuple(I), tuple(Ib), bool(theta))

    def __str__(self):
        parts = (["θ"] if self.theta else []) + [f"β{i}" for i in self.I]
        parts += [f"β̄{i}" for i in self.Ib]
        return "∧".join(parts) if parts else "1"


def sort_sign(seq) -> tuple[int, tuple]:
    """Sign of the permutation sorting ``seq``; 0 if a code repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0, ()
    inversions = sum(1 for a, b in itertools.combinations(seq, 2) if a > b)
    return (-1) ** inversions, tuple(sorted(seq))


def wedge_words(a: BasisWord, b: BasisWord) -> tuple[int, BasisWord | None]:
    if a.n != b.n:
        raise DimensionError(f"wedge of words over H_{a.n} and H_{b.n}")
    sign, gens = sort_sign(a.gens + b.gens)
    if sign == 0:
        return 0, None
    return sign, BasisWord.from_gens(a.n, gens)


def contract_word(gen: int, w: BasisWord) -> tuple[int, BasisWord | None]:
    """Interior product by the dual of generator ``gen`` (removal from the left)."""
    gens = w.gens
    if gen not in gens:
        return 0, None
    pos = gens.index(gen)
    rest = gens[:pos] + gens[pos + 1:]
    return (-1) ** pos, BasisWord.from_gens(w.n, rest)


def epsilon_sign(j: int, I, J) -> int:
    """Sign for moving ``j`` from the left of ``I`` into position inside ``J``.

    Zero unless ``j`` is not in ``I`` and ``{j} | I == J``.
    """
    I, J = set(I), set(J)
    if j in I or I | {j} != J:
        return 0
    sign = 1
    for i in I:
        sign *= 1 if i > j else -1
    return sign


class Form:
    """Finite linear combination of basis words with complex coefficients."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs=None):
        self.n = int(n)
        self.coeffs: dict[BasisWord, complex] = {}
        for w, c in (coeffs or {}).items():
            if w.n != self.n:
                raise DimensionError(f"word over H_{w.n} in a form over H_{self.n}")
            c = complex(c)
            if abs(c) > PRUNE_TOL:
                self.coeffs[w] = self.coeffs.get(w, 0) + c
        self.coeffs = {w: c for w, c in self.coeffs.items() if abs(c) > PRUNE_TOL}

    @classmethod
    def scalar(cls, n, c=1.0):
        return cls(n, {BasisWord(n): c})

    @classmethod
    def word(cls, w: BasisWord, c=1.0):
        return cls(w.n, {w: c})

    @classmethod
    def beta(cls, n, j):
        return cls.word(BasisWord(n, (j,)))

    @classmethod
    def betabar(cls, n, j):
        return cls.word(BasisWord(n, (), (j,)))

    @classmethod
    def theta(cls, n):
        return cls.word(BasisWord(n, theta=True))

    @classmethod
    def dtheta(cls, n):
        """``-i sum_j beta_j ^ betabar_j``."""
        return cls(n, {BasisWord(n, (j,), (j,)): -1j for j in range(1, n + 1)})

    def _check(self, other):
        if not isinstance(other, Form):
            raise TypeError(f"expected Form, got {type(other).__name__}")
        if other.n != self.n:
            raise DimensionError(f"forms over H_{self.n} and H_{other.n}")

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for w, c in other.coeffs.items():
            out[w] = out.get(w, 0) + c
        return Form(self.n, out)

    def __neg__(self):
        return Form(self.n, {w: -c for w, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, Form):
            return wedge(self, c)
        return Form(self.n, {w: c * v for w, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Form) and self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.coeffs.items()))))

    def __repr__(self):
        if not self.coeffs:
            return f"Form(n={self.n}, 0)"
        terms = " + ".join(f"({c:.6g}){w}" for w, c in sorted(self.coeffs.items()))
        return f"Form(n={self.n}, {terms})"

    def is_zero(self, tol=PRUNE_TOL) -> bool:
        return all(abs(c) <= tol for c in self.coeffs.values())

    def degrees(self) -> set[int]:
        return {w.degree for w in self.coeffs}

    def bidegrees(self) -> set[tuple[int, int, bool]]:
        return {(*w.bidegree, w.theta) for w in self.coeffs}

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.coeffs.values())))

    def allclose(self, other, tol=1e-12) -> bool:
        return (self - other).norm() <= tol

    def to_vector(self, basis) -> np.ndarray:
        index = {w: i for i, w in enumerate(basis)}
        vec = np.zeros(len(basis), dtype=complex)
        for w, c in self.coeffs.items():
            if w not in index:
                raise DegreeError(f"{w} is not in the requested basis")
            vec[index[w]] = c
        return vec

    @classmethod
    def from_vector(cls, n, basis, vec):
        return cls(n, {w: c for w, c in zip(basis, vec)})

    def to_json(self) -> list:
        return [
            {"word": w.to_json(), "re": c.real, "im": c.imag}
            for w, c in sorted(self.coeffs.items())
        ]

    def dumps(self) -> str:
        return json.dumps({"n": self.n, "terms": self.to_json()})

    @classmethod
    def from_json(cls, n, terms) -> "Form":
        return cls(n, {BasisWord.from_json(n, t["word"]): complex(t["re"], t["im"]) for t in terms})


def wedge(a: Form, b: Form) -> Form:
    if a.n != b.n:
        raise DimensionError(f"wedge of forms over H_{a.n} and H_{b.n}")
    out: dict[BasisWord, complex] = {}
    for wa, ca in a.coeffs.items():
        for wb, cb in b.coeffs.items():
            sign, w = wedge_words(wa, wb)
            if sign:
                out[w] = out.get(w, 0) + sign * ca * cb
    return Form(a.n, out)


def contract(gen: int, form: Form) -> Form:
    out: dict[BasisWord, complex] = {}
    for w, c in form.coeffs.items():
        sign, w2 = contract_word(gen, w)
        if sign:
            out[w2] = out.get(w2, 0) + sign * c
    return Form(form.n, out)


def e_dtheta(form: Form) -> Form:
    return wedge(Form.dtheta(form.n), form)


def i_dtheta(form: Form) -> Form:
    """Adjoint of :func:`e_dtheta`: ``i sum_j betabar_j ⌟ (beta_j ⌟ form)``."""
    n = form.n
    out = Form(n)
    for j in range(1, n + 1):
        out = out + contract(n + j, contract(j, form))
    return 1j * out


def hermitian_inner(a: Form, b: Form) -> complex:
    """Linear in ``a``, antilinear in ``b``."""
    if a.n != b.n:
        raise DimensionError(f"inner product of forms over H_{a.n} and H_{b.n}")
    return complex(sum(c * np.conj(b.coeffs[w]) for w, c in a.coeffs.items() if w in b.coeffs))


# -- matrix representations -------------------------------------------------

@lru_cache(maxsize=None)
def degree_basis(n: int, k: int) -> tuple[BasisWord, ...]:
    """All words of degree ``k`` in canonical (lexicographic code) order."""
    if k < 0 or k > 2 * n + 1:
        return ()
    return tuple(BasisWord.from_gens(n, c) for c in itertools.combinations(range(2 * n + 1), k))


@lru_cache(maxsize=None)
def bidegree_basis(n: int, p: int, q: int) -> tuple[BasisWord, ...]:
    if p < 0 or q < 0 or p > n or q > n:
        return ()
    return tuple(
        BasisWord(n, I, Ib)
        for I in itertools.combinations(range(1, n + 1), p)
        for Ib in itertools.combinations(range(1, n + 1), q)
    )


def _word_index(basis):
    return {w: i for i, w in enumerate(basis)}


@lru_cache(maxsize=None)
def exterior_matrix(n: int, op: tuple, basis_in: tuple, basis_out: tuple) -> np.ndarray:
    """Matrix of a constant exterior operator between two word bases.

    ``op`` is ``("e", g)`` (left wedge with generator g), ``("i", g)``
    (contraction), ``("e_dtheta",)`` or ``("i_dtheta",)``.
    """
    mat = np.zeros((len(basis_out), len(basis_in)), dtype=complex)
    out_index = _word_index(basis_out)
    for col, w in enumerate(basis_in):
        img = _apply_op_word(n, op, w)
        for w2, c in img.coeffs.items():
            if w2 not in out_index:
                raise DegreeError(f"{op} maps {w} outside the target basis")
            mat[out_index[w2], col] += c
    return mat


def _apply_op_word(n, op, w):
    f = Form.word(w)
    kind = op[0]
    if kind == "e":
        return wedge(Form.word(BasisWord.from_gens(n, (op[1],))), f)
    if kind == "i":
        return contract(op[1], f)
    if kind == "e_dtheta":
        return e_dtheta(f)
    if kind == "i_dtheta":
        return i_dtheta(f)
    raise ValueError(f"unknown exterior operator {op!r}")


def op_degree_shift(op: tuple) -> int:
    return {"e": 1, "i": -1, "e_dtheta": 2, "i_dtheta": -2}[op[0]]


def degree_matrix(n: int, op: tuple, k: int) -> np.ndarray:
    """Matrix of ``op`` from degree-k words to degree-(k+shift) words."""
    return exterior_matrix(n, tuple(op), degree_basis(n, k), degree_basis(n, k + op_degree_shift(op)))


def edtheta_bidegree(n: int, p: int, q: int) -> np.ndarray:
    """e(dθ) : Λ^{p,q} → Λ^{p+1,q+1}."""
    return exterior_matrix(n, ("e_dtheta",), bidegree_basis(n, p, q), bidegree_basis(n, p + 1, q + 1))


def idtheta_bidegree(n: int, p: int, q: int) -> np.ndarray:
    """i(dθ) : Λ^{p,q} → Λ^{p-1,q-1}."""
    return exterior_matrix(n, ("i_dtheta",), bidegree_basis(n, p, q), bidegree_basis(n, p - 1, q - 1))


# -- Lefschetz decomposition ------------------------------------------------

@dataclass(frozen=True)
class LefschetzComponent:
    j: int
    form: Form
    p: int
    q: int

    @property
    def lifted(self) -> Form:
        """``e(dθ)^j`` applied to the primitive piece."""
        out = self.form
        for _ in range(self.j):
            out = e_dtheta(out)
        return out


def pure_bidegree(form: Form) -> tuple[int, int]:
    kinds = form.bidegrees()
    if any(theta for _, _, theta in kinds):
        raise DegreeError("Lefschetz decomposition needs a horizontal form")
    if len(kinds) != 1:
        raise DegreeError(f"form has mixed bidegrees {sorted(kinds)}")
    p, q, _ = kinds.pop()
    return p, q


def lefschetz_decompose(form: Form, p: int | None = None, q: int | None = None) -> list[LefschetzComponent]:
    """Split a (p,q)-form into ``sum_j e(dθ)^j ω_j`` with ``i(dθ) ω_j = 0``.

    Each step removes the component orthogonal to the range of e(dθ) and
    recovers the preimage through the pseudo-inverse restricted to the
    bidegree; the lifted pieces are mutually orthogonal.
    """
    n = form.n
    if form.is_zero():
        return []
    fp, fq = pure_bidegree(form)
    if (p is not None and p != fp) or (q is not None and q != fq):
        raise DegreeError(f"form has bidegree ({fp},{fq}), not ({p},{q})")
    p, q = fp, fq
    scale = form.norm()
    cur = form.to_vector(bidegree_basis(n, p, q))
    comps = []
    j = 0
    while True:
        pj, qj = p - j, q - j
        basis = bidegree_basis(n, pj, qj)
        if pj >= 1 and qj >= 1:
            E = edtheta_bidegree(n, pj - 1, qj - 1)
            alpha = np.linalg.pinv(E) @ cur
            primitive = cur - E @ alpha
        else:
            alpha, primitive = None, cur
        comp = LefschetzComponent(j, Form.from_vector(n, basis, primitive), pj, qj)
        if comp.lifted.norm() > PRUNE_TOL * max(scale, 1.0):
            comps.append(comp)
        if alpha is None or np.linalg.norm(alpha) <= PRUNE_TOL * max(scale, 1.0):
            break
        cur = alpha
        j += 1
    return comps


def lefschetz_range(n: int, p: int, q: int) -> range:
    """Indices j with non-trivial V_j^{p,q}."""
    k = p + q
    return range(max(0, k - n), min(p, q) + 1)


def null_space(mat: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    if mat.shape[0] == 0:
        return np.eye(mat.shape[1], dtype=complex)
    _, s, vh = np.linalg.svd(mat)
    rank = int(np.sum(s > tol * max(1.0, s.max() if s.size else 0.0)))
    return vh[rank:].conj().T


def lefschetz_subspace(n: int, p: int, q: int, j: int) -> np.ndarray:
    """Orthonormal basis (columns, in Λ^{p,q} coordinates) of V_j^{p,q}."""
    pj, qj = p - j, q - j
    if pj < 0 or qj < 0:
        return np.zeros((len(bidegree_basis(n, p, q)), 0), dtype=complex)
    K = null_space(idtheta_bidegree(n, pj, qj)) if pj >= 1 and qj >= 1 else np.eye(
        len(bidegree_basis(n, pj, qj)), dtype=complex)
    img = K
    for i in range(j):
        img = edtheta_bidegree(n, pj + i, qj + i) @ img
    if img.size == 0:
        return img
    u, s, _ = np.linalg.svd(img, full_matrices=False)
    rank = int(np.sum(s > 1e-10))
    return u[:, :rank]


def lefschetz_eigenvalues(n: int, p: int, q: int, j: int) -> tuple[int, int]:
    """Values of e(dθ)i(dθ) and i(dθ)e(dθ) on V_j^{p,q}."""
    k = p + q
    return j * (j + 1 + n - k), (j + 1) * (j + n - k)


def lefschetz_dimensions(n: int, p: int, q: int) -> dict[int, int]:
    return {j: lefschetz_subspace(n, p, q, j).shape[1] for j in range(0, min(p, q) + 1)}


def expected_total_dimension(n: int, p: int, q: int) -> int:
    return comb(n, p) * comb(n, q)
