"""Symbol calculus on the Heisenberg fan.

A fan point is ``(lambda, xi)`` with ``xi = (n + 2m)|lambda|``.  The 3x3
matrix ``d1`` is the symbol of Delta_1 conjugated into triples ``(u, v, h)``;
its eigenpairs have closed forms in ``a = sqrt(xi + lambda^2 + n^2/4)`` and

    q[eps, delta] = a + eps n/2 + delta lambda.

Every closed form below is evaluated without cancellation: differences such
as ``a - n/2 - lambda`` are rewritten as quotients, so the quantities that
vanish on a Szego ray come out as exact zeros.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """A square root would need a negative argument."""


class PreconditionError(ValueError):
    """Parameters outside the range where a symbol estimate applies."""


RADICAND_TOL = 1e-12


def _sqrt_nonneg(x, scale=1.0):
    """Square root of a radicand that is nonnegative up to rounding."""
    x = np.asarray(x, dtype=float)
    floor = -RADICAND_TOL * np.maximum(1.0, np.asarray(scale, dtype=float))
    if np.any(x < floor):
        raise DomainError(f"negative radicand {np.min(x):.3e}")
    return np.sqrt(np.maximum(x, 0.0))


@dataclass(frozen=True)
class FanPoint:
    lam: float
    m: int
    n: int

    def __post_init__(self):
        if self.lam == 0:
            raise DomainError("lambda = 0 is not a fan point")
        if self.m < 0 or int(self.m) != self.m:
            raise ValueError(f"ray index m must be a natural number, got {self.m}")
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def xi(self) -> float:
        return (self.n + 2 * self.m) * abs(self.lam)


def fan_grid(n: int, lambdas, m_max: int) -> list[FanPoint]:
    lambdas = list(lambdas)
    if not lambdas:
        raise ValueError("empty lambda range")
    if any(l == 0 for l in lambdas):
        raise DomainError("lambda range must exclude 0")
    return [FanPoint(float(l), m, n) for l in lambdas for m in range(m_max + 1)]


def fan_arrays(points) -> tuple[np.ndarray, np.ndarray, int]:
    lam = np.array([p.lam for p in points], dtype=float)
    xi = np.array([p.xi for p in points], dtype=float)
    ns = {p.n for p in points}
    if len(ns) != 1:
        raise ValueError("fan points over different n")
    return lam, xi, ns.pop()


# -- closed forms (vectorized over arrays of lambda, xi) ----------------------

def box_radicands(n, lam, xi):
    """``(xi - n lambda, xi + n lambda)`` with exact zeros on the Szego rays."""
    lam = np.asarray(lam, dtype=float)
    xi = np.asarray(xi, dtype=float)
    L = np.abs(lam)
    low = xi - n * L  # exactly 0 on m = 0 since xi = n|lambda| there
    minus = np.where(lam > 0, low, xi + n * L)
    plus = np.where(lam > 0, xi + n * L, low)
    return minus, plus


def a_of(n, lam, xi):
    return np.sqrt(np.asarray(xi) + np.asarray(lam) ** 2 + n * n / 4)


def q_of(n, lam, xi) -> dict:
    """The four quantities q[eps, delta], keyed ``(+1, +1)`` etc."""
    lam = np.asarray(lam, dtype=float)
    xi = np.asarray(xi, dtype=float)
    a = a_of(n, lam, xi)
    L = np.abs(lam)
    h = n / 2
    big_p = a + h + L  # a + n/2 + |lambda|
    small_p = (xi + h * h) / (a + L) + h  # a + n/2 - |lambda|
    big_m = (xi + L * L) / (a + h) + L  # a - n/2 + |lambda|
    small_m = (xi - n * L) / (a + h + L)  # a - n/2 - |lambda|
    pos = lam >= 0
    return {
        (1, 1): np.where(pos, big_p, small_p),
        (1, -1): np.where(pos, small_p, big_p),
        (-1, 1): np.where(pos, big_m, small_m),
        (-1, -1): np.where(pos, small_m, big_m),
    }


def eigenvalues_of(n, lam, xi) -> np.ndarray:
    """``(d, d + n/2 + a, d + n/2 - a)`` with ``d = xi + lambda^2``; shape (..., 3)."""
    d = np.asarray(xi) + np.asarray(lam) ** 2
    a = a_of(n, lam, xi)
    plus = d + n / 2 + a
    # (d + n/2)^2 - a^2 = d (d + n - 1)
    minus = d * (d + n - 1) / (d + n / 2 + a)
    return np.stack([d, plus, minus], axis=-1)


def eigenvectors_of(n, lam, xi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unit eigenvectors ``v0, v+, v-`` of d1, each of shape (..., 3)."""
    lam = np.asarray(lam, dtype=float)
    xi = np.asarray(xi, dtype=float)
    d = xi + lam ** 2
    a = a_of(n, lam, xi)
    q = q_of(n, lam, xi)
    rm, rp = box_radicands(n, lam, xi)
    s = np.sqrt(d)
    v0 = np.stack([np.sqrt(0.5 * rm) / s, np.sqrt(0.5 * rp) / s, 1j * lam / s], axis=-1)
    qpp, qpm, qmp, qmm = q[1, 1], q[1, -1], q[-1, 1], q[-1, -1]
    c_plus = np.sqrt(2 * a * (a + n / 2))
    vp = np.stack(
        [-1j * np.sqrt(0.5 * qpm * qmm), 1j * np.sqrt(0.5 * qpp * qmp), np.sqrt(qpp * qpm) + 0j],
        axis=-1,
    ) / c_plus[..., None]
    # a - n/2 = d / (a + n/2)
    c_minus = np.sqrt(2 * a * d / (a + n / 2))
    vm = np.stack(
        [1j * np.sqrt(0.5 * qpp * qmp), -1j * np.sqrt(0.5 * qpm * qmm), np.sqrt(qmp * qmm) + 0j],
        axis=-1,
    ) / c_minus[..., None]
    return v0, vp, vm


def d1_matrix(n, lam, xi) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    xi = np.asarray(xi, dtype=float)
    rm, rp = box_radicands(n, lam, xi)
    sm = _sqrt_nonneg(0.5 * rm, xi)
    sp = _sqrt_nonneg(0.5 * rp, xi)
    d = xi + lam ** 2
    out = np.zeros(lam.shape + (3, 3), dtype=complex)
    out[..., 0, 0] = d - lam
    out[..., 1, 1] = d + lam
    out[..., 2, 2] = d + n
    out[..., 0, 2] = -1j * sm
    out[..., 2, 0] = 1j * sm
    out[..., 1, 2] = 1j * sp
    out[..., 2, 1] = -1j * sp
    return out


# -- per-point API ----------------------------------------------------------

def d1_at(pt: FanPoint) -> np.ndarray:
    rm = pt.xi - pt.n * pt.lam
    rp = pt.xi + pt.n * pt.lam
    if min(rm, rp) < -RADICAND_TOL * max(1.0, pt.xi):
        raise DomainError(f"{pt} is not on the fan")
    return d1_matrix(pt.n, np.array(pt.lam), np.array(pt.xi))


@dataclass
class FanEigensystem:
    point: FanPoint
    eigenvalues: np.ndarray  # (d, d + mu+, d + mu-)
    vectors: dict
    projections: dict
    a: float
    q: dict

    def residuals(self) -> dict:
        d1 = d1_at(self.point)
        return {
            k: float(np.linalg.norm(d1 @ v - mu * v))
            for k, v, mu in zip(("0", "+", "-"), self.vectors.values(), self.eigenvalues)
        }

    def to_row(self) -> dict:
        res = self.residuals()
        return {
            "lambda": self.point.lam, "m": self.point.m, "xi": self.point.xi, "a": self.a,
            "q_pp": self.q[1, 1], "q_pm": self.q[1, -1], "q_mp": self.q[-1, 1], "q_mm": self.q[-1, -1],
            "eig_0": self.eigenvalues[0], "eig_plus": self.eigenvalues[1], "eig_minus": self.eigenvalues[2],
            "res_0": res["0"], "res_plus": res["+"], "res_minus": res["-"],
        }


def fan_eigensystem(pt: FanPoint) -> FanEigensystem:
    lam, xi = np.array(pt.lam), np.array(pt.xi)
    v0, vp, vm = eigenvectors_of(pt.n, lam, xi)
    vecs = {"0": v0, "+": vp, "-": vm}
    return FanEigensystem(
        point=pt,
        eigenvalues=eigenvalues_of(pt.n, lam, xi),
        vectors=vecs,
        projections={k: np.outer(v, v.conj()) for k, v in vecs.items()},
        a=float(a_of(pt.n, lam, xi)),
        q={k: float(v) for k, v in q_of(pt.n, lam, xi).items()},
    )


def q_identities(n, lam, xi) -> dict:
    """Relative residuals of the seven product/sum identities among the q's."""
    q = q_of(n, lam, xi)
    a = a_of(n, lam, xi)
    lam = np.asarray(lam, dtype=float)
    rm, rp = box_radicands(n, lam, xi)
    qpp, qpm, qmp, qmm = q[1, 1], q[1, -1], q[-1, 1], q[-1, -1]
    h = n / 2
    sq = a * a
    return {
        "qpp*qmm = xi - n lambda": np.abs(qpp * qmm - rm) / sq,
        "qpm*qmp = xi + n lambda": np.abs(qpm * qmp - rp) / sq,
        "qpp + qmm = 2a": np.abs(qpp + qmm - 2 * a) / a,
        "qpm + qmp = 2a": np.abs(qpm + qmp - 2 * a) / a,
        "qpp*qmp = (a+lambda)^2 - n^2/4": np.abs(qpp * qmp - ((a + lam) ** 2 - h * h)) / sq,
        "qpm*qmm = (a-lambda)^2 - n^2/4": np.abs(qpm * qmm - ((a - lam) ** 2 - h * h)) / sq,
        "qpp*qpm = (a+n/2)^2 - lambda^2": np.abs(qpp * qpm - ((a + h) ** 2 - lam ** 2)) / sq,
        "qmp*qmm = (a-n/2)^2 - lambda^2": np.abs(qmp * qmm - ((a - h) ** 2 - lam ** 2)) / sq,
    }


def ray_vplus(n, lam):
    """v+ on the ray xi = n lambda (lambda > 0) from the general closed form."""
    return np.array([0.0, 1j * np.sqrt(lam / (lam + n)), np.sqrt(n / (lam + n))])


# -- spectral synthesis -----------------------------------------------------

def synth_matrix_multiplier(m, pt: FanPoint) -> np.ndarray:
    """``m(mu_0) p0 + m(mu_+) p+ + m(mu_-) p-`` for a scalar function ``m``."""
    es = fan_eigensystem(pt)
    out = np.zeros((3, 3), dtype=complex)
    for mu, p in zip(es.eigenvalues, es.projections.values()):
        val = complex(m(float(mu)))
        if not np.isfinite(val):
            raise DomainError(f"multiplier undefined at eigenvalue {mu}")
        out += val * p
    return out


def ray_projection_symbol(kind: str, pt: FanPoint) -> int:
    """Symbol of the Szego projection C (ray lambda < 0) or Cbar (lambda > 0)."""
    if kind == "C":
        return int(pt.m == 0 and pt.lam < 0)
    if kind in ("Cbar", "C̄"):
        return int(pt.m == 0 and pt.lam > 0)
    raise ValueError(f"unknown projection {kind!r}")


# -- symbol bounds ----------------------------------------------------------

def symbol_values(symbol_id: str, n: int, lam, xi, r: float = 1.0, alpha: float = 0.0) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if symbol_id in ("mu1", "mu2"):
        if abs(alpha) >= n:
            raise PreconditionError(f"|alpha| = {abs(alpha)} must be < n = {n}")
        den = xi + lam ** 2 - alpha * lam
        num = xi if symbol_id == "mu1" else lam ** 2
        return (num / den) ** r
    rm, rp = box_radicands(n, lam, xi)
    if symbol_id == "szego_minus":  # xi^r / (xi - n lambda)^r off the Cbar ray
        keep = rm > 0
        return np.where(keep, (xi / np.where(keep, rm, 1.0)) ** r, 0.0)
    if symbol_id == "szego_plus":  # xi^r / (xi + n lambda)^r off the C ray
        keep = rp > 0
        return np.where(keep, (xi / np.where(keep, rp, 1.0)) ** r, 0.0)
    raise ValueError(f"unknown symbol {symbol_id!r}")


def symbol_sup_audit(symbol_id: str, params: dict, region) -> float:
    """Sup of ``|symbol|`` over a nonempty list of fan points."""
    region = list(region)
    if not region:
        raise ValueError("empty region")
    lam, xi, n = fan_arrays(region)
    vals = symbol_values(symbol_id, n, lam, xi, r=params.get("r", 1.0), alpha=params.get("alpha", 0.0))
    return float(np.max(np.abs(vals)))


# -- independent oracle -----------------------------------------------------

def jacobi_eigh(A: np.ndarray, tol: float = 1e-15, max_sweeps: int = 50):
    """Cyclic Jacobi eigensolver for a small hermitian matrix.

    Returns ascending eigenvalues and the matrix of column eigenvectors.
    """
    A = np.array(A, dtype=complex)
    if not np.allclose(A, A.conj().T, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ValueError("matrix is not hermitian")
    N = A.shape[0]
    V = np.eye(N, dtype=complex)
    scale = max(np.linalg.norm(A), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(A - np.diag(np.diag(A))) ** 2))
        if off <= tol * scale:
            break
        for p in range(N - 1):
            for q in range(p + 1, N):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                app, aqq = A[p, p].real, A[q, q].real
                tau = (aqq - app) / (2 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1 + tau * tau))
                c = 1 / np.sqrt(1 + t * t)
                s = t * c
                J = np.eye(N, dtype=complex)
                J[p, p] = c
                J[q, q] = c
                J[p, q] = s * phase
                J[q, p] = -s * np.conj(phase)
                A = J.conj().T @ A @ J
                V = V @ J
    w = np.diag(A).real
    order = np.argsort(w)
    return w[order], V[:, order]
