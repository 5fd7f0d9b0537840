"""Orthogonal splitting of 1-form fields into five Delta_1-invariant parts.

With ``omega = omega_+ + omega_- + h theta`` split by type:

* ``R = d Delta0^{-1/2}`` maps scalars isometrically onto exact forms;
* ``Rhol = del_b Box^{-1/2} (I - Cbar)`` and ``Rantihol = delbar_b Boxbar^{-1/2} (I - C)``
  realise the (1,0) and (0,1) parts of the non-co-closed forms;
* ``Gamma(u, v, h) = Rhol u + Rantihol v + h theta`` identifies the triples
  in ``W = {Cbar u = 0, C v = 0}`` with the complement of the co-closed
  forms, and ``S0``, ``S+``, ``S-`` split W by the eigenvectors of d1.

``Box^{-1/2}`` is set to zero on its kernel ray and always composed with the
matching Szego projection, which is the only place it is ever needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fan
from .exterior import DegreeError
from .oscillator import FormField, GeneratorSet, ScalarField, apply_d, apply_d_star, apply_hodge

W_TOL = 1e-10


class MembershipError(ValueError):
    """A triple or scalar is outside the domain of the operator."""


# -- symbols on the Fock grid -----------------------------------------------

class Symbols:
    """Diagonal symbols of the scalar operators on every (slice, Fock index)."""

    def __init__(self, model: GeneratorSet):
        self.model = model
        n = model.n
        lam = np.broadcast_to(model.lambdas[:, None], model.shape)
        xi = model.xi
        self.lam = lam
        self.xi = xi
        self.delta0 = xi + lam ** 2
        rm, rp = fan.box_radicands(n, lam, xi)
        self.box = 0.5 * rm
        self.boxbar = 0.5 * rp
        ground = (model.levels == 0)[None, :]
        self.Cbar = ((lam > 0) & ground).astype(float)
        self.C = ((lam < 0) & ground).astype(float)
        self.box_isqrt = np.where(self.box > 0, 1 / np.sqrt(np.where(self.box > 0, self.box, 1)), 0.0)
        self.boxbar_isqrt = np.where(self.boxbar > 0, 1 / np.sqrt(np.where(self.boxbar > 0, self.boxbar, 1)), 0.0)
        self.v0, self.vp, self.vm = fan.eigenvectors_of(n, lam, xi)
        self.a = fan.a_of(n, lam, xi)
        self.q = fan.q_of(n, lam, xi)
        eig = fan.eigenvalues_of(n, lam, xi)
        self.phi_plus = eig[..., 1]
        self.phi_minus = eig[..., 2]

    def vector(self, branch):
        return {"0": self.v0, "plus": self.vp, "minus": self.vm}[_branch(branch)]


def symbols(model: GeneratorSet) -> Symbols:
    cached = getattr(model, "_symbols", None)
    if cached is None:
        cached = model._symbols = Symbols(model)
    return cached


def _branch(branch):
    key = {0: "0", "0": "0", "plus": "plus", "+": "plus", "minus": "minus", "-": "minus"}.get(branch)
    if key is None:
        raise ValueError(f"unknown branch {branch!r}")
    return key


def _dir(direction):
    if direction not in ("fwd", "adj"):
        raise ValueError(f"direction must be 'fwd' or 'adj', got {direction!r}")
    return direction


# -- W triples --------------------------------------------------------------

@dataclass
class WTriple:
    u: ScalarField
    v: ScalarField
    h: ScalarField

    @property
    def model(self):
        return self.u.model

    def __add__(self, o):
        return WTriple(self.u + o.u, self.v + o.v, self.h + o.h)

    def __sub__(self, o):
        return WTriple(self.u - o.u, self.v - o.v, self.h - o.h)

    def __mul__(self, c):
        return WTriple(self.u * c, self.v * c, self.h * c)

    __rmul__ = __mul__

    def inner(self, o) -> complex:
        return self.u.inner(o.u) + self.v.inner(o.v) + self.h.inner(o.h)

    def norm(self) -> float:
        return float(np.sqrt(self.u.norm() ** 2 + self.v.norm() ** 2 + self.h.norm() ** 2))

    def stack(self) -> np.ndarray:
        return np.stack([self.u.data, self.v.data, self.h.data], axis=-1)

    @classmethod
    def from_stack(cls, model, arr):
        return cls(*(ScalarField(model, arr[..., i]) for i in range(3)))

    def membership_error(self) -> float:
        """Size of the components on the excluded rays: ``|Cbar u| + |C v|``."""
        s = symbols(self.model)
        return float(np.sqrt((ScalarField(self.model, s.Cbar * self.u.data).norm() ** 2
                              + ScalarField(self.model, s.C * self.v.data).norm() ** 2)))

    def project_to_W(self) -> "WTriple":
        s = symbols(self.model)
        return WTriple(ScalarField(self.model, (1 - s.Cbar) * self.u.data),
                       ScalarField(self.model, (1 - s.C) * self.v.data), self.h)


def random_w_triple(model, rng, max_level=None) -> WTriple:
    from .oscillator import random_scalar
    return WTriple(*(random_scalar(model, rng, max_level) for _ in range(3))).project_to_W()


# -- splitting a 1-form by type ---------------------------------------------

def split_1form(omega: FormField):
    """``(h, omega_+ data (L, n, D), omega_- data (L, n, D))``."""
    if omega.degree != 1:
        raise DegreeError(f"expected a 1-form, got degree {omega.degree}")
    n = omega.model.n
    x = omega.data
    return ScalarField(omega.model, x[:, 0]), x[:, 1:n + 1], x[:, n + 1:]


def join_1form(model, h=None, up=None, dn=None) -> FormField:
    n = model.n
    out = FormField(model, 1)
    if h is not None:
        out.data[:, 0] = h.data
    if up is not None:
        out.data[:, 1:n + 1] = up
    if dn is not None:
        out.data[:, n + 1:] = dn
    return out


def type_part(omega: FormField, which: str) -> FormField:
    """Q+ (the (1,0) part), Q- (the (0,1) part) or the theta part."""
    h, up, dn = split_1form(omega)
    if which == "plus":
        return join_1form(omega.model, up=up)
    if which == "minus":
        return join_1form(omega.model, dn=dn)
    if which == "theta":
        return join_1form(omega.model, h=h)
    raise ValueError(which)


# -- intertwiners -----------------------------------------------------------

def apply_R(direction, x):
    """``R = d Delta0^{-1/2}`` (fwd, on scalars) or ``R* = Delta0^{-1/2} d*`` (adj)."""
    _dir(direction)
    if direction == "fwd":
        s = symbols(x.model)
        return apply_d(ScalarField(x.model, x.data / np.sqrt(s.delta0)))
    s = symbols(x.model)
    f = apply_d_star(x).to_scalar()
    return ScalarField(x.model, f.data / np.sqrt(s.delta0))


def box_inverse_sqrt(f: ScalarField, kind: str = "hol", project: bool = True) -> ScalarField:
    """``Box^{-1/2}(I - Cbar) f`` (kind='hol') or ``Boxbar^{-1/2}(I - C) f``.

    With ``project=False`` the ray component must already vanish.
    """
    s = symbols(f.model)
    ray, isq = (s.Cbar, s.box_isqrt) if kind == "hol" else (s.C, s.boxbar_isqrt)
    if not project:
        on_ray = ScalarField(f.model, ray * f.data).norm()
        if on_ray > W_TOL * max(f.norm(), 1e-300):
            raise fan.DomainError(f"cannot invert on the kernel ray (mass {on_ray:.3e})")
    return ScalarField(f.model, isq * (1 - ray) * f.data)


def apply_Ri(kind, direction, x, project=True):
    """Holomorphic (``del_b`` / Box) or antiholomorphic (``delbar_b`` / Boxbar) intertwiner."""
    _dir(direction)
    if kind not in ("hol", "antihol"):
        raise ValueError(f"kind must be 'hol' or 'antihol', got {kind!r}")
    model = x.model
    if direction == "fwd":
        g = box_inverse_sqrt(x, kind, project=project)
        if kind == "hol":
            return join_1form(model, up=np.einsum("ljde,le->ljd", model.B, g.data))
        return join_1form(model, dn=np.einsum("ljde,le->ljd", model.Bbar, g.data))
    _, up, dn = split_1form(x)
    if kind == "hol":
        f = -np.einsum("ljde,lje->ld", model.Bbar, up)
    else:
        f = -np.einsum("ljde,lje->ld", model.B, dn)
    return box_inverse_sqrt(ScalarField(model, f), kind)


def apply_Gamma(direction, x, check=True):
    """``Gamma(u, v, h) = Rhol u + Rantihol v + h theta`` and its adjoint."""
    _dir(direction)
    if direction == "fwd":
        if check:
            err = x.membership_error()
            if err > W_TOL * max(x.norm(), 1e-300):
                raise MembershipError(f"triple is not in W (ray mass {err:.3e})")
        return apply_Ri("hol", "fwd", x.u) + apply_Ri("antihol", "fwd", x.v) + join_1form(x.model, h=x.h)
    h, _, _ = split_1form(x)
    return WTriple(apply_Ri("hol", "adj", x), apply_Ri("antihol", "adj", x), h)


def apply_S(branch, direction, x, auto_project=False):
    """Multiply by the eigenvector symbol v0, v+ or v- (fwd) or its conjugate (adj).

    S- is only isometric on ``L^2_0`` (no mass on either ray); inputs outside
    it raise unless ``auto_project`` removes the ray components.
    """
    _dir(direction)
    key = _branch(branch)
    model = x.model
    s = symbols(model)
    vec = s.vector(key)
    if direction == "fwd":
        f = x
        if key == "minus":
            rays = s.C + s.Cbar
            mass = ScalarField(model, rays * f.data).norm()
            if auto_project:
                f = ScalarField(model, (1 - rays) * f.data)
            elif mass > W_TOL * max(f.norm(), 1e-300):
                raise MembershipError(f"S- needs Cf = Cbar f = 0 (ray mass {mass:.3e})")
        return WTriple.from_stack(model, vec * f.data[..., None])
    return ScalarField(model, np.sum(np.conj(vec) * x.stack(), axis=-1))


# -- projections ------------------------------------------------------------

PROJECTIONS = ("P1", "P2plus", "P2minus", "PiPlus", "PiMinus", "P3")


def _pi(branch, omega):
    t = apply_Gamma("adj", omega)
    f = apply_S(branch, "adj", t)
    return apply_Gamma("fwd", apply_S(branch, "fwd", f, auto_project=(branch == "minus")), check=False)


def project(space: str, omega: FormField) -> FormField:
    if omega.degree != 1:
        raise DegreeError(f"projections act on 1-forms, got degree {omega.degree}")
    if space == "P1":
        return apply_R("fwd", apply_R("adj", omega))
    if space == "P2plus":
        w = type_part(omega, "plus")
        return w - apply_Ri("hol", "fwd", apply_Ri("hol", "adj", w))
    if space == "P2minus":
        w = type_part(omega, "minus")
        return w - apply_Ri("antihol", "fwd", apply_Ri("antihol", "adj", w))
    if space == "P3":
        return omega - project("P1", omega) - project("P2plus", omega) - project("P2minus", omega)
    if space == "PiPlus":
        return _pi("plus", omega)
    if space == "PiMinus":
        return _pi("minus", omega)
    raise ValueError(f"unknown subspace {space!r}; expected one of {PROJECTIONS}")


# -- decomposition ----------------------------------------------------------

PART_NAMES = ("exact", "coclosed10", "coclosed01", "v3plus", "v3minus")


@dataclass
class DecompositionResult:
    exact: FormField
    coclosed10: FormField
    coclosed01: FormField
    v3plus: FormField
    v3minus: FormField
    residual: float
    diagnostics: dict = field(default_factory=dict)

    def parts(self) -> dict:
        return {k: getattr(self, k) for k in PART_NAMES}

    def total(self) -> FormField:
        out = self.exact
        for k in PART_NAMES[1:]:
            out = out + getattr(self, k)
        return out


def orthogonality(parts: dict) -> float:
    """Max of ``|<a, b>| / (|a| |b|)`` over distinct nonzero parts."""
    names = list(parts)
    worst = 0.0
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            na, nb = parts[a].norm(), parts[b].norm()
            if na == 0 or nb == 0:
                continue
            worst = max(worst, abs(parts[a].inner(parts[b])) / (na * nb))
    return worst


def decompose_1form(omega: FormField, tol: float = 1e-10) -> DecompositionResult:
    if omega.degree != 1:
        raise DegreeError(f"expected a 1-form, got degree {omega.degree}")
    exact = project("P1", omega)
    c10 = project("P2plus", omega)
    c01 = project("P2minus", omega)
    p3 = omega - exact - c10 - c01
    v3p = project("PiPlus", p3)
    v3m = project("PiMinus", p3)
    nrm = omega.norm()
    total = exact + c10 + c01 + v3p + v3m
    residual = (omega - total).norm() / nrm if nrm > 0 else 0.0
    res = DecompositionResult(exact, c10, c01, v3p, v3m, residual)
    ortho = orthogonality(res.parts())
    res.diagnostics = {
        "norms": {k: v.norm() for k, v in res.parts().items()},
        "orthogonality": ortho,
        "residual": residual,
        "ok": bool(residual < tol and ortho < tol),
    }
    return res


def apply_subspace_symbol(name: str, omega: FormField) -> FormField:
    """The action Delta_1 is predicted to have on the named part."""
    model = omega.model
    s = symbols(model)
    if name == "exact":
        f = apply_R("adj", omega)
        return apply_R("fwd", ScalarField(model, s.delta0 * f.data))
    if name in ("coclosed10", "coclosed01"):
        sign = 1 if name == "coclosed10" else -1
        # Delta0 -/+ iT with iT -> -lambda
        return omega._new((s.delta0 + sign * s.lam)[:, None, :] * omega.data)
    if name in ("v3plus", "v3minus"):
        branch = "plus" if name == "v3plus" else "minus"
        phi = s.phi_plus if branch == "plus" else s.phi_minus
        f = apply_S(branch, "adj", apply_Gamma("adj", omega))
        g = ScalarField(model, phi * f.data)
        return apply_Gamma("fwd", apply_S(branch, "fwd", g, auto_project=True), check=False)
    raise ValueError(name)


def subspace_symbol_errors(result: DecompositionResult) -> dict:
    """``|Delta1 part - predicted| / |Delta1 part|`` for every nonzero part."""
    out = {}
    for name, part in result.parts().items():
        lhs = apply_hodge(1, part)
        scale = lhs.norm()
        if scale == 0:
            out[name] = 0.0
            continue
        out[name] = (lhs - apply_subspace_symbol(name, part)).norm() / scale
    return out


def exact_potential(omega: FormField) -> ScalarField:
    """``Delta0^{-1} d* omega``; its differential is the exact part of omega."""
    if omega.degree != 1:
        raise DegreeError(f"expected a 1-form, got degree {omega.degree}")
    s = symbols(omega.model)
    f = apply_d_star(omega).to_scalar()
    return ScalarField(omega.model, f.data / s.delta0)


# -- remark relations -------------------------------------------------------

def w_relations(branch, t: WTriple) -> dict:
    """Residuals of the two linear relations satisfied by members of W0, W+, W-.

    With ``Q[eps, delta] = A + eps n/2 - delta iT`` (symbol ``q[eps, delta]``):

        W0: T u = Box^{1/2} h,            T v = Boxbar^{1/2} h
        W+: Q[+,+] u = -i Box^{1/2} h,    Q[+,-] v = i Boxbar^{1/2} h
        W-: Q[-,-] u = i Box^{1/2} h,     Q[-,+] v = -i Boxbar^{1/2} h
    """
    s = symbols(t.model)
    sb, sbb = np.sqrt(s.box), np.sqrt(s.boxbar)
    u, v, h = t.u.data, t.v.data, t.h.data
    key = _branch(branch)
    if key == "0":
        T = 1j * s.lam
        r1, r2 = T * u - sb * h, T * v - sbb * h
    elif key == "plus":
        r1 = s.q[1, 1] * u + 1j * sb * h
        r2 = s.q[1, -1] * v - 1j * sbb * h
    else:
        r1 = s.q[-1, -1] * u - 1j * sb * h
        r2 = s.q[-1, 1] * v + 1j * sbb * h
    m = t.model
    scale = max(t.norm() * float(np.max(s.a)), 1e-300)
    return {"u": ScalarField(m, r1).norm() / scale, "v": ScalarField(m, r2).norm() / scale}


def q_box_identity(model) -> float:
    """Max residual of ``Q[+,+]Q[-,-] = 2 Box`` and ``Q[+,-]Q[-,+] = 2 Boxbar``."""
    s = symbols(model)
    r1 = np.abs(s.q[1, 1] * s.q[-1, -1] - 2 * s.box) / s.a ** 2
    r2 = np.abs(s.q[1, -1] * s.q[-1, 1] - 2 * s.boxbar) / s.a ** 2
    return float(max(r1.max(), r2.max()))


# -- injectivity ------------------------------------------------------------

def injectivity_audit(points) -> dict:
    """Check ``(d^2 - l^2)(d + n) = d^2 - l^2 (d + n) + d^2 (d + n - 1)`` with ``d = xi + l^2``."""
    lam, xi, n = fan.fan_arrays(points)
    d = xi + lam ** 2
    lhs = (d * d - lam ** 2) * (d + n)
    rhs = d * d - lam ** 2 * (d + n) + d * d * (d + n - 1)
    rel = np.abs(lhs - rhs) / np.maximum(np.abs(lhs), 1e-300)
    key = d * d * (d + n - 1)
    i = int(np.argmin(key))
    return {
        "max_rel_error": float(rel.max()),
        "min_factor": float(key[i]),
        "argmin": {"lambda": float(lam[i]), "xi": float(xi[i])},
        "injective": bool(key[i] > 0),
        "points": len(d),
    }
