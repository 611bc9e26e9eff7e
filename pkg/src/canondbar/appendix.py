"""Integral representations on the unit bidisc.

Contents: the Bochner-Martinelli reconstruction, the product Cauchy-transform
solution operator (Henkin type), its boundary representation identity, the
bidisc Bergman projection and the canonical solution u - P u.

Measures: dzbar^dz = 2i dA on each factor, dV = (2i)^2 dA_1 dA_2, and dz
along the counterclockwise unit circle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .discgrid import DiscGrid
from .errors import DataError, DomainMembershipError, ParameterError, PreconditionError, SingularityError
from .forms import Form01
from .geometry import TWO_PI, unit_disc
from .product import ProductDomain, ProductField, _FactorRule, _nested, _tensor_points, \
    _tensor_weights, duffy_nodes
from .report import EstimateReport


def unit_bidisc() -> ProductDomain:
    return ProductDomain((unit_disc(), unit_disc()))


def _check_inside(Z, closed=False) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex)
    if Z.shape[-1] != 2:
        raise ParameterError("bidisc points need two coordinates")
    a = np.abs(Z)
    if np.any(a > 1 + 1e-12) or (not closed and np.any(a >= 1.0)):
        raise DomainMembershipError("point outside the open bidisc")
    return Z


@dataclass(frozen=True)
class BidiscField:
    """u on the closed bidisc with optional dbar oracles f_1, f_2 and the mixed
    derivative Df = d f_2 / dzbar_1."""

    u: Callable
    dbar: tuple | None = None
    mixed: Callable | None = None
    name: str = "u"

    def __call__(self, Z):
        v = np.asarray(self.u(np.asarray(Z, dtype=complex)), dtype=complex)
        if not np.all(np.isfinite(v)):
            raise DataError(f"{self.name}: unbounded sample")
        return v

    def form(self) -> Form01:
        if self.dbar is None:
            raise DataError(f"{self.name}: no dbar oracle")
        mixed = self.mixed

        def deriv(k, J, Z):
            if mixed is None:
                raise DataError("no mixed derivative oracle")
            return mixed(Z)

        return Form01(2, tuple(self.dbar), deriv, f"dbar {self.name}")

    @classmethod
    def from_potential(cls, pot, name: str = "u") -> "BidiscField":
        return cls(pot, (lambda Z: pot(Z, (0,)), lambda Z: pot(Z, (1,))),
                   lambda Z: pot(Z, (0, 1)), name)


# -- identity and Bochner-Martinelli ------------------------------------------------------

def cauchy_identity_check(zeta, z):
    """Both sides of 1/((a_1)(a_2)) = conj(a_1)/(a_2 |a|^2) + conj(a_2)/(a_1 |a|^2), a = zeta - z."""
    a = np.asarray(zeta, dtype=complex) - np.asarray(z, dtype=complex)
    if a.shape[-1] != 2:
        raise ParameterError("points need two coordinates")
    if np.any(a == 0):
        raise SingularityError("coincident coordinate")
    a1, a2 = a[..., 0], a[..., 1]
    n2 = np.abs(a1) ** 2 + np.abs(a2) ** 2
    lhs = 1.0 / (a1 * a2)
    rhs = np.conj(a1) / (a2 * n2) + np.conj(a2) / (a1 * n2)
    return lhs, rhs


def bm_reconstruct(u: BidiscField, z, n_boundary: int = 128, n_radial: int = 32,
                   n_angular: int = 64, n_theta: int = 48, n_u: int = 16) -> complex:
    """Boundary term minus the dbar volume term of the Bochner-Martinelli
    representation at an interior point z (the result should equal u(z))."""
    z = _check_inside(np.asarray(z, dtype=complex).reshape(2))
    if u.dbar is None:
        raise DataError("reconstruction needs dbar u")
    t = TWO_PI * np.arange(n_boundary) / n_boundary
    circ = np.exp(1j * t)
    dzeta = 1j * circ * (TWO_PI / n_boundary)
    g = DiscGrid(n_radial, n_angular)
    area, dA = g.nodes.ravel(), g.weights.ravel()
    # boundary piece bD_1 x D_2: conj(zeta_1 - z_1) / |zeta - z|^4 u dzeta_1 ^ dzbar_2 ^ dzeta_2
    Z = np.empty((n_boundary, area.size, 2), dtype=complex)
    Z[..., 0] = circ[:, None]
    Z[..., 1] = area[None, :]
    a = Z - z
    n4 = (np.abs(a[..., 0]) ** 2 + np.abs(a[..., 1]) ** 2) ** 2
    b1 = np.sum(np.conj(a[..., 0]) / n4 * u(Z) * dzeta[:, None] * (2j * dA)[None, :])
    Z = Z[..., ::-1].copy()
    a = Z - z
    n4 = (np.abs(a[..., 0]) ** 2 + np.abs(a[..., 1]) ** 2) ** 2
    b2 = np.sum(np.conj(a[..., 1]) / n4 * u(Z) * dzeta[None, :].T * (2j * dA)[None, :])
    # volume piece, singular at zeta = z: polar about (z_1, z_2) with a simplex map
    factors = (unit_disc(), unit_disc())
    vol = 0.0 + 0.0j
    for parts, wt in duffy_nodes(factors, z, (0, 1), n_theta, n_u, n_u):
        zz = np.broadcast_arrays(parts[0]["z"], parts[1]["z"])
        Zv = np.stack(zz, axis=-1)
        a1 = np.conj(parts[0]["z"] - z[0])
        a2 = np.conj(parts[1]["z"] - z[1])
        n4 = (parts[0]["rho"] ** 2 + parts[1]["rho"] ** 2) ** 2
        jac = parts[0]["rho"] * parts[1]["rho"] * (2j) ** 2
        integrand = (a1 * u.dbar[0](Zv) + a2 * u.dbar[1](Zv)) / n4
        vol += np.sum(integrand * jac * wt)
    return complex((b1 + b2 - vol) / (2j * np.pi) ** 2)


# -- the Henkin-type operator ----------------------------------------------------------------

def _double_cauchy(u: Callable, Z: np.ndarray, n_boundary: int) -> np.ndarray:
    """(2 pi i)^-2 int_{bD_1 x bD_2} u(zeta) / ((zeta_1 - z_1)(zeta_2 - z_2)) dzeta_1 dzeta_2."""
    t = TWO_PI * np.arange(n_boundary) / n_boundary
    c = np.exp(1j * t)
    dz = 1j * c * (TWO_PI / n_boundary)
    if hasattr(u, "tensor_values"):
        ub = u.tensor_values(c, c)
    else:
        B = np.empty((n_boundary, n_boundary, 2), dtype=complex)
        B[..., 0] = c[:, None]
        B[..., 1] = c[None, :]
        ub = np.asarray(u(B), dtype=complex)
    ub = ub * dz[:, None] * dz[None, :]
    Z = np.asarray(Z, dtype=complex).reshape(-1, 2)
    k1 = 1.0 / (c[None, :] - Z[:, 0:1])
    k2 = 1.0 / (c[None, :] - Z[:, 1:2])
    return np.einsum("ta,ab,tb->t", k1, ub, k2) / (2j * np.pi) ** 2


class HenkinField:
    """T f = C_1 f_1 + C_2 f_2 - C_1 C_2 Df with C the disc Cauchy transform.

    Callable at points of the closed bidisc; ``grid_values`` returns the field
    on a tensor polar grid.
    """

    def __init__(self, f: Form01, n_radial: int = 24, n_angular: int = 48):
        if f.n != 2:
            raise ParameterError("the bidisc operator needs a 2-form")
        if f.deriv is None:
            raise DataError("the bidisc operator needs the mixed derivative Df")
        self.f = f
        self.n_radial, self.n_angular = n_radial, n_angular
        self.pd = unit_bidisc()

    def __call__(self, Z) -> np.ndarray:
        Z = _check_inside(Z, closed=True)
        W = Z.reshape(-1, 2)
        rules = [_FactorRule(ks, self.n_radial, self.n_angular, "cauchy") for ks in self.pd.kernels]
        out = np.empty(len(W), dtype=complex)
        for a in range(0, len(W), 2048):
            Wc = W[a:a + 2048]
            v = _nested(self.pd, rules, (0,), lambda X: self.f.component(0, X), Wc)
            v += _nested(self.pd, rules, (1,), lambda X: self.f.component(1, X), Wc)
            v -= _nested(self.pd, rules, (0, 1), lambda X: self.f.derivative(1, (0,), X), Wc)
            out[a:a + 2048] = v
        return out.reshape(Z.shape[:-1])

    def tensor_values(self, p1, p2) -> np.ndarray:
        """Values on the tensor product of point sets p1 x p2 (closed discs)."""
        g = DiscGrid(self.n_radial, self.n_angular)
        p1 = np.asarray(p1, dtype=complex).ravel()
        p2 = np.asarray(p2, dtype=complex).ravel()
        _check_inside(np.stack(np.broadcast_arrays(p1[:1], p2[:1]), axis=-1), closed=True)
        nodes = g.nodes.ravel()
        C1 = g.cauchy_rows(p1).reshape(p1.size, -1)
        C2 = g.cauchy_rows(p2).reshape(p2.size, -1)

        def on(a, b):
            Z = np.empty((a.size, b.size, 2), dtype=complex)
            Z[..., 0] = a[:, None]
            Z[..., 1] = b[None, :]
            return Z

        out = C1 @ self.f.component(0, on(nodes, p2))
        out += (C2 @ self.f.component(1, on(p1, nodes)).T).T
        out -= C1 @ self.f.derivative(1, (0,), on(nodes, nodes)) @ C2.T
        return out

    def grid_values(self, n_radial: int, n_angular: int) -> np.ndarray:
        g = DiscGrid(n_radial, n_angular)
        Z = _tensor_points([g.nodes, g.nodes])
        u = g.cauchy_axes(self.f.component(0, Z), (0, 1))
        u += g.cauchy_axes(self.f.component(1, Z), (2, 3))
        D = g.cauchy_axes(self.f.derivative(1, (0,), Z), (2, 3))
        u -= g.cauchy_axes(D, (0, 1))
        return u


def henkin_T(f: Form01, targets=None, n_radial: int = 24, n_angular: int = 48) -> ProductField:
    """Henkin-type solution of dbar u = f on the unit bidisc (not canonical)."""
    op = HenkinField(f, n_radial, n_angular)
    if targets is None:
        g = DiscGrid(n_radial, n_angular)
        Z = _tensor_points([g.nodes, g.nodes])
        return ProductField(Z, op.grid_values(n_radial, n_angular),
                            _tensor_weights([g.weights, g.weights]),
                            {"operator": "henkin", "grid": [n_radial, n_angular]})
    Z = _check_inside(targets, closed=True)
    return ProductField(Z, op(Z), None, {"operator": "henkin"})


def check_t1(u: BidiscField, targets, n_radial: int = 24, n_angular: int = 48,
             n_boundary: int = 256) -> dict:
    """sup over targets of |u - T(dbar u) - double boundary Cauchy integral of u|."""
    Z = _check_inside(targets)
    f = u.form()
    tf = HenkinField(f, n_radial, n_angular)(Z)
    bc = _double_cauchy(u, Z, n_boundary).reshape(Z.shape[:-1])
    res = np.abs(u(Z) - tf - bc)
    scale = max(1.0, float(np.max(np.abs(u(Z)))))
    return {"field": u.name, "residual": float(np.max(res)), "relative": float(np.max(res)) / scale,
            "targets": int(res.size), "n_boundary": n_boundary,
            "grid": [n_radial, n_angular]}


# -- Bergman projection and the canonical solution --------------------------------------------

def _bidisc_modes(vals: np.ndarray, g: DiscGrid) -> np.ndarray:
    """b[k, l] with P u = sum b[k, l] z_1^k z_2^l from tensor-grid samples."""
    b2 = g.bergman_modes(vals)                        # (nr, nt, L)
    b = g.bergman_modes(np.moveaxis(b2, -1, 0))       # (L, K)
    return b.T


def bergman_project_bidisc(u, targets=None, n_radial: int = 24,
                           n_angular: int = 48) -> ProductField:
    """P u for the unit bidisc by tensor polar quadrature of the kernel
    1/(pi^2 (1 - z_1 conj(zeta_1))^2 (1 - z_2 conj(zeta_2))^2), expanded in its
    power series (exact on the grid's band-limited data)."""
    g = DiscGrid(n_radial, n_angular)
    Zg = _tensor_points([g.nodes, g.nodes])
    if isinstance(u, ProductField):
        if u.values.shape != Zg.shape[:-1] or not np.allclose(u.points, Zg):
            raise ParameterError("field is not on the matching tensor grid")
        vals = u.values
    elif hasattr(u, "grid_values"):
        vals = u.grid_values(n_radial, n_angular)
    else:
        vals = np.asarray(u(Zg), dtype=complex)
    b = _bidisc_modes(vals, g)
    if targets is None:
        Z, W = Zg, _tensor_weights([g.weights, g.weights])
    else:
        Z, W = _check_inside(targets, closed=True), None
    k = np.arange(b.shape[0])
    p1 = Z[..., 0, None] ** k
    p2 = Z[..., 1, None] ** k
    vals = np.einsum("...k,kl,...l->...", p1, b, p2)
    return ProductField(Z, vals, W, {"operator": "bergman", "grid": [n_radial, n_angular]})


def _fd_residual(u: Callable, f: Form01, points: np.ndarray, h: float = 1e-4) -> float:
    err, scale = 0.0, 0.0
    for j in range(2):
        e = np.zeros(2, dtype=complex)
        e[j] = h
        db = 0.5 * ((u(points + e) - u(points - e)) / (2 * h)
                    + 1j * (u(points + 1j * e) - u(points - 1j * e)) / (2 * h))
        fj = f.component(j, points)
        err = max(err, float(np.max(np.abs(db - fj))))
        scale = max(scale, float(np.max(np.abs(fj))))
    return err / scale if scale > 0 else err


def canonical_via_projection(u_particular, f: Form01, targets=None, n_radial: int = 24,
                             n_angular: int = 48, tol: float = 1e-4) -> ProductField:
    """u - P u for a particular solution u of dbar u = f on the unit bidisc."""
    pts = unit_bidisc().compact_targets(per_factor=7, max_targets=20)
    res = _fd_residual(u_particular, f, pts)
    if res > tol:
        raise DataError(f"particular solution has dbar residual {res:.3g}")
    P = bergman_project_bidisc(u_particular, targets, n_radial, n_angular)
    if targets is None:
        if hasattr(u_particular, "grid_values"):
            uv = u_particular.grid_values(n_radial, n_angular)
        else:
            uv = np.asarray(u_particular(P.points), dtype=complex)
    else:
        uv = np.asarray(u_particular(P.points), dtype=complex)
    meta = dict(P.meta, operator="u-Pu", particular_residual=res)
    return ProductField(P.points, uv - P.values, P.weights, meta)


def check_t2(u, f: Form01, targets=None, n_boundary: int = 256, hypothesis_tol: float = 1e-3,
             n_radial: int = 24, n_angular: int = 48) -> EstimateReport:
    """Check the vanishing double boundary Cauchy integral of u, then report
    ||P u||_inf, ||dbar u||_inf and their ratio."""
    pd = unit_bidisc()
    if targets is None:
        targets = pd.compact_targets(per_factor=15)
    Z = _check_inside(targets)
    hyp = float(np.max(np.abs(_double_cauchy(u, Z, n_boundary))))
    if hyp > hypothesis_tol:
        raise PreconditionError(f"boundary Cauchy integral does not vanish (max {hyp:.3g})")
    P = bergman_project_bidisc(u, Z, n_radial, n_angular)
    sup_p = P.sup_norm
    sup_f = f.sup_norm(np.concatenate([Z, pd.random_points(2000, 5)]))
    ratio = sup_p / sup_f if sup_f > 0 else 0.0
    i = int(np.argmax(np.abs(P.values))) if P.values.size else 0
    return EstimateReport("t2-ratio", int(len(Z)), ratio, None, tuple(Z[i].tolist()), None,
                          {"n_boundary": n_boundary, "grid": [n_radial, n_angular]},
                          {"hypothesis": hyp, "sup_Pu": sup_p, "sup_dbar_u": sup_f})
