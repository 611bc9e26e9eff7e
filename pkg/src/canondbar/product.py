"""Canonical dbar-solutions on products of planar domains.

Two operators are provided.  ``solve_smooth`` applies nested one-dimensional
solution operators to mixed derivatives of the datum (an alternating sum over
index subsets).  ``solve_tilde`` needs only continuous data: the derivatives
are moved onto the weighted kernels, and the resulting singular integrals are
computed in polar coordinates about each target coordinate with a simplex
(Duffy) map in the radial variables, which resolves the joint diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, permutations, product as iproduct
from math import prod

import numpy as np

from .discgrid import DiscGrid
from .errors import (DataError, DomainMembershipError, ParameterError,
                     PreconditionError, UnsupportedError)
from .forms import Form01
from .geometry import PlanarDomain, area_quadrature, boundary_quadrature, gauss01
from .kernels import KernelSet
from .report import EstimateReport, sample_interior
from .weights import expand_e_derivative, product_weight_terms

TWO_PI = 2 * np.pi


@dataclass(frozen=True, eq=False)
class ProductDomain:
    factors: tuple
    kernel_method: str | None = None
    N: int = 256

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) < 2:
            raise ParameterError("a product needs at least two factors")
        for f in self.factors:
            if not isinstance(f, PlanarDomain):
                raise ParameterError("factors must be PlanarDomain instances")

    @property
    def n(self) -> int:
        return len(self.factors)

    @cached_property
    def kernels(self) -> tuple:
        return tuple(KernelSet(d, None if d.is_disc else self.kernel_method, self.N)
                     for d in self.factors)

    @property
    def all_discs(self) -> bool:
        return all(d.is_disc for d in self.factors)

    @property
    def is_unit_polydisc(self) -> bool:
        return all(d.is_unit_disc for d in self.factors)

    def permuted(self, perm) -> "ProductDomain":
        return ProductDomain(tuple(self.factors[i] for i in perm), self.kernel_method, self.N)

    def check_interior(self, Z, closed: bool = False):
        Z = np.asarray(Z, dtype=complex)
        if Z.shape[-1] != self.n:
            raise ParameterError(f"points need {self.n} coordinates")
        for j, d in enumerate(self.factors):
            g = d.gauge(Z[..., j])
            if np.any(g > 1 + 1e-12) or (not closed and np.any(g >= 1.0)):
                raise DomainMembershipError("point outside the product domain")
        return Z

    def compact_points(self, j: int, frac: float = 0.1, count: int = 15, seed: int = 0):
        """Points of factor j with distance to the boundary >= frac * diameter."""
        d = self.factors[j]
        if d.is_disc:
            R = d.params["radius"]
            rmax = R - frac * d.diameter
            if rmax <= 0:
                raise ParameterError("compact subset is empty")
            pts = [d.center]
            for r, m in ((0.5 * rmax, 6), (rmax, 8)):
                pts += list(d.center + r * np.exp(1j * (TWO_PI * np.arange(m) / m + 0.3)))
            return np.asarray(pts[:count])
        rng = np.random.default_rng(seed + 17 * j)
        return sample_interior(d, count, rng, frac * d.diameter)

    def compact_targets(self, frac: float = 0.1, per_factor: int = 15,
                        max_targets: int | None = None, seed: int = 0) -> np.ndarray:
        pts = [self.compact_points(j, frac, per_factor, seed) for j in range(self.n)]
        T = np.array(list(iproduct(*pts)))
        if max_targets is not None and len(T) > max_targets:
            rng = np.random.default_rng(seed)
            T = T[np.sort(rng.choice(len(T), max_targets, replace=False))]
        return T

    def random_points(self, count: int, seed: int = 0, delta_frac: float = 0.0) -> np.ndarray:
        rng = np.random.default_rng(seed)
        return np.stack([sample_interior(d, count, rng, delta_frac * d.diameter)
                         for d in self.factors], axis=-1)


@dataclass
class ProductField:
    """Field on a product domain; ``points`` has shape values.shape + (n,)."""

    points: np.ndarray
    values: np.ndarray
    weights: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex)
        self.values = np.asarray(self.values, dtype=complex)
        if self.points.shape[:-1] != self.values.shape:
            raise ParameterError("values do not match the points")

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    @property
    def l2_norm(self) -> float | None:
        if self.weights is None:
            return None
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2 * self.weights)))


# -- one-dimensional factor rules ------------------------------------------------------

class _FactorRule:
    """Quadrature functional of the one-dimensional operator on one factor:
    T g(w) = sum_q coeff[q] g(node[q])."""

    def __init__(self, ks: KernelSet, n_radial: int, n_angular: int, kind: str = "canonical"):
        self.ks = ks
        self.dom = ks.dom
        self.n_radial, self.n_angular = n_radial, n_angular
        self.kind = kind
        self.grid = DiscGrid.for_domain(self.dom, n_radial, n_angular) if self.dom.is_disc else None
        if kind not in ("canonical", "cauchy"):
            raise ParameterError(f"unknown operator kind {kind!r}")
        if kind == "cauchy" and self.grid is None:
            raise UnsupportedError("Cauchy-transform rules are implemented for discs only")

    @property
    def shared(self) -> bool:
        return self.grid is not None

    def rule(self, w: np.ndarray):
        """(nodes, coeffs) with coeffs of shape (T, N); nodes (N,) if shared else (T, N)."""
        w = np.asarray(w, dtype=complex).ravel()
        if self.grid is not None:
            rows = self.grid.rows(w) if self.kind == "canonical" else self.grid.cauchy_rows(w)
            return self.grid.nodes.ravel(), rows.reshape(w.size, -1)
        nodes, coeffs = [], []
        for x in w:
            q = area_quadrature(self.dom, self.n_radial, self.n_angular, marked=x)
            keep = np.abs(q.nodes - x) > 2e-8 * self.dom.diameter
            c = np.zeros(q.nodes.shape, dtype=complex)
            c[keep] = 2j * self.ks.S(x, q.nodes[keep]) * q.weights[keep]
            nodes.append(q.nodes)
            coeffs.append(c)
        return np.array(nodes), np.array(coeffs)


def _nested(pd: ProductDomain, rules: list, I: tuple, g, W: np.ndarray,
            chunk: int = 2_000_000) -> np.ndarray:
    """sum over nodes of prod_{j in I} coeff_j g(z_I, w_rest) for each target row of W."""
    T = len(W)
    rs = [rules[j].rule(W[:, j]) for j in I]
    if len(I) == pd.n and all(rules[j].shared for j in I):
        return _nested_shared(pd, rs, g, T, chunk)
    out = np.zeros(T, dtype=complex)
    sizes = [r[1].shape[1] for r in rs]
    tc = max(1, chunk // prod(sizes))
    for a in range(0, T, tc):
        sl = slice(a, min(T, a + tc))
        t = W[sl]
        shape = (len(t),) + tuple(sizes)
        Z = np.broadcast_to(t[:, None, :].reshape((len(t),) + (1,) * len(I) + (pd.n,)),
                            shape + (pd.n,)).copy()
        for pos, (j, (nodes, _)) in enumerate(zip(I, rs)):
            nd = nodes if nodes.ndim == 1 else nodes[sl]
            view = [1] * (len(I) + 1)
            view[pos + 1] = sizes[pos]
            if nd.ndim == 2:
                view[0] = len(t)
            Z[..., j] = nd.reshape(view)
        v = g(Z)
        for pos in reversed(range(len(I))):
            c = rs[pos][1][sl]
            v = np.einsum("t...q,tq->t...", v, c)
        out[sl] = v
    return out


def _nested_shared(pd, rs, g, T, chunk):
    nodes = [r[0] for r in rs]
    coeffs = [r[1] for r in rs]
    sizes = [len(x) for x in nodes]
    rest = prod(sizes[1:])
    cc = max(1, chunk // rest)
    out = np.zeros(T, dtype=complex)
    mesh_rest = np.meshgrid(*nodes[1:], indexing="ij")
    for a in range(0, sizes[0], cc):
        n0 = nodes[0][a:a + cc]
        Z = np.empty((len(n0),) + tuple(sizes[1:]) + (pd.n,), dtype=complex)
        Z[..., 0] = n0.reshape((-1,) + (1,) * (pd.n - 1))
        for j in range(1, pd.n):
            Z[..., j] = mesh_rest[j - 1]
        v = g(Z)                                    # (c, N2, ..., Nn)
        v = np.einsum("...q,tq->...t", v, coeffs[-1])
        for j in range(pd.n - 2, 0, -1):
            v = np.einsum("...qt,tq->...t", v, coeffs[j])
        out += np.einsum("qt,tq->t", v, coeffs[0][:, a:a + cc])
    return out


# -- derivative-based operator -----------------------------------------------------------

def _check_form(pd: ProductDomain, f: Form01, seed: int = 0, count: int = 100):
    if f.n != pd.n:
        raise ParameterError("form and domain dimensions differ")
    Z = pd.random_points(count, seed)
    return f.check_closed(Z)


def _subsets(n: int):
    for s in range(1, n + 1):
        for I in combinations(range(n), s):
            yield s, I


def solve_smooth(pd: ProductDomain, f: Form01, targets=None, n_radial: int | None = None,
                 n_angular: int | None = None, check_closed: bool = True) -> ProductField:
    """Alternating sum of nested one-dimensional solution operators applied to
    mixed derivatives of f.  ``targets=None`` (all-disc products) returns the
    field on the tensor grid with product area weights."""
    if f.deriv is None and pd.n > 1:
        raise DataError("solve_smooth needs a derivative oracle")
    if n_radial is None:
        n_radial = 24 if pd.n == 2 else 10
    if n_angular is None:
        n_angular = 2 * n_radial
    defect = _check_form(pd, f) if check_closed else None
    meta = {"operator": "smooth", "n_radial": n_radial, "n_angular": n_angular,
            "closedness_defect": defect}
    if targets is None:
        if not pd.all_discs:
            raise ParameterError("grid output needs disc factors; pass targets")
        grids = [DiscGrid.for_domain(d, n_radial, n_angular) for d in pd.factors]
        Z = _tensor_points([g.nodes for g in grids])
        Wt = _tensor_weights([g.weights for g in grids])
        u = np.zeros(Z.shape[:-1], dtype=complex)
        for s, I in _subsets(pd.n):
            data = f.derivative(I[-1], I[:-1], Z)
            for j in I:
                data = grids[j].T_axes(data, (2 * j, 2 * j + 1))
            u += (-1) ** (s - 1) * data
        meta["grid"] = [n_radial, n_angular]
        return ProductField(Z, u, Wt, meta)
    W = pd.check_interior(targets)
    W2 = W.reshape(-1, pd.n)
    rules = [_FactorRule(ks, n_radial, n_angular) for ks in pd.kernels]
    u = np.zeros(len(W2), dtype=complex)
    for s, I in _subsets(pd.n):
        g = (lambda Z, I=I: f.derivative(I[-1], I[:-1], Z))
        u += (-1) ** (s - 1) * _nested(pd, rules, I, g, W2)
    return ProductField(W, u.reshape(W.shape[:-1]), None, meta)


def _tensor_points(factor_nodes: list) -> np.ndarray:
    n = len(factor_nodes)
    shape = tuple(s for x in factor_nodes for s in x.shape)
    Z = np.empty(shape + (n,), dtype=complex)
    for j, x in enumerate(factor_nodes):
        view = [1] * len(shape)
        view[2 * j], view[2 * j + 1] = x.shape
        Z[..., j] = x.reshape(view)
    return Z


def _tensor_weights(factor_weights: list) -> np.ndarray:
    out = np.ones(())
    for w in factor_weights:
        out = np.multiply.outer(out, w)
    return out


# -- derivative-free operator ------------------------------------------------------------

@dataclass(frozen=True)
class TildeConfig:
    """Quadrature sizes: polar angles per factor, Gauss points in the Duffy
    radial variables, and the one-dimensional rule for single-index terms."""

    n_theta: int = 48
    n_u: int = 16
    n_v: int = 16
    n_radial: int = 24
    n_angular: int = 48
    n_theta3: int = 12
    n_u3: int = 6
    n_v3: int = 6
    boundary_nodes: int = 128
    boundary_tol: float = 1e-9

    def sizes(self, s: int) -> tuple:
        return (self.n_theta, self.n_u, self.n_v) if s <= 2 else (self.n_theta3, self.n_u3, self.n_v3)

    def refined(self, factor: float) -> "TildeConfig":
        def r(x, even=False):
            v = int(round(x * factor))
            return v + (v % 2) if even else v
        return TildeConfig(r(self.n_theta, True), r(self.n_u), r(self.n_v), r(self.n_radial),
                           r(self.n_angular, True), r(self.n_theta3, True), r(self.n_u3),
                           r(self.n_v3), self.boundary_nodes, self.boundary_tol)


def _duffy_charts(s: int, n_u: int, n_v: int):
    """Ordered-simplex charts of [0,1]^s: for each ordering, x values (s, M) and weights (M,)."""
    u, wu = gauss01(n_u)
    v, wv = gauss01(n_v)
    grids = np.meshgrid(u, *([v] * (s - 1)), indexing="ij")
    wgr = np.meshgrid(wu, *([wv] * (s - 1)), indexing="ij")
    U = grids[0].ravel()
    Vs = [g.ravel() for g in grids[1:]]
    wt = np.prod([g.ravel() for g in wgr], axis=0)
    jac = U ** (s - 1)
    for i, Vi in enumerate(Vs):
        jac = jac * Vi ** (s - 2 - i)
    chart_x = [U]
    for Vi in Vs:
        chart_x.append(chart_x[-1] * Vi)
    out = []
    for order in permutations(range(s)):
        x = np.empty((s, U.size))
        for rank, pos in enumerate(order):
            x[pos] = chart_x[rank]
        out.append((x, wt * jac))
    return out


def duffy_nodes(factors, w, I: tuple, n_theta: int, n_u: int, n_v: int):
    """Polar nodes about w_j in each factor j of I, with the ordered-simplex
    map in the normalized radii.  Yields, per chart, a list of dicts (one per
    position: z, rho, eth, shape) and the broadcast weight of
    prod_j dtheta_j drho_j (the area Jacobians rho_j are left to the caller)."""
    s = len(I)
    th = TWO_PI * (np.arange(n_theta) + 0.5) / n_theta
    eth = np.exp(1j * th)
    R = [factors[j].ray_length(w[j], th) for j in I]
    for x, wt in _duffy_charts(s, n_u, n_v):
        M = wt.size
        parts, fac = [], []
        for pos, j in enumerate(I):
            rho = R[pos][:, None] * x[pos][None, :]
            shape = [1] * s + [M]
            shape[pos] = n_theta
            parts.append({"z": (w[j] + rho * eth[:, None]).reshape(shape),
                          "rho": rho.reshape(shape), "eth": eth[:, None].reshape(shape[:-1] + [1]),
                          "raw_z": w[j] + rho * eth[:, None], "raw_rho": rho})
            fac.append((R[pos] * (TWO_PI / n_theta)).reshape(shape[:-1] + [1]))
        yield parts, prod(fac) * wt


def _area_term(pd: ProductDomain, f: Form01, w: np.ndarray, I: tuple, cfg: TildeConfig,
               lists: dict) -> complex:
    """sum_k int_{D_I} f_k(z_I, w_rest) d^{I minus k} e^k dV at one target."""
    s = len(I)
    total = 0.0 + 0.0j
    for parts, weight in duffy_nodes(pd.factors, w, I, *cfg.sizes(s)):
        d, b, S, K = [], [], [], []
        for pos, j in enumerate(I):
            p = parts[pos]
            ks = pd.kernels[j]
            rho = p["rho"]
            d.append(-rho * p["eth"])
            b.append(rho ** 2)
            S.append((ks.S(w[j], p["raw_z"]) * p["raw_rho"]).reshape(rho.shape))
            K.append((ks.K(w[j], p["raw_z"]) * p["raw_rho"]).reshape(rho.shape))
        full = np.broadcast_shapes(*(p["z"].shape for p in parts))
        Z = np.empty(full + (pd.n,), dtype=complex)
        for j in range(pd.n):
            Z[..., j] = w[j]
        for pos, j in enumerate(I):
            Z[..., j] = parts[pos]["z"]
        weight = weight * (2j) ** s
        H = product_weight_terms(b)
        for k in range(s):
            E = lists[(I, k)].evaluate(d, b, S, K, H)
            total += np.sum(f.component(I[k], Z) * E * weight)
    return complex(total)


def _boundary_trace(pd: ProductDomain, W: np.ndarray, nodes: int) -> float:
    """max |S_j(w_j, zeta)| over boundary nodes: the size of every term that
    keeps an undifferentiated kernel on a boundary circle."""
    worst = 0.0
    for j, ks in enumerate(pd.kernels):
        zeta = boundary_quadrature(pd.factors[j], nodes).nodes
        for w in np.unique(W[:, j]):
            worst = max(worst, float(np.max(np.abs(ks.S(w, zeta)))))
    return worst


def solve_tilde(pd: ProductDomain, f: Form01, targets=None, config: TildeConfig | None = None,
                check_closed: bool = True) -> ProductField:
    """Derivative-free canonical solution operator on n = 2 or 3 factors.

    Single-index terms are one-dimensional solutions in each variable; every
    index subset of size s >= 2 contributes, for each component k, the area
    integral of f_k against the (s-1)-fold dbar derivative of the weighted
    kernel.  Terms carrying a kernel on a boundary circle are checked to be
    negligible (the kernel vanishes there) instead of being integrated.
    """
    if pd.n > 3:
        raise UnsupportedError("the derivative-free operator is limited to n <= 3 "
                               "(the term count grows like n! 2^n)")
    cfg = config or TildeConfig()
    defect = _check_form(pd, f) if check_closed else None
    W = pd.check_interior(pd.compact_targets() if targets is None else targets)
    W2 = W.reshape(-1, pd.n)
    sup_f = f.sup_norm(pd.random_points(200, 3))
    if not np.isfinite(sup_f):
        raise DataError("unbounded datum")
    rules = [_FactorRule(ks, cfg.n_radial, cfg.n_angular) for ks in pd.kernels]
    u = np.zeros(len(W2), dtype=complex)
    for j in range(pd.n):
        u += _nested(pd, rules, (j,), (lambda Z, j=j: f.component(j, Z)), W2)
    lists = {}
    for s, I in _subsets(pd.n):
        if s >= 2:
            for k in range(s):
                lists[(I, k)] = expand_e_derivative(I, k, tuple(p for p in range(s) if p != k))
    for t, w in enumerate(W2):
        for s, I in _subsets(pd.n):
            if s >= 2:
                u[t] += _area_term(pd, f, w, I, cfg, lists)
    trace = _boundary_trace(pd, W2, cfg.boundary_nodes)
    if trace > cfg.boundary_tol:
        raise PreconditionError(f"kernel trace on the boundary is {trace:.3g}; "
                                "boundary terms are not negligible")
    meta = {"operator": "tilde", "config": cfg.__dict__.copy(), "closedness_defect": defect,
            "boundary_trace": trace, "sup_f": sup_f}
    return ProductField(W, u.reshape(W.shape[:-1]), None, meta)


# -- residuals, canonicity, probes ------------------------------------------------------------

def dbar_residual(solver, pd: ProductDomain, f: Form01, points, h: float = 1e-4) -> float:
    """Relative sup error of the centered-difference dbar of ``solver(points)``
    against the components of f."""
    P = pd.check_interior(points).reshape(-1, pd.n)
    shifts = []
    for j in range(pd.n):
        for step in (h, -h, 1j * h, -1j * h):
            e = np.zeros(pd.n, dtype=complex)
            e[j] = step
            shifts.append(P + e)
    vals = solver(np.concatenate(shifts)).reshape(pd.n, 4, len(P))
    err, scale = 0.0, 0.0
    for j in range(pd.n):
        v = vals[j]
        db = 0.5 * ((v[0] - v[1]) / (2 * h) + 1j * (v[2] - v[3]) / (2 * h))
        fj = f.component(j, P)
        err = max(err, float(np.max(np.abs(db - fj))))
        scale = max(scale, float(np.max(np.abs(fj))))
    return err / scale if scale > 0 else err


def _factor_basis(dom: PlanarDomain, max_degree: int, n_radial: int, n_angular: int):
    if dom.is_disc:
        g = DiscGrid.for_domain(dom, n_radial, n_angular)
        pts, wts = g.nodes.ravel(), g.weights.ravel()
    else:
        q = area_quadrature(dom, n_radial, n_angular)
        pts, wts = q.nodes, q.weights
    z = pts - dom.center
    V = z[:, None] ** np.arange(max_degree + 1)[None, :]
    sw = np.sqrt(wts)
    Q, Rm = np.linalg.qr(V * sw[:, None])
    Q = Q * np.sign(np.real(np.diag(Rm)))[None, :]
    return pts, sw, Q


def canonicity_defect_nd(pd: ProductDomain, u, max_degree: int = 6, n_radial: int = 24,
                         n_angular: int = 48) -> dict:
    """Normalized inner products of u with orthonormalized tensor monomials of
    total degree <= max_degree.  Returns {"defects": {(a_1..a_n): value},
    "max": ..., "best_effort": bool}; non-disc factors make it best-effort."""
    bases = [_factor_basis(d, max_degree, n_radial, n_angular) for d in pd.factors]
    if isinstance(u, ProductField):
        if u.values.ndim != 2 * pd.n or u.weights is None:
            raise ParameterError("canonicity needs a tensor-grid field")
        vals = u.values.reshape(tuple(len(b[0]) for b in bases))
        Z = u.points.reshape(vals.shape + (pd.n,))
        for j, b in enumerate(bases):
            if not np.allclose(np.moveaxis(Z[..., j], j, 0).reshape(len(b[0]), -1)[:, 0], b[0]):
                raise ParameterError("field grid does not match the factor grids")
    else:
        Z = np.empty(tuple(len(b[0]) for b in bases) + (pd.n,), dtype=complex)
        for j, b in enumerate(bases):
            view = [1] * pd.n
            view[j] = len(b[0])
            Z[..., j] = b[0].reshape(view)
        vals = np.asarray(u(Z), dtype=complex)
    v = vals
    for j, b in enumerate(bases):
        view = [1] * pd.n
        view[j] = len(b[0])
        v = v * b[1].reshape(view)
    nrm = float(np.sqrt(np.sum(np.abs(v) ** 2)))
    c = v
    for j, b in enumerate(bases):
        c = np.tensordot(c, b[2].conj(), axes=([0], [0]))
    out = {}
    for idx in iproduct(range(max_degree + 1), repeat=pd.n):
        if sum(idx) <= max_degree:
            out[idx] = float(abs(c[idx]) / nrm) if nrm > 0 else 0.0
    return {"defects": out, "max": max(out.values()), "best_effort": not pd.all_discs}


def uniform_bound_probe(pd: ProductDomain, family, resolutions=None, targets=None,
                        sup_points: int = 4000) -> EstimateReport:
    """sup over the family of ||T~ f||_inf / ||f||_inf at each resolution."""
    if not family:
        raise ParameterError("empty family")
    if resolutions is None:
        base = TildeConfig(24, 8, 8, 16, 32, 12, 6, 6)
        resolutions = [base, base.refined(1.5), base.refined(2.0)]
    if targets is None:
        targets = pd.compact_targets(per_factor=7, max_targets=12)
    Zs = pd.random_points(sup_points, 11)
    sups, per = [], []
    arg = None
    for cfg in resolutions:
        best, row = 0.0, []
        for i, f in enumerate(family):
            fs = f.sup_norm(np.concatenate([Zs, np.asarray(targets)]))
            if fs == 0:
                row.append(0.0)
                continue
            u = solve_tilde(pd, f, targets, cfg, check_closed=False)
            r = u.sup_norm / fs
            row.append(r)
            if r > best:
                best, arg = r, (i, f.name)
        sups.append(best)
        per.append(row)
    stab = sups[-1] / sups[0] if sups[0] > 0 else 1.0
    steps = [sups[i + 1] / sups[i] if sups[i] > 0 else 1.0 for i in range(len(sups) - 1)]
    return EstimateReport("uniform-bound", len(family), sups[-1], None, arg, stab,
                          {"resolutions": [c.__dict__.copy() for c in resolutions],
                           "targets": int(len(targets))},
                          {"per_resolution": sups, "per_form": per, "refinement_ratios": steps})


@dataclass(frozen=True)
class ProductPairSampler:
    """Pairs (w, z) in a product: w in the compact part, z_j = w_j + r e^{it}
    with r log-uniform over [r_min, diameter] (rejected outside the factor)."""

    pd: ProductDomain
    seed: int = 0
    w_delta_frac: float = 0.1
    r_min: float = 1e-4

    def sample(self, n: int, seed_offset: int = 0):
        if n <= 0:
            raise ParameterError("empty sample")
        rng = np.random.default_rng(self.seed + 7919 * seed_offset)
        W = self.pd.random_points(n, int(rng.integers(2**31)), self.w_delta_frac)
        Z = np.empty_like(W)
        for j, d in enumerate(self.pd.factors):
            todo = np.arange(n)
            while todo.size:
                r = np.exp(rng.uniform(np.log(self.r_min * d.diameter), np.log(d.diameter),
                                       todo.size))
                z = W[todo, j] + r * np.exp(1j * rng.uniform(0, TWO_PI, todo.size))
                ok = d.gauge(z) < 1.0
                Z[todo[ok], j] = z[ok]
                todo = todo[~ok]
        return W, Z

    def valid(self, w, z):
        """Interior z, w in the compact part, no diagonal coordinate."""
        ok = np.ones(w.shape[0], dtype=bool)
        for j, d in enumerate(self.pd.factors):
            ok &= d.gauge(z[:, j]) < 1.0
            ok &= d.gauge(w[:, j]) < 1.0
            ok &= np.abs(z[:, j] - w[:, j]) > 1e-8 * d.diameter
            inside = np.flatnonzero(ok)
            if inside.size:
                dd = d.distance_to_boundary(w[inside, j])
                ok[inside[dd < self.w_delta_frac * d.diameter]] = False
        return ok

    def S(self, j, w, z):
        return self.pd.kernels[j].S(w, z)

    def K(self, j, w, z):
        return self.pd.kernels[j].K(w, z)
