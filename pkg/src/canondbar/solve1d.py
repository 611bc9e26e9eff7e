"""One-dimensional canonical solution operator, Bergman projection and probes."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .discgrid import DiscGrid
from .errors import DataError, DomainMembershipError, ParameterError
from .geometry import angular_count, area_quadrature
from .kernels import KernelSet
from .report import EstimateReport


@dataclass(frozen=True)
class ScalarData:
    """Coefficient f of f dzbar, with an optional exact dbar-antiderivative
    used only by tests and probes."""

    f: Callable[[np.ndarray], np.ndarray]
    name: str = "data"
    smooth: bool = True
    sup_hint: float | None = None

    def __call__(self, z):
        v = np.asarray(self.f(np.asarray(z, dtype=complex)), dtype=complex)
        v = np.broadcast_to(v, np.shape(z)).copy()
        if not np.all(np.isfinite(v)):
            raise DataError(f"{self.name}: non-finite data sample")
        return v


def as_data(f) -> ScalarData:
    if isinstance(f, ScalarData):
        return f
    if callable(f):
        return ScalarData(f)
    c = complex(f)
    return ScalarData(lambda z: np.full(np.shape(z), c), name=f"const {c}")


@dataclass
class SolutionField:
    """Sampled values of a field with optional area weights for L2 norms."""

    points: np.ndarray
    values: np.ndarray
    weights: np.ndarray | None = None
    meta: dict = field(default_factory=dict)
    sup_norm: float = field(init=False)
    l2_norm: float | None = field(init=False)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex)
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape[-self.points.ndim:] != self.points.shape and self.values.shape != self.points.shape:
            raise ParameterError("values do not match the point grid")
        self.sup_norm = float(np.max(np.abs(self.values))) if self.values.size else 0.0
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float)
            self.l2_norm = float(np.sqrt(np.sum(np.abs(self.values) ** 2 * self.weights)))
        else:
            self.l2_norm = None

    def norm(self, q: float) -> float:
        if np.isinf(q):
            return self.sup_norm
        if self.weights is None:
            raise ParameterError("L^q norms need area weights")
        return float(np.sum(np.abs(self.values) ** q * self.weights) ** (1.0 / q))

    def __sub__(self, other: "SolutionField") -> "SolutionField":
        return SolutionField(self.points, self.values - other.values, self.weights, dict(self.meta))


# -- T ----------------------------------------------------------------------

def _polar_T(ks: KernelSet, f: ScalarData, w: complex, n_radial: int, n_angular: int,
             graded: bool) -> complex:
    na = angular_count(ks.dom, w, n_angular)
    q = area_quadrature(ks.dom, n_radial, na, marked=w, graded=graded)
    z = q.nodes
    # nodes inside the kernel diagonal guard carry O(1e-8 |f|) weight in total
    keep = np.abs(z - w) > 2e-8 * ks.dom.diameter
    vals = ks.S(w, z[keep]) * f(z[keep])
    return complex(2j * np.sum(vals * q.weights[keep]))


def solve_T(ks: KernelSet, f, targets=None, n_radial: int = 128, n_angular: int = 128,
            method: str = "auto", graded: bool = False) -> SolutionField:
    """Canonical solution u = int S(w, z) f(z) dzbar^dz of du/dzbar = f.

    ``method="fourier"`` (disc only) samples f on an ``n_radial x n_angular``
    polar grid and applies the mode-wise transform; ``targets=None`` then
    returns the grid field.  ``method="polar"`` integrates in polar coordinates
    about each target, which works on any domain.
    """
    f = as_data(f)
    if method == "auto":
        method = "fourier" if ks.dom.is_disc else "polar"
    if method == "fourier":
        grid = DiscGrid.for_domain(ks.dom, n_radial, n_angular)
        g = f(grid.nodes)
        if targets is None:
            return SolutionField(grid.nodes, grid.T(g), grid.weights,
                                 {"method": "fourier", "grid": grid.shape})
        t = np.asarray(targets, dtype=complex)
        if np.any(ks.dom.gauge(t) >= 1.0):
            raise DomainMembershipError("targets must lie strictly inside the domain")
        return SolutionField(t, grid.T(g, t), None, {"method": "fourier", "grid": grid.shape})
    if method != "polar":
        raise ParameterError(f"unknown method {method!r}")
    if targets is None:
        q = area_quadrature(ks.dom, max(8, n_radial // 4), max(16, n_angular // 2))
        targets, weights = q.nodes.reshape(q.shape), q.weights.reshape(q.shape)
    else:
        targets, weights = np.asarray(targets, dtype=complex), None
    if np.any(ks.dom.gauge(targets) >= 1.0):
        raise DomainMembershipError("targets must lie strictly inside the domain")
    nr = max(16, n_radial // 2)
    vals = np.array([_polar_T(ks, f, w, nr, n_angular, graded) for w in targets.ravel()])
    return SolutionField(targets, vals.reshape(targets.shape), weights,
                         {"method": "polar", "n_radial": nr, "n_angular": n_angular})


# -- Bergman projection ----------------------------------------------------------

def bergman_project_1d(ks: KernelSet, u, targets=None, n_radial: int = 64,
                       n_angular: int = 128) -> SolutionField:
    """P u(w) = int K(w, z) u(z) dA(z).

    ``u`` may be a callable or a SolutionField on a disc grid (its own grid is
    then used as quadrature).
    """
    dom = ks.dom
    if isinstance(u, SolutionField):
        if not dom.is_disc or u.meta.get("method") != "fourier":
            raise ParameterError("grid projection needs a field on a disc grid")
        grid = DiscGrid.for_domain(dom, *u.meta["grid"])
        if not np.allclose(grid.nodes, u.points):
            raise ParameterError("field grid does not match the domain")
        vals = grid.project(u.values, targets)
        pts = grid.nodes if targets is None else np.asarray(targets, dtype=complex)
        return SolutionField(pts, vals, grid.weights if targets is None else None, dict(u.meta))
    u = as_data(u)
    if dom.is_disc:
        grid = DiscGrid.for_domain(dom, n_radial, n_angular)
        vals = grid.project(u(grid.nodes), targets)
        pts = grid.nodes if targets is None else np.asarray(targets, dtype=complex)
        meta = {"method": "fourier", "grid": grid.shape}
        return SolutionField(pts, vals, grid.weights if targets is None else None, meta)
    q = area_quadrature(dom, n_radial, n_angular)
    uz = u(q.nodes)
    if targets is None:
        targets = area_quadrature(dom, max(8, n_radial // 2), max(16, n_angular // 2)).nodes
    t = np.asarray(targets, dtype=complex)
    vals = np.array([np.sum(ks.K(w, q.nodes) * uz * q.weights) for w in t.ravel()])
    return SolutionField(t, vals.reshape(t.shape), None, {"method": "quadrature"})


# -- canonicity ---------------------------------------------------------------

def _monomial_basis(ks: KernelSet, max_degree: int, points, weights):
    """Monomials in (z - c), orthonormalized in the weighted discrete inner product."""
    z = np.asarray(points).ravel() - ks.dom.center
    V = z[:, None] ** np.arange(max_degree + 1)[None, :]
    sw = np.sqrt(np.asarray(weights).ravel())
    Q, R = np.linalg.qr(V * sw[:, None])
    # fix phases so that column j has positive leading coefficient
    Q = Q * np.sign(np.real(np.diag(R)))[None, :]
    return Q, sw


def canonicity_defect(ks: KernelSet, u, max_degree: int = 8, n_radial: int = 64,
                      n_angular: int = 128) -> list[float]:
    """|<u, e_j>| / ||u|| against orthonormalized monomials e_j, j <= max_degree.

    For non-disc domains this is a best-effort check (monomials need not be
    dense in the Bergman space there).
    """
    if isinstance(u, SolutionField):
        if u.weights is None:
            raise ParameterError("canonicity needs a field with area weights")
        pts, vals, wts = u.points, u.values, u.weights
    else:
        u = as_data(u)
        if ks.dom.is_disc:
            grid = DiscGrid.for_domain(ks.dom, n_radial, n_angular)
            pts, wts = grid.nodes, grid.weights
        else:
            q = area_quadrature(ks.dom, n_radial, n_angular)
            pts, wts = q.nodes, q.weights
        vals = u(pts)
    Q, sw = _monomial_basis(ks, max_degree, pts, wts)
    v = vals.ravel() * sw
    nrm = np.linalg.norm(v)
    if nrm == 0:
        return [0.0] * (max_degree + 1)
    return (np.abs(Q.conj().T @ v) / nrm).tolist()


# -- norm probes ---------------------------------------------------------------

def admissible(p: float, q: float) -> bool:
    """Young-inequality range: p in [1, 2] needs q < 2p/(2-p); p > 2 allows any q."""
    if not p >= 1:
        return False
    if p <= 2:
        bound = np.inf if p == 2 else 2 * p / (2 - p)
        return 0 < q < bound
    return q > 0


def norm_bound_probe(ks: KernelSet, family: Sequence, p: float, q: float,
                     grids: Sequence[tuple] = ((64, 64), (128, 128))) -> EstimateReport:
    """sup over the family of ||T f||_q / ||f||_p at each grid; the stability
    ratio compares the finest grid against the coarsest."""
    if not admissible(p, q):
        raise ParameterError(
            f"(p, q) = ({p}, {q}) not admissible: p in [1, 2] needs q < 2p/(2-p), p > 2 any q")
    if not family:
        raise ParameterError("empty family")
    sups = []
    arg = None
    for nr, nt in grids:
        best = 0.0
        for i, f in enumerate(family):
            f = as_data(f)
            u = solve_T(ks, f, None, nr, nt)
            fv = SolutionField(u.points, f(u.points), u.weights)
            den = fv.norm(p)
            r = u.norm(q) / den if den > 0 else 0.0
            if r >= best:
                best, arg = r, (i,)
        sups.append(best)
    stab = sups[-1] / sups[0] if sups[0] > 0 else 1.0
    return EstimateReport("pq-bound", len(family), sups[-1], None, arg, stab,
                          {"grids": [list(g) for g in grids], "p": p, "q": q},
                          {"per_grid": sups})


def _dbar_fd(u: Callable, z: np.ndarray, h: float) -> np.ndarray:
    ux = (u(z + h) - u(z - h)) / (2 * h)
    uy = (u(z + 1j * h) - u(z - 1j * h)) / (2 * h)
    return 0.5 * (ux + 1j * uy)


def projection_bound_probe(ks: KernelSet, family: Sequence, n_radial: int = 96,
                           n_angular: int = 96, fd_step: float = 1e-5) -> EstimateReport:
    """For each (u, dbar u) pair (dbar u may be None: finite differences),
    Pu = u - T(dbar u); reports sup ||u - Pu||_inf / ||dbar u||_inf and the
    smallest constant c with ||Pu||_inf <= ||u||_inf + c ||dbar u||_inf."""
    if not family:
        raise ParameterError("empty family")
    ratios, slack = [], []
    for item in family:
        u, du = (item if isinstance(item, tuple) else (item, None))
        u = as_data(u)
        if du is None:
            def du(z, u=u):
                return _dbar_fd(u, z, fd_step)
        du = as_data(du)
        t = solve_T(ks, du, None, n_radial, n_angular)
        uv = u(t.points)
        if not np.all(np.isfinite(uv)):
            raise DataError("non-differentiable sample")
        dv = du(t.points)
        dsup = float(np.max(np.abs(dv)))
        pu = uv - t.values
        diff = float(np.max(np.abs(uv - pu)))
        if dsup == 0:
            ratios.append(0.0)
            slack.append(0.0)
            continue
        ratios.append(diff / dsup)
        slack.append(max(0.0, (float(np.max(np.abs(pu))) - float(np.max(np.abs(uv)))) / dsup))
    i = int(np.argmax(ratios))
    return EstimateReport("projection-bound", len(family), float(ratios[i]), None, (i,), None,
                          {"n_radial": n_radial, "n_angular": n_angular},
                          {"ratios": ratios, "projection_constant": float(max(slack))})
