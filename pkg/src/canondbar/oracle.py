"""Brute-force oracle: discrete least-norm solution of the dbar system on a grid.

Each disc factor carries a tensor-polar grid with ``M`` rings at radii
``h, 2h, ..., 1`` (unit coordinates, ``h = 1/M``), ``L`` equispaced angles and
one origin node.  The dbar operator is discretized by a box scheme: one row per
half ring (radial difference, ring-averaged angular term, angular derivative
exact on the sampled Fourier modes) plus one origin row for the angular modes
that must vanish at the centre.  The operator is block diagonal in the angular
mode, so the weighted normal matrix of the product system is a Kronecker sum of
small per-mode blocks and the minimum-norm solution is computed exactly from
their eigendecompositions.  An LSQR route over the same operator serves as a
cross-check on small grids.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh
from scipy.sparse.linalg import LinearOperator, lsqr

from .errors import DataError, ParameterError, UnsupportedError
from .forms import Form01
from .geometry import PlanarDomain
from .product import ProductDomain, ProductField, solve_tilde
from .solve1d import ScalarData, SolutionField


# -- one factor -----------------------------------------------------------------

class _PolarFactor:
    """Grid, weights and per-mode box operator of one disc factor."""

    def __init__(self, dom: PlanarDomain, M: int, L: int):
        if not dom.is_disc:
            raise UnsupportedError("the oracle grid needs disc factors")
        if M < 4 or L < 8 or L % 2:
            raise ParameterError("need at least 4 rings and an even number >= 8 of angles")
        self.dom, self.M, self.L = dom, M, L
        self.R = float(dom.params["radius"])
        self.c = complex(dom.center)
        h = 1.0 / M
        self.h = h
        self.r = h * np.arange(1, M + 1)
        self.theta = 2 * np.pi * np.arange(L) / L
        self.modes = np.rint(np.fft.fftfreq(L) * L).astype(int)
        self.N = M * L + 1
        # finite-volume area weights (sum = pi R^2)
        wr = 2 * np.pi * self.r * h / L
        wr[-1] = np.pi * (1.0 - (1.0 - h / 2) ** 2) / L
        self.ring_w = wr * self.R ** 2
        self.origin_w = np.pi * (h / 2) ** 2 * self.R ** 2
        # weights in mode-space ordering (p * M + i, origin last)
        self.mode_w = np.concatenate([np.tile(self.ring_w, L), [self.origin_w]])
        # row sample radii: h/2 (origin rows) then the half-ring midpoints
        self.row_r = np.concatenate([[h / 2], (self.r[:-1] + self.r[1:]) / 2])
        self._build_blocks()

    # geometry ------------------------------------------------------------
    @property
    def nodes(self) -> np.ndarray:
        ring = self.c + self.R * self.r[:, None] * np.exp(1j * self.theta)[None, :]
        return np.concatenate([ring.ravel(), [self.c]])

    @property
    def weights(self) -> np.ndarray:
        return np.concatenate([np.repeat(self.ring_w, self.L), [self.origin_w]])

    @property
    def row_points(self) -> np.ndarray:
        return (self.c + self.R * self.row_r[:, None] * np.exp(1j * self.theta)[None, :]).ravel()

    def valid(self, m: int) -> bool:
        return -self.L // 2 < m < self.L // 2 - 1

    # per-mode operator -------------------------------------------------------
    def _block(self, m: int) -> tuple[np.ndarray, list]:
        """Unscaled rows for u-mode m and the f-radius index of each row."""
        M, h = self.M, self.h
        ncol = M + 1 if m == 0 else M
        if not self.valid(m):
            return np.eye(M, ncol) / self.R, [None] * M
        rows, src = [], []
        if m <= 0:
            row = np.zeros(ncol)
            row[0] = (1 - m) / (2 * self.r[0])
            if m == 0:
                # ring coefficients carry the sqrt(L) of the unitary transform
                row[M] = -np.sqrt(self.L) / (2 * self.r[0])
            rows.append(row)
            src.append(0)
        for i in range(M - 1):
            rm = self.row_r[i + 1]
            row = np.zeros(ncol)
            row[i] = 0.5 * (-1 / h - m / (2 * rm))
            row[i + 1] = 0.5 * (1 / h - m / (2 * rm))
            rows.append(row)
            src.append(i + 1)
        return np.array(rows) / self.R, src

    def _build_blocks(self):
        M, L = self.M, self.L
        self.cols, self.B, self.Bs, self.src = [], [], [], []
        self.lam, self.Q, self.row_off = [], [], [0]
        for p, m in enumerate(self.modes):
            cols = np.arange(p * M, (p + 1) * M)
            if m == 0:
                cols = np.append(cols, M * L)
            B, src = self._block(int(m))
            Bs = B / np.sqrt(self.mode_w[cols])[None, :]
            lam, Q = eigh(Bs.T @ Bs)
            self.cols.append(cols)
            self.B.append(B)
            self.Bs.append(Bs)
            self.src.append(src)
            self.lam.append(lam)
            self.Q.append(Q)
            self.row_off.append(self.row_off[-1] + B.shape[0])
        self.n_rows = self.row_off[-1]
        self.eigvals = np.zeros(self.N)
        for cols, lam in zip(self.cols, self.lam):
            self.eigvals[cols] = lam

    # transforms along one axis of a multi-dimensional array ----------------------
    def to_modes(self, X: np.ndarray, axis: int) -> np.ndarray:
        X = np.moveaxis(X, axis, 0)
        rest = X.shape[1:]
        ring = X[:-1].reshape((self.M, self.L) + rest)
        F = np.fft.fft(ring, axis=1, norm="ortho")
        F = np.swapaxes(F, 0, 1).reshape((self.M * self.L,) + rest)
        out = np.concatenate([F, X[-1:]], axis=0)
        return np.moveaxis(out, 0, axis)

    def from_modes(self, X: np.ndarray, axis: int) -> np.ndarray:
        X = np.moveaxis(X, axis, 0)
        rest = X.shape[1:]
        F = np.swapaxes(X[:-1].reshape((self.L, self.M) + rest), 0, 1)
        ring = np.fft.ifft(F, axis=1, norm="ortho").reshape((self.M * self.L,) + rest)
        out = np.concatenate([ring, X[-1:]], axis=0)
        return np.moveaxis(out, 0, axis)

    def rows_from_samples(self, X: np.ndarray, axis: int) -> np.ndarray:
        """Row-space values from samples at ``row_points`` along ``axis``."""
        X = np.moveaxis(X, axis, 0)
        rest = X.shape[1:]
        F = np.fft.fft(X.reshape((self.M, self.L) + rest), axis=1, norm="ortho")
        out = np.zeros((self.n_rows,) + rest, dtype=complex)
        for p, m in enumerate(self.modes):
            src = self.src[p]
            if src[0] is None:
                continue
            k = (int(m) + 1) % self.L
            out[self.row_off[p]:self.row_off[p + 1]] = F[src, k]
        return np.moveaxis(out, 0, axis)

    def samples_from_rows(self, X: np.ndarray, axis: int) -> np.ndarray:
        """Inverse of ``rows_from_samples`` on the half-ring radii (shape (M-1) L)."""
        X = np.moveaxis(X, axis, 0)
        rest = X.shape[1:]
        F = np.zeros((self.M, self.L) + rest, dtype=complex)
        for p, m in enumerate(self.modes):
            src = self.src[p]
            if src[0] is None:
                continue
            k = (int(m) + 1) % self.L
            F[src, k] = X[self.row_off[p]:self.row_off[p + 1]]
        out = np.fft.ifft(F[1:], axis=1, norm="ortho").reshape(((self.M - 1) * self.L,) + rest)
        return np.moveaxis(out, 0, axis)

    def apply_blocks(self, X: np.ndarray, axis: int, which: str) -> np.ndarray:
        """Blockwise matrix action along ``axis`` (mode space unless stated).

        ``which``: "B" (modes -> rows), "Bs" (scaled), "BsH" (rows -> modes),
        "QH" and "Q" (modes -> modes).
        """
        X = np.moveaxis(X, axis, 0)
        rest = X.shape[1:]
        Y = X.reshape(X.shape[0], -1)
        n_out = self.n_rows if which in ("B", "Bs") else self.N
        out = np.zeros((n_out, Y.shape[1]), dtype=complex)
        for p, cols in enumerate(self.cols):
            rs = slice(self.row_off[p], self.row_off[p + 1])
            if which == "B":
                out[rs] = self.B[p] @ Y[cols]
            elif which == "Bs":
                out[rs] = self.Bs[p] @ Y[cols]
            elif which == "BsH":
                out[cols] = self.Bs[p].T @ Y[rs]
            elif which == "QH":
                out[cols] = self.Q[p].T @ Y[cols]
            elif which == "Q":
                out[cols] = self.Q[p] @ Y[cols]
            else:
                raise ParameterError(f"unknown block action {which!r}")
        return np.moveaxis(out.reshape((n_out,) + rest), 0, axis)

    def holomorphic_vector(self, m: int) -> np.ndarray:
        """Discrete analogue of (z - c)^m in node space: the kernel vector of mode m."""
        if m < 0 or not self.valid(m):
            raise ParameterError(f"no discrete holomorphic mode of degree {m}")
        p = int(np.flatnonzero(self.modes == m)[0])
        k = int(np.argmin(self.lam[p]))
        v = np.zeros(self.N, dtype=complex)
        v[self.cols[p]] = self.Q[p][:, k] / np.sqrt(self.mode_w[self.cols[p]])
        u = self.from_modes(v, 0)
        top = u[(self.M - 1) * self.L]
        return u * (self.R ** m / top)


# -- the product system -------------------------------------------------------------

def _as_form(f, n: int) -> Form01:
    if isinstance(f, Form01):
        if f.n != n:
            raise ParameterError(f"form has {f.n} components, grid has {n} factors")
        return f
    if n == 1 and (isinstance(f, ScalarData) or callable(f) or np.isscalar(f)):
        if np.isscalar(f):
            c = complex(f)
            return Form01(1, (lambda Z: np.full(np.shape(Z)[:-1], c),), name=f"const {c}")
        return Form01(1, (lambda Z: f(np.asarray(Z)[..., 0]),), name=getattr(f, "name", "data"))
    raise ParameterError("data must be a Form01 (or scalar data when n = 1)")


def _outer_points(axes: list) -> np.ndarray:
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack(grids, axis=-1)


@dataclass
class DiscreteDbarSystem:
    """Box-scheme dbar system on the tensor-polar grid of a product of discs.

    ``factors`` is a ProductDomain, a single disc (n = 1) or a list of discs;
    ``grid`` is the ring count M or a pair (M, L).
    """

    factors: object
    f: object
    grid: object = 32
    chunk: int = 1 << 20
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        fac = self.factors
        if isinstance(fac, ProductDomain):
            fac = fac.factors
        elif isinstance(fac, PlanarDomain):
            fac = (fac,)
        fac = tuple(fac)
        if not fac:
            raise ParameterError("need at least one factor")
        M, L = (self.grid, self.grid) if np.isscalar(self.grid) else tuple(self.grid)
        self.shape = (int(M), int(L))
        self.parts = [_PolarFactor(d, int(M), int(L)) for d in fac]
        self.n = len(self.parts)
        self.form = _as_form(self.f, self.n)

    # grid data ---------------------------------------------------------------
    @property
    def node_shape(self) -> tuple:
        return tuple(p.N for p in self.parts)

    @property
    def points(self) -> np.ndarray:
        return _outer_points([p.nodes for p in self.parts])

    @property
    def weights(self) -> np.ndarray:
        w = np.ones(())
        for p in self.parts:
            w = np.multiply.outer(w, p.weights)
        return w

    @property
    def n_unknowns(self) -> int:
        return int(np.prod(self.node_shape))

    @property
    def n_rows(self) -> int:
        tot = 0
        for j, p in enumerate(self.parts):
            tot += p.n_rows * int(np.prod([q.N for k, q in enumerate(self.parts) if k != j]))
        return tot

    def _sample(self, j: int, fun) -> np.ndarray:
        """fun on row points of factor j times nodes of the other factors."""
        axes = [p.row_points if k == j else p.nodes for k, p in enumerate(self.parts)]
        shape = tuple(len(a) for a in axes)
        out = np.empty(shape, dtype=complex)
        step = max(1, self.chunk // max(1, int(np.prod(shape[1:]))))
        for s in range(0, shape[0], step):
            sub = [axes[0][s:s + step]] + axes[1:]
            out[s:s + step] = fun(_outer_points(sub))
        return out

    # operator pieces ------------------------------------------------------------
    def _to_modes(self, U: np.ndarray) -> np.ndarray:
        for j, p in enumerate(self.parts):
            U = p.to_modes(U, j)
        return U

    def _from_modes(self, U: np.ndarray) -> np.ndarray:
        for j, p in enumerate(self.parts):
            U = p.from_modes(U, j)
        return U

    def _scale(self, X: np.ndarray, skip: int, power: float) -> np.ndarray:
        for k, p in enumerate(self.parts):
            if k != skip:
                shp = [1] * self.n
                shp[k] = p.N
                X = X * (p.mode_w ** power).reshape(shp)
        return X

    def rhs_rows(self, j: int) -> np.ndarray:
        """Weighted row-space right-hand side of component j (others in mode space)."""
        F = self._sample(j, lambda Z: self.form.component(j, Z))
        for k, p in enumerate(self.parts):
            F = p.rows_from_samples(F, k) if k == j else p.to_modes(F, k)
        return self._scale(F, j, 0.5)

    def apply(self, U: np.ndarray) -> list:
        """Discrete dbar of node values U: per component, values at the half-ring
        row points of that factor times the nodes of the others."""
        U = np.asarray(U, dtype=complex).reshape(self.node_shape)
        out = []
        for j, p in enumerate(self.parts):
            X = p.to_modes(U, j)
            X = p.apply_blocks(X, j, "B")
            out.append(p.samples_from_rows(X, j))
        return out

    def consistency_error(self, u, dbar) -> float:
        """max |discrete dbar of sampled u - sampled dbar u| over half-ring rows.

        ``dbar(j, Z)`` gives the exact derivative in zbar_j."""
        U = u(self.points)
        got = self.apply(U)
        worst = 0.0
        for j, p in enumerate(self.parts):
            half = p.row_points.reshape(p.M, p.L)[1:].ravel()
            axes = [half if k == j else q.nodes for k, q in enumerate(self.parts)]
            ref = dbar(j, _outer_points(axes))
            worst = max(worst, float(np.max(np.abs(got[j] - ref))))
        return worst

    def _weighted_apply(self, V: np.ndarray) -> list:
        return [p.apply_blocks(V, j, "Bs") for j, p in enumerate(self.parts)]

    def _weighted_adjoint(self, Fs: list) -> np.ndarray:
        G = np.zeros(self.node_shape, dtype=complex)
        for j, p in enumerate(self.parts):
            G += p.apply_blocks(Fs[j], j, "BsH")
        return G

    def holomorphic_vector(self, degrees) -> np.ndarray:
        """Discrete tensor monomial prod_j (z_j - c_j)^degrees[j] on the node grid."""
        if len(degrees) != self.n:
            raise ParameterError("one degree per factor")
        v = np.ones(())
        for p, m in zip(self.parts, degrees):
            v = np.multiply.outer(v, p.holomorphic_vector(int(m)))
        return v


# -- solvers -------------------------------------------------------------------------

def least_norm_solve(sys: DiscreteDbarSystem, method: str = "eigen", tol: float = 1e-10,
                     residual_tol: float = 1e-2, seed: int = 0, iter_lim: int | None = None):
    """Minimum weighted-norm least-squares solution of the discrete dbar system.

    ``method="eigen"`` diagonalizes the Kronecker-sum normal matrix; ``"lsqr"``
    runs LSQR (zero start, so the iterate is the minimum-norm one) on the same
    operator.  Raises DataError when the relative residual exceeds
    ``residual_tol`` (data not dbar-closed at grid scale).  Returns a
    SolutionField for n = 1 and a ProductField otherwise.
    """
    Fs = [sys.rhs_rows(j) for j in range(sys.n)]
    fnorm = float(np.sqrt(sum(np.sum(np.abs(F) ** 2) for F in Fs)))
    info = {}
    if method == "eigen":
        G = sys._weighted_adjoint(Fs)
        for j, p in enumerate(sys.parts):
            G = p.apply_blocks(G, j, "QH")
        lam = np.zeros(())
        for p in sys.parts:
            lam = np.add.outer(lam, p.eigvals)
        cut = tol * float(lam.max())
        null = lam <= cut
        lam[null] = 1.0
        G /= lam
        G[null] = 0.0
        del lam, null
        V = G
        for j, p in enumerate(sys.parts):
            V = p.apply_blocks(V, j, "Q")
    elif method == "lsqr":
        shape = sys.node_shape
        row_shapes = [F.shape for F in Fs]
        sizes = [F.size for F in Fs]

        def mv(x):
            return np.concatenate([y.ravel() for y in sys._weighted_apply(x.reshape(shape))])

        def rmv(y):
            parts, s = [], 0
            for shp, sz in zip(row_shapes, sizes):
                parts.append(y[s:s + sz].reshape(shp))
                s += sz
            return sys._weighted_adjoint(parts).ravel()

        A = LinearOperator((sum(sizes), sys.n_unknowns), matvec=mv, rmatvec=rmv, dtype=complex)
        b = np.concatenate([F.ravel() for F in Fs])
        res = lsqr(A, b, atol=tol, btol=tol, iter_lim=iter_lim or 20 * sys.n_unknowns)
        V = res[0].reshape(shape)
        info = {"istop": int(res[1]), "iterations": int(res[2])}
    else:
        raise ParameterError(f"unknown method {method!r}")
    resid = 0.0
    for j, p in enumerate(sys.parts):
        r = p.apply_blocks(V, j, "Bs")
        r -= Fs[j]
        resid += float(np.sum(np.abs(r) ** 2))
        Fs[j] = None
        del r
    resid = float(np.sqrt(resid))
    rel = resid / fnorm if fnorm > 0 else 0.0
    if rel > residual_tol:
        raise DataError(f"inconsistent discrete system: relative residual {rel:.3g}")
    U = V
    for j, p in enumerate(sys.parts):
        shp = [1] * sys.n
        shp[j] = p.N
        U = U / np.sqrt(p.mode_w).reshape(shp)
    U = sys._from_modes(U)
    meta = {"method": method, "grid": list(sys.shape), "tol": tol, "seed": seed,
            "residual": rel, **info}
    if sys.n == 1:
        return SolutionField(sys.parts[0].nodes, U, sys.parts[0].weights, meta)
    return ProductField(sys.points, U, sys.weights, meta)


def discrete_canonicity(sys: DiscreteDbarSystem, field, max_degree: int = 4) -> float:
    """max |<u, e>| / (||u|| ||e||) over discrete tensor monomials of total degree <= max_degree."""
    from itertools import product as iproduct

    w = sys.weights
    u = np.asarray(field.values)
    nu = np.sqrt(np.sum(np.abs(u) ** 2 * w))
    if nu == 0:
        return 0.0
    worst = 0.0
    for deg in iproduct(range(max_degree + 1), repeat=sys.n):
        if sum(deg) > max_degree:
            continue
        e = sys.holomorphic_vector(deg)
        ip = np.sum(u * np.conj(e) * w)
        worst = max(worst, float(abs(ip) / (nu * np.sqrt(np.sum(np.abs(e) ** 2 * w)))))
    return worst


def compare_fields(a, b) -> dict:
    """Sup and discrete L2 differences of two fields on the same points.

    The L2 norm uses the weights of ``b`` (or of ``a``); without weights it is
    the root-mean-square difference.
    """
    pa, pb = np.asarray(a.points), np.asarray(b.points)
    va, vb = np.asarray(a.values), np.asarray(b.values)
    if pa.shape != pb.shape or va.shape != vb.shape or not np.allclose(pa, pb, atol=1e-12):
        raise ParameterError("fields live on different grids")
    d = va - vb
    w = b.weights if getattr(b, "weights", None) is not None else getattr(a, "weights", None)
    w = np.ones(d.shape) / max(d.size, 1) if w is None else np.asarray(w)
    l2 = float(np.sqrt(np.sum(np.abs(d) ** 2 * w)))
    nb = float(np.sqrt(np.sum(np.abs(vb) ** 2 * w)))
    if d.size == 0:
        return {"sup_diff": 0.0, "l2_diff": 0.0, "rel_l2_diff": 0.0, "argmax": [], "at": []}
    i = np.unravel_index(int(np.argmax(np.abs(d))), d.shape)
    at = pa[i]
    at = [complex(x) for x in np.atleast_1d(at)]
    return {"sup_diff": float(np.abs(d[i])), "l2_diff": l2,
            "rel_l2_diff": l2 / nb if nb > 0 else l2,
            "argmax": [int(x) for x in i], "at": [[z.real, z.imag] for z in at]}


# -- cross-oracle comparison ------------------------------------------------------------

def compact_subsample(part: _PolarFactor, radii=(0.0, 0.25, 0.5, 0.75), frac: float = 0.1):
    """Node indices at fixed unit radii and angles shared by all grids with
    M and L divisible by 8; only radii inside the compact subset are kept."""
    rmax = 1.0 - frac * 2.0
    idx = []
    for k, r in enumerate(radii):
        if r > rmax + 1e-12:
            continue
        if r == 0:
            idx.append(part.N - 1)
            continue
        i = int(round(r * part.M)) - 1
        if abs(part.r[i] - r) > 1e-12:
            raise ParameterError("ring count must be divisible by 8")
        l = (k * part.L // 8) % part.L
        idx.append(i * part.L + l)
    return np.array(idx)


def compare_with_tilde(pd: ProductDomain, f: Form01, grid=32, config=None,
                       field=None) -> dict:
    """least_norm_solve vs solve_tilde on a deterministic compact subsample of nodes."""
    sys = DiscreteDbarSystem(pd, f, grid)
    field = least_norm_solve(sys) if field is None else field
    idx = [compact_subsample(p) for p in sys.parts]
    sub = np.ix_(*idx)
    pts = field.points[sub]
    wts = field.weights[sub]
    oracle = ProductField(pts, field.values[sub], wts)
    tilde = solve_tilde(pd, f, pts.reshape(-1, pd.n), config)
    tf = ProductField(pts, np.asarray(tilde.values).reshape(pts.shape[:-1]), wts)
    rec = compare_fields(oracle, tf)
    rec.update({"grid": list(sys.shape), "targets": int(np.prod(pts.shape[:-1])),
                "residual": field.meta.get("residual")})
    return rec
