"""Dirichlet problems, the positive Green's function and its gradient."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import DataError, DomainMembershipError, ParameterError, SingularityError
from .geometry import TWO_PI, PlanarDomain, boundary_quadrature
from .report import EstimateReport, PairSampler, sup_with_argmax

_CHUNK = 2048
_MAX_UPSAMPLE = 64


def _fourier_resample(values: np.ndarray, M: int) -> np.ndarray:
    """Trigonometric interpolation of periodic samples (axis 0) onto M points."""
    N = values.shape[0]
    if M == N:
        return values
    c = np.fft.fft(values, axis=0)
    out = np.zeros((M,) + values.shape[1:], dtype=complex)
    h = N // 2
    out[:h] = c[:h]
    out[M - h:] = c[N - h:]
    if N % 2 == 0:
        out[h] = 0.5 * c[h]
        out[M - h] += 0.5 * c[h]
    return np.fft.ifft(out, axis=0) * (M / N)


def _fourier_derivative(values: np.ndarray) -> np.ndarray:
    N = values.shape[0]
    k = np.fft.fftfreq(N, d=1.0 / N)
    if N % 2 == 0:
        k[N // 2] = 0
    shape = (N,) + (1,) * (values.ndim - 1)
    return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(values, axis=0), axis=0)


class NystromSolver:
    """Second-kind double-layer discretization of the interior Dirichlet problem.

    The density mu solves (I/2 - K) mu = g and the solution is
    u = Re C[Re mu] + i Re C[Im mu] with C the Cauchy integral over the boundary.
    """

    def __init__(self, dom: PlanarDomain, N: int = 256):
        self.dom = dom
        self.N = int(N)
        self.quad = q = boundary_quadrature(dom, self.N)
        zeta, dz = q.nodes, q.tangents
        speed = np.abs(dz)
        nu = -1j * dz / speed
        diff = zeta[:, None] - zeta[None, :]
        np.fill_diagonal(diff, 1.0)
        kern = np.real(np.conj(nu)[None, :] * diff) / np.abs(diff) ** 2
        kern *= (speed * (TWO_PI / self.N))[None, :] / TWO_PI
        kappa = dom.curvature(q.t)
        np.fill_diagonal(kern, -kappa * speed / (2 * self.N))
        self.matrix = 0.5 * np.eye(self.N) - kern
        self._lu = lu_factor(self.matrix)
        self.spacing = float(q.weights.max())
        # off-diagonal part of the Plemelj principal value operator
        wz = q.dzeta
        pv = -wz[None, :] / (1j * TWO_PI * diff)
        np.fill_diagonal(pv, 0.0)
        self._pv = pv
        self._pv_rowsum = pv.sum(axis=1)

    def hardy_trace(self, mu: np.ndarray) -> np.ndarray:
        """Boundary values of the holomorphic function C[mu] (interior limit).

        Uses F = mu + (1/2 pi i) int (mu(zeta) - mu_i)/(zeta - zeta_i) dzeta, whose
        integrand is smooth, so the trapezoid rule stays spectral.
        """
        mu = mu.reshape(self.N, -1).astype(complex)
        dmu = _fourier_derivative(mu) / self.quad.tangents[:, None]
        return (mu + self._pv @ mu - self._pv_rowsum[:, None] * mu
                + (self.quad.dzeta / (1j * TWO_PI))[:, None] * dmu)

    def solve_density(self, g: np.ndarray) -> np.ndarray:
        g = np.asarray(g)
        if not np.all(np.isfinite(g)):
            raise DataError("boundary data not finite (pole on the boundary?)")
        if np.iscomplexobj(g):
            return lu_solve(self._lu, g.real) + 1j * lu_solve(self._lu, g.imag)
        return lu_solve(self._lu, g)

    def solve(self, data: Callable | np.ndarray) -> "HarmonicField":
        g = data(self.quad.nodes) if callable(data) else np.asarray(data)
        if g.shape[0] != self.N:
            raise ParameterError("boundary data length does not match the quadrature")
        return HarmonicField(self, self.solve_density(g), g)

    @lru_cache(maxsize=8)
    def _fine_geometry(self, M: int):
        t = TWO_PI * np.arange(M) / M
        return self.dom.curve(t), self.dom.dcurve(t) * (TWO_PI / M)

    def cauchy(self, x: np.ndarray, mu: np.ndarray, cols: np.ndarray | None = None) -> np.ndarray:
        """Barycentric Cauchy integral (1/2 pi i) int mu/(zeta - x) dzeta at interior x.

        Accurate up to the boundary when ``mu`` is the trace of a function
        holomorphic inside (see ``hardy_trace``). ``mu`` has shape (N, m).
        With ``cols`` (one column index per target)
        the result has shape (len(x),), otherwise (len(x), m). Near-boundary
        targets use a spectrally upsampled density.
        """
        x = np.asarray(x, dtype=complex).ravel()
        mu = mu.reshape(self.N, -1)
        m = mu.shape[1]
        out = np.empty((x.size,) if cols is not None else (x.size, m), dtype=complex)
        zeta = self.quad.nodes
        for s in range(0, x.size, _CHUNK):
            xs = x[s:s + _CHUNK]
            dmin = np.abs(zeta[None, :] - xs[:, None]).min(axis=1)
            need = np.clip(8.0 * self.spacing / np.maximum(dmin, 1e-300), 1.0, _MAX_UPSAMPLE)
            level = 2 ** np.ceil(np.log2(need)).astype(int)
            for lev in np.unique(level):
                idx = np.nonzero(level == lev)[0]
                M = self.N * int(lev)
                zf, wf = self._fine_geometry(M)
                xi = xs[idx]
                cm = wf[None, :] / (zf[None, :] - xi[:, None])
                den = cm.sum(axis=1)
                if cols is None:
                    muf = _fourier_resample(mu, M)
                    out[s + idx] = (cm @ muf) / den[:, None]
                else:
                    c = np.asarray(cols).ravel()[s + idx]
                    used, inv = np.unique(c, return_inverse=True)
                    muf = _fourier_resample(mu[:, used], M)
                    out[s + idx] = np.einsum("ij,ji->i", cm, muf[:, inv]) / den
        return out


@dataclass
class HarmonicField:
    """Harmonic extension of (possibly complex, possibly many-column) boundary data.

    Stored as boundary traces of two holomorphic functions F_r, F_i with
    u = Re F_r + i Re F_i.
    """

    solver: NystromSolver
    density: np.ndarray
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        mu = self.density.reshape(self.solver.N, -1)
        self._fr = self.solver.hardy_trace(mu.real)
        self._fi = self.solver.hardy_trace(mu.imag)
        dz = self.solver.quad.tangents[:, None]
        self._dfr = _fourier_derivative(self._fr) / dz
        self._dfi = _fourier_derivative(self._fi) / dz

    @property
    def ncols(self) -> int:
        return 1 if self.density.ndim == 1 else self.density.shape[1]

    def _check(self, x):
        x = np.asarray(x, dtype=complex)
        if not np.all(self.solver.dom.gauge(x) < 1.0):
            raise DomainMembershipError("evaluation point not strictly inside the domain")
        return x

    def near_boundary(self, x) -> np.ndarray:
        """True where x is closer than 5 boundary spacings (accuracy warning)."""
        x = np.asarray(x, dtype=complex).ravel()
        d = np.abs(self.solver.quad.nodes[None, :] - x[:, None]).min(axis=1)
        return d < 5 * self.solver.spacing

    def __call__(self, x, cols=None) -> np.ndarray:
        x = self._check(x)
        cr = self.solver.cauchy(x, self._fr, cols)
        ci = self.solver.cauchy(x, self._fi, cols)
        u = cr.real + 1j * ci.real
        if cols is None and self.density.ndim == 1:
            u = u[:, 0]
        return u.reshape(x.shape) if (cols is not None or self.density.ndim == 1) else u

    def holomorphic_derivatives(self, x, cols=None):
        """(F_r', F_i') where Re F_r = Re u and Re F_i = Im u."""
        x = self._check(x)
        fr = self.solver.cauchy(x, self._dfr, cols)
        fi = self.solver.cauchy(x, self._dfi, cols)
        if cols is None and self.density.ndim == 1:
            fr, fi = fr[:, 0], fi[:, 0]
        if cols is not None or self.density.ndim == 1:
            fr, fi = fr.reshape(x.shape), fi.reshape(x.shape)
        return fr, fi

    def wirtinger(self, x, cols=None):
        """(du/dz, du/dzbar)."""
        fr, fi = self.holomorphic_derivatives(x, cols)
        return 0.5 * (fr + 1j * fi), 0.5 * (np.conj(fr) + 1j * np.conj(fi))


def dirichlet_solve(dom: PlanarDomain, data: Callable | np.ndarray, N: int = 256) -> HarmonicField:
    return NystromSolver(dom, N).solve(data)


# -- Green's function ------------------------------------------------------------

def _disc_green(z, w):
    return np.log(np.abs((1 - z * np.conj(w)) / (z - w))) / TWO_PI


def _disc_green_dz(z, w):
    return (-np.conj(w) / (1 - z * np.conj(w)) - 1.0 / (z - w)) / (2 * TWO_PI)


class GreenEvaluator:
    """Positive Green's function G(z, w) = -(1/2 pi) log|z - w| + harmonic corrector."""

    def __init__(self, dom: PlanarDomain, method: str | None = None, N: int = 256):
        self.dom = dom
        if method is None:
            method = "closed-form-disc" if dom.is_disc else "nystrom"
        if method not in ("closed-form-disc", "nystrom"):
            raise ParameterError(f"unknown Green method {method!r}")
        if method == "closed-form-disc" and not dom.is_disc:
            raise ParameterError("closed-form Green's function needs a disc")
        self.method = method
        self.solver = NystromSolver(dom, N) if method == "nystrom" else None

    def _validate(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        z, w = np.broadcast_arrays(z, w)
        tol = 1.0 + 1e-12
        if np.any(self.dom.gauge(z) > tol) or np.any(self.dom.gauge(w) > tol):
            raise DomainMembershipError("Green's function needs points in the closed domain")
        if np.any(np.abs(z - w) < 1e-8 * self.dom.diameter):
            raise SingularityError("coincident points")
        return z, w

    def _unit(self, z):
        return (z - self.dom.center) / self.dom.params["radius"]

    def _corrector(self, x, pole, derivative=False):
        """Harmonic extension of (1/2 pi) log|zeta - pole| evaluated at x (pairwise)."""
        poles, inv = np.unique(pole.ravel(), return_inverse=True)
        nodes = self.solver.quad.nodes
        g = np.log(np.abs(nodes[:, None] - poles[None, :])) / TWO_PI
        fld = self.solver.solve(g)
        inside = self.dom.gauge(x.ravel()) < 1.0
        if derivative:
            out = np.zeros(x.size, dtype=complex)
            fr, _ = fld.holomorphic_derivatives(x.ravel()[inside], cols=inv[inside])
            out[inside] = fr
            return out.reshape(x.shape)
        out = np.empty(x.size)
        out[inside] = fld(x.ravel()[inside], cols=inv[inside]).real
        # on the boundary the corrector equals its data
        bd = ~inside
        out[bd] = np.log(np.abs(x.ravel()[bd] - poles[inv[bd]])) / TWO_PI
        return out.reshape(x.shape)

    def green(self, z, w) -> np.ndarray:
        z, w = self._validate(z, w)
        if self.method == "closed-form-disc":
            return _disc_green(self._unit(z), self._unit(w))
        # the deeper point plays the pole (G is symmetric)
        swap = self.dom.gauge(z) < self.dom.gauge(w)
        pole = np.where(swap, z, w)
        x = np.where(swap, w, z)
        return -np.log(np.abs(z - w)) / TWO_PI + self._corrector(x, pole)

    def gradient(self, z, w) -> np.ndarray:
        """grad_z G as an array of shape z.shape + (2,)."""
        z, w = self._validate(z, w)
        if np.any(self.dom.gauge(w) >= 1.0):
            raise DomainMembershipError("pole must be strictly inside")
        if self.method == "closed-form-disc":
            d = _disc_green_dz(self._unit(z), self._unit(w)) / self.dom.params["radius"]
            return np.stack([2 * d.real, -2 * d.imag], axis=-1)
        d = -0.5 / (TWO_PI * (z - w)) + 0.5 * self._corrector(z, w, derivative=True)
        grad = np.stack([2 * d.real, -2 * d.imag], axis=-1)
        # a shallow pole is unresolved on the boundary grid: differentiate the
        # symmetric evaluation (deeper point as pole) by centered differences
        shallow = (self.dom.gauge(w) > self.dom.gauge(z)) & (self.dom.gauge(z) < 1.0)
        if np.any(shallow):
            zs, ws = z[shallow], w[shallow]
            h = 1e-5 * self.dom.distance_to_boundary(zs)
            gx = (self.green(zs + h, ws) - self.green(zs - h, ws)) / (2 * h)
            gy = (self.green(zs + 1j * h, ws) - self.green(zs - 1j * h, ws)) / (2 * h)
            grad[shallow] = np.stack([gx, gy], axis=-1)
        return grad


def green(ev: GreenEvaluator, z, w):
    return ev.green(z, w)


def green_gradient(ev: GreenEvaluator, z, w):
    return ev.gradient(z, w)


GREEN_FITS = ("G-bound", "g2-bound", "Gd-bound", "log-bound")


def _green_ratios(ev: GreenEvaluator, which: str, w, z) -> dict:
    d = ev.dom.diameter
    r = np.abs(z - w)
    lg = np.log(d / r)
    G = ev.green(z, w)
    if which == "log-bound":
        return {"log": TWO_PI * G / lg}
    dw = ev.dom.distance_to_boundary(w)
    if which == "G-bound":
        return {"G": G * r / (dw * lg)}
    dz = ev.dom.distance_to_boundary(z)
    if which == "g2-bound":
        return {"g2": G * r**2 / (dz * dw * lg)}
    grad = np.linalg.norm(ev.gradient(z, w), axis=-1)
    return {"grad": grad * r / lg, "grad-delta": grad * r**2 / (dw * lg)}


def fit_green_bounds(ev: GreenEvaluator, sampler: PairSampler, which: str,
                     n: int = 1000, doubling: bool = True) -> EstimateReport:
    """Empirical supremum of a normalized Green's function bound over random pairs.

    With ``doubling`` the fit is repeated on a fresh sample of twice the size and
    ``stability_ratio`` = sup(2n) / sup(n).
    """
    if which not in GREEN_FITS:
        raise ParameterError(f"unknown Green bound {which!r}")
    if n <= 0:
        raise ParameterError("empty sample")
    w, z = sampler.sample(n)
    comps = _green_ratios(ev, which, w, z)
    sups = {k: sup_with_argmax(v, w, z) for k, v in comps.items()}
    key = max(sups, key=lambda k: sups[k][0])
    const, arg = sups[key]
    ratio = None
    comp_out = {k: v[0] for k, v in sups.items()}
    if doubling:
        w2, z2 = sampler.sample(2 * n, seed_offset=1)
        comps2 = _green_ratios(ev, which, w2, z2)
        s2 = {k: float(np.max(v)) for k, v in comps2.items()}
        ratio = max(s2[k] / comp_out[k] for k in s2)
        comp_out.update({f"{k}@2n": v for k, v in s2.items()})
    return EstimateReport(which, n, const, None, arg, ratio,
                          {"method": ev.method, "N": getattr(ev.solver, "N", None)}, comp_out)
