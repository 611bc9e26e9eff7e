"""Exact-for-smooth-data solution operator and Bergman projection on a disc.

Data are sampled on a tensor polar grid (Gauss-Legendre radii, equispaced
angles).  Expanding the kernel in Fourier modes reduces the area integral to
one radial integral per mode, which is carried out on a target-adapted rule
after polynomial interpolation of the radial profile.  Because nothing is
singular after the mode expansion, targets may lie anywhere in the closed disc.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from .errors import DomainMembershipError, ParameterError
from .geometry import TWO_PI, PlanarDomain, gauss01


class DiscGrid:
    """Tensor polar grid on the disc of given center and radius."""

    def __init__(self, n_radial: int, n_angular: int, center: complex = 0j,
                 radius: float = 1.0, n_fine: int | None = None):
        if n_radial < 2 or n_angular < 4 or n_angular % 2:
            raise ParameterError("grid needs n_radial >= 2 and an even n_angular >= 4")
        self.nr, self.nt = int(n_radial), int(n_angular)
        self.center, self.radius = complex(center), float(radius)
        self.r, self.wr = gauss01(self.nr)
        self.theta = TWO_PI * np.arange(self.nt) / self.nt
        self.n_fine = n_fine or max(2 * self.nr, self.nt + 32)
        self._interp = BarycentricInterpolator(self.r, np.eye(self.nr))
        m = np.fft.fftfreq(self.nt, d=1.0 / self.nt).astype(int)
        self.modes = m
        self._keep = m != -(self.nt // 2)

    @classmethod
    def for_domain(cls, dom: PlanarDomain, n_radial: int, n_angular: int) -> "DiscGrid":
        if not dom.is_disc:
            raise ParameterError("disc grid needs a disc domain")
        return cls(n_radial, n_angular, dom.center, dom.params["radius"])

    @property
    def shape(self) -> tuple:
        return (self.nr, self.nt)

    @property
    def nodes(self) -> np.ndarray:
        return self.center + self.radius * self.r[:, None] * np.exp(1j * self.theta)[None, :]

    @property
    def weights(self) -> np.ndarray:
        """Area weights (dA) of the grid nodes."""
        w = (self.r * self.wr)[:, None] * np.full(self.nt, TWO_PI / self.nt)[None, :]
        return w * self.radius**2

    def to_unit(self, z):
        return (np.asarray(z, dtype=complex) - self.center) / self.radius

    # -- radial weight tables -------------------------------------------------
    @lru_cache(maxsize=16)
    def _tables(self, radii: tuple):
        """Weights A[a, m, k] = int_a^1 l_k(r) (a/r)^(m-1) dr for m >= 1 and
        B[a, m', k] = int_0^a l_k(r) (r/a)^(1-m) dr for m = -m' <= 0."""
        radii = np.asarray(radii)
        npos = self.nt // 2
        u, wu = gauss01(self.n_fine)
        mp = np.arange(1, npos)
        mn = np.arange(0, npos)
        A = np.zeros((radii.size, mp.size, self.nr))
        B = np.zeros((radii.size, mn.size, self.nr))
        for i, a in enumerate(radii):
            if a <= 0.0:
                A[i, 0] = self.wr
                continue
            if a < 1.0:
                la = -np.log(a)
                rf = a ** (1.0 - u)
                P = self._interp(rf)
                logratio = -u * la
                wts = np.exp(np.outer(mp - 1, logratio)) * (wu * rf * la)[None, :]
                A[i] = wts @ P
            rf = a * u
            P = self._interp(rf)
            wts = u[None, :] ** (1 + mn)[:, None] * (wu * a)[None, :]
            B[i] = wts @ P
        return A, B

    def _coefficients(self, g: np.ndarray) -> np.ndarray:
        """Angular Fourier coefficients, shape (..., nr, nt) ordered as fftfreq."""
        c = np.fft.fft(g, axis=-1) / self.nt
        c[..., ~self._keep] = 0.0
        return c

    # -- operators -------------------------------------------------------------
    def T_modes(self, g: np.ndarray, radii: np.ndarray) -> np.ndarray:
        """Output Fourier coefficients (..., len(radii), nt) of T g at the given
        unit-scaled radii; column index is the output frequency in fftfreq order."""
        radii = np.asarray(radii, dtype=float)
        if np.any(radii < 0) or np.any(radii > 1 + 1e-12):
            raise DomainMembershipError("target outside the closed disc")
        radii = np.minimum(radii, 1.0)
        A, B = self._tables(tuple(radii.tolist()))
        gh = self._coefficients(np.asarray(g, dtype=complex))
        npos = self.nt // 2
        out = np.zeros(gh.shape[:-2] + (radii.size, self.nt), dtype=complex)
        # m >= 1 -> output frequency n = m - 1 >= 0
        gp = gh[..., :, 1:npos]                      # (..., nr, m)
        Cw = self.wr[:, None] * self.r[:, None] ** (np.arange(1, npos) + 1)[None, :]
        cterm = np.einsum("...km,km->...m", gp, Cw)
        aterm = np.einsum("amk,...km->...am", A, gp)
        n = np.arange(0, npos - 1)
        out[..., :, n] = -2 * aterm + 2 * (radii[:, None] ** n[None, :]) * cterm[..., None, :]
        # m <= 0 -> n = m - 1 <= -1
        mn = np.arange(0, npos)
        gn = gh[..., :, (-mn) % self.nt]
        bterm = np.einsum("amk,...km->...am", B, gn)
        out[..., :, (-mn - 1) % self.nt] = 2 * bterm
        return out * self.radius

    def T(self, g: np.ndarray, targets=None) -> np.ndarray:
        """T g = int S(w, z) g(z) dzbar^dz with g sampled on the grid (last two axes).

        ``targets=None`` returns values on the grid itself; otherwise an array of
        points in the closed disc (values broadcast over leading axes of g).
        """
        if targets is None:
            modes = self.T_modes(g, self.r)
            return np.fft.ifft(modes, axis=-1) * self.nt
        t = self.to_unit(targets)
        flat = t.ravel()
        rad = np.abs(flat)
        uniq, inv = np.unique(rad, return_inverse=True)
        modes = self.T_modes(g, uniq)[..., inv, :]  # (..., ntarget, nt)
        phase = np.exp(1j * np.outer(np.angle(flat), self.modes))
        vals = np.sum(modes * phase, axis=-1)
        return vals.reshape(vals.shape[:-1] + t.shape)

    def rows(self, targets) -> np.ndarray:
        """Linear functionals of T: ``T g(w_t) = sum(rows[t] * g)``, shape (T, nr, nt)."""
        t = self.to_unit(np.atleast_1d(np.asarray(targets, dtype=complex)).ravel())
        rad = np.abs(t)
        if np.any(rad > 1 + 1e-12):
            raise DomainMembershipError("target outside the closed disc")
        uniq, inv = np.unique(np.minimum(rad, 1.0), return_inverse=True)
        A, B = self._tables(tuple(uniq.tolist()))
        A, B, a = A[inv], B[inv], uniq[inv]
        npos = self.nt // 2
        phi = np.angle(t)
        X = np.zeros((t.size, self.nr, self.nt), dtype=complex)
        mp = np.arange(1, npos)
        Cw = self.wr[:, None] * self.r[:, None] ** (mp + 1)[None, :]
        coef = -2 * A + 2 * (a[:, None, None] ** (mp - 1)[None, :, None]) * Cw.T[None]
        X[:, :, mp] = np.transpose(coef * np.exp(1j * np.outer(phi, mp - 1))[:, :, None], (0, 2, 1))
        mn = np.arange(0, npos)
        coef = 2 * B * np.exp(1j * np.outer(phi, -mn - 1))[:, :, None]
        X[:, :, (-mn) % self.nt] = np.transpose(coef, (0, 2, 1))
        return np.fft.fft(X, axis=-1) * (self.radius / self.nt)

    def T_axes(self, g: np.ndarray, axes: tuple) -> np.ndarray:
        """Apply T (grid output) along the pair of axes (radial, angular)."""
        g = np.moveaxis(np.asarray(g, dtype=complex), axes, (-2, -1))
        return np.moveaxis(self.T(g), (-2, -1), axes)

    # -- Cauchy transform C g(w) = (1/pi) int g(z) / (w - z) dA = T g - 2i int L g dA --
    def _lpart_weights(self) -> np.ndarray:
        """W[j, k] with c_k = sum_j W[j, k] * ghat_{k+1}(r_j)."""
        k = np.arange(0, self.nt // 2 - 1)
        return 2 * self.wr[:, None] * self.r[:, None] ** (k + 2)[None, :]

    def cauchy(self, g: np.ndarray, targets=None) -> np.ndarray:
        """Cauchy transform of grid data (last two axes) on the grid or at targets."""
        t = self.nodes if targets is None else np.asarray(targets, dtype=complex)
        x = self.to_unit(t)
        if np.any(np.abs(x) > 1 + 1e-12):
            raise DomainMembershipError("target outside the closed disc")
        gh = self._coefficients(np.asarray(g, dtype=complex))
        npos = self.nt // 2
        c = np.einsum("...jk,jk->...k", gh[..., :, 1:npos], self._lpart_weights())
        powers = x.reshape(-1)[:, None] ** np.arange(npos - 1)[None, :]
        lead = c.shape[:-1]
        lp = (c.reshape((-1, npos - 1)) @ powers.T).reshape(lead + x.shape)
        base = self.T(g) if targets is None else self.T(g, t)
        return base - self.radius * lp

    def cauchy_rows(self, targets) -> np.ndarray:
        """Row functionals of the Cauchy transform, shape (T, nr, nt)."""
        t = np.atleast_1d(np.asarray(targets, dtype=complex)).ravel()
        x = self.to_unit(t)
        npos = self.nt // 2
        k = np.arange(npos - 1)
        # c_k = sum_{j,l} W[j,k] g[j,l] e^{-i(k+1) theta_l} / nt
        ph = np.exp(-1j * np.outer(k + 1, self.theta)) / self.nt            # (k, l)
        coef = (x[:, None] ** k[None, :])                                     # (T, k)
        lrows = np.einsum("tk,jk,kl->tjl", coef, self._lpart_weights(), ph)
        return self.rows(t) - self.radius * lrows

    def cauchy_axes(self, g: np.ndarray, axes: tuple) -> np.ndarray:
        g = np.moveaxis(np.asarray(g, dtype=complex), axes, (-2, -1))
        return np.moveaxis(self.cauchy(g), (-2, -1), axes)

    def bergman_modes(self, u: np.ndarray) -> np.ndarray:
        """Coefficients b_k with P u = sum_k b_k ((w - c)/R)^k, k < nt/2."""
        uh = self._coefficients(np.asarray(u, dtype=complex))
        k = np.arange(0, self.nt // 2)
        w = self.wr[:, None] * self.r[:, None] ** (k + 1)[None, :]
        return 2 * (k + 1) * np.einsum("...rk,rk->...k", uh[..., :, k], w)

    def project(self, u: np.ndarray, targets=None) -> np.ndarray:
        """Bergman projection of grid data, evaluated on the grid or at targets."""
        b = self.bergman_modes(u)
        t = self.nodes if targets is None else np.asarray(targets, dtype=complex)
        x = self.to_unit(t)
        if np.any(np.abs(x) > 1 + 1e-12):
            raise DomainMembershipError("target outside the closed disc")
        powers = x[..., None] ** np.arange(b.shape[-1])
        lead = b.shape[:-1]
        return np.einsum("...k,jk->...j", b.reshape(lead + (-1,)),
                         powers.reshape(-1, b.shape[-1])).reshape(lead + x.shape)

    def dbar(self, u: np.ndarray) -> np.ndarray:
        """Spectral d/dzbar of grid data (radial Lagrange, angular Fourier)."""
        u = np.asarray(u, dtype=complex)
        D = self._interp.derivative(self.r, der=1) if hasattr(self._interp, "derivative") else None
        if D is None:
            raise ParameterError("interpolator lacks derivatives")
        ur = np.einsum("ij,...jt->...it", D, u)
        uth = np.fft.ifft(1j * self.modes * np.fft.fft(u, axis=-1), axis=-1)
        e = np.exp(1j * self.theta)[None, :]
        r = self.r[:, None]
        return 0.5 * e * (ur + 1j * uth / r) / self.radius
