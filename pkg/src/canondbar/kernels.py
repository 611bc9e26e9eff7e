"""Cauchy kernel H, its harmonic correction L, the solution kernel S = L - H and
the Bergman kernel K on a planar domain."""
from __future__ import annotations

import numpy as np

from .errors import DomainMembershipError, ParameterError, SingularityError
from .geometry import TWO_PI, PlanarDomain, exhaustion
from .greens import GreenEvaluator, NystromSolver
from .report import EstimateReport, PairSampler, radial_slope, sample_interior, sup_with_argmax

_SEP = 1e-8


def kernel_H(w, z):
    w = np.asarray(w, dtype=complex)
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z - w) <= _SEP * max(1.0, float(np.max(np.abs(w), initial=0.0)))):
        raise SingularityError("Cauchy kernel evaluated on the diagonal")
    return 1.0 / (2j * np.pi * (z - w))


class KernelSet:
    """Evaluators for H, L, S, K and the Wirtinger gradient of S on one domain.

    All evaluators take broadcastable arrays ``w`` (pole, interior) and ``z``.
    Discs use closed forms; other domains solve one Dirichlet problem per
    distinct pole with boundary data H(w, .).
    """

    def __init__(self, dom: PlanarDomain, method: str | None = None, N: int = 256):
        if method is None:
            method = "closed-form-disc" if dom.is_disc else "nystrom-backed"
        if method not in ("closed-form-disc", "nystrom-backed"):
            raise ParameterError(f"unknown kernel method {method!r}")
        if method == "closed-form-disc" and not dom.is_disc:
            raise ParameterError("closed-form kernels need a disc")
        self.dom = dom
        self.method = method
        self.N = N
        self.solver = NystromSolver(dom, N) if method == "nystrom-backed" else None
        self._green = None

    # -- helpers -------------------------------------------------------
    def _prep(self, w, z, allow_diag=False):
        w = np.asarray(w, dtype=complex)
        z = np.asarray(z, dtype=complex)
        w, z = np.broadcast_arrays(w, z)
        if np.any(self.dom.gauge(w) >= 1.0):
            raise DomainMembershipError("pole w must be strictly inside the domain")
        if np.any(self.dom.gauge(z) > 1.0 + 1e-12):
            raise DomainMembershipError("z outside the closed domain")
        if not allow_diag and np.any(np.abs(z - w) <= _SEP * self.dom.diameter):
            raise SingularityError("kernel evaluated on the diagonal")
        return w, z

    def _unit(self, x):
        return (x - self.dom.center) / self.dom.params["radius"]

    def _field(self, w, z):
        """Harmonic extension of H(w, .) with one column per distinct pole,
        evaluated pairwise; boundary z are nudged inside by 1e-12 d."""
        poles, inv = np.unique(w.ravel(), return_inverse=True)
        nodes = self.solver.quad.nodes
        fld = self.solver.solve(1.0 / (2j * np.pi * (nodes[:, None] - poles[None, :])))
        x = z.ravel().copy()
        bd = self.dom.gauge(x) >= 1.0 - 1e-13
        x[bd] = self.dom.center + (x[bd] - self.dom.center) * (1 - 1e-12)
        return fld, x, inv

    # -- kernels -------------------------------------------------------
    def H(self, w, z):
        w, z = self._prep(w, z)
        return kernel_H(w, z)

    def L(self, w, z):
        w, z = self._prep(w, z, allow_diag=True)
        if self.method == "closed-form-disc":
            R = self.dom.params["radius"]
            ww, zz = self._unit(w), self._unit(z)
            return np.conj(zz) / (2j * np.pi * (1 - ww * np.conj(zz))) / R
        fld, x, inv = self._field(w, z)
        out = fld(x, cols=inv).reshape(w.shape)
        bd = self.dom.gauge(z) >= 1.0 - 1e-13
        if np.any(bd):
            out[bd] = 1.0 / (2j * np.pi * (z[bd] - w[bd]))
        return out

    def S(self, w, z):
        w, z = self._prep(w, z)
        if self.method == "closed-form-disc":
            R = self.dom.params["radius"]
            ww, zz = self._unit(w), self._unit(z)
            return (np.abs(zz) ** 2 - 1) / (2j * np.pi * (1 - ww * np.conj(zz)) * (zz - ww)) / R
        return self.L(w, z) - kernel_H(w, z)

    def K(self, w, z):
        w, z = self._prep(w, z, allow_diag=self.method == "closed-form-disc")
        if self.method == "closed-form-disc":
            R = self.dom.params["radius"]
            ww, zz = self._unit(w), self._unit(z)
            return 1.0 / (np.pi * (1 - ww * np.conj(zz)) ** 2) / R**2
        fld, x, inv = self._field(w, z)
        fr, fi = fld.holomorphic_derivatives(x, cols=inv)
        return (1j * np.conj(fr) - np.conj(fi)).reshape(w.shape)

    def solution_gradient(self, w, z):
        """(dS/dz, dS/dzbar)."""
        w, z = self._prep(w, z)
        if self.method == "closed-form-disc":
            R = self.dom.params["radius"]
            ww, zz = self._unit(w), self._unit(z)
            dz = 1.0 / (2j * np.pi * (zz - ww) ** 2) / R**2
            dzb = 1.0 / (2j * np.pi * (1 - ww * np.conj(zz)) ** 2) / R**2
            return dz, dzb
        fld, x, inv = self._field(w, z)
        fr, fi = fld.holomorphic_derivatives(x, cols=inv)
        dz_L = 0.5 * (fr + 1j * fi)
        dzb_L = 0.5 * (np.conj(fr) + 1j * np.conj(fi))
        dz_H = -1.0 / (2j * np.pi * (z.ravel() - w.ravel()) ** 2)
        return (dz_L - dz_H).reshape(w.shape), dzb_L.reshape(w.shape)

    def solution_gradient_norm(self, w, z):
        """Euclidean norm of the real gradient of the complex function S(w, .)."""
        a, b = self.solution_gradient(w, z)
        return np.sqrt(2 * (np.abs(a) ** 2 + np.abs(b) ** 2))

    @property
    def green(self) -> GreenEvaluator:
        if self._green is None:
            self._green = GreenEvaluator(self.dom, None, self.N)
        return self._green


def kernel_L(ks: KernelSet, w, z):
    return ks.L(w, z)


def kernel_S(ks: KernelSet, w, z):
    return ks.S(w, z)


def kernel_K(ks: KernelSet, w, z):
    return ks.K(w, z)


def kernel_S_gradient(ks: KernelSet, w, z):
    return ks.solution_gradient(w, z)


def ring_average_correction(ks: KernelSet, w: complex, z: complex, eps: float | None = None,
                n: int = 64) -> complex:
    """L from the mean of G(., z) on a small circle about w (cross-check only).

    Default radius is min(|z - w|, delta(w)) / 4.
    """
    w, z = complex(w), complex(z)
    dw = float(ks.dom.distance_to_boundary(w))
    emax = 0.5 * min(abs(z - w), dw)
    if eps is None:
        eps = 0.5 * emax
    if not 0 < eps <= emax:
        raise ParameterError("ring radius must lie in (0, min(|z-w|, delta(w))/2]")
    t = TWO_PI * np.arange(n) / n
    g = ks.green.green(w + eps * np.exp(1j * t), z)
    integral = np.sum(g * np.exp(-1j * t)) * (TWO_PI / n)
    return 1.0 / (2j * np.pi * (z - w)) - integral / (eps * np.pi * 1j)


def cauchy_riemann_residual(ks: KernelSet, w, z, h: float = 1e-5):
    """|dL/dwbar| / |L| by centered differences in w."""
    w = np.asarray(w, dtype=complex)
    lx = (ks.L(w + h, z) - ks.L(w - h, z)) / (2 * h)
    ly = (ks.L(w + 1j * h, z) - ks.L(w - 1j * h, z)) / (2 * h)
    return np.abs(0.5 * (lx + 1j * ly)) / np.abs(ks.L(w, z))


# -- decay fits ---------------------------------------------------------------

KERNEL_FITS = ("S-first", "S-second", "gradS", "K-bound")


def _kernel_quantity(ks: KernelSet, which: str, w, z):
    if which in ("S-first", "S-second"):
        return np.abs(ks.S(w, z))
    if which == "gradS":
        return ks.solution_gradient_norm(w, z)
    return np.abs(ks.K(w, z))


def _kernel_ratio(ks: KernelSet, which: str, w, z):
    d = ks.dom.diameter
    r = np.abs(z - w)
    q = _kernel_quantity(ks, which, w, z)
    if which == "S-first":
        return q * r / np.log(2 * d / r)
    if which == "S-second":
        return q * r**2 / (ks.dom.distance_to_boundary(z) * np.log(2 * d / r))
    if which == "gradS":
        return q * r**2 / np.log(2 * d / r)
    return q * r**2 / np.log(d / r)


def radial_profile(ks: KernelSet, which: str, rhos: np.ndarray, n_w: int = 200,
                   n_dir: int = 64, seed: int = 0):
    """sup over sampled pairs with |z - w| = rho of the kernel quantity, per rho.

    Poles mix uniform interior points with points graded towards the boundary,
    so the boundary-driven part of the supremum is resolved.
    """
    rng = np.random.default_rng(seed)
    dom = ks.dom
    w_uni = sample_interior(dom, n_w // 2, rng)
    t = rng.random(n_w - n_w // 2) * TWO_PI
    gap = np.exp(rng.uniform(np.log(1e-4), 0.0, t.size))
    w_bd = dom.center + (1 - gap) * (dom.curve(t) - dom.center)
    w = np.concatenate([w_uni, w_bd])
    th = TWO_PI * (np.arange(n_dir) + 0.5) / n_dir
    prof = np.zeros(len(rhos))
    for i, rho in enumerate(rhos):
        zz = w[:, None] + rho * np.exp(1j * th)[None, :]
        ww = np.broadcast_to(w[:, None], zz.shape)
        m = dom.gauge(zz) < 1.0
        if np.any(m):
            prof[i] = np.max(_kernel_quantity(ks, which, ww[m], zz[m]))
    return prof


def fit_kernel_decay(ks: KernelSet, sampler: PairSampler, which: str, n: int = 1000,
                     doubling: bool = True, rho_range=(1e-3, 0.25)) -> EstimateReport:
    """Empirical supremum of a normalized kernel bound, plus the log-log slope of
    the radial profile of the kernel quantity over ``rho_range`` (times d)."""
    if which not in KERNEL_FITS:
        raise ParameterError(f"unknown kernel bound {which!r}")
    if n <= 0:
        raise ParameterError("empty sample")
    w, z = sampler.sample(n)
    ratio = _kernel_ratio(ks, which, w, z)
    const, arg = sup_with_argmax(ratio, w, z)
    stab = None
    comps = {"sup": const}
    if doubling:
        w2, z2 = sampler.sample(2 * n, seed_offset=1)
        s2 = float(np.max(_kernel_ratio(ks, which, w2, z2)))
        stab = s2 / const if const > 0 else 1.0
        comps["sup@2n"] = s2
    d = ks.dom.diameter
    rhos = np.geomspace(rho_range[0] * d, rho_range[1] * d, 14)
    prof = radial_profile(ks, which, rhos, seed=sampler.seed)
    slope = float(np.polyfit(np.log(rhos), np.log(prof), 1)[0])
    comps["profile"] = prof.tolist()
    return EstimateReport(which, n, const, slope, arg, stab,
                          {"method": ks.method, "N": ks.N, "rhos": rhos.tolist()}, comps)


# -- exhaustion stability ---------------------------------------------------------

def stability_probe(dom: PlanarDomain, levels, kappa: float = 0.5, n_w: tuple = (12, 32),
                    n_z: tuple = (121, 96), min_sep: float = 0.05, mode: str = "collar",
                    method: str | None = None, N: int = 256) -> list[dict]:
    """Per-level sup deviations |S_l(w, h_l(z)) - S(w, z)| and of the gradient of
    z -> S_l(w, h_l(z)) against grad S, over w with gauge <= kappa and z in the
    closed domain with |z - w| >= min_sep * d."""
    levels = list(levels)
    if any(b <= a for a, b in zip(levels[:-1], levels[1:])):
        raise ParameterError("levels must be increasing")
    steps = [exhaustion(dom, l, mode=mode) for l in levels]
    if not 0 < kappa < min(s.rho for s in steps):
        raise ParameterError("compact set not inside the smallest inner domain")
    c = dom.center
    th_w = TWO_PI * np.arange(n_w[1]) / n_w[1]
    s_w = kappa * np.sqrt((np.arange(n_w[0]) + 1) / n_w[0])
    ws = (c + s_w[:, None] * (dom.curve(th_w) - c)[None, :]).ravel()
    th_z = TWO_PI * np.arange(n_z[1]) / n_z[1]
    s_z = np.linspace(0.0, 1.0, n_z[0])
    zs = (c + s_z[:, None] * (dom.curve(th_z) - c)[None, :]).ravel()
    ks = KernelSet(dom, method, N)
    out = []
    for step in steps:
        ks_l = KernelSet(step.inner_domain, method, N)
        hz = step.h(zs)
        jz, jzb = step.jacobian(zs)
        dev = gdev = 0.0
        for w in ws:
            m = np.abs(zs - w) >= min_sep * dom.diameter
            z, h = zs[m], hz[m]
            sl = ks_l.S(w, h)
            s0 = ks.S(w, z)
            dev = max(dev, float(np.max(np.abs(sl - s0))))
            a, b = ks_l.solution_gradient(w, h)
            gz = a * jz[m] + b * np.conj(jzb[m])
            gzb = a * jzb[m] + b * np.conj(jz[m])
            a0, b0 = ks.solution_gradient(w, z)
            g = np.sqrt(2 * (np.abs(gz - a0) ** 2 + np.abs(gzb - b0) ** 2))
            gdev = max(gdev, float(np.max(g)))
        out.append({"level": step.level, "rho": step.rho, "dist": step.dist,
                    "mode": step.mode, "deviation": dev, "grad_deviation": gdev})
    return out
