"""Planar domains bounded by smooth Jordan curves, with quadratures and exhaustions."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.optimize import brentq
from scipy.spatial.distance import pdist
from scipy.special import roots_legendre

from .errors import DomainMembershipError, GeometryError, ParameterError

TWO_PI = 2.0 * np.pi
_DENSE = 1024


def _as_complex(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise ParameterError("non-finite point")
    return z


@dataclass(frozen=True)
class ComplexPoint:
    re: float
    im: float

    def __post_init__(self):
        if not (np.isfinite(self.re) and np.isfinite(self.im)):
            raise ParameterError("ComplexPoint components must be finite")

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    @classmethod
    def of(cls, z: complex) -> "ComplexPoint":
        z = complex(z)
        return cls(z.real, z.imag)


@dataclass(frozen=True, eq=False)
class PlanarDomain:
    """Bounded domain whose boundary is the counterclockwise curve ``curve(t)``.

    ``kind`` is one of ``"disc"``, ``"ellipse"``, ``"fourier"`` or ``"parametric"``;
    closed-form geometry is used for the first two.
    """

    kind: str
    params: dict
    curve: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    dcurve: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    d2curve: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    diameter: float = 0.0
    exterior_ball_radius: float = 0.0
    center: complex = 0j

    # -- metric data ---------------------------------------------------
    @property
    def is_disc(self) -> bool:
        return self.kind == "disc"

    @property
    def is_unit_disc(self) -> bool:
        return self.is_disc and self.params["radius"] == 1.0 and self.center == 0

    def descriptor(self) -> dict:
        d = {"kind": self.kind}
        d.update({k: v for k, v in self.params.items() if k != "center"})
        d["center"] = [self.center.real, self.center.imag]
        return d

    def area(self) -> float:
        t = np.linspace(0, TWO_PI, 4096, endpoint=False)
        g, dg = self.curve(t), self.dcurve(t)
        return float(0.5 * np.sum(np.imag(np.conj(g) * dg)) * TWO_PI / t.size)

    def gauge(self, z) -> np.ndarray:
        """Minkowski functional about the center: < 1 inside, 1 on the boundary."""
        z = _as_complex(z)
        u = z - self.center
        if self.kind == "disc":
            return np.abs(u) / self.params["radius"]
        if self.kind == "ellipse":
            a, b = self.params["a"], self.params["b"]
            return np.hypot(u.real / a, u.imag / b)
        r = np.abs(u)
        out = np.zeros(r.shape)
        nz = r > 0
        out[nz] = r[nz] / self.ray_length(self.center, np.angle(u[nz]))
        return out

    def contains(self, z) -> np.ndarray:
        return self.gauge(z) < 1.0

    def ray_length(self, origin, theta) -> np.ndarray:
        """Distance from ``origin`` to the boundary along direction ``exp(i theta)``."""
        theta = np.asarray(theta, dtype=float)
        origin = np.asarray(origin, dtype=complex)
        e = np.exp(1j * theta)
        if self.kind in ("disc", "ellipse"):
            if self.kind == "disc":
                a = b = self.params["radius"]
            else:
                a, b = self.params["a"], self.params["b"]
            p = origin - self.center
            A = (e.real / a) ** 2 + (e.imag / b) ** 2
            B = 2 * (p.real * e.real / a**2 + p.imag * e.imag / b**2)
            C = (p.real / a) ** 2 + (p.imag / b) ** 2 - 1
            return (-B + np.sqrt(np.maximum(B * B - 4 * A * C, 0.0))) / (2 * A)
        if origin.ndim == 0:
            return self._ray_length_general(complex(origin), theta)
        origin, theta = np.broadcast_arrays(origin, theta)
        out = np.empty(theta.shape)
        for p in np.unique(origin):
            m = origin == p
            out[m] = self._ray_length_general(complex(p), theta[m])
        return out

    def _ray_length_general(self, p: complex, theta: np.ndarray) -> np.ndarray:
        t = np.linspace(0, TWO_PI, _DENSE + 1)
        phi = np.unwrap(np.angle(self.curve(t) - p))
        if np.any(np.diff(phi) <= 0) or abs(phi[-1] - phi[0] - TWO_PI) > 1e-6:
            raise GeometryError(f"domain is not star-shaped about {p}")
        th = phi[0] + np.mod(theta - phi[0], TWO_PI)
        s = np.interp(th, phi, t)
        e = np.exp(-1j * theta)
        for _ in range(8):
            g = self.curve(s) - p
            f = np.imag(e * g)
            s = s - f / np.imag(e * self.dcurve(s))
        return np.real(e * (self.curve(s) - p))

    def star_shaped_about(self, p: complex) -> bool:
        t = np.linspace(0, TWO_PI, _DENSE, endpoint=False)
        return bool(np.all(np.imag(np.conj(self.curve(t) - p) * self.dcurve(t)) > 0))

    def distance_to_boundary(self, z) -> np.ndarray:
        """delta(z) for interior points; raises for points on or outside the boundary."""
        z = _as_complex(z)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        if not np.all(self.contains(z)):
            raise DomainMembershipError("point not strictly inside the domain")
        if self.kind == "disc":
            d = self.params["radius"] - np.abs(z - self.center)
        else:
            d = self._distance_general(z)
        if np.any(d <= 0):
            raise DomainMembershipError("point on the boundary")
        return d[0] if scalar else d

    def _distance_general(self, z: np.ndarray) -> np.ndarray:
        t0 = np.linspace(0, TWO_PI, _DENSE, endpoint=False)
        g0 = self.curve(t0)
        out = np.empty(z.shape, dtype=float)
        flat, res = z.ravel(), out.ravel()
        for i in range(0, flat.size, 2048):
            zz = flat[i:i + 2048, None]
            j = np.argmin(np.abs(g0[None, :] - zz), axis=1)
            s = t0[j]
            zz = zz[:, 0]
            for _ in range(6):
                g, dg, d2g = self.curve(s), self.dcurve(s), self.d2curve(s)
                f = np.real(np.conj(g - zz) * dg)
                fp = np.abs(dg) ** 2 + np.real(np.conj(g - zz) * d2g)
                s = s - f / np.where(np.abs(fp) > 1e-14, fp, 1.0)
            res[i:i + 2048] = np.minimum(np.abs(self.curve(s) - zz),
                                         np.abs(g0[j] - zz))
        return out

    def curvature(self, t) -> np.ndarray:
        dg, d2g = self.dcurve(t), self.d2curve(t)
        return np.imag(np.conj(dg) * d2g) / np.abs(dg) ** 3

    def scaled(self, rho: float) -> "PlanarDomain":
        """Copy of the domain scaled by ``rho`` about its center."""
        c = self.center
        if self.kind == "disc":
            return disc(c, rho * self.params["radius"])
        if self.kind == "ellipse":
            return ellipse(rho * self.params["a"], rho * self.params["b"], c)
        f, df, d2f = self.curve, self.dcurve, self.d2curve
        return _build("parametric", {"scaled_from": self.kind, "rho": rho},
                      lambda t: c + rho * (f(t) - c), lambda t: rho * df(t),
                      lambda t: rho * d2f(t), c, validate=False)


# -- constructors --------------------------------------------------------

def _fd(fun, order):
    h = 1e-4

    def d1(t):
        return (-fun(t + 2 * h) + 8 * fun(t + h) - 8 * fun(t - h) + fun(t - 2 * h)) / (12 * h)

    if order == 1:
        return d1
    return _fd(d1, 1)


def _self_intersects(g: np.ndarray) -> bool:
    p, q = g, np.roll(g, -1)
    n = g.size

    def cross(a, b):
        return a.real * b.imag - a.imag * b.real

    d = q - p
    r = p[None, :] - p[:, None]
    den = cross(d[:, None], d[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        s = cross(r, d[None, :]) / den
        u = cross(r, d[:, None]) / den
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]
    ok = np.isfinite(s[i, j]) & np.isfinite(u[i, j])
    hit = ok & (s[i, j] > 0) & (s[i, j] < 1) & (u[i, j] > 0) & (u[i, j] < 1)
    return bool(np.any(hit))


def _build(kind, params, curve, dcurve, d2curve, center, *, diameter=None,
           ext_radius=None, validate=True) -> PlanarDomain:
    if dcurve is None:
        dcurve = _fd(curve, 1)
    if d2curve is None:
        d2curve = _fd(curve, 2)
    if validate:
        g0, g1 = complex(curve(np.array(0.0))), complex(curve(np.array(TWO_PI)))
        if not (np.isfinite(g0) and abs(g0 - g1) <= 1e-12 * max(1.0, abs(g0))):
            raise GeometryError("parametrization endpoints do not match")
        ts = np.linspace(0, TWO_PI, 512, endpoint=False)
        gs = curve(ts)
        if not np.all(np.isfinite(gs)):
            raise GeometryError("non-finite boundary samples")
        if _self_intersects(gs):
            raise GeometryError("boundary curve self-intersects")
        if np.sum(np.imag(np.conj(gs) * dcurve(ts))) <= 0:
            raise GeometryError("boundary must be positively oriented")
    ts = np.linspace(0, TWO_PI, 4096, endpoint=False)
    if diameter is None:
        gs = curve(ts[::2])
        diameter = float(pdist(np.column_stack([gs.real, gs.imag])).max())
    if ext_radius is None:
        dg, d2g = dcurve(ts), d2curve(ts)
        kmax = np.max(np.abs(np.imag(np.conj(dg) * d2g)) / np.abs(dg) ** 3)
        ext_radius = float(min(1.0 / kmax if kmax > 0 else diameter, diameter))
    if not ext_radius > 0:
        raise GeometryError("exterior ball radius must be positive")
    dom = PlanarDomain(kind, dict(params), curve, dcurve, d2curve,
                       float(diameter), float(ext_radius), complex(center))
    if validate and not dom.contains(np.array([dom.center]))[0]:
        raise GeometryError("center must lie inside the domain")
    return dom


def disc(center: complex = 0j, radius: float = 1.0) -> PlanarDomain:
    if not radius > 0:
        raise ParameterError("disc radius must be positive")
    c = complex(center)
    return _build("disc", {"radius": float(radius)},
                  lambda t: c + radius * np.exp(1j * np.asarray(t)),
                  lambda t: 1j * radius * np.exp(1j * np.asarray(t)),
                  lambda t: -radius * np.exp(1j * np.asarray(t)),
                  c, diameter=2 * radius, ext_radius=radius, validate=False)


def unit_disc() -> PlanarDomain:
    return disc(0j, 1.0)


def ellipse(a: float, b: float, center: complex = 0j) -> PlanarDomain:
    if not (a > 0 and b > 0):
        raise ParameterError("ellipse semi-axes must be positive")
    c = complex(center)
    big, small = max(a, b), min(a, b)
    return _build("ellipse", {"a": float(a), "b": float(b)},
                  lambda t: c + a * np.cos(t) + 1j * b * np.sin(t),
                  lambda t: -a * np.sin(t) + 1j * b * np.cos(t),
                  lambda t: -a * np.cos(t) - 1j * b * np.sin(t),
                  c, diameter=2 * big, ext_radius=small**2 / big, validate=False)


def fourier_curve(r0: float, cos_coeffs=(), sin_coeffs=(), center: complex = 0j) -> PlanarDomain:
    """Star-shaped domain with radius function r0 + sum a_k cos(kt) + b_k sin(kt)."""
    a = np.asarray(cos_coeffs, dtype=float)
    b = np.asarray(sin_coeffs, dtype=float)
    k = np.arange(1, max(a.size, b.size) + 1)
    a = np.pad(a, (0, k.size - a.size))
    b = np.pad(b, (0, k.size - b.size))
    c = complex(center)

    def rr(t, d):
        t = np.asarray(t, dtype=float)
        kt = np.multiply.outer(t, k)
        ck = (1j * k) ** d
        val = np.real(np.tensordot(np.exp(1j * kt), ck * (a - 1j * b), axes=([-1], [0])))
        return (r0 if d == 0 else 0.0) + val

    def g(t):
        return c + rr(t, 0) * np.exp(1j * np.asarray(t))

    def dg(t):
        e = np.exp(1j * np.asarray(t))
        return (rr(t, 1) + 1j * rr(t, 0)) * e

    def d2g(t):
        e = np.exp(1j * np.asarray(t))
        return (rr(t, 2) + 2j * rr(t, 1) - rr(t, 0)) * e

    ts = np.linspace(0, TWO_PI, 2048, endpoint=False)
    if np.any(rr(ts, 0) <= 0):
        raise ParameterError("radius function must stay positive")
    return _build("fourier", {"r0": float(r0), "cos": a.tolist(), "sin": b.tolist()},
                  g, dg, d2g, c)


def parametric(curve, dcurve=None, d2curve=None, center: complex = 0j) -> PlanarDomain:
    return _build("parametric", {}, curve, dcurve, d2curve, center)


_BUILTIN = {
    "disc": lambda: unit_disc(),
    "unit-disc": lambda: unit_disc(),
    "ellipse": lambda: ellipse(2.0, 1.0),
    "flower": lambda: fourier_curve(1.0, (0.0, 0.0, 0.0, 0.0, 0.15)),
}


def make_domain(desc) -> PlanarDomain:
    """Build a domain from a descriptor dict, a builtin name, or a JSON file path."""
    if isinstance(desc, PlanarDomain):
        return desc
    if isinstance(desc, (str, Path)):
        s = str(desc)
        if s in _BUILTIN:
            return _BUILTIN[s]()
        p = Path(s)
        if not p.exists():
            raise ParameterError(f"unknown domain {s!r}")
        desc = json.loads(p.read_text())
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ParameterError("domain descriptor needs a 'kind' field")
    kind = desc["kind"]
    c = desc.get("center", [0.0, 0.0])
    c = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
    try:
        if kind in ("unit-disc", "disc"):
            return disc(c, float(desc.get("radius", 1.0)))
        if kind == "ellipse":
            return ellipse(float(desc["a"]), float(desc["b"]), c)
        if kind == "fourier":
            return fourier_curve(float(desc["r0"]), desc.get("cos", ()), desc.get("sin", ()), c)
    except KeyError as exc:
        raise ParameterError(f"missing parameter {exc} for kind {kind!r}") from None
    raise ParameterError(f"unsupported domain kind {kind!r}")


def load_domain(path) -> PlanarDomain:
    return make_domain(Path(path))


def save_domain(dom: PlanarDomain, path, quadrature: dict | None = None) -> None:
    d = dom.descriptor()
    if quadrature:
        d["quadrature"] = quadrature
    Path(path).write_text(json.dumps(d, indent=2))


# -- quadratures -----------------------------------------------------------

@dataclass(frozen=True)
class BoundaryQuadrature:
    t: np.ndarray
    nodes: np.ndarray
    tangents: np.ndarray
    second: np.ndarray
    weights: np.ndarray

    @property
    def N(self) -> int:
        return self.t.size

    @property
    def dzeta(self) -> np.ndarray:
        """Complex weights for integrals against d zeta."""
        return self.tangents * (TWO_PI / self.N)

    def contour_integral(self, values) -> complex:
        return np.sum(np.asarray(values) * self.dzeta, axis=-1)


def boundary_quadrature(dom: PlanarDomain, N: int) -> BoundaryQuadrature:
    if N < 16:
        raise ParameterError("boundary quadrature needs N >= 16")
    t = TWO_PI * np.arange(N) / N
    dg = dom.dcurve(t)
    return BoundaryQuadrature(t, dom.curve(t), dg, dom.d2curve(t), np.abs(dg) * TWO_PI / N)


@dataclass(frozen=True)
class AreaQuadrature:
    nodes: np.ndarray
    weights: np.ndarray
    marked: complex | None = None
    shape: tuple = ()

    def integrate(self, values) -> complex:
        return np.sum(np.asarray(values) * self.weights, axis=-1)


def gauss01(n: int):
    x, w = roots_legendre(n)
    return 0.5 * (x + 1), 0.5 * w


def graded_rule(n_per_panel: int, x_min: float, ratio: float = 0.5):
    """Composite Gauss rule on [0, 1] with panels shrinking geometrically towards 0."""
    edges = [1.0]
    while edges[-1] * ratio > x_min:
        edges.append(edges[-1] * ratio)
    edges.append(0.0)
    edges = edges[::-1]
    x0, w0 = gauss01(n_per_panel)
    xs = np.concatenate([a + (b - a) * x0 for a, b in zip(edges[:-1], edges[1:])])
    ws = np.concatenate([(b - a) * w0 for a, b in zip(edges[:-1], edges[1:])])
    return xs, ws


def angular_count(dom: PlanarDomain, w: complex, base: int) -> int:
    """Trapezoid count needed in the angle about ``w``; grows as delta(w) shrinks."""
    if dom.is_disc and abs(w - dom.center) < 1e-14:
        return base
    d = float(dom.distance_to_boundary(w))
    n = int(np.ceil(base * max(1.0, 0.25 * np.sqrt(dom.diameter / d))))
    return n + (n % 2)


def area_quadrature(dom: PlanarDomain, n_radial: int = 64, n_angular: int = 128,
                    marked: complex | None = None, graded: bool = False,
                    floor: float | None = None, ratio: float = 0.5) -> AreaQuadrature:
    """Tensor polar rule.

    Without ``marked`` the rule is polar about the center via z = c + s (gamma(t) - c).
    With ``marked`` the rule is polar about that point, so integrands with an
    |z - w|^-1 singularity become smooth after the Jacobian.  ``graded`` replaces
    the single radial Gauss panel by geometric rings down to ``floor`` (default 1e-6 d).
    """
    th = TWO_PI * np.arange(n_angular) / n_angular
    if marked is None:
        s, ws = gauss01(n_radial)
        g = dom.curve(th) - dom.center
        jac = np.imag(np.conj(g) * dom.dcurve(th))
        nodes = dom.center + s[:, None] * g[None, :]
        wts = (s * ws)[:, None] * jac[None, :] * (TWO_PI / n_angular)
        return AreaQuadrature(nodes.ravel(), wts.ravel(), None, nodes.shape)
    w = complex(marked)
    if not dom.contains(np.array([w]))[0]:
        raise DomainMembershipError("marked point outside the domain")
    R = dom.ray_length(w, th)
    if graded:
        fl = 1e-6 * dom.diameter if floor is None else floor
        x, wx = graded_rule(max(4, n_radial // 8), fl / R.max(), ratio)
    else:
        x, wx = gauss01(n_radial)
    rho = x[:, None] * R[None, :]
    nodes = w + rho * np.exp(1j * th)[None, :]
    wts = (x * wx)[:, None] * (R**2)[None, :] * (TWO_PI / n_angular)
    return AreaQuadrature(nodes.ravel(), wts.ravel(), w, nodes.shape)


# -- exhaustion --------------------------------------------------------------

def _smoothstep(x):
    return x**3 * (10 - 15 * x + 6 * x * x)


@dataclass(frozen=True, eq=False)
class ExhaustionStep:
    level: int
    rho: float
    dist: float
    outer: PlanarDomain = field(repr=False)
    inner_domain: PlanarDomain = field(repr=False)
    mode: str = "collar"

    @property
    def collar_width(self) -> float:
        # widened when needed so that the radial profile stays increasing
        return min(1.0, max((1.0 - self.rho) ** 0.25, 1.875 * (1.0 - self.rho) / 0.95))

    def h(self, z) -> np.ndarray:
        """Diffeomorphism from the closure of the outer domain onto the inner closure."""
        z = _as_complex(z)
        c = self.outer.center
        if self.mode == "scaling":
            return c + self.rho * (z - c)
        s = self.outer.gauge(z)
        wd = self.collar_width
        x = np.clip((s - (1 - wd)) / wd, 0.0, 1.0)
        g = s - (1 - self.rho) * _smoothstep(x)
        ratio = np.where(s > 0, g / np.where(s > 0, s, 1.0), 1.0)
        return c + (z - c) * ratio

    def jacobian(self, z, step: float = 1e-6):
        """(dh/dz, dh/dzbar) by centered differences."""
        z = _as_complex(z)
        hx = (self.h(z + step) - self.h(z - step)) / (2 * step)
        hy = (self.h(z + 1j * step) - self.h(z - 1j * step)) / (2 * step)
        return 0.5 * (hx - 1j * hy), 0.5 * (hx + 1j * hy)


def _inner_gap(dom: PlanarDomain, rho: float) -> float:
    if dom.is_disc:
        return (1.0 - rho) * dom.params["radius"]
    t = np.linspace(0, TWO_PI, 512, endpoint=False)
    return float(dom.distance_to_boundary(dom.center + rho * (dom.curve(t) - dom.center)).min())


def exhaustion(dom: PlanarDomain, level: int, mode: str = "collar") -> ExhaustionStep:
    """Level-``level`` member of an increasing family of scaled copies of ``dom``.

    The scaling factor puts the gap to the outer boundary at the midpoint of
    ((l+1)^-1, l^-1).  ``mode="collar"`` (default) uses a C^2 map that is the
    identity away from a boundary collar whose width shrinks with the level;
    ``mode="scaling"`` uses the plain dilation.
    """
    if int(level) != level or level < 2:
        raise ParameterError("exhaustion level must be an integer >= 2")
    if mode not in ("collar", "scaling"):
        raise ParameterError(f"unknown exhaustion mode {mode!r}")
    if not dom.star_shaped_about(dom.center):
        raise GeometryError("domain is not star-shaped about its center")
    target = 0.5 * (1.0 / (level + 1) + 1.0 / level)
    if dom.is_disc:
        rho = 1.0 - target / dom.params["radius"]
    else:
        gap0 = _inner_gap(dom, 1e-9)
        if gap0 <= target:
            rho = -1.0
        else:
            rho = brentq(lambda r: _inner_gap(dom, r) - target, 1e-9, 1 - 1e-12, xtol=1e-14)
    if not 0.0 < rho < 1.0:
        raise GeometryError(f"scaling factor {rho:.4g} out of (0, 1)")
    if mode == "collar" and 1.875 * (1 - rho) >= 0.95:
        mode = "scaling"
    return ExhaustionStep(int(level), float(rho), _inner_gap(dom, rho), dom, dom.scaled(rho), mode)
