"""Empirical estimate records and random samplers shared by the probes."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ParameterError
from .geometry import PlanarDomain

INEQUALITIES = ("G-bound", "g2-bound", "Gd-bound", "log-bound", "S-first", "S-second",
                "gradS", "K-bound", "ee-bound", "pq-bound", "uniform-bound", "t2-ratio",
               "projection-bound")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(np.real(x)), float(np.imag(x))]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


@dataclass
class EstimateReport:
    inequality: str
    sample_count: int
    constant: float
    slope: float | None = None
    argmax: tuple | None = None
    stability_ratio: float | None = None
    grid: dict = field(default_factory=dict)
    components: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.inequality not in INEQUALITIES:
            raise ParameterError(f"unknown inequality id {self.inequality!r}")
        if not self.constant >= 0:
            raise ParameterError("fitted constant must be nonnegative")

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.constant))

    def stable(self, tol: float) -> bool:
        return self.stability_ratio is not None and abs(self.stability_ratio - 1.0) <= tol

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def sample_interior(dom: PlanarDomain, n: int, rng: np.random.Generator,
                    delta_floor: float = 0.0) -> np.ndarray:
    """Uniform samples inside ``dom`` by rejection from the bounding box,
    optionally keeping only points with delta >= ``delta_floor``."""
    t = np.linspace(0, 2 * np.pi, 512, endpoint=False)
    g = dom.curve(t)
    lo = complex(g.real.min(), g.imag.min())
    hi = complex(g.real.max(), g.imag.max())
    out = []
    count = 0
    while count < n:
        m = max(64, 2 * (n - count))
        z = lo.real + (hi.real - lo.real) * rng.random(m) + 1j * (lo.imag + (hi.imag - lo.imag) * rng.random(m))
        z = z[dom.contains(z)]
        if delta_floor > 0 and z.size:
            z = z[dom.distance_to_boundary(z) >= delta_floor]
        out.append(z)
        count += z.size
    return np.concatenate(out)[:n]


@dataclass(frozen=True)
class PairSampler:
    """Random off-diagonal pairs (w, z) in a planar domain.

    ``pole_floor`` rejects pairs whose deeper point is closer than that to the
    boundary (boundary-integral Green's functions lose accuracy there).
    """

    dom: PlanarDomain
    seed: int = 0
    min_sep: float = 0.0
    delta_floor: float = 0.0
    w_delta_floor: float | None = None
    pole_floor: float = 0.0

    def sample(self, n: int, seed_offset: int = 0):
        if n <= 0:
            raise ParameterError("empty sample")
        rng = np.random.default_rng(self.seed + seed_offset)
        wf = self.delta_floor if self.w_delta_floor is None else self.w_delta_floor
        ws, zs = [], []
        have = 0
        while have < n:
            k = 2 * (n - have) + 16
            w = sample_interior(self.dom, k, rng, wf)
            z = sample_interior(self.dom, k, rng, self.delta_floor)
            ok = np.abs(z - w) > max(self.min_sep, 1e-8 * self.dom.diameter)
            if self.pole_floor > 0:
                deeper = np.maximum(self.dom.distance_to_boundary(w),
                                    self.dom.distance_to_boundary(z))
                ok &= deeper >= self.pole_floor
            ws.append(w[ok])
            zs.append(z[ok])
            have += int(ok.sum())
        return np.concatenate(ws)[:n], np.concatenate(zs)[:n]


def radial_slope(r: np.ndarray, values: np.ndarray, n_bins: int = 12,
                 r_range: tuple | None = None) -> float:
    """Least-squares slope of log(max value in radial bin) against log(bin radius)."""
    r = np.asarray(r, dtype=float)
    v = np.abs(np.asarray(values))
    lo, hi = r_range if r_range is not None else (r.min(), r.max())
    edges = np.geomspace(lo, hi, n_bins + 1)
    xs, ys = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        m = (r >= a) & (r < b)
        if m.sum() >= 3:
            xs.append(np.log(np.sqrt(a * b)))
            ys.append(np.log(v[m].max()))
    if len(xs) < 3:
        raise ParameterError("too few populated radial bins for a slope fit")
    return float(np.polyfit(xs, ys, 1)[0])


def sup_with_argmax(ratio: np.ndarray, w: np.ndarray, z: np.ndarray):
    ratio = np.asarray(ratio, dtype=float)
    i = int(np.nanargmax(ratio))
    return float(ratio[i]), (complex(w.flat[i]), complex(z.flat[i]))
