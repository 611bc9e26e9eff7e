"""Verification workflows shared by the command line and the acceptance suite."""
from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .geometry import PlanarDomain, area_quadrature, make_domain
from .kernels import KernelSet
from .product import ProductDomain
from .report import sample_interior
from .solve1d import ScalarData

# one-dimensional data with known canonical solutions on the unit disc
DATA_1D = {
    "one": (ScalarData(lambda z: np.ones_like(z), "one"), lambda w: np.conj(w)),
    "zbar": (ScalarData(lambda z: np.conj(z), "zbar"), lambda w: np.conj(w) ** 2 / 2),
    "z": (ScalarData(lambda z: z, "z"), lambda w: np.abs(w) ** 2 - 0.5),
    "smooth": (ScalarData(lambda z: np.exp(np.conj(z)) * np.cos(z.real) + np.abs(z), "smooth"), None),
}


_EXPR_NAMES = {"conj": np.conj, "exp": np.exp, "abs": np.abs, "cos": np.cos, "sin": np.sin,
               "sqrt": np.sqrt, "log": np.log, "real": np.real, "imag": np.imag, "pi": np.pi}


def data_1d(name: str):
    """Builtin data by name, or ``expr:<expression in z>`` using numpy functions."""
    if name.startswith("expr:"):
        src = name[5:]
        try:
            code = compile(src, "<data>", "eval")
        except SyntaxError as exc:
            raise ParameterError(f"bad expression {src!r}: {exc.msg}") from None
        for nm in code.co_names:
            if nm != "z" and nm not in _EXPR_NAMES:
                raise ParameterError(f"name {nm!r} not allowed in data expressions")

        def f(z):
            return eval(code, {"__builtins__": {}}, dict(_EXPR_NAMES, z=z))
        return ScalarData(f, src), None
    if name not in DATA_1D:
        raise ParameterError(f"unknown data {name!r}; choose from {sorted(DATA_1D)}")
    return DATA_1D[name]


def parse_domains(desc: str) -> ProductDomain:
    """Comma-separated builtin names or JSON paths."""
    parts = [s.strip() for s in desc.split(",") if s.strip()]
    return ProductDomain(tuple(make_domain(p) for p in parts))


def closed_form_pairs(count: int, seed: int = 0, w_max: float = 0.8, min_sep: float = 0.05):
    """Pairs in the unit disc with |w| <= w_max and |z - w| >= min_sep."""
    rng = np.random.default_rng(seed)
    dom = make_domain("disc")
    ws, zs = [], []
    while sum(len(x) for x in ws) < count:
        w = sample_interior(dom, 2 * count, rng)
        z = sample_interior(dom, 2 * count, rng)
        ok = (np.abs(w) <= w_max) & (np.abs(z - w) >= min_sep)
        ws.append(w[ok])
        zs.append(z[ok])
    return np.concatenate(ws)[:count], np.concatenate(zs)[:count]


def closed_form_errors(N: int = 256, count: int = 100, seed: int = 0) -> dict:
    """Normwise relative errors of boundary-integral L, S, K against the disc closed forms."""
    w, z = closed_form_pairs(count, seed)
    exact = KernelSet(make_domain("disc"))
    num = KernelSet(make_domain("disc"), "nystrom-backed", N)
    out = {"N": N, "pairs": count}
    for name in "LSK":
        a = getattr(exact, name)(w, z)
        b = getattr(num, name)(w, z)
        out[name] = float(np.linalg.norm(a - b) / np.linalg.norm(a))
    out["w"], out["z"] = w, z
    return out


def reproducing_error(dom: PlanarDomain, w: complex = 0.4, n_radial: int = 64,
                      n_angular: int = 128, N: int = 256) -> float:
    """|int K(w, z) z dA(z) - w| on ``dom``."""
    ks = KernelSet(dom, None, N)
    q = area_quadrature(dom, n_radial, n_angular)
    return float(abs(np.sum(ks.K(w, q.nodes) * q.nodes * q.weights) - w))


def compact_grid_mask(dom: PlanarDomain, points, frac: float = 0.1) -> np.ndarray:
    return dom.distance_to_boundary(points) >= frac * dom.diameter
