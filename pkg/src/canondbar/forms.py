"""dbar-closed (0,1)-forms on product domains and a small library of test forms."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import prod
from typing import Callable

import numpy as np

from .errors import DataError, ParameterError

DerivFn = Callable[[int, tuple, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Form01:
    """f = sum_j f_j dzbar_j on an n-fold product.

    Components take arrays of shape (..., n). ``deriv(k, J, Z)`` (optional)
    returns the mixed derivative of f_k in zbar_j, j in J. ``exact`` and
    ``potential`` are optional closed forms used by oracles: the canonical
    solution on the unit polydisc and some particular solution.
    """

    n: int
    components: tuple
    deriv: DerivFn | None = None
    name: str = "form"
    exact: Callable | None = None
    potential: Callable | None = None
    smooth: bool = True
    closed_tol: float = 1e-6
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.components) != self.n:
            raise ParameterError("number of components must equal n")

    def component(self, k: int, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=complex)
        v = np.asarray(self.components[k](Z), dtype=complex)
        v = np.broadcast_to(v, Z.shape[:-1])
        if not np.all(np.isfinite(v)):
            raise DataError(f"{self.name}: non-finite component sample")
        return v

    def derivative(self, k: int, J: tuple, Z) -> np.ndarray:
        J = tuple(J)
        if not J:
            return self.component(k, Z)
        if self.deriv is None:
            raise DataError(f"{self.name}: no derivative oracle")
        Z = np.asarray(Z, dtype=complex)
        return np.broadcast_to(np.asarray(self.deriv(k, J, Z), dtype=complex), Z.shape[:-1])

    def sup_norm(self, Z) -> float:
        return float(max(np.max(np.abs(self.component(k, Z))) for k in range(self.n)))

    def closedness_defect(self, Z, h: float = 1e-5, use_oracle: bool = True) -> float:
        """max |df_j/dzbar_k - df_k/dzbar_j| over sample points Z (shape (m, n))."""
        Z = np.asarray(Z, dtype=complex)
        worst = 0.0
        for j, k in combinations(range(self.n), 2):
            if use_oracle and self.deriv is not None:
                a = self.derivative(j, (k,), Z)
                b = self.derivative(k, (j,), Z)
            else:
                a = fd_dbar(lambda X: self.component(j, X), Z, k, h)
                b = fd_dbar(lambda X: self.component(k, X), Z, j, h)
            worst = max(worst, float(np.max(np.abs(a - b))))
        return worst

    def check_closed(self, Z, h: float = 1e-5) -> float:
        d = self.closedness_defect(Z, h)
        if d > self.closed_tol:
            raise DataError(f"{self.name}: not dbar-closed (defect {d:.3g})")
        return d

    def scaled(self, c: complex) -> "Form01":
        deriv = None if self.deriv is None else (lambda k, J, Z: c * self.deriv(k, J, Z))
        ex = None if self.exact is None else (lambda Z: c * self.exact(Z))
        pot = None if self.potential is None else (lambda Z: c * self.potential(Z))
        comps = tuple((lambda Z, f=f: c * f(Z)) for f in self.components)
        return Form01(self.n, comps, deriv, f"{c}*{self.name}", ex, pot, self.smooth,
                      self.closed_tol, dict(self.meta))

    def permuted(self, perm) -> "Form01":
        """Form on the product with factors reordered: new factor i is old perm[i]."""
        perm = tuple(perm)
        inv = tuple(np.argsort(perm))

        def back(Z):
            return np.asarray(Z)[..., list(inv)]

        comps = tuple((lambda Z, i=i: self.components[perm[i]](back(Z))) for i in range(self.n))
        deriv = None
        if self.deriv is not None:
            def deriv(k, J, Z):
                return self.deriv(perm[k], tuple(perm[j] for j in J), back(Z))
        ex = None if self.exact is None else (lambda Z: self.exact(back(Z)))
        pot = None if self.potential is None else (lambda Z: self.potential(back(Z)))
        return Form01(self.n, comps, deriv, f"{self.name}[perm]", ex, pot, self.smooth,
                      self.closed_tol, dict(self.meta))


def fd_dbar(fun: Callable, Z: np.ndarray, j: int, h: float) -> np.ndarray:
    """Centered-difference d/dzbar_j of a function of Z (..., n)."""
    Z = np.asarray(Z, dtype=complex)
    e = np.zeros(Z.shape[-1], dtype=complex)
    e[j] = h
    fx = (fun(Z + e) - fun(Z - e)) / (2 * h)
    fy = (fun(Z + 1j * e) - fun(Z - 1j * e)) / (2 * h)
    return 0.5 * (fx + 1j * fy)


def zero_form(n: int) -> Form01:
    comps = tuple((lambda Z: np.zeros(np.shape(Z)[:-1], dtype=complex)) for _ in range(n))
    return Form01(n, comps, lambda k, J, Z: np.zeros(np.shape(Z)[:-1], dtype=complex),
                  "zero", lambda Z: np.zeros(np.shape(Z)[:-1], dtype=complex),
                  lambda Z: np.zeros(np.shape(Z)[:-1], dtype=complex))


# -- polynomial potentials ----------------------------------------------------------

def _falling(b: int, r: int) -> int:
    return prod(range(b - r + 1, b + 1)) if r <= b else 0


def _proj_coeff(a: int, b: int) -> float:
    """Disc Bergman projection of z^a zbar^b is this factor times z^(a-b)."""
    return (a - b + 1) / (a + 1) if a >= b else 0.0


@dataclass(frozen=True)
class PolyPotential:
    """u = sum c * prod_j z_j^a_j conj(z_j)^b_j; terms given as (c, a, b)."""

    terms: tuple
    n: int

    def __call__(self, Z, J: tuple = ()) -> np.ndarray:
        Z = np.asarray(Z, dtype=complex)
        out = np.zeros(Z.shape[:-1], dtype=complex)
        cnt = np.bincount(np.asarray(J, dtype=int), minlength=self.n) if J else np.zeros(self.n, int)
        for c, a, b in self.terms:
            coef = c * prod(_falling(bj, int(r)) for bj, r in zip(b, cnt))
            if coef == 0:
                continue
            t = np.full(Z.shape[:-1], coef, dtype=complex)
            for j in range(self.n):
                if a[j]:
                    t = t * Z[..., j] ** a[j]
                e = b[j] - int(cnt[j])
                if e:
                    t = t * np.conj(Z[..., j]) ** e
            out = out + t
        return out

    def projection(self, Z) -> np.ndarray:
        """Bergman projection on the unit polydisc (tensor product of disc rules)."""
        Z = np.asarray(Z, dtype=complex)
        out = np.zeros(Z.shape[:-1], dtype=complex)
        for c, a, b in self.terms:
            coef = c * prod(_proj_coeff(aj, bj) for aj, bj in zip(a, b))
            if coef == 0:
                continue
            t = np.full(Z.shape[:-1], coef, dtype=complex)
            for j in range(self.n):
                if a[j] > b[j]:
                    t = t * Z[..., j] ** (a[j] - b[j])
            out = out + t
        return out

    def canonical(self, Z) -> np.ndarray:
        return self(Z) - self.projection(Z)


def form_from_potential(pot: PolyPotential, name: str) -> Form01:
    comps = tuple((lambda Z, k=k: pot(Z, (k,))) for k in range(pot.n))

    def deriv(k, J, Z):
        if len(set(J)) != len(J) or k in J:
            raise ParameterError("derivative indices must be distinct and differ from k")
        return pot(Z, (k,) + tuple(J))

    return Form01(pot.n, comps, deriv, name, pot.canonical, pot, True, 1e-6,
                  {"terms": [list(map(lambda x: x if not isinstance(x, tuple) else list(x), t))
                             for t in pot.terms]})


# -- a continuous, non-smooth form ------------------------------------------------------

def _abs_form(n: int, c: complex = 1.0) -> Form01:
    """u = c |z_1| z_1 conj(z_2) (times conj(z_3) when n = 3).

    f_1 = c z_1^2 conj(z_2)... / (2|z_1|) is continuous but not differentiable at
    z_1 = 0.  The Bergman projection of u vanishes, so u is canonical.
    """
    def half(z1):
        a = np.abs(z1)
        return np.where(a > 0, z1 * z1 / (2 * np.where(a > 0, a, 1.0)), 0.0)

    def tail(Z, skip=None):
        t = np.ones(Z.shape[:-1], dtype=complex)
        for j in range(1, n):
            if j != skip:
                t = t * np.conj(Z[..., j])
        return t

    def u(Z):
        Z = np.asarray(Z, dtype=complex)
        return c * np.abs(Z[..., 0]) * Z[..., 0] * tail(Z)

    comps = [lambda Z: c * half(np.asarray(Z)[..., 0]) * tail(np.asarray(Z))]
    for j in range(1, n):
        comps.append(lambda Z, j=j: c * np.abs(np.asarray(Z)[..., 0]) * np.asarray(Z)[..., 0]
                     * tail(np.asarray(Z), skip=j))

    def deriv(k, J, Z):
        Z = np.asarray(Z, dtype=complex)
        idx = set(J) | {k}
        if len(idx) != len(J) + 1:
            raise ParameterError("repeated derivative index")
        base = half(Z[..., 0]) if 0 in idx else np.abs(Z[..., 0]) * Z[..., 0]
        t = np.ones(Z.shape[:-1], dtype=complex)
        for j in range(1, n):
            if j not in idx:
                t = t * np.conj(Z[..., j])
        return c * base * t

    return Form01(n, tuple(comps), deriv, f"abs{n}", u, u, False, 1e-6)


def _P(n, *terms):
    return PolyPotential(tuple((c, tuple(a), tuple(b)) for c, a, b in terms), n)


BUILTIN_POTENTIALS = {
    "monomial11": _P(2, (1.0, (0, 0), (1, 1))),
    "mixed": _P(2, (1.0, (1, 0), (1, 1)), (0.5, (0, 1), (1, 0))),
    "poly2": _P(2, (1.0, (2, 1), (1, 1)), (-0.5j, (0, 2), (2, 1)), (0.25, (1, 0), (0, 1))),
    "bar1": _P(2, (1.0, (0, 0), (1, 0))),
    "wave": _P(2, (0.5, (1, 1), (2, 1)), (1.0, (0, 0), (1, 2))),
    "monomial111": _P(3, (1.0, (0, 0, 0), (1, 1, 1))),
    "poly3": _P(3, (1.0, (1, 0, 0), (1, 1, 1)), (0.5, (0, 1, 1), (1, 0, 1))),
}


def builtin_form(name: str) -> Form01:
    if name in BUILTIN_POTENTIALS:
        return form_from_potential(BUILTIN_POTENTIALS[name], name)
    if name == "abs2":
        return _abs_form(2)
    if name == "abs3":
        return _abs_form(3)
    if name.startswith("zero"):
        return zero_form(int(name[4:] or 2))
    raise ParameterError(f"unknown builtin form {name!r}")


def bidisc_family(size: int = 10) -> list[Form01]:
    """Bounded dbar-closed forms on the bidisc used by the uniform-bound probe."""
    base = [builtin_form(n) for n in ("monomial11", "mixed", "poly2", "bar1", "wave", "abs2")]
    extra = [
        form_from_potential(_P(2, (1.0, (0, 1), (1, 0))), "z2zb1"),
        form_from_potential(_P(2, (1.0, (2, 0), (2, 1))), "z1sq"),
        form_from_potential(_P(2, (1.0, (0, 0), (3, 1)), (0.3, (1, 1), (0, 1))), "cubic"),
        _abs_form(2, 0.5 + 0.5j),
    ]
    fam = base + extra
    if size > len(fam):
        raise ParameterError(f"family has at most {len(fam)} members")
    return fam[:size]
