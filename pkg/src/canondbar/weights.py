"""Weight calculus for the product-domain kernels.

For an active index set the weight is ``H = sum_j prod_{m != j} b_m`` with
``b_m = |w_m - z_m|^2``; the kernel attached to the last-listed component is
``e = W * prod S_l`` with ``W = prod_{m != k} b_m / H``.  Indices are 0-based
positions inside the active set unless stated otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import factorial, prod

import numpy as np
from scipy.optimize import minimize

from .errors import ParameterError, SingularityError
from .report import EstimateReport


def product_weight(b: np.ndarray) -> np.ndarray:
    """H over the last axis of ``b`` (squared coordinate distances)."""
    b = np.asarray(b, dtype=float)
    s = b.shape[-1]
    out = np.zeros(b.shape[:-1])
    for j in range(s):
        out = out + np.prod(np.delete(b, j, axis=-1), axis=-1)
    return out


def gm_bound_check(x, alpha) -> dict:
    """Weighted geometric-mean bound for nonnegative x.

    Exponents in [0, 1] summing to 1 compare against sum x_j; summing to n - 1
    they compare against sum_j prod_{m != j} x_m.
    """
    x = np.asarray(x, dtype=float)
    a = np.asarray(alpha, dtype=float)
    n = x.shape[-1]
    if a.shape[-1] != n:
        raise ParameterError("x and alpha must have the same length")
    if np.any(x < 0):
        raise ParameterError("x must be nonnegative")
    if np.any(a < 0) or np.any(a > 1):
        raise ParameterError("exponents must lie in [0, 1]")
    tot = a.sum(axis=-1)
    if np.all(np.isclose(tot, 1.0)):
        regime, rhs = "sum-1", x.sum(axis=-1)
    elif np.all(np.isclose(tot, n - 1)):
        regime, rhs = "sum-(n-1)", product_weight(x)
    else:
        raise ParameterError(f"exponent sum must be 1 or n-1 = {n - 1}")
    lhs = np.prod(x ** a, axis=-1)
    ok = lhs <= rhs * (1 + 1e-12) + 1e-300
    return {"regime": regime, "lhs": lhs, "rhs": rhs, "holds": bool(np.all(ok)),
            "violations": int(np.size(ok) - np.count_nonzero(ok))}


def gm_random_audit(n: int, samples: int, regime: str, seed: int = 0) -> int:
    """Number of violations over random (x, alpha) draws."""
    rng = np.random.default_rng(seed)
    x = rng.random((samples, n)) ** 3 * 10.0 ** rng.uniform(-3, 3, (samples, 1))
    if regime == "sum-1":
        a = rng.dirichlet(np.ones(n), samples)
    elif regime == "sum-(n-1)":
        a = 1.0 - rng.dirichlet(np.ones(n), samples)
    else:
        raise ParameterError(f"unknown regime {regime!r}")
    return gm_bound_check(x, a)["violations"]


def product_weight_terms(b: list):
    """H from a list of broadcastable per-coordinate arrays."""
    out = 0.0
    for j in range(len(b)):
        out = out + prod(b[m] for m in range(len(b)) if m != j)
    return out


def weight_derivative(k: int, J: tuple, d: list, b: list, H=None) -> np.ndarray:
    """Mixed dbar derivative of W_k = prod_{j != k} b_j / H in the coordinates J.

    ``d[j] = w_j - z_j`` and ``b[j] = |d[j]|^2`` over the active set.  The
    closed form (with the (-1)^|J| sign of d b_j/dzbar_j = -(w_j - z_j)) is
    (-1)^m m! b_k^m H^-(m+1) prod_{j in J} d_j b_j^(m-1) prod_{j not in J, j != k} b_j^(m+1).
    """
    s = len(b)
    m = len(J)
    if H is None:
        H = product_weight_terms(b)
    out = (-1.0) ** m * factorial(m) * b[k] ** m / H ** (m + 1)
    for j in range(s):
        if j == k:
            continue
        if j in J:
            out = out * d[j] * b[j] ** (m - 1)
        else:
            out = out * b[j] ** (m + 1)
    return out


def weight_ratio_derivative(k: int, m: int, w, z) -> np.ndarray:
    """Derivative in zbar_1 ... zbar_m of prod_{j<k} |w_j - z_j|^2 / H over k variables.

    ``w`` and ``z`` have shape (..., k).  Includes the sign (-1)^m.
    """
    w = np.asarray(w, dtype=complex)
    z = np.asarray(z, dtype=complex)
    if w.shape[-1] != k or z.shape[-1] != k:
        raise ParameterError("w and z need k coordinates")
    if not 1 <= m <= k - 1:
        raise ParameterError("need 1 <= m <= k - 1")
    d = w - z
    if np.any(d == 0):
        raise SingularityError("diagonal coordinate")
    dl = [d[..., j] for j in range(k)]
    bl = [np.abs(x) ** 2 for x in dl]
    return weight_derivative(k - 1, tuple(range(m)), dl, bl)


@dataclass(frozen=True)
class KernelTerm:
    """One product-rule term of a dbar derivative of e.

    Value = coef * prod_{j in k_factors} K_j * prod_{l in s_factors} S_l * dW,
    with dW the weight derivative in ``weight_derivs``.  ``exponents`` maps each
    active position to its bound exponent (sigma excluded) and ``kinds`` marks
    area vs boundary variables for the integrability budget.
    """

    active: tuple
    k: int
    coef: complex
    s_factors: tuple
    k_factors: tuple
    weight_derivs: tuple
    exponents: tuple
    kinds: tuple

    def budget_ok(self, sigma: float) -> bool:
        for e, kind in zip(self.exponents, self.kinds):
            lim = 2.0 if kind == "area" else 1.0
            if not e + sigma < lim:
                return False
        return True


@dataclass(frozen=True)
class TermList:
    active: tuple
    k: int
    derivs: tuple
    terms: tuple
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def evaluate(self, d: list, b: list, S: list, K: list, H=None) -> np.ndarray:
        """Sum of terms given per-position arrays d, b, S and K."""
        if H is None:
            H = product_weight_terms(b)
        tot = 0.0
        for t in self.terms:
            v = t.coef * weight_derivative(t.k, t.weight_derivs, d, b, H)
            for j in t.k_factors:
                v = v * K[j]
            for j in t.s_factors:
                v = v * S[j]
            tot = tot + v
        return tot


def bound_exponents(s: int, k: int, derivs: tuple) -> tuple:
    """Bound exponents (sigma excluded) per active position."""
    if s == 1:
        return (1.0,)
    g = 1.0 / (2 * (s - 1))
    out = []
    for j in range(s):
        if j == k:
            out.append(1.5)
        elif j in derivs:
            out.append(2.0 - g)
        else:
            out.append(1.0 - g)
    return tuple(out)


def expand_e_derivative(active, k: int, derivs) -> TermList:
    """Product-rule expansion of d^J e for e attached to position ``k``.

    ``active`` lists factor indices; ``k`` and ``derivs`` are positions in it.
    Each derivative either turns an S factor into K/(2i) or falls on the weight.
    """
    active = tuple(active)
    s = len(active)
    derivs = tuple(derivs)
    if len(set(derivs)) != len(derivs):
        raise ParameterError("repeated derivative index")
    if not 0 <= k < s or any(not 0 <= j < s for j in derivs):
        raise ParameterError("indices must be positions in the active set")
    if k in derivs:
        raise ParameterError("derivatives may not act on the kernel's own component")
    expo = bound_exponents(s, k, derivs)
    kinds = tuple("area" if (j == k or j in derivs) else "boundary" for j in range(s))
    terms = []
    for r in range(len(derivs) + 1):
        for B in combinations(derivs, r):
            rest = tuple(j for j in derivs if j not in B)
            terms.append(KernelTerm(active, k, (2j) ** (-r), tuple(j for j in range(s) if j not in B),
                                    tuple(B), rest, expo, kinds))
    return TermList(active, k, derivs, tuple(terms))


def weighted_kernel(k: int, d: list, b: list, S: list) -> np.ndarray:
    v = weight_derivative(k, (), d, b)
    for x in S:
        v = v * x
    return v


def _ratio(terms: TermList, sampler, expo, w, z):
    s = w.shape[-1]
    d = [w[:, j] - z[:, j] for j in range(s)]
    b = [np.abs(x) ** 2 for x in d]
    S = [sampler.S(j, w[:, j], z[:, j]) for j in range(s)]
    K = [sampler.K(j, w[:, j], z[:, j]) for j in range(s)]
    val = np.abs(terms.evaluate(d, b, S, K))
    bound = np.prod([np.abs(d[j]) ** (-expo[j]) for j in range(s)], axis=0)
    return val / bound


def audit_ee_bound(terms: TermList, sampler, sigma: float, n: int = 20000,
                   doubling: bool = True, polish: int = 8) -> EstimateReport:
    """sup |d^J e| / bound over sampled pairs.

    The bound is prod_r |w_r - z_r|^-(a_r + sigma) with exponents from the term
    list.  ``sampler.sample(n, offset)`` returns (w, z) of shape (n, s); it also
    provides per-position kernels ``S(j, w, z)``, ``K(j, w, z)`` and a
    ``valid(w, z)`` mask.  The ``polish`` best samples are refined by a local
    Nelder-Mead search so that the reported supremum does not hinge on luck.
    """
    s = len(terms.active)
    top = 0.5 if s == 1 else 1.0 / (2 * (s - 1))
    if not 0 < sigma < top:
        raise ParameterError(f"sigma must lie in (0, {top})")
    for t in terms:
        if not t.budget_ok(sigma):
            raise ParameterError("term violates the integrability budget")
    expo = np.asarray(terms.terms[0].exponents) + sigma

    def unpack(x):
        c = x[: 2 * s] + 1j * x[2 * s:].reshape(-1)[: 2 * s]
        return c[:s][None, :], c[s:][None, :]

    def neg(x):
        w, z = unpack(x)
        if not sampler.valid(w, z)[0]:
            return 0.0
        return -float(_ratio(terms, sampler, expo, w, z)[0])

    def sup(count, offset):
        w, z = sampler.sample(count, offset)
        r = _ratio(terms, sampler, expo, w, z)
        best, arg = float(np.max(r)), (w[int(np.argmax(r))], z[int(np.argmax(r))])
        for i in np.argsort(r)[::-1][:polish]:
            c = np.concatenate([w[i], z[i]])
            x0 = np.concatenate([c.real, c.imag])
            res = minimize(neg, x0, method="Nelder-Mead",
                           options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 2500})
            if -res.fun > best:
                best = -float(res.fun)
                arg = unpack(res.x)
                arg = (arg[0][0], arg[1][0])
        return best, (arg[0].tolist(), arg[1].tolist())

    c1, a1 = sup(n, 0)
    stab = None
    c, arg = c1, a1
    if doubling:
        c2, a2 = sup(2 * n, 1)
        stab = c2 / c1 if c1 > 0 else 1.0
        c, arg = (c2, a2) if c2 >= c1 else (c1, a1)
    return EstimateReport("ee-bound", 3 * n if doubling else n, c, None, tuple(arg), stab,
                          {"n": n, "sigma": sigma, "polish": polish},
                          {"active": list(terms.active), "k": terms.k,
                           "derivs": list(terms.derivs), "terms": len(terms),
                           "exponents": expo.tolist(), "first": c1})
