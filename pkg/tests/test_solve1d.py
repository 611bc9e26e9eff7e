import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from canondbar.errors import DomainMembershipError, ParameterError
from canondbar.geometry import disc, unit_disc
from canondbar.kernels import KernelSet
from canondbar.solve1d import (ScalarData, admissible, bergman_project_1d, canonicity_defect,
                               norm_bound_probe, projection_bound_probe, solve_T)
from canondbar.workflows import DATA_1D

FD_FLOOR = 1e-7

SMOOTH = {
    "zbar": lambda z: np.conj(z),
    "mixed": lambda z: np.exp(np.conj(z)) * np.cos(z.real),
    "bump": lambda z: 1 / (2 - z * np.conj(z)) + z**2,
}


@pytest.fixture(scope="module")
def ks():
    return KernelSet(unit_disc())


def interior(n=40, seed=0):
    rng = np.random.default_rng(seed)
    r = 0.9 * np.sqrt(rng.random(n))
    return r * np.exp(2j * np.pi * rng.random(n))


def fd_dbar(u, z, h=1e-4):
    return 0.5 * ((u(z + h) - u(z - h)) + 1j * (u(z + 1j * h) - u(z - 1j * h))) / (2 * h)


def test_calibration_grid(ks):
    u = solve_T(ks, 1.0, None, 128, 128)
    assert np.max(np.abs(u.values - np.conj(u.points))) <= 1e-3
    assert solve_T(ks, 1.0, [0.3]).values[0] == pytest.approx(0.3, abs=1e-3)


@pytest.mark.parametrize("method", ["fourier", "polar"])
def test_calibration_targets(ks, method):
    w = np.array([0.3, 0.5j, -0.2 - 0.6j])
    u = solve_T(ks, 1.0, w, 64, 64, method=method)
    assert np.max(np.abs(u.values - np.conj(w))) <= 1e-3


def test_calibration_shifted_disc():
    dom = disc(0.5 + 1j, 2.0)
    w = np.array([0.5 + 1j, 1.2 + 0.4j])
    u = solve_T(KernelSet(dom), 1.0, w)
    assert np.max(np.abs(u.values - np.conj(w - dom.center))) <= 1e-3


def test_zero_data(ks):
    assert np.max(np.abs(solve_T(ks, 0.0, None, 32, 32).values)) == 0


@pytest.mark.parametrize("name", ["one", "zbar", "z"])
def test_known_canonical_solutions(ks, name):
    data, exact = DATA_1D[name]
    u = solve_T(ks, data, None, 128, 128)
    assert np.max(np.abs(u.values - exact(u.points))) <= 1e-3


def test_targets_outside_rejected(ks):
    with pytest.raises(DomainMembershipError):
        solve_T(ks, 1.0, [1.2])


def test_unknown_method(ks):
    with pytest.raises(ParameterError):
        solve_T(ks, 1.0, [0.1], method="magic")


@pytest.mark.parametrize("name", sorted(SMOOTH))
def test_dbar_residual_improves(ks, name):
    f = ScalarData(SMOOTH[name], name)
    z = interior()
    errs = []
    for n in (64, 128):
        u = lambda t: solve_T(ks, f, t, n, n).values
        errs.append(np.max(np.abs(fd_dbar(u, z) - f(z))) / np.max(np.abs(f(z))))
    assert errs[1] <= 1e-2
    # spectral solvers reach the h**2 = 1e-8 truncation floor of the stencil already at 64
    assert errs[1] < errs[0] or errs[1] <= FD_FLOOR


@pytest.mark.parametrize("name", sorted(SMOOTH))
def test_solutions_canonical(ks, name):
    u = solve_T(ks, ScalarData(SMOOTH[name], name), None, 128, 128)
    assert max(canonicity_defect(ks, u, 8)) <= 1e-3


def test_calibration_canonicity(ks):
    assert max(canonicity_defect(ks, solve_T(ks, 1.0, None, 128, 128), 8)) <= 1e-4


def test_holomorphic_is_not_canonical(ks):
    d = canonicity_defect(ks, lambda z: z, 4)
    assert d[1] == pytest.approx(1.0, abs=1e-6)


def test_zero_field_defects(ks):
    assert canonicity_defect(ks, lambda z: 0 * z, 5) == [0.0] * 6


W = np.array([0.0, 0.3, 0.5j, -0.4 + 0.4j])


@pytest.mark.parametrize("fun,expected", [
    (lambda z: z**2, lambda w: w**2),
    (lambda z: np.conj(z), lambda w: 0 * w),
    (lambda z: np.full_like(z, 2.5 - 1j), lambda w: np.full_like(w, 2.5 - 1j)),
    (lambda z: np.abs(z) ** 2, lambda w: np.full_like(w, 0.5)),
])
def test_bergman_projection(ks, fun, expected):
    p = bergman_project_1d(ks, fun, W)
    assert np.max(np.abs(p.values - expected(W))) <= 1e-6


def test_projection_identity(ks):
    # P u = u - T(dbar u) for u = z zbar^2 + exp(z)
    u = lambda z: z * np.conj(z) ** 2 + np.exp(z)
    du = ScalarData(lambda z: 2 * z * np.conj(z))
    lhs = bergman_project_1d(ks, u, W).values
    rhs = u(W) - solve_T(ks, du, W, 128, 128).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-4


@pytest.mark.parametrize("p,q,ok", [(2, 3, True), (1, 3, False), (1, 1.9, True), (np.inf, np.inf, True),
                                    (0.5, 1, False), (4, 100, True)])
def test_admissible(p, q, ok):
    assert admissible(p, q) is ok


def test_norm_probe_rejects_inadmissible(ks):
    with pytest.raises(ParameterError):
        norm_bound_probe(ks, [1.0], 1, 3)


def test_norm_probe_sup_stable(ks):
    fam = [ScalarData(lambda z, k=k: np.exp(1j * k * np.angle(z + 1e-300)) * np.abs(z) ** (k % 3), f"f{k}")
           for k in range(10)]
    rep = norm_bound_probe(ks, fam, np.inf, np.inf, grids=((32, 32), (64, 64), (128, 128)))
    assert rep.finite and rep.stable(0.20)


def test_projection_probe_cases(ks):
    hol = projection_bound_probe(ks, [(lambda z: z**3, lambda z: 0 * z)])
    assert hol.constant <= 1e-6
    anti = projection_bound_probe(ks, [(lambda z: np.conj(z), lambda z: np.ones_like(z))])
    assert anti.constant == pytest.approx(1.0, abs=1e-2)
    zero = projection_bound_probe(ks, [(lambda z: 0 * z, lambda z: 0 * z)])
    assert zero.constant == 0


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_linearity(a, b):
    ks = KernelSet(unit_disc())
    f1, f2 = (lambda z: np.conj(z)), (lambda z: z)
    u = solve_T(ks, lambda z: a * f1(z) + b * f2(z), None, 32, 32).values
    v = a * solve_T(ks, f1, None, 32, 32).values + b * solve_T(ks, f2, None, 32, 32).values
    assert np.max(np.abs(u - v)) <= 1e-12 * (1 + abs(a) + abs(b))
