import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from canondbar.appendix import (BidiscField, HenkinField, bergman_project_bidisc, bm_reconstruct,
                                canonical_via_projection, cauchy_identity_check, check_t1, check_t2,
                                henkin_T, unit_bidisc)
from canondbar.errors import DataError, PreconditionError, SingularityError
from canondbar.forms import PolyPotential, builtin_form, zero_form
from canondbar.product import canonicity_defect_nd, dbar_residual, solve_tilde


def field(*terms, name="u"):
    return BidiscField.from_potential(PolyPotential(tuple((c, tuple(a), tuple(b)) for c, a, b in terms), 2), name)


ONE = field((1.0, (0, 0), (0, 0)), name="one")
Z1 = field((1.0, (1, 0), (0, 0)), name="z1")
ZB1 = field((1.0, (0, 0), (1, 0)), name="zb1")
ANTI = field((1.0, (0, 0), (1, 1)), name="zb1zb2")
MIXED = field((1.0, (0, 0), (1, 1)), (1.0, (1, 1), (0, 0)), name="zb1zb2+z1z2")
HOL = field((1.0, (2, 1), (0, 0)), name="z1^2 z2")
ZERO = field((0.0, (0, 0), (0, 0)), name="zero")


@pytest.fixture(scope="module")
def targets():
    return unit_bidisc().compact_targets(per_factor=5)


def test_identity_example():
    lhs, rhs = cauchy_identity_check(np.array([1, 1j]), np.array([0, 0]))
    assert lhs == pytest.approx(-1j) and rhs == pytest.approx(-1j)


def test_identity_random_pairs(rng):
    zeta = rng.normal(size=(1000, 2)) + 1j * rng.normal(size=(1000, 2))
    z = rng.normal(size=(1000, 2)) + 1j * rng.normal(size=(1000, 2))
    lhs, rhs = cauchy_identity_check(zeta, z)
    assert np.max(np.abs(lhs - rhs) / np.abs(lhs)) <= 1e-12


def test_identity_singular():
    with pytest.raises(SingularityError):
        cauchy_identity_check(np.array([0.3, 1.0]), np.array([0.3, 0.0]))


@pytest.mark.parametrize("u,z,expected,tol", [(Z1, [0, 0], 0.0, 1e-6), (ONE, [0.2, 0.1j], 1.0, 1e-6),
                                              (ZB1, [0.3, 0], 0.3, 1e-3)])
def test_bm_reconstruct(u, z, expected, tol):
    assert bm_reconstruct(u, np.array(z)) == pytest.approx(expected, abs=tol)


def test_henkin_solves_dbar():
    f = builtin_form("monomial11")
    P = unit_bidisc().compact_targets(per_factor=4)
    op = HenkinField(f)
    assert dbar_residual(op, unit_bidisc(), f, P) <= 1e-2


def test_henkin_zero(targets):
    assert np.max(np.abs(henkin_T(zero_form(2), targets).values)) == 0


def test_henkin_differs_from_canonical_by_holomorphic(targets):
    f = builtin_form("poly2")
    op = HenkinField(f)
    diff = lambda Z: op(Z) - f.exact(Z)
    P = unit_bidisc().compact_targets(per_factor=4)
    # the difference is holomorphic, so its dbar is small on the scale of f
    h = 1e-4
    for j in range(2):
        e = np.zeros(2, complex)
        e[j] = 1
        db = 0.5 * ((diff(P + h * e) - diff(P - h * e)) + 1j * (diff(P + 1j * h * e) - diff(P - 1j * h * e))) / (2 * h)
        assert np.max(np.abs(db)) <= 1e-2 * f.sup_norm(P)


@pytest.mark.parametrize("u,tol", [(MIXED, 1e-3), (ANTI, 1e-3), (HOL, 1e-6)])
def test_t1_residual(u, targets, tol):
    assert check_t1(u, targets)["residual"] <= tol


def test_t1_zero(targets):
    assert check_t1(ZERO, targets)["residual"] == 0


def test_t1_refinement(targets):
    u = field((1.0, (1, 0), (2, 1)), (0.5j, (0, 1), (1, 2)), name="cubic")
    coarse = check_t1(u, targets, 16, 32)["residual"]
    fine = check_t1(u, targets, 24, 48)["residual"]
    assert fine <= 1e-3 and (fine < coarse or fine <= 1e-12)


@pytest.mark.parametrize("u,expected", [(lambda Z: Z[..., 0] * Z[..., 1], lambda Z: Z[..., 0] * Z[..., 1]),
                                        (lambda Z: np.conj(Z[..., 0] * Z[..., 1]), lambda Z: 0 * Z[..., 0]),
                                        (lambda Z: np.ones(Z.shape[:-1], complex), lambda Z: np.ones(Z.shape[:-1]))])
def test_bidisc_projection(u, expected, targets):
    assert np.max(np.abs(bergman_project_bidisc(u, targets).values - expected(targets))) <= 1e-6


def test_t2_hypothesis_holds():
    f = builtin_form("monomial11")
    rep = check_t2(HenkinField(f), f)
    assert rep.components["hypothesis"] <= 1e-3 and rep.finite


def test_t2_hypothesis_fails():
    with pytest.raises(PreconditionError):
        check_t2(Z1, builtin_form("bar1"))


def test_t2_zero():
    assert check_t2(ZERO, zero_form(2)).constant == 0


def test_projection_route_examples(targets):
    f = builtin_form("monomial11")
    u = canonical_via_projection(ANTI, f, targets)
    assert np.max(np.abs(u.values - np.conj(targets[:, 0] * targets[:, 1]))) <= 1e-6
    both = canonical_via_projection(MIXED, f, targets)
    assert np.max(np.abs(both.values - u.values)) <= 1e-6
    hol = canonical_via_projection(Z1, zero_form(2), targets)
    assert np.max(np.abs(hol.values)) <= 1e-6


def test_projection_route_rejects_wrong_particular(targets):
    with pytest.raises(DataError):
        canonical_via_projection(Z1, builtin_form("monomial11"), targets)


def test_projection_route_canonical_grid():
    f = builtin_form("poly2")
    u = canonical_via_projection(HenkinField(f), f)
    assert canonicity_defect_nd(unit_bidisc(), u, 6)["max"] <= 1e-3


def test_projection_route_matches_tilde():
    f = builtin_form("poly2")
    T = unit_bidisc().compact_targets(per_factor=5, max_targets=12)
    a = canonical_via_projection(HenkinField(f), f, T).values
    b = solve_tilde(unit_bidisc(), f, T).values
    assert np.max(np.abs(a - b)) <= 2e-2


@given(st.floats(0.05, 2.0), st.floats(0, 6.3), st.floats(0.05, 2.0), st.floats(0, 6.3))
def test_identity_property(r1, t1, r2, t2):
    a = np.array([r1 * np.exp(1j * t1), r2 * np.exp(1j * t2)])
    lhs, rhs = cauchy_identity_check(a, np.zeros(2))
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)
