import numpy as np
import pytest

from canondbar.errors import DataError, DomainMembershipError, ParameterError, UnsupportedError
from canondbar.forms import Form01, builtin_form, zero_form
from canondbar.geometry import disc, unit_disc
from canondbar.product import (ProductDomain, TildeConfig, canonicity_defect_nd, dbar_residual,
                               solve_smooth, solve_tilde, uniform_bound_probe)

SMALL = TildeConfig(24, 8, 8, 16, 32, 12, 6, 6)


@pytest.fixture(scope="module")
def targets2(bidisc):
    return bidisc.compact_targets(per_factor=7, max_targets=16)


def test_anti_holomorphic_monomial_value(bidisc):
    u = solve_smooth(bidisc, builtin_form("monomial11"), np.array([[0.5, 0.5]]))
    assert u.values[0] == pytest.approx(0.25, abs=1e-6)


def test_grid_output_and_canonicity(bidisc):
    f = builtin_form("monomial11")
    u = solve_smooth(bidisc, f)
    mask = np.all(np.abs(u.points) <= 0.8, axis=-1)
    assert np.max(np.abs(u.values - f.exact(u.points))[mask]) <= 1e-2
    assert canonicity_defect_nd(bidisc, u, 6)["max"] <= 1e-3


@pytest.mark.parametrize("solver", [solve_smooth, solve_tilde])
def test_zero_data(bidisc, targets2, solver):
    assert np.max(np.abs(solver(bidisc, zero_form(2), targets2).values)) == 0


def test_tensorized_calibration(bidisc, targets2):
    u = solve_smooth(bidisc, builtin_form("bar1"), targets2)
    assert np.max(np.abs(u.values - np.conj(targets2[:, 0]))) <= 1e-6


@pytest.mark.parametrize("name", ["monomial11", "poly2", "wave"])
def test_smooth_matches_exact(bidisc, targets2, name):
    f = builtin_form(name)
    u = solve_smooth(bidisc, f, targets2)
    assert np.max(np.abs(u.values - f.exact(targets2))) <= 1e-2


@pytest.mark.parametrize("name", ["mixed", "poly2", "wave"])
def test_smooth_dbar_residual(bidisc, name):
    f = builtin_form(name)
    P = bidisc.compact_targets(per_factor=4)
    assert dbar_residual(lambda Z: solve_smooth(bidisc, f, Z, check_closed=False).values, bidisc, f, P) <= 1e-2


@pytest.mark.parametrize("name", ["monomial11", "poly2"])
def test_tilde_agrees_with_smooth_bidisc(bidisc, targets2, name):
    f = builtin_form(name)
    a = solve_tilde(bidisc, f, targets2).values
    b = solve_smooth(bidisc, f, targets2).values
    assert np.max(np.abs(a - b)) <= 1e-2


def test_tilde_agrees_with_smooth_tridisc(tridisc):
    f = builtin_form("poly3")
    T = tridisc.compact_targets(per_factor=3, max_targets=4)
    a = solve_tilde(tridisc, f, T).values
    b = solve_smooth(tridisc, f, T).values
    assert np.max(np.abs(a - b)) <= 1e-2


def test_tilde_continuous_data_bounded(bidisc, targets2):
    f = builtin_form("abs2")
    u = solve_tilde(bidisc, f, targets2, SMALL)
    sup_f = f.sup_norm(bidisc.random_points(2000, 3))
    assert np.isfinite(u.sup_norm) and u.sup_norm <= 10 * sup_f
    assert np.max(np.abs(u.values - f.exact(targets2))) <= 2e-2


@pytest.mark.parametrize("perm", [(1, 0)])
@pytest.mark.parametrize("solver", [solve_smooth, solve_tilde])
def test_permutation_symmetry(bidisc, targets2, perm, solver):
    pd = ProductDomain((unit_disc(), disc(0.2j, 1.3)))
    f = builtin_form("poly2")
    T = targets2[:6] * np.array([1.0, 1.3]) + np.array([0.0, 0.2j])
    a = solver(pd, f, T).values
    b = solver(pd.permuted(perm), f.permuted(perm), T[:, list(perm)]).values
    assert np.max(np.abs(a - b)) <= 1e-10


def test_canonicity_witnesses(bidisc):
    hol = canonicity_defect_nd(bidisc, lambda Z: Z[..., 0] * Z[..., 1], 3)
    assert hol["defects"][(1, 1)] == pytest.approx(1.0, abs=1e-6)
    assert canonicity_defect_nd(bidisc, lambda Z: 0 * Z[..., 0], 3)["max"] == 0


def test_uniform_probe_zero_family(bidisc):
    rep = uniform_bound_probe(bidisc, [zero_form(2)] * 3, resolutions=[SMALL])
    assert rep.constant == 0


def test_uniform_probe_tridisc(tridisc):
    T = tridisc.compact_targets(per_factor=3, max_targets=3)
    rep = uniform_bound_probe(tridisc, [builtin_form("monomial111")], resolutions=[SMALL], targets=T)
    assert rep.finite and 0 < rep.constant < 10


def test_non_closed_form_rejected(bidisc, targets2):
    f = Form01(2, (lambda Z: np.conj(Z[..., 1]), lambda Z: 0 * Z[..., 0]),
               lambda k, J, Z: np.ones(Z.shape[:-1]) if k == 0 else np.zeros(Z.shape[:-1]), "bad")
    with pytest.raises(DataError):
        solve_smooth(bidisc, f, targets2)
    with pytest.raises(DataError):
        solve_tilde(bidisc, f, targets2)


def test_smooth_needs_derivatives(bidisc, targets2):
    g = builtin_form("wave")
    f = Form01(2, g.components, None, "no-derivatives")
    with pytest.raises(DataError):
        solve_smooth(bidisc, f, targets2)


def test_domain_validation(bidisc):
    with pytest.raises(ParameterError):
        ProductDomain((unit_disc(),))
    with pytest.raises(DomainMembershipError):
        bidisc.check_interior(np.array([[0.0, 1.2]]))
    with pytest.raises(UnsupportedError):
        solve_tilde(ProductDomain((unit_disc(),) * 4), zero_form(4), np.zeros((1, 4)))
