import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from canondbar.discgrid import DiscGrid
from canondbar.errors import DataError, ParameterError
from canondbar.forms import (BUILTIN_POTENTIALS, Form01, PolyPotential, bidisc_family, builtin_form,
                             fd_dbar, form_from_potential, zero_form)


def points(n, count=50, seed=0, rmax=0.9):
    rng = np.random.default_rng(seed)
    r = rmax * np.sqrt(rng.random((count, n)))
    return r * np.exp(2j * np.pi * rng.random((count, n)))


@pytest.mark.parametrize("name", sorted(BUILTIN_POTENTIALS))
def test_components_are_dbar_of_potential(name):
    f = builtin_form(name)
    Z = points(f.n)
    for k in range(f.n):
        fd = fd_dbar(f.potential, Z, k, 1e-5)
        assert np.max(np.abs(fd - f.component(k, Z))) <= 1e-8


@pytest.mark.parametrize("name", sorted(BUILTIN_POTENTIALS) + ["abs2", "abs3"])
def test_builtins_closed(name):
    f = builtin_form(name)
    Z = points(f.n, seed=1)
    assert f.closedness_defect(Z) <= 1e-6
    assert f.closedness_defect(Z, use_oracle=False) <= 1e-6


@pytest.mark.parametrize("name", sorted(BUILTIN_POTENTIALS))
def test_derivative_oracle_matches_fd(name):
    f = builtin_form(name)
    Z = points(f.n, seed=2)
    for k in range(f.n):
        for j in range(f.n):
            if j != k:
                fd = fd_dbar(lambda X: f.component(k, X), Z, j, 1e-5)
                assert np.max(np.abs(f.derivative(k, (j,), Z) - fd)) <= 1e-8


def test_non_closed_rejected():
    f = Form01(2, (lambda Z: np.conj(Z[..., 1]), lambda Z: 0 * Z[..., 0]), name="bad")
    with pytest.raises(DataError):
        f.check_closed(points(2))


def test_component_count_checked():
    with pytest.raises(ParameterError):
        Form01(2, (lambda Z: Z[..., 0],))


def test_repeated_derivative_index_rejected():
    f = builtin_form("monomial11")
    with pytest.raises(ParameterError):
        f.derivative(0, (0,), points(2))


@pytest.mark.parametrize("a,b", [(0, 0), (2, 0), (1, 1), (0, 2), (3, 1), (2, 3)])
def test_projection_coefficients_match_quadrature(a, b):
    g = DiscGrid(32, 64)
    pot = PolyPotential(((1.0, (a,), (b,)),), 1)
    Z = g.nodes[..., None]
    num = g.project(pot(Z))
    assert np.max(np.abs(num - pot.projection(Z))) <= 1e-10


def test_canonical_tensor_solution():
    f = builtin_form("monomial11")
    Z = points(2)
    assert np.allclose(f.exact(Z), np.conj(Z[:, 0] * Z[:, 1]), atol=1e-15)


def test_abs_form_is_continuous_at_origin():
    f = builtin_form("abs2")
    Z = np.array([[1e-12, 0.5], [0.0, 0.5]])
    assert np.abs(f.component(0, Z[:1]) - f.component(0, Z[1:])).max() <= 1e-10


def test_zero_form():
    f = zero_form(3)
    assert f.sup_norm(points(3)) == 0 and f.exact(points(3)).max() == 0


def test_family_size():
    assert len(bidisc_family(10)) == 10
    with pytest.raises(ParameterError):
        bidisc_family(50)


def test_unknown_builtin():
    with pytest.raises(ParameterError):
        builtin_form("nope")


@given(st.permutations([0, 1, 2]))
def test_permutation_consistent(perm):
    f = builtin_form("poly3")
    g = f.permuted(perm)
    Z = points(3, 10, seed=3)
    Zp = Z[:, list(perm)]
    for i in range(3):
        assert np.allclose(g.component(i, Zp), f.component(perm[i], Z), atol=1e-14)
    assert np.allclose(g.exact(Zp), f.exact(Z), atol=1e-14)


@given(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_scaling_is_linear(c):
    f = builtin_form("wave")
    Z = points(2, 10, seed=4)
    g = f.scaled(c)
    assert np.allclose(g.component(0, Z), c * f.component(0, Z), atol=1e-12)
    assert np.allclose(g.exact(Z), c * f.exact(Z), atol=1e-12)


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)),
                min_size=1, max_size=3))
def test_random_potentials_give_closed_forms(exps):
    pot = PolyPotential(tuple((1.0, (a1, a2), (b1, b2)) for a1, a2, b1, b2 in exps), 2)
    f = form_from_potential(pot, "rand")
    assert f.closedness_defect(points(2, 20, seed=5)) <= 1e-10
