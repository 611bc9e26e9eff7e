import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from canondbar.errors import DataError, ParameterError, UnsupportedError
from canondbar.forms import Form01, builtin_form, zero_form
from canondbar.geometry import disc, ellipse, unit_disc
from canondbar.oracle import (DiscreteDbarSystem, compare_fields, compare_with_tilde, discrete_canonicity,
                              least_norm_solve)
from canondbar.product import ProductDomain, ProductField
from canondbar.solve1d import ScalarData, SolutionField


def rel_l2(field, exact):
    w = field.weights
    d = field.values - exact
    return np.sqrt(np.sum(np.abs(d) ** 2 * w) / np.sum(np.abs(exact) ** 2 * w))


def exact_on(field, f):
    return f.exact(field.points)


@pytest.fixture(scope="module")
def bidisc64():
    f = builtin_form("monomial11")
    sys = DiscreteDbarSystem(ProductDomain((unit_disc(), unit_disc())), f, 64)
    return sys, least_norm_solve(sys)


def test_bidisc_monomial_64(bidisc64):
    sys, u = bidisc64
    assert rel_l2(u, np.conj(u.points[..., 0] * u.points[..., 1])) <= 1e-2
    assert discrete_canonicity(sys, u, 4) <= 1e-6


def test_zero_data(bidisc):
    u = least_norm_solve(DiscreteDbarSystem(bidisc, zero_form(2), 8))
    assert np.max(np.abs(u.values)) == 0


@pytest.mark.parametrize("dom", [unit_disc(), disc(0.5 + 0.25j, 1.5)], ids=["unit", "shifted"])
def test_one_dimensional_calibration(dom):
    u = least_norm_solve(DiscreteDbarSystem([dom], 1.0, 32))
    assert isinstance(u, SolutionField)
    assert rel_l2(u, np.conj(u.points - dom.center)) <= 1e-2


def test_one_dimensional_second_order():
    errs = []
    for M in (16, 32):
        u = least_norm_solve(DiscreteDbarSystem([unit_disc()], ScalarData(np.conj), M))
        errs.append(rel_l2(u, np.conj(u.points) ** 2 / 2))
    assert errs[1] <= 1e-2 and 3.0 <= errs[0] / errs[1] <= 5.0


@pytest.mark.parametrize("name", ["wave", "poly2"])
def test_bidisc_refinement(bidisc, name):
    f = builtin_form(name)
    errs = []
    for M in (16, 32):
        u = least_norm_solve(DiscreteDbarSystem(bidisc, f, M))
        errs.append(rel_l2(u, exact_on(u, f)))
    assert errs[1] < errs[0] and errs[1] <= 1e-2


def test_consistency_second_order(bidisc):
    f = builtin_form("wave")
    errs = [DiscreteDbarSystem(bidisc, f, M).consistency_error(f.potential, lambda j, Z: f.component(j, Z))
            for M in (16, 32)]
    assert errs[0] / errs[1] >= 1.8


def test_routes_agree(bidisc):
    sys = DiscreteDbarSystem(bidisc, builtin_form("poly2"), 8)
    a = least_norm_solve(sys, "eigen")
    b = least_norm_solve(sys, "lsqr", tol=1e-14)
    assert np.max(np.abs(a.values - b.values)) <= 1e-8
    assert a.meta["method"] == "eigen" and b.meta["method"] == "lsqr"


def test_discrete_canonicity_bidisc(bidisc):
    sys = DiscreteDbarSystem(bidisc, builtin_form("wave"), 16)
    assert discrete_canonicity(sys, least_norm_solve(sys), 4) <= 1e-6


def test_inconsistent_data_rejected(bidisc):
    f = Form01(2, (lambda Z: np.conj(Z[..., 1]), lambda Z: 0 * Z[..., 0]), name="not-closed")
    with pytest.raises(DataError):
        least_norm_solve(DiscreteDbarSystem(bidisc, f, 16))


def test_parameter_validation(bidisc):
    with pytest.raises(ParameterError):
        DiscreteDbarSystem(bidisc, zero_form(2), 2)
    with pytest.raises(ParameterError):
        DiscreteDbarSystem(bidisc, zero_form(2), (8, 9))
    with pytest.raises(UnsupportedError):
        DiscreteDbarSystem(ProductDomain((unit_disc(), ellipse(2, 1))), zero_form(2), 8)
    with pytest.raises(ParameterError):
        least_norm_solve(DiscreteDbarSystem(bidisc, zero_form(2), 8), method="qr")


def test_compare_identical_and_offset():
    pts = np.linspace(0, 0.5, 7).astype(complex)
    w = np.full(7, 1 / 7)
    a = SolutionField(pts, np.zeros(7), w)
    c = 0.3 - 0.4j
    b = SolutionField(pts, np.full(7, c), w)
    assert compare_fields(b, b)["sup_diff"] == 0 and compare_fields(b, b)["l2_diff"] == 0
    rec = compare_fields(a, b)
    assert rec["sup_diff"] == pytest.approx(abs(c)) and rec["l2_diff"] == pytest.approx(abs(c))


def test_compare_grid_mismatch():
    a = SolutionField(np.zeros(3, complex), np.zeros(3))
    b = SolutionField(np.ones(3, complex), np.zeros(3))
    with pytest.raises(ParameterError):
        compare_fields(a, b)


def test_compare_with_tilde_record(bidisc):
    rec = compare_with_tilde(bidisc, builtin_form("monomial11"), 16)
    assert rec["targets"] == 16 and rec["rel_l2_diff"] <= 1e-2
    assert set(rec) >= {"sup_diff", "l2_diff", "argmax", "at", "grid", "residual"}


@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_solution_linear_in_data(a, b):
    pd = ProductDomain((unit_disc(), unit_disc()))
    f, g = builtin_form("monomial11"), builtin_form("bar1")
    comb = Form01(2, tuple((lambda Z, k=k: a * f.component(k, Z) + b * g.component(k, Z)) for k in range(2)))
    u = least_norm_solve(DiscreteDbarSystem(pd, comb, 8)).values
    v = a * least_norm_solve(DiscreteDbarSystem(pd, f, 8)).values + b * least_norm_solve(DiscreteDbarSystem(pd, g, 8)).values
    assert np.max(np.abs(u - v)) <= 1e-10 * (1 + abs(a) + abs(b))
