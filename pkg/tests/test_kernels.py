import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from canondbar.errors import ParameterError, SingularityError
from canondbar.geometry import ellipse, unit_disc
from canondbar.kernels import (KERNEL_FITS, KernelSet, cauchy_riemann_residual, fit_kernel_decay,
                               kernel_H, ring_average_correction, stability_probe)
from canondbar.report import PairSampler
from canondbar.workflows import closed_form_errors, reproducing_error

CIRCLE = np.exp(1j * np.linspace(0, 2 * np.pi, 41)[:-1])


@pytest.fixture(scope="module")
def exact():
    return KernelSet(unit_disc())


@pytest.fixture(scope="module")
def nystrom():
    return KernelSet(unit_disc(), "nystrom-backed", 256)


@pytest.mark.parametrize("z,expected", [(1.0, -1j / (2 * np.pi)), (1j, -1 / (2 * np.pi))])
def test_cauchy_kernel_values(z, expected):
    assert kernel_H(0.0, z) == pytest.approx(expected, abs=1e-15)


def test_cauchy_kernel_singular():
    with pytest.raises(SingularityError):
        kernel_H(0.2, 0.2)


def test_disc_values(exact):
    assert exact.L(0.0, 0.5) == pytest.approx(-0.0795775j, abs=1e-7)
    assert exact.S(0.0, 0.5) == pytest.approx(0.238732j, abs=1e-6)
    assert exact.S(0.0, 0.5) == pytest.approx(3j / (4 * np.pi), abs=1e-15)
    z = np.array([0.0, 0.3, -0.5j, 0.9 + 0.1j])
    assert np.allclose(exact.K(0.0, z), 1 / np.pi, atol=1e-15)


@pytest.mark.parametrize("ks_name", ["exact", "nystrom"])
def test_boundary_traces(ks_name, request):
    ks = request.getfixturevalue(ks_name)
    w = 0.2 - 0.3j
    assert np.max(np.abs(ks.L(w, CIRCLE) - kernel_H(w, CIRCLE))) <= 1e-10
    assert np.max(np.abs(ks.S(w, CIRCLE))) <= 1e-10


def test_s_singular_pair(exact):
    with pytest.raises(SingularityError):
        exact.S(0.3, 0.3 + 1e-9)


@pytest.mark.parametrize("eps", [None, 0.02])
def test_ring_form_matches_dirichlet(exact, eps):
    w, z = 0.3, 0.5 + 0.2j
    assert ring_average_correction(exact, w, z, eps=eps) == pytest.approx(exact.L(w, z), rel=1e-8)


def test_ring_form_radius_validated(exact):
    with pytest.raises(ParameterError):
        ring_average_correction(exact, 0.3, 0.5, eps=0.5)


def test_reproducing_property():
    assert reproducing_error(unit_disc(), 0.4) <= 1e-6


@pytest.mark.parametrize("ks_name", ["exact", "nystrom"])
def test_bergman_from_dbar_of_l(ks_name, request, rng):
    ks = request.getfixturevalue(ks_name)
    w, z = PairSampler(unit_disc(), seed=7, min_sep=0.1, delta_floor=0.1).sample(40)
    h = 1e-5
    dbar = 0.5 * ((ks.L(w, z + h) - ks.L(w, z - h)) + 1j * (ks.L(w, z + 1j * h) - ks.L(w, z - 1j * h))) / (2 * h)
    k = ks.K(w, z)
    assert np.max(np.abs(2j * dbar - k) / np.abs(k)) <= 1e-5


def test_dbar_s_identity(exact):
    dzbar = exact.solution_gradient(0.0, 0.5)[1]
    assert dzbar == pytest.approx(exact.K(0.0, 0.5) / 2j, rel=1e-12)
    assert dzbar == pytest.approx(1 / (2j * np.pi), rel=1e-12)


@pytest.mark.parametrize("ks_name", ["exact", "nystrom"])
def test_grad_s_matches_finite_differences(ks_name, request):
    ks = request.getfixturevalue(ks_name)
    w, z = PairSampler(unit_disc(), seed=11, min_sep=0.1, delta_floor=0.05).sample(100)
    h = 1e-5
    dx = (ks.S(w, z + h) - ks.S(w, z - h)) / (2 * h)
    dy = (ks.S(w, z + 1j * h) - ks.S(w, z - 1j * h)) / (2 * h)
    dz, dzb = ks.solution_gradient(w, z)
    scale = np.abs(dz) + np.abs(dzb)
    assert np.max(np.abs(0.5 * (dx - 1j * dy) - dz) / scale) <= 1e-5
    assert np.max(np.abs(0.5 * (dx + 1j * dy) - dzb) / scale) <= 1e-5


def test_grad_s_finite_on_boundary(exact):
    g = exact.solution_gradient_norm(0.0, CIRCLE)
    assert np.all(np.isfinite(g))
    r = np.abs(CIRCLE)
    rep = fit_kernel_decay(exact, PairSampler(unit_disc(), seed=0), "gradS", n=2000, doubling=False)
    assert np.all(g <= rep.constant * np.log(4 / r) / r**2 * (1 + 1e-9))


@pytest.mark.parametrize("ks_name", ["exact", "nystrom"])
def test_s_equals_l_minus_h(ks_name, request):
    ks = request.getfixturevalue(ks_name)
    w, z = PairSampler(unit_disc(), seed=2, min_sep=1e-3).sample(1000)
    assert np.max(np.abs(ks.S(w, z) - (ks.L(w, z) - kernel_H(w, z)))) <= 1e-12 * np.max(np.abs(ks.L(w, z)))


@pytest.mark.parametrize("ks_name", ["exact", "nystrom"])
def test_l_holomorphic_in_pole(ks_name, request):
    ks = request.getfixturevalue(ks_name)
    w, z = PairSampler(unit_disc(), seed=4, min_sep=0.1, delta_floor=0.05, w_delta_floor=0.05).sample(50)
    assert np.max(cauchy_riemann_residual(ks, w, z)) <= 1e-6


def test_nystrom_closed_form_agreement():
    out = closed_form_errors(N=256, count=100, seed=0)
    assert max(out["L"], out["S"], out["K"]) <= 1e-8


@pytest.mark.parametrize("which,lo,hi", [("S-first", -1.3, -0.9), ("gradS", -2.3, -1.9)])
def test_disc_decay_slopes(exact, which, lo, hi):
    rep = fit_kernel_decay(exact, PairSampler(unit_disc(), seed=0), which, n=1000, doubling=False)
    assert lo <= rep.slope <= hi


def test_ellipse_s_second_stable():
    dom = ellipse(2.0, 1.0)
    # poles closer than 0.02 d to the boundary are not resolved by the boundary solve
    sampler = PairSampler(dom, seed=0, w_delta_floor=0.02 * dom.diameter)
    rep = fit_kernel_decay(KernelSet(dom, None, 1024), sampler, "S-second", n=2000)
    assert rep.finite and rep.stable(0.10)


def test_unknown_fit(exact):
    with pytest.raises(ParameterError):
        fit_kernel_decay(exact, PairSampler(unit_disc()), "nope")
    assert "K-bound" in KERNEL_FITS


def test_exhaustion_stability_decreasing():
    devs = [r["deviation"] for r in stability_probe(unit_disc(), [4, 8, 16, 32], kappa=0.5)]
    assert all(b < a for a, b in zip(devs[:-1], devs[1:]))
    assert devs[-1] < 1e-2


def test_exhaustion_stability_kappa_validated():
    with pytest.raises(ParameterError):
        stability_probe(unit_disc(), [2, 4], kappa=0.99)


@given(st.floats(0, 0.85), st.floats(0, 2 * np.pi), st.floats(0, 0.95), st.floats(0, 2 * np.pi))
def test_bergman_hermitian(r1, t1, r2, t2):
    ks = KernelSet(unit_disc())
    w, z = r1 * np.exp(1j * t1), r2 * np.exp(1j * t2)
    assert ks.K(w, z) == pytest.approx(np.conj(ks.K(z, w)), abs=1e-12)
    assert ks.K(w, w).real > 0
