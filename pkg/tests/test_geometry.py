import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from canondbar.errors import DomainMembershipError, GeometryError, ParameterError
from canondbar.geometry import (area_quadrature, boundary_quadrature, disc, ellipse, exhaustion,
                                fourier_curve, make_domain, parametric, unit_disc)
from canondbar.report import sample_interior

DOMAINS = {
    "disc": unit_disc,
    "ellipse": lambda: ellipse(2.0, 1.0),
    "flower": lambda: make_domain("flower"),
    "shifted": lambda: disc(0.5 + 0.25j, 1.5),
}


def test_unit_disc_metrics():
    d = unit_disc()
    assert d.diameter == pytest.approx(2.0)
    assert d.exterior_ball_radius == pytest.approx(1.0)


def test_ellipse_diameter():
    assert ellipse(2, 1).diameter == pytest.approx(4.0)


@pytest.mark.parametrize("a,b", [(0, 1), (2, -1)])
def test_degenerate_ellipse_rejected(a, b):
    with pytest.raises(ParameterError):
        ellipse(a, b)


def test_open_curve_rejected():
    with pytest.raises(GeometryError):
        parametric(lambda t: np.exp(1j * 0.9 * t))


def test_self_intersecting_curve_rejected():
    with pytest.raises(GeometryError):
        parametric(lambda t: np.sin(2 * t) + 1j * np.sin(t))


@pytest.mark.parametrize("z,expected", [(0, 1.0), (0.5, 0.5)])
def test_disc_distance(z, expected):
    assert unit_disc().distance_to_boundary(np.array([z]))[0] == pytest.approx(expected, abs=1e-14)


def test_ellipse_distance_at_center():
    assert ellipse(2, 1).distance_to_boundary(np.array([0j]))[0] == pytest.approx(1.0, abs=1e-9)


def test_distance_outside_rejected():
    with pytest.raises(DomainMembershipError):
        unit_disc().distance_to_boundary(np.array([1.5]))


@pytest.mark.parametrize("name", sorted(DOMAINS))
def test_distance_disc_contains_no_boundary_node(name, rng):
    dom = DOMAINS[name]()
    z = sample_interior(dom, 50, rng)
    nodes = boundary_quadrature(dom, 2048).nodes
    d = dom.distance_to_boundary(z)
    gap = np.abs(nodes[None, :] - z[:, None]).min(axis=1)
    assert np.all(gap >= d * (1 - 1e-9))


@pytest.mark.parametrize("name", sorted(DOMAINS))
def test_diameter_matches_boundary_samples(name):
    dom = DOMAINS[name]()
    g = boundary_quadrature(dom, 1024).nodes
    dmax = np.abs(g[:, None] - g[None, :]).max()
    assert dmax == pytest.approx(dom.diameter, rel=1e-2)
    assert dom.exterior_ball_radius > 0


def test_boundary_quadrature_disc_examples():
    q = boundary_quadrature(unit_disc(), 64)
    assert q.contour_integral(1 / (q.nodes - 0.3)) / (2j * np.pi) == pytest.approx(1, abs=1e-12)
    assert np.sum(q.weights) == pytest.approx(2 * np.pi, abs=1e-12)
    assert np.all(q.weights > 0)


def test_outside_pole_integral_vanishes_64_nodes():
    # the trapezoid error here is 2*pi*(2/3)**64 ~ 3.4e-11, above the 1e-12 target
    q = boundary_quadrature(unit_disc(), 64)
    assert q.contour_integral(1 / (q.nodes - 1.5)) == pytest.approx(0, abs=1e-12)


def test_outside_pole_integral_converges_geometrically():
    errs = [abs(boundary_quadrature(unit_disc(), n).contour_integral(
        1 / (boundary_quadrature(unit_disc(), n).nodes - 1.5))) for n in (32, 64)]
    assert errs[1] == pytest.approx(2 * np.pi * (2 / 3) ** 64, rel=1e-3)
    assert errs[1] < errs[0] * (2 / 3) ** 31


def test_boundary_quadrature_needs_nodes():
    with pytest.raises(ParameterError):
        boundary_quadrature(unit_disc(), 8)


@pytest.mark.parametrize("name", sorted(DOMAINS))
def test_cauchy_residue(name, rng):
    dom = DOMAINS[name]()
    q = boundary_quadrature(dom, 256)
    inside = sample_interior(dom, 50, rng, 0.05 * dom.diameter)
    outside = dom.center + (dom.curve(rng.random(50) * 2 * np.pi) - dom.center) * (1.3 + rng.random(50))
    for w, target in ((inside, 1.0), (outside, 0.0)):
        vals = q.contour_integral(1 / (q.nodes[None, :] - w[:, None])) / (2j * np.pi)
        assert np.max(np.abs(vals - target)) <= 1e-8


@pytest.mark.parametrize("name", sorted(DOMAINS))
def test_area_quadrature_total(name):
    dom = DOMAINS[name]()
    q = area_quadrature(dom, 32, 128)
    assert np.sum(q.weights) == pytest.approx(dom.area(), rel=1e-8)
    assert np.all(dom.contains(q.nodes))


def test_marked_area_quadrature_integrates_singularity():
    dom = unit_disc()
    q = area_quadrature(dom, 48, 96, marked=0.3 + 0.2j)
    # int_D 1/|z - w| dA for w = 0: 2 pi, checked here at an off-centre pole via the area
    assert np.sum(q.weights) == pytest.approx(np.pi, rel=1e-10)
    q0 = area_quadrature(dom, 48, 96, marked=0.0)
    assert np.sum(q0.weights / np.abs(q0.nodes)) == pytest.approx(2 * np.pi, rel=1e-10)


def test_exhaustion_level4_gap():
    s = exhaustion(unit_disc(), 4)
    assert 1 / 5 < s.dist < 1 / 4
    assert 1 / 5 < 1 - s.rho < 1 / 4


@pytest.mark.parametrize("mode", ["collar", "scaling"])
@pytest.mark.parametrize("level", [2, 3, 8])
def test_exhaustion_fixes_center(level, mode):
    assert exhaustion(unit_disc(), level, mode).h(np.array([0j]))[0] == 0


def test_exhaustion_monotone():
    a, b = exhaustion(unit_disc(), 2), exhaustion(unit_disc(), 3)
    assert a.rho < b.rho


@pytest.mark.parametrize("mode", ["collar", "scaling"])
def test_exhaustion_distance_to_identity_decreases(mode):
    dom = unit_disc()
    r = np.linspace(0, 1, 60)[:, None] * np.exp(1j * np.linspace(0, 2 * np.pi, 64))[None, :]
    z = r.ravel()
    devs = [np.max(np.abs(exhaustion(dom, l, mode).h(z) - z)) for l in (2, 4, 8, 16, 32)]
    assert all(b < a for a, b in zip(devs[:-1], devs[1:]))
    assert devs[-1] < 0.05


def test_exhaustion_maps_into_inner_domain():
    dom = ellipse(2, 1)
    s = exhaustion(dom, 8)
    z = dom.curve(np.linspace(0, 2 * np.pi, 200, endpoint=False))
    assert np.all(s.inner_domain.gauge(s.h(z)) <= 1 + 1e-9)


def test_exhaustion_level_validated():
    with pytest.raises(ParameterError):
        exhaustion(unit_disc(), 1)


@given(st.floats(0.2, 3.0), st.floats(0.2, 3.0))
def test_ellipse_gauge_consistent_with_contains(a, b):
    dom = ellipse(a, b)
    z = np.array([0.99 * a, 1.01 * a, 0.99j * b, 1.01j * b])
    assert list(dom.contains(z)) == [True, False, True, False]


def test_fourier_curve_roundtrip(tmp_path):
    from canondbar.geometry import load_domain, save_domain
    dom = fourier_curve(1.0, (0.0, 0.1), (0.05,))
    save_domain(dom, tmp_path / "d.json")
    back = load_domain(tmp_path / "d.json")
    t = np.linspace(0, 2 * np.pi, 17)
    assert np.allclose(back.curve(t), dom.curve(t))


def test_make_domain_unknown():
    with pytest.raises(ParameterError):
        make_domain("no-such-domain")
