import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from finsler_wpric import alphabeta as ab
from finsler_wpric import core
from finsler_wpric.core import TangentSample
from finsler_wpric.errors import DegenerateMetric, DomainError, FinslerError
from finsler_wpric.expr import parse
from finsler_wpric.harness import random_sample
from finsler_wpric.metrics import (
    CATALOG,
    BusemannHausdorff,
    ConstantDensity,
    CSRanders,
    Euclidean,
    Funk,
    GeneralF,
    OneFormSpec,
    QuarticRoot,
    RiemannianDensity,
    closed_form_volume,
)
from finsler_wpric.volume import bh_volume_density

BH = BusemannHausdorff()
ALPHA = RiemannianDensity()
FUNK_SAMPLE = ((0.3, 0.0), (1.0, 0.0))


def catalog_volume(m):
    return closed_form_volume(m) if m.family != "general" else BH


def test_euclidean_everything_flat():
    m = Euclidean(2)
    s = ((0.1, -0.2), (0.3, 0.7))
    assert np.allclose(core.fundamental_tensor(m, s), np.eye(2))
    assert np.allclose(core.spray(m, s), 0)
    assert np.allclose(core.riemann_curvature(m, s), 0)
    assert core.ricci(m, s) == 0


def test_funk_origin():
    m = Funk(2)
    assert np.allclose(core.fundamental_tensor(m, ((0.0, 0.0), (0.3, 0.4))), np.eye(2), atol=1e-14)
    assert np.allclose(core.spray(m, ((0.0, 0.0), (1.0, 0.0))), [0.5, 0.0], atol=1e-14)


def test_funk_reference_values():
    m = Funk(2)
    b = core.curvature_bundle(m, BH, ALPHA, FUNK_SAMPLE)
    assert b.F == pytest.approx(1 / 0.7, rel=1e-12)
    assert b.S == pytest.approx(1.5 / 0.7, rel=1e-9)
    alpha, beta = 1 / 0.91, 0.3 / 0.91
    assert b.WPRic0 - b.Ric == pytest.approx((beta - alpha) * (3 * alpha + beta) / 4, rel=1e-9)
    assert b.WPRic0 - b.Ric == pytest.approx(-0.6973795, abs=1e-7)
    # constant flag curvature -1/4
    assert b.Ric == pytest.approx(-0.25 * b.F**2, rel=1e-10)


def test_randers_constant_wind_fundamental_tensor():
    m = CATALOG["randers-const"][1]()
    g = core.fundamental_tensor(m, ((0.0, 0.0), (1.0, 0.0)))
    assert g[0, 0] == pytest.approx(2.25)


def test_riemannian_spray_from_christoffel():
    m = CATALOG["conformal-exp"][1]()
    rng = np.random.default_rng(3)
    for _ in range(10):
        s = random_sample(m, rng)
        gamma = ab.christoffel(m.alpha, s.x)
        expected = 0.5 * np.einsum("ijk,j,k->i", gamma, s.y, s.y)
        assert np.allclose(core.spray(m, s), expected, rtol=1e-12, atol=1e-14)
    g = core.spray(m, ((0.0, 0.0), (0.0, 1.0)))
    assert np.allclose(g, 0.0)


@pytest.mark.parametrize("name", ["klein2", "conformal-exp"])
def test_riemannian_ricci_matches_frame(name):
    m = CATALOG[name][1]()
    rng = np.random.default_rng(4)
    for _ in range(10):
        s = random_sample(m, rng)
        frame = ab.build_frame(m.alpha, OneFormSpec.from_components(["0"] * m.dim), s.x)
        assert core.ricci(m, s) == pytest.approx(frame.contract(np.array(s.y)).ric_bar, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("m", [QuarticRoot(1, 1, 0.5), QuarticRoot(1, 2, 0.5)], ids=["quartic", "quartic3"])
def test_locally_minkowski_is_flat(m):
    rng = np.random.default_rng(8)
    for _ in range(5):
        s = random_sample(m, rng)
        assert np.allclose(core.riemann_curvature(m, s), 0.0)
        assert core.projective_ricci(m, BH, s) == 0.0


def test_distortion():
    assert core.distortion(Euclidean(2), ConstantDensity(1.0), ((0.1, 0.2), (1.0, 0.0))) == pytest.approx(0, abs=1e-15)
    m = CATALOG["klein2"][1]()
    assert core.distortion(m, ALPHA, ((0.2, 0.1), (0.3, -1.0))) == pytest.approx(0, abs=1e-13)
    f = Funk(2)
    assert core.distortion(f, BH, ((0.0, 0.0), (1.0, 0.0))) == pytest.approx(0, abs=1e-12)
    # Randers: det g = (F/alpha)^(n+1) det a and sigma_F = (1-b^2)^((n+1)/2) sqrt(det a)
    x, y = FUNK_SAMPLE
    frame = ab.frame_for(f, x)
    c = frame.contract(np.array(y))
    expected = 1.5 * math.log((c.alpha + c.beta) / c.alpha) - 1.5 * math.log(1 - frame.b2)
    assert core.distortion(f, BH, FUNK_SAMPLE) == pytest.approx(expected, rel=1e-9)


def test_riemannian_s_vanishes():
    m = CATALOG["conformal-exp"][1]()
    rng = np.random.default_rng(9)
    for _ in range(50):
        s = random_sample(m, rng)
        assert abs(core.s_curvature(m, ALPHA, s)) <= 1e-8 * m.F(s.x, s.y)


def test_funk_s_curvature():
    m = Funk(2)
    rng = np.random.default_rng(10)
    for _ in range(50):
        s = random_sample(m, rng)
        F = m.F(s.x, s.y)
        assert core.s_curvature(m, BH, s) == pytest.approx(1.5 * F, rel=1e-6)


def test_cs_randers_s_curvature():
    m = CSRanders((0.1, 0.0))
    rng = np.random.default_rng(12)
    for _ in range(10):
        s = random_sample(m, rng)
        F = m.F(s.x, s.y)
        assert core.s_curvature(m, BH, s) == pytest.approx(3 * 0.1 * s.x[0] * F, rel=1e-6, abs=1e-12)


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_horizontal_derivative_of_F_vanishes(name):
    m = CATALOG[name][1]()
    rng = np.random.default_rng(13)
    for _ in range(10):
        s = random_sample(m, rng)
        F = m.F(s.x, s.y)
        assert abs(core.horizontal_derivative_along_spray(m.F_expr, m, s)) <= 1e-8 * F**2
        assert core.horizontal_derivative_along_spray(parse("3.5"), m, s) == 0.0


def test_horizontal_derivative_of_funk_beta():
    m = Funk(2)
    rng = np.random.default_rng(14)
    for _ in range(20):
        s = random_sample(m, rng)
        c = ab.frame_for(m, s.x).contract(np.array(s.y))
        hb = core.horizontal_derivative_along_spray(m.beta_form.beta, m, s)
        assert hb == pytest.approx(c.alpha * (c.alpha - c.beta), rel=1e-6)


def test_horizontal_derivative_accepts_callables():
    m = Funk(2)
    s = ((0.1, 0.2), (0.3, 0.4))
    via_expr = core.horizontal_derivative_along_spray(parse("x1*y2"), m, s)
    via_fn = core.horizontal_derivative_along_spray(lambda b: b["x1"] * b["y2"], m, s)
    assert via_fn == pytest.approx(via_expr, rel=1e-15)


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_self_reference_gives_projective_ricci(name):
    m = CATALOG[name][1]()
    vol = catalog_volume(m)
    rng = np.random.default_rng(15)
    for _ in range(5):
        s = random_sample(m, rng)
        w = core.weighted_projective_ricci(m, vol, vol, s)
        p = core.projective_ricci(m, vol, s)
        assert w == pytest.approx(p, rel=1e-8, abs=1e-8)


def test_funk_weighted_inequality():
    m = Funk(2)
    rng = np.random.default_rng(16)
    for _ in range(100):
        s = random_sample(m, rng, radius=0.95)
        b = core.curvature_bundle(m, BH, ALPHA, s)
        assert b.WPRic0 - b.Ric <= 1e-9


def test_sfrak_zero_means_wpric_equals_ric():
    m = CATALOG["klein2"][1]()
    s = ((0.2, -0.3), (0.5, 0.5))
    b = core.curvature_bundle(m, ALPHA, ALPHA, s)
    assert abs(b.Sfrak) <= 1e-12
    assert abs(b.WPRic0 - b.Ric) <= 1e-10


def test_weakly_einstein():
    zero = core.WeaklyEinsteinSpec(parse("0"), OneFormSpec.from_components(["0", "0"]))
    assert core.weakly_einstein_residual(Euclidean(2), zero, ((0.1, 0.1), (1.0, 2.0))) == 0.0
    funk = core.WeaklyEinsteinSpec(parse("-0.25"), OneFormSpec.from_components(["0", "0"]))
    rng = np.random.default_rng(17)
    m = Funk(2)
    for _ in range(10):
        s = random_sample(m, rng)
        assert abs(core.weakly_einstein_residual(m, funk, s)) <= 1e-9 * m.F(s.x, s.y) ** 2


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_bundle_identities(name):
    m = CATALOG[name][1]()
    rng = np.random.default_rng(18)
    s = random_sample(m, rng)
    st_ = core.spray_state(m, s)
    assert np.allclose(st_.g, st_.g.T, atol=0)
    assert np.allclose(st_.g @ st_.g_inv, np.eye(m.dim), atol=1e-10)
    assert np.allclose(st_.N @ np.array(s.y), 2 * st_.G, rtol=1e-9, atol=1e-12)
    assert st_.Ric == pytest.approx(sum(st_.R[i, i] for i in range(m.dim)), abs=1e-12)


@given(st.sampled_from(sorted(CATALOG)), st.integers(0, 2**16), st.floats(0.1, 10.0))
def test_homogeneity_ladder(name, seed, lam):
    m = CATALOG[name][1]()
    vol = catalog_volume(m)
    ref = ALPHA if m.alpha is not None else vol
    s = random_sample(m, np.random.default_rng(seed))
    b1 = core.curvature_bundle(m, vol, ref, s)
    b2 = core.curvature_bundle(m, vol, ref, s.scaled(lam))
    for field, deg in [("F", 1), ("G", 2), ("R", 2), ("Ric", 2), ("S", 1), ("Sfrak", 1), ("WPRic0", 2)]:
        u, w = np.asarray(getattr(b1, field)), np.asarray(getattr(b2, field))
        scale = max(np.max(np.abs(w)), lam**deg * b1.F**deg)
        assert np.max(np.abs(w - lam**deg * u)) <= 1e-9 * scale, field


def test_degenerate_metric_is_rejected():
    m = GeneralF(2, "(y1^4 + y2^4)^(0.25)")
    with pytest.raises(DegenerateMetric) as info:
        core.spray(m, ((0.0, 0.0), (1.0, 0.0)))
    assert info.value.min_eigenvalue <= 1e-12


def test_cone_boundary_and_zero_vector_are_errors():
    m = CATALOG["kropina-const"][1]()
    with pytest.raises(DomainError):
        core.spray(m, ((0.0, 0.0), (0.0, 1.0)))
    with pytest.raises(FinslerError):
        core.spray(Funk(2), ((0.0, 0.0), (0.0, 0.0)))


def test_sample_dimension_mismatch():
    with pytest.raises(DomainError):
        TangentSample((0.0, 0.0), (1.0,))


def test_volume_reference_values():
    assert bh_volume_density(Euclidean(2), (0.0, 0.0)) == pytest.approx(1.0, rel=1e-12)
    assert bh_volume_density(CATALOG["randers-const"][1](), (0.0, 0.0)) == pytest.approx(0.75**1.5, rel=1e-9)
    assert bh_volume_density(CATALOG["kropina-const"][1](), (0.0, 0.0)) == pytest.approx(4.0, rel=1e-9)
