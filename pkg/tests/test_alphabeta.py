import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from finsler_wpric import alphabeta as ab
from finsler_wpric import core
from finsler_wpric.errors import FinslerError, NotProjectivelyFlat
from finsler_wpric.harness import (
    Checks,
    compare_closed_forms,
    conformal_kropina,
    random_metric,
    random_projective_data,
    random_sample,
    kropina_flat_agreement,
)
from finsler_wpric.metrics import (
    CATALOG,
    ClosedFormKropina,
    ClosedFormRanders,
    Funk,
    Kropina,
    OneFormSpec,
    Riemannian,
    RiemannianDensity,
    RiemannianSpec,
)

ALPHA = RiemannianDensity()


def euclid(n=2):
    return RiemannianSpec.euclidean(n)


def test_christoffel_examples():
    assert np.all(ab.christoffel(euclid(), (0.3, 0.1)) == 0)
    exp_a = RiemannianSpec.from_entries(2, {(0, 0): "exp(2*x1)", (1, 1): "1"})
    g = ab.christoffel(exp_a, (0.4, -0.2))
    expected = np.zeros((2, 2, 2))
    expected[0, 0, 0] = 1.0
    assert np.allclose(g, expected, atol=1e-14)
    assert np.allclose(ab.christoffel(Funk(2).alpha, (0.0, 0.0)), 0.0, atol=1e-14)


def test_christoffel_symmetry():
    m = random_metric("randers", 3, 1)
    g = ab.christoffel(m.alpha, (0.1, 0.2, -0.3))
    assert np.allclose(g, np.swapaxes(g, 1, 2), atol=0)


def test_constant_b_frame_vanishes():
    f = ab.build_frame(euclid(), OneFormSpec.from_components(["0.3", "0.1"]), (0.2, 0.2))
    for name in ("r", "s", "t", "q", "e", "r_cov", "s_cov"):
        assert np.all(getattr(f, name) == 0), name


def test_funk_frame_closed_and_r00():
    m = Funk(2)
    f = ab.frame_for(m, (0.2, -0.3))
    assert np.allclose(f.s, 0.0, atol=1e-14)
    for y in ab.direction_grid(2, 8):
        c = f.contract(y)
        assert c.r00 == pytest.approx(c.alpha**2 - c.beta**2, rel=1e-12)


def test_rotational_b_frame():
    kappa = 0.7
    f = ab.build_frame(euclid(), OneFormSpec.from_components([f"{kappa}*x2", f"-{kappa}*x1"]), (0.1, 0.3))
    assert np.allclose(f.r, 0.0)
    assert f.s[0, 1] == pytest.approx(kappa) and f.s[1, 0] == pytest.approx(-kappa)
    # t_ij = s_ik s^k_j is negative semidefinite, with trace -2 kappa^2
    assert f.t_trace == pytest.approx(-2 * kappa**2)


@given(st.integers(0, 500), st.integers(2, 3))
def test_frame_identities(seed, n):
    m = random_metric("randers", n, seed)
    rng = np.random.default_rng(seed)
    x = tuple(rng.uniform(-0.5, 0.5, n))
    f = ab.frame_for(m, x)
    assert np.array_equal(f.r, f.r.T)
    assert np.array_equal(f.s, -f.s.T)
    y = rng.normal(size=n)
    assert float(y @ f.s @ y) == pytest.approx(0.0, abs=1e-15)
    c = f.contract(y)
    assert c.e00 - c.r00 - 2 * c.s0 * c.beta == pytest.approx(0.0, abs=1e-13)
    # S-frak reduction for Randers: (S + (n+1) rho_0)/(n+1) = (r00 - 2 alpha s0)/(2F)
    F = c.alpha + c.beta
    S = ab.randers_s_curvature(f, y)
    rho0 = float(f.rho_i @ y)
    assert (S + (n + 1) * rho0) / (n + 1) == pytest.approx((c.r00 - 2 * c.alpha * c.s0) / (2 * F), rel=1e-10, abs=1e-13)


def test_randers_spray_examples():
    m = CATALOG["randers-const"][1]()
    f = ab.frame_for(m, (0.1, 0.1))
    assert np.allclose(ab.randers_spray(f, np.array([0.3, 1.0])), 0.0)
    assert ab.randers_ricci(f, np.array([0.3, 1.0])) == 0.0
    assert ab.randers_s_curvature(f, np.array([0.3, 1.0])) == 0.0
    assert np.allclose(ab.randers_spray(ab.frame_for(Funk(2), (0.0, 0.0)), np.array([1.0, 0.0])), [0.5, 0.0])


def test_randers_funk_closed_forms():
    m = Funk(2)
    rng = np.random.default_rng(1)
    for _ in range(20):
        s = random_sample(m, rng)
        f, y = ab.frame_for(m, s.x), np.array(s.y)
        F = m.F(s.x, s.y)
        assert ab.randers_s_curvature(f, y) == pytest.approx(1.5 * F, rel=1e-8)
        assert ab.randers_wpric(f, y) == pytest.approx(f.contract(y).ric_bar, rel=1e-10)
        assert ab.randers_ricci(f, y) == pytest.approx(core.ricci(m, s), rel=1e-6)


def test_randers_closed_beta_reduction():
    """s = 0: Ric = Ric_bar + (n-1){3 r00^2 / (4F^2) - r00;0 / (2F)}."""
    m = CATALOG["randers-closed"][1]()
    rng = np.random.default_rng(2)
    for _ in range(10):
        s = random_sample(m, rng)
        f, y = ab.frame_for(m, s.x), np.array(s.y)
        c = f.contract(y)
        F = c.alpha + c.beta
        expected = c.ric_bar + (3 * c.r00**2 / (4 * F**2) - c.r00_0 / (2 * F))
        assert ab.randers_ricci(f, y) == pytest.approx(expected, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("family", ["randers", "kropina"])
@pytest.mark.parametrize("dim", [2, 3])
def test_oracle_equivalence(family, dim):
    checks = Checks()
    rng = np.random.default_rng([dim, 99])
    for k in range(5):
        m = random_metric(family, dim, [k, dim])
        for _ in range(4):
            compare_closed_forms(m, random_sample(m, rng), checks)
    failing = [(c.name, c.max_rel) for c in checks.items.values() if not c.passed]
    assert not failing


def test_kropina_constant_b_vanishes():
    m = CATALOG["kropina-const"][1]()
    f = ab.frame_for(m, (0.1, 0.0))
    y = np.array([1.0, 0.4])
    assert np.allclose(ab.kropina_spray(f, y), 0.0)
    for fn in (ab.kropina_s_curvature, ab.kropina_ricci, ab.kropina_s_horizontal, ab.kropina_wpric):
        assert fn(f, y) == 0.0


def test_kropina_conformal_s_vanishes():
    m = conformal_kropina(4, 3)
    rng = np.random.default_rng(3)
    for _ in range(10):
        s = random_sample(m, rng)
        f = ab.frame_for(m, s.x)
        assert abs(ab.kropina_s_curvature(f, np.array(s.y))) <= 1e-10 * m.F(s.x, s.y)


def test_kropina_conformal_relations():
    """Conformal beta: q00 = 0 and q0 = sigma s0 where r_ij = sigma a_ij."""
    m = conformal_kropina(5, 3)
    f = ab.frame_for(m, (0.1, -0.2, 0.15))
    for y in ab.direction_grid(3, 10):
        c = f.contract(y)
        assert c.q00 == pytest.approx(0.0, abs=1e-12)
        assert c.q0 == pytest.approx(f.sigma_conf * c.s0, abs=1e-12)


def test_printed_kropina_horizontal_formula_is_flagged():
    """The formula as printed disagrees with the generic pipeline; the corrected one agrees."""
    m = random_metric("kropina", 2, 3)
    s = random_sample(m, np.random.default_rng(4))
    f, y = ab.frame_for(m, s.x), np.array(s.y)
    generic = core.sfrak_horizontal(m, ClosedFormKropina(), ALPHA, s)
    assert ab.kropina_s_horizontal(f, y) == pytest.approx(generic, rel=1e-8)
    assert ab.kropina_s_horizontal(f, y, printed=True) != pytest.approx(generic, rel=1e-3)


def test_transcribed_kropina_wpric_is_only_a_cross_check():
    m = random_metric("kropina", 2, 5)
    s = random_sample(m, np.random.default_rng(6))
    f, y = ab.frame_for(m, s.x), np.array(s.y)
    generic = core.weighted_projective_ricci(m, ClosedFormKropina(), ALPHA, s)
    assert ab.kropina_wpric(f, y) == pytest.approx(generic, rel=1e-8)
    assert abs(ab.kropina_wpric_transcribed(f, y) - generic) > 1e-6 * abs(generic)


def test_randers_flat_checker():
    pos = ab.check_randers_wpric_flat(CATALOG["randers-const"][1]())
    assert pos.verdict
    neg = ab.check_randers_wpric_flat(Funk(2))
    assert not neg.verdict
    # Funk: t = 0 so condition (i) reduces to Ric_bar itself
    assert neg.check("ric_bar = t^m_m alpha^2 + 2 t00").max_rel == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(3))
def test_randers_checker_soundness(seed):
    m = random_metric("randers", 2, seed)
    rep = ab.check_randers_wpric_flat(m, points=3, directions=6)
    pts = ab.point_grid(m, 3, 0)
    worst = max(abs(core.weighted_projective_ricci(m, ClosedFormRanders(), ALPHA, (x, tuple(y))))
                for x in pts for y in ab.direction_grid(2, 6))
    assert rep.verdict == (worst <= 1e-9)


def test_reversible_checker():
    assert ab.check_reversible_wpric(CATALOG["randers-closed"][1](), points=3, directions=6).verdict
    rot = ab.check_reversible_wpric(CATALOG["randers-rot"][1](), points=3, directions=6)
    assert rot.verdict and rot.extra["agree"]
    for seed in range(3):
        rep = ab.check_reversible_wpric(random_metric("randers", 2, seed), points=3, directions=6)
        assert rep.extra["agree"]


def test_kropina_flat_checker_positive():
    rep, flat, worst = kropina_flat_agreement(CATALOG["kropina-const"][1](), seed=0)
    assert rep.verdict and flat and worst == 0.0


@pytest.mark.parametrize("seed,dim,killing", [(0, 2, True), (1, 3, True), (2, 2, False), (3, 3, False)])
def test_kropina_flat_checker_matches_generic(seed, dim, killing):
    m = conformal_kropina(seed, dim, phi_scale=0.0 if killing else 0.2, killing=killing)
    rep, flat, _ = kropina_flat_agreement(m, seed=seed)
    assert rep.applicable
    assert rep.verdict == flat


def test_kropina_flat_checker_gate():
    m = Kropina(Funk(2).alpha, OneFormSpec.from_components(["1", "0.2"]))
    rep, flat, _ = kropina_flat_agreement(m, seed=0)
    assert not rep.applicable and not rep.verdict and not flat


def test_isotropic_s_equivalences():
    assert ab.check_isotropic_s_equivalences(conformal_kropina(7, 2), points=3).verdict
    rep = ab.check_isotropic_s_equivalences(random_metric("kropina", 2, 7), points=3)
    assert not any(rep.extra["flags"]) and rep.extra["consistent"]
    assert ab.check_isotropic_s_equivalences(CATALOG["kropina-const"][1](), points=3).verdict


def test_projectively_flat_ricci():
    assert ab.projectively_flat_ricci(ab.ProjectiveData(P=0.0, P0=0.0), 3) == 0.0
    rng = np.random.default_rng(8)
    for m in (Funk(2), Funk(3), CATALOG["klein2"][1]()):
        for _ in range(5):
            s = random_sample(m, rng)
            pd = ab.projective_factor(m, s)
            assert ab.projectively_flat_ricci(pd, m.dim) == pytest.approx(core.ricci(m, s), rel=1e-6)
            if isinstance(m, Funk):
                assert pd.P == pytest.approx(m.F(s.x, s.y) / 2, rel=1e-12)


def test_projective_factor_rejects_non_flat_chart():
    m = Riemannian(RiemannianSpec.from_entries(2, {(0, 0): "exp(2*x1)", (1, 1): "1"}))
    with pytest.raises(NotProjectivelyFlat):
        ab.projective_factor(m, ((0.1, 0.2), (0.3, 1.0)))


def test_reconstruction_examples():
    r = ab.reconstruct_metric_from_projective_data(ab.ProjectiveData(P=0.0, P0=-1.0, sigma_iso=1.0))
    assert r.case == "randers" and r.F == pytest.approx(1.0)
    r = ab.reconstruct_metric_from_projective_data(ab.ProjectiveData(P=0.0, P0=4.0, c=1.0, c0=0.0, sigma_iso=1.0, eta=1.0))
    assert r.case == "kropina" and r.F == pytest.approx(1.5)


def test_reconstruction_errors():
    with pytest.raises(FinslerError):
        ab.reconstruct_metric_from_projective_data(ab.ProjectiveData(P=0.0, P0=1.0, sigma_iso=0.0))
    with pytest.raises(FinslerError):  # negative discriminant
        ab.reconstruct_metric_from_projective_data(ab.ProjectiveData(P=0.0, P0=1.0, sigma_iso=1.0))


@given(st.integers(0, 2**32 - 1), st.booleans())
def test_reconstruction_satisfies_quadratic(seed, kropina):
    pd = random_projective_data(np.random.default_rng(seed), kropina)
    try:
        r = ab.reconstruct_metric_from_projective_data(pd)
    except FinslerError:
        return
    A, B, C = ab.quadratic_coefficients(pd)
    assert abs(A * r.F**2 - B * r.F + C) <= 1e-10 * max(1.0, abs(C), abs(B * r.F))
    assert r.case == ("kropina" if kropina else "randers")
