import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from finsler_wpric import alphabeta as ab
from finsler_wpric import harness
from finsler_wpric.errors import SamplerExhausted
from finsler_wpric.harness import Check, Checks, random_metric, random_sample, run_scenario
from finsler_wpric.metrics import CATALOG, Funk


def test_check_pass_rule():
    c = Check("x", tol=1e-6, floor=1e-9)
    c.add(5e-10, 1e-6)
    c.add(1e-7, 1.0)
    assert c.passed and c.count == 2
    c.add(2e-6, 1.0)
    assert not c.passed and c.failures == 1
    assert c.max_abs == pytest.approx(2e-6) and c.max_rel == pytest.approx(5e-4)


def test_check_nan_fails():
    c = Check("x")
    c.add(float("nan"), 1.0)
    assert not c.passed


def test_checks_tol_override():
    checks = Checks(tol_override=0.5)
    assert checks("a", tol=1e-12).tol == 0.5
    assert checks("a") is checks("a")


def test_scenario_rng_depends_on_name_and_seed():
    a = harness.scenario_rng("x", 0).random()
    assert a == harness.scenario_rng("x", 0).random()
    assert a != harness.scenario_rng("y", 0).random()
    assert a != harness.scenario_rng("x", 1).random()


@given(st.integers(0, 10**6), st.sampled_from(["randers", "kropina"]), st.integers(2, 3))
def test_random_metric_deterministic(seed, family, dim):
    m1, m2 = random_metric(family, dim, seed), random_metric(family, dim, seed)
    x = tuple([0.1] * dim)
    assert np.array_equal(m1.alpha.matrix(x), m2.alpha.matrix(x))
    assert np.array_equal(m1.beta_form.vector(x), m2.beta_form.vector(x))


@pytest.mark.parametrize("seed", range(50))
def test_random_randers_admissible(seed):
    m = random_metric("randers", 2 + seed % 2, seed)
    rng = np.random.default_rng(seed)
    for _ in range(5):
        x = rng.uniform(-m.box, m.box, m.dim)
        a = np.array(m.alpha.matrix(x))
        b = np.array(m.beta_form.vector(x))
        assert np.all(np.linalg.eigvalsh(a) > 0)
        assert b @ np.linalg.solve(a, b) <= 0.5 + 1e-12


def test_random_kropina_samples_in_cone():
    m = random_metric("kropina", 3, 4)
    rng = np.random.default_rng(0)
    for _ in range(50):
        s = random_sample(m, rng)
        assert harness.cone_cosine(m, s.x, s.y) >= harness.CONE_MARGIN


def test_funk_samples_in_ball():
    rng = np.random.default_rng(0)
    for _ in range(50):
        s = random_sample(Funk(3), rng, radius=0.9)
        assert np.linalg.norm(s.x) < 0.9


def test_sampler_exhausted():
    m = CATALOG["kropina-const"][1]()
    with pytest.raises(SamplerExhausted):
        random_sample(m, np.random.default_rng(0), cone_margin=1.01)


def test_run_scenario_deterministic():
    r1 = run_scenario("reconstruct-quadratic", seed=3, samples=20)
    r2 = run_scenario("reconstruct-quadratic", seed=3, samples=20)
    assert r1.to_dict(timing=False) == r2.to_dict(timing=False)
    assert harness.reports_json([r1], timing=False) == harness.reports_json([r2], timing=False)


def test_report_schema():
    rep = run_scenario("funk-s-curvature", seed=0, samples=3)
    d = json.loads(harness.reports_json([rep]))
    assert d["schema"] == harness.SCHEMA
    (r,) = d["reports"]
    assert set(r) >= {"scenario", "seed", "generator", "samples", "checks", "pass", "elapsed_ms"}
    assert r["pass"] is True and r["samples"] == 3
    for c in r["checks"]:
        assert set(c) >= {"name", "max_abs", "max_rel", "tol", "pass"}


def test_unknown_scenario_and_suite():
    with pytest.raises(KeyError):
        run_scenario("nope")
    with pytest.raises(KeyError):
        harness.resolve_suite("nope")
    assert harness.resolve_suite("funk-inequality") == ["funk-inequality"]


def test_suites_reference_real_scenarios():
    for names in harness.SUITES.values():
        assert set(names) <= set(harness.SCENARIOS)
    assert harness.SUITES["all"] == list(harness.SCENARIOS)


def test_tol_override_reaches_every_check():
    rep = run_scenario("funk-s-curvature", seed=0, samples=3, tol=1e-3)
    assert {c.tol for c in rep.checks} == {1e-3}


@pytest.mark.parametrize("name", [n for n, s in harness.SCENARIOS.items() if s.default_samples <= 50
                                  and n not in ("randers-oracle", "kropina-oracle")])
def test_scenarios_pass_small(name):
    rep = run_scenario(name, seed=2, samples=min(harness.SCENARIOS[name].default_samples, 6))
    assert rep.passed, rep.summary()


def test_compare_closed_forms_flags_a_perturbed_metric():
    """Closed forms of one metric against the generic pipeline of a nearby one must disagree."""
    m = CATALOG["randers-closed"][1]()
    other = random_metric("randers", 2, 11)
    s = random_sample(m, np.random.default_rng(1))
    checks = Checks()
    harness.compare_closed_forms(m, s, checks)
    assert all(c.passed for c in checks.items.values())
    mixed = Checks()
    frame = ab.frame_for(other, s.x)
    ric = harness.core.ricci(m, s)
    mixed("ricci").add(ric - ab.randers_ricci(frame, np.array(s.y)), abs(ric))
    assert not mixed("ricci").passed
