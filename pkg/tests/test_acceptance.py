"""Acceptance criteria 1-10, one PASS/FAIL line each (printed in the terminal summary)."""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from finsler_wpric import alphabeta as ab
from finsler_wpric import core
from finsler_wpric.harness import Checks, _oracle, run_scenario, random_sample
from finsler_wpric.metrics import BusemannHausdorff, Funk, RiemannianDensity


def record(number: int, title: str, ok: bool, detail: str, elapsed: float, limit: float | None = None) -> None:
    if limit is not None and elapsed > limit:
        ok = False
        detail += f"; runtime {elapsed:.1f} s exceeds {limit:.0f} s"
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({detail}; {elapsed:.2f} s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def worst(checks) -> str:
    return ", ".join(f"{c.name} rel {c.max_rel:.1e}" for c in checks)


@pytest.fixture(scope="module")
def funk_samples():
    m = Funk(2)
    rng = np.random.default_rng(20240601)
    return m, [random_sample(m, rng, radius=1.0) for _ in range(100)]


def test_criterion_1_funk_s_curvature(funk_samples):
    m, samples = funk_samples
    t0 = time.perf_counter()
    rel = max(abs(core.s_curvature(m, BusemannHausdorff(), s) - 1.5 * m.F(s.x, s.y)) / m.F(s.x, s.y)
              for s in samples)
    record(1, "Funk S = 3F/2, n=2, quadrature volume", rel <= 1e-6, f"max rel {rel:.1e}",
           time.perf_counter() - t0, 10)


def test_criterion_2_funk_weighted_inequality(funk_samples):
    m, samples = funk_samples
    t0 = time.perf_counter()
    rel, top = 0.0, -np.inf
    for s in samples:
        b = core.curvature_bundle(m, BusemannHausdorff(), RiemannianDensity(), s)
        c = ab.frame_for(m, s.x).contract(s.y)
        d = b.WPRic0 - b.Ric
        rel = max(rel, abs(d - (c.beta - c.alpha) * (3 * c.alpha + c.beta) / 4) / b.F**2)
        top = max(top, d)
    record(2, "Funk WPRic0 - Ric = (beta-alpha)(3alpha+beta)/4 <= 0", rel <= 1e-6 and top <= 1e-9,
           f"max rel {rel:.1e}, max WPRic0 - Ric {top:.1e}", time.perf_counter() - t0, 10)


def _oracle_criterion(number, family):
    checks = Checks()
    t0 = time.perf_counter()
    # 100 metrics alternating n=2 and n=3 (50 each), 20 samples per metric
    _oracle(family, per_metric=20)(np.random.default_rng([number, 7]), 2000, checks)
    items = list(checks.items.values())
    record(number, f"{family} generic pipeline vs closed forms", all(c.passed for c in items), worst(items),
           time.perf_counter() - t0, 60)


def test_criterion_3_randers_oracle():
    _oracle_criterion(3, "randers")


def test_criterion_4_kropina_oracle():
    _oracle_criterion(4, "kropina")


def _scenario_criterion(number, title, names, samples=None, limit=None):
    t0 = time.perf_counter()
    reps = [run_scenario(n, seed=1, samples=(samples or {}).get(n)) for n in names]
    ok = all(r.passed for r in reps)
    detail = "; ".join(worst(r.checks) + (f" error {r.error}" if r.error else "") for r in reps)
    record(number, title, ok, detail, time.perf_counter() - t0, limit)


def test_criterion_5_volume_closed_forms():
    _scenario_criterion(5, "Randers and Kropina density ratios vs quadrature", ["volume-closed-vs-quadrature"])


def test_criterion_6_randers_checker():
    _scenario_criterion(6, "Randers flatness checker", ["randers-flat-positive", "randers-flat-negative"])


def test_criterion_7_kropina_checker():
    _scenario_criterion(7, "Kropina flatness checker", ["kropina-flat-positive", "kropina-flat-negative"],
                        samples={"kropina-flat-negative": 20})


def test_criterion_8_example_regressions():
    _scenario_criterion(8, "quartic, Bao-Shen and isotropic-S Randers examples",
                        ["quartic-flat", "baoshen-s-zero", "cs-randers-formulas"])


def test_criterion_9_projectively_flat():
    t0 = time.perf_counter()
    m = Funk(2)
    rng = np.random.default_rng(9)
    rel = 0.0
    for _ in range(50):
        s = random_sample(m, rng)
        ric = core.ricci(m, s)
        pf = ab.projectively_flat_ricci(ab.projective_factor(m, s), m.dim)
        rel = max(rel, abs(ric - pf) / max(abs(ric), abs(pf)))
    rep = run_scenario("reconstruct-quadratic", seed=1, samples=200)
    ok = rel <= 1e-6 and rep.passed
    record(9, "Funk Ric = (n-1)(P^2 - P0) and quadratic reconstruction", ok,
           f"max rel {rel:.1e}; {worst(rep.checks)}", time.perf_counter() - t0)


def test_criterion_10_jet_audit():
    _scenario_criterion(10, "jet derivatives vs finite differences, homogeneity ladder",
                        ["jet-fd-audit", "homogeneity-ladder"])


def test_trivial_direction_shadow():
    """Sfrak = 0 forces WPRic0 = Ric (within 1e-10)."""
    rep = run_scenario("riemannian-s-zero", seed=1)
    assert rep.passed, rep.summary()
