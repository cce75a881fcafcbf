import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from finsler_wpric.errors import SingularEvaluation
from finsler_wpric.jets import (
    MultiJet,
    SeedPoint,
    extract_derivative,
    finite_difference_audit,
    jet_arithmetic,
    jet_det,
    jet_function,
    jet_inv,
    lift_all,
    lift_variable,
)

finite = st.floats(-2, 2, allow_nan=False)


def test_lift_variable_value_and_direction():
    j = lift_variable(SeedPoint((3.0, 2.0)), 0)
    assert j.value == 3.0
    assert j.coefficient((1, 0)) == 1.0
    assert j.coefficient((0, 1)) == 0.0
    assert np.count_nonzero(j.coeffs) == 2


def test_square_of_zero_variable():
    (t,) = lift_all(SeedPoint((0.0,)))
    sq = t * t
    assert sq.value == 0.0
    assert sq.coefficient((2,)) == 1.0


def test_mixed_product_rule():
    a, b = lift_all(SeedPoint((1.0, 2.0)))
    assert (a * b).derivative((1, 1)) == 1.0


def test_inactive_variable_is_constant():
    a, b = lift_all(SeedPoint((1.0, 2.0), active={0}))
    assert b.coefficient((0, 1)) == 0.0 and a.coefficient((1, 0)) == 1.0


def test_lift_out_of_range():
    with pytest.raises(IndexError):
        lift_variable(SeedPoint((1.0,)), 1)


def test_polynomial_identity():
    (t,) = lift_all(SeedPoint((0.0,)))
    p = (1 + t) * (1 - t)
    assert p.value == 1 and p.coefficient((1,)) == 0 and p.coefficient((2,)) == -1


def test_division_by_self_and_by_zero():
    (t,) = lift_all(SeedPoint((0.7,)))
    q = jet_arithmetic(jet_function(t, "exp") + t, jet_function(t, "exp") + t, "div")
    assert q.value == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(q.coeffs[1:], 0.0, atol=1e-14)
    (z,) = lift_all(SeedPoint((0.0,)))
    with pytest.raises(SingularEvaluation):
        jet_arithmetic(t, z, "div")


def test_sqrt_taylor_coefficients():
    (t,) = lift_all(SeedPoint((0.0,)))
    s = jet_function(1 + t, "sqrt")
    assert np.allclose(s.coeffs, [1, 1 / 2, -1 / 8, 1 / 16, -5 / 128], rtol=0, atol=1e-15)


def test_constant_sqrt_and_log_exp_inverse():
    assert jet_function(MultiJet.constant(4.0, 1), "sqrt").value == 2.0
    (t,) = lift_all(SeedPoint((0.3,)))
    back = jet_function(jet_function(t, "exp"), "ln")
    assert np.allclose(back.coeffs, t.coeffs, atol=1e-15)


@pytest.mark.parametrize("name,value", [("sqrt", -1.0), ("ln", 0.0), ("ln", -2.0)])
def test_domain_errors_carry_value(name, value):
    (t,) = lift_all(SeedPoint((value,)))
    with pytest.raises(SingularEvaluation) as info:
        jet_function(t, name)
    assert info.value.value == value


def test_extract_derivative_examples():
    (v,) = lift_all(SeedPoint((3.0,)))
    assert extract_derivative(v * v, (2,)) == 2.0
    a, b = lift_all(SeedPoint((0.4, -1.2)))
    assert extract_derivative(a * b * b, (1, 2)) == pytest.approx(2.0)
    (z,) = lift_all(SeedPoint((0.0,)))
    assert extract_derivative(jet_function(z, "exp"), (4,)) == pytest.approx(1.0)


def _random_poly(rng, nvars, degree=2):
    """Dense polynomial as {multi-index: coefficient} with small rational coefficients."""
    out = {}
    for idx in itertools.product(range(degree + 1), repeat=nvars):
        if sum(idx) <= degree:
            out[idx] = rng.integers(-8, 9) / 4
    return out


def _poly_jet(poly, point):
    vs = lift_all(SeedPoint(point))
    total = MultiJet.constant(0.0, len(point))
    for idx, c in poly.items():
        term = MultiJet.constant(c, len(point))
        for v, p in zip(vs, idx):
            for _ in range(p):
                term = term * v
        total = total + term
    return total


def _shift_coefficients(poly, point, order=4):
    """Taylor coefficients about ``point`` by exact binomial expansion."""
    out = {}
    for idx, c in poly.items():
        for sub in itertools.product(*(range(p + 1) for p in idx)):
            if sum(sub) > order:
                continue
            w = c
            for p, k, x0 in zip(idx, sub, point):
                w *= math.comb(p, k) * x0 ** (p - k)
            out[sub] = out.get(sub, 0.0) + w
    return out


@given(st.integers(0, 10_000), st.lists(st.integers(-4, 4), min_size=2, max_size=2))
def test_product_matches_symbolic_expansion(seed, ipoint):
    rng = np.random.default_rng(seed)
    p, q = _random_poly(rng, 2), _random_poly(rng, 2)
    point = tuple(v / 4 for v in ipoint)
    prod = {}
    for (i1, c1), (i2, c2) in itertools.product(p.items(), q.items()):
        k = tuple(a + b for a, b in zip(i1, i2))
        prod[k] = prod.get(k, 0.0) + c1 * c2
    jet = _poly_jet(p, point) * _poly_jet(q, point)
    expected = _shift_coefficients(prod, point)
    for idx, c in expected.items():
        got = jet.coefficient(idx)
        assert abs(got - c) <= 8 * np.spacing(max(1.0, abs(c))) * 16


@given(st.integers(0, 10_000), finite, finite)
def test_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    point = tuple(rng.uniform(-1, 1, 2))
    p, q = _poly_jet(_random_poly(rng, 2), point), _poly_jet(_random_poly(rng, 2), point)
    lhs = a * p + b * q
    rhs = p * a + q * b
    assert np.allclose(lhs.coeffs, rhs.coeffs, rtol=1e-15, atol=1e-15)


FUNCS = {
    "exp": (np.exp, lambda v: True),
    "ln": (np.log, lambda v: v > 0),
    "sqrt": (np.sqrt, lambda v: v > 0),
    "sin": (np.sin, lambda v: True),
    "cos": (np.cos, lambda v: True),
}


@given(st.sampled_from(sorted(FUNCS)), st.sampled_from(sorted(FUNCS)), st.floats(0.1, 1.5))
def test_chain_rule_first_and_second_derivatives(f, g, t0):
    """d/dt f(g(t)) and d2/dt2 against the analytic chain rule."""
    inner = jet_function(lift_all(SeedPoint((t0,)))[0], g)
    if not FUNCS[f][1](inner.value):
        return
    comp = jet_function(inner, f)

    def fg(t):
        return FUNCS[f][0](FUNCS[g][0](t))

    d1 = finite_difference_audit(lambda v: fg(v[0]), (t0,), (1,))
    assert comp.derivative((1,)) == pytest.approx(d1, rel=1e-7, abs=1e-9)
    # second derivative via the composed jets themselves: f''(g) g'^2 + f'(g) g''
    fj = jet_function(lift_all(SeedPoint((inner.value,)))[0], f)
    gd = inner.coeffs
    expected = 2 * fj.coeffs[2] * gd[1] ** 2 + fj.coeffs[1] * 2 * gd[2]
    assert comp.derivative((2,)) == pytest.approx(expected, rel=1e-12, abs=1e-13)


def test_fd_audit_examples():
    assert finite_difference_audit(lambda v: v[0] ** 2, (3.0,), (2,)) == pytest.approx(2.0, abs=1e-6)
    assert finite_difference_audit(lambda v: math.sin(v[0]), (0.0,), (1,)) == pytest.approx(1.0, abs=1e-8)


def test_fd_audit_rejects_third_order():
    with pytest.raises(ValueError):
        finite_difference_audit(lambda v: v[0] ** 3, (1.0,), (3,))


def test_matrix_inverse_and_determinant_jets():
    x, y = lift_all(SeedPoint((0.3, -0.2)))
    a = MultiJet.stack([MultiJet.stack([2 + x * x, x * y]), MultiJet.stack([x * y, 1 + jet_function(y, "exp")])])
    inv = jet_inv(a)
    eye = (inv[:, :, None] * a[None, :, :]).sum(axis=1)
    assert np.allclose(eye.coeffs[..., 0], np.eye(2), atol=1e-14)
    assert np.allclose(eye.coeffs[..., 1:], 0.0, atol=1e-13)
    det = jet_det(a)
    direct = (2 + x * x) * (1 + jet_function(y, "exp")) - x * y * x * y
    assert np.allclose(det.coeffs, direct.coeffs, atol=1e-14)
