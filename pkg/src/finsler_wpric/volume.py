"""Volume densities sigma(x) as jets in the chart coordinates.

The Busemann-Hausdorff density is omega_n / Vol{F(x, .) < 1} with
Vol{F < 1} = (1/n) * integral over the unit sphere of F(x, theta)^(-n).
The integrand is evaluated on x-jets, so the quadrature result carries the
x-derivatives needed by the S-curvature.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import ConstructionError, DomainError, QuadratureError
from .expr import eval_expr, xy_binding
from .jets import MultiJet, SeedPoint, as_jet, jet_det, jet_inv, jet_pow, jet_sqrt, lift_all
from .metrics import (
    BusemannHausdorff,
    ClosedFormKropina,
    ClosedFormRanders,
    ConstantDensity,
    DensityOf,
    Metric,
    RiemannianDensity,
    RiemannianSpec,
    VolumeSpec,
)

QUAD_RTOL = 1e-9
_MAX_DOUBLINGS = 6


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def _sphere_nodes(n: int, level: int, pole: np.ndarray | None):
    """Directions and weights on S^{n-1}; restricted to the hemisphere around ``pole`` if given."""
    if n == 2:
        if pole is None:
            m = 512 * 2**level
            phi = 2 * np.pi * np.arange(m) / m
            w = np.full(m, 2 * np.pi / m)
        else:
            t, wt = np.polynomial.legendre.leggauss(64 * 2**level)
            psi = math.atan2(pole[1], pole[0])
            phi = psi + 0.5 * np.pi * t
            w = 0.5 * np.pi * wt
        return np.stack([np.cos(phi), np.sin(phi)], axis=-1), w
    if n == 3:
        m = 64 * 2**level
        t, wt = np.polynomial.legendre.leggauss(m)
        if pole is not None:
            t, wt = 0.5 * (t + 1), 0.5 * wt
        lam = 2 * np.pi * np.arange(2 * m) / (2 * m)
        s = np.sqrt(1 - t**2)
        dirs = np.stack(
            [
                s[:, None] * np.cos(lam)[None, :],
                s[:, None] * np.sin(lam)[None, :],
                np.broadcast_to(t[:, None], (m, 2 * m)),
            ],
            axis=-1,
        ).reshape(-1, 3)
        w = (wt[:, None] * np.full(2 * m, 2 * np.pi / (2 * m))[None, :]).ravel()
        if pole is not None:
            p = pole / np.linalg.norm(pole)
            helper = np.eye(3)[int(np.argmin(np.abs(p)))]
            e1 = np.cross(p, helper)
            e1 /= np.linalg.norm(e1)
            e2 = np.cross(p, e1)
            dirs = dirs @ np.stack([e1, e2, p])
        return dirs, w
    raise ValueError(f"quadrature volume supports n in (2, 3), got n = {n}")


def _volume_integral(metric: Metric, x: tuple[float, ...], order: int, level: int, pole) -> MultiJet:
    n = metric.dim
    xs = lift_all(SeedPoint(x), order)
    dirs, w = _sphere_nodes(n, level, pole)
    binding = xy_binding(xs, [dirs[:, k] for k in range(n)])
    F = as_jet(eval_expr(metric.F_expr, binding), xs[0])
    if np.any(~(F.coeffs[..., 0] > 0)):
        raise DomainError("F is not positive on the unit sphere at this point")
    return jet_pow(F, -n).weighted_sum(w) * (1.0 / n)


@lru_cache(maxsize=256)
def _bh_quadrature(metric: Metric, x: tuple[float, ...], order: int, rtol: float) -> MultiJet:
    metric.check_point(x)
    cone = metric.cone_vector(x)
    prev = _volume_integral(metric, x, order, 0, cone)
    for level in range(1, _MAX_DOUBLINGS + 1):
        cur = _volume_integral(metric, x, order, level, cone)
        scale = np.max(np.abs(cur.coeffs))
        if np.max(np.abs(cur.coeffs - prev.coeffs)) <= rtol * scale:
            return unit_ball_volume(metric.dim) / cur
        prev = cur
    raise QuadratureError(f"Busemann-Hausdorff quadrature did not converge to {rtol:g} at x = {list(x)}")


def bh_quadrature_jet(metric: Metric, x, order: int = 2, rtol: float = QUAD_RTOL) -> MultiJet:
    """Busemann-Hausdorff density as an x-jet, by refinement until successive values agree."""
    return _bh_quadrature(metric, tuple(float(v) for v in x), order, rtol)


def _matrix_jet(alpha: RiemannianSpec, xs: list[MultiJet]) -> MultiJet:
    rows = alpha.matrix(None, binding=xy_binding(xs))
    return MultiJet.stack([MultiJet.stack([as_jet(v, xs[0]) for v in row]) for row in rows])


def _b_squared_jet(metric: Metric, xs: list[MultiJet]) -> MultiJet:
    a = _matrix_jet(metric.alpha, xs)
    b = MultiJet.stack([as_jet(v, xs[0]) for v in metric.beta_form.vector(None, binding=xy_binding(xs))])
    ainv = jet_inv(a)
    return (ainv * b[:, None] * b[None, :]).sum()


def _riemannian_density(alpha: RiemannianSpec, xs: list[MultiJet]) -> MultiJet:
    det = jet_det(_matrix_jet(alpha, xs))
    if not det.value > 0:
        raise DomainError("det a <= 0")
    return jet_sqrt(det)


def density_jet(metric: Metric, vol: VolumeSpec, x, order: int = 2) -> MultiJet:
    """sigma(x) as a jet over the n chart variables."""
    x = tuple(float(v) for v in x)
    if isinstance(vol, BusemannHausdorff):
        sigma = bh_quadrature_jet(metric, x, order)
    elif isinstance(vol, DensityOf):
        if vol.metric.dim != len(x):
            raise ConstructionError(f"reference metric has dimension {vol.metric.dim}, expected {len(x)}")
        sigma = density_jet(vol.metric, vol.volume, x, order)
    else:
        metric.check_point(x)
        xs = lift_all(SeedPoint(x), order)
        if isinstance(vol, ConstantDensity):
            sigma = MultiJet.constant(vol.value, len(x), order)
        elif isinstance(vol, RiemannianDensity):
            alpha = vol.alpha if vol.alpha is not None else metric.alpha
            if alpha is None:
                raise ConstructionError(f"{metric.name} has no Riemannian part for a RiemannianDensity")
            sigma = _riemannian_density(alpha, xs)
        elif isinstance(vol, ClosedFormRanders):
            if metric.family != "randers":
                raise ConstructionError(f"closed-form Randers density requested for {metric.name}")
            b2 = _b_squared_jet(metric, xs)
            sigma = jet_pow(1.0 - b2, (len(x) + 1) / 2) * _riemannian_density(metric.alpha, xs)
        elif isinstance(vol, ClosedFormKropina):
            if metric.family != "kropina":
                raise ConstructionError(f"closed-form Kropina density requested for {metric.name}")
            b2 = _b_squared_jet(metric, xs)
            sigma = 2.0 ** len(x) * jet_pow(b2, -len(x) / 2) * _riemannian_density(metric.alpha, xs)
        else:
            raise TypeError(f"unknown volume spec {vol!r}")
    if not sigma.value > 0:
        raise DomainError(f"density is not positive at x = {list(x)}")
    return sigma


def bh_volume_density(metric: Metric, x, method: str = "quadrature") -> float:
    """Busemann-Hausdorff density value by quadrature or by the family's closed form."""
    from .metrics import closed_form_volume

    if method == "quadrature":
        return density_jet(metric, BusemannHausdorff(), x, order=0).value
    if method == "closed-form":
        return density_jet(metric, closed_form_volume(metric), x, order=0).value
    raise ValueError(f"unknown method {method!r}")
