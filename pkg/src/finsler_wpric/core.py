"""Generic curvature pipeline: every invariant is obtained from jets of F alone.

Jet variables are ordered (x^1..x^n, y^1..y^n).  F is expanded to order 4;
the fundamental tensor and the spray then carry order-2 information, which
is exactly what the Riemann curvature and the horizontal derivative of S need.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from .errors import DegenerateMetric, DomainError
from .expr import Expr, eval_expr, xy_binding
from .jets import MultiJet, SeedPoint, as_jet, basis, jet_inv, jet_log, jet_matvec, lift_all
from .metrics import Metric, OneFormSpec, VolumeSpec
from .volume import density_jet

COND_LIMIT = 1e12


@dataclass(frozen=True)
class TangentSample:
    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if len(self.x) != len(self.y):
            raise DomainError(f"x has {len(self.x)} coordinates but y has {len(self.y)}")

    @property
    def dim(self) -> int:
        return len(self.x)

    def scaled(self, lam: float) -> "TangentSample":
        return TangentSample(self.x, tuple(lam * v for v in self.y))


Sample = Union[TangentSample, tuple]


def as_sample(s: Sample) -> TangentSample:
    return s if isinstance(s, TangentSample) else TangentSample(*s)


@dataclass(frozen=True)
class SprayState:
    """Per-sample data shared by every invariant."""

    n: int
    F: float
    g: np.ndarray
    g_inv: np.ndarray
    G_jet: MultiJet  # order 2, shape (n,)
    G: np.ndarray
    N: np.ndarray
    R: np.ndarray
    trN: MultiJet  # order 1: sum_m dG^m/dy^m

    @property
    def Ric(self) -> float:
        return float(np.trace(self.R))


def _tangent_jets(sample: TangentSample, order: int) -> list[MultiJet]:
    return lift_all(SeedPoint(sample.x + sample.y), order)


def _F_jet(metric: Metric, sample: TangentSample, order: int) -> MultiJet:
    metric.check_sample(sample.x, sample.y)
    n = sample.dim
    v = _tangent_jets(sample, order)
    return as_jet(eval_expr(metric.F_expr, xy_binding(v[:n], v[n:])), v[0])


def _check_g(g: np.ndarray) -> None:
    lam = np.linalg.eigvalsh(g)
    if not lam[0] > 0:
        raise DegenerateMetric(f"fundamental tensor is not positive definite (smallest eigenvalue {lam[0]:.3g})",
                               float(lam[0]))
    if lam[-1] / lam[0] > COND_LIMIT:
        raise DegenerateMetric(f"fundamental tensor condition number {lam[-1] / lam[0]:.3g} exceeds {COND_LIMIT:g}",
                               float(lam[0]))


@lru_cache(maxsize=4096)
def _spray_state(metric: Metric, sample: TangentSample) -> SprayState:
    n = sample.dim
    F = _F_jet(metric, sample, 4)
    F2 = F * F
    dF2 = [F2.deriv(n + l) for l in range(n)]
    g = MultiJet.stack([MultiJet.stack([0.5 * dF2[i].deriv(n + j) for j in range(n)]) for i in range(n)])
    _check_g(g.value)
    g_inv = jet_inv(g)

    y = _tangent_jets(sample, 2)[n:]
    bracket = []
    for l in range(n):
        mixed = sum((dF2[l].deriv(k) * y[k] for k in range(1, n)), dF2[l].deriv(0) * y[0])
        bracket.append(mixed - F2.deriv(l).truncate(2))
    G = 0.25 * jet_matvec(g_inv, MultiJet.stack(bracket))

    yv = np.array(sample.y)
    grad = G.gradient()
    hess = G.hessian()
    G0 = G.value
    dGdx, dGdy = grad[:, :n], grad[:, n:]
    R = (
        2 * dGdx
        - np.einsum("ijk,j->ik", hess[:, :n, n:], yv)
        + 2 * np.einsum("j,ijk->ik", G0, hess[:, n:, n:])
        - dGdy @ dGdy
    )
    trN = sum((G[m].deriv(n + m) for m in range(1, n)), G[0].deriv(n))
    return SprayState(n, F.value, g.value, g_inv.value, G, G0, dGdy, R, trN)


def spray_state(metric: Metric, sample: Sample) -> SprayState:
    return _spray_state(metric, as_sample(sample))


# -- elementary invariants --------------------------------------------------------


def fundamental_tensor(metric: Metric, sample: Sample) -> np.ndarray:
    """g_ij = 1/2 d^2 F^2 / dy^i dy^j."""
    sample = as_sample(sample)
    n = sample.dim
    F = _F_jet(metric, sample, 2)
    return (F * F).hessian()[n:, n:] * 0.5


def spray(metric: Metric, sample: Sample) -> np.ndarray:
    return spray_state(metric, sample).G.copy()


def riemann_curvature(metric: Metric, sample: Sample) -> np.ndarray:
    return spray_state(metric, sample).R.copy()


def ricci(metric: Metric, sample: Sample) -> float:
    return spray_state(metric, sample).Ric


# -- volume-dependent invariants ------------------------------------------------------


@lru_cache(maxsize=1024)
def _log_density(metric: Metric, vol: VolumeSpec, x: tuple[float, ...]) -> MultiJet:
    n = len(x)
    return jet_log(density_jet(metric, vol, x, order=2)).embed(basis(2 * n, 2), range(n))


def _directional_log_density(metric: Metric, vol: VolumeSpec, sample: TangentSample) -> MultiJet:
    """y^m d(ln sigma)/dx^m as an order-1 jet over (x, y)."""
    n = sample.dim
    ln_sigma = _log_density(metric, vol, sample.x)
    y = _tangent_jets(sample, 1)[n:]
    return sum((y[m] * ln_sigma.deriv(m) for m in range(1, n)), y[0] * ln_sigma.deriv(0))


def _s_jet(metric: Metric, vol: VolumeSpec, sample: TangentSample) -> MultiJet:
    st = _spray_state(metric, sample)
    return st.trN - _directional_log_density(metric, vol, sample)


def _sfrak_jet(metric: Metric, vol: VolumeSpec, ref_vol: VolumeSpec, sample: TangentSample) -> MultiJet:
    # theta = y . d ln(sigma_F / sigma_0), so S + theta = trN - y . d ln sigma_0
    theta = _directional_log_density(metric, vol, sample) - _directional_log_density(metric, ref_vol, sample)
    return (_s_jet(metric, vol, sample) + theta) * (1.0 / (sample.dim + 1))


def _horizontal(jet: MultiJet, st: SprayState, sample: TangentSample) -> float:
    n = st.n
    grad = jet.gradient()
    return float(np.dot(sample.y, grad[:n]) - 2 * np.dot(st.G, grad[n:]))


def distortion(metric: Metric, vol: VolumeSpec, sample: Sample) -> float:
    """tau = ln(sqrt(det g) / sigma)."""
    sample = as_sample(sample)
    g = spray_state(metric, sample).g
    sigma = density_jet(metric, vol, sample.x, order=0).value
    return float(0.5 * np.log(np.linalg.det(g)) - np.log(sigma))


def s_curvature(metric: Metric, vol: VolumeSpec, sample: Sample) -> float:
    return _s_jet(metric, vol, as_sample(sample)).value


Field = Union[Expr, Callable[[dict], MultiJet]]


def horizontal_derivative_along_spray(field: Field, metric: Metric, sample: Sample) -> float:
    """f_{|k} y^k = y^k df/dx^k - 2 G^m df/dy^m for a field given as an Expr or a jet callable."""
    sample = as_sample(sample)
    st = spray_state(metric, sample)
    n = sample.dim
    v = _tangent_jets(sample, 1)
    binding = xy_binding(v[:n], v[n:])
    f = eval_expr(field, binding) if isinstance(field, Expr) else field(binding)
    if not isinstance(f, MultiJet):
        return 0.0
    return _horizontal(f, st, sample)


def projective_ricci(metric: Metric, vol: VolumeSpec, sample: Sample) -> float:
    sample = as_sample(sample)
    st = spray_state(metric, sample)
    n = st.n
    S = _s_jet(metric, vol, sample)
    return st.Ric + (n - 1) / (n + 1) * _horizontal(S, st, sample) + (n - 1) / (n + 1) ** 2 * S.value**2


def sfrak(metric: Metric, vol: VolumeSpec, ref_vol: VolumeSpec, sample: Sample) -> float:
    return _sfrak_jet(metric, vol, ref_vol, as_sample(sample)).value


def sfrak_horizontal(metric: Metric, vol: VolumeSpec, ref_vol: VolumeSpec, sample: Sample) -> float:
    sample = as_sample(sample)
    return _horizontal(_sfrak_jet(metric, vol, ref_vol, sample), spray_state(metric, sample), sample)


def weighted_projective_ricci(metric: Metric, vol: VolumeSpec, ref_vol: VolumeSpec, sample: Sample) -> float:
    """Ric + (n-1)(Sfrak^2 + Sfrak_{|k} y^k) with Sigma = sigma_F / sigma_0."""
    sample = as_sample(sample)
    st = spray_state(metric, sample)
    sf = _sfrak_jet(metric, vol, ref_vol, sample)
    return st.Ric + (st.n - 1) * (sf.value**2 + _horizontal(sf, st, sample))


@dataclass(frozen=True)
class WeaklyEinsteinSpec:
    kappa: Expr
    theta_we: OneFormSpec


def weakly_einstein_residual(metric: Metric, spec: WeaklyEinsteinSpec, sample: Sample) -> float:
    """Ric - (n-1)(kappa + 3 theta/F) F^2."""
    sample = as_sample(sample)
    st = spray_state(metric, sample)
    binding = xy_binding(sample.x, sample.y)
    kappa = float(eval_expr(spec.kappa, binding))
    theta = float(eval_expr(spec.theta_we.beta, binding))
    return st.Ric - (st.n - 1) * (kappa + 3 * theta / st.F) * st.F**2


# -- everything at once ---------------------------------------------------------------


@dataclass(frozen=True)
class CurvatureBundle:
    F: float
    g: np.ndarray
    g_inv: np.ndarray
    G: np.ndarray
    N: np.ndarray
    R: np.ndarray
    Ric: float
    sigma_F: float
    tau: float
    S: float
    Sfrak: float
    Sigma: float
    theta: float
    PRic: float
    WPRic0: float

    def as_dict(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            out[k] = v.tolist() if isinstance(v, np.ndarray) else float(v)
        return out


def curvature_bundle(metric: Metric, vol: VolumeSpec, ref_vol: VolumeSpec, sample: Sample) -> CurvatureBundle:
    sample = as_sample(sample)
    st = spray_state(metric, sample)
    n = st.n
    sigma = density_jet(metric, vol, sample.x, order=2)
    sigma0 = density_jet(metric, ref_vol, sample.x, order=2)
    S = _s_jet(metric, vol, sample)
    sf = _sfrak_jet(metric, vol, ref_vol, sample)
    theta = (n + 1) * sf.value - S.value
    return CurvatureBundle(
        F=st.F,
        g=st.g,
        g_inv=st.g_inv,
        G=st.G,
        N=st.N,
        R=st.R,
        Ric=st.Ric,
        sigma_F=sigma.value,
        tau=float(0.5 * np.log(np.linalg.det(st.g)) - np.log(sigma.value)),
        S=S.value,
        Sfrak=sf.value,
        Sigma=sigma.value / sigma0.value,
        theta=theta,
        PRic=st.Ric + (n - 1) / (n + 1) * _horizontal(S, st, sample) + (n - 1) / (n + 1) ** 2 * S.value**2,
        WPRic0=st.Ric + (n - 1) * (sf.value**2 + _horizontal(sf, st, sample)),
    )
