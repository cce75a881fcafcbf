"""Closed-form (alpha, beta) tensor algebra for Randers and Kropina metrics.

Everything here is evaluated from the coefficient functions a_ij(x), b_i(x)
through Christoffel symbols of alpha; no jets of F are used, so the results
are an independent check on the generic pipeline in :mod:`core`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConstructionError, DomainError, FinslerError, NotProjectivelyFlat
from .expr import xy_binding
from .jets import MultiJet, SeedPoint, as_jet, lift_all
from .metrics import Metric, OneFormSpec, RiemannianSpec


def _sym(t):
    return 0.5 * (t + np.swapaxes(t, 0, 1))


def _antisym(t):
    return 0.5 * (t - np.swapaxes(t, 0, 1))


def _jet_field(exprs, xs: list[MultiJet]):
    """Value, gradient and hessian arrays of an array of expressions in x."""
    from .expr import eval_expr

    binding = xy_binding(xs)
    flat = [as_jet(eval_expr(e, binding), xs[0]) for e in exprs]
    j = MultiJet.stack(flat)
    return j.value, j.gradient(), j.hessian()


def _christoffel_parts(a, da, dda):
    """gamma^i_jk and its partial derivatives d_m gamma^i_jk from a and its first two derivatives."""
    ainv = np.linalg.inv(a)
    dainv = -np.einsum("ip,pqm,qj->ijm", ainv, da, ainv)
    # first kind: [jk, l] = 1/2 (d_k a_lj + d_j a_lk - d_l a_jk)
    g1 = 0.5 * (np.einsum("ljk->ljk", da) + np.einsum("lkj->ljk", da) - np.einsum("jkl->ljk", da))
    dg1 = 0.5 * (
        np.einsum("ljkm->ljkm", dda) + np.einsum("lkjm->ljkm", dda) - np.einsum("jklm->ljkm", dda)
    )
    gamma = np.einsum("il,ljk->ijk", ainv, g1)
    dgamma = np.einsum("ilm,ljk->ijkm", dainv, g1) + np.einsum("il,ljkm->ijkm", ainv, dg1)
    return ainv, gamma, dgamma


def _metric_jets(alpha: RiemannianSpec, x):
    n = alpha.dim
    xs = lift_all(SeedPoint(x), 2)
    entries = [alpha.a[i][j] for i in range(n) for j in range(n)]
    a, da, dda = _jet_field(entries, xs)
    return xs, a.reshape(n, n), da.reshape(n, n, n), dda.reshape(n, n, n, n)


def christoffel(alpha: RiemannianSpec, x) -> np.ndarray:
    """gamma^i_jk of alpha at x, shape (n, n, n) indexed [i, j, k]."""
    alpha.check_positive(x)
    _, a, da, dda = _metric_jets(alpha, tuple(float(v) for v in x))
    return _christoffel_parts(a, da, dda)[1]


def _cov2(T, dT, gamma):
    """T_ij;m for a covariant 2-tensor with partials dT[i, j, m]."""
    return dT - np.einsum("lj,lim->ijm", T, gamma) - np.einsum("il,ljm->ijm", T, gamma)


@dataclass(frozen=True)
class AlphaBetaFrame:
    """The tensors of an (alpha, beta) pair at a base point x."""

    n: int
    x: tuple[float, ...]
    a: np.ndarray
    a_inv: np.ndarray
    christoffel: np.ndarray
    dchristoffel: np.ndarray
    b: np.ndarray
    b_up: np.ndarray
    b2: float
    nabla_b: np.ndarray
    r: np.ndarray
    s: np.ndarray
    r_cov: np.ndarray  # r_ij;k
    s_cov: np.ndarray  # s_ij;k
    r_up: np.ndarray  # r^k_i, indexed [k, i]
    s_up: np.ndarray
    r_i: np.ndarray
    s_i: np.ndarray
    r_i_cov: np.ndarray  # r_i;j
    s_i_cov: np.ndarray  # s_i;j
    r_scalar: float
    e: np.ndarray
    t: np.ndarray
    t_trace: float
    q: np.ndarray
    t_i: np.ndarray
    q_i: np.ndarray
    s_sup: np.ndarray  # s^m
    ss: float  # s^m s_m
    div_s_form: float  # s^m_{;m}
    div_s: np.ndarray  # a^mk s_kj;m, contracted with y gives s^m_{0;m}
    ric_bar: np.ndarray  # Ricci tensor of alpha
    r_trace: float  # r^m_m
    sigma_conf: float
    sigma_m: np.ndarray
    lam: float

    @property
    def rho(self) -> float:
        """ln sqrt(1 - b^2) (Randers only)."""
        if not self.b2 < 1:
            raise DomainError(f"b^2 = {self.b2:.6g} >= 1")
        return 0.5 * math.log1p(-self.b2)

    @property
    def rho_i(self) -> np.ndarray:
        """d rho / dx^i."""
        return -(self.r_i + self.s_i) / (1.0 - self.b2)

    @property
    def theta_kropina_i(self) -> np.ndarray:
        """Components of d ln(sigma_F / sigma_alpha) = -n d ln b for Kropina."""
        return -self.n * (self.r_i + self.s_i) / self.b2

    @property
    def theta_kropina_cov(self) -> np.ndarray:
        """theta_i;k of the Kropina volume ratio."""
        w = self.r_i + self.s_i
        dw = self.r_i_cov + self.s_i_cov
        return -self.n * (dw / self.b2 - 2 * np.outer(w, w) / self.b2**2)

    def contract(self, y) -> "Contractions":
        return Contractions.build(self, np.asarray(y, dtype=float))


@lru_cache(maxsize=1024)
def _build_frame(alpha: RiemannianSpec, beta: OneFormSpec, x: tuple[float, ...]) -> AlphaBetaFrame:
    n = alpha.dim
    if beta.dim != n:
        raise ConstructionError("a and b have different dimensions")
    alpha.check_positive(x)
    xs, a, da, dda = _metric_jets(alpha, x)
    b, db, ddb = _jet_field(beta.b, xs)
    ainv, gamma, dgamma = _christoffel_parts(a, da, dda)

    nb = db - np.einsum("k,kij->ij", b, gamma)
    dnb = ddb - np.einsum("km,kij->ijm", db, gamma) - np.einsum("k,kijm->ijm", b, dgamma)
    r, s = _sym(nb), _antisym(nb)
    dr, ds = _sym(dnb), _antisym(dnb)
    r_cov, s_cov = _cov2(r, dr, gamma), _cov2(s, ds, gamma)

    b_up = ainv @ b
    b2 = float(b @ b_up)
    b_up_cov = ainv @ nb  # b^i_;m
    r_up, s_up = ainv @ r, ainv @ s
    r_i, s_i = b_up @ r, b_up @ s
    r_i_cov = np.einsum("jm,ji->im", b_up_cov, r) + np.einsum("j,jim->im", b_up, r_cov)
    s_i_cov = np.einsum("jm,ji->im", b_up_cov, s) + np.einsum("j,jim->im", b_up, s_cov)
    # t_ij = s_ik s^k_j: negative semidefinite, the sign the curvature formulas assume
    t = s @ s_up
    q = np.einsum("ki,kj->ij", r_up, s)
    s_sup = ainv @ s_i
    r_trace = float(np.einsum("ij,ij->", ainv, r))
    ric_bar = (
        np.einsum("kljk->jl", dgamma)
        - np.einsum("kkjl->jl", dgamma)
        + np.einsum("kkp,plj->jl", gamma, gamma)
        - np.einsum("klp,pkj->jl", gamma, gamma)
    )
    t_trace = float(np.einsum("ij,ij->", ainv, t))
    sigma_conf = r_trace / n
    sigma_m = np.einsum("ij,ijm->m", ainv, r_cov) / n
    div_s_form = float(np.einsum("mk,km->", ainv, s_i_cov))
    lam = (n - 4) / 2 * t_trace - (n - 2) * sigma_conf**2 + div_s_form - float(sigma_m @ b_up)
    return AlphaBetaFrame(
        n=n,
        x=x,
        a=a,
        a_inv=ainv,
        christoffel=gamma,
        dchristoffel=dgamma,
        b=b,
        b_up=b_up,
        b2=b2,
        nabla_b=nb,
        r=r,
        s=s,
        r_cov=r_cov,
        s_cov=s_cov,
        r_up=r_up,
        s_up=s_up,
        r_i=r_i,
        s_i=s_i,
        r_i_cov=r_i_cov,
        s_i_cov=s_i_cov,
        r_scalar=float(b_up @ r @ b_up),
        e=r + np.outer(s_i, b) + np.outer(b, s_i),
        t=t,
        t_trace=t_trace,
        q=q,
        t_i=b_up @ t,
        q_i=b_up @ q,
        s_sup=s_sup,
        ss=float(s_sup @ s_i),
        div_s_form=div_s_form,
        div_s=np.einsum("mk,kjm->j", ainv, s_cov),
        ric_bar=ric_bar,
        r_trace=r_trace,
        sigma_conf=sigma_conf,
        sigma_m=sigma_m,
        lam=lam,
    )


def build_frame(alpha: RiemannianSpec, beta: OneFormSpec, x) -> AlphaBetaFrame:
    return _build_frame(alpha, beta, tuple(float(v) for v in x))


def frame_for(metric: Metric, x) -> AlphaBetaFrame:
    if metric.alpha is None or metric.beta_form is None:
        raise ConstructionError(f"{metric.name} is not an (alpha, beta) metric")
    return build_frame(metric.alpha, metric.beta_form, x)


@dataclass(frozen=True)
class Contractions:
    """Frame tensors contracted with a tangent vector y (index 0 means contraction with y)."""

    y: np.ndarray
    alpha: float
    beta: float
    Gbar: np.ndarray
    ric_bar: float
    r00: float
    r0: float
    s0: float
    s_i0: np.ndarray  # s^i_0
    t00: float
    t0: float
    q00: float
    q0: float
    e00: float
    r00_0: float  # r_00;0
    r0_0: float  # r_0;0
    s0_0: float  # s_0;0
    s_div0: float  # s^m_{0;m}
    b_s0m: float  # b^m s_0;m
    b_r00m: float  # b^m r_00;m
    s_r0m: float  # s^m r_0m

    @classmethod
    def build(cls, f: AlphaBetaFrame, y: np.ndarray) -> "Contractions":
        alpha2 = float(y @ f.a @ y)
        return cls(
            y=y,
            alpha=math.sqrt(alpha2),
            beta=float(f.b @ y),
            Gbar=0.5 * np.einsum("ijk,j,k->i", f.christoffel, y, y),
            ric_bar=float(y @ f.ric_bar @ y),
            r00=float(y @ f.r @ y),
            r0=float(f.r_i @ y),
            s0=float(f.s_i @ y),
            s_i0=f.s_up @ y,
            t00=float(y @ f.t @ y),
            t0=float(f.t_i @ y),
            q00=float(y @ f.q @ y),
            q0=float(f.q_i @ y),
            e00=float(y @ f.e @ y),
            r00_0=float(np.einsum("ijk,i,j,k->", f.r_cov, y, y, y)),
            r0_0=float(y @ f.r_i_cov @ y),
            s0_0=float(y @ f.s_i_cov @ y),
            s_div0=float(f.div_s @ y),
            b_s0m=float(y @ f.s_i_cov @ f.b_up),
            b_r00m=float(np.einsum("ijm,i,j,m->", f.r_cov, y, y, f.b_up)),
            s_r0m=float(f.s_sup @ f.r @ y),
        )


# -- Randers ---------------------------------------------------------------------------


def _randers(frame: AlphaBetaFrame, y):
    if not frame.b2 < 1:
        raise DomainError(f"Randers regularity violated: b^2 = {frame.b2:.6g}")
    c = frame.contract(y)
    return c, c.alpha + c.beta


def randers_spray(frame: AlphaBetaFrame, y) -> np.ndarray:
    c, F = _randers(frame, y)
    return c.Gbar + c.alpha * c.s_i0 + (c.r00 - 2 * c.alpha * c.s0) / (2 * F) * c.y


def randers_ricci(frame: AlphaBetaFrame, y) -> float:
    c, F = _randers(frame, y)
    n, al = frame.n, c.alpha
    u = c.r00 - 2 * al * c.s0
    return (
        c.ric_bar
        + (2 * al * c.s_div0 - 2 * c.t00 - al**2 * frame.t_trace)
        + (n - 1) * (3 / (4 * F**2) * u**2 + 1 / (2 * F) * (4 * al * (c.q00 - al * c.t0) - (c.r00_0 - 2 * al * c.s0_0)))
    )


def randers_s_curvature(frame: AlphaBetaFrame, y) -> float:
    """S for the Busemann-Hausdorff volume."""
    c, F = _randers(frame, y)
    rho0 = float(frame.rho_i @ c.y)
    return (frame.n + 1) * (c.e00 / (2 * F) - (c.s0 + rho0))


def randers_sfrak(frame: AlphaBetaFrame, y) -> float:
    """Sfrak with alpha's volume as reference."""
    c, F = _randers(frame, y)
    return (c.r00 - 2 * c.alpha * c.s0) / (2 * F)


def randers_sfrak_horizontal(frame: AlphaBetaFrame, y) -> float:
    """Sfrak_{|m} y^m assembled from its covariant, vertical and spray parts."""
    c, F = _randers(frame, y)
    al = c.alpha
    u = c.r00 - 2 * al * c.s0
    cov = (c.r00_0 - 2 * al * c.s0_0) / (2 * F) - c.r00 / (2 * F**2) * u
    vert = 2 * al / F * (c.q00 - al * c.t0) - al * c.s0 / F**2 * u
    return cov - vert - u**2 / (2 * F**2)


def randers_wpric(frame: AlphaBetaFrame, y) -> float:
    c, _ = _randers(frame, y)
    return c.ric_bar + 2 * c.alpha * c.s_div0 - 2 * c.t00 - c.alpha**2 * frame.t_trace


# -- Kropina ---------------------------------------------------------------------------


def _kropina(frame: AlphaBetaFrame, y):
    c = frame.contract(y)
    if not c.beta > 0:
        raise DomainError(f"Kropina sample outside the cone beta > 0 (beta = {c.beta:.6g})")
    if not frame.b2 > 0:
        raise DomainError("Kropina 1-form vanishes")
    return c, c.alpha**2 / c.beta


def kropina_spray(frame: AlphaBetaFrame, y) -> np.ndarray:
    c, F = _kropina(frame, y)
    return c.Gbar - F / 2 * c.s_i0 - (F * c.s0 + c.r00) * (2 * c.y - F * frame.b_up) / (2 * frame.b2 * F)


def kropina_s_curvature(frame: AlphaBetaFrame, y) -> float:
    c, F = _kropina(frame, y)
    return (frame.n + 1) / (F * frame.b2) * (F * c.r0 - c.r00)


def kropina_T(frame: AlphaBetaFrame, y) -> float:
    """The non-Riemannian part of the Kropina Ricci curvature, term by term."""
    c, _ = _kropina(frame, y)
    n, b2 = frame.n, frame.b2
    b4 = b2 * b2
    a2, be = c.alpha**2, c.beta
    a4 = a2 * a2
    r = frame.r_scalar
    terms = [
        -a2 / (b4 * be) * c.s0 * r,
        -r / b4 * c.r00,
        a2 / (b2 * be) * c.b_s0m,
        1 / b2 * c.b_r00m,
        (n - 2) / b2 * c.s0_0,
        (n - 1) / (b2 * a2) * be * c.r00_0,
        1 / b2 * (a2 / be * c.s0 + c.r00) * frame.r_trace,
        -a2 / be * c.s_div0,
        -1 / b2 * c.r0_0,
        -2 * (2 * n - 3) / b4 * c.r0 * c.s0,
        -(n - 2) / b4 * c.s0**2,
        -4 * (n - 1) / (b4 * a2) * be * c.r00 * c.r0,
        2 * (n - 1) / (b4 * a2) * be * c.r00 * c.s0,
        3 * (n - 1) / (b4 * a4) * be**2 * c.r00**2,
        2 * n / b2 * c.q00,
        1 / b4 * c.r0**2,
        -a2 / (b2 * be) * c.q0,
        (n - 1) / (b2 * be) * a2 * c.t0,
        -a4 / (2 * b2 * be**2) * frame.ss,
        -a2 / (b2 * be) * c.s_r0m,
        -a4 / (4 * be**2) * frame.t_trace,
    ]
    return float(math.fsum(terms))


def kropina_ricci(frame: AlphaBetaFrame, y) -> float:
    c, _ = _kropina(frame, y)
    return c.ric_bar + kropina_T(frame, y)


def kropina_theta(frame: AlphaBetaFrame, y) -> float:
    """theta = d ln(sigma_F / sigma_alpha) evaluated on y."""
    return float(frame.theta_kropina_i @ np.asarray(y, dtype=float))


def kropina_theta_horizontal(frame: AlphaBetaFrame, y) -> float:
    """theta_{|0} along the Kropina spray: theta_0;0 + 2 (Gbar^m - G^m) theta_m."""
    c, F = _kropina(frame, y)
    th = frame.theta_kropina_i
    theta0 = float(th @ c.y)
    return (
        float(c.y @ frame.theta_kropina_cov @ c.y)
        + F * float(th @ c.s_i0)
        + (F * c.s0 + c.r00) / (frame.b2 * F) * (2 * theta0 - F * float(th @ frame.b_up))
    )


def kropina_sfrak(frame: AlphaBetaFrame, y) -> float:
    c, F = _kropina(frame, y)
    return (F * c.r0 - c.r00) / (F * frame.b2) + kropina_theta(frame, y) / (frame.n + 1)


def kropina_s_horizontal(frame: AlphaBetaFrame, y, printed: bool = False) -> float:
    """(n-1) Sfrak_{|m} y^m for Kropina with alpha's volume as reference.

    ``printed=True`` returns the bracket exactly as it is usually quoted,
    which drops a 4 r00 r0 / (F b^2) term and carries the theta term with the
    opposite sign; it is kept as a cross-check only.
    """
    c, F = _kropina(frame, y)
    n, b2 = frame.n, frame.b2
    u = F * c.r0 - c.r00
    bracket = (
        c.r0_0
        - c.r00_0 / F
        + F * c.q0
        - 2 * c.q00
        + 2 / (F * b2) * u * (c.s0 - c.r0)
        - 4 * c.r00**2 / (F**2 * b2)
        - (F * c.s0 + c.r00) * frame.r_scalar / b2
    )
    th = kropina_theta_horizontal(frame, y)
    if printed:
        return (n - 1) / b2 * bracket - (n - 1) / (n + 1) * th
    bracket += 4 * c.r00 * c.r0 / (F * b2)
    return (n - 1) / b2 * bracket + (n - 1) / (n + 1) * th


def kropina_wpric(frame: AlphaBetaFrame, y) -> float:
    """Ric + (n-1) Sfrak^2 + (n-1) Sfrak_{|0}, assembled from the closed-form parts."""
    n = frame.n
    sf = kropina_sfrak(frame, y)
    return kropina_ricci(frame, y) + (n - 1) * sf**2 + kropina_s_horizontal(frame, y)


def kropina_wpric_transcribed(frame: AlphaBetaFrame, y) -> float:
    """The expanded Kropina WPRic_0 as usually quoted (with its repeated s^m r_0m term); cross-check only."""
    c, F = _kropina(frame, y)
    n, b2 = frame.n, frame.b2
    b4 = b2 * b2
    r = frame.r_scalar
    th = kropina_theta(frame, y)
    th0 = kropina_theta_horizontal(frame, y)
    return float(
        c.ric_bar
        + (n - 2) / b4 * (b2 * (c.r0_0 + c.s0_0) - (c.r0 + c.s0) ** 2)
        + (n - 1) / (b4 * F) * (b2 * F**2 * c.t0 - 4 * c.r0 * c.r00)
        + 2 / b2 * c.q00
        - n * F / b4 * c.s0 * r
        - n / b4 * r * c.r00
        + (n - 2) * F / b2 * c.q0
        - F * c.s_div0
        - F**2 / 4 * frame.t_trace
        - F / b2 * c.s_r0m
        + F / b2 * c.b_s0m
        + 1 / b2 * c.b_r00m
        + 1 / b2 * (F * c.s0 + c.r00) * frame.r_trace
        - F**2 / (2 * b2) * frame.ss
        - F / b2 * c.s_r0m
        + (n - 1) / (n + 1) * (th0 + 2 * th / (F * b2) * (F * c.r0 - c.r00) + th**2 / (n + 1))
    )


# -- grids and theorem checkers -----------------------------------------------------------


def direction_grid(n: int, count: int = 16) -> np.ndarray:
    """Deterministic unit directions: equally spaced angles (n=2) or a Fibonacci sphere (n=3)."""
    if n == 2:
        phi = 2 * np.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    if n == 3:
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        rad = np.sqrt(1 - z**2)
        phi = np.pi * (3 - math.sqrt(5)) * k
        return np.stack([rad * np.cos(phi), rad * np.sin(phi), z], axis=-1)
    rng = np.random.default_rng(n)
    d = rng.normal(size=(count, n))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def point_grid(metric: Metric, count: int = 8, seed: int = 0) -> list[tuple[float, ...]]:
    """Seeded base points inside the metric's sampling box that pass its domain check."""
    rng = np.random.default_rng([seed, 0x5EED])
    pts = []
    for _ in range(count * 100):
        x = tuple(float(v) for v in rng.uniform(-metric.box, metric.box, size=metric.dim))
        try:
            metric.check_point(x)
        except (FinslerError, ValueError):
            continue
        pts.append(x)
        if len(pts) == count:
            return pts
    raise DomainError(f"could not place {count} base points in the domain of {metric.name}")


@dataclass
class CheckResult:
    name: str
    max_abs: float = 0.0
    max_rel: float = 0.0
    ok: bool = True

    def update(self, residual: float, scale: float, tol: float, floor: float) -> None:
        a = abs(residual)
        self.max_abs = max(self.max_abs, a)
        self.max_rel = max(self.max_rel, a / scale if scale > 0 else (0.0 if a == 0 else math.inf))
        if not a <= max(tol * scale, floor):
            self.ok = False


@dataclass
class TheoremReport:
    verdict: bool
    checks: list[CheckResult]
    applicable: bool = True
    note: str = ""
    extra: dict = field(default_factory=dict)

    def check(self, name: str) -> CheckResult:
        return next(c for c in self.checks if c.name == name)


def _grid(metric: Metric, points, directions, cone: bool):
    for x in points:
        frame = frame_for(metric, x)
        for y in directions:
            if cone and not float(frame.b @ y) > 0:
                continue
            yield frame, y


def check_randers_wpric_flat(metric: Metric, points=8, directions=16, tol: float = 1e-7,
                             floor: float = 1e-9, seed: int = 0) -> TheoremReport:
    """Evaluate both conditions of the Randers WPRic-flat characterization on a grid."""
    pts = point_grid(metric, points, seed) if isinstance(points, int) else points
    dirs = direction_grid(metric.dim, directions) if isinstance(directions, int) else directions
    c1, c2 = CheckResult("ric_bar = t^m_m alpha^2 + 2 t00"), CheckResult("s^m_0;m = 0")
    wp = CheckResult("wpric0 = 0")
    ric_bar_max = 0.0
    for frame, y in _grid(metric, pts, dirs, cone=False):
        c = frame.contract(y)
        terms = (c.ric_bar, frame.t_trace * c.alpha**2, 2 * c.t00)
        c1.update(terms[0] - terms[1] - terms[2], max(map(abs, terms)), tol, floor)
        div_terms = np.einsum("mk,kjm,j->km", frame.a_inv, frame.s_cov, y)
        c2.update(c.s_div0, float(np.max(np.abs(div_terms))), tol, floor)
        w = randers_wpric(frame, y)
        wp.update(w, max(abs(c.ric_bar), c.alpha**2 * abs(frame.t_trace), abs(2 * c.t00), abs(2 * c.alpha * c.s_div0)),
                  tol, floor)
        ric_bar_max = max(ric_bar_max, abs(c.ric_bar))
    return TheoremReport(c1.ok and c2.ok, [c1, c2, wp], extra={"ric_bar_max": ric_bar_max})


def check_reversible_wpric(metric: Metric, points=8, directions=16, tol: float = 1e-7,
                           floor: float = 1e-9, seed: int = 0, generic: bool = True) -> TheoremReport:
    """s^m_0;m = 0 on the grid, compared against a direct WPRic0(x, y) vs WPRic0(x, -y) test."""
    from . import core
    from .metrics import ClosedFormRanders, RiemannianDensity

    pts = point_grid(metric, points, seed) if isinstance(points, int) else points
    dirs = direction_grid(metric.dim, directions) if isinstance(directions, int) else directions
    formula, direct = CheckResult("div(d beta) = 0"), CheckResult("wpric0(x,y) = wpric0(x,-y)")
    for frame, y in _grid(metric, pts, dirs, cone=False):
        c = frame.contract(y)
        div_terms = np.einsum("mk,kjm,j->km", frame.a_inv, frame.s_cov, y)
        formula.update(c.s_div0, float(np.max(np.abs(div_terms))), tol, floor)
        if generic:
            w1 = core.weighted_projective_ricci(metric, ClosedFormRanders(), RiemannianDensity(), (frame.x, tuple(y)))
            w2 = core.weighted_projective_ricci(metric, ClosedFormRanders(), RiemannianDensity(), (frame.x, tuple(-y)))
        else:
            w1, w2 = randers_wpric(frame, y), randers_wpric(frame, -y)
        direct.update(w1 - w2, max(abs(w1), abs(w2), c.alpha**2), tol * 10, floor * 10)
    agree = formula.ok == direct.ok
    return TheoremReport(formula.ok and agree, [formula, direct], extra={"agree": agree})


def conformality_spread(frame: AlphaBetaFrame, directions: np.ndarray) -> float:
    """Relative spread of r00 / alpha^2 over directions (0 when beta is conformal)."""
    ratios = np.array([float(y @ frame.r @ y) / float(y @ frame.a @ y) for y in directions])
    scale = max(float(np.max(np.abs(frame.r))) / max(float(np.min(np.linalg.eigvalsh(frame.a))), 1e-300), 1e-300)
    return float(np.std(ratios) / scale) if np.any(frame.r) else 0.0


def check_kropina_wpric_flat(metric: Metric, points=8, directions=16, tol: float = 1e-7,
                             floor: float = 1e-9, seed: int = 0, gate: float = 1e-8) -> TheoremReport:
    """Theorem conditions for a Kropina metric to be WPRic-flat relative to alpha.

    Conformality of beta is checked first; when it fails the conditions are
    not applicable and the verdict is False.
    """
    pts = point_grid(metric, points, seed) if isinstance(points, int) else points
    dirs = direction_grid(metric.dim, directions) if isinstance(directions, int) else directions
    spread = max(conformality_spread(frame_for(metric, x), dirs) for x in pts)
    if spread > gate:
        return TheoremReport(False, [], applicable=False, note=f"beta is not conformal (spread {spread:.3g})",
                             extra={"conformal_spread": spread})
    n = metric.dim
    c4, c5 = CheckResult("ricci condition"), CheckResult("s^m s_m = -b^2 t^m_m / 2")
    for frame, y in _grid(metric, pts, dirs, cone=True):
        c = frame.contract(y)
        b2, b4 = frame.b2, frame.b2**2
        sig = frame.sigma_conf
        sig0 = float(frame.sigma_m @ c.y)
        th = kropina_theta(frame, y)
        th0 = kropina_theta_horizontal(frame, y)
        terms = (
            c.ric_bar,
            -frame.lam / ((n + 1) ** 2 * b4) * c.alpha**2,
            (n - 2) / b4 * (b2 * c.s0_0 - (c.s0 + c.beta * sig) ** 2 + b2 * c.beta * sig0),
            (n - 1) / (n + 1) ** 2 * (th**2 + (n + 1) * th0),
        )
        c4.update(sum(terms), max(map(abs, terms)), tol, floor)
        t5 = (frame.ss, 0.5 * b2 * frame.t_trace)
        c5.update(t5[0] + t5[1], max(map(abs, t5)), tol, floor)
    return TheoremReport(c4.ok and c5.ok, [c4, c5], extra={"conformal_spread": spread})


def check_isotropic_s_equivalences(metric: Metric, points=8, directions=16, tol: float = 1e-7,
                                   floor: float = 1e-9, seed: int = 0) -> TheoremReport:
    """The four equivalent isotropic-S conditions for Kropina, evaluated independently."""
    pts = point_grid(metric, points, seed) if isinstance(points, int) else points
    dirs = direction_grid(metric.dim, directions) if isinstance(directions, int) else directions
    names = ["isotropic S = (n+1) c F", "r00 = k alpha^2", "S = 0", "beta conformal"]
    checks = [CheckResult(nm) for nm in names]
    for x in pts:
        frame = frame_for(metric, x)
        cone = [y for y in dirs if float(frame.b @ y) > 0]
        S = np.array([kropina_s_curvature(frame, y) for y in cone])
        F = np.array([float(y @ frame.a @ y) / float(frame.b @ y) for y in cone])
        ratio = S / ((metric.dim + 1) * F)
        scale_S = float(np.max(np.abs(F))) * max(float(np.max(np.abs(frame.r))), floor)
        checks[0].update(float(np.max(ratio) - np.min(ratio)) * float(np.max(F)), scale_S, tol, floor)
        k = np.array([float(y @ frame.r @ y) / float(y @ frame.a @ y) for y in dirs])
        r_scale = float(np.max(np.abs(frame.r)))
        checks[1].update(float(np.max(k) - np.min(k)), r_scale, tol, floor)
        checks[2].update(float(np.max(np.abs(S))), scale_S, tol, floor)
        dev = frame.r - frame.sigma_conf * frame.a
        checks[3].update(float(np.max(np.abs(dev))), r_scale, tol, floor)
    flags = [c.ok for c in checks]
    consistent = all(flags) or not any(flags)
    return TheoremReport(all(flags), checks, extra={"flags": flags, "consistent": consistent})


# -- projectively flat metrics --------------------------------------------------------------


@dataclass(frozen=True)
class ProjectiveData:
    P: float
    P0: float
    c: float = 0.0
    c0: float = 0.0
    sigma_iso: float = 0.0
    eta: float = 0.0
    eta0: float = 0.0


def projective_factor(metric: Metric, sample, rtol: float = 1e-8) -> ProjectiveData:
    """P with G^i = P y^i and P0 = y^j dP/dx^j, read off the generic spray."""
    from . import core

    sample = core.as_sample(sample)
    st = core.spray_state(metric, sample)
    n = st.n
    y = np.array(sample.y)
    i = int(np.argmax(np.abs(y)))
    P = st.G[i] / y[i]
    resid = float(np.max(np.abs(st.G - P * y)))
    if resid > rtol * max(float(np.max(np.abs(st.G))), 1e-300) and resid > 1e-14:
        raise NotProjectivelyFlat(f"G is not proportional to y in this chart (residual {resid:.3g})")
    P_jet = st.G_jet[i] / (MultiJet.variable(y[i], n + i, 2 * n, 2))
    grad = P_jet.gradient()
    return ProjectiveData(P=float(P), P0=float(grad[:n] @ y))


def projectively_flat_ricci(pd: ProjectiveData, n: int) -> float:
    return (n - 1) * (pd.P**2 - pd.P0)


@dataclass(frozen=True)
class Reconstruction:
    F: float
    case: str
    residual: float


def quadratic_coefficients(pd: ProjectiveData) -> tuple[float, float, float]:
    """(A, B, C) of A F^2 - B F + C = 0."""
    return (
        pd.sigma_iso - pd.c**2,
        2 * pd.c * pd.eta - pd.c0,
        pd.P0 - pd.P**2 - pd.eta**2 - pd.eta0,
    )


def reconstruct_metric_from_projective_data(pd: ProjectiveData, atol: float = 0.0) -> Reconstruction:
    """Solve the quadratic relation for F; the linear case gives a Kropina-type value."""
    A, B, C = quadratic_coefficients(pd)
    if abs(A) <= atol:
        if B == 0:
            raise FinslerError("degenerate projective data: both quadratic and linear coefficients vanish")
        F = C / B
        case = "kropina"
    else:
        disc = B * B - 4 * A * C
        if disc < 0:
            raise FinslerError(f"negative discriminant {disc:.6g}")
        F = (math.sqrt(disc) + B) / (2 * A)
        case = "randers"
    if not F > 0:
        raise FinslerError(f"reconstructed F = {F:.6g} is not positive")
    return Reconstruction(F, case, A * F * F - B * F + C)
