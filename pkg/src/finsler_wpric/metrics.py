"""Finsler metric descriptions, the builtin catalog and the metric file format."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ConstructionError, DomainError, ExprSyntaxError, FinslerError, SingularEvaluation
from .expr import Expr, eval_expr, max_index, parse, to_text, xy_binding

# -- building blocks -------------------------------------------------------------


def _check_x_only(e: Expr, dim: int, what: str) -> None:
    if any(v.startswith("y") for v in e.free_vars):
        raise ConstructionError(f"{what} = {to_text(e)} must depend on x only")
    if max_index(e, "x") > dim:
        raise ConstructionError(f"{what} uses a coordinate beyond dim = {dim}")


def _as_expr(e: Expr | str | float) -> Expr:
    if isinstance(e, Expr):
        return e
    return parse(str(e))


@dataclass(frozen=True)
class RiemannianSpec:
    """alpha = sqrt(a_ij(x) y^i y^j); ``a`` is stored as a full symmetric grid."""

    dim: int
    a: tuple[tuple[Expr, ...], ...]

    def __post_init__(self):
        if len(self.a) != self.dim or any(len(row) != self.dim for row in self.a):
            raise ConstructionError(f"a must be a {self.dim}x{self.dim} grid")
        for i in range(self.dim):
            for j in range(self.dim):
                _check_x_only(self.a[i][j], self.dim, f"a[{i + 1}][{j + 1}]")
                if self.a[i][j] != self.a[j][i]:
                    raise ConstructionError(f"a[{i + 1}][{j + 1}] and a[{j + 1}][{i + 1}] differ")

    @classmethod
    def from_entries(cls, dim: int, entries: dict[tuple[int, int], Expr | str | float]) -> "RiemannianSpec":
        """Build from 0-based (i, j) entries; one triangle suffices, missing off-diagonals are 0."""
        grid = [[None] * dim for _ in range(dim)]
        for (i, j), e in entries.items():
            e = _as_expr(e)
            for p, q in ((i, j), (j, i)):
                if grid[p][q] is not None and grid[p][q] != e:
                    raise ConstructionError(f"a[{p + 1}][{q + 1}] given twice with different values")
                grid[p][q] = e
        for i in range(dim):
            if grid[i][i] is None:
                raise ConstructionError(f"diagonal entry a[{i + 1}][{i + 1}] is missing")
            for j in range(dim):
                if grid[i][j] is None:
                    grid[i][j] = parse("0")
        return cls(dim, tuple(tuple(row) for row in grid))

    @classmethod
    def euclidean(cls, dim: int) -> "RiemannianSpec":
        return cls.from_entries(dim, {(i, i): "1" for i in range(dim)})

    def matrix(self, x, binding=None):
        """a_ij at x (reals) or as a nested list of jets when jets are bound."""
        binding = binding if binding is not None else xy_binding(x)
        return [[eval_expr(self.a[i][j], binding) for j in range(self.dim)] for i in range(self.dim)]

    def check_positive(self, x) -> np.ndarray:
        a = np.array(self.matrix(x), dtype=float)
        try:
            np.linalg.cholesky(a)
        except np.linalg.LinAlgError:
            lam = float(np.linalg.eigvalsh(a)[0])
            raise DomainError(f"a(x) is not positive definite at x={list(x)} (smallest eigenvalue {lam:.3g})")
        return a

    @cached_property
    def alpha_squared(self) -> Expr:
        terms = []
        for i in range(self.dim):
            for j in range(i, self.dim):
                coef = "" if i == j else "2*"
                terms.append(f"{coef}({to_text(self.a[i][j])})*y{i + 1}*y{j + 1}")
        return parse(" + ".join(terms))


@dataclass(frozen=True)
class OneFormSpec:
    """beta = b_i(x) y^i."""

    dim: int
    b: tuple[Expr, ...]

    def __post_init__(self):
        if len(self.b) != self.dim:
            raise ConstructionError(f"b must have {self.dim} components, got {len(self.b)}")
        for i, e in enumerate(self.b):
            _check_x_only(e, self.dim, f"b[{i + 1}]")

    @classmethod
    def from_components(cls, comps: Sequence[Expr | str | float]) -> "OneFormSpec":
        return cls(len(comps), tuple(_as_expr(c) for c in comps))

    def vector(self, x, binding=None):
        binding = binding if binding is not None else xy_binding(x)
        return [eval_expr(e, binding) for e in self.b]

    @cached_property
    def beta(self) -> Expr:
        return parse(" + ".join(f"({to_text(e)})*y{i + 1}" for i, e in enumerate(self.b)))


# -- metric variants ------------------------------------------------------------------


class Metric:
    """Common surface of every metric variant.

    ``family`` selects the closed-form machinery available: "randers",
    "kropina", "riemannian" or "general".
    """

    dim: int
    family = "general"
    box = 0.5  # half-width of the default chart sampling box

    @property
    def name(self) -> str:
        return type(self).__name__

    @property
    def F_expr(self) -> Expr:
        raise NotImplementedError

    @property
    def alpha(self) -> RiemannianSpec | None:
        return None

    @property
    def beta_form(self) -> OneFormSpec | None:
        return None

    def check_point(self, x) -> None:
        if len(x) != self.dim:
            raise DomainError(f"point has {len(x)} coordinates, metric has dim {self.dim}")

    def check_sample(self, x, y) -> None:
        self.check_point(x)
        if len(y) != self.dim:
            raise DomainError(f"tangent vector has {len(y)} components, metric has dim {self.dim}")
        if not np.any(np.asarray(y, dtype=float) != 0):
            raise DomainError("y = 0 is not a valid tangent sample")

    def cone_vector(self, x) -> np.ndarray | None:
        """b_i(x) when evaluation is restricted to beta > 0, else None."""
        return None

    def F(self, x, y) -> float:
        self.check_sample(x, y)
        return float(eval_expr(self.F_expr, xy_binding(x, y)))


def _check_alpha(alpha: RiemannianSpec, x) -> np.ndarray:
    return alpha.check_positive(x)


def _b_squared(alpha: RiemannianSpec, beta: OneFormSpec, x) -> float:
    a = alpha.check_positive(x)
    b = np.array(beta.vector(x), dtype=float)
    return float(b @ np.linalg.solve(a, b))


class _AlphaBetaMetric(Metric):
    @property
    def alpha(self) -> RiemannianSpec:
        return self._ab[0]

    @property
    def beta_form(self) -> OneFormSpec:
        return self._ab[1]

    @cached_property
    def _ab(self) -> tuple[RiemannianSpec, OneFormSpec]:
        raise NotImplementedError


class _RandersLike(_AlphaBetaMetric):
    family = "randers"

    def check_point(self, x) -> None:
        super().check_point(x)
        b2 = _b_squared(self.alpha, self.beta_form, x)
        if not b2 < 1:
            raise DomainError(f"Randers regularity violated at x={list(x)}: b^2 = {b2:.6g} >= 1")


@dataclass(frozen=True)
class Randers(_RandersLike):
    alpha_spec: RiemannianSpec
    beta_spec: OneFormSpec
    check_at: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.alpha_spec.dim != self.beta_spec.dim:
            raise ConstructionError("a and b have different dimensions")
        x0 = self.check_at if self.check_at is not None else (0.0,) * self.dim
        try:
            b2 = _b_squared(self.alpha_spec, self.beta_spec, x0)
        except (DomainError, SingularEvaluation) as exc:
            raise ConstructionError(f"cannot evaluate Randers data at x={list(x0)}: {exc}") from exc
        if not b2 < 1:
            raise ConstructionError(f"Randers regularity requires b^2 < 1; b^2 = {b2:.6g} at x={list(x0)}")

    @property
    def dim(self) -> int:
        return self.alpha_spec.dim

    @cached_property
    def _ab(self):
        return self.alpha_spec, self.beta_spec

    @cached_property
    def F_expr(self) -> Expr:
        return parse(f"sqrt({to_text(self.alpha_spec.alpha_squared)}) + ({to_text(self.beta_spec.beta)})")


@dataclass(frozen=True)
class Kropina(_AlphaBetaMetric):
    alpha_spec: RiemannianSpec
    beta_spec: OneFormSpec

    family = "kropina"

    def __post_init__(self):
        if self.alpha_spec.dim != self.beta_spec.dim:
            raise ConstructionError("a and b have different dimensions")

    @property
    def dim(self) -> int:
        return self.alpha_spec.dim

    @cached_property
    def _ab(self):
        return self.alpha_spec, self.beta_spec

    @cached_property
    def F_expr(self) -> Expr:
        return parse(f"({to_text(self.alpha_spec.alpha_squared)}) / ({to_text(self.beta_spec.beta)})")

    def check_point(self, x) -> None:
        super().check_point(x)
        self.alpha_spec.check_positive(x)
        b = np.array(self.beta_spec.vector(x), dtype=float)
        if not np.any(b != 0):
            raise DomainError(f"Kropina 1-form vanishes at x={list(x)}")

    def check_sample(self, x, y) -> None:
        super().check_sample(x, y)
        beta = float(np.dot(self.beta_spec.vector(x), y))
        if not beta > 0:
            raise DomainError(f"Kropina sample outside the cone beta > 0 (beta = {beta:.6g})")

    def cone_vector(self, x) -> np.ndarray:
        return np.array(self.beta_spec.vector(x), dtype=float)


@dataclass(frozen=True)
class Riemannian(Metric):
    alpha_spec: RiemannianSpec

    family = "riemannian"

    @property
    def dim(self) -> int:
        return self.alpha_spec.dim

    @property
    def alpha(self) -> RiemannianSpec:
        return self.alpha_spec

    @cached_property
    def F_expr(self) -> Expr:
        return parse(f"sqrt({to_text(self.alpha_spec.alpha_squared)})")

    def check_point(self, x) -> None:
        super().check_point(x)
        self.alpha_spec.check_positive(x)


@dataclass(frozen=True)
class Euclidean(Metric):
    dim: int

    family = "riemannian"

    @cached_property
    def alpha(self) -> RiemannianSpec:
        return RiemannianSpec.euclidean(self.dim)

    @cached_property
    def F_expr(self) -> Expr:
        return parse("sqrt(" + " + ".join(f"y{i}^2" for i in range(1, self.dim + 1)) + ")")


def _sum(terms: Sequence[str]) -> str:
    return "(" + " + ".join(terms) + ")"


def _sq_norm(prefix: str, idx: Sequence[int]) -> str:
    return _sum([f"{prefix}{i}^2" for i in idx])


def _dot(u: Sequence[str], v: Sequence[str]) -> str:
    return _sum([f"{p}*{q}" for p, q in zip(u, v)])


@dataclass(frozen=True)
class Funk(_RandersLike):
    """Funk metric on the unit ball, written exactly as the textbook alpha + beta."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ConstructionError("Funk metric needs dim >= 1")

    @cached_property
    def F_expr(self) -> Expr:
        n = range(1, self.dim + 1)
        xx, yy = _sq_norm("x", n), _sq_norm("y", n)
        xy = _dot([f"x{i}" for i in n], [f"y{i}" for i in n])
        return parse(f"sqrt({yy} - ({xx}*{yy} - {xy}^2)) / (1 - {xx}) + {xy} / (1 - {xx})")

    @cached_property
    def _ab(self):
        n = self.dim
        xx = _sq_norm("x", range(1, n + 1))
        entries = {}
        for i in range(n):
            for j in range(i, n):
                delta = f"(1 - {xx})" if i == j else "0"
                entries[(i, j)] = f"({delta} + x{i + 1}*x{j + 1}) / (1 - {xx})^2"
        b = [f"x{i + 1} / (1 - {xx})" for i in range(n)]
        return RiemannianSpec.from_entries(n, entries), OneFormSpec.from_components(b)

    def check_point(self, x) -> None:
        Metric.check_point(self, x)
        if not float(np.dot(x, x)) < 1:
            raise DomainError(f"Funk metric is defined on |x| < 1; |x| = {math.sqrt(float(np.dot(x, x))):.6g}")


@dataclass(frozen=True)
class CSRanders(_RandersLike):
    """Randers metric of isotropic S-curvature built from a constant vector a."""

    a: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        if len(self.a) < 1:
            raise ConstructionError("CSRanders needs a non-empty vector a")
        # the default sampling box must lie in |a| |x|^2 < 1
        reach = self.norm_a * self.dim * self.box**2
        if not reach < 1:
            raise ConstructionError(f"|a| = {self.norm_a:.6g} too large: |a||x|^2 reaches {reach:.3g} on the sampling box")

    @property
    def dim(self) -> int:
        return len(self.a)

    @property
    def norm_a(self) -> float:
        return math.sqrt(sum(v * v for v in self.a))

    def _pieces(self):
        n = range(1, self.dim + 1)
        xx, yy = _sq_norm("x", n), _sq_norm("y", n)
        av = [repr(v) for v in self.a]
        ay = _dot(av, [f"y{i}" for i in n])
        ax = _dot(av, [f"x{i}" for i in n])
        xy = _dot([f"x{i}" for i in n], [f"y{i}" for i in n])
        aa = repr(sum(v * v for v in self.a))
        den = f"(1 - {aa}*{xx}^2)"
        w = f"({xx}*{ay} - 2*{ax}*{xy})"
        return xx, yy, ax, aa, den, w

    @cached_property
    def F_expr(self) -> Expr:
        xx, yy, ax, aa, den, w = self._pieces()
        # beta carries the sign that makes S = (n+1)<a,x>F (flipping it is a -> -a)
        return parse(f"sqrt({den}*{yy} + {w}^2) / {den} - {w} / {den}")

    @cached_property
    def _ab(self):
        n = self.dim
        xx, yy, ax, aa, den, w = self._pieces()
        wi = [f"({xx}*{self.a[i]!r} - 2*{ax}*x{i + 1})" for i in range(n)]
        entries = {}
        for i in range(n):
            for j in range(i, n):
                delta = den if i == j else "0"
                entries[(i, j)] = f"({delta} + {wi[i]}*{wi[j]}) / {den}^2"
        b = [f"-{wi[i]} / {den}" for i in range(n)]
        return RiemannianSpec.from_entries(n, entries), OneFormSpec.from_components(b)

    def check_point(self, x) -> None:
        Metric.check_point(self, x)
        r = self.norm_a * float(np.dot(x, x))
        if not r < 1:
            raise DomainError(f"CSRanders requires |a||x|^2 < 1, got {r:.6g}")

    def c(self, x) -> float:
        return float(np.dot(self.a, x))

    def rho(self, x) -> float:
        return 3 * float(np.dot(self.a, x)) ** 2 - 2 * float(np.dot(self.a, self.a)) * float(np.dot(x, x))


@dataclass(frozen=True)
class BaoShen(_RandersLike):
    """Bao-Shen Randers metrics on S^3 in the central-projection chart."""

    varrho: float = 2.0
    sign: int = 1

    def __post_init__(self):
        if not self.varrho > 1:
            raise ConstructionError(f"BaoShen needs varrho > 1, got {self.varrho}")
        if self.sign not in (1, -1):
            raise ConstructionError("sign must be +1 or -1")

    dim = 3

    # rows of M with (L1, L2, L3) = M y; the chart constant in front of u, v, w is 1
    _M = (("1", "-x3", "x2"), ("x3", "1", "-x1"), ("-x2", "x1", "1"))

    def _L(self) -> list[str]:
        return [_sum([f"({m})*y{j + 1}" for j, m in enumerate(row)]) for row in self._M]

    @cached_property
    def F_expr(self) -> Expr:
        L1, L2, L3 = self._L()
        D = "(1 + x1^2 + x2^2 + x3^2)"
        s = f"{self.sign * math.sqrt(self.varrho - 1)!r}"
        return parse(f"sqrt({self.varrho!r}*{L1}^2 + {L2}^2 + {L3}^2) / {D} + ({s})*{L1} / {D}")

    @cached_property
    def _ab(self):
        D = "(1 + x1^2 + x2^2 + x3^2)"
        weights = [repr(float(self.varrho)), "1", "1"]
        entries = {}
        for i in range(3):
            for j in range(i, 3):
                terms = [f"{weights[k]}*({self._M[k][i]})*({self._M[k][j]})" for k in range(3)]
                entries[(i, j)] = f"{_sum(terms)} / {D}^2"
        s = self.sign * math.sqrt(self.varrho - 1)
        b = [f"({s!r})*({self._M[0][j]}) / {D}" for j in range(3)]
        return RiemannianSpec.from_entries(3, entries), OneFormSpec.from_components(b)


@dataclass(frozen=True)
class QuarticRoot(Metric):
    """F = (A^2 + 2c A B + B^2)^(1/4) with A, B the squared Euclidean norms of the two factors."""

    n1: int = 1
    n2: int = 1
    c: float = 0.5

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ConstructionError("both factors need positive dimension")
        if not self.c > -1:
            raise ConstructionError(f"c = {self.c} makes F^4 indefinite (need c > -1)")
        _convexity_gate(self)

    @property
    def dim(self) -> int:
        return self.n1 + self.n2

    @cached_property
    def F_expr(self) -> Expr:
        A = _sq_norm("y", range(1, self.n1 + 1))
        B = _sq_norm("y", range(self.n1 + 1, self.dim + 1))
        return parse(f"({A}^2 + 2*{self.c!r}*{A}*{B} + {B}^2)^0.25")


@dataclass(frozen=True)
class GeneralF(Metric):
    dim: int
    F_text: Expr

    def __post_init__(self):
        object.__setattr__(self, "F_text", _as_expr(self.F_text))
        if max(max_index(self.F_text, "x"), max_index(self.F_text, "y")) > self.dim:
            raise ConstructionError(f"F uses variables beyond dim = {self.dim}")
        _homogeneity_gate(self)

    @property
    def F_expr(self) -> Expr:
        return self.F_text


def _convexity_gate(metric: Metric, directions: int = 32) -> None:
    from .core import fundamental_tensor

    rng = np.random.default_rng(20240601)
    for _ in range(directions):
        y = rng.normal(size=metric.dim)
        g = fundamental_tensor(metric, ((0.0,) * metric.dim, tuple(y)))
        lam = float(np.linalg.eigvalsh(g)[0])
        if not lam > 1e-10:
            raise ConstructionError(f"fundamental tensor not positive definite (smallest eigenvalue {lam:.3g})")


def _homogeneity_gate(metric: Metric, trials: int = 10) -> None:
    rng = np.random.default_rng(20240602)
    checked = 0
    for _ in range(trials * 10):
        x = rng.uniform(-metric.box, metric.box, size=metric.dim)
        y = rng.normal(size=metric.dim)
        b = xy_binding(x, y)
        b2 = xy_binding(x, 2 * y)
        try:
            f1 = float(eval_expr(metric.F_expr, b))
            f2 = float(eval_expr(metric.F_expr, b2))
        except (SingularEvaluation, FinslerError):
            continue
        if not abs(f2 - 2 * f1) <= 1e-9 * max(abs(f1), 1e-300) * 2:
            raise ConstructionError(f"F is not positively 1-homogeneous in y: F(x,2y) = {f2}, 2F(x,y) = {2 * f1}")
        checked += 1
        if checked >= trials:
            return
    raise ConstructionError("F could not be evaluated on the sampling box")


# -- volume specs ------------------------------------------------------------------------


@dataclass(frozen=True)
class BusemannHausdorff:
    """Busemann-Hausdorff density computed by quadrature over the unit sphere."""


@dataclass(frozen=True)
class ClosedFormRanders:
    """sigma_F = (1 - b^2)^((n+1)/2) sqrt(det a)."""


@dataclass(frozen=True)
class ClosedFormKropina:
    """sigma_F = (2/b)^n sqrt(det a)."""


@dataclass(frozen=True)
class RiemannianDensity:
    """sqrt(det a) of ``alpha``, or of the metric's own Riemannian part when None."""

    alpha: RiemannianSpec | None = None


@dataclass(frozen=True)
class ConstantDensity:
    value: float = 1.0

    def __post_init__(self):
        if not self.value > 0:
            raise ConstructionError("constant density must be positive")


@dataclass(frozen=True)
class DensityOf:
    """The density ``volume`` of another metric, used as a reference measure."""

    metric: Metric
    volume: object = BusemannHausdorff()


VolumeSpec = BusemannHausdorff | ClosedFormRanders | ClosedFormKropina | RiemannianDensity | ConstantDensity | DensityOf


def closed_form_volume(metric: Metric) -> VolumeSpec:
    """The closed-form Busemann-Hausdorff density for the metric's family."""
    if metric.family == "randers":
        return ClosedFormRanders()
    if metric.family == "kropina":
        return ClosedFormKropina()
    if metric.family == "riemannian":
        return RiemannianDensity()
    raise ConstructionError(f"no closed-form density for {metric.name}")


# -- catalog -----------------------------------------------------------------------------


def _randers_from_text(a: dict[tuple[int, int], str], b: Sequence[str], dim: int) -> Randers:
    return Randers(RiemannianSpec.from_entries(dim, a), OneFormSpec.from_components(b))


def _kropina_from_text(a: dict[tuple[int, int], str], b: Sequence[str], dim: int) -> Kropina:
    return Kropina(RiemannianSpec.from_entries(dim, a), OneFormSpec.from_components(b))


def _identity(dim: int) -> dict[tuple[int, int], str]:
    return {(i, i): "1" for i in range(dim)}


CATALOG: dict[str, tuple[str, Callable[..., Metric]]] = {
    "euclidean2": ("flat R^2", lambda: Euclidean(2)),
    "euclidean3": ("flat R^3", lambda: Euclidean(3)),
    "funk2": ("Funk metric on the unit disk", lambda: Funk(2)),
    "funk3": ("Funk metric on the unit ball in R^3", lambda: Funk(3)),
    "klein2": ("Riemannian part of the Funk metric on the disk", lambda: Riemannian(Funk(2).alpha)),
    "conformal-exp": (
        "Riemannian a11 = exp(2 x1), a22 = 1",
        lambda: Riemannian(RiemannianSpec.from_entries(2, {(0, 0): "exp(2*x1)", (1, 1): "1"})),
    ),
    "randers-const": ("Euclidean alpha, constant b = (0.5, 0)", lambda: _randers_from_text(_identity(2), ["0.5", "0"], 2)),
    "randers-closed": (
        "Euclidean alpha, b = grad(0.3 x1^2 + 0.2 x1 x2 - 0.25 x2^2)",
        lambda: _randers_from_text(_identity(2), ["0.6*x1 + 0.2*x2", "0.2*x1 - 0.5*x2"], 2),
    ),
    "randers-rot": ("Euclidean alpha, b = 0.5 (x2, -x1)", lambda: _randers_from_text(_identity(2), ["0.5*x2", "-0.5*x1"], 2)),
    "kropina-const": ("Euclidean alpha, b = (1, 0)", lambda: _kropina_from_text(_identity(2), ["1", "0"], 2)),
    "kropina-conformal": (
        "Euclidean alpha, b = (1,0) + 0.3 x + 0.2 (x2, -x1)",
        lambda: _kropina_from_text(_identity(2), ["1 + 0.3*x1 + 0.2*x2", "0.3*x2 - 0.2*x1"], 2),
    ),
    "quartic": ("(alpha1^4 + alpha1^2 alpha2^2 + alpha2^4)^(1/4) on R x R", lambda: QuarticRoot(1, 1, 0.5)),
    "quartic3": ("fourth-root metric on R x R^2, c = 1/2", lambda: QuarticRoot(1, 2, 0.5)),
    "cs-randers2": ("isotropic-S Randers, a = (0.1, 0)", lambda: CSRanders((0.1, 0.0))),
    "cs-randers3": ("isotropic-S Randers, a = (0.1, 0, 0)", lambda: CSRanders((0.1, 0.0, 0.0))),
    "bao-shen": ("Bao-Shen Randers metric on S^3, varrho = 2", lambda: BaoShen(2.0, 1)),
}


def materialize_catalog(name: str, **params) -> Metric:
    """Instantiate a named family; ``params`` override the family defaults."""
    families: dict[str, Callable[..., Metric]] = {
        "funk": lambda dim=2: Funk(dim),
        "csranders": lambda a=(0.1, 0.0): CSRanders(tuple(a)),
        "baoshen": lambda varrho=2.0, sign=1: BaoShen(varrho, sign),
        "quarticroot": lambda n1=1, n2=1, c=0.5: QuarticRoot(n1, n2, c),
        "euclidean": lambda dim=2: Euclidean(dim),
    }
    key = name.lower().replace("-", "").replace("_", "")
    if key in families:
        return families[key](**params)
    if name in CATALOG and not params:
        return CATALOG[name][1]()
    raise KeyError(f"unknown catalog entry {name!r}")


# -- metric definition files ----------------------------------------------------------------


class MetricFileError(FinslerError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


def _parse_index(key: str, pattern: str, line: int) -> tuple[int, ...]:
    import re

    m = re.fullmatch(pattern, key)
    if m is None:
        raise MetricFileError(f"malformed key {key!r}", line)
    return tuple(int(g) for g in m.groups())


def load_metric_text(text: str) -> Metric:
    dim = kind = None
    a_entries: dict[tuple[int, int], tuple[Expr, int]] = {}
    b_entries: dict[int, tuple[Expr, int]] = {}
    f_expr = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MetricFileError("expected 'key = value'", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace(" ", "")
        if key == "dim":
            try:
                dim = int(value)
            except ValueError:
                raise MetricFileError(f"dim must be an integer, got {value!r}", lineno) from None
            if dim < 1:
                raise MetricFileError("dim must be positive", lineno)
            continue
        if key == "kind":
            if value not in ("general", "randers", "kropina", "riemannian"):
                raise MetricFileError(f"unknown kind {value!r}", lineno)
            kind = value
            continue
        try:
            expr = parse(value)
        except ExprSyntaxError as exc:
            raise MetricFileError(f"{key}: {exc}", lineno) from None
        if key.startswith("a["):
            i, j = _parse_index(key, r"a\[(\d+)\]\[(\d+)\]", lineno)
            if (i, j) in a_entries:
                raise MetricFileError(f"{key} given twice", lineno)
            a_entries[(i, j)] = (expr, lineno)
        elif key.startswith("b["):
            (i,) = _parse_index(key, r"b\[(\d+)\]", lineno)
            if i in b_entries:
                raise MetricFileError(f"{key} given twice", lineno)
            b_entries[i] = (expr, lineno)
        elif key == "F":
            if f_expr is not None:
                raise MetricFileError("F given twice", lineno)
            f_expr = (expr, lineno)
        else:
            raise MetricFileError(f"unknown key {key!r}", lineno)

    if dim is None:
        raise MetricFileError("missing 'dim'")
    if kind is None:
        raise MetricFileError("missing 'kind'")
    for (i, j), (_, ln) in a_entries.items():
        if not (1 <= i <= dim and 1 <= j <= dim):
            raise MetricFileError(f"a[{i}][{j}] outside dim = {dim}", ln)
    for i, (_, ln) in b_entries.items():
        if not 1 <= i <= dim:
            raise MetricFileError(f"b[{i}] outside dim = {dim}", ln)

    if kind == "general":
        if f_expr is None:
            raise MetricFileError("kind = general requires F")
        if a_entries or b_entries:
            raise MetricFileError("kind = general takes only F")
        try:
            return GeneralF(dim, f_expr[0])
        except ConstructionError as exc:
            raise MetricFileError(str(exc), f_expr[1]) from None
    if f_expr is not None:
        raise MetricFileError("F is only allowed for kind = general", f_expr[1])
    try:
        alpha = RiemannianSpec.from_entries(dim, {(i - 1, j - 1): e for (i, j), (e, _) in a_entries.items()})
    except ConstructionError as exc:
        raise MetricFileError(str(exc)) from None
    if kind == "riemannian":
        if b_entries:
            raise MetricFileError("kind = riemannian takes no b")
        return Riemannian(alpha)
    missing = [i for i in range(1, dim + 1) if i not in b_entries]
    if missing:
        raise MetricFileError(f"b[{missing[0]}] missing (dimension mismatch between a and b)")
    try:
        beta = OneFormSpec(dim, tuple(b_entries[i][0] for i in range(1, dim + 1)))
        return Randers(alpha, beta) if kind == "randers" else Kropina(alpha, beta)
    except ConstructionError as exc:
        raise MetricFileError(str(exc)) from None


def load_metric_file(path: str | Path) -> Metric:
    return load_metric_text(Path(path).read_text(encoding="utf-8"))


def resolve_metric(ref: str) -> Metric:
    """``builtin:NAME`` or a path to a metric definition file."""
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        if name not in CATALOG:
            raise KeyError(f"unknown builtin metric {name!r}; see the catalog command")
        return CATALOG[name][1]()
    return load_metric_file(ref)
