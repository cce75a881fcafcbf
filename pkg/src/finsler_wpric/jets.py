"""Truncated multivariate Taylor arithmetic ("jets").

A :class:`MultiJet` stores the Taylor coefficients of a function of
``num_vars`` real variables around a base point, up to total degree
``order``.  Coefficients are derivative / multi-index factorial, laid out
in a graded order so that truncating to a lower order is a prefix slice.

Jets may carry leading batch axes: ``coeffs`` has shape ``batch + (size,)``.
Every operation broadcasts over the batch axes, which is how matrices of
jets and quadrature nodes are handled without Python loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Callable, Sequence

import numpy as np

from .errors import SingularEvaluation

DEFAULT_ORDER = 4

_EPS = np.finfo(float).eps


class JetBasis:
    """Graded monomial basis for (num_vars, order) with cached tables."""

    def __init__(self, num_vars: int, order: int):
        if num_vars < 1 or order < 0:
            raise ValueError(f"invalid jet basis ({num_vars}, {order})")
        self.num_vars = num_vars
        self.order = order
        monomials = []
        self.degree_end = []
        for deg in range(order + 1):
            for combo in combinations_with_replacement(range(num_vars), deg):
                exps = [0] * num_vars
                for v in combo:
                    exps[v] += 1
                monomials.append(tuple(exps))
            self.degree_end.append(len(monomials))
        self.monomials = monomials
        self.size = len(monomials)
        self.index = {m: k for k, m in enumerate(monomials)}
        self.factorial = np.array(
            [math.prod(math.factorial(e) for e in m) for m in monomials], dtype=float
        )
        self._build_product_table()
        self._deriv_tables: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    def _build_product_table(self) -> None:
        triples = []
        for p, mp in enumerate(self.monomials):
            dp = sum(mp)
            for q, mq in enumerate(self.monomials):
                if dp + sum(mq) > self.order:
                    continue
                k = self.index[tuple(a + b for a, b in zip(mp, mq))]
                triples.append((k, p, q))
        triples.sort()
        arr = np.array(triples, dtype=np.intp)
        self._pk, self._pi, self._pj = arr[:, 0], arr[:, 1], arr[:, 2]
        # every target has at least the (0, k) pair, so reduceat segments are non-empty
        self._starts = np.searchsorted(self._pk, np.arange(self.size))

    def multiply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        prod = a[..., self._pi] * b[..., self._pj]
        return np.add.reduceat(prod, self._starts, axis=-1)

    def derivative_table(self, var: int):
        """(source indices, target indices in order-1 basis, multipliers)."""
        if var not in self._deriv_tables:
            lower = basis(self.num_vars, self.order - 1)
            src, dst, mult = [], [], []
            for k, m in enumerate(self.monomials):
                if m[var] == 0:
                    continue
                reduced = list(m)
                reduced[var] -= 1
                src.append(k)
                dst.append(lower.index[tuple(reduced)])
                mult.append(float(m[var]))
            self._deriv_tables[var] = (
                np.array(src, dtype=np.intp),
                np.array(dst, dtype=np.intp),
                np.array(mult),
            )
        return self._deriv_tables[var]

    def __repr__(self) -> str:
        return f"JetBasis(num_vars={self.num_vars}, order={self.order})"


@lru_cache(maxsize=None)
def basis(num_vars: int, order: int) -> JetBasis:
    return JetBasis(num_vars, order)


def _as_multi_index(idx: Sequence[int], num_vars: int) -> tuple[int, ...]:
    idx = tuple(int(i) for i in idx)
    if len(idx) != num_vars or any(i < 0 for i in idx):
        raise ValueError(f"multi-index {idx} does not match {num_vars} variables")
    return idx


class MultiJet:
    """Truncated Taylor expansion with optional batch axes."""

    __slots__ = ("basis", "coeffs")
    # make numpy defer to our reflected operators (ndarray * jet -> jet)
    __array_ufunc__ = None

    def __init__(self, jet_basis: JetBasis, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[-1:] != (jet_basis.size,):
            raise ValueError(
                f"coefficient array shape {coeffs.shape} does not match basis size {jet_basis.size}"
            )
        self.basis = jet_basis
        self.coeffs = coeffs

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, num_vars: int, order: int = DEFAULT_ORDER) -> "MultiJet":
        b = basis(num_vars, order)
        value = np.asarray(value, dtype=float)
        coeffs = np.zeros(value.shape + (b.size,))
        coeffs[..., 0] = value
        return cls(b, coeffs)

    @classmethod
    def variable(cls, value, index: int, num_vars: int, order: int = DEFAULT_ORDER) -> "MultiJet":
        if not 0 <= index < num_vars:
            raise IndexError(f"variable index {index} out of range for {num_vars} variables")
        jet = cls.constant(value, num_vars, order)
        if order >= 1:
            e = [0] * num_vars
            e[index] = 1
            jet.coeffs[..., jet.basis.index[tuple(e)]] = 1.0
        return jet

    @staticmethod
    def stack(jets: Sequence["MultiJet"], axis: int = 0) -> "MultiJet":
        order = min(j.order for j in jets)
        nv = jets[0].num_vars
        if any(j.num_vars != nv for j in jets):
            raise ValueError("cannot stack jets over different variable counts")
        b = basis(nv, order)
        arrays = [j.coeffs[..., : b.size] for j in jets]
        axis = axis if axis >= 0 else axis - 1
        return MultiJet(b, np.stack(arrays, axis=axis))

    # -- properties -------------------------------------------------------
    @property
    def num_vars(self) -> int:
        return self.basis.num_vars

    @property
    def order(self) -> int:
        return self.basis.order

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[:-1]

    @property
    def value(self):
        v = self.coeffs[..., 0]
        return float(v) if v.ndim == 0 else v.copy()

    def __getitem__(self, item) -> "MultiJet":
        if not isinstance(item, tuple):
            item = (item,)
        return MultiJet(self.basis, self.coeffs[item + (Ellipsis, slice(None))])

    def __len__(self) -> int:
        return self.shape[0]

    def __repr__(self) -> str:
        return f"MultiJet(num_vars={self.num_vars}, order={self.order}, shape={self.shape}, value={self.value})"

    # -- structural ops ---------------------------------------------------
    def truncate(self, order: int) -> "MultiJet":
        if order > self.order:
            raise ValueError(f"cannot raise jet order from {self.order} to {order}")
        if order == self.order:
            return self
        b = basis(self.num_vars, order)
        return MultiJet(b, self.coeffs[..., : b.size])

    def deriv(self, var: int) -> "MultiJet":
        """Jet of the partial derivative in variable ``var`` (one order lower)."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        if not 0 <= var < self.num_vars:
            raise IndexError(f"variable index {var} out of range")
        src, dst, mult = self.basis.derivative_table(var)
        lower = basis(self.num_vars, self.order - 1)
        out = np.zeros(self.shape + (lower.size,))
        out[..., dst] = self.coeffs[..., src] * mult
        return MultiJet(lower, out)

    def coefficient(self, idx: Sequence[int]):
        idx = _as_multi_index(idx, self.num_vars)
        if sum(idx) > self.order:
            raise ValueError(f"multi-index {idx} exceeds jet order {self.order}")
        return self.coeffs[..., self.basis.index[idx]]

    def derivative(self, idx: Sequence[int]):
        """Partial derivative value for a multi-index (coefficient times factorial)."""
        idx = _as_multi_index(idx, self.num_vars)
        out = self.coefficient(idx) * self.basis.factorial[self.basis.index[idx]]
        return float(out) if np.ndim(out) == 0 else out

    def gradient(self) -> np.ndarray:
        """First derivatives, shape batch + (num_vars,)."""
        b = self.basis
        idx = [b.index[tuple(int(i == v) for i in range(b.num_vars))] for v in range(b.num_vars)]
        return self.coeffs[..., idx].copy()

    def hessian(self) -> np.ndarray:
        """Second derivatives, shape batch + (num_vars, num_vars)."""
        if self.order < 2:
            raise ValueError("hessian needs an order >= 2 jet")
        nv = self.num_vars
        out = np.empty(self.shape + (nv, nv))
        for i in range(nv):
            for j in range(i, nv):
                e = [0] * nv
                e[i] += 1
                e[j] += 1
                val = self.derivative(e)
                out[..., i, j] = val
                out[..., j, i] = val
        return out

    def sum(self, axis=None) -> "MultiJet":
        nb = len(self.shape)
        if axis is None:
            axis = tuple(range(nb))
        elif isinstance(axis, int):
            axis = (axis % nb,)
        else:
            axis = tuple(a % nb for a in axis)
        return MultiJet(self.basis, self.coeffs.sum(axis=axis))

    def weighted_sum(self, weights: np.ndarray) -> "MultiJet":
        """Contract the leading batch axes against ``weights``."""
        w = np.asarray(weights, dtype=float)
        return MultiJet(self.basis, np.tensordot(w, self.coeffs, axes=w.ndim))

    def embed(self, target: JetBasis, var_map: Sequence[int]) -> "MultiJet":
        """Re-express in a larger variable space; source var k becomes var_map[k]."""
        if target.order < self.order:
            src = self.truncate(target.order)
        else:
            src = self
        out = np.zeros(src.shape + (target.size,))
        for k, m in enumerate(src.basis.monomials):
            e = [0] * target.num_vars
            for v, p in enumerate(m):
                e[var_map[v]] += p
            out[..., target.index[tuple(e)]] = src.coeffs[..., k]
        return MultiJet(target, out)

    # -- arithmetic -------------------------------------------------------
    def _align(self, other: "MultiJet") -> tuple[JetBasis, np.ndarray, np.ndarray]:
        if other.num_vars != self.num_vars:
            raise ValueError(
                f"jets over {self.num_vars} and {other.num_vars} variables cannot be combined"
            )
        if other.order == self.order:
            return self.basis, self.coeffs, other.coeffs
        b = self.basis if self.order < other.order else other.basis
        return b, self.coeffs[..., : b.size], other.coeffs[..., : b.size]

    def _scalar_shift(self, s, sign: float = 1.0) -> "MultiJet":
        s = np.asarray(s, dtype=float)
        shape = np.broadcast_shapes(self.shape, s.shape)
        out = np.broadcast_to(self.coeffs * sign, shape + (self.basis.size,)).copy()
        out[..., 0] += s
        return MultiJet(self.basis, out)

    def __add__(self, other):
        if isinstance(other, MultiJet):
            b, a, c = self._align(other)
            return MultiJet(b, a + c)
        return self._scalar_shift(other)

    __radd__ = __add__

    def __neg__(self):
        return MultiJet(self.basis, -self.coeffs)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, MultiJet):
            b, a, c = self._align(other)
            return MultiJet(b, a - c)
        return self._scalar_shift(-np.asarray(other, dtype=float))

    def __rsub__(self, other):
        return self._scalar_shift(other, sign=-1.0)

    def __mul__(self, other):
        if isinstance(other, MultiJet):
            b, a, c = self._align(other)
            return MultiJet(b, b.multiply(a, c))
        s = np.asarray(other, dtype=float)
        return MultiJet(self.basis, self.coeffs * s[..., None])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, MultiJet):
            return self * reciprocal(other)
        s = np.asarray(other, dtype=float)
        if np.any(s == 0):
            raise SingularEvaluation("division by zero", value=0.0)
        return MultiJet(self.basis, self.coeffs / s[..., None])

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, p):
        if isinstance(p, MultiJet):
            raise TypeError("jet exponents are not supported; exponent must be a constant")
        return jet_pow(self, p)


# -- univariate composition -------------------------------------------------

def _compose(a: MultiJet, taylor: np.ndarray) -> MultiJet:
    """Return sum_k taylor[k] * (a - a0)^k; taylor has shape (order+1,) + batch."""
    h = MultiJet(a.basis, a.coeffs.copy())
    h.coeffs[..., 0] = 0.0
    out = np.zeros(np.broadcast_shapes(a.shape, taylor.shape[1:]) + (a.basis.size,))
    out[..., 0] = taylor[0]
    power = None
    for k in range(1, a.order + 1):
        power = h if power is None else power * h
        out = out + power.coeffs * np.asarray(taylor[k])[..., None]
    if not np.all(np.isfinite(out)):
        raise SingularEvaluation("non-finite jet coefficient", value=float(np.min(np.abs(a.coeffs[..., 0]))))
    return MultiJet(a.basis, out)


def _require_positive(a: MultiJet, name: str) -> np.ndarray:
    v = a.coeffs[..., 0]
    if np.any(~(v > 0)):
        bad = np.asarray(v)[~(np.asarray(v) > 0)].ravel()[0]
        raise SingularEvaluation(f"{name} of non-positive value {bad:.17g}", value=float(bad))
    return v


def reciprocal(a: MultiJet) -> MultiJet:
    v = a.coeffs[..., 0]
    if np.any(v == 0):
        raise SingularEvaluation("division by a jet with zero value", value=0.0)
    ks = np.arange(a.order + 1).reshape((-1,) + (1,) * v.ndim)
    taylor = (-1.0) ** ks / v ** (ks + 1)
    return _compose(a, taylor)


def jet_pow(a: MultiJet, p) -> MultiJet:
    p = float(p)
    if p.is_integer():
        k = int(p)
        if k < 0:
            return reciprocal(jet_pow(a, -k))
        result = MultiJet.constant(np.ones(a.shape), a.num_vars, a.order)
        base = a
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result
    v = _require_positive(a, f"pow(., {p})")
    binom = 1.0
    coeffs = []
    for k in range(a.order + 1):
        coeffs.append(binom * v ** (p - k))
        binom *= (p - k) / (k + 1)
    taylor = np.array(coeffs)
    return _compose(a, taylor)


def jet_sqrt(a: MultiJet) -> MultiJet:
    return jet_pow(a, 0.5)


def jet_exp(a: MultiJet) -> MultiJet:
    v = a.coeffs[..., 0]
    e = np.exp(v)
    taylor = np.array([e / math.factorial(k) for k in range(a.order + 1)])
    return _compose(a, taylor)


def jet_log(a: MultiJet) -> MultiJet:
    v = _require_positive(a, "ln")
    coeffs = [np.log(v)]
    for k in range(1, a.order + 1):
        coeffs.append((-1.0) ** (k + 1) / (k * v**k))
    return _compose(a, np.array(coeffs))


def jet_sin(a: MultiJet) -> MultiJet:
    v = a.coeffs[..., 0]
    cycle = [np.sin(v), np.cos(v), -np.sin(v), -np.cos(v)]
    return _compose(a, np.array([cycle[k % 4] / math.factorial(k) for k in range(a.order + 1)]))


def jet_cos(a: MultiJet) -> MultiJet:
    v = a.coeffs[..., 0]
    cycle = [np.cos(v), -np.sin(v), -np.cos(v), np.sin(v)]
    return _compose(a, np.array([cycle[k % 4] / math.factorial(k) for k in range(a.order + 1)]))


JET_FUNCTIONS: dict[str, Callable[[MultiJet], MultiJet]] = {
    "sqrt": jet_sqrt,
    "exp": jet_exp,
    "ln": jet_log,
    "sin": jet_sin,
    "cos": jet_cos,
}


def jet_function(a: MultiJet, f: str, param: float | None = None) -> MultiJet:
    """Apply one of sqrt, exp, ln, sin, cos, pow_const to a jet."""
    if f == "pow_const":
        if param is None:
            raise ValueError("pow_const needs an exponent")
        return jet_pow(a, param)
    try:
        fn = JET_FUNCTIONS[f]
    except KeyError:
        raise ValueError(f"unsupported jet function {f!r}") from None
    return fn(a)


def jet_arithmetic(a: MultiJet, b: MultiJet, op: str) -> MultiJet:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown jet operation {op!r}")


# -- seeds --------------------------------------------------------------------

@dataclass(frozen=True)
class SeedPoint:
    """Base values of the jet variables; only ``active`` ones carry a direction."""

    values: tuple[float, ...]
    active: frozenset[int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.active is not None:
            object.__setattr__(self, "active", frozenset(self.active))

    @property
    def num_vars(self) -> int:
        return len(self.values)

    def is_active(self, index: int) -> bool:
        return self.active is None or index in self.active


def lift_variable(point: SeedPoint, index: int, order: int = DEFAULT_ORDER) -> MultiJet:
    if not 0 <= index < point.num_vars:
        raise IndexError(f"variable index {index} out of range for {point.num_vars} variables")
    if point.is_active(index):
        return MultiJet.variable(point.values[index], index, point.num_vars, order)
    return MultiJet.constant(point.values[index], point.num_vars, order)


def lift_all(point: SeedPoint, order: int = DEFAULT_ORDER) -> list[MultiJet]:
    return [lift_variable(point, k, order) for k in range(point.num_vars)]


def extract_derivative(a: MultiJet, idx: Sequence[int]):
    return a.derivative(idx)


# -- finite-difference auditor (test fixture) ---------------------------------

def finite_difference_audit(field: Callable[[np.ndarray], float], point: SeedPoint | Sequence[float],
                            idx: Sequence[int]) -> float:
    """Central-difference estimate of a partial derivative of order <= 2.

    One Richardson level (h, h/2).  Steps scale with max(1, |coordinate|).
    """
    values = np.array(point.values if isinstance(point, SeedPoint) else point, dtype=float)
    idx = _as_multi_index(idx, len(values))
    order = sum(idx)
    if order == 0:
        return float(field(values))
    if order > 2:
        raise ValueError("finite_difference_audit supports derivatives of order <= 2")
    dirs = [v for v, p in enumerate(idx) for _ in range(p)]
    # first order: eps^(1/3); second order: eps^(1/6) balances O(h^4) truncation against eps/h^2
    base = _EPS ** (1.0 / 3.0) if order == 1 else _EPS ** (1.0 / 6.0)

    def stencil(h: np.ndarray) -> float:
        def at(shift):
            return float(field(values + shift))
        if order == 1:
            e = np.zeros_like(values)
            e[dirs[0]] = h[dirs[0]]
            return (at(e) - at(-e)) / (2 * h[dirs[0]])
        i, j = dirs
        if i == j:
            e = np.zeros_like(values)
            e[i] = h[i]
            return (at(e) - 2 * at(np.zeros_like(values)) + at(-e)) / h[i] ** 2
        ei = np.zeros_like(values)
        ej = np.zeros_like(values)
        ei[i] = h[i]
        ej[j] = h[j]
        return (at(ei + ej) - at(ei - ej) - at(-ei + ej) + at(-ei - ej)) / (4 * h[i] * h[j])

    h = base * np.maximum(1.0, np.abs(values))
    coarse = stencil(h)
    fine = stencil(h / 2)
    return (4 * fine - coarse) / 3


# -- matrices of jets -------------------------------------------------------------
# A jet matrix is a MultiJet whose two leading batch axes are the matrix axes.

def as_jet(v, like: MultiJet) -> MultiJet:
    """Promote a real or array to a constant jet in ``like``'s basis."""
    if isinstance(v, MultiJet):
        return v
    value = np.asarray(v, dtype=float)
    coeffs = np.zeros(value.shape + (like.basis.size,))
    coeffs[..., 0] = value
    return MultiJet(like.basis, coeffs)


def jet_matmul(a: MultiJet, b: MultiJet) -> MultiJet:
    return (a[:, :, None] * b[None, :, :]).sum(axis=1)


def jet_matvec(a: MultiJet, v: MultiJet) -> MultiJet:
    return (a * v[None, :]).sum(axis=1)


def _const_left(c: np.ndarray, j: MultiJet) -> MultiJet:
    return MultiJet(j.basis, np.einsum("ij,jk...->ik...", c, j.coeffs))


def _const_right(j: MultiJet, c: np.ndarray) -> MultiJet:
    return MultiJet(j.basis, np.einsum("ij...,jk->ik...", j.coeffs, c))


def jet_inv(a: MultiJet) -> MultiJet:
    """Inverse of a jet matrix via the Neumann series around its value."""
    a0 = a.coeffs[..., 0]
    try:
        a0_inv = np.linalg.inv(a0)
    except np.linalg.LinAlgError as exc:
        raise SingularEvaluation("singular matrix", value=0.0) from exc
    h = MultiJet(a.basis, a.coeffs.copy())
    h.coeffs[..., 0] = 0.0
    x = -_const_left(a0_inv, h)
    n = a0.shape[0]
    total = MultiJet.constant(np.eye(n), a.num_vars, a.order)
    term = total
    for _ in range(a.order):
        term = jet_matmul(term, x)
        total = total + term
    return _const_right(total, a0_inv)


def jet_det(a: MultiJet) -> MultiJet:
    from itertools import permutations

    n = a.shape[0]
    total = None
    for perm in permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = a[0, perm[0]]
        for i in range(1, n):
            term = term * a[i, perm[i]]
        term = term if inversions % 2 == 0 else -term
        total = term if total is None else total + term
    return total
