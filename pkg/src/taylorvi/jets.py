"""Truncated Taylor series with first-order dual parts.

A :class:`Jet` stores the coefficients of a truncated power series

    a(t) = a_0 + a_1 t + ... + a_K t^K

where every coefficient is a first-order dual number: a value together
with its partial derivatives with respect to ``P`` seed directions.  The
coefficient array has shape ``batch + (K + 1, 1 + P)``; column ``0`` holds
values, columns ``1:`` hold partials.  Leading batch axes broadcast like
numpy arrays, so a vector-valued series of dimension ``n`` is simply a
jet with batch shape ``(..., n)``.

Arithmetic is exact truncated series algebra.  Elementary functions use
the usual differential recurrences, so nothing is ever expanded beyond
degree ``K``.

The module-level functions (:func:`sin`, :func:`cos`, :func:`exp`,
:func:`log`, :func:`power`, :func:`sqrt`, :func:`inv_sqrt`, :func:`stack`,
...) dispatch on their argument: they accept jets as well as plain numpy
values.  Vector fields written with them can therefore be evaluated on
numbers and on series alike, which is what :func:`prolong` relies on.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from numbers import Number
from typing import Optional

import numpy as np

__all__ = [
    "Jet",
    "SingularSeriesError",
    "SeriesDomainError",
    "TaylorCoeffs",
    "series_arith",
    "series_elem",
    "sin",
    "cos",
    "exp",
    "log",
    "power",
    "sqrt",
    "inv_sqrt",
    "stack",
    "reshape_last",
    "matvec",
    "prolong",
    "eval_state",
    "derivatives",
]


class SingularSeriesError(ZeroDivisionError):
    """Division by a series whose constant term vanishes."""


class SeriesDomainError(ValueError):
    """An elementary function was applied outside its domain."""


# --------------------------------------------------------------------------
# dual-number helpers on arrays of shape (..., 1 + P)


def _dmul(x, y):
    out = np.empty(np.broadcast_shapes(x.shape, y.shape), dtype=np.result_type(x, y))
    x0 = x[..., :1]
    y0 = y[..., :1]
    out[..., :1] = x0 * y0
    out[..., 1:] = x0 * y[..., 1:] + x[..., 1:] * y0
    return out


def _ddiv(x, y):
    out = np.empty(np.broadcast_shapes(x.shape, y.shape), dtype=np.result_type(x, y))
    y0 = y[..., :1]
    r0 = x[..., :1] / y0
    out[..., :1] = r0
    out[..., 1:] = (x[..., 1:] - r0 * y[..., 1:]) / y0
    return out


def _dfun(x, g0, g1):
    """Apply a scalar function with value ``g0`` and slope ``g1`` at ``x[...,0]``."""
    out = np.empty_like(x, dtype=np.result_type(x, g0, g1))
    out[..., 0] = g0
    out[..., 1:] = g1[..., None] * x[..., 1:]
    return out


@lru_cache(maxsize=None)
def _toeplitz_index(K):
    k = np.arange(K + 1)
    diff = k[:, None] - k[None, :]
    return np.where(diff >= 0, diff, 0), diff >= 0


def _toeplitz(a0):
    """Lower-triangular Toeplitz matrix T[k, j] = a0[k - j] along the last axis."""
    idx, mask = _toeplitz_index(a0.shape[-1] - 1)
    return a0[..., idx] * mask


def _conv_tail(a, y, k, weights):
    """sum_{j=1..k} weights[j-1] * a_j * y_{k-j} for dual coefficients."""
    aj = a[..., 1 : k + 1, :] * weights[:, None]
    yj = y[..., k - 1 :: -1, :] if k > 0 else y[..., :0, :]
    return _dmul(aj, yj).sum(axis=-2)


def _real(x):
    return np.real(x)


def _pad_seeds(c, P):
    if c.shape[-1] == 1 + P:
        return c
    if c.shape[-1] != 1:
        raise ValueError("jets carry different numbers of seed directions")
    out = np.zeros(c.shape[:-1] + (1 + P,), dtype=c.dtype)
    out[..., :1] = c
    return out


def _align(a, b):
    P = max(a.shape[-1], b.shape[-1]) - 1
    return _pad_seeds(a, P), _pad_seeds(b, P)


# --------------------------------------------------------------------------


class Jet:
    """Truncated power series whose coefficients carry first-order partials."""

    __slots__ = ("c",)
    __array_priority__ = 100.0

    def __init__(self, coeffs):
        c = np.asarray(coeffs)
        if c.ndim < 2:
            raise ValueError("jet coefficients need shape (..., K+1, 1+P)")
        if not np.iscomplexobj(c):
            c = c.astype(float, copy=False)
        self.c = c

    # construction -------------------------------------------------------
    @classmethod
    def from_coeffs(cls, coeffs, nseeds=0):
        """Build a jet from plain series coefficients (last axis = powers of t)."""
        a = np.asarray(coeffs)
        c = np.zeros(a.shape + (1 + nseeds,), dtype=np.result_type(a, float))
        c[..., 0] = a
        return cls(c)

    @classmethod
    def constant(cls, value, degree, nseeds=0):
        v = np.asarray(value)
        c = np.zeros(v.shape + (degree + 1, 1 + nseeds), dtype=np.result_type(v, float))
        c[..., 0, 0] = v
        return cls(c)

    @classmethod
    def variable(cls, value, degree):
        """Identity series ``value + t`` (used in tests and examples)."""
        v = np.asarray(value, dtype=float)
        c = np.zeros(v.shape + (degree + 1, 1))
        c[..., 0, 0] = v
        if degree >= 1:
            c[..., 1, 0] = 1.0
        return cls(c)

    # properties ---------------------------------------------------------
    @property
    def degree(self):
        return self.c.shape[-2] - 1

    @property
    def nseeds(self):
        return self.c.shape[-1] - 1

    @property
    def shape(self):
        return self.c.shape[:-2]

    @property
    def coeffs(self):
        """Series values, shape ``batch + (K+1,)``."""
        return self.c[..., 0]

    @property
    def partials(self):
        """Seed partials, shape ``batch + (K+1, P)``."""
        return self.c[..., 1:]

    def __repr__(self):
        return f"Jet(degree={self.degree}, shape={self.shape}, coeffs={self.coeffs!r})"

    def __len__(self):
        return self.shape[0]

    # batch manipulation -------------------------------------------------
    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key):
            key = key + (slice(None), slice(None))
        else:
            key = key + (Ellipsis, slice(None), slice(None))
        return Jet(self.c[key])

    def sum(self, axis=-1):
        ax = axis - 2 if axis < 0 else axis
        return Jet(self.c.sum(axis=ax))

    def take(self, indices, axis=-1):
        ax = axis - 2 if axis < 0 else axis
        return Jet(np.take(self.c, indices, axis=ax))

    def _lift(self, other):
        """Coefficient array for ``other`` compatible with ``self``."""
        if isinstance(other, Jet):
            if other.degree != self.degree:
                raise ValueError("jets must share the truncation degree")
            return other.c
        v = np.asarray(other)
        c = np.zeros(v.shape + (self.degree + 1, self.nseeds + 1), dtype=np.result_type(v, float))
        c[..., 0, 0] = v
        return c

    # arithmetic ---------------------------------------------------------
    def __neg__(self):
        return Jet(-self.c)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b = _align(self.c, self._lift(other))
            return Jet(a + b)
        v = np.asarray(other)
        out = self.c + np.zeros(v.shape + (1, 1), dtype=v.dtype)
        out = out.copy()
        out[..., 0, 0] += v
        return Jet(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            v = np.asarray(other)
            return Jet(self.c * v[..., None, None])
        a, b = _align(self.c, self._lift(other))
        out = _toeplitz(a[..., 0]) @ b
        if a.shape[-1] > 1:
            out[..., 1:] += _toeplitz(b[..., 0]) @ a[..., 1:]
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            v = np.asarray(other)
            if np.any(v == 0):
                raise SingularSeriesError("division by zero constant")
            return Jet(self.c / v[..., None, None])
        return _series_div(*_align(self.c, self._lift(other)))

    def __rtruediv__(self, other):
        return _series_div(*_align(self._lift(other), self.c))

    def __pow__(self, alpha):
        return power(self, alpha)

    # evaluation ---------------------------------------------------------
    def __call__(self, t):
        """Evaluate the value series at ``t`` (Horner)."""
        a = self.coeffs
        out = a[..., -1]
        for k in range(self.degree - 1, -1, -1):
            out = out * t + a[..., k]
        return out


# --------------------------------------------------------------------------
# series kernels


def _series_div(a, b):
    b0 = b[..., 0, :]
    if np.any(b0[..., 0] == 0):
        raise SingularSeriesError("series divisor has zero constant term")
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.zeros(shape, dtype=np.result_type(a, b))
    a = np.broadcast_to(a, shape)
    K = shape[-2] - 1
    ones = np.ones(K)
    for k in range(K + 1):
        num = a[..., k, :] - _conv_tail(b, out, k, ones[:k])
        out[..., k, :] = _ddiv(num, b0)
    return Jet(out)


def _exp(a):
    K = a.shape[-2] - 1
    out = np.zeros_like(a)
    e0 = np.exp(a[..., 0, 0])
    out[..., 0, :] = _dfun(a[..., 0, :], e0, e0)
    for k in range(1, K + 1):
        w = np.arange(1, k + 1) / k
        out[..., k, :] = _conv_tail(a, out, k, w)
    return out


def _sincos(a):
    K = a.shape[-2] - 1
    s = np.zeros_like(a)
    c = np.zeros_like(a)
    x0 = a[..., 0, 0]
    s0, c0 = np.sin(x0), np.cos(x0)
    s[..., 0, :] = _dfun(a[..., 0, :], s0, c0)
    c[..., 0, :] = _dfun(a[..., 0, :], c0, -s0)
    for k in range(1, K + 1):
        w = np.arange(1, k + 1) / k
        s[..., k, :] = _conv_tail(a, c, k, w)
        c[..., k, :] = -_conv_tail(a, s, k, w)
    return s, c


def _log(a):
    x0 = a[..., 0, 0]
    if np.any(_real(x0) <= 0):
        raise SeriesDomainError("log requires a positive constant term")
    K = a.shape[-2] - 1
    out = np.zeros_like(a)
    a0 = a[..., 0, :]
    out[..., 0, :] = _dfun(a0, np.log(x0), 1.0 / x0)
    for k in range(1, K + 1):
        # k a0 l_k = k a_k - sum_{j=1}^{k-1} j l_j a_{k-j}
        lj = out[..., 1:k, :] * (np.arange(1, k) / k)[:, None]
        tail = _dmul(lj, a[..., k - 1 : 0 : -1, :]).sum(axis=-2)
        out[..., k, :] = _ddiv(a[..., k, :] - tail, a0)
    return out


def _pow(a, alpha):
    x0 = a[..., 0, 0]
    if np.any(_real(x0) <= 0):
        raise SeriesDomainError(f"power {alpha} requires a positive constant term")
    K = a.shape[-2] - 1
    out = np.zeros_like(a)
    a0 = a[..., 0, :]
    y0 = x0**alpha
    out[..., 0, :] = _dfun(a0, y0, alpha * y0 / x0)
    for k in range(1, K + 1):
        j = np.arange(1, k + 1)
        w = (alpha * j - (k - j)) / k
        out[..., k, :] = _ddiv(_conv_tail(a, out, k, w), a0)
    return out


# --------------------------------------------------------------------------
# dispatching elementary functions


def sin(x):
    if isinstance(x, Jet):
        return Jet(_sincos(x.c)[0])
    return np.sin(x)


def cos(x):
    if isinstance(x, Jet):
        return Jet(_sincos(x.c)[1])
    return np.cos(x)


def exp(x):
    if isinstance(x, Jet):
        return Jet(_exp(x.c))
    return np.exp(x)


def log(x):
    if isinstance(x, Jet):
        return Jet(_log(x.c))
    return np.log(x)


def power(x, alpha):
    """``x ** alpha``; integer exponents use repeated multiplication."""
    if not isinstance(x, Jet):
        return np.asarray(x) ** alpha
    if isinstance(alpha, (int, np.integer)) or (
        isinstance(alpha, Number) and float(alpha).is_integer() and alpha >= 0
    ):
        n = int(alpha)
        if n < 0:
            return 1.0 / power(x, -n)
        result = Jet.constant(np.ones(x.shape), x.degree, x.nseeds)
        base = x
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result
    return Jet(_pow(x.c, float(alpha)))


def sqrt(x):
    if isinstance(x, Jet):
        return Jet(_pow(x.c, 0.5))
    return np.sqrt(x)


def inv_sqrt(x):
    if isinstance(x, Jet):
        return Jet(_pow(x.c, -0.5))
    return 1.0 / np.sqrt(x)


def stack(items, axis=-1):
    """Stack scalars/jets along a new batch axis."""
    if any(isinstance(it, Jet) for it in items):
        ref = next(it for it in items if isinstance(it, Jet))
        cs = [it.c if isinstance(it, Jet) else ref._lift(it) for it in items]
        P = max(c.shape[-1] for c in cs) - 1
        cs = np.broadcast_arrays(*[_pad_seeds(c, P) for c in cs])
        ax = axis - 2 if axis < 0 else axis
        return Jet(np.stack(cs, axis=ax))
    return np.stack(np.broadcast_arrays(*items), axis=axis)


def reshape_last(x, shape):
    """Reshape the last batch axis into ``shape``."""
    if isinstance(x, Jet):
        return Jet(x.c.reshape(x.c.shape[:-3] + tuple(shape) + x.c.shape[-2:]))
    x = np.asarray(x)
    return x.reshape(x.shape[:-1] + tuple(shape))


def matvec(A, x, axis=-1):
    """Contract a batch axis of ``x`` with the numeric matrix ``A``."""
    A = np.asarray(A)
    if isinstance(x, Jet):
        ax = axis - 2 if axis < 0 else axis
        c = np.moveaxis(x.c, ax, -1) @ A.T
        return Jet(np.moveaxis(c, -1, ax))
    x = np.asarray(x)
    return np.moveaxis(np.moveaxis(x, axis, -1) @ A.T, -1, axis)


# --------------------------------------------------------------------------
# spec-style entry points


_OPS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
}


def series_arith(a: Jet, b: Jet, op: str) -> Jet:
    """Binary truncated-series operation ``op`` in {add, sub, mul, div}."""
    if a.degree != b.degree:
        raise ValueError("series must share the truncation degree")
    try:
        return _OPS[op](a, b)
    except KeyError:
        raise ValueError(f"unknown series operation {op!r}") from None


def series_elem(a: Jet, fn: str, alpha: Optional[float] = None) -> Jet:
    """Apply an elementary function by name: sin, cos, exp, ln, pow, sqrt, inv_sqrt."""
    table = {
        "sin": sin,
        "cos": cos,
        "exp": exp,
        "ln": log,
        "log": log,
        "sqrt": sqrt,
        "inv_sqrt": inv_sqrt,
    }
    if fn == "pow":
        if alpha is None:
            raise ValueError("pow needs an exponent")
        return power(a, alpha)
    try:
        return table[fn](a)
    except KeyError:
        raise ValueError(f"unknown elementary function {fn!r}") from None


# --------------------------------------------------------------------------
# prolongation of a second-order field


@dataclass
class TaylorCoeffs:
    """Normalized Taylor coefficients ``Q[..., i, k] = q_i^(k)(0) / k!``.

    ``dQdq0[..., k, i, j]`` and ``dQdv0[..., k, i, j]`` are the partials of
    ``Q[..., i, k]`` with respect to ``q0[j]`` and ``v0[j]``.
    """

    Q: np.ndarray
    dQdq0: Optional[np.ndarray] = None
    dQdv0: Optional[np.ndarray] = None

    @property
    def dim(self):
        return self.Q.shape[-2]

    @property
    def order(self):
        return self.Q.shape[-1] - 1

    def derivative(self, k):
        """Unnormalized ``q^(k)(0)``."""
        return self.Q[..., k] * factorial(k)


def prolong(system, q0, v0, K: int, with_sensitivities: bool = False) -> TaylorCoeffs:
    """Taylor coefficients of the solution of ``q'' = f(q, q')`` through degree ``K``.

    ``system`` is anything with a ``field(q, v)`` method written with the
    dispatching functions of this module (a bare callable also works).
    """
    if K < 1:
        raise ValueError("prolongation degree must be at least 1")
    field = getattr(system, "field", system)
    q0 = np.asarray(q0)
    v0 = np.asarray(v0)
    dtype = np.result_type(q0, v0, float)
    n = q0.shape[-1]
    batch = np.broadcast_shapes(q0.shape, v0.shape)
    P = 2 * n if with_sensitivities else 0
    c = np.zeros(batch + (K + 1, 1 + P), dtype=dtype)
    c[..., 0, 0] = q0
    c[..., 1, 0] = v0
    if with_sensitivities:
        eye = np.eye(n)
        c[..., 0, 1 : n + 1] = eye
        c[..., 1, n + 1 :] = eye

    # f_j needs Q_0..Q_j and V_0..V_j = Q_1..Q_{j+1}; a velocity-free field
    # only needs Q_0..Q_j and so fixes two new coefficients per pass
    velocity_free = getattr(system, "velocity_free", False)
    k_done = 1  # coefficients 0..k_done are final
    while k_done < K:
        d = min(k_done, K - 2)
        qs = Jet(c[..., : d + 1, :])
        vc = np.zeros_like(qs.c)
        vc[..., :d, :] = c[..., 1 : d + 1, :] * np.arange(1, d + 1)[:, None]
        if d + 1 <= K:
            vc[..., d, :] = c[..., d + 1, :] * (d + 1)
        f = field(qs, Jet(vc))
        f = f.c if isinstance(f, Jet) else _constant_field(f, qs)
        valid = min(d, k_done if velocity_free else k_done - 1)
        for j in range(k_done - 1, valid + 1):
            c[..., j + 2, :] = f[..., j, :] / ((j + 2) * (j + 1))
        k_done = valid + 2
    if not with_sensitivities:
        return TaylorCoeffs(c[..., 0])
    part = np.moveaxis(c[..., 1:], -2, -3)  # (..., K+1, n, 2n)
    return TaylorCoeffs(c[..., 0], part[..., : n], part[..., n:])


def _constant_field(f, like):
    """Fields that ignore their input (e.g. a free particle) return plain numbers."""
    arr = np.zeros(like.c.shape, dtype=like.c.dtype)
    arr[..., 0, 0] = np.broadcast_to(np.asarray(f), like.shape)
    return arr


def eval_state(coeffs: TaylorCoeffs, t, pos_order: int):
    """Position summed through ``t^r`` and velocity through ``q^(r+1)``."""
    r = pos_order
    if r > coeffs.order - 1:
        raise ValueError("velocity needs coefficients through order r + 1")
    Q = coeffs.Q
    k = np.arange(r + 2)
    tp = np.asarray(t, dtype=float)[..., None] ** k
    q = (Q[..., : r + 1] * tp[..., : r + 1]).sum(axis=-1)
    v = (Q[..., 1 : r + 2] * k[1:] * tp[..., : r + 1]).sum(axis=-1)
    return q, v


def derivatives(coeffs: TaylorCoeffs) -> np.ndarray:
    """Unnormalized derivatives ``q^(k)(0)``, shape ``(..., n, K+1)``."""
    fac = np.array([factorial(k) for k in range(coeffs.order + 1)], dtype=float)
    return coeffs.Q * fac
