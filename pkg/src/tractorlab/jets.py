"""Truncated multivariate Taylor (jet) arithmetic.

A jet of order k in n variables stores the coefficients c_alpha = d^alpha f /
alpha! for all multi-indices |alpha| <= k, so arithmetic on jets propagates
exact partial derivatives up to order k.  Everything downstream (curvature
tensors, connections, gauge transforms) differentiates through this module.

Values are numpy arrays with a trailing coefficient axis of length
C(n+k, k); `JetAlgebra` owns the index tables and the multiply kernels.  The
`Jet` class is a thin scalar wrapper with operator overloading for use by the
expression evaluator.
"""

from __future__ import annotations

import math
import os
from functools import lru_cache

import numpy as np

MAX_ORDER = 3

if os.environ.get("TRACTORLAB_PURE"):
    from . import _kernels_py as _backend
else:
    try:
        from . import _kernels as _backend
    except ImportError:
        from . import _kernels_py as _backend


def backend_name():
    return "compiled" if _backend.COMPILED else "python"


def set_backend(name):
    """Switch kernel backend ('python' or 'compiled'); returns the old name."""
    global _backend
    old = backend_name()
    if name == "python":
        from . import _kernels_py as mod
    elif name == "compiled":
        from . import _kernels as mod  # ImportError if extension not built
    else:
        raise ValueError(f"unknown backend {name!r}")
    _backend = mod
    return old


class JetError(ValueError):
    pass


class JetDomainError(JetError):
    """Function evaluated outside its domain (div by zero value, ln <= 0, ...)."""


def _multi_indices(n, order):
    """All multi-indices with |alpha| <= order, graded lexicographic.

    The order-k list is a prefix of the order-(k+1) list, so truncation is a
    slice of the coefficient axis.
    """
    out = []
    for total in range(order + 1):
        level = []

        def rec(prefix, remaining, slots):
            if slots == 1:
                level.append(prefix + (remaining,))
                return
            for v in range(remaining, -1, -1):
                rec(prefix + (v,), remaining - v, slots - 1)

        rec((), total, n)
        level.sort(reverse=True)
        out.extend(level)
    return out


class JetAlgebra:
    """Index tables and kernels for jets of fixed dimension and order."""

    def __init__(self, n, order):
        if not 0 <= order <= MAX_ORDER:
            raise JetError(f"jet order must be in 0..{MAX_ORDER}, got {order}")
        if n < 1:
            raise JetError(f"dimension must be positive, got {n}")
        self.n = n
        self.order = order
        self.indices = _multi_indices(n, order)
        self.ncoef = len(self.indices)
        self.index_of = {a: i for i, a in enumerate(self.indices)}
        self._build_mul_table()
        self._build_diff_tables()

    def _build_mul_table(self):
        i_idx, j_idx, k_idx = [], [], []
        for i, a in enumerate(self.indices):
            for j, b in enumerate(self.indices):
                c = tuple(x + y for x, y in zip(a, b))
                k = self.index_of.get(c)
                if k is not None:
                    i_idx.append(i)
                    j_idx.append(j)
                    k_idx.append(k)
        self._i_idx = np.asarray(i_idx, dtype=np.intc)
        self._j_idx = np.asarray(j_idx, dtype=np.intc)
        self._k_idx = np.asarray(k_idx, dtype=np.intc)
        scatter = np.zeros((len(k_idx), self.ncoef))
        scatter[np.arange(len(k_idx)), self._k_idx] = 1.0
        self._scatter = scatter

    def _build_diff_tables(self):
        # d/dx_mu maps an order-k jet onto order-(k-1): the coefficient at
        # beta picks up (beta_mu + 1) * c_{beta + e_mu}.
        self._diff = []
        if self.order == 0:
            return
        lower = _multi_indices(self.n, self.order - 1)
        for mu in range(self.n):
            src = np.empty(len(lower), dtype=np.intp)
            fac = np.empty(len(lower))
            for i, beta in enumerate(lower):
                shifted = tuple(b + (1 if k == mu else 0) for k, b in enumerate(beta))
                src[i] = self.index_of[shifted]
                fac[i] = beta[mu] + 1
            self._diff.append((src, fac))

    # -- constructors -------------------------------------------------------

    def zeros(self, shape=()):
        return np.zeros(tuple(shape) + (self.ncoef,))

    def const(self, value):
        value = np.asarray(value, dtype=float)
        out = self.zeros(value.shape)
        out[..., 0] = value
        return out

    def coord(self, i, point):
        """Jet of the coordinate function x^i at the given point."""
        if not 0 <= i < self.n:
            raise JetError(f"coordinate index {i} out of range for dimension {self.n}")
        out = self.zeros()
        out[0] = point[i]
        if self.order >= 1:
            unit = tuple(1 if k == i else 0 for k in range(self.n))
            out[self.index_of[unit]] = 1.0
        return out

    # -- ring operations ----------------------------------------------------

    def mul(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
        a2 = np.ascontiguousarray(np.broadcast_to(a, shape + (self.ncoef,))).reshape(-1, self.ncoef)
        b2 = np.ascontiguousarray(np.broadcast_to(b, shape + (self.ncoef,))).reshape(-1, self.ncoef)
        out = np.zeros_like(a2)
        _backend.jet_mul2(a2, b2, self._i_idx, self._j_idx, self._k_idx, self._scatter, out)
        return out.reshape(shape + (self.ncoef,))

    def matmul(self, a, b):
        """Contract jet matrices over adjacent axes: (...,r,k,NC)@(...,k,c,NC)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        lead = np.broadcast_shapes(a.shape[:-3], b.shape[:-3])
        r, kdim, c = a.shape[-3], a.shape[-2], b.shape[-2]
        a4 = np.ascontiguousarray(
            np.broadcast_to(a, lead + a.shape[-3:])
        ).reshape(-1, r, kdim, self.ncoef)
        b4 = np.ascontiguousarray(
            np.broadcast_to(b, lead + b.shape[-3:])
        ).reshape(-1, kdim, c, self.ncoef)
        out = np.zeros((a4.shape[0], r, c, self.ncoef))
        _backend.jet_matmul4(a4, b4, self._i_idx, self._j_idx, self._k_idx, self._scatter, out)
        return out.reshape(lead + (r, c, self.ncoef))

    def powi(self, a, k):
        if k < 0:
            return self.powi(self.reciprocal(a), -k)
        out = self.const(np.ones(np.asarray(a).shape[:-1]))
        base = np.asarray(a, dtype=float)
        while k:
            if k & 1:
                out = self.mul(out, base)
            base = self.mul(base, base) if k > 1 else base
            k >>= 1
        return out

    def inv_matrix(self, a):
        """Inverse of a jet-valued matrix (..., m, m, NC) by Newton iteration."""
        a = np.asarray(a, dtype=float)
        m = a.shape[-2]
        x = self.const(np.linalg.inv(self.value(a)))
        ident = self.const(np.eye(m))
        for _ in range(2):  # doubles the correct jet order; exact for order <= 3
            x = self.matmul(x, 2.0 * ident - self.matmul(a, x))
        return x

    # -- analytic functions via Taylor composition --------------------------

    def _compose(self, a, coeff_fn):
        """f(a) = sum_m c_m(a0) abar^m with abar the nilpotent part."""
        a = np.asarray(a, dtype=float)
        a0 = a[..., 0]
        abar = a.copy()
        abar[..., 0] = 0.0
        out = self.zeros(a.shape[:-1])
        power = self.const(np.ones(a.shape[:-1]))
        for m in range(self.order + 1):
            out += coeff_fn(m, a0)[..., None] * power
            if m < self.order:
                power = self.mul(power, abar)
        return out

    def reciprocal(self, a):
        a0 = np.asarray(a)[..., 0]
        if np.any(a0 == 0.0):
            raise JetDomainError(f"division by a jet with zero value (values {a0!r})")
        return self._compose(a, lambda m, x: (-1.0) ** m * x ** (-m - 1))

    def div(self, a, b):
        return self.mul(a, self.reciprocal(b))

    def exp(self, a):
        return self._compose(a, lambda m, x: np.exp(x) / math.factorial(m))

    def log(self, a):
        a0 = np.asarray(a)[..., 0]
        if np.any(a0 <= 0.0):
            raise JetDomainError(f"ln of a jet with non-positive value (values {a0!r})")

        def c(m, x):
            if m == 0:
                return np.log(x)
            return (-1.0) ** (m + 1) * x ** (-m) / m

        return self._compose(a, c)

    def sqrt(self, a):
        a0 = np.asarray(a)[..., 0]
        if np.any(a0 <= 0.0):
            raise JetDomainError(f"sqrt of a jet with non-positive value (values {a0!r})")

        def c(m, x):
            coef = 1.0
            for i in range(m):
                coef *= (0.5 - i)
            return coef / math.factorial(m) * x ** (0.5 - m)

        return self._compose(a, c)

    def sin(self, a):
        return self._compose(a, lambda m, x: np.sin(x + m * np.pi / 2) / math.factorial(m))

    def cos(self, a):
        return self._compose(a, lambda m, x: np.cos(x + m * np.pi / 2) / math.factorial(m))

    # -- structure ----------------------------------------------------------

    def value(self, a):
        return np.asarray(a)[..., 0]

    def truncate(self, a, order):
        """View of the jet truncated to a lower order."""
        if order > self.order:
            raise JetError(f"cannot raise truncation order {self.order} -> {order}")
        return np.asarray(a)[..., : algebra(self.n, order).ncoef]

    def deriv(self, a, mu):
        """d/dx_mu, landing in the order-(k-1) algebra."""
        if self.order == 0:
            raise JetError("cannot differentiate an order-0 jet")
        src, fac = self._diff[mu]
        return np.asarray(a)[..., src] * fac

    def grad(self, a):
        """All first derivatives, stacked on a new leading axis."""
        return np.stack([self.deriv(a, mu) for mu in range(self.n)], axis=0)

    def partial(self, a, alpha):
        """Raw partial derivative d^alpha f (alpha! times the coefficient)."""
        alpha = tuple(int(x) for x in alpha)
        if len(alpha) != self.n:
            raise JetError(f"multi-index length {len(alpha)} != dimension {self.n}")
        if sum(alpha) > self.order:
            raise JetError(f"|alpha|={sum(alpha)} exceeds stored order {self.order}")
        fac = 1.0
        for x in alpha:
            fac *= math.factorial(x)
        return np.asarray(a)[..., self.index_of[alpha]] * fac


@lru_cache(maxsize=None)
def algebra(n, order):
    return JetAlgebra(n, order)


class Jet:
    """Scalar jet with operator overloading (the expression-evaluator type)."""

    __slots__ = ("algebra", "coeffs")
    __array_priority__ = 100  # keep numpy from absorbing Jet in mixed ops

    def __init__(self, alg, coeffs):
        self.algebra = alg
        self.coeffs = np.asarray(coeffs, dtype=float)
        if self.coeffs.shape != (alg.ncoef,):
            raise JetError(f"coefficient vector has shape {self.coeffs.shape}, expected ({alg.ncoef},)")

    @property
    def n(self):
        return self.algebra.n

    @property
    def order(self):
        return self.algebra.order

    @property
    def value(self):
        return float(self.coeffs[0])

    def coefficient(self, alpha):
        return float(self.coeffs[self.algebra.index_of[tuple(alpha)]])

    def partial(self, alpha):
        return float(self.algebra.partial(self.coeffs, alpha))

    def truncate(self, order):
        return Jet(algebra(self.n, order), self.algebra.truncate(self.coeffs, order))

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.algebra is not self.algebra:
                raise JetError("operands belong to different jet algebras")
            return other.coeffs
        return self.algebra.const(float(other))

    def __add__(self, other):
        return Jet(self.algebra, self.coeffs + self._coerce(other))

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.algebra, -self.coeffs)

    def __sub__(self, other):
        return Jet(self.algebra, self.coeffs - self._coerce(other))

    def __rsub__(self, other):
        return Jet(self.algebra, self._coerce(other) - self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Jet(self.algebra, self.coeffs * other)
        return Jet(self.algebra, self.algebra.mul(self.coeffs, self._coerce(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return Jet(self.algebra, self.coeffs / other)
        return Jet(self.algebra, self.algebra.div(self.coeffs, self._coerce(other)))

    def __rtruediv__(self, other):
        return Jet(self.algebra, self.algebra.div(self._coerce(other), self.coeffs))

    def __pow__(self, k):
        if not isinstance(k, int):
            raise JetError("jet exponent must be an integer")
        return Jet(self.algebra, self.algebra.powi(self.coeffs, k))

    def __repr__(self):
        return f"Jet(n={self.n}, order={self.order}, value={self.value:.6g})"


def lift_constant(c, n, order):
    alg = algebra(n, order)
    return Jet(alg, alg.const(float(c)))


def lift_coordinate(i, point, order):
    point = np.asarray(point, dtype=float)
    alg = algebra(len(point), order)
    return Jet(alg, alg.coord(i, point))


def exp(j: Jet) -> Jet:
    return Jet(j.algebra, j.algebra.exp(j.coeffs))


def log(j: Jet) -> Jet:
    return Jet(j.algebra, j.algebra.log(j.coeffs))


def sqrt(j: Jet) -> Jet:
    return Jet(j.algebra, j.algebra.sqrt(j.coeffs))


def sin(j: Jet) -> Jet:
    return Jet(j.algebra, j.algebra.sin(j.coeffs))


def cos(j: Jet) -> Jet:
    return Jet(j.algebra, j.algebra.cos(j.coeffs))
