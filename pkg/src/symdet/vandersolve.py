"""Error-controlled Vandermonde interpolation.

Coefficients of a polynomial with per-variable degree bounds ``d`` are
recovered from its values on a tensor grid.  The Kronecker-structured system
``(V_1 ⊗ ... ⊗ V_k) vec(a) = vec(F)`` is solved one axis at a time with the
Björck–Pereyra algorithm, each 1-D solve costing O(d^2).

If every value is known to within ``eps = 0.5 * (lam/2) ** sum(d)``, where
``lam`` is the smallest node gap, the coefficient errors stay below 0.5, so
the exact integer coefficients follow by rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .polycore import precision_context, to_bigfloat

UNSAFE_RESIDUAL = Fraction(1, 4)


class SingularNodesError(ValueError):
    """Interpolation nodes are not pairwise distinct."""


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (int, float)):
        return Fraction(x)
    if isinstance(x, type(mpfr(0))):
        n, d = x.as_integer_ratio()
        return Fraction(int(n), int(d))
    return Fraction(x)


def is_dyadic(x: Fraction) -> bool:
    d = x.denominator
    return d & (d - 1) == 0


@dataclass(frozen=True)
class NodeAxis:
    nodes: tuple[Fraction, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.nodes, self.nodes[1:])):
            raise SingularNodesError("axis nodes must be strictly increasing")

    @property
    def spacing(self) -> Fraction | None:
        """Minimum gap between neighbouring nodes; None for a single node."""
        if len(self.nodes) < 2:
            return None
        return min(b - a for a, b in zip(self.nodes, self.nodes[1:]))

    @property
    def degree(self) -> int:
        return len(self.nodes) - 1

    def __len__(self) -> int:
        return len(self.nodes)


def make_axes(bounds: Sequence[int], lam, offset=None) -> list[NodeAxis]:
    """Equispaced dyadic nodes ``offset + k*lam``, ``k = 0..d``, per axis."""
    lam = _as_fraction(lam)
    offset = lam if offset is None else _as_fraction(offset)
    if lam <= 0:
        raise ValueError("node spacing must be positive")
    if not is_dyadic(lam):
        raise ValueError(f"node spacing {lam} is not a dyadic rational")
    if not is_dyadic(offset):
        raise ValueError(f"node offset {offset} is not a dyadic rational")
    return [NodeAxis(tuple(offset + k * lam for k in range(d + 1))) for d in bounds]


def error_budget(bounds: Sequence[int], lam) -> Fraction:
    """Largest per-value error that keeps every coefficient error below 0.5."""
    lam = _as_fraction(lam)
    if lam <= 0:
        raise ValueError("node spacing must be positive")
    return Fraction(1, 2) * (lam / 2) ** sum(bounds)


def coefficient_error_factor(bounds: Sequence[int], lam) -> Fraction:
    """Amplification bound (2/lam)**sum(d) from value errors to coefficient errors."""
    return (2 / _as_fraction(lam)) ** sum(bounds)


def solve_precision(bounds: Sequence[int], axes: Sequence[NodeAxis], eps: Fraction,
                    max_abs_value=0) -> int:
    """Working precision for the tensor solve.

    ``log2(1/eps) + sum(d) * log2(max|node| + 2) + 64``; if the measured
    values are larger than the node-power estimate, their magnitude is used
    for the middle term instead.
    """
    total = sum(bounds)
    max_node = max((abs(x) for ax in axes for x in ax.nodes), default=Fraction(0))
    growth = math.ceil(total * math.log2(float(max_node) + 2))
    if max_abs_value:
        growth = max(growth, _ceil_log2(max_abs_value) + 1)
    return _ceil_log2(1 / eps) + growth + 64


def _ceil_log2(x) -> int:
    """ceil(log2(x)) for positive rationals/ints/mpfr, without float overflow."""
    x = _as_fraction(x)
    if x <= 0:
        raise ValueError("log2 of non-positive value")
    n, d = x.numerator, x.denominator
    k = n.bit_length() - d.bit_length()
    # 2**k is within a factor 2 of x; nudge until 2**(k-1) < x <= 2**k
    while Fraction(2) ** k < x:
        k += 1
    while Fraction(2) ** (k - 1) >= x:
        k -= 1
    return k


def bp_solve(nodes: Sequence, values: Sequence, precision: int | None = None) -> list:
    """Monomial coefficients of the interpolant through ``(nodes[i], values[i])``.

    Step 1 forms Newton divided differences in place, step 2 converts the
    Newton form to the monomial basis.  With ``precision`` set the arithmetic
    is done in mpfr at that many bits; otherwise the inputs' own arithmetic
    is used (Fractions give an exact solve).
    """
    d = len(nodes) - 1
    if len(values) != d + 1:
        raise ValueError("nodes and values must have the same length")
    if len(set(nodes)) != len(nodes):
        raise SingularNodesError("interpolation nodes must be pairwise distinct")
    if precision is not None:
        with precision_context(precision):
            xs = [to_bigfloat(x, precision) for x in nodes]
            c = [to_bigfloat(f, precision) for f in values]
            return _bp_core(xs, c, d)
    return _bp_core(list(nodes), list(values), d)


def _bp_core(x: list, c: list, d: int) -> list:
    for k in range(d):
        for i in range(d, k, -1):
            c[i] = (c[i] - c[i - 1]) / (x[i] - x[i - k - 1])
    for k in range(d - 1, -1, -1):
        xk = x[k]
        for i in range(k, d):
            c[i] = c[i] - xk * c[i + 1]
    return c


@dataclass
class InterpolationJob:
    axes: list[NodeAxis]
    epsilon: Fraction
    precision: int
    values: np.ndarray  # object array of mpfr, shape (len(ax) for ax in axes)

    def __post_init__(self):
        shape = tuple(len(a) for a in self.axes)
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} does not match axes {shape}")


@dataclass
class CoefficientTensor:
    coefficients: np.ndarray            # mpfr, same shape as the job values
    integers: np.ndarray | None = None  # Python ints after rounding
    max_residual: mpfr | None = None
    unsafe: bool | None = None


def tensor_solve(job: InterpolationJob, axis_order: Sequence[int] | None = None) -> CoefficientTensor:
    """Apply ``bp_solve`` along every axis of the value tensor."""
    k = len(job.axes)
    order = list(range(k)) if axis_order is None else list(axis_order)
    if sorted(order) != list(range(k)):
        raise ValueError(f"axis_order must be a permutation of 0..{k - 1}")
    P = job.precision
    with precision_context(P):
        data = np.empty(job.values.shape, dtype=object)
        flat_in, flat_out = job.values.reshape(-1), data.reshape(-1)
        for idx in range(flat_in.size):
            flat_out[idx] = to_bigfloat(flat_in[idx], P)
        for ax in order:
            nodes = [to_bigfloat(x, P) for x in job.axes[ax].nodes]
            d = len(nodes) - 1
            if d == 0:
                continue
            moved = np.moveaxis(data, ax, -1)
            lines = moved.reshape(-1, d + 1)
            for r in range(lines.shape[0]):
                lines[r, :] = _bp_core(nodes, list(lines[r, :]), d)
            data = np.moveaxis(lines.reshape(moved.shape), -1, ax).copy()
    return CoefficientTensor(data)


def round_to_integers(c: CoefficientTensor, threshold: Fraction = UNSAFE_RESIDUAL
                      ) -> CoefficientTensor:
    """Nearest-integer recovery; flags ``unsafe`` if any residual >= threshold."""
    src = c.coefficients
    ints = np.empty(src.shape, dtype=object)
    worst = Fraction(0)
    flat_src, flat_int = src.reshape(-1), ints.reshape(-1)
    for i in range(flat_src.size):
        x = flat_src[i]
        if isinstance(x, (Fraction, int)):
            q = round(x)
            r = abs(Fraction(x) - q)
        else:
            x = mpfr(x)
            with gmpy2.context(precision=max(x.precision, 53)):
                q = int(gmpy2.rint(x))
                r = _as_fraction(abs(x - q))
        flat_int[i] = int(q)
        if r > worst:
            worst = r
    with gmpy2.context(precision=64):
        residual = mpfr(gmpy2.mpq(worst.numerator, worst.denominator))
    return CoefficientTensor(src, ints, residual, worst >= threshold)
