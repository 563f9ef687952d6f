"""Numeric determinants of evaluated polynomial matrices.

Two kernels:

* :func:`det_approx`: Gaussian elimination with partial pivoting in mpfr
  at a caller-chosen precision.
* :func:`det_exact_dyadic`: exact rational determinant.  Denominators are
  cleared, the integer matrix goes through fraction-free (Bareiss)
  elimination, and the scale is divided back out.

Matrices are plain nested sequences.  Interpolation nodes are dyadic and
entries have integer coefficients, so :func:`evaluate_scaled` can evaluate a
PolyMatrix at a node exactly as an integer matrix times a power of two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

import gmpy2
from gmpy2 import mpfr, mpz

from .polycore import PolyMatrix, precision_context, to_bigfloat

Mode = Literal["approx", "exact"]


def _bareiss_int(rows: list[list]) -> int:
    """Determinant of an integer matrix by fraction-free elimination."""
    n = len(rows)
    a = [[mpz(x) for x in r] for r in rows]
    sign = 1
    prev = mpz(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        rk = a[k]
        for i in range(k + 1, n):
            ri = a[i]
            aik = ri[k]
            for j in range(k + 1, n):
                ri[j] = (akk * ri[j] - aik * rk[j]) // prev
            ri[k] = 0
        prev = akk
    return int(sign * a[n - 1][n - 1])


def det_exact_dyadic(a: Sequence[Sequence]) -> Fraction:
    """Exact determinant of a matrix of rationals (dyadic or not)."""
    n = len(a)
    if n == 0:
        return Fraction(1)
    entries = [[Fraction(x) for x in r] for r in a]
    scale = 1
    for r in entries:
        for x in r:
            scale = math.lcm(scale, x.denominator)
    ints = [[x.numerator * (scale // x.denominator) for x in r] for r in entries]
    return Fraction(_bareiss_int(ints), scale ** n)


def det_approx(a: Sequence[Sequence], precision: int) -> mpfr:
    """Determinant by partial-pivoting elimination at ``precision`` bits."""
    n = len(a)
    with precision_context(precision):
        m = [[to_bigfloat(x, precision) for x in r] for r in a]
        if n == 1:
            return m[0][0]
        det = mpfr(1)
        for k in range(n):
            piv = max(range(k, n), key=lambda r: abs(m[r][k]))
            if m[piv][k] == 0:
                return mpfr(0)
            if piv != k:
                m[k], m[piv] = m[piv], m[k]
                det = -det
            rk = m[k]
            pivot = rk[k]
            det = det * pivot
            for i in range(k + 1, n):
                ri = m[i]
                f = ri[k] / pivot
                if f:
                    for j in range(k + 1, n):
                        ri[j] = ri[j] - f * rk[j]
        return det


def hadamard_bound(a: Sequence[Sequence]) -> mpfr:
    """Product of row 2-norms, rounded upward (an upper bound on |det a|)."""
    with gmpy2.context(precision=64, round=gmpy2.RoundUp):
        bound = mpfr(1)
        for r in a:
            s = mpfr(0)
            for x in r:
                if isinstance(x, Fraction):
                    x = gmpy2.mpq(abs(x.numerator), x.denominator)
                y = mpfr(abs(x))
                s = s + y * y
            bound = bound * gmpy2.sqrt(s)
        return bound


def choose_precision(eps, magnitude_bound, n: int) -> int:
    """Bits needed so partial-pivoting elimination lands within ``eps``.

    ``ceil(log2(1/eps)) + ceil(log2(bound + 2)) + ceil(3*log2(n + 1)) + 32``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    with gmpy2.context(precision=64, round=gmpy2.RoundUp):
        if isinstance(eps, Fraction):
            inv = mpfr(gmpy2.mpq(eps.denominator, eps.numerator))
        else:
            inv = 1 / mpfr(eps)
        t1 = int(gmpy2.ceil(gmpy2.log2(inv)))
        t2 = int(gmpy2.ceil(gmpy2.log2(mpfr(magnitude_bound) + 2)))
        t3 = int(gmpy2.ceil(3 * gmpy2.log2(mpfr(n + 1))))
    return t1 + t2 + t3 + 32


@dataclass
class EvalRequest:
    matrix: list[list]  # rationals (exact mode) or anything det_approx accepts
    epsilon: Fraction
    precision: int
    mode: Mode = "approx"

    def run(self):
        if self.mode == "exact":
            return det_exact_dyadic(self.matrix)
        return det_approx(self.matrix, self.precision)


class MatrixEvaluator:
    """Evaluates a PolyMatrix at dyadic points as (integer matrix, 2-exponent).

    Entry ``(i, j)`` at point ``x`` equals ``ints[i][j] / 2**shift``; powers of
    each node numerator are cached per coordinate.
    """

    def __init__(self, m: PolyMatrix):
        self.n = m.n
        self.v = m.varset.v
        self.degs = m.max_degrees()
        self.entries = [[list(p.terms.items()) for p in row] for row in m.rows]

    def scaled(self, point: Sequence[Fraction]) -> tuple[list[list[int]], int]:
        nums, shifts = [], []
        for x in point:
            x = Fraction(x)
            d = x.denominator
            if d & (d - 1):
                raise ValueError(f"coordinate {x} is not dyadic")
            nums.append(x.numerator)
            shifts.append(d.bit_length() - 1)
        # common denominator 2**shift with shift = sum_i s_i * deg_i
        shift = sum(s * d for s, d in zip(shifts, self.degs))
        powers = []
        for num, s, dmax in zip(nums, shifts, self.degs):
            row = [1] * (dmax + 1)
            for k in range(1, dmax + 1):
                row[k] = row[k - 1] * num
            # fold in the missing denominator factor 2**(s*(dmax-k))
            powers.append([row[k] << (s * (dmax - k)) for k in range(dmax + 1)])
        ints = []
        for row in self.entries:
            out = []
            for terms in row:
                acc = 0
                for e, c in terms:
                    t = c
                    for i, k in enumerate(e):
                        t *= powers[i][k]
                    acc += t
                out.append(acc)
            ints.append(out)
        return ints, shift

    def exact(self, point: Sequence[Fraction]) -> list[list[Fraction]]:
        ints, shift = self.scaled(point)
        den = 1 << shift
        return [[Fraction(x, den) for x in r] for r in ints]

    def det_exact(self, point: Sequence[Fraction]) -> Fraction:
        ints, shift = self.scaled(point)
        return Fraction(_bareiss_int(ints), 1 << (shift * self.n))


def evaluate_det(ev: MatrixEvaluator, point: Sequence[Fraction], eps: Fraction,
                 mode: Mode = "approx", precision: int | None = None):
    """det at ``point`` with error below ``eps``; returns (value, precision used).

    Exact mode returns a Fraction.  Approx mode evaluates entries exactly,
    rounds them once to the working precision, and eliminates.
    """
    if mode == "exact":
        return ev.det_exact(point), 0
    ints, shift = ev.scaled(point)
    if precision is None:
        bound = hadamard_bound(ints)
        with gmpy2.context(precision=64, round=gmpy2.RoundUp):
            bound = gmpy2.mul_2exp(bound, -shift * ev.n)
        precision = choose_precision(eps, bound, ev.n)
    with precision_context(precision):
        a = [[gmpy2.mul_2exp(mpfr(x), -shift) for x in r] for r in ints]
    return det_approx(a, precision), precision
