"""Exact symbolic determinants, used as ground truth."""

from __future__ import annotations

from .polycore import Polynomial, PolyMatrix

COFACTOR_MAX_ORDER = 8


def det_symbolic_bareiss(m: PolyMatrix) -> Polynomial:
    """Fraction-free elimination over ℤ[x]; every division is exact."""
    n = m.n
    a = [list(r) for r in m.rows]
    one = Polynomial.constant(m.varset, 1)
    if n == 1:
        return a[0][0]
    sign = 1
    prev = one
    for k in range(n - 1):
        if a[k][k].is_zero():
            for r in range(k + 1, n):
                if not a[r][k].is_zero():
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return Polynomial.zero(m.varset)
        akk = a[k][k]
        rk = a[k]
        for i in range(k + 1, n):
            ri = a[i]
            aik = ri[k]
            for j in range(k + 1, n):
                num = akk * ri[j] - aik * rk[j]
                ri[j] = num if prev == one else num.divexact(prev)
            ri[k] = Polynomial.zero(m.varset)
        prev = akk
    d = a[n - 1][n - 1]
    return d if sign > 0 else -d


def det_symbolic_cofactor(m: PolyMatrix, max_order: int = COFACTOR_MAX_ORDER) -> Polynomial:
    """First-row Laplace expansion (recursive); refuses orders above ``max_order``."""
    if m.n > max_order:
        raise ValueError(f"cofactor expansion capped at order {max_order}, got {m.n}")
    return _cofactor([list(r) for r in m.rows], m.varset)


def _cofactor(rows, varset) -> Polynomial:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = Polynomial.zero(varset)
    for j, a in enumerate(rows[0]):
        if a.is_zero():
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = a * _cofactor(minor, varset)
        total = total + term if j % 2 == 0 else total - term
    return total
