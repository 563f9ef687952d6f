"""Sparse multivariate polynomials with exact integer coefficients.

A polynomial is a mapping from exponent tuples to nonzero ints, tied to a
:class:`VarSet` that fixes which slot of the exponent tuple belongs to which
variable::

    VarSet(("x1", "x2"))
    5*x1^2 - 3*x1*x2  ->  {(2, 0): 5, (1, 1): -3}

The zero polynomial has no terms.  Values are immutable; every operation
returns a new :class:`Polynomial`.

Floating-point evaluation works on ``gmpy2.mpfr`` values (the BigFloat
carrier).  The working precision is passed explicitly and applied through a
scoped gmpy2 context, so nothing here touches process-wide state.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import gmpy2
from gmpy2 import mpfr

Exponents = tuple[int, ...]


class VarSetMismatchError(ValueError):
    """Operands are polynomials over different variable sets."""


class UnknownVariableError(KeyError):
    """A variable name is not part of the governing VarSet."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown variable"


class DivisibilityError(ArithmeticError):
    """Exact division was requested but the divisor does not divide."""


def precision_context(precision: int):
    """Scoped gmpy2 context: round-to-nearest-even at ``precision`` bits."""
    if precision < 2:
        raise ValueError(f"precision must be at least 2 bits, got {precision}")
    return gmpy2.context(precision=precision, round=gmpy2.RoundToNearest)


def to_bigfloat(x, precision: int) -> mpfr:
    """Round an int, Fraction, float or mpfr to ``precision`` bits."""
    with precision_context(precision):
        if isinstance(x, Fraction):
            return mpfr(gmpy2.mpq(x.numerator, x.denominator))
        return mpfr(x)


@dataclass(frozen=True)
class VarSet:
    """Ordered, duplicate-free variable names; position = exponent slot."""

    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if any(not isinstance(n, str) or not n for n in names):
            raise ValueError("variable names must be non-empty strings")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")

    @property
    def v(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariableError(f"unknown variable {name!r}") from None

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __len__(self) -> int:
        return len(self.names)


def grlex_key(exps: Exponents) -> tuple:
    """Sort key for graded-lex order (larger key = larger monomial)."""
    return (sum(exps), exps)


def _pack_width(bound: int) -> int:
    return max(bound.bit_length(), 1) + 1


def _mul_terms(a: Mapping[Exponents, int], b: Mapping[Exponents, int], v: int) -> dict:
    if len(a) * len(b) < 64 or v == 0:
        out: dict = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = out.get(e, 0) + ca * cb
        return out
    # Pack each exponent tuple into one int; monomial products become int adds.
    bound = max(max(e) for e in a) + max(max(e) for e in b)
    w = _pack_width(bound)
    shifts = [w * i for i in range(v)]

    def pack(e):
        return sum(x << s for x, s in zip(e, shifts))

    pa = [(pack(e), c) for e, c in a.items()]
    pb = [(pack(e), c) for e, c in b.items()]
    acc: dict = {}
    get = acc.get
    for ka, ca in pa:
        for kb, cb in pb:
            k = ka + kb
            acc[k] = get(k, 0) + ca * cb
    mask = (1 << w) - 1
    return {tuple((k >> s) & mask for s in shifts): c for k, c in acc.items() if c}


class Polynomial:
    """Immutable sparse polynomial over ℤ in the variables of ``varset``."""

    __slots__ = ("varset", "_terms", "_hash")

    def __init__(self, varset: VarSet, terms: Mapping[Sequence[int], int] | None = None):
        v = varset.v
        clean: dict[Exponents, int] = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != v:
                raise ValueError(f"exponent vector {exps} does not match {v} variables")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            if not isinstance(c, int):
                if isinstance(c, Fraction) and c.denominator == 1:
                    c = c.numerator
                elif isinstance(c, type(gmpy2.mpz(0))):
                    c = int(c)
                else:
                    raise TypeError(f"coefficients must be integers, got {c!r}")
            c = clean.get(exps, 0) + c
            if c:
                clean[exps] = c
            else:
                clean.pop(exps, None)
        self.varset = varset
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, varset: VarSet, terms: dict) -> Polynomial:
        # trusted constructor: terms already canonical
        p = object.__new__(cls)
        p.varset = varset
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def zero(cls, varset: VarSet) -> Polynomial:
        return cls._raw(varset, {})

    @classmethod
    def constant(cls, varset: VarSet, c: int) -> Polynomial:
        return cls._raw(varset, {(0,) * varset.v: int(c)} if c else {})

    @classmethod
    def variable(cls, varset: VarSet, name: str) -> Polynomial:
        exps = [0] * varset.v
        exps[varset.index(name)] = 1
        return cls._raw(varset, {tuple(exps): 1})

    # -- inspection -------------------------------------------------------

    @property
    def terms(self) -> Mapping[Exponents, int]:
        return dict(self._terms)

    def items(self) -> list[tuple[Exponents, int]]:
        """Terms in descending graded-lex order."""
        return sorted(self._terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def coeff(self, exps: Sequence[int]) -> int:
        return self._terms.get(tuple(exps), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def degree(self, var: str | int) -> int:
        """Highest exponent of ``var``; 0 if absent or for the zero polynomial."""
        i = var if isinstance(var, int) else self.varset.index(var)
        if not 0 <= i < self.varset.v:
            raise UnknownVariableError(f"variable index {i} out of range")
        return max((e[i] for e in self._terms), default=0)

    def degrees(self) -> tuple[int, ...]:
        v = self.varset.v
        out = [0] * v
        for e in self._terms:
            for i in range(v):
                if e[i] > out[i]:
                    out[i] = e[i]
        return tuple(out)

    def total_degree(self) -> int:
        return max((sum(e) for e in self._terms), default=0)

    def leading_term(self) -> tuple[Exponents, int]:
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self._terms, key=grlex_key)
        return e, self._terms[e]

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            if other.varset != self.varset:
                raise VarSetMismatchError(
                    f"variable sets differ: {self.varset.names} vs {other.varset.names}")
            return other
        if isinstance(other, int):
            return Polynomial.constant(self.varset, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other._terms:
            return self
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                del out[e]
        return Polynomial._raw(self.varset, out)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial._raw(self.varset, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, int):
            if not other:
                return Polynomial.zero(self.varset)
            return Polynomial._raw(self.varset, {e: c * other for e, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self._terms or not other._terms:
            return Polynomial.zero(self.varset)
        terms = _mul_terms(self._terms, other._terms, self.varset.v)
        return Polynomial._raw(self.varset, {e: c for e, c in terms.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> Polynomial:
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = Polynomial.constant(self.varset, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def divexact(self, divisor: Polynomial) -> Polynomial:
        """Quotient q with q * divisor == self; raises DivisibilityError otherwise."""
        divisor = self._coerce(divisor)
        if divisor is NotImplemented:
            raise TypeError("divisor must be a Polynomial or int")
        if not divisor._terms:
            raise ZeroDivisionError("division by the zero polynomial")
        if not self._terms:
            return self
        if len(divisor._terms) == 1:
            (eb, cb), = divisor._terms.items()
            out = {}
            for e, c in self._terms.items():
                q, r = divmod(c, cb)
                diff = tuple(x - y for x, y in zip(e, eb))
                if r or min(diff) < 0:
                    raise DivisibilityError("monomial divisor does not divide exactly")
                out[diff] = q
            return Polynomial._raw(self.varset, out)

        lead_e, lead_c = divisor.leading_term()
        rest = [(e, c) for e, c in divisor._terms.items() if e != lead_e]
        rem = dict(self._terms)
        # max-heap on graded-lex via negated keys; stale entries skipped lazily
        heap = [(-sum(e), tuple(-x for x in e)) for e in rem]
        heapq.heapify(heap)
        quot: dict[Exponents, int] = {}
        while rem:
            while True:
                _, neg = heapq.heappop(heap)
                e = tuple(-x for x in neg)
                if e in rem:
                    break
            c = rem.pop(e)
            q, r = divmod(c, lead_c)
            qe = tuple(x - y for x, y in zip(e, lead_e))
            if r or min(qe) < 0:
                raise DivisibilityError("polynomial division is not exact")
            quot[qe] = q
            for be, bc in rest:
                te = tuple(x + y for x, y in zip(qe, be))
                s = rem.get(te, 0) - q * bc
                if s:
                    if te not in rem:
                        heapq.heappush(heap, (-sum(te), tuple(-x for x in te)))
                    rem[te] = s
                else:
                    rem.pop(te, None)
        return Polynomial._raw(self.varset, quot)

    def map_exponents(self, varset: VarSet, fn: Callable[[Exponents], Exponents]) -> Polynomial:
        """Image under a monomial map; colliding images are summed."""
        out: dict[Exponents, int] = {}
        for e, c in self._terms.items():
            ne = tuple(fn(e))
            s = out.get(ne, 0) + c
            if s:
                out[ne] = s
            else:
                out.pop(ne, None)
        return Polynomial._raw(varset, out)

    # -- comparison -------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = Polynomial.constant(self.varset, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.varset == other.varset and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.varset, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        from .exprio import print_poly
        return f"Polynomial({print_poly(self)!r}, vars={self.varset.names})"

    def __str__(self) -> str:
        from .exprio import print_poly
        return print_poly(self)

    # -- evaluation -------------------------------------------------------

    def eval(self, point: Sequence, precision: int) -> mpfr:
        return poly_eval(self, point, precision)

    def eval_exact(self, point: Sequence) -> Fraction:
        return poly_eval_exact(self, point)


def _check_same(a: Polynomial, b: Polynomial) -> None:
    if a.varset != b.varset:
        raise VarSetMismatchError(f"variable sets differ: {a.varset.names} vs {b.varset.names}")


def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    _check_same(a, b)
    return a + b


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    _check_same(a, b)
    return a * b


def poly_divexact(a: Polynomial, b: Polynomial) -> Polynomial:
    _check_same(a, b)
    return a.divexact(b)


def poly_degree(p: Polynomial, x: str) -> int:
    return p.degree(x)


def _power_tables(p: Polynomial, point: Sequence, one) -> list[list]:
    degs = p.degrees()
    tables = []
    for x, d in zip(point, degs):
        row = [one]
        for _ in range(d):
            row.append(row[-1] * x)
        tables.append(row)
    return tables


def poly_eval(p: Polynomial, point: Sequence, precision: int) -> mpfr:
    """Value of ``p`` at ``point`` in ``precision``-bit arithmetic.

    Powers of each coordinate are tabulated once, then terms are accumulated
    in descending graded-lex order.  Every operation rounds to nearest, so the
    error is at most a small multiple of len(p) * 2**(1 - precision) times the
    sum of absolute term values.
    """
    if len(point) != p.varset.v:
        raise ValueError(f"point has {len(point)} coordinates, expected {p.varset.v}")
    with precision_context(precision):
        xs = [to_bigfloat(x, precision) for x in point]
        one = mpfr(1)
        tables = _power_tables(p, xs, one)
        acc = mpfr(0)
        for e, c in p.items():
            t = mpfr(c)
            for tab, k in zip(tables, e):
                if k:
                    t = t * tab[k]
            acc = acc + t
        return acc


def poly_eval_exact(p: Polynomial, point: Sequence) -> Fraction:
    """Exact rational value of ``p`` at a point of rationals (ints, Fractions)."""
    if len(point) != p.varset.v:
        raise ValueError(f"point has {len(point)} coordinates, expected {p.varset.v}")
    if not p:
        return Fraction(0)
    pts = [Fraction(x) for x in point]
    degs = p.degrees()
    # numerator over the common denominator prod(q_i ** deg_i): pure int arithmetic
    num_pow = []
    den_pow = []
    for x, d in zip(pts, degs):
        nrow, drow = [1], [1]
        for _ in range(d):
            nrow.append(nrow[-1] * x.numerator)
            drow.append(drow[-1] * x.denominator)
        num_pow.append(nrow)
        den_pow.append(drow)
    total = 0
    for e, c in p._terms.items():
        t = c
        for i, k in enumerate(e):
            d = degs[i]
            if d:
                t *= num_pow[i][k] * den_pow[i][d - k]
        total += t
    den = 1
    for i, d in enumerate(degs):
        den *= den_pow[i][d]
    return Fraction(total, den)


class PolyMatrix:
    """Square matrix of polynomials over one shared VarSet."""

    __slots__ = ("varset", "rows")

    def __init__(self, rows: Iterable[Iterable[Polynomial]], varset: VarSet | None = None):
        rows = tuple(tuple(r) for r in rows)
        n = len(rows)
        if n < 1:
            raise ValueError("matrix must have order n >= 1")
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        if varset is None:
            varset = rows[0][0].varset
        for r in rows:
            for p in r:
                if not isinstance(p, Polynomial):
                    raise TypeError("matrix entries must be Polynomials")
                if p.varset != varset:
                    raise VarSetMismatchError("all entries must share one VarSet")
        self.varset = varset
        self.rows = rows

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> Polynomial:
        i, j = ij
        return self.rows[i][j]

    def __iter__(self):
        return iter(self.rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.varset == other.varset and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.varset, self.rows))

    def __repr__(self) -> str:
        return f"PolyMatrix(n={self.n}, vars={self.varset.names})"

    def map(self, fn: Callable[[Polynomial], Polynomial], varset: VarSet | None = None) -> PolyMatrix:
        return PolyMatrix([[fn(p) for p in r] for r in self.rows], varset)

    def permuted(self, row_perm: Sequence[int] | None = None,
                 col_perm: Sequence[int] | None = None) -> PolyMatrix:
        """Matrix with rows ``row_perm[i]`` and columns ``col_perm[j]`` of self."""
        rp = list(row_perm) if row_perm is not None else list(range(self.n))
        cp = list(col_perm) if col_perm is not None else list(range(self.n))
        return PolyMatrix([[self.rows[i][j] for j in cp] for i in rp], self.varset)

    def max_degrees(self) -> tuple[int, ...]:
        out = [0] * self.varset.v
        for r in self.rows:
            for p in r:
                for i, d in enumerate(p.degrees()):
                    if d > out[i]:
                        out[i] = d
        return tuple(out)

    @classmethod
    def identity(cls, varset: VarSet, n: int) -> PolyMatrix:
        one, zero = Polynomial.constant(varset, 1), Polynomial.zero(varset)
        return cls([[one if i == j else zero for j in range(n)] for i in range(n)], varset)
