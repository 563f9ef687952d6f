"""Per-variable degree bounds for symbolic determinants.

The determinant's degree in one variable is bounded by running Chio's
pivotal condensation on the *degree matrix* in max-plus arithmetic: each
2x2 minor ``a11*aij - ai1*a1j`` becomes ``max(s11 + sij, si1 + s1j)``.  After
contracting down to order 2, the leading minor bound is reduced by the
degrees of the pivots that Chio's identity divides out::

    bound = max(s11 + s22, s12 + s21) - sum_k (n - 1 - k) * pivot_k

A pivot degree from the first stage is exact (it is a real entry).  Later
pivots are only upper bounds, and subtracting an over-estimate can make the
result too small, so such reports carry ``possibly_loose``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .polycore import PolyMatrix


@dataclass(frozen=True)
class DegreeMatrix:
    """Degrees of one variable in each entry, plus a structural-zero mask.

    ``zero[i][j]`` is True when the entry is known to be the zero polynomial
    (at the first stage: literally zero; after contraction: both products of
    the minor involve a known-zero factor).
    """

    variable: str
    entries: tuple[tuple[int, ...], ...]
    zero: tuple[tuple[bool, ...], ...] | None = None

    def __post_init__(self):
        n = len(self.entries)
        if any(len(r) != n for r in self.entries):
            raise ValueError("degree matrix must be square")
        if self.zero is None:
            object.__setattr__(self, "zero", tuple((False,) * n for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.entries)

    def as_lists(self) -> list[list[int]]:
        return [list(r) for r in self.entries]


@dataclass
class OpCounter:
    """Max-plus cell updates, total and per contraction stage."""

    total: int = 0
    per_stage: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class VariableBound:
    variable: str
    bound: int
    pivot_permuted: bool = False
    possibly_loose: bool = False


@dataclass(frozen=True)
class DegreeBoundReport:
    """Bounds for every variable of a matrix, in VarSet order."""

    variables: tuple[str, ...]
    bounds: tuple[int, ...]
    pivot_permuted: tuple[bool, ...]
    possibly_loose: tuple[bool, ...]

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.variables, self.bounds))

    def __getitem__(self, var: str) -> int:
        return self.bounds[self.variables.index(var)]


def build_degree_matrix(m: PolyMatrix, x: str) -> DegreeMatrix:
    i = m.varset.index(x)
    entries = tuple(tuple(p.degree(i) for p in row) for row in m.rows)
    zero = tuple(tuple(p.is_zero() for p in row) for row in m.rows)
    return DegreeMatrix(x, entries, zero)


def chio_degree_contract(omega: DegreeMatrix, counter: OpCounter | None = None
                         ) -> tuple[DegreeMatrix, int]:
    """One max-plus Chio step: order n -> n - 1, returning the pivot degree."""
    n = omega.n
    if n < 3:
        raise ValueError(f"contraction needs order >= 3, got {n}")
    s, z = omega.entries, omega.zero
    p, pz = s[0][0], z[0][0]
    rows, zrows = [], []
    for i in range(1, n):
        si, zi = s[i], z[i]
        row, zrow = [], []
        for j in range(1, n):
            row.append(max(p + si[j], si[0] + s[0][j]))
            zrow.append((pz or zi[j]) and (zi[0] or z[0][j]))
        rows.append(tuple(row))
        zrows.append(tuple(zrow))
    if counter is not None:
        counter.total += (n - 1) ** 2
        counter.per_stage.append((n - 1) ** 2)
    return DegreeMatrix(omega.variable, tuple(rows), tuple(zrows)), p


def _bring_pivot(omega: DegreeMatrix) -> DegreeMatrix | None:
    """Swap a structurally nonzero entry into (0, 0); None if there is none."""
    n = omega.n
    for i in range(n):
        for j in range(n):
            if not omega.zero[i][j]:
                rp = list(range(n))
                cp = list(range(n))
                rp[0], rp[i] = rp[i], rp[0]
                cp[0], cp[j] = cp[j], cp[0]
                entries = tuple(tuple(omega.entries[r][c] for c in cp) for r in rp)
                zero = tuple(tuple(omega.zero[r][c] for c in cp) for r in rp)
                return DegreeMatrix(omega.variable, entries, zero)
    return None


def estimate_from_degree_matrix(omega: DegreeMatrix, counter: OpCounter | None = None
                                ) -> VariableBound:
    n = omega.n
    var = omega.variable
    if n == 1:
        return VariableBound(var, omega.entries[0][0])
    pivots: list[int] = []
    permuted = loose = False
    stage = omega
    while stage.n > 2:
        if stage.zero[0][0]:
            swapped = _bring_pivot(stage)
            if swapped is None:
                return VariableBound(var, 0, True, loose)
            stage, permuted = swapped, True
        # pivots after the first stage are max-plus upper bounds, not exact degrees
        if pivots and stage.entries[0][0] > 0:
            loose = True
        stage, p = chio_degree_contract(stage, counter)
        pivots.append(p)
    (a, b), (c, d) = stage.entries
    maxdeg = max(a + d, b + c)
    correction = sum((n - 1 - k) * p for k, p in enumerate(pivots, start=1))
    return VariableBound(var, max(0, maxdeg - correction), permuted, loose)


def estimate_degree(m: PolyMatrix, x: str) -> int:
    """Upper bound (usually exact) on deg(det m, x)."""
    return estimate_from_degree_matrix(build_degree_matrix(m, x)).bound


def degree_bounds(m: PolyMatrix) -> DegreeBoundReport:
    results = [estimate_from_degree_matrix(build_degree_matrix(m, x)) for x in m.varset.names]
    return DegreeBoundReport(
        variables=m.varset.names,
        bounds=tuple(r.bound for r in results),
        pivot_permuted=tuple(r.pivot_permuted for r in results),
        possibly_loose=tuple(r.possibly_loose for r in results),
    )
