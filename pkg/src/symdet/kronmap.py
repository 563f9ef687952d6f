"""Kronecker substitution from v variables down to two, and its inverse.

Variables are split into ``[x_1 .. x_t]`` and ``[x_{t+1} .. x_v]`` with
``t = ceil(v/2)``.  Inside each block every variable is replaced by a power
of the block's last variable::

    x_i -> x_t ** D_i,   D_i = prod_{j=i+1..t} (d_j + 1)

so an exponent vector ``(e_1 .. e_t)`` packs into ``sum e_i * D_i`` (with
``D_t = 1``), a mixed-radix number whose digits stay below ``d_i + 1``.  As
long as each ``e_i <= d_i`` the packing is injective and lifting is plain
quotient/remainder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .polycore import Polynomial, PolyMatrix, VarSet


@dataclass(frozen=True)
class SubstitutionPlan:
    varset: VarSet
    bounds: tuple[int, ...]
    t: int                      # 1-based split index; 0 for the identity plan
    exponents: tuple[int, ...]  # D_i per variable (1 for targets, unused if identity)

    @property
    def identity(self) -> bool:
        return self.t == 0

    @property
    def targets(self) -> tuple[str, ...]:
        if self.identity:
            return self.varset.names
        names = self.varset.names
        return (names[self.t - 1], names[-1])

    @property
    def reduced_varset(self) -> VarSet:
        return self.varset if self.identity else VarSet(self.targets)

    def blocks(self) -> tuple[range, range]:
        """0-based index ranges of the two partitions."""
        return range(0, self.t), range(self.t, self.varset.v)

    def substitutions(self) -> dict[str, tuple[str, int]]:
        """Replaced variable -> (target variable, power)."""
        if self.identity:
            return {}
        names = self.varset.names
        out = {}
        for block in self.blocks():
            target = names[block[-1]]
            for i in block[:-1]:
                out[names[i]] = (target, self.exponents[i])
        return out


def _check_kronecker_condition(bounds: Sequence[int], exps: Sequence[int], block: range) -> None:
    # in increasing order of packing weight: sum_{j<=i} d_j n_j < n_{i+1}
    order = list(reversed(block))
    acc = 0
    for k in range(len(order) - 1):
        i = order[k]
        acc += bounds[i] * exps[i]
        nxt = exps[order[k + 1]]
        if not acc < nxt:
            raise AssertionError(f"Kronecker condition violated at x{i + 1}: {acc} >= {nxt}")


def make_plan(bounds: Sequence[int], varset: VarSet) -> SubstitutionPlan:
    bounds = tuple(int(b) for b in bounds)
    v = varset.v
    if len(bounds) != v:
        raise ValueError(f"expected {v} bounds, got {len(bounds)}")
    if any(b < 0 for b in bounds):
        raise ValueError("degree bounds must be non-negative")
    if v <= 2:
        return SubstitutionPlan(varset, bounds, 0, (1,) * v)
    t = math.ceil(v / 2)
    exps = [1] * v
    for block in (range(0, t), range(t, v)):
        for i in reversed(block[:-1]):
            exps[i] = exps[i + 1] * (bounds[i + 1] + 1)
    plan = SubstitutionPlan(varset, bounds, t, tuple(exps))
    for block in plan.blocks():
        _check_kronecker_condition(bounds, exps, block)
    return plan


def reduce_exponents(exps: Sequence[int], plan: SubstitutionPlan) -> tuple[int, ...]:
    if plan.identity:
        return tuple(exps)
    first, second = plan.blocks()
    D = plan.exponents
    return (sum(exps[i] * D[i] for i in first), sum(exps[i] * D[i] for i in second))


def reduce_poly(p: Polynomial, plan: SubstitutionPlan) -> Polynomial:
    if plan.identity:
        return p
    return p.map_exponents(plan.reduced_varset, lambda e: reduce_exponents(e, plan))


def reduce_matrix(m: PolyMatrix, plan: SubstitutionPlan) -> PolyMatrix:
    if plan.identity:
        return m
    rv = plan.reduced_varset
    return m.map(lambda p: reduce_poly(p, plan), rv)


def reduced_degree_bound(plan: SubstitutionPlan, bounds: Sequence[int] | None = None
                         ) -> tuple[int, ...]:
    """Worst-case degree of each target variable after packing."""
    bounds = tuple(plan.bounds if bounds is None else bounds)
    if plan.identity:
        return bounds
    D = plan.exponents
    return tuple(sum(bounds[i] * D[i] for i in block) for block in plan.blocks())


def lift_monomial(reduced: Sequence[int], plan: SubstitutionPlan) -> tuple[int, ...]:
    if plan.identity:
        return tuple(reduced)
    out = [0] * plan.varset.v
    D = plan.exponents
    for k, block in zip(reduced, plan.blocks()):
        for i in block[:-1]:
            out[i], k = divmod(k, D[i])
        out[block[-1]] = k
    return tuple(out)


def lift_poly(p: Polynomial, plan: SubstitutionPlan) -> Polynomial:
    if plan.identity:
        return p
    return p.map_exponents(plan.varset, lambda e: lift_monomial(e, plan))
