"""Seeded random instances and the strategy-comparison benchmark."""

from __future__ import annotations

import csv
import io
import itertools
import random
import time
import tracemalloc
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .engine import NonConvergenceError, PipelineConfig, compute_determinant
from .oracle import COFACTOR_MAX_ORDER, det_symbolic_bareiss, det_symbolic_cofactor
from .polycore import Polynomial, PolyMatrix, VarSet

STRATEGIES = ("approx-interp", "exact-symbolic-bareiss", "cofactor")
CSV_HEADER = ["order", "strategy", "trial", "wall_ms", "peak_alloc_bytes", "verified"]


def default_varset(v: int) -> VarSet:
    return VarSet(tuple(f"x{i + 1}" for i in range(v)))


def random_poly(rng: random.Random, varset: VarSet, degree: int, coeff: int,
                terms: int | None = None) -> Polynomial:
    """Random polynomial with per-variable degree <= ``degree``.

    ``terms=None`` gives a dense polynomial (every monomial drawn, coefficient
    uniform in [-coeff, coeff]); otherwise ``terms`` random monomials.
    """
    v = varset.v
    if terms is None:
        monos = itertools.product(range(degree + 1), repeat=v)
        return Polynomial(varset, {e: rng.randint(-coeff, coeff) for e in monos})
    out = {}
    for _ in range(terms):
        e = tuple(rng.randint(0, degree) for _ in range(v))
        c = 0
        while c == 0 and coeff:
            c = rng.randint(-coeff, coeff)
        out[e] = c
    return Polynomial(varset, out)


def random_matrix(rng: random.Random, n: int, v: int, degree: int, coeff: int,
                  terms: int | Callable[[random.Random], int] | None = None) -> PolyMatrix:
    vs = default_varset(v)
    def k():
        return terms(rng) if callable(terms) else terms
    return PolyMatrix([[random_poly(rng, vs, degree, coeff, k()) for _ in range(n)]
                       for _ in range(n)], vs)


def instance_rng(seed: int, order: int, trial: int) -> random.Random:
    # str seeds are hashed deterministically (not by PYTHONHASHSEED)
    return random.Random(f"symdet:{seed}:{order}:{trial}")


@dataclass
class BenchSpec:
    orders: Sequence[int]
    variables: int = 3
    degree: int = 1
    coeff: int = 9
    trials: int = 1
    seed: int = 0
    strategies: Sequence[str] = ("approx-interp", "exact-symbolic-bareiss")
    threads: int = 1
    track_memory: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.orders or any(n < 1 for n in self.orders):
            raise ValueError("orders must be a non-empty list of positive integers")
        if self.variables < 1 or self.degree < 0 or self.coeff < 1:
            raise ValueError("variables >= 1, degree >= 0 and coeff >= 1 required")
        bad = [s for s in self.strategies if s not in STRATEGIES]
        if bad or not self.strategies:
            raise ValueError(f"unknown strategies {bad}; choose from {STRATEGIES}")

    def instance(self, order: int, trial: int) -> PolyMatrix:
        return random_matrix(instance_rng(self.seed, order, trial), order,
                             self.variables, self.degree, self.coeff)


@dataclass
class BenchRow:
    order: int
    strategy: str
    trial: int
    wall_ms: float
    peak_alloc_bytes: int | None
    verified: bool
    determinant: Polynomial | None = field(default=None, repr=False)

    def csv_fields(self) -> list:
        peak = "unavailable" if self.peak_alloc_bytes is None else self.peak_alloc_bytes
        return [self.order, self.strategy, self.trial, f"{self.wall_ms:.3f}", peak,
                str(self.verified).lower()]


def _run_strategy(name: str, m: PolyMatrix, threads: int) -> tuple[Polynomial | None, bool]:
    if name == "approx-interp":
        try:
            rep = compute_determinant(m, PipelineConfig(threads=threads))
        except NonConvergenceError as exc:
            return exc.report.polynomial, False
        return rep.polynomial, rep.verified
    if name == "exact-symbolic-bareiss":
        return det_symbolic_bareiss(m), True
    if name == "cofactor":
        if m.n > COFACTOR_MAX_ORDER:
            return None, False
        return det_symbolic_cofactor(m), True
    raise ValueError(f"unknown strategy {name!r}")


def run_bench(spec: BenchSpec, progress: Callable[[BenchRow], None] | None = None) -> list[BenchRow]:
    """Run every strategy on every instance; cross-check their determinants.

    Peak allocation comes from tracemalloc and only sees this process, so it
    is reported as unavailable when grid evaluation is farmed out to workers.
    """
    rows: list[BenchRow] = []
    for order in spec.orders:
        for trial in range(spec.trials):
            m = spec.instance(order, trial)
            trial_rows = []
            for name in spec.strategies:
                measure = spec.track_memory and not (name == "approx-interp" and spec.threads > 1)
                if measure:
                    tracemalloc.start()
                t0 = time.perf_counter()
                det, ok = _run_strategy(name, m, spec.threads)
                wall = (time.perf_counter() - t0) * 1000.0
                peak = None
                if measure:
                    peak = tracemalloc.get_traced_memory()[1]
                    tracemalloc.stop()
                trial_rows.append(BenchRow(order, name, trial, wall, peak, ok, det))
            computed = [r.determinant for r in trial_rows if r.determinant is not None]
            agree = all(d == computed[0] for d in computed)
            for r in trial_rows:
                r.verified = r.verified and agree
                rows.append(r)
                if progress:
                    progress(r)
    return rows


def rows_to_csv(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()
