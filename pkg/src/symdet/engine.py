"""End-to-end determinant pipeline.

    degree bounds -> Kronecker reduction -> node grid -> det at every node
    -> axis-wise Vandermonde solve -> rounding -> lifting -> exact check

The exact check evaluates the candidate and the true determinant at a few
fresh dyadic points in rational arithmetic.  On a mismatch (or when rounding
was not clearly safe) every degree bound is raised and the pipeline reruns.
"""

from __future__ import annotations

import math
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import degbound, kronmap, numdet, vandersolve
from .exprio import format_sci, print_poly
from .polycore import Polynomial, PolyMatrix, poly_eval_exact

THREADS_ENV = "SYMDET_THREADS"


class ConfigError(ValueError):
    """Invalid pipeline configuration."""


class NonConvergenceError(RuntimeError):
    """Escalation budget exhausted without a verified result."""

    def __init__(self, message: str, report: PipelineReport):
        super().__init__(message)
        self.report = report


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


@dataclass
class PipelineConfig:
    lam: Fraction = Fraction(1, 2)
    offset: Fraction | None = None      # None: same as lam
    reduce: bool | None = None          # None: reduce when v > 2
    verify: int = 4
    max_escalations: int = 3
    threads: int = 1
    mode: str = "approx"
    precision: int | None = None
    seed: int = 20240601                # verification points
    bounds: tuple[int, ...] | None = None  # caller-supplied start bounds (skips estimation)

    def __post_init__(self):
        try:
            self.lam = Fraction(self.lam)
            if self.offset is not None:
                self.offset = Fraction(self.offset)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid node spacing/offset: {exc}") from None
        self.validate()

    def validate(self) -> None:
        if self.lam <= 0:
            raise ConfigError("lambda must be positive")
        for name, x in (("lambda", self.lam), ("offset", self.node_offset)):
            if not vandersolve.is_dyadic(x):
                raise ConfigError(f"{name} {x} must be a dyadic rational")
        if self.verify < 1:
            raise ConfigError("verification node count must be >= 1")
        if self.max_escalations < 0:
            raise ConfigError("max escalations must be >= 0")
        if self.threads < 1:
            raise ConfigError("thread budget must be >= 1")
        if self.mode not in ("approx", "exact"):
            raise ConfigError(f"unknown evaluation mode {self.mode!r}")
        if self.precision is not None and self.precision < 2:
            raise ConfigError("precision override must be >= 2 bits")
        if self.bounds is not None:
            self.bounds = tuple(int(b) for b in self.bounds)
            if any(b < 0 for b in self.bounds):
                raise ConfigError("degree bounds must be non-negative")

    @property
    def node_offset(self) -> Fraction:
        return self.lam if self.offset is None else self.offset


@dataclass
class Timings:
    ms_degree: float = 0.0
    ms_eval: float = 0.0
    ms_solve: float = 0.0
    ms_verify: float = 0.0
    ms_total: float = 0.0


@dataclass
class VerificationResult:
    passed: bool
    points: list[tuple[Fraction, ...]]
    witness: tuple[Fraction, ...] | None = None
    candidate_value: Fraction | None = None
    det_value: Fraction | None = None

    def __bool__(self) -> bool:
        return self.passed


@dataclass
class PipelineReport:
    polynomial: Polynomial
    degree_report: degbound.DegreeBoundReport
    plan: kronmap.SubstitutionPlan
    bounds_used: tuple[int, ...]
    reduced_bounds: tuple[int, ...]
    epsilon: Fraction
    precision: int
    eval_precision: int
    nodes: int
    max_residual: object
    unsafe: bool
    verification: VerificationResult | None
    escalations: int
    lam: Fraction
    offset: Fraction
    mode: str
    timings: Timings = field(default_factory=Timings)

    @property
    def verified(self) -> bool:
        return bool(self.verification and self.verification.passed)

    def diagnostics(self, timings: bool = True) -> dict:
        subs = {k: f"{t}^{p}" for k, (t, p) in self.plan.substitutions().items()}
        diag = {
            "variables": list(self.degree_report.variables),
            "bounds": list(self.degree_report.bounds),
            "bounds_used": list(self.bounds_used),
            "pivot_permuted": list(self.degree_report.pivot_permuted),
            "possibly_loose": list(self.degree_report.possibly_loose),
            "substitution": subs,
            "reduced_variables": list(self.plan.reduced_varset.names),
            "reduced_bounds": list(self.reduced_bounds),
            "lambda": _json_number(self.lam),
            "offset": _json_number(self.offset),
            "epsilon": format_sci(self.epsilon),
            "precision_bits": self.precision,
            "precision_eval_bits": self.eval_precision,
            "mode": self.mode,
            "nodes": self.nodes,
            "max_residual": format_sci(self.max_residual) if self.max_residual is not None else None,
            "verified": self.verified,
            "escalations": self.escalations,
        }
        if timings:
            diag.update({
                "ms_degree": round(self.timings.ms_degree, 3),
                "ms_eval": round(self.timings.ms_eval, 3),
                "ms_solve": round(self.timings.ms_solve, 3),
                "ms_verify": round(self.timings.ms_verify, 3),
                "ms_total": round(self.timings.ms_total, 3),
            })
        return diag


def _json_number(x: Fraction):
    if x.denominator == 1:
        return int(x)
    f = float(x)
    return f if Fraction(f) == x else str(x)


def _ms(t0: float) -> float:
    return (time.perf_counter() - t0) * 1000.0


# -- grid evaluation ------------------------------------------------------

_worker_state: dict = {}


def _init_worker(ev: numdet.MatrixEvaluator, axes, eps, mode, precision) -> None:
    _worker_state.update(ev=ev, axes=axes, eps=eps, mode=mode, precision=precision)


def _cell_point(axes, flat_index: int) -> tuple[Fraction, ...]:
    shape = tuple(len(a) for a in axes)
    idx = np.unravel_index(flat_index, shape) if shape else ()
    return tuple(ax.nodes[int(i)] for ax, i in zip(axes, idx))


def _eval_cells(indices: Sequence[int], ev=None, axes=None, eps=None, mode=None,
                precision=None) -> list:
    if ev is None:
        st = _worker_state
        ev, axes, eps, mode, precision = st["ev"], st["axes"], st["eps"], st["mode"], st["precision"]
    return [numdet.evaluate_det(ev, _cell_point(axes, i), eps, mode, precision) for i in indices]


def evaluate_grid(m: PolyMatrix, axes: Sequence[vandersolve.NodeAxis], eps: Fraction,
                  mode: str = "approx", threads: int = 1, precision: int | None = None
                  ) -> tuple[np.ndarray, int]:
    """det(m) at every node of the Cartesian grid; returns (values, max precision).

    Each cell depends only on its node, and results are merged by flat index,
    so the tensor is bit-identical for any worker count.
    """
    shape = tuple(len(a) for a in axes)
    total = math.prod(shape)
    ev = numdet.MatrixEvaluator(m)
    if threads <= 1 or total < 2:
        results = _eval_cells(range(total), ev, list(axes), eps, mode, precision)
    else:
        chunk = max(1, math.ceil(total / (threads * 4)))
        chunks = [range(s, min(s + chunk, total)) for s in range(0, total, chunk)]
        with ProcessPoolExecutor(max_workers=threads, initializer=_init_worker,
                                 initargs=(ev, list(axes), eps, mode, precision)) as pool:
            results = [r for part in pool.map(_eval_cells, chunks) for r in part]
    values = np.empty(shape, dtype=object)
    flat = values.reshape(-1)
    for i, (val, _) in enumerate(results):
        flat[i] = val
    max_prec = max((p for _, p in results), default=0)
    return values, max_prec


# -- verification ---------------------------------------------------------

def _check_denominator_bits(lam: Fraction, offset: Fraction) -> int:
    bits = max(lam.denominator.bit_length(), offset.denominator.bit_length()) - 1
    return bits + 3


def verification_points(v: int, k: int, seed: int, denominator_bits: int = 4
                        ) -> list[tuple[Fraction, ...]]:
    """``k`` dyadic points with odd numerators over ``2**denominator_bits``.

    Grid nodes have coarser denominators, so these never coincide with them.
    """
    rng = random.Random(seed)
    den = 1 << denominator_bits
    span = 1 << 12
    return [tuple(Fraction(2 * rng.randint(-span, span) + 1, den) for _ in range(v))
            for _ in range(k)]


def verify_at_nodes(candidate: Polynomial, m: PolyMatrix, k: int, *, seed: int = 0,
                    denominator_bits: int = 4) -> VerificationResult:
    """Compare candidate and det(m) exactly at ``k`` fresh dyadic points."""
    if k < 1:
        raise ConfigError("verification needs k >= 1 points")
    ev = numdet.MatrixEvaluator(m)
    points = verification_points(m.varset.v, k, seed, denominator_bits)
    for pt in points:
        got = poly_eval_exact(candidate, pt)
        want = ev.det_exact(pt)
        if got != want:
            return VerificationResult(False, points, pt, got, want)
    return VerificationResult(True, points)


# -- pipeline -------------------------------------------------------------

def escalate(bounds: Sequence[int]) -> tuple[int, ...]:
    return tuple(d + max(1, math.ceil(d / 4)) for d in bounds)


def _interpolate(m_red: PolyMatrix, grid_bounds, cfg: PipelineConfig, timings: Timings):
    axes = vandersolve.make_axes(grid_bounds, cfg.lam, cfg.node_offset)
    eps = vandersolve.error_budget(grid_bounds, cfg.lam)
    t0 = time.perf_counter()
    values, eval_prec = evaluate_grid(m_red, axes, eps, cfg.mode, cfg.threads, cfg.precision)
    timings.ms_eval += _ms(t0)

    t0 = time.perf_counter()
    max_abs = max((abs(x) for x in values.reshape(-1)), default=0)
    if cfg.precision is not None:
        prec = cfg.precision
    else:
        prec = vandersolve.solve_precision(grid_bounds, axes, eps, max_abs)
    job = vandersolve.InterpolationJob(axes, eps, prec, values)
    rounded = vandersolve.round_to_integers(vandersolve.tensor_solve(job))
    timings.ms_solve += _ms(t0)
    return axes, eps, prec, eval_prec, rounded


def compute_determinant(m: PolyMatrix, cfg: PipelineConfig | None = None) -> PipelineReport:
    cfg = cfg or PipelineConfig()
    cfg.validate()
    t_start = time.perf_counter()
    timings = Timings()
    varset = m.varset
    v = varset.v

    t0 = time.perf_counter()
    report0 = degbound.degree_bounds(m)
    timings.ms_degree += _ms(t0)
    reduce = (v > 2) if cfg.reduce is None else (cfg.reduce and v > 2)
    check_bits = _check_denominator_bits(cfg.lam, cfg.node_offset)

    if cfg.bounds is not None and len(cfg.bounds) != v:
        raise ConfigError(f"expected {v} degree bounds, got {len(cfg.bounds)}")
    bounds = report0.bounds if cfg.bounds is None else cfg.bounds
    last: PipelineReport | None = None
    for round_ in range(cfg.max_escalations + 1):
        if reduce:
            plan = kronmap.make_plan(bounds, varset)
            m_red = kronmap.reduce_matrix(m, plan)
            packed = kronmap.reduced_degree_bound(plan, bounds)
            if round_ == 0 and cfg.bounds is None:
                # re-estimate on the bivariate image, capped by the packed bound
                t0 = time.perf_counter()
                again = degbound.degree_bounds(m_red).bounds
                timings.ms_degree += _ms(t0)
                grid_bounds = tuple(min(a, b) for a, b in zip(again, packed))
            else:
                grid_bounds = packed
        else:
            plan = kronmap.SubstitutionPlan(varset, tuple(bounds), 0, (1,) * v)
            m_red = m
            grid_bounds = tuple(bounds)

        axes, eps, prec, eval_prec, rounded = _interpolate(m_red, grid_bounds, cfg, timings)

        terms = {}
        ints = rounded.integers
        for idx in np.ndindex(ints.shape):
            c = ints[idx]
            if c:
                terms[kronmap.lift_monomial(idx, plan)] = c
        candidate = Polynomial(varset, terms)

        verification = None
        if not rounded.unsafe:
            t0 = time.perf_counter()
            verification = verify_at_nodes(candidate, m, cfg.verify,
                                           seed=cfg.seed + round_, denominator_bits=check_bits)
            timings.ms_verify += _ms(t0)

        last = PipelineReport(
            polynomial=candidate,
            degree_report=report0,
            plan=plan,
            bounds_used=tuple(bounds),
            reduced_bounds=tuple(grid_bounds),
            epsilon=eps,
            precision=prec,
            eval_precision=eval_prec,
            nodes=math.prod(len(a) for a in axes),
            max_residual=rounded.max_residual,
            unsafe=bool(rounded.unsafe),
            verification=verification,
            escalations=round_,
            lam=cfg.lam,
            offset=cfg.node_offset,
            mode=cfg.mode,
            timings=timings,
        )
        if last.verified:
            timings.ms_total = _ms(t_start)
            return last
        bounds = escalate(bounds)

    timings.ms_total = _ms(t_start)
    reason = "unsafe rounding" if last.unsafe else "verification failed"
    raise NonConvergenceError(
        f"no verified determinant after {cfg.max_escalations} escalations ({reason})", last)


def summary_lines(r: PipelineReport) -> list[str]:
    d = r.diagnostics()
    lines = [
        f"determinant: {print_poly(r.polynomial)}",
        f"degree bounds: {dict(zip(d['variables'], d['bounds']))}",
    ]
    if d["substitution"]:
        lines.append("substitution: " + ", ".join(f"{k} -> {val}" for k, val in d["substitution"].items()))
    lines += [
        f"interpolation bounds {d['reduced_variables']}: {d['reduced_bounds']}",
        f"lambda={d['lambda']} epsilon={d['epsilon']} precision={d['precision_bits']} bits "
        f"(eval up to {d['precision_eval_bits']}) nodes={d['nodes']}",
        f"max residual {d['max_residual']}, verified={d['verified']}, escalations={d['escalations']}",
        f"timings ms: degree={d['ms_degree']} eval={d['ms_eval']} solve={d['ms_solve']} "
        f"verify={d['ms_verify']} total={d['ms_total']}",
    ]
    return lines
