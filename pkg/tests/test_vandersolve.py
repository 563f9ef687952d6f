from __future__ import annotations

import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st
from gmpy2 import mpfr

from symdet import vandersolve as vs
from symdet.polycore import to_bigfloat


def _sympy_solve(nodes, values):
    x = [sympy.Rational(n.numerator, n.denominator) for n in map(Fraction, nodes)]
    V = sympy.Matrix([[xi ** j for j in range(len(x))] for xi in x])
    sol = V.LUsolve(sympy.Matrix([sympy.Rational(Fraction(f).numerator, Fraction(f).denominator)
                                  for f in values]))
    return [Fraction(int(c.p), int(c.q)) for c in sol]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 8), st.data())
def test_exact_solve_matches_sympy(d, data):
    nodes = [Fraction(k + 1, 2) for k in range(d + 1)]
    values = [Fraction(data.draw(st.integers(-1000, 1000)), 4) for _ in range(d + 1)]
    assert vs.bp_solve(nodes, values) == _sympy_solve(nodes, values)


def test_float_solve_close_to_exact():
    rng = random.Random("bp")
    for _ in range(50):
        d = rng.randint(1, 12)
        nodes = [Fraction(k + 1, 2) for k in range(d + 1)]
        values = [Fraction(rng.randint(-10 ** 6, 10 ** 6)) for _ in nodes]
        exact = vs.bp_solve(nodes, values)
        approx = vs.bp_solve(nodes, values, precision=200)
        for a, e in zip(approx, exact):
            assert abs(Fraction(*map(int, a.as_integer_ratio())) - e) < Fraction(1, 2 ** 100)


def test_recovers_known_polynomial():
    coeffs = [3, -1, 4, 0, -5, 9]
    nodes = [Fraction(k + 1, 2) for k in range(len(coeffs))]
    values = [sum(c * x ** i for i, c in enumerate(coeffs)) for x in nodes]
    assert vs.bp_solve(nodes, values) == coeffs


def test_singular_nodes():
    with pytest.raises(vs.SingularNodesError):
        vs.bp_solve([1, 1], [0, 0])
    with pytest.raises(vs.SingularNodesError):
        vs.NodeAxis((Fraction(1), Fraction(1)))


def test_make_axes():
    axes = vs.make_axes([2, 0], Fraction(1, 2))
    assert axes[0].nodes == (Fraction(1, 2), Fraction(1), Fraction(3, 2))
    assert axes[0].spacing == Fraction(1, 2)
    assert axes[1].nodes == (Fraction(1, 2),) and axes[1].spacing is None
    with pytest.raises(ValueError):
        vs.make_axes([2], Fraction(1, 3))
    with pytest.raises(ValueError):
        vs.make_axes([2], Fraction(1, 2), offset=Fraction(1, 5))


def test_error_budget_example():
    eps = vs.error_budget([10, 3], Fraction(1, 2))
    assert eps == Fraction(1, 2) * Fraction(1, 4) ** 13
    assert abs(float(eps) - 0.745e-8) < 0.01 * 0.745e-8


def _inverse_norm(nodes):
    x = [sympy.Rational(n.numerator, n.denominator) for n in nodes]
    V = sympy.Matrix([[xi ** j for j in range(len(x))] for xi in x])
    inv = V.inv()
    return max(sum(abs(inv[i, j]) for j in range(len(x))) for i in range(len(x)))


@pytest.mark.parametrize("d", range(1, 9))
def test_error_bound_for_half_spacing(d):
    lam = Fraction(1, 2)
    axis = vs.make_axes([d], lam)[0]
    norm = _inverse_norm(axis.nodes)
    assert norm <= vs.coefficient_error_factor([d], lam)


@pytest.mark.xfail(strict=True, reason="(2/lam)^d is not a bound once lam >= 1")
def test_error_bound_for_spacing_two():
    lam = Fraction(2)
    axis = vs.make_axes([1], lam)[0]
    assert _inverse_norm(axis.nodes) <= vs.coefficient_error_factor([1], lam)


def _tensor_values(coeffs, axes):
    shape = tuple(len(a) for a in axes)
    vals = np.empty(shape, dtype=object)
    for idx in np.ndindex(shape):
        pt = [a.nodes[i] for a, i in zip(axes, idx)]
        vals[idx] = sum(c * np.prod([p ** k for p, k in zip(pt, e)]) for e, c in coeffs.items())
    return vals


def _job(bounds, rng):
    axes = vs.make_axes(bounds, Fraction(1, 2))
    coeffs = {e: rng.randint(-50, 50) for e in itertools.product(*(range(d + 1) for d in bounds))}
    eps = vs.error_budget(bounds, Fraction(1, 2))
    values = _tensor_values(coeffs, axes)
    prec = vs.solve_precision(bounds, axes, eps, max(abs(x) for x in values.flat))
    return vs.InterpolationJob(axes, eps, prec, values), coeffs


@pytest.mark.parametrize("bounds", [(4,), (3, 2), (2, 1, 3), (0, 3)])
def test_tensor_solve_recovers_coefficients(bounds):
    job, coeffs = _job(bounds, random.Random(str(bounds)))
    out = vs.round_to_integers(vs.tensor_solve(job))
    assert not out.unsafe
    for e, c in coeffs.items():
        assert out.integers[e] == c


def test_axis_order_does_not_matter():
    job, coeffs = _job((3, 2, 2), random.Random("order"))
    results = [vs.round_to_integers(vs.tensor_solve(job, order)).integers
               for order in itertools.permutations(range(3))]
    for r in results[1:]:
        assert (r == results[0]).all()
    with pytest.raises(ValueError):
        vs.tensor_solve(job, [0, 0, 1])


def test_padded_bounds_give_zero_coefficients():
    # interpolating with a larger bound than the true degree just adds zeros
    rng = random.Random("pad")
    bounds = (5, 4)
    axes = vs.make_axes(bounds, Fraction(1, 2))
    coeffs = {(i, j): rng.randint(-9, 9) for i in range(3) for j in range(2)}
    values = _tensor_values(coeffs, axes)
    eps = vs.error_budget(bounds, Fraction(1, 2))
    job = vs.InterpolationJob(axes, eps, vs.solve_precision(bounds, axes, eps, max(abs(x) for x in values.flat)), values)
    ints = vs.round_to_integers(vs.tensor_solve(job)).integers
    for idx in np.ndindex(ints.shape):
        assert ints[idx] == coeffs.get(idx, 0)


def test_shape_mismatch():
    axes = vs.make_axes([2], Fraction(1, 2))
    with pytest.raises(ValueError):
        vs.InterpolationJob(axes, Fraction(1, 8), 64, np.zeros((2,), dtype=object))


def test_round_to_integers_flags_ties():
    c = vs.CoefficientTensor(np.array([to_bigfloat(Fraction(5, 2), 64), mpfr(3)], dtype=object))
    out = vs.round_to_integers(c)
    assert out.unsafe
    c = vs.CoefficientTensor(np.array([Fraction(7, 5), 2], dtype=object))
    out = vs.round_to_integers(c)
    assert list(out.integers) == [1, 2] and out.unsafe is True
    c = vs.CoefficientTensor(np.array([Fraction(21, 20), -3], dtype=object))
    assert vs.round_to_integers(c).unsafe is False


def test_noise_exactly_at_budget_can_tie():
    # alternating errors of exactly eps at d = 2 push a coefficient error to 0.5;
    # strict inequality on the values is what makes rounding unambiguous
    lam = Fraction(1, 2)
    axis = vs.make_axes([2], lam)[0]
    eps = vs.error_budget([2], lam)
    err = vs.bp_solve(list(axis.nodes), [eps, -eps, eps])
    assert max(abs(e) for e in err) == Fraction(1, 2)


def test_solve_precision_grows_with_values():
    axes = vs.make_axes([3], Fraction(1, 2))
    eps = vs.error_budget([3], Fraction(1, 2))
    base = vs.solve_precision([3], axes, eps)
    assert vs.solve_precision([3], axes, eps, 2 ** 500) > base + 400


def test_small_examples():
    assert vs.bp_solve([0, 1, 2], [1, 2, 5]) == [1, 0, 1]
    assert vs.bp_solve([Fraction(1, 2), 1, 2], [7, 7, 7]) == [7, 0, 0]
    assert vs.error_budget([0], Fraction(1, 2)) == Fraction(1, 2)
    assert vs.error_budget([1, 1], Fraction(2)) == Fraction(1, 2)
    assert vs.make_axes([3], Fraction(1, 2))[0].nodes == tuple(Fraction(k, 2) for k in range(1, 5))


def test_residual_threshold_examples():
    out = vs.round_to_integers(vs.CoefficientTensor(np.array([mpfr("-0.4999")], dtype=object)))
    assert out.integers[0] == 0 and out.unsafe
    out = vs.round_to_integers(vs.CoefficientTensor(np.array([mpfr("24.0010598569")], dtype=object)))
    assert out.integers[0] == 24 and not out.unsafe
    assert abs(float(out.max_residual) - 0.0010598569) < 1e-9
    out = vs.round_to_integers(vs.CoefficientTensor(np.array([3, -2], dtype=object)))
    assert out.max_residual == 0


# approximate bivariate polynomial printed for the worked example, keyed by (x2, x3) exponents
PRINTED = {(8, 1): 4.99995826234, (10, 0): -20.0000018736, (5, 1): 24.0010598569,
           (7, 0): 12.0025760656, (0, 3): 2.0, (2, 2): -8.00094828634, (8, 0): -9.00045331720,
           (5, 0): 9.01977448800, (6, 0): -3.00897542075, (3, 0): 3.02270681750,
           (3, 1): 9.00076124850, (4, 2): -1.00207248277, (1, 2): 1.00018098282,
           (1, 3): 2.99986559933}


def test_example_reduced_solve_matches_printed_values():
    from symdet import engine, kronmap
    from symdet.exprio import load_instance
    from helpers import EXAMPLE_PATH
    m = load_instance(EXAMPLE_PATH)
    plan = kronmap.make_plan((2, 3, 3), m.varset)
    red = kronmap.reduce_matrix(m, plan)
    axes = vs.make_axes((10, 3), Fraction(1, 2))
    eps = vs.error_budget((10, 3), Fraction(1, 2))
    values, _ = engine.evaluate_grid(red, axes, eps)
    job = vs.InterpolationJob(axes, eps, vs.solve_precision((10, 3), axes, eps, max(abs(x) for x in values.flat)), values)
    coeffs = vs.tensor_solve(job).coefficients
    for idx in np.ndindex(coeffs.shape):
        assert abs(float(coeffs[idx]) - PRINTED.get(idx, 0.0)) < 0.5


def test_exact_recovery_many():
    rng = random.Random("exactness")
    for _ in range(200):
        bounds = tuple(rng.randint(0, 4) for _ in range(rng.randint(1, 3)))
        job, coeffs = _job(bounds, rng)
        out = vs.round_to_integers(vs.tensor_solve(job))
        assert out.max_residual < Fraction(1, 2 ** 40)
        assert all(out.integers[e] == c for e, c in coeffs.items())


def _divided_differences(nodes, values):
    c = list(values)
    d = len(nodes) - 1
    for k in range(d):
        for i in range(d, k, -1):
            c[i] = (c[i] - c[i - 1]) / (nodes[i] - nodes[i - k - 1])
    return c


def _worst_noise_deviation(d, lam):
    # exact worst case over sign patterns of |noise| = 1
    axis = vs.make_axes([d], lam)[0]
    return float(_inverse_norm(axis.nodes))


def test_noise_bound_half_spacing():
    rng = random.Random("noise-unit")
    lam = Fraction(1, 2)
    for _ in range(100):
        d = rng.randint(1, 8)
        axis = vs.make_axes([d], lam)[0]
        delta = Fraction(1, 1 << 30)
        noise = [rng.choice((-1, 1)) * Fraction(rng.randint(0, 1 << 20), 1 << 20) * delta
                 for _ in range(d + 1)]
        dev = max(abs(x) for x in vs.bp_solve(list(axis.nodes), noise))
        assert dev <= vs.coefficient_error_factor([d], lam) * delta
        dd = max(abs(x) for x in _divided_differences(list(axis.nodes), noise))
        assert dd <= vs.coefficient_error_factor([d], lam) * delta


@pytest.mark.parametrize("lam", [Fraction(1), Fraction(2)])
@pytest.mark.xfail(strict=True, reason="worst-case noise exceeds (2/lam)^d when lam >= 1")
def test_noise_bound_wider_spacing(lam):
    assert _worst_noise_deviation(1, lam) <= float(vs.coefficient_error_factor([1], lam))
