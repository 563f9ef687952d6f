"""Shared corpora and fixtures data for the test suite."""

from __future__ import annotations

import random
from pathlib import Path

from symdet.bench import random_matrix
from symdet.exprio import parse_poly
from symdet.polycore import VarSet

DATA = Path(__file__).parent / "data"
EXAMPLE_PATH = DATA / "example_3_1.json"
EXAMPLE_VARS = VarSet(("x1", "x2", "x3"))
EXAMPLE_DET = parse_poly(
    "5*x1^2*x3 - 20*x1^2*x2^2 + 24*x1*x2*x3 + 12*x1*x2^3 + 2*x3^3 - 8*x2^2*x3^2"
    " - 9*x1^2 + 9*x1*x2 - 3*x1*x2^2 + 3*x2^3 + 9*x2^3*x3 - x1*x3^2 + x2*x3^2"
    " + 3*x2*x3^3", EXAMPLE_VARS)

FUZZ_SIZE = 100


def fuzz_instance(i: int):
    """Instance ``i`` of the oracle-equivalence corpus.

    n cycles through 1..6; v in 1..3, per-variable degree in 1..3 and the
    number of terms per entry in 0..3 are drawn from a per-instance stream,
    coefficients are uniform in [-9, 9] without zero.
    """
    rng = random.Random(f"fuzz:{i}")
    n = 1 + i % 6
    v = rng.randint(1, 3)
    d = rng.randint(1, 3)
    return random_matrix(rng, n, v, d, 9, terms=lambda r: r.randint(0, 3))


def fuzz_corpus():
    return [fuzz_instance(i) for i in range(FUZZ_SIZE)]
