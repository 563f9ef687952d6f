from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest

from symdet.bench import random_poly
from symdet.exprio import (InstanceIOError, ParseError, ResultFile, SchemaError,
                           UnknownVariableError, dumps_instance, dumps_result, format_sci,
                           instance_from_json, load_instance, load_result, parse_poly,
                           print_poly, read_instance, result_from_json, save_instance)
from symdet.polycore import Polynomial, VarSet

from helpers import EXAMPLE_DET, EXAMPLE_PATH, EXAMPLE_VARS

X = EXAMPLE_VARS


def test_parse_example_entry():
    p = parse_poly("5*x1^2-3*x1*x2+2*x3^2", X)
    assert p.terms == {(2, 0, 0): 5, (1, 1, 0): -3, (0, 0, 2): 2}


@pytest.mark.parametrize("text, expected", [
    ("0", "0"),
    ("-7", "-7"),
    ("x1 - x1", "0"),
    ("(x1+1)^2", "x1^2 + 2*x1 + 1"),
    ("-(x2) * -x3", "x2*x3"),
    ("2*3*x1", "6*x1"),
    ("x1^0", "1"),
])
def test_parse_then_print(text, expected):
    assert print_poly(parse_poly(text, X)) == expected


def test_print_then_parse_round_trip():
    rng = random.Random("exprio")
    for _ in range(1000):
        vs = VarSet(tuple(f"x{i + 1}" for i in range(rng.randint(1, 4))))
        p = random_poly(rng, vs, rng.randint(0, 4), 10 ** rng.randint(1, 30), terms=rng.randint(0, 8))
        assert parse_poly(print_poly(p), vs) == p


def test_example_prints_all_terms():
    s = print_poly(EXAMPLE_DET)
    assert s.count("x") >= 14
    assert parse_poly(s, X) == EXAMPLE_DET


@pytest.mark.parametrize("text, line, column", [
    ("x1 +", 1, 5),
    ("2 x1", 1, 3),
    ("x1^x2", 1, 4),
    ("x1^2^3", 1, 5),
    ("(x1 + 1", 1, 8),
    ("x1 $ 2", 1, 4),
    ("x1 +\n  * x2", 2, 3),
    ("", 1, 1),
])
def test_parse_errors_carry_position(text, line, column):
    with pytest.raises(ParseError) as info:
        parse_poly(text, X)
    assert (info.value.line, info.value.column) == (line, column)


def test_unknown_variable():
    with pytest.raises(UnknownVariableError) as info:
        parse_poly("x1 + y", X)
    assert info.value.column == 6
    assert isinstance(info.value, KeyError)


def test_load_example_instance():
    m = load_instance(EXAMPLE_PATH)
    assert m.n == 2
    assert m[0, 0] == parse_poly("5*x1^2-3*x1*x2+2*x3^2", X)
    assert m[1, 1] == parse_poly("x3-4*x2^2", X)


def test_one_by_one_instance():
    inst = instance_from_json({"vars": ["x1"], "matrix": [["x1+1"]]})
    assert inst.to_matrix().n == 1


@pytest.mark.parametrize("doc", [
    [],
    {"vars": ["x1"]},
    {"vars": ["x1"], "matrix": [["x1", "1"]]},
    {"vars": ["x1", "x1"], "matrix": [["x1"]]},
    {"vars": ["x1"], "matrix": [[1]]},
    {"vars": ["x1"], "matrix": [["x1"]], "extra": 1},
    {"vars": ["x1"], "matrix": []},
])
def test_schema_errors(doc):
    with pytest.raises(SchemaError):
        instance_from_json(doc)


def test_entry_parse_error_names_the_entry():
    inst = instance_from_json({"vars": ["x1"], "matrix": [["x1", "1"], ["2", "x1 +"]]})
    with pytest.raises(ParseError, match=r"entry \[1\]\[1\]"):
        inst.to_matrix()


def test_io_errors(tmp_path):
    with pytest.raises(InstanceIOError):
        load_instance(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError):
        load_instance(bad)


def test_instance_file_is_byte_idempotent(tmp_path):
    text = EXAMPLE_PATH.read_text()
    assert dumps_instance(read_instance(EXAMPLE_PATH)) == text
    out = tmp_path / "copy.json"
    save_instance(out, read_instance(EXAMPLE_PATH))
    assert out.read_bytes() == EXAMPLE_PATH.read_bytes()


def test_result_round_trip(tmp_path):
    big = Polynomial(X, {(1, 0, 0): 10 ** 40, (0, 0, 0): -3})
    r = ResultFile.from_polynomial(big, {"epsilon": "7.45e-9", "verified": True})
    doc = json.loads(dumps_result(r))
    assert doc["terms"][0]["coeff"] == str(10 ** 40)
    assert result_from_json(doc).polynomial() == big
    path = tmp_path / "r.json"
    path.write_text(dumps_result(r))
    assert load_result(path).polynomial() == big


@pytest.mark.parametrize("x, expected", [
    (Fraction(1, 2) * Fraction(1, 4) ** 13, "7.45e-9"),
    (Fraction(1), "1.00e0"),
    (Fraction(-12345), "-1.23e4"),
    (0, "0.00e0"),
])
def test_format_sci(x, expected):
    assert format_sci(x) == expected
