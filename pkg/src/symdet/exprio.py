"""Polynomial expression syntax and the JSON instance / result files.

Grammar (explicit ``*`` required, no implicit multiplication)::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' INT)?
    atom   := INT | NAME | '(' expr ')'

Integer literals have unbounded size.  ``-x^2`` parses as ``-(x^2)``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .polycore import Polynomial, PolyMatrix, UnknownVariableError as _UnknownVar, VarSet


class InstanceError(Exception):
    """Base class for instance/result file problems."""


class InstanceIOError(InstanceError):
    """The file could not be read or written."""


class SchemaError(InstanceError):
    """The JSON document does not follow the expected schema."""


class ParseError(InstanceError, ValueError):
    """Malformed polynomial expression."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"{message} at line {line}, column {column}")


class UnknownVariableError(ParseError, _UnknownVar):
    """Expression mentions a variable outside the declared VarSet."""

    def __str__(self) -> str:
        return f"{self.message} at line {self.line}, column {self.column}"


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only trailing whitespace left
            break
        if m.group(1):
            tokens.append(("int", m.group(1), m.start(1)))
        elif m.group(2):
            tokens.append(("name", m.group(2), m.start(2)))
        else:
            ch = m.group(3)
            if ch not in "+-*^()":
                raise ParseError(f"unexpected character {ch!r}", *_line_col(text, m.start(3)))
            tokens.append((ch, ch, m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


class _Parser:
    def __init__(self, text: str, varset: VarSet):
        self.text = text
        self.varset = varset
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message: str, tok) -> ParseError:
        return ParseError(message, *_line_col(self.text, tok[2]))

    def parse(self) -> Polynomial:
        if self.peek()[0] == "end":
            raise self.fail("empty expression", self.peek())
        p = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            if tok[0] in ("int", "name", "("):
                raise self.fail(f"expected operator before {tok[1]!r} (use explicit '*')", tok)
            raise self.fail(f"unexpected {tok[1]!r}", tok)
        return p

    def expr(self) -> Polynomial:
        p = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Polynomial:
        p = self.unary()
        while self.peek()[0] == "*":
            self.take()
            p = p * self.unary()
        return p

    def unary(self) -> Polynomial:
        kind = self.peek()[0]
        if kind == "-":
            self.take()
            return -self.unary()
        if kind == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "int":
                raise self.fail("exponent must be a non-negative integer literal", tok)
            base = base ** int(tok[1])
            if self.peek()[0] == "^":
                raise self.fail("chained '^' is ambiguous; use parentheses", self.peek())
        return base

    def atom(self) -> Polynomial:
        tok = self.take()
        kind = tok[0]
        if kind == "int":
            return Polynomial.constant(self.varset, int(tok[1]))
        if kind == "name":
            if tok[1] not in self.varset:
                raise UnknownVariableError(f"unknown variable {tok[1]!r}",
                                           *_line_col(self.text, tok[2]))
            return Polynomial.variable(self.varset, tok[1])
        if kind == "(":
            p = self.expr()
            close = self.take()
            if close[0] != ")":
                raise self.fail("expected ')'", close)
            return p
        if kind == "end":
            raise self.fail("unexpected end of expression", tok)
        raise self.fail(f"unexpected {tok[1]!r}", tok)


def parse_poly(text: str, vars: VarSet | list[str] | tuple[str, ...]) -> Polynomial:
    """Parse ``text`` into a canonical Polynomial over ``vars``."""
    varset = vars if isinstance(vars, VarSet) else VarSet(tuple(vars))
    return _Parser(text, varset).parse()


def _monomial_str(names, exps) -> str:
    parts = []
    for name, e in zip(names, exps):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def print_poly(p: Polynomial) -> str:
    """Canonical text: descending graded-lex order, explicit ``*`` and ``^``."""
    if not p:
        return "0"
    names = p.varset.names
    out = []
    for k, (exps, c) in enumerate(p.items()):
        mono = _monomial_str(names, exps)
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if k == 0:
            out.append(body if c > 0 else "-" + body)
        else:
            out.append(("+ " if c > 0 else "- ") + body)
    return " ".join(out)


# -- instance files -------------------------------------------------------

@dataclass
class InstanceFile:
    vars: list[str]
    matrix: list[list[str]]
    label: str | None = None
    seed: int | None = None

    def to_matrix(self) -> PolyMatrix:
        varset = VarSet(tuple(self.vars))
        rows = []
        for i, row in enumerate(self.matrix):
            parsed = []
            for j, text in enumerate(row):
                try:
                    parsed.append(parse_poly(text, varset))
                except ParseError as exc:
                    exc.message = f"entry [{i}][{j}]: {exc.message}"
                    exc.args = (f"{exc.message} at line {exc.line}, column {exc.column}",)
                    raise
            rows.append(parsed)
        return PolyMatrix(rows, varset)

    @classmethod
    def from_matrix(cls, m: PolyMatrix, label: str | None = None,
                    seed: int | None = None) -> InstanceFile:
        return cls(list(m.varset.names), [[print_poly(p) for p in r] for r in m.rows],
                   label, seed)

    def to_json(self) -> dict:
        doc: dict[str, Any] = {"vars": list(self.vars), "matrix": [list(r) for r in self.matrix]}
        if self.label is not None:
            doc["label"] = self.label
        if self.seed is not None:
            doc["seed"] = self.seed
        return doc


def _read_json(path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InstanceIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InstanceIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def instance_from_json(doc: Any) -> InstanceFile:
    if not isinstance(doc, dict):
        raise SchemaError("instance must be a JSON object")
    unknown = set(doc) - {"vars", "matrix", "label", "seed"}
    if unknown:
        raise SchemaError(f"unknown instance keys: {sorted(unknown)}")
    vars_ = doc.get("vars")
    if not isinstance(vars_, list) or not all(isinstance(v, str) and v for v in vars_):
        raise SchemaError("'vars' must be a list of non-empty strings")
    if len(set(vars_)) != len(vars_):
        raise SchemaError("'vars' contains duplicates")
    matrix = doc.get("matrix")
    if not isinstance(matrix, list) or not matrix:
        raise SchemaError("'matrix' must be a non-empty list of rows")
    n = len(matrix)
    for row in matrix:
        if not isinstance(row, list) or len(row) != n:
            raise SchemaError(f"'matrix' must be square ({n} rows of {n} strings)")
        if not all(isinstance(e, str) for e in row):
            raise SchemaError("matrix entries must be expression strings")
    label = doc.get("label")
    if label is not None and not isinstance(label, str):
        raise SchemaError("'label' must be a string")
    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise SchemaError("'seed' must be an integer")
    return InstanceFile(list(vars_), [list(r) for r in matrix], label, seed)


def read_instance(path) -> InstanceFile:
    return instance_from_json(_read_json(path))


def load_instance(path) -> PolyMatrix:
    """Load an instance file into a PolyMatrix (I/O, schema and parse errors differ)."""
    return read_instance(path).to_matrix()


def dumps_instance(inst: InstanceFile | PolyMatrix) -> str:
    if isinstance(inst, PolyMatrix):
        inst = InstanceFile.from_matrix(inst)
    return json.dumps(inst.to_json(), indent=2, sort_keys=True) + "\n"


def save_instance(path, inst: InstanceFile | PolyMatrix) -> None:
    _write_text(path, dumps_instance(inst))


# -- result files ---------------------------------------------------------

def format_sci(x, digits: int = 3) -> str:
    """Scientific notation with ``digits`` significant digits, e.g. '7.45e-9'."""
    import gmpy2
    from fractions import Fraction

    if isinstance(x, Fraction):
        x = gmpy2.mpq(x.numerator, x.denominator)
    with gmpy2.context(precision=max(64, 4 * digits)):
        x = gmpy2.mpfr(x)
        if x == 0:
            return "0." + "0" * (digits - 1) + "e0"
        mant, exp, _ = x.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    return f"{sign}{mant[0]}.{mant[1:]}e{exp - 1}"


@dataclass
class ResultFile:
    determinant: str
    terms: list[tuple[tuple[int, ...], int]]
    diagnostics: dict[str, Any] = field(default_factory=dict)
    vars: list[str] | None = None

    @classmethod
    def from_polynomial(cls, p: Polynomial, diagnostics: dict | None = None) -> ResultFile:
        return cls(print_poly(p), [(e, c) for e, c in p.items()], dict(diagnostics or {}),
                   list(p.varset.names))

    def polynomial(self, varset: VarSet | None = None) -> Polynomial:
        if varset is None:
            if self.vars is None:
                raise SchemaError("result has no 'vars'; pass a VarSet")
            varset = VarSet(tuple(self.vars))
        return Polynomial(varset, dict(self.terms))

    def to_json(self) -> dict:
        doc: dict[str, Any] = {
            "determinant": self.determinant,
            "terms": [{"exps": list(e), "coeff": str(c)} for e, c in self.terms],
            "diagnostics": self.diagnostics,
        }
        if self.vars is not None:
            doc["vars"] = list(self.vars)
        return doc


def dumps_result(r: ResultFile) -> str:
    return json.dumps(r.to_json(), indent=2, sort_keys=True) + "\n"


def write_result(path, r: ResultFile) -> None:
    _write_text(path, dumps_result(r))


def result_from_json(doc: Any) -> ResultFile:
    if not isinstance(doc, dict) or "determinant" not in doc or "terms" not in doc:
        raise SchemaError("result must be an object with 'determinant' and 'terms'")
    terms = []
    for t in doc["terms"]:
        try:
            terms.append((tuple(int(e) for e in t["exps"]), int(t["coeff"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed term {t!r}") from exc
    diagnostics = doc.get("diagnostics", {})
    if not isinstance(diagnostics, dict):
        raise SchemaError("'diagnostics' must be an object")
    return ResultFile(doc["determinant"], terms, diagnostics, doc.get("vars"))


def load_result(path) -> ResultFile:
    return result_from_json(_read_json(path))
