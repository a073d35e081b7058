"""Tiny arithmetic/comparison language for execute formulas and branch predicates.

Grammar::

    predicate := sum cmp sum          cmp: == != < <= > >=
    formula   := name '=' sum
    sum       := term (('+'|'-') term)*
    term      := factor (('*'|'/') factor)*
    factor    := number | name | '-' factor | '(' sum ')'

Names resolve through a caller-supplied lookup (entity attributes first,
then state variables).  No eval(), no attribute access, safe on arbitrary
input.
"""

from __future__ import annotations

import re

from .errors import PredicateEvalError

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*|\.\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_.]*)"
    r"|(?P<op>==|!=|<=|>=|[-+*/()<>=]))"
)

_CMP = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def _tokenize(text):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise PredicateEvalError(f"bad token at {text[pos:]!r} in {text!r}")
        if m.group("num") is not None:
            out.append(("num", float(m.group("num"))))
        elif m.group("name") is not None:
            out.append(("name", m.group("name")))
        else:
            out.append(("op", m.group("op")))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, text):
        self.tokens = tokens
        self.pos = 0
        self.text = text

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def fail(self, why):
        raise PredicateEvalError(f"{why} in {self.text!r}")

    def sum(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.take()
            rhs = self.term()
            node = ("+", node, rhs) if op == "+" else ("-", node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.take()
            rhs = self.factor()
            node = ("*", node, rhs) if op == "*" else ("/", node, rhs)
        return node

    def factor(self):
        kind, value = self.take()
        if kind == "num":
            return ("num", value)
        if kind == "name":
            return ("var", value)
        if (kind, value) == ("op", "-"):
            return ("neg", self.factor())
        if (kind, value) == ("op", "("):
            node = self.sum()
            if self.take() != ("op", ")"):
                self.fail("missing ')'")
            return node
        self.fail(f"unexpected {value!r}")


def _eval(node, resolve):
    op = node[0]
    if op == "num":
        return node[1]
    if op == "var":
        return resolve(node[1])
    if op == "neg":
        return -_eval(node[1], resolve)
    a = _eval(node[1], resolve)
    b = _eval(node[2], resolve)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise PredicateEvalError("division by zero")
        return a / b
    raise PredicateEvalError(f"bad node {op!r}")


def _names(node, acc):
    if node[0] == "var":
        acc.add(node[1])
    elif node[0] == "neg":
        _names(node[1], acc)
    elif node[0] not in ("num",):
        _names(node[1], acc)
        _names(node[2], acc)
    return acc


class Predicate:
    """Compiled comparison; call with a name resolver to get a bool."""

    def __init__(self, text: str):
        tokens = _tokenize(text)
        cmp_at = next((i for i, t in enumerate(tokens) if t[0] == "op" and t[1] in _CMP), None)
        if cmp_at is None:
            raise PredicateEvalError(f"predicate needs a comparison: {text!r}")
        self.text = text
        lhs = _Parser(tokens[:cmp_at], text)
        self.lhs = lhs.sum()
        if lhs.pos != cmp_at:
            lhs.fail("trailing tokens before comparison")
        self.op = tokens[cmp_at][1]
        rhs = _Parser(tokens[cmp_at + 1:], text)
        self.rhs = rhs.sum()
        if rhs.pos != len(tokens) - cmp_at - 1:
            rhs.fail("trailing tokens after comparison")

    def names(self) -> set[str]:
        return _names(self.lhs, _names(self.rhs, set()))

    def __call__(self, resolve) -> bool:
        return _CMP[self.op](_eval(self.lhs, resolve), _eval(self.rhs, resolve))


class Formula:
    """Compiled assignment ``name = expression``."""

    def __init__(self, text: str):
        tokens = _tokenize(text)
        if len(tokens) < 3 or tokens[0][0] != "name" or tokens[1] != ("op", "="):
            raise PredicateEvalError(f"formula must look like 'name = expr': {text!r}")
        self.text = text
        self.target = tokens[0][1]
        parser = _Parser(tokens[2:], text)
        self.expr = parser.sum()
        if parser.pos != len(tokens) - 2:
            parser.fail("trailing tokens")

    def names(self) -> set[str]:
        return _names(self.expr, set())

    def __call__(self, resolve) -> float:
        return _eval(self.expr, resolve)
