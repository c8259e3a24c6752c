"""Polynomial text format: recursive-descent parser and canonical printer.

Grammar (no implicit multiplication, no division except rational literals):

    expr   := [ "+" | "-" ] term { ("+" | "-") term }
    term   := factor { "*" factor }
    factor := number | int "/" int | var | var "^" uint | "(" expr ")"

Numbers may be integers or decimal literals; both parse to exact rationals.
Printing is canonical (graded-lex descending, rational coefficients) and
``parse(print(p)) == p`` holds for every polynomial with rational
coefficients.  Float coefficients are printed as their exact rational value,
so printing is lossless.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Sequence

from bcsynth.poly import Polynomial, grlex_key


class PolynomialSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


_TOKEN_RE = re.compile(
    r"(?P<num>\d+\.\d+|\d+|\.\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()])|(?P<ws>\s+)|(?P<bad>.)"
)


def _tokenize(text: str):
    tokens = []
    line, col = 1, 1
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        value = m.group()
        if kind == "ws":
            for ch in value:
                if ch == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
            continue
        if kind == "bad":
            raise PolynomialSyntaxError(f"unexpected character {value!r}", line, col)
        tokens.append((kind, value, line, col))
        col += len(value)
    tokens.append(("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.vars = tuple(variables)

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str):
        _, value, line, col = self.peek()
        raise PolynomialSyntaxError(message, line, col)

    def parse(self) -> Polynomial:
        p = self.expr()
        if self.peek()[0] != "end":
            self.error(f"trailing input starting at {self.peek()[1]!r}")
        return p

    def expr(self) -> Polynomial:
        sign = 1
        if self.peek()[:2] in (("op", "+"), ("op", "-")):
            sign = -1 if self.advance()[1] == "-" else 1
        p = self.term() * sign
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.advance()[1]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Polynomial:
        p = self.factor()
        while self.peek()[:2] == ("op", "*"):
            self.advance()
            p = p * self.factor()
        return p

    def factor(self) -> Polynomial:
        kind, value, line, col = self.peek()
        if kind == "num":
            self.advance()
            num = Fraction(value)
            if self.peek()[:2] == ("op", "/"):
                if "." in value:
                    self.error("rational literals require integer numerator")
                self.advance()
                dk, dv, dl, dc = self.peek()
                if dk != "num" or "." in dv:
                    self.error("expected integer denominator")
                self.advance()
                if int(dv) == 0:
                    raise PolynomialSyntaxError("zero denominator", dl, dc)
                num = Fraction(int(value), int(dv))
            return Polynomial.constant(self.vars, num)
        if kind == "name":
            self.advance()
            if value not in self.vars:
                raise PolynomialSyntaxError(f"unknown variable {value!r}", line, col)
            p = Polynomial.variable(self.vars, value)
            if self.peek()[:2] == ("op", "^"):
                self.advance()
                ek, ev, el, ec = self.peek()
                if ek != "num" or "." in ev:
                    self.error("expected integer exponent after '^'")
                self.advance()
                p = p ** int(ev)
            return p
        if (kind, value) == ("op", "("):
            self.advance()
            p = self.expr()
            if self.peek()[:2] != ("op", ")"):
                self.error("expected ')'")
            self.advance()
            return p
        self.error(f"expected number, variable or '(' but found {value!r}" if value else "unexpected end of input")


def parse_polynomial(text: str, variables: Sequence[str]) -> Polynomial:
    """Parse text into an exact-rational polynomial over the given variables."""
    if not text or not text.strip():
        raise PolynomialSyntaxError("empty polynomial", 1, 1)
    return _Parser(text, variables).parse()


def _format_coeff(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def format_polynomial(p: Polynomial) -> str:
    """Canonical text form: graded-lex descending, explicit '*', rational coefficients."""
    if not p.terms:
        return "0"
    pieces = []
    for expo, coeff in sorted(p.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True):
        c = Fraction(coeff) if not isinstance(coeff, Fraction) else coeff
        mono = [
            (v if e == 1 else f"{v}^{e}")
            for v, e in zip(p.vars, expo)
            if e
        ]
        mag = abs(c)
        if not mono:
            body = _format_coeff(mag)
        elif mag == 1:
            body = "*".join(mono)
        else:
            body = "*".join([_format_coeff(mag)] + mono)
        pieces.append(("-" if c < 0 else "+", body))
    sign, body = pieces[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out
