"""Text grammar for coefficient-field expressions.

Accepted: integers, identifiers q, s, u1..u3, x, z1..z9, w, the operators
+ - * / ^ (integer exponents), and parentheses; whitespace is
insignificant.  s stands for q^(1/2) (internally q = s^2); u_t stands for
q^(c_t/2).  The printer emits text that re-parses to an equal RatExpr.
"""

from __future__ import annotations

import re

from .errors import ParseError
from .symfield import RatExpr, S, VARS, mono_key

_IDENTS = set(VARS) | {"q"}

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


class _Tokenizer:
    def __init__(self, text: str, line_offset: int = 1):
        self.text = text
        self.pos = 0
        self.line_offset = line_offset
        self.tokens = []
        self._scan()
        self.idx = 0

    def _loc(self, pos: int):
        line = self.text.count("\n", 0, pos) + self.line_offset
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def _scan(self):
        pos = 0
        n = len(self.text)
        while pos < n:
            m = _TOKEN_RE.match(self.text, pos)
            if not m:
                break
            start = m.start(1) if m.group(1) else (
                m.start(2) if m.group(2) else m.start(3))
            if m.group(1):
                self.tokens.append(("int", int(m.group(1)), start))
            elif m.group(2):
                self.tokens.append(("ident", m.group(2), start))
            else:
                ch = m.group(3)
                if ch.strip():
                    self.tokens.append((ch, ch, start))
            pos = m.end()
        self.tokens.append(("end", None, n))

    def peek(self):
        return self.tokens[self.idx]

    def next(self):
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def error(self, message: str, tok=None):
        tok = tok or self.peek()
        line, col = self._loc(tok[2])
        raise ParseError(message, line, col)


def _parse_exponent(tz: _Tokenizer) -> int:
    kind, val, _ = tz.peek()
    neg = False
    parens = False
    if kind == "(":
        tz.next()
        parens = True
        kind, val, _ = tz.peek()
    if kind == "-":
        tz.next()
        neg = True
        kind, val, _ = tz.peek()
    if kind != "int":
        tz.error("expected integer exponent")
    tz.next()
    if parens:
        if tz.peek()[0] != ")":
            tz.error("expected ')' after exponent")
        tz.next()
    return -val if neg else val


def _parse_atom(tz: _Tokenizer) -> RatExpr:
    kind, val, _ = tz.peek()
    if kind == "int":
        tz.next()
        return RatExpr.from_int(val)
    if kind == "ident":
        if val not in _IDENTS:
            tz.error(f"unknown identifier {val!r}")
        tz.next()
        if val == "q":
            return RatExpr.var("s", 2)
        return RatExpr.var(val)
    if kind == "(":
        tz.next()
        out = _parse_sum(tz)
        if tz.peek()[0] != ")":
            tz.error("expected ')'")
        tz.next()
        return out
    tz.error("expected integer, identifier or '('")


def _parse_factor(tz: _Tokenizer) -> RatExpr:
    base = _parse_atom(tz)
    if tz.peek()[0] == "^":
        tz.next()
        return base ** _parse_exponent(tz)
    return base


def _parse_unary(tz: _Tokenizer) -> RatExpr:
    if tz.peek()[0] == "-":
        tz.next()
        return -_parse_unary(tz)
    return _parse_factor(tz)


def _parse_term(tz: _Tokenizer) -> RatExpr:
    out = _parse_unary(tz)
    while tz.peek()[0] in ("*", "/"):
        op = tz.next()[0]
        rhs = _parse_unary(tz)
        out = out * rhs if op == "*" else out / rhs
    return out


def _parse_sum(tz: _Tokenizer) -> RatExpr:
    out = _parse_term(tz)
    while tz.peek()[0] in ("+", "-"):
        op = tz.next()[0]
        rhs = _parse_term(tz)
        out = out + rhs if op == "+" else out - rhs
    return out


def parse_expr(text: str, line_offset: int = 1) -> RatExpr:
    tz = _Tokenizer(text, line_offset)
    out = _parse_sum(tz)
    if tz.peek()[0] != "end":
        tz.error("trailing input")
    return out


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def _format_var(v: int, e: int) -> str:
    if v == S:
        if e % 2 == 0:
            k = e // 2
            return "q" if k == 1 else f"q^{k}"
        return "s" if e == 1 else f"s^{e}"
    name = VARS[v]
    return name if e == 1 else f"{name}^{e}"


def _format_poly(terms: dict) -> str:
    if not terms:
        return "0"
    bits = []
    for m in sorted(terms, key=mono_key, reverse=True):
        c = terms[m]
        factors = [_format_var(v, e) for v, e in m]
        if not factors:
            body = str(abs(c))
        elif abs(c) == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(abs(c))] + factors)
        bits.append(("-" if c < 0 else "+", body))
    sign, body = bits[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in bits[1:]:
        out += f" {sign} {body}"
    return out


def format_ratexpr(a: RatExpr) -> str:
    num = _format_poly(a.num.terms)
    if a.den.is_one():
        if len(a.num.terms) > 1:
            return f"({num})"
        return num
    return f"({num})/({_format_poly(a.den.terms)})"
