"""Text form of algebra elements (used by the normal-order subcommand and
by failure residuals in reports).

Grammar (whitespace insignificant between tokens):

    element  := term (('+' | '-') term)*
    term     := ['{' field-expr '}' '*'] factors
    factors  := factor+ with tensor legs separated by '(x)'
    factor   := KIND '[' int [',' int] ']' '(' arg ')'
              | 'delta' '(' zvar '/' zvar ['*' shift] ')'
              | '1'
    arg      := zvar ['*' shift]
    shift    := 'q[' int ',' int ',' int ',' int ']'

KIND is one of Phi, PhiStar, L, LStar, LInv, LStarInv; zvar is a spectral
variable name (z1..z9, x, w); the four integers of a shift are the doubled
coefficients of (1, c1, c2, c3) in the q-exponent.
"""

from __future__ import annotations

import re

from .algebra import (ArgShift, DeltaFactor, Element, GenOcc, L, LINV,
                      LSTAR, LSTARINV, NO_SHIFT, PHI, PHISTAR)
from .errors import ParseError
from .expr import format_ratexpr, parse_expr
from .symfield import RatExpr, VAR_INDEX, VARS

_KIND_TEXT = {PHI: "Phi", PHISTAR: "PhiStar", L: "L", LSTAR: "LStar",
              LINV: "LInv", LSTARINV: "LStarInv"}
_TEXT_KIND = {v: k for k, v in _KIND_TEXT.items()}

_R1 = RatExpr.from_int(1)


def _fmt_shift(h: tuple) -> str:
    if h == NO_SHIFT:
        return ""
    return "*q[%d,%d,%d,%d]" % h


def _fmt_occ(g: GenOcc) -> str:
    kind = _KIND_TEXT[g.kind]
    idx = f"{g.row}" if g.col == 0 and g.kind in (PHI, PHISTAR) \
        else f"{g.row},{g.col}"
    return f"{kind}[{idx}]({VARS[g.arg.var]}{_fmt_shift(g.arg.h)})"


def _fmt_delta(d: DeltaFactor) -> str:
    return (f"delta({VARS[d.avar]}/{VARS[d.bvar]}"
            f"{_fmt_shift(d.h)})")


def format_element(e: Element) -> str:
    if e.is_zero():
        return "0"
    bits = []
    for (flag, deltas, legs), coeff in e.sorted_terms():
        factors = [_fmt_delta(d) for d in deltas]
        leg_txt = []
        for word in legs:
            leg_txt.append(" ".join(_fmt_occ(g) for g in word) or "1")
        factors.append(" (x) ".join(leg_txt))
        body = " ".join(factors)
        if coeff == _R1:
            txt = body
        elif coeff == -_R1:
            txt = f"- {body}"
            bits.append(txt)
            continue
        else:
            txt = f"{{{format_ratexpr(coeff)}}} * {body}"
        bits.append(txt)
    out = ""
    for i, txt in enumerate(bits):
        if txt.startswith("- "):
            out += (" - " if i else "-") + txt[2:]
        else:
            out += (" + " if i else "") + txt
    if any(flag for (flag, _, _) in e.terms):
        flags = sorted({flag for (flag, _, _) in e.terms if flag})
        out += "   [flags: " + ", ".join(flags) + "]"
    return out


_TOKEN = re.compile(
    r"\s*(?:(\(x\))|(\{)|(delta)|([A-Za-z][A-Za-z]*)|(-?\d+)|(.))")


def parse_element(text: str, nlegs: int = None) -> Element:
    """Parse the element grammar; the leg count is inferred from the first
    term unless given."""
    parser = _ElementParser(text)
    return parser.parse(nlegs)


class _ElementParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _error(self, msg):
        line = self.text.count("\n", 0, self.pos) + 1
        col = self.pos - (self.text.rfind("\n", 0, self.pos) + 1) + 1
        raise ParseError(msg, line, col)

    def _eat(self, lit: str) -> bool:
        self._skip_ws()
        if self.text.startswith(lit, self.pos):
            self.pos += len(lit)
            return True
        return False

    def _expect(self, lit: str):
        if not self._eat(lit):
            self._error(f"expected {lit!r}")

    def _int(self) -> int:
        self._skip_ws()
        m = re.match(r"-?\d+", self.text[self.pos:])
        if not m:
            self._error("expected integer")
        self.pos += m.end()
        return int(m.group(0))

    def _ident(self):
        self._skip_ws()
        m = re.match(r"[A-Za-z][A-Za-z0-9]*", self.text[self.pos:])
        if not m:
            return None
        self.pos += m.end()
        return m.group(0)

    def _shift(self) -> tuple:
        save = self.pos
        if not self._eat("*"):
            return NO_SHIFT
        if not self._eat("q["):
            self.pos = save
            return NO_SHIFT
        h = [self._int()]
        for _ in range(3):
            self._expect(",")
            h.append(self._int())
        self._expect("]")
        return tuple(h)

    def _zvar(self) -> int:
        name = self._ident()
        if name is None or name not in VAR_INDEX:
            self._error("expected a spectral variable")
        return VAR_INDEX[name]

    def _coeff(self) -> RatExpr:
        self._skip_ws()
        if not self._eat("{"):
            return _R1
        depth = 1
        start = self.pos
        while self.pos < len(self.text) and depth:
            ch = self.text[self.pos]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
            self.pos += 1
        if depth:
            self._error("unterminated coefficient")
        inner = self.text[start:self.pos - 1]
        coeff = parse_expr(inner)
        self._expect("*")
        return coeff

    def _term(self):
        coeff = self._coeff()
        deltas = []
        legs = [[]]
        saw_unit = False
        while True:
            self._skip_ws()
            if self._eat("(x)"):
                legs.append([])
                continue
            if (self.pos < len(self.text) and self.text[self.pos] == "1"):
                self.pos += 1
                saw_unit = True
                continue
            save = self.pos
            name = self._ident()
            if name is None:
                break
            if name == "delta":
                self._expect("(")
                a = self._zvar()
                self._expect("/")
                b = self._zvar()
                h = self._shift()
                self._expect(")")
                if a > b:
                    a, b = b, a
                    h = tuple(-x for x in h)
                deltas.append(DeltaFactor(a, b, h))
                continue
            if name in _TEXT_KIND:
                kind = _TEXT_KIND[name]
                self._expect("[")
                row = self._int()
                col = 0
                if self._eat(","):
                    col = self._int()
                self._expect("]")
                self._expect("(")
                var = self._zvar()
                h = self._shift()
                self._expect(")")
                legs[-1].append(GenOcc(kind, row, col, ArgShift(var, h)))
                continue
            self.pos = save
            break
        if not deltas and not any(legs) and not saw_unit \
                and coeff == _R1:
            self._error("empty term")
        return coeff, tuple(sorted(deltas)), tuple(tuple(w) for w in legs)

    def parse(self, nlegs=None) -> Element:
        out = None
        sign = 1
        if self._eat("-"):
            sign = -1
        self._skip_ws()
        if self.text[self.pos:].strip() == "0":
            self.pos = len(self.text)
            return Element.zero(nlegs or 1)
        while True:
            coeff, deltas, legs = self._term()
            if nlegs is None:
                nlegs = len(legs)
            if len(legs) != nlegs:
                self._error(f"expected {nlegs} tensor legs")
            term = Element(nlegs, {("", deltas, legs): coeff * sign}
                           if not coeff.is_zero() else {})
            out = term if out is None else out + term
            self._skip_ws()
            if self._eat("+"):
                sign = 1
            elif self._eat("-"):
                sign = -1
            else:
                break
        self._skip_ws()
        if self.pos != len(self.text):
            self._error("trailing input")
        return out if out is not None else Element.zero(nlegs or 1)
