"""Expression grammar: text <-> exact algebra values.

Grammar (whitespace-insensitive)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/')? factor)*      # juxtaposition multiplies
    factor := '-' factor | atom ('^' exponent)?
    atom   := INT | NAME | '(' expr ')'
    exponent := INT | '-' INT | '(' '-'? INT ')'

Products preserve written order (the algebra is noncommutative).  Division
is restricted: the divisor must be a central scalar, or evaluate to an
invertible monomial of the target algebra (a single generator power times a
nonzero central coefficient).  Anything else is rejected at evaluation time.

Parsing produces a small AST; evaluation maps names through an environment
to either scalars (ParamRat) or algebra elements (WeylExpr).  Printing is
deterministic under the fixed term order, and ``parse(print(e))`` recovers
``e`` exactly.
"""

from __future__ import annotations

from .coeff import QQ, ParamPoly, ParamRat, is_symbol

__all__ = [
    "ParseError",
    "EvalError",
    "parse",
    "evaluate",
    "parse_scalar",
    "poly_text",
    "rat_text",
]


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class EvalError(ValueError):
    pass


# -- tokenizer ---------------------------------------------------------------

_OPS = set("+-*/^()")


def _tokenize(text: str):
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPS:
            toks.append((ch, ch, i))
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("int", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("name", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    toks.append(("end", "", n))
    return toks


# -- AST ----------------------------------------------------------------------
# nodes: ("int", QQ) ("name", str) ("neg", x) ("add", l, r) ("sub", l, r)
#        ("mul", l, r) ("div", l, r) ("pow", base, int)


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind):
        t = self.next()
        if t[0] != kind:
            raise ParseError(f"expected {kind!r}, found {t[1]!r}", t[2])
        return t

    def parse(self):
        node = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected trailing input {t[1]!r}", t[2])
        return node

    def expr(self):
        node = self.term()
        while True:
            k, _, _ = self.peek()
            if k == "+":
                self.next()
                node = ("add", node, self.term())
            elif k == "-":
                self.next()
                node = ("sub", node, self.term())
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            k, _, _ = self.peek()
            if k == "*":
                self.next()
                node = ("mul", node, self.factor())
            elif k == "/":
                self.next()
                node = ("div", node, self.factor())
            elif k in ("int", "name", "("):
                node = ("mul", node, self.factor())
            else:
                return node

    def factor(self):
        k, v, pos = self.peek()
        if k == "-":
            self.next()
            return ("neg", self.factor())
        node = self.atom()
        k, _, _ = self.peek()
        if k == "^":
            self.next()
            node = ("pow", node, self.exponent())
        return node

    def atom(self):
        k, v, pos = self.next()
        if k == "int":
            return ("int", QQ(int(v)))
        if k == "name":
            return ("name", v)
        if k == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"expected a value, found {v!r}" if v else "unexpected end of input", pos)

    def exponent(self) -> int:
        k, v, pos = self.next()
        if k == "int":
            return int(v)
        if k == "-":
            t = self.expect("int")
            return -int(t[1])
        if k == "(":
            sign = 1
            k2, v2, p2 = self.next()
            if k2 == "-":
                sign = -1
                k2, v2, p2 = self.next()
            if k2 != "int":
                raise ParseError("expected an integer exponent", p2)
            self.expect(")")
            return sign * int(v2)
        raise ParseError("expected an integer exponent", pos)


def parse(text: str):
    """Parse expression text into an AST."""
    return _Parser(text).parse()


# -- evaluation ----------------------------------------------------------------

def evaluate(node, env: dict):
    """Evaluate an AST against an environment of names.

    Environment values may be ParamRat / ParamPoly scalars or WeylExpr
    algebra elements; names not mapped but present in the global parameter
    table evaluate to themselves as scalars.
    """

    def is_scalar(x):
        return isinstance(x, ParamRat)

    def ev(n):
        kind = n[0]
        if kind == "int":
            return ParamRat.const(n[1])
        if kind == "name":
            name = n[1]
            if name in env:
                v = env[name]
                if isinstance(v, ParamPoly):
                    return ParamRat.from_poly(v)
                return v
            if is_symbol(name):
                return ParamRat.sym(name)
            raise EvalError(f"unknown symbol {name!r}")
        if kind == "neg":
            return -ev(n[1])
        if kind == "add":
            return _mixed_add(ev(n[1]), ev(n[2]))
        if kind == "sub":
            return _mixed_add(ev(n[1]), -ev(n[2]))
        if kind == "mul":
            return _mixed_mul(ev(n[1]), ev(n[2]))
        if kind == "div":
            return _mixed_div(ev(n[1]), ev(n[2]))
        if kind == "pow":
            base, e = ev(n[1]), n[2]
            if is_scalar(base):
                return base ** e
            return base.int_pow(e)
        raise EvalError(f"bad AST node {kind!r}")

    return ev(node)


def _mixed_add(x, y):
    if isinstance(x, ParamRat) and isinstance(y, ParamRat):
        return x + y
    if isinstance(x, ParamRat):
        return y.algebra.scalar(x) + y
    if isinstance(y, ParamRat):
        return x + x.algebra.scalar(y)
    return x + y


def _mixed_mul(x, y):
    if isinstance(x, ParamRat) and isinstance(y, ParamRat):
        return x * y
    if isinstance(x, ParamRat):
        return y.scale(x)
    if isinstance(y, ParamRat):
        return x.scale(y)
    return x * y


def _mixed_div(x, y):
    if isinstance(y, ParamRat):
        if y.is_zero():
            raise EvalError("division by zero")
        return _mixed_mul(x, y.inv())
    inv = y.monomial_inverse()
    if inv is None:
        raise EvalError(
            "illegal inverse: divisor is neither central nor an invertible monomial")
    return _mixed_mul(x, inv)


def parse_scalar(text: str, extra_env: dict | None = None) -> ParamRat:
    """Parse text that must evaluate to a central scalar."""
    env = dict(extra_env or {})
    val = evaluate(parse(text), env)
    if not isinstance(val, ParamRat):
        raise EvalError(f"expected a scalar expression: {text!r}")
    return val


# -- printing ------------------------------------------------------------------

from .coeff import SYMBOLS  # noqa: E402


def _mono_text(mono) -> str:
    parts = []
    for idx, e in mono:
        name = SYMBOLS[idx]
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def _qq_text(c: QQ) -> str:
    n, d = c.numerator, c.denominator
    return str(n) if d == 1 else f"{n}/{d}"


def poly_text(p: ParamPoly) -> str:
    if p.is_zero():
        return "0"
    chunks = []
    for mono, c in p.sorted_terms():
        mt = _mono_text(mono)
        neg = c < 0
        ac = -c if neg else c
        if not mt:
            body = _qq_text(ac)
        elif ac == 1:
            body = mt
        else:
            body = f"{_qq_text(ac)}*{mt}"
        if not chunks:
            chunks.append(f"-{body}" if neg else body)
        else:
            chunks.append(f" - {body}" if neg else f" + {body}")
    return "".join(chunks)


def _is_single_term(p: ParamPoly) -> bool:
    return len(p.terms) == 1


def rat_text(r: ParamRat) -> str:
    if r.is_poly():
        return poly_text(r.num)
    num = poly_text(r.num) if _is_single_term(r.num) else f"({poly_text(r.num)})"
    return f"{num}/({poly_text(r.den)})"


def coeff_prefix(c: ParamRat) -> str:
    """Render a coefficient for use in front of a monomial: '', '-', or 'c*'."""
    if c.is_poly():
        v = c.num.as_const()
        if v is not None:
            if v == 1:
                return ""
            if v == -1:
                return "-"
            return f"{_qq_text(v)}*"
        if _is_single_term(c.num):
            return f"{poly_text(c.num)}*"
        return f"({poly_text(c.num)})*"
    return f"{rat_text(c)}*"
