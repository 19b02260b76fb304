"""Expression language for candidate maps.

Grammar, loosest binding first::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?          # right-associative
    atom  := NUMBER | 'x' | FUNC '(' expr ')' | '(' expr ')'

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)`` and
``x^-2`` is ``x^(-2)``.  Implicit multiplication (``2x``) is a syntax error.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Union

from .errors import EvalError, ParseError

FUNCTIONS = ("exp", "log", "sqrt", "abs")


@dataclass(frozen=True)
class Const:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite constant {self.value!r}")


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


Node = Union[Const, Var, Neg, BinOp, Call]
X = Var()


def const(value: float) -> Node:
    """Constant node; negative values become ``Neg(Const(-v))`` so printing re-parses."""
    value = float(value)
    if value < 0 or (value == 0 and math.copysign(1.0, value) < 0):
        return Neg(Const(-value))
    return Const(value)


# --- lexer -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # "num", "name", "op" or "end"
    text: str
    pos: int


def tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(pos, "a token", repr(text[pos]), text)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, expected: str):
        t = self.tok
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ParseError(t.pos, expected, found, self.text)

    def accept(self, op: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == op:
            self.i += 1
            return True
        return False

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            self.fail("an operator or end of input")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.accept("^"):
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            value = float(t.text)
            if not math.isfinite(value):
                raise ParseError(t.pos, "a finite number", repr(t.text), self.text)
            return Const(value)
        if t.kind == "name":
            if t.text == "x":
                self.i += 1
                return X
            if t.text in FUNCTIONS:
                self.i += 1
                if not self.accept("("):
                    self.fail("'('")
                arg = self.expr()
                if not self.accept(")"):
                    self.fail("')'")
                return Call(t.text, arg)
            self.fail("'x' or a function name")
        if self.accept("("):
            node = self.expr()
            if not self.accept(")"):
                self.fail("')'")
            return node
        self.fail("a number, 'x', a function or '('")


def parse(text: str) -> Node:
    return _Parser(text).parse()


# --- printing --------------------------------------------------------------

_LEVEL = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _level(node: Node) -> int:
    if isinstance(node, BinOp):
        return _LEVEL[node.op]
    if isinstance(node, Neg):
        return 3
    return 5


def _fmt_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_text(node: Node) -> str:
    """Canonical text with minimal parentheses; ``parse(to_text(t)) == t``."""

    def wrap(child: Node, need: int) -> str:
        s = to_text(child)
        return f"({s})" if _level(child) < need else s

    if isinstance(node, Const):
        return _fmt_number(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Neg):
        return "-" + wrap(node.operand, 3)
    if isinstance(node, Call):
        return f"{node.name}({to_text(node.arg)})"
    if node.op in "+-":
        return f"{wrap(node.left, 1)} {node.op} {wrap(node.right, 2)}"
    if node.op in "*/":
        return f"{wrap(node.left, 2)}{node.op}{wrap(node.right, 3)}"
    return f"{wrap(node.left, 5)}^{wrap(node.right, 3)}"


# --- evaluation ------------------------------------------------------------


def _checked(v: float, what: str) -> float:
    if not math.isfinite(v):
        raise EvalError(f"{what} is not finite")
    return v


def evaluate(node: Node, x: float) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -evaluate(node.operand, x)
    if isinstance(node, Call):
        a = evaluate(node.arg, x)
        if node.name == "exp":
            try:
                return math.exp(a)
            except OverflowError:
                raise EvalError(f"exp({a!r}) overflows") from None
        if node.name == "log":
            if a <= 0:
                raise EvalError(f"log of non-positive value {a!r}")
            return math.log(a)
        if node.name == "sqrt":
            if a < 0:
                raise EvalError(f"sqrt of negative value {a!r}")
            return math.sqrt(a)
        return abs(a)
    a = evaluate(node.left, x)
    b = evaluate(node.right, x)
    if node.op == "+":
        return _checked(a + b, "sum")
    if node.op == "-":
        return _checked(a - b, "difference")
    if node.op == "*":
        return _checked(a * b, "product")
    if node.op == "/":
        if b == 0:
            raise EvalError("division by zero")
        return _checked(a / b, "quotient")
    try:
        return _checked(math.pow(a, b), "power")
    except (ValueError, ZeroDivisionError):
        raise EvalError(f"{a!r}^{b!r} is undefined") from None
    except OverflowError:
        raise EvalError(f"{a!r}^{b!r} overflows") from None


def substitute(node: Node, replacement: Node) -> Node:
    """Replace every occurrence of ``x`` by ``replacement``."""
    if isinstance(node, Var):
        return replacement
    if isinstance(node, Const):
        return node
    if isinstance(node, Neg):
        return Neg(substitute(node.operand, replacement))
    if isinstance(node, Call):
        return Call(node.name, substitute(node.arg, replacement))
    return BinOp(node.op, substitute(node.left, replacement), substitute(node.right, replacement))


# --- family recognition ----------------------------------------------------


@dataclass(frozen=True)
class _Form:
    # a*x + b and c*x^p views of the same subtree; either may be unknown
    aff: Optional[tuple[float, float]]
    pw: Optional[tuple[float, float]]

    @staticmethod
    def of(aff=None, pw=None) -> "_Form":
        if aff is not None and pw is None:
            a, b = aff
            if b == 0:
                pw = (a, 1.0)
            elif a == 0:
                pw = (b, 0.0)
        if pw is not None and aff is None:
            c, p = pw
            if p == 1:
                aff = (c, 0.0)
            elif p == 0:
                aff = (0.0, c)
        return _Form(aff, pw)

    @property
    def constant(self) -> Optional[float]:
        if self.aff is not None and self.aff[0] == 0:
            return self.aff[1]
        return None


def _finite(*vals) -> bool:
    return all(math.isfinite(v) for v in vals)


def _form(node: Node) -> _Form:
    if isinstance(node, Const):
        return _Form.of(aff=(0.0, node.value))
    if isinstance(node, Var):
        return _Form((1.0, 0.0), (1.0, 1.0))
    if isinstance(node, Neg):
        f = _form(node.operand)
        return _Form(
            None if f.aff is None else (-f.aff[0], -f.aff[1]),
            None if f.pw is None else (-f.pw[0], f.pw[1]),
        )
    if isinstance(node, Call):
        k = _form(node.arg).constant
        if k is None:
            return _Form(None, None)
        try:
            return _Form.of(aff=(0.0, evaluate(Call(node.name, Const(0.0)), k)))
        except EvalError:
            return _Form(None, None)
    lf, rf = _form(node.left), _form(node.right)
    aff = pw = None
    if node.op in "+-":
        s = 1.0 if node.op == "+" else -1.0
        if lf.aff and rf.aff:
            aff = (lf.aff[0] + s * rf.aff[0], lf.aff[1] + s * rf.aff[1])
        elif lf.pw and rf.pw and lf.pw[1] == rf.pw[1]:
            pw = (lf.pw[0] + s * rf.pw[0], lf.pw[1])
    elif node.op == "*":
        if lf.constant is not None and rf.aff:
            aff = (lf.constant * rf.aff[0], lf.constant * rf.aff[1])
        elif rf.constant is not None and lf.aff:
            aff = (rf.constant * lf.aff[0], rf.constant * lf.aff[1])
        if lf.pw and rf.pw:
            pw = (lf.pw[0] * rf.pw[0], lf.pw[1] + rf.pw[1])
    elif node.op == "/":
        k = rf.constant
        if k is not None and k != 0 and lf.aff:
            aff = (lf.aff[0] / k, lf.aff[1] / k)
        if lf.pw and rf.pw and rf.pw[0] != 0:
            pw = (lf.pw[0] / rf.pw[0], lf.pw[1] - rf.pw[1])
    else:
        k = rf.constant
        if k is not None and lf.pw:
            c, p = lf.pw
            if c > 0 or (float(k).is_integer() and c != 0):
                try:
                    pw = (math.pow(c, k), p * k)
                except (OverflowError, ValueError):
                    pw = None
    if aff is not None and not _finite(*aff):
        aff = None
    if pw is not None and not _finite(*pw):
        pw = None
    if aff is None and pw is None:
        return _Form(None, None)
    if aff is not None and pw is not None:
        return _Form(aff, pw)
    return _Form.of(aff=aff, pw=pw)


@dataclass(frozen=True)
class Shape:
    """A recognized closed form.

    ``kind`` is one of identity, translation, affine_neg2 (additive families),
    linear, inverse_square (multiplicative families), or the generic affine and
    power shapes.  ``params`` always holds slope/intercept for affine kinds and
    coeff/exponent for power kinds.
    """

    kind: str
    params: dict

    @property
    def is_family(self) -> bool:
        return self.kind not in ("affine", "power")

    def value(self, x: float) -> float:
        p = self.params
        if "slope" in p:
            return p["slope"] * x + p["intercept"]
        return p["coeff"] * x ** p["exponent"]


def detect_family(node: Node) -> Optional[Shape]:
    f = _form(node)
    if f.aff is not None:
        a, b = f.aff
        if a == 1 and b == 0:
            return Shape("identity", {"slope": 1.0, "intercept": 0.0, "c": 0.0})
        if a == 1:
            return Shape("translation", {"slope": 1.0, "intercept": b, "c": b})
        if a == -2:
            return Shape("affine_neg2", {"slope": -2.0, "intercept": b, "c": b})
    if f.pw is not None:
        c, p = f.pw
        if c > 0 and p == 1:
            return Shape("linear", {"coeff": c, "exponent": 1.0, "c": c})
        if c > 0 and p == -2:
            return Shape("inverse_square", {"coeff": c, "exponent": -2.0, "c": c})
    if f.aff is not None:
        return Shape("affine", {"slope": f.aff[0], "intercept": f.aff[1]})
    if f.pw is not None and f.pw[0] > 0:
        return Shape("power", {"coeff": f.pw[0], "exponent": f.pw[1]})
    return None
