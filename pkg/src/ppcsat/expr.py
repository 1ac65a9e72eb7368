"""Scalar math expressions: parsing, evaluation, and symbolic differentiation.

Expression trees define the plant nonlinearity, control gain, disturbance,
and desired trajectory.  Trees are immutable and all operations are pure.

Grammar precedence, loosest to tightest: + -, * /, unary -, ^ (right
associative).  Function calls are `name(expr)` with a single argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Union

__all__ = [
    "ExprNode",
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "ExprError",
    "ExprSyntaxError",
    "EvalError",
    "DifferentiationError",
    "parse",
    "evaluate",
    "differentiate",
    "to_source",
    "variables",
    "compile_fn",
]


class ExprError(Exception):
    """Base class for expression failures."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvalError(ExprError):
    """Unbound variable or arithmetic domain failure during evaluation."""


class DifferentiationError(ExprError):
    """Expression contains a primitive with no derivative (abs, sign)."""


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    child: "ExprNode"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of "+-*/^"
    left: "ExprNode"
    right: "ExprNode"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "ExprNode"


ExprNode = Union[Const, Var, Neg, BinOp, Call]


def _sign(x: float) -> float:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


_FUNCTIONS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "ln": math.log,
    "abs": abs,
    "sqrt": math.sqrt,
    "sign": _sign,
}

_CONSTANTS = {"pi": math.pi, "e": math.e}


# ---------------------------------------------------------------------------
# Tokenizer / parser
# ---------------------------------------------------------------------------

_OPERATOR_CHARS = set("+-*/^()")


def _tokenize(source: str) -> Iterator[tuple[str, str, int]]:
    """Yield (kind, text, offset) triples; kinds: num, ident, op."""
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _OPERATOR_CHARS:
            yield ("op", ch, i)
            i += 1
            continue
        if ch.isdigit() or ch == ".":
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                float(text)
            except ValueError:
                raise ExprSyntaxError(f"malformed number {text!r}", i) from None
            yield ("num", text, i)
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            yield ("ident", source[i:j], i)
            i = j
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", i)
    yield ("end", "", n)


class _Parser:
    def __init__(self, source: str):
        self.tokens = list(_tokenize(source))
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, text: str) -> None:
        kind, tok, off = self.peek()
        if kind != "op" or tok != text:
            raise ExprSyntaxError(f"expected {text!r}", off)
        self.advance()

    def parse_sum(self) -> ExprNode:
        node = self.parse_product()
        while True:
            kind, tok, _ = self.peek()
            if kind == "op" and tok in "+-":
                self.advance()
                node = BinOp(tok, node, self.parse_product())
            else:
                return node

    def parse_product(self) -> ExprNode:
        node = self.parse_unary()
        while True:
            kind, tok, _ = self.peek()
            if kind == "op" and tok in "*/":
                self.advance()
                node = BinOp(tok, node, self.parse_unary())
            else:
                return node

    def parse_unary(self) -> ExprNode:
        kind, tok, _ = self.peek()
        if kind == "op" and tok == "-":
            self.advance()
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> ExprNode:
        base = self.parse_atom()
        kind, tok, _ = self.peek()
        if kind == "op" and tok == "^":
            self.advance()
            # right associative; exponent may carry a unary minus
            return BinOp("^", base, self.parse_unary())
        return base

    def parse_atom(self) -> ExprNode:
        kind, tok, off = self.advance()
        if kind == "num":
            return Const(float(tok))
        if kind == "ident":
            nkind, ntok, _ = self.peek()
            if nkind == "op" and ntok == "(":
                if tok not in _FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {tok!r}", off)
                self.advance()
                arg = self.parse_sum()
                self.expect_op(")")
                return Call(tok, arg)
            if tok in _CONSTANTS:
                return Const(_CONSTANTS[tok])
            return Var(tok)
        if kind == "op" and tok == "(":
            node = self.parse_sum()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(f"unexpected token {tok!r}" if tok else "unexpected end of input", off)


def parse(source: str) -> ExprNode:
    """Parse an expression string into an immutable tree."""
    if not source.strip():
        raise ExprSyntaxError("empty input", 0)
    parser = _Parser(source)
    node = parser.parse_sum()
    kind, tok, off = parser.peek()
    if kind != "end":
        raise ExprSyntaxError(f"trailing input {tok!r}", off)
    return node


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def evaluate(node: ExprNode, env: dict[str, float]) -> float:
    """Evaluate in IEEE double precision; domain failures raise EvalError."""
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise EvalError(f"unbound variable {node.name!r}") from None
    if isinstance(node, Neg):
        return -evaluate(node.child, env)
    if isinstance(node, BinOp):
        lhs = evaluate(node.left, env)
        rhs = evaluate(node.right, env)
        op = node.op
        if op == "+":
            return lhs + rhs
        if op == "-":
            return lhs - rhs
        if op == "*":
            return lhs * rhs
        if op == "/":
            if rhs == 0.0:
                raise EvalError("division by zero")
            return lhs / rhs
        try:
            return lhs**rhs
        except (ValueError, OverflowError) as exc:
            raise EvalError(f"power domain error: {lhs}^{rhs}") from exc
    if isinstance(node, Call):
        arg = evaluate(node.arg, env)
        if node.func == "ln" and arg <= 0.0:
            raise EvalError(f"ln of nonpositive value {arg}")
        if node.func == "sqrt" and arg < 0.0:
            raise EvalError(f"sqrt of negative value {arg}")
        try:
            return _FUNCTIONS[node.func](arg)
        except (ValueError, OverflowError) as exc:
            raise EvalError(f"{node.func}({arg}) domain error") from exc
    raise TypeError(f"not an ExprNode: {node!r}")


def variables(node: ExprNode) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Neg):
        return variables(node.child)
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    if isinstance(node, Call):
        return variables(node.arg)
    return set()


# ---------------------------------------------------------------------------
# Symbolic differentiation
# ---------------------------------------------------------------------------

_ZERO = Const(0.0)
_ONE = Const(1.0)


def differentiate(node: ExprNode, var: str) -> ExprNode:
    """Exact symbolic derivative with respect to `var`.

    No simplification beyond dropping trivially zero branches; repeated
    application yields higher derivatives.
    """
    if isinstance(node, Const):
        return _ZERO
    if isinstance(node, Var):
        return _ONE if node.name == var else _ZERO
    if isinstance(node, Neg):
        return Neg(differentiate(node.child, var))
    if isinstance(node, BinOp):
        du = differentiate(node.left, var)
        dv = differentiate(node.right, var)
        u, v = node.left, node.right
        op = node.op
        if op in "+-":
            return BinOp(op, du, dv)
        if op == "*":
            return BinOp("+", BinOp("*", du, v), BinOp("*", u, dv))
        if op == "/":
            num = BinOp("-", BinOp("*", du, v), BinOp("*", u, dv))
            return BinOp("/", num, BinOp("*", v, v))
        # power
        if dv == _ZERO or isinstance(v, Const):
            # d(u^c) = c*u^(c-1)*u'
            c = evaluate(v, {}) if isinstance(v, Const) else None
            if c is not None:
                return BinOp(
                    "*",
                    BinOp("*", Const(c), BinOp("^", u, Const(c - 1.0))),
                    du,
                )
        # general u^v = exp(v ln u)
        term1 = BinOp("*", dv, Call("ln", u))
        term2 = BinOp("/", BinOp("*", v, du), u)
        return BinOp("*", node, BinOp("+", term1, term2))
    if isinstance(node, Call):
        darg = differentiate(node.arg, var)
        f, u = node.func, node.arg
        if f == "sin":
            outer: ExprNode = Call("cos", u)
        elif f == "cos":
            outer = Neg(Call("sin", u))
        elif f == "tan":
            cos_u = Call("cos", u)
            outer = BinOp("/", _ONE, BinOp("*", cos_u, cos_u))
        elif f == "exp":
            outer = node
        elif f == "ln":
            outer = BinOp("/", _ONE, u)
        elif f == "sqrt":
            outer = BinOp("/", Const(0.5), node)
        else:
            raise DifferentiationError(f"{f!r} is not differentiable")
        return BinOp("*", outer, darg)
    raise TypeError(f"not an ExprNode: {node!r}")


# ---------------------------------------------------------------------------
# Printing and compilation
# ---------------------------------------------------------------------------


def to_source(node: ExprNode) -> str:
    """Render a fully parenthesized string that reparses to the same tree."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.child)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)}{node.op}{to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(f"not an ExprNode: {node!r}")


_PY_FUNCS = {
    "sin": "math.sin",
    "cos": "math.cos",
    "tan": "math.tan",
    "exp": "math.exp",
    "ln": "math.log",
    "abs": "abs",
    "sqrt": "math.sqrt",
    "sign": "_sign",
}


def _py_source(node: ExprNode) -> str:
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{_py_source(node.child)})"
    if isinstance(node, BinOp):
        op = "**" if node.op == "^" else node.op
        return f"({_py_source(node.left)}{op}{_py_source(node.right)})"
    if isinstance(node, Call):
        return f"{_PY_FUNCS[node.func]}({_py_source(node.arg)})"
    raise TypeError(f"not an ExprNode: {node!r}")


def compile_fn(node: ExprNode, params: tuple[str, ...]) -> Callable[..., float]:
    """Compile a tree to a fast positional-argument callable.

    Used in simulation hot loops; semantics match `evaluate` except that
    arithmetic domain failures surface as the native Python exceptions.
    """
    missing = variables(node) - set(params)
    if missing:
        raise EvalError(f"unbound variables {sorted(missing)}")
    src = f"lambda {', '.join(params)}: {_py_source(node)}" if params else f"lambda: {_py_source(node)}"
    return eval(src, {"math": math, "_sign": _sign, "__builtins__": {"abs": abs}})
