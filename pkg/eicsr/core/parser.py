"""
Infix formula parser.

Grammar: identifiers (x1..xd or declared column names), decimal/scientific
literals, + - * / ^ (or **), function calls name(...), parentheses.
Precedence: ^ (right-assoc) > unary minus > * / > + -. Implemented as a
Pratt parser over a token list; every error reports a byte offset.
"""
import math
import re
from dataclasses import dataclass
from typing import Sequence

from eicsr.core.exceptions import ExprSyntaxError, UnknownSymbolError
from eicsr.core.expression import Binary, Constant, Expression, Unary, Variable
from eicsr.core.operators import FUNCTION_NAMES, BinaryOp, UnaryOp

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.VERBOSE,
)

_VARIABLE_RE = re.compile(r"x([1-9][0-9]*)")

# left binding powers
_INFIX: dict[str, tuple[int, BinaryOp]] = {
    "+": (10, BinaryOp.ADD),
    "-": (10, BinaryOp.SUB),
    "*": (20, BinaryOp.MUL),
    "/": (20, BinaryOp.DIV),
    "^": (30, BinaryOp.POW),
}
_NEG_OPERAND_BP = 25


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | op | end
    text: str
    offset: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        kind = match.lastgroup or ""
        if kind != "ws":
            value = match.group()
            if value == "**":
                value = "^"
            tokens.append(Token(kind, value, _byte_offset(text, pos)))
        pos = match.end()
    tokens.append(Token("end", "", _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, tokens: list[Token], names: Sequence[str] | None) -> None:
        self.tokens = tokens
        self.pos = 0
        self.names = list(names) if names is not None else None

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, ahead: int = 1) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.current
        if token.kind != "end":
            self.pos += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.current
        if token.text != text or token.kind == "end":
            found = "end of input" if token.kind == "end" else repr(token.text)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", token.offset)
        return self.advance()

    def expression(self, rbp: int = 0) -> Expression:
        left = self.prefix()
        while True:
            token = self.current
            if token.kind != "op" or token.text not in _INFIX:
                return left
            lbp, op = _INFIX[token.text]
            if lbp <= rbp:
                return left
            self.advance()
            # ^ is right-associative: parse its right side one notch looser
            right = self.expression(lbp - 1 if op is BinaryOp.POW else lbp)
            left = Binary(op, left, right)

    def literal(self, token: Token, sign: float = 1.0) -> Constant:
        value = float(token.text)
        if not math.isfinite(value):
            raise ExprSyntaxError(f"numeric literal {token.text!r} is out of range", token.offset)
        return Constant(sign * value)

    def prefix(self) -> Expression:
        token = self.advance()
        if token.kind == "number":
            return self.literal(token)
        if token.kind == "ident":
            return self.identifier(token)
        if token.kind == "op" and token.text == "(":
            inner = self.expression()
            self.expect(")")
            return inner
        if token.kind == "op" and token.text == "-":
            # "-2.5" is a negative literal unless an exponent follows
            if self.current.kind == "number" and self.peek().text != "^":
                return self.literal(self.advance(), -1.0)
            return Unary(UnaryOp.NEG, self.expression(_NEG_OPERAND_BP))
        if token.kind == "end":
            raise ExprSyntaxError("unexpected end of input", token.offset)
        raise ExprSyntaxError(f"unexpected token {token.text!r}", token.offset)

    def identifier(self, token: Token) -> Expression:
        name = token.text
        if self.current.text == "(" and self.current.kind == "op":
            if name not in FUNCTION_NAMES:
                raise UnknownSymbolError(name, token.offset)
            self.advance()
            argument = self.expression()
            self.expect(")")
            return Unary(FUNCTION_NAMES[name], argument)

        if self.names is not None and name in self.names:
            return Variable(self.names.index(name))
        match = _VARIABLE_RE.fullmatch(name)
        if match is not None:
            index = int(match.group(1)) - 1
            if self.names is None or index < len(self.names):
                return Variable(index)
        if name in FUNCTION_NAMES:
            raise ExprSyntaxError(f"function {name!r} needs an argument list", self.current.offset)
        raise UnknownSymbolError(name, token.offset)


def parse(text: str, names: Sequence[str] | None = None) -> Expression:
    """
    Parse formula text into an Expression.

    Args:
        text: Formula in infix notation
        names: Optional declared column names; when given, only these names
            and x1..x{len(names)} are valid identifiers

    Raises:
        ExprSyntaxError: malformed input (with byte offset)
        UnknownSymbolError: undeclared identifier or unknown function
    """
    parser = _Parser(tokenize(text), names)
    expr = parser.expression()
    tail = parser.current
    if tail.kind != "end":
        raise ExprSyntaxError(f"unexpected token {tail.text!r}", tail.offset)
    return expr
