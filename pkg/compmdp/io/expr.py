"""Composition expressions.

  expr := NAME
        | product(expr, expr)
        | fiber(expr, expr over expr via NAME, NAME)
        | glue(expr, expr along expr via NAME, NAME)
        | puncture(expr minus {id, ...})
        | quotient(expr by NAME)
        | zigzag(expr -[NAME]- expr ...)
"""
import re
from dataclasses import dataclass
from typing import List, Tuple, Union

from compmdp.core.exceptions import DocumentSyntaxError
from compmdp.model.labels import Atom, Glued, Label, Left, Orbit, Pair, Right


# Syntax tree
@dataclass(frozen=True)
class Name:
    name: str


@dataclass(frozen=True)
class Product:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Fiber:
    left: "Expr"
    right: "Expr"
    apex: "Expr"
    f: str
    g: str


@dataclass(frozen=True)
class Glue:
    left: "Expr"
    right: "Expr"
    apex: "Expr"
    f: str
    g: str


@dataclass(frozen=True)
class Puncture:
    base: "Expr"
    obstacles: Tuple[Label, ...]


@dataclass(frozen=True)
class Quotient:
    base: "Expr"
    group: str


@dataclass(frozen=True)
class ZigZag:
    environments: Tuple["Expr", ...]
    bridges: Tuple[str, ...]


Expr = Union[Name, Product, Fiber, Glue, Puncture, Quotient, ZigZag]


# Tokens
WORD = "word"
PUNCTUATION = "punctuation"
END = "end"


@dataclass(frozen=True)
class Token:
    type: str
    value: str
    line: int
    col: int

    def has_type(self, type: str) -> bool:
        return self.type == type


_PUNCTUATION = ("-[", "]-", "(", ")", ",", "{", "}")
_WORD = re.compile(r"(?:[A-Za-z0-9_.:+]|-(?!\[))+")


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        char = text[pos]
        if char == "\n":
            pos += 1
            line, line_start = line + 1, pos
            continue
        if char.isspace():
            pos += 1
            continue
        if char == "#":
            end = text.find("\n", pos)
            pos = len(text) if end < 0 else end
            continue
        col = pos - line_start + 1
        punctuation = next((p for p in _PUNCTUATION if text.startswith(p, pos)), None)
        if punctuation is not None:
            tokens.append(Token(PUNCTUATION, punctuation, line, col))
            pos += len(punctuation)
            continue
        match = _WORD.match(text, pos)
        if match is None:
            raise DocumentSyntaxError(f"unexpected character {char!r}", line, col)
        tokens.append(Token(WORD, match.group(), line, col))
        pos = match.end()
    col = pos - line_start + 1
    tokens.append(Token(END, "", line, col))
    return tokens


_WRAPPERS = {"L": Left, "R": Right, "G": Glued}


class Parser:
    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.cursor = 0

    # Does this parser have more tokens to process?
    def has_more(self) -> bool:
        return not self.current().has_type(END)

    def advance(self) -> None:
        self.cursor += 1

    def current(self) -> Token:
        return self.tokens[self.cursor]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.cursor + offset, len(self.tokens) - 1)]

    def new_syntax_error(self, expected: str) -> DocumentSyntaxError:
        token = self.current()
        found = f"{token.value!r}" if token.value else "end of input"
        return DocumentSyntaxError(f"expected {expected}, found {found}", token.line, token.col)

    def at_token(self, type: str, value: str) -> bool:
        if not self.has_more():
            return False
        current = self.current()
        return current.has_type(type) and current.value == value

    def at_punctuation(self, value: str) -> bool:
        return self.at_token(PUNCTUATION, value)

    def at_word(self, value: str) -> bool:
        return self.at_token(WORD, value)

    # Skips over the current punctuation which must have the given value.
    def expect_punctuation(self, value: str) -> None:
        if not self.at_punctuation(value):
            raise self.new_syntax_error(repr(value))
        self.advance()

    def expect_word(self, value: str) -> None:
        if not self.at_word(value):
            raise self.new_syntax_error(repr(value))
        self.advance()

    # Returns the value of the current word, which may be any word.
    def expect_name(self) -> str:
        if not self.current().has_type(WORD):
            raise self.new_syntax_error("a name")
        value = self.current().value
        self.advance()
        return value

    # <program>
    #   -> <expr> END
    def parse_program(self) -> Expr:
        expr = self.parse_expr()
        if self.has_more():
            raise self.new_syntax_error("end of input")
        return expr

    # <expr>
    #   -> <operator> "(" ... ")"
    #   -> NAME
    def parse_expr(self) -> Expr:
        head = self.expect_name()
        operator = _OPERATORS.get(head)
        if operator is None or not self.at_punctuation("("):
            return Name(head)
        self.expect_punctuation("(")
        expr = operator(self)
        self.expect_punctuation(")")
        return expr

    def parse_product(self) -> Product:
        left = self.parse_expr()
        self.expect_punctuation(",")
        return Product(left, self.parse_expr())

    # <expr> "," <expr> <keyword> <expr> "via" NAME "," NAME
    def _parse_square(self, keyword: str) -> Tuple[Expr, Expr, Expr, str, str]:
        left = self.parse_expr()
        self.expect_punctuation(",")
        right = self.parse_expr()
        self.expect_word(keyword)
        apex = self.parse_expr()
        self.expect_word("via")
        f = self.expect_name()
        self.expect_punctuation(",")
        return left, right, apex, f, self.expect_name()

    def parse_fiber(self) -> Fiber:
        return Fiber(*self._parse_square("over"))

    def parse_glue(self) -> Glue:
        return Glue(*self._parse_square("along"))

    def parse_puncture(self) -> Puncture:
        base = self.parse_expr()
        self.expect_word("minus")
        self.expect_punctuation("{")
        obstacles = []
        if not self.at_punctuation("}"):
            obstacles.append(self.parse_id())
            while self.at_punctuation(","):
                self.advance()
                obstacles.append(self.parse_id())
        self.expect_punctuation("}")
        return Puncture(base, tuple(obstacles))

    def parse_quotient(self) -> Quotient:
        base = self.parse_expr()
        self.expect_word("by")
        return Quotient(base, self.expect_name())

    # <expr> ("-[" NAME "]-" <expr>)+
    def parse_zigzag(self) -> ZigZag:
        environments = [self.parse_expr()]
        bridges = []
        while self.at_punctuation("-["):
            self.advance()
            bridges.append(self.expect_name())
            self.expect_punctuation("]-")
            environments.append(self.parse_expr())
        if not bridges:
            raise self.new_syntax_error("'-['")
        return ZigZag(tuple(environments), tuple(bridges))

    # <id>
    #   -> "(" <id> ("," <id>)+ ")"
    #   -> "{" <id> ("," <id>)* "}"
    #   -> ("L" | "R" | "G") "(" <id> ")"
    #   -> WORD
    def parse_id(self) -> Label:
        if self.at_punctuation("(") or self.at_punctuation("{"):
            close = ")" if self.current().value == "(" else "}"
            opener = self.current()
            self.advance()
            parts = [self.parse_id()]
            while self.at_punctuation(","):
                self.advance()
                parts.append(self.parse_id())
            self.expect_punctuation(close)
            if close == "}":
                return Orbit(parts)
            if len(parts) < 2:
                raise DocumentSyntaxError("a pair needs at least two parts", opener.line, opener.col)
            return Pair(*parts)
        word = self.current()
        name = self.expect_name()
        if name in _WRAPPERS and self.at_punctuation("("):
            self.advance()
            inner = self.parse_id()
            self.expect_punctuation(")")
            return _WRAPPERS[name](inner)
        try:
            return Atom(name)
        except ValueError:
            raise DocumentSyntaxError(f"invalid identifier {name!r}", word.line, word.col)


_OPERATORS = {
    "product": Parser.parse_product,
    "fiber": Parser.parse_fiber,
    "glue": Parser.parse_glue,
    "puncture": Parser.parse_puncture,
    "quotient": Parser.parse_quotient,
    "zigzag": Parser.parse_zigzag,
}


def parse_expr(text: str) -> Expr:
    return Parser(tokenize(text)).parse_program()
