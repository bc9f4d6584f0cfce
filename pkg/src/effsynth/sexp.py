"""S-expression reader and writer for the goal-file surface syntax.

Atoms are symbols, integers, and double-quoted strings; ';' starts a comment
running to end of line. Every node carries its source position for error
reporting.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Sym:
    name: str
    line: int = 0
    col: int = 0

    def __eq__(self, other) -> bool:  # positions are not identity
        return isinstance(other, Sym) and other.name == self.name

    def __hash__(self) -> int:
        return hash(("sym", self.name))


@dataclass(frozen=True)
class SInt:
    value: int
    line: int = 0
    col: int = 0

    def __eq__(self, other) -> bool:
        return isinstance(other, SInt) and other.value == self.value

    def __hash__(self) -> int:
        return hash(("int", self.value))


@dataclass(frozen=True)
class SStr:
    value: str
    line: int = 0
    col: int = 0

    def __eq__(self, other) -> bool:
        return isinstance(other, SStr) and other.value == self.value

    def __hash__(self) -> int:
        return hash(("str", self.value))


@dataclass(frozen=True)
class SList:
    items: tuple["SExp", ...]
    line: int = 0
    col: int = 0

    def __eq__(self, other) -> bool:
        return isinstance(other, SList) and other.items == self.items

    def __hash__(self) -> int:
        return hash(("list", self.items))


SExp = Union[Sym, SInt, SStr, SList]

_DELIMS = set("()\"; \t\r\n")
_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}
_UNESCAPES = {"\n": "\\n", "\t": "\\t", '"': '\\"', "\\": "\\\\"}


def _is_int_token(tok: str) -> bool:
    body = tok[1:] if tok[0] in "+-" else tok
    return body.isdigit() and bool(body)


class _Lexer:
    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, msg: str) -> ParseError:
        return ParseError(msg, self.line, self.col)

    def _advance(self, ch: str) -> None:
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1

    def tokens(self):
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch in " \t\r\n":
                self._advance(ch)
                continue
            if ch == ";":
                while self.pos < len(text) and text[self.pos] != "\n":
                    self._advance(text[self.pos])
                continue
            line, col = self.line, self.col
            if ch in "()":
                self._advance(ch)
                yield (ch, None, line, col)
                continue
            if ch == '"':
                self._advance(ch)
                out = []
                while True:
                    if self.pos >= len(text):
                        raise ParseError("unterminated string", line, col)
                    c = text[self.pos]
                    self._advance(c)
                    if c == '"':
                        break
                    if c == "\\":
                        if self.pos >= len(text):
                            raise ParseError("unterminated escape", line, col)
                        esc = text[self.pos]
                        self._advance(esc)
                        if esc not in _ESCAPES:
                            raise ParseError(f"bad escape \\{esc}", line, col)
                        out.append(_ESCAPES[esc])
                    else:
                        out.append(c)
                yield ("str", "".join(out), line, col)
                continue
            out = []
            while self.pos < len(text) and text[self.pos] not in _DELIMS:
                out.append(text[self.pos])
                self._advance(text[self.pos])
            yield ("atom", "".join(out), line, col)


def parse_sexps(text: str) -> list[SExp]:
    """All top-level forms in the text."""
    stack: list[list] = []
    positions: list[tuple[int, int]] = []
    top: list[SExp] = []
    last = (1, 1)
    for kind, value, line, col in _Lexer(text).tokens():
        last = (line, col)
        if kind == "(":
            stack.append([])
            positions.append((line, col))
            continue
        if kind == ")":
            if not stack:
                raise ParseError("unbalanced ')'", line, col)
            items = stack.pop()
            lpos = positions.pop()
            node = SList(tuple(items), *lpos)
            (stack[-1] if stack else top).append(node)
            continue
        if kind == "str":
            node = SStr(value, line, col)
        elif _is_int_token(value):
            node = SInt(int(value), line, col)
        else:
            node = Sym(value, line, col)
        (stack[-1] if stack else top).append(node)
    if stack:
        line, col = positions[-1]
        raise ParseError("unclosed '('", line, col)
    if not top:
        raise ParseError("empty input", *last)
    return top


def write_sexp(node: SExp) -> str:
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, SInt):
        return str(node.value)
    if isinstance(node, SStr):
        return '"' + "".join(_UNESCAPES.get(c, c) for c in node.value) + '"'
    return "(" + " ".join(write_sexp(i) for i in node.items) + ")"
