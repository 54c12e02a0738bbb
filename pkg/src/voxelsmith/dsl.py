"""Parser and compiler for the blueprint language (``.vsl``).

Grammar::

    program   := statement+
    statement := place | fill | shell | line | pyramid
    place     := "place" ID coord ("facing" DIR)?
    fill      := "fill" ID coord coord
    shell     := "shell" ID coord coord
    line      := "line" ID coord coord
    pyramid   := "pyramid" ID coord INT ("step" INT)?
    coord     := "(" INT "," INT "," INT ")"
    DIR       := north | south | east | west

``#`` starts a comment running to the end of the line.  Cuboid corners may
be given in any order; they are normalized, never rejected.  Statements
later in the program override earlier ones at the same cell.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from . import blocks
from .blocks import FACINGS
from .blueprint import Blueprint, Placement
from .world import Coord

KEYWORDS = ("place", "fill", "shell", "line", "pyramid")


class DslError(ValueError):
    def __init__(self, message: str, line: int, col: int, token: str = ""):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.token = token

    def __str__(self) -> str:
        tok = f" near {self.token!r}" if self.token else ""
        return f"line {self.line}, column {self.col}{tok}: {self.message}"


class DslSyntaxError(DslError):
    pass


class DslUnknownBlock(DslError):
    pass


class NonAlignedLine(DslError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # WORD | INT | PUNCT | EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)|(?P<int>-?\d+)"
    r"|(?P<word>[A-Za-z_][A-Za-z0-9_:]*)|(?P<punct>[(),])"
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise DslSyntaxError("unexpected character", line, col, text[pos])
        kind = m.lastgroup
        chunk = m.group()
        if kind == "int":
            tokens.append(Token("INT", chunk, line, col))
        elif kind == "word":
            tokens.append(Token("WORD", chunk, line, col))
        elif kind == "punct":
            tokens.append(Token("PUNCT", chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


@dataclass(frozen=True)
class Place:
    block: str
    at: Coord
    facing: str | None = None
    line: int = 0


@dataclass(frozen=True)
class Fill:
    block: str
    start: Coord
    end: Coord
    line: int = 0


@dataclass(frozen=True)
class Shell:
    block: str
    start: Coord
    end: Coord
    line: int = 0


@dataclass(frozen=True)
class Line:
    block: str
    start: Coord
    end: Coord
    line: int = 0


@dataclass(frozen=True)
class Pyramid:
    block: str
    corner: Coord
    size: int
    step: int = 1
    line: int = 0


Statement = Union[Place, Fill, Shell, Line, Pyramid]


@dataclass(frozen=True)
class DslProgram:
    statements: tuple[Statement, ...]
    source: str = ""


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def fail(self, expected: str, note: str = "") -> DslSyntaxError:
        t = self.tok
        found = "end of input" if t.kind == "EOF" else repr(t.text)
        msg = f"expected {expected}, found {found}"
        if note:
            msg += f" ({note})"
        return DslSyntaxError(msg, t.line, t.col, t.text)

    def expect_punct(self, ch: str, note: str = "") -> Token:
        if self.tok.kind == "PUNCT" and self.tok.text == ch:
            return self.advance()
        raise self.fail(repr(ch), note)

    def expect_int(self, note: str = "") -> int:
        if self.tok.kind != "INT":
            raise self.fail("an integer", note)
        return int(self.advance().text)

    def block_id(self) -> str:
        t = self.tok
        if t.kind != "WORD" or t.text in KEYWORDS:
            raise self.fail("a block id")
        self.advance()
        try:
            return blocks.resolve(t.text)
        except blocks.UnknownBlockError:
            raise DslUnknownBlock(f"unknown block id {t.text!r}", t.line, t.col, t.text) from None

    def coord(self) -> Coord:
        opener = self.expect_punct("(")
        note = f"unclosed '(' opened at {opener.line}:{opener.col}"
        x = self.expect_int(note)
        self.expect_punct(",", note)
        y = self.expect_int(note)
        self.expect_punct(",", note)
        z = self.expect_int(note)
        self.expect_punct(")", note)
        return Coord(x, y, z)

    def keyword(self, word: str) -> bool:
        if self.tok.kind == "WORD" and self.tok.text == word:
            self.advance()
            return True
        return False

    def positive(self, what: str) -> int:
        t = self.tok
        value = self.expect_int()
        if value < 1:
            raise DslSyntaxError(f"{what} must be at least 1", t.line, t.col, t.text)
        return value

    def statement(self) -> Statement:
        t = self.tok
        if t.kind != "WORD" or t.text not in KEYWORDS:
            raise self.fail("one of " + ", ".join(KEYWORDS))
        self.advance()
        block = self.block_id()
        if t.text == "place":
            at = self.coord()
            facing = None
            if self.keyword("facing"):
                d = self.tok
                if d.kind != "WORD" or d.text not in FACINGS:
                    raise self.fail("a direction (north, south, east, west)")
                facing = self.advance().text
            return Place(block, at, facing, t.line)
        if t.text == "pyramid":
            corner = self.coord()
            size = self.positive("pyramid base size")
            step = self.positive("pyramid step") if self.keyword("step") else 1
            return Pyramid(block, corner, size, step, t.line)
        a = self.coord()
        b = self.coord()
        kind = {"fill": Fill, "shell": Shell, "line": Line}[t.text]
        return kind(block, a, b, t.line)

    def program(self, source: str) -> DslProgram:
        stmts = [self.statement()]
        while self.tok.kind != "EOF":
            stmts.append(self.statement())
        return DslProgram(tuple(stmts), source)


def parse(text: str) -> DslProgram:
    return _Parser(text).program(text)


def _span(a: int, b: int) -> range:
    lo, hi = min(a, b), max(a, b)
    return range(lo, hi + 1)


def _cuboid(a: Coord, b: Coord) -> Iterator[Coord]:
    for y in _span(a.y, b.y):
        for x in _span(a.x, b.x):
            for z in _span(a.z, b.z):
                yield Coord(x, y, z)


def _shell(a: Coord, b: Coord) -> Iterator[Coord]:
    xs, ys, zs = (min(a.x, b.x), max(a.x, b.x)), (min(a.y, b.y), max(a.y, b.y)), (min(a.z, b.z), max(a.z, b.z))
    for c in _cuboid(a, b):
        if c.x in xs or c.y in ys or c.z in zs:
            yield c


def _line(st: Line) -> Iterator[Coord]:
    d = st.end - st.start
    moving = [abs(v) for v in d if v]
    if len(moving) > 2 or len(set(moving)) > 1:
        raise NonAlignedLine(
            f"line from {tuple(st.start)} to {tuple(st.end)} is neither axis-aligned nor 45-degree diagonal",
            st.line, 1)
    n = max(moving, default=0)
    unit = tuple((v > 0) - (v < 0) for v in d)
    for i in range(n + 1):
        yield Coord(st.start.x + unit[0] * i, st.start.y + unit[1] * i, st.start.z + unit[2] * i)


def _pyramid(st: Pyramid) -> Iterator[Coord]:
    side, layer = st.size, 0
    while side >= 1:
        inset = (st.size - side) // 2
        x0, z0 = st.corner.x + inset, st.corner.z + inset
        for x in range(x0, x0 + side):
            for z in range(z0, z0 + side):
                yield Coord(x, st.corner.y + layer, z)
        side -= st.step
        layer += 1


def expand(st: Statement) -> Iterator[Coord]:
    if isinstance(st, Place):
        return iter((st.at,))
    if isinstance(st, Fill):
        return _cuboid(st.start, st.end)
    if isinstance(st, Shell):
        return _shell(st.start, st.end)
    if isinstance(st, Line):
        return _line(st)
    return _pyramid(st)


def compile_program(prog: DslProgram, name: str = "") -> Blueprint:
    cells: dict[Coord, Placement] = {}
    for st in prog.statements:
        facing = st.facing if isinstance(st, Place) else None
        for c in expand(st):
            cells[c] = Placement(st.block, c, facing)
    return Blueprint(tuple(cells.values()), name)


def compile_text(text: str, name: str = "") -> Blueprint:
    return compile_program(parse(text), name)

# spec name for the compile step
compile = compile_program
