"""Conversions from logical grids to adjacency relations and HTML-table markup."""

from __future__ import annotations

import enum
import html
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core import (
    EMPTY,
    GridError,
    LogicalLocation,
    TableCell,
    TableGrid,
    occupancy,
    require_valid,
)


class Direction(enum.IntEnum):
    NONE = 0
    HORIZONTAL = 1
    VERTICAL = 2


class ParseError(GridError):
    pass


class PlacementError(GridError):
    pass


@dataclass(frozen=True, order=True)
class AdjacencyPair:
    """``i`` is immediately right of (HORIZONTAL) or under (VERTICAL) ``j``."""

    i: int
    j: int
    direction: Direction


def _spans_meet(a0: int, a1: int, b0: int, b1: int) -> bool:
    return a0 <= b1 and b0 <= a1


def adjacency_pairs(grid: TableGrid) -> tuple[set[AdjacencyPair], set[AdjacencyPair]]:
    """Return ``(A_r, A_c)``: horizontal and vertical immediate-neighbour pairs."""
    require_valid(grid)
    occ = occupancy(grid)
    loc = {c.id: c.logical for c in grid.cells}
    a_r: set[AdjacencyPair] = set()
    a_c: set[AdjacencyPair] = set()
    rows, cols = occ.shape
    for c in grid.cells:
        l = c.logical
        # left neighbours: any cell covering column c_s-1 inside our row span
        if l.c_s > 0:
            for j in set(occ[l.r_s : l.r_e + 1, l.c_s - 1].tolist()):
                if j != EMPTY and loc[j].c_e + 1 == l.c_s:
                    a_r.add(AdjacencyPair(c.id, j, Direction.HORIZONTAL))
        if l.r_s > 0:
            for j in set(occ[l.r_s - 1, l.c_s : l.c_e + 1].tolist()):
                if j != EMPTY and loc[j].r_e + 1 == l.r_s:
                    a_c.add(AdjacencyPair(c.id, j, Direction.VERTICAL))
    return a_r, a_c


def adjacency_pairs_bruteforce(
    grid: TableGrid, check: bool = True
) -> tuple[set[AdjacencyPair], set[AdjacencyPair]]:
    """Direct O(N^2) evaluation of the two adjacency predicates.

    With ``check=False`` the predicates are evaluated on overlapping grids too,
    which is how invalid predictions are scored.
    """
    if check:
        require_valid(grid)
    a_r, a_c = set(), set()
    for ci in grid.cells:
        for cj in grid.cells:
            if ci.id == cj.id:
                continue
            li, lj = ci.logical, cj.logical
            if _spans_meet(li.r_s, li.r_e, lj.r_s, lj.r_e) and li.c_s == lj.c_e + 1:
                a_r.add(AdjacencyPair(ci.id, cj.id, Direction.HORIZONTAL))
            if _spans_meet(li.c_s, li.c_e, lj.c_s, lj.c_e) and li.r_s == lj.r_e + 1:
                a_c.add(AdjacencyPair(ci.id, cj.id, Direction.VERTICAL))
    return a_r, a_c


def adjacency_triplets(grid: TableGrid) -> set[tuple[int, int, Direction]]:
    a_r, a_c = adjacency_pairs(grid)
    return {(p.i, p.j, p.direction) for p in a_r | a_c}


def adjacency_matrix(grid: TableGrid) -> np.ndarray:
    """N x N array of :class:`Direction` codes, rows/cols in ``grid.cells`` order."""
    a_r, a_c = adjacency_pairs(grid)
    index = {c.id: k for k, c in enumerate(grid.cells)}
    n = len(grid.cells)
    mat = np.full((n, n), int(Direction.NONE), dtype=np.int8)
    for p in a_r | a_c:
        a, b = index[p.i], index[p.j]
        mat[a, b] = mat[b, a] = int(p.direction)
    return mat


# -- markup ---------------------------------------------------------------

TABLE_OPEN, TABLE_CLOSE = "<table>", "</table>"
TR_OPEN, TR_CLOSE = "<tr>", "</tr>"
TD_CLOSE = "</td>"


def td_open(rowspan: int = 1, colspan: int = 1) -> str:
    attrs = ""
    if rowspan > 1:
        attrs += f' rowspan="{rowspan}"'
    if colspan > 1:
        attrs += f' colspan="{colspan}"'
    return f"<td{attrs}>"


@dataclass(frozen=True)
class MarkupSequence:
    """Token stream over the minimal table grammar.

    Tag tokens start with ``<``; any other token is (HTML-escaped) cell text.
    """

    tokens: tuple[str, ...]

    def __str__(self) -> str:
        return "".join(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def parse(cls, text: str) -> "MarkupSequence":
        return cls(tuple(tokenize(text)))


_TOKEN_RE = re.compile(r"<[^<>]*>|[^<]+")
_TD_RE = re.compile(r'<td((?:\s+(?:rowspan|colspan)="\d+")*)\s*>')
_ATTR_RE = re.compile(r'(rowspan|colspan)="(\d+)"')


def tokenize(text: str) -> list[str]:
    pos = 0
    out = []
    for m in _TOKEN_RE.finditer(text):
        if m.start() != pos:
            raise ParseError(f"unexpected character at offset {pos}")
        tok = m.group(0)
        if tok.startswith("<"):
            out.append(tok)
        elif tok.strip():
            out.append(tok)
        pos = m.end()
    if pos != len(text):
        raise ParseError(f"unterminated tag at offset {pos}")
    return out


def to_markup(grid: TableGrid, content_mode: bool = False) -> MarkupSequence:
    require_valid(grid)
    occ = occupancy(grid)
    by_id = {c.id: c for c in grid.cells}
    rows, cols = occ.shape
    toks = [TABLE_OPEN]
    for r in range(rows):
        toks.append(TR_OPEN)
        for c in range(cols):
            cid = int(occ[r, c])
            if cid == EMPTY:
                toks += [td_open(), TD_CLOSE]
                continue
            cell = by_id[cid]
            loc = cell.logical
            if loc.r_s != r or loc.c_s != c:
                continue
            toks.append(td_open(loc.row_span, loc.col_span))
            if content_mode and cell.content:
                toks.append(html.escape(cell.content, quote=False))
            toks.append(TD_CLOSE)
        toks.append(TR_CLOSE)
    toks.append(TABLE_CLOSE)
    return MarkupSequence(tuple(toks))


def parse_td(token: str) -> tuple[int, int]:
    m = _TD_RE.fullmatch(token)
    if m is None:
        raise ParseError(f"bad cell tag {token!r}")
    spans = {"rowspan": 1, "colspan": 1}
    seen = set()
    for name, value in _ATTR_RE.findall(m.group(1)):
        if name in seen:
            raise ParseError(f"duplicate {name} in {token!r}")
        seen.add(name)
        spans[name] = int(value)
        if spans[name] < 1:
            raise ParseError(f"{name} must be >= 1 in {token!r}")
    return spans["rowspan"], spans["colspan"]


def parse_structure(seq: Union[MarkupSequence, str, Sequence[str]]) -> list[list[tuple[int, int, str | None]]]:
    """Parse tokens into rows of ``(rowspan, colspan, text)`` cells."""
    if isinstance(seq, str):
        toks = tokenize(seq)
    elif isinstance(seq, MarkupSequence):
        toks = list(seq.tokens)
    else:
        toks = list(seq)
    if len(toks) < 2 or toks[0] != TABLE_OPEN or toks[-1] != TABLE_CLOSE:
        raise ParseError("markup must be enclosed in <table>...</table>")
    rows: list[list[tuple[int, int, str | None]]] = []
    k = 1
    end = len(toks) - 1
    while k < end:
        if toks[k] != TR_OPEN:
            raise ParseError(f"expected <tr>, got {toks[k]!r} at token {k}")
        k += 1
        row = []
        while k < end and toks[k] != TR_CLOSE:
            tok = toks[k]
            if not tok.startswith("<td"):
                raise ParseError(f"expected <td>, got {tok!r} at token {k}")
            rs, cs = parse_td(tok)
            k += 1
            text = None
            if k < end and not toks[k].startswith("<"):
                text = html.unescape(toks[k])
                k += 1
            if k >= end or toks[k] != TD_CLOSE:
                raise ParseError(f"unclosed <td> at token {k}")
            k += 1
            row.append((rs, cs, text))
        if k >= end:
            raise ParseError("unclosed <tr>")
        k += 1
        rows.append(row)
    return rows


def from_markup(seq: Union[MarkupSequence, str, Sequence[str]]) -> TableGrid:
    """Place cells with HTML row/col-span semantics; ids are assigned in row-major order."""
    rows = parse_structure(seq)
    # busy[c] = first row index at which column c is free again
    busy: list[int] = []
    cells = []
    for r, row in enumerate(rows):
        col = 0
        for rs, cs, text in row:
            while col < len(busy) and busy[col] > r:
                col += 1
            if len(busy) < col + cs:
                busy.extend([0] * (col + cs - len(busy)))
            for cc in range(col, col + cs):
                if busy[cc] > r:
                    raise PlacementError(
                        f"cell at row {r} with colspan {cs} collides at column {cc}"
                    )
                busy[cc] = r + rs
            loc = LogicalLocation(r, r + rs - 1, col, col + cs - 1)
            cells.append(TableCell(len(cells), loc, None, text))
            col += cs
    return TableGrid(tuple(cells))


def slot_claims(seq: Union[MarkupSequence, str]) -> int:
    """Total slots claimed by the cells of ``seq`` (rowspan x colspan summed)."""
    return sum(rs * cs for row in parse_structure(seq) for rs, cs, _ in row)

