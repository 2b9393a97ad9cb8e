"""JSONL grid interchange: one table per line."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator, Union

from .core import LogicalLocation, SpatialQuad, TableCell, TableGrid


class FormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def grid_to_dict(grid: TableGrid) -> dict:
    out: dict = {}
    if grid.image_size is not None:
        out["image_size"] = [grid.image_size[0], grid.image_size[1]]
    cells = []
    for c in grid.cells:
        d: dict = {"id": c.id, "logical": list(c.logical.as_tuple())}
        if c.quad is not None:
            d["quad"] = [[x, y] for x, y in c.quad.corners]
        if c.content is not None:
            d["content"] = c.content
        cells.append(d)
    out["cells"] = cells
    return out


def grid_from_dict(obj: dict) -> TableGrid:
    if not isinstance(obj, dict) or not isinstance(obj.get("cells"), list):
        raise FormatError("expected an object with a 'cells' list")
    size = obj.get("image_size")
    if size is not None and (not isinstance(size, list) or len(size) != 2):
        raise FormatError("image_size must be [w, h]")
    cells = []
    for raw in obj["cells"]:
        try:
            logical = raw["logical"]
            if len(logical) != 4:
                raise FormatError("logical must have 4 integers")
            quad = raw.get("quad")
            cells.append(
                TableCell(
                    id=int(raw["id"]),
                    logical=LogicalLocation(*logical),
                    quad=SpatialQuad(tuple(tuple(p) for p in quad)) if quad is not None else None,
                    content=raw.get("content"),
                )
            )
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad cell {raw!r}: {exc}") from exc
    try:
        return TableGrid(tuple(cells), tuple(size) if size is not None else None)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def dumps(grid: TableGrid) -> str:
    return json.dumps(grid_to_dict(grid), separators=(",", ":"))


def loads(line: str) -> TableGrid:
    return grid_from_dict(json.loads(line))


def iter_jsonl(path: Union[str, Path]) -> Iterator[tuple[int, TableGrid]]:
    """Yield ``(line_number, grid)``; line numbers are 1-based. Blank lines skipped."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid JSON: {exc.msg}", lineno) from exc
            except FormatError as exc:
                raise FormatError(str(exc), lineno) from exc


def read_jsonl(path: Union[str, Path]) -> list[TableGrid]:
    return [g for _, g in iter_jsonl(path)]


def write_jsonl(path: Union[str, Path], grids: Iterable[TableGrid]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for g in grids:
            fh.write(dumps(g))
            fh.write("\n")
            n += 1
    return n
