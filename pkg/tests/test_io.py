import json

import pytest
from hypothesis import given, strategies as st

from logigrid import io as gio
from logigrid.core import TableGrid

from conftest import grid, synth_grid


@given(st.integers(0, 5000))
def test_dict_round_trip(seed):
    g = synth_grid(seed, jitter=0.1)
    assert gio.loads(gio.dumps(g)) == g


def test_content_and_missing_quads_survive(tmp_path):
    g = grid((0, 0, 0, 0), (0, 0, 1, 1))
    g = TableGrid(tuple(c.__class__(c.id, c.logical, None, "x & y") for c in g.cells))
    path = tmp_path / "a.jsonl"
    assert gio.write_jsonl(path, [g, g]) == 2
    assert gio.read_jsonl(path) == [g, g]


def test_error_names_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    good = gio.dumps(grid((0, 0, 0, 0)))
    path.write_text(good + "\n\n" + '{"cells": [{"id": 0}]}\n')
    with pytest.raises(gio.FormatError) as err:
        gio.read_jsonl(path)
    assert err.value.line == 3 and "line 3" in str(err.value)


@pytest.mark.parametrize("line", [
    "not json",
    "[]",
    '{"cells": [{"id": 0, "logical": [0, 0, 0]}]}',
    '{"cells": [{"id": 0, "logical": [0, 0, 0, 0]}, {"id": 0, "logical": [1, 1, 0, 0]}]}',
    '{"image_size": [1], "cells": []}',
])
def test_rejects_malformed(tmp_path, line):
    path = tmp_path / "x.jsonl"
    path.write_text(line + "\n")
    with pytest.raises(gio.FormatError):
        gio.read_jsonl(path)


def test_schema_keys():
    d = json.loads(gio.dumps(grid((0, 0, 0, 0), quads=True)))
    assert set(d) == {"image_size", "cells"}
    assert set(d["cells"][0]) == {"id", "logical", "quad"}
