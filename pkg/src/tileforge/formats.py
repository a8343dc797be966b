"""Text formats: boards, tiling instances, partitions and lines.

Board::

    board v1 p=5 N=25 mlo=0 mhi=2 [gen=a,b,c]
    <N values for m = mlo>
    ...

Tiling instance::

    group Z x Z/7 x Z/7
    lattice 2 | finite | 2 0; 0 3      (rows of a basis, free part only)
    residues: ((0);(0,0)) ((1);(0,0))
    tile: ((0);(0,0)) ((1);(0,0))      (one line per tile)

Partition::

    partition v1
    group Z/7 x Z/7
    part: ((); (0,0)) ...

Blank lines and ``#`` comments are ignored in the last two formats.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .abelian import GroupSpec, Lattice, format_element, format_group, parse_element, parse_group
from .padic import PadicParams
from .sudoku import Board
from .tiling import Partition, PeriodicSet, Tile


class FormatError(ValueError):
    pass


# ---------------------------------------------------------------------------
# boards

_HEADER = re.compile(r"^board v1 p=(\d+) N=(\d+) mlo=(-?\d+) mhi=(-?\d+)(?: gen=(-?\d+),(-?\d+),(-?\d+))?$")


def write_board(board: Board) -> str:
    head = f"board v1 p={board.p} N={board.N} mlo={board.m_lo} mhi={board.m_hi}"
    if board.generator is not None:
        head += " gen=" + ",".join(map(str, board.generator))
    rows = [" ".join(map(str, row)) for row in board.values.tolist()]
    return "\n".join([head] + rows) + "\n"


def parse_board(text: str) -> Board:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty board file")
    m = _HEADER.match(lines[0].strip())
    if not m:
        raise FormatError(f"malformed header {lines[0]!r}")
    p, N, lo, hi = (int(m.group(k)) for k in range(1, 5))
    try:
        params = PadicParams(p)
    except ValueError as e:
        raise FormatError(str(e)) from None
    if N != params.N:
        raise FormatError(f"N = {N} but p^2 = {params.N}")
    if hi < lo:
        raise FormatError(f"empty window [{lo}, {hi}]")
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != hi - lo + 1:
        raise FormatError(f"expected {hi - lo + 1} rows, got {len(body)}")
    rows = []
    for k, ln in enumerate(body):
        try:
            row = [int(v) for v in ln.split()]
        except ValueError:
            raise FormatError(f"row m={lo + k}: non-integer entry") from None
        if len(row) != N:
            raise FormatError(f"row m={lo + k}: expected {N} values, got {len(row)}")
        for n, v in enumerate(row, start=1):
            if not 1 <= v < p:
                raise FormatError(f"value out of range at (n={n}, m={lo + k}): {v}")
        rows.append(row)
    gen = tuple(int(m.group(k)) for k in (5, 6, 7)) if m.group(5) is not None else None
    return Board(params, lo, np.array(rows, dtype=np.int64), gen)


# ---------------------------------------------------------------------------
# lines


def parse_line(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split()]
    except ValueError:
        raise FormatError("a line file holds whitespace-separated integers") from None


# ---------------------------------------------------------------------------
# tiling instances and partitions


@dataclass(frozen=True)
class TilingInstance:
    group: GroupSpec
    A: PeriodicSet
    tiles: tuple[Tile, ...]


_ELEM_TOKEN = re.compile(r"\(\([^()]*\);\s*\([^()]*\)\)")


def _elements(g: GroupSpec, text: str) -> list:
    tokens = _ELEM_TOKEN.findall(text)
    if _ELEM_TOKEN.sub("", text).strip():
        raise FormatError(f"unparsable element list {text!r}")
    return [parse_element(g, t) for t in tokens]


def _content(text: str) -> list[str]:
    out = []
    for ln in text.splitlines():
        ln = ln.split("#", 1)[0].strip()
        if ln:
            out.append(ln)
    return out


def _keyed(line: str, key: str) -> str | None:
    for sep in (":", " "):
        if line.startswith(key + sep):
            return line[len(key) + 1 :].strip()
    return None


def parse_lattice(text: str, rank: int) -> Lattice:
    text = text.strip()
    if text == "finite":
        if rank:
            raise FormatError("'finite' needs a group without free factors")
        return Lattice.trivial()
    rows = [[int(v) for v in r.split()] for r in text.split(";") if r.strip()]
    if any(len(r) != rank for r in rows) or len(rows) != rank:
        raise FormatError(f"lattice needs {rank} rows of {rank} integers")
    # rows are basis vectors; Lattice takes them as columns
    return Lattice(tuple(tuple(rows[k][i] for k in range(rank)) for i in range(rank)))


def format_lattice(lattice: Lattice) -> str:
    if lattice.rank == 0:
        return "finite"
    return "; ".join(" ".join(map(str, row)) for row in lattice.hermite)


def parse_instance(text: str) -> TilingInstance:
    lines = _content(text)
    if not lines or _keyed(lines[0], "group") is None:
        raise FormatError("instance must start with 'group ...'")
    try:
        g = parse_group(_keyed(lines[0], "group"))
    except ValueError as e:
        raise FormatError(str(e)) from None
    lattice = residues = None
    tiles = []
    for ln in lines[1:]:
        if (v := _keyed(ln, "lattice")) is not None:
            lattice = parse_lattice(v, g.rank)
        elif (v := _keyed(ln, "residues")) is not None:
            residues = _elements(g, v)
        elif (v := _keyed(ln, "tile")) is not None:
            tiles.append(Tile.of(g, _elements(g, v)))
        else:
            raise FormatError(f"unknown instance line {ln!r}")
    if residues is None or not tiles:
        raise FormatError("instance needs 'residues:' and at least one 'tile:'")
    if lattice is None:
        if g.rank:
            raise FormatError("infinite group needs a 'lattice' line")
        lattice = Lattice.trivial()
    try:
        A = PeriodicSet(g, lattice, frozenset(residues))
    except ValueError as e:
        raise FormatError(str(e)) from None
    return TilingInstance(g, A, tuple(tiles))


def write_instance(inst: TilingInstance) -> str:
    out = [f"group {format_group(inst.group)}", f"lattice {format_lattice(inst.A.lattice)}"]
    out.append("residues: " + " ".join(format_element(x) for x in sorted(inst.A.residues)))
    out += ["tile: " + " ".join(format_element(x) for x in F) for F in inst.tiles]
    return "\n".join(out) + "\n"


def write_partition(P: Partition) -> str:
    out = ["partition v1", f"group {format_group(P.group)}"]
    out += ["part: " + " ".join(format_element(x) for x in sorted(part)) for part in P.parts]
    return "\n".join(out) + "\n"


def parse_partition(text: str) -> Partition:
    lines = _content(text)
    if len(lines) < 2 or lines[0] != "partition v1" or _keyed(lines[1], "group") is None:
        raise FormatError("partition file must start with 'partition v1' and 'group ...'")
    g = parse_group(_keyed(lines[1], "group"))
    parts = []
    for ln in lines[2:]:
        v = _keyed(ln, "part")
        if v is None:
            raise FormatError(f"unknown partition line {ln!r}")
        parts.append(frozenset(_elements(g, v)))
    try:
        return Partition(g, tuple(parts))
    except ValueError as e:
        raise FormatError(str(e)) from None
