import pytest
from hypothesis import given
from hypothesis import strategies as st

from tileforge.abelian import Lattice, parse_element, parse_group
from tileforge.formats import (
    FormatError,
    TilingInstance,
    parse_board,
    parse_instance,
    parse_lattice,
    parse_line,
    parse_partition,
    write_board,
    write_instance,
    write_partition,
)
from tileforge.padic import PadicParams
from tileforge.sudoku import constant_board, gen_affine
from tileforge.tiling import Partition, PeriodicSet, Tile

P5 = PadicParams(5)


@given(st.integers(0, 4), st.integers(0, 4), st.integers(0, 4), st.integers(-30, 30), st.integers(0, 12))
def test_board_round_trip_is_byte_identical(a, b, c, lo, h):
    if (a, b) == (0, 0):
        board = constant_board(P5, (lo, lo + h), c or 1)
    else:
        board = gen_affine(P5, (lo, lo + h), a, b, c)
    text = write_board(board)
    back = parse_board(text)
    assert back == board
    assert write_board(back) == text


def test_board_header_layout():
    text = write_board(gen_affine(P5, (0, 1), 0, 1, 0))
    assert text.splitlines()[0] == "board v1 p=5 N=25 mlo=0 mhi=1 gen=0,1,0"
    assert len(text.splitlines()) == 3


def _lines(board):
    return write_board(board).splitlines()


def test_value_out_of_range():
    lines = _lines(constant_board(P5, (0, 1), 2))
    lines[2] = "0" + lines[2][1:]
    with pytest.raises(FormatError, match=r"value out of range at \(n=1, m=1\)"):
        parse_board("\n".join(lines))
    lines[2] = "5" + lines[2][1:]
    with pytest.raises(FormatError, match="value out of range"):
        parse_board("\n".join(lines))


@pytest.mark.parametrize(
    "header",
    [
        "board v2 p=5 N=25 mlo=0 mhi=1",
        "board v1 p=5 N=24 mlo=0 mhi=1",
        "board v1 p=4 N=16 mlo=0 mhi=1",
        "board v1 p=5 N=25 mlo=2 mhi=1",
        "board p=5",
        "",
    ],
)
def test_malformed_header(header):
    lines = _lines(constant_board(P5, (0, 1), 2))
    lines[0] = header
    with pytest.raises(FormatError):
        parse_board("\n".join(lines))


def test_row_errors():
    lines = _lines(constant_board(P5, (0, 1), 2))
    with pytest.raises(FormatError, match="expected 25 values"):
        parse_board("\n".join(lines[:2] + [lines[2] + " 1"]))
    with pytest.raises(FormatError, match="non-integer"):
        parse_board("\n".join(lines[:2] + [lines[2].replace("2", "x", 1)]))
    with pytest.raises(FormatError, match="expected 2 rows"):
        parse_board("\n".join(lines[:2]))


def test_parse_line():
    assert parse_line("1 2\n3") == [1, 2, 3]
    with pytest.raises(FormatError):
        parse_line("1 two")


# ---------------------------------------------------------------------------
# instances and partitions


def test_lattice_text():
    assert parse_lattice("2", 1) == Lattice.diagonal(2)
    assert parse_lattice("finite", 0) == Lattice.trivial()
    assert parse_lattice("2 0; 1 3", 2) == parse_lattice("1 3; 2 0", 2)
    with pytest.raises(FormatError):
        parse_lattice("2 0", 2)
    with pytest.raises(FormatError):
        parse_lattice("finite", 1)


INSTANCE = """\
# two tiles on Z x Z/2
group Z x Z/2
lattice 2
residues: ((0);(0))
tile: ((0);(0)) ((1);(0))
tile: ((0);(0)) ((0);(1)) ((1);(0)) ((1);(1))
"""


def test_instance_round_trip():
    inst = parse_instance(INSTANCE)
    g = parse_group("Z x Z/2")
    assert inst.group == g
    assert inst.A == PeriodicSet(g, Lattice.diagonal(2), frozenset([parse_element(g, "((0);(0))")]))
    assert len(inst.tiles) == 2 and len(inst.tiles[1]) == 4
    text = write_instance(inst)
    assert parse_instance(text) == inst
    assert write_instance(parse_instance(text)) == text


def test_finite_instance_defaults_lattice():
    inst = parse_instance("group Z/4\nresidues: ((); (0)) ((); (2))\ntile: ((); (0)) ((); (1))\n")
    assert inst.A == PeriodicSet.finite(inst.group, [parse_element(inst.group, t) for t in ("((); (0))", "((); (2))")])


@pytest.mark.parametrize(
    "text",
    [
        "",
        "lattice 2\n",
        "group Z\nresidues: ((0);())\ntile: ((0);())\n",
        "group Z\nlattice 2\ntile: ((0);())\n",
        "group Z\nlattice 2\nresidues: ((0);()) ((2);())\ntile: ((0);())\n",
        "group Z\nlattice 2\nresidues: ((0);())\ntile: ((0);()) junk\n",
        "group Z\nlattice 2\nresidues: ((0);())\nwhat: x\n",
    ],
)
def test_instance_errors(text):
    with pytest.raises(FormatError):
        parse_instance(text)


def test_partition_round_trip():
    H = parse_group("Z/3 x Z/3")
    elems = H.elements()
    P = Partition(H, (frozenset(elems[:4]), frozenset(elems[4:])))
    text = write_partition(P)
    assert text.startswith("partition v1\ngroup Z/3 x Z/3\n")
    assert parse_partition(text) == P
    assert write_partition(parse_partition(text)) == text


def test_partition_errors():
    with pytest.raises(FormatError):
        parse_partition("group Z/2\npart: ((); (0))\n")
    with pytest.raises(FormatError, match="cover"):
        parse_partition("partition v1\ngroup Z/2\npart: ((); (0))\n")


def test_instance_tiles_keep_group():
    inst = parse_instance(INSTANCE)
    assert all(isinstance(F, Tile) and F.group == inst.group for F in inst.tiles)
    assert isinstance(inst, TilingInstance)
