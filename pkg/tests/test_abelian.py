import itertools
import math

import pytest
import sympy
from hypothesis import given
from sympy.matrices.normalforms import smith_normal_form
from hypothesis import strategies as st

from tileforge.abelian import (
    Element,
    GroupSpec,
    Lattice,
    Window,
    format_element,
    format_group,
    hermite_rows,
    normalize,
    parse_element,
    parse_group,
    quotient_elements,
    quotient_group,
    to_quotient,
    window_points,
)


def test_normalize_examples():
    assert normalize(GroupSpec(1, (3,)), [5], [7]) == Element((5,), (1,))
    assert normalize(GroupSpec(0, (2, 2)), [], [-1, 2]) == Element((), (1, 0))
    assert normalize(GroupSpec(2), [3, -4], []) == Element((3, -4), ())


def test_normalize_length_mismatch():
    with pytest.raises(ValueError):
        normalize(GroupSpec(1, (3,)), [1, 2], [0])


def test_group_validation():
    with pytest.raises(ValueError):
        GroupSpec(0, (1,))
    with pytest.raises(ValueError):
        GroupSpec(-1)
    assert GroupSpec(0, (2, 3)).order == 6
    with pytest.raises(ValueError):
        GroupSpec(1).order


@pytest.mark.parametrize(
    "text,rank,moduli",
    [("Z^2 x Z/7 x Z/7", 2, (7, 7)), ("Z", 1, ()), ("Z/4", 0, (4,)), ("0", 0, ()), ("Z x Z x Z/2", 2, (2,))],
)
def test_parse_group(text, rank, moduli):
    g = parse_group(text)
    assert (g.rank, g.moduli) == (rank, moduli)
    assert parse_group(format_group(g)) == g


@pytest.mark.parametrize("bad", ["Z/7 x Z", "Q", "Z^x", ""])
def test_parse_group_rejects(bad):
    with pytest.raises(ValueError):
        parse_group(bad)


def test_element_literal_round_trip():
    g = parse_group("Z^2 x Z/7")
    x = parse_element(g, "((3,-1);(9))")
    assert x == Element((3, -1), (2,))
    assert format_element(x) == "((3,-1);(2))"
    assert parse_element(g, format_element(x)) == x
    with pytest.raises(ValueError):
        parse_element(g, "(3,-1,2)")


def test_quotient_examples():
    assert quotient_elements(GroupSpec(2), Lattice.diagonal(2, 2)) == [
        Element((0, 0)),
        Element((0, 1)),
        Element((1, 0)),
        Element((1, 1)),
    ]
    assert len(quotient_elements(GroupSpec(1, (2,)), Lattice.diagonal(3))) == 6
    lat = Lattice(((2, 1), (0, 1)))
    reps = quotient_elements(GroupSpec(2), lat)
    snf = smith_normal_form(sympy.Matrix([[2, 1], [0, 1]]), domain=sympy.ZZ)
    assert len(reps) == abs(math.prod(snf[k, k] for k in range(2))) == 2


def test_singular_lattice():
    with pytest.raises(ValueError):
        Lattice(((1, 2), (2, 4)))


def test_window_points():
    assert len(window_points(GroupSpec(1), Window(((0, 2),)))) == 3
    assert len(window_points(GroupSpec(2), Window.cube(2, 0, 1))) == 4
    pts = window_points(GroupSpec(1, (3,)), Window(((-1, 1),)))
    assert len(pts) == 9 and pts == sorted(pts)
    with pytest.raises(ValueError):
        Window(((2, 1),))


def test_quotient_group():
    g = quotient_group(GroupSpec(1, (2,)), 6)
    assert g == GroupSpec(0, (6, 2))
    assert to_quotient(Element((-1,), (1,)), 6, 1) == Element((), (5, 1))


# ---------------------------------------------------------------------------
# lattices against a rational-inverse oracle

matrices = st.lists(st.integers(-6, 6), min_size=4, max_size=4).filter(lambda v: v[0] * v[3] - v[1] * v[2] != 0)
vectors = st.tuples(st.integers(-20, 20), st.integers(-20, 20))


def in_lattice_oracle(cols, v):
    B = sympy.Matrix(cols)
    sol = B.inv() * sympy.Matrix(v)
    return all(x.is_integer for x in sol)


@given(matrices, vectors)
def test_lattice_membership_matches_oracle(entries, v):
    basis = ((entries[0], entries[1]), (entries[2], entries[3]))
    lat = Lattice(basis)
    assert lat.contains(v) == in_lattice_oracle(basis, v)
    assert lat.index == abs(entries[0] * entries[3] - entries[1] * entries[2])


@given(matrices)
def test_quotient_representatives_distinct(entries):
    basis = ((entries[0], entries[1]), (entries[2], entries[3]))
    lat = Lattice(basis)
    reps = quotient_elements(GroupSpec(2), lat)
    assert len(reps) == lat.index
    for x, y in itertools.combinations(reps, 2):
        assert not lat.contains([a - b for a, b in zip(x.free, y.free)])


@given(matrices, vectors)
def test_reduce_is_canonical(entries, v):
    basis = ((entries[0], entries[1]), (entries[2], entries[3]))
    lat = Lattice(basis)
    r = lat.reduce(v)
    assert lat.contains([a - b for a, b in zip(v, r)])
    assert lat.reduce(r) == r
    assert all(0 <= r[k] < lat.box[k] for k in range(2))


def test_hermite_rows_shape():
    rows = hermite_rows([[2, 0], [1, 1]], 2)
    assert rows == ((1, 1), (0, 2))
    assert Lattice(((2, 1), (0, 1))) == Lattice(((1, 2), (1, 0)))


# ---------------------------------------------------------------------------
# group axioms

G = GroupSpec(1, (3, 4))
elements = st.builds(
    lambda a, b, c: G.normalize([a], [b, c]), st.integers(-50, 50), st.integers(-9, 9), st.integers(-9, 9)
)


@given(elements, elements, elements)
def test_group_axioms(x, y, z):
    assert G.add(G.add(x, y), z) == G.add(x, G.add(y, z))
    assert G.add(x, y) == G.add(y, x)
    assert G.add(x, G.zero()) == x
    assert G.add(x, G.neg(x)) == G.zero()
    assert G.sub(x, y) == G.add(x, G.neg(y))


@given(st.lists(st.integers(-99, 99), min_size=3, max_size=3), st.lists(st.integers(-99, 99), min_size=3, max_size=3))
def test_normalize_idempotent_and_additive(u, v):
    x = G.normalize(u[:1], u[1:])
    y = G.normalize(v[:1], v[1:])
    assert G.normalize(x.free, x.torsion) == x
    summed = G.normalize([u[0] + v[0]], [u[1] + v[1], u[2] + v[2]])
    assert summed == G.add(x, y)


def test_finite_indexing_round_trip():
    H = GroupSpec(0, (3, 4, 2))
    elems = H.elements()
    assert [H.index(x) for x in elems] == list(range(24))
    assert [H.element_at(i) for i in range(24)] == elems
    assert H.index_array(H.coords()).tolist() == list(range(24))
