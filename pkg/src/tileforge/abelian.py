"""Finitely generated abelian groups Z^r x Z/n1 x ... x Z/nk.

Elements are plain immutable values; all arithmetic goes through the owning
:class:`GroupSpec`, which knows the moduli.  Free coordinates are Python ints
and therefore exact at any magnitude.

Lattices are full-rank subgroups of Z^r, stored together with an upper
triangular Hermite basis so that reduction to the canonical fundamental box
``prod [0, d_i)`` is a single forward sweep.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True, order=True)
class Element:
    free: tuple[int, ...]
    torsion: tuple[int, ...] = ()

    def __str__(self) -> str:
        return format_element(self)


@dataclass(frozen=True)
class GroupSpec:
    rank: int
    moduli: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "moduli", tuple(int(n) for n in self.moduli))
        if self.rank < 0:
            raise ValueError("rank must be nonnegative")
        if any(n < 2 for n in self.moduli):
            raise ValueError(f"moduli must be >= 2, got {self.moduli}")

    # -- basic facts -------------------------------------------------------

    @property
    def is_finite(self) -> bool:
        return self.rank == 0

    @property
    def torsion_order(self) -> int:
        return math.prod(self.moduli)

    @property
    def order(self) -> int:
        if not self.is_finite:
            raise ValueError(f"{self} is infinite")
        return self.torsion_order

    @property
    def dim(self) -> int:
        return self.rank + len(self.moduli)

    def __str__(self) -> str:
        return format_group(self)

    # -- construction of elements -----------------------------------------

    def normalize(self, free: Sequence[int], torsion: Sequence[int] = ()) -> Element:
        free, torsion = tuple(free), tuple(torsion)
        if len(free) != self.rank or len(torsion) != len(self.moduli):
            raise ValueError(
                f"element shape ({len(free)}, {len(torsion)}) does not match "
                f"group {self} ({self.rank}, {len(self.moduli)})"
            )
        return Element(
            tuple(int(a) for a in free),
            tuple(int(b) % n for b, n in zip(torsion, self.moduli)),
        )

    def elem(self, *coords) -> Element:
        """Build an element from flat coordinates (free first, then torsion).

        A single int is accepted for one-dimensional groups, and an Element is
        renormalized."""
        if len(coords) == 1:
            (x,) = coords
            if isinstance(x, Element):
                return self.normalize(x.free, x.torsion)
            if isinstance(x, (tuple, list)):
                coords = tuple(x)
        if len(coords) != self.dim:
            raise ValueError(f"expected {self.dim} coordinates for {self}, got {coords}")
        return self.normalize(coords[: self.rank], coords[self.rank :])

    def zero(self) -> Element:
        return Element((0,) * self.rank, (0,) * len(self.moduli))

    def add(self, x: Element, y: Element) -> Element:
        return Element(
            tuple(a + b for a, b in zip(x.free, y.free)),
            tuple((a + b) % n for a, b, n in zip(x.torsion, y.torsion, self.moduli)),
        )

    def neg(self, x: Element) -> Element:
        return Element(
            tuple(-a for a in x.free),
            tuple((-b) % n for b, n in zip(x.torsion, self.moduli)),
        )

    def sub(self, x: Element, y: Element) -> Element:
        return self.add(x, self.neg(y))

    def scale(self, k: int, x: Element) -> Element:
        return self.normalize([k * a for a in x.free], [k * b for b in x.torsion])

    def contains(self, x: Element) -> bool:
        return (
            len(x.free) == self.rank
            and len(x.torsion) == len(self.moduli)
            and all(0 <= b < n for b, n in zip(x.torsion, self.moduli))
        )

    # -- finite groups -----------------------------------------------------

    def elements(self) -> list[Element]:
        """All elements of a finite group in lexicographic order."""
        if not self.is_finite:
            raise ValueError(f"{self} is infinite")
        return [Element((), t) for t in itertools.product(*(range(n) for n in self.moduli))]

    def index(self, x: Element) -> int:
        """Mixed-radix position of ``x`` among the torsion coordinates; for a
        finite group this agrees with the order of :meth:`elements`."""
        i = 0
        for b, n in zip(x.torsion, self.moduli):
            i = i * n + b
        return i

    def element_at(self, i: int) -> Element:
        out = []
        for n in reversed(self.moduli):
            i, b = divmod(i, n)
            out.append(b)
        return Element((), tuple(reversed(out)))

    def coords(self) -> np.ndarray:
        """Torsion coordinates of all elements, shape (|G0|, k), lex order."""
        if not self.moduli:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.meshgrid(*(np.arange(n) for n in self.moduli), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)

    def index_array(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=np.int64)
        idx = np.zeros(coords.shape[:-1], dtype=np.int64)
        for j, n in enumerate(self.moduli):
            idx = idx * n + coords[..., j] % n
        return idx

    def product(self, other: "GroupSpec") -> "GroupSpec":
        """G x H with coordinates ordered (free G, free H, torsion G, torsion H)."""
        return GroupSpec(self.rank + other.rank, self.moduli + other.moduli)

    def pair(self, other: "GroupSpec", x: Element, y: Element) -> Element:
        return Element(x.free + y.free, x.torsion + y.torsion)


# ---------------------------------------------------------------------------
# literals


_FACTOR = re.compile(r"^Z(?:\^(\d+))?$|^Z/(\d+)$")


def parse_group(text: str) -> GroupSpec:
    """Parse ``Z^r x Z/n1 x ... x Z/nk``.  ``Z`` means ``Z^1``; free factors
    must precede finite ones.  ``Z^0`` or ``0`` is the trivial group."""
    text = text.strip()
    if text in ("0", "Z^0"):
        return GroupSpec(0, ())
    rank, moduli = 0, []
    for part in re.split(r"\s*[x×]\s*", text):
        m = _FACTOR.match(part.strip())
        if not m:
            raise ValueError(f"bad group factor {part!r} in {text!r}")
        if m.group(2) is not None:
            moduli.append(int(m.group(2)))
        else:
            if moduli:
                raise ValueError(f"free factors must come first in {text!r}")
            rank += int(m.group(1)) if m.group(1) is not None else 1
    return GroupSpec(rank, tuple(moduli))


def format_group(g: GroupSpec) -> str:
    parts = []
    if g.rank == 1:
        parts.append("Z")
    elif g.rank > 1:
        parts.append(f"Z^{g.rank}")
    parts.extend(f"Z/{n}" for n in g.moduli)
    return " x ".join(parts) if parts else "Z^0"


def format_element(x: Element) -> str:
    return "((" + ",".join(map(str, x.free)) + ");(" + ",".join(map(str, x.torsion)) + "))"


_ELEMENT = re.compile(r"^\(\(([^()]*)\);\(([^()]*)\)\)$")


def parse_element(g: GroupSpec, text: str) -> Element:
    m = _ELEMENT.match(text.strip().replace(" ", ""))
    if not m:
        raise ValueError(f"bad element literal {text!r}")
    free = [int(a) for a in m.group(1).split(",") if a != ""]
    torsion = [int(b) for b in m.group(2).split(",") if b != ""]
    return g.normalize(free, torsion)


def normalize(g: GroupSpec, free: Sequence[int], torsion: Sequence[int] = ()) -> Element:
    return g.normalize(free, torsion)


# ---------------------------------------------------------------------------
# lattices


def hermite_rows(generators: Sequence[Sequence[int]], rank: int) -> tuple[tuple[int, ...], ...]:
    """Upper-triangular Hermite basis (as rows) of the lattice spanned by
    ``generators``.  Diagonal entries are positive and every entry above a
    pivot is reduced into [0, pivot)."""
    rows = [list(map(int, v)) for v in generators]
    if any(len(v) != rank for v in rows):
        raise ValueError("generator length does not match rank")
    basis: list[list[int]] = []
    for col in range(rank):
        pivot = None
        rest = []
        for v in rows:
            if v[col] == 0:
                rest.append(v)
                continue
            if pivot is None:
                pivot = v
                continue
            # Euclid on the column entries
            a, b = pivot, v
            while b[col] != 0:
                q = a[col] // b[col]
                a = [x - q * y for x, y in zip(a, b)]
                a, b = b, a
            pivot = a
            rest.append(b)
        if pivot is None:
            raise ValueError("lattice basis is singular")
        if pivot[col] < 0:
            pivot = [-x for x in pivot]
        basis.append(pivot)
        rows = [v for v in rest if any(v)]
    if rows:
        # only zero rows may remain for a square full-rank input
        raise ValueError("lattice generators are dependent beyond rank")
    for k in range(rank):
        d = basis[k][k]
        for i in range(k):
            q = basis[i][k] // d
            if q:
                basis[i] = [x - q * y for x, y in zip(basis[i], basis[k])]
    return tuple(tuple(v) for v in basis)


@dataclass(frozen=True)
class Lattice:
    """Full-rank sublattice of Z^r; ``basis`` columns generate it."""

    basis: tuple[tuple[int, ...], ...]
    hermite: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        basis = tuple(tuple(int(a) for a in row) for row in self.basis)
        r = len(basis)
        if any(len(row) != r for row in basis):
            raise ValueError("lattice basis must be square")
        object.__setattr__(self, "basis", basis)
        columns = [[basis[i][j] for i in range(r)] for j in range(r)]
        object.__setattr__(self, "hermite", hermite_rows(columns, r))

    @classmethod
    def diagonal(cls, *d: int) -> "Lattice":
        return cls(tuple(tuple(d[i] if i == j else 0 for j in range(len(d))) for i in range(len(d))))

    @classmethod
    def trivial(cls) -> "Lattice":
        return cls(())

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def index(self) -> int:
        return math.prod(self.hermite[k][k] for k in range(self.rank))

    @property
    def box(self) -> tuple[int, ...]:
        return tuple(self.hermite[k][k] for k in range(self.rank))

    def reduce(self, v: Sequence[int]) -> tuple[int, ...]:
        """Canonical representative of v + Lattice in the box prod [0, d_k)."""
        v = list(v)
        for k, row in enumerate(self.hermite):
            q = v[k] // row[k]
            if q:
                v = [a - q * b for a, b in zip(v, row)]
        return tuple(v)

    def contains(self, v: Sequence[int]) -> bool:
        return not any(self.reduce(v))

    def __eq__(self, other):
        return isinstance(other, Lattice) and self.hermite == other.hermite

    def __hash__(self):
        return hash(self.hermite)


def quotient_elements(g: GroupSpec, lattice: Lattice) -> list[Element]:
    """Coset representatives of (Z^r / lattice) x G0 in lexicographic order."""
    if lattice.rank != g.rank:
        raise ValueError(f"lattice rank {lattice.rank} != group rank {g.rank}")
    frees = itertools.product(*(range(d) for d in lattice.box))
    torsions = list(itertools.product(*(range(n) for n in g.moduli)))
    return [Element(f, t) for f in frees for t in torsions]


def reduce_element(g: GroupSpec, lattice: Lattice, x: Element) -> Element:
    return Element(lattice.reduce(x.free), x.torsion)


@dataclass(frozen=True)
class Window:
    """Closed box [lo, hi] per free coordinate."""

    bounds: tuple[tuple[int, int], ...]

    def __post_init__(self):
        bounds = tuple((int(lo), int(hi)) for lo, hi in self.bounds)
        if any(lo > hi for lo, hi in bounds):
            raise ValueError(f"empty window {bounds}")
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def cube(cls, rank: int, lo: int, hi: int) -> "Window":
        return cls(((lo, hi),) * rank)


def window_points(g: GroupSpec, w: Window) -> list[Element]:
    if len(w.bounds) != g.rank:
        raise ValueError("window must cover every free coordinate")
    frees = itertools.product(*(range(lo, hi + 1) for lo, hi in w.bounds))
    torsions = list(itertools.product(*(range(n) for n in g.moduli)))
    return [Element(f, t) for f in frees for t in torsions]


def quotient_group(g: GroupSpec, modulus: int) -> GroupSpec:
    """(Z/L)^r x G0: the finite quotient obtained by reducing free coordinates mod L."""
    if modulus < 2:
        raise ValueError("quotient modulus must be >= 2")
    return GroupSpec(0, (modulus,) * g.rank + g.moduli)


def to_quotient(x: Element, modulus: int, rank: int) -> Element:
    return Element((), tuple(a % modulus for a in x.free) + x.torsion)


def coerce(g: GroupSpec, x) -> Element:
    """Accept an Element, a flat coordinate tuple, or an int (1-d groups)."""
    if isinstance(x, Element):
        return g.normalize(x.free, x.torsion)
    if isinstance(x, (int, np.integer)):
        return g.elem(int(x))
    return g.elem(*tuple(x))


def coerce_all(g: GroupSpec, xs: Iterable) -> list[Element]:
    return [coerce(g, x) for x in xs]
