"""Translational tiling equations A (+) F = G, exact-cover enumeration on
finite groups, intersective partitions and the stacking reduction."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .abelian import (
    Element,
    GroupSpec,
    Lattice,
    coerce,
    quotient_elements,
)

log = logging.getLogger(__name__)


class GroupMismatch(ValueError):
    pass


class NotAGraph(ValueError):
    def __init__(self, fiber: Element, points: Sequence[Element]):
        self.fiber = fiber
        self.points = tuple(points)
        kind = "empty" if not self.points else f"{len(self.points)} points"
        super().__init__(f"fiber over {fiber} is {kind}")


class PartitionNotFound(RuntimeError):
    pass


@dataclass(frozen=True)
class Tile:
    group: GroupSpec
    elements: frozenset

    def __post_init__(self):
        elems = frozenset(coerce(self.group, x) for x in self.elements)
        if not elems:
            raise ValueError("a tile must be non-empty")
        object.__setattr__(self, "elements", elems)

    @classmethod
    def of(cls, group: GroupSpec, items: Iterable) -> "Tile":
        return cls(group, frozenset(coerce(group, x) for x in items))

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(sorted(self.elements))

    def translate(self, v: Element) -> "Tile":
        return Tile(self.group, frozenset(self.group.add(x, v) for x in self.elements))


@dataclass(frozen=True)
class PeriodicSet:
    """Finite union of cosets of lattice x {0} in Z^r x G0."""

    group: GroupSpec
    lattice: Lattice
    residues: frozenset

    def __post_init__(self):
        if self.lattice.rank != self.group.rank:
            raise ValueError("lattice rank does not match the group")
        reps = [coerce(self.group, x) for x in self.residues]
        reduced = {Element(self.lattice.reduce(x.free), x.torsion) for x in reps}
        if len(reduced) != len(set(reps)):
            raise ValueError("residues are not pairwise non-congruent")
        object.__setattr__(self, "residues", frozenset(reduced))

    @classmethod
    def finite(cls, group: GroupSpec, items: Iterable) -> "PeriodicSet":
        if not group.is_finite:
            raise ValueError("use an explicit lattice for infinite groups")
        return cls(group, Lattice.trivial(), frozenset(coerce(group, x) for x in items))

    def __contains__(self, x: Element) -> bool:
        return Element(self.lattice.reduce(x.free), x.torsion) in self.residues

    def times_zero(self, fiber: GroupSpec) -> "PeriodicSet":
        """A x {0} inside G x H for a finite H."""
        if not fiber.is_finite:
            raise ValueError("fiber group must be finite")
        g = self.group.product(fiber)
        zero = (0,) * len(fiber.moduli)
        return PeriodicSet(g, self.lattice, frozenset(Element(a.free, a.torsion + zero) for a in self.residues))

    def translate(self, v: Element) -> "PeriodicSet":
        return PeriodicSet(self.group, self.lattice, frozenset(self.group.add(a, v) for a in self.residues))


class Defect(NamedTuple):
    tile: int
    point: Element
    count: int


@dataclass(frozen=True)
class TilingReport:
    ok: bool
    defects: tuple[Defect, ...] = ()
    checked: int = 0


def _same_group(*groups: GroupSpec) -> None:
    if any(g != groups[0] for g in groups):
        raise GroupMismatch(f"group mismatch: {', '.join(map(str, groups))}")


def coverage_count(A: PeriodicSet, F: Tile, x: Element) -> int:
    """#{f in F : x - f in A}."""
    _same_group(A.group, F.group)
    g = A.group
    x = coerce(g, x)
    return sum(1 for f in F.elements if g.sub(x, f) in A)


def verify_tiling(A: PeriodicSet, system: Sequence[Tile]) -> TilingReport:
    """Check A (+) F = G for every tile by scanning one fundamental domain of
    the period lattice (coverage counts are lattice-periodic)."""
    if not system:
        raise ValueError("empty tile system")
    _same_group(A.group, *(F.group for F in system))
    domain = quotient_elements(A.group, A.lattice)
    defects = []
    for m, F in enumerate(system):
        for x in domain:
            c = coverage_count(A, F, x)
            if c != 1:
                defects.append(Defect(m, x, c))
    return TilingReport(not defects, tuple(defects), len(domain) * len(system))


# ---------------------------------------------------------------------------
# exact cover on finite groups


@dataclass(frozen=True)
class TilingEnumeration:
    tilings: tuple[frozenset, ...]
    complete: bool = True
    reason: str | None = None
    nodes: int = 0

    def __iter__(self):
        return iter(self.tilings)

    def __len__(self):
        return len(self.tilings)


class _FiniteTranslates:
    """Bitmask form of the translates a + F inside a finite group."""

    def __init__(self, g: GroupSpec, F: Tile):
        self.g = g
        self.order = g.order
        coords = g.coords()
        offsets = np.array([f.torsion for f in sorted(F.elements)], dtype=np.int64)
        moduli = np.array(g.moduli, dtype=np.int64)
        # image[a, k] = index of a + f_k
        image = g.index_array((coords[:, None, :] + offsets[None, :, :]) % moduli)
        self.masks = [sum(1 << int(i) for i in row) for row in image]
        # source[x, k] = index of x - f_k
        self.source = g.index_array((coords[:, None, :] - offsets[None, :, :]) % moduli)


def enumerate_tilings(g: GroupSpec, F: Tile, budget: int | None = None) -> TilingEnumeration:
    """All A with A (+) F = G for finite G, in lexicographic order.

    Branching always covers the least uncovered element x, trying the
    translates a = x - f in increasing order of a."""
    if not g.is_finite:
        raise ValueError("enumerate_tilings needs a finite group")
    _same_group(g, F.group)
    if g.order % len(F) != 0:
        return TilingEnumeration((), True, f"|F| = {len(F)} does not divide |G| = {g.order}")

    tr = _FiniteTranslates(g, F)
    full = (1 << g.order) - 1
    found: list[tuple[int, ...]] = []
    nodes = 0
    complete = True

    def rec(covered: int, chosen: list[int]) -> bool:
        nonlocal nodes
        if covered == full:
            found.append(tuple(chosen))
            return True
        nodes += 1
        if budget is not None and nodes > budget:
            return False
        free = ~covered & full
        x = (free & -free).bit_length() - 1
        for a in sorted(set(int(a) for a in tr.source[x])):
            mask = tr.masks[a]
            if mask & covered:
                continue
            chosen.append(a)
            if not rec(covered | mask, chosen):
                return False
            chosen.pop()
        return True

    if not rec(0, []):
        complete = False
    tilings = sorted(tuple(sorted(t)) for t in found)
    return TilingEnumeration(
        tuple(frozenset(g.element_at(i) for i in t) for t in tilings),
        complete,
        None if complete else f"search budget {budget} exhausted",
        nodes,
    )


def sorted_tiling(A: Iterable[Element]) -> tuple[Element, ...]:
    return tuple(sorted(A))


# ---------------------------------------------------------------------------
# partitions


@dataclass(frozen=True)
class Partition:
    group: GroupSpec
    parts: tuple[frozenset, ...]

    def __post_init__(self):
        if not self.group.is_finite:
            raise ValueError("partitions are of finite groups")
        parts = tuple(frozenset(coerce(self.group, x) for x in part) for part in self.parts)
        if not parts:
            raise ValueError("a partition needs at least one part")
        seen: set = set()
        for part in parts:
            if not part:
                raise ValueError("partition parts must be non-empty")
            if seen & part:
                raise ValueError("partition parts overlap")
            seen |= part
        if len(seen) != self.group.order:
            raise ValueError("partition parts do not cover the group")
        object.__setattr__(self, "parts", parts)

    def __len__(self):
        return len(self.parts)


class Violation(NamedTuple):
    i: int
    j: int
    shift: Element  # d = h_i - h_j


@dataclass(frozen=True)
class IntersectiveReport:
    ok: bool
    violations: tuple[Violation, ...]
    pair_tests: int


def verify_intersective(P: Partition) -> IntersectiveReport:
    """Check (E_i + h_i) meets (E_j + h_j) for all i, j, h_i, h_j except when
    i != j and h_i = h_j, by testing every translate pair directly.  Each
    violating class is reported once as (i, j, d) with d = h_i - h_j."""
    H = P.group
    elems = H.elements()
    shifted = [{h: frozenset(H.add(e, h) for e in part) for h in elems} for part in P.parts]
    bad: dict[tuple[int, int, Element], None] = {}
    tests = 0
    for i, j in itertools.product(range(len(P)), repeat=2):
        for hi in elems:
            for hj in elems:
                tests += 1
                if i != j and hi == hj:
                    continue
                if shifted[i][hi].isdisjoint(shifted[j][hj]):
                    bad.setdefault((i, j, H.sub(hi, hj)), None)
    violations = tuple(Violation(i, j, d) for (i, j, d) in sorted(bad))
    return IntersectiveReport(not violations, violations, tests)


class _DifferenceScore:
    """Counts missing differences: for each i, d with d not in E_i - E_i,
    and for each i != j, d != 0 with d not in E_i - E_j."""

    def __init__(self, H: GroupSpec, M: int):
        self.M = M
        self.order = H.order
        coords = H.coords()
        moduli = np.array(H.moduli, dtype=np.int64)
        self.diff = H.index_array((coords[:, None, :] - coords[None, :, :]) % moduli)

    def __call__(self, labels: np.ndarray) -> int:
        onehot = np.zeros((self.M, self.order), dtype=np.int64)
        onehot[labels, np.arange(self.order)] = 1
        missing = 0
        for i in range(self.M):
            for j in range(self.M):
                pairs = np.outer(onehot[i], onehot[j])
                hit = np.bincount(self.diff.ravel(), weights=pairs.ravel(), minlength=self.order) > 0
                if i == j:
                    missing += int((~hit).sum())
                else:
                    missing += int((~hit[1:]).sum())
        return missing


def _labels_to_partition(H: GroupSpec, labels: np.ndarray, M: int) -> Partition:
    elems = H.elements()
    return Partition(H, tuple(frozenset(elems[k] for k in np.flatnonzero(labels == i)) for i in range(M)))


def find_intersective_partition(
    H: GroupSpec,
    M: int = 2,
    seed: int = 0,
    budget: int = 1_000_000,
    exhaustive: bool | None = None,
) -> Partition:
    """Search for an M-part intersective partition of a finite group H.

    The default strategy is seeded hill climbing over balanced labelings,
    moving one element at a time and accepting non-worsening moves.  For
    |H| <= 16 (or ``exhaustive=True``) every labeling is tried in order.
    Each labeling scored counts against ``budget``."""
    if not H.is_finite:
        raise ValueError("H must be finite")
    if M < 2:
        raise ValueError("need at least two parts")
    order = H.order
    if exhaustive is None:
        exhaustive = order <= 16
    score = _DifferenceScore(H, M)

    if exhaustive:
        used = 0
        # relabeling parts preserves validity, so element 0 is pinned to part 0
        for rest in itertools.product(range(M), repeat=order - 1):
            labels = np.array((0,) + rest, dtype=np.int64)
            if len(set(labels.tolist())) < M:
                continue
            used += 1
            if used > budget:
                raise PartitionNotFound(f"budget {budget} exhausted")
            if score(labels) == 0:
                return _labels_to_partition(H, labels, M)
        raise PartitionNotFound(f"no intersective {M}-part partition of {H} exists")

    smallest = next(s for s in range(1, order + 1) if s * (s - 1) + 1 >= order)
    if M * smallest > order:
        # E_i - E_i = H needs |E_i| (|E_i| - 1) + 1 >= |H|
        raise PartitionNotFound(f"{H} is too small for {M} intersective parts")
    rng = np.random.default_rng(seed)
    used = 0
    while used < budget:
        labels = np.arange(order, dtype=np.int64) % M
        rng.shuffle(labels)
        current = score(labels)
        used += 1
        stall = 0
        while current and used < budget and stall < 50 * order:
            k = int(rng.integers(order))
            new = int(rng.integers(M - 1))
            new += new >= labels[k]
            trial = labels.copy()
            trial[k] = new
            if np.bincount(trial, minlength=M).min() == 0:
                continue
            s = score(trial)
            used += 1
            if s <= current:
                stall = stall + 1 if s == current else 0
                labels, current = trial, s
            else:
                stall += 1
        if current == 0:
            log.debug("intersective partition found after %d evaluations", used)
            return _labels_to_partition(H, labels, M)
    raise PartitionNotFound(f"budget {budget} exhausted without an intersective partition")


# ---------------------------------------------------------------------------
# stacking and graphs


def stack(tiles: Sequence[Tile], P: Partition) -> Tile:
    """The single tile  U_m F^(m) x E_m  in G x H."""
    if not tiles:
        raise ValueError("no tiles to stack")
    if len(tiles) != len(P):
        raise ValueError(f"{len(tiles)} tiles but {len(P)} partition parts")
    G = tiles[0].group
    _same_group(*(F.group for F in tiles))
    GH = G.product(P.group)
    out = frozenset(
        G.pair(P.group, f, e) for F, E in zip(tiles, P.parts) for f in F.elements for e in E
    )
    return Tile(GH, out)


def split(x: Element, base: GroupSpec) -> tuple[Element, Element]:
    """Split a point of base x fiber (fiber finite) into its two parts."""
    k = len(base.moduli)
    return Element(x.free, x.torsion[:k]), Element((), x.torsion[k:])


def graph_detect(
    points: Iterable[Element],
    base: GroupSpec,
    fiber: GroupSpec,
    domain: Iterable[Element] | None = None,
    partial: bool = False,
) -> dict[Element, Element]:
    """Return f with points = {(a, f(a))}.

    With ``partial=False`` every fiber over the domain must hold exactly one
    point (A (+) ({0} x H) = G x H there).  With ``partial=True`` empty fibers
    are allowed and f is defined on the base projection only.  Raises
    NotAGraph with the offending fiber."""
    if not fiber.is_finite:
        raise ValueError("fiber group must be finite")
    if domain is None:
        domain = base.elements()
    domain = list(domain)
    fibers: dict[Element, list[Element]] = {}
    for x in points:
        a, h = split(x, base)
        fibers.setdefault(a, []).append(h)
    for a in sorted(fibers):
        if len(fibers[a]) > 1:
            raise NotAGraph(a, [base.pair(fiber, a, h) for h in sorted(fibers[a])])
    if not partial:
        for a in domain:
            if a not in fibers:
                raise NotAGraph(a, [])
    f = {a: hs[0] for a, hs in fibers.items()}
    if not partial:
        wanted = set(domain)
        f = {a: h for a, h in f.items() if a in wanted}
    return dict(sorted(f.items()))


def graph_of(f: Mapping[Element, Element], base: GroupSpec, fiber: GroupSpec) -> frozenset:
    return frozenset(base.pair(fiber, a, h) for a, h in f.items())
