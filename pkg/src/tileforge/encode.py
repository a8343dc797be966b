"""Functional equations encoded as tiling equations over G x H.

A set A in G x H with A (+) ({0} x H) = G x H is the graph of some f: G -> H.
Each encoder below returns tiles whose tiling equations, for graphs, say
something about f.  :func:`encoder_equivalence_check` tests the claimed
equivalence exhaustively after replacing each free Z factor by Z/L.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import kernels
from .abelian import Element, GroupSpec, coerce, quotient_group, to_quotient
from .padic import is_prime
from .tiling import NotAGraph, PeriodicSet, Tile, enumerate_tilings, graph_detect, verify_tiling

FunctionTable = Mapping[Element, Element]
Property = Callable[[FunctionTable, GroupSpec, int], bool]


@dataclass(frozen=True)
class EncodedConstraint:
    name: str
    base: GroupSpec
    fiber: GroupSpec
    tiles: tuple[Tile, ...]
    meaning: str
    params: tuple = ()
    # property(f, base, L): does f (a table over the finite base) have the
    # encoded property; L is the quotient modulus or 0 for an unreduced base
    prop: Property = field(default=None, compare=False, repr=False)
    # the quotient modulus must be a multiple of this
    period: int = 1

    @property
    def group(self) -> GroupSpec:
        return self.base.product(self.fiber)


def _point(base: GroupSpec, fiber: GroupSpec, a: Element, h: Element) -> Element:
    return base.pair(fiber, a, h)


# ---------------------------------------------------------------------------
# encoders


def encode_periodicity(G: GroupSpec, H: GroupSpec, v) -> EncodedConstraint:
    """f(x + v) = f(x)  <=>  A (+) ({0} x {0}  U  {v} x (H minus 0)) = G x H."""
    if not H.is_finite:
        raise ValueError("H must be finite")
    v = coerce(G, v)
    zero_h = H.zero()
    elems = {_point(G, H, G.zero(), zero_h)}
    elems |= {_point(G, H, v, h) for h in H.elements() if h != zero_h}

    def prop(f, base, L):
        w = to_quotient(v, L, G.rank) if L else v
        return all(f[base.add(x, w)] == f[x] for x in f)

    return EncodedConstraint(
        "periodicity", G, H, (Tile(G.product(H), frozenset(elems)),),
        f"f(x + {v}) = f(x)", (v,), prop,
    )


def encode_shifted_mod(N: int) -> EncodedConstraint:
    """f(x) = x + c mod N  <=>  A (+) ({0} x {0}  U  {1} x (Z/N minus 1)) = Z x Z/N."""
    if N < 2:
        raise ValueError("N must be >= 2")
    G, H = GroupSpec(1), GroupSpec(0, (N,))
    elems = {G.pair(H, Element((0,)), Element((), (0,)))}
    elems |= {G.pair(H, Element((1,)), Element((), (y,))) for y in range(N) if y != 1}

    def prop(f, base, L):
        shifts = {(h.torsion[0] - x.torsion[0]) % N for x, h in f.items()}
        return len(shifts) == 1

    return EncodedConstraint(
        "shift", G, H, (Tile(G.product(H), frozenset(elems)),),
        f"f(x) = x + c mod {N}", (N,), prop, period=N,
    )


def linear_kernel(K: int, q: int, coefficients: Sequence[int]) -> list[Element]:
    H = GroupSpec(0, (2 * q,) * K)
    return [y for y in H.elements() if sum(a * b for a, b in zip(coefficients, y.torsion)) % (2 * q) == 0]


def encode_linear(K: int, q: int, coefficients: Sequence[int]) -> EncodedConstraint:
    """a_1 f_1 + ... + a_K f_K = c  <=>  A (+) ({0} x E  U  {1} x (H minus E)) = Z x H
    with E the kernel of y -> sum a_i y_i in H = (Z/2q)^K."""
    coefficients = tuple(int(a) % (2 * q) for a in coefficients)
    if len(coefficients) != K:
        raise ValueError(f"need {K} coefficients, got {len(coefficients)}")
    if not is_prime(q):
        raise ValueError(f"q must be prime, got {q}")
    if not any(coefficients):
        raise ValueError("all-zero coefficients make E = H (degenerate)")
    G, H = GroupSpec(1), GroupSpec(0, (2 * q,) * K)
    E = set(linear_kernel(K, q, coefficients))
    zero, one = Element((0,)), Element((1,))
    elems = {G.pair(H, zero, y) for y in E} | {G.pair(H, one, y) for y in H.elements() if y not in E}

    def prop(f, base, L):
        values = {sum(a * b for a, b in zip(coefficients, h.torsion)) % (2 * q) for h in f.values()}
        return len(values) == 1

    terms = " + ".join(f"{a} f_{i + 1}" for i, a in enumerate(coefficients))
    return EncodedConstraint(
        "linear", G, H, (Tile(G.product(H), frozenset(elems)),),
        f"{terms} = c mod {2 * q}", (K, q, coefficients), prop,
    )


def encode_boolean_pair(q: int) -> EncodedConstraint:
    """{f(x,0), f(x,1)} = {a, b} with a even, b odd, for f: Z x Z/2 -> Z/2q.

    Two tiles on Z x Z/2 x Z/2q: F = {(0,0), (0,1)} x 2Z/2qZ and
    F' = F minus {(0,0,0), (0,1,0)} plus {(1,0,0), (1,1,0)}."""
    if not is_prime(q) or q < 3:
        raise ValueError(f"q must be a prime >= 3, got {q}")
    G, H = GroupSpec(1, (2,)), GroupSpec(0, (2 * q,))
    GH = G.product(H)
    F = {GH.elem(0, y, e) for y in (0, 1) for e in range(0, 2 * q, 2)}
    F2 = (F - {GH.elem(0, 0, 0), GH.elem(0, 1, 0)}) | {GH.elem(1, 0, 0), GH.elem(1, 1, 0)}

    def prop(f, base, L):
        pairs = set()
        for x, h in f.items():
            other = f[base.add(x, base.elem(*((0,) * (base.dim - 1)), 1))]
            pairs.add(frozenset((h.torsion[0], other.torsion[0])))
        if len(pairs) != 1:
            return False
        (pair,) = pairs
        return len(pair) == 2 and len({v % 2 for v in pair}) == 2

    return EncodedConstraint(
        "boolpair", G, H, (Tile(GH, frozenset(F)), Tile(GH, frozenset(F2))),
        "{f(x,0), f(x,1)} = {a, b}, a even, b odd", (q,), prop,
    )


# ---------------------------------------------------------------------------
# boolean sum constraint


def boolean_to_cyclic(value: int, q: int) -> int:
    """+1 -> 1 and -1 -> 2q - 1 in Z/2q."""
    if value not in (-1, 1):
        raise ValueError(f"boolean values are +-1, got {value}")
    return value % (2 * q)


class NoBooleanSolution(ValueError):
    def __init__(self, x, triple):
        self.x = x
        self.triple = triple
        super().__init__(f"f1 + f2 + f3 = {sum(triple)} at {x} is not +-1")


FORBIDDEN_TRIPLES = ((-1, -1, -1), (1, 1, 1))


def triple_avoids_forbidden(f1: Mapping, f2: Mapping, f3: Mapping):
    """(ok, witness): whether (f1, f2, f3)(x) avoids both constant patterns."""
    for x in sorted(f1):
        t = (f1[x], f2[x], f3[x])
        if t in FORBIDDEN_TRIPLES:
            return False, x
    return True, None


def construct_f4(f1: Mapping, f2: Mapping, f3: Mapping) -> dict:
    f4 = {}
    for x in sorted(f1):
        s = f1[x] + f2[x] + f3[x]
        if s not in (-1, 1):
            raise NoBooleanSolution(x, (f1[x], f2[x], f3[x]))
        f4[x] = s
    return f4


def encode_sum_constraint(q: int) -> EncodedConstraint:
    """Tiles for f1 + f2 + f3 - f4 = c over Z x (Z/2q)^4 (booleans as 1, 2q-1)."""
    return encode_linear(4, q, (1, 1, 1, -1))


# ---------------------------------------------------------------------------
# alignment


def centered(d: int, q: int) -> int:
    """|d| for d in Z/2q: magnitude of the representative in (-q, q]."""
    d %= 2 * q
    return 2 * q - d if d > q else d


@dataclass(frozen=True)
class AlignmentVerdict:
    constant: bool
    surjective: bool
    gaps: tuple[int, int]
    conclusion: bool | None  # None when the hypotheses fail

    @property
    def hypotheses(self) -> bool:
        return self.constant and self.surjective

    @property
    def counterexample(self) -> bool:
        return self.hypotheses and self.conclusion is False


def alignment_check(fs: Sequence[Mapping], pairs: Sequence[tuple[int, int]], q: int) -> AlignmentVerdict:
    """Evaluate the alignment hypotheses for f_1..f_4 with values in the
    doubletons ``pairs`` and, when they hold, compare |a_1 - b_1| with |a_2 - b_2|."""
    if len(fs) != 4 or len(pairs) != 4:
        raise ValueError("need four functions and four value pairs")
    mod = 2 * q
    pairs = [(a % mod, b % mod) for a, b in pairs]
    domain = sorted(fs[0])
    for i, (f, (a, b)) in enumerate(zip(fs, pairs), start=1):
        if sorted(f) != domain:
            raise ValueError(f"f_{i} has a different domain")
        if (a - b) % 2 == 0:
            raise ValueError(f"a_{i} - b_{i} must be odd")
        bad = [x for x in domain if f[x] % mod not in (a, b)]
        if bad:
            raise ValueError(f"f_{i}({bad[0]}) = {f[bad[0]]} is not in {{{a}, {b}}}")
    values = {(fs[0][x] + fs[1][x] - 2 * fs[2][x] - fs[3][x]) % mod for x in domain}
    constant = len(values) <= 1
    seen = {(fs[0][x] % mod, fs[1][x] % mod) for x in domain}
    surjective = len(seen) == 4
    gaps = (centered(pairs[0][0] - pairs[0][1], q), centered(pairs[1][0] - pairs[1][1], q))
    conclusion = gaps[0] == gaps[1] if constant and surjective else None
    return AlignmentVerdict(constant, surjective, gaps, conclusion)


@dataclass(frozen=True)
class AlignmentCounterexample:
    q: int
    pairs: tuple[tuple[int, int], ...]
    domain_size: int
    f12: tuple[tuple[int, int], ...]  # (f1(x), f2(x)) per domain point
    gaps: tuple[int, int]


@dataclass(frozen=True)
class AlignmentSearch:
    q: int
    max_points: int
    configurations: int  # (pairs, domain size, (f1, f2) class) triples examined
    hypothesis_instances: int  # (f3, f4) completions satisfying both hypotheses
    counterexamples: tuple[AlignmentCounterexample, ...]


def _compositions(total: int, parts: int):
    for cut in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cut + (total,)
        yield tuple(bounds[k + 1] - bounds[k] for k in range(parts))


def alignment_exhaustive(q: int, max_points: int = 6, normalized: bool = True) -> AlignmentSearch:
    """Search every two-valued (f1, f2, f3, f4) on domains of 4..max_points
    points with (f1, f2) surjective, counting instances where f1 + f2 - 2 f3 - f4
    is constant and listing those where |a1 - b1| != |a2 - b2|.

    Two exact symmetries shrink the search: translating f_i by -a_i changes the
    constant but nothing else (``normalized=True`` fixes a_i = 0), and relabeling
    domain points permutes (f3, f4) bijectively, so (f1, f2) only matters
    through how many points take each of its four value combinations.
    Domains smaller than 4 points cannot make (f1, f2) surjective."""
    mod = 2 * q
    if normalized:
        pair_choices = [(0, b) for b in range(1, mod, 2)]
    else:
        pair_choices = [(a, b) for a in range(mod) for b in range(a + 1, mod) if (a - b) % 2]
    configurations = 0
    instances = 0
    found = []
    for pairs in itertools.product(pair_choices, repeat=4):
        combos = list(itertools.product(pairs[0], pairs[1]))
        gaps = (centered(pairs[0][1] - pairs[0][0], q), centered(pairs[1][1] - pairs[1][0], q))
        opts3 = np.array(pairs[2], dtype=np.int64)
        opts4 = np.array(pairs[3], dtype=np.int64)
        for d in range(4, max_points + 1):
            for counts in _compositions(d, 4):
                f12 = [c for c, k in zip(combos, counts) for _ in range(k)]
                u = np.array([(a + b) % mod for a, b in f12], dtype=np.int64)
                configurations += 1
                hits = kernels.alignment_count(u, opts3, opts4, mod)
                instances += hits
                if hits and gaps[0] != gaps[1]:
                    found.append(AlignmentCounterexample(q, pairs, d, tuple(f12), gaps))
    return AlignmentSearch(q, max_points, configurations, instances, tuple(found))


# ---------------------------------------------------------------------------
# equivalence checks on finite quotients


@dataclass(frozen=True)
class EquivalenceReport:
    encoder: str
    base: GroupSpec  # the finite base actually enumerated
    fiber: GroupSpec
    functions: int
    property_set: tuple[tuple[Element, ...], ...]  # f as fiber values in base order
    tiling_set: tuple[tuple[Element, ...], ...]
    only_property: tuple[tuple[Element, ...], ...]
    only_tiling: tuple[tuple[Element, ...], ...]
    tilings: int
    non_graph_tilings: tuple[tuple[Element, ...], ...]
    tilings_complete: bool
    # tilings by E's tiles that are also graphs, i.e. solutions of the system
    # extended by A (+) ({0} x H) = G x H; recorded as functions in base order
    graph_tilings: tuple[tuple[Element, ...], ...] = ()

    @property
    def coincide(self) -> bool:
        return not self.only_property and not self.only_tiling

    @property
    def graph_tilings_match(self) -> bool:
        return set(self.graph_tilings) == set(self.property_set)

    @property
    def ok(self) -> bool:
        return self.coincide and not self.non_graph_tilings and self.tilings_complete

    @property
    def ok_with_graph_equation(self) -> bool:
        return self.coincide and self.graph_tilings_match and self.tilings_complete


def quotient_tile(tile: Tile, base: GroupSpec, L: int) -> Tile:
    """Reduce the free coordinates of a tile mod L; refuses collisions."""
    target = quotient_group(tile.group, L)
    image = {to_quotient(x, L, base.rank) for x in tile.elements}
    if len(image) != len(tile):
        raise ValueError(f"tile collapses modulo L = {L}")
    return Tile(target, frozenset(image))


def encoder_equivalence_check(
    E: EncodedConstraint,
    L: int | None = None,
    tiling_budget: int | None = 2_000_000,
) -> EquivalenceReport:
    """Compare {f : property(f)} with {f : graph(f) tiles by every tile of E}
    over all functions on the finite base, and enumerate the tilings of the
    finite product by E's tiles looking for non-graphs."""
    if E.base.is_finite:
        if L not in (None, 0):
            raise ValueError("base is already finite; L does not apply")
        base, L = E.base, 0
        tiles = E.tiles
    else:
        if L is None or L < 2:
            raise ValueError("an infinite base needs a quotient modulus L >= 2")
        if L % E.period:
            raise ValueError(f"L = {L} is not a multiple of {E.period}")
        base = quotient_group(E.base, L)
        tiles = tuple(quotient_tile(F, E.base, L) for F in E.tiles)
    fiber = E.fiber
    GH = base.product(fiber)
    base_elems = base.elements()
    fiber_elems = fiber.elements()
    nb, nh = len(base_elems), len(fiber_elems)

    # all functions base -> fiber as rows of fiber indices
    funcs = np.array(list(itertools.product(range(nh), repeat=nb)), dtype=np.int64).reshape(-1, nb)
    tiles_ok = np.ones(funcs.shape[0], dtype=bool)
    bmod = np.array(base.moduli, dtype=np.int64)
    hmod = np.array(fiber.moduli, dtype=np.int64)
    bcoords, hcoords = base.coords(), fiber.coords()
    k = len(base.moduli)
    for F in tiles:
        elems = sorted(F.elements)
        u = np.array([x.torsion[:k] for x in elems], dtype=np.int64).reshape(len(elems), k)
        e = np.array([x.torsion[k:] for x in elems], dtype=np.int64).reshape(len(elems), -1)
        base_shift = base.index_array((bcoords[:, None, :] - u[None, :, :]) % np.maximum(bmod, 1))
        fiber_shift = fiber.index_array((hcoords[:, None, :] + e[None, :, :]) % np.maximum(hmod, 1))
        tiles_ok &= kernels.graph_tiles(funcs, base_shift, fiber_shift, nh)

    prop_ok = np.zeros(funcs.shape[0], dtype=bool)
    for i, row in enumerate(funcs):
        table = {a: fiber_elems[j] for a, j in zip(base_elems, row)}
        prop_ok[i] = bool(E.prop(table, base, L))

    def rows(mask):
        return tuple(tuple(fiber_elems[j] for j in funcs[i]) for i in np.flatnonzero(mask))

    # tilings of the finite product by the whole system
    first = enumerate_tilings(GH, tiles[0], budget=tiling_budget)
    survivors = [
        A for A in first
        if all(verify_tiling(PeriodicSet.finite(GH, A), [F]).ok for F in tiles[1:])
    ]
    non_graph = []
    graphs = []
    for A in survivors:
        try:
            f = graph_detect(A, base, fiber)
        except NotAGraph:
            non_graph.append(tuple(sorted(A)))
        else:
            graphs.append(tuple(f[a] for a in base_elems))

    return EquivalenceReport(
        encoder=E.name,
        base=base,
        fiber=fiber,
        functions=funcs.shape[0],
        property_set=rows(prop_ok),
        tiling_set=rows(tiles_ok),
        only_property=rows(prop_ok & ~tiles_ok),
        only_tiling=rows(tiles_ok & ~prop_ok),
        tilings=len(survivors),
        non_graph_tilings=tuple(non_graph),
        tilings_complete=first.complete,
        graph_tilings=tuple(sorted(graphs)),
    )


def format_equivalence(report: EquivalenceReport) -> str:
    def fmt(row):
        return "[" + " ".join(str(h) for h in row) + "]"

    lines = [
        f"encoder {report.encoder}",
        f"base {report.base}",
        f"fiber {report.fiber}",
        f"functions {report.functions}",
        f"property {len(report.property_set)}",
        f"tiling {len(report.tiling_set)}",
        f"coincide {'yes' if report.coincide else 'no'}",
    ]
    lines += [f"only-property {fmt(r)}" for r in report.only_property]
    lines += [f"only-tiling {fmt(r)}" for r in report.only_tiling]
    lines.append(f"tilings {report.tilings}{'' if report.tilings_complete else ' (incomplete)'}")
    lines.append(f"non-graph-tilings {len(report.non_graph_tilings)}")
    lines += [f"non-graph {fmt(r)}" for r in report.non_graph_tilings]
    lines.append(f"graph-tilings {len(report.graph_tilings)}")
    lines.append(f"graph-tilings-match-property {'yes' if report.graph_tilings_match else 'no'}")
    lines.append(f"result {'ok' if report.ok else 'FAIL'}")
    lines.append(f"result-with-graph-equation {'ok' if report.ok_with_graph_equation else 'FAIL'}")
    return "\n".join(lines) + "\n"
