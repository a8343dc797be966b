"""S^2_p-Sudoku boards on a finite vertical window.

A board is a filling F(n, m), n = 1..N (N = p^2), m in [m_lo, m_hi], with
values in (Z/p)^x.  A solution needs every non-vertical line
n -> F(n, j n + i) to lie in S^2_p.  On a window only *full* lines (all N cells
visible) can be classified; ``extend`` mode also asks every *partial* line
with at least two visible cells to agree with some certificate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator, Mapping, NamedTuple

import numpy as np

from . import kernels
from .padic import PadicParams, f_p_array

log = logging.getLogger(__name__)

FULL_ONLY = "full"
EXTEND = "extend"


class LineId(NamedTuple):
    j: int  # slope
    i: int  # intercept

    def rows(self, N: int) -> np.ndarray:
        return self.j * np.arange(1, N + 1, dtype=np.int64) + self.i


@dataclass(frozen=True, eq=False)
class Board:
    params: PadicParams
    m_lo: int
    values: np.ndarray
    # (a, b, c) when produced by gen_affine; used only for rendering
    generator: tuple[int, int, int] | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.int64, copy=True)
        if values.ndim != 2 or values.shape[1] != self.params.N or values.shape[0] < 1:
            raise ValueError(f"board values must have shape (height, {self.params.N})")
        if ((values < 1) | (values >= self.params.p)).any():
            raise ValueError(f"value out of range [1, {self.params.p - 1}]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "m_lo", int(self.m_lo))

    @property
    def p(self) -> int:
        return self.params.p

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def m_hi(self) -> int:
        return self.m_lo + self.height - 1

    @property
    def window(self) -> tuple[int, int]:
        return self.m_lo, self.m_hi

    def __getitem__(self, cell: tuple[int, int]) -> int:
        n, m = cell
        if not (1 <= n <= self.N and self.m_lo <= m <= self.m_hi):
            raise IndexError(f"cell {cell} outside the board")
        return int(self.values[m - self.m_lo, n - 1])

    def column(self, n: int) -> np.ndarray:
        return self.values[:, n - 1]

    def rows(self, m_lo: int, m_hi: int) -> "Board":
        if not (self.m_lo <= m_lo <= m_hi <= self.m_hi):
            raise ValueError(f"[{m_lo}, {m_hi}] is not inside {self.window}")
        return Board(self.params, m_lo, self.values[m_lo - self.m_lo : m_hi - self.m_lo + 1], self.generator)

    def with_values(self, values, m_lo: int | None = None) -> "Board":
        return Board(self.params, self.m_lo if m_lo is None else m_lo, values)

    def __eq__(self, other):
        return (
            isinstance(other, Board)
            and self.params == other.params
            and self.m_lo == other.m_lo
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.params, self.m_lo, self.values.tobytes()))

    def __repr__(self):
        return f"Board(p={self.p}, window={self.window})"


def gen_affine(params: PadicParams, window: tuple[int, int], a: int, b: int, c: int) -> Board:
    """F(n, m) = f_p(a n + b m + c)."""
    m_lo, m_hi = window
    if m_hi < m_lo:
        raise ValueError("empty window")
    n = np.arange(1, params.N + 1)
    m = np.arange(m_lo, m_hi + 1)
    bound = abs(a) * params.N + abs(b) * max(abs(m_lo), abs(m_hi)) + abs(c)
    if bound >= kernels.INT64_SAFE:
        arg = np.array([[a * int(x) + b * int(y) + c for x in n] for y in m], dtype=object)
    else:
        arg = a * n[None, :].astype(np.int64) + b * m[:, None].astype(np.int64) + c
    return Board(params, m_lo, f_p_array(params.p, arg), (a, b, c))


def constant_board(params: PadicParams, window: tuple[int, int], c: int) -> Board:
    return Board(params, window[0], np.full((window[1] - window[0] + 1, params.N), c))


# ---------------------------------------------------------------------------
# lines


def _full_line_arrays(board: Board) -> tuple[np.ndarray, np.ndarray]:
    N, lo, hi = board.N, board.m_lo, board.m_hi
    span = board.height - 1
    js, is_ = [], []
    jmax = span // (N - 1) if N > 1 else 0
    for j in range(-jmax, jmax + 1):
        # rows j*1 + i and j*N + i are the extremes
        i_lo = lo - min(j, j * N)
        i_hi = hi - max(j, j * N)
        if i_lo <= i_hi:
            ii = np.arange(i_lo, i_hi + 1, dtype=np.int64)
            js.append(np.full(ii.size, j, dtype=np.int64))
            is_.append(ii)
    if not js:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(js), np.concatenate(is_)


def _partial_line_arrays(board: Board) -> tuple[np.ndarray, np.ndarray]:
    """Non-full lines with at least two visible cells, ordered by (j, i)."""
    N, lo, hi = board.N, board.m_lo, board.m_hi
    n = np.arange(1, N + 1, dtype=np.int64)
    js, is_ = [], []
    for j in range(-(board.height - 1), board.height):
        if j == 0:
            continue
        cand = np.arange(lo - max(j, j * N), hi - min(j, j * N) + 1, dtype=np.int64)
        rows = j * n[None, :] + cand[:, None]
        visible = ((rows >= lo) & (rows <= hi)).sum(axis=1)
        keep = (visible >= 2) & (visible < N)
        js.append(np.full(int(keep.sum()), j, dtype=np.int64))
        is_.append(cand[keep])
    if not js:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(js), np.concatenate(is_)


def visible_lines(board: Board) -> list[tuple[LineId, str]]:
    """Full and partial lines, each list in (j, i) order, merged by (j, i)."""
    fj, fi = _full_line_arrays(board)
    pj, pi = _partial_line_arrays(board)
    out = [(LineId(int(j), int(i)), "full") for j, i in zip(fj, fi)]
    out += [(LineId(int(j), int(i)), "partial") for j, i in zip(pj, pi)]
    out.sort(key=lambda item: item[0])
    return out


def _gather(board: Board, js: np.ndarray, is_: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = np.arange(1, board.N + 1, dtype=np.int64)
    rows = js[:, None] * n[None, :] + is_[:, None] - board.m_lo
    mask = (rows >= 0) & (rows < board.height)
    vals = board.values[np.clip(rows, 0, board.height - 1), n[None, :] - 1]
    return np.where(mask, vals, 0), mask


def line_values(board: Board, line: LineId) -> list[int | None]:
    return [
        board[n, line.j * n + line.i] if board.m_lo <= line.j * n + line.i <= board.m_hi else None
        for n in range(1, board.N + 1)
    ]


class LineFailure(NamedTuple):
    line: LineId
    kind: str  # "full" or "partial"
    cells: tuple  # (n, m, value) for every visible cell


@dataclass(frozen=True)
class BoardReport:
    ok: bool
    mode: str
    full_lines: int
    partial_lines: int
    constant_lines: int
    affine_lines: int
    failures: tuple[LineFailure, ...]


def verify_board(board: Board, mode: str = FULL_ONLY, max_failures: int | None = None) -> BoardReport:
    """Classify every full line; in ``extend`` mode also require each partial
    line to be consistent with some certificate."""
    if mode not in (FULL_ONLY, EXTEND):
        raise ValueError(f"mode must be {FULL_ONLY!r} or {EXTEND!r}")
    p, r = board.p, board.params.r
    failures: list[LineFailure] = []

    fj, fi = _full_line_arrays(board)
    lines, _ = _gather(board, fj, fi)
    kind, _, _ = kernels.classify_lines(lines, p, r)
    for k in np.flatnonzero(kind == 0):
        failures.append(_failure(board, fj[k], fi[k], "full"))
    n_partial = 0
    if mode == EXTEND:
        pj, pi = _partial_line_arrays(board)
        n_partial = pj.size
        vals, mask = _gather(board, pj, pi)
        good = kernels.extendable_lines(vals, mask, p, r)
        for k in np.flatnonzero(~good):
            failures.append(_failure(board, pj[k], pi[k], "partial"))
    failures.sort(key=lambda f: f.line)
    if max_failures is not None:
        failures = failures[:max_failures]
    return BoardReport(
        ok=not failures,
        mode=mode,
        full_lines=int(fj.size),
        partial_lines=int(n_partial),
        constant_lines=int((kind == 1).sum()),
        affine_lines=int((kind == 2).sum()),
        failures=tuple(failures),
    )


def _failure(board: Board, j, i, kind) -> LineFailure:
    line = LineId(int(j), int(i))
    cells = tuple(
        (n, line.j * n + line.i, v) for n, v in enumerate(line_values(board, line), start=1) if v is not None
    )
    return LineFailure(line, kind, cells)


# ---------------------------------------------------------------------------
# board <-> functions f_n(i, j) = F(n, j n + i)


@dataclass(frozen=True, eq=False)
class FunctionFamily:
    params: PadicParams
    i_range: tuple[int, int]
    j_range: tuple[int, int]
    values: np.ndarray  # values[n - 1, i - i_lo, j - j_lo]

    def __call__(self, n: int, i: int, j: int) -> int:
        return int(self.values[n - 1, i - self.i_range[0], j - self.j_range[0]])

    def shift_violations(self) -> list[tuple[int, int, int]]:
        """Cells (n, i, j) where f_n(i, j) != f_n(i - n, j + 1), both in window."""
        (ilo, ihi), (jlo, jhi) = self.i_range, self.j_range
        out = []
        for n in range(1, self.params.N + 1):
            if ihi - ilo + 1 <= n or jhi == jlo:
                continue
            here = self.values[n - 1, n:, : jhi - jlo]
            there = self.values[n - 1, :-n, 1:]
            for a, b in np.argwhere(here != there):
                out.append((n, int(a) + ilo + n, int(b) + jlo))
        return out

    def tuple_at(self, i: int, j: int) -> np.ndarray:
        return self.values[:, i - self.i_range[0], j - self.j_range[0]]

    def tuple_failures(self) -> list[tuple[int, int]]:
        """(i, j) whose tuple (f_1..f_N)(i, j) is not in S^r_p."""
        ni = self.i_range[1] - self.i_range[0] + 1
        nj = self.j_range[1] - self.j_range[0] + 1
        lines = self.values.reshape(self.params.N, ni * nj).T
        kind, _, _ = kernels.classify_lines(lines, self.params.p, self.params.r)
        return [
            (int(k // nj) + self.i_range[0], int(k % nj) + self.j_range[0]) for k in np.flatnonzero(kind == 0)
        ]


def default_ij_window(board: Board, j_range: tuple[int, int] = (0, 1)) -> tuple[tuple[int, int], tuple[int, int]]:
    N = board.N
    jlo, jhi = j_range
    extremes = [j * n for j in (jlo, jhi) for n in (1, N)]
    i_lo = board.m_lo - min(extremes)
    i_hi = board.m_hi - max(extremes)
    if i_lo > i_hi:
        raise ValueError(f"board window {board.window} is too short for slopes {j_range}")
    return (i_lo, i_hi), (jlo, jhi)


def to_functions(
    board: Board,
    i_range: tuple[int, int] | None = None,
    j_range: tuple[int, int] | None = None,
) -> FunctionFamily:
    if i_range is None:
        i_range, j_range = default_ij_window(board, j_range or (0, 1))
    elif j_range is None:
        j_range = (0, 0)
    (ilo, ihi), (jlo, jhi) = i_range, j_range
    if ilo > ihi or jlo > jhi:
        raise ValueError("empty (i, j) window")
    n = np.arange(1, board.N + 1, dtype=np.int64)[:, None, None]
    i = np.arange(ilo, ihi + 1, dtype=np.int64)[None, :, None]
    j = np.arange(jlo, jhi + 1, dtype=np.int64)[None, None, :]
    rows = j * n + i - board.m_lo
    if rows.min() < 0 or rows.max() >= board.height:
        raise ValueError("(i, j) window reaches outside the board window")
    vals = board.values[rows, np.broadcast_to(n - 1, rows.shape)]
    vals = np.ascontiguousarray(vals)
    vals.setflags(write=False)
    return FunctionFamily(board.params, (ilo, ihi), (jlo, jhi), vals)


def from_functions(family: FunctionFamily) -> Board:
    """Rebuild F(n, m) = f_n(i, j) for j n + i = m on the longest run of rows
    that every column reaches.  Disagreeing values raise ValueError."""
    N = family.params.N
    (ilo, ihi), (jlo, jhi) = family.i_range, family.j_range
    i = np.arange(ilo, ihi + 1, dtype=np.int64)[:, None]
    j = np.arange(jlo, jhi + 1, dtype=np.int64)[None, :]
    columns = []
    common = None
    for n in range(1, N + 1):
        m = (j * n + i).ravel()
        v = family.values[n - 1].ravel()
        order = np.argsort(m, kind="stable")
        m, v = m[order], v[order]
        uniq, first = np.unique(m, return_index=True)
        if not np.array_equal(v, np.repeat(v[first], np.diff(np.append(first, m.size)))):
            raise ValueError(f"column {n}: f_n disagrees with itself on some row (property (i) fails)")
        columns.append(dict(zip(uniq.tolist(), v[first].tolist())))
        common = set(uniq.tolist()) if common is None else common & set(uniq.tolist())
    if not common:
        raise ValueError("the columns share no rows")
    rows = sorted(common)
    best = (rows[0], rows[0])
    start = rows[0]
    for a, b in zip(rows, rows[1:] + [None]):
        if b != a + 1:
            if a - start > best[1] - best[0]:
                best = (start, a)
            start = b
    lo, hi = best
    values = np.array([[columns[n][m] for n in range(N)] for m in range(lo, hi + 1)], dtype=np.int64)
    return Board(family.params, lo, values)


# ---------------------------------------------------------------------------
# columns


@dataclass(frozen=True)
class ColumnStatus:
    n: int
    constant: bool
    # q -> least m with F(n, m) != F(n, m + q), or None if undecided in window
    refutations: Mapping[int, int | None]

    @property
    def refuted(self) -> list[int]:
        return [q for q, m in self.refutations.items() if m is not None]

    @property
    def undecided(self) -> list[int]:
        return [q for q, m in self.refutations.items() if m is None]


def column_report(board: Board, Q: int) -> list[ColumnStatus]:
    if Q < 1:
        raise ValueError("Q must be >= 1")
    V = board.values
    out = []
    for n in range(1, board.N + 1):
        col = V[:, n - 1]
        if (col == col[0]).all():
            out.append(ColumnStatus(n, True, {}))
            continue
        ref = {}
        for q in range(1, Q + 1):
            if q >= col.size:
                ref[q] = None
                continue
            diff = np.flatnonzero(col[:-q] != col[q:])
            ref[q] = int(diff[0]) + board.m_lo if diff.size else None
        out.append(ColumnStatus(n, False, ref))
    return out


# ---------------------------------------------------------------------------
# exploratory search


class _Certificates:
    """Every constant / affine certificate as a bit; cons[n][v] is the set of
    certificates consistent with value v at column n."""

    def __init__(self, params: PadicParams):
        p, N = params.p, params.N
        from .padic import f_p

        certs = [("c", c) for c in range(1, p)]
        certs += [("a", t, h) for t in range(N) for h in range(1, p)]
        self.certs = certs
        self.full = (1 << len(certs)) - 1
        self.cons = [[0] * p for _ in range(N + 1)]
        for bit, cert in enumerate(certs):
            for n in range(1, N + 1):
                for v in range(1, p):
                    if cert[0] == "c":
                        ok = v == cert[1]
                    else:
                        _, t, h = cert
                        ok = (n - t) % params.exempt_modulus == 0 or v == (h * f_p(p, n - t)) % p
                    if ok:
                        self.cons[n][v] |= 1 << bit


class BoardSearch:
    """Deterministic backtracking over cells in row-major order (rows by
    increasing m, columns n = 1..N), values tried in increasing order.  A cell
    assignment is kept only if every line through it with two or more visible
    cells still admits a certificate.  Iterating yields verified boards."""

    def __init__(
        self,
        params: PadicParams,
        window: tuple[int, int],
        fixed: Mapping[tuple[int, int], int] | None = None,
        budget: int = 1_000_000,
    ):
        self.params = params
        self.window = window
        self.fixed = dict(fixed or {})
        self.budget = budget
        self.nodes = 0
        self.exhausted = False
        self.emitted = 0
        m_lo, m_hi = window
        for (n, m), v in self.fixed.items():
            if not (1 <= n <= params.N and m_lo <= m <= m_hi):
                raise ValueError(f"fixed cell {(n, m)} is outside the window")
            if not 1 <= v < params.p:
                raise ValueError(f"fixed value {v} out of range")

    def __iter__(self) -> Iterator[Board]:
        params = self.params
        p, N = params.p, params.N
        m_lo, m_hi = self.window
        height = m_hi - m_lo + 1
        certs = _Certificates(params)
        slopes = range(-(height - 1), height)
        masks: dict[tuple[int, int], int] = {}
        grid = np.zeros((height, N), dtype=np.int64)
        cells = [(n, m) for m in range(m_lo, m_hi + 1) for n in range(1, N + 1)]

        def assign(n, m, v):
            changed = []
            for j in slopes:
                key = (j, m - j * n)
                old = masks.get(key, certs.full)
                new = old & certs.cons[n][v]
                if not new:
                    for k, o in changed:
                        masks[k] = o
                    return None
                changed.append((key, old))
                masks[key] = new
            return changed

        def rec(k):
            if k == len(cells):
                board = Board(params, m_lo, grid)
                if verify_board(board, EXTEND).ok:
                    self.emitted += 1
                    yield board
                else:  # pragma: no cover - propagation is exact
                    log.warning("propagation accepted a board that fails verification")
                return
            n, m = cells[k]
            choices = [self.fixed[(n, m)]] if (n, m) in self.fixed else range(1, p)
            for v in choices:
                self.nodes += 1
                if self.nodes > self.budget:
                    self.exhausted = True
                    return
                changed = assign(n, m, v)
                if changed is None:
                    continue
                grid[m - m_lo, n - 1] = v
                yield from rec(k + 1)
                for key, old in changed:
                    masks[key] = old
                if self.exhausted:
                    return

        yield from rec(0)


def search_boards(
    params: PadicParams,
    window: tuple[int, int],
    fixed: Mapping[tuple[int, int], int] | None = None,
    budget: int = 1_000_000,
) -> BoardSearch:
    return BoardSearch(params, window, fixed, budget)


def valuation_grid(board: Board) -> np.ndarray | None:
    """nu_p(a n + b m + c) per cell (-1 for infinity) for generated boards."""
    if board.generator is None:
        return None
    from .padic import nu_array

    a, b, c = board.generator
    n = np.arange(1, board.N + 1, dtype=np.int64)
    m = np.arange(board.m_lo, board.m_hi + 1, dtype=np.int64)
    return nu_array(board.p, a * n[None, :] + b * m[:, None] + c)
