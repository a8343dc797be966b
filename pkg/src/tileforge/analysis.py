"""Almost-affine structure of Sudoku boards across p-adic scales.

A verified board is expected to satisfy F(n, m) = A n + B m + C (mod p) at
every cell where the right side is nonzero.  The tetris move
F_1(n, m) = F(n, p m) exposes the next scale; for the explicit solutions the
vertical coefficient B survives every move.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .padic import Affine, Certificate, Constant
from .sudoku import FULL_ONLY, Board, BoardReport, ColumnStatus, column_report, verify_board


class NotAlmostAffine(ValueError):
    """No affine fit exists; ``cells`` is a small set that already admits none."""

    def __init__(self, cells: Sequence[tuple]):
        self.cells = tuple(cells)
        super().__init__(f"no affine fit; conflicting cells {list(self.cells)}")


class ConstantColumn(ValueError):
    def __init__(self, n: int):
        self.n = n
        super().__init__(f"column {n} is constant")


class LineFit(NamedTuple):
    A: int
    B: int

    def exceptional(self, p: int, N: int) -> list[int]:
        return [n for n in range(1, N + 1) if (self.A * n + self.B) % p == 0]


class BoardFit(NamedTuple):
    A: int
    B: int
    C: int

    def predict(self, p: int, n, m):
        return (self.A * n + self.B * m + self.C) % p


# ---------------------------------------------------------------------------
# line fits


def _line_candidates(p: int) -> np.ndarray:
    grid = np.arange(1, p * p, dtype=np.int64)
    return np.stack([grid // p, grid % p], axis=1)


def _line_survivors(cand: np.ndarray, n: np.ndarray, v: np.ndarray, p: int) -> np.ndarray:
    pred = (cand[:, :1] * n[None, :] + cand[:, 1:]) % p
    return ((pred == 0) | (pred == v[None, :])).all(axis=1)


def _shrink(cells: list, infeasible) -> list:
    """Drop cells one at a time while the rest still admits no fit."""
    keep = list(cells)
    k = 0
    while k < len(keep):
        trial = keep[:k] + keep[k + 1 :]
        if infeasible(trial):
            keep = trial
        else:
            k += 1
    return keep


def fit_line(values: Sequence[int | None], p: int, positions: Sequence[int] | None = None) -> LineFit:
    """Least (A, B) != (0, 0) in lex order with g(n) = A n + B wherever
    A n + B != 0 mod p.  ``values[k]`` sits at ``positions[k]`` (default
    n = 1, 2, ...); ``None`` marks a hidden cell."""
    if positions is None:
        positions = range(1, len(values) + 1)
    pairs = [(int(n), int(v)) for n, v in zip(positions, values) if v is not None]
    if len(pairs) < 2 * p:
        raise ValueError(f"need at least {2 * p} visible cells, got {len(pairs)}")
    n = np.array([a for a, _ in pairs], dtype=np.int64)
    v = np.array([b for _, b in pairs], dtype=np.int64)
    cand = _line_candidates(p)
    ok = _line_survivors(cand, n, v, p)
    if ok.any():
        a, b = cand[int(np.argmax(ok))]
        return LineFit(int(a), int(b))

    def infeasible(sub):
        if not sub:
            return False
        sn = np.array([pairs[k][0] for k in sub], dtype=np.int64)
        sv = np.array([pairs[k][1] for k in sub], dtype=np.int64)
        return not _line_survivors(cand, sn, sv, p).any()

    keep = _shrink(list(range(len(pairs))), infeasible)
    raise NotAlmostAffine([pairs[k] for k in keep])


def line_fit_from_certificate(cert: Certificate, p: int) -> LineFit:
    """Constant(c) -> (0, c); Affine(t, h) -> (h, -h t), because
    h f_p(n - t) = h (n - t) mod p whenever p does not divide n - t."""
    if isinstance(cert, Constant):
        return LineFit(0, cert.c % p)
    if isinstance(cert, Affine):
        return LineFit(cert.h % p, (-cert.h * cert.t) % p)
    raise TypeError(f"not a certificate: {cert!r}")


# ---------------------------------------------------------------------------
# board fits


def _board_conflict(board: Board) -> list[tuple[int, int, int]]:
    """A small set of cells admitting no fit, for the failure report."""
    p = board.p
    grid = np.arange(1, p**3, dtype=np.int64)
    cand = np.stack([grid // (p * p), (grid // p) % p, grid % p], axis=1)
    V = board.values
    rows, cols = np.indices(V.shape)
    n = (cols + 1).ravel()
    m = (rows + board.m_lo).ravel()
    v = V.ravel()
    killers = set()
    for a, b, c in cand:
        pred = (a * n + b * m + c) % p
        bad = np.flatnonzero((pred != 0) & (pred != v))
        killers.add(int(bad[0]))
    cells = sorted(killers)

    def infeasible(sub):
        if not sub:
            return False
        idx = np.array(sub)
        pred = (cand[:, :1] * n[idx] + cand[:, 1:2] * m[idx] + cand[:, 2:]) % p
        return not ((pred == 0) | (pred == v[idx])).all(axis=1).any()

    keep = _shrink(cells, infeasible)
    return [(int(n[k]), int(m[k]), int(v[k])) for k in keep]


def fit_board(board: Board) -> BoardFit:
    """Least (A, B, C) != 0 in lex order with F(n, m) = A n + B m + C on
    every cell of the window where the right side is nonzero mod p."""
    a, b, c = kernels.fit_board_values(board.values, board.m_lo, board.p)
    if a < 0:
        raise NotAlmostAffine(_board_conflict(board))
    return BoardFit(a, b, c)


def shear(fit: BoardFit, p: int, N: int) -> np.ndarray:
    """delta(n) = lam n + mu with lam = A/B, mu = C/B reduced to [0, p).
    Then A n + B (m - delta(n)) + C = B m mod p."""
    if fit.B % p == 0:
        raise ValueError("B = 0: columns are constant off the zero set, no vertical shear exists")
    inv = pow(fit.B, -1, p)
    lam, mu = (inv * fit.A) % p, (inv * fit.C) % p
    return lam * np.arange(1, N + 1, dtype=np.int64) + mu


def _sheared_rows(board: Board, delta: np.ndarray, scale: int) -> tuple[int, int]:
    """Rows m with scale * m - delta(n) inside the window for every n."""
    lo = -((-(board.m_lo + int(delta.max()))) // scale)
    hi = (board.m_hi + int(delta.min())) // scale
    return lo, hi


def _resample(board: Board, delta: np.ndarray, scale: int, lo: int, hi: int) -> np.ndarray:
    m = np.arange(lo, hi + 1, dtype=np.int64)[:, None]
    rows = scale * m - delta[None, :] - board.m_lo
    cols = np.broadcast_to(np.arange(board.N), rows.shape)
    return board.values[rows, cols]


def normalize_board(board: Board, fit: BoardFit) -> Board:
    """F'(n, m) = B^-1 F(n, m - delta(n)) with the linear shear delta, so that
    F' fits (0, 1, 0).  The window shrinks by the extreme shifts."""
    p = board.p
    if fit.B % p == 0:
        raise ValueError("cannot normalize: B = 0, so columns are constant off the zero set")
    delta = shear(fit, p, board.N)
    lo, hi = _sheared_rows(board, delta, 1)
    if lo > hi:
        raise ValueError(f"window {board.window} is too short for the shear (max shift {int(delta.max())})")
    vals = (pow(fit.B, -1, p) * _resample(board, delta, 1, lo, hi)) % p
    return Board(board.params, lo, vals)


def tetris(board: Board, delta: np.ndarray | None = None) -> Board:
    """F_1(n, m) = F(n, p m - delta(n)); delta = 0 gives the plain move F(n, p m)."""
    p, N = board.p, board.N
    if board.height < p:
        raise ValueError(f"window height {board.height} < p = {p}: too short for a tetris move")
    if delta is None:
        delta = np.zeros(N, dtype=np.int64)
    delta = np.asarray(delta, dtype=np.int64)
    lo, hi = _sheared_rows(board, delta, p)
    if lo > hi:
        raise ValueError(f"window {board.window} is too short for a tetris move")
    gen = board.generator
    if gen is not None:
        # f_p(a n + b (p m - lam n - mu) + c) for delta = lam n + mu
        lam = int(delta[1] - delta[0]) if N > 1 else 0
        mu = int(delta[0]) - lam
        a, b, c = gen
        gen = (a - b * lam, b * p, c - b * mu)
        if not np.array_equal(delta, lam * np.arange(1, N + 1) + mu):
            gen = None
    return Board(board.params, lo, _resample(board, delta, p, lo, hi), gen)


# ---------------------------------------------------------------------------
# scales


@dataclass(frozen=True)
class ScaleEntry:
    scale: int
    window: tuple[int, int]
    verification: BoardReport
    fit: BoardFit | None  # None when the scale fails to verify


@dataclass(frozen=True)
class ScaleReport:
    entries: tuple[ScaleEntry, ...]
    # matches[s]: B_{s+1} equals B_s (or 1 in normalized mode)
    matches: tuple[bool, ...]
    aligned: bool
    normalized: bool
    failure_scale: int | None = None

    @property
    def all_match(self) -> bool:
        return self.failure_scale is None and all(self.matches)

    @property
    def mismatches(self) -> list[int]:
        return [s for s, ok in enumerate(self.matches) if not ok]


def scale_report(board: Board, depth: int, normalize: bool = False, aligned: bool = True) -> ScaleReport:
    """Fit, move to the next scale, refit; ``depth`` moves in total.

    ``aligned`` shears by delta(n) = (A n + C) / B before each move so that
    the sampled rows are exactly the zero set of the current fit (without it,
    a nonzero C sends F(n, p m) to a constant).  ``normalize`` rescales each
    scale to the fit (0, 1, 0) first and compares the next B with 1."""
    p = board.p
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if board.height < 2 * p**depth:
        raise ValueError(f"window height {board.height} < 2 p^depth = {2 * p**depth}")
    entries: list[ScaleEntry] = []
    matches: list[bool] = []
    current = board
    previous_b = None
    for s in range(depth + 1):
        rep = verify_board(current, FULL_ONLY)
        if not rep.ok:
            entries.append(ScaleEntry(s, current.window, rep, None))
            return ScaleReport(tuple(entries), tuple(matches), aligned, normalize, s)
        fit = fit_board(current)
        entries.append(ScaleEntry(s, current.window, rep, fit))
        if previous_b is not None:
            matches.append(fit.B == previous_b)
        if s == depth:
            break
        if normalize and fit.B % p:
            current = normalize_board(current, fit)
            fit = BoardFit(0, 1, 0)
        delta = shear(fit, p, current.N) if aligned and fit.B % p else None
        try:
            nxt = tetris(current, delta)
        except ValueError:
            break
        if nxt.height < 2:
            break
        previous_b = fit.B
        current = nxt
    return ScaleReport(tuple(entries), tuple(matches), aligned, normalize)


# ---------------------------------------------------------------------------
# aperiodicity


@dataclass(frozen=True)
class AperiodicityCertificate:
    """Window-scale evidence: per column, a witness m with F(n, m) != F(n, m + q)
    for each refuted q <= Q, plus the scale fits.  Not a proof for the
    infinite board."""

    Q: int
    columns: tuple[ColumnStatus, ...]
    scales: ScaleReport

    @property
    def complete(self) -> bool:
        return all(not c.undecided for c in self.columns)

    def undecided(self) -> list[tuple[int, int]]:
        return [(c.n, q) for c in self.columns for q in c.undecided]


def aperiodicity_certificate(board: Board, Q: int, depth: int = 1) -> AperiodicityCertificate:
    cols = column_report(board, Q)
    for c in cols:
        if c.constant:
            raise ConstantColumn(c.n)
    return AperiodicityCertificate(Q, tuple(cols), scale_report(board, depth))
