"""Deterministic board pictures: one glyph (ascii) or one pixel (pgm) per cell,
rows in increasing m.

Boards carrying generator metadata (a, b, c) are shaded by the valuation
nu_p(a n + b m + c): valuation 0 shows the value, valuation 1 the value as a
lowercase letter, valuation >= 2 as an uppercase letter, and the zero set
(a n + b m + c = 0) as ``@``.  Other boards show raw values.
"""

from __future__ import annotations

import numpy as np

from .sudoku import Board, valuation_grid

FORMATS = ("ascii", "pgm")

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"

# grey levels by valuation class: 0, 1, >= 2, infinite
_LEVELS = (255, 170, 85, 0)


def _value_glyph(v: int) -> str:
    return _DIGITS[v]


def _letter(v: int, upper: bool) -> str:
    ch = chr(ord("a") + v - 1)
    return ch.upper() if upper else ch


def render_ascii(board: Board) -> str:
    nu = valuation_grid(board)
    rows = []
    for r, row in enumerate(board.values.tolist()):
        if nu is None:
            rows.append("".join(_value_glyph(v) for v in row))
            continue
        out = []
        for v, e in zip(row, nu[r].tolist()):
            if e < 0:
                out.append("@")
            elif e == 0:
                out.append(_value_glyph(v))
            else:
                out.append(_letter(v, e >= 2))
        rows.append("".join(out))
    return "\n".join(rows) + "\n"


def render_pgm(board: Board) -> str:
    nu = valuation_grid(board)
    if nu is None:
        span = max(board.p - 2, 1)
        levels = 255 - (board.values - 1) * 255 // span
    else:
        cls = np.where(nu < 0, 3, np.minimum(nu, 2))
        levels = np.array(_LEVELS)[cls]
    head = f"P2\n{board.N} {board.height}\n255\n"
    body = "\n".join(" ".join(map(str, row)) for row in levels.tolist())
    return head + body + "\n"


def render(board: Board, fmt: str = "ascii") -> str:
    if fmt == "ascii":
        return render_ascii(board)
    if fmt == "pgm":
        return render_pgm(board)
    raise ValueError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")
