"""Tiling equations, p-adic Sudoku boards and the tools that connect them."""

__version__ = "0.1.0"

from .abelian import Element, GroupSpec, Lattice, parse_element, parse_group
from .padic import PadicParams, classify, f_p, nu
from .sudoku import Board, gen_affine, verify_board
from .tiling import PeriodicSet, Tile, enumerate_tilings, verify_tiling

__all__ = [
    "Board",
    "Element",
    "GroupSpec",
    "Lattice",
    "PadicParams",
    "PeriodicSet",
    "Tile",
    "classify",
    "enumerate_tilings",
    "f_p",
    "gen_affine",
    "nu",
    "parse_element",
    "parse_group",
    "verify_board",
    "verify_tiling",
]
