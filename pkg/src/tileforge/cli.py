"""Command-line entry point.

Every report begins with a ``# tileforge ...`` header recording the
subcommand, seed and budget.  Exit codes: 0 clean, 1 report with defects,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__, kernels
from .abelian import format_element, format_group, parse_element, parse_group
from .analysis import ConstantColumn, NotAlmostAffine, aperiodicity_certificate, scale_report
from .encode import (
    encode_boolean_pair,
    encode_linear,
    encode_periodicity,
    encode_shifted_mod,
    encoder_equivalence_check,
    format_equivalence,
)
from .formats import (
    FormatError,
    TilingInstance,
    parse_board,
    parse_instance,
    parse_line,
    parse_partition,
    write_board,
    write_instance,
    write_partition,
)
from .padic import PadicParams, classify, f_p, nu
from .render import FORMATS, render
from .sudoku import EXTEND, FULL_ONLY, column_report, gen_affine, search_boards, verify_board
from .tiling import (
    PartitionNotFound,
    find_intersective_partition,
    stack,
    verify_intersective,
    verify_tiling,
)

OK, DEFECTS, USAGE = 0, 1, 2

ENCODERS = ("periodicity", "shift", "linear", "boolpair")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    output: Path | None
    seed: int
    budget: int | None
    threads: int | None
    verbosity: int

    def header(self, **extra) -> str:
        fields = [f"seed={self.seed}", f"budget={self.budget if self.budget is not None else 'none'}"]
        fields += [f"{k}={v}" for k, v in extra.items()]
        return f"# tileforge {self.command} " + " ".join(fields)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output is not None:
        cfg.output.write_text(text)
    else:
        sys.stdout.write(text)


def _window(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be LO,HI, got {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError("window HI < LO")
    return lo, hi


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def _fixed_cell(text: str) -> tuple[tuple[int, int], int]:
    try:
        cell, v = text.split("=")
        n, m = (int(a) for a in cell.split(","))
        return (n, m), int(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"fixed cell must be N,M=V, got {text!r}") from None


# ---------------------------------------------------------------------------
# tiling


def _tiling_report(cfg: RunConfig, inst: TilingInstance) -> tuple[list[str], bool]:
    rep = verify_tiling(inst.A, inst.tiles)
    lines = [
        f"group {format_group(inst.group)}",
        f"tiles {len(inst.tiles)}",
        f"checked {rep.checked}",
        f"defects {len(rep.defects)}",
    ]
    lines += [f"defect tile={d.tile} point={format_element(d.point)} count={d.count}" for d in rep.defects]
    lines.append(f"result {'ok' if rep.ok else 'FAIL'}")
    return lines, rep.ok


def cmd_verify_tiling(cfg: RunConfig, args) -> int:
    inst = parse_instance(_read(args.instance))
    lines, ok = _tiling_report(cfg, inst)
    _emit(cfg, "\n".join([cfg.header()] + lines) + "\n")
    return OK if ok else DEFECTS


def _find_partition(cfg: RunConfig, group: str, parts: int, exhaustive: bool | None):
    H = parse_group(group)
    return find_intersective_partition(
        H, parts, seed=cfg.seed, budget=cfg.budget if cfg.budget is not None else 10**6, exhaustive=exhaustive
    )


def cmd_find_partition(cfg: RunConfig, args) -> int:
    head = cfg.header(group=format_group(parse_group(args.group)).replace(" ", ""), parts=args.parts)
    try:
        P = _find_partition(cfg, args.group, args.parts, args.exhaustive)
    except PartitionNotFound as e:
        _emit(cfg, f"{head}\n# not found: {e}\n")
        return DEFECTS
    rep = verify_intersective(P)
    text = f"{head}\n# verified {'ok' if rep.ok else 'FAIL'} pair-tests={rep.pair_tests}\n" + write_partition(P)
    _emit(cfg, text)
    return OK if rep.ok else DEFECTS


def cmd_stack(cfg: RunConfig, args) -> int:
    inst = parse_instance(_read(args.instance))
    if args.partition:
        P = parse_partition(_read(args.partition))
    elif args.fiber:
        try:
            P = _find_partition(cfg, args.fiber, len(inst.tiles), None)
        except PartitionNotFound as e:
            raise UsageError(f"no partition of {args.fiber}: {e}") from None
    else:
        raise UsageError("stack needs --partition FILE or --fiber GROUP")
    if len(P) != len(inst.tiles):
        raise UsageError(f"{len(inst.tiles)} tiles but {len(P)} partition parts")
    part_rep = verify_intersective(P)
    big = stack(inst.tiles, P)
    lifted = inst.A.times_zero(P.group)
    stacked = TilingInstance(big.group, lifted, (big,))
    original, ok1 = _tiling_report(cfg, inst)
    lifted_lines, ok2 = _tiling_report(cfg, stacked)
    lines = [cfg.header(), f"# partition intersective {'yes' if part_rep.ok else 'no'}"]
    lines += ["# original: " + ln for ln in original]
    lines += ["# stacked: " + ln for ln in lifted_lines]
    _emit(cfg, "\n".join(lines) + "\n" + write_instance(stacked))
    return OK if ok1 and ok2 else DEFECTS


# ---------------------------------------------------------------------------
# encoders


def _encoder(args):
    kind = args.encoder if args.kind == "check" else args.kind
    if kind == "periodicity":
        G, H = parse_group(args.G), parse_group(args.H)
        return encode_periodicity(G, H, parse_element(G, args.v))
    if kind == "shift":
        return encode_shifted_mod(args.N)
    if kind == "linear":
        return encode_linear(args.K, args.q, args.coeffs)
    if kind == "boolpair":
        return encode_boolean_pair(args.q)
    raise UsageError(f"unknown encoder {kind!r}")  # pragma: no cover - argparse restricts choices


def cmd_encode(cfg: RunConfig, args) -> int:
    if args.kind == "check" and args.encoder is None:
        raise UsageError("encode check needs --encoder")
    E = _encoder(args)
    if args.kind != "check":
        lines = [
            cfg.header(encoder=E.name),
            f"# meaning {E.meaning}",
            f"# base {format_group(E.base)} fiber {format_group(E.fiber)}",
        ]
        lines += ["tile: " + " ".join(format_element(x) for x in F) for F in E.tiles]
        _emit(cfg, "\n".join(lines) + "\n")
        return OK
    report = encoder_equivalence_check(E, args.L, tiling_budget=cfg.budget)
    _emit(cfg, cfg.header(encoder=E.name, L=args.L or 0) + "\n" + format_equivalence(report))
    return OK if report.ok else DEFECTS


# ---------------------------------------------------------------------------
# p-adic


def cmd_padic(cfg: RunConfig, args) -> int:
    if args.action == "eval":
        lines = [cfg.header(p=args.p)]
        ns = list(args.n)
        if args.start is not None or args.stop is not None:
            if args.start is None or args.stop is None:
                raise UsageError("--from and --to go together")
            ns += range(args.start, args.stop + 1)
        for n in ns:
            v = nu(args.p, n)
            lines.append(f"n={n} nu={'inf' if v == float('inf') else v} f={f_p(args.p, n)}")
        _emit(cfg, "\n".join(lines) + "\n")
        return OK
    params = PadicParams(args.p, args.r)
    values = parse_line(_read(args.line)) if args.line else list(args.values or ())
    cert = classify(params, values)
    text = cfg.header(p=args.p, r=args.r) + "\n"
    if cert is None:
        _emit(cfg, text + "class none\n")
        return DEFECTS
    _emit(cfg, text + f"class {type(cert).__name__.lower()} {cert}\n")
    return OK


# ---------------------------------------------------------------------------
# sudoku and analysis


def _board_report_lines(board, rep) -> list[str]:
    lines = [
        f"board p={board.p} window={board.m_lo},{board.m_hi}",
        f"mode {rep.mode}",
        f"full-lines {rep.full_lines} constant={rep.constant_lines} affine={rep.affine_lines}",
        f"partial-lines {rep.partial_lines}",
        f"failures {len(rep.failures)}",
    ]
    for f in rep.failures:
        cells = " ".join(f"({n},{m})={v}" for n, m, v in f.cells)
        lines.append(f"fail {f.kind} j={f.line.j} i={f.line.i} {cells}")
    lines.append(f"result {'ok' if rep.ok else 'FAIL'}")
    return lines


def _column_lines(cols) -> list[str]:
    out = []
    for c in cols:
        if c.constant:
            out.append(f"column {c.n} constant")
            continue
        refs = " ".join(f"{q}@{m}" for q, m in c.refutations.items() if m is not None)
        und = ",".join(map(str, c.undecided)) or "-"
        out.append(f"column {c.n} refuted {len(c.refuted)} undecided {und} witnesses {refs}")
    return out


def cmd_sudoku(cfg: RunConfig, args) -> int:
    action = args.action
    if action == "gen":
        board = gen_affine(PadicParams(args.p), args.window, args.a, args.b, args.c)
        _emit(cfg, write_board(board))
        return OK
    if action == "search":
        params = PadicParams(args.p)
        budget = cfg.budget if cfg.budget is not None else 100_000
        search = search_boards(params, args.window, dict(args.fix or ()), budget)
        boards = []
        for b in search:
            boards.append(b)
            if args.limit is not None and len(boards) >= args.limit:
                break
        lines = [cfg.header(p=args.p, window=f"{args.window[0]},{args.window[1]}")]
        lines.append(f"# boards {len(boards)} nodes {search.nodes} budget-exhausted {'yes' if search.exhausted else 'no'}")
        text = "\n".join(lines) + "\n" + "".join(write_board(b) for b in boards)
        _emit(cfg, text)
        return OK
    board = parse_board(_read(args.board))
    if action == "verify":
        rep = verify_board(board, EXTEND if args.partial == "extend" else FULL_ONLY)
        _emit(cfg, "\n".join([cfg.header()] + _board_report_lines(board, rep)) + "\n")
        return OK if rep.ok else DEFECTS
    if action == "columns":
        cols = column_report(board, args.Q)
        lines = [cfg.header(Q=args.Q)] + _column_lines(cols)
        _emit(cfg, "\n".join(lines) + "\n")
        return OK
    if action == "render":
        _emit(cfg, render(board, args.format))
        return OK
    raise UsageError(f"unknown sudoku action {action!r}")  # pragma: no cover


def cmd_render(cfg: RunConfig, args) -> int:
    _emit(cfg, render(parse_board(_read(args.board)), args.format))
    return OK


def cmd_analyze(cfg: RunConfig, args) -> int:
    board = parse_board(_read(args.board))
    lines = [cfg.header(depth=args.depth, Q=args.Q, normalize="yes" if args.normalize else "no")]
    lines.append(f"board p={board.p} window={board.m_lo},{board.m_hi}")
    try:
        rep = scale_report(board, args.depth, normalize=args.normalize)
    except NotAlmostAffine as e:
        lines.append(f"fit FAIL {e}")
        _emit(cfg, "\n".join(lines) + "\n")
        return DEFECTS
    for e in rep.entries:
        fit = "none" if e.fit is None else f"A={e.fit.A} B={e.fit.B} C={e.fit.C}"
        lines.append(f"scale {e.scale} window={e.window[0]},{e.window[1]} verified={'yes' if e.verification.ok else 'no'} fit {fit}")
    for s, ok in enumerate(rep.matches):
        lines.append(f"match B{s + 1}=B{s} {'yes' if ok else 'no'}")
    if rep.failure_scale is not None:
        lines.append(f"failure-scale {rep.failure_scale}")
    clean = rep.all_match
    try:
        cert = aperiodicity_certificate(board, args.Q, 0)
    except ConstantColumn as e:
        lines.append(f"aperiodicity not-applicable ({e})")
    else:
        lines += _column_lines(cert.columns)
        lines.append(f"aperiodicity {'complete' if cert.complete else 'incomplete'} Q={args.Q}")
        clean = clean and cert.complete
    lines.append(f"result {'ok' if clean else 'FAIL'}")
    _emit(cfg, "\n".join(lines) + "\n")
    return OK if clean else DEFECTS


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--budget", type=int, default=None, help="search budget")
    common.add_argument("--threads", type=int, default=None, help="cap on kernel threads")
    common.add_argument("-o", "--output", "--out", type=Path, default=None, help="write the report here")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="tileforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"tileforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-tiling", parents=[common], help="check A (+) F = G for a tiling instance")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_verify_tiling)

    p = sub.add_parser("find-partition", parents=[common], help="search an intersective partition")
    p.add_argument("--group", required=True)
    p.add_argument("--parts", type=int, default=2)
    p.add_argument("--exhaustive", action="store_true", default=None)
    p.set_defaults(func=cmd_find_partition)

    p = sub.add_parser("stack", parents=[common], help="stack a tile system into one tile")
    p.add_argument("--instance", required=True)
    p.add_argument("--partition")
    p.add_argument("--fiber", help="find a partition of this group instead of reading one")
    p.set_defaults(func=cmd_stack)

    p = sub.add_parser("encode", parents=[common], help="functional equations as tiles")
    p.add_argument("kind", choices=ENCODERS + ("check",))
    p.add_argument("--encoder", choices=ENCODERS, help="encoder to check (with 'check')")
    p.add_argument("--G", default="Z/4")
    p.add_argument("--H", default="Z/2")
    p.add_argument("--v", default="((); (1))")
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--coeffs", type=_ints, default=(1,))
    p.add_argument("--L", type=int, default=None, help="quotient modulus for free factors")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("padic", parents=[common], help="f_p, valuations and line classes")
    p.add_argument("action", choices=("eval", "classify"))
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--n", type=int, nargs="+", default=[])
    p.add_argument("--from", dest="start", type=int)
    p.add_argument("--to", dest="stop", type=int)
    p.add_argument("--line", help="file of N whitespace-separated values")
    p.add_argument("--values", type=_ints)
    p.set_defaults(func=cmd_padic)

    p = sub.add_parser("sudoku", parents=[common], help="Sudoku boards")
    p.add_argument("action", choices=("gen", "verify", "columns", "search", "render"))
    p.add_argument("--p", type=int, default=5)
    p.add_argument("--a", type=int, default=0)
    p.add_argument("--b", type=int, default=1)
    p.add_argument("--c", type=int, default=0)
    p.add_argument("--window", type=_window, default=(0, 24))
    p.add_argument("--board")
    p.add_argument("--partial", choices=("skip", "extend"), default="skip")
    p.add_argument("--Q", type=int, default=25)
    p.add_argument("--fix", type=_fixed_cell, action="append", help="N,M=V (repeatable)")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--format", choices=FORMATS, default="ascii")
    p.set_defaults(func=cmd_sudoku)

    p = sub.add_parser("analyze", parents=[common], help="fits across scales and column periods")
    p.add_argument("--board", required=True)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--Q", type=int, default=25)
    p.add_argument("--normalize", action="store_true")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("render", parents=[common], help="draw a board")
    p.add_argument("--board", required=True)
    p.add_argument("--format", choices=FORMATS, default="ascii")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None:
        os.environ["TILEFORGE_THREADS"] = str(args.threads)
    kernels.configure_threads()
    command = " ".join([args.command] + [getattr(args, k) for k in ("action", "kind") if hasattr(args, k)])
    cfg = RunConfig(command, args.output, args.seed, args.budget, args.threads, args.verbose)
    needs_board = getattr(args, "action", None) in ("verify", "columns", "render")
    if args.command == "sudoku" and needs_board and not args.board:
        parser.error(f"sudoku {args.action} needs --board")
    try:
        return args.func(cfg, args)
    except (UsageError, FormatError, ValueError) as e:
        print(f"tileforge: error: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
