import subprocess
import sys

import pytest

from tileforge.cli import DEFECTS, OK, USAGE, main
from tileforge.formats import parse_board, parse_instance, parse_partition, write_board
from tileforge.padic import PadicParams
from tileforge.sudoku import gen_affine

INSTANCE = """\
group Z x Z/2
lattice 2
residues: ((0);(0))
tile: ((0);(0)) ((1);(0)) ((0);(1)) ((1);(1))
tile: ((0);(0)) ((3);(0)) ((0);(1)) ((1);(1))
"""

BAD_INSTANCE = """\
group Z
lattice 2
residues: ((0);())
tile: ((0);()) ((2);())
"""


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    (tmp_path / "good.txt").write_text(INSTANCE)
    (tmp_path / "bad.txt").write_text(BAD_INSTANCE)
    (tmp_path / "board.txt").write_text(write_board(gen_affine(PadicParams(5), (0, 624), 0, 1, 0)))
    return tmp_path


def test_verify_tiling_exit_codes(capsys, files):
    code, out, _ = run(capsys, "verify-tiling", "--instance", str(files / "good.txt"))
    assert code == OK and "result ok" in out
    code, out, _ = run(capsys, "verify-tiling", "--instance", str(files / "bad.txt"))
    assert code == DEFECTS and "defect tile=0" in out


def test_headers_record_seed_and_budget(capsys, files):
    _, out, _ = run(capsys, "verify-tiling", "--instance", str(files / "good.txt"), "--seed", "7", "--budget", "99")
    assert out.splitlines()[0] == "# tileforge verify-tiling seed=7 budget=99"
    _, out, _ = run(capsys, "padic", "eval", "--p", "5", "--n", "3")
    assert out.startswith("# tileforge padic eval seed=0 budget=none p=5")


def test_usage_errors(capsys, files):
    assert run(capsys, "verify-tiling", "--instance", str(files / "missing.txt"))[0] == USAGE
    (files / "junk.txt").write_text("group Q\n")
    code, _, err = run(capsys, "verify-tiling", "--instance", str(files / "junk.txt"))
    assert code == USAGE and err.startswith("tileforge: error:")
    assert run(capsys, "encode", "check")[0] == USAGE
    assert run(capsys, "stack", "--instance", str(files / "good.txt"))[0] == USAGE
    with pytest.raises(SystemExit) as e:
        main(["sudoku", "verify"])
    assert e.value.code == USAGE


def test_find_partition_is_deterministic(capsys, files):
    args = ("find-partition", "--group", "Z/7 x Z/7", "--seed", "3")
    code, out1, _ = run(capsys, *args)
    assert code == OK and "# verified ok" in out1
    assert run(capsys, *args)[1] == out1
    P = parse_partition(out1)
    assert len(P) == 2
    assert run(capsys, "find-partition", "--group", "Z/2", "--parts", "2")[0] == DEFECTS


def test_stack_round_trip(capsys, files):
    code, out, _ = run(capsys, "stack", "--instance", str(files / "good.txt"), "--fiber", "Z/7 x Z/7")
    assert code == OK
    assert "# partition intersective yes" in out
    stacked = parse_instance(out)
    assert len(stacked.tiles) == 1 and len(stacked.tiles[0]) == 4 * 49
    (files / "stacked.txt").write_text(out)
    assert run(capsys, "verify-tiling", "--instance", str(files / "stacked.txt"))[0] == OK


def test_stack_with_partition_file(capsys, files):
    _, part, _ = run(capsys, "find-partition", "--group", "Z/7 x Z/7")
    (files / "part.txt").write_text(part)
    code, out, _ = run(capsys, "stack", "--instance", str(files / "good.txt"), "--partition", str(files / "part.txt"))
    assert code == OK and "# stacked: result ok" in out


def test_encode(capsys):
    code, out, _ = run(capsys, "encode", "shift", "--N", "3")
    assert code == OK and out.count("tile:") >= 1
    code, out, _ = run(capsys, "encode", "check", "--encoder", "shift", "--N", "3", "--L", "6")
    assert code == OK and out.startswith("# tileforge encode check")


def test_padic(capsys, tmp_path):
    code, out, _ = run(capsys, "padic", "eval", "--p", "5", "--n", "0", "50", "7")
    assert code == OK
    assert out.splitlines()[1:] == ["n=0 nu=inf f=1", "n=50 nu=2 f=2", "n=7 nu=0 f=2"]
    line = " ".join(["3"] * 25)
    (tmp_path / "line.txt").write_text(line)
    code, out, _ = run(capsys, "padic", "classify", "--p", "5", "--line", str(tmp_path / "line.txt"))
    assert code == OK and "class constant" in out
    code, out, _ = run(capsys, "padic", "classify", "--p", "5", "--values", "1,2" + ",1" * 23)
    assert code == DEFECTS and "class none" in out


def test_sudoku_gen_verify_columns(capsys, tmp_path):
    out_path = tmp_path / "b.txt"
    assert run(capsys, "sudoku", "gen", "--a", "1", "--b", "1", "--c", "1", "--window", "0,60", "-o", str(out_path))[0] == OK
    board = parse_board(out_path.read_text())
    assert board == gen_affine(PadicParams(5), (0, 60), 1, 1, 1)
    code, out, _ = run(capsys, "sudoku", "verify", "--board", str(out_path))
    assert code == OK and "result ok" in out
    code, out, _ = run(capsys, "sudoku", "columns", "--board", str(out_path), "--Q", "5")
    assert code == OK and out.count("column ") == 25


def test_sudoku_verify_detects_corruption(capsys, tmp_path):
    board = gen_affine(PadicParams(5), (0, 60), 0, 1, 0)
    v = board.values.copy()
    v[30, 4] = v[30, 4] % 4 + 1
    (tmp_path / "b.txt").write_text(write_board(board.with_values(v)))
    code, out, _ = run(capsys, "sudoku", "verify", "--board", str(tmp_path / "b.txt"))
    assert code == DEFECTS and "fail " in out


def test_sudoku_search_deterministic(capsys):
    args = ("sudoku", "search", "--p", "3", "--window", "0,1", "--limit", "3", "--budget", "5000")
    code, out, _ = run(capsys, *args)
    assert code == OK and out.count("board v1") == 3
    assert run(capsys, *args)[1] == out


def test_analyze(capsys, files):
    code, out, _ = run(capsys, "analyze", "--board", str(files / "board.txt"), "--depth", "2")
    assert code == OK
    assert "match B1=B0 yes" in out and "match B2=B1 yes" in out
    assert "aperiodicity complete" in out and out.rstrip().endswith("result ok")


def test_analyze_constant_columns(capsys, tmp_path):
    (tmp_path / "b.txt").write_text(write_board(gen_affine(PadicParams(5), (0, 60), 1, 0, 0)))
    code, out, _ = run(capsys, "analyze", "--board", str(tmp_path / "b.txt"))
    assert code == OK and "aperiodicity not-applicable" in out


def test_render_commands(capsys, files):
    code, out, _ = run(capsys, "render", "--board", str(files / "board.txt"), "--format", "pgm")
    assert code == OK and out.startswith("P2\n25 625\n")
    assert run(capsys, "sudoku", "render", "--board", str(files / "board.txt"))[1] == run(
        capsys, "render", "--board", str(files / "board.txt")
    )[1]


def test_module_entry_point(files):
    res = subprocess.run(
        [sys.executable, "-m", "tileforge", "verify-tiling", "--instance", str(files / "bad.txt")],
        capture_output=True,
        text=True,
    )
    assert res.returncode == DEFECTS
    assert res.stdout.startswith("# tileforge verify-tiling")
