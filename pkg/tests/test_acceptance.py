"""Acceptance criteria 1-11, each at its stated tolerance and time limit.

Every test prints one ``PASS criterion k: ...`` or ``FAIL criterion k: ...``
line (also collected into the terminal summary) and then asserts.
"""

import itertools
import time

import numpy as np

from tileforge.abelian import GroupSpec
from tileforge.encode import (
    alignment_exhaustive,
    encode_boolean_pair,
    encode_linear,
    encode_periodicity,
    encode_shifted_mod,
    encoder_equivalence_check,
)
from tileforge.analysis import fit_board, scale_report, tetris
from tileforge.formats import parse_board, write_board
from tileforge.padic import Affine, Constant, PadicParams, classify_many, f_p, f_p_array
from tileforge.sudoku import (
    FULL_ONLY,
    column_report,
    constant_board,
    from_functions,
    gen_affine,
    search_boards,
    to_functions,
    verify_board,
)
from tileforge.tiling import (
    NotAGraph,
    PeriodicSet,
    Tile,
    enumerate_tilings,
    find_intersective_partition,
    graph_detect,
    stack,
    verify_intersective,
    verify_tiling,
)

from .conftest import ACCEPTANCE_LINES


def report(k, ok, detail, elapsed, limit):
    in_time = elapsed < limit
    verdict = "PASS" if ok and in_time else "FAIL"
    line = f"{verdict} criterion {k}: {detail} ({elapsed:.2f}s, limit {limit:g}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line
    assert in_time, line


def cyclic(*moduli):
    return GroupSpec(0, tuple(moduli))


def digit_oracle(p, ns):
    """Repeated division on int64 arrays: strip factors of p, reduce mod p."""
    m = np.abs(ns)
    m = np.where(m == 0, 1, m)
    while True:
        hit = m % p == 0
        if not hit.any():
            break
        m = np.where(hit, m // p, m)
    d = m % p
    return np.where(ns < 0, (-d) % p, d)


# ---------------------------------------------------------------------------


def test_criterion_1_f_p_oracle():
    t0 = time.perf_counter()
    ns = np.arange(-(10**6), 10**6 + 1, dtype=np.int64)
    bad = []
    for p in (2, 3, 5, 7, 53):
        got = f_p_array(p, ns)
        if not np.array_equal(got, digit_oracle(p, ns)):
            bad.append(f"p={p} oracle")
        units = ns % p != 0
        if not np.array_equal(got[units], ns[units] % p):
            bad.append(f"p={p} unit rule")
        small = ns[np.abs(ns) <= 10**6 // p]
        if not np.array_equal(f_p_array(p, p * small), f_p_array(p, small)):
            bad.append(f"p={p} scaling rule")
        sample = ns[:: 997]
        if [f_p(p, int(n)) for n in sample] != got[:: 997].tolist():
            bad.append(f"p={p} scalar")
    elapsed = time.perf_counter() - t0
    report(1, not bad, "f_p matches repeated division, |n| <= 10^6" + (f"; {bad}" if bad else ""), elapsed, 10)


def test_criterion_2_quasi_periodicity():
    t0 = time.perf_counter()
    p = 5
    ns = np.arange(-(10**4), 10**4 + 1, dtype=np.int64)
    failures = 0
    for j in range(4):
        q = p**j
        keep = ns[ns % q != 0]
        failures += int((f_p_array(p, keep + q) != f_p_array(p, keep)).sum())
    elapsed = time.perf_counter() - t0
    report(2, failures == 0, f"f_5(n + 5^j) = f_5(n) off 5^j Z, j <= 3; {failures} failures", elapsed, 1)


def test_criterion_3_classify_complete():
    t0 = time.perf_counter()
    params = PadicParams(3)
    lines = list(itertools.product((1, 2), repeat=9))

    def holds(cert, line):
        if isinstance(cert, Constant):
            return all(v == cert.c for v in line)
        return all(
            (n - cert.t) % 9 == 0 or v == (cert.h * int(digit_oracle(3, np.array([n - cert.t]))[0])) % 3
            for n, v in enumerate(line, start=1)
        )

    certs = [Constant(1), Constant(2)] + [Affine(t, h) for t in range(9) for h in (1, 2)]
    got = classify_many(params, lines)
    disagreements = 0
    for line, cert in zip(lines, got):
        expected = next((c for c in certs if holds(c, line)), None)
        disagreements += expected != cert
    members = sum(c is not None for c in got)
    elapsed = time.perf_counter() - t0
    report(
        3, disagreements == 0, f"classify on 512 lines, {members} members, {disagreements} disagreements", elapsed, 1
    )


def test_criterion_4_intersective_partition():
    t0 = time.perf_counter()
    H = cyclic(7, 7)
    P = find_intersective_partition(H, 2, seed=0, budget=10**6)
    rep = verify_intersective(P)
    elapsed = time.perf_counter() - t0
    expected = 4 * 49**2
    ok = rep.ok and rep.pair_tests == expected
    report(
        4, ok, f"(Z/7)^2 parts {[len(e) for e in P.parts]}, {rep.pair_tests} pair tests, "
        f"{len(rep.violations)} violations", elapsed, 60,
    )


def test_criterion_5_stacking():
    t0 = time.perf_counter()
    G, H = cyclic(6), cyclic(7, 7)
    F1 = Tile.of(G, [(0,), (1,), (2,)])
    F2 = Tile.of(G, [(0,), (2,), (4,)])
    A = PeriodicSet.finite(G, [(0,), (3,)])
    a = verify_tiling(A, [F1, F2]).ok
    P = find_intersective_partition(H, 2, seed=0)
    big = stack([F1, F2], P)
    b = verify_tiling(A.times_zero(H), [big]).ok
    res = enumerate_tilings(G.product(H), big)
    non_graphs = bases_bad = 0
    for T in res:
        try:
            f = graph_detect(T, G, H, partial=True)
        except NotAGraph:
            non_graphs += 1
            continue
        bases_bad += not verify_tiling(PeriodicSet.finite(G, f), [F1, F2]).ok
    c = res.complete and len(res) > 0 and non_graphs == 0 and bases_bad == 0
    elapsed = time.perf_counter() - t0
    report(
        5, a and b and c,
        f"(a) {a} (b) {b} (c) {len(res)} tilings complete={res.complete} non-graphs={non_graphs} "
        f"bad bases={bases_bad}", elapsed, 600,
    )


def test_criterion_6_encoder_equivalence():
    t0 = time.perf_counter()
    cases = [
        (encode_periodicity(cyclic(4), cyclic(2), (1,)), None),
        (encode_shifted_mod(3), 6),
        (encode_linear(1, 3, (2,)), 4),
        (encode_boolean_pair(3), 2),
    ]
    parts, ok = [], True
    for E, L in cases:
        rep = encoder_equivalence_check(E, L)
        good = rep.coincide and rep.tilings_complete and not rep.non_graph_tilings
        ok &= good
        part = f"{E.name}: sets {'equal' if rep.coincide else 'differ'} ({len(rep.property_set)})"
        part += f", {rep.tilings} tilings, {len(rep.non_graph_tilings)} non-graph"
        if rep.non_graph_tilings:
            first = rep.non_graph_tilings[0]
            try:
                graph_detect(first, rep.base, rep.fiber)
            except NotAGraph as e:
                part += f" (first at fiber {e.fiber}, {len(e.points)} points)"
        parts.append(part)
    elapsed = time.perf_counter() - t0
    report(6, ok, "; ".join(parts), elapsed, 300)


def test_criterion_7_alignment():
    t0 = time.perf_counter()
    found = {}
    instances = {}
    for q in (3, 5):
        search = alignment_exhaustive(q, max_points=6)
        found[q] = search.counterexamples
        instances[q] = search.hypothesis_instances
    elapsed = time.perf_counter() - t0
    total = sum(len(v) for v in found.values())
    detail = f"hypothesis instances {instances}, unequal-gap instances {total}"
    if total:
        c = next(c for v in found.values() for c in v)
        detail += f"; first q={c.q} pairs={c.pairs} domain={c.domain_size} gaps={c.gaps}"
    report(7, total == 0, detail, elapsed, 300)


def test_criterion_8_generators_verify():
    t0 = time.perf_counter()
    params = PadicParams(5)
    failed = []
    for a, b, c in itertools.product(range(5), repeat=3):
        if not verify_board(gen_affine(params, (0, 624), a, b, c), FULL_ONLY).ok:
            failed.append((a, b, c))
    elapsed = time.perf_counter() - t0
    report(8, not failed, f"125 generators on [0, 624], failures {failed}", elapsed, 120)


def test_criterion_9_scale_pipeline():
    t0 = time.perf_counter()
    board = gen_affine(PadicParams(5), (0, 624), 0, 1, 0)
    fit = fit_board(board)
    image = tetris(board)
    image_ok = verify_board(image).ok
    fit1 = fit_board(image)
    rep = scale_report(board, 2)
    elapsed = time.perf_counter() - t0
    ok = tuple(fit) == (0, 1, 0) and image_ok and fit1.B == fit.B == 1 and rep.all_match and len(rep.matches) == 2
    report(
        9, ok, f"fit {tuple(fit)}, tetris verifies {image_ok} refit B1={fit1.B}, "
        f"depth-2 matches {list(rep.matches)}", elapsed, 60,
    )


def test_criterion_10_windowed_aperiodicity():
    t0 = time.perf_counter()
    params = PadicParams(5)
    gaps = []
    for c in range(5):
        board = gen_affine(params, (0, 2 * 5**3 - 1), 0, 1, c)
        for col in column_report(board, 25):
            for q in range(1, 26):
                m = col.refutations.get(q)
                if m is None or board[col.n, m] == board[col.n, m + q]:
                    gaps.append((c, col.n, q))
    elapsed = time.perf_counter() - t0
    report(10, not gaps, f"c in 0..4, 25 columns, q <= 25, unwitnessed {len(gaps)}", elapsed, 60)


def fixture_corpus():
    P3, P5, P7 = PadicParams(3), PadicParams(5), PadicParams(7)
    boards = [gen_affine(P5, (lo, lo + 80), a, b, c) for lo, (a, b, c) in
              zip(range(-40, 40, 8), [(0, 1, 0), (1, 1, 1), (2, 3, 4), (4, 2, 1), (0, 3, 2),
                                       (3, 1, 0), (1, 4, 3), (2, 2, 2), (0, 4, 4), (1, 0, 2)])]
    boards += [gen_affine(P3, (lo, lo + 30), a, b, 1) for lo, a, b in [(0, 0, 1), (-7, 1, 2), (3, 2, 2), (5, 1, 1)]]
    boards += [gen_affine(P7, (0, 120), 1, 2, 3), gen_affine(P7, (-60, 60), 0, 1, 0)]
    boards += [constant_board(P5, (0, 60), 3), constant_board(P3, (-10, 20), 2)]
    boards += list(search_boards(P3, (0, 1), {}, 20_000))[:4]
    return boards


def test_criterion_11_round_trips():
    t0 = time.perf_counter()
    corpus = fixture_corpus()
    bad = []
    for k, board in enumerate(corpus):
        text = write_board(board)
        back = parse_board(text)
        if back != board or write_board(back) != text:
            bad.append((k, "file"))
        exact = from_functions(to_functions(board, board.window, (0, 0)))
        if exact != board:
            bad.append((k, "functions"))
        if board.height >= 2 * board.N + 1:
            sloped = to_functions(board)
            rebuilt = from_functions(sloped)
            if rebuilt != board.rows(*rebuilt.window):
                bad.append((k, "sloped functions"))
    elapsed = time.perf_counter() - t0
    report(11, not bad and len(corpus) >= 20, f"{len(corpus)} boards, failures {bad}", elapsed, 10)
