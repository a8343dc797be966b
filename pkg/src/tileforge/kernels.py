"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time: numba is used when it imports
cleanly and ``TILEFORGE_DISABLE_NUMBA`` is unset (or ``0``).  Every public
kernel dispatches through :func:`backend`, and :func:`set_backend` lets tests
and the benchmark force either path so the two can be compared.

All kernels work on int64 arrays.  Callers are responsible for keeping
magnitudes below :data:`INT64_SAFE`; the Python-level wrappers in
:mod:`tileforge.padic` fall back to arbitrary-precision ints beyond it.
"""

from __future__ import annotations

import os

import numpy as np

# |x| bound under which a*b + c style products of kernel inputs stay exact.
INT64_SAFE = 2**62

_DISABLED = os.environ.get("TILEFORGE_DISABLE_NUMBA", "0") not in ("", "0")

try:
    if _DISABLED:
        raise ImportError("numba disabled by TILEFORGE_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


_backend = "numba" if HAS_NUMBA else "numpy"


def backend() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Select ``"numba"`` or ``"numpy"``; returns the previous backend."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba is not available")
    previous, _backend = _backend, name
    return previous


def configure_threads() -> None:
    """Apply the ``TILEFORGE_THREADS`` cap to numba's thread pool."""
    cap = os.environ.get("TILEFORGE_THREADS")
    if not cap or not HAS_NUMBA:
        return
    import numba

    numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))


# ---------------------------------------------------------------------------
# small tables shared by both paths


def unit_tables(p: int) -> tuple[np.ndarray, np.ndarray]:
    """Return (fp_table, inverse) where fp_table[d] = f_p(d) for 0 <= d < p^2
    and inverse[u] is the inverse of u mod p (inverse[0] = 0)."""
    d = np.arange(p * p, dtype=np.int64)
    table = np.ones(p * p, dtype=np.int64)
    nz = d % p != 0
    table[nz] = d[nz] % p
    tail = (d % p == 0) & (d != 0)
    table[tail] = (d[tail] // p) % p
    inverse = np.zeros(p, dtype=np.int64)
    for u in range(1, p):
        inverse[u] = pow(u, -1, p)
    return table, inverse


# ---------------------------------------------------------------------------
# f_p over an array


@njit(cache=True)
def _fp_numba(p, ns):
    out = np.empty(ns.shape[0], dtype=np.int64)
    for k in range(ns.shape[0]):
        n = ns[k]
        if n == 0:
            out[k] = 1
            continue
        while n % p == 0:
            n //= p
        out[k] = n % p
    return out


def _fp_numpy(p, ns):
    work = ns.copy()
    out = np.ones(work.shape[0], dtype=np.int64)
    live = work != 0
    # at most log_p(max|n|) rounds
    while True:
        divisible = live & (work % p == 0)
        if not divisible.any():
            break
        work[divisible] //= p
    out[live] = work[live] % p
    return out


def fp_values(p: int, ns: np.ndarray) -> np.ndarray:
    ns = np.ascontiguousarray(ns, dtype=np.int64)
    if _backend == "numba":
        return _fp_numba(np.int64(p), ns)
    return _fp_numpy(p, ns)


# ---------------------------------------------------------------------------
# S^r_p line classification
#
# kind codes: 0 = not a member, 1 = constant (value in h), 2 = affine (t, h)


@njit(cache=True)
def _classify_numba(lines, p, exempt_mod, table, inverse):
    nl, width = lines.shape
    pp = p * p
    kind = np.zeros(nl, dtype=np.int64)
    tt = np.full(nl, -1, dtype=np.int64)
    hh = np.zeros(nl, dtype=np.int64)
    for l in range(nl):
        first = lines[l, 0]
        const = True
        for n in range(1, width):
            if lines[l, n] != first:
                const = False
                break
        if const:
            kind[l] = 1
            hh[l] = first
            continue
        for t in range(pp):
            h = -1
            ok = True
            for k in range(width):
                d = (k + 1 - t) % pp
                if d % exempt_mod == 0:
                    continue
                base = table[d]
                if h < 0:
                    h = (lines[l, k] * inverse[base]) % p
                elif (h * base) % p != lines[l, k]:
                    ok = False
                    break
            if ok:
                kind[l] = 2
                tt[l] = t
                hh[l] = h if h > 0 else 1
                break
    return kind, tt, hh


def _classify_numpy(lines, p, exempt_mod, table, inverse):
    nl, width = lines.shape
    pp = p * p
    n = np.arange(1, width + 1, dtype=np.int64)
    t = np.arange(pp, dtype=np.int64)
    d = (n[None, :] - t[:, None]) % pp  # (pp, width)
    active = d % exempt_mod != 0
    inv_base = inverse[table[d]]  # (pp, width)
    first = np.argmax(active, axis=1)  # first non-exempt column per t

    kind = np.zeros(nl, dtype=np.int64)
    tt = np.full(nl, -1, dtype=np.int64)
    hh = np.zeros(nl, dtype=np.int64)
    const = (lines == lines[:, :1]).all(axis=1)
    kind[const] = 1
    hh[const] = lines[const, 0]

    rest = np.flatnonzero(~const)
    chunk = max(1, 4_000_000 // max(1, pp * width))
    for s in range(0, rest.size, chunk):
        idx = rest[s : s + chunk]
        g = lines[idx]  # (c, width)
        ratio = (g[:, None, :] * inv_base[None, :, :]) % p  # (c, pp, width)
        h = ratio[:, np.arange(pp), first]  # (c, pp)
        match = (ratio == h[:, :, None]) | ~active[None, :, :]
        good = match.all(axis=2)
        found = good.any(axis=1)
        best = np.argmax(good, axis=1)
        sel = idx[found]
        kind[sel] = 2
        tt[sel] = best[found]
        hh[sel] = h[found, best[found]]
    return kind, tt, hh


def classify_lines(lines: np.ndarray, p: int, r: int = 2):
    """Classify each row of ``lines`` (values 1..p-1 at n = 1..width) against
    S^r_p.  Returns (kind, t, h) arrays; see the kind codes above."""
    lines = np.ascontiguousarray(lines, dtype=np.int64)
    if lines.ndim != 2:
        raise ValueError("lines must be a 2-d array")
    table, inverse = unit_tables(p)
    exempt_mod = p * p if r == 2 else p
    if lines.shape[0] == 0:
        z = np.zeros(0, dtype=np.int64)
        return z, z.copy(), z.copy()
    if _backend == "numba":
        return _classify_numba(lines, np.int64(p), np.int64(exempt_mod), table, inverse)
    return _classify_numpy(lines, p, exempt_mod, table, inverse)


# ---------------------------------------------------------------------------
# partial lines: does some certificate agree with every visible cell?


@njit(cache=True)
def _extendable_numba(lines, mask, p, exempt_mod, table, inverse):
    nl, width = lines.shape
    pp = p * p
    out = np.zeros(nl, dtype=np.bool_)
    for l in range(nl):
        first = -1
        const = True
        for k in range(width):
            if mask[l, k]:
                if first < 0:
                    first = lines[l, k]
                elif lines[l, k] != first:
                    const = False
                    break
        if const:
            out[l] = True
            continue
        for t in range(pp):
            h = -1
            ok = True
            for k in range(width):
                if not mask[l, k]:
                    continue
                d = (k + 1 - t) % pp
                if d % exempt_mod == 0:
                    continue
                base = table[d]
                if h < 0:
                    h = (lines[l, k] * inverse[base]) % p
                elif (h * base) % p != lines[l, k]:
                    ok = False
                    break
            if ok:
                out[l] = True
                break
    return out


def _extendable_numpy(lines, mask, p, exempt_mod, table, inverse):
    nl, width = lines.shape
    pp = p * p
    n = np.arange(1, width + 1, dtype=np.int64)
    t = np.arange(pp, dtype=np.int64)
    d = (n[None, :] - t[:, None]) % pp
    active = d % exempt_mod != 0
    inv_base = inverse[table[d]]

    big = np.where(mask, lines, -1)
    ref = np.take_along_axis(big, np.argmax(mask, axis=1)[:, None], axis=1)
    out = ((big == ref) | ~mask).all(axis=1)
    rest = np.flatnonzero(~out)
    chunk = max(1, 4_000_000 // max(1, pp * width))
    for s in range(0, rest.size, chunk):
        idx = rest[s : s + chunk]
        g = lines[idx]
        use = mask[idx][:, None, :] & active[None, :, :]  # (c, pp, width)
        ratio = (g[:, None, :] * inv_base[None, :, :]) % p
        pick = np.argmax(use, axis=2)
        h = np.take_along_axis(ratio, pick[:, :, None], axis=2)
        good = ((ratio == h) | ~use).all(axis=2)
        out[idx] = good.any(axis=1)
    return out


def extendable_lines(lines: np.ndarray, mask: np.ndarray, p: int, r: int = 2) -> np.ndarray:
    """For each row, True iff some constant or affine certificate of S^r_p is
    consistent with the cells where ``mask`` is set (other cells are free)."""
    lines = np.ascontiguousarray(lines, dtype=np.int64)
    mask = np.ascontiguousarray(mask, dtype=np.bool_)
    table, inverse = unit_tables(p)
    exempt_mod = p * p if r == 2 else p
    if lines.shape[0] == 0:
        return np.zeros(0, dtype=np.bool_)
    if _backend == "numba":
        return _extendable_numba(lines, mask, np.int64(p), np.int64(exempt_mod), table, inverse)
    return _extendable_numpy(lines, mask, p, exempt_mod, table, inverse)


# ---------------------------------------------------------------------------
# almost-affine board fit: first (A, B, C) != 0 in lex order with
# F(n, m) = A n + B m + C wherever the right side is nonzero mod p


@njit(cache=True)
def _fit_board_numba(values, m_lo, p):
    height, width = values.shape
    for a in range(p):
        for b in range(p):
            for c in range(p):
                if a == 0 and b == 0 and c == 0:
                    continue
                ok = True
                for row in range(height):
                    base = (b * ((m_lo + row) % p) + c) % p
                    for k in range(width):
                        v = (a * (k + 1) + base) % p
                        if v != 0 and v != values[row, k]:
                            ok = False
                            break
                    if not ok:
                        break
                if ok:
                    return a, b, c
    return -1, -1, -1


def _fit_board_numpy(values, m_lo, p):
    height, width = values.shape
    grid = np.arange(p**3, dtype=np.int64)[1:]
    cand = np.stack([grid // (p * p), (grid // p) % p, grid % p], axis=1)
    n = np.tile(np.arange(1, width + 1, dtype=np.int64), height)
    m = np.repeat(np.arange(m_lo, m_lo + height, dtype=np.int64), width)
    f = values.reshape(-1)
    step = 256
    for s in range(0, f.size, step):
        if cand.shape[0] == 0:
            break
        nn, mm, ff = n[s : s + step], m[s : s + step], f[s : s + step]
        v = (cand[:, :1] * nn + cand[:, 1:2] * mm + cand[:, 2:]) % p
        cand = cand[((v == 0) | (v == ff)).all(axis=1)]
    if cand.shape[0] == 0:
        return -1, -1, -1
    a, b, c = cand[0]
    return int(a), int(b), int(c)


def fit_board_values(values: np.ndarray, m_lo: int, p: int) -> tuple[int, int, int]:
    values = np.ascontiguousarray(values, dtype=np.int64)
    if _backend == "numba":
        a, b, c = _fit_board_numba(values, np.int64(m_lo), np.int64(p))
        return int(a), int(b), int(c)
    return _fit_board_numpy(values, m_lo, p)


# ---------------------------------------------------------------------------
# does graph(f) tile base x fiber by a tile? (vectorized over many f)
#
# f_values[i, x]  fiber index of f_i at base index x
# base_shift[x, k] index of x - u_k           (u_k base part of tile element k)
# fiber_shift[h, k] index of h + e_k          (e_k fiber part of tile element k)


@njit(cache=True)
def _graph_tiles_numba(f_values, base_shift, fiber_shift, fiber_size):
    nf, nb = f_values.shape
    nt = base_shift.shape[1]
    out = np.zeros(nf, dtype=np.bool_)
    counts = np.zeros(fiber_size, dtype=np.int64)
    for i in range(nf):
        ok = True
        for x in range(nb):
            counts[:] = 0
            for k in range(nt):
                z = fiber_shift[f_values[i, base_shift[x, k]], k]
                counts[z] += 1
                if counts[z] > 1:
                    ok = False
                    break
            if not ok:
                break
            for z in range(fiber_size):
                if counts[z] != 1:
                    ok = False
                    break
            if not ok:
                break
        out[i] = ok
    return out


def _graph_tiles_numpy(f_values, base_shift, fiber_shift, fiber_size):
    nf, nb = f_values.shape
    nt = base_shift.shape[1]
    src = f_values[:, base_shift]  # (nf, nb, nt)
    z = fiber_shift[src, np.arange(nt)[None, None, :]]  # (nf, nb, nt)
    flat = (np.arange(nf * nb, dtype=np.int64).reshape(nf, nb, 1) * fiber_size + z).ravel()
    counts = np.bincount(flat, minlength=nf * nb * fiber_size).reshape(nf, nb * fiber_size)
    return (counts == 1).all(axis=1)


def graph_tiles(f_values, base_shift, fiber_shift, fiber_size: int) -> np.ndarray:
    f_values = np.ascontiguousarray(f_values, dtype=np.int64)
    base_shift = np.ascontiguousarray(base_shift, dtype=np.int64)
    fiber_shift = np.ascontiguousarray(fiber_shift, dtype=np.int64)
    if _backend == "numba":
        return _graph_tiles_numba(f_values, base_shift, fiber_shift, np.int64(fiber_size))
    return _graph_tiles_numpy(f_values, base_shift, fiber_shift, fiber_size)


# ---------------------------------------------------------------------------
# alignment search: for fixed pairs and a multiset of (f1, f2) values on a
# domain, enumerate every (f3, f4) and report which make
# f1 + f2 - 2 f3 - f4 constant mod 2q.
#
# u[x]       f1(x) + f2(x) mod 2q
# opts3, opts4  the two admissible values of f3, f4
# returns the number of (f3, f4) assignments giving a constant


@njit(cache=True)
def _alignment_count_numba(u, opts3, opts4, modulus):
    d = u.shape[0]
    total = 0
    for code in range(1 << (2 * d)):
        c = -1
        ok = True
        for x in range(d):
            w3 = opts3[(code >> x) & 1]
            w4 = opts4[(code >> (d + x)) & 1]
            v = (u[x] - 2 * w3 - w4) % modulus
            if c < 0:
                c = v
            elif v != c:
                ok = False
                break
        if ok:
            total += 1
    return total


def _alignment_count_numpy(u, opts3, opts4, modulus):
    d = u.shape[0]
    codes = np.arange(1 << (2 * d), dtype=np.int64)
    bits3 = (codes[:, None] >> np.arange(d)) & 1
    bits4 = (codes[:, None] >> (d + np.arange(d))) & 1
    v = (u[None, :] - 2 * opts3[bits3] - opts4[bits4]) % modulus
    return int((v == v[:, :1]).all(axis=1).sum())


def alignment_count(u, opts3, opts4, modulus: int) -> int:
    u = np.ascontiguousarray(u, dtype=np.int64)
    opts3 = np.ascontiguousarray(opts3, dtype=np.int64)
    opts4 = np.ascontiguousarray(opts4, dtype=np.int64)
    if _backend == "numba":
        return int(_alignment_count_numba(u, opts3, opts4, np.int64(modulus)))
    return _alignment_count_numpy(u, opts3, opts4, modulus)
