"""p-adic valuation, the last-nonzero-digit function f_p, and the S^r_p classes.

``f_p(n)`` is the final nonzero digit of n in base p (``n / p^nu(n) mod p``),
with ``f_p(0) = 1``.  Units of Z/p are stored as the integers 1..p-1.

A line ``g: {1..N} -> (Z/p)^x`` with N = p^2 lies in S^2_p when it is constant
or equals ``h * f_p(n - t)`` for every n off the coset ``t + p^2 Z``.  For
r = 1 the exempt coset is ``t + p Z``.  Off the exempt coset, ``f_p(n - t)``
only depends on ``(n - t) mod p^2``, so t is searched in [0, p^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import kernels

INF = math.inf


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


def nu(p: int, n: int) -> Union[int, float]:
    """Number of times p divides n; ``INF`` for n = 0."""
    if n == 0:
        return INF
    n = abs(n)
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def f_p(p: int, n: int) -> int:
    if n == 0:
        return 1
    while n % p == 0:
        n //= p
    return n % p


def f_p_array(p: int, ns) -> np.ndarray:
    """Vectorized f_p.  Integer arrays go through the kernel (f_p only
    divides, so any int64 is safe); inputs too large for int64 arrive as
    object arrays and are evaluated with Python ints."""
    arr = np.asarray(ns)
    if arr.dtype == object:
        flat = [f_p(p, int(n)) for n in arr.ravel()]
        return np.array(flat, dtype=np.int64).reshape(arr.shape)
    flat = kernels.fp_values(p, arr.astype(np.int64).ravel())
    return flat.reshape(arr.shape)


def nu_array(p: int, ns) -> np.ndarray:
    """Valuations as int64 with -1 standing for +infinity (n = 0)."""
    arr = np.asarray(ns, dtype=np.int64)
    out = np.zeros(arr.shape, dtype=np.int64)
    work = np.abs(arr)
    live = work != 0
    out[~live] = -1
    while True:
        hit = live & (work % p == 0)
        if not hit.any():
            return out
        work[hit] //= p
        out[hit] += 1


@dataclass(frozen=True)
class PadicParams:
    p: int
    r: int = 2

    def __post_init__(self):
        if not is_prime(self.p) or self.p < 3:
            raise ValueError(f"p must be a prime >= 3, got {self.p}")
        if self.r not in (1, 2):
            raise ValueError("class order r must be 1 or 2")

    @property
    def N(self) -> int:
        return self.p * self.p

    @property
    def exempt_modulus(self) -> int:
        return self.p**self.r


@dataclass(frozen=True)
class Constant:
    c: int

    def value(self, p: int, n: int) -> int:
        return self.c


@dataclass(frozen=True)
class Affine:
    """g(n) = h f_p(n - t) off the exempt coset t + p^r Z (t stored mod p^2)."""

    t: int
    h: int

    def value(self, p: int, n: int) -> int:
        return (self.h * f_p(p, n - self.t)) % p

    def exempt(self, params: PadicParams, n: int) -> bool:
        return (n - self.t) % params.exempt_modulus == 0

    def exceptional_cells(self, params: PadicParams) -> list[int]:
        return [n for n in range(1, params.N + 1) if self.exempt(params, n)]


Certificate = Union[Constant, Affine]


def certificate_holds(params: PadicParams, cert: Certificate, g: Sequence[int]) -> bool:
    """Re-check a certificate against a full line g(1..N)."""
    p = params.p
    if isinstance(cert, Constant):
        return all(v == cert.c for v in g)
    return all(
        cert.exempt(params, n) or g[n - 1] == cert.value(p, n) for n in range(1, len(g) + 1)
    )


def _as_line(params: PadicParams, g) -> np.ndarray:
    line = np.asarray(g, dtype=np.int64)
    if line.shape != (params.N,):
        raise ValueError(f"line must have N = {params.N} values, got shape {line.shape}")
    if ((line < 1) | (line >= params.p)).any():
        raise ValueError(f"line values must lie in [1, {params.p - 1}]")
    return line


def classify(params: PadicParams, g) -> Certificate | None:
    """Constant, the lexicographically least Affine (t, h), or None."""
    line = _as_line(params, g)
    kind, t, h = kernels.classify_lines(line[None, :], params.p, params.r)
    return _certificate(kind[0], t[0], h[0])


def classify_many(params: PadicParams, lines) -> list[Certificate | None]:
    lines = np.asarray(lines, dtype=np.int64)
    kind, t, h = kernels.classify_lines(lines, params.p, params.r)
    return [_certificate(k, a, b) for k, a, b in zip(kind, t, h)]


def _certificate(kind, t, h) -> Certificate | None:
    if kind == 1:
        return Constant(int(h))
    if kind == 2:
        return Affine(int(t), int(h))
    return None


def line_from_certificate(params: PadicParams, cert: Certificate, fill: int = 1) -> list[int]:
    """A full line realizing ``cert``; exempt cells get ``fill``."""
    if isinstance(cert, Constant):
        return [cert.c] * params.N
    return [
        fill if cert.exempt(params, n) else cert.value(params.p, n) for n in range(1, params.N + 1)
    ]
