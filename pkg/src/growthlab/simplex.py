"""Exact rational simplex for  max c·x  s.t.  A x ≤ b, x ≥ 0, with b ≥ 0.

Dense tableau, Bland's rule, so it terminates without cycling.  Only the
small LPs of the intersection-number module go through here.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


@dataclass(frozen=True)
class LPResult:
    value: Fraction
    x: tuple[Fraction, ...]
    y: tuple[Fraction, ...]  # optimal dual, one entry per constraint
    pivots: int


class Unbounded(ArithmeticError):
    pass


def maximize(c: Sequence, A: Sequence[Sequence], b: Sequence) -> LPResult:
    m, n = len(A), len(c)
    if any(Fraction(v) < 0 for v in b):
        raise ValueError("origin must be feasible (b ≥ 0)")
    # rows: [A | I | b]; objective row holds reduced costs -c
    rows = [[Fraction(v) for v in A[i]] + [Fraction(int(i == j)) for j in range(m)] + [Fraction(b[i])]
            for i in range(m)]
    obj = [-Fraction(v) for v in c] + [Fraction(0)] * m + [Fraction(0)]
    basis = [n + i for i in range(m)]
    pivots = 0
    while True:
        enter = next((j for j in range(n + m) if obj[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = rows[i][-1] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise Unbounded("objective is unbounded")
        r = best[1]
        piv = rows[r][enter]
        rows[r] = [v / piv for v in rows[r]]
        for i in range(m):
            if i != r and rows[i][enter] != 0:
                f = rows[i][enter]
                rows[i] = [u - f * w for u, w in zip(rows[i], rows[r])]
        f = obj[enter]
        obj = [u - f * w for u, w in zip(obj, rows[r])]
        basis[r] = enter
        pivots += 1
    x = [Fraction(0)] * (n + m)
    for i, j in enumerate(basis):
        x[j] = rows[i][-1]
    return LPResult(obj[-1], tuple(x[:n]), tuple(obj[n:n + m]), pivots)
