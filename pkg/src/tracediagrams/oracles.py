"""Plain linear-algebra reference implementations over exact rationals.

Nothing here touches diagrams; these are the independent side of every
diagram-versus-algebra comparison.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import prod
from typing import Sequence

Matrix = Sequence[Sequence]


def _square(a: Matrix) -> int:
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("matrix is not square")
    return n


def det(a: Matrix) -> Fraction:
    """Determinant by cofactor expansion along the first row."""
    n = _square(a)
    if n == 0:
        return Fraction(1)
    if n == 1:
        return Fraction(a[0][0])
    total = Fraction(0)
    for j in range(n):
        if a[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in (list(r) for r in a[1:])]
        total += (-1) ** j * Fraction(a[0][j]) * det(minor)
    return total


def matmul(a: Matrix, b: Matrix) -> list[list[Fraction]]:
    n, m, p = len(a), len(b), len(b[0]) if b else 0
    if any(len(r) != m for r in a):
        raise ValueError("shape mismatch")
    return [[sum((Fraction(a[i][k]) * b[k][j] for k in range(m)), Fraction(0)) for j in range(p)]
            for i in range(n)]


def matvec(a: Matrix, v: Sequence) -> list[Fraction]:
    return [sum((Fraction(x) * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def trace(a: Matrix) -> Fraction:
    return sum((Fraction(a[i][i]) for i in range(_square(a))), Fraction(0))


def word_product(mats: Sequence[Matrix], n: int) -> list[list[Fraction]]:
    out = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for m in mats:
        out = matmul(out, m)
    return out


def mat_add(a: Matrix, b: Matrix) -> list[list[Fraction]]:
    return [[Fraction(x) + y for x, y in zip(r, s)] for r, s in zip(a, b)]


def transpose(a: Matrix) -> list[list]:
    return [list(col) for col in zip(*a)]


def dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((Fraction(x) * y for x, y in zip(u, v)), Fraction(0))


def cross3(u: Sequence, v: Sequence) -> list[Fraction]:
    u = [Fraction(x) for x in u]
    return [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]


@dataclass(frozen=True)
class CharPolyCoefficients:
    """``det(A - t I) = sum_k coeffs[k] * (-t) ** (n - k)``.

    ``coeffs[k]`` is the sum of the principal ``k x k`` minors, so
    ``coeffs[0] = 1``, ``coeffs[1] = tr A`` and ``coeffs[n] = det A``.
    """

    coeffs: tuple[Fraction, ...]
    convention: str = "det(A - t*I) = sum_k c_k * (-t)^(n-k)"

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k]

    def __len__(self):
        return len(self.coeffs)

    def evaluate(self, t) -> Fraction:
        n = len(self.coeffs) - 1
        return sum((c * (-Fraction(t)) ** (n - k) for k, c in enumerate(self.coeffs)), Fraction(0))


def char_poly_coeffs(a: Matrix) -> CharPolyCoefficients:
    n = _square(a)
    if n > 6:
        raise ValueError("principal-minor expansion limited to n <= 6")
    coeffs = []
    for k in range(n + 1):
        total = Fraction(0)
        for rows in itertools.combinations(range(n), k):
            total += det([[a[i][j] for j in rows] for i in rows])
        coeffs.append(total)
    return CharPolyCoefficients(tuple(coeffs))


def _inversions(seq: Sequence[int]) -> int:
    return sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])


def perfect_matchings(items: Sequence[int]):
    """All perfect matchings as lists of ordered pairs (i < j), first element
    of each pair increasing."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for idx, partner in enumerate(rest):
        remaining = rest[:idx] + rest[idx + 1:]
        for tail in perfect_matchings(remaining):
            yield [(first, partner)] + tail


def is_antisymmetric(m: Matrix) -> bool:
    n = _square(m)
    return all(m[i][j] == -m[j][i] for i in range(n) for j in range(n))


def pfaffian(m: Matrix) -> Fraction:
    """Signed sum over perfect matchings of ``{1..n}``."""
    n = _square(m)
    if n % 2:
        raise ValueError("Pfaffian needs even n")
    if not is_antisymmetric(m):
        raise ValueError("matrix is not antisymmetric")
    total = Fraction(0)
    for matching in perfect_matchings(range(n)):
        flat = [x for pair in matching for x in pair]
        sign = -1 if _inversions(flat) % 2 else 1
        total += sign * prod((Fraction(m[i][j]) for i, j in matching), start=Fraction(1))
    return total
