"""Slow, independent reference implementations used by the tests.

Nothing here imports the elimination or code routines under test; field
arithmetic is redone with plain polynomial multiplication over F_p.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence


class PolyField:
    """F_p[z]/(h) with elements as integers sum d_j p^j (h monic, prime base only)."""

    def __init__(self, p: int, h: Sequence[int]):
        self.p = p
        self.h = list(h)
        self.deg = len(h) - 1
        self.order = p ** self.deg

    def digits(self, a: int) -> list[int]:
        out = []
        for _ in range(self.deg):
            out.append(a % self.p)
            a //= self.p
        return out

    def number(self, d: Sequence[int]) -> int:
        return sum(int(c) * self.p ** j for j, c in enumerate(d))

    def add(self, a: int, b: int) -> int:
        return self.number([(u + v) % self.p for u, v in zip(self.digits(a), self.digits(b))])

    def neg(self, a: int) -> int:
        return self.number([(-u) % self.p for u in self.digits(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        p, d = self.p, self.deg
        da, db = self.digits(a), self.digits(b)
        prod = [0] * (2 * d)
        for i, u in enumerate(da):
            for j, v in enumerate(db):
                prod[i + j] = (prod[i + j] + u * v) % p
        for k in range(2 * d - 1, d - 1, -1):
            c = prod[k]
            if c:
                for j in range(d + 1):
                    prod[k - d + j] = (prod[k - d + j] - c * self.h[j]) % p
        return self.number(prod[:d])

    def pow(self, a: int, e: int) -> int:
        out = 1
        base = a
        while e:
            if e & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            e >>= 1
        return out

    def inv(self, a: int) -> int:
        return self.pow(a, self.order - 2)


def poly_irreducible_brute(p: int, f: Sequence[int]) -> bool:
    """No monic factor of degree 1..deg/2, by trial division over F_p."""
    f = list(f)
    d = len(f) - 1
    for k in range(1, d // 2 + 1):
        for tail in itertools.product(range(p), repeat=k):
            g = list(tail) + [1]
            r = f[:]
            for s in range(len(r) - 1, k - 1, -1):
                c = r[s]
                if c:
                    for j in range(k + 1):
                        r[s - k + j] = (r[s - k + j] - c * g[j]) % p
            if all(v == 0 for v in r[:k]):
                return False
    return True


def smallest_irreducible_brute(p: int, d: int) -> tuple:
    """Lexicographically smallest monic irreducible, constant term compared first."""
    for tail in itertools.product(range(p), repeat=d):
        f = list(tail) + [1]
        if poly_irreducible_brute(p, f):
            return tuple(f)
    raise AssertionError


# linear algebra over F_p, by hand

def naive_rank(rows: Sequence[Sequence[int]], p: int) -> int:
    M = [list(map(int, r)) for r in rows]
    if not M:
        return 0
    nc = len(M[0])
    rank = 0
    for c in range(nc):
        pr = next((i for i in range(rank, len(M)) if M[i][c] % p), None)
        if pr is None:
            continue
        M[rank], M[pr] = M[pr], M[rank]
        inv = pow(M[rank][c], p - 2, p)
        M[rank] = [(v * inv) % p for v in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][c] % p:
                f = M[i][c]
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[rank])]
        rank += 1
    return rank


def span(rows: Sequence[Sequence[int]], p: int, n: int) -> set:
    """All F_p combinations of the rows, as tuples."""
    out = {tuple([0] * n)}
    for r in rows:
        r = tuple(int(v) % p for v in r)
        new = set()
        for v in out:
            for c in range(p):
                new.add(tuple((a + c * b) % p for a, b in zip(v, r)))
        out = new
    return out


def all_vectors(p: int, n: int) -> Iterable[tuple]:
    return itertools.product(range(p), repeat=n)


def brute_star(C: Sequence[Sequence[int]], D: Sequence[Sequence[int]], p: int, n: int) -> set:
    words_c = span(C, p, n)
    words_d = span(D, p, n)
    prods = {tuple((a * b) % p for a, b in zip(u, v)) for u in words_c for v in words_d}
    return span(list(prods), p, n)


def brute_conductor(C, D, p: int, n: int) -> set:
    words_d = span(D, p, n)
    out = set()
    for u in all_vectors(p, n):
        if all(tuple((a * b) % p for a, b in zip(u, c)) in words_d for c in C):
            out.add(tuple(u))
    return out


def brute_kernel(M, p: int, n: int) -> set:
    return {v for v in all_vectors(p, n)
            if all(sum(a * b for a, b in zip(row, v)) % p == 0 for row in M)}
