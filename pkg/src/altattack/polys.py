"""Sparse multivariate polynomials over a small field.

A polynomial is a dict mapping a monomial (sorted tuple of variable ids,
repeated for powers) to a nonzero field element.  Only what the
structured elimination needs is provided: arithmetic, substitution,
evaluation and conversion to and from Macaulay matrices.
"""

from __future__ import annotations

from typing import Callable, Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np

from .field_tower import Field

Monomial = Tuple[int, ...]
Poly = Dict[Monomial, int]

ONE: Monomial = ()


class PolyRing:
    """F[X_0..X_{nx-1}, Y_0..Y_{ny-1}]; X_a has id a, Y_b has id nx + b."""

    def __init__(self, F: Field, nx: int, ny: int, xname: str = "X"):
        self.F = F
        self.nx = nx
        self.ny = ny
        self.xname = xname

    # construction

    def X(self, a: int) -> int:
        return a

    def Y(self, b: int) -> int:
        return self.nx + b

    def is_x(self, v: int) -> bool:
        return v < self.nx

    def const(self, c: int) -> Poly:
        return {ONE: int(c)} if c else {}

    def var(self, v: int) -> Poly:
        return {(v,): 1}

    def mono(self, *vs: int) -> Monomial:
        return tuple(sorted(vs))

    # arithmetic

    def add(self, f: Poly, g: Poly) -> Poly:
        F = self.F
        out = dict(f)
        for m, c in g.items():
            s = F.s_add(out.get(m, 0), c)
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return out

    def neg(self, f: Poly) -> Poly:
        return {m: self.F.s_sub(0, c) for m, c in f.items()}

    def sub(self, f: Poly, g: Poly) -> Poly:
        return self.add(f, self.neg(g))

    def scale(self, f: Poly, c: int) -> Poly:
        if c == 0:
            return {}
        return {m: self.F.s_mul(v, c) for m, v in f.items()}

    def mul(self, f: Poly, g: Poly) -> Poly:
        F = self.F
        out: Poly = {}
        for m1, c1 in f.items():
            for m2, c2 in g.items():
                m = tuple(sorted(m1 + m2))
                s = F.s_add(out.get(m, 0), F.s_mul(c1, c2))
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return out

    def lin(self, terms: Iterable[Tuple[int, Poly]]) -> Poly:
        """Sum of c_i * f_i."""
        out: Poly = {}
        for c, f in terms:
            if c:
                out = self.add(out, self.scale(f, c))
        return out

    def substitute(self, f: Poly, rules: Mapping[int, Poly]) -> Poly:
        """Replace each variable v in rules by the polynomial rules[v]."""
        out: Poly = {}
        for m, c in f.items():
            term: Poly = {ONE: c}
            rest = []
            for v in m:
                if v in rules:
                    term = self.mul(term, rules[v])
                else:
                    rest.append(v)
            if rest:
                term = {tuple(sorted(k + tuple(rest))): val for k, val in term.items()}
            out = self.add(out, term)
        return out

    def evaluate(self, f: Poly, values: Sequence[int], E: Field) -> int:
        """Value at a point over the field E (values indexed by variable id)."""
        acc = 0
        for m, c in f.items():
            t = c
            for v in m:
                t = E.s_mul(t, int(values[v]))
            acc = E.s_add(acc, t)
        return acc

    def degree(self, f: Poly) -> int:
        return max((len(m) for m in f), default=-1)

    def variables(self, f: Poly) -> set:
        return {v for m in f for v in m}

    # matrices

    def to_matrix(self, polys: Sequence[Poly], monos: Sequence[Monomial]) -> np.ndarray:
        index = {m: i for i, m in enumerate(monos)}
        M = np.zeros((len(polys), len(monos)), dtype=np.int64)
        for r, f in enumerate(polys):
            for m, c in f.items():
                if m not in index:
                    raise KeyError(f"monomial {self.fmt_mono(m)} not in the column index")
                M[r, index[m]] = c
        return M

    def from_rows(self, R: np.ndarray, monos: Sequence[Monomial]) -> list[Poly]:
        out = []
        for row in R:
            nz = np.flatnonzero(row)
            out.append({monos[i]: int(row[i]) for i in nz})
        return out

    def monomials(self, polys: Iterable[Poly]) -> set:
        return {m for f in polys for m in f}

    # display

    def fmt_var(self, v: int) -> str:
        return f"{self.xname}{v}" if v < self.nx else f"Y{v - self.nx}"

    def fmt_mono(self, m: Monomial) -> str:
        return "*".join(self.fmt_var(v) for v in m) or "1"

    def fmt(self, f: Poly) -> str:
        if not f:
            return "0"
        return " + ".join(f"{c}*{self.fmt_mono(m)}" for m, c in sorted(f.items(), key=lambda t: (-len(t[0]), t[0])))


def grevlex_key(ring: PolyRing) -> Callable[[Monomial], tuple]:
    """Sort key putting larger monomials first: degree, then reverse-lex.

    Variables are ordered X before Y and by ascending index inside a block,
    so X_0 > X_1 > ... > Y_0 > Y_1 > ...
    """
    nvars = ring.nx + ring.ny

    def key(m: Monomial):
        exps = [0] * nvars
        for v in m:
            exps[v] += 1
        # larger in grevlex: higher degree, then smaller exponent in the last variable
        return (-len(m), tuple(exps[::-1]))

    return key


__all__ = ["PolyRing", "Poly", "Monomial", "ONE", "grevlex_key"]
