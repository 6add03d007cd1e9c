"""Linear codes and the operations the attack is phrased in.

A :class:`LinearCode` lives either over F_q (``ext=False``) or over
F_{q^m} (``ext=True``) of a fixed :class:`~altattack.field_tower.Tower`.
The basis is always kept in reduced row echelon form, so two codes are
equal exactly when their basis arrays are.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from . import gf_linalg as la
from .field_tower import Tower


class LinearCode:
    """Row space of a matrix over F_q or F_{q^m}."""

    def __init__(self, tower: Tower, rows, ext: bool = False, n: int | None = None):
        self.tower = tower
        self.ext = ext
        rows = np.asarray(rows, dtype=np.int64)
        if rows.ndim == 1:
            rows = rows.reshape(1, -1) if rows.size else rows.reshape(0, n or 0)
        if n is not None and rows.shape[1] != n:
            raise ValueError("row length does not match n")
        self.n = rows.shape[1]
        self.basis = la.row_basis(self.field, rows) if rows.shape[0] else rows.reshape(0, self.n)

    @property
    def field(self):
        return self.tower.Fqm if self.ext else self.tower.Fq

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @classmethod
    def full(cls, tower: Tower, n: int, ext: bool = False) -> "LinearCode":
        return cls(tower, np.eye(n, dtype=np.int64), ext)

    @classmethod
    def zero(cls, tower: Tower, n: int, ext: bool = False) -> "LinearCode":
        return cls(tower, np.zeros((0, n), dtype=np.int64), ext, n=n)

    def _check(self, other: "LinearCode"):
        if self.n != other.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")
        if self.ext != other.ext or self.tower is not other.tower:
            raise ValueError("field mismatch")

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinearCode):
            return NotImplemented
        self._check(other)
        return self.basis.shape == other.basis.shape and np.array_equal(self.basis, other.basis)

    def __hash__(self):
        return hash((self.n, self.ext, self.basis.tobytes()))

    def __le__(self, other: "LinearCode") -> bool:
        """Inclusion self ⊆ other."""
        self._check(other)
        return la.contains(self.field, other.basis, self.basis)

    def __add__(self, other: "LinearCode") -> "LinearCode":
        self._check(other)
        return LinearCode(self.tower, np.vstack([self.basis, other.basis]), self.ext, n=self.n)

    def __and__(self, other: "LinearCode") -> "LinearCode":
        return intersection(self, other)

    def contains_word(self, v) -> bool:
        return la.contains(self.field, self.basis, np.asarray(v).reshape(1, -1))

    def __repr__(self):
        tag = f"F_{self.tower.Q}" if self.ext else f"F_{self.tower.q}"
        return f"LinearCode([{self.n}, {self.dim}] over {tag})"


def dual(C: LinearCode) -> LinearCode:
    """Orthogonal complement under the standard bilinear form."""
    if C.dim == 0:
        return LinearCode.full(C.tower, C.n, C.ext)
    return LinearCode(C.tower, la.right_kernel(C.field, C.basis), C.ext, n=C.n)


def _positions(C: LinearCode, I: Iterable[int]) -> list[int]:
    I = sorted(set(int(i) for i in I))
    for i in I:
        if not 0 <= i < C.n:
            raise IndexError(f"position {i} out of range for length {C.n}")
    return I


def puncture(C: LinearCode, I: Iterable[int]) -> LinearCode:
    """Delete the coordinates in I (0-based)."""
    I = _positions(C, I)
    keep = [j for j in range(C.n) if j not in set(I)]
    return LinearCode(C.tower, C.basis[:, keep], C.ext, n=len(keep))


def shorten(C: LinearCode, I: Iterable[int]) -> LinearCode:
    """Codewords vanishing on I, with those coordinates deleted."""
    I = _positions(C, I)
    if not I:
        return C
    keep = [j for j in range(C.n) if j not in set(I)]
    R, pivots, rk = la.rref(C.field, C.basis[:, I + keep])
    rows = [t for t, c in enumerate(pivots) if c >= len(I)]
    return LinearCode(C.tower, R[rows][:, len(I):], C.ext, n=len(keep))


def _products(F, A: np.ndarray, B: np.ndarray, symmetric: bool) -> Iterable[np.ndarray]:
    for i in range(A.shape[0]):
        other = B[i:] if symmetric else B
        if other.shape[0]:
            yield F.mul(A[i][None, :], other)


def _span_of_chunks(F, n: int, chunks: Iterable[np.ndarray], batch: int) -> np.ndarray:
    """Row basis of the union of chunks, stopping once the full space is reached."""
    basis = np.zeros((0, n), dtype=np.int64)
    pending = []
    size = 0
    for ch in chunks:
        pending.append(ch)
        size += ch.shape[0]
        if size >= batch:
            basis = la.row_basis(F, np.vstack([basis] + pending))
            pending, size = [], 0
            if basis.shape[0] == n:
                return basis
    if pending:
        basis = la.row_basis(F, np.vstack([basis] + pending))
    return basis


def star_product(C: LinearCode, D: LinearCode) -> LinearCode:
    """Span of all componentwise products c * d."""
    C._check(D)
    F = C.field
    batch = max(2 * C.n, 64)
    sym = C is D or C == D
    rows = _span_of_chunks(F, C.n, _products(F, C.basis, D.basis, sym), batch)
    return LinearCode(C.tower, rows, C.ext, n=C.n)


def square(C: LinearCode) -> LinearCode:
    """C * C from the k(k+1)/2 unordered basis products."""
    F = C.field
    batch = max(2 * C.n, 64)
    rows = _span_of_chunks(F, C.n, _products(F, C.basis, C.basis, True), batch)
    return LinearCode(C.tower, rows, C.ext, n=C.n)


def conductor(C: LinearCode, D: LinearCode) -> LinearCode:
    """Largest X with X * C ⊆ D, computed as (C * D^⊥)^⊥."""
    C._check(D)
    return dual(star_product(C, dual(D)))


def intersection(A: LinearCode, B: LinearCode) -> LinearCode:
    A._check(B)
    return dual(dual(A) + dual(B))


def extend_scalars(C: LinearCode) -> LinearCode:
    """F_{q^m}-span of an F_q code."""
    if C.ext:
        raise ValueError("code is already over the extension field")
    return LinearCode(C.tower, C.basis, True, n=C.n)


def expand_rows(C: LinearCode) -> np.ndarray:
    """Rows of the ext-field basis split into their m F_q-coordinate rows."""
    F = C.tower.Fqm
    coeffs = F.to_coeffs(C.basis)
    return np.transpose(coeffs, (0, 2, 1)).reshape(-1, C.n)


def subfield_subcode(C: LinearCode) -> LinearCode:
    """C ∩ F_q^n, obtained from the F_q-expansion of a parity-check matrix."""
    if not C.ext:
        raise ValueError("subfield subcode needs a code over F_{q^m}")
    H = dual(C)
    if H.dim == 0:
        return LinearCode.full(C.tower, C.n)
    expanded = expand_rows(H)
    return LinearCode(C.tower, la.right_kernel(C.tower.Fq, expanded, C.n), False, n=C.n)


def trace_code(C: LinearCode) -> LinearCode:
    """{Tr(c) : c ∈ C}, spanned by traces of alpha * basis row for an F_q-basis alpha."""
    if not C.ext:
        raise ValueError("trace code needs a code over F_{q^m}")
    T = C.tower
    if C.dim == 0:
        return LinearCode.zero(T, C.n)
    alphas = T.q ** np.arange(T.m)
    prods = T.Fqm.mul(alphas[:, None, None], C.basis[None, :, :])
    rows = T.trace(prods).reshape(-1, C.n)
    return LinearCode(T, rows, False, n=C.n)


def frobenius_code(C: LinearCode, j: int = 1) -> LinearCode:
    """Coordinatewise c -> c^(q^j)."""
    if not C.ext:
        return C
    return LinearCode(C.tower, C.tower.frobenius(C.basis, j), True, n=C.n)


def restrict_to_base(C: LinearCode) -> LinearCode:
    """View an ext-field code whose basis already has F_q entries as an F_q code."""
    if (C.basis >= C.tower.q).any():
        raise ValueError("basis is not defined over F_q")
    return LinearCode(C.tower, C.basis, False, n=C.n)


__all__ = ["LinearCode", "dual", "shorten", "puncture", "star_product", "square",
           "conductor", "intersection", "extend_scalars", "subfield_subcode",
           "trace_code", "frobenius_code", "expand_rows", "restrict_to_base"]
