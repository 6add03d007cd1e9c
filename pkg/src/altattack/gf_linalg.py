"""Dense linear algebra over small finite fields.

Matrices are 2-D integer numpy arrays whose entries use the encoding of
:mod:`altattack.field_tower`.  Every function takes the field first.  A
single Gauss-Jordan kernel with the deterministic pivot rule (first
nonzero entry, columns left to right, rows top-down after swapping) is
used everywhere; F_2 runs on bit-packed 64-bit words, other prime fields
on vectorized modular arithmetic, and extension fields on lookup tables.
"""

from __future__ import annotations

import io
from typing import Iterable, TextIO

import numpy as np

from .field_tower import Field


def _empty(ncols: int) -> np.ndarray:
    return np.zeros((0, ncols), dtype=np.int64)


def _as_matrix(M) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    return M


# elimination kernels

def _pack_f2(M: np.ndarray) -> np.ndarray:
    nr, nc = M.shape
    nw = (nc + 63) // 64
    bits = np.zeros((nr, nw * 64), dtype=np.uint8)
    bits[:, :nc] = M & 1
    packed = np.packbits(bits, axis=1, bitorder="little")
    return packed.view(np.uint64).reshape(nr, nw).copy()


def _unpack_f2(W: np.ndarray, ncols: int) -> np.ndarray:
    nr = W.shape[0]
    if nr == 0:
        return _empty(ncols)
    bits = np.unpackbits(W.view(np.uint8).reshape(nr, -1), axis=1, bitorder="little")
    return bits[:, :ncols].astype(np.int64)


def _rref_f2_packed(W: np.ndarray, ncols: int):
    """In-place Gauss-Jordan on packed rows; returns pivots."""
    nr = W.shape[0]
    pivots = []
    r = 0
    one = np.uint64(1)
    for c in range(ncols):
        if r == nr:
            break
        w = c >> 6
        b = np.uint64(c & 63)
        col = (W[r:, w] >> b) & one
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            W[[r, piv]] = W[[piv, r]]
        mask = ((W[:, w] >> b) & one).astype(bool)
        mask[r] = False
        rows = np.flatnonzero(mask)
        if rows.size:
            W[rows, w:] ^= W[r, w:]
        pivots.append(c)
        r += 1
    return pivots


def _rref_prime(A: np.ndarray, p: int):
    nr, nc = A.shape
    inv = np.zeros(p, dtype=np.int64)
    for a in range(1, p):
        inv[a] = pow(a, p - 2, p)
    pivots = []
    r = 0
    for c in range(nc):
        if r == nr:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        lead = A[r, c]
        if lead != 1:
            A[r, c:] = (A[r, c:] * inv[lead]) % p
        f = A[:, c].copy()
        f[r] = 0
        rows = np.flatnonzero(f)
        if rows.size:
            A[rows, c:] = (A[rows, c:] + (p - f[rows])[:, None] * A[r, c:][None, :]) % p
        pivots.append(c)
        r += 1
    return pivots


def _rref_tables(F: Field, A: np.ndarray):
    nr, nc = A.shape
    pivots = []
    r = 0
    for c in range(nc):
        if r == nr:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        lead = A[r, c]
        if lead != 1:
            A[r, c:] = F.mul_t[F.inv_t[lead], A[r, c:]]
        f = A[:, c].copy()
        f[r] = 0
        rows = np.flatnonzero(f)
        if rows.size:
            prod = F.mul_t[f[rows][:, None], A[r, c:][None, :]]
            A[rows, c:] = F.sub_t[A[rows, c:], prod]
        pivots.append(c)
        r += 1
    return pivots


def pack_rows_f2(supports, ncols: int) -> np.ndarray:
    """Packed F_2 matrix whose row i has ones exactly at the column indices supports[i]."""
    nw = max((ncols + 63) // 64, 1)
    W = np.zeros((len(supports), nw), dtype=np.uint64)
    for i, cols in enumerate(supports):
        if len(cols):
            c = np.asarray(cols, dtype=np.int64)
            np.bitwise_xor.at(W[i], c >> 6, np.left_shift(np.uint64(1), (c & 63).astype(np.uint64)))
    return W


def rref_packed_f2(W: np.ndarray, ncols: int):
    """In-place reduced echelon form of a packed F_2 matrix; returns the pivots."""
    return _rref_f2_packed(W, ncols)


def packed_row_support(W: np.ndarray, i: int, ncols: int) -> np.ndarray:
    bits = np.unpackbits(W[i].view(np.uint8), bitorder="little")[:ncols]
    return np.flatnonzero(bits)


def rref(F: Field, M):
    """Reduced row echelon form.

    Returns (R, pivots, rank) where R has the shape of M, zero rows last.
    """
    M = _as_matrix(M)
    nr, nc = M.shape
    if nr == 0 or nc == 0:
        return np.zeros((nr, nc), dtype=np.int64), [], 0
    if F.order == 2:
        W = _pack_f2(M.astype(np.int64))
        pivots = _rref_f2_packed(W, nc)
        R = _unpack_f2(W, nc)
    elif F.is_prime:
        R = M.astype(np.int64) % F.p
        pivots = _rref_prime(R, F.p)
    else:
        R = M.astype(np.int64).copy()
        pivots = _rref_tables(F, R)
    return R, pivots, len(pivots)


def rank(F: Field, M) -> int:
    return rref(F, M)[2]


def row_basis(F: Field, M) -> np.ndarray:
    """Canonical basis (nonzero rows of the rref) of the row space."""
    M = _as_matrix(M)
    R, _, rk = rref(F, M)
    return R[:rk]


def right_kernel(F: Field, M, ncols: int | None = None) -> np.ndarray:
    """Basis of {v : M v^T = 0} as rows."""
    M = _as_matrix(M)
    if ncols is None:
        ncols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(ncols, dtype=np.int64)
    R, pivots, rk = rref(F, M)
    free = [c for c in range(ncols) if c not in set(pivots)]
    K = np.zeros((len(free), ncols), dtype=np.int64)
    if not free:
        return K
    K[np.arange(len(free)), free] = 1
    if rk:
        K[:, pivots] = F.neg(R[:rk][:, free]).T
    return K


def left_kernel(F: Field, M) -> np.ndarray:
    """Basis of {v : v M = 0}."""
    M = _as_matrix(M)
    return right_kernel(F, M.T, ncols=M.shape[0])


def systematic_form(F: Field, G):
    """Return (Gsys, colperm) with Gsys = (I_k | P) equal to rref(G)[:, colperm]."""
    G = _as_matrix(G)
    R, pivots, rk = rref(F, G)
    if rk < G.shape[0]:
        raise ValueError(f"generator matrix is rank deficient ({rk} < {G.shape[0]})")
    pset = set(pivots)
    colperm = np.array(list(pivots) + [c for c in range(G.shape[1]) if c not in pset],
                       dtype=np.int64)
    return R[:rk][:, colperm], colperm


def solve_affine(F: Field, M, b):
    """One solution x of M x = b, or None when inconsistent."""
    M = _as_matrix(M)
    b = np.asarray(b).reshape(-1, 1)
    aug = np.hstack([M, b])
    R, pivots, rk = rref(F, aug)
    nc = M.shape[1]
    if pivots and pivots[-1] == nc:
        return None
    x = np.zeros(nc, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = R[i, nc]
    return x


# row-space operations

def span_sum(F: Field, A, B) -> np.ndarray:
    A, B = _as_matrix(A), _as_matrix(B)
    if A.shape[1] != B.shape[1]:
        raise ValueError("column count mismatch")
    return row_basis(F, np.vstack([A, B]))


def intersection(F: Field, A, B) -> np.ndarray:
    """Basis of rowsp(A) ∩ rowsp(B) via kernels."""
    A, B = _as_matrix(A), _as_matrix(B)
    if A.shape[1] != B.shape[1]:
        raise ValueError("column count mismatch")
    n = A.shape[1]
    KA = right_kernel(F, A, n) if A.shape[0] else np.eye(n, dtype=np.int64)
    KB = right_kernel(F, B, n) if B.shape[0] else np.eye(n, dtype=np.int64)
    both = np.vstack([KA, KB])
    if both.shape[0] == 0:
        return np.eye(n, dtype=np.int64)
    return row_basis(F, right_kernel(F, both, n))


def contains(F: Field, A, B) -> bool:
    """True iff rowsp(B) ⊆ rowsp(A)."""
    A, B = _as_matrix(A), _as_matrix(B)
    if A.shape[1] != B.shape[1]:
        raise ValueError("column count mismatch")
    if B.shape[0] == 0:
        return True
    ra = rank(F, A) if A.shape[0] else 0
    return rank(F, np.vstack([A, B])) == ra


def same_space(F: Field, A, B) -> bool:
    return contains(F, A, B) and contains(F, B, A)


def mat_mul(F: Field, A, B) -> np.ndarray:
    return F.dot(_as_matrix(A), _as_matrix(B))


# text format

def write_matrix(fh: TextIO, M, q: int, k: int) -> None:
    """Header ``q^k nrows ncols`` then one row per line of integer-coded entries."""
    M = _as_matrix(M)
    fh.write(f"{q}^{k} {M.shape[0]} {M.shape[1]}\n")
    for row in M:
        fh.write(" ".join(str(int(v)) for v in row) + "\n")


def read_matrix(fh: TextIO):
    """Inverse of write_matrix; returns (M, q, k)."""
    header = fh.readline().split()
    q, k = (int(t) for t in header[0].split("^"))
    nr, nc = int(header[1]), int(header[2])
    rows = []
    for _ in range(nr):
        rows.append([int(t) for t in fh.readline().split()])
    M = np.array(rows, dtype=np.int64).reshape(nr, nc)
    return M, q, k


def matrix_to_text(M, q: int, k: int) -> str:
    buf = io.StringIO()
    write_matrix(buf, M, q, k)
    return buf.getvalue()


def matrix_from_text(text: str):
    return read_matrix(io.StringIO(text))


__all__ = ["pack_rows_f2", "rref_packed_f2", "packed_row_support", "rref", "rank", "row_basis", "right_kernel", "left_kernel",
           "systematic_form", "solve_affine", "span_sum", "intersection",
           "contains", "same_space", "mat_mul", "write_matrix", "read_matrix",
           "matrix_to_text", "matrix_from_text"]
