"""Square-code distinguisher for high-rate alternant codes.

For a dual alternant code the square of a shortening is smaller than
the ambient space when n is large compared to r and m.  Two bounds are
exposed: :func:`threshold_rhs` evaluates the closed form as it is
usually stated (with q^e), and :func:`corrected_rhs` uses q^(e+1) in the
last term, which matches the measured dimension of the unshortened
square of random alternant duals.  Shortening one position loses m
further dimensions when e >= 1 and 2m when e = 0 (an empirical fit; see
:func:`predicted_shortened_dim`).

A code is flagged as distinguishable when its shortened dual square is
smaller than both n - 1 and the dimension C(d+1, 2) reached by a random
code of the same dimension d.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .code_ops import LinearCode, dual, shorten, square


def exponent_e(q: int, r: int) -> int:
    """max{i >= 0 : r >= q^i + 1}; 0 when r < 2."""
    e = 0
    while r >= q ** (e + 1) + 1:
        e += 1
    return e


def _bound(q: int, m: int, r: int, power: int) -> int:
    e = exponent_e(q, r)
    geo = Fraction(q ** power - 1, q - 1)
    val = Fraction(comb(r * m + 1, 2)) - Fraction(m, 2) * (r - 1) * ((2 * e + 1) * r - 2 * geo)
    if val.denominator != 1:
        raise ValueError(f"bound is not an integer for q={q}, m={m}, r={r}: {val}")
    return int(val)


def threshold_rhs(q: int, m: int, r: int) -> int:
    """C(rm+1, 2) - (m/2)(r-1)((2e+1)r - 2(q^e - 1)/(q - 1)), exact."""
    if q < 2 or m < 1 or r < 1:
        raise ValueError("need q >= 2, m >= 1, r >= 1")
    return _bound(q, m, r, exponent_e(q, r))


def corrected_rhs(q: int, m: int, r: int) -> int:
    """Same shape with q^(e+1): the generic dimension of the unshortened square."""
    if q < 2 or m < 1 or r < 1:
        raise ValueError("need q >= 2, m >= 1, r >= 1")
    return _bound(q, m, r, exponent_e(q, r) + 1)


def predicted_shortened_dim(q: int, m: int, r: int) -> int:
    """Measured square dimension of a one-position shortening of Alt_r^⊥."""
    return corrected_rhs(q, m, r) - (2 * m if exponent_e(q, r) == 0 else m)


def generic_square_dim(n: int, d: int) -> int:
    """min(n, C(d+1, 2)): the square dimension of a random [n, d] code."""
    return min(n, comb(d + 1, 2))


def in_regime(q: int, m: int, n: int, r: int) -> bool:
    """Whether the shortened square is expected to be non-full at length n - 1."""
    if m <= 1:
        return False
    return predicted_shortened_dim(q, m, r) < generic_square_dim(n - 1, r * m - 1)


@dataclass
class DistinguisherReport:
    n: int
    q: int
    m: int
    r: int
    e: int
    predicted_dim: int          # threshold_rhs as stated
    corrected_dim: int          # corrected_rhs (unshortened)
    measured_dim: int           # dim of the square of the shortened dual
    generic_dim: int            # same quantity for a random code
    distinguishable: bool

    def to_text(self) -> str:
        return " ".join(f"{k}={v}" for k, v in self.__dict__.items())


def measure(C: LinearCode, i: int = 0, r: int | None = None) -> DistinguisherReport:
    """dim square(shorten(dual(C), {i})) against the ambient length n - 1."""
    T = C.tower
    q, m = T.q, T.m
    if r is None:
        r = (C.n - C.dim) // m
    D = shorten(dual(C), [i])
    sq = square(D)
    e = exponent_e(q, r)
    try:
        pred = threshold_rhs(q, m, r)
        corr = corrected_rhs(q, m, r)
    except ValueError:
        pred = corr = -1
    generic = generic_square_dim(C.n - 1, D.dim)
    return DistinguisherReport(C.n, q, m, r, e, pred, corr, sq.dim, generic, sq.dim < generic)


__all__ = ["exponent_e", "threshold_rhs", "corrected_rhs", "predicted_shortened_dim",
           "generic_square_dim", "in_regime", "DistinguisherReport", "measure"]
