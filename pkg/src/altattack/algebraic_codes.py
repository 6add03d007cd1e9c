"""GRS, Cauchy, alternant and Goppa codes, key generation and homographies.

Supports are integer arrays over F_{q^m}; the projective point at
infinity is the sentinel :data:`INF` (its column in a Vandermonde-type
matrix is (0, ..., 0, y)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import gf_linalg as la
from .code_ops import LinearCode, dual, subfield_subcode
from .field_tower import Tower, _PolyOps, tower_for

INF = -1
PRNG_ID = "numpy-PCG64"


def vandermonde(F, r: int, x, y) -> np.ndarray:
    """r x n matrix with columns (y, y x, ..., y x^(r-1)); (0, ..., 0, y) at infinity."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape != y.shape:
        raise ValueError("support and multiplier lengths differ")
    if (y == 0).any():
        raise ValueError("multiplier has a zero entry")
    if len(set(x.tolist())) != x.size:
        raise ValueError("support has repeated points")
    finite = x != INF
    xf = np.where(finite, x, 0)
    V = np.zeros((r, x.size), dtype=np.int64)
    cur = y.copy()
    for i in range(r):
        V[i] = np.where(finite, cur, 0)
        cur = F.mul(cur, xf)
    if (~finite).any():
        V[r - 1, ~finite] = y[~finite]
    return V


def make_grs(tower: Tower, k: int, x, y) -> LinearCode:
    """GRS_k(x, y) (a Cauchy code when x contains INF), over F_{q^m}."""
    return LinearCode(tower, vandermonde(tower.Fqm, k, x, y), ext=True)


make_cauchy = make_grs


def dual_multiplier(tower: Tower, x, y) -> np.ndarray:
    """y^⊥ with y^⊥_i = 1 / (π'_x(x_i) y_i), so that GRS_k(x,y)^⊥ = GRS_{n-k}(x, y^⊥)."""
    F = tower.Fqm
    x = np.asarray(x, dtype=np.int64)
    diff = F.sub(x[:, None], x[None, :])
    np.fill_diagonal(diff, 1)
    prod = np.ones(x.size, dtype=np.int64)
    for j in range(x.size):
        prod = F.mul(prod, diff[:, j])
    return F.inv(F.mul(prod, y))


def alternant_parity_rows(tower: Tower, r: int, x, y) -> np.ndarray:
    """The r*m F_q rows obtained by expanding V_r(x, y) over F_q."""
    V = vandermonde(tower.Fqm, r, x, y)
    coeffs = tower.Fqm.to_coeffs(V)
    return np.transpose(coeffs, (0, 2, 1)).reshape(-1, V.shape[1])


def make_alternant(tower: Tower, r: int, x, y) -> LinearCode:
    """Alt_r(x, y): F_q-kernel of V_r(x, y)."""
    H = alternant_parity_rows(tower, r, x, y)
    n = H.shape[1]
    return LinearCode(tower, la.right_kernel(tower.Fq, H, n), ext=False, n=n)


def poly_eval(tower: Tower, coeffs, x) -> np.ndarray:
    """Evaluate a little-endian polynomial over F_{q^m} at each entry of x."""
    F = tower.Fqm
    x = np.asarray(x, dtype=np.int64)
    acc = np.zeros_like(x)
    for c in reversed(list(coeffs)):
        acc = F.add(F.mul(acc, x), c)
    return acc


def make_goppa(tower: Tower, x, gamma) -> LinearCode:
    """Goppa code: Alt_r(x, 1/Γ(x)) with r = deg Γ."""
    vals = poly_eval(tower, gamma, x)
    if (vals == 0).any():
        raise ValueError("Goppa polynomial vanishes on the support")
    r = len(gamma) - 1
    return make_alternant(tower, r, x, tower.Fqm.inv(vals))


@dataclass
class AlternantKey:
    """Secret support/multiplier with the derived public code."""

    tower: Tower
    r: int
    x: np.ndarray
    y: np.ndarray
    G: np.ndarray
    perm: np.ndarray
    seed: Optional[int] = None
    prng: str = PRNG_ID
    gamma: Optional[tuple] = None

    @property
    def q(self) -> int:
        return self.tower.q

    @property
    def m(self) -> int:
        return self.tower.m

    @property
    def n(self) -> int:
        return int(self.x.size)

    @property
    def k(self) -> int:
        return int(self.G.shape[0])

    def public_code(self) -> LinearCode:
        return LinearCode(self.tower, self.G, ext=False, n=self.n)

    def parity_check(self) -> np.ndarray:
        return vandermonde(self.tower.Fqm, self.r, self.x, self.y)


def _finish_key(tower, r, x, y, seed, gamma=None) -> Optional[AlternantKey]:
    n = x.size
    code = make_alternant(tower, r, x, y)
    if code.dim != n - r * tower.m:
        return None
    _, perm = la.systematic_form(tower.Fq, code.basis)
    return AlternantKey(tower, r, x, y, code.basis, perm, seed, PRNG_ID, gamma)


def check_params(q: int, m: int, n: int, r: int) -> None:
    if q < 2 or m < 1 or r < 1:
        raise ValueError("q >= 2, m >= 1 and r >= 1 are required")
    if n > q ** m:
        raise ValueError(f"n = {n} exceeds q^m = {q ** m}")
    if r * m >= n:
        raise ValueError(f"r*m = {r * m} must be below n = {n}")


def keygen(q: int, m: int, n: int, r: int, seed: int, max_tries: int = 100) -> AlternantKey:
    """Random alternant key; resamples until dim = n - rm."""
    check_params(q, m, n, r)
    tower = tower_for(q, m)
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        x = rng.choice(tower.Q, size=n, replace=False).astype(np.int64)
        y = rng.integers(1, tower.Q, size=n).astype(np.int64)
        key = _finish_key(tower, r, x, y, seed)
        if key is not None:
            return key
    raise RuntimeError("could not draw a key with the expected dimension")


def random_goppa_polynomial(tower: Tower, r: int, x, rng) -> tuple:
    """Uniform monic squarefree degree-r polynomial with no root on x."""
    ops = _PolyOps(tower.Fqm)
    while True:
        g = [int(c) for c in rng.integers(0, tower.Q, size=r)] + [1]
        if (poly_eval(tower, g, x) == 0).any():
            continue
        if len(ops.gcd(g, ops.deriv(g))) > 1:
            continue
        return tuple(g)


def goppa_keygen(q: int, m: int, n: int, r: int, seed: int, max_tries: int = 100) -> AlternantKey:
    """Random Goppa key of degree r; y = 1/Γ(x)."""
    check_params(q, m, n, r)
    tower = tower_for(q, m)
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        x = rng.choice(tower.Q, size=n, replace=False).astype(np.int64)
        gamma = random_goppa_polynomial(tower, r, x, rng)
        y = tower.Fqm.inv(poly_eval(tower, gamma, x))
        key = _finish_key(tower, r, x, y, seed, gamma)
        if key is not None:
            return key
    raise RuntimeError("could not draw a Goppa key with the expected dimension")


@dataclass(frozen=True)
class Homography:
    """z -> (a z + b) / (c z + d) together with a multiplier scale λ."""

    a: int
    b: int
    c: int
    d: int
    lam: int = 1

    def det(self, F) -> int:
        return F.s_sub(F.s_mul(self.a, self.d), F.s_mul(self.b, self.c))


def apply_homography(F, h: Homography, x, y, r: int):
    """(f(x), λ θ(x)^(r-1) y) on the projective line."""
    det = h.det(F)
    if det == 0:
        raise ValueError("homography has zero determinant")
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    xp = np.empty_like(x)
    theta = np.empty_like(x)
    for i, z in enumerate(x.tolist()):
        if z == INF:
            xp[i] = F.s_mul(h.a, F.s_inv(h.c)) if h.c else INF
            theta[i] = h.c if h.c else h.a
            continue
        num = F.s_add(F.s_mul(h.a, z), h.b)
        den = F.s_add(F.s_mul(h.c, z), h.d)
        if den:
            xp[i] = F.s_mul(num, F.s_inv(den))
            theta[i] = den
        else:
            xp[i] = INF
            theta[i] = F.s_mul(det, F.s_inv(F.s_sub(0, h.c)))
    yp = F.mul(F.mul(F.pow(theta, r - 1), y), h.lam)
    return xp, yp


__all__ = ["INF", "PRNG_ID", "vandermonde", "make_grs", "make_cauchy", "dual_multiplier",
           "alternant_parity_rows", "make_alternant", "make_goppa", "poly_eval",
           "AlternantKey", "keygen", "goppa_keygen", "random_goppa_polynomial",
           "check_params", "Homography", "apply_homography"]
