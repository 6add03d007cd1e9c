"""Table-driven arithmetic for the tower F_p ⊂ F_q ⊂ F_{q^m}.

Elements of a field of order p^e are encoded as integers 0 .. p^e - 1.
An element of F_{q^m} with coefficient vector (d_0, ..., d_{m-1}) over
F_q (polynomial basis, little-endian) is the integer sum d_j q^j, and
each d_j is itself an F_q integer built the same way over F_p.  So F_q
sits inside F_{q^m} as the integers below q, and addition is digit-wise
mod p in base p at every level.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

MAX_ORDER = 1 << 12


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@dataclass(frozen=True)
class FieldParams:
    """(p, s, m, g, h): F_q = F_p[t]/g and F_{q^m} = F_q[z]/h."""

    p: int
    s: int
    m: int
    g: tuple
    h: tuple

    @property
    def q(self) -> int:
        return self.p ** self.s

    def to_text(self) -> str:
        g = ",".join(map(str, self.g))
        h = ",".join(map(str, self.h))
        return f"{self.p} {self.s} {self.m} {g} {h}"

    @classmethod
    def from_text(cls, text: str) -> "FieldParams":
        p, s, m, g, h = text.split()
        return cls(int(p), int(s), int(m),
                   tuple(int(c) for c in g.split(",")),
                   tuple(int(c) for c in h.split(",")))


class _PolyOps:
    """Dense polynomial arithmetic over a small field given as scalar callables."""

    def __init__(self, field: "Field"):
        self.F = field

    def trim(self, a):
        a = list(a)
        while a and a[-1] == 0:
            a.pop()
        return a

    def add(self, a, b):
        n = max(len(a), len(b))
        a = list(a) + [0] * (n - len(a))
        b = list(b) + [0] * (n - len(b))
        return self.trim(self.F.s_add(x, y) for x, y in zip(a, b))

    def sub(self, a, b):
        n = max(len(a), len(b))
        a = list(a) + [0] * (n - len(a))
        b = list(b) + [0] * (n - len(b))
        return self.trim(self.F.s_sub(x, y) for x, y in zip(a, b))

    def mul(self, a, b):
        if not a or not b:
            return []
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                if y:
                    out[i + j] = self.F.s_add(out[i + j], self.F.s_mul(x, y))
        return self.trim(out)

    def divmod(self, a, b):
        a = self.trim(a)
        b = self.trim(b)
        if not b:
            raise ZeroDivisionError("polynomial division by zero")
        inv_lead = self.F.s_inv(b[-1])
        quo = [0] * max(len(a) - len(b) + 1, 0)
        while len(a) >= len(b):
            c = self.F.s_mul(a[-1], inv_lead)
            shift = len(a) - len(b)
            quo[shift] = c
            for i, y in enumerate(b):
                a[shift + i] = self.F.s_sub(a[shift + i], self.F.s_mul(c, y))
            a = self.trim(a)
        return self.trim(quo), a

    def mod(self, a, b):
        return self.divmod(a, b)[1]

    def gcd(self, a, b):
        a, b = self.trim(a), self.trim(b)
        while b:
            a, b = b, self.mod(a, b)
        if a:
            inv = self.F.s_inv(a[-1])
            a = [self.F.s_mul(inv, c) for c in a]
        return a

    def powmod(self, a, e, mod):
        result = [1]
        base = self.mod(a, mod)
        while e:
            if e & 1:
                result = self.mod(self.mul(result, base), mod)
            base = self.mod(self.mul(base, base), mod)
            e >>= 1
        return result

    def deriv(self, a):
        return self.trim(self.F.s_mul_int(c, i) for i, c in enumerate(a) if i > 0)

    def evaluate(self, a, x):
        acc = 0
        for c in reversed(a):
            acc = self.F.s_add(self.F.s_mul(acc, x), c)
        return acc

    def is_irreducible(self, f) -> bool:
        """Rabin's test over the field self.F."""
        f = self.trim(f)
        d = len(f) - 1
        if d < 1:
            return False
        if d == 1:
            return True
        q = self.F.order
        z = [0, 1]

        def frob_power(k):
            t = z
            for _ in range(k):
                t = self.powmod(t, q, f)
            return t

        if self.trim(self.sub(frob_power(d), z)):
            return False
        for ell in prime_factors(d):
            t = self.sub(frob_power(d // ell), z)
            if len(self.gcd(f, t)) > 1:
                return False
        return True


class Field:
    """A finite field of order p^e with integer-coded elements and lookup tables.

    ``base`` is the subfield the polynomial basis is taken over (None for a
    prime field); ``deg`` is the degree over that subfield.
    """

    def __init__(self, p: int, base: Optional["Field"], modulus: Sequence[int]):
        self.p = p
        self.base = base
        self.modulus = tuple(int(c) for c in modulus)
        if base is None:
            self.deg = 1
            self.q = p
            self.order = p
            self.abs_deg = 1
        else:
            self.deg = len(self.modulus) - 1
            self.q = base.order
            self.order = base.order ** self.deg
            self.abs_deg = base.abs_deg * self.deg
        if self.order > MAX_ORDER:
            raise ValueError(f"field of order {self.order} exceeds table limit {MAX_ORDER}")
        self.is_prime = base is None
        self.dtype = np.uint8 if self.order <= 256 else np.uint16
        self._build_tables()

    # table construction

    def _poly_mulmod(self, a, b):
        """Product of two encoded elements via the base field (construction only)."""
        B = self.base
        da = self._digits_over_base(a)
        db = self._digits_over_base(b)
        prod = [0] * (2 * self.deg - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    if y:
                        prod[i + j] = B.s_add(prod[i + j], B.s_mul(x, y))
        h = self.modulus
        for k in range(len(prod) - 1, self.deg - 1, -1):
            c = prod[k]
            if c:
                for i in range(self.deg + 1):
                    prod[k - self.deg + i] = B.s_sub(prod[k - self.deg + i], B.s_mul(c, h[i]))
        return sum(c * self.q ** i for i, c in enumerate(prod[: self.deg]))

    def _digits_over_base(self, a):
        out = []
        for _ in range(self.deg):
            out.append(a % self.q)
            a //= self.q
        return out

    def _build_tables(self):
        Q, p = self.order, self.p
        idx = np.arange(Q)
        pd = np.zeros((Q, self.abs_deg), dtype=np.int64)
        t = idx.copy()
        for i in range(self.abs_deg):
            pd[:, i] = t % p
            t //= p
        self.pdigits = pd
        weights = p ** np.arange(self.abs_deg)
        self.neg_t = ((-pd) % p) @ weights
        if p == 2:
            self.add_t = np.bitwise_xor.outer(idx, idx)
        else:
            self.add_t = (((pd[:, None, :] + pd[None, :, :]) % p) @ weights)
        self.add_t = self.add_t.astype(np.int32)
        self.neg_t = self.neg_t.astype(np.int32)
        self.sub_t = self.add_t[:, self.neg_t]

        if self.is_prime:
            mulf = lambda a, b: (a * b) % p
            self._scalar_mul = mulf
        else:
            mulf = self._poly_mulmod
        # find a primitive element and build exp/log
        if Q == 2:
            gen = 1
            exp = [1]
        else:
            exp = None
            for cand in range(2 if Q > 2 else 1, Q):
                seq = [1]
                cur = cand
                while cur != 1:
                    seq.append(cur)
                    cur = mulf(cur, cand)
                    if len(seq) > Q - 1:
                        break
                if len(seq) == Q - 1:
                    gen = cand
                    exp = seq
                    break
            if exp is None:
                raise ValueError("modulus is not irreducible: no primitive element")
        self.generator = gen
        exp = np.array(exp, dtype=np.int64)
        log = np.full(Q, -1, dtype=np.int64)
        log[exp] = np.arange(Q - 1)
        if (log[1:] < 0).any():
            raise ValueError("modulus is not irreducible")
        self.exp_t = np.concatenate([exp, exp]).astype(np.int32)
        self.log_t = log
        la = log[:, None] + log[None, :]
        mul = self.exp_t[np.where(la < 0, 0, la) % (Q - 1)]
        mul[0, :] = 0
        mul[:, 0] = 0
        self.mul_t = mul.astype(np.int32)
        inv = np.zeros(Q, dtype=np.int32)
        inv[1:] = self.exp_t[(-log[1:]) % (Q - 1)]
        self.inv_t = inv
        if self.base is not None:
            frob = np.zeros(Q, dtype=np.int32)
            frob[1:] = self.exp_t[(log[1:] * self.q) % (Q - 1)]
            self.frob_t = frob

    # scalar helpers (python ints)

    def s_add(self, a, b):
        return int(self.add_t[a, b])

    def s_sub(self, a, b):
        return int(self.sub_t[a, b])

    def s_mul(self, a, b):
        return int(self.mul_t[a, b])

    def s_inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return int(self.inv_t[a])

    def s_mul_int(self, a, k):
        """a added to itself k times."""
        k %= self.p
        out = 0
        for _ in range(k):
            out = self.s_add(out, a)
        return out

    def s_pow(self, a, e):
        if a == 0:
            return 1 if e == 0 else 0
        return int(self.exp_t[(self.log_t[a] * e) % (self.order - 1)])

    # vectorized operations

    def add(self, a, b):
        return self.add_t[a, b]

    def sub(self, a, b):
        return self.sub_t[a, b]

    def neg(self, a):
        return self.neg_t[a]

    def mul(self, a, b):
        return self.mul_t[a, b]

    def inv(self, a):
        a = np.asarray(a)
        if (a == 0).any():
            raise ZeroDivisionError("inverse of zero")
        return self.inv_t[a]

    def div(self, a, b):
        return self.mul_t[a, self.inv(b)]

    def pow(self, a, e: int):
        a = np.asarray(a)
        out = self.exp_t[(self.log_t[a] * e) % (self.order - 1)]
        if e == 0:
            return np.ones_like(out)
        return np.where(a == 0, 0, out)

    def sum(self, a, axis=None):
        """Field sum along an axis."""
        a = np.asarray(a)
        if axis is None:
            a = a.reshape(-1)
            axis = 0
        a = np.moveaxis(a, axis, 0)
        if self.p == 2:
            return np.bitwise_xor.reduce(a.astype(np.int64), axis=0)
        if self.is_prime:
            return a.astype(np.int64).sum(axis=0) % self.p
        d = self.pdigits[a].sum(axis=0) % self.p
        return d @ (self.p ** np.arange(self.abs_deg))

    def dot(self, a, b):
        """Matrix product of integer-coded matrices."""
        a = np.asarray(a)
        b = np.asarray(b)
        if self.is_prime:
            return (a.astype(np.int64) @ b.astype(np.int64)) % self.p
        prods = self.mul_t[a[:, :, None], b[None, :, :]]
        return self.sum(prods, axis=1)

    def frobenius(self, x, j: int = 1):
        """x^(q^j) relative to the base field."""
        if self.base is None:
            return np.asarray(x)
        j %= self.deg
        x = np.asarray(x)
        if j == 0:
            return x
        e = pow(self.q, j, self.order - 1)
        return self.pow(x, e)

    def trace(self, x):
        """Sum of the Frobenius conjugates; lands in the base field."""
        x = np.asarray(x)
        acc = np.zeros_like(x, dtype=np.int32)
        t = x
        for _ in range(self.deg):
            acc = self.add_t[acc, t]
            t = self.frob_t[t]
        if (acc >= self.q).any():
            raise AssertionError("trace left the base field: broken tower")
        return acc

    def to_coeffs(self, x):
        """Little-endian coefficient vectors over the base field, last axis."""
        x = np.asarray(x, dtype=np.int64)
        out = np.empty(x.shape + (self.deg,), dtype=np.int64)
        for i in range(self.deg):
            out[..., i] = x % self.q
            x = x // self.q
        return out

    def from_coeffs(self, c):
        c = np.asarray(c, dtype=np.int64)
        return c @ (self.q ** np.arange(c.shape[-1]))

    def random(self, rng, size=None, nonzero=False):
        lo = 1 if nonzero else 0
        return rng.integers(lo, self.order, size=size)

    def __repr__(self):
        return f"Field({self.order})"


def smallest_irreducible(F: Field, d: int) -> tuple:
    """Lexicographically smallest monic irreducible of degree d (c_0 compared first)."""
    ops = _PolyOps(F)
    for coeffs in itertools.product(range(F.order), repeat=d):
        f = list(coeffs) + [1]
        if d > 1 and coeffs[0] == 0:
            continue
        if ops.is_irreducible(f):
            return tuple(f)
    raise ValueError("no irreducible polynomial found")


class Tower:
    """F_p ⊂ F_q ⊂ F_{q^m} with shared integer encoding."""

    def __init__(self, params: FieldParams):
        self.params = params
        self.p, self.s, self.m = params.p, params.s, params.m
        self.Fp = Field(params.p, None, (0, 1))
        self.Fq = self.Fp if params.s == 1 else Field(params.p, self.Fp, params.g)
        self.Fqm = Field(params.p, self.Fq, params.h)
        self.q = self.Fq.order
        self.Q = self.Fqm.order

    def frobenius(self, x, j: int = 1):
        return self.Fqm.frobenius(x, j)

    def trace(self, x):
        return self.Fqm.trace(x)

    def __repr__(self):
        return f"Tower(F_{self.p} < F_{self.q} < F_{self.Q})"


_TOWER_CACHE: dict = {}


def build_tower(p: int, s: int, m: int) -> Tower:
    """Deterministic tower with lexicographically smallest moduli."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if s < 1 or m < 1:
        raise ValueError("extension degrees must be positive")
    key = (p, s, m)
    if key in _TOWER_CACHE:
        return _TOWER_CACHE[key]
    if p ** (s * m) > MAX_ORDER:
        raise ValueError(f"F_{p}^{s * m} is beyond desk scale")
    Fp = Field(p, None, (0, 1))
    g = (0, 1) if s == 1 else smallest_irreducible(Fp, s)
    Fq = Fp if s == 1 else Field(p, Fp, g)
    h = (0, 1) if m == 1 else smallest_irreducible(Fq, m)
    tower = Tower(FieldParams(p, s, m, g, h))
    _TOWER_CACHE[key] = tower
    return tower


def tower_for(q: int, m: int) -> Tower:
    """Tower for q a prime or a prime power."""
    for p in range(2, q + 1):
        if is_prime(p) and q % p == 0:
            s = 0
            t = q
            while t % p == 0:
                t //= p
                s += 1
            if t != 1:
                break
            return build_tower(p, s, m)
    raise ValueError(f"q = {q} is not a prime power")


__all__ = ["FieldParams", "Field", "Tower", "build_tower", "tower_for",
           "smallest_irreducible", "is_prime"]
