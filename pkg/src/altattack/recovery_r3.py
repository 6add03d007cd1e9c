"""Support and multiplier recovery for a degree-3 alternant code.

The public code is put in systematic form (I_k | P) with three chosen
positions last; they are specialized to X = 0, 1, ∞ and the multiplier
of the last one to 1.  Local indices a = 0 .. t-1 (t = n - k = 3m) label
the redundancy columns, so a = t-3, t-2, t-1 are the pinned positions.

Unknowns: X_a for a < t-3 and Y_b for b < t-1.  The structured
variables are Z_{a,b} = Y_a Y_b (X_a - X_b)^2 for a < b < t-1 and
Z_{a,t-1} = Y_a.

Three elimination paths are implemented:

* q odd: Steps 1 to 8 (V_j spaces, U spaces, bilinear shape, linear X,
  final grevlex basis, multiplication matrix, back-substitution).
* q = 2^s with s > 1: same, with W_a = X_a^2 and V_j already bilinear.
* q = 2: V_j spaces, the Frobenius lift of V_j rows to bilinear rows, and
  a degree-3 Macaulay elimination until the same final shape appears.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import gf_linalg as la
from .algebraic_codes import INF, Homography, apply_homography
from .code_ops import LinearCode
from .field_tower import Tower
from .polys import ONE, Poly, PolyRing, grevlex_key

log = logging.getLogger(__name__)


class RecoveryError(RuntimeError):
    """A heuristic step did not produce the expected shape."""

    def __init__(self, msg: str, transcript: Optional[dict] = None):
        super().__init__(msg)
        self.transcript = transcript or {}


@dataclass
class PolySystem:
    """Macaulay-style matrix: rows are polynomials, columns are labelled."""

    matrix: np.ndarray
    columns: list
    tag: str

    @property
    def rank_rows(self) -> int:
        return self.matrix.shape[0]


@dataclass
class SolutionSet:
    """Solutions in local coordinates: X values for a < t-3, Y values for b < t-1."""

    xs: List[np.ndarray]
    ys: List[np.ndarray]

    def __len__(self):
        return len(self.xs)


def z_pairs(t: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(t) for b in range(a + 1, t)]


def build_S(F, P: np.ndarray) -> PolySystem:
    """Rows p_{i,a} p_{i,b} over the Z_{a,b} columns (same matrix for S, S', B')."""
    P = np.asarray(P, dtype=np.int64)
    t = P.shape[1]
    pairs = z_pairs(t)
    ia = np.array([a for a, _ in pairs])
    ib = np.array([b for _, b in pairs])
    M = F.mul(P[:, ia], P[:, ib]).astype(np.int64)
    return PolySystem(M, pairs, "S")


def build_specialized(F, P: np.ndarray, q: int):
    """S' (q odd), S'_2 (q = 2^s, s > 1) or the pair (S', B') for q = 2.

    After the specialization every system has the same coefficient matrix
    on the structured monomials; only the meaning of the columns changes.
    """
    S = build_S(F, P)
    if q % 2:
        return PolySystem(S.matrix, S.columns, "S'")
    if q > 2:
        return PolySystem(S.matrix, S.columns, "S'2")
    return PolySystem(S.matrix, S.columns, "S'"), PolySystem(S.matrix.copy(), S.columns, "B'")


def expected_rank_S(q: int, m: int) -> int:
    t = 3 * m
    return t * (t - 1) // 2 - (3 * m if q == 2 else m)


class R3Solver:
    """State of one recovery run on a degree-3 code."""

    def __init__(self, tower: Tower, code: LinearCode, pinned: Sequence[int],
                 rng_seed: int = 0, check_point: Optional[tuple] = None):
        self.tower = tower
        self.F = tower.Fq
        self.E = tower.Fqm
        self.q, self.m = tower.q, tower.m
        self.code = code
        self.N = code.n
        self.k = code.dim
        self.t = self.N - self.k
        if self.t != 3 * self.m:
            raise RecoveryError(f"code codimension {self.t} is not 3m = {3 * self.m}")
        self.char2 = tower.p == 2
        self.rng = np.random.default_rng(rng_seed)
        self.transcript: dict = {"q": self.q, "m": self.m, "N": self.N, "k": self.k}
        pinned = [int(p) for p in pinned]
        others = [c for c in range(self.N) if c not in set(pinned)]
        order = np.array(others + pinned, dtype=np.int64)
        Gsys, perm = la.systematic_form(self.F, code.basis[:, order])
        if list(perm[-3:]) != [self.N - 3, self.N - 2, self.N - 1]:
            raise RecoveryError("pinned positions are not redundancy columns of the systematic form")
        self.colmap = order[perm]          # systematic column -> code coordinate
        self.P = Gsys[:, self.k:]
        t = self.t
        self.ring = PolyRing(self.F, t - 3, t - 1, xname="W" if (self.char2 and self.q > 2) else "X")
        self.check_point = check_point     # optional (values by var id over F_{q^m}) for self-checks

    # coordinates of the pinned points

    def xpoly(self, a: int) -> Poly:
        t = self.t
        if a == t - 3:
            return {}
        if a == t - 2:
            return {ONE: 1}
        if a >= t - 1:
            raise ValueError("X at infinity has no affine value")
        return self.ring.var(self.ring.X(a))

    def ypoly(self, b: int) -> Poly:
        return self.ring.var(self.ring.Y(b))

    def term(self, j: int, b: int) -> Poly:
        """Y_b (X_b - X_j)^2, or Y_b (W_b + W_j) when q is even and > 2."""
        R = self.ring
        if self.char2 and self.q > 2:
            return R.mul(self.ypoly(b), R.add(self.xpoly(b), self.xpoly(j)))
        d = R.sub(self.xpoly(b), self.xpoly(j))
        return R.mul(self.ypoly(b), R.mul(d, d))

    def _check(self, polys: Sequence[Poly], what: str):
        if self.check_point is None:
            return
        for f in polys:
            v = self.ring.evaluate(f, self.check_point, self.E)
            if v != 0:
                raise AssertionError(f"{what}: polynomial does not vanish at the secret: {self.ring.fmt(f)}")

    # Step 1

    def echelonize(self):
        t = self.t
        S = build_S(self.F, self.P)
        self.S = S
        pairs = S.columns
        quartic = [c for c, (a, b) in enumerate(pairs) if b < t - 1 and (a, b) != (t - 3, t - 2)]
        quad = [pairs.index((t - 3, t - 2))]
        lin = [pairs.index((a, t - 1)) for a in range(t - 1)]
        order = quartic + quad + lin
        R, piv, rk = la.rref(self.F, S.matrix[:, order])
        self.S_rank = rk
        self.S_basis = R[:rk][:, np.argsort(order)]   # basis rows in the original pair order
        nlin_start = len(quartic) + len(quad)
        lin_rows = [i for i, c in enumerate(piv) if c >= nlin_start]
        Vn = R[lin_rows][:, nlin_start:]               # over Y_0..Y_{t-2}
        pivY = {piv[i] - nlin_start for i in lin_rows}
        self.I = [b for b in range(t - 1) if b not in pivY]
        self.Vn = Vn
        expect = self.m - 1 if self.q == 2 else 2 * self.m - 1
        self.transcript.update(rank_S=rk, expected_rank_S=expected_rank_S(self.q, self.m),
                               linear_rows=len(lin_rows), I=list(self.I))
        if len(lin_rows) != expect:
            raise RecoveryError(f"Step 1: {len(lin_rows)} linear rows, expected {expect}", self.transcript)
        self._check(self.Vn_polys(), "V_n")
        return self.S_basis

    def Vn_polys(self) -> list[Poly]:
        return [self.ring.lin((int(c), self.ypoly(b)) for b, c in enumerate(row)) for row in self.Vn]

    # Step 2

    def compute_Vj(self, j: int, basis: Optional[np.ndarray] = None) -> np.ndarray:
        """Rows over the terms [T(j, b) for b != j, b < t-1] + [1].

        The rows of ``basis`` (default: the Step 1 basis) that only involve
        Z columns containing j, divided by Y_j.
        """
        t = self.t
        pairs = self.S.columns
        if basis is None:
            basis = self.S_basis
        jcols = [c for c, (a, b) in enumerate(pairs) if j in (a, b)]
        rest = [c for c in range(len(pairs)) if c not in set(jcols)]
        R, piv, rk = la.rref(self.F, basis[:, rest + jcols])
        rows = [i for i, c in enumerate(piv) if c >= len(rest)]
        block = R[rows][:, len(rest):]
        # reorder block columns to [b != j ascending] + [1]
        labels = []
        for c in jcols:
            a, b = pairs[c]
            other = b if a == j else a
            labels.append(("1",) if other == t - 1 else ("b", other))
        target = [("b", b) for b in range(t - 1) if b != j] + [("1",)]
        pos = [labels.index(lab) for lab in target]
        return block[:, pos]

    def Vj_polys(self, j: int, Vj: np.ndarray) -> list[Poly]:
        t = self.t
        terms = [self.term(j, b) for b in range(t - 1) if b != j] + [{ONE: 1}]
        return [self.ring.lin((int(c), f) for c, f in zip(row, terms)) for row in Vj]

    def all_Vj(self):
        self.V = {}
        dims = {}
        for j in range(self.t - 1):
            Vj = self.compute_Vj(j)
            self.V[j] = Vj
            dims[j] = Vj.shape[0]
            self._check(self.Vj_polys(j, Vj), f"V_{j}")
        self.transcript["dim_V"] = dims
        expect = self.m - 1 if self.q == 2 else 2 * self.m - 1
        bad = {j: d for j, d in dims.items() if d != expect}
        if bad:
            raise RecoveryError(f"Step 2: dim V_j differs from {expect} at {bad}", self.transcript)
        return self.V

    def dim_V_sum(self, j1: int, j2: int) -> int:
        polys = self.Vj_polys(j1, self.V[j1]) + self.Vj_polys(j2, self.V[j2])
        monos = sorted(self.ring.monomials(polys))
        return la.rank(self.F, self.ring.to_matrix(polys, monos))

    # Step 3 (q odd)

    def compute_U(self, j1: int, j2: int):
        """Basis of {p : (X_j1 - X_j2) p ∈ V_j1 + V_j2} on the terms tau_b and 1.

        Returns (homogeneous rows, full rows) as polynomial lists.
        """
        R = self.ring
        t = self.t
        Vpolys = self.Vj_polys(j1, self.V[j1]) + self.Vj_polys(j2, self.V[j2])
        d = R.sub(self.xpoly(j1), self.xpoly(j2))
        taus = []
        for b in range(t - 1):
            s = R.sub(R.scale(self.xpoly(b), 2 % self.tower.p), R.add(self.xpoly(j1), self.xpoly(j2)))
            taus.append(R.mul(self.ypoly(b), s))
        cands = taus + [{ONE: 1}]
        dc = [R.mul(d, f) for f in cands]
        allp = Vpolys + dc
        monos = sorted(R.monomials(allp))
        M = R.to_matrix(allp, monos)
        K = la.left_kernel(self.F, M)
        nv = len(Vpolys)
        coeffs = la.row_basis(self.F, K[:, nv:]) if K.shape[0] else np.zeros((0, len(cands)), dtype=np.int64)
        # homogeneous part: combinations without the constant
        Rc, piv, rk = la.rref(self.F, np.hstack([coeffs[:, -1:], coeffs[:, :-1]])) if coeffs.shape[0] else (coeffs, [], 0)
        hom = [Rc[i, 1:] for i, c in enumerate(piv) if c >= 1]
        full = [Rc[i, 1:].tolist() + [Rc[i, 0]] for i in range(rk)]
        to_poly = lambda row: R.lin((int(c), f) for c, f in zip(row, cands))
        hom_p = [to_poly(list(r) + [0]) for r in hom]
        full_p = [to_poly(r) for r in full]
        return hom_p, full_p

    def all_U(self):
        t = self.t
        j2 = t - 3
        self.U_rows: list[Poly] = []
        dims = {}
        u_row = None
        for l in range(t - 1):
            if l == j2:
                continue
            hom, full = self.compute_U(l, j2)
            dims[l] = len(hom)
            self.U_rows.extend(hom)
            if l == t - 2:
                extra = [f for f in full if ONE in f]
                if extra:
                    u_row = extra[0]
            self._check(full, f"U_{l},{j2}")
        self.transcript["dim_U"] = dims
        self.transcript["sum_dim_U"] = sum(dims.values())
        if u_row is None:
            raise RecoveryError("Step 3: no affine polynomial u_{n-2,n-1}", self.transcript)
        self.u_row = u_row
        small = {l: d for l, d in dims.items() if d < self.m}
        if small:
            raise RecoveryError(f"Step 3: dim U below m at {small}", self.transcript)
        return self.U_rows

    # Step 4

    def _vn_substitution(self) -> Dict[int, Poly]:
        """Y_b for pivot b expressed in the Y_I, from the reduced linear rows."""
        rules = {}
        R = self.ring
        Iset = set(self.I)
        for row in self.Vn:
            nz = np.flatnonzero(row)
            lead = int(nz[0])
            if lead in Iset:
                raise RecoveryError("linear row leads on an I variable")
            rhs = R.lin((self.F.s_sub(0, int(row[b])), self.ypoly(b)) for b in nz[1:])
            rules[R.Y(lead)] = rhs
        return rules

    def eliminate_and_linearize(self, bilinear: Sequence[Poly]):
        """Linear algebra on the Y X block; returns (rows by (j, c), affine row)."""
        R = self.ring
        t = self.t
        rules = self._vn_substitution()
        reduced = [R.substitute(f, rules) for f in bilinear]
        I = self.I
        xs = list(range(t - 3))
        yx = [R.mono(R.Y(b), R.X(c)) for b in I for c in xs]
        ys = [(R.Y(b),) for b in I]
        monos = yx + ys + [ONE]
        extra = R.monomials(reduced) - set(monos)
        if extra:
            raise RecoveryError("Step 4: unexpected monomials " +
                                ", ".join(R.fmt_mono(mm) for mm in list(extra)[:5]), self.transcript)
        M = R.to_matrix(reduced, monos)
        Rm, piv, rk = la.rref(self.F, M)
        self.transcript["step4_rows"] = len(reduced)
        self.transcript["step4_rank"] = rk
        self.transcript["step4_reductions_to_zero"] = len(reduced) - rk
        nyx = len(yx)
        if piv[:nyx] != list(range(nyx)) or len(piv) < nyx + 1:
            raise RecoveryError("Step 4: bilinear shape not reached", self.transcript)
        aff = [i for i, c in enumerate(piv) if nyx <= c < nyx + len(ys)]
        if any(c == len(monos) - 1 for c in piv):
            raise RecoveryError("Step 4: inconsistent system (1 in the ideal)", self.transcript)
        if len(aff) != 1:
            raise RecoveryError(f"Step 4: {len(aff)} affine rows instead of 1", self.transcript)
        rows = R.from_rows(Rm[:rk], monos)
        aff_poly = rows[aff[0]]
        c0 = aff_poly.get(ONE, 0)
        if c0 == 0:
            raise RecoveryError("Step 4: affine row is homogeneous", self.transcript)
        aff_poly = R.scale(aff_poly, self.F.s_sub(0, self.F.s_inv(c0)))   # sum a_j Y_j - 1
        bil = {}
        for idx, (b, c) in enumerate((b, c) for b in I for c in xs):
            bil[(b, c)] = rows[idx]
        self.bilinear = bil
        self.affine = aff_poly
        self.a = {b: aff_poly.get((R.Y(b),), 0) for b in I}
        self._check(list(bil.values()) + [aff_poly], "Step 4")
        return bil, aff_poly

    # Step 5

    def linear_X(self):
        R = self.ring
        out = {}
        for c in range(self.t - 3):
            acc = R.neg(R.mul(R.var(R.X(c)), self.affine))
            for b in self.I:
                acc = R.add(acc, R.scale(self.bilinear[(b, c)], self.a[b]))
            allowed = {(R.X(c),), ONE} | {(R.Y(b),) for b in self.I}
            if set(acc) - allowed or acc.get((R.X(c),), 0) != 1:
                raise RecoveryError(f"Step 5: row for X_{c} has the wrong shape", self.transcript)
            out[c] = acc
        self.linX = out
        self._check(list(out.values()), "Step 5")
        return out

    # Step 6

    def final_basis(self):
        R = self.ring
        F = self.F
        xs_rules = {}
        for c, f in self.linX.items():
            g = dict(f)
            g.pop((R.X(c),))
            xs_rules[R.X(c)] = R.neg(g)
        i0 = next(b for b in self.I if self.a[b] != 0)
        self.i0 = i0
        self.I1 = [b for b in self.I if b != i0]
        inv = F.s_inv(self.a[i0])
        rhs = {ONE: inv}
        for b in self.I1:
            if self.a[b]:
                rhs = R.add(rhs, R.scale(self.ypoly(b), F.s_sub(0, F.s_mul(self.a[b], inv))))
        self.y_i0 = rhs
        rules = dict(xs_rules)
        rules[R.Y(i0)] = rhs
        quads = [R.substitute(f, rules) for f in self.bilinear.values()]
        I1 = self.I1
        deg2 = [R.mono(R.Y(a), R.Y(b)) for a, b in itertools.combinations_with_replacement(I1, 2)]
        deg1 = [(R.Y(b),) for b in I1]
        monos = sorted(deg2, key=grevlex_key(R)) + deg1 + [ONE]
        extra = R.monomials(quads) - set(monos)
        if extra:
            raise RecoveryError("Step 6: unexpected monomials", self.transcript)
        M = R.to_matrix(quads, monos)
        Rm, piv, rk = la.rref(F, M)
        nd2 = len(deg2)
        standard = [monos[c] for c in range(len(monos)) if c not in set(piv)]
        self.transcript["standard_monomials"] = len(standard)
        if piv[:nd2] != list(range(nd2)) or len(piv) != nd2:
            raise RecoveryError(f"Step 6: staircase has {len(standard)} monomials, expected {self.m}",
                                self.transcript)
        rows = R.from_rows(Rm[:rk], monos)
        self.nf_quad = {monos[piv[i]]: R.sub(rows[i], {monos[piv[i]]: 1}) for i in range(rk)}
        # X_j in terms of Y_{I_1}
        self.x_final = {c: R.substitute(g, {R.Y(i0): rhs}) for c, g in
                        ((c, xs_rules[R.X(c)]) for c in range(self.t - 3))}
        self._check([R.sub({m_: 1}, R.neg(g)) for m_, g in self.nf_quad.items()], "Step 6")
        return self.nf_quad

    # Step 7

    def multiplication_matrix(self, form: Dict[int, int]) -> np.ndarray:
        """Matrix of multiplication by sum form[b] Y_b on the basis [1] + Y_{I_1}."""
        R = self.ring
        F = self.F
        basis = [ONE] + [(R.Y(b),) for b in self.I1]
        idx = {mm: i for i, mm in enumerate(basis)}
        msize = len(basis)
        M = np.zeros((msize, msize), dtype=np.int64)
        for i, bm in enumerate(basis):
            acc: Poly = {}
            for b, c in form.items():
                if c == 0:
                    continue
                prod = tuple(sorted(bm + (R.Y(b),)))
                if prod in idx:
                    acc = R.add(acc, {prod: c})
                else:
                    acc = R.add(acc, R.scale(R.neg(self.nf_quad[prod]), c))
            for mm, c in acc.items():
                M[i, idx[mm]] = c
        return M

    def solve(self) -> SolutionSet:
        F, E = self.F, self.E
        m = self.m
        forms = [{b: 1} for b in self.I1]
        for _ in range(20):
            forms.append({b: int(self.rng.integers(0, self.q)) for b in self.I1})
        for form in forms:
            M = self.multiplication_matrix(form)
            poly = minimal_polynomial(F, M.T)
            roots = poly_roots(E, poly)
            if len(poly) - 1 == m and len(roots) == m:
                break
        else:
            raise RecoveryError("Step 7: no separating form found", self.transcript)
        self.transcript["eliminant_degree"] = len(poly) - 1
        self.transcript["eliminant"] = poly
        xs, ys = [], []
        for lam in roots:
            A = E.sub(M, np.eye(m, dtype=np.int64) * lam) if m else M
            K = la.right_kernel(E, A)
            if K.shape[0] != 1 or K[0, 0] == 0:
                raise RecoveryError("Step 7: eigenspace is not a point", self.transcript)
            v = E.mul(K[0], E.s_inv(int(K[0, 0])))
            point = self.q2_back_substitute(v) if self.q == 2 else self.back_substitute(v)
            xs.append(point[0])
            ys.append(point[1])
        sols = SolutionSet(xs, ys)
        self.solutions = sols
        return sols

    def back_substitute(self, v: np.ndarray):
        """Local (x, y) from the values of Y_{I_1}; x has INF at t-1, y has 1 there."""
        R = self.ring
        E = self.E
        t = self.t
        vals = np.zeros(R.nx + R.ny, dtype=np.int64)
        for i, b in enumerate(self.I1):
            vals[R.Y(b)] = v[i + 1]
        vals[R.Y(self.i0)] = R.evaluate(self.y_i0, vals, E)
        for b_var, g in self._vn_substitution().items():
            vals[b_var] = R.evaluate(g, vals, E)
        for c, g in self.x_final.items():
            vals[R.X(c)] = R.evaluate(g, vals, E)
        x = np.zeros(t, dtype=np.int64)
        y = np.ones(t, dtype=np.int64)
        x[: t - 3] = vals[: t - 3]
        x[t - 3], x[t - 2], x[t - 1] = 0, 1, INF
        y[: t - 1] = vals[R.nx:]
        if self.char2 and self.q > 2:
            # stored W = X^2; take square roots
            half = E.order // 2
            x[: t - 3] = E.pow(x[: t - 3], half)
        return x, y

    # Step 8

    def recover_full(self, xl: np.ndarray, yl: np.ndarray):
        """Full support/multiplier in the code coordinates from a local solution."""
        E = self.E
        k, t = self.k, self.t
        P = self.P
        yfin = yl[: t - 1]
        xfin = xl[: t - 1]
        ybar = E.neg(E.sum(E.mul(P[:, : t - 1], yfin[None, :]), axis=1))
        if (ybar == 0).any():
            raise RecoveryError("Step 8: zero multiplier", self.transcript)
        yx = E.neg(E.sum(E.mul(P[:, : t - 1], E.mul(yfin, xfin)[None, :]), axis=1))
        xbar = E.div(yx, ybar)
        # degree-2 row as a consistency check
        lhs = E.mul(ybar, E.mul(xbar, xbar))
        rhs = E.neg(E.add(E.sum(E.mul(P[:, : t - 1], E.mul(yfin, E.mul(xfin, xfin))[None, :]), axis=1),
                          P[:, t - 1]))
        if not np.array_equal(lhs, rhs):
            raise RecoveryError("Step 8: degree-2 relation fails", self.transcript)
        xs = np.concatenate([xbar, xl])
        ys = np.concatenate([ybar, yl])
        if len(set(xs.tolist())) != xs.size:
            raise RecoveryError("Step 8: support collision", self.transcript)
        x = np.empty(self.N, dtype=np.int64)
        y = np.empty(self.N, dtype=np.int64)
        x[self.colmap] = xs
        y[self.colmap] = ys
        return x, y

    # q = 2

    def q2_bilinear_lift(self) -> list[Poly]:
        return self.lifted_rows()

    def lifted_rows(self) -> list[Poly]:
        """Square roots of the E_j rows minus Y_j V_j: sum v_b Y_b (X_b + X_j)."""
        R = self.ring
        out = []
        for j, Vj in self.V.items():
            others = [b for b in range(self.t - 1) if b != j]
            for row in Vj:
                f: Poly = {}
                for c, b in zip(row[:-1], others):
                    if c:
                        f = R.add(f, R.mul(self.ypoly(b), R.add(self.xpoly(b), self.xpoly(j))))
                out.append(f)
        self._check(out, "lifted rows")
        return out

    def compute_Ej(self) -> Dict[int, np.ndarray]:
        """E_j from B', whose rows carry the same coefficients on other monomials."""
        B = build_specialized(self.F, self.P, self.q)[1]
        basis = la.row_basis(self.F, B.matrix)
        return {j: self.compute_Vj(j, basis) for j in range(self.t - 1)}

    def check_Ej(self) -> bool:
        """V_j and E_j must agree coefficient for coefficient."""
        E = self.compute_Ej()
        self.transcript["dim_E"] = {j: e.shape[0] for j, e in E.items()}
        return all(np.array_equal(E[j], self.V[j]) for j in E)

    def q2_eliminate(self, max_rounds: int = 12):
        """Degree-3 Macaulay rounds: quadrics times variables plus the cubic V_j rows.

        New linear rows become substitution rules, new quadrics replace the
        old ones; stops when a round adds neither.
        """
        R = self.ring
        F = self.F
        lifted = self.lifted_rows()
        cubic = []
        for j, Vj in self.V.items():
            cubic.extend(self.Vj_polys(j, Vj))
        linear = self.Vn_polys()
        self.transcript["lifted_rows"] = len(lifted)
        self.transcript["lifted_rank"] = la.rank(F, R.to_matrix(lifted, sorted(R.monomials(lifted))))
        key = grevlex_key(R)
        rounds = []
        quads = list(lifted)
        nquad_prev = -1
        for _ in range(max_rounds):
            rules = self._linear_rules(linear)
            base = [R.substitute(f, rules) for f in quads + cubic]
            base = [f for f in base if f]
            free = sorted(set(range(R.nx + R.ny)) - set(rules))
            rows = list(base)
            for f in base:
                if R.degree(f) <= 2:
                    for v in free:
                        rows.append(R.mul(f, R.var(v)))
            monos = sorted(R.monomials(rows), key=key)
            reduced = self._reduce(rows, monos)
            rk = len(reduced)
            if any(f.keys() == {ONE} for f in reduced):
                raise RecoveryError("q=2 elimination: 1 in the ideal", self.transcript)
            new_lin = [f for f in reduced if R.degree(f) <= 1]
            quads = [f for f in reduced if R.degree(f) == 2]
            rounds.append({"rows": len(rows), "cols": len(monos), "rank": rk,
                           "quadrics": len(quads), "linear": len(new_lin)})
            if not new_lin and len(quads) == nquad_prev:
                break
            nquad_prev = len(quads)
            linear = linear + new_lin
        else:
            raise RecoveryError("q=2 elimination did not stabilise", self.transcript)
        self.transcript["q2_rounds"] = rounds
        self.q2_rules = self._linear_rules(linear)
        self.q2_quads = quads
        self._check(quads + linear, "q=2 elimination")
        return self.q2_rules

    def _reduce(self, rows: Sequence[Poly], monos: Sequence) -> list[Poly]:
        """Nonzero rows of the reduced Macaulay matrix, as polynomials.

        Over F_2 the matrix is packed straight from the sparse rows, so the
        degree-3 matrices of the q = 2 path never exist in dense form.
        """
        R = self.ring
        if self.F.order != 2:
            Rm, _, rk = la.rref(self.F, R.to_matrix(rows, monos))
            return R.from_rows(Rm[:rk], monos)
        index = {mm: i for i, mm in enumerate(monos)}
        W = la.pack_rows_f2([[index[mm] for mm in f] for f in rows], len(monos))
        piv = la.rref_packed_f2(W, len(monos))
        out = []
        for i in range(len(piv)):
            out.append({monos[c]: 1 for c in la.packed_row_support(W, i, len(monos))})
        return out

    def _linear_rules(self, linear: Sequence[Poly]) -> Dict[int, Poly]:
        """Echelonize linear polynomials; leading variables become substitution rules."""
        R = self.ring
        F = self.F
        if not linear:
            return {}
        key = grevlex_key(R)
        monos = sorted(R.monomials(linear) | {ONE}, key=key)
        M = R.to_matrix(linear, monos)
        Rm, piv, rk = la.rref(F, M)
        rules = {}
        for i, c in enumerate(piv):
            lead = monos[c]
            if lead == ONE:
                raise RecoveryError("inconsistent linear system", self.transcript)
            row = R.from_rows(Rm[i:i + 1], monos)[0]
            row.pop(lead)
            rules[lead[0]] = R.neg(row)
        # make rules self-contained (rref already eliminates pivots from other rows)
        return rules

    def q2_final(self):
        """Final staircase from the last quadrics and the substitution rules."""
        R = self.ring
        F = self.F
        rules = self.q2_rules
        yvars = [R.Y(b) for b in range(self.t - 1)]
        xvars = [R.X(c) for c in range(self.t - 3)]
        free_y = [v for v in yvars if v not in rules]
        missing_x = [v for v in xvars if v not in rules]
        self.transcript["q2_free_y"] = len(free_y)
        if missing_x:
            raise RecoveryError(f"q=2: {len(missing_x)} X variables not linearized", self.transcript)
        if len(free_y) != self.m - 1:
            raise RecoveryError(f"q=2: {len(free_y)} free Y variables, expected {self.m - 1}", self.transcript)
        self.I1 = [v - R.nx for v in free_y]
        I1 = self.I1
        deg2 = [R.mono(R.Y(a), R.Y(b)) for a, b in itertools.combinations_with_replacement(I1, 2)]
        deg1 = [(R.Y(b),) for b in I1]
        monos = sorted(deg2, key=grevlex_key(R)) + deg1 + [ONE]
        quads = [R.substitute(f, rules) for f in self.q2_quads]
        if R.monomials(quads) - set(monos):
            raise RecoveryError("q=2: quadrics outside Y_I1", self.transcript)
        M = R.to_matrix(quads, monos) if quads else np.zeros((0, len(monos)), dtype=np.int64)
        Rq, pq, rk = la.rref(F, M)
        nd2 = len(deg2)
        self.transcript["standard_monomials"] = len(monos) - rk
        if pq[:nd2] != list(range(nd2)) or rk != nd2:
            raise RecoveryError("q=2: final staircase is not {1} and Y_I1", self.transcript)
        rows = R.from_rows(Rq[:rk], monos)
        self.nf_quad = {monos[pq[i]]: R.sub(rows[i], {monos[pq[i]]: 1}) for i in range(rk)}

    def q2_back_substitute(self, v: np.ndarray):
        R = self.ring
        E = self.E
        t = self.t
        vals = np.zeros(R.nx + R.ny, dtype=np.int64)
        for i, b in enumerate(self.I1):
            vals[R.Y(b)] = v[i + 1]
        for var, g in self.q2_rules.items():
            vals[var] = R.evaluate(g, vals, E)
        x = np.zeros(t, dtype=np.int64)
        y = np.ones(t, dtype=np.int64)
        x[: t - 3] = vals[: t - 3]
        x[t - 3], x[t - 2], x[t - 1] = 0, 1, INF
        y[: t - 1] = vals[R.nx:]
        return x, y

    # drivers

    def run_steps(self) -> SolutionSet:
        self.echelonize()
        self.all_Vj()
        if self.q == 2:
            if not self.check_Ej():
                raise RecoveryError("E_j and V_j coefficients differ", self.transcript)
            self.q2_eliminate()
            self.q2_final()
        else:
            if self.char2:
                bil = []
                for j in range(self.t - 1):
                    bil.extend(self.Vj_polys(j, self.V[j]))
            else:
                bil = list(self.all_U()) + [self.u_row]
            self.eliminate_and_linearize(bil)
            self.linear_X()
            self.final_basis()
        return self.solve()


def minimal_polynomial(F, A: np.ndarray) -> list[int]:
    """Monic minimal polynomial of the vector e_0 under A (Krylov), low degree first."""
    n = A.shape[0]
    vecs = [np.zeros(n, dtype=np.int64)]
    vecs[0][0] = 1
    for d in range(1, n + 1):
        nxt = F.dot(A, vecs[-1].reshape(-1, 1)).reshape(-1)
        K = np.array(vecs).T                       # n x d
        sol = la.solve_affine(F, K, nxt)
        if sol is not None:
            # A^d e0 = sum sol_i A^i e0  ->  z^d - sum sol_i z^i
            return [int(F.s_sub(0, int(c))) for c in sol] + [1]
        vecs.append(nxt)
    raise AssertionError("Krylov sequence did not close")


def poly_roots(E, poly: Sequence[int]) -> list[int]:
    """All roots in E of a polynomial with coefficients in a subfield, by evaluation."""
    z = np.arange(E.order)
    acc = np.zeros(E.order, dtype=np.int64)
    for c in reversed(list(poly)):
        acc = E.add(E.mul(acc, z), c)
    return [int(r) for r in np.flatnonzero(acc == 0)]


def specialized_secret(tower: Tower, x, y, pinned: Sequence[int], r: int = 3):
    """Image of a secret (x, y) under the homography sending the pinned points to 0, 1, ∞."""
    E = tower.Fqm
    x0, x1, x2 = (int(x[p]) for p in pinned)
    a = E.s_sub(x1, x2)
    b = E.s_mul(E.s_sub(0, x0), a)
    c = E.s_sub(x1, x0)
    d = E.s_mul(E.s_sub(0, x2), c)
    xs, ys = apply_homography(E, Homography(a, b, c, d, 1), x, y, r)
    lam = E.s_inv(int(ys[pinned[2]]))
    return xs, E.mul(ys, lam)


def check_point_for(solver: R3Solver, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Variable values (by id) of a specialized secret, in the solver's local coordinates."""
    R = solver.ring
    t = solver.t
    loc = solver.colmap[solver.k:]
    vals = np.zeros(R.nx + R.ny, dtype=np.int64)
    xl = xs[loc]
    yl = ys[loc]
    E = solver.E
    if solver.char2 and solver.q > 2:
        xl = np.where(xl == INF, xl, E.mul(np.where(xl == INF, 0, xl), np.where(xl == INF, 0, xl)))
    vals[: t - 3] = xl[: t - 3]
    vals[R.nx:] = yl[: t - 1]
    return vals


def _dump(dump_dir: str, solver: R3Solver):
    from pathlib import Path
    d = Path(dump_dir)
    d.mkdir(parents=True, exist_ok=True)
    q = solver.F.order
    with open(d / "S.mat", "w") as fh:
        la.write_matrix(fh, solver.S.matrix, q, 1)
    if hasattr(solver, "S_basis"):
        with open(d / "S_basis.mat", "w") as fh:
            la.write_matrix(fh, solver.S_basis, q, 1)
    (d / "recovery.transcript").write_text("".join(f"{k}={v}\n" for k, v in solver.transcript.items()))


@dataclass
class RecoveryResult:
    solutions: list            # list of (x, y) full-length in code coordinates
    transcript: dict


def recover(tower: Tower, code: LinearCode, pinned: Optional[Sequence[int]] = None,
            secret: Optional[tuple] = None, seed: int = 0,
            dump_dir: Optional[str] = None) -> RecoveryResult:
    """Run the structured elimination on a degree-3 alternant code.

    ``pinned`` are the code positions sent to 0, 1, ∞ (default: the last
    three).  ``secret`` (x, y) enables the vanishing self-checks.
    ``dump_dir`` receives the Step 1 matrix and its echelon form.
    """
    N = code.n
    if pinned is None:
        pinned = (N - 3, N - 2, N - 1)
    solver = R3Solver(tower, code, pinned, rng_seed=seed)
    if secret is not None:
        xs, ys = specialized_secret(tower, secret[0], secret[1], pinned)
        solver.check_point = check_point_for(solver, xs, ys)
    try:
        sols = solver.run_steps()
    finally:
        if dump_dir is not None and hasattr(solver, "S"):
            _dump(dump_dir, solver)
    full = [solver.recover_full(xl, yl) for xl, yl in zip(sols.xs, sols.ys)]
    solver.transcript["n_solutions"] = len(full)
    return RecoveryResult(full, solver.transcript)


__all__ = ["PolySystem", "SolutionSet", "R3Solver", "RecoveryError", "RecoveryResult",
           "build_S", "build_specialized", "expected_rank_S", "z_pairs", "minimal_polynomial", "poly_roots",
           "specialized_secret", "check_point_for", "recover"]
