"""Degree-lowering filtration by conductors of shortened codes.

One step takes the public code Alt_r(x, y) of length n and a position i,
and computes X = Cond(A, B) with A = (Sh_i Alt_r)^⊥ and
B = (Sh_i Alt_r^⊥)^2.  For random keys X is the dual of
Alt_{r-1}(x_ī, y_ī (x_ī - x_i)), so dual(X) is again a public alternant
code, one degree lower and one position shorter.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .algebraic_codes import AlternantKey, make_alternant
from .code_ops import LinearCode, conductor, dual, extend_scalars, shorten, square, star_product
from .distinguisher import generic_square_dim

log = logging.getLogger(__name__)


class FiltrationError(RuntimeError):
    def __init__(self, msg: str, steps: Optional[list] = None, kind: str = "conjecture"):
        super().__init__(msg)
        self.steps = steps or []
        self.kind = kind            # "conjecture" or "undistinguishable"


@dataclass
class FiltrationStep:
    position: int               # index in the code the step was applied to
    original: int               # the same position in the original coordinates
    degree: int                 # input degree r
    dim_A: int
    dim_B: int
    dim_X: int
    accepted: bool
    X: Optional[LinearCode] = field(default=None, repr=False)

    @property
    def expected_degree(self) -> int:
        return self.degree - 1

    def to_text(self) -> str:
        return (f"i={self.position} orig={self.original} r={self.degree} dimA={self.dim_A} "
                f"dimB={self.dim_B} dimX={self.dim_X} accepted={int(self.accepted)}")


def filtration_step(pub: LinearCode, r: int, i: int, original: Optional[int] = None) -> FiltrationStep:
    """Conductor step at position i; accepted iff dim X = (r-1)m."""
    T = pub.tower
    q, m = T.q, T.m
    if r < q + 1:
        raise ValueError(f"a conductor step needs r >= q + 1 (r={r}, q={q})")
    A = dual(shorten(pub, [i]))
    D = shorten(dual(pub), [i])
    B = square(D)
    if B.dim >= generic_square_dim(pub.n - 1, D.dim):
        raise FiltrationError("square of the shortened dual has generic dimension",
                              kind="undistinguishable")
    X = conductor(A, B)
    assert star_product(X, A) <= B, "conductor does not multiply A into B"
    ok = X.dim == (r - 1) * m
    return FiltrationStep(i, i if original is None else original, r, A.dim, B.dim, X.dim, ok, X)


def expected_conductor(key: AlternantKey, I: Sequence[int]) -> LinearCode:
    """dual(Alt_{r-s}(x_Ī, y_Ī ∏_j (x_Ī - x_{i_j}))) for the ordered positions I."""
    I = [int(i) for i in I]
    if len(set(I)) != len(I):
        raise ValueError("repeated positions")
    E = key.tower.Fqm
    keep = [j for j in range(key.n) if j not in set(I)]
    x = key.x[keep]
    y = key.y[keep].copy()
    for i in I:
        y = E.mul(y, E.sub(x, int(key.x[i])))
    return dual(make_alternant(key.tower, key.r - len(I), x, y))


def default_positions(n: int, exclude: Iterable[int] = ()) -> list[int]:
    ex = set(int(e) for e in exclude)
    return [i for i in range(n) if i not in ex]


def run_filtration(pub: LinearCode, r: int, target_degree: int = 3,
                   positions: Optional[Sequence[int]] = None, retries: int = 10):
    """Step down from degree r to target_degree.

    ``positions`` lists candidate original coordinates in the order they
    are tried; a rejected candidate is skipped and the next one tried, at
    most ``retries`` times per step.  Returns (code, steps, removed) where
    removed lists the original coordinates that were shortened away.
    """
    T = pub.tower
    if target_degree < 3 or target_degree < T.q:
        raise ValueError("target degree must be at least 3 and at least q")
    if positions is None:
        positions = default_positions(pub.n)
    cand = [int(p) for p in positions]
    alive = list(range(pub.n))          # original index of each current coordinate
    code = pub
    steps: List[FiltrationStep] = []
    removed: List[int] = []
    deg = r
    while deg > target_degree:
        accepted = None
        tries = 0
        while cand and tries <= retries:
            orig = cand.pop(0)
            if orig not in alive:
                continue
            pos = alive.index(orig)
            try:
                st = filtration_step(code, deg, pos, orig)
            except FiltrationError as exc:
                exc.steps = steps
                raise
            steps.append(st)
            tries += 1
            if st.accepted:
                accepted = st
                break
            log.info("conductor rejected at %d (dim %d)", orig, st.dim_X)
        if accepted is None:
            raise FiltrationError(f"no accepted conductor at degree {deg}", steps)
        code = dual(accepted.X)
        alive.pop(accepted.position)
        removed.append(accepted.original)
        deg -= 1
    return code, steps, removed


# checks that need the secret

def _ext(C: LinearCode) -> LinearCode:
    return C if C.ext else extend_scalars(C)


def verify_lemmas(key: AlternantKey, i: int) -> dict:
    """Decomposition, subcode and product inclusions around position i over F_{q^m}."""
    T = key.tower
    E = T.Fqm
    r = key.r
    n = key.n
    keep = [j for j in range(n) if j != i]
    xi, yi = key.x[keep], key.y[keep]
    pub_dual = dual(key.public_code())
    sh = _ext(shorten(pub_dual, [i]))
    full = _ext(dual(make_alternant(T, r, xi, yi)))
    ybar = LinearCode(T, yi.reshape(1, -1), ext=True)
    report = {}
    report["decomposition"] = (sh + ybar == full) and (sh.dim + 1 == full.dim)
    yB = E.mul(yi, E.sub(xi, int(key.x[i])))
    B = dual(make_alternant(T, r - 1, xi, yB))
    Bext = _ext(B)
    report["alt_subcode"] = Bext <= sh
    rows = []
    for u in range(T.m):
        for v in range(u + 1, T.m):
            a = E.mul(T.frobenius(np.array([key.y[i]]), u)[0], T.frobenius(yi, v))
            b = E.mul(T.frobenius(np.array([key.y[i]]), v)[0], T.frobenius(yi, u))
            rows.append(E.sub(a, b))
    C0 = LinearCode(T, np.array(rows).reshape(-1, n - 1), ext=True, n=n - 1)
    report["c0_subcode"] = C0 <= sh
    Dp = _ext(star_product(B, shorten(pub_dual, [i])))
    report["product_inclusion"] = star_product(Bext, ybar) <= Dp
    report["ok"] = all(report.values())
    return report


def goppa_anomaly(key: AlternantKey, i: int, j: int) -> dict:
    """Shortening identities of Goppa codes and the non-dropping conductor degree."""
    if key.gamma is None:
        raise ValueError("key is not a Goppa key")
    if i == j:
        raise ValueError("positions must differ")
    T = key.tower
    E = T.Fqm
    r = key.r
    n = key.n
    goppa = key.public_code()
    ones = LinearCode(T, np.ones((1, n), dtype=np.int64))
    alt_up = dual(make_alternant(T, r + 1, key.x, key.y))
    report = {}
    report["alt_r_plus_1"] = alt_up == dual(goppa) + ones

    def twisted(a):
        keep = [t for t in range(n) if t != a]
        return dual(make_alternant(T, r, key.x[keep], E.mul(key.y[keep], E.sub(key.x[keep], int(key.x[a])))))

    Ti = twisted(i)
    report["shortening_i"] = Ti == shorten(alt_up, [i])
    Tj = twisted(j)
    # Sh_j applied to a code on positions without i: index shift
    jj = j - (1 if j > i else 0)
    ii = i - (1 if i > j else 0)
    report["commutation"] = shorten(Ti, [jj]) == shorten(Tj, [ii])
    C = dual(shorten(goppa, [i]))
    D = square(shorten(dual(goppa), [i]))
    X = conductor(C, D)
    report["square_dim"] = D.dim
    report["conductor_dim"] = X.dim
    report["conductor_degree_kept"] = X.dim == r * T.m
    report["conductor_is_twisted"] = X == Ti
    report["ok"] = all(v for k, v in report.items() if isinstance(v, bool))
    return report


__all__ = ["FiltrationStep", "FiltrationError", "filtration_step", "expected_conductor",
           "run_filtration", "default_positions", "verify_lemmas", "goppa_anomaly"]
