"""End-to-end key recovery: filtration, two recoveries, stitching, renormalization.

For r > 3 the public code is filtered twice, along two disjoint sets of
r - 3 positions, down to degree-3 codes.  Both are solved with the same
three pinned positions, so their solutions share a homography and can
be matched on common coordinates.  Each run supplies the support values
the other one lost, and the multipliers are unwound by dividing out the
product of (x - x_i) over the shortened positions.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import gf_linalg as la
from .algebraic_codes import INF, Homography, apply_homography, make_alternant, vandermonde
from .code_ops import LinearCode
from .distinguisher import DistinguisherReport, measure
from .filtration import FiltrationError, FiltrationStep, run_filtration
from .recovery_r3 import RecoveryError, recover

log = logging.getLogger(__name__)


class AttackError(RuntimeError):
    """Abort with a reason: "param", "heuristic" or "undistinguishable"."""

    def __init__(self, msg: str, kind: str, transcript: Optional["AttackTranscript"] = None):
        super().__init__(msg)
        self.kind = kind
        self.transcript = transcript


@dataclass
class AttackConfig:
    retries: int = 10
    seed: int = 0
    check_distinguisher: bool = True


@dataclass
class AttackTranscript:
    q: int
    m: int
    n: int
    r: int
    pinned: tuple = ()
    I1: list = field(default_factory=list)
    I2: list = field(default_factory=list)
    steps1: list = field(default_factory=list)
    steps2: list = field(default_factory=list)
    distinguisher: Optional[DistinguisherReport] = None
    recovery1: dict = field(default_factory=dict)
    recovery2: dict = field(default_factory=dict)
    n_solutions: tuple = ()
    matched: Optional[tuple] = None
    stitched: Optional[tuple] = None
    key: Optional[tuple] = None
    verdict: bool = False
    status: str = "running"
    timings: dict = field(default_factory=dict)

    def to_text(self) -> str:
        lines = ["altattack-transcript v1",
                 f"params q={self.q} m={self.m} n={self.n} r={self.r}",
                 f"pinned {' '.join(map(str, self.pinned))}",
                 f"I1 {' '.join(map(str, self.I1))}",
                 f"I2 {' '.join(map(str, self.I2))}"]
        if self.distinguisher is not None:
            lines.append("distinguisher " + self.distinguisher.to_text())
        for tag, steps in (("step1", self.steps1), ("step2", self.steps2)):
            lines.extend(f"{tag} {st.to_text()}" for st in steps)
        for tag, rec in (("recovery1", self.recovery1), ("recovery2", self.recovery2)):
            for k, v in rec.items():
                if k in ("dim_V", "dim_U", "dim_E", "q2_rounds", "eliminant"):
                    v = str(v).replace(" ", "")
                lines.append(f"{tag} {k}={v}")
        lines.append(f"solutions {' '.join(map(str, self.n_solutions))}")
        lines.append(f"matched {self.matched}")
        for k, v in self.timings.items():
            lines.append(f"time {k}={v:.3f}")
        lines.append(f"status {self.status}")
        lines.append(f"verdict {int(self.verdict)}")
        return "\n".join(lines) + "\n"


def verify_key(pub: LinearCode, x, y, r: int) -> bool:
    """True iff Alt_r(x, y) is the public code: V_r(x,y) G^T = 0 and the dimensions agree."""
    T = pub.tower
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.size != pub.n or y.size != pub.n:
        return False
    try:
        V = vandermonde(T.Fqm, r, x, y)
    except ValueError:
        return False
    if pub.dim and np.any(T.Fqm.dot(V, pub.basis.T)):
        return False
    return make_alternant(T, r, x, y).dim == pub.dim


def renormalize(E, x, y, r: int, xhat: Optional[int] = None):
    """Send the point at infinity to a finite point with f(z) = z / (z - xhat)."""
    x = np.asarray(x, dtype=np.int64)
    used = set(int(v) for v in x if v != INF)
    if xhat is None:
        free = [v for v in range(E.order) if v not in used]
        if not free:
            raise ValueError("support fills the field; no finite renormalization exists")
        xhat = free[0]
    elif xhat in used:
        raise ValueError("xhat must avoid the support")
    h = Homography(1, 0, 1, E.s_sub(0, xhat), 1)
    return apply_homography(E, h, x, y, r)


def _unwind(E, x, y, removed_x: Sequence[int]):
    """Divide y by prod (x - x_i), the factor at infinity being 1."""
    y = np.asarray(y, dtype=np.int64).copy()
    fin = x != INF
    for xi in removed_x:
        if xi == INF:
            raise AttackError("shortened position recovered at infinity", "heuristic")
        d = E.sub(x[fin], int(xi))
        if (d == 0).any():
            raise AttackError("support collision while unwinding", "heuristic")
        y[fin] = E.div(y[fin], d)
    return y


def _embed(n: int, alive: Sequence[int], vals: np.ndarray, fill: int = -2) -> np.ndarray:
    out = np.full(n, fill, dtype=np.int64)
    out[np.asarray(alive, dtype=np.int64)] = vals
    return out


def _run_branch(pub, r, pinned, cand, cfg, tr, tag):
    t0 = time.perf_counter()
    code, steps, removed = run_filtration(pub, r, 3, cand, cfg.retries)
    tr.timings[f"filtration{tag}"] = time.perf_counter() - t0
    alive = [i for i in range(pub.n) if i not in set(removed)]
    local_pin = [alive.index(p) for p in pinned]
    t0 = time.perf_counter()
    res = recover(pub.tower, code, local_pin, seed=cfg.seed)
    tr.timings[f"recovery{tag}"] = time.perf_counter() - t0
    return steps, removed, alive, res


def run_attack(pub: LinearCode, r: int, config: Optional[AttackConfig] = None) -> AttackTranscript:
    """Recover a support and multiplier of degree r defining the public code."""
    cfg = config or AttackConfig()
    T = pub.tower
    q, m, n = T.q, T.m, pub.n
    tr = AttackTranscript(q, m, n, r)
    t_start = time.perf_counter()
    if r < 3:
        raise AttackError("degree r must be at least 3", "param", tr)
    if n > T.Q or r * m >= n or pub.dim != n - r * m:
        raise AttackError("public code does not have alternant parameters", "param", tr)
    if r > 3 and q > 3:
        raise AttackError("filtration down to degree 3 needs q <= 3", "param", tr)
    if 2 * (r - 3) >= n - 3 * m:
        raise AttackError("too few positions for two disjoint shortening sets", "param", tr)

    _, colperm = la.systematic_form(T.Fq, pub.basis)
    order = [int(c) for c in colperm]
    pinned = tuple(order[-3:])
    tr.pinned = pinned
    E = T.Fqm

    if r > 3 and cfg.check_distinguisher:
        rep = measure(pub, order[0], r)
        tr.distinguisher = rep
        if not rep.distinguishable:
            tr.status = "undistinguishable"
            raise AttackError("square of the shortened dual has generic dimension", "undistinguishable", tr)

    try:
        if r == 3:
            t0 = time.perf_counter()
            res = recover(T, pub, pinned, seed=cfg.seed)
            tr.timings["recovery1"] = time.perf_counter() - t0
            tr.recovery1 = res.transcript
            tr.n_solutions = (len(res.solutions),)
            x, y = res.solutions[0]
            tr.matched = (0,)
        else:
            body = [c for c in order if c not in pinned]
            s = r - 3
            steps1, rem1, alive1, res1 = _run_branch(pub, r, pinned, body, cfg, tr, "1")
            tr.steps1, tr.I1, tr.recovery1 = steps1, rem1, res1.transcript
            rest = [c for c in body[s:] if c not in set(rem1)] + [c for c in body[:s] if c not in set(rem1)]
            steps2, rem2, alive2, res2 = _run_branch(pub, r, pinned, rest, cfg, tr, "2")
            tr.steps2, tr.I2, tr.recovery2 = steps2, rem2, res2.transcript
            tr.n_solutions = (len(res1.solutions), len(res2.solutions))
            x, y = _stitch(E, n, pub, order, rem1, alive1, res1.solutions, rem2, alive2, res2.solutions, tr)
    except FiltrationError as exc:
        tr.status = exc.kind
        kind = "undistinguishable" if exc.kind == "undistinguishable" else "heuristic"
        raise AttackError(str(exc), kind, tr) from exc
    except RecoveryError as exc:
        tr.status = "recovery-failed"
        tr.recovery1 = tr.recovery1 or exc.transcript
        raise AttackError(str(exc), "heuristic", tr) from exc

    tr.stitched = (x, y)
    try:
        xr, yr = renormalize(E, x, y, r)
    except ValueError as exc:
        tr.status = "renormalization-failed"
        raise AttackError(str(exc), "param", tr) from exc
    tr.key = (xr, yr)
    tr.verdict = verify_key(pub, xr, yr, r)
    tr.timings["total"] = time.perf_counter() - t_start
    tr.status = "ok" if tr.verdict else "verify-failed"
    if not tr.verdict:
        raise AttackError("recovered key does not define the public code", "heuristic", tr)
    return tr


def _stitch(E, n, pub, order, rem1, alive1, sols1, rem2, alive2, sols2, tr):
    """Match the two solution orbits and merge them into one full-length key."""
    t = 3 * pub.tower.m
    common = [c for c in order[-t:] if c not in set(rem1) | set(rem2)]
    cand1 = [_embed(n, alive1, x) for x, _ in sols1]
    cand2 = [_embed(n, alive2, x) for x, _ in sols2]
    match = None
    for a, xa in enumerate(cand1):
        for b, xb in enumerate(cand2):
            if np.array_equal(xa[common], xb[common]):
                match = (a, b)
                break
        if match:
            break
    if match is None:
        raise AttackError("no matching pair between the two solution sets", "heuristic", tr)
    tr.matched = match
    a, b = match
    x1, x2 = cand1[a], cand2[b]
    y1 = _embed(n, alive1, sols1[a][1], 0)
    y2 = _embed(n, alive2, sols2[b][1], 0)
    both = [c for c in range(n) if c not in set(rem1) | set(rem2)]
    if not np.array_equal(x1[both], x2[both]):
        raise AttackError("matched solutions disagree on shared positions", "heuristic", tr)
    x = x1.copy()
    x[rem1] = x2[rem1]
    if len(set(x.tolist())) != n:
        raise AttackError("stitched support has repeated points", "heuristic", tr)
    y = np.zeros(n, dtype=np.int64)
    a1 = np.asarray(alive1)
    a2 = np.asarray(rem1, dtype=np.int64)
    y[a1] = _unwind(E, x[a1], y1[a1], [int(x[i]) for i in rem1])
    y[a2] = _unwind(E, x[a2], y2[a2], [int(x[i]) for i in rem2])
    if (y == 0).any():
        raise AttackError("zero multiplier after unwinding", "heuristic", tr)
    return x, y


__all__ = ["AttackConfig", "AttackTranscript", "AttackError", "run_attack", "renormalize",
           "verify_key"]
