"""Acceptance criteria, one test (or one group) per criterion.

Each test prints a single PASS/FAIL line.  Criteria that cannot be met
at the stated parameters are run as stated and marked strict xfail; a
labelled supplementary test then runs the same check at the nearest
parameters where the attack applies.
"""

import math
import time

import numpy as np
import pytest

from altattack import gf_linalg as la
from altattack.algebraic_codes import INF, goppa_keygen, keygen, make_grs
from altattack.attack_pipeline import AttackError, run_attack, verify_key
from altattack.cli_io import bench_recovery, loglog_slope
from altattack.code_ops import LinearCode, conductor, dual, shorten, square, star_product
from altattack.distinguisher import threshold_rhs
from altattack.field_tower import tower_for
from altattack.filtration import (FiltrationError, expected_conductor, filtration_step,
                                  goppa_anomaly, verify_lemmas)
from altattack.recovery_r3 import R3Solver, build_S, expected_rank_S, recover
from conftest import CRITERIA_LINES
from oracles import brute_conductor, brute_star, span

OMEGA = math.log2(7)


def report(capsys, label, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    CRITERIA_LINES.append(line)
    with capsys.disabled():
        print("\n" + line)
    return ok


def attack_seeds(q, m, n, r, seeds, budget):
    wins, times, bad = 0, [], []
    for s in seeds:
        key = keygen(q, m, n, r, s)
        pub = key.public_code()
        t0 = time.perf_counter()
        try:
            tr = run_attack(pub, r)
        except AttackError as exc:
            # a failure must come with a transcript and never with a verified key
            if exc.transcript is None or exc.transcript.verdict:
                bad.append(s)
            times.append(time.perf_counter() - t0)
            continue
        times.append(time.perf_counter() - t0)
        if verify_key(pub, *tr.key, r):
            wins += 1
        else:
            bad.append(s)
    slow = [t for t in times if t > budget]
    return wins, max(times), bad, slow


# 1

@pytest.mark.xfail(strict=True, reason="n = 81 is outside the distinguishable regime for "
                   "m = 4, r = 4: the shortened dual square is full (80), so no conductor step applies")
def test_c1_end_to_end_q3_filtration(capsys):
    rhs = threshold_rhs(3, 4, 4)
    wins, tmax, bad, slow = attack_seeds(3, 4, 81, 4, range(5), 120)
    ok = rhs == 76 and wins >= 4 and not bad and not slow
    report(capsys, "C1 end-to-end q=3 m=4 n=81 r=4", ok,
           f"rhs={rhs} verified={wins}/5 wrong_keys={len(bad)} max_time={tmax:.2f}s")
    assert ok


def test_c1_supplementary_in_regime(capsys):
    wins, tmax, bad, slow = attack_seeds(3, 5, 243, 4, range(5), 120)
    ok = wins >= 4 and not bad and not slow
    report(capsys, "C1-supp end-to-end q=3 m=5 n=243 r=4", ok,
           f"verified={wins}/5 wrong_keys={len(bad)} max_time={tmax:.2f}s")
    assert ok


# 2

def test_c2_end_to_end_q3_direct(capsys):
    wins, tmax, bad, slow = attack_seeds(3, 4, 81, 3, range(5), 30)
    ok = wins >= 4 and not bad and not slow
    report(capsys, "C2 end-to-end q=3 m=4 n=81 r=3", ok,
           f"verified={wins}/5 max_time={tmax:.2f}s")
    assert ok


# 3

@pytest.mark.slow
def test_c3_end_to_end_q2(capsys):
    wins, tmax, bad, slow = attack_seeds(2, 9, 360, 3, range(3), 300)
    ok = wins >= 2 and not bad and not slow
    report(capsys, "C3 end-to-end q=2 m=9 n=360 r=3", ok,
           f"verified={wins}/3 max_time={tmax:.2f}s")
    assert ok


# 4

def rank_of_S(key):
    G, _ = la.systematic_form(key.tower.Fq, key.G)
    return la.rank(key.tower.Fq, build_S(key.tower.Fq, G[:, key.k:]).matrix)


def rank_ledger(q, m, n):
    want = expected_rank_S(q, m)
    ranks = [rank_of_S(keygen(q, m, n, 3, s)) for s in range(10)]
    return want, ranks, sum(r == want for r in ranks)


@pytest.mark.parametrize("q,m,n", [
    pytest.param(3, 3, 27, marks=pytest.mark.xfail(
        strict=True, reason="n <= 27 gives k <= 18 rows, fewer than the 33 the rank needs")),
    (3, 4, 81),
    pytest.param(2, 6, 64, marks=pytest.mark.xfail(
        strict=True, reason="n <= 64 gives k <= 46 rows, fewer than the 135 the rank needs")),
    (2, 9, 360),
])
def test_c4_rank_ledger(capsys, q, m, n):
    want, ranks, hits = rank_ledger(q, m, n)
    ok = hits >= 9
    report(capsys, f"C4 rank of S' q={q} m={m} n={n}", ok,
           f"expected={want} measured={sorted(set(ranks))} hits={hits}/10")
    assert ok


# 5

def test_c5_subspace_dims(capsys):
    m = 4
    hits3 = 0
    for s in range(10):
        key = keygen(3, m, 81, 3, s)
        sol = R3Solver(key.tower, key.public_code(), (78, 79, 80))
        try:
            sol.echelonize()
            sol.all_Vj()
            sums = {sol.dim_V_sum(a, b) for a, b in [(0, 1), (2, 7), (5, 10)]}
            sol.all_U()
        except Exception:
            continue
        hits3 += (set(sol.transcript["dim_V"].values()) == {2 * m - 1} and sums == {4 * m - 2}
                  and sol.transcript["sum_dim_U"] == m * (3 * m - 2))
    hits2 = 0
    for s in range(10):
        key = keygen(2, 9, 360, 3, s)
        sol = R3Solver(key.tower, key.public_code(), (357, 358, 359))
        try:
            sol.echelonize()
            sol.all_Vj()
        except Exception:
            continue
        hits2 += set(sol.transcript["dim_V"].values()) == {8}
    ok = hits3 >= 9 and hits2 >= 9
    report(capsys, "C5 subspace dimensions", ok, f"q=3 m=4 {hits3}/10, q=2 m=9 {hits2}/10")
    assert ok


# 6

def conductor_trials(q, m, n, r, trials):
    ident = incl = 0
    for t in range(trials):
        key = keygen(q, m, n, r, 100 + t)
        pub = key.public_code()
        i = (7 * t) % n
        A = dual(shorten(pub, [i]))
        B = square(shorten(dual(pub), [i]))
        X = conductor(A, B)
        incl += star_product(X, A) <= B
        try:
            st = filtration_step(pub, r, i)
            ident += st.X == expected_conductor(key, [i])
        except FiltrationError:
            pass
    return ident, incl


@pytest.mark.xfail(strict=True, reason="with n <= q^m, q = 3 and m in {3, 4} never reach the "
                   "distinguishable regime at r = 4 or 5, so the conductor keeps full dimension")
def test_c6_conductor_identity(capsys):
    rows = []
    ok = True
    for m, r in [(3, 4), (3, 5), (4, 4), (4, 5)]:
        ident, incl = conductor_trials(3, m, 3 ** m, r, 10)
        rows.append(f"m={m} r={r} identity={ident}/10 inclusion={incl}/10")
        ok &= ident >= 9 and incl == 10
    report(capsys, "C6 conductor identity q=3 m in {3,4}", ok, "; ".join(rows))
    assert ok


def test_c6_inclusion_stated_parameters(capsys):
    incl_all = []
    for m, r in [(3, 4), (4, 4)]:
        _, incl = conductor_trials(3, m, 3 ** m, r, 10)
        incl_all.append(incl)
    ok = all(v == 10 for v in incl_all)
    report(capsys, "C6 inclusion star(X,A) in B at stated parameters", ok, f"{incl_all}")
    assert ok


def test_c6_supplementary_in_regime(capsys):
    ident, incl = conductor_trials(3, 5, 243, 4, 10)
    ok = ident >= 9 and incl == 10
    report(capsys, "C6-supp conductor identity q=3 m=5 n=243 r=4", ok,
           f"identity={ident}/10 inclusion={incl}/10")
    assert ok


# 7

def test_c7_grs_square_law(capsys):
    rng = np.random.default_rng(7)
    fields = [tower_for(2, 4), tower_for(3, 3), tower_for(3, 4)]
    count = good = 0
    for inst in range(50):
        T = fields[inst % 3]
        n = int(rng.integers(4, min(T.Q, 24) + 1))
        x = rng.choice(T.Q, n, replace=False).astype(np.int64)
        if inst % 5 == 0:
            x[0] = INF
        y = rng.integers(1, T.Q, n)
        for k in range(1, n + 1):
            count += 1
            good += square(make_grs(T, k, x, y)).dim == min(n, 2 * k - 1)
    ok = good == count
    report(capsys, "C7 GRS square law", ok, f"{good}/{count} (50 instances, all k)")
    assert ok


# 8

def goppa_runs(q, m, n, r, keys):
    eqs = kept = 0
    dims = []
    for s in range(keys):
        rep = goppa_anomaly(goppa_keygen(q, m, n, r, s), 1, 2)
        eqs += rep["alt_r_plus_1"] and rep["shortening_i"] and rep["commutation"]
        kept += rep["conductor_degree_kept"]
        dims.append(rep["conductor_dim"])
    return eqs, kept, dims


def test_c8_goppa_identities(capsys):
    eqs, _, _ = goppa_runs(3, 3, 27, 4, 10)
    ok = eqs == 10
    report(capsys, "C8 Goppa shortening identities q=3 m=3 n=27 r=4", ok, f"{eqs}/10")
    assert ok


@pytest.mark.xfail(strict=True, reason="at n = 27 the shortened dual square is full, so the "
                   "conductor is the whole space (dim 26) instead of dimension r*m = 12")
def test_c8_goppa_conductor_degree(capsys):
    _, kept, dims = goppa_runs(3, 3, 27, 4, 10)
    ok = kept >= 9
    report(capsys, "C8 Goppa conductor dim = r*m q=3 m=3 n=27 r=4", ok,
           f"{kept}/10 dims={sorted(set(dims))}")
    assert ok


def test_c8_supplementary_in_regime(capsys):
    eqs, kept, dims = goppa_runs(3, 5, 243, 4, 10)
    ok = eqs == 10 and kept >= 9
    report(capsys, "C8-supp Goppa q=3 m=5 n=243 r=4", ok,
           f"identities={eqs}/10 degree_kept={kept}/10 dims={sorted(set(dims))}")
    assert ok


# 9

def test_c9_lemma_suite(capsys):
    good = 0
    for s in range(10):
        key = keygen(3, 3, 27, 4, s)
        good += verify_lemmas(key, s % 27)["ok"]
    ok = good == 10
    report(capsys, "C9 lemma suite q=3 m=3 n=27 r=4", ok, f"{good}/10")
    assert ok


# 10

def test_c10_frobenius_orbit(capsys):
    good = 0
    for s in range(10):
        key = keygen(3, 4, 81, 3, s)
        res = recover(key.tower, key.public_code())
        xs = {tuple(x.tolist()) for x, _ in res.solutions}
        frob = set()
        for x, _ in res.solutions:
            v = x.copy()
            fin = v != INF
            v[fin] = key.tower.frobenius(v[fin], 1)
            frob.add(tuple(v.tolist()))
        good += len(res.solutions) == 4 and len(xs) == 4 and frob == xs
    ok = good == 10
    report(capsys, "C10 Frobenius orbit of m solutions", ok, f"{good}/10")
    assert ok


# 11

def test_c11_oracle_equivalence(capsys):
    T = tower_for(2, 1)
    rng = np.random.default_rng(11)
    good = 0
    pairs = 120
    for _ in range(pairs):
        n = int(rng.integers(1, 9))
        C = LinearCode(T, rng.integers(0, 2, (int(rng.integers(1, 5)), n)), n=n)
        D = LinearCode(T, rng.integers(0, 2, (int(rng.integers(1, 5)), n)), n=n)
        cb, db = C.basis.tolist(), D.basis.tolist()
        s_ok = span(star_product(C, D).basis.tolist(), 2, n) == brute_star(cb, db, 2, n)
        c_ok = span(conductor(C, D).basis.tolist(), 2, n) == brute_conductor(cb, db, 2, n)
        good += s_ok and c_ok
    ok = good == pairs
    report(capsys, "C11 conductor/star vs enumeration q=2 n<=8", ok, f"{good}/{pairs}")
    assert ok


# 12

def scaling(ms):
    rows = bench_recovery(3, ms, seed=0, reps=3)
    done = [(m, t) for m, _, t in rows if t is not None]
    slope = loglog_slope([m for m, _ in done], [t for _, t in done]) if len(done) >= 2 else math.nan
    return rows, slope


@pytest.mark.xfail(strict=True, reason="m = 3 has no in-regime length (Step 1 needs n >= 42 > 27), "
                   "so recovery fails there and the fit cannot include it")
def test_c12_scaling(capsys):
    rows, slope = scaling([3, 4, 5, 6])
    ok = all(t is not None for *_, t in rows) and slope <= 2 * OMEGA + 1
    report(capsys, "C12 scaling m in {3,4,5,6}", ok,
           " ".join(f"m={m}:{'fail' if t is None else f'{t:.3f}s'}" for m, _, t in rows)
           + f" slope={slope:.2f}")
    assert ok


def test_c12_supplementary(capsys):
    rows, slope = scaling([4, 5, 6, 7])
    ok = all(t is not None for *_, t in rows) and slope <= 2 * OMEGA + 1
    report(capsys, "C12-supp scaling m in {4,5,6,7}", ok,
           " ".join(f"m={m}:{t:.3f}s" for m, _, t in rows)
           + f" slope={slope:.2f} bound={2 * OMEGA:.2f}+1")
    assert ok
