import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from altattack.algebraic_codes import INF, keygen
from altattack.attack_pipeline import verify_key
from altattack.field_tower import build_tower, tower_for
from altattack.recovery_r3 import (RecoveryError, build_S, build_specialized, expected_rank_S,
                                   minimal_polynomial, poly_roots, recover, specialized_secret,
                                   z_pairs)
from altattack import gf_linalg as la
from oracles import naive_rank

F3 = build_tower(3, 1, 1).Fq


def frob(tower, v):
    v = np.asarray(v)
    out = v.copy()
    fin = v != INF
    out[fin] = tower.frobenius(v[fin], 1)
    return out


def assert_orbit(tower, sols):
    xs = [tuple(x.tolist()) for x, _ in sols]
    assert len(set(xs)) == tower.m
    assert {tuple(frob(tower, x).tolist()) for x, _ in sols} == set(xs)


@settings(max_examples=40)
@given(st.integers(1, 6), st.integers(0, 10 ** 6))
def test_minimal_polynomial_annihilates(n, seed):
    # [DERIVED] p(A) e0 = 0 and no lower-degree combination exists
    A = np.random.default_rng(seed).integers(0, 3, (n, n))
    p = minimal_polynomial(F3, A)
    e0 = np.zeros(n, dtype=np.int64)
    e0[0] = 1
    krylov = [e0]
    for _ in range(len(p) - 1):
        krylov.append(F3.dot(A, krylov[-1].reshape(-1, 1)).reshape(-1))
    acc = np.zeros(n, dtype=np.int64)
    for c, v in zip(p, krylov):
        acc = F3.add(acc, F3.mul(v, c))
    assert not acc.any()
    assert naive_rank(krylov[:-1], 3) == len(p) - 1


def test_poly_roots():
    E = tower_for(3, 2).Fqm
    a, b = 4, 7
    # (z - a)(z - b)
    poly = [E.s_mul(a, b), E.s_sub(0, E.s_add(a, b)), 1]
    assert sorted(poly_roots(E, poly)) == [a, b]


def test_z_pairs_and_specialized_shapes():
    assert z_pairs(4) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    P = np.arange(12).reshape(3, 4) % 3
    S = build_S(F3, P)
    assert S.matrix.shape == (3, 6)
    assert S.matrix[1, 0] == (P[1, 0] * P[1, 1]) % 3
    sp, bp = build_specialized(F3, P, 2)
    assert sp.tag == "S'" and bp.tag == "B'"
    assert build_specialized(F3, P, 9).tag == "S'"


@pytest.mark.parametrize("seed", range(3))
def test_rank_ledger_q3(seed):
    # [DERIVED] numpy rank versus a hand-written elimination
    key = keygen(3, 4, 81, 3, seed)
    res = recover(key.tower, key.public_code())
    tr = res.transcript
    assert tr["rank_S"] == expected_rank_S(3, 4) == 62
    G, perm = la.systematic_form(key.tower.Fq, key.G)
    S = build_S(key.tower.Fq, G[:, key.k:])
    assert naive_rank(S.matrix.tolist(), 3) == 62


def test_specialized_secret():
    key = keygen(3, 4, 81, 3, 4)
    pin = (10, 20, 30)
    xs, ys = specialized_secret(key.tower, key.x, key.y, pin)
    assert (xs[10], xs[20], xs[30]) == (0, 1, INF)
    assert ys[30] == 1
    assert verify_key(key.public_code(), xs, ys, 3)


@pytest.mark.parametrize("seed", range(1, 4))
def test_recovery_q3(seed):
    key = keygen(3, 4, 81, 3, seed)
    pub = key.public_code()
    res = recover(key.tower, pub, secret=(key.x, key.y))
    tr = res.transcript
    m = 4
    assert tr["linear_rows"] == 2 * m - 1
    assert set(tr["dim_V"].values()) == {2 * m - 1}
    assert tr["sum_dim_U"] == m * (3 * m - 2)
    assert tr["standard_monomials"] == m and tr["eliminant_degree"] == m
    assert_orbit(key.tower, res.solutions)
    assert all(verify_key(pub, x, y, 3) for x, y in res.solutions)
    xs, _ = specialized_secret(key.tower, key.x, key.y, (78, 79, 80))
    assert any(np.array_equal(x, xs) for x, _ in res.solutions)


def test_recovery_q3_m5_custom_pins():
    key = keygen(3, 5, 243, 3, 2)
    res = recover(key.tower, key.public_code(), pinned=(0, 5, 100))
    assert len(res.solutions) == 5
    x, y = res.solutions[0]
    assert (x[0], x[5], x[100]) == (0, 1, INF)
    assert verify_key(key.public_code(), x, y, 3)


def test_recovery_q4():
    key = keygen(4, 3, 64, 3, 0)
    res = recover(key.tower, key.public_code(), secret=(key.x, key.y))
    assert len(res.solutions) == 3
    assert_orbit(key.tower, res.solutions)
    assert all(verify_key(key.public_code(), x, y, 3) for x, y in res.solutions)


@pytest.mark.slow
def test_recovery_q2():
    key = keygen(2, 9, 360, 3, 1)
    res = recover(key.tower, key.public_code(), secret=(key.x, key.y))
    tr = res.transcript
    assert tr["rank_S"] == expected_rank_S(2, 9)
    assert set(tr["dim_V"].values()) == {8}
    assert len(res.solutions) == 9
    assert_orbit(key.tower, res.solutions)
    assert all(verify_key(key.public_code(), x, y, 3) for x, y in res.solutions)


def test_recovery_fails_loudly_when_too_short():
    key = keygen(3, 3, 27, 3, 0)
    with pytest.raises(RecoveryError) as exc:
        recover(key.tower, key.public_code())
    assert "rank_S" in exc.value.transcript


def test_dump_dir(tmp_path):
    key = keygen(3, 4, 81, 3, 1)
    recover(key.tower, key.public_code(), dump_dir=str(tmp_path))
    assert (tmp_path / "S.mat").exists()
    assert "rank_S=62" in (tmp_path / "recovery.transcript").read_text()
