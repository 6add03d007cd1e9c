import numpy as np
import pytest

from altattack.algebraic_codes import INF, keygen, make_alternant
from altattack.attack_pipeline import (AttackConfig, AttackError, renormalize, run_attack,
                                       verify_key)
from altattack.field_tower import tower_for

E = tower_for(3, 4).Fqm


def test_renormalize_sends_infinity_to_one_and_keeps_code():
    # [PAPER] f(z) = z / (z - xhat): 0 stays 0, infinity goes to 1
    key = keygen(3, 4, 40, 3, 0)
    x = key.x.copy()
    x[5] = INF
    y = key.y
    xr, yr = renormalize(E, x, y, 3)
    assert xr[5] == 1
    assert (xr != INF).all()
    zero = np.flatnonzero(x == 0)
    assert all(xr[i] == 0 for i in zero)
    assert make_alternant(key.tower, 3, x, y) == make_alternant(key.tower, 3, xr, yr)


def test_renormalize_rejects_bad_xhat():
    x = np.array([0, 1, INF])
    with pytest.raises(ValueError):
        renormalize(E, x, np.ones(3, dtype=np.int64), 3, xhat=1)
    full = np.concatenate([np.arange(81), [INF]])
    with pytest.raises(ValueError):
        renormalize(E, full, np.ones(82, dtype=np.int64), 3)


def test_verify_key_rejects_tampering():
    key = keygen(3, 4, 81, 3, 2)
    pub = key.public_code()
    assert verify_key(pub, key.x, key.y, 3)
    y = key.y.copy()
    y[0] = E.s_add(int(y[0]), 1) or 1
    assert not verify_key(pub, key.x, y, 3)
    x = key.x.copy()
    x[0], x[1] = x[1], x[0]
    assert not verify_key(pub, x, key.y, 3)
    assert not verify_key(pub, key.x[:-1], key.y[:-1], 3)
    assert not verify_key(pub, np.zeros(81, dtype=np.int64), key.y, 3)


@pytest.mark.parametrize("seed", range(2))
def test_attack_degree3(seed):
    key = keygen(3, 4, 81, 3, seed)
    tr = run_attack(key.public_code(), 3)
    assert tr.verdict and tr.status == "ok"
    xr, yr = tr.key
    assert (xr != INF).all()
    assert "verdict 1" in tr.to_text()


def test_attack_degree4_in_regime():
    key = keygen(3, 5, 243, 4, 1)
    tr = run_attack(key.public_code(), 4, AttackConfig(seed=1))
    assert tr.verdict
    assert len(tr.I1) == len(tr.I2) == 1 and not set(tr.I1) & set(tr.I2)
    assert tr.distinguisher.distinguishable


@pytest.mark.slow
def test_attack_degree5():
    key = keygen(3, 6, 500, 5, 0)
    tr = run_attack(key.public_code(), 5)
    assert tr.verdict and len(tr.I1) == 2


def test_attack_undistinguishable_exits_with_reason():
    key = keygen(3, 4, 81, 4, 0)
    with pytest.raises(AttackError) as exc:
        run_attack(key.public_code(), 4)
    assert exc.value.kind == "undistinguishable"
    assert exc.value.transcript.key is None


def test_attack_parameter_errors():
    key = keygen(3, 4, 81, 3, 0)
    with pytest.raises(AttackError) as exc:
        run_attack(key.public_code(), 2)
    assert exc.value.kind == "param"
    with pytest.raises(AttackError) as exc:
        run_attack(key.public_code(), 4)
    assert exc.value.kind == "param"
    k4 = keygen(4, 3, 64, 4, 0)
    with pytest.raises(AttackError) as exc:
        run_attack(k4.public_code(), 4)
    assert exc.value.kind == "param"


def test_attack_heuristic_failure_keeps_transcript():
    # too short for Step 1: the attack aborts as a heuristic failure with a transcript
    key = keygen(3, 3, 27, 3, 0)
    with pytest.raises(AttackError) as exc:
        run_attack(key.public_code(), 3)
    assert exc.value.kind == "heuristic"
    assert exc.value.transcript.status == "recovery-failed"
    assert "rank_S" in exc.value.transcript.recovery1
