import numpy as np
import pytest

from altattack.algebraic_codes import goppa_keygen, keygen
from altattack.code_ops import dual, star_product
from altattack.filtration import (FiltrationError, default_positions, expected_conductor,
                                  filtration_step, goppa_anomaly, run_filtration, verify_lemmas)


@pytest.fixture(scope="module")
def key354():
    return keygen(3, 5, 243, 4, 11)


def test_step_matches_expected_conductor(key354):
    # [DERIVED] the secret gives the conductor directly
    pub = key354.public_code()
    for i in (0, 17, 242):
        st = filtration_step(pub, 4, i)
        assert st.accepted and st.dim_X == 3 * 5
        assert st.X == expected_conductor(key354, [i])
        assert "accepted=1" in st.to_text()


def test_step_inclusion_holds(key354):
    from altattack.code_ops import shorten, square
    pub = key354.public_code()
    st = filtration_step(pub, 4, 5)
    A = dual(shorten(pub, [5]))
    B = square(shorten(dual(pub), [5]))
    assert star_product(st.X, A) <= B


def test_step_preconditions(key354):
    with pytest.raises(ValueError):
        filtration_step(key354.public_code(), 3, 0)


def test_step_outside_regime_is_flagged():
    key = keygen(3, 4, 81, 4, 0)
    with pytest.raises(FiltrationError) as exc:
        filtration_step(key.public_code(), 4, 0)
    assert exc.value.kind == "undistinguishable"


def test_run_filtration_one_step(key354):
    code, steps, removed = run_filtration(key354.public_code(), 4, 3, positions=[7, 8])
    assert removed == [7] and len(steps) == 1
    assert code == dual(expected_conductor(key354, [7]))
    assert code.n == 242 and code.dim == 242 - 15


@pytest.mark.slow
def test_run_filtration_two_steps():
    key = keygen(3, 6, 500, 5, 0)
    code, steps, removed = run_filtration(key.public_code(), 5, 3)
    assert [s.dim_X for s in steps] == [24, 18]
    assert dual(code) == expected_conductor(key, removed)


def test_run_filtration_arguments(key354):
    with pytest.raises(ValueError):
        run_filtration(key354.public_code(), 4, 2)
    with pytest.raises(FiltrationError):
        run_filtration(key354.public_code(), 4, 3, positions=[])
    assert default_positions(5, [1, 3]) == [0, 2, 4]
    with pytest.raises(ValueError):
        expected_conductor(key354, [1, 1])


@pytest.mark.parametrize("seed", range(3))
def test_lemmas(seed):
    # these are theorems; every key and position must pass
    key = keygen(3, 3, 27, 4, seed)
    rep = verify_lemmas(key, seed)
    assert rep["ok"], rep


def test_goppa_identities_small():
    key = goppa_keygen(3, 3, 27, 4, 0)
    rep = goppa_anomaly(key, 0, 1)
    assert rep["alt_r_plus_1"] and rep["shortening_i"] and rep["commutation"]
    with pytest.raises(ValueError):
        goppa_anomaly(key, 2, 2)
    with pytest.raises(ValueError):
        goppa_anomaly(keygen(3, 3, 27, 4, 0), 0, 1)


@pytest.mark.parametrize("q,m,n,r", [(3, 4, 81, 3), (2, 8, 256, 3)])
def test_goppa_conductor_keeps_degree(q, m, n, r):
    # in-regime Goppa keys: the conductor stays at degree r
    rep = goppa_anomaly(goppa_keygen(q, m, n, r, 1), 3, 9)
    assert rep["ok"], rep
    assert rep["conductor_dim"] == r * m
