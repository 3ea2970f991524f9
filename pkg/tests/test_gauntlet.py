import numpy as np
import pytest

from cloakmat import (ZeaTrialReport, ind_zea_game, keygen_mmc, lei_encrypt, make_rng, mat_mul_naive,
                      mmc_encrypt, mmc_verify, tamper, zero_count)
from cloakmat.errors import ParameterError
from cloakmat.gauntlet import challenge_pair, encrypt_one
from conftest import WORKED_X


def test_zero_count_examples(worked_lei_key):
    assert zero_count(WORKED_X) == 2
    assert zero_count(lei_encrypt(worked_lei_key, WORKED_X, np.ones((3, 2))).x_enc) == 2
    assert zero_count(np.zeros((2, 3))) == 6
    with pytest.raises(ParameterError):
        zero_count(WORKED_X, 0.0)


def test_zero_count_relative_threshold():
    assert zero_count(np.array([[1e6, 1e-7]])) == 1
    assert zero_count(np.array([[1.0, 1e-7]])) == 0


def test_proposed_ciphertext_of_worked_x_has_no_zeros(rng):
    for _ in range(100):
        key = keygen_mmc(2, 3, 1, 16, rng)
        assert zero_count(mmc_encrypt(key, WORKED_X, np.ones((3, 1))).x_enc) == 0


def test_challenge_pair_shape(rng):
    t0, t1 = challenge_pair(10, 10, rng)
    assert zero_count(t0) == 30 and zero_count(t1) == 0


def test_lei_distinguisher_always_wins(rng):
    report = ind_zea_game("lei", 8, 8, 200, rng)
    assert report.wins == 200 and report.advantage == 0.5


def test_game_separation(rng):
    lei = ind_zea_game("lei", 16, 16, 500, rng)
    prop = ind_zea_game("proposed", 16, 16, 500, rng)
    assert lei.advantage >= 0.49
    assert prop.advantage <= 0.05
    assert lei.advantage - prop.advantage >= 0.4


def test_game_deterministic():
    a = ind_zea_game("proposed", 6, 6, 50, make_rng(3))
    b = ind_zea_game("proposed", 6, 6, 50, make_rng(3))
    assert a == b


def test_single_trial_advantage(rng):
    for scheme in ("lei", "proposed"):
        assert ind_zea_game(scheme, 4, 4, 1, rng).advantage in (0.0, 0.5)


def test_report_line():
    line = ZeaTrialReport("lei", 16, 16, 500, 500).line()
    assert line == "scheme=lei dims=16x16 trials=500 wins=500 advantage=0.5000"


def test_game_errors(rng):
    with pytest.raises(ParameterError):
        ind_zea_game("lei", 4, 4, 0, rng)
    with pytest.raises(ParameterError):
        ind_zea_game("rot13", 4, 4, 5, rng)
    with pytest.raises(ParameterError):
        encrypt_one("rot13", np.ones((2, 2)), 16, rng)


def test_tamper_single_entry(rng):
    t = np.array([[1.0, 2.0], [3.0, 4.0]])
    out = tamper(t, "single-entry", 0.01, rng)
    assert np.count_nonzero(out != t) == 1


def test_tamper_scale(rng):
    t = rng.standard_normal((3, 4))
    out = tamper(t, "scale", 0.25, rng)
    assert np.linalg.norm(out) / np.linalg.norm(t) == pytest.approx(1.25, rel=1e-14)


def test_tamper_row(rng):
    t = rng.standard_normal((5, 4))
    out = tamper(t, "row", 0.1, rng)
    changed = np.flatnonzero(np.any(out != t, axis=1))
    assert len(changed) == 1 and np.all(out[changed[0]] != t[changed[0]])


def test_tamper_never_identity_and_errors(rng):
    for mode in ("single-entry", "row", "scale"):
        t = rng.standard_normal((2, 2))
        assert not np.array_equal(tamper(t, mode, 1e-3, rng), t)
    with pytest.raises(ParameterError):
        tamper(np.empty((0, 2)), "row", 0.1, rng)
    with pytest.raises(ParameterError):
        tamper(np.ones((2, 2)), "row", 0.0, rng)
    with pytest.raises(ParameterError):
        tamper(np.ones((2, 2)), "shuffle", 0.1, rng)
    with pytest.raises(ParameterError):
        tamper(np.zeros((2, 2)), "scale", 0.1, rng)


def test_tampered_products_rejected(rng):
    x, y = rng.uniform(-1, 1, (12, 10)), rng.uniform(-1, 1, (10, 9))
    z = mat_mul_naive(x, y)
    for mode in ("single-entry", "row", "scale"):
        for _ in range(200 if mode == "single-entry" else 30):
            assert not mmc_verify(x, y, tamper(z, mode, 1e-3, rng), 20, rng)
