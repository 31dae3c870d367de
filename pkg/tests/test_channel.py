import math

import numpy as np
import pytest

from stlab.channel import (ChannelConfig, db_to_linear, derive_seed, frobenius_norm, make_rng,
                           sample_gaussian_matrix, theta_for, transmit)
from stlab.stcodes import LatticeKind, SignalSet, SpaceTimeCode, alamouti_code, code_preset, golden_code

QPSK = SignalSet(LatticeKind.Z_I, 1)


def test_seeded_matrix_reproducible():
    a = sample_gaussian_matrix(make_rng(42), 2)
    b = sample_gaussian_matrix(make_rng(42), 2)
    assert a.shape == (2, 2) and a.tobytes() == b.tobytes()


def test_box_muller_from_uniform_stream():
    # oracle: the documented transform applied to the raw uniform stream
    u = make_rng(42).random(8).reshape(4, 2)
    r = np.sqrt(-2 * np.log(1 - u[:, 0]))
    want = r * np.exp(2j * np.pi * u[:, 1]) / math.sqrt(2)
    assert np.allclose(sample_gaussian_matrix(make_rng(42), 2).ravel(), want, atol=1e-15)


def test_batch_equals_sequential():
    rng = make_rng(5)
    batch = sample_gaussian_matrix(rng, 2, (3,))
    rng = make_rng(5)
    seq = np.stack([sample_gaussian_matrix(rng, 2) for _ in range(3)])
    assert np.array_equal(batch, seq)


def test_gaussian_moments():
    h = sample_gaussian_matrix(make_rng(1), 1, (100_000,)).ravel()
    assert abs(h.mean()) <= 0.02
    assert 0.98 <= np.mean(np.abs(h) ** 2) <= 1.02
    # unit total variance split evenly
    assert abs(np.var(h.real) - 0.5) < 0.01 and abs(np.var(h.imag) - 0.5) < 0.01


def test_distinct_seeds_uncorrelated():
    a = make_rng(derive_seed(0, 0)).random(100_000)
    b = make_rng(derive_seed(0, 1)).random(100_000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.02


def test_derive_seed_deterministic_and_distinct():
    assert derive_seed(7, 3) == derive_seed(7, 3)
    seeds = {derive_seed(7, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert all(0 <= s < 2 ** 64 for s in seeds)


def test_db_conversion():
    assert db_to_linear(10) == 10 and db_to_linear(0) == 1
    assert math.isclose(ChannelConfig.from_db(2, 20).snr, 100)


def test_channel_config_validation():
    with pytest.raises(ValueError):
        ChannelConfig(0, 1.0)
    with pytest.raises(ValueError):
        ChannelConfig(2, 0.0)


def test_frobenius_norm_hand_cases():
    assert frobenius_norm(np.array([[1, 0], [0, 1]])) == math.sqrt(2)
    assert math.isclose(frobenius_norm(np.array([[1 + 1j, 2], [0, -3j]])), math.sqrt(15))


def test_theta_alamouti_closed_form():
    # ||X||^2 = 2(|s1|^2 + |s2|^2); E|s|^2 = 4/3 for the 3x3 box
    rho = 10.0
    e = 2 * 2 * (4 / 3)
    assert math.isclose(theta_for(alamouti_code(), QPSK, rho), math.sqrt(2 * rho / e), rel_tol=1e-12)


@pytest.mark.parametrize("name", ["alamouti", "golden", "cyclotomic2"])
def test_theta_scaling_law(name):
    code = code_preset(name)
    assert math.isclose(theta_for(code, QPSK, 20.0) / theta_for(code, QPSK, 10.0), math.sqrt(2))


@pytest.mark.parametrize("name", ["alamouti", "golden"])
def test_power_budget(name):
    code = code_preset(name)
    rho = 5.0
    theta = theta_for(code, QPSK, rho)
    rng = make_rng(3)
    msgs = rng.integers(-1, 2, size=(100_000, 2 * code.k))
    x = code.encode_real(msgs)
    energy = theta ** 2 * np.mean(np.sum(np.abs(x) ** 2, axis=(1, 2)))
    assert abs(energy - code.n * rho) <= 0.02 * code.n * rho


def test_theta_peak_mode():
    code = golden_code()
    peak = theta_for(code, QPSK, 10.0, "peak")
    x = code.encode_real(QPSK.messages(4) @ QPSK.coord_transform(4).T)
    emax = np.max(np.sum(np.abs(x) ** 2, axis=(1, 2)))
    assert math.isclose(peak ** 2 * emax, code.n * 10.0, rel_tol=1e-10)
    assert peak < theta_for(code, QPSK, 10.0)


def test_theta_errors():
    empty = SpaceTimeCode("zero", 2, 0, np.zeros((0, 2, 2), complex))
    with pytest.raises(ValueError):
        theta_for(empty, QPSK, 1.0)
    with pytest.raises(ValueError):
        theta_for(alamouti_code(), QPSK, 1.0, "median")


def test_transmit_noiseless_identity():
    x = np.array([[1 + 1j, 2], [0, -1j]])
    assert np.array_equal(transmit(x, np.eye(2), 1.0, noiseless=True), x)


def test_transmit_pure_noise():
    y = transmit(np.zeros((2, 2)), np.eye(2), 3.0, make_rng(9))
    assert np.array_equal(y, sample_gaussian_matrix(make_rng(9), 2))


def test_transmit_reproducible():
    h = sample_gaussian_matrix(make_rng(1), 2)
    x = alamouti_code().encode([1, 1j])
    a = transmit(x, h, 2.0, make_rng(4))
    b = transmit(x, h, 2.0, make_rng(4))
    assert a.tobytes() == b.tobytes()


def test_transmit_needs_rng_and_shapes():
    with pytest.raises(ValueError):
        transmit(np.eye(2), np.eye(2), 1.0)
    with pytest.raises(ValueError):
        transmit(np.eye(2), np.eye(3), 1.0, noiseless=True)
