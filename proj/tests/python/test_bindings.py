import math

import numpy as np
import pytest

import pmsn


def test_init_eigenvalues_have_half_damping():
    p = pmsn.init_params(5, 4, seed=3)
    assert p.modes == 4 and p.neurons == 4 and p.compartments == 5
    for z, dt in zip(p.lambda_dt, np.repeat(p.dt, p.modes)):
        assert z.real == pytest.approx(-0.5 * dt, abs=1e-12)


def test_serial_and_parallel_routes_agree():
    rng = np.random.default_rng(0)
    p = pmsn.init_params(5, 6, seed=1)
    x = rng.normal(0.5, 2.0, size=(3, 97, 6))
    par = pmsn.forward(p, x, mode="parallel")
    ser = pmsn.forward(p, x, mode="serial")
    assert par["S"].shape == (3, 97, 6)
    np.testing.assert_array_equal(par["S"], ser["S"])
    np.testing.assert_allclose(par["v_s"], ser["v_s"], atol=1e-9, rtol=0)
    assert set(np.unique(par["S"])) <= {0.0, 1.0}


def test_discharge_is_floor_of_cumulative_input():
    rng = np.random.default_rng(4)
    p = pmsn.init_params(3, 2, seed=2)
    out = pmsn.forward(p, rng.normal(0.3, 1.5, size=(2, 64, 2)))
    cum = np.cumsum(np.maximum(out["I_h"], 0.0), axis=1)
    np.testing.assert_allclose(np.cumsum(out["v_r"], axis=1), p.theta * np.floor(cum / p.theta), atol=1e-9)


def test_bad_shape_raises_value_error():
    p = pmsn.init_params(5, 2)
    with pytest.raises(ValueError):
        pmsn.forward(p, np.zeros((4, 2)))


def test_impulse_shape():
    p = pmsn.init_params(5, 2, seed=0)
    tr = pmsn.impulse(p, 50, neuron=1)
    assert tr["modes"].shape == (50, 4)
    assert np.all(np.isfinite(tr["v_s"]))


def test_energy_rows_are_exact_decimals():
    assert pmsn.energy_estimate("lif", 100, 64, 784, 1, 10).picojoules == "682393.6"
    assert pmsn.energy_estimate("pmsn", 100, 64, 784, 1, 10, n=5).picojoules == "7837491.2"
    assert pmsn.energy_estimate("psn", 100, 64, 784, 1, 10).picojoules == "181406310.4"
    row = pmsn.energy_estimate("spsn", 100, 64, 784, 1, 10, k=4)
    assert row.picojoules == "1374822.4"
    assert math.isclose(float(row.ac), 501760)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        pmsn.energy_estimate("gru", 1, 1, 1, 0, 1)
