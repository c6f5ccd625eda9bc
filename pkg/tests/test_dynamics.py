import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pmcontrol import dynamics, qcore
from pmcontrol.basis import ControlField, rectangular_pulse
from pmcontrol.dynamics import EnsembleModel, NoiseModel
from pmcontrol.qcore import DOWN, UP

from oracles import dephased_coherence, rabi_transfer

MHZ = 2 * math.pi * 1e6
OMEGA = 10 * MHZ
TP = 50e-9


def zero_field(T=100e-9):
    return ControlField("pm", 1, (0.0, 0.0, 0.0), T)


def test_zero_field_is_identity():
    U = dynamics.propagate_unitary(zero_field(), 0.0)
    assert np.max(np.abs(U - np.eye(2))) < 1e-15


def test_alpha_zero_gives_free_precession():
    delta, T = 3.3 * MHZ, 80e-9
    U = dynamics.propagate_unitary(rectangular_pulse(OMEGA, T), delta, alpha=0.0)
    expected = np.diag([np.exp(-0.5j * delta * T), np.exp(0.5j * delta * T)])
    assert np.max(np.abs(U - expected)) < 1e-12


def test_rabi_oracle_across_detunings():
    deltas = np.linspace(-20 * MHZ, 20 * MHZ, 50)
    p = dynamics.transfer_probabilities(rectangular_pulse(OMEGA, TP), deltas, dt=TP / 4000)
    assert np.max(np.abs(p - rabi_transfer(OMEGA, deltas, TP))) < 1e-8


def test_pi_pulse_on_resonance_flips_state():
    psi = dynamics.propagate_state(rectangular_pulse(OMEGA, TP), 0.0)
    assert abs(abs(psi[0]) ** 2 - 1) < 1e-10
    assert abs(np.linalg.norm(psi) - 1) < 1e-10


def test_second_order_convergence():
    f = ControlField("sfb", 1, (OMEGA, 2 * math.pi * 17e6, 0.3), TP)
    ref = dynamics.propagate_unitary(f, 4 * MHZ, dt=TP / 8000)
    errs = [np.max(np.abs(dynamics.propagate_unitary(f, 4 * MHZ, dt=TP / n) - ref))
            for n in (50, 100)]
    assert errs[0] / errs[1] >= 3.5


def test_second_order_convergence_of_transfer():
    # a constant drive is integrated exactly, so convergence needs a time-dependent phase
    f = ControlField("pm", 1, (OMEGA, 30 * MHZ, 15 * MHZ), TP)
    ref = dynamics.transfer_probabilities(f, 2 * MHZ, dt=TP / 16000)
    e1 = abs(dynamics.transfer_probabilities(f, 2 * MHZ, dt=TP / 100) - ref)
    e2 = abs(dynamics.transfer_probabilities(f, 2 * MHZ, dt=TP / 200) - ref)
    assert e1 / e2 >= 3.5


def test_composition_of_half_intervals():
    f = ControlField("sfb_p", 1, (OMEGA, 5 * MHZ, 0.0), 100e-9)
    delta = 2 * MHZ
    full = dynamics.propagate_unitary(f, delta, dt=1e-10)
    first = dynamics.propagate_unitary(f, delta, T=50e-9, dt=1e-10)
    # the second half starts at t = T/2: shift the phase by w * T/2
    second_half = ControlField("sfb_p", 1, (OMEGA, 5 * MHZ, 5 * MHZ * 50e-9), 50e-9)
    second = dynamics.propagate_unitary(second_half, delta, dt=1e-10)
    assert np.max(np.abs(second @ first - full)) < 1e-9


def test_dt_larger_than_horizon_raises():
    with pytest.raises(ValueError):
        dynamics.propagate_unitary(rectangular_pulse(OMEGA, TP), 0.0, dt=2 * TP)
    with pytest.raises(ValueError):
        dynamics.propagate_unitary(rectangular_pulse(OMEGA, TP), 0.0, dt=0.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(-30, 30), st.floats(0.2, 1.8), st.lists(st.floats(-1, 1), min_size=6, max_size=6))
def test_propagators_are_unitary(delta_mhz, alpha, raw):
    f = ControlField("pm", 2, np.array(raw) * np.array([OMEGA, 60 * MHZ, 60 * MHZ] * 2), 100e-9)
    U = dynamics.propagate_unitary(f, delta_mhz * MHZ, alpha)
    assert qcore.is_unitary(U, 1e-9)


# -- Lindblad ----------------------------------------------------------------

@settings(max_examples=10, deadline=None)
@given(st.floats(-20, 20), st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_lindblad_without_dephasing_matches_unitary(delta_mhz, raw):
    f = ControlField("sfb_p2", 1, np.array(raw) * np.array([OMEGA, 50 * MHZ, 6.3, 6.3]), 100e-9)
    psi = dynamics.propagate_state(f, delta_mhz * MHZ, dt=1e-10)
    rho = dynamics.propagate_lindblad(f, delta_mhz * MHZ, gamma=0.0, dt=1e-10)
    assert np.max(np.abs(rho - qcore.density(psi))) < 1e-8


def test_pure_dephasing_matches_analytic_decay():
    gamma, T = 2e6, 1e-6
    plus = np.array([1, 1]) / math.sqrt(2)
    rho0 = qcore.density(plus)
    rho = dynamics.propagate_lindblad(zero_field(T), 0.0, gamma=gamma, T=T, dt=T / 4000, rho0=rho0)
    assert abs(rho[0, 1] - dephased_coherence(rho0[0, 1], gamma, T)) < 1e-6


def test_dephasing_keeps_populations_without_field():
    rho0 = np.array([[0.3, 0.2 - 0.1j], [0.2 + 0.1j, 0.7]])
    rho = dynamics.propagate_lindblad(zero_field(), 7 * MHZ, gamma=3e6, rho0=rho0)
    assert abs(rho[0, 0] - 0.3) < 1e-12 and abs(rho[1, 1] - 0.7) < 1e-12


def test_lindblad_trace_hermiticity_positivity():
    f = ControlField("pm", 1, (OMEGA, 20 * MHZ, 5 * MHZ), 1e-6)
    rho = dynamics.propagate_lindblad(f, 3 * MHZ, gamma=2 * math.pi * 2e6, dt=1e-9)
    assert abs(np.trace(rho) - 1) < 1e-8
    assert qcore.is_hermitian(rho)
    assert np.min(np.linalg.eigvalsh(rho)) > -1e-8


def test_negative_gamma_rejected():
    with pytest.raises(ValueError):
        dynamics.propagate_lindblad(zero_field(), 0.0, gamma=-1.0)


# -- ensembles ---------------------------------------------------------------

def test_ensemble_width_relation():
    m = EnsembleModel.from_fwhm(10 * MHZ)
    assert m.W / m.sigma == pytest.approx(2 * math.sqrt(2 * math.log(2)), rel=1e-12)
    with pytest.raises(ValueError):
        EnsembleModel(1.0, 0)


def test_grid_detunings():
    W = 10 * MHZ
    deltas, w = dynamics.grid_detunings(EnsembleModel.from_fwhm(W, 15))
    assert deltas[0] == pytest.approx(-W) and deltas[-1] == pytest.approx(W)
    assert np.allclose(np.diff(deltas), 2 * W / 14)
    assert abs(w.sum() - 1) < 1e-12
    assert np.max(np.abs(w - w[::-1])) < 1e-12
    d1, w1 = dynamics.grid_detunings(EnsembleModel.from_fwhm(W, 1))
    assert d1.tolist() == [0.0] and w1.tolist() == [1.0]


def test_random_detunings_statistics_and_determinism():
    model = EnsembleModel.from_fwhm(10 * MHZ, K=100_000)
    d = dynamics.random_detunings(model, 11)
    assert abs(d.mean()) < 4 * model.sigma / math.sqrt(model.K)
    assert d.std() == pytest.approx(model.sigma, rel=0.02)
    assert np.array_equal(d, dynamics.random_detunings(model, 11))


# -- OU noise ----------------------------------------------------------------

def test_ou_without_diffusion_decays_exponentially():
    tau, dt = 2e-6, 1e-7
    x = dynamics.ou_trajectory(tau, 0.0, dt, 50, seed=1, delta0=3.0)
    assert np.allclose(x, 3.0 * np.exp(-np.arange(51) * dt / tau), rtol=1e-12)


def test_ou_stationary_variance_and_autocorrelation():
    tau, std = 20e-6, 2 * math.pi * 50e3
    noise = NoiseModel.from_ou_std(tau, std)
    dt = tau / 20
    x = dynamics.ou_trajectory(tau, noise.c, dt, 2_000_000, seed=4, delta0=0.0)
    assert np.var(x) == pytest.approx(noise.c * tau / 2, rel=0.05)
    lag = 20
    xc = x - x.mean()
    rho = np.dot(xc[:-lag], xc[lag:]) / np.dot(xc, xc)
    assert rho == pytest.approx(math.exp(-1), rel=0.10)


def test_ou_deterministic_and_validated():
    a = dynamics.ou_trajectory(1e-6, 1.0, 1e-8, 100, seed=3)
    assert np.array_equal(a, dynamics.ou_trajectory(1e-6, 1.0, 1e-8, 100, seed=3))
    with pytest.raises(ValueError):
        dynamics.ou_trajectory(0.0, 1.0, 1e-8, 10, seed=0)


def test_ou_filter_with_variable_steps_matches_stepwise_update():
    rng = np.random.default_rng(0)
    tau, c = 3e-6, 5e12
    dts = np.concatenate([np.full(7, 1e-8), np.full(5, 4e-8), np.full(3, 1e-8)])
    noise = rng.standard_normal((2, dts.size))
    x0 = np.array([0.5, -1.0])
    out = dynamics.ou_filter(x0, noise, dts, tau, c)
    x = x0.copy()
    for k, h in enumerate(dts):
        assert np.allclose(out[:, k], x, rtol=1e-12, atol=1e-12)
        r = math.exp(-h / tau)
        x = r * x + math.sqrt(c * tau / 2 * (1 - r * r)) * noise[:, k]


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(gamma=-1.0)
    n = NoiseModel.from_ou_std(20e-6, 2 * math.pi * 50e3)
    assert n.ou_std == pytest.approx(2 * math.pi * 50e3, rel=1e-12)


def test_task_rng_streams_are_independent_of_order():
    a = dynamics.task_rng(5, 3).random(4)
    dynamics.task_rng(5, 2).random(4)
    assert np.array_equal(a, dynamics.task_rng(5, 3).random(4))
    assert not np.array_equal(a, dynamics.task_rng(5, 4).random(4))


def test_transfer_from_down_is_b_squared():
    f = ControlField("pm", 1, (OMEGA, 20 * MHZ, 5 * MHZ), 100e-9)
    psi = dynamics.propagate_state(f, 1.5 * MHZ, psi0=DOWN)
    p = dynamics.transfer_probabilities(f, 1.5 * MHZ)
    assert abs(qcore.state_fidelity(UP, psi) - p) < 1e-12
