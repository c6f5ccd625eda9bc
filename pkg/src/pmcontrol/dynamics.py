"""Time evolution of single two-level systems and of detuning ensembles.

The interaction-picture Hamiltonian for detuning ``delta`` and amplitude
scaling ``alpha`` is ``(delta/2) sz + alpha [(Re c/2) sx + (Im c/2) sy]``.
The envelope is sampled at step midpoints and each step is exponentiated
exactly, so propagators stay unitary to machine precision (second order in dt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from . import _kernels, qcore
from .basis import ControlField, complex_envelope

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))
DEFAULT_STEPS = 2000


@dataclass(frozen=True)
class EnsembleModel:
    """Gaussian detuning law with a discrete grid (M points) and a Monte-Carlo size (K)."""

    sigma: float
    M: int = 15
    K: int = 100_000

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.M < 1 or self.K < 1:
            raise ValueError("M and K must be at least 1")

    @classmethod
    def from_fwhm(cls, W, M=15, K=100_000) -> "EnsembleModel":
        return cls(W / FWHM_PER_SIGMA, M, K)

    @property
    def W(self) -> float:
        return FWHM_PER_SIGMA * self.sigma

    def pdf(self, delta):
        s = self.sigma
        return np.exp(-0.5 * (np.asarray(delta) / s) ** 2) / (math.sqrt(2 * math.pi) * s)


@dataclass(frozen=True)
class NoiseModel:
    """Dephasing rate (1/s), OU relaxation time (s) and diffusion (rad^2/s^3), static FWHM (rad/s)."""

    gamma: float = 0.0
    tau: float = 0.0
    c: float = 0.0
    static_fwhm: float = 0.0

    def __post_init__(self):
        for name in ("gamma", "tau", "c", "static_fwhm"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def from_ou_std(cls, tau, std, static_fwhm=0.0, gamma=0.0) -> "NoiseModel":
        """Build from the stationary OU standard deviation ``(c tau / 2)^(1/2)``."""
        return cls(gamma, tau, 2.0 * std * std / tau if tau > 0 else 0.0, static_fwhm)

    @property
    def ou_std(self) -> float:
        return math.sqrt(self.c * self.tau / 2.0)

    @property
    def static_sigma(self) -> float:
        return self.static_fwhm / FWHM_PER_SIGMA


def task_rng(seed, index=None) -> np.random.Generator:
    """Independent generator for (master seed, task index)."""
    entropy = [int(seed)] if index is None else [int(seed), int(index)]
    return np.random.default_rng(np.random.SeedSequence(entropy))


# -- propagation -------------------------------------------------------------

def step_count(T, dt) -> int:
    """Number of uniform steps covering T with steps no longer than ``dt``."""
    if not 0 < dt:
        raise ValueError("dt must be positive")
    if dt > T * (1 + 1e-12):
        raise ValueError(f"dt={dt} exceeds the horizon T={T}")
    return max(1, math.ceil(T / dt - 1e-9))


def _resolve(field, T, dt):
    T = field.T if T is None else T
    dt = T / DEFAULT_STEPS if dt is None else dt
    n = step_count(T, dt)
    return T, n, T / n


def midpoint_envelope(field: ControlField, T, n):
    h = T / n
    c = complex_envelope(field, (np.arange(n) + 0.5) * h)
    return np.ascontiguousarray(c.real), np.ascontiguousarray(c.imag)


def propagators(field: ControlField, deltas, alphas=1.0, T=None, dt=None):
    """Cayley-Klein pairs (a, b) for every (delta, alpha) pair (broadcast)."""
    T, n, h = _resolve(field, T, dt)
    deltas, alphas = np.broadcast_arrays(np.asarray(deltas, float), np.asarray(alphas, float))
    shape = deltas.shape
    cx, cy = midpoint_envelope(field, T, n)
    ab = _kernels.su2_ensemble(cx, cy, np.array(deltas.ravel()), np.array(alphas.ravel()), h)
    a = (ab[:, 0] + 1j * ab[:, 1]).reshape(shape)
    b = (ab[:, 2] + 1j * ab[:, 3]).reshape(shape)
    return a, b


def propagate_unitary(field: ControlField, delta, alpha=1.0, T=None, dt=None):
    """Time-ordered propagator over [0, T] as a 2x2 matrix."""
    a, b = propagators(field, delta, alpha, T, dt)
    return qcore.su2_matrix(complex(a), complex(b))


def propagate_state(field: ControlField, delta, alpha=1.0, T=None, dt=None, psi0=qcore.DOWN):
    return propagate_unitary(field, delta, alpha, T, dt) @ np.asarray(psi0, dtype=complex)


def transfer_probabilities(field: ControlField, deltas, alphas=1.0, T=None, dt=None):
    """Population of |up> after starting in |down>, i.e. |b|^2, for each system."""
    a, b = propagators(field, deltas, alphas, T, dt)
    # U|down> = (-conj(b), conj(a)), so the |up> amplitude is -conj(b)
    return np.clip(np.abs(b) ** 2, 0.0, 1.0)


def lindblad_bloch(field: ControlField, deltas, alphas=1.0, gamma=0.0, T=None, dt=None,
                   r0=(0.0, 0.0, -1.0)):
    """Final Bloch vectors under pure dephasing for each (delta, alpha) pair."""
    T, n, h = _resolve(field, T, dt)
    deltas, alphas = np.broadcast_arrays(np.asarray(deltas, float), np.asarray(alphas, float))
    cx, cy = midpoint_envelope(field, T, n)
    r = _kernels.bloch_ensemble(cx, cy, np.array(deltas.ravel()), np.array(alphas.ravel()),
                                float(gamma), h, np.array(r0, dtype=float))
    return r.reshape(deltas.shape + (3,))


def propagate_lindblad(field: ControlField, delta, alpha=1.0, gamma=0.0, T=None, dt=None,
                       rho0=None):
    """Solve d rho/dt = -i[H, rho] + (gamma/2)(sz rho sz - rho) with fixed-step RK4.

    The Bloch parametrization keeps rho Hermitian with unit trace exactly.
    """
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    rho0 = qcore.density(qcore.DOWN) if rho0 is None else np.asarray(rho0, dtype=complex)
    r0 = qcore.bloch_vector(rho0)
    r = lindblad_bloch(field, delta, alpha, gamma, T, dt, r0)
    return qcore.from_bloch(r)


# -- ensembles and noise -----------------------------------------------------

def grid_detunings(model: EnsembleModel):
    """M evenly spaced detunings on [-W, W] with normalized Gaussian weights."""
    if model.M == 1 or model.sigma == 0:
        deltas = np.zeros(1) if model.M == 1 else np.zeros(model.M)
        return deltas, np.full(deltas.shape, 1.0 / deltas.size)
    deltas = np.linspace(-model.W, model.W, model.M)
    p = np.exp(-0.5 * (deltas / model.sigma) ** 2)
    p = 0.5 * (p + p[::-1])
    return deltas, p / p.sum()


def random_detunings(model: EnsembleModel, seed):
    return task_rng(seed).normal(0.0, model.sigma, model.K)


def ou_trajectory(tau, c, dt, n_steps, seed, delta0=0.0):
    """Exact discrete Ornstein-Uhlenbeck path; returns ``n_steps + 1`` values starting at ``delta0``.

    delta(t + dt) = delta(t) exp(-dt/tau) + [c tau/2 (1 - exp(-2 dt/tau))]^(1/2) n
    """
    if not (tau > 0 and c >= 0 and dt > 0):
        raise ValueError("require tau > 0, c >= 0, dt > 0")
    rho = math.exp(-dt / tau)
    kick = math.sqrt(c * tau / 2.0 * (1.0 - rho * rho))
    noise = task_rng(seed).standard_normal(n_steps)
    tail = signal.lfilter([1.0], [1.0, -rho], kick * noise, zi=[rho * delta0])[0]
    return np.concatenate([[delta0], tail])


def ou_filter(x0, noise, dts, tau, c):
    """OU values at the start of each step, driven by the given unit normals.

    ``x0`` has shape (n_paths,), ``noise`` (n_paths, n_steps); step lengths
    ``dts`` may vary between steps. Runs of equal step length go through one
    linear-filter call.
    """
    x = np.asarray(x0, dtype=float)
    noise = np.atleast_2d(noise)
    dts = np.asarray(dts, dtype=float)
    rho = np.exp(-dts / tau)
    kick = np.sqrt(c * tau / 2.0 * (1.0 - rho * rho))
    out = np.empty(noise.shape)
    edges = np.flatnonzero(np.diff(dts)) + 1
    start = 0
    for stop in list(edges) + [len(dts)]:
        r, kk = rho[start], kick[start]
        out[:, start] = x
        if stop - start > 1:
            out[:, start + 1:stop] = signal.lfilter([1.0], [1.0, -r], kk * noise[:, start:stop - 1],
                                                     axis=1, zi=(r * x)[:, None])[0]
        x = r * out[:, stop - 1] + kk * noise[:, stop - 1]
        start = stop
    return out


def ou_paths(tau, c, dts, rng: np.random.Generator, n_paths, delta0=None):
    """``n_paths`` OU paths on the step grid ``dts``, started from the stationary law unless ``delta0`` is given."""
    std = math.sqrt(c * tau / 2.0)
    x0 = rng.normal(0.0, std, n_paths) if delta0 is None else np.full(n_paths, float(delta0))
    noise = rng.standard_normal((n_paths, len(dts)))
    return ou_filter(x0, noise, dts, tau, c)
