"""Ensemble objectives for state transfer and gates, plus the penalized form minimized by the optimizer."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import NamedTuple

import numpy as np

from . import dynamics, qcore
from .basis import ConstraintSet, ControlField, envelope_peak
from .dynamics import EnsembleModel

PENALTY_WEIGHT = 1e3
# rounding in |c(t)| of a field sitting exactly on the bound is not a violation
PEAK_RTOL = 1e-12
STATE = "state_transfer"
GATE = "gate"


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: str
    target: np.ndarray
    ensemble: EnsembleModel
    T: float
    constraints: ConstraintSet
    dt: float | None = None
    alpha: float = 1.0
    gamma: float = 0.0
    initial: np.ndarray = dc_field(default_factory=lambda: qcore.DOWN.copy())
    penalty_weight: float = PENALTY_WEIGHT
    peak_grid: int = 4096

    def __post_init__(self):
        target = np.asarray(self.target, dtype=complex)
        if self.kind == STATE:
            if target.shape != (2,):
                raise ValueError("state-transfer objective needs a 2-component target state")
            target = qcore.normalize(target)
        elif self.kind == GATE:
            if target.shape != (2, 2) or not qcore.is_unitary(target):
                raise ValueError("gate objective needs a 2x2 unitary target")
            if self.gamma != 0:
                raise ValueError("gate objective is defined for closed dynamics only")
        else:
            raise ValueError(f"unknown objective kind {self.kind!r}")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "initial", qcore.normalize(self.initial))
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")

    @property
    def step(self) -> float:
        return self.T / dynamics.DEFAULT_STEPS if self.dt is None else self.dt


def state_spec(ensemble, T, constraints, target=qcore.UP, **kw) -> ObjectiveSpec:
    return ObjectiveSpec(STATE, target, ensemble, T, constraints, **kw)


def gate_spec(ensemble, T, constraints, target=qcore.SX, **kw) -> ObjectiveSpec:
    return ObjectiveSpec(GATE, target, ensemble, T, constraints, **kw)


# -- per-detuning fidelities -------------------------------------------------

def state_fidelities(field: ControlField, spec: ObjectiveSpec, deltas, alphas=None):
    """f(delta) = |<target|psi(T, delta)>|^2, or <target|rho|target> when gamma > 0."""
    alphas = spec.alpha if alphas is None else alphas
    if spec.gamma > 0:
        r0 = qcore.bloch_vector(qcore.density(spec.initial))
        r = dynamics.lindblad_bloch(field, deltas, alphas, spec.gamma, spec.T, spec.step, r0)
        n = qcore.bloch_vector(qcore.density(spec.target))
        return np.clip(0.5 * (1.0 + r @ n), 0.0, 1.0)
    a, b = dynamics.propagators(field, deltas, alphas, spec.T, spec.step)
    p0, p1 = spec.initial
    out0 = a * p0 - np.conj(b) * p1
    out1 = b * p0 + np.conj(a) * p1
    g0, g1 = spec.target
    amp = np.conj(g0) * out0 + np.conj(g1) * out1
    return np.clip(np.abs(amp) ** 2, 0.0, 1.0)


def gate_fidelities(field: ControlField, spec: ObjectiveSpec, deltas, alphas=None):
    """f_g(delta) of the realized propagator against the target gate."""
    alphas = spec.alpha if alphas is None else alphas
    a, b = dynamics.propagators(field, deltas, alphas, spec.T, spec.step)
    U = spec.target
    overlap = (np.conj(U[0, 0]) * a - np.conj(U[0, 1]) * np.conj(b)
               + np.conj(U[1, 0]) * b + np.conj(U[1, 1]) * np.conj(a))
    return np.clip(qcore.gate_fidelity_from_overlap(overlap), 0.0, 1.0)


def fidelities(field, spec, deltas, alphas=None):
    if spec.kind == GATE:
        return gate_fidelities(field, spec, deltas, alphas)
    return state_fidelities(field, spec, deltas, alphas)


# -- objectives --------------------------------------------------------------

def state_objective(field: ControlField, spec: ObjectiveSpec) -> float:
    """Normalized Gaussian-weighted average of f over the detuning grid."""
    if spec.kind != STATE:
        raise ValueError("state_objective needs a state-transfer spec")
    deltas, w = dynamics.grid_detunings(spec.ensemble)
    return float(np.dot(w, state_fidelities(field, spec, deltas)))


def gate_objective(field: ControlField, spec: ObjectiveSpec) -> float:
    if spec.kind != GATE:
        raise ValueError("gate_objective needs a gate spec")
    deltas, w = dynamics.grid_detunings(spec.ensemble)
    return float(np.dot(w, gate_fidelities(field, spec, deltas)))


def objective(field: ControlField, spec: ObjectiveSpec) -> float:
    if spec.kind == GATE:
        return gate_objective(field, spec)
    return state_objective(field, spec)


class MonteCarloEstimate(NamedTuple):
    mean: float
    stderr: float
    K: int


def monte_carlo_fidelity(field: ControlField, spec: ObjectiveSpec, seed) -> MonteCarloEstimate:
    """Average fidelity over K Gaussian detuning draws, with its standard error."""
    deltas = dynamics.random_detunings(spec.ensemble, seed)
    f = fidelities(field, spec, deltas)
    K = f.size
    stderr = float(np.std(f, ddof=1) / np.sqrt(K)) if K > 1 else 0.0
    return MonteCarloEstimate(float(np.mean(f)), stderr, K)


def amplitude_penalty(field: ControlField, spec: ObjectiveSpec) -> float:
    omax = spec.constraints.omega_max
    peak = envelope_peak(field, spec.peak_grid)
    if peak <= omax * (1 + PEAK_RTOL):
        return 0.0
    excess = peak - omax
    return spec.penalty_weight * (excess / omax) ** 2


def penalized_objective(field: ControlField, spec: ObjectiveSpec) -> float:
    """1 - objective + peak-amplitude penalty; this is what the optimizer minimizes."""
    return 1.0 - objective(field, spec) + amplitude_penalty(field, spec)


class FieldObjective:
    """Picklable callable mapping a parameter vector to the penalized objective."""

    def __init__(self, spec: ObjectiveSpec, template: ControlField):
        self.spec = spec
        self.template = template

    def field(self, x) -> ControlField:
        return self.template.with_params(x)

    def __call__(self, x) -> float:
        return penalized_objective(self.field(x), self.spec)
