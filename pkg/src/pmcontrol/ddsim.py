"""XY-8 dynamical decoupling under static Gaussian plus Ornstein-Uhlenbeck detuning noise.

A trial draws one static detuning and one OU path, prepares |0> (the first
basis state) with an instantaneous X rotation by pi/2, runs the schedule with
noise active during idles and pulses, reads out with an X rotation by 3 pi/2
and records the population of |0>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels, objective, optimizer, qcore
from .basis import ConstraintSet, ControlField, rectangular_pulse
from .dynamics import EnsembleModel, NoiseModel, midpoint_envelope, ou_filter, step_count, task_rng

XY8_ORDER = ("X", "Y", "X", "Y", "Y", "X", "Y", "X")
T2_THRESHOLD = (1.0 + math.exp(-1.0)) / 2.0
INIT_ANGLE = math.pi / 2
READOUT_ANGLE = 3 * math.pi / 2


class NoCrossingError(ValueError):
    """The decay curve never falls through the T2 threshold inside the sampled range."""


@dataclass(frozen=True)
class PulseImpl:
    """Control fields used for the X and Y pulses of a sequence."""

    name: str
    X: ControlField
    Y: ControlField

    def __post_init__(self):
        if not math.isclose(self.X.T, self.Y.T, rel_tol=1e-12):
            raise ValueError("X and Y pulses must share one duration")

    @property
    def T_pulse(self) -> float:
        return self.X.T


def rectangular_impl(T_pulse, omega=None) -> PulseImpl:
    """Constant-amplitude pi pulses; ``omega`` defaults to pi / T_pulse."""
    if T_pulse <= 0:
        raise ValueError("T_pulse must be positive")
    omega = math.pi / T_pulse if omega is None else omega
    return PulseImpl("rect", rectangular_pulse(omega, T_pulse, 0.0),
                     rectangular_pulse(omega, T_pulse, math.pi / 2))


def optimize_gate_pair(T_pulse, W, omega_max, family="pm", N=1, n_starts=120, seed=0, M=15,
                       workers=1):
    """Optimize ensemble-robust X and Y pi gates; returns (PulseImpl, {"X": RunSet, "Y": RunSet})."""
    cons = ConstraintSet.for_horizon(T_pulse, omega_max)
    ens = EnsembleModel.from_fwhm(W, M)
    runs = {}
    for k, (gate, target) in enumerate((("X", qcore.SX), ("Y", qcore.SY))):
        spec = optimizer.OptimizationSpec(objective.gate_spec(ens, T_pulse, cons, target=target),
                                          family, N, n_starts=n_starts, seed=seed + k,
                                          workers=workers)
        runs[gate] = optimizer.multi_start(spec)
    impl = PulseImpl(str(runs["X"].spec.family.value), runs["X"].best_field, runs["Y"].best_field)
    return impl, runs


@dataclass(frozen=True)
class Segment:
    kind: str                      # "idle" or "pulse"
    duration: float
    gate: str | None = None
    field: ControlField | None = None


@dataclass(frozen=True)
class DDSchedule:
    segments: tuple
    pulse_impl: str = ""

    @property
    def total(self) -> float:
        return math.fsum(s.duration for s in self.segments)

    @property
    def pulses(self) -> list:
        return [s for s in self.segments if s.kind == "pulse"]

    @property
    def idle_total(self) -> float:
        return math.fsum(s.duration for s in self.segments if s.kind == "idle")


def build_xy8(T_pulse, tau_pulse, impl: PulseImpl) -> DDSchedule:
    """One XY-8 block: idles of tau/2 at both ends and tau between pulses.

    Total length is ``8 T_pulse + 8 tau_pulse``.
    """
    if T_pulse <= 0 or tau_pulse <= 0:
        raise ValueError("pulse length and separation must be positive")
    if not math.isclose(impl.T_pulse, T_pulse, rel_tol=1e-9):
        raise ValueError(f"pulse fields last {impl.T_pulse} s, schedule asks for {T_pulse} s")
    segs = [Segment("idle", tau_pulse / 2)]
    for k, gate in enumerate(XY8_ORDER):
        segs.append(Segment("pulse", T_pulse, gate, impl.X if gate == "X" else impl.Y))
        segs.append(Segment("idle", tau_pulse if k < len(XY8_ORDER) - 1 else tau_pulse / 2))
    return DDSchedule(tuple(segs), impl.name)


class PopulationEstimate(NamedTuple):
    P0: float
    stderr: float
    n_trials: int


def _x_rotation(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _timeline(schedule: DDSchedule, dt, idle_dt):
    """Per-segment step counts and the flattened step lengths."""
    counts, dts = [], []
    for seg in schedule.segments:
        h = dt if seg.kind == "pulse" else idle_dt
        if h > seg.duration * (1 + 1e-12):
            raise ValueError(f"step {h} s exceeds a {seg.kind} segment of {seg.duration} s")
        n = step_count(seg.duration, h)
        counts.append(n)
        dts.append(np.full(n, seg.duration / n))
    return np.array(counts), np.concatenate(dts)


def _detuning_paths(noise: NoiseModel, dts, n_trials, seed):
    """Static plus OU detuning at every step, one row per trial."""
    static = np.empty(n_trials)
    with_ou = noise.tau > 0 and noise.c > 0
    x0 = np.zeros(n_trials)
    kicks = np.zeros((n_trials, dts.size)) if with_ou else None
    for t in range(n_trials):
        rng = task_rng(seed, t)
        static[t] = rng.normal(0.0, noise.static_sigma)
        if with_ou:
            x0[t] = rng.normal(0.0, noise.ou_std)
            kicks[t] = rng.standard_normal(dts.size)
    paths = np.repeat(static[:, None], dts.size, axis=1)
    if with_ou:
        paths += ou_filter(x0, kicks, dts, noise.tau, noise.c)
    return paths


def trial_populations(schedule: DDSchedule, noise: NoiseModel, n_trials, dt, seed, idle_dt=None):
    """Population of |0> at the end of each trial."""
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    if dt <= 0 or (idle_dt is not None and idle_dt <= 0):
        raise ValueError("step lengths must be positive")
    idle_dt = dt if idle_dt is None else idle_dt
    counts, dts = _timeline(schedule, dt, idle_dt)
    delta = _detuning_paths(noise, dts, n_trials, seed)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    phases = np.add.reduceat(delta * dts, starts, axis=1)

    psi = np.tile(_x_rotation(INIT_ANGLE)[:, 0], (n_trials, 1))
    for k, seg in enumerate(schedule.segments):
        if seg.kind == "idle":
            # exp(-i phi sz / 2)
            half = np.exp(-0.5j * phases[:, k])
            psi[:, 0] *= half
            psi[:, 1] *= np.conj(half)
            continue
        cx, cy = midpoint_envelope(seg.field, seg.duration, counts[k])
        hx, hy = 0.5 * cx, 0.5 * cy
        lo, hi = starts[k], starts[k] + counts[k]
        step = np.ascontiguousarray(dts[lo:hi])
        for t in range(n_trials):
            ar, ai, br, bi = _kernels.su2_path(hx, hy, np.ascontiguousarray(0.5 * delta[t, lo:hi]),
                                               step)
            a, b = complex(ar, ai), complex(br, bi)
            p0, p1 = psi[t]
            psi[t, 0] = a * p0 - np.conj(b) * p1
            psi[t, 1] = b * p0 + np.conj(a) * p1
    psi = psi @ _x_rotation(READOUT_ANGLE).T
    return np.clip(np.abs(psi[:, 0]) ** 2, 0.0, 1.0)


def simulate_population(schedule: DDSchedule, noise: NoiseModel, n_trials, dt, seed,
                        idle_dt=None) -> PopulationEstimate:
    """Trial-averaged population of |0> with its standard error.

    ``dt`` is the step inside pulses and ``idle_dt`` (default ``dt``) the step
    inside idles; the OU path is advanced exactly on the same grid and held
    constant within a step.
    """
    p = trial_populations(schedule, noise, n_trials, dt, seed, idle_dt)
    stderr = float(np.std(p, ddof=1) / math.sqrt(n_trials)) if n_trials > 1 else 0.0
    return PopulationEstimate(float(np.mean(p)), stderr, int(n_trials))


class DecayPoint(NamedTuple):
    T: float
    P0: float
    stderr: float
    n_trials: int


def decay_curve(impl: PulseImpl, taus, noise: NoiseModel, n_trials, dt, seed, idle_dt=None):
    """P0 against total sequence time for each pulse separation in ``taus``.

    Every separation reuses the same per-trial random streams.
    """
    out = []
    for tau in taus:
        sched = build_xy8(impl.T_pulse, float(tau), impl)
        est = simulate_population(sched, noise, n_trials, dt, seed, idle_dt)
        out.append(DecayPoint(sched.total, est.P0, est.stderr, est.n_trials))
    return out


def extract_t2(curve, threshold=T2_THRESHOLD) -> float:
    """First downward crossing of ``threshold`` by (T, P0) samples, linearly interpolated.

    Raises NoCrossingError when no sample pair brackets a downward crossing.
    """
    pts = [(float(p[0]), float(p[1])) for p in curve]
    if not pts:
        raise NoCrossingError("empty curve")
    T = np.array([p[0] for p in pts])
    P = np.array([p[1] for p in pts])
    if np.any(np.diff(T) <= 0):
        raise ValueError("curve must be strictly increasing in T")
    for i in range(P.size):
        if P[i] == threshold and (i == 0 or P[i - 1] > threshold):
            return float(T[i])
        if i > 0 and P[i - 1] > threshold > P[i]:
            frac = (P[i - 1] - threshold) / (P[i - 1] - P[i])
            return float(T[i - 1] + frac * (T[i] - T[i - 1]))
    raise NoCrossingError(f"P0 never falls through {threshold:.5f} in [{T[0]:.3e}, {T[-1]:.3e}] s")
