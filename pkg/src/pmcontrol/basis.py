"""Control-field families, constraint boxes and spectral analysis.

Each family is described by a flat parameter vector made of ``N`` blocks:

========  ==============================  =========================================
family    block                           complex envelope c(t)
========  ==============================  =========================================
sfb       (a, w, phi)                     sum a cos(w t + phi)
sfb_p     (a, w, phi)                     sum a exp(i (w t + phi))
sfb_p2    (a, w, phi, phi2)               sum a cos(w t + phi) exp(i phi2)
pm        (a, b, nu)                      sum a exp(i (b/nu) sin(nu t))
========  ==============================  =========================================

The interaction-picture control Hamiltonian is ``(Re c/2) sx + (Im c/2) sy`` and
the lab-frame field is ``g(t) = Re[c(t) exp(i w0 t)]``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import integrate, special

from . import units

# below this |nu| T the PM phase (b/nu) sin(nu t) is replaced by its limit b t
NU_SINGULAR = 1e-6
DEFAULT_GRID = 4096


class Family(str, enum.Enum):
    SFB = "sfb"
    SFB_P = "sfb_p"
    SFB_P2 = "sfb_p2"
    PM = "pm"

    @property
    def block(self) -> int:
        return 4 if self is Family.SFB_P2 else 3

    @property
    def kinds(self) -> tuple[str, ...]:
        """Physical kind of each coordinate in a block (for bounds and units)."""
        if self is Family.PM:
            return ("amp", "freq", "freq")
        if self is Family.SFB_P2:
            return ("amp", "freq", "phase", "phase")
        return ("amp", "freq", "phase")

    @property
    def randomized_slot(self) -> int:
        """Index within a block of the frequency frozen by the randomized variant."""
        return 2 if self is Family.PM else 1


def as_family(name) -> Family:
    if isinstance(name, Family):
        return name
    key = str(name).lower().replace("-", "_")
    try:
        return Family(key)
    except ValueError:
        raise ValueError(f"unknown family {name!r}; expected one of "
                         f"{[f.value for f in Family]}") from None


@dataclass(frozen=True)
class ControlField:
    """A parametrized driving field on the horizon ``[0, T]``.

    ``params`` are SI: amplitudes and frequencies in rad/s, phases in rad.
    """

    family: Family
    N: int
    params: tuple
    T: float
    omega0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", as_family(self.family))
        object.__setattr__(self, "params", tuple(float(p) for p in np.ravel(self.params)))
        if self.N < 1:
            raise ValueError(f"N must be positive, got {self.N}")
        if len(self.params) != self.N * self.family.block:
            raise ValueError(
                f"{self.family.value} with N={self.N} needs "
                f"{self.N * self.family.block} parameters, got {len(self.params)}")
        if not self.T > 0:
            raise ValueError(f"horizon T must be positive, got {self.T}")
        if not all(math.isfinite(p) for p in self.params):
            raise ValueError("parameters must be finite")

    @property
    def n_params(self) -> int:
        return len(self.params)

    @property
    def blocks(self) -> np.ndarray:
        return np.asarray(self.params).reshape(self.N, self.family.block)

    def with_params(self, params) -> "ControlField":
        return ControlField(self.family, self.N, params, self.T, self.omega0)

    def envelope(self, t):
        return complex_envelope(self, t)

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        kinds = self.family.kinds * self.N
        human = [_to_file_units(p, k) for p, k in zip(self.params, kinds)]
        return {
            "family": self.family.value,
            "N": self.N,
            "T_ns": units.s_to_ns(self.T),
            "omega0_MHz": units.angular_to_mhz(self.omega0),
            "params": human,
            # exact SI copy so that loading reproduces the field bit for bit
            "si": {"T": self.T, "omega0": self.omega0, "params": list(self.params)},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ControlField":
        try:
            family = as_family(doc["family"])
            N = doc["N"]
            human = doc["params"]
            T_ns = doc["T_ns"]
        except KeyError as exc:
            raise ValueError(f"control-field document is missing key {exc}") from None
        if not isinstance(N, int) or isinstance(N, bool):
            raise ValueError(f"N must be an integer, got {N!r}")
        if not isinstance(human, list) or len(human) != N * family.block:
            raise ValueError(f"params must be a list of {N * family.block} numbers")
        kinds = family.kinds * N
        params = [_from_file_units(float(v), k) for v, k in zip(human, kinds)]
        T = units.ns_to_s(float(T_ns))
        omega0 = units.mhz_to_angular(float(doc.get("omega0_MHz", 0.0)))
        si = doc.get("si")
        if si is not None:
            exact = [float(v) for v in si["params"]]
            if len(exact) != len(params) or not np.allclose(exact, params, rtol=1e-9, atol=1e-9):
                raise ValueError("'si' block disagrees with the human-unit parameters")
            if not math.isclose(float(si["T"]), T, rel_tol=1e-9):
                raise ValueError("'si' horizon disagrees with T_ns")
            params, T, omega0 = exact, float(si["T"]), float(si["omega0"])
        return cls(family, N, params, T, omega0)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ControlField":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "ControlField":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _to_file_units(value, kind):
    return value if kind == "phase" else units.angular_to_mhz(value)


def _from_file_units(value, kind):
    return value if kind == "phase" else units.mhz_to_angular(value)


def rectangular_pulse(omega, duration, phase=0.0) -> ControlField:
    """Constant envelope ``omega * exp(i phase)``; phase 0 drives about x, pi/2 about y."""
    return ControlField(Family.SFB_P, 1, (omega, 0.0, phase), duration)


@dataclass(frozen=True)
class ConstraintSet:
    omega_max: float
    freq_lo: float
    freq_hi: float
    phase_lo: float = 0.0
    phase_hi: float = 2 * math.pi

    def __post_init__(self):
        if not self.omega_max > 0:
            raise ValueError("omega_max must be positive")
        if self.freq_lo > self.freq_hi:
            raise ValueError("freq_lo must not exceed freq_hi")

    @classmethod
    def for_horizon(cls, T, omega_max, cycles=5.0) -> "ConstraintSet":
        """Frequencies limited to 2 pi [0, cycles / T]."""
        return cls(omega_max, 0.0, units.TWO_PI * cycles / T)


def parameter_bounds(family, N, constraints: ConstraintSet):
    """Per-coordinate box (lo, hi) for a family with N terms."""
    family = as_family(family)
    box = {
        "amp": (-constraints.omega_max, constraints.omega_max),
        "freq": (constraints.freq_lo, constraints.freq_hi),
        "phase": (constraints.phase_lo, constraints.phase_hi),
    }
    pairs = [box[k] for k in family.kinds * N]
    lo, hi = np.array(pairs, dtype=float).T
    return lo, hi


def randomized_mask(family, N):
    """Boolean mask of the frequency coordinates frozen by the randomized variant."""
    family = as_family(family)
    mask = np.zeros((N, family.block), dtype=bool)
    mask[:, family.randomized_slot] = True
    return mask.ravel()


# -- evaluation --------------------------------------------------------------

def _pm_phase(b, nu, t, T):
    b = np.asarray(b, dtype=float)
    nu = np.asarray(nu, dtype=float)
    singular = np.abs(nu) * T < NU_SINGULAR
    safe_nu = np.where(singular, 1.0, nu)
    return np.where(singular, b * t, b / safe_nu * np.sin(safe_nu * t))


def complex_envelope(field: ControlField, t):
    """Interaction-picture envelope c(t) in rad/s; ``t`` may be an array."""
    t = np.asarray(t, dtype=float)
    p = field.blocks
    tt = t[..., None]
    fam = field.family
    if fam is Family.SFB:
        a, w, phi = p.T
        c = np.sum(a * np.cos(w * tt + phi), axis=-1).astype(complex)
    elif fam is Family.SFB_P:
        a, w, phi = p.T
        c = np.sum(a * np.exp(1j * (w * tt + phi)), axis=-1)
    elif fam is Family.SFB_P2:
        a, w, phi, phi2 = p.T
        c = np.sum(a * np.cos(w * tt + phi) * np.exp(1j * phi2), axis=-1)
    else:
        a, b, nu = p.T
        c = np.sum(a * np.exp(1j * _pm_phase(b, nu, tt, field.T)), axis=-1)
    return c


def lab_field(field: ControlField, t):
    """Lab-frame field g(t) in rad/s, including the carrier at ``omega0``."""
    t = np.asarray(t, dtype=float)
    p = field.blocks
    tt = t[..., None]
    w0t = field.omega0 * tt
    fam = field.family
    if fam is Family.SFB:
        a, w, phi = p.T
        g = a * np.cos(w * tt + phi) * np.cos(w0t)
    elif fam is Family.SFB_P:
        a, w, phi = p.T
        g = a * np.cos(w0t + w * tt + phi)
    elif fam is Family.SFB_P2:
        a, w, phi, phi2 = p.T
        g = a * np.cos(w * tt + phi) * np.cos(w0t + phi2)
    else:
        a, b, nu = p.T
        g = a * np.cos(w0t + _pm_phase(b, nu, tt, field.T))
    return np.sum(g, axis=-1)


def envelope_peak(field: ControlField, n_grid: int = DEFAULT_GRID) -> float:
    """max |c(t)| on a uniform grid of ``n_grid`` points spanning [0, T]."""
    if n_grid < 1000:
        raise ValueError("n_grid must be at least 1000")
    t = np.linspace(0.0, field.T, n_grid)
    return float(np.max(np.abs(complex_envelope(field, t))))


def average_amplitude(field: ControlField, n_grid: int = DEFAULT_GRID) -> float:
    """Time average of |c(t)| over [0, T] (trapezoid rule).

    The carrier would scale the lab-frame average by 2/pi for every family
    alike, so comparisons are made on the envelope.
    """
    t = np.linspace(0.0, field.T, n_grid)
    return float(integrate.trapezoid(np.abs(complex_envelope(field, t)), t) / field.T)


# -- spectra -----------------------------------------------------------------

class Sideband(NamedTuple):
    order: int
    offset: float
    amplitude: float


def pm_sidebands(a, b, nu, l_max):
    """Jacobi-Anger sidebands of one PM term: offsets ``l nu``, amplitudes ``a J_l(b/nu)``."""
    if l_max < 0:
        raise ValueError("l_max must be non-negative")
    if b == 0:
        x = 0.0
    elif nu > 0:
        x = b / nu
    else:
        raise ValueError("nu must be positive when b is non-zero")
    orders = np.arange(-l_max, l_max + 1)
    amps = a * special.jv(orders, x)
    return [Sideband(int(l), float(l * nu), float(A)) for l, A in zip(orders, amps)]


@dataclass(frozen=True)
class Spectrum:
    """One-sided amplitude spectra of the x- and y-quadratures of c(t).

    ``x``/``y`` are calibrated so that a tone ``A cos(w t)`` shows a peak of
    height ``A`` at ``w`` (and a constant ``A`` shows ``A`` at DC).
    ``power_x``/``power_y`` are per-bin powers that sum to the (window-weighted)
    mean square of the corresponding quadrature.
    """

    omega: np.ndarray
    x: np.ndarray
    y: np.ndarray
    power_x: np.ndarray
    power_y: np.ndarray
    window: str
    pad: int
    extra: dict = dc_field(default_factory=dict)

    @property
    def magnitude(self):
        return np.hypot(self.x, self.y)

    def rows(self):
        return list(zip(self.omega.tolist(), self.x.tolist(), self.y.tolist()))


def _one_sided(X, L, scale):
    out = np.abs(X) * scale
    out[1:] *= 2.0
    if L % 2 == 0:
        out[-1] /= 2.0
    return out


def spectrum(field: ControlField, f_max=None, n_samples: int = 4096,
             window: str = "hann", pad: int = 4) -> Spectrum:
    """Discrete amplitude spectrum of Re c and Im c sampled on [0, T).

    ``f_max`` (angular) truncates the reported range; ``None`` keeps every bin
    up to Nyquist. ``window`` is ``"hann"`` or ``"rect"``; ``pad`` is the
    zero-padding factor.
    """
    if n_samples < 4096 or n_samples & (n_samples - 1):
        raise ValueError("n_samples must be a power of two >= 4096")
    if window == "hann":
        w = np.hanning(n_samples + 1)[:-1]
    elif window == "rect":
        w = np.ones(n_samples)
    else:
        raise ValueError(f"unknown window {window!r}")
    dt = field.T / n_samples
    t = np.arange(n_samples) * dt
    c = complex_envelope(field, t)
    L = n_samples * pad
    omega = units.TWO_PI * np.fft.rfftfreq(L, d=dt)
    quads, powers = [], []
    for q in (c.real, c.imag):
        X = np.fft.rfft(w * q, n=L)
        quads.append(_one_sided(X, L, 1.0 / np.sum(w)))
        p = np.abs(X) ** 2 / (L * np.sum(w * w))
        p[1:] *= 2.0
        if L % 2 == 0:
            p[-1] /= 2.0
        powers.append(p)
    keep = slice(None) if f_max is None else omega <= f_max
    return Spectrum(omega[keep], quads[0][keep], quads[1][keep],
                    powers[0][keep], powers[1][keep], window, pad)


def find_peaks(omega, mag, threshold=0.0, one_sided=True):
    """Local maxima of ``mag`` with parabolic interpolation.

    Returns a list of (omega, height) for interpolated heights >= threshold.
    With ``one_sided`` (``mag`` doubled away from DC, as produced by
    ``spectrum``) the search runs on the undoubled values so that the DC
    line's own leakage is not mistaken for a separate line; heights of
    non-DC peaks are doubled back afterwards.
    """
    mag = np.asarray(mag, dtype=float)
    omega = np.asarray(omega, dtype=float)
    n = len(mag)
    peaks = []
    if n == 0:
        return peaks
    d = mag.copy()
    if one_sided:
        d[1:] /= 2.0
    step = omega[1] - omega[0] if n > 1 else 0.0
    for k in range(n):
        left = d[k - 1] if k > 0 else -np.inf
        right = d[k + 1] if k < n - 1 else -np.inf
        if d[k] <= 0 or d[k] <= left or d[k] < right:
            continue
        height, pos = d[k], omega[k]
        if 0 < k < n - 1:
            denom = left - 2 * d[k] + right
            if denom < 0:
                shift = 0.5 * (left - right) / denom
                height = d[k] - 0.25 * (left - right) * shift
                pos = omega[k] + shift * step
        if one_sided and k > 0:
            height *= 2.0
        if height >= threshold:
            peaks.append((float(pos), float(height)))
    return peaks


def count_components(spec: Spectrum, threshold: float) -> int:
    """Number of spectral maxima of the combined x/y magnitude at or above ``threshold``."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    return len(find_peaks(spec.omega, spec.magnitude, threshold))
