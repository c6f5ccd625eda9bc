"""Robustness of a fixed control field: detuning x amplitude-scaling maps, f > threshold areas, dephasing sweeps."""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import objective, qcore, units
from .basis import ConstraintSet, ControlField
from .dynamics import EnsembleModel

N_DELTA = 101
N_ALPHA = 101
# evaluation-only specs never consult the amplitude constraint
_UNCONSTRAINED = ConstraintSet(1.0, 0.0, 0.0)


def default_delta_grid(W, n=N_DELTA, span=1.5):
    return np.linspace(-span * W, span * W, n)


def default_alpha_grid(n=N_ALPHA, lo=0.5, hi=1.5):
    return np.linspace(lo, hi, n)


@dataclass
class FidelityMap:
    """Fidelities on an (alpha, delta) grid; ``values[i, j]`` is at ``alphas[i]``, ``deltas[j]``."""

    deltas: np.ndarray
    alphas: np.ndarray
    values: np.ndarray
    gamma: float = 0.0
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.deltas = np.asarray(self.deltas, dtype=float)
        self.alphas = np.asarray(self.alphas, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.alphas.size, self.deltas.size):
            raise ValueError("values must have shape (len(alphas), len(deltas))")

    def rows(self):
        """Long-format (delta_MHz, alpha, fidelity) rows."""
        d = units.angular_to_mhz(self.deltas)
        return [(float(d[j]), float(a), float(self.values[i, j]))
                for i, a in enumerate(self.alphas) for j in range(d.size)]


def fidelity_map(field: ControlField, deltas, alphas, gamma=0.0, dt=None,
                 target=qcore.UP, initial=qcore.DOWN, gate=None) -> FidelityMap:
    """Single-system fidelity for every (alpha, delta) cell.

    With ``gate`` set, cells hold the gate fidelity against that unitary;
    otherwise the transfer fidelity from ``initial`` to ``target`` (Lindblad
    dynamics when ``gamma > 0``).
    """
    deltas = np.asarray(deltas, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    if deltas.size == 0 or alphas.size == 0:
        raise ValueError("grids must be non-empty")
    D, A = np.meshgrid(deltas, alphas)
    dummy = EnsembleModel(0.0, 1, 1)
    cons = _UNCONSTRAINED
    if gate is not None:
        spec = objective.gate_spec(dummy, field.T, cons, target=gate, dt=dt)
    else:
        spec = objective.state_spec(dummy, field.T, cons, target=target, dt=dt, gamma=gamma,
                                    initial=initial)
    values = objective.fidelities(field, spec, D, A)
    return FidelityMap(deltas, alphas, values, gamma,
                       {"field": field.to_dict(), "gamma": gamma,
                        "kind": "gate" if gate is not None else "state"})


def _cell_widths(x):
    x = np.asarray(x, dtype=float)
    if x.size == 1:
        return np.ones(1)
    edges = np.concatenate([[x[0]], 0.5 * (x[1:] + x[:-1]), [x[-1]]])
    return np.diff(edges)


def area_above(fmap: FidelityMap, threshold: float) -> float:
    """Area (delta units x alpha units) of the cells whose fidelity exceeds ``threshold``.

    Cells are node-centred; edge cells are half width, so an all-ones map gives
    the full rectangle.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    cell = np.outer(_cell_widths(fmap.alphas), _cell_widths(fmap.deltas))
    return float(np.sum(cell[fmap.values > threshold]))


def area_ratio(numerator: FidelityMap, denominator: FidelityMap, threshold=0.9) -> float:
    """Ratio of f > threshold areas; both maps must share their grids."""
    if not (np.array_equal(numerator.deltas, denominator.deltas)
            and np.array_equal(numerator.alphas, denominator.alphas)):
        raise ValueError("area ratios need identical grids")
    den = area_above(denominator, threshold)
    return float("inf") if den == 0 else area_above(numerator, threshold) / den


def dephasing_sweep(field: ControlField, gammas, ensemble: EnsembleModel, K=None, seed=0,
                    dt=None, target=qcore.UP, initial=qcore.DOWN):
    """Monte-Carlo ensemble fidelity for each dephasing rate.

    The same detuning draws are reused for every rate. Returns a list of
    (gamma, mean, stderr).
    """
    K = ensemble.K if K is None else K
    model = EnsembleModel(ensemble.sigma, ensemble.M, K)
    cons = _UNCONSTRAINED
    out = []
    for g in gammas:
        if g < 0:
            raise ValueError("dephasing rates must be non-negative")
        spec = objective.state_spec(model, field.T, cons, target=target, initial=initial,
                                    dt=dt, gamma=float(g))
        est = objective.monte_carlo_fidelity(field, spec, seed)
        out.append((float(g), est.mean, est.stderr))
    return out


def map_summary(maps: dict, threshold=0.9, reference=None) -> dict:
    """JSON-ready areas (MHz x alpha) for named maps, plus ratios against ``reference``."""
    # area_above is in rad/s x alpha; report in MHz x alpha
    areas = {name: units.angular_to_mhz(area_above(m, threshold)) for name, m in maps.items()}
    summary = {"threshold": threshold, "areas_MHz": areas}
    if reference is not None:
        summary["ratios"] = {name: area_ratio(m, maps[reference], threshold)
                             for name, m in maps.items() if name != reference}
        summary["reference"] = reference
    return summary


def dump_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
