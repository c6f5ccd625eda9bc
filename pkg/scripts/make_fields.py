"""Regenerate the example control fields shipped in ``pmcontrol/fields``.

State-transfer optima use T = 100 ns, W = 2 pi 10 MHz and Omega_max = 2 pi 10 MHz;
the X/Y gate pair uses W = 2 pi 26.5 MHz for the decoupling simulations.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from pmcontrol import ddsim, objective, optimizer, units
from pmcontrol.basis import ConstraintSet, rectangular_pulse
from pmcontrol.dynamics import EnsembleModel

OUT = Path(__file__).resolve().parents[1] / "src" / "pmcontrol" / "fields"
T = 100 * units.NS
W = units.mhz_to_angular(10.0)
OMEGA_MAX = units.mhz_to_angular(10.0)


def state_optimum(family, N, starts, seed):
    spec = objective.state_spec(EnsembleModel.from_fwhm(W), T, ConstraintSet.for_horizon(T, OMEGA_MAX))
    runset = optimizer.multi_start(optimizer.OptimizationSpec(spec, family, N, n_starts=starts,
                                                              seed=seed))
    print(f"{family} N={N}: F_obj = {1 - runset.best.best_value:.6f}")
    return runset.best_field


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--starts", type=int, default=120)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, default=OUT)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    rectangular_pulse(units.mhz_to_angular(10.0), 50 * units.NS).save(args.out / "rect_pi.json")
    state_optimum("pm", 1, args.starts, args.seed).save(args.out / "pm_n1.json")
    state_optimum("sfb_p2", 1, args.starts, args.seed).save(args.out / "sfb_p2_n1.json")
    impl, runs = ddsim.optimize_gate_pair(T, units.mhz_to_angular(26.5), OMEGA_MAX,
                                          n_starts=args.starts, seed=args.seed)
    for gate in ("X", "Y"):
        print(f"pm {gate} gate: F_obj = {1 - runs[gate].best.best_value:.6f}")
    impl.X.save(args.out / "pm_x_gate.json")
    impl.Y.save(args.out / "pm_y_gate.json")


if __name__ == "__main__":
    main()
