"""Command-line entry point: ``pmcontrol {optimize,eval,map,sweep,dd,spectrum}``.

Frequencies on the command line are ordinary frequencies in MHz, times are in
ns (pulses, steps) or us (DD separations); everything is converted to rad/s
and seconds before use. Dephasing rates are plain rates (1/s, entered in MHz)
unless ``--gamma-angular`` is given.

Each run writes ``<out>/<timestamp>-<command>/`` holding the data files and a
``manifest.json`` with the config echo, seed, version, timings and sha256 of
every output. Only the manifest carries timestamps, so data files are
byte-identical across reruns with the same config.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import re
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, basis, ddsim, objective, optimizer, qcore, robustness, units
from .basis import ConstraintSet, ControlField
from .dynamics import EnsembleModel, NoiseModel

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

STATE_TARGETS = {"up": qcore.UP, "down": qcore.DOWN,
                 "plus": np.array([1, 1], dtype=complex) / np.sqrt(2.0)}


class ConfigError(Exception):
    pass


class NumericFailure(Exception):
    pass


# -- option tables -----------------------------------------------------------
# dest: (flag type, default, help); a default of None means "not set"

def _bool(v):
    if isinstance(v, bool):
        return v
    if isinstance(v, str) and v.lower() in ("true", "1", "yes"):
        return True
    if isinstance(v, str) and v.lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


def _float_list(v):
    if isinstance(v, (list, tuple)):
        return [float(x) for x in v]
    return [float(x) for x in str(v).replace(",", " ").split()]


def _positive_int(v):
    if isinstance(v, bool) or float(v) != int(float(v)):
        raise ValueError(f"expected an integer, got {v!r}")
    n = int(float(v))
    if n < 1:
        raise ValueError(f"expected a positive integer, got {v!r}")
    return n


def _choice(*names):
    def conv(v):
        if v not in names:
            raise ValueError(f"expected one of {', '.join(names)}, got {v!r}")
        return v
    conv.choices = names
    return conv


COMMON = {
    "config": (str, None, "JSON config file; command-line flags override its values"),
    "out": (str, "runs", "root directory for run directories"),
    "seed": (int, 0, "master seed"),
    "dt_ns": (float, None, "propagation step in ns (default T/2000)"),
}

ENSEMBLE = {
    "W_MHz": (float, 10.0, "ensemble detuning FWHM in MHz"),
    "M": (_positive_int, 15, "detuning grid size"),
}

TARGET = {
    "objective": (_choice("state", "gate"), "state", "objective kind"),
    "target": (str, None, "target state (up, down, plus) or gate (" + ", ".join(qcore.GATES) + ")"),
    "gamma_MHz": (float, 0.0, "dephasing rate in MHz (state objective only)"),
    "gamma_angular": (_bool, False, "treat the dephasing rate as angular (multiply by 2 pi)"),
}

COMMANDS = {
    "optimize": {
        **COMMON, **ENSEMBLE, **TARGET,
        "family": (_choice(*(f.value for f in basis.Family)), "pm", "basis family"),
        "N": (_positive_int, 1, "number of basis terms"),
        "T_ns": (float, 100.0, "horizon in ns"),
        "Omega_max_MHz": (float, 10.0, "peak-amplitude bound in MHz"),
        "starts": (_positive_int, 120, "number of Nelder-Mead starts"),
        "budget": (_positive_int, None, "evaluations per start (default 200 per free parameter)"),
        "randomize_freqs": (_bool, False, "freeze frequencies (or PM nu) at random start values"),
        "cycles": (float, 5.0, "frequency bound 2 pi [0, cycles/T]"),
        "threads": (_positive_int, 1, "worker processes"),
    },
    "eval": {
        **COMMON, **ENSEMBLE, **TARGET,
        "field": (str, None, "control-field JSON file or shipped field name"),
        "K": (_positive_int, 100_000, "Monte-Carlo draws"),
        "Omega_max_MHz": (float, 10.0, "peak-amplitude bound used for the penalty report"),
    },
    "map": {
        **COMMON, **TARGET,
        "field": (str, None, "control-field JSON file or shipped field name"),
        "field2": (str, None, "second field, compared on the same grid"),
        "W_MHz": (float, 10.0, "ensemble FWHM in MHz; the detuning axis spans +-span*W"),
        "threshold": (float, 0.9, "fidelity threshold for the area metric"),
        "n_delta": (_positive_int, robustness.N_DELTA, "detuning grid points"),
        "n_alpha": (_positive_int, robustness.N_ALPHA, "amplitude-scaling grid points"),
        "span": (float, 1.5, "detuning half-range in units of W"),
        "alpha_lo": (float, 0.5, "lowest amplitude scaling"),
        "alpha_hi": (float, 1.5, "highest amplitude scaling"),
    },
    "sweep": {
        **COMMON, **ENSEMBLE,
        "field": (str, None, "control-field JSON file or shipped field name"),
        "gammas_MHz": (_float_list, [0.0, 0.5, 1.0, 1.5, 2.0], "dephasing rates in MHz"),
        "gamma_angular": (_bool, False, "treat the dephasing rates as angular (multiply by 2 pi)"),
        "K": (_positive_int, 10_000, "Monte-Carlo draws per rate"),
        "target": (str, "up", "target state"),
    },
    "dd": {
        **COMMON,
        "pulse": (_choice("rect", "field"), "rect", "pulse implementation"),
        "Omega_MHz": (float, None, "rectangular pulse amplitude in MHz (default: pi pulse)"),
        "Tpulse_ns": (float, 50.0, "rectangular pulse length in ns"),
        "field_x": (str, None, "X-gate field (pulse=field)"),
        "field_y": (str, None, "Y-gate field (pulse=field)"),
        "tau_start_us": (float, 0.45, "first pulse separation in us"),
        "tau_stop_us": (float, 5.65, "last pulse separation in us"),
        "n_tau": (_positive_int, 20, "number of separations"),
        "trials": (_positive_int, 200, "noise trajectories per point"),
        "idle_dt_ns": (float, 10.0, "step inside idles in ns"),
        "noise_tau_us": (float, 20.0, "OU relaxation time in us"),
        "ou_std_MHz": (float, 0.05, "stationary OU standard deviation in MHz"),
        "static_fwhm_MHz": (float, 26.5, "static detuning FWHM in MHz"),
    },
    "spectrum": {
        **COMMON,
        "field": (str, None, "control-field JSON file or shipped field name"),
        "threshold_MHz": (float, 5.0, "component amplitude threshold in MHz"),
        "f_max_MHz": (float, 50.0, "highest reported frequency in MHz"),
        "n_samples": (_positive_int, 4096, "time samples (power of two >= 4096)"),
        "window": (_choice("hann", "rect"), "hann", "analysis window"),
        "pad": (_positive_int, 4, "zero-padding factor"),
    },
}
COMMANDS["dd"]["dt_ns"] = (float, 1.0, "step inside pulses in ns")

HELP = {
    "optimize": "multi-start optimization of a control field",
    "eval": "ensemble fidelity of a stored field",
    "map": "detuning x amplitude robustness map(s) and f > threshold area ratio",
    "sweep": "Monte-Carlo ensemble fidelity against dephasing rate",
    "dd": "XY-8 decay curve and T2 estimate",
    "spectrum": "quadrature spectra and component count",
}


def _flag(dest):
    return "--" + dest.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmcontrol", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, table in COMMANDS.items():
        p = sub.add_parser(name, help=HELP[name], argument_default=argparse.SUPPRESS)
        for dest, (conv, default, text) in table.items():
            suffix = "" if default is None else f" (default: {default})"
            choices = getattr(conv, "choices", None)
            if conv is _bool:
                p.add_argument(_flag(dest), dest=dest, action="store_const", const=True,
                               help=text + suffix)
            else:
                p.add_argument(_flag(dest), dest=dest, type=conv if choices is None else str,
                               choices=choices, help=text + suffix)
    return parser


# -- configuration -----------------------------------------------------------

def _line_of(text, key):
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else 1


def load_config(path, command) -> dict:
    """Read a flat JSON object of option values; keys may use dashes or underscores."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}:1: config must be a JSON object")
    table = COMMANDS[command]
    out = {}
    for key, value in doc.items():
        dest = key.replace("-", "_")
        line = _line_of(text, key)
        if dest == "config" or dest not in table:
            raise ConfigError(f"{path}:{line}: unknown key {key!r} for command {command!r}")
        try:
            out[dest] = None if value is None else table[dest][0](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}:{line}: bad value for {key!r}: {exc}") from None
    return out


def resolve_options(args: argparse.Namespace) -> dict:
    """Defaults, then config file, then explicit flags."""
    table = COMMANDS[args.command]
    given = {k: v for k, v in vars(args).items() if k != "command"}
    opts = {dest: default for dest, (_, default, _) in table.items()}
    if given.get("config"):
        opts.update(load_config(given["config"], args.command))
    opts.update(given)
    return opts


def shipped_fields() -> list:
    root = resources.files("pmcontrol") / "fields"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_field(ref, flag="--field") -> ControlField:
    """Load a field from a path, or from the shipped examples by name."""
    if not ref:
        raise ConfigError(f"{flag} is required")
    path = Path(ref)
    if not path.exists():
        shipped = resources.files("pmcontrol") / "fields" / (ref if ref.endswith(".json") else ref + ".json")
        if not shipped.is_file():
            raise ConfigError(f"{flag}: no such file or shipped field {ref!r} "
                              f"(shipped: {', '.join(shipped_fields())})")
        text = shipped.read_text(encoding="utf-8")
    else:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"{flag}: cannot read {ref} ({exc.strerror})") from None
    try:
        return ControlField.from_json(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{ref}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{ref}: ill-formed control field: {exc}") from None


def _gamma(value_mhz, angular):
    rate = value_mhz * units.MHZ
    if rate < 0:
        raise ConfigError("dephasing rates must be non-negative")
    return units.TWO_PI * rate if angular else rate


def _dt(opts):
    return None if opts["dt_ns"] is None else units.ns_to_s(opts["dt_ns"])


def _objective_spec(opts, T, omega_max, ensemble):
    cons = ConstraintSet.for_horizon(T, omega_max, opts.get("cycles", 5.0))
    kind = opts["objective"]
    name = opts["target"]
    gamma = _gamma(opts["gamma_MHz"], opts["gamma_angular"])
    if kind == "gate":
        name = name or "pauli_x"
        if name not in qcore.GATES:
            raise ConfigError(f"unknown gate target {name!r} (choose from {', '.join(qcore.GATES)})")
        if gamma != 0:
            raise ConfigError("the gate objective needs gamma = 0")
        return objective.gate_spec(ensemble, T, cons, target=qcore.GATES[name], dt=_dt(opts)), name
    name = name or "up"
    if name not in STATE_TARGETS:
        raise ConfigError(f"unknown state target {name!r} (choose from {', '.join(STATE_TARGETS)})")
    return objective.state_spec(ensemble, T, cons, target=STATE_TARGETS[name], dt=_dt(opts),
                                gamma=gamma), name


# -- run directories ---------------------------------------------------------

class RunDir:
    def __init__(self, root, command):
        stamp = datetime.datetime.now().strftime("%Y%m%d-%H%M%S-%f")
        self.path = Path(root) / f"{stamp}-{command}"
        self.path.mkdir(parents=True, exist_ok=False)
        self.command = command
        self.started = time.time()
        self.stamp = stamp
        self.outputs = {}

    def file(self, name):
        return self.path / name

    def add(self, key, path):
        self.outputs[key] = Path(path)

    def write_json(self, key, name, obj):
        path = self.file(name)
        path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
        self.add(key, path)
        return path

    def write_csv(self, key, name, header, rows):
        path = self.file(name)
        optimizer.write_csv(path, header, rows)
        self.add(key, path)
        return path

    def finish(self, opts, exit_code, extra=None):
        manifest = {
            "command": self.command,
            "exit_code": exit_code,
            "version": __version__,
            "seed": opts.get("seed"),
            "config": {k: v for k, v in opts.items()},
            "started": self.stamp,
            "wall_clock_s": round(time.time() - self.started, 3),
            "outputs": {k: {"path": p.name, "sha256": _sha256(p)} for k, p in self.outputs.items()},
        }
        if extra:
            manifest.update(extra)
        (self.path / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n",
                                                 encoding="utf-8")
        return manifest


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _mhz(w):
    return float(units.angular_to_mhz(w))


# -- commands ----------------------------------------------------------------

def cmd_optimize(opts, run: RunDir):
    T = units.ns_to_s(opts["T_ns"])
    omega_max = units.mhz_to_angular(opts["Omega_max_MHz"])
    ensemble = EnsembleModel.from_fwhm(units.mhz_to_angular(opts["W_MHz"]), opts["M"])
    spec, target = _objective_spec(opts, T, omega_max, ensemble)
    try:
        ospec = optimizer.OptimizationSpec(spec, opts["family"], opts["N"], n_starts=opts["starts"],
                                           budget=opts["budget"], seed=opts["seed"],
                                           randomize_freqs=opts["randomize_freqs"],
                                           workers=opts["threads"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    runset = optimizer.multi_start(ospec)
    best = runset.best_field
    best.save(run.file("best_field.json"))
    run.add("best_field", run.file("best_field.json"))
    for key, path in optimizer.write_runset(runset, run.path).items():
        run.add(key, path)
    f_obj = objective.objective(best, spec)
    summary = {
        "objective": spec.kind,
        "target": target,
        "best_F_obj": f_obj,
        "best_penalized": runset.best.best_value,
        "Omega_ave_MHz": _mhz(basis.average_amplitude(best)),
        "Omega_ave_basis": "envelope |c(t)|",
        "peak_MHz": _mhz(basis.envelope_peak(best)),
        "mean_n_f": runset.mean_nf,
        "budget": ospec.budget,
        "fraction_within_1e-3": runset.fraction_within(1e-3),
    }
    run.write_json("summary", "summary.json", summary)
    print(f"best F_obj      {f_obj:.6f}")
    print(f"Omega_ave       {summary['Omega_ave_MHz']:.4f} MHz (from the envelope |c(t)|)")
    print(f"mean n_f        {runset.mean_nf:.1f} (budget {ospec.budget} per start)")
    print(f"within 1e-3     {summary['fraction_within_1e-3']:.3f} of {opts['starts']} runs")
    return {"n_f": {"mean": runset.mean_nf, "max": int(max(r.n_f for r in runset.runs)),
                    "min": int(min(r.n_f for r in runset.runs))}}


def cmd_eval(opts, run: RunDir):
    field = load_field(opts["field"])
    omega_max = units.mhz_to_angular(opts["Omega_max_MHz"])
    W = units.mhz_to_angular(opts["W_MHz"])
    ensemble = EnsembleModel.from_fwhm(W, opts["M"], opts["K"])
    spec, target = _objective_spec(opts, field.T, omega_max, ensemble)
    f_obj = objective.objective(field, spec)
    mc = objective.monte_carlo_fidelity(field, spec, opts["seed"])
    deltas = robustness.default_delta_grid(W)
    curve = objective.fidelities(field, spec, deltas)
    run.write_csv("curve", "detuning_curve.csv", ["delta_MHz", "fidelity"],
                  zip(units.angular_to_mhz(deltas).tolist(), curve.tolist()))
    summary = {
        "objective": spec.kind,
        "target": target,
        "F_obj": f_obj,
        "F_mc": mc.mean,
        "F_mc_stderr": mc.stderr,
        "K": mc.K,
        "penalty": objective.amplitude_penalty(field, spec),
        "Omega_ave_MHz": _mhz(basis.average_amplitude(field)),
        "Omega_ave_basis": "envelope |c(t)|",
        "peak_MHz": _mhz(basis.envelope_peak(field)),
    }
    run.write_json("summary", "summary.json", summary)
    print(f"F_obj           {f_obj:.6f}")
    print(f"F (Monte Carlo) {mc.mean:.6f} +- {mc.stderr:.6f} (K={mc.K})")
    print(f"Omega_ave       {summary['Omega_ave_MHz']:.4f} MHz (from the envelope |c(t)|)")


def _map_for(field, opts, deltas, alphas):
    gamma = _gamma(opts["gamma_MHz"], opts["gamma_angular"])
    if opts["objective"] == "gate":
        name = opts["target"] or "pauli_x"
        if name not in qcore.GATES:
            raise ConfigError(f"unknown gate target {name!r}")
        return robustness.fidelity_map(field, deltas, alphas, dt=_dt(opts), gate=qcore.GATES[name])
    name = opts["target"] or "up"
    if name not in STATE_TARGETS:
        raise ConfigError(f"unknown state target {name!r}")
    return robustness.fidelity_map(field, deltas, alphas, gamma, _dt(opts), STATE_TARGETS[name])


def cmd_map(opts, run: RunDir):
    if not 0 < opts["threshold"] < 1:
        raise ConfigError("--threshold must lie in (0, 1)")
    W = units.mhz_to_angular(opts["W_MHz"])
    deltas = robustness.default_delta_grid(W, opts["n_delta"], opts["span"])
    alphas = robustness.default_alpha_grid(opts["n_alpha"], opts["alpha_lo"], opts["alpha_hi"])
    maps = {"field": _map_for(load_field(opts["field"]), opts, deltas, alphas)}
    if opts["field2"]:
        maps["field2"] = _map_for(load_field(opts["field2"], "--field2"), opts, deltas, alphas)
    header = ["delta_MHz", "alpha", "fidelity"]
    run.write_csv("map", "map.csv", header, maps["field"].rows())
    if "field2" in maps:
        run.write_csv("map2", "map2.csv", header, maps["field2"].rows())
    summary = robustness.map_summary(maps, opts["threshold"], "field2" if "field2" in maps else None)
    run.write_json("summary", "summary.json", summary)
    for name, area in summary["areas_MHz"].items():
        print(f"area(f > {opts['threshold']}) {name:7s} {area:.4f} MHz")
    if "field2" in maps:
        print(f"area ratio field/field2 = {summary['ratios']['field']:.4f}")


def cmd_sweep(opts, run: RunDir):
    field = load_field(opts["field"])
    target = opts["target"]
    if target not in STATE_TARGETS:
        raise ConfigError(f"unknown state target {target!r}")
    gammas = [_gamma(g, opts["gamma_angular"]) for g in opts["gammas_MHz"]]
    ensemble = EnsembleModel.from_fwhm(units.mhz_to_angular(opts["W_MHz"]), opts["M"], opts["K"])
    rows = robustness.dephasing_sweep(field, gammas, ensemble, seed=opts["seed"], dt=_dt(opts),
                                      target=STATE_TARGETS[target])
    out = [(g_mhz, F, se) for g_mhz, (_, F, se) in zip(opts["gammas_MHz"], rows)]
    run.write_csv("sweep", "sweep.csv", ["gamma_MHz", "F", "stderr"], out)
    run.write_json("summary", "summary.json",
                   {"gamma_units": "2pi MHz" if opts["gamma_angular"] else "MHz (1/us)",
                    "K": opts["K"], "points": [list(r) for r in out]})
    for g, F, se in out:
        print(f"gamma {g:8.4f} MHz   F = {F:.6f} +- {se:.6f}")


def cmd_dd(opts, run: RunDir):
    if opts["pulse"] == "rect":
        T_pulse = units.ns_to_s(opts["Tpulse_ns"])
        omega = None if opts["Omega_MHz"] is None else units.mhz_to_angular(opts["Omega_MHz"])
        impl = ddsim.rectangular_impl(T_pulse, omega)
    else:
        fx = load_field(opts["field_x"], "--field-x")
        fy = load_field(opts["field_y"], "--field-y")
        try:
            impl = ddsim.PulseImpl(fx.family.value, fx, fy)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    taus = np.linspace(units.us_to_s(opts["tau_start_us"]), units.us_to_s(opts["tau_stop_us"]),
                       opts["n_tau"])
    noise = NoiseModel.from_ou_std(units.us_to_s(opts["noise_tau_us"]),
                                   units.mhz_to_angular(opts["ou_std_MHz"]),
                                   units.mhz_to_angular(opts["static_fwhm_MHz"]))
    try:
        curve = ddsim.decay_curve(impl, taus, noise, opts["trials"], units.ns_to_s(opts["dt_ns"]),
                                  opts["seed"], units.ns_to_s(opts["idle_dt_ns"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    run.write_csv("curve", "dd.csv", ["T_us", "P0", "stderr", "n_trials"],
                  [(units.s_to_us(p.T), p.P0, p.stderr, p.n_trials) for p in curve])
    try:
        t2 = units.s_to_us(ddsim.extract_t2(curve))
        failure = None
    except ddsim.NoCrossingError as exc:
        t2, failure = None, str(exc)
    run.write_json("summary", "dd.json", {"T2_us": t2, "threshold": ddsim.T2_THRESHOLD,
                                          "pulse_impl": impl.name})
    if failure:
        raise NumericFailure(f"no T2 crossing: {failure}")
    print(f"T2 = {t2:.3f} us ({impl.name} pulses)")


def cmd_spectrum(opts, run: RunDir):
    field = load_field(opts["field"])
    if not opts["threshold_MHz"] > 0:
        raise ConfigError("--threshold-MHz must be positive")
    try:
        spec = basis.spectrum(field, units.mhz_to_angular(opts["f_max_MHz"]), opts["n_samples"],
                              opts["window"], opts["pad"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    threshold = units.mhz_to_angular(opts["threshold_MHz"])
    peaks = basis.find_peaks(spec.omega, spec.magnitude, threshold)
    to_mhz = units.angular_to_mhz
    run.write_csv("spectrum", "spectrum.csv", ["f_MHz", "x_MHz", "y_MHz"],
                  zip((spec.omega / units.TWO_PI / units.MHZ).tolist(), to_mhz(spec.x).tolist(),
                      to_mhz(spec.y).tolist()))
    run.write_json("summary", "summary.json",
                   {"count": len(peaks), "threshold_MHz": opts["threshold_MHz"],
                    "peaks": [{"f_MHz": p / units.TWO_PI / units.MHZ, "amplitude_MHz": to_mhz(h)}
                              for p, h in peaks]})
    print(f"components >= {opts['threshold_MHz']} MHz: {len(peaks)}")


HANDLERS = {"optimize": cmd_optimize, "eval": cmd_eval, "map": cmd_map, "sweep": cmd_sweep,
            "dd": cmd_dd, "spectrum": cmd_spectrum}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        opts = resolve_options(args)
        run = RunDir(opts["out"], args.command)
    except ConfigError as exc:
        print(f"pmcontrol: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code = 0
    extra = None
    try:
        extra = HANDLERS[args.command](opts, run)
    except ConfigError as exc:
        print(f"pmcontrol: error: {exc}", file=sys.stderr)
        code = EXIT_CONFIG
    except NumericFailure as exc:
        print(f"pmcontrol: {exc}", file=sys.stderr)
        code = EXIT_NUMERIC
    run.finish(opts, code, extra)
    print(f"run directory: {run.path}")
    return code


if __name__ == "__main__":
    sys.exit(main())
