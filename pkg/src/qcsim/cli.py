"""Command-line front end.

Every option can also come from a ``key=value`` file passed with
``--config``; command-line flags win.  Each run that writes an output file
also writes ``<output>.config`` with the fully resolved settings, including
the derived time step.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import cooling, gates, pointer, prep, propagator
from .phase import load_values
from .state import (
    Register,
    RegisterLayout,
    StateVector,
    dumps_state,
    from_register_states,
    load_state,
    save_state,
    system_slice,
)


@dataclass(frozen=True)
class Opt:
    name: str
    type: type
    default: object
    commands: tuple[str, ...]
    help: str = ""


GRID = ("prepare", "evolve", "spectrum", "cool")
OPTIONS = [
    Opt("seed", int, 0, GRID, "seed for all sampling"),
    Opt("output", str, None, GRID + ("qft-check",), "output file"),
    Opt("l", int, 8, GRID, "qubits per register"),
    Opt("dx", float, None, GRID, "grid spacing (default: box of +-6 ground-state widths)"),
    Opt("mass", float, 1.0, GRID),
    Opt("A", int, 1, GRID, "integer tying dt to dx"),
    Opt("potential", str, "harmonic", GRID, "free | harmonic | square_well | file"),
    Opt("omega", float, 1.0, GRID),
    Opt("depth", float, 1.0, GRID),
    Opt("width", float, 1.0, GRID),
    Opt("potential_file", str, None, GRID, "index,value file"),
    Opt("target", str, "gaussian", ("prepare", "evolve"), "gaussian | delta | uniform | plane_wave | file"),
    Opt("center", float, None, ("prepare", "evolve"), "default: box centre"),
    Opt("sigma", float, None, ("prepare", "evolve"), "std of |psi|^2 (default: ground state)"),
    Opt("momentum", float, 0.0, ("prepare", "evolve")),
    Opt("n0", int, 0, ("prepare", "evolve")),
    Opt("k", int, 1, ("prepare", "evolve"), "plane-wave index"),
    Opt("target_file", str, None, ("prepare", "evolve"), "index,re,im file"),
    Opt("q", int, 16, ("prepare", "evolve"), "quadrature points per leaf"),
    Opt("ancilla_qubits", int, 12, ("prepare", "evolve"), "ancilla width for the phase"),
    Opt("input", str, None, ("evolve", "spectrum", "cool"), "state file"),
    Opt("steps", int, 1, ("evolve",)),
    Opt("p", int, 8, ("spectrum",), "pointer qubits"),
    Opt("coupling", float, None, ("spectrum",), "pointer coupling k (default fills the pointer)"),
    Opt("t", float, 1.0, ("spectrum",), "coupling duration"),
    Opt("shots", int, 1024, ("spectrum",)),
    Opt("levels", str, "0,1", ("spectrum", "cool"), "oracle eigenstates mixed into the default input"),
    Opt("bounds", str, None, ("spectrum",), "lo,hi eigenvalue window promised for the input"),
    Opt("bath_levels", int, 1, ("cool",)),
    Opt("E0", float, None, ("cool",), "largest bath gap (default: oracle E1 - E0)"),
    Opt("g", float, 0.05, ("cool",)),
    Opt("reset_period", int, 100, ("cool",)),
    Opt("ramp", str, "constant", ("cool",)),
    Opt("cycles", int, 40, ("cool",)),
    Opt("qubits", int, 8, ("qft-check",)),
    Opt("samples", int, 20, ("qft-check",)),
]
COMMANDS = ("prepare", "evolve", "spectrum", "cool", "qft-check")


class ConfigError(ValueError):
    pass


def read_config_file(path: str) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            if "=" not in ln:
                raise ConfigError(f"{path}: line without '=': {ln!r}")
            key, val = ln.split("=", 1)
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def resolve(command: str, flags: dict, file_values: dict[str, str]) -> dict:
    opts = {o.name: o for o in OPTIONS if command in o.commands}
    errors = []
    cfg = {name: o.default for name, o in opts.items()}
    for key, raw in file_values.items():
        if key not in opts:
            errors.append(f"unknown key {key!r}")
            continue
        try:
            cfg[key] = None if raw == "None" else opts[key].type(raw)
        except ValueError:
            errors.append(f"bad value for {key!r}: {raw!r}")
    for key, val in flags.items():
        if val is not None:
            cfg[key] = val
    if errors:
        raise ConfigError("; ".join(errors))
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcsim", description="Gate-level simulation of quantum-system algorithms")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", default=None, help="key=value file; flags override it")
        for o in OPTIONS:
            if cmd in o.commands:
                sp.add_argument("--" + o.name.replace("_", "-"), dest=o.name, type=o.type,
                                default=None, help=o.help or None)
    return parser


# ---- scenario pieces ----------------------------------------------------------

def make_grid(cfg) -> propagator.GridSpec:
    if cfg["dx"] is None:
        box = propagator.harmonic_grid(cfg["l"], cfg["omega"], cfg["mass"])
        grid = propagator.GridSpec(cfg["l"], box.dx, cfg["mass"], cfg["A"])
    else:
        grid = propagator.GridSpec(cfg["l"], cfg["dx"], cfg["mass"], cfg["A"])
    grid.check()
    return grid


def make_potential(cfg, grid) -> propagator.PotentialSpec:
    kind = cfg["potential"]
    if kind == "free":
        return propagator.free_potential(grid)
    if kind == "harmonic":
        return propagator.harmonic_potential(grid, cfg["omega"])
    if kind == "square_well":
        return propagator.square_well_potential(grid, cfg["depth"], cfg["width"])
    if kind == "file":
        if not cfg["potential_file"]:
            raise ConfigError("potential=file needs potential_file")
        v = load_values(cfg["potential_file"])
        if len(v) != grid.N:
            raise ConfigError(f"potential file has {len(v)} entries, grid needs {grid.N}")
        return propagator.PotentialSpec(v, "file")
    raise ConfigError(f"unknown potential {kind!r}")


def make_target(cfg, grid) -> prep.TargetWavefunction:
    kind = cfg["target"]
    length = grid.length
    if kind == "gaussian":
        center = cfg["center"] if cfg["center"] is not None else (grid.N // 2) * grid.dx
        sigma = cfg["sigma"] if cfg["sigma"] is not None else 1 / math.sqrt(2 * grid.mass * cfg["omega"])
        return prep.gaussian_target(length, center, sigma, cfg["momentum"])
    if kind == "delta":
        return prep.delta_target(length, grid.l, cfg["n0"])
    if kind == "uniform":
        return prep.uniform_target(length)
    if kind == "plane_wave":
        return prep.plane_wave_target(length, cfg["k"])
    if kind == "file":
        if not cfg["target_file"]:
            raise ConfigError("target=file needs target_file")
        return prep.sampled_target(load_state(cfg["target_file"]).amplitudes, length)
    raise ConfigError(f"unknown target {kind!r}")


def prepared_state(cfg, grid) -> StateVector:
    target = make_target(cfg, grid)
    if target.phase is None:
        layout = RegisterLayout.single("x", grid.l)
        tree = prep.build_split_tree(target, grid.l, cfg["q"])
        return prep.prepare_magnitude(layout, "x", tree)
    layout = RegisterLayout([Register("x", grid.l), Register("anc", cfg["ancilla_qubits"], "ancilla")])
    full = prep.prepare_full(layout, "x", target, grid.l, "anc", cfg["q"])
    return system_slice(full, ["x"], {"anc": 0})


def input_state(cfg, grid, potential, register="x") -> StateVector:
    """State from ``input``, else an equal mix of the oracle eigenstates in ``levels``."""
    if cfg.get("input"):
        s = load_state(cfg["input"])
        if s.layout.num_qubits != grid.l:
            raise ConfigError(f"input state has {s.layout.num_qubits} qubits, grid needs {grid.l}")
        return StateVector(s.amplitudes, RegisterLayout.single(register, grid.l))
    layout = RegisterLayout.single(register, grid.l)
    levels = [int(v) for v in cfg["levels"].split(",")]
    return pointer.two_lowest_mixture(grid, potential, layout, register, levels)


def write_config(cfg: dict, extra: dict) -> None:
    if not cfg.get("output"):
        return
    with open(cfg["output"] + ".config", "w") as fh:
        for key in sorted(list(cfg) + list(extra)):
            val = extra[key] if key in extra else cfg[key]
            fh.write(f"{key}={val!r}\n" if isinstance(val, float) else f"{key}={val}\n")


def emit(cfg, text: str) -> None:
    if cfg.get("output"):
        with open(cfg["output"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_qft_check(cfg) -> int:
    l = cfg["qubits"]
    rng = np.random.default_rng(0)
    layout = RegisterLayout.single("x", l)
    worst = 0.0
    for _ in range(cfg["samples"]):
        v = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
        s = StateVector(v / np.linalg.norm(v), layout)
        dev = np.max(np.abs(gates.apply_qft(s, "x").amplitudes - gates.dft_direct(s, "x").amplitudes))
        worst = max(worst, float(dev))
    stats = gates.circuit_stats(gates.qft_circuit(l))
    ok = worst < 1e-10
    emit(cfg, f"qubits={l} max_deviation={worst!r} controlled_phase={stats.breakdown['controlled_phase']} "
              f"gates={stats.gate_count} {'PASS' if ok else 'FAIL'}\n")
    write_config(cfg, {})
    return 0 if ok else 1


def cmd_prepare(cfg) -> int:
    grid = make_grid(cfg)
    state = prepared_state(cfg, grid)
    emit(cfg, dumps_state(state))
    write_config(cfg, {"dt": grid.dt})
    return 0


def cmd_evolve(cfg) -> int:
    grid = make_grid(cfg)
    pot = make_potential(cfg, grid)
    if cfg["input"]:
        state = input_state(cfg, grid, pot)
    else:
        state = prepared_state(cfg, grid)
    state = propagator.evolve(state, "x", grid, pot, steps=cfg["steps"])
    emit(cfg, dumps_state(state))
    write_config(cfg, {"dt": grid.dt})
    return 0


def cmd_spectrum(cfg) -> int:
    grid = make_grid(cfg)
    pot = make_potential(cfg, grid)
    state = input_state(cfg, grid, pot)
    bounds = None
    if cfg["bounds"]:
        lo, hi = (float(v) for v in cfg["bounds"].split(","))
        bounds = (lo, hi)
    obs = pointer.ObservableSpec("x", grid=grid, potential=pot, bounds=bounds)
    cells = 1 << cfg["p"]
    k = cfg["coupling"]
    if k is None:
        lo, hi = obs.bounds
        k = (cells - 1) / (cfg["t"] * (hi - lo))
    spec = pointer.PointerSpec("ptr", cfg["p"], k, cfg["t"], obs)
    est = pointer.sample_spectrum(state, spec, cfg["shots"], cfg["seed"])
    emit(cfg, est.dumps())
    write_config(cfg, {"dt": grid.dt, "coupling": k, "bounds": f"{obs.bounds[0]!r},{obs.bounds[1]!r}"})
    return 0


def cmd_cool(cfg) -> int:
    grid = make_grid(cfg)
    pot = make_potential(cfg, grid)
    es = propagator.eigensystem(grid, pot)
    if cfg["input"]:
        state = input_state(cfg, grid, pot)
    else:
        level = int(cfg["levels"].split(",")[-1])
        state = from_register_states(RegisterLayout.single("x", grid.l), {"x": es.state(level)})
    e0 = cfg["E0"] if cfg["E0"] is not None else float(es.energies[1] - es.energies[0])
    bath = cooling.BathSpec(cfg["bath_levels"], e0, cfg["g"], cfg["reset_period"], cfg["ramp"])
    final, report = cooling.run_cooling(state, "x", grid, pot, bath, cfg["cycles"], cfg["seed"])
    emit(cfg, report.dumps())
    if cfg["output"]:
        save_state(final, cfg["output"] + ".state")
    write_config(cfg, {"dt": grid.dt, "E0": e0})
    return 0


HANDLERS = {
    "qft-check": cmd_qft_check,
    "prepare": cmd_prepare,
    "evolve": cmd_evolve,
    "spectrum": cmd_spectrum,
    "cool": cmd_cool,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = resolve(args.command, flags, file_values)
        return HANDLERS[args.command](cfg)
    except (ValueError, OSError) as exc:
        print(f"qcsim {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
