"""Command-line interface.

Subcommands: run a config file, run a named preset with desk-scale
overrides, print an exact ground energy, or print a metric-estimator
comparison table.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import bench
from .ansatz import AnsatzKind, build_ansatz
from .estimators import (
    SmoothingParams,
    displacement_fidelity_oracle,
    exact_metric,
    parameter_shift_metric,
    spsa_metric,
    stein_metric_2eval,
    stein_metric_3eval,
)
from .pauli import build_schwinger, build_tfim, exact_ground_energy


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vqebench",
        description="Variational-quantum-optimization benchmark workbench.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a benchmark config file")
    p_run.add_argument("config", help="path to a structured-text config")
    p_run.add_argument("--out", help="override the output directory")

    p_preset = sub.add_parser("preset", help="run a named preset")
    p_preset.add_argument("name", choices=sorted(bench.PRESETS))
    p_preset.add_argument("--qubits", type=int, nargs="+", help="override system sizes")
    p_preset.add_argument("--layers", type=int, help="override ansatz layers")
    p_preset.add_argument("--seeds", type=int, help="number of seeds (0..K-1 plus offset)")
    p_preset.add_argument("--seed-offset", type=int, default=0, help="first seed for split execution")
    p_preset.add_argument("--steps", type=int, help="override max optimization steps")
    p_preset.add_argument(
        "--bond-order",
        choices=["even_first", "odd_first"],
        help="override the schwinger_so4 sublayer order",
    )
    p_preset.add_argument("--out", help="override the output directory")
    p_preset.add_argument(
        "--dump-config", action="store_true", help="print the config text instead of running"
    )

    p_exact = sub.add_parser("exact", help="print an exact ground energy")
    exact_sub = p_exact.add_subparsers(dest="problem", required=True)
    p_tfim = exact_sub.add_parser("tfim")
    p_tfim.add_argument("--qubits", type=int, required=True)
    p_tfim.add_argument("--J", type=float, required=True)
    p_tfim.add_argument("--h", type=float, required=True)
    p_schw = exact_sub.add_parser("schwinger")
    p_schw.add_argument("--qubits", type=int, required=True)
    p_schw.add_argument("--x", type=float, required=True)
    p_schw.add_argument("--mu", type=float, required=True)
    p_schw.add_argument("--l", type=float, required=True)

    p_metric = sub.add_parser(
        "metric-check", help="compare the metric estimators on one ansatz"
    )
    p_metric.add_argument(
        "--ansatz",
        choices=["ry1", "hardware_efficient", "schwinger_so4"],
        default="ry1",
    )
    p_metric.add_argument("--qubits", type=int, default=1)
    p_metric.add_argument("--layers", type=int, default=1)
    p_metric.add_argument("--samples", type=int, default=10000)
    p_metric.add_argument("--c", type=float, default=0.01)
    p_metric.add_argument("--b", type=float, default=1.0)
    p_metric.add_argument("--shots", type=int, default=None)
    p_metric.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_run(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = bench.parse_config(text)
    except bench.ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return 1
    if args.out:
        cfg = replace(cfg, out_dir=args.out)
    return _run_and_report(cfg)


def _cmd_preset(args) -> int:
    cfg = bench.preset_config(args.name)
    if args.qubits:
        cfg = replace(cfg, sizes=tuple(args.qubits))
    if args.layers:
        cfg = replace(cfg, layers=args.layers)
    if args.seeds is not None:
        if args.seeds < 1:
            print("error: --seeds must be >= 1", file=sys.stderr)
            return 1
        cfg = replace(cfg, seeds=tuple(range(args.seed_offset, args.seed_offset + args.seeds)))
    elif args.seed_offset:
        cfg = replace(cfg, seeds=tuple(s + args.seed_offset for s in cfg.seeds))
    if args.steps is not None:
        cfg = replace(cfg, optimizer=replace(cfg.optimizer, max_steps=args.steps))
    if args.bond_order:
        cfg = replace(cfg, bond_order=args.bond_order)
    if args.out:
        cfg = replace(cfg, out_dir=args.out)
    try:
        bench._validate_config(cfg)
    except bench.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.dump_config:
        print(bench.serialize_config(cfg), end="")
        return 0
    return _run_and_report(cfg)


def _run_and_report(cfg: bench.RunConfig) -> int:
    try:
        result = bench.run_benchmark(cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    paths = bench.emit_csv(result)
    total = sum(len(runs) for runs in result.runs.values())
    print(f"completed {total} runs ({result.failures} failed); wrote {len(paths)} files to {cfg.out_dir}")
    for path in paths:
        print(f"  {path}")
    return 0


def _cmd_exact(args) -> int:
    try:
        if args.problem == "tfim":
            h = build_tfim(args.qubits, args.J, args.h)
        else:
            h = build_schwinger(args.qubits, args.x, args.mu, args.l)
        energy = exact_ground_energy(h)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(repr(energy))
    return 0


def _format_matrix_row(matrix: np.ndarray) -> str:
    return "  ".join(f"{v: .6f}" for v in matrix.reshape(-1))


def _cmd_metric_check(args) -> int:
    try:
        spec = AnsatzKind(args.ansatz, args.qubits, args.layers)
        circuit = build_ansatz(spec)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    d = circuit.param_count
    rng = np.random.default_rng(args.seed)
    theta = rng.uniform(-np.pi, np.pi, d)
    params = SmoothingParams(c=args.c, b=args.b, samples=args.samples)

    exact = exact_metric(circuit, theta)
    shift = parameter_shift_metric(circuit, theta, shots=args.shots, rng=rng)
    fid2 = displacement_fidelity_oracle(circuit, theta, shots=args.shots, rng=rng)
    stein2 = stein_metric_2eval(fid2, theta, params, rng)
    fid3 = displacement_fidelity_oracle(circuit, theta, shots=args.shots, rng=rng)
    stein3 = stein_metric_3eval(fid3, theta, params, rng)
    fid4 = displacement_fidelity_oracle(circuit, theta, shots=args.shots, rng=rng)
    spsa = spsa_metric(fid4, theta, args.c, args.samples, rng)

    print(f"ansatz={args.ansatz} qubits={circuit.qubit_count} d={d} "
          f"samples={args.samples} c={args.c} b={args.b} shots={args.shots}")
    show_entries = d <= 3
    header = "entries" if show_entries else "diagonal"
    print(f"{'method':<16}{'overlap evals':>14}  max|diff vs exact|  {header}")
    for name, est in [
        ("exact", exact),
        ("parameter-shift", shift),
        ("stein-2eval", stein2),
        ("stein-3eval", stein3),
        ("spsa", spsa),
    ]:
        dev = np.max(np.abs(est.matrix - exact.matrix))
        shown = est.matrix if show_entries else np.diag(est.matrix)
        print(f"{name:<16}{est.raw_evals:>14}  {dev:>18.6f}  {_format_matrix_row(shown)}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "preset":
        return _cmd_preset(args)
    if args.command == "exact":
        return _cmd_exact(args)
    return _cmd_metric_check(args)


if __name__ == "__main__":
    sys.exit(main())
