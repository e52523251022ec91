"""Configuration-driven benchmark harness.

Parses structured-text run configurations, executes the (size x optimizer x
seed) grid deterministically, aggregates energy-error trajectories across
seeds, and emits stable CSV files.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .ansatz import AnsatzKind, build_ansatz
from .optimizers import (
    OPTIMIZER_KINDS,
    OptimizerConfig,
    Problem,
    RunResult,
    run,
)
from .pauli import MAX_DENSE_QUBITS, build_schwinger, build_tfim, exact_ground_energy

WORKERS_ENV_VAR = "VQEBENCH_WORKERS"

RUN_CSV_HEADER = "step,seed,loss,energy,energy_error,circuits_per_sample_convention,circuits_raw,blocked"
AGGREGATE_CSV_HEADER = (
    "step,n_seeds,energy_error_mean,energy_error_std,"
    "circuits_per_sample_convention_mean,circuits_raw_mean"
)


class ConfigError(ValueError):
    """Raised for malformed or invalid run configurations."""


@dataclass(frozen=True)
class OptimizerEntry:
    """One labelled optimizer in the grid; overrides patch the base config."""

    label: str
    kind: str
    overrides: tuple[tuple[str, object], ...] = ()


@dataclass(frozen=True)
class RunConfig:
    problem_kind: str  # tfim | schwinger
    problem_params: tuple[tuple[str, float], ...]
    sizes: tuple[int, ...]
    ansatz_kind: str
    layers: int
    optimizer: OptimizerConfig
    optimizers: tuple[OptimizerEntry, ...]
    seeds: tuple[int, ...]
    out_dir: str
    bond_order: str = "even_first"  # schwinger_so4 sublayer order


def _parse_scalar(raw: str, line_no: int, key: str):
    text = raw.strip()
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("none", "exact"):
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def _raw_sections(text: str) -> dict[str, dict[str, tuple[str, int]]]:
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current = None
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if not current:
                raise ConfigError(f"line {line_no}: empty section name")
            if current in sections:
                raise ConfigError(f"line {line_no}: duplicate section [{current}]")
            sections[current] = {}
            continue
        if current is None:
            raise ConfigError(f"line {line_no}: key outside any [section]")
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {line_no}: empty key")
        if key in sections[current]:
            raise ConfigError(f"line {line_no}: duplicate key {key!r} in [{current}]")
        sections[current][key] = (value.strip(), line_no)
    return sections


_PROBLEM_PARAM_KEYS = {"tfim": ("J", "h"), "schwinger": ("x", "mu", "l")}
_OPTIMIZER_KEYS = {
    "eta": float,
    "c": float,
    "b": float,
    "samples": int,
    "beta": float,
    "shots": (int, type(None)),
    "max_steps": int,
    "blocking": bool,
    "blocking_multiplier": float,
    "update_metric_on_block": bool,
}


def _typed(value, want, key: str, line_no: int):
    kinds = want if isinstance(want, tuple) else (want,)
    if bool in kinds and isinstance(value, bool):
        return value
    if isinstance(value, bool):
        raise ConfigError(f"line {line_no}: key {key!r} must not be boolean")
    if float in kinds and isinstance(value, (int, float)):
        return float(value)
    if int in kinds and isinstance(value, int):
        return value
    if type(None) in kinds and value is None:
        return None
    names = "/".join(getattr(k, "__name__", str(k)) for k in kinds)
    raise ConfigError(f"line {line_no}: key {key!r} expects {names}, got {value!r}")


def _int_list(raw: str, line_no: int, key: str) -> tuple[int, ...]:
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise ConfigError(f"line {line_no}: key {key!r} needs at least one value")
    out = []
    for item in items:
        try:
            out.append(int(item))
        except ValueError:
            raise ConfigError(f"line {line_no}: key {key!r} expects integers, got {item!r}")
    return tuple(out)


def _require(section: dict, section_name: str, key: str):
    if key not in section:
        raise ConfigError(f"missing key {key!r} in section [{section_name}]")
    return section.pop(key)


def _reject_unknown(section: dict, section_name: str):
    if section:
        key, (_, line_no) = next(iter(section.items()))
        raise ConfigError(f"line {line_no}: unknown key {key!r} in section [{section_name}]")


def parse_config(text: str) -> RunConfig:
    """Parse and validate a structured-text run configuration.

    Sections: [problem], [ansatz], [optimizer], optional [optimizer.<LABEL>]
    overrides, [run]. Unknown sections or keys are rejected with the
    offending line number.
    """
    sections = _raw_sections(text)

    problem = dict(_take_section(sections, "problem"))
    raw_kind, line_no = _require(problem, "problem", "kind")
    problem_kind = raw_kind.strip()
    if problem_kind not in _PROBLEM_PARAM_KEYS:
        raise ConfigError(f"line {line_no}: unknown problem kind {problem_kind!r}")
    raw_sizes, line_no = _require(problem, "problem", "qubits")
    sizes = _int_list(raw_sizes, line_no, "qubits")
    params = []
    for key in _PROBLEM_PARAM_KEYS[problem_kind]:
        raw, line_no = _require(problem, "problem", key)
        params.append((key, _typed(_parse_scalar(raw, line_no, key), float, key, line_no)))
    _reject_unknown(problem, "problem")

    ansatz = dict(_take_section(sections, "ansatz"))
    raw_kind, line_no = _require(ansatz, "ansatz", "kind")
    ansatz_kind = raw_kind.strip()
    if ansatz_kind not in ("hardware_efficient", "schwinger_so4"):
        raise ConfigError(f"line {line_no}: unknown ansatz kind {ansatz_kind!r}")
    raw, line_no = _require(ansatz, "ansatz", "layers")
    layers = _typed(_parse_scalar(raw, line_no, "layers"), int, "layers", line_no)
    bond_order = "even_first"
    if "bond_order" in ansatz:
        raw, line_no = ansatz.pop("bond_order")
        if ansatz_kind != "schwinger_so4":
            raise ConfigError(f"line {line_no}: bond_order only applies to schwinger_so4")
        bond_order = raw.strip()
    _reject_unknown(ansatz, "ansatz")

    optimizer = dict(_take_section(sections, "optimizer"))
    raw_labels, line_no = _require(optimizer, "optimizer", "kinds")
    labels = tuple(s.strip() for s in raw_labels.split(",") if s.strip())
    if not labels:
        raise ConfigError(f"line {line_no}: key 'kinds' needs at least one optimizer")
    base_kwargs = {}
    for key, (raw, line_no) in list(optimizer.items()):
        if key not in _OPTIMIZER_KEYS:
            raise ConfigError(f"line {line_no}: unknown key {key!r} in section [optimizer]")
        base_kwargs[key] = _typed(_parse_scalar(raw, line_no, key), _OPTIMIZER_KEYS[key], key, line_no)
    try:
        base = OptimizerConfig(**base_kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid [optimizer] values: {exc}") from exc

    entries = []
    for label in labels:
        override_section = sections.pop(f"optimizer.{label}", {})
        overrides = {}
        kind = label
        for key, (raw, line_no) in override_section.items():
            if key == "kind":
                kind = raw.strip()
                continue
            if key not in _OPTIMIZER_KEYS:
                raise ConfigError(
                    f"line {line_no}: unknown key {key!r} in section [optimizer.{label}]"
                )
            overrides[key] = _typed(
                _parse_scalar(raw, line_no, key), _OPTIMIZER_KEYS[key], key, line_no
            )
        if kind not in OPTIMIZER_KINDS:
            raise ConfigError(f"unknown optimizer kind {kind!r} for entry {label!r}")
        entries.append(OptimizerEntry(label=label, kind=kind, overrides=tuple(sorted(overrides.items()))))

    run_section = dict(_take_section(sections, "run"))
    raw_seeds, line_no = _require(run_section, "run", "seeds")
    seeds = _int_list(raw_seeds, line_no, "seeds")
    raw_out, _ = _require(run_section, "run", "out")
    _reject_unknown(run_section, "run")

    if sections:
        name = next(iter(sections))
        raise ConfigError(f"unknown section [{name}]")

    config = RunConfig(
        problem_kind=problem_kind,
        problem_params=tuple(params),
        sizes=sizes,
        ansatz_kind=ansatz_kind,
        layers=layers,
        optimizer=base,
        optimizers=tuple(entries),
        seeds=seeds,
        out_dir=raw_out,
        bond_order=bond_order,
    )
    _validate_config(config)
    return config


def _take_section(sections, name: str):
    if name not in sections:
        raise ConfigError(f"missing section [{name}]")
    return sections.pop(name)


def _validate_config(cfg: RunConfig) -> None:
    if not cfg.seeds:
        raise ConfigError("seed list must be non-empty")
    for size in cfg.sizes:
        # Constructing the ansatz spec applies its own guards (size, parity).
        AnsatzKind(cfg.ansatz_kind, size, cfg.layers, cfg.bond_order)
        if cfg.problem_kind == "schwinger" and size % 2 != 0:
            raise ConfigError(f"schwinger problem needs even qubit counts, got {size}")
    for entry in cfg.optimizers:
        optimizer_config(cfg, entry)  # raises on invalid overrides


def serialize_config(cfg: RunConfig) -> str:
    """Canonical config text; parse(serialize(parse(text))) is the identity."""
    lines = ["[problem]", f"kind = {cfg.problem_kind}"]
    lines.append(f"qubits = {', '.join(str(s) for s in cfg.sizes)}")
    for key, value in cfg.problem_params:
        lines.append(f"{key} = {value!r}")
    lines += ["", "[ansatz]", f"kind = {cfg.ansatz_kind}", f"layers = {cfg.layers}"]
    if cfg.ansatz_kind == "schwinger_so4":
        lines.append(f"bond_order = {cfg.bond_order}")
    lines += ["", "[optimizer]"]
    lines.append(f"kinds = {', '.join(e.label for e in cfg.optimizers)}")
    base = cfg.optimizer
    for key in _OPTIMIZER_KEYS:
        value = getattr(base, key)
        lines.append(f"{key} = {_format_value(value)}")
    for entry in cfg.optimizers:
        if entry.kind != entry.label or entry.overrides:
            lines += ["", f"[optimizer.{entry.label}]"]
            if entry.kind != entry.label:
                lines.append(f"kind = {entry.kind}")
            for key, value in entry.overrides:
                lines.append(f"{key} = {_format_value(value)}")
    lines += ["", "[run]"]
    lines.append(f"seeds = {', '.join(str(s) for s in cfg.seeds)}")
    lines.append(f"out = {cfg.out_dir}")
    return "\n".join(lines) + "\n"


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def optimizer_config(cfg: RunConfig, entry: OptimizerEntry) -> OptimizerConfig:
    """Base optimizer config with one entry's overrides applied."""
    return replace(cfg.optimizer, **dict(entry.overrides))


def build_problem(cfg: RunConfig, size: int) -> Problem:
    params = dict(cfg.problem_params)
    if cfg.problem_kind == "tfim":
        h = build_tfim(size, params["J"], params["h"])
    else:
        h = build_schwinger(size, params["x"], params["mu"], params["l"])
    circuit = build_ansatz(AnsatzKind(cfg.ansatz_kind, size, cfg.layers, cfg.bond_order))
    return Problem(circuit=circuit, hamiltonian=h, ground_energy=exact_ground_energy(h))


# ---------------------------------------------------------------------------
# Presets: the published experiment grids. The full-size grids exceed the
# dense-diagonalization oracle (n <= 14) and desk-scale budgets; override
# qubits/seeds/steps on the command line to shrink them.
# ---------------------------------------------------------------------------

_STOCHASTIC = ("SPSA", "QNSPSA", "STEIN", "QNSTEIN2", "QNSTEIN3")


def _preset_tfim_fig2() -> RunConfig:
    base = OptimizerConfig(
        eta=0.01, c=0.05, b=2.0, samples=10, beta=0.01, shots=8192, max_steps=300,
        blocking=True, blocking_multiplier=2.0,
    )
    entries = [OptimizerEntry(label=k, kind=k) for k in ("GD", "QNG") + _STOCHASTIC]
    entries[1] = OptimizerEntry(label="QNG", kind="QNG", overrides=(("beta", 0.1),))
    return RunConfig(
        problem_kind="tfim",
        problem_params=(("J", -1.0), ("h", -2.0)),
        sizes=(12, 17, 20),
        ansatz_kind="hardware_efficient",
        layers=3,
        optimizer=base,
        optimizers=tuple(entries),
        seeds=tuple(range(30)),
        out_dir="results/tfim-fig2",
    )


def _preset_schwinger_fig5() -> RunConfig:
    base = OptimizerConfig(
        eta=0.01, c=0.05, b=2.0, samples=15, beta=0.01, shots=10024, max_steps=200,
        blocking=True, blocking_multiplier=2.0,
    )
    entries = [OptimizerEntry(label=k, kind=k) for k in ("GD", "QNG") + _STOCHASTIC]
    entries[1] = OptimizerEntry(label="QNG", kind="QNG", overrides=(("beta", 0.1),))
    return RunConfig(
        problem_kind="schwinger",
        problem_params=(("x", 1.0), ("mu", 0.5), ("l", 0.0)),
        sizes=(4, 6, 8),
        ansatz_kind="schwinger_so4",
        layers=2,
        optimizer=base,
        optimizers=tuple(entries),
        seeds=tuple(range(30)),
        out_dir="results/schwinger-fig5",
    )


def _preset_appendix_c() -> RunConfig:
    base = OptimizerConfig(
        eta=0.01, c=0.05, b=2.0, samples=5, beta=0.01, shots=8192, max_steps=300,
        blocking=True, blocking_multiplier=2.0,
    )
    entries = [
        OptimizerEntry(label="QNSTEIN2", kind="QNSTEIN2"),
        OptimizerEntry(label="QNSTEIN3", kind="QNSTEIN3"),
        OptimizerEntry(label="QNSPSA-N5", kind="QNSPSA", overrides=(("samples", 5),)),
        OptimizerEntry(label="QNSPSA-N10", kind="QNSPSA", overrides=(("samples", 10),)),
        OptimizerEntry(label="QNSPSA-N20", kind="QNSPSA", overrides=(("samples", 20),)),
    ]
    return RunConfig(
        problem_kind="tfim",
        problem_params=(("J", -1.0), ("h", -2.0)),
        sizes=(12,),
        ansatz_kind="hardware_efficient",
        layers=3,
        optimizer=base,
        optimizers=tuple(entries),
        seeds=tuple(range(30)),
        out_dir="results/appendixC",
    )


PRESETS = {
    "tfim-fig2": _preset_tfim_fig2,
    "schwinger-fig5": _preset_schwinger_fig5,
    "appendixC": _preset_appendix_c,
}


def preset_config(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return PRESETS[name]()


# ---------------------------------------------------------------------------
# Grid execution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridKey:
    size: int
    label: str


@dataclass
class BenchmarkResult:
    config: RunConfig
    runs: dict[GridKey, tuple[RunResult, ...]]
    failures: int


def _execute_one(problem: Problem, kind: str, config: OptimizerConfig, seed: int) -> RunResult:
    return run(kind, problem, config, seed)


def _worker_count(n_jobs: int) -> int:
    cap = os.environ.get(WORKERS_ENV_VAR)
    if cap is not None:
        try:
            cap = int(cap)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV_VAR} must be an integer, got {cap!r}")
        if cap < 1:
            raise ConfigError(f"{WORKERS_ENV_VAR} must be >= 1, got {cap}")
        return min(cap, n_jobs)
    return min(os.cpu_count() or 1, n_jobs)


def run_benchmark(cfg: RunConfig) -> BenchmarkResult:
    """Execute the (size x optimizer x seed) grid.

    Runs are independent and seed-deterministic, so the grid executes on a
    bounded worker pool; results are keyed and sorted, making the output
    independent of completion order.
    """
    oversized = [s for s in cfg.sizes if s > MAX_DENSE_QUBITS]
    if oversized:
        raise ConfigError(
            f"system sizes {oversized} exceed the dense ground-energy oracle "
            f"(n <= {MAX_DENSE_QUBITS}); shrink the grid (e.g. --qubits) for desk scale"
        )
    # One problem per size: the dense ground-energy diagonalization is the
    # expensive part and is shared across the optimizer/seed grid.
    problems = {size: build_problem(cfg, size) for size in cfg.sizes}
    configs = {entry.label: optimizer_config(cfg, entry) for entry in cfg.optimizers}
    jobs = [
        (size, entry, seed)
        for size in cfg.sizes
        for entry in cfg.optimizers
        for seed in cfg.seeds
    ]
    workers = _worker_count(len(jobs))
    results: dict[tuple[int, str, int], RunResult] = {}
    if workers <= 1:
        for size, entry, seed in jobs:
            results[(size, entry.label, seed)] = _execute_one(
                problems[size], entry.kind, configs[entry.label], seed
            )
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                (size, entry.label, seed): pool.submit(
                    _execute_one, problems[size], entry.kind, configs[entry.label], seed
                )
                for size, entry, seed in jobs
            }
            for key, future in futures.items():
                results[key] = future.result()
    grouped: dict[GridKey, tuple[RunResult, ...]] = {}
    failures = 0
    for size in cfg.sizes:
        for entry in cfg.optimizers:
            runs = tuple(results[(size, entry.label, seed)] for seed in sorted(cfg.seeds))
            failures += sum(r.failed for r in runs)
            grouped[GridKey(size=size, label=entry.label)] = runs
    return BenchmarkResult(config=cfg, runs=grouped, failures=failures)


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def run_rows(runs) -> list[str]:
    rows = []
    for result in runs:
        for rec in result.records:
            rows.append(
                f"{rec.step},{result.seed},{_fmt(rec.loss)},{_fmt(rec.energy)},"
                f"{_fmt(rec.energy_error)},{rec.circuits_charged},{rec.circuits_raw},"
                f"{int(rec.blocked)}"
            )
    return rows


def aggregate_rows(runs) -> list[str]:
    """Mean and std of the energy error per step across surviving seeds."""
    surviving = [r for r in runs if not r.failed]
    if not surviving:
        return []
    n_steps = min(len(r.records) for r in surviving)
    rows = []
    for k in range(n_steps):
        errs = np.array([r.records[k].energy_error for r in surviving])
        charged = np.array([r.records[k].circuits_charged for r in surviving], dtype=float)
        raw = np.array([r.records[k].circuits_raw for r in surviving], dtype=float)
        rows.append(
            f"{surviving[0].records[k].step},{len(surviving)},{_fmt(errs.mean())},"
            f"{_fmt(errs.std(ddof=0))},{_fmt(charged.mean())},{_fmt(raw.mean())}"
        )
    return rows


def emit_csv(result: BenchmarkResult, out_dir: str | None = None) -> list[str]:
    """Write one per-run CSV and one aggregate CSV per (optimizer, size).

    UTF-8, LF line endings, full double-precision decimals. Returns the
    written paths (sorted).
    """
    cfg = result.config
    out = out_dir if out_dir is not None else cfg.out_dir
    os.makedirs(out, exist_ok=True)
    written = []
    for key in sorted(result.runs, key=lambda k: (k.label, k.size)):
        runs = result.runs[key]
        stem = f"{key.label}_{cfg.problem_kind}{key.size}q"
        run_path = os.path.join(out, f"{stem}.csv")
        _write_csv(run_path, RUN_CSV_HEADER, run_rows(runs))
        agg_path = os.path.join(out, f"{stem}_aggregate.csv")
        _write_csv(agg_path, AGGREGATE_CSV_HEADER, aggregate_rows(runs))
        written += [run_path, agg_path]
    return sorted(written)


def _write_csv(path: str, header: str, rows: list[str]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(row + "\n")
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc
