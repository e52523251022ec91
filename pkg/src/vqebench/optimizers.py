"""Benchmark optimizers with the natural-gradient update rule.

Seven optimizer kinds share one step loop: estimate a gradient, optionally
estimate and regularize a metric tensor, take a (natural) gradient step,
optionally apply loss blocking, and record the per-iteration trace with
circuit-evaluation accounting in both raw-call and per-sample conventions.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .ansatz import loss
from .estimators import (
    MetricEstimate,
    ScalarOracle,
    SmoothingParams,
    displacement_fidelity_oracle,
    exact_metric,
    spsa_gradient,
    spsa_metric,
    stein_gradient_2eval,
    stein_metric_2eval,
    stein_metric_3eval,
)
from .pauli import PauliSum
from .simulator import Circuit

OPTIMIZER_KINDS = ("GD", "QNG", "SPSA", "QNSPSA", "STEIN", "QNSTEIN2", "QNSTEIN3")
NATURAL_KINDS = frozenset({"QNG", "QNSPSA", "QNSTEIN2", "QNSTEIN3"})


@dataclass(frozen=True)
class OptimizerConfig:
    """Hyperparameters shared by all optimizer kinds.

    shots=None selects exact expectation values throughout. Blocking compares
    the measured candidate loss against the current one and is only active
    with finite shots (in exact mode there is no noise to guard against, so
    candidates are always accepted and no candidate evaluation is charged).
    """

    eta: float = 0.01
    c: float = 0.05
    b: float = 2.0
    samples: int = 10
    beta: float = 0.01
    shots: int | None = None
    max_steps: int = 100
    blocking: bool = True
    blocking_multiplier: float = 2.0
    update_metric_on_block: bool = True

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be > 0")
        if self.c <= 0 or self.b <= 0:
            raise ValueError("c and b must be > 0")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be >= 1 when set")
        if self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")
        if self.blocking_multiplier < 0:
            raise ValueError("blocking_multiplier must be >= 0")

    @property
    def blocking_active(self) -> bool:
        return self.blocking and self.shots is not None


@dataclass(frozen=True)
class Problem:
    """One VQE instance: ansatz circuit, Hamiltonian, and its exact ground energy."""

    circuit: Circuit
    hamiltonian: PauliSum
    ground_energy: float


@dataclass
class EvalCounters:
    """Cumulative circuit-evaluation counts, split by query type and convention."""

    loss_raw: int = 0
    loss_charged: int = 0
    overlap_raw: int = 0
    overlap_charged: int = 0

    @property
    def total_raw(self) -> int:
        return self.loss_raw + self.overlap_raw

    @property
    def total_charged(self) -> int:
        return self.loss_charged + self.overlap_charged

    def copy(self) -> "EvalCounters":
        return EvalCounters(self.loss_raw, self.loss_charged, self.overlap_raw, self.overlap_charged)


@dataclass(frozen=True)
class RunRecord:
    """One trace row: energies, error vs exact ground state, cumulative costs.

    wall_time is excluded from equality (and from the CSV schema): the
    determinism contract covers everything except timing.
    """

    step: int
    loss: float
    energy: float
    energy_error: float
    circuits_charged: int
    circuits_raw: int
    blocked: bool
    wall_time: float = field(compare=False)


@dataclass
class OptimizerState:
    theta: np.ndarray
    metric_avg: np.ndarray | None
    metric_count: int
    k: int
    loss_current: float
    counters: EvalCounters
    trace: list[RunRecord]


@dataclass(frozen=True)
class RunResult:
    kind: str
    seed: int
    records: tuple[RunRecord, ...]
    failed: bool


def regularize_metric(metric: np.ndarray, beta: float) -> np.ndarray:
    """Positive-definite regularization (|metric| + beta I) / (1 + beta).

    |metric| is the symmetric absolute value V |Lambda| V^T; the result is
    exactly symmetric with minimum eigenvalue >= beta / (1 + beta).
    """
    metric = np.asarray(metric, dtype=float)
    if np.max(np.abs(metric - metric.T)) >= 1e-10:
        raise ValueError("metric must be symmetric")
    eigvals, eigvecs = np.linalg.eigh((metric + metric.T) / 2.0)
    out = (eigvecs * np.abs(eigvals)) @ eigvecs.T
    out = (out + beta * np.eye(len(metric))) / (1.0 + beta)
    return (out + out.T) / 2.0


def average_metric(prev: np.ndarray | None, new: np.ndarray, k: int) -> np.ndarray:
    """Running average F_k = k/(k+1) F_{k-1} + 1/(k+1) Fhat_k; F_0 = Fhat_0."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0 or prev is None:
        return np.array(new, dtype=float)
    prev = np.asarray(prev, dtype=float)
    new = np.asarray(new, dtype=float)
    if prev.shape != new.shape:
        raise ValueError(f"metric shapes differ: {prev.shape} vs {new.shape}")
    return (k * prev + new) / (k + 1.0)


def natural_step(theta: np.ndarray, grad: np.ndarray, metric_reg: np.ndarray, eta: float) -> np.ndarray:
    """theta - eta * x with metric_reg @ x = grad, solved via Cholesky factors.

    The explicit inverse is never formed; a Cholesky failure signals a
    non-positive-definite metric (unreachable after regularization).
    """
    lower = np.linalg.cholesky(metric_reg)
    y = np.linalg.solve(lower, grad)
    x = np.linalg.solve(lower.T, y)
    return theta - eta * x


def blocking_check(loss_candidate: float, loss_current: float, tol: float) -> bool:
    """Accept the candidate iff its loss is at most the current loss plus tol."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    return loss_candidate <= loss_current + tol


def shot_noise_scale(h: PauliSum, shots: int) -> float:
    """Per-evaluation loss noise scale sqrt(sum of squared non-constant coefficients) / sqrt(shots).

    Identity terms are added exactly by the sampler and contribute no noise.
    """
    ssq = sum(t.coefficient**2 for t in h.terms if not t.is_identity)
    return math.sqrt(ssq) / math.sqrt(shots)


def exact_parameter_shift_gradient(problem: Problem, theta: np.ndarray) -> np.ndarray:
    """Analytic loss gradient from exact evaluations at +-pi/2 shifts."""
    d = len(theta)
    grad = np.empty(d)
    for i in range(d):
        shift = np.zeros(d)
        shift[i] = np.pi / 2.0
        plus = loss(problem.circuit, problem.hamiltonian, theta + shift)
        minus = loss(problem.circuit, problem.hamiltonian, theta - shift)
        grad[i] = (plus - minus) / 2.0
    return grad


def _loss_oracle(problem: Problem, config: OptimizerConfig, rng: np.random.Generator) -> ScalarOracle:
    return ScalarOracle(
        lambda th: loss(problem.circuit, problem.hamiltonian, th, shots=config.shots, rng=rng)
    )


def _estimate_gradient(kind, state, problem, config, rng) -> np.ndarray:
    d = problem.circuit.param_count
    if kind in ("GD", "QNG"):
        grad = exact_parameter_shift_gradient(problem, state.theta)
        state.counters.loss_raw += 2 * d
        state.counters.loss_charged += 2 * d
        return grad
    oracle = _loss_oracle(problem, config, rng)
    if kind in ("SPSA", "QNSPSA"):
        grad = spsa_gradient(oracle, state.theta, config.c, config.samples, rng)
    else:
        grad = stein_gradient_2eval(oracle, state.theta, config.c, config.samples, rng)
    state.counters.loss_raw += oracle.calls
    state.counters.loss_charged += oracle.calls
    return grad


def _estimate_metric(kind, state, problem, config, rng) -> MetricEstimate:
    if kind == "QNG":
        return exact_metric(problem.circuit, state.theta)
    fid = displacement_fidelity_oracle(problem.circuit, state.theta, shots=config.shots, rng=rng)
    if kind == "QNSPSA":
        est = spsa_metric(fid, state.theta, config.c, config.samples, rng)
    elif kind == "QNSTEIN2":
        params = SmoothingParams(c=config.c, b=config.b, samples=config.samples)
        est = stein_metric_2eval(fid, state.theta, params, rng)
    else:  # QNSTEIN3
        params = SmoothingParams(c=config.c, b=config.b, samples=config.samples)
        est = stein_metric_3eval(fid, state.theta, params, rng)
    return est


def step(
    kind: str,
    state: OptimizerState,
    problem: Problem,
    config: OptimizerConfig,
    rng: np.random.Generator,
) -> OptimizerState:
    """One full optimizer iteration; mutates and returns `state`."""
    if kind not in OPTIMIZER_KINDS:
        raise ValueError(f"unknown optimizer kind {kind!r}")
    started = time.perf_counter()

    grad = _estimate_gradient(kind, state, problem, config, rng)

    metric_avg_candidate = None
    if kind in NATURAL_KINDS:
        estimate = _estimate_metric(kind, state, problem, config, rng)
        state.counters.overlap_raw += estimate.raw_evals
        state.counters.overlap_charged += estimate.charged_evals
        metric_avg_candidate = average_metric(state.metric_avg, estimate.matrix, state.metric_count)
        metric_reg = regularize_metric(metric_avg_candidate, config.beta)
        candidate = natural_step(state.theta, grad, metric_reg, config.eta)
    else:
        candidate = state.theta - config.eta * grad

    blocked = False
    if config.blocking_active:
        candidate_loss = loss(
            problem.circuit, problem.hamiltonian, candidate, shots=config.shots, rng=rng
        )
        state.counters.loss_raw += 1
        state.counters.loss_charged += 1
        tol = config.blocking_multiplier * shot_noise_scale(problem.hamiltonian, config.shots)
        if blocking_check(candidate_loss, state.loss_current, tol):
            state.theta = candidate
            state.loss_current = candidate_loss
        else:
            blocked = True
    else:
        state.theta = candidate

    # The metric estimate carries local-geometry information regardless of
    # acceptance; by default it still enters the running average on a block.
    if metric_avg_candidate is not None and (not blocked or config.update_metric_on_block):
        state.metric_avg = metric_avg_candidate
        state.metric_count += 1

    state.k += 1
    energy = loss(problem.circuit, problem.hamiltonian, state.theta)
    loss_estimate = state.loss_current if config.blocking_active else energy
    state.trace.append(
        RunRecord(
            step=state.k,
            loss=loss_estimate,
            energy=energy,
            energy_error=energy - problem.ground_energy,
            circuits_charged=state.counters.total_charged,
            circuits_raw=state.counters.total_raw,
            blocked=blocked,
            wall_time=time.perf_counter() - started,
        )
    )
    return state


def run(kind: str, problem: Problem, config: OptimizerConfig, seed: int) -> RunResult:
    """Full optimization from a seeded uniform(-pi, pi) initialization.

    The trace always contains the initial-point row; a non-finite energy or
    loss marks the run failed and retains the partial trace.
    """
    if kind not in OPTIMIZER_KINDS:
        raise ValueError(f"unknown optimizer kind {kind!r}")
    rng = np.random.default_rng(seed)
    started = time.perf_counter()
    theta0 = rng.uniform(-np.pi, np.pi, problem.circuit.param_count)
    state = OptimizerState(
        theta=theta0,
        metric_avg=None,
        metric_count=0,
        k=0,
        loss_current=math.nan,
        counters=EvalCounters(),
        trace=[],
    )
    energy0 = loss(problem.circuit, problem.hamiltonian, theta0)
    if config.blocking_active:
        state.loss_current = loss(
            problem.circuit, problem.hamiltonian, theta0, shots=config.shots, rng=rng
        )
        state.counters.loss_raw += 1
        state.counters.loss_charged += 1
        loss_estimate = state.loss_current
    else:
        loss_estimate = energy0
    state.trace.append(
        RunRecord(
            step=0,
            loss=loss_estimate,
            energy=energy0,
            energy_error=energy0 - problem.ground_energy,
            circuits_charged=state.counters.total_charged,
            circuits_raw=state.counters.total_raw,
            blocked=False,
            wall_time=time.perf_counter() - started,
        )
    )
    failed = not (math.isfinite(energy0) and math.isfinite(loss_estimate))
    if not failed:
        for _ in range(config.max_steps):
            step(kind, state, problem, config, rng)
            last = state.trace[-1]
            if not (math.isfinite(last.energy) and math.isfinite(last.loss)):
                failed = True
                break
    return RunResult(kind=kind, seed=seed, records=tuple(state.trace), failed=failed)
