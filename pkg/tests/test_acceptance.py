"""Acceptance suite: one test per release criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`. The statistical criteria use
frozen seeds, so outcomes are deterministic. The two desk-scale benchmark
criteria execute on a process pool; cap it with VQEBENCH_WORKERS.
"""

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest

import vqebench.bench as bench
from vqebench.ansatz import hardware_efficient, schwinger_ansatz, single_qubit_ry
from vqebench.estimators import (
    ScalarOracle,
    SmoothingParams,
    displacement_fidelity_oracle,
    exact_metric,
    parameter_shift_metric,
    spsa2_hessian,
    spsa_metric,
    stein_hessian_1eval,
    stein_hessian_2eval,
    stein_hessian_3eval,
    stein_metric_2eval,
    stein_metric_3eval,
)
from vqebench.optimizers import OptimizerConfig, Problem, regularize_metric, run
from vqebench.pauli import (
    build_schwinger,
    build_tfim,
    exact_ground_energy,
    pauli_string_matrix,
    to_dense,
)

SCHWINGER_4_GROUND = 0.20639550666515885  # dense-diagonalization fixture


def _report(number, name):
    print(f"\nACCEPTANCE {number} ({name}): PASS")


def _workers(n_jobs):
    cap = os.environ.get(bench.WORKERS_ENV_VAR)
    workers = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(workers, n_jobs))


# -- 1 ----------------------------------------------------------------------


def test_criterion_1_hessian_estimators_unbiased():
    """All four Hessian estimators match the analytic Hessian of a quadratic
    within 5 empirical standard errors elementwise at N = 1e5."""
    d = 4
    rng_a = np.random.default_rng(2024)
    a = rng_a.uniform(-1, 1, (d, d))
    a = (a + a.T) / 2
    theta0 = np.zeros(d)
    c = 0.1
    batches, batch_size = 20, 5000  # 1e5 samples total

    estimators = {
        "2spsa": spsa2_hessian,
        "stein1": stein_hessian_1eval,
        "stein2": stein_hessian_2eval,
        "stein3": stein_hessian_3eval,
    }
    for name, estimator in estimators.items():
        rng = np.random.default_rng(hash(name) % 2**32)
        f = ScalarOracle(lambda th: 0.5 * th @ a @ th)
        stack = np.array(
            [estimator(f, theta0, c, batch_size, rng) for _ in range(batches)]
        )
        mean = stack.mean(axis=0)
        se = stack.std(axis=0, ddof=1) / np.sqrt(batches)
        assert np.all(np.abs(mean - a) <= 5 * se + 1e-12), name
    _report(1, "Hessian-estimator unbiasedness")


# -- 2 ----------------------------------------------------------------------


def test_criterion_2_metric_estimators_single_qubit():
    """Stochastic metric estimators within 0.02 of the analytic value 1/4 at
    N = 1e5 (c = 0.01, b = 1); parameter-shift and exact within 1e-8."""
    circuit = single_qubit_ry()
    theta = np.array([0.3])
    params = SmoothingParams(c=0.01, b=1.0, samples=100_000)

    m2 = stein_metric_2eval(
        displacement_fidelity_oracle(circuit, theta), theta, params, np.random.default_rng(101)
    )
    assert abs(m2.matrix[0, 0] - 0.25) < 0.02
    m3 = stein_metric_3eval(
        displacement_fidelity_oracle(circuit, theta), theta, params, np.random.default_rng(102)
    )
    assert abs(m3.matrix[0, 0] - 0.25) < 0.02
    ms = spsa_metric(
        displacement_fidelity_oracle(circuit, theta), theta, 0.01, 100_000, np.random.default_rng(103)
    )
    assert abs(ms.matrix[0, 0] - 0.25) < 0.02
    assert abs(parameter_shift_metric(circuit, theta).matrix[0, 0] - 0.25) < 1e-8
    assert abs(exact_metric(circuit, theta).matrix[0, 0] - 0.25) < 1e-8
    _report(2, "metric-estimator correctness")


# -- 3 ----------------------------------------------------------------------


def test_criterion_3_bias_and_variance_scaling():
    """Three-evaluation metric bias scales as O(c^2) (successive ratios in
    [2, 8]); two-evaluation elementwise std scales as O(N^-1/2)."""
    circuit = hardware_efficient(2, 1)
    theta = np.random.default_rng(11).uniform(-np.pi, np.pi, 2)

    # Bias: common perturbation draws across c values (exact-mode estimators
    # consume only the u batch, so a fresh generator with one seed reproduces
    # them), differenced against a near-zero reference c to cancel the
    # Monte-Carlo noise shared by all c values.
    samples, seed, c_ref = 100_000, 314159, 0.005

    def mean_estimate(c):
        fid = displacement_fidelity_oracle(circuit, theta)
        p = SmoothingParams(c=c, b=1.0, samples=samples)
        return stein_metric_3eval(fid, theta, p, np.random.default_rng(seed)).matrix

    reference = mean_estimate(c_ref)
    bias = {c: np.max(np.abs(mean_estimate(c) - reference)) for c in (0.2, 0.1, 0.05)}
    r1 = bias[0.2] / bias[0.1]
    r2 = bias[0.1] / bias[0.05]
    assert 2.0 <= r1 <= 8.0, (bias, r1)
    assert 2.0 <= r2 <= 8.0, (bias, r2)

    # Monte-Carlo error: repeated two-evaluation estimates per sample count.
    rng = np.random.default_rng(271828)
    sizes = (100, 1000, 10_000)
    repeats = (60, 40, 25)
    stds = []
    for n, reps in zip(sizes, repeats):
        p = SmoothingParams(c=0.05, b=1.0, samples=n)
        stack = np.array(
            [
                stein_metric_2eval(
                    displacement_fidelity_oracle(circuit, theta), theta, p, rng
                ).matrix
                for _ in range(reps)
            ]
        )
        stds.append(stack.std(axis=0, ddof=1).mean())
    slope = np.polyfit(np.log10(sizes), np.log10(stds), 1)[0]
    assert -0.65 <= slope <= -0.35, (stds, slope)
    _report(3, "bias O(c^2) and std O(N^-1/2) scaling")


# -- 4 ----------------------------------------------------------------------


def test_criterion_4_circuit_count_accounting():
    """Charged evaluations per step and sample are exactly QNSPSA 6,
    QNSTEIN2 4, QNSTEIN3 5, SPSA 2, STEIN 2, as integers."""
    ham = build_tfim(2, -1.0, -2.0)
    problem = Problem(hardware_efficient(2, 1), ham, exact_ground_energy(ham))
    per_sample = {"QNSPSA": 6, "QNSTEIN2": 4, "QNSTEIN3": 5, "SPSA": 2, "STEIN": 2}
    for n in (1, 5, 10):
        config = OptimizerConfig(samples=n, shots=32, blocking=False, max_steps=2)
        for kind, expected in per_sample.items():
            records = run(kind, problem, config, seed=0).records
            for k, rec in enumerate(records):
                assert rec.circuits_charged == expected * n * k, (kind, n, k)
    _report(4, "circuit-count accounting")


# -- 5 ----------------------------------------------------------------------


def test_criterion_5_exact_ground_energies():
    """Benchmark Hamiltonians match closed forms and unexpanded operators."""
    assert abs(exact_ground_energy(build_tfim(2, -1.0, -2.0)) + np.sqrt(17)) < 1e-10

    # n = 2: expanded Pauli form vs the unexpanded dense operator.
    x, mu, l = 1.0, 0.5, 0.0
    expanded = to_dense(build_schwinger(2, x, mu, l))
    direct = (
        (x / 2) * (pauli_string_matrix("XX") + pauli_string_matrix("YY"))
        + (mu / 2) * (np.eye(4) + pauli_string_matrix("ZI"))
        + (mu / 2) * (np.eye(4) - pauli_string_matrix("IZ"))
        + (0.5 * pauli_string_matrix("ZI")) @ (0.5 * pauli_string_matrix("ZI"))
    )
    assert np.max(np.abs(expanded - direct)) < 1e-10

    # n = 4: full spectrum vs a term-by-term dense construction.
    h4 = build_schwinger(4, x, mu, l)
    dense = np.zeros((16, 16), dtype=complex)
    for term in h4.terms:
        dense += term.coefficient * pauli_string_matrix(term.axes)
    assert np.max(np.abs(np.linalg.eigvalsh(dense) - np.linalg.eigvalsh(to_dense(h4)))) < 1e-10
    assert abs(exact_ground_energy(h4) - SCHWINGER_4_GROUND) < 1e-10
    _report(5, "exact ground energies")


# -- 6 ----------------------------------------------------------------------


def test_criterion_6_regularization_contract():
    """Regularized metrics are symmetric with min eigenvalue >= beta/(1+beta)."""
    rng = np.random.default_rng(60)
    for beta in (1e-2, 1e-1):
        for _ in range(500):
            m = rng.normal(size=(10, 10))
            m = (m + m.T) / 2
            out = regularize_metric(m, beta)
            assert np.array_equal(out, out.T)
            assert np.linalg.eigvalsh(out).min() >= beta / (1 + beta) - 1e-10
    _report(6, "regularization contract")


# -- 7 ----------------------------------------------------------------------


def _fig2_run(args):
    kind, seed = args
    ham = build_tfim(6, -1.0, -2.0)
    problem = Problem(hardware_efficient(6, 2), ham, exact_ground_energy(ham))
    config = OptimizerConfig(
        eta=0.01, c=0.05, b=2.0, samples=10, beta=0.01,
        shots=8192, max_steps=150, blocking=True,
    )
    return kind, seed, run(kind, problem, config, seed)


def _error_at_budget(records, budget):
    err = records[0].energy_error
    for rec in records:
        if rec.circuits_charged <= budget:
            err = rec.energy_error
        else:
            break
    return err


def test_criterion_7_desk_scale_orderings():
    """Scaled-down Ising benchmark reproduces the published orderings:
    natural-gradient Stein optimizers beat the first-order Stein optimizer on
    median final error, and QNSTEIN2 is at or below QNSPSA at matched circuit
    budget over the final quartile."""
    kinds = ("STEIN", "QNSPSA", "QNSTEIN2", "QNSTEIN3")
    seeds = range(10)
    jobs = [(k, s) for k in kinds for s in seeds]
    results = {}
    with ProcessPoolExecutor(max_workers=_workers(len(jobs))) as pool:
        for kind, seed, result in pool.map(_fig2_run, jobs):
            assert not result.failed
            results[(kind, seed)] = result

    finals = {
        k: np.median([results[(k, s)].records[-1].energy_error for s in seeds]) for k in kinds
    }
    assert finals["QNSTEIN2"] <= finals["STEIN"], finals
    assert finals["QNSTEIN3"] <= finals["STEIN"], finals

    budget_max = min(
        min(results[(k, s)].records[-1].circuits_charged for s in seeds)
        for k in ("QNSTEIN2", "QNSPSA")
    )
    for budget in np.linspace(0.75 * budget_max, budget_max, 20):
        med2 = np.median(
            [_error_at_budget(results[("QNSTEIN2", s)].records, budget) for s in seeds]
        )
        medq = np.median(
            [_error_at_budget(results[("QNSPSA", s)].records, budget) for s in seeds]
        )
        assert med2 <= medq + 1e-9, (budget, med2, medq)
    _report(7, "desk-scale benchmark orderings")


# -- 8 ----------------------------------------------------------------------


def _schwinger_qng_run(seed):
    ham = build_schwinger(4, 1.0, 0.5, 0.0)
    problem = Problem(schwinger_ansatz(4, 1, "odd_first"), ham, exact_ground_energy(ham))
    config = OptimizerConfig(eta=0.1, beta=0.1, shots=None, blocking=False, max_steps=300)
    return run("QNG", problem, config, seed).records[-1].energy_error


def test_criterion_8_schwinger_qng_existence():
    """Exact-mode natural gradient reaches energy error < 1e-2 on the n = 4,
    single-layer SO(4) ansatz for at least 7 of 10 seeds (hyperparameters
    eta = 0.1, beta = 0.1 and the odd-bond-first sublayer order were fixed by
    the oracle pilot; the even-first order has an expressivity floor of
    ~2.02e-2 at this depth)."""
    assert abs(exact_ground_energy(build_schwinger(4, 1.0, 0.5, 0.0)) - SCHWINGER_4_GROUND) < 1e-10
    seeds = list(range(10))
    with ProcessPoolExecutor(max_workers=_workers(len(seeds))) as pool:
        errors = list(pool.map(_schwinger_qng_run, seeds))
    converged = sum(err < 1e-2 for err in errors)
    assert converged >= 7, errors
    _report(8, "Schwinger natural-gradient existence check")


# -- 9 ----------------------------------------------------------------------


def test_criterion_9_benchmark_determinism(tmp_path):
    """Equal seeds and config produce byte-identical CSV output."""
    config_text = """
[problem]
kind = tfim
qubits = 2, 3
J = -1.0
h = -2.0

[ansatz]
kind = hardware_efficient
layers = 1

[optimizer]
kinds = SPSA, QNSTEIN2, QNG
eta = 0.01
samples = 3
shots = 128
max_steps = 5
blocking = true

[run]
seeds = 0, 1, 2
out = unused
"""
    cfg = bench.parse_config(config_text)
    blobs = []
    for sub in ("first", "second"):
        out = tmp_path / sub
        result = bench.run_benchmark(cfg)
        paths = bench.emit_csv(result, str(out))
        blobs.append({os.path.basename(p): open(p, "rb").read() for p in paths})
    assert blobs[0] == blobs[1]
    assert len(blobs[0]) == 12  # 3 optimizers x 2 sizes x (run + aggregate)
    _report(9, "benchmark determinism")
