"""Audit suites behind the experiment subcommands.

Every suite takes the master seed and a worker count and returns a
SuiteResult. Metrics depend only on the seed and the settings; timings are
logged, never recorded.
"""
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import partial
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from entlab.core.config import settings
from entlab.core.logger import get_logger, log_audit, log_execution_time
from entlab.core.seeding import trial_rng
from entlab.experiments.pool import run_trials
from entlab.models.instances import DistributionKind, HardDistributionSpec
from entlab.models.protocols import FunctionProtocol, all_inputs
from entlab.models.quantum import DensityMatrix
from entlab.models.reduction import ComponentKind
from entlab.models.schemas import GoldenRational
from entlab.models.spectra import random_bounded_table
from entlab.services.bhm_service import RoundResult, bhm_service, enumerate_matchings
from entlab.services.forrelation_service import forrelation_service
from entlab.services.fourier_service import fourier_service
from entlab.services.protocol_service import protocol_service
from entlab.services.qcore_service import qcore
from entlab.services.reduction_service import reduction_service

logger = get_logger(__name__)

# Exhaustive one-way optima, keyed by (n, m, c)
GOLDEN_ADVANTAGES: Dict[tuple, GoldenRational] = {
    (4, 1, 1): GoldenRational(numerator="1", denominator="3"),
}

MOMENT_CASES = ((4, 1, 1), (4, 1, 2), (6, 2, 2))


@dataclass
class SuiteResult:
    """Metrics, named pass/fail checks and an optional table of one suite."""
    name: str
    metrics: Dict[str, Any] = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)
    table: Optional[pd.DataFrame] = None

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def check(self, name: str, passed: bool, value: Any = None) -> None:
        self.checks[name] = bool(passed)
        log_audit(logger, f"{self.name}.{name}", value, bool(passed))


def _within_sigma(observed: float, expected: float, variance: float, samples: int) -> bool:
    sigma = math.sqrt(max(variance, 0.0) / samples)
    return abs(observed - expected) <= settings.sigma_bound * sigma + settings.atol


# ----------------------------------------------------------------------
# forr-demo
# ----------------------------------------------------------------------
def _forr_planted_trial(trial: int, rng: np.random.Generator, n: int, epsilon: float) -> tuple:
    label = 1 if trial % 2 == 0 else -1
    inst = forrelation_service.plant_instance(n, epsilon, label, rng)
    return label, forrelation_service.classify(inst.x, inst.y, epsilon), forrelation_service.acceptance_probability(inst)


def _forr_xor_trial(trial: int, rng: np.random.Generator, n: int, k: int, epsilon: float) -> int:
    label = int(rng.choice((1, -1)))
    inst = forrelation_service.plant_xor(n, k, epsilon, label, rng)
    return int(forrelation_service.swap_test_protocol(inst, seed=rng) == label)


@log_execution_time(logger)
def forr_demo(seed: int, jobs: int = 1) -> SuiteResult:
    result = SuiteResult("forr-demo")
    n, epsilon, trials = settings.forr_n, settings.forr_epsilon, settings.forr_trials

    mean_square = float(np.mean([forrelation_service.forr_value(z) ** 2 for z in all_inputs(4)]))
    result.metrics["forr_mean_square_n4"] = mean_square
    result.check("forr_mean_square_n4", abs(mean_square - 0.125) <= settings.atol, mean_square)

    planted = run_trials(partial(_forr_planted_trial, n=n, epsilon=epsilon), "forr-demo.planted", trials, seed, jobs)
    correct = sum(1 for label, decided, _ in planted if label == decided)
    result.metrics["planted_classification_rate"] = correct / trials
    result.check("planted_labels_classify", correct == trials, correct)

    accept_forrelated = [p for label, _, p in planted if label == -1]
    accept_uncorrelated = [p for label, _, p in planted if label == 1]
    gap = min(accept_forrelated) - max(accept_uncorrelated)
    bound = 3.0 * epsilon**2 / 128.0
    result.metrics["acceptance_gap"] = gap
    result.metrics["acceptance_gap_bound"] = bound
    result.check("acceptance_gap", gap >= bound - settings.atol, gap)

    k = 2
    wins = run_trials(partial(_forr_xor_trial, n=n, k=k, epsilon=epsilon), "forr-demo.xor", trials, seed, jobs)
    rate = sum(wins) / trials
    result.metrics["swap_test_reps_per_copy"] = forrelation_service.default_reps(epsilon, k)
    result.metrics["swap_test_success_rate"] = rate
    result.metrics["xor_gap_epsilon_k2"] = forrelation_service.xor_gap_epsilon(k, n)
    result.check("swap_test_success", rate >= 2.0 / 3.0, rate)

    rng = trial_rng(seed, "forr-demo.circuit")
    inst = forrelation_service.instance(rng.choice((1, -1), size=8), rng.choice((1, -1), size=8), epsilon)
    deviation = abs(qcore.simulate_swap_test_circuit(*forrelation_service.encodings(inst)) - forrelation_service.acceptance_probability(inst))
    result.metrics["swap_circuit_deviation"] = deviation
    result.check("swap_circuit_matches_formula", deviation <= settings.completeness_atol, deviation)
    return result


# ----------------------------------------------------------------------
# bhm-demo
# ----------------------------------------------------------------------
def round_law_summary(n: int, m: int) -> Dict[str, Any]:
    """
    Exact statistics of one quantum round over every input and m-edge matching.

    Returns the worst deviation of the edge-hit mass from 2m/n, whether the
    GF(2) relation holds on every reachable outcome, the conditional
    correctness given a hit, and the success of a single round with a
    fair-coin fallback.
    """
    hit_deviation = 0.0
    relation = True
    hit_total = correct_total = success_total = 0.0
    cases = 0
    for matching in enumerate_matchings(n, m):
        completed = bhm_service.complete_matching(matching)
        for x in all_inputs(n):
            law = bhm_service.round_distribution(x, matching)
            hit = correct = 0.0
            for (e, a, b), probability in law.items():
                i, j = completed[e]
                holds = bhm_service.relation_holds(x, RoundResult(e < m, i, j, a, b))
                relation &= holds
                if e < m:
                    hit += probability
                    correct += probability if holds else 0.0
            hit_deviation = max(hit_deviation, abs(hit - 2 * m / n))
            hit_total += hit
            correct_total += correct
            success_total += correct + (1.0 - hit) / 2.0
            cases += 1
    return {
        "hit_deviation": hit_deviation,
        "relation_holds": relation,
        "conditional_correctness": correct_total / hit_total,
        "single_round_success": success_total / cases,
    }


def _bhm_success_trial(trial: int, rng: np.random.Generator, n: int, m: int, k: int, reps: Optional[int]) -> int:
    parity = 1 if rng.random() < 0.5 else -1
    kind = DistributionKind.MU_PLUS if parity == 1 else DistributionKind.MU_MINUS
    instances = bhm_service.sample(HardDistributionSpec(kind, n, m, k), rng)
    return int(bhm_service.run_protocol(instances, reps_per_copy=reps, seed=rng) == parity)


def _identity_audits(n: int) -> List[bool]:
    outcomes = []
    for m in range(1, n // 2 + 1):
        for matching in enumerate_matchings(n, m):
            for s in range(1 << n):
                for w in all_inputs(m):
                    outcomes.append(bhm_service.correlation_identity_audit(matching, s, w).holds)
    return outcomes


@log_execution_time(logger)
def bhm_demo(seed: int, jobs: int = 1) -> SuiteResult:
    result = SuiteResult("bhm-demo")
    n_small = 4
    m_small = bhm_service.edges_for(n_small)
    hit_expected = 2 * m_small / n_small

    law = round_law_summary(n_small, m_small)
    result.metrics["quantum_conditional_correctness"] = law["conditional_correctness"]
    result.metrics["edge_hit_probability_exact"] = hit_expected
    result.check("relation_on_every_outcome", law["relation_holds"])
    result.check("edge_hit_exact", law["hit_deviation"] <= settings.atol, law["hit_deviation"])
    result.check("conditional_correctness", abs(law["conditional_correctness"] - 1.0) <= settings.atol, law["conditional_correctness"])

    rng = trial_rng(seed, "bhm-demo.shots")
    shots = settings.bhm_relation_shots
    hits = relation_failures = 0
    for _ in range(shots):
        x = tuple(int(v) for v in rng.choice((1, -1), size=n_small))
        outcome = bhm_service.quantum_round(x, bhm_service.random_matching(n_small, m_small, rng), rng)
        hits += outcome.edge_in_matching
        relation_failures += not bhm_service.relation_holds(x, outcome)
    frequency = hits / shots
    result.metrics["edge_hit_frequency"] = frequency
    result.metrics["relation_failures"] = relation_failures
    result.check("relation_on_sampled_shots", relation_failures == 0, relation_failures)
    result.check("edge_hit_within_sigma", _within_sigma(frequency, hit_expected, hit_expected * (1 - hit_expected), shots), frequency)

    trials = settings.bhm_trials
    wins = run_trials(partial(_bhm_success_trial, n=n_small, m=m_small, k=1, reps=1), "bhm-demo.single", trials, seed, jobs)
    single = sum(wins) / trials
    result.metrics["single_round_success_exact"] = law["single_round_success"]
    result.metrics["single_round_success_sampled"] = single
    result.check("single_round_success_exact", abs(law["single_round_success"] - 0.75) <= settings.atol, law["single_round_success"])
    result.check("single_round_success_within_sigma", _within_sigma(single, 0.75, 0.75 * 0.25, trials), single)

    n, k = 8, 2
    m = bhm_service.edges_for(n)
    wins = run_trials(partial(_bhm_success_trial, n=n, m=m, k=k, reps=None), "bhm-demo.xor", trials, seed, jobs)
    rate = sum(wins) / trials
    result.metrics["referee_reps_per_copy"] = bhm_service.default_reps(n, m, k)
    result.metrics["referee_success_rate"] = rate
    result.check("referee_success", rate >= 2.0 / 3.0, rate)

    rows = []
    for pn, pm, blocks, expected in ((4, 1, (1,), Fraction(1, 6)), (6, 2, (1,), Fraction(2, 15))):
        mp = bhm_service.match_probability(pn, pm, blocks, samples=trials, seed=trial_rng(seed, f"bhm-demo.match.{pn}.{pm}"))
        key = f"match_probability_n{pn}_m{pm}"
        result.metrics[key] = str(mp.exact)
        result.check(f"{key}_exact", mp.exact == expected and mp.enumerated == mp.exact, str(mp.exact))
        result.check(f"{key}_within_sigma", _within_sigma(mp.estimate, float(mp.exact), float(mp.exact * (1 - mp.exact)), mp.samples), mp.estimate)
        rows.append(
            {"n": pn, "m": pm, "match_probability_exact": str(mp.exact), "enumerated": str(mp.enumerated), "sampled_estimate": mp.estimate}
        )
    result.table = pd.DataFrame(rows)

    for n_identity in (4, 6):
        audits = _identity_audits(n_identity)
        result.metrics[f"correlation_identity_cases_n{n_identity}"] = len(audits)
        result.check(f"correlation_identity_n{n_identity}", all(audits), sum(not a for a in audits))
    return result


# ----------------------------------------------------------------------
# moment-check
# ----------------------------------------------------------------------
@log_execution_time(logger)
def moment_check(seed: int, jobs: int = 1) -> SuiteResult:
    result = SuiteResult("moment-check")
    rows = []
    for n, m, k in MOMENT_CASES:
        tag = f"n{n}_m{m}_k{k}"
        report = bhm_service.verify_moment_agreement(n, m, k, max_size=k)
        minimal = bhm_service.minimal_disagreement_size(n, m, k)
        size = minimal.counterexample.size if minimal.counterexample else None
        result.metrics[f"agree_{tag}"] = report.agree
        result.metrics[f"moments_checked_{tag}"] = report.checked
        result.metrics[f"first_disagreement_size_{tag}"] = size
        result.check(f"agree_{tag}", report.agree)
        result.check(f"first_disagreement_{tag}", size == 3 * k, size)
        counterexample = minimal.counterexample
        rows.append(
            {
                "n": n,
                "m": m,
                "k": k,
                "moments_agree_up_to_k": report.agree,
                "moments_checked": report.checked,
                "first_disagreement_size": size,
                "counterexample_sx": None if counterexample is None else str(counterexample.sx),
                "counterexample_sy": None if counterexample is None else str(counterexample.sy),
                "mu_plus_value": None if counterexample is None else counterexample.plus_value,
                "mu_minus_value": None if counterexample is None else counterexample.minus_value,
            }
        )
    result.table = pd.DataFrame(rows)
    return result


# ----------------------------------------------------------------------
# fourier-growth
# ----------------------------------------------------------------------
def _smp_growth_trial(trial: int, rng: np.random.Generator, n: int) -> list:
    c = 1 + trial % 2
    report = protocol_service.fourier_growth_report(protocol_service.random_smp(n, c, rng), ell_max=n)
    report.insert(0, "protocol", trial)
    report.insert(1, "c", c)
    return report.to_dict("records")


def _completeness_trial(trial: int, rng: np.random.Generator) -> float:
    p = protocol_service.random_two_way(2, 1, settings.memory_qubits, 2, rng)
    return max(protocol_service.completeness_residuals(p))


def _monte_carlo_trial(trial: int, rng: np.random.Generator, shots: int) -> tuple:
    p = protocol_service.random_two_way(2, 1, settings.memory_qubits, 2, rng)
    inputs = all_inputs(2)
    x = inputs[int(rng.integers(len(inputs)))]
    y = inputs[int(rng.integers(len(inputs)))]
    exact = protocol_service.eval_two_way(p, x, y)
    histogram = protocol_service.monte_carlo_transcript(p, x, y, seed=int(rng.integers(1 << 62)), shots=shots)
    return exact, histogram.mean_output(p.accept)


@log_execution_time(logger)
def fourier_growth(seed: int, jobs: int = 1) -> SuiteResult:
    result = SuiteResult("fourier-growth")

    records = run_trials(partial(_smp_growth_trial, n=settings.growth_n), "fourier-growth.smp", settings.growth_protocols, seed, jobs)
    table = pd.DataFrame([row for rows in records for row in rows])
    chain_violations = int((~table["within_chain"]).sum())
    cauchy_violations = int((~table["chain_within_cauchy_schwarz"]).sum())
    result.metrics["chain_violations"] = chain_violations
    result.metrics["cauchy_schwarz_violations"] = cauchy_violations
    result.check("fiber_mass_within_chain", chain_violations == 0, chain_violations)
    result.check("chain_within_cauchy_schwarz", cauchy_violations == 0, cauchy_violations)
    result.table = table

    example = protocol_service.xor_fiber(FunctionProtocol(n=2, output=lambda x, y: x[0] * y[0]))
    expected = np.array([z[0] for z in all_inputs(2)], dtype=np.float64)
    result.check("product_protocol_fiber", bool(np.allclose(example.values, expected, atol=settings.atol, rtol=0.0)))

    residuals = run_trials(_completeness_trial, "fourier-growth.completeness", settings.completeness_protocols, seed, jobs)
    worst = max(residuals)
    result.metrics["max_completeness_residual"] = worst
    result.check("povm_completeness", worst <= settings.completeness_atol, worst)

    shots = settings.monte_carlo_shots
    pairs = run_trials(partial(_monte_carlo_trial, shots=shots), "fourier-growth.monte-carlo", settings.monte_carlo_protocols, seed, jobs)
    agreements = [_within_sigma(sampled, exact, 1.0 - exact**2, shots) for exact, sampled in pairs]
    result.metrics["monte_carlo_max_deviation"] = max(abs(e - s) for e, s in pairs)
    result.check("monte_carlo_agreement", all(agreements), sum(not a for a in agreements))

    reference = protocol_service.random_two_way(2, 1, settings.memory_qubits, 2, trial_rng(seed, "fourier-growth.reference"))
    reference_report = protocol_service.fourier_growth_report(reference, ell_max=2)
    result.metrics["two_way_level_masses"] = [float(v) for v in reference_report["l1_mass_xor_fiber"]]

    # |0...0> shared state: the protocol is classical with private randomness
    classical = protocol_service.random_two_way(
        2, 1, settings.memory_qubits, 2, trial_rng(seed, "fourier-growth.classical"), shared=DensityMatrix.basis(0, 2)
    )
    classical_masses = [float(v) for v in protocol_service.fourier_growth_report(classical, ell_max=2)["l1_mass_xor_fiber"]]
    result.metrics["classical_two_way_level_masses"] = classical_masses
    result.check("classical_two_way_masses_finite", all(math.isfinite(v) for v in classical_masses))
    return result


# ----------------------------------------------------------------------
# levelk-audit
# ----------------------------------------------------------------------
def _scalar_levelk_trial(trial: int, rng: np.random.Generator, n: int) -> tuple:
    audit = fourier_service.level_k_audit(random_bounded_table(n, rng), 1 + trial % 3)
    return audit.holds, audit.lhs, audit.rhs


def _matrix_levelk_trial(trial: int, rng: np.random.Generator, n: int, c: int) -> tuple:
    audit = fourier_service.matrix_level_k_audit(fourier_service.random_matrix_function(n, c, rng), 1 + trial % 2)
    return audit.holds, audit.lhs, audit.rhs


def _worst_ratio(audits: List[tuple]) -> float:
    return max((lhs / rhs for _, lhs, rhs in audits if rhs > 0), default=0.0)


@log_execution_time(logger)
def levelk_audit(seed: int, jobs: int = 1) -> SuiteResult:
    result = SuiteResult("levelk-audit")
    scalar = run_trials(
        partial(_scalar_levelk_trial, n=settings.levelk_scalar_n), "levelk-audit.scalar", settings.levelk_scalar_cases, seed, jobs
    )
    matrix = run_trials(
        partial(_matrix_levelk_trial, n=settings.levelk_matrix_n, c=settings.levelk_matrix_c),
        "levelk-audit.matrix",
        settings.levelk_matrix_cases,
        seed,
        jobs,
    )
    for name, audits in (("scalar", scalar), ("matrix", matrix)):
        violations = sum(1 for holds, _, _ in audits if not holds)
        result.metrics[f"{name}_cases"] = len(audits)
        result.metrics[f"{name}_violations"] = violations
        result.metrics[f"{name}_max_ratio"] = _worst_ratio(audits)
        result.check(f"{name}_level_k", violations == 0, violations)
    return result


# ----------------------------------------------------------------------
# decompose-check
# ----------------------------------------------------------------------
def _decompose_trial(trial: int, rng: np.random.Generator, d: int) -> tuple:
    rho = qcore.random_real_density_matrix(2 * d, rng)
    report = reduction_service.verify_decomposition(rho, reduction_service.decompose(rho))
    return report.valid, report.reconstruction_residual, report.max_abs_coefficient / report.coefficient_bound, report.max_witness_residual


def _complex_decompose_trial(trial: int, rng: np.random.Generator) -> bool:
    rho = qcore.random_density_matrix(2, rng)
    report = reduction_service.verify_decomposition(rho, reduction_service.decompose(rho, allow_complex=True))
    return report.valid and report.complex_path


def _linearity_trial(trial: int, rng: np.random.Generator) -> bool:
    p = reduction_service.random_entangled_smp(1, 1, rng)
    decomposition = reduction_service.decompose(p.shared, allow_complex=True)
    x, y = (int(rng.choice((1, -1))),), (int(rng.choice((1, -1))),)
    audit = reduction_service.decomposition_linearity(
        lambda state: protocol_service.eval_entangled_smp(replace(p, shared=state), x, y), p.shared, decomposition
    )
    return audit.holds


def _equivalence_trial(trial: int, rng: np.random.Generator) -> float:
    p = protocol_service.random_two_way(1, 1, settings.memory_qubits, 2, rng)
    q = protocol_service.equivalent_protocol(p, qcore.random_unitary(2, rng), qcore.random_unitary(2, rng))
    worst = 0.0
    for x in all_inputs(1):
        for y in all_inputs(1):
            before = protocol_service.transcript_distribution(p, x, y)
            after = protocol_service.transcript_distribution(q, x, y)
            worst = max(worst, max(abs(before[z] - after[z]) for z in before))
    return worst


@log_execution_time(logger)
def decompose_check(seed: int, jobs: int = 1) -> SuiteResult:
    result = SuiteResult("decompose-check")
    for d, cases in ((1, settings.decompose_cases_d1), (2, settings.decompose_cases_d2)):
        reports = run_trials(partial(_decompose_trial, d=d), f"decompose-check.d{d}", cases, seed, jobs)
        result.metrics[f"d{d}_max_reconstruction_residual"] = max(r[1] for r in reports)
        result.metrics[f"d{d}_max_coefficient_over_bound"] = max(r[2] for r in reports)
        result.metrics[f"d{d}_max_witness_residual"] = max(r[3] for r in reports)
        result.check(f"d{d}_decompositions_valid", all(r[0] for r in reports), sum(not r[0] for r in reports))

    epr = qcore.epr_state(1).to_density_matrix()
    decomposition = reduction_service.decompose(epr)
    nonzero = [c for c in decomposition.components if abs(c.coefficient) > settings.atol]
    report = reduction_service.verify_decomposition(epr, decomposition)
    result.metrics["epr_nonzero_components"] = len(nonzero)
    result.check(
        "epr_example",
        report.valid and len(nonzero) == 2 and all(c.kind == ComponentKind.EPR and abs(c.coefficient - 0.5) <= settings.atol for c in nonzero),
        len(nonzero),
    )

    checks = min(settings.decompose_cases_d1, 25)
    complex_ok = run_trials(_complex_decompose_trial, "decompose-check.complex", checks, seed, jobs)
    result.check("complex_path_valid", all(complex_ok), sum(not v for v in complex_ok))

    linear = run_trials(_linearity_trial, "decompose-check.linearity", checks, seed, jobs)
    result.check("evaluation_linear_in_shared_state", all(linear), sum(not v for v in linear))

    deviations = run_trials(_equivalence_trial, "decompose-check.equivalence", checks, seed, jobs)
    result.metrics["local_equivalence_max_deviation"] = max(deviations)
    result.check("local_equivalence_preserves_transcripts", max(deviations) <= settings.completeness_atol, max(deviations))
    return result


# ----------------------------------------------------------------------
# strip-qsmp
# ----------------------------------------------------------------------
def _stripped_smp_deviations(p) -> tuple:
    """Worst flag-probability, trace-distance and output deviations over all inputs."""
    s = reduction_service.strip_entanglement_qsmp(p)
    target = 2.0 ** (-4 * p.d)
    flag = distance = output = 0.0
    for x in all_inputs(p.n):
        for y in all_inputs(p.n):
            original = protocol_service.eval_entangled_smp(p, x, y)
            flag = max(flag, abs(reduction_service.flag_probability(s, x, y) - target))
            referee = protocol_service.entangled_referee_state(p, x, y)
            distance = max(distance, qcore.trace_distance(reduction_service.conditional_state(s, x, y), DensityMatrix(referee)))
            output = max(output, abs(reduction_service.stripped_smp_output(s, x, y) - original * target))
    return flag, distance, output


def _random_strip_trial(trial: int, rng: np.random.Generator) -> tuple:
    return _stripped_smp_deviations(reduction_service.random_entangled_smp(1, 1, rng))


@log_execution_time(logger)
def strip_qsmp(seed: int, jobs: int = 1) -> SuiteResult:
    result = SuiteResult("strip-qsmp")
    p = reduction_service.parity_smp()
    s = reduction_service.strip_entanglement_qsmp(p)
    target = 2.0 ** (-4 * p.d)
    result.metrics["stripped_cost_qubits"] = s.cost

    flag, distance, output = _stripped_smp_deviations(p)
    result.metrics["flag_probability_deviation"] = flag
    result.metrics["conditional_trace_distance"] = distance
    result.check("flag_probability_exact", flag <= settings.atol, flag)
    result.check("conditional_state_exact", distance <= settings.completeness_atol, distance)
    result.check("stripped_output_scaled", output <= settings.atol, output)

    shots = settings.strip_shots
    x, y = (1,), (-1,)
    label = x[0] * y[0]
    outputs, flags = reduction_service.sample_stripped_smp(s, x, y, shots, seed=int(trial_rng(seed, "strip-qsmp.shots").integers(1 << 62)))
    flag_rate = float(flags.mean())
    advantage = label * float(outputs.mean())
    expected = label * protocol_service.eval_entangled_smp(p, x, y) * target
    result.metrics["sampled_flag_rate"] = flag_rate
    result.metrics["sampled_advantage"] = advantage
    result.metrics["expected_advantage"] = expected
    result.check("flag_rate_within_sigma", _within_sigma(flag_rate, target, target * (1 - target), shots), flag_rate)
    result.check("advantage_within_sigma", _within_sigma(advantage, expected, 1.0 - expected**2, shots), advantage)

    deviations = run_trials(_random_strip_trial, "strip-qsmp.random", settings.strip_random_protocols, seed, jobs)
    result.metrics["random_max_flag_deviation"] = max(d[0] for d in deviations)
    result.metrics["random_max_trace_distance"] = max(d[1] for d in deviations)
    result.check(
        "random_protocols_stripped_exactly",
        all(d[0] <= settings.atol and d[1] <= settings.completeness_atol and d[2] <= settings.atol for d in deviations),
    )
    return result


# ----------------------------------------------------------------------
# strip-oneway
# ----------------------------------------------------------------------
def _entry_identity_trial(trial: int, rng: np.random.Generator) -> tuple:
    audit = reduction_service.expectation_identity_audit(qcore.random_observable(4, rng), qcore.random_density_matrix(2, rng).data)
    return audit.holds, abs(audit.lhs - audit.rhs)


def _complex_oneway_trial(trial: int, rng: np.random.Generator) -> tuple:
    p = protocol_service.random_one_way(1, 1, rng)
    s = reduction_service.strip_entanglement_oneway(p, allow_complex=True)
    quantized = exact = True
    for x in all_inputs(1):
        for y in all_inputs(1):
            quantized &= reduction_service.quantization_audit(s, x, y).holds
            unrounded = reduction_service.stripped_oneway_output(s, x, y, quantized=False)
            exact &= abs(unrounded - protocol_service.eval_one_way(p, x, y) / 16.0) <= settings.completeness_atol
    return quantized, exact


@log_execution_time(logger)
def strip_oneway(seed: int, jobs: int = 1) -> SuiteResult:
    result = SuiteResult("strip-oneway")
    identities = run_trials(_entry_identity_trial, "strip-oneway.identity", settings.oneway_pairs, seed, jobs)
    result.metrics["entry_identity_max_deviation"] = max(a[1] for a in identities)
    result.check("entry_expectation_identity", all(a[0] for a in identities), sum(not a[0] for a in identities))

    p = reduction_service.parity_oneway()
    s = reduction_service.strip_entanglement_oneway(p)
    scale = 2.0 ** (-4 * p.d)
    advantages = []
    quantization = True
    for x in all_inputs(1):
        for y in all_inputs(1):
            advantages.append(x[0] * y[0] * reduction_service.stripped_oneway_output(s, x, y))
            quantization &= reduction_service.quantization_audit(s, x, y).holds
    result.metrics["stripped_min_advantage"] = min(advantages)
    result.metrics["stripped_cost_bits"] = s.cost
    result.check("stripped_advantage", min(advantages) >= scale / 6.0 - settings.atol, min(advantages))
    result.check("quantization_error", quantization)
    result.check("cost_bound", s.cost <= p.c + 10 * p.d, s.cost)

    shots = settings.strip_shots
    x, y = (1,), (1,)
    sampled = float(reduction_service.sample_stripped_oneway(s, x, y, shots, seed=trial_rng(seed, "strip-oneway.shots")).mean())
    expected = reduction_service.stripped_oneway_output(s, x, y)
    result.metrics["sampled_output"] = sampled
    result.metrics["expected_output"] = expected
    result.check("sampled_output_within_sigma", _within_sigma(sampled, expected, 1.0 - expected**2, shots), sampled)

    complex_runs = run_trials(_complex_oneway_trial, "strip-oneway.complex", settings.strip_random_protocols, seed, jobs)
    result.check("complex_path_quantization", all(q for q, _ in complex_runs))
    result.check("complex_path_scaled_output", all(e for _, e in complex_runs))
    return result


# ----------------------------------------------------------------------
# classical-oracle
# ----------------------------------------------------------------------
def _partition_trial(trial: int, rng: np.random.Generator, n: int, m: int, c: int) -> tuple:
    labels = rng.integers(0, 1 << c, size=1 << n)
    refined = 2 * labels + rng.integers(0, 2, size=1 << n)
    advantage = bhm_service.advantage_of_partition(labels, n, m)
    coarse = bhm_service.weighted_delta(labels, n, m)
    fine = bhm_service.weighted_delta(refined, n, m)
    bound_ok = True
    for z in np.unique(labels):
        part = np.flatnonzero(labels == z)
        bound_ok &= bhm_service.delta_fourier_bound(part, n, m) >= float(bhm_service.delta_az(part, n, m)) - settings.completeness_atol
    return advantage == coarse / 2, fine >= coarse, bound_ok


@log_execution_time(logger)
def classical_oracle(seed: int, jobs: int = 1) -> SuiteResult:
    result = SuiteResult("classical-oracle")
    n, m, c = settings.oracle_n, settings.oracle_m, settings.oracle_c
    oracle = bhm_service.brute_force_one_way(n, m, c)
    advantage = oracle.advantage.to_fraction()
    result.metrics["classical_one_way_advantage"] = str(advantage)
    result.metrics["partitions_searched"] = oracle.partitions_searched
    golden = GOLDEN_ADVANTAGES.get((n, m, c))
    if golden is not None:
        result.metrics["golden_advantage"] = str(golden.to_fraction())
        result.check("golden_advantage", advantage == golden.to_fraction(), str(advantage))
    result.check("best_partition_attains_optimum", bhm_service.advantage_of_partition(oracle.best_partition, n, m) == advantage)

    silent = bhm_service.brute_force_one_way(n, m, 0).advantage.to_fraction()
    result.check("zero_bits_zero_advantage", silent == 0, str(silent))

    checks = run_trials(partial(_partition_trial, n=n, m=m, c=max(c, 1)), "classical-oracle.partitions", 20, seed, jobs)
    result.check("advantage_is_half_weighted_delta", all(a for a, _, _ in checks))
    result.check("refinement_monotone", all(r for _, r, _ in checks))
    result.check("fourier_bound_dominates_delta", all(b for _, _, b in checks))

    if n & (n - 1) == 0:
        law = round_law_summary(n, m)
        result.metrics["quantum_conditional_correctness"] = law["conditional_correctness"]
    result.table = pd.DataFrame(
        [
            {"protocol": "classical_one_way_optimum", "bits": c, "advantage": str(advantage)},
            {"protocol": "quantum_matching_round_conditional_correctness", "bits": None, "advantage": str(result.metrics.get("quantum_conditional_correctness"))},
        ]
    )
    return result


SuiteFn = Callable[[int, int], SuiteResult]

SUITES: Dict[str, SuiteFn] = {
    "forr-demo": forr_demo,
    "bhm-demo": bhm_demo,
    "moment-check": moment_check,
    "fourier-growth": fourier_growth,
    "levelk-audit": levelk_audit,
    "decompose-check": decompose_check,
    "strip-qsmp": strip_qsmp,
    "strip-oneway": strip_oneway,
    "classical-oracle": classical_oracle,
}
