import math

import numpy as np
from pytest import approx, mark, raises

from entlab.core.exceptions import ProtocolError
from entlab.models.protocols import (
    FunctionProtocol,
    TwoWayEntangledProtocol,
    all_inputs,
    all_transcripts,
    constant_schedule,
    transcript_from_mask,
    transcript_mask,
)
from entlab.models.quantum import DensityMatrix
from entlab.models.spectra import points
from entlab.services.protocol_service import protocol_service
from entlab.services.qcore_service import qcore


def test_transcript_mask_is_most_significant_first():
    assert transcript_mask((1, -1, -1)) == 0b011
    assert transcript_from_mask(0b100, 3) == (-1, 1, 1)


def test_smp_output_table_matches_pointwise_evaluation(rng):
    p = protocol_service.random_smp(2, 1, rng)
    table = protocol_service.output_table(p)
    inputs = all_inputs(2)
    for i, x in enumerate(inputs):
        for j, y in enumerate(inputs):
            assert table[i, j] == approx(protocol_service.eval_smp(p, x, y), abs=1e-12)
    assert np.max(np.abs(table)) <= 1.0 + 1e-9


@mark.parametrize("rounds", [1, 2])
def test_two_way_compilation_is_complete(rng, rounds):
    p = protocol_service.random_two_way(2, 1, 1, rounds, rng)
    residuals = protocol_service.completeness_residuals(p)
    assert max(residuals) <= 1e-9


def test_transcript_distribution_sums_to_one(rng):
    p = protocol_service.random_two_way(2, 1, 1, 2, rng)
    distribution = protocol_service.transcript_distribution(p, (1, -1), (-1, -1))
    assert set(distribution) == set(all_transcripts(4))
    assert sum(distribution.values()) == approx(1.0)
    assert min(distribution.values()) >= -1e-12


def test_sequential_collapse_agrees_with_compiled_effects(rng):
    p = protocol_service.random_two_way(2, 1, 1, 2, rng)
    for x in all_inputs(2):
        compiled = protocol_service.transcript_distribution(p, x, (1, -1))
        tree = protocol_service.sequential_tree(p, x, (1, -1))
        for z, probability in compiled.items():
            assert tree[z] == approx(probability, abs=1e-10)


def test_eval_two_way_uses_accept_set(rng):
    p = protocol_service.random_two_way(1, 1, 0, 1, rng, accept=[])
    assert protocol_service.eval_two_way(p, (1,), (1,)) == approx(1.0)
    flipped = protocol_service.random_two_way(1, 1, 0, 1, rng, accept=all_transcripts(2))
    assert protocol_service.eval_two_way(flipped, (1,), (1,)) == approx(-1.0)


def test_monte_carlo_mean_within_sampling_error(rng):
    p = protocol_service.random_two_way(2, 1, 1, 2, rng)
    x, y = (1, -1), (-1, 1)
    exact = protocol_service.eval_two_way(p, x, y)
    shots = 20000
    histogram = protocol_service.monte_carlo_transcript(p, x, y, seed=7, shots=shots)
    assert sum(histogram.counts.values()) == shots
    sigma = math.sqrt(max(1.0 - exact**2, 1e-12) / shots)
    assert abs(histogram.mean_output(p.accept) - exact) <= 5 * sigma + 1e-9


def test_monte_carlo_is_reproducible(rng):
    p = protocol_service.random_two_way(1, 1, 0, 1, rng)
    first = protocol_service.monte_carlo_transcript(p, (1,), (-1,), seed=3, shots=500)
    second = protocol_service.monte_carlo_transcript(p, (1,), (-1,), seed=3, shots=500)
    assert first.counts == second.counts


def test_monte_carlo_rejects_zero_shots(rng):
    p = protocol_service.random_two_way(1, 1, 0, 1, rng)
    with raises(ProtocolError):
        protocol_service.monte_carlo_transcript(p, (1,), (1,), seed=1, shots=0)


def test_equivalent_protocol_keeps_distributions(rng):
    p = protocol_service.random_two_way(2, 1, 1, 1, rng)
    u_a = qcore.random_unitary(2, rng)
    v_b = qcore.random_unitary(2, rng)
    q = protocol_service.equivalent_protocol(p, u_a, v_b)
    for x in all_inputs(2):
        for y in all_inputs(2):
            before = protocol_service.transcript_distribution(p, x, y)
            after = protocol_service.transcript_distribution(q, x, y)
            for z in before:
                assert after[z] == approx(before[z], abs=1e-10)


def test_function_protocol_fiber_of_dictator_product():
    p = FunctionProtocol(3, lambda x, y: x[0] * y[0])
    fiber = protocol_service.xor_fiber(p)
    assert np.allclose(fiber.values, points(3)[:, 0])
    spectrum = protocol_service.fiber_spectrum(fiber)
    assert spectrum[0b001] == approx(1.0)


def test_fourier_growth_report_for_smp(rng):
    p = protocol_service.random_smp(3, 1, rng)
    report = protocol_service.fourier_growth_report(p, 3)
    assert list(report["level"]) == [0, 1, 2, 3]
    assert report["within_chain"].all()
    assert report["chain_within_cauchy_schwarz"].all()


def test_fourier_growth_report_for_two_way_uses_reference_growth(rng):
    p = protocol_service.random_two_way(2, 1, 0, 1, rng)
    report = protocol_service.fourier_growth_report(p, 2)
    assert "reference_growth_c_pow_l_times_2_pow_5d" in report.columns
    assert report.loc[1, "reference_growth_c_pow_l_times_2_pow_5d"] == approx(2 * 2**5)


def test_random_one_way_outputs_are_bounded(rng):
    p = protocol_service.random_one_way(2, 1, rng)
    for x in all_inputs(2):
        for y in all_inputs(2):
            assert abs(protocol_service.eval_one_way(p, x, y)) <= 1.0 + 1e-9


def test_two_way_shape_checks():
    family = qcore.computational_family(1)
    schedule = constant_schedule(family)
    with raises(ProtocolError):
        TwoWayEntangledProtocol(1, 1, 0, qcore.epr_state(1).to_density_matrix(), 1, schedule, schedule, {(1,)})
    with raises(ProtocolError):
        TwoWayEntangledProtocol(1, 2, 0, qcore.epr_state(1).to_density_matrix(), 1, schedule, schedule)


def test_schedule_must_have_two_outcomes():
    four = qcore.computational_family(2)
    p = TwoWayEntangledProtocol(
        1, 1, 1, qcore.epr_state(1).to_density_matrix(), 1, constant_schedule(four), constant_schedule(four)
    )
    with raises(ProtocolError):
        protocol_service.eval_two_way(p, (1,), (1,))


def deterministic_two_round_protocol():
    family = qcore.projective_family((1, -1), [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    schedule = constant_schedule(family)
    return TwoWayEntangledProtocol(1, 1, 0, DensityMatrix.basis(0, 2), 2, schedule, schedule)


def test_sequential_tree_fills_unreachable_subtrees():
    p = deterministic_two_round_protocol()
    tree = protocol_service.sequential_tree(p, (1,), (1,))
    assert tree[(1, 1, 1, 1)] == approx(1.0)
    assert tree[(-1, 1, 1)] == 0.0
    assert all(prefix in tree for length in range(5) for prefix in all_transcripts(length))


def test_monte_carlo_on_deterministic_protocol():
    p = deterministic_two_round_protocol()
    histogram = protocol_service.monte_carlo_transcript(p, (1,), (1,), seed=1, shots=10)
    assert histogram.counts == {(1, 1, 1, 1): 10}
    assert histogram.frequency((1, 1, 1, 1)) == 1.0


def flip(bits):
    return tuple(-v for v in bits)


def test_xor_fiber_is_unchanged_by_flipping_both_inputs(rng):
    p = protocol_service.random_smp(2, 1, rng)
    flipped = FunctionProtocol(2, lambda x, y: protocol_service.eval_smp(p, flip(x), flip(y)))
    assert np.allclose(protocol_service.xor_fiber(flipped).values, protocol_service.xor_fiber(p).values, atol=1e-10)


def test_xor_fiber_under_flip_of_x_alone_reflects_z(rng):
    table = rng.uniform(-1.0, 1.0, size=(8, 8))
    inputs = all_inputs(3)
    index = {x: i for i, x in enumerate(inputs)}
    p = FunctionProtocol(3, lambda x, y: table[index[tuple(x)], index[tuple(y)]])
    flipped = FunctionProtocol(3, lambda x, y: table[index[flip(x)], index[tuple(y)]])
    original = protocol_service.xor_fiber(p).values
    assert np.allclose(protocol_service.xor_fiber(flipped).values, original[np.arange(8) ^ 0b111], atol=1e-12)


def test_fourier_growth_report_without_shared_entanglement(rng):
    p = protocol_service.random_two_way(2, 1, 1, 2, rng, shared=DensityMatrix.basis(0, 2))
    report = protocol_service.fourier_growth_report(p, 2)
    masses = report["l1_mass_xor_fiber"]
    assert list(report["level"]) == [0, 1, 2]
    assert np.isfinite(masses).all()
    assert (masses >= 0).all()
    assert masses.sum() <= 4.0 + 1e-9


def test_odd_length_protocol_uses_a_silent_final_bit(rng):
    silent = qcore.projective_family((1, -1), [np.eye(2), np.zeros((2, 2))])
    alice = protocol_service.random_schedule(1, 1, 0, 1, rng, bob=False)
    p = TwoWayEntangledProtocol(1, 1, 0, qcore.random_density_matrix(2, rng), 1, alice, constant_schedule(silent))
    assert p.c == 2
    distribution = protocol_service.transcript_distribution(p, (1,), (-1,))
    assert sum(prob for z, prob in distribution.items() if z[1] == -1) == approx(0.0, abs=1e-12)
    assert sum(distribution.values()) == approx(1.0)
