import math
from dataclasses import replace

import numpy as np
from pytest import approx, mark, raises

from entlab.core.exceptions import InvalidStateError
from entlab.models.quantum import DensityMatrix, StateVector
from entlab.models.reduction import ComponentKind
from entlab.services.protocol_service import protocol_service
from entlab.services.qcore_service import qcore
from entlab.services.reduction_service import quantize, reduction_service


@mark.parametrize(
    "value, bits, expected",
    [(0.25, 1, 0.0), (0.75, 1, 0.5), (0.3, 1, 0.5), (-0.75, 1, -0.5), (2.0, 3, 1.0), (-3.0, 3, -1.0), (0.1, 5, 3 / 32)],
)
def test_quantize_rounds_ties_toward_zero(value, bits, expected):
    assert quantize(value, bits) == expected


@mark.parametrize(
    "i, j, kind",
    [(0, 0, ComponentKind.ZERO), (0, 1, ComponentKind.ZERO), (0, 2, ComponentKind.ZERO), (0, 3, ComponentKind.EPR), (1, 2, ComponentKind.EPR)],
)
def test_classify_pair(i, j, kind):
    found, _, _ = reduction_service.classify_pair(i, j, 1)
    assert found == kind


def test_classify_pair_range_checked():
    with raises(InvalidStateError):
        reduction_service.classify_pair(0, 4, 1)


@mark.parametrize("d", [1, 2])
def test_real_decomposition_is_valid(rng, d):
    rho = qcore.random_real_density_matrix(2 * d, rng)
    decomposition = reduction_service.decompose(rho)
    report = reduction_service.verify_decomposition(rho, decomposition)
    assert report.valid, report
    assert report.components == 1 << (4 * d)
    assert report.coefficient_bound == 2**d


def test_epr_decomposes_into_two_epr_components():
    epr = qcore.epr_state(1).to_density_matrix()
    decomposition = reduction_service.decompose(epr)
    nonzero = [c for c in decomposition.components if abs(c.coefficient) > 1e-12]
    assert len(nonzero) == 2
    assert all(c.kind == ComponentKind.EPR for c in nonzero)
    assert [c.coefficient for c in nonzero] == approx([0.5, 0.5])


def test_complex_state_needs_the_complex_path():
    rho = StateVector(np.array([1.0, 0.0, 0.0, 1j]) / math.sqrt(2)).to_density_matrix()
    with raises(InvalidStateError):
        reduction_service.decompose(rho)
    decomposition = reduction_service.decompose(rho, allow_complex=True)
    report = reduction_service.verify_decomposition(rho, decomposition)
    assert report.complex_path
    assert report.coefficient_bound == 4
    assert report.valid


def test_decomposition_rejects_odd_register():
    with raises(InvalidStateError):
        reduction_service.decompose(DensityMatrix.maximally_mixed(3))


def test_output_is_linear_in_the_decomposition(rng):
    p = reduction_service.random_entangled_smp(1, 1, rng)
    decomposition = reduction_service.decompose(p.shared, allow_complex=True)

    def evaluate(state):
        return protocol_service.eval_entangled_smp(replace(p, shared=state), (1,), (-1,))

    audit = reduction_service.decomposition_linearity(evaluate, p.shared, decomposition)
    assert audit.holds, audit


def test_random_entangled_smp_needs_matching_sizes(rng):
    with raises(InvalidStateError):
        reduction_service.random_entangled_smp(1, 2, rng)


@mark.parametrize("x, y", [((1,), (1,)), ((1,), (-1,)), ((-1,), (-1,))])
def test_stripped_parity_smp(x, y):
    p = reduction_service.parity_smp()
    stripped = reduction_service.strip_entanglement_qsmp(p)
    assert stripped.cost == 5
    assert reduction_service.flag_probability(stripped, x, y) == approx(1 / 16)
    conditional = reduction_service.conditional_state(stripped, x, y)
    original = DensityMatrix(protocol_service.entangled_referee_state(p, x, y))
    assert qcore.trace_distance(conditional, original) == approx(0.0, abs=1e-9)
    assert reduction_service.stripped_smp_output(stripped, x, y) == approx(x[0] * y[0] / 48)


def test_stripped_smp_flag_rate_is_state_independent(rng):
    p = reduction_service.random_entangled_smp(1, 1, rng)
    stripped = reduction_service.strip_entanglement_qsmp(p)
    for x in ((1,), (-1,)):
        for y in ((1,), (-1,)):
            assert reduction_service.flag_probability(stripped, x, y) == approx(1 / 16)
            expected = protocol_service.eval_entangled_smp(p, x, y) / 16
            assert reduction_service.stripped_smp_output(stripped, x, y) == approx(expected, abs=1e-9)


def test_sampled_stripped_smp_within_sampling_error():
    stripped = reduction_service.strip_entanglement_qsmp(reduction_service.parity_smp())
    shots = 200_000
    outputs, flags = reduction_service.sample_stripped_smp(stripped, (1,), (1,), shots, seed=12)
    assert abs(flags.mean() - 1 / 16) <= 5 * math.sqrt((1 / 16) * (15 / 16) / shots)
    assert abs(outputs.mean() - 1 / 48) <= 5 / math.sqrt(shots)


def test_entry_expectation_identity(rng):
    f_prime = qcore.random_observable(4, rng)
    sigma = qcore.random_density_matrix(2, rng).data
    audit = reduction_service.expectation_identity_audit(f_prime, sigma)
    assert audit.holds, audit


@mark.parametrize("x, y", [((1,), (1,)), ((-1,), (1,))])
def test_stripped_parity_oneway(x, y):
    p = reduction_service.parity_oneway()
    assert protocol_service.eval_one_way(p, x, y) == approx(x[0] * y[0] / 3)
    stripped = reduction_service.strip_entanglement_oneway(p)
    assert stripped.cost == 1 + 4 + 5
    assert stripped.cost <= p.c + 10 * p.d
    assert reduction_service.stripped_oneway_output(stripped, x, y) == approx(x[0] * y[0] / 48)
    assert reduction_service.quantization_audit(stripped, x, y).holds


def test_sampled_stripped_oneway_within_sampling_error():
    stripped = reduction_service.strip_entanglement_oneway(reduction_service.parity_oneway())
    shots = 100_000
    outputs = reduction_service.sample_stripped_oneway(stripped, (1,), (-1,), shots, seed=5)
    assert abs(outputs.mean() + 1 / 48) <= 5 / math.sqrt(shots)


def test_complex_oneway_needs_the_complex_path(rng):
    p = protocol_service.random_one_way(1, 1, rng)
    with raises(InvalidStateError):
        reduction_service.stripped_oneway_output(reduction_service.strip_entanglement_oneway(p), (1,), (1,))
    stripped = reduction_service.strip_entanglement_oneway(p, allow_complex=True)
    assert stripped.cost == 1 + 4 + 10
    for x in ((1,), (-1,)):
        for y in ((1,), (-1,)):
            assert reduction_service.quantization_audit(stripped, x, y).holds
            unquantized = reduction_service.stripped_oneway_output(stripped, x, y, quantized=False)
            assert unquantized == approx(protocol_service.eval_one_way(p, x, y) / 16, abs=1e-12)
