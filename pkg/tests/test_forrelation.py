import math

import numpy as np
from hypothesis import given, settings as hypothesis_settings
from hypothesis.strategies import integers, lists, sampled_from
from pytest import approx, mark, raises

from entlab.core.exceptions import InvalidStateError, PlantingInfeasibleError
from entlab.models.instances import STAR, ForrInstance, ForrXorInstance
from entlab.models.spectra import points
from entlab.services.forrelation_service import forrelation_service


def test_forr_value_of_constant_vector():
    assert forrelation_service.forr_value((1, 1, 1, 1)) == approx(math.sqrt(2) / 4)
    assert forrelation_service.forr_value((1, 1, -1, -1)) == approx(-math.sqrt(2) / 4)


@hypothesis_settings(max_examples=60, deadline=None)
@given(integers(min_value=1, max_value=5).flatmap(lambda e: lists(sampled_from((1, -1)), min_size=2**e, max_size=2**e)))
def test_forr_value_is_bounded_by_half(z):
    assert abs(forrelation_service.forr_value(z)) <= 0.5 + 1e-12


def test_forr_value_of_two_points():
    assert forrelation_service.forr_value((1, 1)) == approx(0.5)
    assert forrelation_service.forr_value((1, -1)) == approx(-0.5)


@hypothesis_settings(max_examples=60, deadline=None)
@given(integers(min_value=1, max_value=5).flatmap(lambda e: lists(sampled_from((1, -1)), min_size=2**e, max_size=2**e)))
def test_negating_second_half_negates_forr_value(z):
    half = len(z) // 2
    negated = z[:half] + [-v for v in z[half:]]
    assert forrelation_service.forr_value(negated) == approx(-forrelation_service.forr_value(z), abs=1e-12)


def test_forr_value_magnitude_at_four_points():
    for z in points(4):
        value = forrelation_service.forr_value(z)
        assert abs(value) == approx(math.sqrt(2) / 4)
        # the side-2 Hadamard is symmetric, so swapping the halves keeps the value
        assert forrelation_service.forr_value(np.concatenate([z[2:], z[:2]])) == approx(value)


def test_mean_square_forrelation_over_all_inputs():
    values = [forrelation_service.forr_value(z) for z in points(4)]
    assert np.mean(np.square(values)) == approx(1 / 8)


def test_forr_value_needs_power_of_two():
    with raises(InvalidStateError):
        forrelation_service.forr_value((1, -1, 1))


@mark.parametrize(
    "y, epsilon, expected",
    [
        ((1, 1, 1, 1), 0.5, -1),
        ((1, 1, -1, -1), 0.5, 1),
        ((1, 1, 1, 1), 2.0, STAR),
    ],
)
def test_classify(y, epsilon, expected):
    assert forrelation_service.classify((1, 1, 1, 1), y, epsilon) == expected


def test_instance_wraps_classified_label():
    inst = forrelation_service.instance((1, -1, 1, -1), (1, -1, 1, -1), 0.5)
    assert inst.label == -1
    with raises(InvalidStateError):
        forrelation_service.instance((1, 0, 1, -1), (1, 1, 1, 1), 0.5)


def test_threshold_sits_between_promised_acceptance_levels():
    epsilon = 0.5
    high = 0.5 + (epsilon / 4) ** 2 / 2
    low = 0.5 + (epsilon / 8) ** 2 / 2
    assert forrelation_service.threshold(epsilon) == approx((high + low) / 2)


def test_default_reps_formula():
    gap = 3 * 0.5**2 / 256
    expected = math.ceil(math.log(2 / (1 / 3)) / (2 * gap**2))
    assert forrelation_service.default_reps(0.5, 2) == expected
    with raises(InvalidStateError):
        forrelation_service.default_reps(0.0, 2)


def test_xor_gap_epsilon():
    assert forrelation_service.xor_gap_epsilon(2, 64) == approx(1 / (240 * math.log(64)))


@mark.parametrize("label", [1, -1])
def test_planted_instances_keep_their_label_and_gap(label):
    epsilon = 0.5
    inst = forrelation_service.plant_instance(64, epsilon, label, seed=11)
    assert inst.label == label
    assert forrelation_service.classify(inst.x, inst.y, epsilon) == label
    acceptance = forrelation_service.acceptance_probability(inst)
    cut = forrelation_service.threshold(epsilon)
    if label == -1:
        assert acceptance >= cut + 3 * epsilon**2 / 256 - 1e-12
    else:
        assert acceptance <= cut - 3 * epsilon**2 / 256 + 1e-12


def test_planting_is_reproducible():
    first = forrelation_service.plant_instance(32, 0.5, -1, seed=5)
    second = forrelation_service.plant_instance(32, 0.5, -1, seed=5)
    assert first == second


def test_planting_below_feasibility_bound():
    assert forrelation_service.min_epsilon(64) == approx(0.25)
    with raises(PlantingInfeasibleError):
        forrelation_service.plant_instance(64, 0.1, 1, seed=1)


def test_encodings_are_unit_vectors():
    inst = forrelation_service.plant_instance(16, 0.8, 1, seed=2)
    alice, bob = forrelation_service.encodings(inst)
    assert np.vdot(alice.data, alice.data).real == approx(1.0)
    assert np.vdot(bob.data, bob.data).real == approx(1.0)
    overlap = forrelation_service.swap_overlap(inst.x, inst.y)
    assert forrelation_service.acceptance_probability(inst) == approx(0.5 + overlap**2 / 2)


@mark.parametrize("label", [1, -1])
def test_plant_xor_label_is_product_of_copies(label):
    inst = forrelation_service.plant_xor(32, 3, 0.5, label, seed=9)
    assert inst.k == 3
    assert inst.label == label
    assert math.prod(c.label for c in inst.copies) == label


def test_xor_label_is_star_when_a_copy_is_outside_promise():
    good = ForrInstance(4, (1, 1, 1, 1), (1, 1, -1, -1), 1, 0.5)
    outside = ForrInstance(4, (1, 1, 1, 1), (1, 1, 1, 1), STAR, 0.5)
    assert ForrXorInstance((good, outside)).label == STAR


def test_swap_test_protocol_decides_with_many_repetitions():
    for label in (1, -1):
        inst = forrelation_service.plant_xor(32, 2, 0.5, label, seed=21)
        assert forrelation_service.swap_test_protocol(inst, reps=10**7, seed=4) == label


def test_copy_frequencies_need_positive_reps():
    inst = forrelation_service.plant_xor(16, 1, 0.8, 1, seed=3)
    with raises(InvalidStateError):
        forrelation_service.copy_frequencies(inst, 0)
