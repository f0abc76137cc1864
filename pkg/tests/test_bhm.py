import math
from fractions import Fraction

import numpy as np
from pytest import approx, mark, raises

from entlab.core.exceptions import BudgetExceededError, InvalidStateError
from entlab.models.protocols import all_inputs
from entlab.models.instances import STAR, BhmInstance, DistributionKind, HardDistributionSpec, LevelSets, Matching
from entlab.services.bhm_service import RoundResult, all_pairings, bhm_service, enumerate_matchings


@mark.parametrize("n, m, count", [(4, 1, 6), (4, 2, 3), (6, 2, 45), (6, 3, 15)])
def test_matching_counts(n, m, count):
    matchings = enumerate_matchings(n, m)
    assert len(matchings) == count
    assert len(set(matchings)) == count
    assert count == math.comb(n, 2 * m) * math.prod(range(1, 2 * m, 2))


def test_all_pairings_of_four_items():
    assert len(list(all_pairings([0, 1, 2, 3]))) == 3


def test_matching_rejects_shared_vertex():
    with raises(InvalidStateError):
        Matching(4, ((0, 1), (1, 2)))
    with raises(InvalidStateError):
        Matching(4, ((2, 1),))


def test_instance_labels():
    matching = Matching(4, ((0, 2),))
    x = (1, -1, -1, 1)
    assert BhmInstance(x, matching, (-1,)).label == 1
    assert BhmInstance(x, matching, (1,)).label == -1
    two = Matching(4, ((0, 1), (2, 3)))
    assert BhmInstance(x, two, (-1, 1)).label == STAR


def test_apply_matching_multiplies_edge_endpoints():
    matching = Matching(4, ((0, 2), (1, 3)))
    assert bhm_service.apply_matching(matching, (1, -1, -1, 1)) == (-1, -1)
    with raises(InvalidStateError):
        bhm_service.apply_matching(matching, (1, -1))


def test_matches_returns_edge_masks():
    matching = Matching(4, ((0, 1), (2, 3)))
    assert bhm_service.matches([matching], [0b1111]) == (0b11,)
    assert bhm_service.matches([matching], [0b1100]) == (0b10,)
    assert bhm_service.matches([matching], [0]) == (0,)
    assert bhm_service.matches([matching], [0b0110]) is None
    with raises(InvalidStateError):
        bhm_service.matches([matching], [])


def test_hard_distribution_validation():
    with raises(InvalidStateError):
        HardDistributionSpec(DistributionKind.NO, 5, 1)
    with raises(InvalidStateError):
        HardDistributionSpec(DistributionKind.YES, 4, 3)
    with raises(InvalidStateError):
        HardDistributionSpec(DistributionKind.NO, 4, 1, k=2)


@mark.parametrize(
    "kind, k, parity",
    [(DistributionKind.NO, 1, 1), (DistributionKind.YES, 1, -1), (DistributionKind.MU_PLUS, 3, 1), (DistributionKind.MU_MINUS, 3, -1)],
)
def test_samples_carry_the_distribution_parity(kind, k, parity):
    dist = HardDistributionSpec(kind, 8, 2, k)
    for seed in range(20):
        copies = bhm_service.sample(dist, seed=seed)
        assert len(copies) == k
        assert math.prod(c.label for c in copies) == parity


def test_moments_agree_below_three_k():
    report = bhm_service.verify_moment_agreement(4, 1, 1, 2)
    assert report.agree
    assert report.counterexample is None


@mark.parametrize("n, m, k", [(4, 1, 1), (4, 1, 2)])
def test_first_disagreement_has_size_three_k(n, m, k):
    report = bhm_service.minimal_disagreement_size(n, m, k)
    assert not report.agree
    assert report.counterexample.size == 3 * k


def test_single_copy_moment_values():
    dist = HardDistributionSpec(DistributionKind.NO, 4, 1)
    assert bhm_service.moment(dist, [0b0011], [0b1]) == Fraction(1, 6)
    yes = HardDistributionSpec(DistributionKind.YES, 4, 1)
    assert bhm_service.moment(yes, [0b0011], [0b1]) == Fraction(-1, 6)
    assert bhm_service.moment(dist, [0b0001], [0]) == 0


def test_single_copy_moments_are_cached_per_size():
    first = bhm_service.single_copy_moments(4, 1)
    assert bhm_service.single_copy_moments(4, 1) is first
    assert not hasattr(type(bhm_service).single_copy_moments, "cache_info")
    with raises(BudgetExceededError):
        bhm_service.single_copy_moments(64, 1)


def test_moment_budget():
    with raises(BudgetExceededError):
        bhm_service.verify_moment_agreement(10, 1, 1, 1)


@mark.parametrize("n, m, sizes, expected", [(4, 1, [1], Fraction(1, 6)), (6, 2, [1], Fraction(2, 15)), (4, 2, [2], Fraction(1))])
def test_match_probability(n, m, sizes, expected):
    result = bhm_service.match_probability(n, m, sizes)
    assert result.exact == expected
    assert result.enumerated == expected


def test_match_probability_sampling_within_error():
    result = bhm_service.match_probability(6, 2, [1], samples=4000, seed=8, enumerate_all=False)
    assert result.enumerated is None
    assert abs(result.estimate - float(result.exact)) <= 5 * result.standard_error


@mark.parametrize("n", [4, 6])
def test_correlation_identity_on_every_matching(n):
    for m in range(1, n // 2 + 1):
        for matching in enumerate_matchings(n, m)[:5]:
            for s in range(1 << n):
                for w in all_inputs(m):
                    audit = bhm_service.correlation_identity_audit(matching, s, w)
                    assert audit.holds, (matching, s, w)


def test_level_set_membership():
    levels = LevelSets(4, 2, 2)
    assert levels.in_s([0b0011, 0b1100])
    assert levels.in_s([0b0011, 0b1100], ell=2)
    assert not levels.in_s([0b1111, 0b0011])
    assert levels.in_t([0b01, 0b10], ell=2)
    assert not levels.in_t([0b11, 0b01])


def test_round_law_is_a_distribution_and_hits_edges_at_rate_two_m_over_n():
    matching = Matching(8, ((0, 3), (2, 5)))
    x = (1, -1, -1, 1, 1, 1, -1, -1)
    law = bhm_service.round_distribution(x, matching)
    assert sum(law.values()) == approx(1.0)
    assert sum(p for (e, _, _), p in law.items() if e < matching.m) == approx(2 * 2 / 8)


def test_relation_holds_on_every_matched_outcome():
    matching = Matching(8, ((1, 6), (2, 4)))
    for x in all_inputs(8)[::17]:
        completed = bhm_service.complete_matching(matching)
        for (e, a, b) in bhm_service.round_distribution(x, matching):
            if e < matching.m:
                i, j = completed[e]
                assert bhm_service.relation_holds(x, RoundResult(True, i, j, a, b))


def test_round_distribution_needs_power_of_two():
    with raises(InvalidStateError):
        bhm_service.round_distribution((1,) * 6, Matching(6, ((0, 1),)))


def test_referee_uses_first_matched_round():
    matching = Matching(4, ((0, 2),))
    x = (1, -1, -1, 1)
    law = bhm_service.round_distribution(x, matching)
    e, a, b = next(key for key in law if key[0] == 0)
    matched = RoundResult(True, 0, 2, a, b)
    missed = RoundResult(False, 1, 3, 0, 0)
    for y, label in (((-1,), 1), ((1,), -1)):
        inst = BhmInstance(x, matching, y)
        assert bhm_service.referee_decide([[missed, matched]], [inst], reps_per_copy=2, seed=0) == label


def test_referee_needs_positive_reps():
    with raises(InvalidStateError):
        bhm_service.referee_decide([], [], 0)


def test_default_reps():
    assert bhm_service.default_reps(4, 1, 1) == math.ceil(math.log2(10) / 0.5)


def test_delta_over_all_inputs_is_zero():
    assert bhm_service.delta_az(range(16), 4, 1) == 0


def test_delta_of_singleton_is_two():
    assert bhm_service.delta_az([5], 4, 1) == 2


def test_delta_budget_and_validation():
    with raises(BudgetExceededError):
        bhm_service.delta_az([0], 4, 1, k=4)
    with raises(InvalidStateError):
        bhm_service.delta_az([], 4, 1)
    with raises(InvalidStateError):
        bhm_service.delta_az([16], 4, 1)


def test_fourier_bound_dominates_delta(rng):
    for _ in range(10):
        subset = [int(v) for v in np.flatnonzero(rng.random(16) < 0.4)] or [0]
        assert bhm_service.delta_fourier_bound(subset, 4, 1) >= float(bhm_service.delta_az(subset, 4, 1)) - 1e-12


def test_partition_advantage_is_half_the_weighted_delta(rng):
    for _ in range(10):
        labels = rng.integers(0, 2, size=16)
        assert bhm_service.advantage_of_partition(labels, 4, 1) == bhm_service.weighted_delta(labels, 4, 1) / 2


def test_brute_force_one_way_golden_value():
    result = bhm_service.brute_force_one_way(4, 1, 1)
    assert result.advantage.to_fraction() == Fraction(1, 3)
    assert result.partitions_searched == 2**16
    assert bhm_service.advantage_of_partition(result.best_partition, 4, 1) == Fraction(1, 3)


def test_brute_force_without_communication_has_no_advantage():
    assert bhm_service.brute_force_one_way(4, 1, 0).advantage.to_fraction() == 0


def test_brute_force_with_full_message():
    assert bhm_service.brute_force_one_way(2, 1, 2).advantage.to_fraction() == 1


def test_brute_force_labeling_budget():
    with raises(BudgetExceededError):
        bhm_service.brute_force_one_way(4, 1, 2)
