import random

import pytest
from hypothesis import given, strategies as st

from stakenav import (
    DegenerateStakesError,
    InvalidPairError,
    ScanCounter,
    StakeTable,
    VisibilitySnapshot,
    common_landmarks,
    consensus_score,
    consensus_score_matrix,
    elect_generator,
    indicator,
    stake_weight,
)


def snapshot_fixture():
    # 3 robots, 4 landmarks; robots 0 and 1 share landmarks 0 and 2.
    recognized = [{0, 1, 2}, {0, 2, 3}, {3}]
    qualities = {(0, 1, 0): 0.5, (0, 1, 2): 0.25, (1, 2, 3): 0.8}
    return VisibilitySnapshot(4, recognized, qualities)


def random_snapshot(rng, n, m):
    recognized = [{k for k in range(m) if rng.random() < 0.5} for _ in range(n)]
    qualities = {}
    for i in range(n):
        for j in range(i + 1, n):
            for k in sorted(recognized[i] & recognized[j]):
                qualities[(i, j, k)] = rng.random()
    return VisibilitySnapshot(m, recognized, qualities)


def test_stake_table_rejects_negative():
    with pytest.raises(ValueError):
        StakeTable([1.0, -0.5])


def test_stake_weight_basic():
    table = StakeTable([1.0, 3.0])
    assert stake_weight(table, 0) == 0.25
    assert stake_weight(table, 1) == 0.75
    with pytest.raises(IndexError):
        stake_weight(table, 2)


def test_stake_weight_degenerate_zero_total():
    with pytest.raises(DegenerateStakesError):
        stake_weight(StakeTable([0.0, 0.0]), 0)


@given(st.lists(st.floats(min_value=1e-6, max_value=1e6), min_size=1, max_size=16))
def test_stake_weights_sum_to_one(stakes):
    table = StakeTable(stakes)
    total = sum(stake_weight(table, i) for i in range(len(stakes)))
    assert abs(total - 1.0) <= 1e-12


@given(
    st.lists(st.floats(min_value=1e-3, max_value=1e3), min_size=2, max_size=8),
    st.floats(min_value=1e-3, max_value=1e3),
)
def test_stake_weight_scale_invariance(stakes, c):
    base = StakeTable(stakes)
    scaled = StakeTable([s * c for s in stakes])
    for i in range(len(stakes)):
        assert abs(stake_weight(base, i) - stake_weight(scaled, i)) <= 1e-12


def test_indicator_values_and_pair_check():
    snap = snapshot_fixture()
    assert indicator(snap, 0, 0, 1) == 1
    assert indicator(snap, 1, 0, 1) == 0  # robot 1 does not see landmark 1
    assert indicator(snap, 3, 1, 2) == 1
    assert indicator(snap, 3, 0, 1) == 0
    with pytest.raises(InvalidPairError):
        indicator(snap, 0, 1, 1)


def test_common_landmarks_symmetric():
    snap = snapshot_fixture()
    assert common_landmarks(snap, 0, 1) == {0, 2}
    assert common_landmarks(snap, 1, 0) == {0, 2}
    assert common_landmarks(snap, 0, 2) == set()


def test_consensus_score_manual():
    snap = snapshot_fixture()
    table = StakeTable([1.0, 1.0, 2.0])
    # W(0) = 0.25, shared qualities 0.5 + 0.25
    assert consensus_score(table, snap, 0, 1) == pytest.approx(0.25 * 0.75, abs=1e-15)
    # same pair, other direction: W(1) = 0.25 here too
    assert consensus_score(table, snap, 1, 0) == pytest.approx(0.25 * 0.75, abs=1e-15)
    assert consensus_score(table, snap, 0, 2) == 0.0
    assert consensus_score(table, snap, 2, 1) == pytest.approx(0.5 * 0.8, abs=1e-15)


def test_consensus_score_counts_one_scan_per_landmark():
    snap = snapshot_fixture()
    table = StakeTable([1.0, 1.0, 1.0])
    counter = ScanCounter()
    consensus_score(table, snap, 0, 1, counter)
    assert counter.scans == snap.n_landmarks
    consensus_score(table, snap, 2, 0, counter)
    assert counter.scans == 2 * snap.n_landmarks


def test_consensus_is_not_symmetric_with_unequal_stakes():
    snap = snapshot_fixture()
    table = StakeTable([3.0, 1.0, 1.0])
    assert consensus_score(table, snap, 0, 1) != consensus_score(table, snap, 1, 0)


@given(st.integers(min_value=0, max_value=2**32))
def test_cross_symmetry_property(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 6)
    snap = random_snapshot(rng, n, rng.randint(1, 8))
    table = StakeTable([rng.uniform(0.01, 10.0) for _ in range(n)])
    i, j = rng.sample(range(n), 2)
    lhs = consensus_score(table, snap, i, j) * stake_weight(table, j)
    rhs = consensus_score(table, snap, j, i) * stake_weight(table, i)
    assert abs(lhs - rhs) <= 1e-12


def test_matrix_matches_pairwise_calls_and_scan_count():
    rng = random.Random(5)
    n, m = 5, 7
    snap = random_snapshot(rng, n, m)
    table = StakeTable([rng.uniform(0.1, 2.0) for _ in range(n)])
    scores, scans = consensus_score_matrix(table, snap)
    assert scans == m * n * (n - 1) // 2
    for i in range(n):
        assert scores[i][i] == 0.0
        for j in range(n):
            if i != j:
                assert scores[i][j] == pytest.approx(
                    consensus_score(table, snap, i, j), abs=1e-15
                )


def test_snapshot_check_catches_inconsistent_qualities():
    recognized = [{0}, {0}]
    VisibilitySnapshot(1, recognized, {(0, 1, 0): 0.5}).check()
    with pytest.raises(ValueError):
        VisibilitySnapshot(1, recognized, {}).check()
    with pytest.raises(ValueError):
        VisibilitySnapshot(1, [{0}, set()], {(0, 1, 0): 0.5}).check()


def test_election_prefers_heavier_weights():
    rng = random.Random(0)
    wins = [0, 0]
    for _ in range(2000):
        wins[elect_generator([1.0, 9.0], rng)] += 1
    assert wins[1] > wins[0] * 3


def test_election_single_positive_weight_always_wins():
    rng = random.Random(1)
    for _ in range(50):
        assert elect_generator([0.0, 0.0, 2.5, 0.0], rng) == 2


def test_election_falls_back_to_stakes_then_uniform():
    rng = random.Random(2)
    # zero navigability everywhere -> stakes decide
    for _ in range(50):
        assert elect_generator([0.0, 0.0, 0.0], rng, stakes=[0.0, 4.0, 0.0]) == 1
    # zero stakes too -> uniform over all robots
    seen = {elect_generator([0.0, 0.0, 0.0], rng, stakes=[0.0, 0.0, 0.0]) for _ in range(500)}
    assert seen == {0, 1, 2}
    # no stakes provided behaves like the uniform fallback
    seen = {elect_generator([0.0, 0.0], rng) for _ in range(200)}
    assert seen == {0, 1}


def test_election_consumes_exactly_one_draw():
    a = random.Random(9)
    b = random.Random(9)
    elect_generator([1.0, 2.0, 3.0], a)
    b.random()
    assert a.random() == b.random()


def test_election_rejects_bad_input():
    rng = random.Random(0)
    with pytest.raises(ValueError):
        elect_generator([], rng)
    with pytest.raises(ValueError):
        elect_generator([1.0, -0.5], rng)
