"""Tests for ballot construction and the multi-winner rules, against naive recount oracles."""

import itertools
import math
import sys
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from app.errors import InputError, InstanceTooLargeError
from app.recommend.elections import (
    DEFAULT_RULES,
    BallotProfile,
    RuleId,
    ballots_from_scores,
    balanced_assignment,
    bloc,
    chamberlin_courant_exact,
    chamberlin_courant_greedy,
    k_borda,
    monroe_exact,
    monroe_greedy,
    parse_rule,
    read_committee,
    run_rule,
    sntv,
    stv,
    write_committee,
)
from app.recommend.scoring import ScoreMatrix

POLARIZED = [("a", "b", "c", "d")] * 2 + [("d", "c", "b", "a")] * 2


def random_profile(rng: np.random.Generator, m: int, n: int) -> BallotProfile:
    candidates = [chr(ord("a") + i) for i in range(m)]
    rankings = [tuple(candidates[i] for i in rng.permutation(m)) for _ in range(n)]
    return BallotProfile.from_rankings(rankings)


def rankings_of(profile: BallotProfile) -> list[tuple[str, ...]]:
    return [profile.ranking_ids(v) for v in range(profile.n)]


def top_by(counts: dict[str, int], kappa: int) -> list[str]:
    return sorted(counts, key=lambda c: (-counts[c], c))[:kappa]


def naive_plurality(profile: BallotProfile, kappa: int) -> list[str]:
    counts = {c: 0 for c in profile.candidates}
    for ranking in rankings_of(profile):
        counts[ranking[0]] += 1
    return top_by(counts, kappa)


def naive_approval(profile: BallotProfile, kappa: int) -> list[str]:
    counts = {c: 0 for c in profile.candidates}
    for ranking in rankings_of(profile):
        for c in ranking[:kappa]:
            counts[c] += 1
    return top_by(counts, kappa)


def naive_borda(profile: BallotProfile, kappa: int) -> list[str]:
    counts = {c: 0 for c in profile.candidates}
    for ranking in rankings_of(profile):
        for position, c in enumerate(ranking):
            counts[c] += profile.m - 1 - position
    return top_by(counts, kappa)


def naive_cc_value(profile: BallotProfile, committee: tuple[str, ...]) -> int:
    total = 0
    for ranking in rankings_of(profile):
        total += max(profile.m - 1 - ranking.index(c) for c in committee)
    return total


def completed_matrix(users, articles, scores) -> ScoreMatrix:
    matrix = ScoreMatrix(users=tuple(users), articles=tuple(articles), observed={})
    return matrix.with_completed(np.asarray(scores, dtype=float))


def test_ballot_two_candidates():
    profile = ballots_from_scores(completed_matrix(["u"], ["a", "b"], [[10, 1]]))
    assert profile.ranking_ids(0) == ("a", "b")


def test_ballot_tie_broken_by_id():
    profile = ballots_from_scores(completed_matrix(["u"], ["a", "b", "c"], [[5, 5, 9]]))
    assert profile.ranking_ids(0) == ("c", "a", "b")


def test_ballots_match_sort_oracle():
    rng = np.random.default_rng(0)
    articles = ["a1", "a2", "a3", "a4"]
    scores = rng.integers(1, 4, size=(3, 4)).astype(float)
    profile = ballots_from_scores(completed_matrix(["u1", "u2", "u3"], articles, scores))

    for v in range(3):
        expected = tuple(sorted(articles, key=lambda a: (-scores[v, articles.index(a)], a)))
        assert profile.ranking_ids(v) == expected


def test_profile_rejects_non_permutation():
    with pytest.raises(InputError, match="permutation"):
        BallotProfile(candidates=("a", "b"), voters=("v",), rankings=np.array([[0, 0]]))


def test_sntv_examples():
    profile = BallotProfile.from_rankings([("a", "b", "c")] * 3)
    assert sntv(profile, 1).winners == ["a"]
    assert set(sntv(profile, 3).winners) == {"a", "b", "c"}


def test_bloc_hand_count():
    profile = BallotProfile.from_rankings([("a", "b", "c"), ("b", "c", "a")])
    assert bloc(profile, 2).winners == ["b", "a"]


def test_k_borda_examples():
    single = BallotProfile.from_rankings([("c", "a", "d", "b")])
    assert k_borda(single, 2).winners == ["c", "a"]

    tied = BallotProfile.from_rankings([("a", "b", "c"), ("c", "b", "a")])
    assert k_borda(tied, 1).winners == ["a"]


def test_stv_unanimous():
    profile = BallotProfile.from_rankings([("a", "b", "c")] * 3)
    assert stv(profile, 1).winners == ["a"]


def test_stv_elimination_order():
    profile = BallotProfile.from_rankings(
        [("a", "b", "c"), ("a", "b", "c"), ("b", "a", "c"), ("c", "b", "a")]
    )
    assert stv(profile, 1).winners == ["a"]


def test_stv_surplus_transfer_then_elimination():
    # quota 4; a's surplus of 1 moves on at 1/5 per ballot, d then b are eliminated
    profile = BallotProfile.from_rankings(
        [("a", "b", "c", "d")] * 5
        + [("b", "c", "a", "d")]
        + [("c", "d", "a", "b")] * 2
        + [("d", "c", "b", "a")]
    )
    assert stv(profile, 2).winners == ["a", "c"]


def test_cc_polarized():
    profile = BallotProfile.from_rankings(POLARIZED)
    greedy = chamberlin_courant_greedy(profile, 2)
    exact = chamberlin_courant_exact(profile, 2)

    assert greedy.winners == ["a", "d"]
    assert greedy.satisfaction_total == 12
    assert exact.winners == ["a", "d"]
    assert exact.satisfaction_total == 12
    assert greedy.assignment == {"v0": "a", "v1": "a", "v2": "d", "v3": "d"}


def test_cc_exact_full_committee():
    profile = BallotProfile.from_rankings([("b", "a", "c"), ("c", "a", "b")])
    assert chamberlin_courant_exact(profile, 3).winners == ["a", "b", "c"]


def test_monroe_polarized():
    profile = BallotProfile.from_rankings(POLARIZED)
    greedy = monroe_greedy(profile, 2)
    exact = monroe_exact(profile, 2)

    assert greedy.winners == ["a", "d"]
    assert greedy.assignment == {"v0": "a", "v1": "a", "v2": "d", "v3": "d"}
    assert exact.winners == ["a", "d"]
    assert exact.satisfaction_total == 12


def test_monroe_exact_identity_preferences():
    profile = BallotProfile.from_rankings([("a", "b", "c"), ("b", "c", "a"), ("c", "a", "b")])
    committee = monroe_exact(profile, 3)
    assert committee.assignment == {"v0": "a", "v1": "b", "v2": "c"}


def test_monroe_single_winner_takes_everyone():
    profile = BallotProfile.from_rankings([("a", "b", "c"), ("b", "a", "c"), ("c", "b", "a")])
    committee = monroe_greedy(profile, 1)
    assert committee.winners == k_borda(profile, 1).winners
    assert set(committee.assignment.values()) == set(committee.winners)
    assert len(committee.assignment) == 3


def test_rules_match_naive_recounts():
    rng = np.random.default_rng(2024)
    mismatches = 0
    for _ in range(1000):
        m = int(rng.integers(1, 7))
        n = int(rng.integers(1, 9))
        kappa = int(rng.integers(1, min(3, m) + 1))
        profile = random_profile(rng, m, n)

        mismatches += sntv(profile, kappa).winners != naive_plurality(profile, kappa)
        mismatches += bloc(profile, kappa).winners != naive_approval(profile, kappa)
        mismatches += k_borda(profile, kappa).winners != naive_borda(profile, kappa)
    assert mismatches == 0


def test_greedy_cc_within_bound_of_exact():
    rng = np.random.default_rng(7)
    bound = 1 - 1 / math.e
    for _ in range(500):
        m = int(rng.integers(1, 8))
        n = int(rng.integers(1, 7))
        kappa = int(rng.integers(1, min(3, m) + 1))
        profile = random_profile(rng, m, n)

        greedy = chamberlin_courant_greedy(profile, kappa)
        exact = chamberlin_courant_exact(profile, kappa)
        optimum = max(
            naive_cc_value(profile, combo)
            for combo in itertools.combinations(profile.candidates, kappa)
        )

        assert exact.satisfaction_total == optimum
        assert naive_cc_value(profile, tuple(exact.winners)) == optimum
        assert greedy.satisfaction_total == naive_cc_value(profile, tuple(greedy.winners))
        assert greedy.satisfaction_total >= bound * optimum


def assert_balanced(committee, n: int, kappa: int) -> None:
    assert len(committee.assignment) == n
    loads = Counter(committee.assignment.values())
    assert set(loads) == set(committee.winners)
    assert max(loads.values()) - min(loads.values()) <= 1
    assert sum(loads.values()) == n


def test_monroe_assignments_are_balanced():
    rng = np.random.default_rng(11)
    for _ in range(500):
        kappa = int(rng.integers(1, 5))
        m = int(rng.integers(kappa, 7))
        n = int(rng.integers(kappa, 13))
        profile = random_profile(rng, m, n)

        greedy = monroe_greedy(profile, kappa)
        assert_balanced(greedy, n, kappa)

        if n <= 10:
            exact = monroe_exact(profile, kappa)
            assert_balanced(exact, n, kappa)
            assert exact.satisfaction_total >= greedy.satisfaction_total


def test_balanced_assignment_loads():
    borda = np.array([[2, 1, 0], [2, 1, 0], [2, 1, 0], [2, 0, 1], [0, 1, 2]])
    total, winner_of = balanced_assignment(borda, (0, 2))

    loads = Counter(winner_of.tolist())
    assert sorted(loads.values()) == [2, 3]
    assert total == int(borda[np.arange(5), winner_of].sum())


def test_stv_droop_property():
    rng = np.random.default_rng(3)
    violations = 0
    for _ in range(500):
        m = int(rng.integers(1, 6))
        n = int(rng.integers(1, 10))
        kappa = int(rng.integers(1, m + 1))
        profile = random_profile(rng, m, n)
        quota = n // (kappa + 1) + 1

        winners = set(stv(profile, kappa).winners)
        firsts = Counter(r[0] for r in rankings_of(profile))
        violations += sum(1 for c, count in firsts.items() if count >= quota and c not in winners)
    assert violations == 0


def test_single_seat_equivalences():
    rng = np.random.default_rng(19)
    for _ in range(200):
        profile = random_profile(rng, int(rng.integers(1, 7)), int(rng.integers(1, 9)))
        assert sntv(profile, 1).winners == bloc(profile, 1).winners
        borda_winner = k_borda(profile, 1).winners
        assert chamberlin_courant_greedy(profile, 1).winners == borda_winner
        assert monroe_greedy(profile, 1).winners == borda_winner


def test_every_rule_returns_kappa_distinct_winners_deterministically():
    rng = np.random.default_rng(23)
    profile = random_profile(rng, 6, 8)
    for rule in RuleId:
        first = run_rule(rule, profile, 3)
        second = run_rule(rule, profile, 3)
        assert first == second
        assert len(set(first.winners)) == 3
        assert set(first.winners) <= set(profile.candidates)


def test_order_preserving_relabel_maps_committees():
    rng = np.random.default_rng(29)
    profile = random_profile(rng, 5, 7)
    relabel = {c: f"x{c}" for c in profile.candidates}
    renamed = BallotProfile.from_rankings([tuple(relabel[c] for c in r) for r in rankings_of(profile)])

    for rule in DEFAULT_RULES:
        original = run_rule(rule, profile, 2).winners
        assert run_rule(rule, renamed, 2).winners == [relabel[c] for c in original]


def test_kappa_larger_than_candidates_rejected():
    profile = BallotProfile.from_rankings([("a", "b")])
    for rule in RuleId:
        with pytest.raises(InputError, match="kappa"):
            run_rule(rule, profile, 3)


def test_monroe_needs_enough_voters():
    profile = BallotProfile.from_rankings([("a", "b", "c")])
    with pytest.raises(InputError, match="voters"):
        monroe_greedy(profile, 2)


def test_exact_solvers_refuse_large_instances():
    rng = np.random.default_rng(31)
    wide = random_profile(rng, 26, 4)
    with pytest.raises(InstanceTooLargeError, match="CC") as excinfo:
        chamberlin_courant_exact(wide, 10)
    assert excinfo.value.exit_code == 3

    crowded = random_profile(rng, 3, 11)
    with pytest.raises(InstanceTooLargeError, match="Monroe"):
        monroe_exact(crowded, 2)


def test_parse_rule_aliases():
    assert parse_rule("stv") is RuleId.STV
    assert parse_rule("k-Borda") is RuleId.KBORDA
    assert parse_rule("CC-exact") is RuleId.CC_EXACT
    with pytest.raises(ValueError, match="unknown rule"):
        parse_rule("approval")


def test_committee_json_round_trip(tmp_path):
    profile = BallotProfile.from_rankings(POLARIZED)
    committee = monroe_greedy(profile, 2)
    path = tmp_path / "Monroe.json"

    write_committee(committee, path)

    assert read_committee(path) == committee
    assert '"rule": "Monroe"' in path.read_text()
