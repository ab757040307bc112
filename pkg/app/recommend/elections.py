"""
Multi-winner elections over the completed score matrix.

Articles are candidates, users are voters, and each voter ranks every article by
descending V* score. Every rule breaks ties towards the lower article id; since
candidates are stored in ascending id order that is always the lower index.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np
from pydantic import BaseModel
from scipy.optimize import linear_sum_assignment

from app.errors import InputError, InstanceTooLargeError
from app.recommend.scoring import ScoreMatrix

logger = logging.getLogger(__name__)

MAX_EXACT_COMMITTEES = 10**6
MAX_EXACT_MONROE_VOTERS = 10


class RuleId(str, Enum):
    SNTV = "SNTV"
    BLOC = "Bloc"
    KBORDA = "kBorda"
    STV = "STV"
    CC = "CC"
    MONROE = "Monroe"
    CC_EXACT = "CCExact"
    MONROE_EXACT = "MonroeExact"

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]


_DISPLAY_NAMES = {
    RuleId.SNTV: "SNTV",
    RuleId.BLOC: "Bloc",
    RuleId.KBORDA: "k-Borda",
    RuleId.STV: "STV",
    RuleId.CC: "CC",
    RuleId.MONROE: "Monroe",
    RuleId.CC_EXACT: "CC (exact)",
    RuleId.MONROE_EXACT: "Monroe (exact)",
}

DEFAULT_RULES = (RuleId.SNTV, RuleId.STV, RuleId.KBORDA, RuleId.BLOC, RuleId.CC, RuleId.MONROE)

_ALIASES = {rule.value.lower(): rule for rule in RuleId}
_ALIASES.update({"k-borda": RuleId.KBORDA, "borda": RuleId.KBORDA, "cc-exact": RuleId.CC_EXACT,
                 "monroe-exact": RuleId.MONROE_EXACT})


def parse_rule(name: str) -> RuleId:
    """Resolve a case-insensitive rule name such as 'stv' or 'k-borda'."""
    key = name.strip().lower()
    if key not in _ALIASES:
        raise ValueError(f"unknown rule '{name}'; choose from {', '.join(r.value for r in RuleId)}")
    return _ALIASES[key]


@dataclass(frozen=True, eq=False)
class BallotProfile:
    """
    Strict rankings of all candidates, one per voter.

    ``rankings[v]`` lists candidate indices from most to least preferred.
    """

    candidates: tuple[str, ...]
    voters: tuple[str, ...]
    rankings: np.ndarray

    def __post_init__(self):
        m, n = len(self.candidates), len(self.voters)
        if m < 1 or n < 1:
            raise InputError("an election needs at least one candidate and one voter", stage="elect")
        if self.rankings.shape != (n, m):
            raise InputError(f"rankings shape {self.rankings.shape} != ({n}, {m})", stage="elect")
        if not np.array_equal(np.sort(self.rankings, axis=1), np.tile(np.arange(m), (n, 1))):
            raise InputError("every ranking must be a permutation of the candidates", stage="elect")

    @classmethod
    def from_rankings(
        cls, rankings: list[list[str]] | list[tuple[str, ...]], voters: list[str] | None = None
    ) -> "BallotProfile":
        """Build a profile from literal rankings of candidate ids."""
        candidates = tuple(sorted(rankings[0]))
        index = {c: i for i, c in enumerate(candidates)}
        try:
            array = np.array([[index[c] for c in ranking] for ranking in rankings], dtype=np.intp)
        except KeyError as e:
            raise InputError(f"ranking mentions unknown candidate {e}", stage="elect") from e
        voter_ids = tuple(voters) if voters else tuple(f"v{i}" for i in range(len(rankings)))
        return cls(candidates=candidates, voters=voter_ids, rankings=array)

    @property
    def m(self) -> int:
        return len(self.candidates)

    @property
    def n(self) -> int:
        return len(self.voters)

    def positions(self) -> np.ndarray:
        """positions[v, c] = 0-based rank of candidate c on voter v's ballot."""
        pos = np.empty_like(self.rankings)
        rows = np.arange(self.n)[:, None]
        pos[rows, self.rankings] = np.arange(self.m)
        return pos

    def first_choices(self) -> np.ndarray:
        """Number of voters ranking each candidate first."""
        return np.bincount(self.rankings[:, 0], minlength=self.m)

    def borda_matrix(self) -> np.ndarray:
        """Borda score m - 1 - position for every (voter, candidate)."""
        return self.m - 1 - self.positions()

    def ranking_ids(self, voter: int) -> tuple[str, ...]:
        return tuple(self.candidates[c] for c in self.rankings[voter])


class Committee(BaseModel):
    """Winning articles of one rule, in the order the rule selected them."""

    rule: RuleId
    kappa: int
    winners: list[str]
    assignment: dict[str, str] | None = None
    satisfaction_total: int | None = None  # Borda representation value (CC/Monroe)


def rank_by_score(scores: np.ndarray) -> np.ndarray:
    """Row-wise candidate indices by descending score, ties to the lower index."""
    return np.argsort(-scores, axis=-1, kind="stable")


def ballots_from_scores(matrix: ScoreMatrix) -> BallotProfile:
    """
    Each user ranks every article by descending V* score.

    Args:
        matrix: Completed score matrix

    Returns:
        BallotProfile with candidates = articles and voters = users
    """
    completed = matrix.require_completed()
    return BallotProfile(
        candidates=matrix.articles,
        voters=matrix.users,
        rankings=rank_by_score(completed).astype(np.intp),
    )


def _check_kappa(profile: BallotProfile, kappa: int) -> None:
    if kappa < 1:
        raise InputError(f"kappa must be >= 1, got {kappa}", stage="elect")
    if kappa > profile.m:
        raise InputError(f"kappa={kappa} exceeds the {profile.m} candidates", stage="elect")


def _top_by_score(scores, kappa: int) -> list[int]:
    return sorted(range(len(scores)), key=lambda c: (-scores[c], c))[:kappa]


def _committee(profile: BallotProfile, rule: RuleId, kappa: int, chosen: list[int], **extra) -> Committee:
    return Committee(
        rule=rule, kappa=kappa, winners=[profile.candidates[c] for c in chosen], **extra
    )


def sntv(profile: BallotProfile, kappa: int) -> Committee:
    """Top kappa candidates by number of first places."""
    _check_kappa(profile, kappa)
    firsts = profile.first_choices()
    return _committee(profile, RuleId.SNTV, kappa, _top_by_score(firsts.tolist(), kappa))


def bloc(profile: BallotProfile, kappa: int) -> Committee:
    """Each voter approves their top kappa; most approvals win."""
    _check_kappa(profile, kappa)
    approvals = np.bincount(profile.rankings[:, :kappa].ravel(), minlength=profile.m)
    return _committee(profile, RuleId.BLOC, kappa, _top_by_score(approvals.tolist(), kappa))


def k_borda(profile: BallotProfile, kappa: int) -> Committee:
    """Top kappa candidates by summed Borda score."""
    _check_kappa(profile, kappa)
    totals = profile.borda_matrix().sum(axis=0)
    return _committee(profile, RuleId.KBORDA, kappa, _top_by_score(totals.tolist(), kappa))


def stv(profile: BallotProfile, kappa: int) -> Committee:
    """
    Single transferable vote with a Droop quota and Gregory surplus transfers.

    Each round, the hopeful candidate with the largest tally at or above the
    quota is elected and every ballot sitting with it moves on at weight
    ``weight * surplus / tally``. If nobody reaches the quota, the lowest tally
    is eliminated (ties: the higher id goes) and its ballots move on at full
    weight. When the hopefuls exactly fill the remaining seats they are all
    elected. Arithmetic is exact (Fraction).
    """
    _check_kappa(profile, kappa)
    quota = profile.n // (kappa + 1) + 1
    rankings = profile.rankings.tolist()
    weights = [Fraction(1)] * profile.n
    pointer = [0] * profile.n
    hopeful = set(range(profile.m))
    elected: list[int] = []

    def advance(v: int) -> None:
        ranking = rankings[v]
        while pointer[v] < len(ranking) and ranking[pointer[v]] not in hopeful:
            pointer[v] += 1

    round_no = 0
    while len(elected) < kappa:
        round_no += 1
        seats_left = kappa - len(elected)
        tallies = {c: Fraction(0) for c in hopeful}
        holders: dict[int, list[int]] = {c: [] for c in hopeful}
        for v in range(profile.n):
            advance(v)
            if pointer[v] < profile.m and weights[v] > 0:
                c = rankings[v][pointer[v]]
                tallies[c] += weights[v]
                holders[c].append(v)

        if len(hopeful) <= seats_left:
            rest = sorted(hopeful, key=lambda c: (-tallies[c], c))
            elected.extend(rest)
            logger.debug("STV round %d: %d hopefuls fill the remaining seats", round_no, len(rest))
            break

        reached = [c for c in hopeful if tallies[c] >= quota]
        if reached:
            winner = min(reached, key=lambda c: (-tallies[c], c))
            surplus = tallies[winner] - quota
            ratio = surplus / tallies[winner]
            for v in holders[winner]:
                weights[v] *= ratio
            hopeful.discard(winner)
            elected.append(winner)
            logger.debug("STV round %d: elected %s (tally %s, quota %d)",
                         round_no, profile.candidates[winner], tallies[winner], quota)
        else:
            loser = min(hopeful, key=lambda c: (tallies[c], -c))
            hopeful.discard(loser)
            logger.debug("STV round %d: eliminated %s (tally %s)",
                         round_no, profile.candidates[loser], tallies[loser])

    return _committee(profile, RuleId.STV, kappa, elected)


def _representatives(borda: np.ndarray, chosen: list[int]) -> np.ndarray:
    """Each voter's best-ranked member of ``chosen`` (ties to the lower index)."""
    block = borda[:, chosen]
    return np.asarray(chosen)[np.argmax(block, axis=1)]


def _cc_assignment(profile: BallotProfile, borda: np.ndarray, chosen: list[int]) -> dict[str, str]:
    reps = _representatives(borda, sorted(chosen))
    return {voter: profile.candidates[c] for voter, c in zip(profile.voters, reps.tolist())}


def chamberlin_courant_greedy(profile: BallotProfile, kappa: int) -> Committee:
    """
    Greedy Chamberlin-Courant.

    A voter's satisfaction is the Borda score of their best-ranked winner.
    Candidates are added one at a time by largest marginal gain in total
    satisfaction; the objective is monotone submodular, so the result is
    within (1 - 1/e) of the optimum.
    """
    _check_kappa(profile, kappa)
    borda = profile.borda_matrix()
    current = np.zeros(profile.n, dtype=borda.dtype)
    chosen: list[int] = []
    available = np.ones(profile.m, dtype=bool)

    for _ in range(kappa):
        gains = np.maximum(borda - current[:, None], 0).sum(axis=0)
        gains = np.where(available, gains, -1)
        best = int(np.argmax(gains))  # first maximum = lowest id
        chosen.append(best)
        available[best] = False
        current = np.maximum(current, borda[:, best])

    return _committee(
        profile,
        RuleId.CC,
        kappa,
        chosen,
        assignment=_cc_assignment(profile, borda, chosen),
        satisfaction_total=int(current.sum()),
    )


def _guard_enumeration(profile: BallotProfile, kappa: int, greedy_hint: str) -> int:
    count = math.comb(profile.m, kappa)
    if count > MAX_EXACT_COMMITTEES:
        raise InstanceTooLargeError(
            f"{count} committees of size {kappa} exceed the exact-solver limit of "
            f"{MAX_EXACT_COMMITTEES}; use the '{greedy_hint}' rule instead",
            stage="elect",
        )
    return count


def chamberlin_courant_exact(profile: BallotProfile, kappa: int) -> Committee:
    """Best Chamberlin-Courant committee by enumerating every kappa-subset."""
    _check_kappa(profile, kappa)
    count = _guard_enumeration(profile, kappa, RuleId.CC.value)
    borda = profile.borda_matrix()

    best_value = -1
    best: tuple[int, ...] = ()
    for combo in itertools.combinations(range(profile.m), kappa):
        value = int(borda[:, combo].max(axis=1).sum())
        if value > best_value:  # strict: keeps the lexicographically first optimum
            best_value, best = value, combo

    logger.debug("CC exact: enumerated %d committees, best value %d", count, best_value)
    chosen = list(best)
    return _committee(
        profile,
        RuleId.CC_EXACT,
        kappa,
        chosen,
        assignment=_cc_assignment(profile, borda, chosen),
        satisfaction_total=best_value,
    )


def _check_monroe(profile: BallotProfile, kappa: int) -> None:
    _check_kappa(profile, kappa)
    if kappa > profile.n:
        raise InputError(
            f"kappa={kappa} exceeds the {profile.n} voters; Monroe cannot balance the assignment",
            stage="elect",
        )


def monroe_greedy(profile: BallotProfile, kappa: int) -> Committee:
    """
    Greedy Monroe.

    For each of kappa rounds, every remaining candidate claims the unassigned
    voters that rank it highest; the candidate whose group adds the most Borda
    satisfaction wins the round and its voters are assigned to it. The first
    ``n mod kappa`` rounds take ceil(n/kappa) voters, later rounds floor(n/kappa).
    """
    _check_monroe(profile, kappa)
    borda = profile.borda_matrix()
    base, extra = divmod(profile.n, kappa)
    unassigned = np.ones(profile.n, dtype=bool)
    available = list(range(profile.m))
    chosen: list[int] = []
    assignment: dict[str, str] = {}
    total = 0

    for t in range(kappa):
        size = base + 1 if t < extra else base
        pool = np.flatnonzero(unassigned)
        best_gain, best_cand, best_group = -1, -1, pool[:0]
        for c in available:
            # highest Borda first, ties to the lower voter index
            order = pool[np.argsort(-borda[pool, c], kind="stable")][:size]
            gain = int(borda[order, c].sum())
            if gain > best_gain:
                best_gain, best_cand, best_group = gain, c, order
        chosen.append(best_cand)
        available.remove(best_cand)
        unassigned[best_group] = False
        total += best_gain
        for v in best_group.tolist():
            assignment[profile.voters[v]] = profile.candidates[best_cand]

    return _committee(
        profile, RuleId.MONROE, kappa, chosen, assignment=assignment, satisfaction_total=total
    )


def balanced_assignment(borda: np.ndarray, chosen: tuple[int, ...]) -> tuple[int, np.ndarray]:
    """
    Optimal Monroe assignment of all voters to ``chosen``.

    Every winner gets floor(n/k) or ceil(n/k) voters. Solved as a linear
    assignment over slots: each winner owns floor(n/k) mandatory slots and, when
    n is not a multiple of k, one optional slot. Mandatory slots carry a bonus
    larger than any achievable satisfaction so they are always filled first.

    Args:
        borda: n x m Borda score matrix
        chosen: Candidate indices of the committee

    Returns:
        (total satisfaction, winner index per voter)
    """
    n = borda.shape[0]
    kappa = len(chosen)
    base, extra = divmod(n, kappa)
    bonus = int(borda.max()) * n + 1

    slot_owner = [w for w in chosen for _ in range(base)]
    slot_bonus = [bonus] * len(slot_owner)
    if extra:
        slot_owner += list(chosen)
        slot_bonus += [0] * kappa

    owners = np.asarray(slot_owner)
    value = borda[:, owners] + np.asarray(slot_bonus)[None, :]
    voter_idx, slot_idx = linear_sum_assignment(value, maximize=True)
    winner_of = np.empty(n, dtype=np.intp)
    winner_of[voter_idx] = owners[slot_idx]
    total = int(borda[np.arange(n), winner_of].sum())
    return total, winner_of


def monroe_exact(profile: BallotProfile, kappa: int) -> Committee:
    """Best Monroe committee: enumerate kappa-subsets, assign each optimally."""
    _check_monroe(profile, kappa)
    if profile.n > MAX_EXACT_MONROE_VOTERS:
        raise InstanceTooLargeError(
            f"{profile.n} voters exceed the exact Monroe limit of {MAX_EXACT_MONROE_VOTERS}; "
            f"use the '{RuleId.MONROE.value}' rule instead",
            stage="elect",
        )
    _guard_enumeration(profile, kappa, RuleId.MONROE.value)
    borda = profile.borda_matrix()

    best_value = -1
    best: tuple[int, ...] = ()
    best_winner_of = np.empty(0, dtype=np.intp)
    for combo in itertools.combinations(range(profile.m), kappa):
        value, winner_of = balanced_assignment(borda, combo)
        if value > best_value:
            best_value, best, best_winner_of = value, combo, winner_of

    assignment = {
        voter: profile.candidates[c] for voter, c in zip(profile.voters, best_winner_of.tolist())
    }
    return _committee(
        profile,
        RuleId.MONROE_EXACT,
        kappa,
        list(best),
        assignment=assignment,
        satisfaction_total=best_value,
    )


RULES: dict[RuleId, Callable[[BallotProfile, int], Committee]] = {
    RuleId.SNTV: sntv,
    RuleId.BLOC: bloc,
    RuleId.KBORDA: k_borda,
    RuleId.STV: stv,
    RuleId.CC: chamberlin_courant_greedy,
    RuleId.MONROE: monroe_greedy,
    RuleId.CC_EXACT: chamberlin_courant_exact,
    RuleId.MONROE_EXACT: monroe_exact,
}


def run_rule(rule: RuleId, profile: BallotProfile, kappa: int) -> Committee:
    committee = RULES[rule](profile, kappa)
    logger.info("%s winners (kappa=%d): %s", rule.value, kappa, ", ".join(committee.winners))
    return committee


def write_committee(committee: Committee, path: str | Path) -> None:
    Path(path).write_text(committee.model_dump_json(indent=2, exclude_none=True) + "\n")


def read_committee(path: str | Path) -> Committee:
    return Committee.model_validate_json(Path(path).read_text())
