"""
Ranking Service - Pareto tiers, the search archive and front pair selection.

Tiers and pair selection minimise (complexity, nmse); the search archive
replaces nmse with archive_quality, which folds in the EIC penalty.
"""
from typing import Iterable, Sequence

from eicsr.schemas.response import CandidateRecord
from eicsr.schemas.state import Candidate, Pair, ParetoFront, PairSelection, S, Scored

# pair-selection constraints
MAX_COMPLEXITY_GAP = 2
MAX_R2_GAP = 0.02
MIN_EIC_GAP = 3.0
MIN_BEST_R2 = 0.85
_TOL = 1e-12


def dominates(a: Scored, b: Scored) -> bool:
    """a is no worse on both objectives and strictly better on one."""
    return (
        a.complexity <= b.complexity
        and a.nmse <= b.nmse
        and (a.complexity < b.complexity or a.nmse < b.nmse)
    )


def _order(tier: list[S]) -> list[S]:
    return sorted(tier, key=lambda c: (c.complexity, c.nmse))


def pareto_tiers(cands: Sequence[S]) -> ParetoFront[S]:
    """
    Successive non-dominated sorting.

    Each member keeps the set it dominates and the count of members that
    dominate it; tier k+1 is whatever reaches count zero once tier k is
    removed. Candidates equal on both keys share a tier.
    """
    n = len(cands)
    dominated_by_me: list[list[int]] = [[] for _ in range(n)]
    dominating_count = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if dominates(cands[i], cands[j]):
                dominated_by_me[i].append(j)
                dominating_count[j] += 1
            elif dominates(cands[j], cands[i]):
                dominated_by_me[j].append(i)
                dominating_count[i] += 1

    current = [i for i in range(n) if dominating_count[i] == 0]
    tiers: list[list[S]] = []
    while current:
        tiers.append(_order([cands[i] for i in current]))
        following: list[int] = []
        for p in current:
            for q in dominated_by_me[p]:
                dominating_count[q] -= 1
                if dominating_count[q] == 0:
                    following.append(q)
        current = sorted(following)
    return ParetoFront(tiers=tiers)


def archive_quality(candidate: Candidate, alpha: float) -> tuple[float, float]:
    """Accuracy reward less the EIC penalty, then lower NMSE; higher is better."""
    return (1.0 / (1.0 + candidate.nmse) - alpha * candidate.eic, -candidate.nmse)


class ParetoArchive:
    """
    Non-dominated set of every candidate offered during a search.

    Members are compared on complexity and archive_quality. With alpha=0 this
    is plain (complexity, nmse) dominance; with alpha>0 a candidate that buys a
    marginal NMSE gain with a large EIC increase does not displace a stabler
    member of the same size. Candidates with the NMSE sentinel, or whose
    fitted complexity exceeds max_complexity, are never archived. Of several
    candidates with identical keys, the first one offered is kept.
    """

    def __init__(self, alpha: float = 0.0, max_complexity: int | None = None) -> None:
        self.alpha = alpha
        self.max_complexity = max_complexity
        self._members: list[tuple[Candidate, tuple[float, float]]] = []

    def offer(self, candidate: Candidate) -> bool:
        if candidate.nmse == float("inf"):
            return False
        if self.max_complexity is not None and candidate.complexity > self.max_complexity:
            return False
        quality = archive_quality(candidate, self.alpha)
        size = candidate.complexity
        for member, q in self._members:
            if member.complexity <= size and q >= quality:
                return False
        self._members = [
            (m, q)
            for m, q in self._members
            if not (size <= m.complexity and quality >= q)
        ]
        self._members.append((candidate, quality))
        return True

    def extend(self, candidates: Iterable[Candidate]) -> None:
        for candidate in candidates:
            self.offer(candidate)

    @property
    def members(self) -> list[Candidate]:
        return _order([m for m, _ in self._members])

    def best(self) -> Candidate | None:
        """Highest fitness; ties go to the lower complexity."""
        if not self._members:
            return None
        return max(self.members, key=lambda c: (c.fitness, -c.complexity))

    def __len__(self) -> int:
        return len(self._members)


def pair_distance(a: CandidateRecord, b: CandidateRecord) -> float:
    """dC^2 + dR2^2 - dEIC^2; lower is a more telling pair."""
    return (
        (a.complexity - b.complexity) ** 2
        + (a.r2 - b.r2) ** 2
        - (a.eic - b.eic) ** 2
    )


def pair_qualifies(a: CandidateRecord, b: CandidateRecord) -> bool:
    return (
        abs(a.complexity - b.complexity) <= MAX_COMPLEXITY_GAP
        and abs(a.r2 - b.r2) <= MAX_R2_GAP + _TOL
        and abs(a.eic - b.eic) >= MIN_EIC_GAP - _TOL
        and max(a.r2, b.r2) > MIN_BEST_R2
    )


def _as_record(item: Candidate | CandidateRecord) -> CandidateRecord:
    return item.to_record() if isinstance(item, Candidate) else item


def select_pairs(
    front_a: Sequence[Candidate | CandidateRecord],
    front_b: Sequence[Candidate | CandidateRecord],
) -> PairSelection:
    """
    Cross-front pairs of similar size and accuracy but very different EIC.

    Every qualifying pair is returned, sorted by distance ascending; an empty
    selection is a valid result.
    """
    records_a = [_as_record(c) for c in front_a]
    records_b = [_as_record(c) for c in front_b]
    pairs = [
        Pair(a=a, b=b, distance=pair_distance(a, b))
        for a in records_a
        for b in records_b
        if pair_qualifies(a, b)
    ]
    pairs.sort(key=lambda p: p.distance)
    return PairSelection(pairs=pairs)
