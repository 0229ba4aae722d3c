"""
Answer Aggregation and Evaluation
lambda-weighted evidential aggregation of the averaged precise and
imprecise answer masses, majority-vote baseline, and error rates on
gold questions swept over lambda and contributor groups.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from belief import (
    DEFAULT_TOL,
    Frame,
    MassFunction,
    PignisticDistribution,
    decide_argmax,
    mean_mass,
    pignistic,
)
from errors import ArityError, EmptyGroupError, MissingReferenceError, RangeError
from monitor import PROFILE_NAMES, Contribution, ContributorProfile, confidence_mass

logger = logging.getLogger(__name__)

GROUPINGS = ("all", "precision", "reflection", "profile")
ContributorFilter = Callable[[str], bool]


def default_lambda_grid() -> Tuple[float, ...]:
    """0.0, 0.1, ..., 1.0"""
    return tuple(i / 10 for i in range(11))


@dataclass(frozen=True)
class GoldRecord:
    """
    Reference data for one question

    true_answer is None for rows that only supply the reference time.
    """

    question_id: str
    true_answer: Optional[int]
    t0_seconds: float


@dataclass(frozen=True)
class QuestionAggregate:
    question_id: str
    m_precise: MassFunction
    m_imprecise: MassFunction
    counts: Tuple[int, int]


@dataclass(frozen=True)
class ErrorCurve:
    lambda_grid: Tuple[float, ...]
    error_rates: Tuple[float, ...]
    group_label: str
    mv_error: float


@dataclass(frozen=True)
class AnswerDecision:
    """Aggregated answer for one question at a given lambda"""

    question_id: str
    mass: MassFunction
    betp: PignisticDistribution
    decision: FrozenSet[int]
    mv_decision: FrozenSet[int]


def split_and_average(contribs: Sequence[Contribution], frame: Frame) -> QuestionAggregate:
    """
    Average precise and imprecise confidence masses of one question separately

    An empty side is the vacuous mass with count 0.
    """
    if not contribs:
        raise ArityError("split_and_average needs at least one contribution")
    precise = [confidence_mass(c, frame) for c in contribs if c.is_precise]
    imprecise = [confidence_mass(c, frame) for c in contribs if not c.is_precise]
    return QuestionAggregate(
        question_id=contribs[0].question_id,
        m_precise=mean_mass(precise) if precise else MassFunction.vacuous(frame),
        m_imprecise=mean_mass(imprecise) if imprecise else MassFunction.vacuous(frame),
        counts=(len(precise), len(imprecise)),
    )


def lambda_aggregate(agg: QuestionAggregate, lam: float) -> MassFunction:
    """m_lambda = lambda * m_precise + (1 - lambda) * m_imprecise"""
    if not 0.0 <= lam <= 1.0:
        raise RangeError(f"lambda must be in [0, 1], got {lam}")
    combined: Dict[int, float] = {}
    for focal, value in agg.m_precise.masses.items():
        combined[focal] = lam * value
    for focal, value in agg.m_imprecise.masses.items():
        combined[focal] = combined.get(focal, 0.0) + (1.0 - lam) * value
    return MassFunction.build(agg.m_precise.frame, combined)


def decide_answer(m: MassFunction, tol: float = DEFAULT_TOL) -> FrozenSet[int]:
    """Answer indices with maximal pignistic probability"""
    return decide_argmax(pignistic(m), tol)


def majority_vote(
    contribs: Sequence[Contribution], frame: Frame, tol: float = DEFAULT_TOL
) -> FrozenSet[int]:
    """
    Majority vote with imprecise answers split evenly over their elements

    Each contribution carries a total vote weight of 1.
    """
    if not contribs:
        raise ArityError("majority_vote needs at least one contribution")
    votes = [0.0] * frame.size
    for contrib in contribs:
        chosen = [i for i in range(frame.size) if contrib.answer >> i & 1]
        for i in chosen:
            votes[i] += 1.0 / len(chosen)
    best = max(votes)
    return frozenset(i for i, v in enumerate(votes) if v >= best - tol)


def _scored(gold: Iterable[GoldRecord]) -> List[GoldRecord]:
    return [g for g in gold if g.true_answer is not None]


def error_rate(decisions: Mapping[str, FrozenSet[int]], gold: Sequence[GoldRecord]) -> float:
    """
    Fraction of gold questions not decided as exactly the true answer

    Ties count as errors. Records without a true answer are ignored.
    """
    scored = _scored(gold)
    if not scored:
        raise ArityError("No gold question with a known answer")
    wrong = 0
    for record in scored:
        if record.question_id not in decisions:
            raise MissingReferenceError(
                f"No decision for gold question '{record.question_id}'",
                reference=record.question_id,
            )
        if decisions[record.question_id] != frozenset([record.true_answer]):
            wrong += 1
    return wrong / len(scored)


def _check_grid(grid: Sequence[float]) -> Tuple[float, ...]:
    grid = tuple(grid)
    if not grid:
        raise ArityError("lambda grid is empty")
    for lam in grid:
        if not 0.0 <= lam <= 1.0:
            raise RangeError(f"lambda grid values must be in [0, 1], got {lam}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise RangeError(f"lambda grid must be strictly increasing: {grid}")
    return grid


def by_question(contributions: Iterable[Contribution]) -> Dict[str, List[Contribution]]:
    grouped: Dict[str, List[Contribution]] = defaultdict(list)
    for contrib in contributions:
        grouped[contrib.question_id].append(contrib)
    for qid in grouped:
        grouped[qid].sort(key=lambda c: c.contributor_id)
    return dict(grouped)


def lambda_sweep(
    contribs: Sequence[Contribution],
    gold: Sequence[GoldRecord],
    grid: Sequence[float],
    frame: Frame,
    group_filter: Optional[ContributorFilter] = None,
    group_label: str = "All",
    tol: float = DEFAULT_TOL,
) -> ErrorCurve:
    """
    Error rate on gold questions for every lambda of the grid

    Only contributions of contributors accepted by group_filter are
    aggregated; the majority-vote error is computed on the same
    population. A gold question nobody in the group answered is decided
    as a full tie.
    """
    grid = _check_grid(grid)
    selected = [c for c in contribs if group_filter is None or group_filter(c.contributor_id)]
    if not selected:
        raise EmptyGroupError(group_label)
    scored = _scored(gold)
    questions = by_question(selected)
    full_tie = frozenset(range(frame.size))

    aggregates = {
        g.question_id: split_and_average(questions[g.question_id], frame)
        for g in scored if g.question_id in questions
    }
    mv_decisions = {
        g.question_id: majority_vote(questions[g.question_id], frame, tol)
        if g.question_id in questions else full_tie
        for g in scored
    }

    rates = []
    for lam in grid:
        decisions = {
            g.question_id: decide_answer(lambda_aggregate(aggregates[g.question_id], lam), tol)
            if g.question_id in aggregates else full_tie
            for g in scored
        }
        rates.append(error_rate(decisions, scored))

    curve = ErrorCurve(grid, tuple(rates), group_label, error_rate(mv_decisions, scored))
    logger.info(
        f"Group {group_label}: {len({c.contributor_id for c in selected})} contributors, "
        f"MV error {curve.mv_error:.3f}, best lambda error {min(rates):.3f}"
    )
    return curve


def group_filters(
    profiles: Sequence[ContributorProfile], grouping: str
) -> List[Tuple[str, Optional[ContributorFilter]]]:
    """
    Contributor groups for a grouping

    A contributor is in a group when the group label belongs to its
    decision set, so tied contributors sit in every tied group.
    """
    if grouping not in GROUPINGS:
        raise ValueError(f"Unknown grouping '{grouping}', expected one of {GROUPINGS}")
    if grouping == "all":
        return [("All", None)]

    if grouping == "precision":
        labels, decisions = ("P", "NP"), {p.contributor_id: p.precision for p in profiles}
    elif grouping == "reflection":
        labels, decisions = ("R", "NR"), {p.contributor_id: p.reflective for p in profiles}
    else:
        labels, decisions = PROFILE_NAMES, {p.contributor_id: p.decision for p in profiles}

    def member_of(label: str) -> ContributorFilter:
        return lambda cid: label in decisions.get(cid, frozenset())

    return [(label, member_of(label)) for label in labels]


def evaluate_groups(
    contribs: Sequence[Contribution],
    gold: Sequence[GoldRecord],
    profiles: Sequence[ContributorProfile],
    grouping: str,
    grid: Sequence[float],
    frame: Frame,
    tol: float = DEFAULT_TOL,
) -> List[Tuple[str, Optional[ErrorCurve]]]:
    """Error curves per group; an empty group yields None instead of an error"""
    results: List[Tuple[str, Optional[ErrorCurve]]] = []
    for label, predicate in group_filters(profiles, grouping):
        try:
            curve = lambda_sweep(contribs, gold, grid, frame, predicate, label, tol)
        except EmptyGroupError:
            logger.warning(f"Group '{label}' is empty, no curve computed")
            curve = None
        results.append((label, curve))
    return results


def aggregate_campaign(
    contribs: Sequence[Contribution],
    frame: Frame,
    lam: float,
    tol: float = DEFAULT_TOL,
) -> List[AnswerDecision]:
    """Aggregate every question at one lambda, sorted by question id"""
    if not 0.0 <= lam <= 1.0:
        raise RangeError(f"lambda must be in [0, 1], got {lam}")
    rows = []
    for qid, question_contribs in sorted(by_question(contribs).items()):
        m = lambda_aggregate(split_and_average(question_contribs, frame), lam)
        betp = pignistic(m)
        rows.append(AnswerDecision(
            question_id=qid,
            mass=m,
            betp=betp,
            decision=decide_argmax(betp, tol),
            mv_decision=majority_vote(question_contribs, frame, tol),
        ))
    logger.info(f"Aggregated {len(rows)} questions at lambda={lam}")
    return rows
