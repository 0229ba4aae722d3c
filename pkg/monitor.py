"""
Contributor Monitoring Module
Estimates each contributor's profile from three evidence channels:
confidence (answers on the answer frame), imprecision (qualification,
precise P / imprecise NP) and reflection (response time, R / NR).
The profile lives on the product of the last two frames.
"""

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from belief import (
    DEFAULT_TOL,
    EMPTY,
    Frame,
    MassFunction,
    PignisticDistribution,
    cardinality,
    combine_yager,
    decide_argmax,
    make_simple_support,
    mean_mass,
    pignistic,
    vacuous_extend,
)
from errors import ArityError, MissingReferenceError, RangeError

logger = logging.getLogger(__name__)

OMEGA2 = Frame(("P", "NP"))
OMEGA3 = Frame(("R", "NR"))
OMEGA4 = Frame.product(OMEGA2, OMEGA3)

# Profile name -> (qualification, reflection) pair on the product frame
PROFILE_PAIRS: Dict[str, Tuple[str, str]] = {
    "categorical": ("P", "R"),
    "spammer": ("P", "NR"),
    "fuzzy": ("NP", "R"),
    "expert": ("NP", "NR"),
}
PROFILE_NAMES: Tuple[str, ...] = tuple(PROFILE_PAIRS)
PROFILE_INDEX: Dict[str, int] = {
    name: OMEGA4.index(f"({q},{r})") for name, (q, r) in PROFILE_PAIRS.items()
}
_NAME_BY_INDEX = {index: name for name, index in PROFILE_INDEX.items()}

DEFAULT_BETA = 0.8
DEFAULT_ETA = 0.8


@dataclass(frozen=True)
class Contribution:
    """One contributor's answer to one question"""

    contributor_id: str
    hit_id: str
    question_id: str
    answer: int  # focal set over the answer frame
    confidence_w: float
    response_time_s: float
    confidence_label: Optional[str] = None

    @property
    def is_precise(self) -> bool:
        return cardinality(self.answer) == 1


@dataclass(frozen=True)
class QualificationEvidence:
    ip_c: float
    mass_omega2: MassFunction


@dataclass(frozen=True)
class ReflectionEvidence:
    per_question: Tuple[MassFunction, ...]
    mass_omega3: MassFunction


@dataclass(frozen=True)
class ContributorProfile:
    """Everything the monitor knows about one contributor"""

    contributor_id: str
    qualification: QualificationEvidence
    reflection: ReflectionEvidence
    mass_omega4: MassFunction
    pignistic4: PignisticDistribution
    decision: FrozenSet[str]
    precision: FrozenSet[str] = field(default_factory=frozenset)
    reflective: FrozenSet[str] = field(default_factory=frozenset)

    @property
    def ip_c(self) -> float:
        return self.qualification.ip_c

    @property
    def decision_label(self) -> str:
        return decision_label(self.decision)

    @property
    def is_tie(self) -> bool:
        return len(self.decision) > 1


def decision_label(decision: Iterable[str]) -> str:
    """Stable text form of a decision set, e.g. 'categorical|spammer'"""
    chosen = set(decision)
    ordered = [name for name in PROFILE_NAMES if name in chosen]
    ordered += sorted(chosen - set(ordered))
    return "|".join(ordered)


def confidence_mass(contrib: Contribution, frame: Frame) -> MassFunction:
    """Simple support mass X^w for the contribution's answer"""
    return make_simple_support(frame, contrib.answer, contrib.confidence_w)


def imprecision_degree(contribs: Sequence[Contribution], frame: Frame) -> float:
    """
    Degree of precision IP_c of one contributor

    Mean over questions of the normalized specificity
    sum_X m(X) * (|frame| - |X|) / (|frame| - 1) of the confidence masses.
    1 means confident singleton answers, 0 means total ignorance.
    """
    if not contribs:
        raise ArityError("imprecision_degree needs at least one contribution")
    if frame.size < 2:
        raise RangeError("imprecision_degree needs an answer frame with at least 2 elements")
    n = frame.size
    total = 0.0
    for contrib in contribs:
        m = confidence_mass(contrib, frame)
        total += sum(
            value * (n - cardinality(focal)) / (n - 1)
            for focal, value in m.masses.items()
            if focal != EMPTY
        )
    return total / len(contribs)


def qualification_mass(ip_c: float, beta: float) -> MassFunction:
    """
    Qualification mass on {P, NP}

    m(P) = beta * IP_c, m(NP) = beta * (1 - IP_c), m(frame) = 1 - beta
    """
    for name, value in (("ip_c", ip_c), ("beta", beta)):
        if not 0.0 <= value <= 1.0:
            raise RangeError(f"{name} must be in [0, 1], got {value}")
    return MassFunction.build(OMEGA2, {
        OMEGA2.subset(["P"]): beta * ip_c,
        OMEGA2.subset(["NP"]): beta * (1.0 - ip_c),
        OMEGA2.full: 1.0 - beta,
    })


def reflection_mass(t_cq: float, t_0q: float, eta: float) -> MassFunction:
    """
    Reflection mass on {R, NR} for one answer

    With r = t_cq / t_0q and s = r / (r + 1): m(R) = eta * s,
    m(NR) = eta * (1 - s), m(frame) = 1 - eta.
    """
    if not t_cq > 0 or not t_0q > 0:
        raise RangeError(f"Response and reference times must be positive, got {t_cq}, {t_0q}")
    if not 0.0 <= eta <= 1.0:
        raise RangeError(f"eta must be in [0, 1], got {eta}")
    s = t_cq / (t_cq + t_0q)
    return MassFunction.build(OMEGA3, {
        OMEGA3.subset(["R"]): eta * s,
        OMEGA3.subset(["NR"]): eta * (1.0 - s),
        OMEGA3.full: 1.0 - eta,
    })


def contributor_reflection(
    contribs: Sequence[Contribution],
    gold_times: Mapping[str, float],
    eta: float,
) -> ReflectionEvidence:
    """Per-question reflection masses and their mean"""
    if not contribs:
        raise ArityError("contributor_reflection needs at least one contribution")
    per_question = []
    for contrib in contribs:
        if contrib.question_id not in gold_times:
            raise MissingReferenceError(
                f"No reference time for question '{contrib.question_id}'",
                reference=contrib.question_id,
            )
        per_question.append(
            reflection_mass(contrib.response_time_s, gold_times[contrib.question_id], eta)
        )
    return ReflectionEvidence(tuple(per_question), mean_mass(per_question))


def profile_mass(q: QualificationEvidence, r: ReflectionEvidence) -> MassFunction:
    """Yager combination of both channels extended to the profile frame"""
    extended_q = vacuous_extend(q.mass_omega2, OMEGA3, "left")
    extended_r = vacuous_extend(r.mass_omega3, OMEGA2, "right")
    return combine_yager([extended_q, extended_r])


def classify_profile(m4: MassFunction, tol: float = DEFAULT_TOL) -> FrozenSet[str]:
    """Profile names with maximal pignistic probability (several on a tie)"""
    return frozenset(_NAME_BY_INDEX[i] for i in decide_argmax(pignistic(m4), tol))


def precision_decision(q: QualificationEvidence, tol: float = DEFAULT_TOL) -> FrozenSet[str]:
    """P, NP or both on a tie"""
    return frozenset(OMEGA2.labels[i] for i in decide_argmax(pignistic(q.mass_omega2), tol))


def reflection_decision(r: ReflectionEvidence, tol: float = DEFAULT_TOL) -> FrozenSet[str]:
    """R, NR or both on a tie"""
    return frozenset(OMEGA3.labels[i] for i in decide_argmax(pignistic(r.mass_omega3), tol))


class ContributorMonitor:
    """Profiles contributors of one campaign"""

    def __init__(
        self,
        frame: Frame,
        gold_times: Mapping[str, float],
        beta: float = DEFAULT_BETA,
        eta: float = DEFAULT_ETA,
        tol: float = DEFAULT_TOL,
    ):
        """
        Initialize the monitor

        Args:
            frame: Answer frame
            gold_times: Question id -> expected answering time in seconds
            beta: Discount of the qualification channel
            eta: Discount of the reflection channel
            tol: Tolerance of argmax decisions
        """
        self.frame = frame
        self.gold_times = dict(gold_times)
        self.beta = beta
        self.eta = eta
        self.tol = tol

    @classmethod
    def from_config(cls, config, gold_times: Mapping[str, float]) -> "ContributorMonitor":
        return cls(config.frame, gold_times, config.beta, config.eta, config.argmax_tol)

    def profile(self, contributor_id: str, contribs: Sequence[Contribution]) -> ContributorProfile:
        ip_c = imprecision_degree(contribs, self.frame)
        qualification = QualificationEvidence(ip_c, qualification_mass(ip_c, self.beta))
        reflection = contributor_reflection(contribs, self.gold_times, self.eta)
        m4 = profile_mass(qualification, reflection)
        profile = ContributorProfile(
            contributor_id=contributor_id,
            qualification=qualification,
            reflection=reflection,
            mass_omega4=m4,
            pignistic4=pignistic(m4),
            decision=classify_profile(m4, self.tol),
            precision=precision_decision(qualification, self.tol),
            reflective=reflection_decision(reflection, self.tol),
        )
        logger.debug(
            f"Contributor {contributor_id}: IP_c={ip_c:.4f} -> {profile.decision_label}"
        )
        return profile

    def profile_all(self, contributions: Iterable[Contribution]) -> List[ContributorProfile]:
        """Profile every contributor, sorted by contributor id"""
        grouped = group_by_contributor(contributions)
        profiles = [self.profile(cid, grouped[cid]) for cid in sorted(grouped)]
        logger.info(f"Profiled {len(profiles)} contributors")
        return profiles


def group_by_contributor(contributions: Iterable[Contribution]) -> Dict[str, List[Contribution]]:
    grouped: Dict[str, List[Contribution]] = defaultdict(list)
    for contrib in contributions:
        grouped[contrib.contributor_id].append(contrib)
    for cid in grouped:
        grouped[cid].sort(key=lambda c: c.question_id)
    return dict(grouped)


@dataclass(frozen=True)
class CrowdSummary:
    """Population statistics of a profiled campaign"""

    n_contributors: int
    n_contributions: int
    imprecise_share: float
    contributors_using_imprecision: int
    profile_shares: Dict[str, float]
    precision_shares: Dict[str, float]
    reflection_shares: Dict[str, float]

    def as_dict(self) -> Dict[str, object]:
        return {
            "n_contributors": self.n_contributors,
            "n_contributions": self.n_contributions,
            "imprecise_share": self.imprecise_share,
            "contributors_using_imprecision": self.contributors_using_imprecision,
            "profile_shares": dict(self.profile_shares),
            "precision_shares": dict(self.precision_shares),
            "reflection_shares": dict(self.reflection_shares),
        }


def _shares(labels: List[str]) -> Dict[str, float]:
    counts = Counter(labels)
    total = len(labels)
    return {label: counts[label] / total for label in sorted(counts)} if total else {}


def summarize_crowd(
    contributions: Sequence[Contribution],
    profiles: Sequence[ContributorProfile],
    frame: Frame,
) -> CrowdSummary:
    """
    Share of imprecise answers and of each decision in the crowd

    Ties appear under their own label (e.g. 'categorical|spammer', 'NR|R').
    """
    imprecise = [c for c in contributions if cardinality(c.answer) > 1]
    return CrowdSummary(
        n_contributors=len(profiles),
        n_contributions=len(contributions),
        imprecise_share=len(imprecise) / len(contributions) if contributions else 0.0,
        contributors_using_imprecision=len({c.contributor_id for c in imprecise}),
        profile_shares=_shares([p.decision_label for p in profiles]),
        precision_shares=_shares(["|".join(sorted(p.precision)) for p in profiles]),
        reflection_shares=_shares(["|".join(sorted(p.reflective)) for p in profiles]),
    )
