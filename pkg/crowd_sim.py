"""
Synthetic Crowd Generator
Seeded campaigns made of the four contributor archetypes, shaped like a
real campaign (HITs x questions), for testing profiling and aggregation
without proprietary data.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from aggregation import GoldRecord
from belief import Frame
from campaign_io import (
    CampaignConfig,
    CampaignData,
    write_contributions,
    write_csv,
    write_gold,
)
from errors import ArityError, ConfigParseError, ValidationError
from monitor import PROFILE_NAMES, Contribution

logger = logging.getLogger(__name__)

DEFAULT_ANSWER_LABELS = ("mauvais", "pauvre", "correct", "bon", "excellent")
DEFAULT_HITS = 4
DEFAULT_QUESTIONS_PER_HIT = 12
DEFAULT_GOLD_PER_HIT = 5
REFERENCE_TIME_RANGE = (10.0, 60.0)  # seconds, duration of the rated item


@dataclass(frozen=True)
class ArchetypeSpec:
    """
    Behaviour of one contributor archetype

    accuracy is the probability that the answer set contains the truth;
    imprecision_rate the probability of a 2-element answer.
    """

    profile: str
    count: int
    accuracy: float
    imprecision_rate: float
    time_ratio_range: Tuple[float, float]
    confidence_behavior: Dict[str, float] = field(default_factory=lambda: {"plutôt sûr": 1.0})

    def __post_init__(self):
        object.__setattr__(self, "time_ratio_range", tuple(self.time_ratio_range))
        object.__setattr__(self, "confidence_behavior", dict(self.confidence_behavior))
        if self.profile not in PROFILE_NAMES:
            raise ValidationError(f"Unknown profile '{self.profile}'", field="profile")
        if not isinstance(self.count, int) or self.count < 0:
            raise ValidationError(f"count must be a non-negative integer, got {self.count!r}",
                                  field="count")
        for name in ("accuracy", "imprecision_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {value}", field=name)
        lo, hi = self.time_ratio_range
        if not 0.0 < lo < hi:
            raise ValidationError(f"time_ratio_range needs 0 < lo < hi, got {(lo, hi)}",
                                  field="time_ratio_range")
        weights = list(self.confidence_behavior.values())
        if not weights or any(w < 0 for w in weights) or sum(weights) <= 0:
            raise ValidationError("confidence_behavior needs non-negative weights with a positive sum",
                                  field="confidence_behavior")


@dataclass(frozen=True)
class SyntheticCampaign:
    data: CampaignData
    truth: Dict[str, int]
    intended: Dict[str, str]


def default_archetypes(frame: Optional[Frame] = None, count: int = 10) -> List[ArchetypeSpec]:
    """
    Well-separated archetypes

    Spammers answer fast, at random, precisely and with high stated
    confidence; categorical contributors are slow, accurate and precise;
    fuzzy contributors are slow and often imprecise; experts are fast,
    accurate and imprecise when uncertain.
    """
    n = frame.size if frame else len(DEFAULT_ANSWER_LABELS)
    doubtful = {"moyennement sûr": 1.0}
    return [
        ArchetypeSpec("spammer", count, 1.0 / n, 0.0, (0.05, 0.3),
                      {"très sûr": 0.5, "plutôt sûr": 0.5}),
        ArchetypeSpec("categorical", count, 0.85, 0.0, (1.0, 3.0), {"plutôt sûr": 1.0}),
        ArchetypeSpec("fuzzy", count, 0.9, 0.6, (1.0, 3.0), doubtful),
        ArchetypeSpec("expert", count, 0.95, 0.3, (0.1, 0.5), doubtful),
    ]


def _draw_answer(rng: np.random.Generator, spec: ArchetypeSpec, truth: int, n: int) -> int:
    imprecise = n > 2 and rng.random() < spec.imprecision_rate
    hit = rng.random() < spec.accuracy
    others = [i for i in range(n) if i != truth]
    if imprecise:
        if hit:
            chosen = [truth, int(rng.choice(others))]
        else:
            chosen = [int(i) for i in rng.choice(others, size=2, replace=False)]
    else:
        chosen = [truth if hit else int(rng.choice(others))]
    mask = 0
    for i in chosen:
        mask |= 1 << i
    return mask


def generate(
    specs: Sequence[ArchetypeSpec],
    n_hits: int = DEFAULT_HITS,
    n_questions_per_hit: int = DEFAULT_QUESTIONS_PER_HIT,
    frame: Optional[Frame] = None,
    seed: int = 0,
    config: Optional[CampaignConfig] = None,
    gold_per_hit: Optional[int] = DEFAULT_GOLD_PER_HIT,
) -> SyntheticCampaign:
    """
    Generate a synthetic campaign

    Args:
        specs: Archetypes and their contributor counts
        n_hits: Number of HITs
        n_questions_per_hit: Questions in each HIT
        frame: Answer frame (defaults to the config's, then a 5-level quality scale)
        seed: Random seed; equal inputs give identical campaigns
        config: Campaign configuration supplying the confidence scale
        gold_per_hit: Questions per HIT whose true answer goes into the
            gold data (None for all); every question gets a reference time

    Returns:
        Campaign data, the truth of every question and the intended profiles
    """
    if sum(spec.count for spec in specs) == 0:
        raise ArityError("At least one archetype needs a positive count")
    if n_hits < 1 or n_questions_per_hit < 1:
        raise ArityError("A campaign needs at least one HIT and one question")
    if config is None:
        labels = frame.labels if frame else DEFAULT_ANSWER_LABELS
        config = CampaignConfig(answer_labels=labels)
    frame = frame or config.frame
    if frame.labels != config.answer_labels:
        raise ValidationError("frame and config answer labels differ", field="answer_labels")
    scale = config.confidence_scale
    for spec in specs:
        unknown = [label for label in spec.confidence_behavior if label not in scale]
        if unknown:
            raise ValidationError(f"Confidence labels {unknown} of '{spec.profile}' not in scale",
                                  field="confidence_behavior")

    rng = np.random.default_rng(seed)
    n = frame.size

    questions: List[Tuple[str, str]] = []
    truth: Dict[str, int] = {}
    gold: List[GoldRecord] = []
    for h in range(n_hits):
        hit_id = f"h{h + 1}"
        for k in range(n_questions_per_hit):
            qid = f"q{h * n_questions_per_hit + k + 1:03d}"
            questions.append((hit_id, qid))
            truth[qid] = int(rng.integers(n))
            t0 = round(float(rng.uniform(*REFERENCE_TIME_RANGE)), 3)
            known = gold_per_hit is None or k < gold_per_hit
            gold.append(GoldRecord(qid, truth[qid] if known else None, t0))
    t0_by_question = {g.question_id: g.t0_seconds for g in gold}

    contributions: List[Contribution] = []
    intended: Dict[str, str] = {}
    index = 0
    for spec in specs:
        labels = list(spec.confidence_behavior)
        weights = np.array([spec.confidence_behavior[label] for label in labels], dtype=float)
        weights /= weights.sum()
        lo, hi = spec.time_ratio_range
        for _ in range(spec.count):
            index += 1
            cid = f"c{index:03d}"
            intended[cid] = spec.profile
            for hit_id, qid in questions:
                answer = _draw_answer(rng, spec, truth[qid], n)
                label = labels[int(rng.choice(len(labels), p=weights))]
                ratio = float(rng.uniform(lo, hi))
                contributions.append(Contribution(
                    contributor_id=cid,
                    hit_id=hit_id,
                    question_id=qid,
                    answer=answer,
                    confidence_w=scale[label],
                    response_time_s=round(t0_by_question[qid] * ratio, 3),
                    confidence_label=label,
                ))

    logger.info(
        f"Generated {len(intended)} contributors x {len(questions)} questions (seed {seed})"
    )
    data = CampaignData(config, tuple(contributions), tuple(gold))
    return SyntheticCampaign(data, truth, intended)


def _count_field(raw: Dict[str, object], key: str, default: Optional[int], path: Path,
                  nullable: bool = False) -> Optional[int]:
    value = raw.get(key, default)
    if value is None and nullable:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        expected = "a non-negative integer or null" if nullable else "a non-negative integer"
        raise ValidationError(f"{key} must be {expected}, got {value!r}", field=key, path=str(path))
    return value


def load_archetype_spec(path, frame: Optional[Frame] = None) -> Dict[str, object]:
    """
    Read a JSON simulation spec

    Keys: archetypes (list of ArchetypeSpec fields; missing fields come
    from the default archetype of the same profile), and optionally
    n_hits, n_questions_per_hit, gold_per_hit, answer_labels.

    Args:
        path: JSON file
        frame: Answer frame already fixed by a campaign config; the spec's
            answer_labels must then match it

    Returns:
        Dict with specs, frame, n_hits, n_questions_per_hit and gold_per_hit
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigParseError(e.msg, line=e.lineno, path=str(path)) from e
    if not isinstance(raw, dict):
        raise ValidationError("simulation spec must be a JSON object", path=str(path))

    if "answer_labels" in raw:
        labels = raw["answer_labels"]
        if not isinstance(labels, list) or not all(isinstance(label, str) for label in labels):
            raise ValidationError("answer_labels must be a list of strings",
                                  field="answer_labels", path=str(path))
        if frame is not None and tuple(labels) != frame.labels:
            raise ValidationError(
                f"answer_labels {labels} differ from the config's {list(frame.labels)}",
                field="answer_labels", path=str(path),
            )
        frame = Frame(tuple(labels))
    elif frame is None:
        frame = Frame(DEFAULT_ANSWER_LABELS)

    entries = raw.get("archetypes", [])
    if not isinstance(entries, list) or not all(isinstance(entry, dict) for entry in entries):
        raise ValidationError("archetypes must be a list of objects",
                              field="archetypes", path=str(path))

    defaults = {spec.profile: spec for spec in default_archetypes(frame)}
    specs = []
    for entry in entries:
        profile = entry.get("profile")
        if not isinstance(profile, str) or profile not in defaults:
            raise ValidationError(f"Unknown profile '{profile}'", field="archetypes", path=str(path))
        base = defaults[profile]
        try:
            specs.append(ArchetypeSpec(
                profile=profile,
                count=entry.get("count", base.count),
                accuracy=entry.get("accuracy", base.accuracy),
                imprecision_rate=entry.get("imprecision_rate", base.imprecision_rate),
                time_ratio_range=tuple(entry.get("time_ratio_range", base.time_ratio_range)),
                confidence_behavior=entry.get("confidence_behavior", base.confidence_behavior),
            ))
        except (TypeError, ValueError) as e:
            if isinstance(e, ValidationError):
                raise
            raise ValidationError(f"Bad archetype '{profile}': {e}", field="archetypes",
                                  path=str(path)) from e
    return {
        "specs": specs or list(defaults.values()),
        "frame": frame,
        "n_hits": _count_field(raw, "n_hits", DEFAULT_HITS, path),
        "n_questions_per_hit": _count_field(raw, "n_questions_per_hit",
                                             DEFAULT_QUESTIONS_PER_HIT, path),
        "gold_per_hit": _count_field(raw, "gold_per_hit", DEFAULT_GOLD_PER_HIT, path,
                                      nullable=True),
    }


def write_synthetic_campaign(campaign: SyntheticCampaign, out_dir) -> List[Path]:
    """Write contributions.csv, gold.csv, truth.csv and intended_profiles.csv"""
    out_dir = Path(out_dir)
    config = campaign.data.config
    paths = [out_dir / name for name in
             ("contributions.csv", "gold.csv", "truth.csv", "intended_profiles.csv")]
    write_contributions(campaign.data.contributions, paths[0], config)
    write_gold(campaign.data.gold, paths[1], config)
    write_csv(paths[2], ("question_id", "true_answer"), (
        [qid, config.answer_labels[answer]] for qid, answer in sorted(campaign.truth.items())
    ))
    write_csv(paths[3], ("contributor_id", "profile"), sorted(campaign.intended.items()))
    logger.info(f"Wrote synthetic campaign to {out_dir}")
    return paths
