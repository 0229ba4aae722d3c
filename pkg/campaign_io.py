"""
Campaign Storage
Loads and validates campaign configuration, contributions and gold data,
and serializes profiles, error curves and aggregated answers.
"""

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from aggregation import AnswerDecision, ErrorCurve, GoldRecord, default_lambda_grid
from belief import DEFAULT_TOL, Frame, MassFunction
from errors import ConfigParseError, RowError, ValidationError
from monitor import (
    DEFAULT_BETA,
    DEFAULT_ETA,
    OMEGA2,
    OMEGA3,
    PROFILE_INDEX,
    PROFILE_NAMES,
    Contribution,
    ContributorProfile,
    CrowdSummary,
)

logger = logging.getLogger(__name__)

DEFAULT_CONFIDENCE_SCALE: Dict[str, float] = {
    "très sûr": 0.99,
    "plutôt sûr": 0.75,
    "moyennement sûr": 0.5,
    "peu sûr": 0.25,
    "pas sûr": 0.01,
}

CONTRIBUTION_COLUMNS = (
    "contributor_id", "hit_id", "question_id", "answer", "confidence", "response_time_s",
)
GOLD_COLUMNS = ("question_id", "true_answer", "t0_seconds")
CURVE_COLUMNS = ("group", "lambda", "error_rate", "mv_error")
PROFILE_COLUMNS = (
    "contributor_id", "ip_c", "m2_P", "m2_NP", "m2_Omega", "m3_R", "m3_NR", "m3_Omega",
    "betp_categorical", "betp_spammer", "betp_fuzzy", "betp_expert",
    "precision", "reflection", "decision",
)
SET_SEPARATOR = ";"
_CONFIG_KEYS = ("answer_labels", "confidence_scale", "beta", "eta", "lambda_grid", "argmax_tol")


@dataclass(frozen=True)
class CampaignConfig:
    """Answer frame, confidence scale and model parameters of a campaign"""

    answer_labels: Tuple[str, ...]
    confidence_scale: Dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_CONFIDENCE_SCALE)
    )
    beta: float = DEFAULT_BETA
    eta: float = DEFAULT_ETA
    lambda_grid: Tuple[float, ...] = field(default_factory=default_lambda_grid)
    argmax_tol: float = DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "answer_labels", tuple(self.answer_labels))
        object.__setattr__(self, "confidence_scale", dict(self.confidence_scale))
        object.__setattr__(self, "lambda_grid", tuple(self.lambda_grid))
        self.validate()

    def validate(self):
        labels = self.answer_labels
        if not 2 <= len(labels) <= 20:
            raise ValidationError(
                f"answer_labels must hold between 2 and 20 labels, got {len(labels)}",
                field="answer_labels",
            )
        if any(not isinstance(label, str) or not label.strip() for label in labels):
            raise ValidationError("answer_labels must be non-empty strings", field="answer_labels")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"answer_labels contains duplicates: {list(labels)}",
                                  field="answer_labels")
        if any(SET_SEPARATOR in label for label in labels):
            raise ValidationError(f"answer_labels may not contain '{SET_SEPARATOR}'",
                                  field="answer_labels")

        values = list(self.confidence_scale.values())
        if not values:
            raise ValidationError("confidence_scale is empty", field="confidence_scale")
        for label, value in self.confidence_scale.items():
            if not _is_number(value) or not 0.0 < value < 1.0:
                raise ValidationError(
                    f"confidence_scale value for '{label}' must be in (0, 1), got {value!r}",
                    field="confidence_scale",
                )
        if any(b >= a for a, b in zip(values, values[1:])):
            raise ValidationError("confidence_scale values must be strictly decreasing",
                                  field="confidence_scale")

        for name in ("beta", "eta"):
            value = getattr(self, name)
            if not _is_number(value) or not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {value!r}", field=name)

        grid = self.lambda_grid
        if not grid or any(not _is_number(v) or not 0.0 <= v <= 1.0 for v in grid):
            raise ValidationError("lambda_grid must be a non-empty list of values in [0, 1]",
                                  field="lambda_grid")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValidationError("lambda_grid must be strictly increasing", field="lambda_grid")

        if not _is_number(self.argmax_tol) or self.argmax_tol < 0:
            raise ValidationError(f"argmax_tol must be >= 0, got {self.argmax_tol!r}",
                                  field="argmax_tol")

    @property
    def frame(self) -> Frame:
        return Frame(self.answer_labels)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "answer_labels": list(self.answer_labels),
            "confidence_scale": dict(self.confidence_scale),
            "beta": self.beta,
            "eta": self.eta,
            "lambda_grid": list(self.lambda_grid),
            "argmax_tol": self.argmax_tol,
        }


@dataclass(frozen=True)
class CampaignData:
    config: CampaignConfig
    contributions: Tuple[Contribution, ...]
    gold: Tuple[GoldRecord, ...]

    @property
    def gold_times(self) -> Dict[str, float]:
        return gold_times(self.gold)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def gold_times(gold: Iterable[GoldRecord]) -> Dict[str, float]:
    return {g.question_id: g.t0_seconds for g in gold}


def load_config(path) -> CampaignConfig:
    """
    Load a JSON campaign configuration

    Args:
        path: JSON file; only answer_labels is required

    Returns:
        Validated configuration with defaults applied
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParseError(e.msg, line=e.lineno, path=str(path)) from e
    if not isinstance(raw, dict):
        raise ConfigParseError("top level must be a JSON object", line=1, path=str(path))
    if "answer_labels" not in raw:
        raise ValidationError("answer_labels is required", field="answer_labels", path=str(path))

    unknown = sorted(set(raw) - set(_CONFIG_KEYS))
    if unknown:
        logger.warning(f"Ignoring unknown config keys in {path}: {unknown}")

    labels = raw["answer_labels"]
    if not isinstance(labels, list):
        raise ValidationError("answer_labels must be a list", field="answer_labels", path=str(path))
    scale = raw.get("confidence_scale", DEFAULT_CONFIDENCE_SCALE)
    if not isinstance(scale, dict):
        raise ValidationError("confidence_scale must be an object of label: weight",
                              field="confidence_scale", path=str(path))
    grid = raw.get("lambda_grid", default_lambda_grid())
    if not isinstance(grid, list) and not isinstance(grid, tuple):
        raise ValidationError("lambda_grid must be a list", field="lambda_grid", path=str(path))

    config = CampaignConfig(
        answer_labels=tuple(labels),
        confidence_scale=scale,
        beta=raw.get("beta", DEFAULT_BETA),
        eta=raw.get("eta", DEFAULT_ETA),
        lambda_grid=tuple(grid),
        argmax_tol=raw.get("argmax_tol", DEFAULT_TOL),
    )
    logger.info(f"Loaded config from {path}: {len(config.answer_labels)} answer labels")
    return config


def resolve_label(token: str, frame: Frame) -> int:
    """
    Element index for an answer token

    Exact label first, then a 1-based position code.
    """
    token = token.strip()
    if token in frame.labels:
        return frame.labels.index(token)
    if token.isdigit() and 1 <= int(token) <= frame.size:
        return int(token) - 1
    raise KeyError(token)


def _parse_answer(cell: str, frame: Frame) -> int:
    tokens = [t for t in cell.split(SET_SEPARATOR)]
    if not cell.strip() or any(not t.strip() for t in tokens):
        raise ValueError(f"empty answer token in '{cell}'")
    mask = 0
    for token in tokens:
        try:
            mask |= 1 << resolve_label(token, frame)
        except KeyError:
            raise ValueError(f"unknown answer label '{token.strip()}'") from None
    if mask == frame.full:
        raise ValueError("answer may not name every option")
    return mask


def _parse_confidence(cell: str, scale: Dict[str, float]) -> Tuple[float, Optional[str]]:
    cell = cell.strip()
    if not cell:
        raise ValueError("missing confidence")
    if cell in scale:
        return scale[cell], cell
    try:
        value = float(cell)
    except ValueError:
        raise ValueError(f"unknown confidence label '{cell}'") from None
    if not 0.0 < value < 1.0:
        raise ValueError(f"confidence value {cell} outside (0, 1)")
    return value, None


def _parse_positive(cell: str, name: str) -> float:
    try:
        value = float(cell)
    except (TypeError, ValueError):
        raise ValueError(f"{name} '{cell}' is not a number") from None
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be positive, got {cell}")
    return value


def _read_rows(path: Path, columns: Sequence[str]) -> List[Tuple[int, Dict[str, str]]]:
    with open(path, newline="", encoding="utf-8-sig") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        missing = [c for c in columns if c not in header]
        if missing:
            raise ValidationError(
                f"{path}: missing columns", [RowError(1, f"missing column(s) {missing}")],
                path=str(path),
            )
        rows = []
        for row in reader:
            if None in row:
                rows.append((reader.line_num, {"__extra__": "1"}))
                continue
            rows.append((reader.line_num, row))
        return rows


def load_contributions(path, config: CampaignConfig) -> List[Contribution]:
    """
    Load and validate a contributions CSV

    Every bad row is collected before a single ValidationError is raised.
    The result is sorted by (contributor_id, question_id).
    """
    path = Path(path)
    frame = config.frame
    errors: List[RowError] = []
    seen: Dict[Tuple[str, str], int] = {}
    contributions: List[Contribution] = []

    for line, row in _read_rows(path, CONTRIBUTION_COLUMNS):
        if "__extra__" in row:
            errors.append(RowError(line, "too many fields"))
            continue
        problems = []
        values = {c: (row.get(c) or "").strip() for c in CONTRIBUTION_COLUMNS}
        for column in ("contributor_id", "hit_id", "question_id"):
            if not values[column]:
                problems.append(f"missing {column}")
        answer = w = t = None
        label = None
        try:
            answer = _parse_answer(values["answer"], frame)
        except ValueError as e:
            problems.append(str(e))
        try:
            w, label = _parse_confidence(values["confidence"], config.confidence_scale)
        except ValueError as e:
            problems.append(str(e))
        try:
            t = _parse_positive(values["response_time_s"], "response_time_s")
        except ValueError as e:
            problems.append(str(e))

        key = (values["contributor_id"], values["question_id"])
        if all(key) and key in seen:
            problems.append(
                f"duplicate answer of '{key[0]}' to '{key[1]}' (first on row {seen[key]})"
            )
        elif all(key):
            seen[key] = line

        if problems:
            errors.extend(RowError(line, p) for p in problems)
            continue
        contributions.append(Contribution(
            contributor_id=values["contributor_id"],
            hit_id=values["hit_id"],
            question_id=values["question_id"],
            answer=answer,
            confidence_w=w,
            response_time_s=t,
            confidence_label=label,
        ))

    if errors:
        logger.error(f"{path}: {len(errors)} invalid row(s)")
        raise ValidationError(f"Invalid contributions file {path}", errors, path=str(path))
    contributions.sort(key=lambda c: (c.contributor_id, c.question_id))
    logger.info(f"Loaded {len(contributions)} contributions from {path}")
    return contributions


def load_gold(path, config: CampaignConfig) -> List[GoldRecord]:
    """
    Load and validate a gold CSV

    An empty true_answer cell gives a reference-time-only record.
    """
    path = Path(path)
    frame = config.frame
    errors: List[RowError] = []
    seen: Dict[str, int] = {}
    records: List[GoldRecord] = []

    for line, row in _read_rows(path, GOLD_COLUMNS):
        if "__extra__" in row:
            errors.append(RowError(line, "too many fields"))
            continue
        problems = []
        qid = (row.get("question_id") or "").strip()
        truth_cell = (row.get("true_answer") or "").strip()
        if not qid:
            problems.append("missing question_id")
        elif qid in seen:
            problems.append(f"duplicate question '{qid}' (first on row {seen[qid]})")
        else:
            seen[qid] = line
        truth = None
        if truth_cell:
            try:
                truth = resolve_label(truth_cell, frame)
            except KeyError:
                problems.append(f"unknown answer label '{truth_cell}'")
        t0 = None
        try:
            t0 = _parse_positive(row.get("t0_seconds") or "", "t0_seconds")
        except ValueError as e:
            problems.append(str(e))
        if problems:
            errors.extend(RowError(line, p) for p in problems)
            continue
        records.append(GoldRecord(qid, truth, t0))

    if errors:
        logger.error(f"{path}: {len(errors)} invalid row(s)")
        raise ValidationError(f"Invalid gold file {path}", errors, path=str(path))
    records.sort(key=lambda g: g.question_id)
    logger.info(
        f"Loaded {len(records)} gold records from {path} "
        f"({sum(g.true_answer is not None for g in records)} with a known answer)"
    )
    return records


# Serialization

def _mass_json(m: MassFunction) -> List[Dict[str, Any]]:
    return [{"set": labels, "mass": value} for labels, value in m.items_by_label()]


def profile_as_dict(profile: ContributorProfile) -> Dict[str, Any]:
    return {
        "contributor_id": profile.contributor_id,
        "ip_c": profile.ip_c,
        "mass_omega2": _mass_json(profile.qualification.mass_omega2),
        "mass_omega3": _mass_json(profile.reflection.mass_omega3),
        "mass_omega4": _mass_json(profile.mass_omega4),
        "betp_omega4": profile.pignistic4.by_label(),
        "decision": profile.decision_label,
        "precision": "|".join(sorted(profile.precision)),
        "reflection": "|".join(sorted(profile.reflective)),
    }


def curve_as_dict(label: str, curve: Optional[ErrorCurve]) -> Dict[str, Any]:
    if curve is None:
        return {"group": label, "curve": None}
    return {
        "group": label,
        "curve": {
            "lambda": list(curve.lambda_grid),
            "error_rate": list(curve.error_rates),
            "mv_error": curve.mv_error,
        },
    }


def _curve_pairs(curves: Sequence) -> List[Tuple[str, Optional[ErrorCurve]]]:
    pairs = []
    for item in curves:
        if isinstance(item, ErrorCurve):
            pairs.append((item.group_label, item))
        else:
            pairs.append((item[0], item[1]))
    return pairs


def _open_for_write(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as e:
        raise OSError(e.errno, f"Cannot write {path}: {e.strerror}") from e


def _write_json(path: Path, document: Dict[str, Any]):
    with _open_for_write(path) as f:
        json.dump(document, f, ensure_ascii=False, indent=2)
        f.write("\n")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]):
    with _open_for_write(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value: Any) -> str:
    return "" if value is None else repr(value) if isinstance(value, float) else str(value)


def write_results(
    profiles: Sequence[ContributorProfile],
    curves: Sequence,
    path,
    fmt: str = "json",
    config: Optional[CampaignConfig] = None,
    summary: Optional[CrowdSummary] = None,
):
    """
    Write profiles and error curves

    Args:
        profiles: Contributor profiles, written sorted by id
        curves: ErrorCurve objects or (group label, curve or None) pairs
        path: Output file
        fmt: "json" (one document with a config echo) or "csv"; in csv
            the profiles go to path and the curves to path when there are
            no profiles, otherwise to <stem>.curves.csv next to it
        config: Configuration echoed in JSON output
        summary: Crowd statistics added to JSON output
    """
    path = Path(path)
    ordered = sorted(profiles, key=lambda p: p.contributor_id)
    pairs = _curve_pairs(curves)

    if fmt == "json":
        document: Dict[str, Any] = {
            "config": config.as_dict() if config else None,
            "profiles": [profile_as_dict(p) for p in ordered],
            "curves": [curve_as_dict(label, curve) for label, curve in pairs],
        }
        if summary is not None:
            document["summary"] = summary.as_dict()
        _write_json(path, document)
    elif fmt == "csv":
        if ordered or not pairs:
            write_csv(path, PROFILE_COLUMNS, (_profile_row(p) for p in ordered))
        if pairs:
            curve_path = path if not ordered else path.with_suffix(".curves.csv")
            write_csv(curve_path, CURVE_COLUMNS, _curve_rows(pairs))
    else:
        raise ValueError(f"Unknown output format '{fmt}'")
    logger.info(f"Wrote {len(ordered)} profiles and {len(pairs)} curves to {path}")


def _profile_row(profile: ContributorProfile) -> List[str]:
    m2 = profile.qualification.mass_omega2
    m3 = profile.reflection.mass_omega3
    betp = profile.pignistic4.probs
    return [
        profile.contributor_id,
        _fmt(profile.ip_c),
        _fmt(m2.mass(OMEGA2.subset(["P"]))),
        _fmt(m2.mass(OMEGA2.subset(["NP"]))),
        _fmt(m2.mass(OMEGA2.full)),
        _fmt(m3.mass(OMEGA3.subset(["R"]))),
        _fmt(m3.mass(OMEGA3.subset(["NR"]))),
        _fmt(m3.mass(OMEGA3.full)),
        *(_fmt(betp[PROFILE_INDEX[name]]) for name in PROFILE_NAMES),
        "|".join(sorted(profile.precision)),
        "|".join(sorted(profile.reflective)),
        profile.decision_label,
    ]


def _curve_rows(pairs: Sequence[Tuple[str, Optional[ErrorCurve]]]):
    for label, curve in pairs:
        if curve is None:
            yield [label, "", "", ""]
            continue
        for lam, rate in zip(curve.lambda_grid, curve.error_rates):
            yield [label, _fmt(lam), _fmt(rate), _fmt(curve.mv_error)]


def write_aggregates(
    rows: Sequence[AnswerDecision],
    path,
    fmt: str = "json",
    lam: Optional[float] = None,
    config: Optional[CampaignConfig] = None,
):
    """Write per-question aggregated masses, pignistic probabilities and decisions"""
    path = Path(path)
    ordered = sorted(rows, key=lambda r: r.question_id)
    if fmt == "json":
        _write_json(path, {
            "config": config.as_dict() if config else None,
            "lambda": lam,
            "questions": [
                {
                    "question_id": r.question_id,
                    "mass": _mass_json(r.mass),
                    "betp": r.betp.by_label(),
                    "decision": r.mass.frame.labels_of(_mask(r.decision)),
                    "mv_decision": r.mass.frame.labels_of(_mask(r.mv_decision)),
                }
                for r in ordered
            ],
        })
    elif fmt == "csv":
        labels = ordered[0].mass.frame.labels if ordered else ()
        header = ["question_id", *(f"betp_{label}" for label in labels), "decision", "mv_decision"]
        write_csv(path, header, (
            [
                r.question_id,
                *(_fmt(p) for p in r.betp.probs),
                SET_SEPARATOR.join(r.mass.frame.labels_of(_mask(r.decision))),
                SET_SEPARATOR.join(r.mass.frame.labels_of(_mask(r.mv_decision))),
            ]
            for r in ordered
        ))
    else:
        raise ValueError(f"Unknown output format '{fmt}'")
    logger.info(f"Wrote {len(ordered)} aggregated questions to {path}")


def _mask(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def write_contributions(contributions: Sequence[Contribution], path, config: CampaignConfig):
    """Write contributions in the format load_contributions reads"""
    frame = config.frame
    ordered = sorted(contributions, key=lambda c: (c.contributor_id, c.question_id))
    write_csv(Path(path), CONTRIBUTION_COLUMNS, (
        [
            c.contributor_id,
            c.hit_id,
            c.question_id,
            SET_SEPARATOR.join(frame.labels_of(c.answer)),
            c.confidence_label if c.confidence_label else repr(c.confidence_w),
            repr(c.response_time_s),
        ]
        for c in ordered
    ))


def write_gold(gold: Sequence[GoldRecord], path, config: CampaignConfig):
    """Write gold records in the format load_gold reads"""
    frame = config.frame
    write_csv(Path(path), GOLD_COLUMNS, (
        [
            g.question_id,
            "" if g.true_answer is None else frame.labels[g.true_answer],
            repr(g.t0_seconds),
        ]
        for g in sorted(gold, key=lambda g: g.question_id)
    ))
