"""
Belief Function Core
Frames of discernment, mass functions and the operators used by the monitor:
simple support, discounting, conjunctive and Yager combination, vacuous
extension, pignistic transform and argmax decision.

Focal sets are int bit masks over frame indices (bit i set <=> element i
belongs to the set). Mass functions are immutable.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import reduce
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterable, List, Mapping, Sequence, Tuple

from errors import (
    ArityError,
    CapacityError,
    FrameMismatchError,
    InvalidFocalSetError,
    InvalidMassError,
    RangeError,
    UndefinedTransformError,
)

logger = logging.getLogger(__name__)

MAX_FRAME_SIZE = 20
PRUNE_THRESHOLD = 1e-12
SUM_TOLERANCE = 1e-9
DEFAULT_TOL = 1e-9

FocalSet = int
EMPTY: FocalSet = 0


def cardinality(focal: FocalSet) -> int:
    """Number of elements in a focal set"""
    return bin(focal).count("1")


def members(focal: FocalSet) -> List[int]:
    """Element indices of a focal set, ascending"""
    result = []
    index = 0
    while focal:
        if focal & 1:
            result.append(index)
        focal >>= 1
        index += 1
    return result


@dataclass(frozen=True)
class Frame:
    """
    Ordered frame of discernment

    Args:
        labels: Distinct, non-empty element names; index i is stable
    """

    labels: Tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if not 1 <= len(labels) <= MAX_FRAME_SIZE:
            raise CapacityError(
                f"Frame size must be between 1 and {MAX_FRAME_SIZE}, got {len(labels)}"
            )
        for label in labels:
            if not isinstance(label, str) or not label:
                raise ValueError(f"Frame labels must be non-empty strings, got {label!r}")
        if len(set(labels)) != len(labels):
            raise ValueError(f"Frame labels must be distinct: {labels}")

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def full(self) -> FocalSet:
        """Bit mask of the whole frame"""
        return (1 << self.size) - 1

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"Unknown label '{label}' in frame {self.labels}") from None

    def singleton(self, index: int) -> FocalSet:
        if not 0 <= index < self.size:
            raise IndexError(f"Element index {index} outside frame of size {self.size}")
        return 1 << index

    def subset(self, labels: Iterable[str]) -> FocalSet:
        """Focal set made of the named elements"""
        mask = EMPTY
        for label in labels:
            mask |= 1 << self.index(label)
        return mask

    def labels_of(self, focal: FocalSet) -> List[str]:
        return [self.labels[i] for i in members(focal)]

    def contains(self, focal: FocalSet) -> bool:
        """True when the bit mask fits inside this frame"""
        return focal >= 0 and focal & ~self.full == 0

    @staticmethod
    def product(left: "Frame", right: "Frame") -> "Frame":
        """
        Cartesian product frame left x right

        Element (i, j) gets index i * |right| + j and label "(a,b)".
        """
        size = left.size * right.size
        if size > MAX_FRAME_SIZE:
            raise CapacityError(
                f"Product frame would have {size} elements (max {MAX_FRAME_SIZE})"
            )
        return Frame(tuple(f"({a},{b})" for a in left.labels for b in right.labels))


def _clean(masses: Mapping[FocalSet, float]) -> Dict[FocalSet, float]:
    """Drop masses below the prune threshold, renormalizing by the kept total"""
    kept = {focal: value for focal, value in masses.items() if value >= PRUNE_THRESHOLD}
    pruned = math.fsum(value for value in masses.values() if value < PRUNE_THRESHOLD)
    if pruned != 0.0:
        total = math.fsum(kept.values())
        if total > 0:
            kept = {focal: value / total for focal, value in kept.items()}
    return kept


@dataclass(frozen=True)
class MassFunction:
    """
    Mass function on a finite frame

    Every stored mass is strictly positive and the masses sum to 1.
    Mass on the empty set (EMPTY) is only expected in conjunctive
    combination output.
    """

    frame: Frame
    masses: Mapping[FocalSet, float] = field(default_factory=dict)

    def __post_init__(self):
        masses = dict(self.masses)
        for focal, value in masses.items():
            if not isinstance(focal, int) or not self.frame.contains(focal):
                raise InvalidFocalSetError(
                    f"Focal set {focal!r} is not a subset of frame {self.frame.labels}"
                )
            if not (0.0 < value <= 1.0 + SUM_TOLERANCE) or math.isnan(value):
                raise InvalidMassError(f"Mass {value!r} on focal set {focal} is outside (0, 1]")
        total = math.fsum(masses.values())
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise InvalidMassError(f"Masses sum to {total}, expected 1")
        object.__setattr__(self, "masses", MappingProxyType(masses))

    @classmethod
    def build(cls, frame: Frame, masses: Mapping[FocalSet, float]) -> "MassFunction":
        """Create a mass function after pruning negligible masses"""
        return cls(frame, _clean(masses))

    @classmethod
    def vacuous(cls, frame: Frame) -> "MassFunction":
        """Total ignorance: all mass on the frame"""
        return cls(frame, {frame.full: 1.0})

    def mass(self, focal: FocalSet) -> float:
        return self.masses.get(focal, 0.0)

    @property
    def conflict(self) -> float:
        """Mass on the empty set"""
        return self.mass(EMPTY)

    @property
    def is_normalized(self) -> bool:
        return EMPTY not in self.masses

    @property
    def is_vacuous(self) -> bool:
        return self.mass(self.frame.full) == 1.0

    def focal_sets(self) -> List[FocalSet]:
        return sorted(self.masses)

    def as_dict(self) -> Dict[FocalSet, float]:
        return dict(self.masses)

    def items_by_label(self) -> List[Tuple[List[str], float]]:
        """Focal sets as label lists, in ascending bit-mask order"""
        return [(self.frame.labels_of(focal), self.masses[focal]) for focal in self.focal_sets()]


@dataclass(frozen=True)
class PignisticDistribution:
    """Probability over frame elements obtained from a mass function"""

    frame: Frame
    probs: Tuple[float, ...]

    def __post_init__(self):
        probs = tuple(self.probs)
        object.__setattr__(self, "probs", probs)
        if len(probs) != self.frame.size:
            raise ValueError(f"Expected {self.frame.size} probabilities, got {len(probs)}")
        if any(p < -SUM_TOLERANCE for p in probs):
            raise InvalidMassError(f"Negative probability in {probs}")
        if abs(math.fsum(probs) - 1.0) > SUM_TOLERANCE:
            raise InvalidMassError(f"Probabilities sum to {math.fsum(probs)}, expected 1")

    def by_label(self) -> Dict[str, float]:
        return dict(zip(self.frame.labels, self.probs))


def _check_unit(name: str, value: float):
    if not 0.0 <= value <= 1.0 or math.isnan(value):
        raise RangeError(f"{name} must be in [0, 1], got {value}")


def _check_normalized(m: MassFunction):
    if not m.is_normalized:
        raise InvalidMassError(f"Expected a normalized mass function, got m(empty) = {m.conflict}")


def _check_same_frame(ms: Sequence[MassFunction]) -> Frame:
    if not ms:
        raise ArityError("At least one mass function is required")
    frame = ms[0].frame
    for m in ms[1:]:
        if m.frame != frame:
            raise FrameMismatchError(
                f"Cannot combine mass functions on {frame.labels} and {m.frame.labels}"
            )
    return frame


def make_simple_support(frame: Frame, focal: FocalSet, w: float) -> MassFunction:
    """
    Simple support mass function X^w

    Args:
        frame: Frame of discernment
        focal: Supported set X, neither empty nor the whole frame
        w: Weight given to X, the rest goes to the frame

    Returns:
        m(X) = w, m(frame) = 1 - w
    """
    if not frame.contains(focal) or focal == EMPTY or focal == frame.full:
        raise InvalidFocalSetError(
            "Simple support needs a focal set that is neither empty nor the whole frame"
        )
    _check_unit("w", w)
    return MassFunction.build(frame, {focal: w, frame.full: 1.0 - w})


def discount(m: MassFunction, alpha: float) -> MassFunction:
    """
    Discount a source by reliability alpha

    Every mass off the frame is multiplied by alpha; the frame receives
    1 - alpha * (1 - m(frame)).
    """
    _check_unit("alpha", alpha)
    _check_normalized(m)
    if alpha == 1.0:
        return m
    if alpha == 0.0:
        return MassFunction.vacuous(m.frame)
    full = m.frame.full
    result = {focal: alpha * value for focal, value in m.masses.items() if focal != full}
    result[full] = 1.0 - alpha * (1.0 - m.mass(full))
    return MassFunction.build(m.frame, result)


def _conjunctive_pair(m1: Mapping[FocalSet, float], m2: Mapping[FocalSet, float]) -> Dict[FocalSet, float]:
    out: Dict[FocalSet, float] = {}
    for a, va in m1.items():
        for b, vb in m2.items():
            z = a & b
            out[z] = out.get(z, 0.0) + va * vb
    return out


def combine_conjunctive(ms: Sequence[MassFunction]) -> MassFunction:
    """
    Unnormalized conjunctive combination

    The result keeps the global conflict as mass on the empty set.
    """
    frame = _check_same_frame(ms)
    if len(ms) == 1:
        return ms[0]
    combined = reduce(_conjunctive_pair, (m.masses for m in ms[1:]), dict(ms[0].masses))
    return MassFunction.build(frame, combined)


def combine_yager(ms: Sequence[MassFunction]) -> MassFunction:
    """
    Yager combination: conjunctive combination with the conflict moved to the frame

    The reallocation happens once, after the full n-ary conjunctive
    combination.
    """
    conj = combine_conjunctive(ms)
    if conj.is_normalized:
        return conj
    full = conj.frame.full
    masses = conj.as_dict()
    conflict = masses.pop(EMPTY)
    masses[full] = masses.get(full, 0.0) + conflict
    return MassFunction.build(conj.frame, masses)


def vacuous_extend(m: MassFunction, aux: Frame, position: str = "left") -> MassFunction:
    """
    Vacuous extension onto a product frame

    Args:
        m: Mass function on the original frame
        aux: Frame added to the product
        position: "left" for m.frame x aux, "right" for aux x m.frame

    Returns:
        Mass function whose focal sets are the cylinders of m's focal sets
    """
    if position not in ("left", "right"):
        raise ValueError(f"position must be 'left' or 'right', got {position!r}")
    _check_normalized(m)
    base = m.frame
    if position == "left":
        product = Frame.product(base, aux)
    else:
        product = Frame.product(aux, base)

    def cylinder(focal: FocalSet) -> FocalSet:
        mask = EMPTY
        if position == "left":
            block = aux.full
            for i in members(focal):
                mask |= block << (i * aux.size)
        else:
            for j in range(aux.size):
                mask |= focal << (j * base.size)
        return mask

    return MassFunction(product, {cylinder(focal): value for focal, value in m.masses.items()})


def pignistic(m: MassFunction) -> PignisticDistribution:
    """
    Pignistic probability

    Each focal mass is split evenly over its elements, then renormalized
    by 1 - m(empty).
    """
    conflict = m.conflict
    if not any(focal != EMPTY for focal in m.masses):
        raise UndefinedTransformError("Pignistic transform undefined when m(empty) = 1")
    probs = [0.0] * m.frame.size
    for focal in m.focal_sets():
        if focal == EMPTY:
            continue
        share = m.masses[focal] / cardinality(focal)
        for i in members(focal):
            probs[i] += share
    scale = 1.0 - conflict
    if scale != 1.0:
        probs = [p / scale for p in probs]
    return PignisticDistribution(m.frame, tuple(probs))


def decide_argmax(p: PignisticDistribution, tol: float = DEFAULT_TOL) -> FrozenSet[int]:
    """All element indices within tol of the maximum probability"""
    if tol < 0:
        raise RangeError(f"tol must be >= 0, got {tol}")
    best = max(p.probs)
    return frozenset(i for i, value in enumerate(p.probs) if value >= best - tol)


def mean_mass(ms: Sequence[MassFunction]) -> MassFunction:
    """Pointwise arithmetic mean of mass functions"""
    frame = _check_same_frame(ms)
    totals: Dict[FocalSet, float] = {}
    for m in ms:
        for focal, value in m.masses.items():
            totals[focal] = totals.get(focal, 0.0) + value
    count = len(ms)
    return MassFunction.build(frame, {focal: value / count for focal, value in totals.items()})
