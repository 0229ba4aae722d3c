"""Tests for the belief function core."""

import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from belief import (
    EMPTY,
    Frame,
    MassFunction,
    PignisticDistribution,
    combine_conjunctive,
    combine_yager,
    decide_argmax,
    discount,
    make_simple_support,
    mean_mass,
    pignistic,
    vacuous_extend,
)
from errors import (
    ArityError,
    CapacityError,
    FrameMismatchError,
    InvalidFocalSetError,
    InvalidMassError,
    RangeError,
    UndefinedTransformError,
)

AB = Frame(("a", "b"))
ABC = Frame(("a", "b", "c"))


def frame_of(n):
    return Frame(tuple(f"w{i}" for i in range(n)))


@st.composite
def mass_functions(draw, frame=None, min_size=2, max_size=4):
    if frame is None:
        frame = frame_of(draw(st.integers(min_value=min_size, max_value=max_size)))
    focal = draw(st.lists(st.integers(min_value=1, max_value=frame.full),
                          min_size=1, max_size=6, unique=True))
    weights = draw(st.lists(st.floats(min_value=0.01, max_value=1.0),
                            min_size=len(focal), max_size=len(focal)))
    total = math.fsum(weights)
    return MassFunction.build(frame, {f: w / total for f, w in zip(focal, weights)})


@st.composite
def mass_pairs(draw):
    frame = frame_of(draw(st.integers(min_value=2, max_value=4)))
    return draw(mass_functions(frame=frame)), draw(mass_functions(frame=frame))


def brute_force_yager(ms):
    frame = ms[0].frame
    out = {}
    for combo in itertools.product(*(m.masses.items() for m in ms)):
        z = frame.full
        value = 1.0
        for focal, mass in combo:
            z &= focal
            value *= mass
        out[z] = out.get(z, 0.0) + value
    conflict = out.pop(EMPTY, 0.0)
    out[frame.full] = out.get(frame.full, 0.0) + conflict
    return out


def max_deviation(a, b):
    keys = set(a) | set(b)
    return max(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


# Frames and mass functions

def test_frame_rejects_duplicates_and_empty_labels():
    with pytest.raises(ValueError):
        Frame(("a", "a"))
    with pytest.raises(ValueError):
        Frame(("a", ""))


def test_frame_capacity():
    with pytest.raises(CapacityError):
        frame_of(21)
    assert frame_of(20).full == (1 << 20) - 1


def test_product_frame_order():
    omega4 = Frame.product(Frame(("P", "NP")), Frame(("R", "NR")))
    assert omega4.labels == ("(P,R)", "(P,NR)", "(NP,R)", "(NP,NR)")


def test_mass_function_must_sum_to_one():
    with pytest.raises(InvalidMassError):
        MassFunction(AB, {0b01: 0.5, 0b11: 0.4})


def test_mass_function_rejects_foreign_focal_set():
    with pytest.raises(InvalidFocalSetError):
        MassFunction(AB, {0b100: 1.0})


def test_build_prunes_tiny_masses():
    m = MassFunction.build(AB, {0b01: 1e-13, 0b11: 1.0 - 1e-13})
    assert m.focal_sets() == [0b11]
    assert m.mass(0b11) == pytest.approx(1.0, abs=1e-15)


# Simple support

def test_simple_support_confidence_scale():
    frame = frame_of(5)
    m = make_simple_support(frame, frame.singleton(2), 0.75)
    assert m.as_dict() == {0b00100: 0.75, frame.full: 0.25}


def test_simple_support_zero_weight_is_vacuous():
    m = make_simple_support(ABC, 0b001, 0.0)
    assert m.is_vacuous


def test_simple_support_pair():
    m = make_simple_support(ABC, ABC.subset(["a", "b"]), 0.5)
    assert m.as_dict() == {0b011: 0.5, 0b111: 0.5}


@pytest.mark.parametrize("focal", [EMPTY, 0b111])
def test_simple_support_rejects_empty_and_full(focal):
    with pytest.raises(InvalidFocalSetError):
        make_simple_support(ABC, focal, 0.5)


def test_simple_support_near_categorical():
    eps = 1e-9
    m = make_simple_support(ABC, 0b001, 1 - eps)
    assert m.mass(0b001) == 1 - eps
    assert m.mass(0b111) == pytest.approx(eps, rel=1e-6)


# Discounting

def test_discount_identity():
    m = MassFunction(AB, {0b01: 0.3, 0b11: 0.7})
    assert discount(m, 1.0) == m


def test_discount_zero_is_vacuous():
    m = MassFunction(AB, {0b01: 0.3, 0b10: 0.7})
    assert discount(m, 0.0).as_dict() == {0b11: 1.0}


def test_discount_example():
    m = MassFunction(AB, {0b01: 0.5, 0b11: 0.5})
    d = discount(m, 0.8)
    assert d.mass(0b01) == pytest.approx(0.4)
    assert d.mass(0b11) == pytest.approx(0.6)


@pytest.mark.parametrize("alpha", [-0.1, 1.1])
def test_discount_range(alpha):
    with pytest.raises(RangeError):
        discount(MassFunction.vacuous(AB), alpha)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
def test_discount_rejects_conflict(alpha):
    m = MassFunction(AB, {EMPTY: 0.2, 0b01: 0.8})
    with pytest.raises(InvalidMassError):
        discount(m, alpha)


@given(mass_functions(), st.floats(min_value=0.01, max_value=0.99))
def test_discount_is_linear_off_frame(m, alpha):
    d = discount(m, alpha)
    for focal, value in m.masses.items():
        if focal != m.frame.full:
            assert d.mass(focal) == pytest.approx(alpha * value, abs=1e-12)


# Combination

def test_conjunctive_single_input_unchanged():
    m = MassFunction(AB, {0b01: 0.6, 0b11: 0.4})
    assert combine_conjunctive([m]) == m


def test_conjunctive_total_conflict():
    m = combine_conjunctive([MassFunction(AB, {0b01: 1.0}), MassFunction(AB, {0b10: 1.0})])
    assert m.as_dict() == {EMPTY: 1.0}
    assert not m.is_normalized


def test_conjunctive_example():
    m = combine_conjunctive([
        MassFunction(AB, {0b01: 0.6, 0b11: 0.4}),
        MassFunction(AB, {0b01: 0.5, 0b11: 0.5}),
    ])
    assert m.mass(0b01) == pytest.approx(0.8)
    assert m.mass(0b11) == pytest.approx(0.2)


def test_conjunctive_errors():
    with pytest.raises(ArityError):
        combine_conjunctive([])
    with pytest.raises(FrameMismatchError):
        combine_conjunctive([MassFunction.vacuous(AB), MassFunction.vacuous(ABC)])


def test_yager_total_conflict_goes_to_frame():
    m = combine_yager([MassFunction(AB, {0b01: 1.0}), MassFunction(AB, {0b10: 1.0})])
    assert m.as_dict() == {0b11: 1.0}


def test_yager_vacuous_is_neutral():
    m = MassFunction(ABC, {0b001: 0.2, 0b011: 0.5, 0b111: 0.3})
    assert combine_yager([m, MassFunction.vacuous(ABC)]).as_dict() == pytest.approx(m.as_dict())


def test_yager_example():
    m = combine_yager([
        MassFunction(AB, {0b01: 0.7, 0b11: 0.3}),
        MassFunction(AB, {0b10: 0.6, 0b11: 0.4}),
    ])
    assert m.is_normalized
    assert m.mass(0b01) == pytest.approx(0.28)
    assert m.mass(0b10) == pytest.approx(0.18)
    assert m.mass(0b11) == pytest.approx(0.54)


def test_yager_applied_once_on_global_conflict():
    ms = [
        MassFunction(ABC, {0b001: 0.5, 0b111: 0.5}),
        MassFunction(ABC, {0b010: 0.5, 0b111: 0.5}),
        MassFunction(ABC, {0b100: 0.5, 0b111: 0.5}),
    ]
    expected = brute_force_yager(ms)
    assert max_deviation(combine_yager(ms).as_dict(), expected) <= 1e-12


@settings(max_examples=1000, deadline=None)
@given(mass_pairs())
def test_yager_matches_brute_force_enumeration(pair):
    m1, m2 = pair
    assert max_deviation(combine_yager([m1, m2]).as_dict(), brute_force_yager([m1, m2])) <= 1e-12


@settings(max_examples=300, deadline=None)
@given(mass_pairs())
def test_yager_is_conjunctive_with_conflict_on_frame(pair):
    conj = combine_conjunctive(list(pair)).as_dict()
    conflict = conj.pop(EMPTY, None)
    if conflict is not None:
        full = pair[0].frame.full
        conj[full] = conj.get(full, 0.0) + conflict
    assert combine_yager(list(pair)).as_dict() == conj


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_conjunctive_is_order_independent(data):
    frame = frame_of(data.draw(st.integers(min_value=2, max_value=4)))
    ms = [data.draw(mass_functions(frame=frame)) for _ in range(3)]
    reference = combine_conjunctive(ms).as_dict()
    for perm in itertools.permutations(ms):
        assert max_deviation(combine_conjunctive(list(perm)).as_dict(), reference) <= 1e-12


# Vacuous extension

def test_vacuous_extension_left():
    omega2, omega3 = Frame(("P", "NP")), Frame(("R", "NR"))
    m = MassFunction(omega2, {0b01: 0.8, 0b11: 0.2})
    ext = vacuous_extend(m, omega3, "left")
    p_cylinder = ext.frame.subset(["(P,R)", "(P,NR)"])
    assert ext.as_dict() == {p_cylinder: 0.8, ext.frame.full: 0.2}


def test_vacuous_extension_right():
    omega2, omega3 = Frame(("P", "NP")), Frame(("R", "NR"))
    m = MassFunction(omega3, {0b10: 0.6, 0b11: 0.4})
    ext = vacuous_extend(m, omega2, "right")
    nr_cylinder = ext.frame.subset(["(P,NR)", "(NP,NR)"])
    assert ext.frame.labels == ("(P,R)", "(P,NR)", "(NP,R)", "(NP,NR)")
    assert ext.as_dict() == {nr_cylinder: 0.6, ext.frame.full: 0.4}


def test_vacuous_extension_of_vacuous():
    ext = vacuous_extend(MassFunction.vacuous(AB), ABC)
    assert ext.is_vacuous


@pytest.mark.parametrize("position", ["left", "right"])
def test_vacuous_extension_rejects_conflict(position):
    m = MassFunction(AB, {EMPTY: 0.5, 0b11: 0.5})
    with pytest.raises(InvalidMassError):
        vacuous_extend(m, ABC, position)


def test_vacuous_extension_capacity():
    with pytest.raises(CapacityError):
        vacuous_extend(MassFunction.vacuous(frame_of(5)), frame_of(5))


@settings(max_examples=200, deadline=None)
@given(mass_functions(min_size=1, max_size=4), st.integers(min_value=1, max_value=5),
       st.sampled_from(["left", "right"]))
def test_extension_preserves_pignistic_marginal(m, aux_size, position):
    n = m.frame.size
    aux = frame_of(aux_size) if aux_size > 1 else Frame(("only",))
    if n * aux.size > 20:
        return
    joint = pignistic(vacuous_extend(m, aux, position)).probs
    marginal = pignistic(m).probs
    for i in range(n):
        if position == "left":
            total = sum(joint[i * aux.size + j] for j in range(aux.size))
        else:
            total = sum(joint[j * n + i] for j in range(aux.size))
        assert total == pytest.approx(marginal[i], abs=1e-12)


# Pignistic transform and decision

def test_pignistic_vacuous_is_uniform():
    p = pignistic(MassFunction.vacuous(frame_of(5)))
    assert p.probs == pytest.approx((0.2,) * 5)


def test_pignistic_example():
    p = pignistic(MassFunction(AB, {0b01: 0.6, 0b11: 0.4}))
    assert p.probs == pytest.approx((0.8, 0.2))


def test_pignistic_renormalizes_conflict():
    p = pignistic(MassFunction(AB, {EMPTY: 0.2, 0b01: 0.8}))
    assert p.probs == pytest.approx((1.0, 0.0))


def test_pignistic_undefined_on_total_conflict():
    with pytest.raises(UndefinedTransformError):
        pignistic(MassFunction(AB, {EMPTY: 1.0}))


@settings(max_examples=1000, deadline=None)
@given(mass_functions())
def test_pignistic_sums_to_one(m):
    assert abs(math.fsum(pignistic(m).probs) - 1.0) <= 1e-12


def test_decide_argmax_unique():
    assert decide_argmax(PignisticDistribution(AB, (0.7, 0.3))) == {0}


def test_decide_argmax_uniform_tie():
    assert decide_argmax(PignisticDistribution(frame_of(4), (0.25,) * 4)) == {0, 1, 2, 3}


def test_decide_argmax_within_tolerance():
    p = PignisticDistribution(ABC, (0.5, 0.5 - 1e-12, 1e-12))
    assert decide_argmax(p, tol=1e-9) == {0, 1}


@given(st.lists(st.integers(min_value=1, max_value=50), min_size=2, max_size=6))
def test_decide_argmax_picks_every_maximum(weights):
    total = sum(weights)
    frame = frame_of(len(weights))
    p = PignisticDistribution(frame, tuple(w / total for w in weights))
    top = max(weights)
    assert decide_argmax(p, tol=0.0) == {i for i, w in enumerate(weights) if w == top}


# Mean

def test_mean_of_one_is_itself():
    m = MassFunction(AB, {0b01: 0.3, 0b11: 0.7})
    assert mean_mass([m]) == m


def test_mean_of_opposed_singletons():
    m = mean_mass([MassFunction(AB, {0b01: 1.0}), MassFunction(AB, {0b10: 1.0})])
    assert m.as_dict() == {0b01: 0.5, 0b10: 0.5}


def test_mean_example():
    m = mean_mass([MassFunction(AB, {0b01: 0.8, 0b11: 0.2}), MassFunction.vacuous(AB)])
    assert m.mass(0b01) == pytest.approx(0.4)
    assert m.mass(0b11) == pytest.approx(0.6)


def test_mean_needs_input():
    with pytest.raises(ArityError):
        mean_mass([])
