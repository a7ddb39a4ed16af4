"""Tag assignment and the term/nat codec."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from godelgen.bignat import unmingle_fold
from godelgen.codec import (
    DEFAULT_FUEL,
    assign_tags,
    build_plan,
    compare,
    decode,
    decode_closed,
    encode,
    encode_closed,
)
from godelgen.errors import (
    CodeOutOfRange,
    FuelExhausted,
    NoWellFoundedPlan,
    TermError,
)
from godelgen.sigmodel import S_CLASS, UNIT_CLASS, Z_CLASS, fin_class
from godelgen.termrep import (
    EMPTY_COUNTS,
    Con,
    TermArg,
    check_term,
    parse_term,
    print_term,
)


def enc(vsigs, plans, sig, type_name, index, text):
    term = parse_term(vsigs[sig], type_name, index, text)
    return encode_closed(plans[sig], type_name, index, term)


# ------------------------------------------------------------ tag choices


def test_tags_follow_declaration_order(plans):
    assert plans["lambda"].classes[("t", UNIT_CLASS)].tags == ("lam", "app")
    assert plans["termfam"].classes[("term", Z_CLASS)].tags == ("app", "rec")
    assert plans["termfam"].classes[("term", S_CLASS)].tags == ("lam", "app", "rec")
    assert plans["rat"].classes[("rat", UNIT_CLASS)].tags == ("whole", "frac")
    assert plans["nat"].classes[("nat", UNIT_CLASS)].tags == ("s",)
    assert plans["exists"].classes[("term", Z_CLASS)].tags == ("app", "rec", "exists")


def test_recursive_head_at_tag_zero_is_repaired(vsigs, plans):
    # frac first: decoding 0 would demand another 0-coded rat forever
    flip = build_plan(vsigs["ratflip"])
    assert flip.classes[("rat", UNIT_CLASS)].tags == ("frac", "whole")
    with pytest.raises(FuelExhausted):
        decode_closed(flip, "rat", None, 0, fuel=500)
    repaired = plans["ratflip"]
    assert repaired.classes[("rat", UNIT_CLASS)].tags == ("whole", "frac")
    t = decode_closed(repaired, "rat", None, 0)
    assert print_term(vsigs["ratflip"], t) == "whole z"


def test_flipped_plan_matches_straight_plan(vsigs, plans):
    # after repair both declarations code rationals identically
    for code in range(200):
        a = decode_closed(plans["rat"], "rat", None, code)
        b = decode_closed(plans["ratflip"], "rat", None, code)
        assert a == b


def test_build_plan_rejects_non_permutation(vsigs):
    with pytest.raises(ValueError, match="permutation"):
        build_plan(vsigs["lambda"], {("t", UNIT_CLASS): ("lam", "lam")})


def test_no_plan_when_trials_cannot_pass(vsigs):
    with pytest.raises(NoWellFoundedPlan) as e:
        assign_tags(vsigs["lambda"], trial_fuel=0)
    assert e.value.failed_classes == ["t"]


# --------------------------------------------------------- encode anchors


def test_encode_lambda(vsigs, plans):
    assert enc(vsigs, plans, "lambda", "t", None, "lam [x] x") == 0
    assert enc(vsigs, plans, "lambda", "t", None, "app (lam [x] x) (lam [x] x)") == 1


def test_level_shift(vsigs, plans):
    # a variable's code does not change under enclosing binders
    assert enc(vsigs, plans, "lambda", "t", None, "lam [x] lam [y] x") == 2
    assert enc(vsigs, plans, "lambda", "t", None, "lam [x] lam [y] y") == 6


def test_encode_natlist(vsigs, plans):
    assert enc(vsigs, plans, "natlist", "natlist", None, "natlist/0") == 0
    assert enc(vsigs, plans, "natlist", "natlist", None, "natlist/+ z natlist/0") == 1


def test_encode_rat(vsigs, plans):
    assert enc(vsigs, plans, "rat", "rat", None, "whole 3") == 6
    assert enc(vsigs, plans, "rat", "rat", None, "whole 0") == 0
    assert enc(vsigs, plans, "rat", "rat", None, "frac 0 (whole 0)") == 1


def test_encode_indexed(vsigs, plans):
    assert enc(vsigs, plans, "termfam", "term", 0, "unit") == 0
    assert enc(vsigs, plans, "termfam", "term", 0, "rec [f] f") == 2
    assert enc(vsigs, plans, "exists", "term", 0, "exists z [x] x") == 3


def test_nat_code_is_identity(vsigs, plans):
    plan, vsig = plans["nat"], vsigs["nat"]
    term = Con("z", (), ())
    for n in range(1025):
        assert encode_closed(plan, "nat", None, term) == n
        assert decode_closed(plan, "nat", None, n) == term
        term = Con("s", (), (TermArg(0, term),))


def test_nat_identity_survives_declaration_order():
    from godelgen.sigmodel import parse_signature, validate

    v = validate(parse_signature("nat : type. s : nat -> nat. z : nat."))
    plan = assign_tags(v)
    term = Con("z", (), ())
    for n in range(100):
        assert encode_closed(plan, "nat", None, term) == n
        term = Con("s", (), (TermArg(0, term),))


def test_encode_rejects_ill_fitting_terms(vsigs, plans):
    unit = parse_term(vsigs["termfam"], "term", 0, "unit")
    with pytest.raises(TermError):
        encode_closed(plans["termfam"], "term", 1, unit)
    lam0 = parse_term(vsigs["lambda"], "t", None, "lam [x] x")
    with pytest.raises(TermError):
        encode_closed(plans["termfam"], "term", 0, lam0)


# --------------------------------------------------------- decode anchors


def test_decode_lambda_zero(vsigs, plans):
    t = decode_closed(plans["lambda"], "t", None, 0)
    assert print_term(vsigs["lambda"], t) == "lam [x0] x0"


def test_decode_indexed_one(vsigs, plans):
    t = decode_closed(plans["termfam"], "term", 0, 1)
    assert print_term(vsigs["termfam"], t, index=0) == "app (lam [x0] x0) unit"


def test_decode_finite_range(plans):
    decode_closed(plans["bool"], "bool", None, 0)
    decode_closed(plans["bool"], "bool", None, 1)
    with pytest.raises(CodeOutOfRange):
        decode_closed(plans["bool"], "bool", None, 2)
    with pytest.raises(CodeOutOfRange):
        decode_closed(plans["bool"], "bool", None, -1)
    with pytest.raises(CodeOutOfRange):
        decode_closed(plans["lambda"], "t", None, -5)


def test_decode_fuel_is_a_step_budget(vsigs, plans):
    with pytest.raises(FuelExhausted):
        decode_closed(plans["nat"], "nat", None, 50, fuel=10)
    decode_closed(plans["nat"], "nat", None, 50, fuel=51)


def test_empty_class_plans_without_trials():
    from godelgen.sigmodel import parse_signature, validate

    vsig = validate(parse_signature("e : type.\nd : type.\nmk : d.\n"))
    plan = assign_tags(vsig)  # must not trial-decode the empty class
    assert plan.class_plan("e", None).cardinality.is_empty
    with pytest.raises(CodeOutOfRange):
        decode_closed(plan, "e", None, 0)
    assert decode_closed(plan, "d", None, 0) == Con("mk", (), ())


# ------------------------------------------------------------ round trips


# chain-shaped classes decode in O(code), so their sweeps stay narrow
SWEEPS = [
    ("nat", "nat", [None], 500),
    ("natlist", "natlist", [None], 300),
    ("rat", "rat", [None], 300),
    ("lambda", "t", [None], 2000),
    ("termfam", "term", [0, 1, 2], 700),
    ("exists", "term", [0, 1, 2], 400),
    ("mixed", "tree", [None], 1000),
    ("mixed", "bool", [None], 2),
]


@pytest.mark.parametrize("sig,type_name,indices,hi", SWEEPS)
def test_decode_encode_identity(vsigs, plans, sig, type_name, indices, hi):
    vsig, plan = vsigs[sig], plans[sig]
    for index in indices:
        for code in range(hi):
            t = decode_closed(plan, type_name, index, code)
            check_term(vsig, type_name, index, EMPTY_COUNTS, t)
            assert encode_closed(plan, type_name, index, t) == code


@settings(max_examples=60, deadline=None)
@given(code=st.integers(min_value=0, max_value=10**6))
def test_identity_at_large_codes_lambda(vsigs, plans, code):
    t = decode_closed(plans["lambda"], "t", None, code)
    assert encode_closed(plans["lambda"], "t", None, t) == code


@settings(max_examples=60, deadline=None)
@given(code=st.integers(min_value=0, max_value=10**6), index=st.integers(0, 3))
def test_identity_at_large_codes_indexed(vsigs, plans, code, index):
    t = decode_closed(plans["termfam"], "term", index, code)
    assert encode_closed(plans["termfam"], "term", index, t) == code


def test_parse_encode_decode_print_loop(vsigs, plans):
    cases = [
        ("lambda", "t", None, "lam [x] lam [y] app x (app y x)"),
        ("termfam", "term", 1, "lam [x] rec [f] app (lam [y] f) x"),
        ("exists", "term", 0, "exists 2 [x] app (app x unit) unit"),
        ("natlist", "natlist", None, "natlist/+ 3 (natlist/+ 0 natlist/0)"),
        ("rat", "rat", None, "frac 2 (frac 1 (whole 4))"),
    ]
    for sig, type_name, index, text in cases:
        vsig, plan = vsigs[sig], plans[sig]
        t = parse_term(vsig, type_name, index, text)
        code = encode_closed(plan, type_name, index, t)
        assert decode_closed(plan, type_name, index, code) == t
        assert parse_term(
            vsig, type_name, index, print_term(vsig, t, index=index)
        ) == t


# ------------------------------------------------------------- open terms


def test_open_term_coherence(vsigs, plans):
    rng = random.Random(7)
    vsig, plan = vsigs["lambda"], plans["lambda"]
    for _ in range(150):
        counts = EMPTY_COUNTS
        for _ in range(rng.randrange(0, 5)):
            counts = counts.extend("t", None)
        code = rng.randrange(0, 5000)
        t = decode(plan, "t", None, counts, code)
        check_term(vsig, "t", None, counts, t)
        assert encode(plan, "t", None, counts, t) == code


def test_open_term_coherence_indexed(vsigs, plans):
    rng = random.Random(11)
    vsig, plan = vsigs["exists"], plans["exists"]
    for _ in range(150):
        counts = EMPTY_COUNTS
        for _ in range(rng.randrange(0, 4)):
            counts = counts.extend("term", rng.randrange(0, 3))
        index = rng.randrange(0, 3)
        code = rng.randrange(0, 2000)
        t = decode(plan, "term", index, counts, code)
        check_term(vsig, "term", index, counts, t)
        assert encode(plan, "term", index, counts, t) == code


def test_variables_take_the_first_codes(vsigs, plans):
    counts = EMPTY_COUNTS.extend("t", None).extend("t", None)
    for level in range(2):
        t = decode(plans["lambda"], "t", None, counts, level)
        assert t.level == level
    t = decode(plans["lambda"], "t", None, counts, 2)
    assert t == Con("lam", (), (TermArg(1, decode(plans["lambda"], "t", None,
                                                  counts.extend("t", None), 0)),))


# -------------------------------------------------------------- invariant


def test_payload_is_monotone(vsigs, plans):
    # binderless recursive slots always carry a smaller code
    for sig in ("nat", "natlist", "rat", "lambda", "termfam", "exists", "mixed"):
        vsig, plan = vsigs[sig], plans[sig]
        for (type_name, _cls), cp in plan.classes.items():
            if not cp.tags:
                continue
            f, i_count = cp.finite.total, len(cp.tags)
            for code in range(2, 300):
                q, tag = divmod(code - f, i_count) if code >= f else (None, None)
                if q is None:
                    continue
                ctor = vsig.sig.ctors[cp.tags[tag]]
                radices = []
                for arg in ctor.args:
                    card = vsig.cardinality(
                        arg.type_name, vsig.classes(arg.type_name)[0]
                    )
                    radices.append(0 if card.is_infinite else card.count)
                rem = q
                for radix in reversed(radices):
                    if radix:
                        rem //= radix
                n_slots = len(ctor.pi_args) + radices.count(0)
                values = unmingle_fold(rem, n_slots)
                slot = iter(values[len(ctor.pi_args):])
                for arg, radix in zip(ctor.args, radices):
                    if radix:
                        continue
                    value = next(slot)
                    if not arg.binders:
                        assert value < code, (sig, type_name, code, ctor.name)


# ---------------------------------------------------------------- compare


def test_compare(vsigs, plans):
    v, p = vsigs["lambda"], plans["lambda"]
    a = parse_term(v, "t", None, "lam [x] x")
    b = parse_term(v, "t", None, "lam [y] y")
    c = parse_term(v, "t", None, "app (lam [x] x) (lam [x] x)")
    assert compare(p, "t", None, a, b) == 0
    assert compare(p, "t", None, a, c) == -1
    assert compare(p, "t", None, c, a) == 1
    assert compare(p, "t", None, c, c) == 0


def test_compare_rejects_type_mismatch(vsigs, plans):
    unit = parse_term(vsigs["termfam"], "term", 0, "unit")
    lam1 = parse_term(vsigs["termfam"], "term", 1, "lam [x] x")
    with pytest.raises(TermError):
        compare(plans["termfam"], "term", 0, unit, lam1)


def test_default_fuel_value():
    assert DEFAULT_FUEL == 100_000
