import random

import pytest

from kappa_canon.rewrite import (
    CONTRACTION, EXPANSION, SHIFT_LEFT, SHIFT_RIGHT, DerivationTrace, RewriteStep, RuleError, apply_rule,
    find_applications, inverse_steps, invert_step, replay, verify_derivation,
)
from kappa_canon.semigroup import curated_family, enumerate_semigroups, satisfies
from kappa_canon.term import parse_term as P, render_term

from corpus import corpus

EX1 = P("((bbbbba((b)^wa)^(w+3)(b)^(w-5)))^(w-2)")
EX1_OUT = P("bbbbba((b)^wa)^(w-9)(b)^(w-5)")


def step(rule, direction, path, *params):
    return RewriteStep(rule, direction, tuple(path), tuple(params))


def golden_steps():
    """The golden derivation written out as single rule instances."""
    rot = [step("R4R", EXPANSION, (0, 6, 0))] * 5
    rot += [step("R5", SHIFT_RIGHT, (0, 6), 6), step("R4R", CONTRACTION, (0, 0))]
    mid = [step("R1", CONTRACTION, (0,)), step("R4R", EXPANSION, (0,)), step("R5", SHIFT_LEFT, (0,), 6)]
    tail = [step("R4R", CONTRACTION, (6, 0))] * 5
    return rot + mid + tail


def test_rule_examples():
    assert apply_rule(P("(a)^(w+3)a"), step("R4R", CONTRACTION, (0,))) == P("(a)^(w+4)")
    assert apply_rule(P("((a)^(w+3))^(w-2)"), step("R1", CONTRACTION, (0,))) == P("(a)^(w-6)")
    assert apply_rule(P("(ab)^(w+1)a"), step("R5", SHIFT_LEFT, (0,), 1)) == P("a(ba)^(w+1)")
    assert apply_rule(P("(abab)^(w+1)"), step("R2", CONTRACTION, (0,), 2)) == P("(ab)^(w+2)")
    assert apply_rule(P("(a)^w(a)^(w-1)"), step("R3", CONTRACTION, (0,))) == P("(a)^(w-1)")
    assert apply_rule(P("b(a)^w"), step("R4L", EXPANSION, (1,))) == P("ba(a)^(w-1)")


def test_mismatches_raise():
    with pytest.raises(RuleError):
        apply_rule(P("(a)^wb"), step("R4R", CONTRACTION, (0,)))
    with pytest.raises(RuleError):
        apply_rule(P("(ab)^w"), step("R2", CONTRACTION, (0,), 2))
    with pytest.raises(RuleError):
        apply_rule(P("(aa)^w"), step("R2", CONTRACTION, (0,), 1))
    with pytest.raises(RuleError):
        apply_rule(P("ab"), step("R1", CONTRACTION, (0,)))
    with pytest.raises(RuleError):
        apply_rule(P("(a)^(w+1)"), step("R4R", EXPANSION, (0,)), mode="A")


def test_step_validation():
    with pytest.raises(ValueError):
        RewriteStep("R9", CONTRACTION, (0,))
    with pytest.raises(ValueError):
        RewriteStep("R5", CONTRACTION, (0,), (1,))
    with pytest.raises(ValueError):
        RewriteStep("R1", CONTRACTION, ())


def test_find_applications():
    r3 = find_applications(P("(a)^w(a)^(w-1)"), "R3", CONTRACTION)
    assert [s.path for s in r3] == [(0,)]
    t = P("a(a)^wa")
    assert [s.path for s in find_applications(t, "R4L", CONTRACTION)] == [(1,)]
    assert [s.path for s in find_applications(t, "R4R", CONTRACTION)] == [(1,)]
    r2 = find_applications(P("(abab)^(w+1)"), "R2", CONTRACTION)
    assert [s.params for s in r2] == [(2,)]
    with pytest.raises(ValueError):
        find_applications(t, "R3", EXPANSION)


def test_golden_derivation():
    steps = golden_steps()
    assert len(steps) == 15
    terms = replay(EX1, steps)
    assert terms[7] == P("((bbbbba(b)^(w-5))^(w+4))^(w-2)")
    assert terms[8] == P("(bbbbba(b)^(w-5))^(w-8)")
    assert terms[10] == P("bbbbba((b)^(w-5)bbbbba)^(w-9)(b)^(w-5)")
    assert terms[-1] == EX1_OUT
    assert verify_derivation(DerivationTrace(EX1, tuple(steps), EX1_OUT))


def test_empty_and_corrupted_traces():
    assert verify_derivation(DerivationTrace(EX1, (), EX1))
    assert not verify_derivation(DerivationTrace(EX1, (), EX1_OUT))
    steps = golden_steps()
    bad = list(steps)
    bad[5] = step("R5", SHIFT_RIGHT, (0, 5), 6)
    res = verify_derivation(DerivationTrace(EX1, tuple(bad), EX1_OUT))
    assert not res.ok and res.failed_at == 5


def test_trace_text_round_trip():
    tr = DerivationTrace(EX1, tuple(golden_steps()), EX1_OUT)
    back = DerivationTrace.from_text(tr.to_text())
    assert back == tr
    tr_a = DerivationTrace(P("(a)^wa"), (step("R4R", CONTRACTION, (0,)),), P("(a)^w"), "A")
    assert DerivationTrace.from_text(tr_a.to_text()).mode == "A"


def test_inverse_is_identity():
    steps = golden_steps()
    back = inverse_steps(EX1, steps)
    assert replay(EX1_OUT, back)[-1] == EX1


def _all_steps(t, mode):
    out = []
    for rule in ("R1", "R2", "R3", "R4L", "R4R"):
        out += find_applications(t, rule, CONTRACTION, mode)
    out += find_applications(t, "R4L", EXPANSION, mode) + find_applications(t, "R4R", EXPANSION, mode)
    out += find_applications(t, "R5", SHIFT_LEFT, mode)
    return out


def test_rules_are_sound_and_invertible():
    rng = random.Random(7)
    sgs = list(enumerate_semigroups(2)) + curated_family()
    checked = 0
    for t in corpus(60, seed=99, max_rank=2, max_len=14):
        steps = _all_steps(t, "S")
        for s in rng.sample(steps, min(3, len(steps))):
            u = apply_rule(t, s)
            assert apply_rule(u, invert_step(t, s)) == t, (render_term(t), s)
            for S in sgs:
                assert satisfies(S, t, u), (render_term(t), s, S.label)
            checked += 1
    assert checked > 50
