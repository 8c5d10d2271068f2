import importlib
import random

import pytest
from hypothesis import given, settings, strategies as st

from kappa_canon import canon, canonicalize, decide_equal, is_canonical, verify_derivation
from kappa_canon.term import Lim, is_omega_term, parse_term as P, rank, render_term, subterms

from corpus import random_term

C = importlib.import_module("kappa_canon.canon")

ALPHA1 = "((a)^w(b)^w)^w"
ALPHA2 = "(a)^(w-1)ab(b)^(w-2)ba((a)^(w-2)ab(b)^(w-2)ba)^(w-2)(a)^(w-2)ab(b)^(w-1)"
SEMI = "(a)^w((b)^w(a)^w(b)^w(a)^w)^(w-1)(b)^w(a)^w(b)^w((a)^w(b)^w)^w"
EX1 = "((bbbbba((b)^wa)^(w+3)(b)^(w-5)))^(w-2)"


def R(t):
    return render_term(t)


def test_canonicity_predicate():
    assert is_canonical(P(ALPHA1))
    assert is_canonical(P("ab(abb)^w ab(a)^(w-2)"))
    assert not is_canonical(P(SEMI))
    assert not is_canonical(P("(a)^wa"))
    assert not is_canonical(P("(ba)^w"))
    assert not is_canonical(P("(abab)^w"))


def test_semi_and_circular():
    assert C.is_semi_canonical(P(SEMI))
    assert C.is_semi_canonical(P("(a)^wa(ba)^(w+3)"))
    assert C.is_semi_canonical(P(ALPHA1))
    assert C.is_circular_canonical(P("(a)^w(b)^w"))
    assert C.is_circular_canonical(P("ab"))
    assert C.is_circular_canonical(P("(b)^w(a)^w"))


def test_golden_outputs():
    assert R(canon(P(EX1))) == "bbbbba((b)^wa)^(w-9)(b)^(w-5)"
    assert R(canon(P(SEMI))) == ALPHA1
    assert R(canon(P(ALPHA2))) == ALPHA1
    assert decide_equal(P(ALPHA1), P(ALPHA2))
    assert canon(P("abab")) == P("abab")


def test_aperiodic_pair():
    x, y = P("(a)^wa(b)^w"), P("(a)^wb(b)^w")
    assert R(canon(x, "A")) == R(canon(y, "A")) == "(a)^w(b)^w"
    assert R(canon(x)) == "(a)^(w+1)(b)^w"
    assert R(canon(y)) == "(a)^w(b)^(w+1)"
    assert decide_equal(x, y, "A") and not decide_equal(x, y, "S")


def test_crucial_portions():
    a, b = P("a"), P("b")
    assert C.normalize_crucial_portion(0, a, P("aa"), -2, a) == C.TypeI(0, a)
    assert C.normalize_crucial_portion(0, a, b, 0, a) == C.TypeII(0, a, b, 0, a)
    assert C.normalize_crucial_portion(0, P("ab"), (), 0, b) == C.TypeII(0, P("ab"), (), 0, b)
    with pytest.raises(ValueError):
        C.normalize_crucial_portion(0, P("ba"), (), 0, b)


def test_edge_portions():
    assert C.normalize_edge_portion(P("aa"), 0, P("a"), "initial") == ((), 2)
    assert C.normalize_edge_portion(P("b"), 5, P("a"), "initial") == (P("b"), 5)
    assert C.normalize_edge_portion(P("ab"), 0, P("ab"), "final") == ((), 1)
    with pytest.raises(ValueError):
        C.normalize_edge_portion(P("ab"), 0, P("ab"), "middle")


def test_reduce_limit_term():
    assert R(C.reduce_limit_term(-2, P("(a)^(w+3)"))) == "(a)^(w-6)"
    assert R(C.reduce_limit_term(-2, P("bbbbba((b)^wa)^(w+3)(b)^(w-5)"))) == "bbbbba((b)^wa)^(w-9)(b)^(w-5)"
    out = C.reduce_limit_term(0, P("(a)^w(b)^w"))
    top = [i for i, x in enumerate(out) if isinstance(x, Lim) and rank(x.base) == 1]
    assert len(top) == 1
    i = top[0]
    assert rank(out[:i]) == 1 and rank(out[i + 1:]) == 1


def test_step2_examples():
    assert R(C.step2(P("(abab)^(w+1)"))) == "(ab)^(w+2)"
    assert R(C.step2(P("(ba)^w"))) == "b(ab)^(w-1)a"
    assert R(C.step2(P(SEMI))) == ALPHA1


def test_step1_examples():
    t = P("ab(a)^(w-3)b")
    assert C.step1(t) == t
    assert R(C.step1(P("((abab)^w)^(w-1)"))) == "(ab)^w"
    out = C.step1(P("((a)^w(b)^w)^(w+1)"))
    assert C.is_semi_canonical(out) and rank(out) == 2


def test_product():
    assert R(C.product_canonical(P("(a)^w"), P("(a)^(w-1)"))) == "(a)^(w-1)"
    assert C.product_canonical(P("ab"), P("ba")) == P("abba")
    with pytest.raises(ValueError):
        C.product_canonical(P("(ba)^w"), P("a"))


def test_mode_check():
    with pytest.raises(ValueError):
        canon(P("ab"), "X")


def test_exponent_collapse_in_a_mode():
    assert R(canon(P("(a)^(w+7)"), "A")) == "(a)^w"
    assert R(canon(P("((a)^(w-3)b)^(w+2)"), "A")) == "((a)^wb)^w"


def test_traces_on_goldens():
    for text in (EX1, SEMI, ALPHA2):
        rep = canonicalize(P(text), want_trace=True)
        assert verify_derivation(rep.trace)
        assert rep.trace.end == rep.output


def test_type_one_circular_portion_with_short_middle():
    # circular portion of type I where the middle word is shorter than the base
    t = P("(b((ab)^w(a)^w(b)^w)^w)^w")
    rep = canonicalize(t, "A", want_trace=True)
    assert is_canonical(rep.output, "A")
    assert verify_derivation(rep.trace)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(["S", "A"]))
def test_idempotent_and_canonical(seed, mode):
    t = random_term(random.Random(seed), max_rank=3, max_len=20)
    c = canon(t, mode)
    assert is_canonical(c, mode)
    assert canon(c, mode) == c


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_conjugates_stay_circular_canonical(seed):
    rng = random.Random(seed)
    c = canon(random_term(rng, max_rank=2, max_len=14))
    if rank(c) and C.is_circular_canonical(c):
        k = rng.randrange(len(c))
        assert C.is_circular_canonical(c[k:] + c[:k])


def test_subterms_of_canonical_forms():
    c = canon(P(EX1))
    for s in subterms(c):
        assert is_canonical(s), R(s)


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 2**32))
def test_invariants_on_random_terms(seed):
    rng = random.Random(seed)
    t = random_term(rng, max_rank=3, max_len=20)
    c = canon(t)
    assert rank(c) <= rank(t)
    a = canon(t, "A")
    assert is_omega_term(a)
    assert decide_equal(t, c) and decide_equal(c, t)


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 2**32), st.integers(-7, 7))
def test_top_level_exponent_independence(seed, delta):
    c = canon(random_term(random.Random(seed), max_rank=3, max_len=20))
    r = rank(c)
    if r == 0:
        return
    bumped = tuple(Lim(x.base, x.q + delta) if isinstance(x, Lim) and rank(x.base) + 1 == r else x for x in c)
    assert is_canonical(bumped)


def test_deep_exponents_are_not_independent():
    # changing an offset below the top level can break canonicity
    c = P("baaa((b)^(w+2)(a)^(w+10))^(w-3)(b)^(w+2)(a)^(w+9)ba")
    assert is_canonical(c)
    assert not is_canonical(P("baaa((b)^(w+2)(a)^(w+10))^(w-3)(b)^(w+2)(a)^(w+10)ba"))
