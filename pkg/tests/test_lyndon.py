from itertools import product
from math import gcd

import pytest

from kappa_canon.lyndon import (
    fine_wilf_commensurable, is_bordered, is_lyndon, is_lyndon_by_suffixes, is_prefix, is_suffix,
    lex_compare, minimal_conjugate, primitive_root,
)
from kappa_canon.term import parse_term as P, to_paren_word

LYNDON4 = {"a", "b", "ab", "aab", "abb", "aaab", "aabb", "abbb"}


def words(max_len, alphabet="ab"):
    for n in range(1, max_len + 1):
        for w in product(alphabet, repeat=n):
            yield "".join(w)


def test_lyndon_words_up_to_four():
    found = {w for w in words(4) if is_lyndon(tuple(w))}
    assert found == LYNDON4


def test_lyndon_agrees_with_suffix_characterization():
    for w in words(8):
        assert is_lyndon(tuple(w)) == is_lyndon_by_suffixes(w), w


def test_small_cases():
    assert not is_lyndon(P("ba"))
    assert is_lyndon(P("a"))
    assert not is_lyndon(P("abab"))


def test_primitive_root():
    assert primitive_root(P("abab")) == (P("ab"), 2)
    assert primitive_root(P("(a)^wb(a)^wb")) == (P("(a)^wb"), 2)
    assert primitive_root(P("aab")) == (P("aab"), 1)


def test_minimal_conjugate():
    rot, split = minimal_conjugate(P("bab"))
    assert rot == P("abb")
    assert (split.left, split.right) == (P("b"), P("ab"))
    rot, split = minimal_conjugate(P("aab"))
    assert rot == P("aab") and split.left == ()
    with pytest.raises(ValueError):
        minimal_conjugate(P("abab"))


def test_minimal_conjugate_on_limit_atoms():
    rot, _ = minimal_conjugate(P("b(a)^w"))
    # opening parentheses sort below letters
    assert rot == P("(a)^wb")
    assert is_lyndon(rot)


def test_lex_compare():
    u = to_paren_word(P("(a)^wb"))
    assert lex_compare(u, u) == 0
    assert lex_compare(to_paren_word(P("ab")), to_paren_word(P("b"))) < 0
    assert lex_compare(to_paren_word(P("b")), to_paren_word(P("ab"))) > 0


def test_borders():
    assert is_bordered("aba")
    assert not is_bordered("aab")
    assert not is_bordered("a")
    for w in words(7):
        if is_lyndon(tuple(w)):
            assert not is_bordered(w)


def test_fine_wilf():
    assert fine_wilf_commensurable("ab", "aba", 4)
    assert not fine_wilf_commensurable("ab", "abab", 3)
    assert not fine_wilf_commensurable("a", "a", 0)
    assert fine_wilf_commensurable("ab", "abab", 4)


def test_fine_wilf_bound_is_sharp():
    # exhaustive over short binary words: a common prefix of |u|+|v|-gcd forces a common root
    for u in words(4):
        for v in words(4):
            if len(u) + len(v) - 1 > 8:
                continue
            t = len(u) + len(v) - gcd(len(u), len(v))
            uu, vv = u * 8, v * 8
            if uu[:t] == vv[:t]:
                assert primitive_root(tuple(u))[0] == primitive_root(tuple(v))[0]


def test_prefix_suffix():
    assert is_prefix(P("ab"), P("abb"))
    assert not is_prefix(P("b"), P("abb"))
    assert is_suffix(P("bb"), P("abb"))
    assert is_suffix((), P("abb"))
