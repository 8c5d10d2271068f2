"""Order on A_Z, primitive roots, conjugates and Lyndon tests for terms.

Symbols are compared through sort keys: ``open(p) < open(q) < letters <
close(q) < close(p)`` whenever ``p < q``; letters compare alphabetically.
Lexicographic comparison of paren-words is then plain tuple comparison of
key sequences (a proper prefix sorts first).
"""

from __future__ import annotations

from functools import lru_cache
from math import gcd
from typing import NamedTuple, Sequence, Tuple

from .term import Close, Open, Term, is_letter


def symbol_key(sym) -> tuple:
    if isinstance(sym, Open):
        return (0, sym.q)
    if isinstance(sym, Close):
        return (2, -sym.q)
    return (1, sym)


def word_key(word: Sequence) -> tuple:
    return tuple(symbol_key(s) for s in word)


@lru_cache(maxsize=None)
def term_key(t: Term) -> tuple:
    """Sort key of the paren-word of ``t``."""
    out = []
    for atom in t:
        if is_letter(atom):
            out.append((1, atom))
        else:
            out.append((0, atom.q))
            out.extend(term_key(atom.base))
            out.append((2, -atom.q))
    return tuple(out)


def lex_compare(u: Sequence, v: Sequence) -> int:
    """-1, 0 or 1 as paren-word ``u`` is below, equal to or above ``v``."""
    ku, kv = word_key(u), word_key(v)
    return (ku > kv) - (ku < kv)


def primitive_root(t: Term) -> Tuple[Term, int]:
    """``(root, n)`` with ``t == root * n`` and ``n`` maximal."""
    size = len(t)
    for d in range(1, size + 1):
        if size % d == 0 and t[:d] * (size // d) == t:
            return t[:d], size // d
    return t, 1


def is_primitive(t: Term) -> bool:
    return primitive_root(t)[1] == 1


class ConjugateSplit(NamedTuple):
    left: Term   # gamma1, with original = gamma1 + gamma2
    right: Term  # gamma2, with rotated = gamma2 + gamma1


def minimal_conjugate(t: Term) -> Tuple[Term, ConjugateSplit]:
    """Least rotation of ``t`` at atom boundaries, with the split producing it."""
    if not is_primitive(t):
        raise ValueError("minimal_conjugate expects a primitive term")
    best_k = 0
    best = term_key(t)
    for k in range(1, len(t)):
        key = term_key(t[k:] + t[:k])
        if key < best:
            best, best_k = key, k
    return t[best_k:] + t[:best_k], ConjugateSplit(t[:best_k], t[best_k:])


@lru_cache(maxsize=None)
def is_lyndon(t: Term) -> bool:
    if not t or not is_primitive(t):
        return False
    key = term_key(t)
    return all(term_key(t[k:] + t[:k]) > key for k in range(1, len(t)))


def is_lyndon_by_suffixes(word: str) -> bool:
    """Duval's characterization: strictly smaller than each proper suffix."""
    return bool(word) and all(word < word[k:] for k in range(1, len(word)))


def is_bordered(word: Sequence) -> bool:
    word = tuple(word)
    return any(word[:k] == word[-k:] for k in range(1, len(word)))


def fine_wilf_commensurable(u: Sequence, v: Sequence, common_prefix_len: int) -> bool:
    """Whether a common prefix this long forces ``u`` and ``v`` to share a root."""
    m, n = len(u), len(v)
    return common_prefix_len >= m + n - gcd(m, n)


def is_prefix(p: Term, t: Term) -> bool:
    return len(p) <= len(t) and t[:len(p)] == p


def is_suffix(s: Term, t: Term) -> bool:
    return len(s) <= len(t) and (not s or t[-len(s):] == s)
