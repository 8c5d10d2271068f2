"""Terms over a finite alphabet built from concatenation and (w+q)-powers.

A term is a flat tuple of atoms.  An atom is either a one-character string
(a letter) or a :class:`Lim` holding a nonempty base term and an integer
offset ``q``; ``Lim(base, q)`` stands for ``(base)^(w+q)``.  Concatenation is
always kept flattened, so two terms are equal exactly when they denote the
same well-parenthesized word.
"""

from __future__ import annotations

import re
from functools import lru_cache
from itertools import chain
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union


class Lim(NamedTuple):
    """A limit power ``(base)^(w+q)``."""

    base: tuple
    q: int


Atom = Union[str, Lim]
Term = Tuple[Atom, ...]

EMPTY: Term = ()


class TermSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def is_letter(atom) -> bool:
    return type(atom) is str


# ---------------------------------------------------------------------------
# parsing and rendering

_TOKEN = re.compile(r"\s*(?:(?P<letter>[a-z])|(?P<nat>\d+)|(?P<sym>[()^+\-]))")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise TermSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.end = len(text)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, self.end)

    def take(self, value=None):
        kind, val, pos = self.peek()
        if kind is None:
            raise TermSyntaxError("unexpected end of input", pos)
        if value is not None and val != value:
            raise TermSyntaxError(f"expected {value!r}, found {val!r}", pos)
        self.i += 1
        return kind, val, pos

    def term(self) -> Term:
        atoms: List[Atom] = []
        while True:
            kind, val, pos = self.peek()
            if kind == "letter":
                self.take()
                atoms.append(val)
            elif val == "(":
                atoms.extend(self.group())
            else:
                break
        return tuple(atoms)

    def group(self) -> Term:
        _, _, pos = self.take("(")
        body = self.term()
        if not body:
            raise TermSyntaxError("empty term inside parentheses", pos)
        self.take(")")
        if self.peek()[1] != "^":
            # bare parentheses only group
            return body
        self.take("^")
        return self.exponent(body)

    def exponent(self, body: Term) -> Term:
        kind, val, pos = self.peek()
        if val == "(":
            self.take()
            result = self.exponent(body)
            self.take(")")
            return result
        if kind == "nat":
            self.take()
            n = int(val)
            if n < 2:
                raise TermSyntaxError(f"plain power must be at least 2, got {n}", pos)
            return body * n
        if kind == "letter" and val == "w":
            self.take()
            q = 0
            sign = self.peek()[1]
            if sign in ("+", "-"):
                self.take()
                k2, v2, p2 = self.take()
                if k2 != "nat":
                    raise TermSyntaxError("expected a natural number after sign", p2)
                q = int(v2) if sign == "+" else -int(v2)
            return (Lim(body, q),)
        raise TermSyntaxError("expected exponent 'w', 'w+k', 'w-k' or an integer >= 2", pos)


def parse_term(text: str) -> Term:
    """Parse the term grammar, e.g. ``"((a)^(w-1)ba(ab)^w)^(w+5)"``."""
    parser = _Parser(text)
    result = parser.term()
    kind, val, pos = parser.peek()
    if kind is not None:
        raise TermSyntaxError(f"unexpected {val!r}", pos)
    if not result:
        raise TermSyntaxError("empty term", 0)
    return result


def _render_exp(q: int) -> str:
    if q == 0:
        return "w"
    return f"(w{q:+d})"


def render_term(t: Term) -> str:
    out = []
    for atom in t:
        if is_letter(atom):
            out.append(atom)
        else:
            out.append(f"({render_term(atom.base)})^{_render_exp(atom.q)}")
    return "".join(out)


# ---------------------------------------------------------------------------
# well-parenthesized words over A_Z

class Open(NamedTuple):
    q: int


class Close(NamedTuple):
    q: int


Symbol = Union[str, Open, Close]


def to_paren_word(t: Term) -> Tuple[Symbol, ...]:
    out: List[Symbol] = []

    def walk(seq):
        for atom in seq:
            if is_letter(atom):
                out.append(atom)
            else:
                out.append(Open(atom.q))
                walk(atom.base)
                out.append(Close(atom.q))

    walk(t)
    return tuple(out)


def from_paren_word(word: Sequence[Symbol]) -> Term:
    stack: List[Tuple[List[Atom], Optional[int]]] = [([], None)]
    for pos, sym in enumerate(word):
        if isinstance(sym, Open):
            stack.append(([], sym.q))
        elif isinstance(sym, Close):
            if len(stack) == 1:
                raise ValueError(f"unbalanced closing parenthesis at {pos}")
            body, q = stack.pop()
            if q != sym.q:
                raise ValueError(f"mismatched parentheses at {pos}: opened {q}, closed {sym.q}")
            if not body:
                raise ValueError(f"empty parenthesis factor at {pos}")
            stack[-1][0].append(Lim(tuple(body), q))
        elif isinstance(sym, str) and len(sym) == 1 and sym.isalpha():
            stack[-1][0].append(sym)
        else:
            raise ValueError(f"bad symbol {sym!r} at {pos}")
    if len(stack) != 1:
        raise ValueError("unbalanced opening parenthesis")
    return tuple(stack[0][0])


def format_paren_word(word: Sequence[Symbol]) -> str:
    parts = []
    for sym in word:
        if isinstance(sym, Open):
            parts.append(f"<{sym.q}")
        elif isinstance(sym, Close):
            parts.append(f">{sym.q}")
        else:
            parts.append(sym)
    return " ".join(parts)


def parse_paren_word(text: str) -> Tuple[Symbol, ...]:
    out: List[Symbol] = []
    for tok in text.split():
        if tok[0] == "<":
            out.append(Open(int(tok[1:])))
        elif tok[0] == ">":
            out.append(Close(int(tok[1:])))
        else:
            out.extend(tok)
    return tuple(out)


# ---------------------------------------------------------------------------
# structural parameters

@lru_cache(maxsize=None)
def rank(t: Term) -> int:
    r = 0
    for atom in t:
        if not is_letter(atom):
            r = max(r, 1 + rank(atom.base))
    return r


def atom_rank(atom: Atom) -> int:
    return 0 if is_letter(atom) else 1 + rank(atom.base)


@lru_cache(maxsize=None)
def term_length(t: Term) -> int:
    """Number of symbols of the paren-word of ``t``."""
    return sum(1 if is_letter(a) else 2 + term_length(a.base) for a in t)


def limit_positions(t: Term, r: Optional[int] = None) -> List[int]:
    """Indices of the top-level limit atoms of rank ``r`` (default: rank of t)."""
    if r is None:
        r = rank(t)
    return [i for i, a in enumerate(t) if not is_letter(a) and 1 + rank(a.base) == r]


class Decomposition(NamedTuple):
    gamma0: Term
    limits: Tuple[Tuple[int, Term, Term], ...]  # (q_k, delta_k, gamma_k)


def primary_decomposition(t: Term) -> Decomposition:
    """Split ``t`` as gamma0 (delta_1)^(w+q_1) gamma_1 ... around maximal-rank limits."""
    r = rank(t)
    if r == 0:
        raise ValueError("primary decomposition needs a term of rank >= 1")
    pos = limit_positions(t, r)
    limits = []
    for k, i in enumerate(pos):
        nxt = pos[k + 1] if k + 1 < len(pos) else len(t)
        limits.append((t[i].q, t[i].base, t[i + 1:nxt]))
    return Decomposition(t[:pos[0]], tuple(limits))


def assemble(dec: Decomposition) -> Term:
    return dec.gamma0 + tuple(chain.from_iterable((Lim(d, q),) + g for q, d, g in dec.limits))


def lt_length(t: Term) -> int:
    return len(limit_positions(t)) if rank(t) else 0


class PortionView(NamedTuple):
    """A factor of a term, given by atom indices into its owner, plus the term itself."""

    kind: str
    start: int
    stop: int
    term: Term


class Portions(NamedTuple):
    initial: PortionView
    final: PortionView
    crucial: Tuple[PortionView, ...]
    circular: PortionView


def portions(t: Term) -> Portions:
    r = rank(t)
    if r == 0:
        raise ValueError("portions are defined for terms of rank >= 1")
    pos = limit_positions(t, r)
    initial = PortionView("initial", 0, pos[0] + 1, t[:pos[0] + 1])
    final = PortionView("final", pos[-1], len(t), t[pos[-1]:])
    crucial = tuple(PortionView("crucial", i, j + 1, t[i:j + 1]) for i, j in zip(pos, pos[1:]))
    # the circular portion lives in t*t: it starts at the last limit of the first copy
    circ = final.term + initial.term
    circular = PortionView("circular", pos[-1], len(t) + pos[0] + 1, circ)
    return Portions(initial, final, crucial, circular)


def expansion(t: Term, exponents: Union[int, Sequence[int], Dict[int, int]]) -> Term:
    """Replace the k-th maximal-rank limit term by its base to the power ``exponents[k]``.

    An integer ``p`` means a uniform p-expansion.  Rank-0 terms are their own
    expansion.
    """
    r = rank(t)
    if r == 0:
        return t
    pos = limit_positions(t, r)
    if isinstance(exponents, int):
        exps = [exponents] * len(pos)
    elif isinstance(exponents, dict):
        exps = [exponents.get(k, 0) for k in range(len(pos))]
    else:
        exps = list(exponents)
    if len(exps) != len(pos) or any(j < 1 for j in exps):
        raise ValueError("need one exponent >= 1 per maximal-rank limit term")
    out: List[Atom] = []
    last = 0
    for i, j in zip(pos, exps):
        out.extend(t[last:i])
        out.extend(t[i].base * j)
        last = i + 1
    out.extend(t[last:])
    return tuple(out)


def exponents_of(t: Term) -> List[int]:
    """The offsets occurring in ``t`` (with repetition), outermost first."""
    out = []
    for atom in t:
        if not is_letter(atom):
            out.append(atom.q)
            out.extend(exponents_of(atom.base))
    return out


def scale_nu(t: Term) -> int:
    return max((abs(q) for q in exponents_of(t)), default=0)


def mu(t: Term) -> int:
    """2^rank times the longest crucial portion of ``t*t``; 0 for words."""
    r = rank(t)
    if r == 0:
        return 0
    sq = portions(t + t)
    return 2 ** r * max(term_length(p.term) for p in sq.crucial)


def letters(t: Term) -> List[str]:
    found = set()

    def walk(seq):
        for a in seq:
            if is_letter(a):
                found.add(a)
            else:
                walk(a.base)

    walk(t)
    return sorted(found)


def subterms(t: Term):
    """Yield every subterm: every nonempty contiguous factor of every atom sequence."""
    seen = set()

    def walk(seq):
        for i in range(len(seq)):
            for j in range(i + 1, len(seq) + 1):
                f = seq[i:j]
                if f not in seen:
                    seen.add(f)
                    yield f
        for a in seq:
            if not is_letter(a):
                yield from walk(a.base)

    yield from walk(t)


def map_exponents(t: Term, fn) -> Term:
    return tuple(a if is_letter(a) else Lim(map_exponents(a.base, fn), fn(a.q)) for a in t)


def is_omega_term(t: Term) -> bool:
    return all(q == 0 for q in exponents_of(t))


# ---------------------------------------------------------------------------
# kappa <-> kappa-bar

def bk_to_kappa(t: Term) -> Term:
    """Rewrite every offset into the (w-1)-power signature.

    (x)^(w+q) = (x)^(w-1) x^(q+1) for q >= 0 and ((x)^(w-1))^(-q) for q < 0.
    """
    out: List[Atom] = []
    for a in t:
        if is_letter(a):
            out.append(a)
            continue
        base = bk_to_kappa(a.base)
        lim = Lim(base, -1)
        if a.q >= 0:
            out.append(lim)
            out.extend(base * (a.q + 1))
        else:
            out.extend((lim,) * (-a.q))
    return tuple(out)


def kappa_to_bk(t: Term) -> Term:
    for q in exponents_of(t):
        if q != -1:
            raise ValueError(f"not a kappa-term: offset {q} found, only -1 allowed")
    return t
