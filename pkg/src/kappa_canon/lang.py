"""The regular languages L_{n,p}(t) and the automata used to test them.

``build_lang`` turns a term into a small regular expression tree whose powers
stay symbolic: ``(t)^(w+q)`` becomes ``L(t)^(n+q) (L(t)^p)*``.  The automaton
for such a tree is built lazily.  Its states are letter positions of the
tree together with one iteration counter per enclosing power, and a counter
past ``n+q`` is folded back modulo ``p``, so only reachable configurations
are ever materialized.

A separate textual regex parser with a Thompson construction gives an
independent automaton for the same language, which is what the equivalence
checks compare against.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Hashable, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .term import Lim, Term, is_letter, mu, scale_nu, term_length

DEFAULT_CAP = 200_000
MONOID_CAP = 10_000


class LangError(ValueError):
    pass


class CapExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# schemes

@dataclass(frozen=True)
class Scheme:
    n: int
    p: int

    def __post_init__(self):
        if self.p < 1:
            raise LangError("scheme needs p >= 1")
        if self.n < 1 or self.n % self.p:
            raise LangError(f"scheme needs n a positive multiple of p, got n={self.n}, p={self.p}")

    def governs(self, t: Term) -> bool:
        return self.n - self.p > mu(tuple(t)) and self.p > 2 * scale_nu(tuple(t))


def q_bar(scheme: Scheme, q: int) -> Tuple[int, int]:
    """``{n + j*p + q : j >= 0}`` as ``(first, step)``."""
    if scheme.n <= abs(q):
        raise LangError(f"scheme n={scheme.n} does not exceed |{q}|")
    return scheme.n + q, scheme.p


def compute_scheme(terms: Sequence[Term], require_length_bound: bool = False) -> Scheme:
    terms = [tuple(t) for t in terms]
    if not terms:
        raise LangError("compute_scheme needs at least one term")
    p = 2 * max(scale_nu(t) for t in terms) + 1
    bound = max(mu(t) for t in terms)
    if require_length_bound:
        bound = max(bound, max(term_length(t) for t in terms))
    return Scheme(p * math.ceil((bound + p + 1) / p), p)


# ---------------------------------------------------------------------------
# structured expressions

class Lit(NamedTuple):
    word: str


class Cat(NamedTuple):
    parts: Tuple


class Pow(NamedTuple):
    body: object
    first: int
    step: int


LangSpec = Union[Lit, Cat, Pow]


def build_lang(t: Term, scheme: Scheme) -> LangSpec:
    t = tuple(t)
    if not t:
        raise LangError("the empty term has no language")
    if scheme.n <= scale_nu(t):
        raise LangError(f"scheme n={scheme.n} is too small for offsets up to {scale_nu(t)}")
    return _build(t, scheme)


def _build(t: Term, scheme: Scheme) -> LangSpec:
    parts: List = []
    word = ""
    for atom in t:
        if is_letter(atom):
            word += atom
            continue
        if word:
            parts.append(Lit(word))
            word = ""
        first, step = q_bar(scheme, atom.q)
        parts.append(Pow(_build(atom.base, scheme), first, step))
    if word:
        parts.append(Lit(word))
    return parts[0] if len(parts) == 1 else Cat(tuple(parts))


def render(spec: LangSpec) -> str:
    """Regex text such as ``(a^7(a^4)*b)^8((a^7(a^4)*b)^4)*a^9(a^4)*``."""
    if isinstance(spec, Lit):
        return spec.word
    if isinstance(spec, Cat):
        return "".join(render(x) for x in spec.parts)
    body = render(spec.body)
    if not (isinstance(spec.body, Lit) and len(spec.body.word) == 1):
        body = f"({body})"

    def power(k):
        return body if k == 1 else f"{body}^{k}"

    star = power(spec.step)
    star = f"{star}*" if spec.step == 1 else f"({star})*"
    return power(spec.first) + star


def sample_word(spec: LangSpec, rng, extra: int = 2) -> str:
    """A random member: each power picks ``first + j*step`` with ``j <= extra``."""
    if isinstance(spec, Lit):
        return spec.word
    if isinstance(spec, Cat):
        return "".join(sample_word(x, rng, extra) for x in spec.parts)
    k = spec.first + spec.step * rng.randint(0, extra)
    return "".join(sample_word(spec.body, rng, extra) for _ in range(k))


def shortest_member(spec: LangSpec) -> str:
    if isinstance(spec, Lit):
        return spec.word
    if isinstance(spec, Cat):
        return "".join(shortest_member(x) for x in spec.parts)
    return shortest_member(spec.body) * spec.first


# ---------------------------------------------------------------------------
# automata

START = "start"


class Automaton:
    """Nondeterministic automaton interface: ``initial``, ``successors``, ``is_accepting``."""

    alphabet: Tuple[str, ...]

    def initial(self) -> Iterable[Hashable]:
        raise NotImplementedError

    def successors(self, state, ch: str) -> Iterable[Hashable]:
        raise NotImplementedError

    def is_accepting(self, state) -> bool:
        raise NotImplementedError

    def step_set(self, states: FrozenSet, ch: str) -> FrozenSet:
        out = set()
        for s in states:
            out.update(self.successors(s, ch))
        return frozenset(out)

    def accepts(self, word: str) -> bool:
        cur = frozenset(self.initial())
        for ch in word:
            cur = self.step_set(cur, ch)
            if not cur:
                return False
        return any(self.is_accepting(s) for s in cur)


@dataclass
class NFA(Automaton):
    """Explicit epsilon-free automaton on states ``0..size-1``."""

    size: int
    alphabet: Tuple[str, ...]
    delta: Dict[Tuple[int, str], FrozenSet[int]]
    starts: FrozenSet[int]
    finals: FrozenSet[int]

    def initial(self):
        return self.starts

    def successors(self, state, ch):
        return self.delta.get((state, ch), frozenset())

    def is_accepting(self, state):
        return state in self.finals

    def transition_count(self) -> int:
        return sum(len(v) for v in self.delta.values())

    def to_text(self) -> str:
        lines = [f"states {self.size}", "alphabet " + " ".join(self.alphabet),
                 "initial " + " ".join(map(str, sorted(self.starts))),
                 "accepting " + " ".join(map(str, sorted(self.finals)))]
        for (s, ch), dst in sorted(self.delta.items()):
            for d in sorted(dst):
                lines.append(f"{s} {ch} {d}")
        return "\n".join(lines) + "\n"


class _Node(NamedTuple):
    kind: str          # "leaf", "cat" or "pow"
    parent: int
    slot: int          # position among the parent's children
    children: Tuple[int, ...]
    char: str
    first: int
    step: int


class LazyNFA(Automaton):
    """Position automaton of a LangSpec with folded iteration counters.

    A state is ``(leaf, counters)``: the last letter read and the current
    iteration number of every enclosing power, outermost first.
    """

    def __init__(self, spec: LangSpec):
        self.spec = spec
        self.nodes: List[_Node] = []
        self.root = self._add(spec, -1, 0)
        self.alphabet = tuple(sorted({n.char for n in self.nodes if n.kind == "leaf"}))
        self._follow: Dict = {}
        self._succ: Dict = {}

    def _add(self, spec, parent, slot) -> int:
        idx = len(self.nodes)
        self.nodes.append(None)
        if isinstance(spec, Lit) and len(spec.word) == 1:
            self.nodes[idx] = _Node("leaf", parent, slot, (), spec.word, 0, 0)
        elif isinstance(spec, Pow):
            self.nodes[idx] = _Node("pow", parent, slot, (), "", spec.first, spec.step)
            kid = self._add(spec.body, idx, 0)
            self.nodes[idx] = self.nodes[idx]._replace(children=(kid,))
        else:
            parts = [Lit(c) for c in spec.word] if isinstance(spec, Lit) else list(spec.parts)
            self.nodes[idx] = _Node("cat", parent, slot, (), "", 0, 0)
            kids = tuple(self._add(part, idx, k) for k, part in enumerate(parts))
            self.nodes[idx] = self.nodes[idx]._replace(children=kids)
        return idx

    def _first(self, idx: int, counters: tuple):
        node = self.nodes[idx]
        while node.kind != "leaf":
            if node.kind == "pow":
                counters = counters + (1,)
            idx = node.children[0]
            node = self.nodes[idx]
        return idx, counters

    def _after(self, idx: int, counters: tuple) -> Tuple[List, bool]:
        """Positions that may follow a completed node, and whether the word may end."""
        out = []
        while True:
            node = self.nodes[idx]
            if node.parent < 0:
                return out, True
            par = self.nodes[node.parent]
            if par.kind == "cat":
                if node.slot + 1 < len(par.children):
                    out.append(self._first(par.children[node.slot + 1], counters))
                    return out, False
                idx = node.parent
                continue
            k = counters[-1]
            nxt = k + 1
            if nxt >= par.first + par.step:
                nxt -= par.step
            out.append(self._first(idx, counters[:-1] + (nxt,)))
            if k >= par.first and (k - par.first) % par.step == 0:
                idx, counters = node.parent, counters[:-1]
                continue
            return out, False

    def _follow_of(self, state):
        hit = self._follow.get(state)
        if hit is None:
            if state == START:
                hit = ([self._first(self.root, ())], False)
            else:
                hit = self._after(*state)
            self._follow[state] = hit
        return hit

    def initial(self):
        return (START,)

    def successors(self, state, ch):
        key = (state, ch)
        hit = self._succ.get(key)
        if hit is None:
            hit = tuple(s for s in self._follow_of(state)[0] if self.nodes[s[0]].char == ch)
            self._succ[key] = hit
        return hit

    def is_accepting(self, state):
        return state != START and self._follow_of(state)[1]


def lazy_nfa(t: Term, scheme: Scheme) -> LazyNFA:
    return LazyNFA(build_lang(t, scheme))


def _materialize(aut: Automaton, cap: int) -> NFA:
    index: Dict = {}
    order: List = []

    def idx(s):
        if s not in index:
            if len(index) >= cap:
                raise CapExceeded(f"more than {cap} states")
            index[s] = len(order)
            order.append(s)
        return index[s]

    starts = frozenset(idx(s) for s in aut.initial())
    delta: Dict[Tuple[int, str], FrozenSet[int]] = {}
    k = 0
    while k < len(order):
        s = order[k]
        for ch in aut.alphabet:
            dst = frozenset(idx(d) for d in aut.successors(s, ch))
            if dst:
                delta[(k, ch)] = dst
        k += 1
    finals = frozenset(i for i, s in enumerate(order) if aut.is_accepting(s))
    return NFA(len(order), tuple(aut.alphabet), delta, starts, finals)


def to_nfa(spec: LangSpec, cap: int = DEFAULT_CAP) -> NFA:
    """Explicit epsilon-free NFA of a LangSpec (reachable part only)."""
    return _materialize(LazyNFA(spec), cap)


# ---------------------------------------------------------------------------
# products

class Intersection(NamedTuple):
    empty: bool
    witness: Optional[str]
    explored: int


def intersect_empty(a: Automaton, b: Automaton, cap: int = 5_000_000) -> Intersection:
    """Breadth-first product search; returns a shortest common word if any."""
    alphabet = sorted(set(a.alphabet) & set(b.alphabet))
    parent: Dict = {}
    queue = deque()
    for sa in a.initial():
        for sb in b.initial():
            pair = (sa, sb)
            if pair not in parent:
                parent[pair] = None
                queue.append(pair)
    while queue:
        pair = queue.popleft()
        if a.is_accepting(pair[0]) and b.is_accepting(pair[1]):
            return Intersection(False, _trace_back(parent, pair), len(parent))
        for ch in alphabet:
            for da in a.successors(pair[0], ch):
                for db in b.successors(pair[1], ch):
                    nxt = (da, db)
                    if nxt not in parent:
                        if len(parent) >= cap:
                            raise CapExceeded(f"product exceeded {cap} states")
                        parent[nxt] = (pair, ch)
                        queue.append(nxt)
    return Intersection(True, None, len(parent))


def _trace_back(parent, node) -> str:
    out = []
    while parent[node] is not None:
        node, ch = parent[node]
        out.append(ch)
    return "".join(reversed(out))


class Equivalence(NamedTuple):
    equal: bool
    counterexample: Optional[str]
    explored: int


def equivalent(a: Automaton, b: Automaton, cap: int = 1_000_000) -> Equivalence:
    """Lockstep subset construction of both automata, searching for a distinguishing word."""
    alphabet = sorted(set(a.alphabet) | set(b.alphabet))
    start = (frozenset(a.initial()), frozenset(b.initial()))
    parent: Dict = {start: None}
    queue = deque([start])
    while queue:
        pair = queue.popleft()
        acc_a = any(a.is_accepting(s) for s in pair[0])
        acc_b = any(b.is_accepting(s) for s in pair[1])
        if acc_a != acc_b:
            return Equivalence(False, _trace_back(parent, pair), len(parent))
        for ch in alphabet:
            nxt = (a.step_set(pair[0], ch), b.step_set(pair[1], ch))
            if nxt not in parent:
                if len(parent) >= cap:
                    raise CapExceeded(f"equivalence search exceeded {cap} states")
                parent[nxt] = (pair, ch)
                queue.append(nxt)
    return Equivalence(True, None, len(parent))


def nonempty_witness(a: Automaton) -> Optional[str]:
    res = intersect_empty(a, a)
    return res.witness


# ---------------------------------------------------------------------------
# deterministic automata

@dataclass
class DFA:
    """Complete DFA on states ``0..size-1``; ``delta[s][k]`` follows ``alphabet[k]``."""

    alphabet: Tuple[str, ...]
    delta: List[Tuple[int, ...]]
    start: int
    finals: FrozenSet[int]

    @property
    def size(self) -> int:
        return len(self.delta)

    def accepts(self, word: str) -> bool:
        pos = {c: k for k, c in enumerate(self.alphabet)}
        s = self.start
        for ch in word:
            if ch not in pos:
                return False
            s = self.delta[s][pos[ch]]
        return s in self.finals


def determinize(aut: Automaton, cap: int = DEFAULT_CAP, alphabet: Optional[Sequence[str]] = None) -> DFA:
    sigma = tuple(sorted(alphabet if alphabet is not None else aut.alphabet))
    start = frozenset(aut.initial())
    index = {start: 0}
    order = [start]
    delta: List[Tuple[int, ...]] = []
    k = 0
    while k < len(order):
        cur = order[k]
        row = []
        for ch in sigma:
            nxt = aut.step_set(cur, ch)
            if nxt not in index:
                if len(index) >= cap:
                    raise CapExceeded(f"subset construction exceeded {cap} states")
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        delta.append(tuple(row))
        k += 1
    finals = frozenset(i for i, ss in enumerate(order) if any(aut.is_accepting(s) for s in ss))
    return DFA(sigma, delta, 0, finals)


def minimize(d: DFA) -> DFA:
    """Moore partition refinement on the reachable part."""
    seen = {d.start}
    stack = [d.start]
    while stack:
        s = stack.pop()
        for t in d.delta[s]:
            if t not in seen:
                seen.add(t)
                stack.append(t)
    states = np.array(sorted(seen))
    renum = {int(s): k for k, s in enumerate(states)}
    delta = np.array([[renum[t] for t in d.delta[s]] for s in states], dtype=np.int64).reshape(len(states), -1)
    accept = np.array([int(s) in d.finals for s in states], dtype=np.int64)
    _, block = np.unique(accept, return_inverse=True)
    count = block.max() + 1
    while True:
        sig = np.column_stack([block, block[delta]])
        _, new = np.unique(sig, axis=0, return_inverse=True)
        new = new.ravel()
        if new.max() + 1 == count:
            break
        block, count = new, new.max() + 1
    rows: List = [None] * count
    for k in range(len(states)):
        rows[block[k]] = tuple(int(x) for x in block[delta[k]])
    finals = frozenset(int(block[k]) for k in range(len(states)) if accept[k])
    return DFA(d.alphabet, rows, int(block[renum[d.start]]), finals)


class CounterFreeness(NamedTuple):
    verdict: Optional[bool]      # None when the monoid cap was exceeded
    monoid_size: int
    counter_word: Optional[str]  # a word acting with a nontrivial cycle

    def describe(self) -> str:
        if self.verdict is None:
            return f"undecided at desk scale (transition monoid exceeds {self.monoid_size} elements)"
        if self.verdict:
            return f"counter-free (transition monoid of {self.monoid_size} elements is aperiodic)"
        return f"not counter-free: {self.counter_word!r} has a nontrivial cycle"


def _is_aperiodic_map(m: np.ndarray) -> bool:
    """Whether every cycle of the map ``m`` is a fixed point, i.e. ``m^N == m^(N+1)``."""
    power = m
    reach = 1
    while reach < len(m):
        power = power[power]
        reach *= 2
    return bool(np.array_equal(m[power], power))


def is_counter_free(d: DFA, cap: int = MONOID_CAP) -> CounterFreeness:
    """Aperiodicity of the transition monoid, generated breadth-first up to ``cap`` elements."""
    size = d.size
    gens = [np.array([d.delta[s][k] for s in range(size)], dtype=np.int32) for k in range(len(d.alphabet))]
    word: Dict[bytes, str] = {}
    queue = deque()
    for k, g in enumerate(gens):
        key = g.tobytes()
        if key not in word:
            word[key] = d.alphabet[k]
            queue.append(g)
    while queue:
        m = queue.popleft()
        key = m.tobytes()
        if not _is_aperiodic_map(m):
            return CounterFreeness(False, len(word), word[key])
        for k, g in enumerate(gens):
            prod = g[m]           # act by m, then by the letter
            pk = prod.tobytes()
            if pk not in word:
                if len(word) >= cap:
                    return CounterFreeness(None, cap, None)
                word[pk] = word[key] + d.alphabet[k]
                queue.append(prod)
    return CounterFreeness(True, len(word), None)


# ---------------------------------------------------------------------------
# textual regexes and Thompson's construction

class RegexSyntaxError(ValueError):
    pass


class _Re(NamedTuple):
    op: str      # "chr", "cat", "alt", "star", "pow"
    args: tuple


def parse_regex(text: str) -> _Re:
    """Letters, grouping, ``|``, postfix ``*`` ``+`` ``?`` and ``^k``."""
    text = text.replace(" ", "")
    pos = 0

    def peek():
        return text[pos] if pos < len(text) else ""

    def alt():
        nonlocal pos
        items = [cat()]
        while peek() == "|":
            pos += 1
            items.append(cat())
        return items[0] if len(items) == 1 else _Re("alt", tuple(items))

    def cat():
        items = []
        while peek() and peek() not in "|)":
            items.append(postfix())
        if not items:
            raise RegexSyntaxError(f"empty factor at {pos}")
        return items[0] if len(items) == 1 else _Re("cat", tuple(items))

    def postfix():
        nonlocal pos
        node = atom()
        while peek() in ("*", "+", "?", "^") and peek():
            op = peek()
            pos += 1
            if op == "*":
                node = _Re("star", (node,))
            elif op == "+":
                node = _Re("cat", (node, _Re("star", (node,))))
            elif op == "?":
                node = _Re("alt", (node, _Re("cat", ())))
            else:
                start = pos
                while peek().isdigit():
                    pos += 1
                if start == pos:
                    raise RegexSyntaxError(f"expected a count after '^' at {start}")
                node = _Re("pow", (node, int(text[start:pos])))
        return node

    def atom():
        nonlocal pos
        ch = peek()
        if ch == "(":
            pos += 1
            node = alt()
            if peek() != ")":
                raise RegexSyntaxError(f"expected ')' at {pos}")
            pos += 1
            return node
        if ch.isalpha():
            pos += 1
            return _Re("chr", (ch,))
        raise RegexSyntaxError(f"unexpected {ch!r} at {pos}" if ch else "unexpected end of pattern")

    node = alt()
    if pos != len(text):
        raise RegexSyntaxError(f"unexpected {text[pos]!r} at {pos}")
    return node


class _Thompson:
    def __init__(self):
        self.eps: List[List[int]] = []
        self.moves: List[List[Tuple[str, int]]] = []

    def new(self) -> int:
        self.eps.append([])
        self.moves.append([])
        return len(self.eps) - 1

    def build(self, node: _Re) -> Tuple[int, int]:
        if node.op == "chr":
            s, f = self.new(), self.new()
            self.moves[s].append((node.args[0], f))
            return s, f
        if node.op == "cat":
            s = f = self.new()
            for part in node.args:
                ps, pf = self.build(part)
                self.eps[f].append(ps)
                f = pf
            return s, f
        if node.op == "alt":
            s, f = self.new(), self.new()
            for part in node.args:
                ps, pf = self.build(part)
                self.eps[s].append(ps)
                self.eps[pf].append(f)
            return s, f
        if node.op == "star":
            s, f = self.new(), self.new()
            ps, pf = self.build(node.args[0])
            self.eps[s] += [ps, f]
            self.eps[pf] += [ps, f]
            return s, f
        body, k = node.args
        return self.build(_Re("cat", (body,) * k)) if k else self.build(_Re("cat", ()))


def regex_to_nfa(text: str) -> NFA:
    """Thompson NFA of a textual regex, with epsilon moves removed."""
    th = _Thompson()
    start, final = th.build(parse_regex(text))
    n = len(th.eps)
    closure = []
    for s in range(n):
        seen = {s}
        stack = [s]
        while stack:
            x = stack.pop()
            for y in th.eps[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        closure.append(frozenset(seen))
    alphabet = tuple(sorted({ch for row in th.moves for ch, _ in row}))
    delta: Dict[Tuple[int, str], Set[int]] = {}
    for s in range(n):
        for x in closure[s]:
            for ch, y in th.moves[x]:
                delta.setdefault((s, ch), set()).update(closure[y])
    finals = frozenset(s for s in range(n) if final in closure[s])
    full = NFA(n, alphabet, {k: frozenset(v) for k, v in delta.items()}, frozenset(closure[start]), finals)
    return _materialize(full, cap=n + 1)
