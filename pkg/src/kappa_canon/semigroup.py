"""Finite semigroups as multiplication tables, and evaluation of terms in them.

Evaluation is vectorized over assignments: for an alphabet of ``k`` letters
and a semigroup of order ``n`` there are ``n**k`` assignments, and assignment
number ``j`` sends the ``i``-th letter (in sorted order) to digit ``i`` of
``j`` written in base ``n``, least significant first.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .term import Lim, Term, is_letter, letters

MAX_ENUM_ORDER = 3


class SemigroupError(ValueError):
    def __init__(self, msg, triple=None):
        super().__init__(msg)
        self.triple = triple


class IndexPeriod(NamedTuple):
    index: int
    period: int


@dataclass(eq=False)
class FiniteSemigroup:
    table: np.ndarray
    names: Optional[Tuple[str, ...]] = None
    label: str = ""
    _omega: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)
    _cycles: Optional[List[Tuple[List[int], IndexPeriod]]] = field(default=None, repr=False)

    @property
    def order(self) -> int:
        return self.table.shape[0]

    def mul(self, x: int, y: int) -> int:
        return int(self.table[x, y])

    def __repr__(self):
        return f"FiniteSemigroup({self.label or 'order ' + str(self.order)})"

    def name_of(self, x: int) -> str:
        return self.names[x] if self.names else str(x)

    def to_json(self) -> dict:
        data = {"order": self.order, "table": self.table.tolist()}
        if self.names:
            data["names"] = list(self.names)
        return data

    def _powers(self):
        if self._cycles is None:
            out = []
            for s in range(self.order):
                pw = [s]
                seen = {s: 0}
                while True:
                    nxt = self.mul(pw[-1], s)
                    if nxt in seen:
                        i = seen[nxt] + 1
                        out.append((pw, IndexPeriod(i, len(pw) + 1 - i)))
                        break
                    seen[nxt] = len(pw)
                    pw.append(nxt)
            self._cycles = out
        return self._cycles

    def index_period(self, s: int) -> IndexPeriod:
        return self._powers()[s][1]

    def omega_table(self, q: int) -> np.ndarray:
        tab = self._omega.get(q)
        if tab is None:
            tab = np.array([self._omega_power(s, q) for s in range(self.order)], dtype=self.table.dtype)
            self._omega[q] = tab
        return tab

    def _omega_power(self, s: int, q: int) -> int:
        powers, (i, p) = self._powers()[s]
        m = -(-i // p) * p
        e = m + q % p
        # s^e with e >= i reduces into the cycle
        e = i + (e - i) % p
        return powers[e - 1]


def _as_table(rows) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise SemigroupError(f"table is not an integer matrix: {exc}") from None
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise SemigroupError("table must be a non-empty square matrix")
    n = arr.shape[0]
    if arr.min() < 0 or arr.max() >= n:
        raise SemigroupError("table entries must lie in range(order)")
    return arr


def associativity_witness(table: np.ndarray) -> Optional[Tuple[int, int, int]]:
    """First triple ``(x, y, z)`` with ``(xy)z != x(yz)``, or None."""
    lhs = table[table]                   # lhs[x, y, z] = table[table[x, y], z]
    rhs = table[:, table]                # rhs[x, y, z] = table[x, table[y, z]]
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        return tuple(int(v) for v in bad[0])
    return None


def make_semigroup(rows, names=None, label="") -> FiniteSemigroup:
    table = _as_table(rows)
    bad = associativity_witness(table)
    if bad is not None:
        raise SemigroupError(f"table is not associative at {bad}", triple=bad)
    if names is not None:
        names = tuple(str(x) for x in names)
        if len(names) != table.shape[0]:
            raise SemigroupError("names must have one entry per element")
    return FiniteSemigroup(table, names, label)


def load_semigroup(data) -> FiniteSemigroup:
    """Build a semigroup from ``{"order", "table", "names"?}`` (dict or JSON text)."""
    if isinstance(data, (str, bytes)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise SemigroupError(f"invalid JSON: {exc}") from None
    if not isinstance(data, Mapping) or "table" not in data:
        raise SemigroupError("semigroup data needs a 'table' field")
    sg = make_semigroup(data["table"], data.get("names"), data.get("label", ""))
    if "order" in data and data["order"] != sg.order:
        raise SemigroupError(f"declared order {data['order']} does not match table size {sg.order}")
    return sg


def read_semigroup(path) -> FiniteSemigroup:
    with open(path) as fh:
        return load_semigroup(fh.read())


def omega_power(S: FiniteSemigroup, s: int, q: int) -> int:
    return int(S.omega_table(q)[s])


def index_period(S: FiniteSemigroup, s: int) -> IndexPeriod:
    return S.index_period(s)


def is_aperiodic(S: FiniteSemigroup) -> bool:
    return all(S.index_period(s).period == 1 for s in range(S.order))


# ---------------------------------------------------------------------------
# evaluation

def _eval_seq(S: FiniteSemigroup, t: Term, env: Dict[str, np.ndarray], memo) -> np.ndarray:
    hit = memo.get(t)
    if hit is not None:
        return hit
    acc = None
    for atom in t:
        if is_letter(atom):
            try:
                v = env[atom]
            except KeyError:
                raise KeyError(f"letter {atom!r} is not assigned") from None
        else:
            v = S.omega_table(atom.q)[_eval_seq(S, atom.base, env, memo)]
        acc = v if acc is None else S.table[acc, v]
    if acc is None:
        raise ValueError("cannot evaluate the empty term")
    memo[t] = acc
    return acc


def assignment_grid(S: FiniteSemigroup, alphabet: Sequence[str]) -> Dict[str, np.ndarray]:
    n = S.order
    total = n ** len(alphabet)
    idx = np.arange(total)
    return {a: (idx // n ** i) % n for i, a in enumerate(alphabet)}


def eval_all(S: FiniteSemigroup, t: Term, alphabet: Optional[Sequence[str]] = None) -> np.ndarray:
    """Values of ``t`` under every assignment of ``alphabet`` (default: letters of t)."""
    t = tuple(t)
    alphabet = sorted(letters(t)) if alphabet is None else list(alphabet)
    env = assignment_grid(S, alphabet)
    out = _eval_seq(S, t, env, {})
    return np.broadcast_to(out, (S.order ** len(alphabet),))


def eval_term(S: FiniteSemigroup, t: Term, assignment: Mapping[str, int]) -> int:
    env = {}
    for a, v in assignment.items():
        if not 0 <= int(v) < S.order:
            raise ValueError(f"value {v} for {a!r} is outside the semigroup")
        env[a] = np.array(int(v))
    return int(_eval_seq(S, tuple(t), env, {}))


def satisfies(S: FiniteSemigroup, alpha: Term, beta: Term) -> bool:
    alphabet = sorted(set(letters(tuple(alpha))) | set(letters(tuple(beta))))
    return bool(np.array_equal(eval_all(S, alpha, alphabet), eval_all(S, beta, alphabet)))


# ---------------------------------------------------------------------------
# families

def enumerate_semigroups(max_order: int = MAX_ENUM_ORDER) -> Iterator[FiniteSemigroup]:
    """Every associative table of order ``1..max_order`` (labelled, not up to isomorphism)."""
    if max_order > MAX_ENUM_ORDER:
        raise ValueError(f"exhaustive enumeration is capped at order {MAX_ENUM_ORDER}")
    for n in range(1, max_order + 1):
        for t in _associative_tables(n):
            yield FiniteSemigroup(t, None, f"order-{n} table {t.ravel().tolist()}")


_TABLES: Dict[int, np.ndarray] = {}


def _associative_tables(n: int) -> np.ndarray:
    if n not in _TABLES:
        cells = n * n
        codes = np.arange(n ** cells)
        tabs = np.stack([(codes // n ** k) % n for k in range(cells)], axis=1).reshape(-1, n, n)
        ok = np.ones(len(tabs), dtype=bool)
        rows = np.arange(len(tabs))[:, None]
        for x, y, z in itertools.product(range(n), repeat=3):
            lhs = tabs[rows[:, 0], tabs[:, x, y], z]
            rhs = tabs[rows[:, 0], x, tabs[:, y, z]]
            ok &= lhs == rhs
        _TABLES[n] = tabs[ok]
    return _TABLES[n]


def cyclic_group(k: int) -> FiniteSemigroup:
    return make_semigroup([[(i + j) % k for j in range(k)] for i in range(k)], label=f"Z_{k}")


def full_transformations(n: int) -> FiniteSemigroup:
    maps = list(itertools.product(range(n), repeat=n))
    index = {f: i for i, f in enumerate(maps)}
    # f·g applies f first, then g
    rows = [[index[tuple(g[f[x]] for x in range(n))] for g in maps] for f in maps]
    names = ["".join(map(str, f)) for f in maps]
    return make_semigroup(rows, names, label=f"T_{n}")


def monogenic(index: int, period: int) -> FiniteSemigroup:
    size = index + period - 1

    def red(e):
        return e if e < index + period else index + (e - index) % period

    rows = [[red(a + b) - 1 for b in range(1, size + 1)] for a in range(1, size + 1)]
    names = [f"s^{e}" for e in range(1, size + 1)]
    return make_semigroup(rows, names, label=f"C({index},{period})")


def brandt_b2() -> FiniteSemigroup:
    elems = [None, (1, 1), (1, 2), (2, 1), (2, 2)]

    def mul(x, y):
        if x is None or y is None or x[1] != y[0]:
            return None
        return (x[0], y[1])

    rows = [[elems.index(mul(x, y)) for y in elems] for x in elems]
    return make_semigroup(rows, ["0", "e11", "e12", "e21", "e22"], label="B_2")


def flip_flop() -> FiniteSemigroup:
    # identity 1 plus two right zeros a, b
    return make_semigroup([[x if y == 0 else y for y in range(3)] for x in range(3)], ["1", "a", "b"], label="U_2")


def left_zero(n: int) -> FiniteSemigroup:
    return make_semigroup([[x] * n for x in range(n)], label=f"L_{n}")


def curated_family() -> List[FiniteSemigroup]:
    fam = [cyclic_group(k) for k in range(1, 7)]
    fam += [full_transformations(n) for n in range(1, 4)]
    fam.append(brandt_b2())
    fam += [monogenic(i, p) for i in range(1, 4) for p in range(1, 4)]
    fam.append(flip_flop())
    return fam


# ---------------------------------------------------------------------------
# separation

@dataclass(frozen=True)
class Separator:
    semigroup: FiniteSemigroup
    assignment: Dict[str, int]
    left: int
    right: int

    def describe(self) -> str:
        S = self.semigroup
        pairs = ", ".join(f"{a}->{S.name_of(v)}" for a, v in self.assignment.items())
        return f"{S.label or 'order ' + str(S.order)}: {pairs} gives {S.name_of(self.left)} vs {S.name_of(self.right)}"


def separation_candidates(aperiodic_only: bool = False) -> Iterator[FiniteSemigroup]:
    for S in itertools.chain(curated_family(), enumerate_semigroups()):
        if not aperiodic_only or is_aperiodic(S):
            yield S


def find_separator(alpha: Term, beta: Term, budget: Optional[int] = None,
                   mode: str = "S", candidates: Optional[Iterable[FiniteSemigroup]] = None) -> Optional[Separator]:
    """First (semigroup, assignment) found giving different values, or None.

    None is inconclusive unless the canonical forms coincide, in which case
    the search is skipped altogether.  ``budget`` caps the number of
    semigroups tried; in A-mode only aperiodic semigroups are tried.
    """
    from .canon import canon

    alpha, beta = tuple(alpha), tuple(beta)
    if canon(alpha, mode) == canon(beta, mode):
        return None
    alphabet = sorted(set(letters(alpha)) | set(letters(beta)))
    if candidates is None:
        candidates = separation_candidates(aperiodic_only=(mode == "A"))
    for k, S in enumerate(candidates):
        if budget is not None and k >= budget:
            break
        va, vb = eval_all(S, alpha, alphabet), eval_all(S, beta, alphabet)
        diff = np.flatnonzero(va != vb)
        if len(diff):
            j = int(diff[0])
            env = assignment_grid(S, alphabet)
            assignment = {a: int(env[a][j]) for a in alphabet}
            return Separator(S, assignment, int(va[j]), int(vb[j]))
    return None
