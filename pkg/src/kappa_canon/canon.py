"""Canonicalization of omega-power terms in modes S (all finite semigroups) and A (aperiodic).

Every transformation below is carried out by :func:`~.rewrite.apply_rule`
and reported to a :class:`~.rewrite.Recorder`, so a requested trace is a
derivation by construction.  Functions named ``_x`` work on a local atom
sequence and take ``(seq, rec, mode)``; the recorder's frame is that
sequence.

The procedure runs rank by rank.  A first phase brings a term to
semi-canonical form: canonicalize the bases, reduce every maximal-rank limit term, then
canonicalize what is left between them.  A second phase finishes: primitive bases,
Lyndon bases, absorption of adjacent base copies, merging of equal
neighbours and the left-to-right repair of crucial portions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from .lyndon import is_lyndon, is_prefix, is_suffix, minimal_conjugate, primitive_root
from .rewrite import (
    CONTRACTION,
    EXPANSION,
    NULL,
    SHIFT_LEFT,
    SHIFT_RIGHT,
    DerivationTrace,
    Recorder,
    RewriteStep,
    apply_rule,
)
from .term import (
    Lim,
    Term,
    expansion,
    is_letter,
    is_omega_term,
    limit_positions,
    map_exponents,
    primary_decomposition,
    rank,
    term_length,
)

MODES = ("S", "A")


class CanonError(RuntimeError):
    """An internal invariant of the reduction failed."""


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be 'S' or 'A', got {mode!r}")


def _run(seq: Term, steps: Sequence[RewriteStep], rec: Recorder, mode: str) -> Term:
    for s in steps:
        seq = apply_rule(seq, s, mode)
        rec.emit(s)
    return seq


def _do(seq: Term, rule: str, direction: str, path, rec: Recorder, mode: str, params=()) -> Term:
    step = RewriteStep(rule, direction, tuple(path), tuple(params))
    seq = apply_rule(seq, step, mode)
    rec.emit(step)
    return seq


# ---------------------------------------------------------------------------
# predicates

_CANON_MEMO: Dict[Term, bool] = {}


def _is_canonical_s(t: Term) -> bool:
    hit = _CANON_MEMO.get(t)
    if hit is not None:
        return hit
    result = _check_canonical(t)
    _CANON_MEMO[t] = result
    return result


def _check_canonical(t: Term) -> bool:
    r = rank(t)
    if r == 0:
        return True
    dec = primary_decomposition(t)
    lims = dec.limits
    prev_gamma = dec.gamma0
    for k, (q, delta, gamma) in enumerate(lims):
        if not is_lyndon(delta):
            return False
        if is_suffix(delta, prev_gamma):
            return False
        if k + 1 < len(lims):
            nxt = lims[k + 1][1]
            ext = gamma
            # longer extensions only lengthen a window already past |delta|
            while term_length(ext) < term_length(delta):
                ext = ext + nxt
            if is_prefix(delta, ext):
                return False
        elif is_prefix(delta, gamma):
            return False
        prev_gamma = gamma
    return _is_canonical_s(expansion(t, 2))


def is_canonical(t: Term, mode: str = "S") -> bool:
    """Recursive check of the four canonical-form conditions."""
    _check_mode(mode)
    t = tuple(t)
    if mode == "A" and not is_omega_term(t):
        return False
    return _is_canonical_s(t)


def is_semi_canonical(t: Term) -> bool:
    t = tuple(t)
    if rank(t) <= 1:
        return True
    return _is_canonical_s(expansion(t, 2))


def is_circular_canonical(t: Term) -> bool:
    t = tuple(t)
    return _is_canonical_s(t + t)


# ---------------------------------------------------------------------------
# the reduction

_CACHE: Dict[Tuple[str, Term], Tuple[Term, Tuple[RewriteStep, ...]]] = {}


def clear_caches() -> None:
    _CACHE.clear()
    _CANON_MEMO.clear()


def _canonical(seq: Term, rec: Recorder, mode: str) -> Term:
    if rank(seq) == 0:
        return seq
    key = (mode, seq)
    hit = _CACHE.get(key)
    if hit is None:
        local = Recorder()
        out = _canon_uncached(seq, local, mode)
        hit = (out, tuple(local.sink))
        _CACHE[key] = hit
    rec.extend(hit[1])
    return hit[0]


def _canon_uncached(seq: Term, rec: Recorder, mode: str) -> Term:
    seq = _step1(seq, rec, mode)
    if rank(seq) == 0:
        return seq
    return _step2(seq, rec, mode)


def _step1(seq: Term, rec: Recorder, mode: str) -> Term:
    while True:
        r = rank(seq)
        if r <= 1:
            return seq
        # canonical bases
        for i in limit_positions(seq, r):
            lim = seq[i]
            base = _canonical(lim.base, rec.descend(i), mode)
            if base != lim.base:
                seq = seq[:i] + (Lim(base, lim.q),) + seq[i + 1:]
        if rank(seq) < r:
            continue
        # reduce each maximal-rank limit term
        shift = 0
        for i in limit_positions(seq, r):
            j = i + shift
            piece = _reduce_limit(seq[j], rec.shift(j), mode)
            seq = seq[:j] + piece + seq[j + 1:]
            shift += len(piece) - 1
        if rank(seq) < r:
            continue
        # canonical primary subterms between the limit terms
        pos = limit_positions(seq, r)
        bounds = [0] + [p for i in pos for p in (i, i + 1)] + [len(seq)]
        segments = list(zip(bounds[::2], bounds[1::2]))
        for a, b in reversed(segments):
            if b > a:
                seg = _canonical(seq[a:b], rec.shift(a), mode)
                seq = seq[:a] + seg + seq[b:]
        return seq


def _step2(seq: Term, rec: Recorder, mode: str) -> Term:
    r = rank(seq)
    if r == 0:
        return seq
    # primitive bases
    for i in limit_positions(seq, r):
        _, n = primitive_root(seq[i].base)
        if n > 1:
            seq = _do(seq, "R2", CONTRACTION, (i,), rec, mode, (n,))
    # Lyndon bases: <q g1 g2>  ->  g1 <q-1 g2 g1> g2
    for i in reversed(limit_positions(seq, r)):
        base = seq[i].base
        if not is_lyndon(base):
            _, split = minimal_conjugate(base)
            seq = _do(seq, "R4L", EXPANSION, (i,), rec, mode)
            seq = _do(seq, "R5", SHIFT_RIGHT, (i + len(base),), rec, mode, (len(split.right),))
    # absorb adjacent copies, left copies first, scanning left to right
    k = 0
    while True:
        pos = limit_positions(seq, r)
        if k >= len(pos):
            break
        i = pos[k]
        base = seq[i].base
        size = len(base)
        while i >= size and seq[i - size:i] == base:
            seq = _do(seq, "R4L", CONTRACTION, (i,), rec, mode)
            i -= size
        while seq[i + 1:i + 1 + size] == base:
            seq = _do(seq, "R4R", CONTRACTION, (i,), rec, mode)
        k += 1
    # merge neighbours with equal bases
    merged = True
    while merged:
        merged = False
        pos = limit_positions(seq, r)
        for a, b in zip(pos, pos[1:]):
            if b == a + 1 and seq[a].base == seq[b].base:
                seq = _do(seq, "R3", CONTRACTION, (a,), rec, mode)
                merged = True
                break
    # crucial portions, left to right
    k = 0
    while True:
        pos = limit_positions(seq, r)
        if k + 1 >= len(pos):
            break
        j1, j2 = pos[k], pos[k + 1]
        d1, d2 = seq[j1].base, seq[j2].base
        gamma = seq[j1 + 1:j2]
        ell = 0
        while term_length(gamma) + ell * term_length(d2) < term_length(d1):
            ell += 1
        if is_prefix(d1, gamma + d2 * ell):
            for _ in range(ell):
                seq = _do(seq, "R4L", EXPANSION, (j2,), rec, mode)
                j2 += len(d2)
            while seq[j1 + 1:j1 + 1 + len(d1)] == d1:
                seq = _do(seq, "R4R", CONTRACTION, (j1,), rec, mode)
        k += 1
    return seq


def _canon_pieces(seq: Term, lengths: Sequence[int], rec: Recorder, mode: str) -> Term:
    """Canonical form of a concatenation of canonical pieces, junction by junction."""
    lengths = [n for n in lengths if n]
    if not lengths:
        return seq
    acc = lengths[0]
    for n in lengths[1:]:
        head = _product(seq[:acc + n], acc, rec, mode)
        seq = head + seq[acc + n:]
        acc = len(head)
    return seq


def _canon_gamma(gamma: Term, cut: Optional[int], rec: Recorder, mode: str) -> Term:
    if cut is None:
        return _canonical(gamma, rec, mode)
    return _canon_pieces(gamma, [cut, len(gamma) - cut], rec, mode)


def _normalize_crucial(seq: Term, rec: Recorder, mode: str, cut: Optional[int] = None) -> Term:
    """Canonical form of ``<q1 d1> g <q2 d2>`` (bases Lyndon, circular canonical)."""
    i = rank(seq)
    gamma = seq[1:-1]
    if gamma:
        gamma = _canon_gamma(gamma, cut, rec.shift(1), mode)
        seq = seq[:1] + gamma + seq[-1:]
    if i > 1:
        d1, d2 = seq[0].base, seq[-1].base
        seq = _do(seq, "R4R", EXPANSION, (0,), rec, mode)
        seq = _do(seq, "R4L", EXPANSION, (len(seq) - 1,), rec, mode)
        middle = _canon_pieces(seq[1:-1], [len(d1), len(gamma), len(d2)], rec.shift(1), mode)
        seq = seq[:1] + middle + seq[-1:]
    return _step2(seq, rec, mode)


def _normalize_edge(seq: Term, side: str, rec: Recorder, mode: str, cut: Optional[int] = None) -> Term:
    """Canonical form of an initial ``g <q d>`` or final ``<q d> g`` portion."""
    i = rank(seq)
    if side == "initial":
        gamma = seq[:-1]
        if gamma:
            gamma = _canon_gamma(gamma, cut, rec, mode)
            seq = gamma + seq[-1:]
        if i > 1:
            d = seq[-1].base
            seq = _do(seq, "R4L", EXPANSION, (len(seq) - 1,), rec, mode)
            middle = _canon_pieces(seq[:-1], [len(gamma), len(d)], rec, mode)
            seq = middle + seq[-1:]
    else:
        gamma = seq[1:]
        if gamma:
            gamma = _canon_gamma(gamma, cut, rec.shift(1), mode)
            seq = seq[:1] + gamma
        if i > 1:
            d = seq[0].base
            seq = _do(seq, "R4R", EXPANSION, (0,), rec, mode)
            middle = _canon_pieces(seq[1:], [len(d), len(gamma)], rec.shift(1), mode)
            seq = seq[:1] + middle
    return _step2(seq, rec, mode)


def _product(seq: Term, split: int, rec: Recorder, mode: str) -> Term:
    """Canonical form of ``seq[:split] + seq[split:]``, both halves canonical."""
    left, right = seq[:split], seq[split:]
    if not left or not right:
        return seq
    ra, rb = rank(left), rank(right)
    if ra == 0 and rb == 0:
        return seq
    if ra < rb:
        e = split + limit_positions(right, rb)[0] + 1
        head = _normalize_edge(seq[:e], "initial", rec, mode, cut=split)
        return head + seq[e:]
    s = limit_positions(left, ra)[-1]
    if ra > rb:
        tail = _normalize_edge(seq[s:], "final", rec.shift(s), mode, cut=split - s - 1)
        return seq[:s] + tail
    e = split + limit_positions(right, rb)[0] + 1
    mid = _normalize_crucial(seq[s:e], rec.shift(s), mode, cut=split - s - 1)
    return seq[:s] + mid + seq[e:]


def _smallest_prime(n: int) -> int:
    d = 2
    while d * d <= n:
        if n % d == 0:
            return d
        d += 1
    return n


def _reduce_limit(lim: Lim, rec: Recorder, mode: str) -> Term:
    """Semi-canonical form of ``(rho)^(w+q)`` for a canonical base of rank >= 1."""
    rho, q = lim.base, lim.q
    dec = primary_decomposition(rho)
    if len(dec.limits) > 1:
        return _unfold(lim, rec, mode)
    g0 = dec.gamma0
    q1, d1, g1 = dec.limits[0]
    circ = (Lim(d1, q1),) + g1 + g0 + (Lim(d1, q1),)
    reduced = _normalize_crucial(circ, NULL, mode, cut=len(g1))
    if len(limit_positions(reduced, rank(circ))) == 1:
        if not g0 and not g1:
            return _do((lim,), "R1", CONTRACTION, (0,), rec, mode)
        return _fact_limit(lim, g0, q1, d1, g1, rec, mode)
    seq = (lim,)
    if q in (-1, 1):
        seq = _do(seq, "R4R", EXPANSION, (0,), rec, mode)
        head = _reduce_limit(seq[0], rec, mode)
        seq = head + rho
        top = limit_positions(head, rank(head))
        if len(top) != 1:
            raise CanonError("expected a single top limit term after unfolding")
        j = top[0] + 1
        tail = _canon_pieces(seq[j:], [len(head) - j, len(rho)], rec.shift(j), mode)
        return seq[:j] + tail
    p = _smallest_prime(abs(q)) if q else 2
    seq = _do(seq, "R2", EXPANSION, (0,), rec, mode, (p, q // p))
    tau = _canon_pieces(rho * p, [len(rho)] * p, rec.descend(0), mode)
    if len(limit_positions(tau, rank(tau))) < 2:
        raise CanonError("power of a type II base kept lt-length 1")
    return _unfold(Lim(tau, seq[0].q), rec, mode)


def _fact_limit(lim: Lim, g0: Term, q1: int, d1: Term, g1: Term, rec: Recorder, mode: str) -> Term:
    """``(g0 (d1)^(w+q1) g1)^(w+q)`` with a type I circular portion becomes ``g0 (d1)^(w+r) g1``.

    The base is conjugated to ``(d1)^(w+q1-2) d1 g1 g0 d1``, whose tail
    canonicalizes to ``d1^P``; after absorbing it the base is a single limit
    term and rule 1 applies.  With ``c = P - 2`` this gives
    ``r = q(q1 + c) - c``.
    """
    n0, size = len(g0), len(d1)
    seq: Term = (lim,)
    seq = _do(seq, "R4L", EXPANSION, (0, n0), rec, mode)
    seq = _do(seq, "R4L", EXPANSION, (0,), rec, mode)
    seq = _do(seq, "R5", SHIFT_RIGHT, (len(seq) - 1,), rec, mode, (1 + len(g1),))
    at = n0 + size
    seq = _do(seq, "R4R", EXPANSION, (at, 0), rec, mode)
    big = seq[at]
    tail = _canon_pieces(big.base[1:], [size, len(g1), n0, size], rec.descend(at).shift(1), mode)
    power = len(tail) // size
    if tail != d1 * power:
        raise CanonError("type I circular portion whose middle is not a power of its base")
    seq = seq[:at] + (Lim(big.base[:1] + tail, big.q),) + seq[at + 1:]
    for _ in range(power):
        seq = _do(seq, "R4R", CONTRACTION, (at, 0), rec, mode)
    seq = _do(seq, "R1", CONTRACTION, (at,), rec, mode)
    seq = _do(seq, "R4L", CONTRACTION, (at,), rec, mode)
    return _do(seq, "R3", CONTRACTION, (n0,), rec, mode)


def _unfold(lim: Lim, rec: Recorder, mode: str) -> Term:
    """``(rho)^(w+q)`` with lt-length(rho) > 1 becomes ``g0 <q1 d1> <q-1 beta> g1 ... gn``."""
    rho = lim.base
    pos = limit_positions(rho, rank(rho))
    dec = primary_decomposition(rho)
    size = len(rho)
    m = pos[0] + 1
    gn = dec.limits[-1][2]
    seq: Term = (lim,)
    seq = _do(seq, "R4L", EXPANSION, (0,), rec, mode)
    seq = _do(seq, "R4R", EXPANSION, (size,), rec, mode)
    seq = _do(seq, "R5", SHIFT_LEFT, (size,), rec, mode, (m,))
    s0, e0 = pos[-1], size + m
    circ = _normalize_crucial(seq[s0:e0], rec.shift(s0), mode, cut=len(gn))
    seq = seq[:s0] + circ + seq[e0:]
    at = s0 + len(circ)
    big = seq[at]
    s1 = pos[-1] - m
    inner = _normalize_crucial(big.base[s1:], rec.descend(at).shift(s1), mode, cut=len(gn))
    if inner != circ:
        raise CanonError("circular portion normalized differently in two places")
    seq = seq[:at] + (Lim(big.base[:s1] + inner, big.q),) + seq[at + 1:]
    return _do(seq, "R4L", CONTRACTION, (at,), rec, mode)


# ---------------------------------------------------------------------------
# public API

def _prepare(t: Term, mode: str) -> Term:
    _check_mode(mode)
    t = tuple(t)
    if mode == "A":
        t = map_exponents(t, lambda q: 0)
    return t


class TypeI(NamedTuple):
    r1: int
    delta1: Term


class TypeII(NamedTuple):
    r1: int
    delta1: Term
    epsilon: Term
    r2: int
    delta2: Term


CrucialResult = Union[TypeI, TypeII]


def normalize_crucial_portion(q1: int, delta1: Term, gamma: Term, q2: int, delta2: Term,
                              mode: str = "S") -> CrucialResult:
    seq = _prepare((Lim(tuple(delta1), q1),) + tuple(gamma) + (Lim(tuple(delta2), q2),), mode)
    _check_portion_bases([seq[0].base, seq[-1].base], tuple(gamma))
    out = _normalize_crucial(seq, NULL, mode)
    pos = limit_positions(out, rank(seq))
    if len(pos) == 1:
        return TypeI(out[0].q, out[0].base)
    a, b = pos
    return TypeII(out[a].q, out[a].base, out[a + 1:b], out[b].q, out[b].base)


def normalize_edge_portion(gamma: Term, q: int, delta: Term, side: str, mode: str = "S") -> Tuple[Term, int]:
    if side not in ("initial", "final"):
        raise ValueError("side must be 'initial' or 'final'")
    lim = (Lim(tuple(delta), q),)
    seq = tuple(gamma) + lim if side == "initial" else lim + tuple(gamma)
    seq = _prepare(seq, mode)
    _check_portion_bases([tuple(delta)], tuple(gamma))
    out = _normalize_edge(seq, side, NULL, mode)
    (i,) = limit_positions(out, rank(seq))
    eps = out[:i] if side == "initial" else out[i + 1:]
    return eps, out[i].q


def _check_portion_bases(bases, gamma) -> None:
    ranks = {rank(d) for d in bases}
    if len(ranks) != 1:
        raise ValueError("portion bases must have equal rank")
    for d in bases:
        if not is_lyndon(d) or not is_circular_canonical(d):
            raise ValueError("portion bases must be Lyndon and circular canonical")
    if gamma and rank(gamma) > ranks.pop():
        raise ValueError("middle factor has too high a rank")


def reduce_limit_term(q: int, rho: Term, mode: str = "S") -> Term:
    rho = _prepare(rho, mode)
    if mode == "A":
        q = 0
    if rank(rho) < 1 or not is_canonical(rho):
        raise ValueError("reduce_limit_term needs a canonical base of rank >= 1")
    return _reduce_limit(Lim(rho, q), NULL, mode)


def step1(t: Term, mode: str = "S") -> Term:
    t = _prepare(t, mode)
    if rank(t) == 0:
        raise ValueError("step1 needs a term of rank >= 1")
    return _step1(t, NULL, mode)


def step2(t: Term, mode: str = "S") -> Term:
    t = _prepare(t, mode)
    if not is_semi_canonical(t):
        raise ValueError("step2 needs a semi-canonical term")
    return _step2(t, NULL, mode)


def product_canonical(alpha: Term, beta: Term, mode: str = "S") -> Term:
    alpha, beta = _prepare(alpha, mode), _prepare(beta, mode)
    if not (is_canonical(alpha) and is_canonical(beta)):
        raise ValueError("product_canonical needs canonical factors")
    return _product(alpha + beta, len(alpha), NULL, mode)


@dataclass(frozen=True)
class CanonReport:
    input: Term
    output: Term
    mode: str
    trace: Optional[DerivationTrace] = None


def canonicalize(t: Term, mode: str = "S", want_trace: bool = False) -> CanonReport:
    """Canonical form of ``t``; in A-mode all offsets are first collapsed to 0.

    With ``want_trace`` the report carries a derivation from the (collapsed)
    input to the output.
    """
    start = _prepare(t, mode)
    rec = Recorder() if want_trace else NULL
    out = _canonical(start, rec, mode)
    trace = DerivationTrace(start, tuple(rec.sink), out, mode) if want_trace else None
    return CanonReport(tuple(t), out, mode, trace)


def canon(t: Term, mode: str = "S") -> Term:
    return canonicalize(t, mode).output


def decide_equal(alpha: Term, beta: Term, mode: str = "S") -> bool:
    return canon(alpha, mode) == canon(beta, mode)
