"""The rewriting rules and machine-checkable derivations.

Rules, read left to right as contractions (rule 5 as a shift)::

    R1   ((x)^(w+p))^(w+q)  ->  (x)^(w+pq)
    R2   (x^n)^(w+q)        ->  (x)^(w+nq)        n >= 2
    R3   (x)^(w+p)(x)^(w+q) ->  (x)^(w+p+q)
    R4L  x(x)^(w+q)         ->  (x)^(w+q+1)
    R4R  (x)^(w+q)x         ->  (x)^(w+q+1)
    R5   (xy)^(w+q)x        <-> x(yx)^(w+q)

A step is located by a path: every index but the last selects a limit atom
whose base is entered, the last one is the *anchor* inside the reached
sequence.  The anchor is always the index of the limit atom the rule is
about (the left one for R3).  Shifts carry the atom length of ``x``:
``shift-left`` rewrites ``(xy)^(w+q)x`` into ``x(yx)^(w+q)``, ``shift-right``
does the converse.

In A-mode every exponent produced by a rule is 0, which turns the rules into
their omega-term versions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

from .lyndon import primitive_root
from .term import Lim, Term, is_letter, parse_term, render_term

RULES = ("R1", "R2", "R3", "R4L", "R4R", "R5")
CONTRACTION, EXPANSION = "contraction", "expansion"
SHIFT_LEFT, SHIFT_RIGHT = "shift-left", "shift-right"
DIRECTIONS = (CONTRACTION, EXPANSION, SHIFT_LEFT, SHIFT_RIGHT)


class RuleError(ValueError):
    """The rule pattern does not match at the given position."""


@dataclass(frozen=True)
class RewriteStep:
    rule: str
    direction: str
    path: Tuple[int, ...]
    params: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown rule {self.rule!r}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {self.direction!r}")
        if (self.rule == "R5") != (self.direction in (SHIFT_LEFT, SHIFT_RIGHT)):
            raise ValueError(f"{self.rule} cannot be applied as a {self.direction}")
        if not self.path:
            raise ValueError("empty path")

    def moved(self, prefix: Tuple[int, ...], offset: int) -> "RewriteStep":
        path = prefix + (self.path[0] + offset,) + self.path[1:]
        return RewriteStep(self.rule, self.direction, path, self.params)

    def to_line(self) -> str:
        parts = [self.rule, self.direction, ".".join(map(str, self.path))]
        parts.extend(map(str, self.params))
        return " ".join(parts)

    @classmethod
    def from_line(cls, line: str) -> "RewriteStep":
        parts = line.split()
        if len(parts) < 3:
            raise ValueError(f"malformed step line {line!r}")
        path = tuple(int(x) for x in parts[2].split("."))
        return cls(parts[0], parts[1], path, tuple(int(x) for x in parts[3:]))


def _exp(value: int, mode: str) -> int:
    return 0 if mode == "A" else value


def _rewrite_at(seq: Term, step: RewriteStep, i: int, mode: str) -> Term:
    """Apply ``step`` with anchor ``i`` in ``seq``; returns the new sequence."""
    if not 0 <= i < len(seq) or is_letter(seq[i]):
        raise RuleError(f"no limit term at anchor {i}")
    lim = seq[i]
    base, q = lim.base, lim.q
    rule, d, params = step.rule, step.direction, step.params

    def need(count):
        if len(params) != count:
            raise RuleError(f"{rule} {d} takes {count} parameter(s), got {len(params)}")

    if mode == "A" and q != 0:
        raise RuleError("A-mode rules only apply to omega-terms")

    if rule == "R1":
        if d == CONTRACTION:
            need(0)
            if len(base) != 1 or is_letter(base[0]):
                raise RuleError("R1 contraction needs a limit term whose base is a limit term")
            inner = base[0]
            new = (Lim(inner.base, _exp(inner.q * q, mode)),)
        else:
            need(2)
            p, qq = params
            if mode == "A" and (p, qq) != (0, 0):
                raise RuleError("A-mode R1 expansion uses offsets 0")
            if mode != "A" and p * qq != q:
                raise RuleError(f"R1 expansion: {p}*{qq} != {q}")
            new = (Lim((Lim(base, p),), qq),)
        return seq[:i] + new + seq[i + 1:]

    if rule == "R2":
        if d == CONTRACTION:
            need(1)
            (n,) = params
            if n < 2:
                raise RuleError("R2 needs n >= 2")
            if len(base) % n:
                raise RuleError(f"R2 contraction with n={n} does not divide the base")
            root = base[:len(base) // n]
            if root * n != base:
                raise RuleError(f"base is not an {n}-th power")
            new = (Lim(root, _exp(n * q, mode)),)
        else:
            need(2)
            n, qq = params
            if n < 2:
                raise RuleError("R2 needs n >= 2")
            if mode == "A" and qq != 0:
                raise RuleError("A-mode R2 expansion uses offset 0")
            if mode != "A" and n * qq != q:
                raise RuleError(f"R2 expansion: {n}*{qq} != {q}")
            new = (Lim(base * n, qq),)
        return seq[:i] + new + seq[i + 1:]

    if rule == "R3":
        if d == CONTRACTION:
            need(0)
            if i + 1 >= len(seq) or is_letter(seq[i + 1]) or seq[i + 1].base != base:
                raise RuleError("R3 contraction needs two adjacent limit terms with equal bases")
            return seq[:i] + (Lim(base, _exp(q + seq[i + 1].q, mode)),) + seq[i + 2:]
        need(1)
        (p,) = params
        if mode == "A" and p != 0:
            raise RuleError("A-mode R3 expansion uses offset 0")
        return seq[:i] + (Lim(base, p), Lim(base, _exp(q - p, mode))) + seq[i + 1:]

    k = len(base)
    if rule == "R4L":
        need(0)
        if d == CONTRACTION:
            if i < k or seq[i - k:i] != base:
                raise RuleError("R4L contraction needs a copy of the base on the left")
            return seq[:i - k] + (Lim(base, _exp(q + 1, mode)),) + seq[i + 1:]
        return seq[:i] + base + (Lim(base, _exp(q - 1, mode)),) + seq[i + 1:]

    if rule == "R4R":
        need(0)
        if d == CONTRACTION:
            if seq[i + 1:i + 1 + k] != base:
                raise RuleError("R4R contraction needs a copy of the base on the right")
            return seq[:i] + (Lim(base, _exp(q + 1, mode)),) + seq[i + 1 + k:]
        return seq[:i] + (Lim(base, _exp(q - 1, mode)),) + base + seq[i + 1:]

    # R5
    need(1)
    (m,) = params
    if not 1 <= m < k:
        raise RuleError(f"R5 split {m} must leave both factors nonempty")
    if d == SHIFT_LEFT:
        x, y = base[:m], base[m:]
        if seq[i + 1:i + 1 + m] != x:
            raise RuleError("shift-left needs the base prefix right after the limit term")
        return seq[:i] + x + (Lim(y + x, q),) + seq[i + 1 + m:]
    y, x = base[:k - m], base[k - m:]
    if i < m or seq[i - m:i] != x:
        raise RuleError("shift-right needs the base suffix right before the limit term")
    return seq[:i - m] + (Lim(x + y, q),) + x + seq[i + 1:]


def apply_rule(t: Term, step: RewriteStep, mode: str = "S") -> Term:
    """Return ``t`` rewritten by ``step``; raises :class:`RuleError` on mismatch."""

    def go(seq: Term, path: Tuple[int, ...]) -> Term:
        if len(path) == 1:
            return _rewrite_at(seq, step, path[0], mode)
        j = path[0]
        if not 0 <= j < len(seq) or is_letter(seq[j]):
            raise RuleError(f"path index {j} does not select a limit term")
        lim = seq[j]
        return seq[:j] + (Lim(go(lim.base, path[1:]), lim.q),) + seq[j + 1:]

    return go(tuple(t), step.path)


def invert_step(t: Term, step: RewriteStep, mode: str = "S") -> RewriteStep:
    """The step that undoes ``step`` when applied to ``apply_rule(t, step)``."""
    seq = t
    for j in step.path[:-1]:
        seq = seq[j].base
    i = step.path[-1]
    pre = step.path[:-1]
    lim = seq[i]
    k = len(lim.base)
    rule, d = step.rule, step.direction
    if rule == "R5":
        m = step.params[0]
        if d == SHIFT_LEFT:
            return RewriteStep(rule, SHIFT_RIGHT, pre + (i + m,), (m,))
        return RewriteStep(rule, SHIFT_LEFT, pre + (i - m,), (m,))
    if d == CONTRACTION:
        if rule == "R1":
            inner = lim.base[0]
            return RewriteStep(rule, EXPANSION, pre + (i,), (inner.q, lim.q))
        if rule == "R2":
            return RewriteStep(rule, EXPANSION, pre + (i,), (step.params[0], lim.q))
        if rule == "R3":
            return RewriteStep(rule, EXPANSION, pre + (i,), (lim.q,))
        if rule == "R4L":
            return RewriteStep(rule, EXPANSION, pre + (i - k,))
        return RewriteStep(rule, EXPANSION, pre + (i,))
    # expansions
    if rule == "R2":
        return RewriteStep(rule, CONTRACTION, pre + (i,), (step.params[0],))
    if rule == "R4L":
        return RewriteStep(rule, CONTRACTION, pre + (i + k,))
    return RewriteStep(rule, CONTRACTION, pre + (i,))


def _sequences(t: Term, prefix=()):
    yield prefix, t
    for j, a in enumerate(t):
        if not is_letter(a):
            yield from _sequences(a.base, prefix + (j,))


def find_applications(t: Term, rule: str, direction: str, mode: str = "S") -> List[RewriteStep]:
    """Every step of ``rule``/``direction`` that applies to ``t``, outermost first.

    R1, R2 and R3 expansions are parameterized by free integers and cannot
    be enumerated; asking for them raises ``ValueError``.
    """
    if direction == EXPANSION and rule in ("R1", "R2", "R3"):
        raise ValueError(f"{rule} expansions are parameterized by free integers")
    found = []
    for prefix, seq in _sequences(tuple(t)):
        for i, a in enumerate(seq):
            if is_letter(a):
                continue
            candidates: Iterable[RewriteStep]
            if rule == "R2":
                root, n = primitive_root(a.base)
                candidates = [RewriteStep(rule, direction, prefix + (i,), (d,))
                              for d in range(2, n + 1) if n % d == 0]
            elif rule == "R5":
                dirs = (SHIFT_LEFT, SHIFT_RIGHT) if direction not in (SHIFT_LEFT, SHIFT_RIGHT) else (direction,)
                candidates = [RewriteStep(rule, dd, prefix + (i,), (m,))
                              for dd in dirs for m in range(1, len(a.base))]
            else:
                candidates = [RewriteStep(rule, direction, prefix + (i,))]
            for step in candidates:
                try:
                    _rewrite_at(seq, step, i, mode)
                except RuleError:
                    continue
                found.append(step)
    return found


# ---------------------------------------------------------------------------
# recording derivations

class Recorder:
    """Collects steps emitted in a local coordinate frame.

    ``shift(s)`` gives the frame of a factor starting at atom ``s``;
    ``descend(i)`` the frame of the base of the limit atom at ``i``.
    """

    active = True

    def __init__(self, sink: Optional[List[RewriteStep]] = None, prefix: Tuple[int, ...] = (), offset: int = 0):
        self.sink = [] if sink is None else sink
        self.prefix = prefix
        self.offset = offset

    def emit(self, step: RewriteStep) -> None:
        self.sink.append(step.moved(self.prefix, self.offset))

    def extend(self, steps: Iterable[RewriteStep]) -> None:
        for s in steps:
            self.emit(s)

    def shift(self, s: int) -> "Recorder":
        if s == 0:
            return self
        return Recorder(self.sink, self.prefix, self.offset + s)

    def descend(self, i: int) -> "Recorder":
        return Recorder(self.sink, self.prefix + (self.offset + i,), 0)


class NullRecorder(Recorder):
    active = False

    def __init__(self):
        self.sink = []
        self.prefix = ()
        self.offset = 0

    def emit(self, step):
        pass

    def extend(self, steps):
        pass

    def shift(self, s):
        return self

    def descend(self, i):
        return self


NULL = NullRecorder()


# ---------------------------------------------------------------------------
# traces

@dataclass(frozen=True)
class DerivationTrace:
    start: Term
    steps: Tuple[RewriteStep, ...]
    end: Term
    mode: str = "S"

    def to_text(self) -> str:
        lines = [f"# mode {self.mode}", render_term(self.start)]
        lines.extend(s.to_line() for s in self.steps)
        lines.append(render_term(self.end))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, mode: Optional[str] = None) -> "DerivationTrace":
        """Parse ``to_text`` output; a ``# mode X`` header sets the mode unless given."""
        for ln in text.splitlines():
            head = ln.strip().split()
            if mode is None and head[:2] == ["#", "mode"] and len(head) == 3:
                mode = head[2]
        mode = mode or "S"
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if len(lines) < 2:
            raise ValueError("a trace needs a start and an end line")
        steps = tuple(RewriteStep.from_line(ln) for ln in lines[1:-1])
        return cls(parse_term(lines[0]), steps, parse_term(lines[-1]), mode)


class Verification(NamedTuple):
    ok: bool
    failed_at: Optional[int] = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def replay(start: Term, steps: Sequence[RewriteStep], mode: str = "S") -> List[Term]:
    terms = [tuple(start)]
    for s in steps:
        terms.append(apply_rule(terms[-1], s, mode))
    return terms


def verify_derivation(trace: DerivationTrace) -> Verification:
    """Replay ``trace``; fails at the first step whose pattern does not match."""
    t = tuple(trace.start)
    for k, s in enumerate(trace.steps):
        try:
            t = apply_rule(t, s, trace.mode)
        except RuleError as exc:
            return Verification(False, k, str(exc))
    if t != tuple(trace.end):
        return Verification(False, len(trace.steps), "replay does not reach the recorded end term")
    return Verification(True)


def inverse_steps(start: Term, steps: Sequence[RewriteStep], mode: str = "S") -> List[RewriteStep]:
    """Steps leading from the end of a derivation back to ``start``."""
    terms = replay(start, steps, mode)
    return [invert_step(terms[k], steps[k], mode) for k in reversed(range(len(steps)))]
