"""Position automata, subset-construction DFAs, and the language decisions built on them.

Every public decision takes Var-free regexes (or accepts a ``defs`` mapping
to resolve through).  DFAs are partial: a missing transition is the dead
state, so the alphabet is just the characters that occur in the regex.
"""

from __future__ import annotations

import time
from collections import deque
from collections.abc import Iterator, Mapping
from contextlib import contextmanager
from dataclasses import dataclass
from functools import cached_property, lru_cache

from .regex import Concat, Empty, Or, Regex, Star, Str, Var, resolve


class OutOfTime(RuntimeError):
    pass


_deadline: list[float] = []
_ticks = [0]


@contextmanager
def deadline(at: float) -> Iterator[None]:
    """Abort long automaton constructions with OutOfTime once ``at`` (monotonic) passes."""
    _deadline.append(at)
    try:
        yield
    finally:
        _deadline.pop()


def _tick() -> None:
    _ticks[0] += 1
    if _ticks[0] & 0xFFF == 0 and _deadline and time.monotonic() > _deadline[-1]:
        raise OutOfTime("automaton construction ran past the deadline")


@dataclass(frozen=True)
class DFA:
    delta: tuple[dict[str, int], ...]
    finals: frozenset[int]
    start: int = 0

    @property
    def alphabet(self) -> frozenset[str]:
        return frozenset(c for row in self.delta for c in row)

    def step(self, q: int | None, c: str) -> int | None:
        return None if q is None else self.delta[q].get(c)

    def run(self, s: str, q: int | None = None) -> int | None:
        q = self.start if q is None else q
        for c in s:
            q = self.delta[q].get(c)
            if q is None:
                return None
        return q

    def accepts(self, s: str) -> bool:
        return self.run(s) in self.finals

    def accepting_ends(self, s: str, i: int) -> list[int]:
        """Every j >= i with s[i:j] accepted."""
        out = []
        q: int | None = self.start
        if q in self.finals:
            out.append(i)
        for j in range(i, len(s)):
            q = self.delta[q].get(s[j])
            if q is None:
                break
            if q in self.finals:
                out.append(j + 1)
        return out

    @cached_property
    def distance(self) -> dict[int, int]:
        """Length of the shortest accepted suffix from each live state."""
        back: dict[int, set[int]] = {}
        for p, row in enumerate(self.delta):
            for q in row.values():
                back.setdefault(q, set()).add(p)
        dist = {q: 0 for q in self.finals}
        work = deque(self.finals)
        while work:
            q = work.popleft()
            for p in back.get(q, ()):
                if p not in dist:
                    dist[p] = dist[q] + 1
                    work.append(p)
        return dist

    @property
    def live(self) -> frozenset[int]:
        """States from which some final state is reachable."""
        return frozenset(self.distance)


class _Positions:
    """Position (Glushkov) automaton: one state per character occurrence, no epsilons."""

    def __init__(self) -> None:
        self.label: list[str] = []
        self.follow: list[set[int]] = []

    def pos(self, c: str) -> int:
        self.label.append(c)
        self.follow.append(set())
        return len(self.label) - 1

    def build(self, r: Regex) -> tuple[frozenset[int], frozenset[int], bool]:
        """(first, last, nullable) of r, recording follow edges as a side effect."""
        match r:
            case Str(s):
                if not s:
                    return frozenset(), frozenset(), True
                ps = [self.pos(c) for c in s]
                for a, b in zip(ps, ps[1:]):
                    self.follow[a].add(b)
                return frozenset(ps[:1]), frozenset(ps[-1:]), False
            case Empty():
                return frozenset(), frozenset(), False
            case Star(inner):
                first, last, _ = self.build(inner)
                for p in last:
                    self.follow[p] |= first
                return first, last, True
            case Concat(x, y):
                f1, l1, n1 = self.build(x)
                f2, l2, n2 = self.build(y)
                for p in l1:
                    self.follow[p] |= f2
                return (f1 | f2 if n1 else f1), (l1 | l2 if n2 else l2), n1 and n2
            case Or(x, y):
                f1, l1, n1 = self.build(x)
                f2, l2, n2 = self.build(y)
                return f1 | f2, l1 | l2, n1 or n2
            case Var(name):
                raise ValueError(f"resolve {name!r} before building an automaton")
        raise TypeError(r)


@lru_cache(maxsize=8192)
def compile_dfa(r: Regex) -> DFA:
    """Subset construction over the position automaton of a Var-free regex."""
    auto = _Positions()
    first, last, nullable = auto.build(r)
    start = -1
    label, follow = auto.label, auto.follow

    def succ(p: int):
        return first if p == start else follow[p]

    init = frozenset({start})
    index = {init: 0}
    order = [init]
    delta: list[dict[str, int]] = []
    i = 0
    while i < len(order):
        _tick()
        moves: dict[str, set[int]] = {}
        for p in order[i]:
            for q in succ(p):
                moves.setdefault(label[q], set()).add(q)
        row = {}
        for c in sorted(moves):
            nxt = frozenset(moves[c])
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row[c] = index[nxt]
        delta.append(row)
        i += 1
    finals = frozenset(k for k, st in enumerate(order) if (st & last) or (nullable and start in st))
    return DFA(tuple(delta), finals)


def _dfa(r: Regex, defs: Mapping[str, Regex] | None) -> DFA:
    return compile_dfa(resolve(r, defs) if defs is not None else r)


def matches(r: Regex, s: str, defs: Mapping[str, Regex] | None = None) -> bool:
    return _dfa(r, defs).accepts(s)


def _pairs_reach(a: DFA, b: DFA, starts, goal) -> bool:
    """BFS over the product of partial DFAs; true if some reachable pair satisfies goal."""
    seen = set(starts)
    work = deque(seen)
    while work:
        _tick()
        p, q = work.popleft()
        if goal(p, q):
            return True
        row_b = b.delta[q]
        for c, p2 in a.delta[p].items():
            q2 = row_b.get(c)
            if q2 is not None and (p2, q2) not in seen:
                seen.add((p2, q2))
                work.append((p2, q2))
    return False


def _meets(a: DFA, pa: int, b: DFA, pb: int) -> bool:
    return _pairs_reach(a, b, [(pa, pb)], lambda p, q: p in a.finals and q in b.finals)


def language_empty(r: Regex, defs: Mapping[str, Regex] | None = None) -> bool:
    return not _dfa(r, defs).finals


def languages_disjoint(r1: Regex, r2: Regex, defs: Mapping[str, Regex] | None = None) -> bool:
    a, b = _dfa(r1, defs), _dfa(r2, defs)
    return not _meets(a, a.start, b, b.start)


def first_overlap(regexes: list[Regex], defs: Mapping[str, Regex] | None = None) -> tuple[int, int] | None:
    """Some pair i < j whose languages intersect, or None if all are pairwise disjoint.

    One subset construction over the union, with each position tagged by its
    branch, instead of a product automaton per pair.
    """
    if defs is not None:
        regexes = [resolve(r, defs) for r in regexes]
    auto = _Positions()
    first: set[int] = set()
    last_of: dict[int, int] = {}
    nullable: list[int] = []
    for k, r in enumerate(regexes):
        f, last, n = auto.build(r)
        first |= f
        for p in last:
            last_of[p] = k
        if n:
            nullable.append(k)
    if len(nullable) > 1:
        return nullable[0], nullable[1]
    label, follow = auto.label, auto.follow

    def clash(st: frozenset[int]) -> tuple[int, int] | None:
        hit = sorted({last_of[p] for p in st if p in last_of})
        return (hit[0], hit[1]) if len(hit) > 1 else None

    # None stands for the start state, whose successors are the first positions
    seen: set[frozenset[int]] = set()
    work: list[frozenset[int] | None] = [None]
    while work:
        _tick()
        st = work.pop()
        moves: dict[str, set[int]] = {}
        for q in (first if st is None else (q for p in st for q in follow[p])):
            moves.setdefault(label[q], set()).add(q)
        for nxt in map(frozenset, moves.values()):
            if nxt not in seen:
                found = clash(nxt)
                if found:
                    return found
                seen.add(nxt)
                work.append(nxt)
    return None


def lang_equiv(r1: Regex, r2: Regex, defs: Mapping[str, Regex] | None = None) -> bool:
    a, b = _dfa(r1, defs), _dfa(r2, defs)
    seen: set[tuple[int | None, int | None]] = {(a.start, b.start)}
    work = deque(seen)
    while work:
        _tick()
        p, q = work.popleft()
        if (p in a.finals) != (q in b.finals):
            return False
        chars = set(a.delta[p] if p is not None else ()) | set(b.delta[q] if q is not None else ())
        for c in chars:
            nxt = (a.step(p, c), b.step(q, c))
            if nxt != (None, None) and nxt not in seen:
                seen.add(nxt)
                work.append(nxt)
    return True


def _predecessors(d: DFA) -> list[dict[str, list[int]]]:
    back: list[dict[str, list[int]]] = [{} for _ in d.delta]
    for p, row in enumerate(d.delta):
        for c, p2 in row.items():
            back[p2].setdefault(c, []).append(p)
    return back


def _coreachable_pairs(a: DFA, b: DFA) -> set[tuple[int, int]]:
    """Pairs (p, q) from which some word leads a to a final state and b to a final state."""
    back_a, back_b = _predecessors(a), _predecessors(b)
    seen = {(p, q) for p in a.finals for q in b.finals}
    work = list(seen)
    while work:
        _tick()
        p2, q2 = work.pop()
        ia, ib = back_a[p2], back_b[q2]
        if len(ib) < len(ia):
            ia, ib, swapped = ib, ia, True
        else:
            swapped = False
        for c, ps in ia.items():
            qs = ib.get(c)
            if qs is None:
                continue
            if swapped:
                ps, qs = qs, ps
            for p in ps:
                for q in qs:
                    if (p, q) not in seen:
                        seen.add((p, q))
                        work.append((p, q))
    return seen


@lru_cache(maxsize=8192)
def _good_states(r: Regex) -> frozenset[int]:
    """States q of r's DFA whose residual language meets L(r)."""
    b = compile_dfa(r)
    co = _coreachable_pairs(b, b)
    return frozenset(q for q, q0 in co if q0 == b.start)


@lru_cache(maxsize=8192)
def _unambig_concat(r1: Regex, r2: Regex) -> bool:
    a, b = compile_dfa(r1), compile_dfa(r2)
    if not a.finals or not b.finals:
        return True
    # v must lead from a final state of a back into a final state, and from the
    # start of b into a state whose residual language still meets L(b).
    good_b = _good_states(r2)
    starts = set()
    for f in a.finals:
        for c, p in a.delta[f].items():
            q = b.delta[b.start].get(c)
            if q is not None:
                starts.add((p, q))
    return not _pairs_reach(a, b, starts, lambda p, q: p in a.finals and q in good_b)


def unambig_concat(r1: Regex, r2: Regex, defs: Mapping[str, Regex] | None = None) -> bool:
    """True iff every word of L(r1)L(r2) splits in exactly one way."""
    if defs is not None:
        r1, r2 = resolve(r1, defs), resolve(r2, defs)
    return _unambig_concat(r1, r2)


def unambig_iter(r: Regex, defs: Mapping[str, Regex] | None = None) -> bool:
    """True iff every word of L(r)* factors uniquely into L(r) pieces."""
    if defs is not None:
        r = resolve(r, defs)
    if compile_dfa(r).accepts(""):
        return False
    return _unambig_concat(r, Star(r))


def _literals(r: Regex) -> list[str] | None:
    """The strings of an Or-tree of literals, or None if r has any other shape."""
    out, stack = [], [r]
    while stack:
        x = stack.pop()
        if isinstance(x, Or):
            stack += [x.left, x.right]
        elif isinstance(x, Str):
            out.append(x.s)
        else:
            return None
    return out


@lru_cache(maxsize=8192)
def _strongly_unambiguous(r: Regex) -> bool:
    lits = _literals(r)
    if lits is not None:
        return len(set(lits)) == len(lits)
    if not compile_dfa(r).finals:
        return True
    match r:
        case Str():
            return True
        case Concat(a, b):
            return _unambig_concat(a, b) and _strongly_unambiguous(a) and _strongly_unambiguous(b)
        case Or(a, b):
            return languages_disjoint(a, b) and _strongly_unambiguous(a) and _strongly_unambiguous(b)
        case Star(inner):
            return unambig_iter(inner) and _strongly_unambiguous(inner)
    raise TypeError(r)


def strongly_unambiguous(r: Regex, defs: Mapping[str, Regex] | None = None) -> bool:
    return _strongly_unambiguous(resolve(r, defs) if defs is not None else r)


def enumerate_strings(r: Regex, max_len: int, defs: Mapping[str, Regex] | None = None) -> set[str]:
    """All members of L(r) of length at most ``max_len``."""
    dfa = _dfa(r, defs)
    dist = dfa.distance
    out: set[str] = set()
    if dist.get(dfa.start, max_len + 1) > max_len:
        return out
    frontier = [(dfa.start, "")]
    for depth in range(max_len + 1):
        nxt = []
        left = max_len - depth - 1
        for q, w in frontier:
            if q in dfa.finals:
                out.add(w)
            # prefixes that cannot finish within the bound are dropped early
            for c, p in dfa.delta[q].items():
                if dist.get(p, left + 1) <= left:
                    nxt.append((p, w + c))
        frontier = nxt
    return out
