"""Disjunctive normal form regexes and the rewrites the synthesizer explores.

A DNF regex is a list of sequences; a sequence alternates literal strings
and atoms, ``s0 A1 s1 ... An sn``; an atom is a starred DNF regex or an
opaque user-defined name.  Sequence order is significant: permutations in
DNF lenses index into it.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from enum import Enum

from . import automata
from .regex import (
    EMPTY,
    EPSILON,
    Concat,
    Empty,
    Or,
    Regex,
    Star,
    Str,
    Var,
    _Node,
    as_definitions,
    concat_all,
    or_all,
)


class NotAStar(TypeError):
    pass


class BadPath(IndexError):
    pass


class RuleInapplicable(ValueError):
    pass


class Atom(_Node):
    pass


@dataclass(frozen=True, eq=False)
class StarAtom(Atom):
    inner: DnfRegex


@dataclass(frozen=True, eq=False)
class VarAtom(Atom):
    name: str


@dataclass(frozen=True, eq=False)
class Sequence(_Node):
    strings: tuple[str, ...]
    atoms: tuple[Atom, ...] = ()

    def __post_init__(self):
        if len(self.strings) != len(self.atoms) + 1:
            raise ValueError("a sequence needs exactly one more string than atoms")


@dataclass(frozen=True, eq=False)
class DnfRegex(_Node):
    sequences: tuple[Sequence, ...] = ()

    def __len__(self) -> int:
        return len(self.sequences)


EMPTY_DNF = DnfRegex(())
EPSILON_SEQ = Sequence(("",))
EPSILON_DNF = DnfRegex((EPSILON_SEQ,))


def seq_concat(sq: Sequence, tq: Sequence) -> Sequence:
    """Concatenate two sequences, fusing the last string of one with the first of the other."""
    strings = sq.strings[:-1] + (sq.strings[-1] + tq.strings[0],) + tq.strings[1:]
    return Sequence(strings, sq.atoms + tq.atoms)


def dnf_concat(d1: DnfRegex, d2: DnfRegex) -> DnfRegex:
    return DnfRegex(tuple(seq_concat(sq, tq) for sq in d1.sequences for tq in d2.sequences))


def dnf_or(d1: DnfRegex, d2: DnfRegex) -> DnfRegex:
    return DnfRegex(d1.sequences + d2.sequences)


def atom_to_dnf(a: Atom) -> DnfRegex:
    return DnfRegex((Sequence(("", ""), (a,)),))


def to_dnf(r: Regex) -> DnfRegex:
    match r:
        case Str(s):
            return DnfRegex((Sequence((s,)),))
        case Empty():
            return EMPTY_DNF
        case Star(inner):
            return atom_to_dnf(StarAtom(to_dnf(inner)))
        case Concat(a, b):
            return dnf_concat(to_dnf(a), to_dnf(b))
        case Or(a, b):
            return dnf_or(to_dnf(a), to_dnf(b))
        case Var(name):
            return atom_to_dnf(VarAtom(name))
    raise TypeError(r)


def dnf_width(r: Regex) -> int:
    """Number of sequences ``to_dnf(r)`` would produce, without building them."""
    match r:
        case Str():
            return 1
        case Empty():
            return 0
        case Star() | Var():
            return 1
        case Concat(a, b):
            return dnf_width(a) * dnf_width(b)
        case Or(a, b):
            return dnf_width(a) + dnf_width(b)
    raise TypeError(r)


def to_regex(x: DnfRegex | Sequence | Atom) -> Regex:
    """Convert back to a plain regex: a right-nested Or of right-nested Concats.

    Empty literal strings are dropped, so ``to_dnf(to_regex(d)) == d``.
    """
    match x:
        case DnfRegex(seqs):
            return or_all(to_regex(sq) for sq in seqs) if seqs else EMPTY
        case Sequence(strings, atoms):
            parts: list[Regex] = []
            for k, s in enumerate(strings):
                if s:
                    parts.append(Str(s))
                if k < len(atoms):
                    parts.append(to_regex(atoms[k]))
            return concat_all(parts) if parts else EPSILON
        case StarAtom(inner):
            return Star(to_regex(inner))
        case VarAtom(name):
            return Var(name)
    raise TypeError(x)


def show(x: DnfRegex | Sequence | Atom) -> str:
    """Compact human-readable rendering, for diagnostics and demos."""
    match x:
        case DnfRegex(seqs):
            return "<" + " | ".join(show(sq) for sq in seqs) + ">"
        case Sequence(strings, atoms):
            parts = [repr(strings[0])]
            for a, s in zip(atoms, strings[1:]):
                parts += [show(a), repr(s)]
            return "[" + " ".join(parts) + "]"
        case StarAtom(inner):
            return show(inner) + "*"
        case VarAtom(name):
            return name
    raise TypeError(x)


# Rewrites -------------------------------------------------------------------


class Rule(Enum):
    UNROLL_L = "unroll-left"
    UNROLL_R = "unroll-right"
    SUBSTITUTE = "substitute"


Path = tuple[tuple[int, int], ...]


def unroll_star_left(a: Atom) -> DnfRegex:
    """D* becomes <[""]> + (D . D*)."""
    if not isinstance(a, StarAtom):
        raise NotAStar(a)
    return dnf_or(EPSILON_DNF, dnf_concat(a.inner, atom_to_dnf(a)))


def unroll_star_right(a: Atom) -> DnfRegex:
    """D* becomes <[""]> + (D* . D)."""
    if not isinstance(a, StarAtom):
        raise NotAStar(a)
    return dnf_or(EPSILON_DNF, dnf_concat(atom_to_dnf(a), a.inner))


def _replacement(a: Atom, rule: Rule, defs) -> DnfRegex:
    match rule:
        case Rule.UNROLL_L | Rule.UNROLL_R:
            if not isinstance(a, StarAtom):
                raise RuleInapplicable(f"{rule.value} needs a star atom, got {show(a)}")
            return unroll_star_left(a) if rule is Rule.UNROLL_L else unroll_star_right(a)
        case Rule.SUBSTITUTE:
            if not isinstance(a, VarAtom):
                raise RuleInapplicable(f"substitution needs a name atom, got {show(a)}")
            return to_dnf(as_definitions(defs)[a.name])
    raise TypeError(rule)


def splice(d: DnfRegex, i: int, j: int, replacement: DnfRegex) -> DnfRegex:
    """Replace atom j of sequence i by a DNF, distributing over the neighbours."""
    sq = d.sequences[i]
    prefix = DnfRegex((Sequence(sq.strings[: j + 1], sq.atoms[:j]),))
    suffix = DnfRegex((Sequence(sq.strings[j + 1 :], sq.atoms[j + 1 :]),))
    middle = dnf_concat(dnf_concat(prefix, replacement), suffix)
    return DnfRegex(d.sequences[:i] + middle.sequences + d.sequences[i + 1 :])


def _atom_at(d: DnfRegex, i: int, j: int) -> Atom:
    if not 0 <= i < len(d.sequences) or not 0 <= j < len(d.sequences[i].atoms):
        raise BadPath((i, j))
    return d.sequences[i].atoms[j]


def apply_rewrite_at(d: DnfRegex, path: Path, rule: Rule, defs: Mapping[str, Regex] | None = None) -> DnfRegex:
    """Apply one rewrite to the atom addressed by ``path``.

    A path is a non-empty tuple of (sequence, atom) index pairs; every pair
    but the last steps into the body of a star atom.
    """
    if not path:
        raise BadPath(path)
    (i, j), rest = path[0], path[1:]
    a = _atom_at(d, i, j)
    if not rest:
        return splice(d, i, j, _replacement(a, rule, defs))
    if not isinstance(a, StarAtom):
        raise BadPath(path)
    inner = apply_rewrite_at(a.inner, rest, rule, defs)
    sq = d.sequences[i]
    new_sq = Sequence(sq.strings, sq.atoms[:j] + (StarAtom(inner),) + sq.atoms[j + 1 :])
    return DnfRegex(d.sequences[:i] + (new_sq,) + d.sequences[i + 1 :])


def positions(d: DnfRegex, depth: int = 0, prefix: Path = ()) -> Iterator[tuple[Path, Atom, int]]:
    """Every atom occurrence as (path, atom, star depth), outer atoms first."""
    for i, sq in enumerate(d.sequences):
        for j, a in enumerate(sq.atoms):
            path = prefix + ((i, j),)
            yield path, a, depth
            if isinstance(a, StarAtom):
                yield from positions(a.inner, depth + 1, path)


# Star depths ----------------------------------------------------------------


def current_set(d: DnfRegex) -> frozenset[tuple[str, int]]:
    """(name, depth) for each name atom, depth counting the enclosing stars."""
    return frozenset((a.name, depth) for _, a, depth in positions(d) if isinstance(a, VarAtom))


def transitive_set(d: DnfRegex, defs: Mapping[str, Regex] | None = None) -> frozenset[tuple[str, int]]:
    """Pairs reachable from ``d`` by substitutions and star unrollings.

    Least fixpoint of: the current set; a name U at depth i contributes the
    current set of U's body shifted by i; and (U, i) yields (U, i-1) for
    i > 0, since unrolling an enclosing star exposes a shallower copy.
    """
    env = as_definitions(defs)
    bodies: dict[str, frozenset[tuple[str, int]]] = {}
    out = set(current_set(d))
    work = list(out)
    while work:
        name, depth = work.pop()
        if name not in bodies:
            bodies[name] = current_set(to_dnf(env[name]))
        new = {(v, depth + k) for v, k in bodies[name]}
        if depth > 0:
            new.add((name, depth - 1))
        for pair in new - out:
            out.add(pair)
            work.append(pair)
    return frozenset(out)


class DnfSplitter:
    """Splits strings along DNF structure using automata of the resolved pieces.

    Assumes the structure is unambiguous, so the first split found is the
    only one.
    """

    def __init__(self, defs: Mapping[str, Regex] | None = None):
        self.defs = as_definitions(defs)
        self._dfas: dict[object, automata.DFA] = {}

    def dfa(self, x: DnfRegex | Sequence | Atom) -> automata.DFA:
        hit = self._dfas.get(x)
        if hit is None:
            hit = automata.compile_dfa(self.defs.resolve(to_regex(x)))
            self._dfas[x] = hit
        return hit

    def member(self, x: DnfRegex | Sequence | Atom, s: str) -> bool:
        return self.dfa(x).accepts(s)

    def which_sequence(self, d: DnfRegex, s: str) -> int | None:
        for i, sq in enumerate(d.sequences):
            if self.member(sq, s):
                return i
        return None

    def split_sequence(self, sq: Sequence, s: str) -> list[str] | None:
        """The substrings matched by each atom, or None if s is not in L(sq)."""
        if not s.startswith(sq.strings[0]):
            return None
        dfas = [self.dfa(a) for a in sq.atoms]
        n = len(dfas)
        dead: set[tuple[int, int]] = set()

        def go(k: int, pos: int) -> list[str] | None:
            if k == n:
                return [] if pos == len(s) else None
            if (k, pos) in dead:
                return None
            lit = sq.strings[k + 1]
            for end in dfas[k].accepting_ends(s, pos):
                if s.startswith(lit, end):
                    rest = go(k + 1, end + len(lit))
                    if rest is not None:
                        return [s[pos:end]] + rest
            dead.add((k, pos))
            return None

        return go(0, len(sq.strings[0]))

    def split_star(self, a: StarAtom, s: str) -> list[str] | None:
        """Non-empty pieces of s, each in the star body's language."""
        body = self.dfa(a.inner)
        n = len(s)
        nexts: list[list[int]] = [[] for _ in range(n + 1)]
        ok = [False] * (n + 1)
        ok[n] = True
        for j in range(n - 1, -1, -1):
            nexts[j] = [k for k in body.accepting_ends(s, j) if k > j and ok[k]]
            ok[j] = bool(nexts[j])
        if not ok[0]:
            return None
        out, j = [], 0
        while j < n:
            k = nexts[j][0]
            out.append(s[j:k])
            j = k
        return out
