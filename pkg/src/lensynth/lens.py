"""Bijective string lenses: terms, typing and evaluation.

A lens ``l : R <=> S`` denotes a bijection between L(R) and L(S).  ``get``
runs it left to right, ``put`` right to left.  Typing checks the
unambiguity side conditions that make both directions functions.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass

from . import automata
from . import regex as rx
from .regex import Regex, _Node, as_definitions


class Lens(_Node):
    pass


@dataclass(frozen=True, eq=False)
class Const(Lens):
    s1: str
    s2: str


@dataclass(frozen=True, eq=False)
class Iterate(Lens):
    l: Lens


@dataclass(frozen=True, eq=False)
class Concat(Lens):
    l1: Lens
    l2: Lens


@dataclass(frozen=True, eq=False)
class Swap(Lens):
    """Concatenate the sources, emit the targets in reverse order."""

    l1: Lens
    l2: Lens


@dataclass(frozen=True, eq=False)
class Or(Lens):
    l1: Lens
    l2: Lens


@dataclass(frozen=True, eq=False)
class Compose(Lens):
    """Run l1 then l2 on get; the seam types must denote the same language."""

    l1: Lens
    l2: Lens


@dataclass(frozen=True, eq=False)
class Identity(Lens):
    r: Regex


@dataclass(frozen=True, eq=False)
class Named(Lens):
    """Reference to a lens registered in a :class:`LensLibrary`."""

    name: str


@dataclass(frozen=True)
class LensType:
    source: Regex
    target: Regex


# Errors ---------------------------------------------------------------------


class LensTypeError(TypeError):
    def __init__(self, message: str, term: Lens):
        from .syntax import print_lens

        super().__init__(f"{message}: {print_lens(term)}")
        self.term = term


class AmbiguousConcat(LensTypeError):
    pass


class OverlappingOr(LensTypeError):
    pass


class AmbiguousIteration(LensTypeError):
    pass


class ComposeTypeMismatch(LensTypeError):
    pass


class AmbiguousIdentity(LensTypeError):
    pass


class UnknownLens(LookupError):
    pass


class InputNotInSource(ValueError):
    pass


class InputNotInTarget(ValueError):
    pass


# Library --------------------------------------------------------------------


@dataclass(frozen=True)
class LibraryEntry:
    name: str
    lens: Lens
    source: Regex
    target: Regex


class LensLibrary:
    """Named lenses available to later terms and later synthesis tasks."""

    def __init__(self, entries: list[LibraryEntry] | None = None):
        self._entries: dict[str, LibraryEntry] = {}
        for e in entries or ():
            self._entries[e.name] = e

    def add(self, name: str, lens: Lens, source: Regex, target: Regex) -> LibraryEntry:
        if name in self._entries:
            raise ValueError(f"lens {name!r} already registered")
        entry = LibraryEntry(name, lens, source, target)
        self._entries[name] = entry
        return entry

    def __getitem__(self, name: str) -> LibraryEntry:
        try:
            return self._entries[name]
        except KeyError:
            raise UnknownLens(name) from None

    def __contains__(self, name: object) -> bool:
        return name in self._entries

    def __iter__(self) -> Iterator[LibraryEntry]:
        return iter(self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)


EMPTY_LIBRARY = LensLibrary()


# Typing and evaluation ------------------------------------------------------


class LensEngine:
    """Typing and evaluation against one definitions environment and library.

    Derived types and automata are cached per term, so reuse one engine when
    evaluating the same lens many times.
    """

    def __init__(self, defs: Mapping[str, Regex] | None = None, library: LensLibrary | None = None):
        self.defs = as_definitions(defs)
        self.library = library if library is not None else EMPTY_LIBRARY
        self._types: dict[Lens, LensType] = {}
        self._checked: set[Lens] = set()
        self._dfas: dict[Regex, automata.DFA] = {}

    def _r(self, r: Regex) -> Regex:
        return self.defs.resolve(r)

    def _dfa(self, r: Regex) -> automata.DFA:
        hit = self._dfas.get(r)
        if hit is None:
            hit = self._dfas[r] = automata.compile_dfa(self._r(r))
        return hit

    def types(self, l: Lens) -> LensType:
        """Structural (source, target) without checking side conditions."""
        hit = self._types.get(l)
        if hit is not None:
            return hit
        match l:
            case Const(a, b):
                out = LensType(rx.Str(a), rx.Str(b))
            case Identity(r):
                out = LensType(r, r)
            case Concat(l1, l2) | Swap(l1, l2):
                t1, t2 = self.types(l1), self.types(l2)
                tgt = rx.Concat(t1.target, t2.target) if isinstance(l, Concat) else rx.Concat(t2.target, t1.target)
                out = LensType(rx.Concat(t1.source, t2.source), tgt)
            case Or(l1, l2):
                t1, t2 = self.types(l1), self.types(l2)
                out = LensType(rx.Or(t1.source, t2.source), rx.Or(t1.target, t2.target))
            case Iterate(l1):
                t1 = self.types(l1)
                out = LensType(rx.Star(t1.source), rx.Star(t1.target))
            case Compose(l1, l2):
                out = LensType(self.types(l1).source, self.types(l2).target)
            case Named(name):
                e = self.library[name]
                out = LensType(e.source, e.target)
            case _:
                raise TypeError(l)
        self._types[l] = out
        return out

    def typecheck(self, l: Lens) -> LensType:
        if l not in self._checked:
            self._check(l)
            self._checked.add(l)
        return self.types(l)

    def _check(self, l: Lens) -> None:
        r = self._r
        match l:
            case Const():
                pass
            case Identity(reg):
                if isinstance(reg, rx.Var):
                    self.defs[reg.name]
                elif not automata.strongly_unambiguous(r(reg)):
                    raise AmbiguousIdentity("identity over an ambiguous regex", l)
            case Concat(l1, l2) | Swap(l1, l2):
                t1, t2 = self.typecheck(l1), self.typecheck(l2)
                if not automata.unambig_concat(r(t1.source), r(t2.source)):
                    raise AmbiguousConcat("sources are not unambiguously concatenable", l)
                first, second = (t1, t2) if isinstance(l, Concat) else (t2, t1)
                if not automata.unambig_concat(r(first.target), r(second.target)):
                    raise AmbiguousConcat("targets are not unambiguously concatenable", l)
            case Or():
                # a whole Or-tree at once: pairwise disjoint branches make every subtree valid
                nodes, branches, stack = [], [], [l]
                while stack:
                    x = stack.pop()
                    if isinstance(x, Or) and x not in self._checked:
                        nodes.append(x)
                        stack += [x.l2, x.l1]
                    else:
                        branches.append(x)
                ts = [self.typecheck(b) for b in branches]
                if automata.first_overlap([r(t.source) for t in ts]) is not None:
                    raise OverlappingOr("branch sources overlap", l)
                if automata.first_overlap([r(t.target) for t in ts]) is not None:
                    raise OverlappingOr("branch targets overlap", l)
                self._checked.update(nodes)
            case Iterate(l1):
                t1 = self.typecheck(l1)
                if not automata.unambig_iter(r(t1.source)):
                    raise AmbiguousIteration("source is not unambiguously iterable", l)
                if not automata.unambig_iter(r(t1.target)):
                    raise AmbiguousIteration("target is not unambiguously iterable", l)
            case Compose(l1, l2):
                t1, t2 = self.typecheck(l1), self.typecheck(l2)
                if not automata.lang_equiv(r(t1.target), r(t2.source)):
                    raise ComposeTypeMismatch("middle types differ", l)
            case Named(name):
                self.library[name]
            case _:
                raise TypeError(l)

    # evaluation

    def member_source(self, l: Lens, s: str) -> bool:
        return self._dfa(self.types(l).source).accepts(s)

    def member_target(self, l: Lens, t: str) -> bool:
        return self._dfa(self.types(l).target).accepts(t)

    def _split(self, left: Regex, right: Regex, s: str) -> int:
        right_dfa = self._dfa(right)
        for k in self._dfa(left).accepting_ends(s, 0):
            if right_dfa.accepts(s[k:]):
                return k
        raise ValueError(f"cannot split {s!r}")

    def _factor(self, piece: Regex, s: str) -> list[str]:
        dfa = self._dfa(piece)
        n = len(s)
        ok = [False] * (n + 1)
        ok[n] = True
        nexts: list[list[int]] = [[] for _ in range(n + 1)]
        for j in range(n - 1, -1, -1):
            nexts[j] = [k for k in dfa.accepting_ends(s, j) if k > j and ok[k]]
            ok[j] = bool(nexts[j])
        if not ok[0]:
            raise ValueError(f"cannot factor {s!r}")
        out, j = [], 0
        while j < n:
            k = nexts[j][0]
            out.append(s[j:k])
            j = k
        return out

    def get(self, l: Lens, s: str) -> str:
        if not self.member_source(l, s):
            raise InputNotInSource(f"{s!r} is not in the source language")
        return self._get(l, s)

    def put(self, l: Lens, t: str) -> str:
        if not self.member_target(l, t):
            raise InputNotInTarget(f"{t!r} is not in the target language")
        return self._put(l, t)

    def _get(self, l: Lens, s: str) -> str:
        match l:
            case Const(_, b):
                return b
            case Identity():
                return s
            case Concat(l1, l2) | Swap(l1, l2):
                k = self._split(self.types(l1).source, self.types(l2).source, s)
                x, y = self._get(l1, s[:k]), self._get(l2, s[k:])
                return x + y if isinstance(l, Concat) else y + x
            case Or(l1, l2):
                return self._get(l1, s) if self.member_source(l1, s) else self._get(l2, s)
            case Iterate(l1):
                return "".join(self._get(l1, p) for p in self._factor(self.types(l1).source, s))
            case Compose(l1, l2):
                return self._get(l2, self._get(l1, s))
            case Named(name):
                return self._get(self.library[name].lens, s)
        raise TypeError(l)

    def _put(self, l: Lens, t: str) -> str:
        match l:
            case Const(a, _):
                return a
            case Identity():
                return t
            case Concat(l1, l2):
                k = self._split(self.types(l1).target, self.types(l2).target, t)
                return self._put(l1, t[:k]) + self._put(l2, t[k:])
            case Swap(l1, l2):
                k = self._split(self.types(l2).target, self.types(l1).target, t)
                return self._put(l1, t[k:]) + self._put(l2, t[:k])
            case Or(l1, l2):
                return self._put(l1, t) if self.member_target(l1, t) else self._put(l2, t)
            case Iterate(l1):
                return "".join(self._put(l1, p) for p in self._factor(self.types(l1).target, t))
            case Compose(l1, l2):
                return self._put(l1, self._put(l2, t))
            case Named(name):
                return self._put(self.library[name].lens, t)
        raise TypeError(l)


def typecheck_lens(l: Lens, defs: Mapping[str, Regex] | None = None, library: LensLibrary | None = None) -> LensType:
    return LensEngine(defs, library).typecheck(l)


def lens_get(l: Lens, s: str, defs: Mapping[str, Regex] | None = None, library: LensLibrary | None = None) -> str:
    return LensEngine(defs, library).get(l, s)


def lens_put(l: Lens, t: str, defs: Mapping[str, Regex] | None = None, library: LensLibrary | None = None) -> str:
    return LensEngine(defs, library).put(l, t)


def invert(l: Lens, library: LensLibrary | None = None) -> Lens:
    """The lens with get and put exchanged.  Library references are inlined."""
    match l:
        case Const(a, b):
            return Const(b, a)
        case Identity():
            return l
        case Concat(l1, l2):
            return Concat(invert(l1, library), invert(l2, library))
        case Swap(l1, l2):
            return Swap(invert(l2, library), invert(l1, library))
        case Or(l1, l2):
            return Or(invert(l1, library), invert(l2, library))
        case Iterate(l1):
            return Iterate(invert(l1, library))
        case Compose(l1, l2):
            return Compose(invert(l2, library), invert(l1, library))
        case Named(name):
            lib = library if library is not None else EMPTY_LIBRARY
            return invert(lib[name].lens, library)
    raise TypeError(l)
