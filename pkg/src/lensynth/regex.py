"""Regular expression terms, definitions and unique parsing.

Regexes are immutable trees over single-character strings.  Named
abbreviations (``Var``) are bound in a :class:`Definitions` environment and
must be resolved before any language-level question is asked; the
automaton-backed decisions live in :mod:`lensynth.automata`.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass


class UnboundVariable(LookupError):
    def __init__(self, name: str):
        super().__init__(f"unbound regex name {name!r}")
        self.name = name


class NoParse(ValueError):
    """The string is not a member of the regex's language."""


class AmbiguityViolation(AssertionError):
    """Two distinct parses exist for a regex that was assumed unambiguous."""


class _Node:
    """Hash memoization shared by the immutable term classes.

    Terms are deep trees that serve as dictionary keys all over the
    synthesizer, so the structural hash is computed once per node.
    """

    __slots__ = ()

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            _fill_hashes(self)
            h = self.__dict__["_hash"]
        return h

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other):
            return NotImplemented
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if isinstance(a, _Node):
                if type(a) is not type(b) or hash(a) != hash(b):
                    return False
                stack.extend((getattr(a, f), getattr(b, f)) for f in a.__dataclass_fields__)
            elif isinstance(a, tuple) and isinstance(b, tuple):
                if len(a) != len(b):
                    return False
                stack.extend(zip(a, b))
            elif a != b:
                return False
        return True


def _children(x) -> list:
    """Unhashed nodes directly below x, looking through tuples of nodes."""
    out, stack = [], [getattr(x, f) for f in x.__dataclass_fields__]
    while stack:
        v = stack.pop()
        if isinstance(v, tuple):
            stack.extend(v)
        elif isinstance(v, _Node) and "_hash" not in v.__dict__:
            out.append(v)
    return out


def _fill_hashes(root: _Node) -> None:
    # post-order with an explicit stack: long Or and Concat chains would
    # otherwise overflow the interpreter's recursion limit
    stack = [(root, False)]
    while stack:
        x, ready = stack.pop()
        if "_hash" in x.__dict__:
            continue
        if ready:
            fields = tuple(getattr(x, f) for f in x.__dataclass_fields__)
            x.__dict__["_hash"] = hash((type(x).__name__,) + fields)
        else:
            stack.append((x, True))
            stack.extend((c, False) for c in _children(x))


class Regex(_Node):
    pass


@dataclass(frozen=True, eq=False)
class Str(Regex):
    s: str


@dataclass(frozen=True, eq=False)
class Empty(Regex):
    pass


@dataclass(frozen=True, eq=False)
class Star(Regex):
    inner: Regex


@dataclass(frozen=True, eq=False)
class Concat(Regex):
    left: Regex
    right: Regex


@dataclass(frozen=True, eq=False)
class Or(Regex):
    left: Regex
    right: Regex


@dataclass(frozen=True, eq=False)
class Var(Regex):
    name: str


EPSILON = Str("")
EMPTY = Empty()


def concat_all(parts: Iterable[Regex]) -> Regex:
    """Right-nested concatenation; the empty product is epsilon."""
    parts = list(parts)
    if not parts:
        return EPSILON
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Concat(p, out)
    return out


def or_all(parts: Iterable[Regex]) -> Regex:
    """Right-nested alternation; the empty sum is the empty language."""
    parts = list(parts)
    if not parts:
        return EMPTY
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out)
    return out


def char_class(chars: Iterable[str]) -> Regex:
    """Expand a character set, in the given order, to an Or-chain of Strs."""
    seen: list[str] = []
    for c in chars:
        if c not in seen:
            seen.append(c)
    return or_all(Str(c) for c in seen)


def var_names(r: Regex) -> set[str]:
    out: set[str] = set()
    stack = [r]
    while stack:
        x = stack.pop()
        match x:
            case Var(name):
                out.add(name)
            case Star(inner):
                stack.append(inner)
            case Concat(a, b) | Or(a, b):
                stack.extend((a, b))
    return out


def size(r: Regex) -> int:
    match r:
        case Star(inner):
            return 1 + size(inner)
        case Concat(a, b) | Or(a, b):
            return 1 + size(a) + size(b)
    return 1


class Definitions(Mapping[str, Regex]):
    """Ordered, acyclic, immutable name -> regex bindings.

    A body may only mention names bound before it.  Resolution results are
    memoized per environment.
    """

    def __init__(self, bindings: Mapping[str, Regex] | Iterable[tuple[str, Regex]] = ()):
        items = bindings.items() if isinstance(bindings, Mapping) else bindings
        self._map: dict[str, Regex] = {}
        for name, body in items:
            if name in self._map:
                raise ValueError(f"duplicate definition of {name!r}")
            for v in var_names(body):
                if v not in self._map:
                    raise UnboundVariable(v)
            self._map[name] = body
        self._resolved: dict[Regex, Regex] = {}

    def __getitem__(self, name: str) -> Regex:
        try:
            return self._map[name]
        except KeyError:
            raise UnboundVariable(name) from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __repr__(self) -> str:
        return f"Definitions({self._map!r})"

    def extend(self, name: str, body: Regex) -> Definitions:
        return Definitions(list(self._map.items()) + [(name, body)])

    def resolve(self, r: Regex) -> Regex:
        hit = self._resolved.get(r)
        if hit is not None:
            return hit
        match r:
            case Var(name):
                out = self.resolve(self[name])
            case Star(inner):
                out = Star(self.resolve(inner))
            case Concat(a, b):
                out = Concat(self.resolve(a), self.resolve(b))
            case Or(a, b):
                out = Or(self.resolve(a), self.resolve(b))
            case _:
                out = r
        self._resolved[r] = out
        return out


NO_DEFS = Definitions()


def as_definitions(defs: Mapping[str, Regex] | None) -> Definitions:
    if defs is None:
        return NO_DEFS
    if isinstance(defs, Definitions):
        return defs
    return Definitions(defs)


def resolve(r: Regex, defs: Mapping[str, Regex] | None = None) -> Regex:
    """Replace every Var by its recursively resolved body."""
    return as_definitions(defs).resolve(r)


# Parse trees ---------------------------------------------------------------


class ParseTree(_Node):
    pass


@dataclass(frozen=True, eq=False)
class Leaf(ParseTree):
    s: str


@dataclass(frozen=True, eq=False)
class StarNode(ParseTree):
    children: tuple[ParseTree, ...]


@dataclass(frozen=True, eq=False)
class ConcatNode(ParseTree):
    left: ParseTree
    right: ParseTree


@dataclass(frozen=True, eq=False)
class OrNode(ParseTree):
    branch: str  # "L" or "R"
    child: ParseTree


@dataclass(frozen=True, eq=False)
class VarNode(ParseTree):
    name: str
    child: ParseTree


def flatten(t: ParseTree) -> str:
    match t:
        case Leaf(s):
            return s
        case StarNode(children):
            return "".join(flatten(c) for c in children)
        case ConcatNode(a, b):
            return flatten(a) + flatten(b)
        case OrNode(_, c) | VarNode(_, c):
            return flatten(c)
    raise TypeError(t)


def _length_bounds(r: Regex, defs: Definitions, memo: dict) -> tuple[int, int | None]:
    """(min, max) member length; max is None when unbounded.  Empty gives (inf-ish, 0)."""
    if r in memo:
        return memo[r]
    match r:
        case Str(s):
            out = (len(s), len(s))
        case Empty():
            out = (1 << 30, 0)
        case Star(inner):
            lo, hi = _length_bounds(inner, defs, memo)
            out = (0, 0 if hi == 0 or lo >= 1 << 30 else None)
        case Concat(a, b):
            (la, ha), (lb, hb) = _length_bounds(a, defs, memo), _length_bounds(b, defs, memo)
            if la >= 1 << 30 or lb >= 1 << 30:
                out = (1 << 30, 0)
            else:
                out = (la + lb, None if ha is None or hb is None else ha + hb)
        case Or(a, b):
            (la, ha), (lb, hb) = _length_bounds(a, defs, memo), _length_bounds(b, defs, memo)
            out = (min(la, lb), None if ha is None or hb is None else max(ha, hb))
        case Var(name):
            out = _length_bounds(defs[name], defs, memo)
    memo[r] = out
    return out


def parse_unique(r: Regex, s: str, defs: Mapping[str, Regex] | None = None) -> ParseTree:
    """Return the unique parse tree of ``s`` against ``r``.

    Memoized backtracking over every split point.  At most two parses are
    ever materialized per subproblem, which is enough to detect ambiguity.
    Pieces of a star are required to be non-empty.
    """
    env = as_definitions(defs)
    memo: dict[tuple[int, int, int], list[ParseTree]] = {}
    bounds: dict = {}

    def fits(x: Regex, n: int) -> bool:
        lo, hi = _length_bounds(x, env, bounds)
        return lo <= n and (hi is None or n <= hi)

    def go(x: Regex, i: int, j: int) -> list[ParseTree]:
        key = (id(x), i, j)
        hit = memo.get(key)
        if hit is not None:
            return hit
        out: list[ParseTree] = []
        if fits(x, j - i):
            match x:
                case Str(lit):
                    if s[i:j] == lit:
                        out.append(Leaf(lit))
                case Or(a, b):
                    out.extend(OrNode("L", t) for t in go(a, i, j))
                    out.extend(OrNode("R", t) for t in go(b, i, j)[: 2 - len(out)])
                case Concat(a, b):
                    for k in range(i, j + 1):
                        lefts = go(a, i, k)
                        if not lefts:
                            continue
                        for rt in go(b, k, j):
                            for lt in lefts:
                                out.append(ConcatNode(lt, rt))
                        if len(out) >= 2:
                            break
                case Star(inner):
                    if i == j:
                        out.append(StarNode(()))
                    else:
                        for k in range(i + 1, j + 1):
                            heads = go(inner, i, k)
                            if not heads:
                                continue
                            for rest in go(x, k, j):
                                for h in heads:
                                    out.append(StarNode((h,) + rest.children))
                            if len(out) >= 2:
                                break
                case Var(name):
                    out.extend(VarNode(name, t) for t in go(env[name], i, j))
        out = out[:2]
        memo[key] = out
        return out

    found = go(r, 0, len(s))
    if not found:
        raise NoParse(f"{s!r} does not match")
    if len(found) > 1:
        raise AmbiguityViolation(f"{s!r} has more than one parse")
    return found[0]
