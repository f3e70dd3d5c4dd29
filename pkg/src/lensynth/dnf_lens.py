"""Lenses between DNF regexes, their typing, evaluation and translation.

Permutations are stored as tuples where ``perm[i]`` is the target index
paired with source index ``i``, for sequences within a DNF lens and for
atoms within a sequence lens.  Literal string pairs are not permuted: the
k-th source string is replaced by the k-th target string.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

from . import automata
from . import lens as L
from . import regex as rx
from .dnf import DnfRegex, DnfSplitter, Sequence, StarAtom, VarAtom, Atom, to_regex
from .regex import Regex, _Node, as_definitions


class AtomLens(_Node):
    pass


@dataclass(frozen=True, eq=False)
class IterateDL(AtomLens):
    dl: DnfLens


@dataclass(frozen=True, eq=False)
class IdentityVar(AtomLens):
    name: str


@dataclass(frozen=True, eq=False)
class LibraryVar(AtomLens):
    """Maps name ``source`` to name ``target`` through a registered lens."""

    source: str
    target: str
    lens: L.Lens


@dataclass(frozen=True, eq=False)
class SequenceLens(_Node):
    string_pairs: tuple[tuple[str, str], ...]
    atom_lenses: tuple[AtomLens, ...] = ()
    perm: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.string_pairs) != len(self.atom_lenses) + 1:
            raise ValueError("a sequence lens needs one more string pair than atom lenses")
        if sorted(self.perm) != list(range(len(self.atom_lenses))):
            raise ValueError(f"not a permutation of {len(self.atom_lenses)}: {self.perm}")


@dataclass(frozen=True, eq=False)
class DnfLens(_Node):
    seq_lenses: tuple[SequenceLens, ...] = ()
    perm: tuple[int, ...] = ()

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.seq_lenses))):
            raise ValueError(f"not a permutation of {len(self.seq_lenses)}: {self.perm}")


def identity_perm(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def invert_perm(p: tuple[int, ...]) -> tuple[int, ...]:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


# Derived types ---------------------------------------------------------------


def atom_source(al: AtomLens) -> Atom:
    match al:
        case IterateDL(dl):
            return StarAtom(dnf_source(dl))
        case IdentityVar(name):
            return VarAtom(name)
        case LibraryVar(src, _, _):
            return VarAtom(src)
    raise TypeError(al)


def atom_target(al: AtomLens) -> Atom:
    match al:
        case IterateDL(dl):
            return StarAtom(dnf_target(dl))
        case IdentityVar(name):
            return VarAtom(name)
        case LibraryVar(_, tgt, _):
            return VarAtom(tgt)
    raise TypeError(al)


def seq_source(sql: SequenceLens) -> Sequence:
    return Sequence(tuple(s for s, _ in sql.string_pairs), tuple(atom_source(a) for a in sql.atom_lenses))


def seq_target(sql: SequenceLens) -> Sequence:
    atoms: list[Atom | None] = [None] * len(sql.atom_lenses)
    for i, al in enumerate(sql.atom_lenses):
        atoms[sql.perm[i]] = atom_target(al)
    return Sequence(tuple(t for _, t in sql.string_pairs), tuple(atoms))


def dnf_source(dl: DnfLens) -> DnfRegex:
    return DnfRegex(tuple(seq_source(s) for s in dl.seq_lenses))


def dnf_target(dl: DnfLens) -> DnfRegex:
    seqs: list[Sequence | None] = [None] * len(dl.seq_lenses)
    for i, sql in enumerate(dl.seq_lenses):
        seqs[dl.perm[i]] = seq_target(sql)
    return DnfRegex(tuple(seqs))


# Typing ---------------------------------------------------------------------


class DnfLensTypeError(TypeError):
    pass


def _well_formed(d: DnfRegex, defs: rx.Definitions, seen: set) -> None:
    """Side conditions: disjoint sequences, unambiguous sequences, iterable star bodies."""
    if d in seen:
        return
    res = [defs.resolve(to_regex(sq)) for sq in d.sequences]
    clash = automata.first_overlap(res)
    if clash is not None:
        raise DnfLensTypeError(f"sequences {clash[0]} and {clash[1]} overlap")
    for i, sq in enumerate(d.sequences):
        prefix: Regex = rx.Str(sq.strings[0])
        for a, s in zip(sq.atoms, sq.strings[1:]):
            for piece in (defs.resolve(to_regex(a)), rx.Str(s)):
                if not automata.unambig_concat(prefix, piece):
                    raise DnfLensTypeError(f"sequence {i} is ambiguous")
                prefix = rx.Concat(prefix, piece)
        for a in sq.atoms:
            if isinstance(a, StarAtom):
                if not automata.unambig_iter(defs.resolve(to_regex(a.inner))):
                    raise DnfLensTypeError(f"a star body in sequence {i} is not unambiguously iterable")
                _well_formed(a.inner, defs, seen)
    seen.add(d)


def _check_atoms(dl: DnfLens, engine: L.LensEngine) -> None:
    for sql in dl.seq_lenses:
        for al in sql.atom_lenses:
            match al:
                case IterateDL(inner):
                    _check_atoms(inner, engine)
                case LibraryVar(src, tgt, lens):
                    t = engine.typecheck(lens)
                    d = engine.defs
                    if not (automata.lang_equiv(d.resolve(t.source), d.resolve(rx.Var(src)))
                            and automata.lang_equiv(d.resolve(t.target), d.resolve(rx.Var(tgt)))):
                        raise DnfLensTypeError(f"library lens does not relate {src} and {tgt}")


def check_dnf_lens(dl: DnfLens, src: DnfRegex, tgt: DnfRegex, defs: Mapping[str, Regex] | None = None,
                   library: L.LensLibrary | None = None) -> None:
    """Raise DnfLensTypeError naming the first failing premise."""
    env = as_definitions(defs)
    if dnf_source(dl) != src:
        raise DnfLensTypeError("source side does not match the lens structure")
    if dnf_target(dl) != tgt:
        raise DnfLensTypeError("target side does not match the lens structure and permutations")
    seen: set = set()
    _well_formed(src, env, seen)
    _well_formed(tgt, env, seen)
    _check_atoms(dl, L.LensEngine(env, library))


def typecheck_dnf_lens(dl: DnfLens, src: DnfRegex, tgt: DnfRegex, defs: Mapping[str, Regex] | None = None,
                       library: L.LensLibrary | None = None) -> bool:
    try:
        check_dnf_lens(dl, src, tgt, defs, library)
    except (DnfLensTypeError, L.LensTypeError):
        return False
    return True


# Evaluation -----------------------------------------------------------------


class DnfLensEngine:
    def __init__(self, defs: Mapping[str, Regex] | None = None, library: L.LensLibrary | None = None):
        self.defs = as_definitions(defs)
        self.split = DnfSplitter(self.defs)
        self.lenses = L.LensEngine(self.defs, library)

    def get(self, dl: DnfLens, s: str) -> str:
        for sql in dl.seq_lenses:
            parts = self.split.split_sequence(seq_source(sql), s)
            if parts is not None:
                return self._get_seq(sql, parts)
        raise L.InputNotInSource(f"{s!r} is not in the source language")

    def put(self, dl: DnfLens, t: str) -> str:
        for sql in dl.seq_lenses:
            parts = self.split.split_sequence(seq_target(sql), t)
            if parts is not None:
                return self._put_seq(sql, parts)
        raise L.InputNotInTarget(f"{t!r} is not in the target language")

    def _get_seq(self, sql: SequenceLens, parts: list[str]) -> str:
        outs = [""] * len(parts)
        for i, al in enumerate(sql.atom_lenses):
            outs[sql.perm[i]] = self._get_atom(al, parts[i])
        pieces = [sql.string_pairs[0][1]]
        for out, (_, t) in zip(outs, sql.string_pairs[1:]):
            pieces += [out, t]
        return "".join(pieces)

    def _put_seq(self, sql: SequenceLens, parts: list[str]) -> str:
        pieces = [sql.string_pairs[0][0]]
        for i, al in enumerate(sql.atom_lenses):
            pieces += [self._put_atom(al, parts[sql.perm[i]]), sql.string_pairs[i + 1][0]]
        return "".join(pieces)

    def _get_atom(self, al: AtomLens, x: str) -> str:
        match al:
            case IterateDL(dl):
                pieces = self.split.split_star(StarAtom(dnf_source(dl)), x)
                return "".join(self.get(dl, p) for p in pieces)
            case IdentityVar():
                return x
            case LibraryVar(_, _, lens):
                return self.lenses.get(lens, x)
        raise TypeError(al)

    def _put_atom(self, al: AtomLens, y: str) -> str:
        match al:
            case IterateDL(dl):
                pieces = self.split.split_star(StarAtom(dnf_target(dl)), y)
                return "".join(self.put(dl, p) for p in pieces)
            case IdentityVar():
                return y
            case LibraryVar(_, _, lens):
                return self.lenses.put(lens, y)
        raise TypeError(al)


def dnf_lens_get(dl: DnfLens, s: str, defs: Mapping[str, Regex] | None = None,
                 library: L.LensLibrary | None = None) -> str:
    return DnfLensEngine(defs, library).get(dl, s)


def dnf_lens_put(dl: DnfLens, t: str, defs: Mapping[str, Regex] | None = None,
                 library: L.LensLibrary | None = None) -> str:
    return DnfLensEngine(defs, library).put(dl, t)


# Translation to combinators --------------------------------------------------


def _atom_to_lens(al: AtomLens) -> L.Lens:
    match al:
        case IterateDL(dl):
            return L.Iterate(dnf_lens_to_lens(dl))
        case IdentityVar(name):
            return L.Identity(rx.Var(name))
        case LibraryVar(_, _, lens):
            return lens
    raise TypeError(al)


def _concat_chain(parts: list[L.Lens]) -> L.Lens:
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = L.Concat(p, out)
    return out


def _separable(units: list[tuple[L.Lens, int]]) -> L.Lens | None:
    """Concat/Swap tree realizing the unit order, if the permutation is separable.

    Every node covers a contiguous block of units on both sides, so each
    intermediate type is a grouping of an unambiguous sequence.
    """
    if len(units) == 1:
        return units[0][0]
    for k in range(1, len(units)):
        left, right = units[:k], units[k:]
        lo_r, hi_l = min(t for _, t in right), max(t for _, t in left)
        if hi_l < lo_r or min(t for _, t in left) > max(t for _, t in right):
            a, b = _separable(left), _separable(right)
            if a is None or b is None:
                return None
            return L.Concat(a, b) if hi_l < lo_r else L.Swap(a, b)
    return None


def _bubble(units: list[tuple[L.Lens, int]], target_types: list[Regex]) -> L.Lens:
    """Fallback for non-separable orders: place units in source order, then
    compose with one adjacent transposition per bubble-sort step."""
    out = _concat_chain([u for u, _ in units])
    order = [t for _, t in units]
    n = len(order)
    changed = True
    while changed:
        changed = False
        for k in range(n - 1):
            if order[k] > order[k + 1]:
                ids = [L.Identity(target_types[t]) for t in order]
                step = ids[:k] + [L.Swap(ids[k], ids[k + 1])] + ids[k + 2 :]
                out = L.Compose(out, _concat_chain(step))
                order[k], order[k + 1] = order[k + 1], order[k]
                changed = True
    return out


def _seq_to_lens(sql: SequenceLens) -> L.Lens:
    pairs, n = sql.string_pairs, len(sql.atom_lenses)
    head = L.Const(*pairs[0])
    if n == 0:
        return head
    # unit i covers atom i and the source string after it on one side, and the
    # atom it lands on plus the target string after that on the other side
    units = []
    target_types: list[Regex] = [rx.EPSILON] * n
    for i, al in enumerate(sql.atom_lenses):
        j = sql.perm[i]
        units.append((L.Concat(_atom_to_lens(al), L.Const(pairs[i + 1][0], pairs[j + 1][1])), j))
        target_types[j] = rx.Concat(to_regex(atom_target(al)), rx.Str(pairs[j + 1][1]))
    body = _separable(units) or _bubble(units, target_types)
    return L.Concat(head, body)


def dnf_lens_to_lens(dl: DnfLens) -> L.Lens:
    """Combinator lens with the same semantics.

    Sequence lenses are joined by Or in source order; the resulting target
    regex is a reordering of the DNF target, which denotes the same language.
    """
    if not dl.seq_lenses:
        return L.Identity(rx.EMPTY)
    parts = [_seq_to_lens(s) for s in dl.seq_lenses]
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = L.Or(p, out)
    return out


# Simplification -------------------------------------------------------------


def simplify_regex(r: Regex) -> Regex:
    """Drop empty-language summands and epsilon factors; fuse adjacent literals."""
    match r:
        case rx.Or():
            parts = []
            stack = [r]
            while stack:
                x = stack.pop()
                if isinstance(x, rx.Or):
                    stack += [x.right, x.left]
                else:
                    x = simplify_regex(x)
                    if not isinstance(x, rx.Empty):
                        parts.append(x)
            return rx.or_all(parts)
        case rx.Concat():
            flat: list[Regex] = []
            stack = [r]
            while stack:
                x = stack.pop()
                if isinstance(x, rx.Concat):
                    stack += [x.right, x.left]
                    continue
                x = simplify_regex(x)
                if isinstance(x, rx.Empty):
                    return rx.EMPTY
                if isinstance(x, rx.Concat):
                    stack += [x.right, x.left]
                elif isinstance(x, rx.Str) and flat and isinstance(flat[-1], rx.Str):
                    flat[-1] = rx.Str(flat[-1].s + x.s)
                elif not (isinstance(x, rx.Str) and x.s == ""):
                    flat.append(x)
            return rx.concat_all(flat)
        case rx.Star(inner):
            inner = simplify_regex(inner)
            if isinstance(inner, rx.Empty) or inner == rx.EPSILON:
                return rx.EPSILON
            return rx.Star(inner)
    return r


def _flatten(l: L.Lens, kind: type) -> list[L.Lens]:
    out, stack = [], [l]
    while stack:
        x = stack.pop()
        if isinstance(x, kind):
            stack += [x.l2, x.l1]
        else:
            out.append(x)
    return out


def _chain(parts: list[L.Lens], kind: type) -> L.Lens:
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = kind(p, out)
    return out


NOOP = L.Const("", "")
_UNITS = (NOOP, L.Identity(rx.EPSILON))


def _is_identity(l: L.Lens) -> bool:
    match l:
        case L.Identity():
            return True
        case L.Const(a, b):
            return a == b
        case L.Concat(l1, l2) | L.Or(l1, l2):
            return _is_identity(l1) and _is_identity(l2)
        case L.Iterate(l1):
            return _is_identity(l1)
    return False


class _Simplifier:
    def __init__(self, engine: L.LensEngine):
        self.engine = engine

    def run(self, l: L.Lens) -> L.Lens:
        match l:
            case L.Concat():
                parts = [self.run(p) for p in _flatten(l, L.Concat)]
                l = self._concat(parts)
            case L.Or():
                branches = [self.run(b) for b in _flatten(l, L.Or)]
                l = self._or(branches)
            case L.Swap(l1, l2):
                l = L.Swap(self.run(l1), self.run(l2))
            case L.Iterate(l1):
                l = L.Iterate(self.run(l1))
            case L.Compose(l1, l2):
                l = L.Compose(self.run(l1), self.run(l2))
            case L.Identity(r):
                l = L.Identity(simplify_regex(r))
        return self._collapse(l)

    def _collapse(self, l: L.Lens) -> L.Lens:
        # identities over named types stay visible as id(NAME) boundaries
        if isinstance(l, L.Identity) or not _is_identity(l):
            return l
        src = self.engine.types(l).source
        if rx.var_names(src):
            return l
        return L.Identity(simplify_regex(src))

    def _concat(self, parts: list[L.Lens]) -> L.Lens:
        merged: list[L.Lens] = []
        for p in parts:
            if isinstance(p, L.Const) and merged and isinstance(merged[-1], L.Const):
                q = merged[-1]
                merged[-1] = L.Const(q.s1 + p.s1, q.s2 + p.s2)
            else:
                merged.append(p)
        merged = [p for p in merged if p not in _UNITS] or [NOOP]
        return _chain(merged, L.Concat)

    def _or(self, branches: list[L.Lens]) -> L.Lens:
        if len(branches) == 1:
            return branches[0]
        chains = [_flatten(b, L.Concat) for b in branches]
        head = 0
        while all(len(c) > head + 1 for c in chains) and all(c[head] == chains[0][head] for c in chains):
            head += 1
        tail = 0
        while all(len(c) > head + tail + 1 for c in chains) and all(
            c[-1 - tail] == chains[0][-1 - tail] for c in chains
        ):
            tail += 1
        if head or tail:
            middles = [self._concat(c[head : len(c) - tail]) for c in chains]
            middle = self.run(_chain(middles, L.Or))
            parts = chains[0][:head] + [middle] + chains[0][len(chains[0]) - tail :]
            return self._concat(parts)
        return self._group(branches, chains)

    def _group(self, branches: list[L.Lens], chains: list[list[L.Lens]]) -> L.Lens:
        """Factor runs of adjacent branches sharing a first factor."""
        out: list[L.Lens] = []
        i = 0
        while i < len(branches):
            j = i + 1
            if len(chains[i]) > 1:
                while j < len(branches) and len(chains[j]) > 1 and chains[j][0] == chains[i][0]:
                    j += 1
            if j - i > 1:
                out.append(self._or(branches[i:j]))
            else:
                out.append(branches[i])
            i = j
        return _chain(out, L.Or)


def simplify_lens(l: L.Lens, defs: Mapping[str, Regex] | None = None,
                  library: L.LensLibrary | None = None) -> L.Lens:
    """Factor Or branches, merge literals and collapse identity subterms.

    Runs to a fixpoint.  The result is re-typechecked; if a rewrite ever
    broke typing the input is returned unchanged.
    """
    engine = L.LensEngine(defs, library)
    simp = _Simplifier(engine)
    cur = l
    for _ in range(100):
        nxt = simp.run(cur)
        if nxt == cur:
            break
        cur = nxt
    try:
        engine.typecheck(cur)
    except L.LensTypeError:
        return l
    return cur
