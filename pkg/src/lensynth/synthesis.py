"""Type-directed lens synthesis over DNF regexes.

The search is best-first on the number of expansions (star unrollings and
name substitutions) applied to the two input types.  Each popped pair is
handed to a rigid aligner that succeeds exactly when the two sides, with the
examples threaded through them, sort into equal shapes.  Between pops,
star-depth bookkeeping decides which expansions are forced, which are
needed to expose a name at some depth, and only otherwise enumerates every
single-step expansion.
"""

from __future__ import annotations

import heapq
import itertools
import time
from collections import deque
from collections.abc import Mapping, Sequence as Seq
from dataclasses import dataclass, field

from . import automata
from . import lens as L
from . import regex as rx
from .dnf import (
    Atom,
    DnfRegex,
    DnfSplitter,
    Rule,
    Sequence,
    StarAtom,
    VarAtom,
    apply_rewrite_at,
    atom_to_dnf,
    current_set,
    dnf_width,
    positions,
    to_dnf,
    transitive_set,
)
from .dnf_lens import (
    DnfLens,
    IdentityVar,
    IterateDL,
    LibraryVar,
    SequenceLens,
    check_dnf_lens,
    dnf_lens_to_lens,
    simplify_lens,
)
from .lens import LensLibrary
from .regex import Definitions, Regex, as_definitions

IntList = tuple[int, ...]
Example = tuple[str, str]


class ValidationFailed(ValueError):
    pass


class ExampleDoesNotParse(ValueError):
    pass


class BudgetExhausted(RuntimeError):
    pass


class NoLensExists(RuntimeError):
    """The search space was exhausted without a rigid alignment."""


@dataclass(frozen=True)
class SynthConfig:
    expand_required: bool = True
    fix_problems: bool = True
    use_library: bool = True
    substitute_all: bool = False
    max_pops: int = 10**6
    max_seconds: float = 60.0
    max_dnf_width: int = 100_000


MODES: dict[str, SynthConfig] = {
    "full": SynthConfig(),
    "nocs": SynthConfig(use_library=False),
    "nofpe": SynthConfig(use_library=False, fix_problems=False),
    "noer": SynthConfig(use_library=False, fix_problems=False, expand_required=False),
    "noud": SynthConfig(use_library=False, fix_problems=False, expand_required=False, substitute_all=True),
}


@dataclass(frozen=True)
class QueueElement:
    src: DnfRegex
    tgt: DnfRegex
    expansions: int
    forced: int = 0


@dataclass
class SynthStats:
    pops: int = 0
    expansions: int = 0
    forced: int = 0
    wall_ms: float = 0.0
    popped: list[int] = field(default_factory=list)
    forced_log: list[tuple[str, str, int]] = field(default_factory=list)
    reveal_log: list[tuple[str, str, int, int]] = field(default_factory=list)
    enumerated: int = 0


# Library correspondences ----------------------------------------------------


class Correspondences:
    """Classes of user-defined names linked by library lenses.

    Each class has a representative; every member carries a lens path to it.
    Names related this way compare equal during alignment, with example
    strings mapped to the representative's format before comparison.
    """

    def __init__(self, library: LensLibrary | None, defs: Definitions):
        self.library = library if library is not None else L.EMPTY_LIBRARY
        self.engine = L.LensEngine(defs, self.library)
        self.rep: dict[str, str] = {}
        self.path: dict[str, L.Lens | None] = {}
        adj: dict[str, list[tuple[str, L.Lens]]] = {}
        edges = []
        for e in self.library:
            if isinstance(e.source, rx.Var) and isinstance(e.target, rx.Var) and e.source != e.target:
                u, v = e.source.name, e.target.name
                edges.append((u, v))
                adj.setdefault(u, []).append((v, L.Named(e.name)))
                adj.setdefault(v, []).append((u, L.invert(L.Named(e.name), self.library)))
        for _, root in edges:
            if root in self.rep:
                continue
            self.rep[root], self.path[root] = root, None
            work = deque([root])
            while work:
                y = work.popleft()
                for x, _ in adj[y]:
                    if x in self.rep:
                        continue
                    x_to_y = next(l for z, l in adj[x] if z == y)
                    self.rep[x] = root
                    self.path[x] = x_to_y if self.path[y] is None else L.Compose(x_to_y, self.path[y])
                    work.append(x)

    def canon(self, name: str) -> str:
        return self.rep.get(name, name)

    def canon_string(self, name: str, s: str) -> str:
        p = self.path.get(name)
        return s if p is None else self.engine.get(p, s)

    def canon_pairs(self, pairs) -> frozenset[tuple[str, int]]:
        return frozenset((self.canon(u), i) for u, i in pairs)

    def lens_between(self, u: str, v: str) -> L.Lens:
        """Lens from format u to format v via their shared representative."""
        down = self.path.get(u)
        up = self.path.get(v)
        up = None if up is None else L.invert(up, self.library)
        if down is None:
            return up
        return down if up is None else L.Compose(down, up)


# Exampled structures --------------------------------------------------------


@dataclass(frozen=True)
class EVar:
    name: str
    strings: tuple[tuple[IntList, str], ...]
    ils: frozenset[IntList]


@dataclass(frozen=True)
class EStar:
    inner: EDnf
    ils: frozenset[IntList]


@dataclass(frozen=True)
class ESeq:
    seq: Sequence
    atoms: tuple[EVar | EStar, ...]
    ils: frozenset[IntList]


@dataclass(frozen=True)
class EDnf:
    seqs: tuple[ESeq, ...]
    ils: frozenset[IntList]


def _ils_key(ils: frozenset[IntList]) -> tuple[IntList, ...]:
    return tuple(sorted(ils))


class Aligner:
    """Example embedding, exampled orderings and rigid alignment."""

    def __init__(self, defs: Definitions, corr: Correspondences):
        self.defs = defs
        self.corr = corr
        self.split = DnfSplitter(defs)
        self._keys: dict[int, tuple] = {}

    # embedding

    def embed(self, d: DnfRegex, sils: Seq[tuple[str, IntList]]) -> EDnf:
        buckets: list[list[tuple[str, IntList]]] = [[] for _ in d.sequences]
        for s, il in sils:
            i = self.split.which_sequence(d, s)
            if i is None:
                raise ExampleDoesNotParse(s)
            buckets[i].append((s, il))
        seqs = tuple(self._embed_seq(sq, b) for sq, b in zip(d.sequences, buckets))
        return EDnf(seqs, frozenset(il for _, il in sils))

    def _embed_seq(self, sq: Sequence, sils: list[tuple[str, IntList]]) -> ESeq:
        per_atom: list[list[tuple[str, IntList]]] = [[] for _ in sq.atoms]
        for s, il in sils:
            parts = self.split.split_sequence(sq, s)
            if parts is None:
                raise ExampleDoesNotParse(s)
            for k, p in enumerate(parts):
                per_atom[k].append((p, il))
        atoms = tuple(self._embed_atom(a, b) for a, b in zip(sq.atoms, per_atom))
        return ESeq(sq, atoms, frozenset(il for _, il in sils))

    def _embed_atom(self, a: Atom, sils: list[tuple[str, IntList]]) -> EVar | EStar:
        ils = frozenset(il for _, il in sils)
        if isinstance(a, VarAtom):
            strings = tuple(sorted((il, self.corr.canon_string(a.name, s)) for s, il in sils))
            return EVar(a.name, strings, ils)
        pieces: list[tuple[str, IntList]] = []
        for s, il in sils:
            split = self.split.split_star(a, s)
            if split is None:
                raise ExampleDoesNotParse(s)
            pieces += [(p, (j + 1,) + il) for j, p in enumerate(split)]
        return EStar(self.embed(a.inner, pieces), ils)

    # ordering

    def key(self, x: EDnf | ESeq | EVar | EStar) -> tuple:
        hit = self._keys.get(id(x))
        if hit is not None:
            return hit[1]
        match x:
            case EDnf(seqs, ils):
                k = (tuple(sorted(self.key(s) for s in seqs)), _ils_key(ils))
            case ESeq(_, atoms, ils):
                k = (tuple(sorted(self.key(a) for a in atoms)), _ils_key(ils))
            case EStar(inner, ils):
                k = (0, self.key(inner), _ils_key(ils))
            case EVar(name, strings, _):
                k = (1, self.corr.canon(name), strings)
            case _:
                raise TypeError(x)
        self._keys[id(x)] = (x, k)  # keep x alive so its id stays unique
        return k

    def compare(self, x, y) -> int:
        kx, ky = self.key(x), self.key(y)
        return (kx > ky) - (kx < ky)

    # alignment

    def _pair_up(self, xs, ys) -> tuple[int, ...]:
        sx = sorted(range(len(xs)), key=lambda i: self.key(xs[i]))
        sy = sorted(range(len(ys)), key=lambda i: self.key(ys[i]))
        perm = [0] * len(xs)
        for i, j in zip(sx, sy):
            perm[i] = j
        return tuple(perm)

    def build(self, es: EDnf, et: EDnf) -> DnfLens:
        perm = self._pair_up(es.seqs, et.seqs)
        return DnfLens(tuple(self._build_seq(es.seqs[i], et.seqs[perm[i]]) for i in range(len(perm))), perm)

    def _build_seq(self, es: ESeq, et: ESeq) -> SequenceLens:
        perm = self._pair_up(es.atoms, et.atoms)
        atoms = tuple(self._build_atom(es.atoms[i], et.atoms[perm[i]]) for i in range(len(perm)))
        return SequenceLens(tuple(zip(es.seq.strings, et.seq.strings)), atoms, perm)

    def _build_atom(self, a, b):
        if isinstance(a, EStar):
            return IterateDL(self.build(a.inner, b.inner))
        if a.name == b.name:
            return IdentityVar(a.name)
        return LibraryVar(a.name, b.name, self.corr.lens_between(a.name, b.name))


def _labelled(strings: Seq[str]) -> list[tuple[str, IntList]]:
    return [(s, (k + 1,)) for k, s in enumerate(strings)]


# The search -----------------------------------------------------------------


class Synthesizer:
    def __init__(self, defs: Mapping[str, Regex] | None = None, library: LensLibrary | None = None,
                 config: SynthConfig | None = None):
        self.defs = as_definitions(defs)
        self.config = config or SynthConfig()
        self.library = library if library is not None else L.EMPTY_LIBRARY
        corr_lib = self.library if self.config.use_library else L.EMPTY_LIBRARY
        self.corr = Correspondences(corr_lib, self.defs)
        self.aligner = Aligner(self.defs, self.corr)
        self.stats = SynthStats()
        self._embedded: dict[tuple[DnfRegex, int], EDnf] = {}
        self._ts: dict[DnfRegex, frozenset] = {}
        self._deadline: float | None = None

    # rigid alignment

    def _embed_cached(self, d: DnfRegex, side: int, strings: Seq[str]) -> EDnf:
        hit = self._embedded.get((d, side))
        if hit is None:
            hit = self.aligner.embed(d, _labelled(strings))
            self._embedded[(d, side)] = hit
        return hit

    def rigid_synth(self, src: DnfRegex, tgt: DnfRegex, exs: Seq[Example] = ()) -> DnfLens | None:
        es = self._embed_cached(src, 0, [s for s, _ in exs])
        et = self._embed_cached(tgt, 1, [t for _, t in exs])
        if self.aligner.key(es) != self.aligner.key(et):
            return None
        return self.aligner.build(es, et)

    # star-depth bookkeeping

    def _transitive(self, d: DnfRegex) -> frozenset[tuple[str, int]]:
        hit = self._ts.get(d)
        if hit is None:
            hit = self.corr.canon_pairs(transitive_set(d, self.defs))
            self._ts[d] = hit
        return hit

    def _force(self, d: DnfRegex, pairs: set[tuple[str, int]], side: str) -> tuple[DnfRegex, int]:
        count = 0
        while True:
            for path, a, depth in positions(d):
                if isinstance(a, VarAtom) and (a.name, depth) in pairs:
                    d = apply_rewrite_at(d, path, Rule.SUBSTITUTE, self.defs)
                    self.stats.forced_log.append((side, a.name, depth))
                    count += 1
                    break
            else:
                return d, count

    def expand_required(self, src: DnfRegex, tgt: DnfRegex, e: int) -> tuple[DnfRegex, DnfRegex, int]:
        """Substitute names whose (name, depth) the other side can never reach."""
        changed = True
        while changed:
            changed = False
            ts_t = self._transitive(tgt)
            missing = {(u, i) for u, i in current_set(src) if (self.corr.canon(u), i) not in ts_t}
            if missing:
                src, k = self._force(src, missing, "source")
                e, changed = e + k, True
            ts_s = self._transitive(src)
            missing = {(u, i) for u, i in current_set(tgt) if (self.corr.canon(u), i) not in ts_s}
            if missing:
                tgt, k = self._force(tgt, missing, "target")
                e, changed = e + k, True
        return src, tgt, e

    def _reveal(self, d: DnfRegex, name: str, depth: int) -> list[DnfRegex]:
        """One-step expansions of d toward exposing canonical name at depth."""
        out = []
        for path, a, _ in positions(d):
            self._poll()
            if isinstance(a, StarAtom):
                if not any(u == name for u, _ in self._transitive(a.inner)):
                    continue
                rules = (Rule.UNROLL_L, Rule.UNROLL_R)
            elif self.corr.canon(a.name) != name and any(
                u == name for u, _ in self._transitive(atom_to_dnf(a))
            ):
                rules = (Rule.SUBSTITUTE,)
            else:
                continue
            for rule in rules:
                nxt = apply_rewrite_at(d, path, rule, self.defs)
                if (name, depth) in self._transitive(nxt):
                    out.append(nxt)
        return out

    def fix_problem_elts(self, src: DnfRegex, tgt: DnfRegex, e: int, forced: int = 0) -> list[QueueElement]:
        cs_s = self.corr.canon_pairs(current_set(src))
        cs_t = self.corr.canon_pairs(current_set(tgt))
        out: list[QueueElement] = []
        for u, i in sorted(cs_t - cs_s):
            cands = self._reveal(src, u, i)
            self.stats.reveal_log.append(("source", u, i, len(cands)))
            out += [QueueElement(c, tgt, e + 1, forced) for c in cands]
        for u, i in sorted(cs_s - cs_t):
            cands = self._reveal(tgt, u, i)
            self.stats.reveal_log.append(("target", u, i, len(cands)))
            out += [QueueElement(src, c, e + 1, forced) for c in cands]
        return out

    def expand_once(self, src: DnfRegex, tgt: DnfRegex, e: int, forced: int = 0) -> list[QueueElement]:
        out = [QueueElement(n, tgt, e + 1, forced) for n in self._successors(src)]
        out += [QueueElement(src, n, e + 1, forced) for n in self._successors(tgt)]
        self.stats.enumerated += len(out)
        return out

    def _successors(self, d: DnfRegex) -> list[DnfRegex]:
        out = []
        for path, a, _ in positions(d):
            self._poll()
            rules = (Rule.UNROLL_L, Rule.UNROLL_R) if isinstance(a, StarAtom) else (Rule.SUBSTITUTE,)
            out += [apply_rewrite_at(d, path, r, self.defs) for r in rules]
        return out

    def expand(self, qe: QueueElement) -> list[QueueElement]:
        src, tgt, e, f = qe.src, qe.tgt, qe.expansions, qe.forced
        if self.config.expand_required:
            src2, tgt2, e2 = self.expand_required(src, tgt, e)
            if (src2, tgt2) != (src, tgt):
                # the forced pair itself still needs its own rigid attempt
                return [QueueElement(src2, tgt2, e2, f + e2 - e)]
        if self.config.fix_problems:
            qes = self.fix_problem_elts(src, tgt, e, f)
            if qes:
                return qes
        return self.expand_once(src, tgt, e, f)

    def synth_dnf_lens(self, src: DnfRegex, tgt: DnfRegex, exs: Seq[Example] = ()) -> DnfLens:
        start = time.monotonic()
        outer = self._deadline
        if outer is None:
            self._deadline = start + self.config.max_seconds
        deadline = self._deadline
        tick = itertools.count()
        heap = [(0, next(tick), QueueElement(src, tgt, 0))]
        seen = {(src, tgt)}
        try:
            while heap:
                if self.stats.pops >= self.config.max_pops:
                    raise BudgetExhausted(f"gave up after {self.stats.pops} queue pops")
                self._check_clock(deadline)
                _, _, qe = heapq.heappop(heap)
                self.stats.pops += 1
                self.stats.popped.append(qe.expansions)
                dl = self.rigid_synth(qe.src, qe.tgt, exs)
                if dl is not None:
                    self.stats.expansions, self.stats.forced = qe.expansions, qe.forced
                    self.found = qe
                    return dl
                for nxt in self.expand(qe):
                    if (nxt.src, nxt.tgt) not in seen:
                        seen.add((nxt.src, nxt.tgt))
                        heapq.heappush(heap, (nxt.expansions, next(tick), nxt))
            raise NoLensExists("every reachable pair of expansions failed to align")
        finally:
            self._deadline = outer
            self.stats.wall_ms = (time.monotonic() - start) * 1000

    # end to end

    def _poll(self) -> None:
        if self._deadline is not None:
            self._check_clock(self._deadline)

    def _check_clock(self, deadline: float) -> None:
        if time.monotonic() > deadline:
            raise BudgetExhausted(f"gave up after {self.config.max_seconds:g} s")

    def validate(self, r: Regex, s: Regex, exs: Seq[Example]) -> None:
        for side, reg in (("source", r), ("target", s)):
            try:
                res = self.defs.resolve(reg)
            except rx.UnboundVariable as e:
                raise ValidationFailed(f"{side} mentions undefined name {e.name!r}") from None
            if not automata.strongly_unambiguous(res):
                raise ValidationFailed(f"{side} type is ambiguous")
        rd, sd = automata.compile_dfa(self.defs.resolve(r)), automata.compile_dfa(self.defs.resolve(s))
        fwd: dict[str, str] = {}
        back: dict[str, str] = {}
        for a, b in exs:
            if not rd.accepts(a):
                raise ValidationFailed(f"example {a!r} is not in the source language")
            if not sd.accepts(b):
                raise ValidationFailed(f"example {b!r} is not in the target language")
            if fwd.setdefault(a, b) != b or back.setdefault(b, a) != a:
                raise ValidationFailed(f"examples for {a!r} / {b!r} are not a bijection")

    def synth(self, r: Regex, s: Regex, exs: Seq[Example] = ()) -> SynthResult:
        self._deadline = time.monotonic() + self.config.max_seconds
        try:
            with automata.deadline(self._deadline):
                return self._synth(r, s, list(exs), self._deadline)
        except automata.OutOfTime:
            raise BudgetExhausted(f"gave up after {self.config.max_seconds:g} s") from None

    def _synth(self, r: Regex, s: Regex, exs: list[Example], deadline: float) -> SynthResult:
        self.validate(r, s, exs)
        if self.config.substitute_all:
            r, s = self.defs.resolve(r), self.defs.resolve(s)
        for side in (r, s):
            width = dnf_width(side)
            if width > self.config.max_dnf_width:
                raise BudgetExhausted(f"normal form would have {width} sequences")
        self._check_clock(deadline)
        src, tgt = to_dnf(r), to_dnf(s)
        dl = self.synth_dnf_lens(src, tgt, exs)
        final = self.found
        self._check_clock(deadline)
        check_dnf_lens(dl, final.src, final.tgt, self.defs, self.library)
        raw = dnf_lens_to_lens(dl)
        self._check_clock(deadline)
        lens = simplify_lens(raw, self.defs, self.library)
        engine = L.LensEngine(self.defs, self.library)
        typ = engine.typecheck(lens)
        if not (automata.lang_equiv(typ.source, r, self.defs) and automata.lang_equiv(typ.target, s, self.defs)):
            raise AssertionError("synthesized lens has the wrong type")
        for a, b in exs:
            if engine.get(lens, a) != b:
                raise AssertionError(f"synthesized lens violates example {a!r} -> {b!r}")
        return SynthResult(lens, dl, final.src, final.tgt, self.stats)


@dataclass
class SynthResult:
    lens: L.Lens
    dnf_lens: DnfLens
    src: DnfRegex
    tgt: DnfRegex
    stats: SynthStats


def rigid_synth(src: DnfRegex, tgt: DnfRegex, exs: Seq[Example] = (), defs: Mapping[str, Regex] | None = None,
                library: LensLibrary | None = None) -> DnfLens | None:
    return Synthesizer(defs, library).rigid_synth(src, tgt, exs)


def synth_dnf_lens(src: DnfRegex, tgt: DnfRegex, exs: Seq[Example] = (), defs: Mapping[str, Regex] | None = None,
                   library: LensLibrary | None = None, config: SynthConfig | None = None) -> DnfLens:
    return Synthesizer(defs, library, config).synth_dnf_lens(src, tgt, exs)


def synth_lens(r: Regex, s: Regex, exs: Seq[Example] = (), defs: Mapping[str, Regex] | None = None,
               library: LensLibrary | None = None, config: SynthConfig | None = None) -> L.Lens:
    return Synthesizer(defs, library, config).synth(r, s, exs).lens


def embed_examples(d: DnfRegex, labelled: Seq[tuple[str, IntList]], defs: Mapping[str, Regex] | None = None,
                   library: LensLibrary | None = None) -> EDnf:
    env = as_definitions(defs)
    return Aligner(env, Correspondences(library, env)).embed(d, labelled)


def cmp_exampled(x, y, defs: Mapping[str, Regex] | None = None, library: LensLibrary | None = None) -> int:
    """-1, 0 or 1 under the exampled ordering of atoms, sequences or DNF regexes."""
    env = as_definitions(defs)
    return Aligner(env, Correspondences(library, env)).compare(x, y)
