import random

import pytest

from gen import random_su_regex
from lensynth import automata as A
from lensynth import lens as L
from lensynth import regex as rx
from lensynth.dnf import DnfRegex, Rule, Sequence, StarAtom, VarAtom, apply_rewrite_at, current_set, to_dnf
from lensynth.dnf_lens import IdentityVar, IterateDL, dnf_lens_get, dnf_source, dnf_target, typecheck_dnf_lens
from lensynth.synthesis import (
    MODES,
    BudgetExhausted,
    ExampleDoesNotParse,
    QueueElement,
    SynthConfig,
    Synthesizer,
    ValidationFailed,
    cmp_exampled,
    embed_examples,
    rigid_synth,
    synth_dnf_lens,
    synth_lens,
)
from lensynth.syntax import parse_spec_text

TITLE = parse_spec_text("""
typedef text_char = [a-zA-Z0-9 ];
typedef legacy_title = "<Field Id=2>" text_char* "</Field>";
typedef modern_title = ("Title: " text_char text_char* ",") | "";
""").definitions

LEGACY = to_dnf(TITLE["legacy_title"])
LEGACY_UNROLLED = apply_rewrite_at(LEGACY, ((0, 0),), Rule.UNROLL_L)
MODERN = to_dnf(TITLE["modern_title"])

REPEAT = parse_spec_text("""
typedef U = [a-z] [a-z]* ";";
typedef few = "" | U | U U U*;
typedef many = "" | U U*;
""").definitions


def var(name):
    return DnfRegex((Sequence(("", ""), (VarAtom(name),)),))


def lit(*strings):
    return DnfRegex(tuple(Sequence((s,)) for s in strings))


# embedding and ordering


def test_embed_star_labels():
    d = DnfRegex((Sequence(("", ""), (StarAtom(lit("a")),)),))
    ed = embed_examples(d, [("aa", (1,))])
    star = ed.seqs[0].atoms[0]
    assert star.ils == {(1,)}
    assert star.inner.seqs[0].ils == {(1, 1), (2, 1)}


def test_embed_without_examples_is_bare():
    ed = embed_examples(LEGACY_UNROLLED, [], TITLE)
    assert ed.ils == frozenset()
    assert all(sq.ils == frozenset() for sq in ed.seqs)


def test_embed_title_example_lands_in_nonempty_sequence():
    ed = embed_examples(LEGACY_UNROLLED, [("<Field Id=2>Return 400 on bad PUT request</Field>", (1,))], TITLE)
    assert [sq.ils for sq in ed.seqs] == [frozenset(), {(1,)}]


def test_embed_rejects_non_members():
    with pytest.raises(ExampleDoesNotParse):
        embed_examples(LEGACY_UNROLLED, [("<Field>", (1,))], TITLE)


def test_cmp_exampled():
    ed = embed_examples(LEGACY_UNROLLED, [("<Field Id=2>x</Field>", (1,))], TITLE)
    assert cmp_exampled(ed, ed, TITLE) == 0
    blank_src = embed_examples(LEGACY_UNROLLED, [("<Field Id=2></Field>", (1,))], TITLE).seqs[0]
    blank_tgt = embed_examples(MODERN, [("", (1,))], TITLE).seqs[1]
    assert cmp_exampled(blank_src, blank_tgt, TITLE) == 0
    saw_a = embed_examples(var("text_char"), [("a", (1,))], TITLE).seqs[0].atoms[0]
    saw_b = embed_examples(var("text_char"), [("b", (1,))], TITLE).seqs[0].atoms[0]
    assert cmp_exampled(saw_a, saw_b, TITLE) == -1
    assert cmp_exampled(saw_b, saw_a, TITLE) == 1


def test_rigid_success_iff_exampled_equal():
    rng = random.Random(21)
    for _ in range(150):
        d1 = to_dnf(random_su_regex(rng, 3))
        d2 = to_dnf(random_su_regex(rng, 3))
        ok = rigid_synth(d1, d2) is not None
        assert ok == (cmp_exampled(embed_examples(d1, []), embed_examples(d2, [])) == 0)
        assert rigid_synth(d1, d1) is not None


# rigid alignment


def test_rigid_title_is_a_swap():
    dl = rigid_synth(LEGACY_UNROLLED, MODERN, [], TITLE)
    assert dl is not None and dl.perm == (1, 0)
    assert typecheck_dnf_lens(dl, LEGACY_UNROLLED, MODERN, TITLE)
    assert dnf_lens_get(dl, "<Field Id=2>Bug 7</Field>", TITLE) == "Title: Bug 7,"


def test_rigid_fails_before_unrolling():
    assert rigid_synth(LEGACY, MODERN, [], TITLE) is None


def test_rigid_constant():
    dl = rigid_synth(lit("a"), lit("b"), [("a", "b")])
    assert dnf_lens_get(dl, "a") == "b"


def test_rigid_examples_pick_the_permutation():
    for want, other in (("x", "y"), ("y", "x")):
        dl = rigid_synth(lit("a", "b"), lit("x", "y"), [("a", want)])
        assert dnf_lens_get(dl, "a") == want
        assert dnf_lens_get(dl, "b") == other


def test_rigid_rejects_arity_mismatch():
    assert rigid_synth(lit("a", "b"), lit("x")) is None


# expansion inference


def test_expand_required_substitutes_unreachable_names():
    syn = Synthesizer(TITLE)
    src, tgt, e = syn.expand_required(var("legacy_title"), var("modern_title"), 0)
    assert (src, tgt, e) == (LEGACY, MODERN, 2)
    assert sorted(syn.stats.forced_log) == [("source", "legacy_title", 0), ("target", "modern_title", 0)]


def test_expand_required_leaves_reachable_pairs():
    syn = Synthesizer({"X": rx.Str("a")})
    assert syn.expand_required(var("X"), var("X"), 0) == (var("X"), var("X"), 0)
    assert syn.expand_required(lit("a"), lit("b", "c"), 3) == (lit("a"), lit("b", "c"), 3)


def test_fix_problem_elts_reveals_by_unrolling():
    syn = Synthesizer(TITLE)
    qes = syn.fix_problem_elts(LEGACY, MODERN, 2)
    assert {qe.src for qe in qes} == {
        apply_rewrite_at(LEGACY, ((0, 0),), Rule.UNROLL_L),
        apply_rewrite_at(LEGACY, ((0, 0),), Rule.UNROLL_R),
    }
    assert all(qe.tgt == MODERN and qe.expansions == 3 for qe in qes)
    assert syn.stats.reveal_log == [("source", "text_char", 0, 2)]
    assert syn.fix_problem_elts(MODERN, MODERN, 0) == []


def test_fix_problem_elts_substitutes_a_hiding_name():
    defs = rx.Definitions([("U", rx.Str("u")), ("W", rx.Concat(rx.Var("U"), rx.Str("x")))])
    src = var("W")
    tgt = DnfRegex((Sequence(("", "x"), (VarAtom("U"),)),))
    qes = Synthesizer(defs).fix_problem_elts(src, tgt, 0)
    assert [(qe.src, qe.tgt, qe.expansions) for qe in qes] == [(tgt, tgt, 1)]


def test_expand_once():
    syn = Synthesizer()
    assert syn.expand_once(lit("a"), lit("a"), 0) == []
    star = DnfRegex((Sequence(("", ""), (StarAtom(lit("a")),)),))
    qes = syn.expand_once(star, lit("b"), 4)
    assert len(qes) == 2 and all(qe.expansions == 5 and qe.tgt == lit("b") for qe in qes)


def test_expand_routes_through_each_branch():
    syn = Synthesizer(TITLE)
    # forced substitutions come back as one element
    [forced] = syn.expand(QueueElement(var("legacy_title"), var("modern_title"), 0))
    assert (forced.src, forced.tgt, forced.expansions, forced.forced) == (LEGACY, MODERN, 2, 2)
    # one side lacks a pair the other has
    revealed = syn.expand(forced)
    assert len(revealed) == 2 and syn.stats.enumerated == 0
    # nothing to infer, so every single step is tried
    rep = Synthesizer(REPEAT)
    few, many = to_dnf(REPEAT["few"]), to_dnf(REPEAT["many"])
    assert rep.corr.canon_pairs(current_set(few)) == rep.corr.canon_pairs(current_set(many))
    qes = rep.expand(QueueElement(few, many, 0))
    assert len(qes) == rep.stats.enumerated > 0


# search


def test_identity_is_found_without_expanding():
    d = to_dnf(rx.Concat(rx.Str("a"), rx.Star(rx.Or(rx.Str("b"), rx.Str("c")))))
    syn = Synthesizer()
    dl = syn.synth_dnf_lens(d, d)
    assert syn.stats.pops == 1 and syn.stats.popped == [0]
    assert dnf_source(dl) == d == dnf_target(dl)
    assert dnf_lens_get(dl, "abcb") == "abcb"


def test_title_search():
    dl = synth_dnf_lens(var("legacy_title"), var("modern_title"), [], TITLE)
    assert dnf_lens_get(dl, "<Field Id=2>Return 400 on bad PUT request</Field>", TITLE) == \
        "Title: Return 400 on bad PUT request,"


def test_enumerative_search_on_repeat_identity():
    syn = Synthesizer(REPEAT)
    res = syn.synth(rx.Var("few"), rx.Var("many"))
    assert syn.stats.enumerated > 0 and syn.stats.expansions >= 1
    engine = L.LensEngine(REPEAT)
    for s in ("", "ab;", "ab;c;", "a;b;c;"):
        assert engine.get(res.lens, s) == s


def test_popped_expansion_counts_never_decrease():
    syn = Synthesizer(TITLE, config=MODES["noer"])
    syn.synth(rx.Var("legacy_title"), rx.Var("modern_title"))
    assert syn.stats.pops > 1
    assert syn.stats.popped == sorted(syn.stats.popped)
    assert len(syn.stats.popped) == syn.stats.pops


def test_pop_budget():
    syn = Synthesizer(REPEAT, config=SynthConfig(expand_required=False, fix_problems=False, max_pops=2))
    with pytest.raises(BudgetExhausted):
        syn.synth(rx.Var("few"), rx.Var("many"))


def test_aligned_pairs_share_current_sets():
    tasks = [
        (TITLE, "legacy_title", "modern_title"),
        (REPEAT, "few", "many"),
    ]
    for defs, r, s in tasks:
        syn = Synthesizer(defs)
        res = syn.synth(rx.Var(r), rx.Var(s))
        assert syn.corr.canon_pairs(current_set(res.src)) == syn.corr.canon_pairs(current_set(res.tgt))


# end to end


def test_synth_lens_examples():
    lens = synth_lens(rx.Var("legacy_title"), rx.Var("modern_title"), [], TITLE)
    assert L.lens_get(lens, "<Field Id=2>Return 400 on bad PUT request</Field>", TITLE) == \
        "Title: Return 400 on bad PUT request,"
    assert L.lens_get(lens, "<Field Id=2></Field>", TITLE) == ""
    r = rx.Star(rx.Or(rx.Str("a"), rx.Str("bc")))
    same = synth_lens(r, r)
    assert all(L.lens_get(same, s) == s for s in A.enumerate_strings(r, 6))
    src, tgt = rx.Or(rx.Str("a"), rx.Str("b")), rx.Or(rx.Str("x"), rx.Str("y"))
    chosen = synth_lens(src, tgt, [("a", "y")])
    assert (L.lens_get(chosen, "a"), L.lens_get(chosen, "b")) == ("y", "x")


def test_synthesized_lenses_are_bijective():
    small = parse_spec_text("""
    typedef text_char = [ab];
    typedef legacy_title = "<Field Id=2>" text_char* "</Field>";
    typedef modern_title = ("Title: " text_char text_char* ",") | "";
    """).definitions
    res = Synthesizer(small).synth(rx.Var("legacy_title"), rx.Var("modern_title"))
    engine = L.LensEngine(small)
    typ = engine.typecheck(res.lens)
    for s in A.enumerate_strings(typ.source, 26, small):
        assert engine.put(res.lens, engine.get(res.lens, s)) == s
    for t in A.enumerate_strings(typ.target, 14, small):
        assert engine.get(res.lens, engine.put(res.lens, t)) == t


def test_library_correspondence():
    defs = parse_spec_text("""
    typedef a_fmt = [0-9] "/" [0-9];
    typedef b_fmt = [0-9] "-" [0-9];
    """).definitions
    lib = L.LensLibrary()
    first = Synthesizer(defs).synth(rx.Var("a_fmt"), rx.Var("b_fmt"))
    lib.add("ab", first.lens, rx.Var("a_fmt"), rx.Var("b_fmt"))
    src = rx.Star(rx.Concat(rx.Var("a_fmt"), rx.Str(";")))
    tgt = rx.Star(rx.Concat(rx.Var("b_fmt"), rx.Str(",")))
    syn = Synthesizer(defs, lib)
    res = syn.synth(src, tgt)
    assert L.lens_get(res.lens, "1/2;3/4;", defs, lib) == "1-2,3-4,"
    inner = res.dnf_lens.seq_lenses[0].atom_lenses[0]
    assert isinstance(inner, IterateDL)
    assert not isinstance(inner.dl.seq_lenses[0].atom_lenses[0], IdentityVar)


def test_validation_failures():
    syn = Synthesizer(TITLE)
    with pytest.raises(ValidationFailed, match="ambiguous"):
        syn.synth(rx.Concat(rx.Star(rx.Str("a")), rx.Star(rx.Str("a"))), rx.Str("a"))
    with pytest.raises(ValidationFailed, match="undefined"):
        syn.synth(rx.Var("nope"), rx.Str("a"))
    with pytest.raises(ValidationFailed, match="source language"):
        syn.synth(rx.Var("legacy_title"), rx.Var("modern_title"), [("<Field>", "")])
    with pytest.raises(ValidationFailed, match="target language"):
        syn.synth(rx.Var("legacy_title"), rx.Var("modern_title"), [("<Field Id=2></Field>", "Title: ,")])
    with pytest.raises(ValidationFailed, match="bijection"):
        Synthesizer().synth(rx.Or(rx.Str("a"), rx.Str("b")), rx.Or(rx.Str("x"), rx.Str("y")),
                            [("a", "x"), ("b", "x")])
