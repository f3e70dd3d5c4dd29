import random

import pytest
from hypothesis import given, settings, strategies as st

from gen import language, oracle_disjoint, oracle_unambig_concat, oracle_unambig_iter, random_regex
from lensynth import automata as A
from lensynth import regex as rx
from lensynth.regex import EMPTY, EPSILON, Concat, Definitions, Empty, Or, Star, Str, Var
from lensynth.syntax import parse_regex, parse_spec_text

TITLE = parse_spec_text("""
typedef text_char = [a-zA-Z0-9 ];
typedef legacy_title = "<Field Id=2>" text_char* "</Field>";
typedef modern_title = ("Title: " text_char text_char* ",") | "";
""").definitions

a, b = Str("a"), Str("b")
a_star = Star(a)

regexes = st.builds(lambda seed: random_regex(random.Random(seed), 4), st.integers(0, 10**9))


# definitions and resolution


def test_resolve_substitutes_names():
    assert rx.resolve(Var("X"), {"X": Str("ab")}) == Str("ab")
    assert rx.resolve(a, {}) == a
    got = rx.resolve(Concat(Var("X"), Star(Var("X"))), {"X": a})
    assert got == Concat(a, Star(a))
    assert language(got, 4) == {"", "a", "aa", "aaa", "aaaa"} - {""}


def test_resolve_is_transitive():
    defs = Definitions([("X", a), ("Y", Concat(Var("X"), Var("X")))])
    assert rx.resolve(Var("Y"), defs) == Concat(a, a)


def test_definitions_reject_forward_and_cyclic_references():
    with pytest.raises(rx.UnboundVariable):
        Definitions([("X", Var("Y")), ("Y", a)])
    with pytest.raises(rx.UnboundVariable):
        Definitions([("X", Star(Var("X")))])
    with pytest.raises(ValueError):
        Definitions([("X", a), ("X", b)])


def test_unbound_name_at_resolution():
    with pytest.raises(rx.UnboundVariable):
        rx.resolve(Var("nope"), {})


def test_automata_need_resolved_input():
    with pytest.raises(ValueError):
        A.compile_dfa(Var("X"))


# emptiness, disjointness, equivalence


def test_language_empty():
    assert A.language_empty(EMPTY)
    assert not A.language_empty(Star(EMPTY))
    assert A.language_empty(Concat(a, EMPTY))
    assert language(Concat(a, EMPTY), 3) == set()


def test_languages_disjoint():
    assert A.languages_disjoint(a, b)
    assert not A.languages_disjoint(a, Or(a, b))
    legacy, modern = Var("legacy_title"), Var("modern_title")
    assert A.languages_disjoint(legacy, modern, TITLE)


def test_title_formats_disjoint_by_enumeration():
    small = Definitions([("text_char", Or(a, b))] + [(n, TITLE[n]) for n in ("legacy_title", "modern_title")])
    assert not (A.enumerate_strings(Var("legacy_title"), 24, small)
                & A.enumerate_strings(Var("modern_title"), 24, small))


def test_lang_equiv():
    r = parse_regex('"a" ("b" | "c")*')
    assert A.lang_equiv(r, r)
    assert A.lang_equiv(a_star, Or(EPSILON, Concat(a, a_star)))
    assert not A.lang_equiv(a, Concat(a, a))


# ambiguity


def test_unambig_concat_examples():
    assert A.unambig_concat(Str("ab"), Str("cd"))
    assert not A.unambig_concat(a_star, a_star)
    assert A.unambig_concat(a_star, a)
    assert not oracle_unambig_concat(a_star, a_star, 6)
    assert oracle_unambig_concat(a_star, a, 6)


def test_unambig_iter_examples():
    assert A.unambig_iter(a)
    assert not A.unambig_iter(Or(a, Str("aa")))
    assert not A.unambig_iter(a_star)
    assert not oracle_unambig_iter(Or(a, Str("aa")))


def test_strongly_unambiguous_examples():
    assert A.strongly_unambiguous(Var("legacy_title"), TITLE)
    assert A.strongly_unambiguous(Var("modern_title"), TITLE)
    assert not A.strongly_unambiguous(Concat(a_star, a_star))
    assert not A.strongly_unambiguous(Or(a, a))
    # an empty language is unambiguous whatever sits inside it
    assert A.strongly_unambiguous(Concat(Concat(a_star, a_star), EMPTY))


def test_strongly_unambiguous_checks_subterms():
    # (a | a) b* is not, even though the whole language has unique parses per string
    assert not A.strongly_unambiguous(Concat(Or(a, a), Star(b)))


@settings(max_examples=150, deadline=None)
@given(regexes, regexes)
def test_ambiguity_checkers_agree_with_oracles(r1, r2):
    # length 10 leaves room for the longer witnesses these depth-4 terms can need
    assert A.languages_disjoint(r1, r2) == oracle_disjoint(r1, r2, 10)
    if A.unambig_concat(r1, r2):
        assert oracle_unambig_concat(r1, r2, 10)
    if A.unambig_iter(r1):
        assert oracle_unambig_iter(r1, 10)


def test_first_overlap_matches_pairwise_checks():
    rng = random.Random(5)
    for _ in range(200):
        rs = [random_regex(rng, 3) for _ in range(rng.randint(1, 5))]
        got = A.first_overlap(rs)
        pairwise = [(i, j) for i in range(len(rs)) for j in range(i + 1, len(rs))
                    if not A.languages_disjoint(rs[i], rs[j])]
        assert (got is None) == (not pairwise)
        if got is not None:
            assert got in pairwise


# membership and enumeration


@settings(max_examples=200, deadline=None)
@given(regexes)
def test_enumeration_matches_set_semantics(r):
    assert A.enumerate_strings(r, 6) == language(r, 6)


def test_enumerate_examples():
    assert A.enumerate_strings(a_star, 2) == {"", "a", "aa"}
    assert A.enumerate_strings(EMPTY, 5) == set()
    assert A.enumerate_strings(Concat(a, Or(b, Str("c"))), 2) == {"ab", "ac"}


def test_matches_through_definitions():
    assert A.matches(Var("legacy_title"), "<Field Id=2>Bug</Field>", TITLE)
    assert not A.matches(Var("legacy_title"), "<Field Id=2>Bug!</Field>", TITLE)


# unique parsing


def test_parse_unique_examples():
    assert rx.parse_unique(a_star, "aa") == rx.StarNode((rx.Leaf("a"), rx.Leaf("a")))
    assert rx.parse_unique(Or(a, b), "b") == rx.OrNode("R", rx.Leaf("b"))


def test_parse_unique_title():
    s = "<Field Id=2>Bug</Field>"
    tree = rx.parse_unique(Var("legacy_title"), s, TITLE)
    assert rx.flatten(tree) == s
    body = tree.child
    # juxtaposition nests to the right
    star = body.right.left
    assert body.left == rx.Leaf("<Field Id=2>")
    assert body.right.right == rx.Leaf("</Field>")
    assert [rx.flatten(c) for c in star.children] == ["B", "u", "g"]
    assert all(isinstance(c, rx.VarNode) and c.name == "text_char" for c in star.children)


def test_parse_unique_errors():
    with pytest.raises(rx.NoParse):
        rx.parse_unique(a, "b")
    with pytest.raises(rx.AmbiguityViolation):
        rx.parse_unique(Concat(a_star, a_star), "a")


@settings(max_examples=100, deadline=None)
@given(regexes, st.integers(0, 10**6))
def test_parse_unique_flattens_back(r, k):
    members = sorted(A.enumerate_strings(r, 5))
    if not members or not A.strongly_unambiguous(r):
        return
    s = members[k % len(members)]
    assert rx.flatten(rx.parse_unique(r, s)) == s


def test_empty_regex_class_is_distinct():
    assert Empty() == EMPTY and Empty() != EPSILON
    assert hash(Str("ab")) == hash(Str("ab"))


def test_deep_terms_hash_and_compare():
    deep = rx.or_all(Str(str(i)) for i in range(5000))
    same = rx.or_all(Str(str(i)) for i in range(5000))
    assert deep == same and hash(deep) == hash(same)
    assert deep != rx.or_all(Str(str(i)) for i in range(4999))
