"""Acceptance criteria 1-9, one test each.

Every test records a one-line verdict that the terminal summary prints, so
``pytest tests/test_acceptance.py`` ends with a pass/fail line per criterion.
All random draws come from ``random.Random(SEED)``.
"""

from __future__ import annotations

import random
import time
from dataclasses import replace
from pathlib import Path

import pytest

from conftest import CRITERIA
from gen import (
    language,
    oracle_disjoint,
    oracle_unambig_concat,
    oracle_unambig_iter,
    random_regex,
    random_su_regex,
    random_typed_lens,
    sample_string,
    shrink_definitions,
)
from lensynth import automata as A
from lensynth import lens as L
from lensynth import regex as rx
from lensynth.cli import default_corpus, run_spec
from lensynth.dnf import Rule, StarAtom, apply_rewrite_at, positions, to_dnf, to_regex
from lensynth.syntax import parse_spec, parse_spec_text, print_lens
from lensynth.synthesis import MODES, BudgetExhausted, SynthConfig, Synthesizer

SEED = 0
GOLDEN = Path(__file__).parent / "golden"

TITLE_SPEC = """
typedef text_char = [a-zA-Z0-9 ];
typedef legacy_title = "<Field Id=2>" text_char* "</Field>";
typedef modern_title = ("Title: " text_char text_char* ",") | "";
"""
TITLE_IN = "<Field Id=2>Return 400 on bad PUT request</Field>"
TITLE_OUT = "Title: Return 400 on bad PUT request,"


def record(n: int, ok: bool, detail: str) -> None:
    CRITERIA[n] = (ok, detail)


def test_criterion_1_dnf_conversion_preserves_language():
    rng = random.Random(SEED)
    start = time.monotonic()
    bad = []
    for _ in range(500):
        r = random_regex(rng, 4)
        if A.enumerate_strings(r, 8) != A.enumerate_strings(to_regex(to_dnf(r)), 8):
            bad.append(r)
    elapsed = time.monotonic() - start
    ok = not bad and elapsed < 60
    record(1, ok, f"500 regexes, {len(bad)} mismatches, {elapsed:.1f}s (limit 60s)")
    assert not bad, bad[:3]
    assert elapsed < 60


REWRITE_DEFS = rx.Definitions([
    ("X", rx.Or(rx.Str("a"), rx.Str("bc"))),
    ("Y", rx.Concat(rx.Star(rx.Str("b")), rx.Str("c"))),
])


def test_criterion_2_rewrites_preserve_language_and_unambiguity():
    rng = random.Random(SEED)
    start = time.monotonic()
    done = 0
    bad_lang, bad_su = [], []
    while done < 1000:
        r = random_su_regex(rng, 4, REWRITE_DEFS, names=("X", "Y"))
        d = to_dnf(r)
        if not A.strongly_unambiguous(to_regex(d), REWRITE_DEFS):
            continue
        spots = list(positions(d))
        if not spots:
            continue
        path, atom, _ = rng.choice(spots)
        rule = rng.choice((Rule.UNROLL_L, Rule.UNROLL_R)) if isinstance(atom, StarAtom) else Rule.SUBSTITUTE
        d2 = apply_rewrite_at(d, path, rule, REWRITE_DEFS)
        before = language(to_regex(d), 8, REWRITE_DEFS)
        after = language(to_regex(d2), 8, REWRITE_DEFS)
        if before != after or A.enumerate_strings(to_regex(d2), 8, REWRITE_DEFS) != after:
            bad_lang.append((r, path, rule))
        if not A.strongly_unambiguous(to_regex(d2), REWRITE_DEFS):
            bad_su.append((r, path, rule))
        done += 1
    elapsed = time.monotonic() - start
    ok = not bad_lang and not bad_su and elapsed < 120
    record(2, ok, f"1000 rewrites, {len(bad_lang)} language changes, {len(bad_su)} lost unambiguity, "
                  f"{elapsed:.1f}s (limit 120s)")
    assert not bad_lang, bad_lang[:3]
    assert not bad_su, bad_su[:3]
    assert elapsed < 120


def test_criterion_3_ambiguity_checkers_match_oracles():
    rng = random.Random(SEED)
    bad = []
    for _ in range(500):
        r1, r2 = random_regex(rng, 4), random_regex(rng, 4)
        checks = (
            ("unambig_concat", A.unambig_concat(r1, r2), oracle_unambig_concat(r1, r2, 8)),
            ("unambig_iter", A.unambig_iter(r1), oracle_unambig_iter(r1, 8)),
            ("disjoint", A.languages_disjoint(r1, r2), oracle_disjoint(r1, r2, 8)),
        )
        bad += [(name, r1, r2, got, want) for name, got, want in checks if got != want]
    detail = f"1500 checks on 500 pairs, {len(bad)} disagreements at length 8"
    if bad:
        # say whether a longer bound settles each disagreement in the checker's favour
        settled = sum(
            got == {"unambig_concat": lambda: oracle_unambig_concat(r1, r2, 12),
                    "unambig_iter": lambda: oracle_unambig_iter(r1, 12),
                    "disjoint": lambda: oracle_disjoint(r1, r2, 12)}[name]()
            for name, r1, r2, got, _ in bad
        )
        detail += f" ({settled} of them agree with the oracle at length 12)"
    record(3, not bad, detail)
    assert not bad, bad[:3]


def _shortest(r, defs) -> int:
    for n in range(100):
        if A.enumerate_strings(r, n, defs):
            return n
    raise AssertionError("empty language")


def _corpus_outcomes():
    for path in sorted(default_corpus().glob("*.synth")):
        spec = parse_spec(path)
        library, outcomes = run_spec(spec, MODES["full"])
        yield path, spec, library, outcomes


def test_criterion_4_corpus_lenses_are_sound_and_bijective():
    problems = []
    tasks = 0
    checked = 0
    names = set()
    for path, spec, library, outcomes in _corpus_outcomes():
        small = shrink_definitions(spec.definitions)
        engine = L.LensEngine(spec.definitions, library)
        for out in outcomes:
            tasks += 1
            names.add(out.name)
            task = spec.task(out.name)
            if out.error is not None:
                problems.append(f"{out.name}: {out.error}")
                continue
            lens = out.result.lens
            typ = engine.typecheck(lens)
            if not (A.lang_equiv(typ.source, task.source, spec.definitions)
                    and A.lang_equiv(typ.target, task.target, spec.definitions)):
                problems.append(f"{out.name}: wrong type")
            for s, t in task.examples:
                if engine.get(lens, s) != t:
                    problems.append(f"{out.name}: example {s!r}")
            # every source string up to length 12 over 2-letter classes; when even the
            # shortest string is longer than that, 12 characters beyond the shortest
            for side, r, fwd, back in (("source", task.source, engine.get, engine.put),
                                       ("target", task.target, engine.put, engine.get)):
                m = _shortest(r, small)
                bound = 12 if m <= 12 else m + 12
                for s in A.enumerate_strings(r, bound, small):
                    checked += 1
                    if back(lens, fwd(lens, s)) != s:
                        problems.append(f"{out.name}: round trip fails on {side} {s!r}")
                        break
    required = {"title", "date_swap", "ab_xy", "repeat"}
    ok = not problems and tasks >= 10 and required <= names
    record(4, ok, f"{tasks} tasks, {checked} round trips, {len(problems)} problems")
    assert tasks >= 10
    assert required <= names
    assert not problems, problems[:5]


def _title_synth(config: SynthConfig | None = None):
    spec = parse_spec_text(TITLE_SPEC)
    syn = Synthesizer(spec.definitions, config=config)
    start = time.monotonic()
    res = syn.synth(rx.Var("legacy_title"), rx.Var("modern_title"))
    return spec, syn, res, time.monotonic() - start


def test_criterion_5_title_task():
    spec, _, res, elapsed = _title_synth()
    got = L.lens_get(res.lens, TITLE_IN, spec.definitions)
    ok = got == TITLE_OUT and elapsed < 5
    record(5, ok, f"get -> {got!r}, {elapsed:.2f}s (limit 5s)")
    assert got == TITLE_OUT
    assert elapsed < 5


def test_criterion_6_expansion_inference_counters():
    _, syn, res, _ = _title_synth()
    forced = syn.stats.forced_log
    reveals = [n for side, name, depth, n in syn.stats.reveal_log if (name, depth) == ("text_char", 0)]
    ok = (sorted(forced) == [("source", "legacy_title", 0), ("target", "modern_title", 0)]
          and reveals == [2])
    record(6, ok, f"forced {forced}, reveal(text_char,0) candidates {reveals}")
    assert sorted(forced) == [("source", "legacy_title", 0), ("target", "modern_title", 0)]
    assert reveals == [2]


def test_criterion_7_examples_pick_the_permutation():
    src = rx.Or(rx.Str("a"), rx.Str("b"))
    tgt = rx.Or(rx.Str("x"), rx.Str("y"))
    outputs = {}
    for want in ("x", "y"):
        res = Synthesizer().synth(src, tgt, [("a", want)])
        outputs[want] = (L.lens_get(res.lens, "a"), L.lens_get(res.lens, "b"))
    runs = {print_lens(Synthesizer().synth(src, tgt).lens) for _ in range(3)}
    golden = (GOLDEN / "ab_xy_no_examples.lens").read_text().strip()
    ok = outputs == {"x": ("x", "y"), "y": ("y", "x")} and runs == {golden}
    record(7, ok, f"with example: {outputs}; without: {sorted(runs)} vs golden {golden!r}")
    assert outputs == {"x": ("x", "y"), "y": ("y", "x")}
    assert runs == {golden}


def test_criterion_8_completeness_on_random_lenses():
    rng = random.Random(SEED)
    failures = []
    config = SynthConfig(max_pops=10**5, max_seconds=120)
    for _ in range(50):
        lens, typ = random_typed_lens(rng, 3)
        engine = L.LensEngine()
        srcs = [sample_string(typ.source, rng) for _ in range(2)]
        exs = list(dict.fromkeys((s, engine.get(lens, s)) for s in srcs))
        try:
            res = Synthesizer(config=config).synth(typ.source, typ.target, exs)
        except BudgetExhausted as e:
            failures.append((print_lens(lens), str(e)))
            continue
        if any(L.lens_get(res.lens, s) != t for s, t in exs):
            failures.append((print_lens(lens), "examples violated"))
    record(8, not failures, f"{50 - len(failures)}/50 random lenses re-synthesized (budget 1e5 pops)")
    assert not failures, failures[:3]


def test_criterion_9_expand_required_pays_off():
    spec = parse_spec(default_corpus() / "repeat.synth")
    task = spec.task("repeat")
    full = Synthesizer(spec.definitions, config=MODES["full"]).synth(task.source, task.target, task.examples)
    noer = Synthesizer(spec.definitions, config=replace(MODES["noer"], max_pops=10**4, max_seconds=300))
    try:
        noer.synth(task.source, task.target, task.examples)
        noer_result = f"{noer.stats.pops} pops"
        ok = noer.stats.pops > full.stats.pops
    except BudgetExhausted as e:
        noer_result = f"exhausted ({e})"
        ok = True
    record(9, ok, f"full {full.stats.pops} pops; noer {noer_result}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
