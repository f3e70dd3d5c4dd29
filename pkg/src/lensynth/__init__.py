"""Synthesis of bijective string lenses between regular-expression types."""

from .automata import (
    compile_dfa,
    enumerate_strings,
    lang_equiv,
    language_empty,
    languages_disjoint,
    matches,
    strongly_unambiguous,
    unambig_concat,
    unambig_iter,
)
from .dnf import DnfRegex, Rule, apply_rewrite_at, to_dnf, to_regex, transitive_set
from .dnf_lens import DnfLens, dnf_lens_get, dnf_lens_put, dnf_lens_to_lens, simplify_lens, typecheck_dnf_lens
from .lens import (
    Lens,
    LensEngine,
    LensLibrary,
    LensTypeError,
    invert,
    lens_get,
    lens_put,
    typecheck_lens,
)
from .regex import Definitions, Regex, parse_unique
from .syntax import parse_lens, parse_regex, parse_spec, parse_spec_text, pretty_print, print_lens, print_regex
from .synthesis import (
    MODES,
    BudgetExhausted,
    NoLensExists,
    SynthConfig,
    Synthesizer,
    ValidationFailed,
    synth_dnf_lens,
    synth_lens,
)

__all__ = [
    "BudgetExhausted", "Definitions", "DnfLens", "DnfRegex", "Lens", "LensEngine", "LensLibrary",
    "LensTypeError", "MODES", "NoLensExists", "Regex", "Rule", "SynthConfig", "Synthesizer",
    "ValidationFailed", "apply_rewrite_at", "compile_dfa", "dnf_lens_get", "dnf_lens_put",
    "dnf_lens_to_lens", "enumerate_strings", "invert", "lang_equiv", "language_empty",
    "languages_disjoint", "lens_get", "lens_put", "matches", "parse_lens", "parse_regex",
    "parse_spec", "parse_spec_text", "parse_unique", "pretty_print", "print_lens", "print_regex",
    "simplify_lens", "strongly_unambiguous", "synth_dnf_lens", "synth_lens", "to_dnf", "to_regex",
    "transitive_set", "typecheck_dnf_lens", "typecheck_lens", "unambig_concat", "unambig_iter",
]
