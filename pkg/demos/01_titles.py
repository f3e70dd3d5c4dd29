# Walk through synthesizing a lens between two bug-tracker title formats,
# looking at each intermediate step the search takes.

from lensynth import LensEngine, Synthesizer
from lensynth.regex import Var
from lensynth.dnf import show, to_dnf
from lensynth.syntax import parse_spec_text, print_lens

spec = parse_spec_text("""
typedef text_char = [a-zA-Z0-9 ];
typedef legacy_title = "<Field Id=2>" text_char* "</Field>";
typedef modern_title = ("Title: " text_char text_char* ",") | "";
""")
defs = spec.definitions

# the two formats as normal forms; names stay opaque until substituted
print("legacy:", show(to_dnf(defs["legacy_title"])))
print("modern:", show(to_dnf(defs["modern_title"])))

syn = Synthesizer(defs)
res = syn.synth(Var("legacy_title"), Var("modern_title"))  # no examples needed here

print()
print("forced substitutions:", syn.stats.forced_log)
print("reveal candidates:   ", syn.stats.reveal_log)
print("queue pops:", syn.stats.pops, " expansions:", syn.stats.expansions)

# the pair of normal forms that finally lined up
print()
print("aligned source:", show(res.src))
print("aligned target:", show(res.tgt))
print("sequence permutation:", res.dnf_lens.perm)

print()
print(print_lens(res.lens))

engine = LensEngine(defs)
for s in ["<Field Id=2>Return 400 on bad PUT request</Field>", "<Field Id=2></Field>"]:
    t = engine.get(res.lens, s)
    print(repr(s), "->", repr(t), "->", repr(engine.put(res.lens, t)))
