# Tasks in one file run in order; each result is available to later tasks
# at the boundaries where its named formats appear.

from lensynth import LensEngine
from lensynth.cli import default_corpus, run_spec
from lensynth.synthesis import MODES
from lensynth.syntax import parse_spec, print_lens

spec = parse_spec(default_corpus() / "people.synth")
library, outcomes = run_spec(spec, MODES["full"])

for o in outcomes:
    st = o.result.stats
    print(f"{o.name}: {st.pops} pops, {o.wall_ms:.0f} ms")
    print("  ", print_lens(o.result.lens))

engine = LensEngine(spec.definitions, library)
roster = "Ada Lovelace;Alan Turing;"
out = engine.get(library["people"].lens, roster)
print()
print(out)
assert engine.put(library["people"].lens, out) == roster

# the same file with the library switched off has to rediscover the person lens
_, cold = run_spec(spec, MODES["nocs"])
print({o.name: o.result.stats.pops for o in cold if o.result})
