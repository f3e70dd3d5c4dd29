# When several alignments type-check, examples decide which one you get.

from lensynth import Synthesizer, lens_get
from lensynth.regex import Or, Str
from lensynth.syntax import print_lens

src = Or(Str("a"), Str("b"))
tgt = Or(Str("x"), Str("y"))

# without examples the tie goes to the first alignment found, every time
for _ in range(3):
    print("no examples:  ", print_lens(Synthesizer().synth(src, tgt).lens))

for want in "xy":
    lens = Synthesizer().synth(src, tgt, [("a", want)]).lens
    print(f"a <-> {want}:     ", print_lens(lens), "  b ->", lens_get(lens, "b"))

# an example outside the target type is caught before any search
from lensynth.synthesis import ValidationFailed
try:
    Synthesizer().synth(src, tgt, [("a", "z")])
except ValidationFailed as e:
    print("rejected:", e)
