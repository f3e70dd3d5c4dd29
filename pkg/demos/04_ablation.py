# How much the expansion-inference stages save, on a task where
# the two sides need an unrolling that nothing forces.

import time
from dataclasses import replace

from lensynth.cli import default_corpus
from lensynth.synthesis import MODES, BudgetExhausted, Synthesizer
from lensynth.syntax import parse_spec, print_regex

spec = parse_spec(default_corpus() / "repeat.synth")
task = spec.task("repeat")
print("few  =", print_regex(spec.definitions["few"]))
print("many =", print_regex(spec.definitions["many"]))
print()

for mode in ("full", "nofpe", "noer"):
    cfg = replace(MODES[mode], max_seconds=30)
    syn = Synthesizer(spec.definitions, config=cfg)
    t0 = time.monotonic()
    try:
        syn.synth(task.source, task.target, task.examples)
        verdict = f"{syn.stats.pops} pops, {syn.stats.expansions} expansions"
    except BudgetExhausted as e:
        verdict = f"no lens ({e})"
    print(f"{mode:6} {verdict:40} {time.monotonic() - t0:6.1f}s")
