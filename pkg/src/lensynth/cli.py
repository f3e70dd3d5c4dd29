"""Command line front end: ``lensynth synth|run|check|bench``."""

from __future__ import annotations

import argparse
import csv
import sys
import time
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from . import automata
from . import lens as L
from . import regex as rx
from .syntax import SpecFile, SpecSyntaxError, parse_spec, print_lens, print_regex
from .synthesis import (
    MODES,
    BudgetExhausted,
    NoLensExists,
    SynthConfig,
    Synthesizer,
    SynthResult,
    ValidationFailed,
)

SYNTH_FAILURES = (ValidationFailed, BudgetExhausted, NoLensExists)


class DeclError(ValueError):
    pass


@dataclass
class Outcome:
    name: str
    result: SynthResult | None = None
    error: Exception | None = None
    wall_ms: float = 0.0


def register_decl(spec: SpecFile, library: L.LensLibrary, decl) -> None:
    engine = L.LensEngine(spec.definitions, library)
    typ = engine.typecheck(decl.lens)
    src = decl.source if decl.source is not None else typ.source
    tgt = decl.target if decl.target is not None else typ.target
    if not automata.lang_equiv(src, typ.source, spec.definitions):
        raise DeclError(f"lens {decl.name}: declared source {print_regex(src)} does not match {print_regex(typ.source)}")
    if not automata.lang_equiv(tgt, typ.target, spec.definitions):
        raise DeclError(f"lens {decl.name}: declared target {print_regex(tgt)} does not match {print_regex(typ.target)}")
    library.add(decl.name, decl.lens, src, tgt)


def run_spec(spec: SpecFile, config: SynthConfig, only: str | None = None,
             library: L.LensLibrary | None = None) -> tuple[L.LensLibrary, list[Outcome]]:
    """Process declarations in file order, adding each lens to the library as it appears.

    With ``only`` set, stops after that task or lens; earlier tasks are still
    synthesized since later ones may rely on them.
    """
    library = library if library is not None else L.LensLibrary()
    tasks = {t.name: t for t in spec.tasks}
    decls = {d.name: d for d in spec.lens_decls}
    outcomes = []
    for kind, name in spec.order:
        if kind == "lens":
            register_decl(spec, library, decls[name])
        elif kind == "synth":
            t = tasks[name]
            start = time.monotonic()
            out = Outcome(name)
            try:
                out.result = Synthesizer(spec.definitions, library, config).synth(t.source, t.target, t.examples)
                library.add(name, out.result.lens, t.source, t.target)
            except SYNTH_FAILURES as e:
                out.error = e
            out.wall_ms = (time.monotonic() - start) * 1000
            outcomes.append(out)
        if name == only:
            break
    return library, outcomes


def render_output(spec: SpecFile, library: L.LensLibrary) -> str:
    """Typedefs followed by every library lens, in a form ``run`` can load back."""
    lines = [f"typedef {n} = {print_regex(body)};" for n, body in spec.definitions.items()]
    if lines:
        lines.append("")
    for e in library:
        lines.append(f"lens {e.name} : {print_regex(e.source)} <=> {print_regex(e.target)} =\n  {print_lens(e.lens)};")
    return "\n".join(lines) + "\n"


def _load(path: str) -> SpecFile:
    try:
        return parse_spec(path)
    except SpecSyntaxError as e:
        raise SystemExit(f"{path}:{e}")
    except OSError as e:
        raise SystemExit(f"cannot read {path}: {e.strerror}")


def _config(args) -> SynthConfig:
    cfg = MODES[args.mode]
    changes = {}
    if args.budget_pops is not None:
        changes["max_pops"] = args.budget_pops
    if args.budget_secs is not None:
        changes["max_seconds"] = args.budget_secs
    return replace(cfg, **changes) if changes else cfg


def cmd_synth(args) -> int:
    spec = _load(args.spec)
    if args.task is not None and args.task not in {n for k, n in spec.order if k != "typedef"}:
        print(f"no task or lens named {args.task!r}", file=sys.stderr)
        return 1
    try:
        library, outcomes = run_spec(spec, _config(args), args.task)
    except (L.LensTypeError, DeclError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    status = 0
    for o in outcomes:
        if o.error is not None:
            print(f"task {o.name}: failed: {o.error}", file=sys.stderr)
            status = 1
        else:
            st = o.result.stats
            print(f"task {o.name}: ok pops={st.pops} expansions={st.expansions} "
                  f"forced={st.forced} wall_ms={o.wall_ms:.1f}", file=sys.stderr)
    text = render_output(spec, library)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


def cmd_run(args) -> int:
    spec = _load(args.lens_file)
    try:
        library, outcomes = run_spec(spec, _config(args), args.lens)
    except (L.LensTypeError, DeclError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    for o in outcomes:
        if o.error is not None:
            print(f"task {o.name}: failed: {o.error}", file=sys.stderr)
    if args.lens not in library:
        print(f"no lens named {args.lens!r}", file=sys.stderr)
        return 1
    data = Path(args.input).read_text() if args.input else sys.stdin.read()
    if not args.raw and data.endswith("\n"):
        data = data[:-1]
    engine = L.LensEngine(spec.definitions, library)
    lens = L.Named(args.lens)
    try:
        out = engine.put(lens, data) if args.put else engine.get(lens, data)
    except (L.InputNotInSource, L.InputNotInTarget) as e:
        print(f"input rejected: {e}", file=sys.stderr)
        return 2
    sys.stdout.write(out if args.raw else out + "\n")
    return 0


def check_spec(spec: SpecFile) -> list[tuple[str, bool, str]]:
    """(name, ok, message) for every task and lens declaration."""
    defs = spec.definitions
    report = []
    library = L.LensLibrary()
    decls = {d.name: d for d in spec.lens_decls}
    tasks = {t.name: t for t in spec.tasks}
    for kind, name in spec.order:
        if kind == "lens":
            try:
                register_decl(spec, library, decls[name])
                report.append((name, True, "lens well typed"))
            except (L.LensTypeError, DeclError, L.UnknownLens) as e:
                report.append((name, False, str(e)))
        elif kind == "synth":
            t = tasks[name]
            problems = []
            for side, r in (("source", t.source), ("target", t.target)):
                try:
                    if not automata.strongly_unambiguous(r, defs):
                        problems.append(f"{side} type is ambiguous")
                except rx.UnboundVariable as e:
                    problems.append(f"{side} mentions undefined name {e.name!r}")
            if problems:
                report.append((name, False, "; ".join(problems)))
                continue
            fwd: dict[str, str] = {}
            back: dict[str, str] = {}
            for s, u in t.examples:
                if not automata.matches(t.source, s, defs):
                    problems.append(f"example {s!r} is not in the source")
                if not automata.matches(t.target, u, defs):
                    problems.append(f"example {u!r} is not in the target")
                if fwd.setdefault(s, u) != u or back.setdefault(u, s) != s:
                    problems.append(f"examples {s!r} <-> {u!r} break bijectivity")
            report.append((name, not problems, "; ".join(problems) or f"ok, {len(t.examples)} example(s)"))
    return report


def cmd_check(args) -> int:
    spec = _load(args.spec)
    report = check_spec(spec)
    for name, ok, msg in report:
        print(f"{name}: {'PASS' if ok else 'FAIL'} {msg}")
    return 0 if all(ok for _, ok, _ in report) else 1


def default_corpus() -> Path:
    return Path(str(resources.files("lensynth") / "corpus"))


BENCH_COLUMNS = ["task", "mode", "success", "wall_ms", "pops", "expansions_total", "expansions_forced"]


def bench_rows(spec_dir: Path, config: SynthConfig, mode: str) -> list[dict]:
    rows = []
    for path in sorted(spec_dir.glob("*.synth")):
        spec = parse_spec(path)
        _, outcomes = run_spec(spec, config)
        for o in outcomes:
            st = o.result.stats if o.result else None
            rows.append({
                "task": f"{path.stem}/{o.name}",
                "mode": mode,
                "success": int(o.result is not None),
                "wall_ms": f"{o.wall_ms:.1f}",
                "pops": st.pops if st else "",
                "expansions_total": st.expansions if st else "",
                "expansions_forced": st.forced if st else "",
            })
    return rows


def cmd_bench(args) -> int:
    spec_dir = Path(args.spec_dir) if args.spec_dir else default_corpus()
    modes = list(MODES) if args.mode == "all" else [args.mode]
    rows = []
    for m in modes:
        args.mode = m
        rows += bench_rows(spec_dir, _config(args), m)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(out, BENCH_COLUMNS)
        w.writeheader()
        w.writerows(rows)
    finally:
        if args.out:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lensynth", description="Synthesize bijective string lenses from regex types.")
    sub = p.add_subparsers(dest="command", required=True)

    def budget(sp, default_mode="full", modes=tuple(MODES)):
        sp.add_argument("--mode", choices=modes, default=default_mode)
        sp.add_argument("--budget-pops", type=int, default=None, metavar="N")
        sp.add_argument("--budget-secs", type=float, default=None, metavar="S")

    sp = sub.add_parser("synth", help="synthesize every task in a file and print the lenses")
    sp.add_argument("spec")
    sp.add_argument("--task", help="stop after this task")
    sp.add_argument("--out", "-o", help="write the lens file here instead of stdout")
    budget(sp)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("run", help="apply a lens to stdin")
    sp.add_argument("lens_file")
    sp.add_argument("--lens", required=True)
    way = sp.add_mutually_exclusive_group()
    way.add_argument("--get", action="store_true", help="source to target (default)")
    way.add_argument("--put", action="store_true", help="target to source")
    sp.add_argument("--input", "-i", help="read input from this file instead of stdin")
    sp.add_argument("--raw", action="store_true", help="do not strip or add a trailing newline")
    budget(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("check", help="check types and examples without synthesizing")
    sp.add_argument("spec")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("bench", help="run a directory of task files and print CSV")
    sp.add_argument("spec_dir", nargs="?", help="defaults to the bundled corpus")
    sp.add_argument("--out", "-o", help="write CSV here instead of stdout")
    budget(sp, modes=tuple(MODES) + ("all",))
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
