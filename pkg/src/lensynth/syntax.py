"""Concrete syntax for regexes, lenses and task files.

Task files hold three kinds of statements::

    typedef digit = [0-9];
    synth year_first : mdy <=> ymd with { "01/02/2024" <-> "2024-01-02" };
    lens shout : lower <=> upper = const("a","A") | const("b","B");

Regexes use quoted literals, ``|``, juxtaposition or ``.`` for
concatenation, postfix ``*``, parentheses, ``[...]`` classes, ``empty``
and typedef names.  ``(* ... *)`` and ``#`` start comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from . import lens as L
from . import regex as rx
from .regex import Definitions, Regex


class SpecSyntaxError(ValueError):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line, self.col, self.message = line, col, message


KEYWORDS = {"typedef", "synth", "lens", "with", "empty", "const", "swap", "iterate", "id"}
_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", '"': '"', "]": "]", "-": "-", "^": "^", "[": "["}


@dataclass(frozen=True)
class Token:
    kind: str  # str, ident, class, punct, eof
    value: str
    line: int
    col: int


_PUNCT = ("<=>", "<->", "=", ";", ":", "{", "}", ",", "(", ")", "|", ".", "*")


def _unescape(body: str, line: int, col: int) -> str:
    out, i = [], 0
    while i < len(body):
        c = body[i]
        if c != "\\":
            out.append(c)
            i += 1
            continue
        nxt = body[i + 1 : i + 2]
        if nxt == "x":
            hexd = body[i + 2 : i + 4]
            if not re.fullmatch(r"[0-9a-fA-F]{2}", hexd):
                raise SpecSyntaxError(line, col, "bad \\x escape")
            out.append(chr(int(hexd, 16)))
            i += 4
        elif nxt in _ESCAPES:
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            raise SpecSyntaxError(line, col, f"unknown escape \\{nxt}")
    return "".join(out)


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, lstart = 0, 1, 0
    n = len(text)

    def here() -> tuple[int, int]:
        return line, i - lstart + 1

    while i < n:
        c = text[i]
        if c == "\n":
            line, lstart = line + 1, i + 1
            i += 1
        elif c.isspace():
            i += 1
        elif c == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif text.startswith("(*", i):
            ln, col = here()
            end = text.find("*)", i + 2)
            if end < 0:
                raise SpecSyntaxError(ln, col, "unterminated comment")
            for k in range(i, end):
                if text[k] == "\n":
                    line, lstart = line + 1, k + 1
            i = end + 2
        elif c in "\"[":
            ln, col = here()
            close = '"' if c == '"' else "]"
            j = i + 1
            while j < n and text[j] != close:
                if text[j] == "\n":
                    raise SpecSyntaxError(ln, col, "newline inside literal")
                j += 2 if text[j] == "\\" else 1
            if j >= n:
                raise SpecSyntaxError(ln, col, "unterminated literal")
            raw = text[i + 1 : j]
            if c == '"':
                toks.append(Token("str", _unescape(raw, ln, col), ln, col))
            else:
                toks.append(Token("class", raw, ln, col))
            i = j + 1
        elif c.isalpha() or c == "_":
            ln, col = here()
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            toks.append(Token("ident", text[i:j], ln, col))
            i = j
        else:
            ln, col = here()
            for p in _PUNCT:
                if text.startswith(p, i):
                    toks.append(Token("punct", p, ln, col))
                    i += len(p)
                    break
            else:
                raise SpecSyntaxError(ln, col, f"unexpected character {c!r}")
    toks.append(Token("eof", "", line, i - lstart + 1))
    return toks


def expand_class(raw: str, line: int = 0, col: int = 0) -> list[str]:
    """Characters of a ``[...]`` body in written order; ranges are inclusive."""
    chars: list[str] = []
    i = 0

    def one(k: int) -> tuple[str, int]:
        if raw[k] == "\\":
            if raw[k + 1 : k + 2] == "x":
                return _unescape(raw[k : k + 4], line, col), k + 4
            return _unescape(raw[k : k + 2], line, col), k + 2
        return raw[k], k + 1

    while i < len(raw):
        lo, i = one(i)
        if i < len(raw) - 1 and raw[i] == "-":
            hi, i = one(i + 1)
            if ord(hi) < ord(lo):
                raise SpecSyntaxError(line, col, f"empty range {lo}-{hi}")
            chars.extend(chr(k) for k in range(ord(lo), ord(hi) + 1))
        else:
            chars.append(lo)
    if not chars:
        raise SpecSyntaxError(line, col, "empty character class")
    return chars


# Parsing --------------------------------------------------------------------


@dataclass
class SynthTask:
    name: str
    source: Regex
    target: Regex
    examples: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class LensDecl:
    name: str
    lens: L.Lens
    source: Regex | None = None
    target: Regex | None = None


@dataclass
class SpecFile:
    definitions: Definitions = field(default_factory=Definitions)
    char_classes: dict[str, str] = field(default_factory=dict)
    tasks: list[SynthTask] = field(default_factory=list)
    lens_decls: list[LensDecl] = field(default_factory=list)
    order: list[tuple[str, str]] = field(default_factory=list)

    def task(self, name: str) -> SynthTask:
        for t in self.tasks:
            if t.name == name:
                return t
        raise KeyError(name)


_REGEX_START = {"str", "class"}
_LENS_START_WORDS = {"const", "swap", "iterate", "id"}


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def found(self) -> str:
        t = self.tok
        if t.kind == "eof":
            return "end of input"
        if t.kind == "str":
            return "a string literal"
        if t.kind == "class":
            return "a character class"
        return repr(t.value)

    def fail(self, message: str, tok: Token | None = None) -> SpecSyntaxError:
        t = tok or self.tok
        return SpecSyntaxError(t.line, t.col, message)

    def at(self, value: str) -> bool:
        return self.tok.kind in ("punct", "ident") and self.tok.value == value

    def expect(self, value: str) -> Token:
        if not self.at(value):
            raise self.fail(f"expected {value!r}, found {self.found()}")
        t = self.tok
        self.pos += 1
        return t

    def name(self) -> str:
        t = self.tok
        if t.kind != "ident" or t.value in KEYWORDS:
            raise self.fail(f"expected a name, found {self.found()}")
        self.pos += 1
        return t.value

    def string(self) -> str:
        t = self.tok
        if t.kind != "str":
            raise self.fail("expected a string literal")
        self.pos += 1
        return t.value

    # regexes

    def _starts_regex_atom(self) -> bool:
        t = self.tok
        return t.kind in _REGEX_START or (t.kind == "ident" and (t.value == "empty" or t.value not in KEYWORDS)) or self.at("(")

    def regex(self) -> Regex:
        left = self._regex_cat()
        if self.at("|"):
            self.pos += 1
            return rx.Or(left, self.regex())
        return left

    def _regex_cat(self) -> Regex:
        left = self._regex_post()
        if self.at("."):
            self.pos += 1
            return rx.Concat(left, self._regex_cat())
        if self._starts_regex_atom():
            return rx.Concat(left, self._regex_cat())
        return left

    def _regex_post(self) -> Regex:
        r = self._regex_atom()
        while self.at("*"):
            self.pos += 1
            r = rx.Star(r)
        return r

    def _regex_atom(self) -> Regex:
        t = self.tok
        if t.kind == "str":
            self.pos += 1
            return rx.Str(t.value)
        if t.kind == "class":
            self.pos += 1
            return rx.char_class(expand_class(t.value, t.line, t.col))
        if self.at("("):
            self.pos += 1
            r = self.regex()
            self.expect(")")
            return r
        if self.at("empty"):
            self.pos += 1
            return rx.EMPTY
        return rx.Var(self.name())

    # lenses

    def _starts_lens(self, t: Token) -> bool:
        return (t.kind == "punct" and t.value == "(") or (
            t.kind == "ident" and (t.value in _LENS_START_WORDS or t.value not in KEYWORDS)
        )

    def lens(self) -> L.Lens:
        left = self._lens_or()
        if self.at(";") and self._starts_lens(self.peek()):
            self.pos += 1
            return L.Compose(left, self.lens())
        return left

    def _lens_or(self) -> L.Lens:
        left = self._lens_cat()
        if self.at("|"):
            self.pos += 1
            return L.Or(left, self._lens_or())
        return left

    def _lens_cat(self) -> L.Lens:
        left = self._lens_atom()
        if self.at("."):
            self.pos += 1
            return L.Concat(left, self._lens_cat())
        return left

    def _lens_atom(self) -> L.Lens:
        if self.at("("):
            self.pos += 1
            l = self.lens()
            self.expect(")")
            return l
        if self.at("const"):
            self.pos += 1
            self.expect("(")
            a = self.string()
            self.expect(",")
            b = self.string()
            self.expect(")")
            return L.Const(a, b)
        if self.at("swap"):
            self.pos += 1
            self.expect("(")
            l1 = self.lens()
            self.expect(",")
            l2 = self.lens()
            self.expect(")")
            return L.Swap(l1, l2)
        if self.at("iterate"):
            self.pos += 1
            self.expect("(")
            l1 = self.lens()
            self.expect(")")
            return L.Iterate(l1)
        if self.at("id"):
            self.pos += 1
            self.expect("(")
            r = self.regex()
            self.expect(")")
            return L.Identity(r)
        return L.Named(self.name())

    # statements

    def spec(self) -> SpecFile:
        bindings: list[tuple[str, Regex]] = []
        out = SpecFile()
        seen: set[str] = set()
        while self.tok.kind != "eof":
            if self.at("typedef"):
                self.pos += 1
                name_tok = self.tok
                name = self.name()
                self.expect("=")
                body_tok = self.tok
                body = self.regex()
                self.expect(";")
                if any(n == name for n, _ in bindings):
                    raise self.fail(f"duplicate typedef {name!r}", name_tok)
                try:
                    Definitions(bindings + [(name, body)])
                except rx.UnboundVariable as e:
                    raise self.fail(f"undefined name {e.name!r}", body_tok) from None
                bindings.append((name, body))
                if body_tok.kind == "class" and self.toks[self.pos - 2] is body_tok:
                    out.char_classes[name] = "".join(expand_class(body_tok.value))
                out.order.append(("typedef", name))
            elif self.at("synth"):
                self.pos += 1
                name_tok = self.tok
                name = self.name()
                self.expect(":")
                src = self.regex()
                self.expect("<=>")
                tgt = self.regex()
                exs: list[tuple[str, str]] = []
                if self.at("with"):
                    self.pos += 1
                    self.expect("{")
                    while not self.at("}"):
                        s = self.string()
                        self.expect("<->")
                        exs.append((s, self.string()))
                        if not self.at("}"):
                            self.expect(",")
                    self.expect("}")
                self.expect(";")
                if name in seen:
                    raise self.fail(f"duplicate name {name!r}", name_tok)
                seen.add(name)
                out.tasks.append(SynthTask(name, src, tgt, exs))
                out.order.append(("synth", name))
            elif self.at("lens"):
                self.pos += 1
                name_tok = self.tok
                name = self.name()
                src = tgt = None
                if self.at(":"):
                    self.pos += 1
                    src = self.regex()
                    self.expect("<=>")
                    tgt = self.regex()
                self.expect("=")
                l = self.lens()
                self.expect(";")
                if name in seen:
                    raise self.fail(f"duplicate name {name!r}", name_tok)
                seen.add(name)
                out.lens_decls.append(LensDecl(name, l, src, tgt))
                out.order.append(("lens", name))
            else:
                raise self.fail(f"expected typedef, synth or lens, found {self.found()}")
        out.definitions = Definitions(bindings)
        return out


def parse_regex(text: str) -> Regex:
    p = _Parser(text)
    r = p.regex()
    if p.tok.kind != "eof":
        raise p.fail("trailing input after regex")
    return r


def parse_lens(text: str) -> L.Lens:
    p = _Parser(text)
    l = p.lens()
    if p.tok.kind != "eof":
        raise p.fail("trailing input after lens")
    return l


def parse_spec_text(text: str) -> SpecFile:
    return _Parser(text).spec()


def parse_spec(path: str | Path) -> SpecFile:
    return parse_spec_text(Path(path).read_text(encoding="utf-8"))


# Printing -------------------------------------------------------------------


def quote(s: str) -> str:
    out = []
    for c in s:
        if c in '"\\':
            out.append("\\" + c)
        elif c == "\n":
            out.append("\\n")
        elif c == "\t":
            out.append("\\t")
        elif c == "\r":
            out.append("\\r")
        elif not c.isprintable() or ord(c) > 0x7E:
            out.append(f"\\x{ord(c):02x}")
        else:
            out.append(c)
    return '"' + "".join(out) + '"'


def _class_chars(r: Regex) -> list[str] | None:
    """The characters of a right-nested Or-chain of single characters, if r is one."""
    chars = []
    while isinstance(r, rx.Or):
        if not (isinstance(r.left, rx.Str) and len(r.left.s) == 1):
            return None
        chars.append(r.left.s)
        r = r.right
    if not (isinstance(r, rx.Str) and len(r.s) == 1) or not chars:
        return None
    chars.append(r.s)
    return chars if len(set(chars)) == len(chars) else None


def _class_body(chars: list[str]) -> str:
    def esc(c: str) -> str:
        if c in "\\]-^[":
            return "\\" + c
        if not c.isprintable() or ord(c) > 0x7E:
            return f"\\x{ord(c):02x}"
        return c

    out, i = [], 0
    while i < len(chars):
        j = i
        while j + 1 < len(chars) and ord(chars[j + 1]) == ord(chars[j]) + 1:
            j += 1
        if j - i >= 2:
            out.append(f"{esc(chars[i])}-{esc(chars[j])}")
        else:
            out.extend(esc(c) for c in chars[i : j + 1])
        i = j + 1
    return "[" + "".join(out) + "]"


def print_regex(r: Regex, level: int = 0) -> str:
    # levels: 0 alternation, 1 concatenation, 2 postfix, 3 atom
    chars = _class_chars(r) if isinstance(r, rx.Or) else None
    if chars is not None:
        return _class_body(chars)
    match r:
        case rx.Str(s):
            return quote(s)
        case rx.Empty():
            return "empty"
        case rx.Var(name):
            return name
        case rx.Star(inner):
            text, mine = print_regex(inner, 2) + "*", 2
        case rx.Concat(a, b):
            text, mine = f"{print_regex(a, 2)} {print_regex(b, 1)}", 1
        case rx.Or(a, b):
            text, mine = f"{print_regex(a, 1)} | {print_regex(b, 0)}", 0
        case _:
            raise TypeError(r)
    return f"({text})" if mine < level else text


def print_lens(l: L.Lens, level: int = 0) -> str:
    # levels: 0 compose, 1 or, 2 concat, 3 atom
    match l:
        case L.Const(a, b):
            return f"const({quote(a)},{quote(b)})"
        case L.Identity(r):
            return f"id({print_regex(r)})"
        case L.Iterate(l1):
            return f"iterate({print_lens(l1)})"
        case L.Swap(l1, l2):
            return f"swap({print_lens(l1)},{print_lens(l2)})"
        case L.Named(name):
            return name
        case L.Concat(l1, l2):
            text, mine = f"{print_lens(l1, 3)} . {print_lens(l2, 2)}", 2
        case L.Or(l1, l2):
            text, mine = f"{print_lens(l1, 2)} | {print_lens(l2, 1)}", 1
        case L.Compose(l1, l2):
            text, mine = f"{print_lens(l1, 1)} ; {print_lens(l2, 0)}", 0
        case _:
            raise TypeError(l)
    return f"({text})" if mine < level else text


pretty_print = print_lens


def print_spec(spec: SpecFile) -> str:
    tasks = {t.name: t for t in spec.tasks}
    decls = {d.name: d for d in spec.lens_decls}
    lines = []
    for kind, name in spec.order:
        if kind == "typedef":
            body = spec.definitions[name]
            lines.append(f"typedef {name} = {print_regex(body)};")
        elif kind == "synth":
            t = tasks[name]
            head = f"synth {name} : {print_regex(t.source)} <=> {print_regex(t.target)}"
            if t.examples:
                exs = ", ".join(f"{quote(s)} <-> {quote(u)}" for s, u in t.examples)
                head += f" with {{ {exs} }}"
            lines.append(head + ";")
        else:
            d = decls[name]
            typ = f" : {print_regex(d.source)} <=> {print_regex(d.target)}" if d.source is not None else ""
            lines.append(f"lens {name}{typ} = {print_lens(d.lens)};")
    return "\n".join(lines) + ("\n" if lines else "")
