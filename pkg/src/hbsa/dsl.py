"""Line-oriented circuit description language.

    circuit <name>
    hwp <angle-deg> on <A|B|both>
    fbs on <A|B|both>
    fs on <A|B|both> [arm x1|x2]
    stage2 on <A|B|both>
    bs on <A|B|both>
    ui m=<arm> n=<arm> on <A|B|both>
    delay <t0|t1> on <A|B|both>

``#`` starts a comment.  Imperfect elements may carry one trailing
option: ``fs ... leakage=<x>``, ``bs ... imbalance=<x>``,
``stage2 ... angle=<deg>``.  The serializer only writes an option when
it differs from the ideal value, so ideal circuits use the bare grammar.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .circuit import Circuit, Step
from .state import ARMS

_ALLOWED = re.compile(r"[A-Za-z0-9_.+\-=:,\t ]*")
_TOKEN = re.compile(r"\S+")
_NAME = re.compile(r"[A-Za-z0-9_.\-+]+")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass
class _Tok:
    text: str
    col: int  # 1-based


def _number(tok: _Tok, lineno: int, what: str) -> float:
    try:
        v = float(tok.text)
    except ValueError:
        raise ParseError(f"{what} must be a number, got {tok.text!r}", lineno, tok.col) from None
    if not math.isfinite(v):
        raise ParseError(f"{what} must be finite", lineno, tok.col)
    return v


def _option(toks, lineno, key, default):
    if not toks:
        return default
    tok = toks[0]
    if len(toks) > 1:
        raise ParseError(f"unexpected token {toks[1].text!r}", lineno, toks[1].col)
    k, sep, v = tok.text.partition("=")
    if sep != "=" or k != key:
        raise ParseError(f"expected option {key}=<value>, got {tok.text!r}", lineno, tok.col)
    return _number(_Tok(v, tok.col + len(k) + 1), lineno, key)


def _slot(toks, i, lineno, eol_col):
    if i >= len(toks) or toks[i].text != "on":
        col = toks[i].col if i < len(toks) else eol_col
        raise ParseError("expected 'on <A|B|both>'", lineno, col)
    if i + 1 >= len(toks):
        raise ParseError("missing slot after 'on'", lineno, eol_col)
    s = toks[i + 1]
    if s.text not in ("A", "B", "both"):
        raise ParseError(f"slot must be A, B or both, got {s.text!r}", lineno, s.col)
    return s.text, i + 2


def _arm_kv(tok: _Tok, key: str, lineno: int) -> str:
    k, sep, v = tok.text.partition("=")
    if sep != "=" or k != key:
        raise ParseError(f"expected {key}=<arm>, got {tok.text!r}", lineno, tok.col)
    if v not in ARMS:
        raise ParseError(f"arm must be one of {', '.join(ARMS)}, got {v!r}", lineno, tok.col + len(k) + 1)
    return v


def parse_circuit(text: str) -> Circuit:
    name = "circuit"
    steps: list[Step] = []
    routed = {"A": None, "B": None}  # line of the first fbs seen per slot
    seen_body = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        m = _ALLOWED.fullmatch(line)
        if m is None:
            bad = next(i for i, ch in enumerate(line) if not _ALLOWED.fullmatch(ch))
            raise ParseError(f"unexpected character {line[bad]!r}", lineno, bad + 1)
        toks = [_Tok(t.group(), t.start() + 1) for t in _TOKEN.finditer(line)]
        if not toks:
            continue
        eol = len(line.rstrip()) + 1
        head, rest = toks[0], toks[1:]
        kind = head.text
        if kind == "circuit":
            if seen_body:
                raise ParseError("'circuit' header must come first", lineno, head.col)
            if len(rest) != 1 or not _NAME.fullmatch(rest[0].text):
                raise ParseError("expected 'circuit <name>'", lineno, (rest[1].col if len(rest) > 1 else eol))
            name = rest[0].text
            seen_body = True
            continue
        seen_body = True
        if kind == "hwp":
            if not rest:
                raise ParseError("hwp needs an angle", lineno, eol)
            angle = _number(rest[0], lineno, "angle")
            slot, i = _slot(rest, 1, lineno, eol)
            if rest[i:]:
                raise ParseError(f"unexpected token {rest[i].text!r}", lineno, rest[i].col)
            steps.append(Step("hwp", (angle,), slot))
        elif kind == "fbs":
            slot, i = _slot(rest, 0, lineno, eol)
            if rest[i:]:
                raise ParseError(f"unexpected token {rest[i].text!r}", lineno, rest[i].col)
            for s in (("A", "B") if slot == "both" else (slot,)):
                if routed[s] is not None:
                    raise ParseError(f"duplicate fbs on photon {s} (first on line {routed[s]})",
                                     lineno, head.col)
                routed[s] = lineno
            steps.append(Step("fbs", (), slot))
        elif kind == "fs":
            slot, i = _slot(rest, 0, lineno, eol)
            path = None
            if i < len(rest) and rest[i].text == "arm":
                if i + 1 >= len(rest):
                    raise ParseError("missing path after 'arm'", lineno, eol)
                if rest[i + 1].text not in ("x1", "x2"):
                    raise ParseError(f"path must be x1 or x2, got {rest[i + 1].text!r}",
                                     lineno, rest[i + 1].col)
                path = rest[i + 1].text
                i += 2
            leak = _option(rest[i:], lineno, "leakage", 0.0)
            if not 0.0 <= leak <= 1.0:
                raise ParseError("leakage must lie in [0, 1]", lineno, rest[i].col)
            steps.append(Step("fs", (path, leak), slot))
        elif kind == "stage2":
            slot, i = _slot(rest, 0, lineno, eol)
            steps.append(Step("stage2", (_option(rest[i:], lineno, "angle", 22.5),), slot))
        elif kind == "bs":
            slot, i = _slot(rest, 0, lineno, eol)
            imb = _option(rest[i:], lineno, "imbalance", 0.0)
            if not -0.5 <= imb <= 0.5:
                raise ParseError("imbalance must lie in [-0.5, 0.5]", lineno, rest[i].col)
            steps.append(Step("bs", (imb,), slot))
        elif kind == "ui":
            if len(rest) < 2:
                raise ParseError("ui needs m=<arm> n=<arm>", lineno, eol)
            m = _arm_kv(rest[0], "m", lineno)
            n = _arm_kv(rest[1], "n", lineno)
            if m == n:
                raise ParseError("ui arms must differ", lineno, rest[1].col)
            slot, i = _slot(rest, 2, lineno, eol)
            if rest[i:]:
                raise ParseError(f"unexpected token {rest[i].text!r}", lineno, rest[i].col)
            steps.append(Step("ui", (m, n), slot))
        elif kind == "delay":
            if not rest or rest[0].text not in ("t0", "t1"):
                raise ParseError("delay needs t0 or t1", lineno, rest[0].col if rest else eol)
            slot, i = _slot(rest, 1, lineno, eol)
            if rest[i:]:
                raise ParseError(f"unexpected token {rest[i].text!r}", lineno, rest[i].col)
            steps.append(Step("delay", (rest[0].text,), slot))
        else:
            raise ParseError(f"unknown element {kind!r}", lineno, head.col)
    return Circuit(name, tuple(steps))


def _num(x: float) -> str:
    return repr(float(x))


def serialize_circuit(circuit: Circuit) -> str:
    lines = [f"circuit {circuit.name}"]
    for s in circuit.steps:
        on = f"on {s.slot}"
        if s.kind == "hwp":
            lines.append(f"hwp {_num(s.args[0])} {on}")
        elif s.kind == "fbs":
            lines.append(f"fbs {on}")
        elif s.kind == "fs":
            path, leak = s.args
            line = f"fs {on}" + (f" arm {path}" if path else "")
            lines.append(line + (f" leakage={_num(leak)}" if leak else ""))
        elif s.kind == "stage2":
            lines.append(f"stage2 {on}" + (f" angle={_num(s.args[0])}" if s.args[0] != 22.5 else ""))
        elif s.kind == "bs":
            lines.append(f"bs {on}" + (f" imbalance={_num(s.args[0])}" if s.args[0] else ""))
        elif s.kind == "ui":
            lines.append(f"ui m={s.args[0]} n={s.args[1]} {on}")
        else:
            lines.append(f"delay {s.args[0]} {on}")
    return "\n".join(lines) + "\n"
