"""Detection statistics, signature tables and the event classifier.

Detection model
---------------
A detector is an (arm, path tag, polarization) triple written like
``a11H`` (arm a1, path x1, horizontal).  Frequency is not resolved, so
amplitudes that differ only in frequency add incoherently.

The pair's emission time is not observed, only the delay between the two
clicks.  With ``grouping="relative"`` (the default) amplitudes that agree
on both detectors and on the *relative* delay are summed before
squaring.  ``grouping="absolute"`` keeps the two absolute delay tags
apart instead.

Before the circuit runs, the input is paired with its arm-exchanged
partner (see :func:`exchange_symmetrize`).  ``statistics="ordered"``
skips that step and ``statistics="boson"`` uses plain symmetrization of
the whole label; both are kept for comparison only.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, NamedTuple

from .circuit import Circuit, build_hbsa_circuit, run
from .state import (ALL_INDICES, DEFAULT_TOL, ZERO_THRESHOLD, Delay, HyperBellIndex,
                    Label, Part, TwoPhotonState, make_hyper_bell)

SCHEMA_VERSION = "1.0"


class IntervalClass(str, Enum):
    ZERO = "0"
    T0 = "t0"
    T1 = "t1"
    T1_PM_T0 = "t1±t0"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "IntervalClass":
        aliases = {"zero": "0", "t1pm": "t1±t0", "t1_pm_t0": "t1±t0", "t1+-t0": "t1±t0"}
        return cls(aliases.get(text, text))


_CLASS_OF = {(0, 0): IntervalClass.ZERO, (1, 0): IntervalClass.T0,
             (0, 1): IntervalClass.T1, (1, 1): IntervalClass.T1_PM_T0}


class DetectionError(ValueError):
    pass


class TableError(RuntimeError):
    pass


def interval_class(d1, d2) -> IntervalClass:
    """Class of the symbolic delay difference between two tags."""
    key = (abs(d1[0] - d2[0]), abs(d1[1] - d2[1]))
    try:
        return _CLASS_OF[key]
    except KeyError:
        raise DetectionError(f"delay difference {key} is outside the supported set") from None


def _rel_class(rel) -> IntervalClass:
    return interval_class(rel, (0, 0))


def detector_id(label: Label) -> str:
    if label.xtag == "unset":
        raise DetectionError(f"photon reached a detector without a path tag: {label.short()}")
    return f"{label.arm}{label.xtag[1]}{label.pol}"


class DetectionEvent(NamedTuple):
    det1: str
    det2: str
    interval: IntervalClass

    @classmethod
    def make(cls, d1: str, d2: str, interval) -> "DetectionEvent":
        a, b = sorted((d1, d2))
        return cls(a, b, IntervalClass.parse(str(interval)))

    def pretty(self) -> str:
        def f(d):
            return f"{d[:3]}^{d[3]}"
        return f"{f(self.det1)} {f(self.det2)} [{self.interval}]"


# ---------------------------------------------------------------- statistics

def exchange_symmetrize(state: TwoPhotonState) -> TwoPhotonState:
    """Pair every history with the one in which the photons trade input arms.

    Each photon keeps its own polarization and frequency preparation.
    For the analyzer inputs (photon A in the ``a`` arms, B in ``b``) the
    two histories are orthogonal, so the result stays normalized.
    """
    return (state + state.arm_exchanged()).scale(1 / math.sqrt(2))


def prepare(state: TwoPhotonState, statistics: str = "exchange") -> TwoPhotonState:
    if statistics == "exchange":
        return exchange_symmetrize(state)
    if statistics == "boson":
        return (state + state.swapped()).scale(1 / math.sqrt(2))
    if statistics == "ordered":
        return state
    raise ValueError(f"unknown statistics {statistics!r}")


def grouped_amplitudes(state: TwoPhotonState, grouping: str = "relative") -> dict:
    out: dict = defaultdict(complex)
    for (a, b), amp in state.items():
        da, db = detector_id(a), detector_id(b)
        if grouping == "relative":
            key = (da, db, a.freq, b.freq, b.delay - a.delay)
        elif grouping == "absolute":
            key = (da, db, a.freq, b.freq, tuple(a.delay), tuple(b.delay))
        else:
            raise ValueError(f"unknown grouping {grouping!r}")
        out[key] += amp
    return out


@dataclass(frozen=True)
class Distribution:
    events: tuple[tuple[DetectionEvent, float], ...]
    raw_total: float

    def as_dict(self) -> dict[DetectionEvent, float]:
        return dict(self.events)

    def support(self) -> frozenset[DetectionEvent]:
        return frozenset(e for e, _ in self.events)

    def total(self) -> float:
        return sum(p for _, p in self.events)


def detection_distribution(state: TwoPhotonState, grouping: str = "relative",
                           renormalize: bool = False,
                           threshold: float = ZERO_THRESHOLD) -> Distribution:
    """Event probabilities for a state that has reached the detectors."""
    probs: dict[DetectionEvent, float] = defaultdict(float)
    for key, amp in grouped_amplitudes(state, grouping).items():
        p = abs(amp) ** 2
        if grouping == "relative":
            cls = _rel_class(key[4])
        else:
            cls = interval_class(key[4], key[5])
        probs[DetectionEvent.make(key[0], key[1], cls)] += p
    raw = sum(probs.values())
    scale = 1.0 / raw if renormalize and raw > 0 else 1.0
    events = tuple(sorted(((e, p * scale) for e, p in probs.items() if p >= threshold)))
    return Distribution(events, raw)


def analyze(idx_or_state, circuit: Circuit | None = None, *, aux: Part = "psi+",
            statistics: str = "exchange", grouping: str = "relative",
            renormalize: bool = False) -> Distribution:
    circuit = build_hbsa_circuit() if circuit is None else circuit
    state = idx_or_state
    if not isinstance(state, TwoPhotonState):
        state = make_hyper_bell(tuple(idx_or_state), aux)
    out = run(circuit, prepare(state, statistics))
    return detection_distribution(out, grouping, renormalize)


# ------------------------------------------------------------ signature table

@dataclass(frozen=True)
class SignatureTable:
    rows: Mapping[HyperBellIndex, Mapping[DetectionEvent, float]]
    raw_totals: Mapping[HyperBellIndex, float] = field(default_factory=dict)

    def events(self, idx: HyperBellIndex) -> frozenset[DetectionEvent]:
        return frozenset(self.rows[idx])

    def intervals(self, idx: HyperBellIndex) -> frozenset[IntervalClass]:
        return frozenset(e.interval for e in self.rows[idx])

    def overlaps(self) -> list[tuple[DetectionEvent, HyperBellIndex, HyperBellIndex]]:
        owner: dict[DetectionEvent, HyperBellIndex] = {}
        clashes = []
        for idx in self.rows:
            for ev in self.rows[idx]:
                if ev in owner:
                    clashes.append((ev, owner[ev], idx))
                else:
                    owner[ev] = idx
        return clashes


def signature_table(circuit: Circuit | None = None, *, aux: Part = "psi+",
                    statistics: str = "exchange", grouping: str = "relative",
                    strict: bool = True, tol: float = DEFAULT_TOL) -> SignatureTable:
    """Run all sixteen inputs and collect their detection signatures.

    With ``strict`` every row must carry total probability 1 within
    ``tol``; otherwise rows are renormalized and the raw totals kept.
    """
    circuit = build_hbsa_circuit() if circuit is None else circuit
    rows, totals = {}, {}
    for idx in ALL_INDICES:
        try:
            dist = analyze(idx, circuit, aux=aux, statistics=statistics, grouping=grouping)
        except Exception as exc:
            raise TableError(f"row {format_index(idx)}: {exc}") from exc
        totals[idx] = dist.raw_total
        if strict and abs(dist.raw_total - 1.0) > tol:
            raise TableError(f"row {format_index(idx)}: probabilities sum to {dist.raw_total!r}")
        scale = 1.0 if strict else 1.0 / dist.raw_total
        rows[idx] = {e: p * scale for e, p in dist.events}
    return SignatureTable(rows, totals)


class Classifier:
    """Event -> input lookup built from a disjoint table."""

    def __init__(self, table: SignatureTable):
        clashes = table.overlaps()
        if clashes:
            ev, i, j = clashes[0]
            raise TableError(f"{len(clashes)} events shared between rows, e.g. "
                             f"{ev.pretty()} in {format_index(i)} and {format_index(j)}")
        self._owner = {ev: idx for idx, evs in table.rows.items() for ev in evs}

    def __len__(self):
        return len(self._owner)

    def classify(self, event: DetectionEvent) -> HyperBellIndex:
        try:
            return self._owner[event]
        except KeyError:
            raise KeyError(f"event {event.pretty()} is not produced by any input") from None

    def get(self, event: DetectionEvent, default=None):
        return self._owner.get(event, default)


def classify(event: DetectionEvent, table: SignatureTable) -> HyperBellIndex:
    return Classifier(table).classify(event)


# ------------------------------------------------------------------- oracle

# Expected signatures, one row per input.  Each entry is "X Y s|o": the
# detectors X and Y fire with the same (s: HH or VV) or opposite
# (o: HV or VH) polarizations.
_TABLE = {
    ("phi+", "phi+"): ("0", "a11 b22 o; a12 b21 o; b11 a22 o; b12 a21 o"),
    ("phi+", "phi-"): ("0", "a11 b21 s; a12 b22 s; b11 a21 s; b12 a22 s"),
    ("phi-", "phi+"): ("0", "a11 a12 s; a12 a11 s; a21 a22 s; a22 a21 s; b11 b12 s; b12 b11 s; "
                            "b21 b22 s; b22 b21 s"),
    ("phi-", "phi-"): ("0", "a11 a11 o; a12 a12 o; a21 a21 o; a22 a22 o; b11 b11 o; b12 b12 o; "
                            "b21 b21 o; b22 b22 o"),
    ("psi+", "psi+"): ("t0", "a11 b12 s; a12 b11 s; a21 b22 s; a22 b21 s; a11 a22 o; a12 a21 o; "
                             "b11 b22 o; b12 b21 o"),
    ("psi+", "psi-"): ("t0", "a11 b11 o; a12 b12 o; a21 b21 o; a22 b22 o; a11 a21 s; a12 a22 s; "
                             "b11 b21 s; b12 b22 s"),
    ("psi-", "psi+"): ("t0", "a11 a12 s; a12 a11 s; a21 a22 s; a22 a21 s; b11 b12 s; b12 b11 s; "
                             "b21 b22 s; b22 b21 s; a11 b22 o; a12 b21 o; a21 b12 o; a22 b11 o"),
    ("psi-", "psi-"): ("t0", "a11 a11 o; a12 a12 o; a21 a21 o; a22 a22 o; b11 b11 o; b12 b12 o; "
                             "b21 b21 o; b22 b22 o; a11 b21 s; a12 b22 s; a21 b11 s; a22 b12 s"),
    ("phi+", "psi+"): ("t1", "a11 a12 o; a12 a11 o; a21 a22 o; a22 a21 o; b11 b12 o; b12 b11 o; "
                             "b21 b22 o; b22 b21 o; a11 b22 o; a12 b21 o; a21 b12 o; a22 b11 o"),
    ("phi+", "psi-"): ("t1", "a11 a11 s; a12 a12 s; a21 a21 s; a22 a22 s; b11 b11 s; b12 b12 s; "
                             "b21 b21 s; b22 b22 s; a11 b21 s; a12 b22 s; a21 b11 s; a22 b12 s"),
    ("phi-", "psi+"): ("t1", "a11 a12 s; a12 a11 s; a21 a22 s; a22 a21 s; b11 b12 s; b12 b11 s; "
                             "b21 b22 s; b22 b21 s; a11 b22 s; a12 b21 s; a21 b12 s; a22 b11 s"),
    ("phi-", "psi-"): ("t1", "a11 a11 o; a12 a12 o; a21 a21 o; a22 a22 o; b11 b11 o; b12 b12 o; "
                             "b21 b21 o; b22 b22 o; a11 b21 o; a12 b22 o; a21 b11 o; a22 b12 o"),
    ("psi+", "phi+"): ("t1±t0", "a11 a22 s; a11 a22 o; a12 a21 s; a12 a21 o; b11 b22 s; b11 b22 o; "
                                "b12 b21 s; b12 b21 o; a11 b12 s; a11 b12 o; a12 b11 s; a12 b11 o; "
                                "a21 b22 s; a21 b22 o; a22 b21 s; a22 b21 o"),
    ("psi+", "phi-"): ("t1±t0", "a11 a21 s; a11 a21 o; a12 a22 s; a12 a22 o; b11 b21 s; b12 b22 s; "
                                "b11 b21 o; b12 b22 o; a11 b11 s; a11 b11 o; a12 b12 s; a12 b12 o; "
                                "a21 b21 s; a21 b21 o; a22 b22 s; a22 b22 o"),
    ("psi-", "phi+"): ("t1±t0", "a11 a12 s; a12 a11 s; a21 a22 s; a22 a21 s; b11 b12 s; b12 b11 s; "
                                "b21 b22 s; b22 b21 s; a11 b22 s; a12 b21 s; a11 b22 o; a12 b21 o; "
                                "a21 b12 s; a22 b11 s; a21 b12 o; a22 b11 o; a11 a12 o; a12 a11 o; "
                                "a21 a22 o; a22 a21 o; b11 b12 o; b12 b11 o; b21 b22 o; b22 b21 o"),
    ("psi-", "phi-"): ("t1±t0", "a11 a11 s; a11 a11 o; a12 a12 s; a12 a12 o; a21 a21 s; a21 a21 o; "
                                "a22 a22 s; a22 a22 o; b11 b11 s; b11 b11 o; b12 b12 s; b12 b12 o; "
                                "b21 b21 s; b21 b21 o; b22 b22 s; b22 b22 o; a11 b21 s; a12 b22 s; "
                                "a11 b21 o; a12 b22 o; a21 b11 s; a21 b11 o; a22 b12 s; a22 b12 o"),
}

_POLS = {"s": (("H", "H"), ("V", "V")), "o": (("H", "V"), ("V", "H"))}


def oracle_table() -> dict[HyperBellIndex, frozenset[DetectionEvent]]:
    out = {}
    for idx in ALL_INDICES:
        interval, spec = _TABLE[idx]
        evs = set()
        for item in spec.split(";"):
            x, y, kind = item.split()
            for px, py in _POLS[kind]:
                evs.add(DetectionEvent.make(x + px, y + py, interval))
        out[idx] = frozenset(evs)
    return out


@dataclass(frozen=True)
class RowDiff:
    missing: frozenset[DetectionEvent]
    extra: frozenset[DetectionEvent]
    interval_mismatch: frozenset[tuple[str, str]]

    def __bool__(self):
        return bool(self.missing or self.extra)


def diff_tables(computed, oracle) -> dict[HyperBellIndex, RowDiff]:
    """Per-row differences; an empty dict means exact agreement.

    Accepts SignatureTables or plain mappings idx -> iterable of events.
    """
    def sets(t):
        rows = t.rows if isinstance(t, SignatureTable) else t
        return {k: frozenset(v) for k, v in rows.items()}

    c, o = sets(computed), sets(oracle)
    report = {}
    for idx in sorted(set(c) | set(o)):
        ce, oe = c.get(idx, frozenset()), o.get(idx, frozenset())
        missing, extra = oe - ce, ce - oe
        pairs = {(e.det1, e.det2) for e in missing} & {(e.det1, e.det2) for e in extra}
        d = RowDiff(frozenset(missing), frozenset(extra), frozenset(pairs))
        if d:
            report[idx] = d
    return report


# ------------------------------------------------------------------ exports

def format_index(idx: HyperBellIndex) -> str:
    return f"{idx[0]}s,{idx[1]}p"


def parse_index(text: str) -> HyperBellIndex:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2 or not parts[0].endswith("s") or not parts[1].endswith("p"):
        raise ValueError(f"bad state selector {text!r}")
    idx = (parts[0][:-1], parts[1][:-1])
    if idx not in ALL_INDICES:
        raise ValueError(f"bad state selector {text!r}")
    return idx


VALID_SELECTORS = tuple(format_index(i) for i in ALL_INDICES)


def _rows_sorted(table: SignatureTable):
    for idx in ALL_INDICES:
        if idx in table.rows:
            yield idx, sorted(table.rows[idx].items())


def table_records(table: SignatureTable) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "kind": "signature-table", "rows": []}
    for idx, evs in _rows_sorted(table):
        ivs = sorted({str(e.interval) for e, _ in evs})
        doc["rows"].append({
            "spatial": idx[0], "polarization": idx[1],
            "interval": ivs[0] if len(ivs) == 1 else ivs,
            "events": [[e.det1, e.det2, str(e.interval), round(p, 12)] for e, p in evs],
        })
    return json.dumps(doc, indent=1, ensure_ascii=False, sort_keys=True) + "\n"


def table_flat(table: SignatureTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["spatial", "pol", "interval", "det1", "det2", "probability"])
    for idx, evs in _rows_sorted(table):
        for e, p in evs:
            w.writerow([idx[0], idx[1], str(e.interval), e.det1, e.det2, f"{p:.12f}"])
    return buf.getvalue()


def table_human(table: SignatureTable) -> str:
    lines = []
    for idx, evs in _rows_sorted(table):
        ivs = ",".join(sorted({str(e.interval) for e, _ in evs}))
        lines.append(f"{format_index(idx):<12} interval {ivs:<6} {len(evs):>2} events")
        for e, p in evs:
            lines.append(f"    {e.pretty():<28} {p:.6f}")
    return "\n".join(lines) + "\n"
