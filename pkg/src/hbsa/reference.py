"""Hand-derived reference states for four worked inputs, and comparators.

Each reference is written the way the states are usually typeset: a
prefactor times products of spatial, polarization, path and frequency
factors, optionally under a pair of delay operators.  ``"I"`` is no
delay, ``"D(t0)"`` etc. delay the corresponding photon.

Stage 4 is compared in *relative form*: amplitudes summed over a common
delay offset and keyed by the delay of photon B relative to photon A
(see :mod:`hbsa.measurement`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .circuit import Circuit, build_hbsa_circuit, run, stage_snapshots
from .measurement import exchange_symmetrize
from .state import (DEFAULT_TOL, NO_DELAY, Delay, HyperBellIndex, Label, TwoPhotonState,
                    equal_up_to_global_phase, make_hyper_bell, normalize)

_DELAY_OPS = {"I": (0, 0), "D(t0)": (1, 0), "D(t1)": (0, 1), "D(t0+t1)": (1, 1)}


def _signed(text: str, width: int):
    """'+a1b2 -b2a1' -> [(+1, ('a1','b2')), (-1, ('b2','a1'))]"""
    out = []
    for tok in text.split():
        sign = -1 if tok[0] == "-" else 1
        body = tok[1:] if tok[0] in "+-" else tok
        half = len(body) // 2
        if len(body) != 2 * width:
            raise ValueError(f"bad factor token {tok!r}")
        out.append((sign, (body[:half], body[half:])))
    return out


@dataclass
class Branch:
    """One printed product term."""

    coef: float
    spatial: str
    pol: str
    path: str = ""
    freq: str = "+w2w2"
    ops: tuple[str, str] = ("I", "I")

    def amplitudes(self) -> dict:
        da, db = (Delay(*_DELAY_OPS[o]) for o in self.ops)
        paths = _signed(self.path, 2) if self.path else [(1, ("unset", "unset"))]
        out: dict = {}
        for s1, (aa, ab) in _signed(self.spatial, 2):
            for s2, (pa, pb) in _signed(self.pol, 1):
                for s3, (xa, xb) in paths:
                    for s4, (fa, fb) in _signed(self.freq, 2):
                        key = (Label(aa, pa, xa, fa, da), Label(ab, pb, xb, fb, db))
                        out[key] = out.get(key, 0.0) + self.coef * s1 * s2 * s3 * s4
        return out


def _state(branches) -> TwoPhotonState:
    acc: dict = {}
    for b in branches:
        for k, v in b.amplitudes().items():
            acc[k] = acc.get(k, 0.0) + v
    return TwoPhotonState(acc)


R8 = 1 / (2 * math.sqrt(2))
R32 = 1 / (4 * math.sqrt(2))
X12 = "+x1x2 +x2x1"
X11 = "+x1x1 +x2x2"

# (input, [stage 0, stage 1, stage 2, stage 3, stage 4]) as lists of branches.
WORKED: dict[HyperBellIndex, list[list[Branch]]] = {
    ("phi+", "phi+"): [
        [Branch(R8, "+a1b1 +a2b2", "+HH +VV", "", "+w1w2 +w2w1")],
        [Branch(R8, "+a1b1 +a2b2", "+HH +VV", X12)],
        [Branch(R8, "+a1b1 +a2b2", "+HH +VV", X12)],
        [Branch(R32, "+a1a1 -a1b1 +b1a1 -b1b1 +a2a2 -a2b2 +b2a2 -b2b2", "+HH +VV", X12)],
        [Branch(0.25, "+b1a2 +a2b1 -a1b2 -b2a1", "+HV +VH", X12)],
    ],
    ("psi+", "psi-"): [
        [Branch(R8, "+a1b2 +a2b1", "+HV -VH", "", "+w1w2 +w2w1")],
        [Branch(R8, "+a1b2 +a2b1", "-HV +VH", X12)],
        [Branch(R8, "+a1b2 +a2b1", "-HV +VH", X11)],
        [Branch(R32, "+a1a2 -a1b2 +b1a2 -b1b2 +a2a1 -a2b1 +b2a1 -b2b1", "+HV -VH", X11)],
        [Branch(1 / 8, "-a1a2 -b2b1 +b1b2 +a2a1", "+HH -VV", X11, ops=("I", "D(t0)")),
         Branch(-1 / 8, "+a1b1 +b2a2 -b1a1 -a2b2", "+HV -VH", X11, ops=("I", "D(t0)")),
         Branch(1 / 8, "+b1b2 +a2a1 -a1a2 -b2b1", "+HH -VV", X11, ops=("D(t0)", "I")),
         Branch(-1 / 8, "+b1a1 +a2b2 -a1b1 -b2a2", "+HV -VH", X11, ops=("D(t0)", "I"))],
    ],
    ("phi-", "psi+"): [
        [Branch(R8, "+a1b1 -a2b2", "+HV +VH", "", "+w1w2 +w2w1")],
        [Branch(R8, "+a1b1 -a2b2", "+HH -VV", X12)],
        [Branch(R8, "+a1b1 -a2b2", "+HV +VH", X12)],
        [Branch(R32, "+a1a1 -a1b1 +b1a1 -b1b1 -a2a2 +a2b2 -b2a2 +b2b2", "+HV +VH", X12)],
        [Branch(1 / 8, "+a1a1 -b2b2 +a1b2 -b2a1", "+HH -VV", X12, ops=("I", "D(t1)")),
         Branch(-1 / 8, "+b1b1 +b1a2 -a2b1 +a2a2", "+HH -VV", X12, ops=("I", "D(t1)")),
         Branch(-1 / 8, "+b1b1 -a2a2 -b1a2 +a2b1", "+HH -VV", X12, ops=("D(t1)", "I")),
         Branch(1 / 8, "+a1a1 -b2b2 +b2a1 -a1b2", "+HH -VV", X12, ops=("D(t1)", "I"))],
    ],
    ("psi-", "phi-"): [
        [Branch(R8, "+a1b2 -a2b1", "+HH -VV", "", "+w1w2 +w2w1")],
        [Branch(R8, "+a1b2 -a2b1", "+HV +VH", X12)],
        [Branch(R8, "+a1b2 -a2b1", "+HH -VV", X11)],
        [Branch(R32, "+a1a2 -a1b2 +b1a2 -b1b2 -a2a1 +a2b1 -b2a1 +b2b1", "+HH -VV", X11)],
        [Branch(1 / (8 * math.sqrt(2)), "-a1a1 -a1b2 +b2a1 +b2b2", "+HH +HV +VH +VV", X11,
                ops=("I", "D(t0+t1)")),
         Branch(1 / (8 * math.sqrt(2)), "+b1b1 +b1a2 -a2b1 -a2a2", "+HH +HV +VH +VV", X11,
                ops=("I", "D(t0+t1)")),
         Branch(1 / (8 * math.sqrt(2)), "+a1a1 -a1b2 +b2a1 -b2b2", "+HH -HV -VH +VV", X11,
                ops=("D(t1)", "D(t0)")),
         Branch(1 / (8 * math.sqrt(2)), "+b1b1 -b1a2 +a2b1 -a2a2", "+HH -HV -VH +VV", X11,
                ops=("D(t1)", "D(t0)"))],
    ],
}

STAGE_NAMES = ("input", "stage 1", "stage 2", "stage 3", "stage 4")


def reference_state(idx: HyperBellIndex, stage: int) -> TwoPhotonState:
    return _state(WORKED[idx][stage])


# ------------------------------------------------------------- relative form

def relative_form(state: TwoPhotonState) -> dict:
    """{(labelA, labelB, delay of B minus delay of A): amplitude}, offsets summed."""
    out: dict = {}
    for (a, b), v in state.items():
        key = (a._replace(delay=NO_DELAY), b._replace(delay=NO_DELAY), b.delay - a.delay)
        out[key] = out.get(key, 0j) + v
    return {k: v for k, v in out.items() if abs(v) > 1e-14}


def _neg(r):
    return (-r[0], -r[1])


def exchange_parity(idx: HyperBellIndex) -> int:
    """Sign picked up by the input under exchange of internal labels (aux psi+)."""
    return -1 if idx[1] == "psi-" else 1


def complete_by_exchange(form: dict, parity: int) -> dict:
    """Add the exchange partner of every relative delay that is absent.

    Typeset states sometimes list only one member of a pair of delay
    branches related by exchanging the photons.
    """
    present = {k[2] for k in form}
    out = dict(form)
    for (a, b, r), v in form.items():
        if _neg(r) not in present:
            out[(b, a, _neg(r))] = parity * v
    return out


def simulated_stage4(idx: HyperBellIndex, circuit: Circuit | None = None) -> dict:
    circuit = build_hbsa_circuit() if circuit is None else circuit
    return relative_form(run(circuit, exchange_symmetrize(make_hyper_bell(idx))))


# ----------------------------------------------------------------- compare

LEVELS = ("exact", "branch", "magnitude", "none")


@dataclass
class Agreement:
    level: str
    fidelity: float
    mismatched: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.level != "none"


def _unit(d: dict) -> dict:
    n = math.sqrt(sum(abs(v) ** 2 for v in d.values()))
    return {k: v / n for k, v in d.items()}


def _phase_match(s: dict, t: dict, keys, tol) -> tuple[bool, list]:
    keys = list(keys)
    if not keys:
        return True, []
    k0 = max(keys, key=lambda k: abs(t.get(k, 0)))
    if abs(s.get(k0, 0)) < tol:
        return False, keys
    c = s[k0] / t[k0]
    c /= abs(c)
    bad = [k for k in keys if abs(s.get(k, 0) - c * t.get(k, 0)) > tol]
    return not bad, bad


def compare_forms(sim: dict, target: dict, branches: list[set] | None = None,
                  tol: float = DEFAULT_TOL) -> Agreement:
    """Compare two relative forms up to normalization.

    Levels, strongest first: one global phase (``exact``); one phase per
    listed branch (``branch``); equal support and magnitudes
    (``magnitude``).
    """
    s, t = _unit(sim), _unit(target)
    keys = set(s) | set(t)
    fid = abs(sum(s.get(k, 0).conjugate() * t.get(k, 0) for k in keys)) ** 2
    ok, bad = _phase_match(s, t, keys, tol)
    if ok:
        return Agreement("exact", fid)
    if branches:
        covered = set().union(*branches)
        if set(s) <= covered and all(_phase_match(s, t, b, tol)[0] for b in branches):
            return Agreement("branch", fid, sorted(bad, key=repr))
    if set(s) == set(t) and all(abs(abs(s[k]) - abs(t[k])) <= tol for k in keys):
        return Agreement("magnitude", fid, sorted(bad, key=repr))
    return Agreement("none", fid, sorted(bad, key=repr))


def stage4_reference(idx: HyperBellIndex) -> tuple[dict, list[set]]:
    """Relative form of the typeset stage-4 state, completed by exchange,
    with the key set of every branch (including completed partners)."""
    parity = exchange_parity(idx)
    forms = [relative_form(TwoPhotonState(b.amplitudes())) for b in WORKED[idx][4]]
    total: dict = {}
    for f in forms:
        for k, v in f.items():
            total[k] = total.get(k, 0) + v
    present = {k[2] for k in total}
    full = complete_by_exchange(total, parity)
    branches = []
    for f in forms:
        keys = set(f)
        if any(_neg(k[2]) not in present for k in f):
            keys |= {(b, a, _neg(r)) for (a, b, r) in f}
        branches.append(keys)
    return full, branches


@dataclass
class StageCheck:
    stage: str
    agreement: Agreement


def check_worked_example(idx: HyperBellIndex, circuit: Circuit | None = None,
                         tol: float = DEFAULT_TOL) -> list[StageCheck]:
    circuit = build_hbsa_circuit() if circuit is None else circuit
    snaps = stage_snapshots(circuit, make_hyper_bell(idx))
    out = []
    for stage in range(4):
        ref = normalize(reference_state(idx, stage))
        ok = equal_up_to_global_phase(snaps[stage][1], ref, tol)
        fid = abs(snaps[stage][1].inner(ref)) ** 2
        out.append(StageCheck(STAGE_NAMES[stage], Agreement("exact" if ok else "none", fid)))
    target, branches = stage4_reference(idx)
    out.append(StageCheck(STAGE_NAMES[4],
                          compare_forms(simulated_stage4(idx, circuit), target, branches, tol)))
    return out
