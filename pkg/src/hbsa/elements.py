# Copyright 2026 The hbsa Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Single-photon linear maps for every optical element, and two-photon lifting."""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .state import (ARMS, FREQS, POLS, XTAGS, ZERO_THRESHOLD, Delay, Label,
                    TwoPhotonState)

Column = list[tuple[Label, complex]]
Rule = Callable[[Label], "Column | None"]

SLOTS = ("A", "B", "both")


class DomainError(ValueError):
    """An element received a label it is not defined on."""

    def __init__(self, message: str, label: Label | None = None):
        super().__init__(message if label is None else f"{message}: {label.short()}")
        self.label = label


@dataclass(frozen=True)
class SinglePhotonMap:
    """Sparse linear operator on single-photon labels.

    ``rule`` returns the output column for a label, or ``None`` when the
    label is outside the element's support (identity there).  ``domain``
    tells the isometry checker which labels the element accepts at all.
    """

    name: str
    params: tuple
    rule: Rule = field(compare=False, repr=False)
    domain: Callable[[Label], bool] = field(default=lambda l: True, compare=False, repr=False)

    def column(self, label: Label) -> Column:
        out = self.rule(label)
        if out is None:
            return [(label, 1.0 + 0j)]
        return out

    __call__ = column


# --------------------------------------------------------------------- helpers

def probe_labels(delays: Sequence[tuple[int, int]] = ((0, 0), (1, 0), (0, 1), (1, 1))):
    for arm, pol, x, f, d in itertools.product(ARMS, POLS, XTAGS, FREQS, delays):
        yield Label(arm, pol, x, f, Delay(*d))


def isometry_defect(m: SinglePhotonMap, labels=None) -> float:
    """Largest deviation of the column Gram matrix from the identity."""
    labels = [l for l in (labels if labels is not None else probe_labels()) if m.domain(l)]
    cols = [dict() for _ in labels]
    for c, l in zip(cols, labels):
        for out, k in m.column(l):
            c[out] = c.get(out, 0j) + k
    worst = 0.0
    for i, ci in enumerate(cols):
        for j in range(i, len(cols)):
            cj = cols[j]
            g = sum(v.conjugate() * cj.get(k, 0j) for k, v in ci.items())
            worst = max(worst, abs(g - (1.0 if i == j else 0.0)))
    return worst


def is_isometry(m: SinglePhotonMap, tol: float = 1e-12, labels=None) -> bool:
    return isometry_defect(m, labels) <= tol


def compose(*maps: SinglePhotonMap, name: str | None = None) -> SinglePhotonMap:
    """Apply ``maps`` left to right."""

    def rule(label: Label) -> Column:
        cur = {label: 1.0 + 0j}
        for m in maps:
            nxt: dict = {}
            for l, c in cur.items():
                for o, k in m.column(l):
                    nxt[o] = nxt.get(o, 0j) + c * k
            cur = {k: v for k, v in nxt.items() if abs(v) >= ZERO_THRESHOLD}
        return list(cur.items())

    def domain(label: Label) -> bool:
        return maps[0].domain(label) if maps else True

    return SinglePhotonMap(name or "+".join(m.name for m in maps),
                           tuple(m for m in maps), rule, domain)


def identity() -> SinglePhotonMap:
    return SinglePhotonMap("id", (), lambda l: None)


# -------------------------------------------------------------------- elements

def hwp(angle: float) -> SinglePhotonMap:
    """Half-wave plate at ``angle`` degrees from horizontal."""
    t = math.radians(2 * angle)
    c, s = math.cos(t), math.sin(t)

    def rule(l: Label) -> Column:
        if l.pol == "H":
            return [(l._replace(pol="H"), c), (l._replace(pol="V"), s)]
        return [(l._replace(pol="H"), s), (l._replace(pol="V"), -c)]

    return SinglePhotonMap("hwp", (float(angle),), rule)


def _freq_rotation(leakage: float):
    # leakage = 0 is a perfect bit flip; the residual un-flipped amplitude
    # is completed to a real orthogonal (reflection) matrix.
    if not 0.0 <= leakage <= 1.0:
        raise ValueError(f"fs leakage must lie in [0, 1], got {leakage}")
    keep = leakage
    flip = math.sqrt(max(0.0, 1.0 - leakage * leakage))
    return {"w1": (("w1", keep), ("w2", flip)), "w2": (("w1", flip), ("w2", -keep))}


def fs(leakage: float = 0.0, xtag: str | None = None) -> SinglePhotonMap:
    """Frequency shifter; with ``xtag`` set, acts only on that FBS output path."""
    table = _freq_rotation(leakage)
    if xtag is not None and xtag not in ("x1", "x2"):
        raise ValueError(f"fs path must be x1 or x2, got {xtag!r}")

    def rule(l: Label):
        if xtag is not None:
            if l.xtag == "unset":
                raise DomainError("fs on an FBS path needs a routed photon", l)
            if l.xtag != xtag:
                return None
        return [(l._replace(freq=f), k) for f, k in table[l.freq] if k != 0.0]

    dom = (lambda l: l.xtag != "unset") if xtag is not None else (lambda l: True)
    name = "fs" if xtag is None else f"fs[{xtag}]"
    return SinglePhotonMap(name, (float(leakage), xtag), rule, dom)


def fs_on_x1(leakage: float = 0.0) -> SinglePhotonMap:
    return fs(leakage, "x1")


def fbs() -> SinglePhotonMap:
    def rule(l: Label) -> Column:
        if l.xtag != "unset":
            raise DomainError("FBS applied to a photon that was already routed", l)
        return [(l._replace(xtag="x1" if l.freq == "w1" else "x2"), 1.0)]

    return SinglePhotonMap("fbs", (), rule, lambda l: l.xtag == "unset")


def fbs_inverse() -> SinglePhotonMap:
    """Formal inverse of :func:`fbs` on its image."""

    def rule(l: Label) -> Column:
        if l.xtag == "unset":
            raise DomainError("photon was never routed", l)
        return [(l._replace(xtag="unset"), 1.0)]

    ok = lambda l: (l.xtag, l.freq) in (("x1", "w1"), ("x2", "w2"))
    return SinglePhotonMap("fbs^-1", (), rule, ok)


_FLIP_X = {"x1": "x2", "x2": "x1"}


def stage2_map(hwp_angle: float = 22.5) -> SinglePhotonMap:
    """Net effect of the PBS + HWP group acting after the FBS/FS stage.

    A V photon has its path tag flipped, then the polarization goes
    through a half-wave plate (the Hadamard at 22.5 degrees).
    """
    plate = hwp(hwp_angle)

    def rule(l: Label) -> Column:
        if l.xtag == "unset":
            raise DomainError("stage-2 map needs a routed photon", l)
        routed = l if l.pol == "H" else l._replace(xtag=_FLIP_X[l.xtag])
        return plate.column(routed)

    return SinglePhotonMap("stage2", (float(hwp_angle),), rule, lambda l: l.xtag != "unset")


_BS_PARTNER = {"a1": "b1", "b1": "a1", "a2": "b2", "b2": "a2"}


def bs(imbalance: float = 0.0) -> SinglePhotonMap:
    """Non-polarizing beam splitter between a_i and b_i.

    a -> t a + r b,  b -> r a - t b  with t = sqrt(1/2 + imbalance).
    """
    if not -0.5 <= imbalance <= 0.5:
        raise ValueError(f"bs imbalance must lie in [-1/2, 1/2], got {imbalance}")
    t = math.sqrt(0.5 + imbalance)
    r = math.sqrt(0.5 - imbalance)

    def rule(l: Label) -> Column:
        other = l._replace(arm=_BS_PARTNER[l.arm])
        if l.arm[0] == "a":
            out = [(l, t), (other, r)]
        else:
            out = [(other, r), (l, -t)]
        return [(o, k) for o, k in out if k != 0.0]

    return SinglePhotonMap("bs", (float(imbalance),), rule)


# Unbalanced interferometer.  Rows and columns are ordered
# (H m, V m, H n, V n); column j is the output for input j.  The arrays
# below are written one input per line and transposed.
UI_PORTS = (("H", "m"), ("V", "m"), ("H", "n"), ("V", "n"))

# Coefficients exactly as printed for the UI block.  The V,m column
# repeats the H,m column, so without delay tags only three directions
# are spanned and the block is not unitary.
UI_PRINTED = np.array([
    [1, 1, -1, -1],   # H,m  -> delay 0
    [1, 1, -1, -1],   # V,m  -> delay t1
    [1, 1, 1, 1],     # H,n  -> delay t0 + t1
    [1, -1, -1, 1],   # V,n  -> delay t0
], dtype=float).T / 2

# The model actually used: the duplicated V,m column is replaced by the
# one remaining orthogonal sign pattern, which makes the block unitary.
UI_COEFFS = np.array([
    [1, 1, -1, -1],
    [1, -1, 1, -1],
    [1, 1, 1, 1],
    [1, -1, -1, 1],
], dtype=float).T / 2

UI_DELAYS = {("H", "m"): (0, 0), ("V", "n"): (1, 0), ("V", "m"): (0, 1), ("H", "n"): (1, 1)}


def ui(m_arm: str, n_arm: str, coeffs: np.ndarray | None = None,
       delays: dict | None = None) -> SinglePhotonMap:
    """Unbalanced interferometer acting on the arms ``m_arm`` and ``n_arm``."""
    if m_arm not in ARMS or n_arm not in ARMS:
        raise ValueError(f"ui arms must be in {ARMS}, got {m_arm!r}, {n_arm!r}")
    if m_arm == n_arm:
        raise ValueError("ui needs two distinct arms")
    W = UI_COEFFS if coeffs is None else np.asarray(coeffs, dtype=complex)
    dl = UI_DELAYS if delays is None else delays
    role = {m_arm: "m", n_arm: "n"}
    arm_of = {"m": m_arm, "n": n_arm}

    def rule(l: Label):
        r = role.get(l.arm)
        if r is None:
            return None
        j = UI_PORTS.index((l.pol, r))
        d = l.delay + dl[(l.pol, r)]
        out = []
        for i, (p, rr) in enumerate(UI_PORTS):
            k = W[i, j]
            if k != 0:
                out.append((l._replace(arm=arm_of[rr], pol=p, delay=d), complex(k)))
        return out

    key = tuple(np.round(np.asarray(W, dtype=complex).ravel(), 15))
    return SinglePhotonMap("ui", (m_arm, n_arm, key, tuple(sorted(dl.items()))), rule)


def ui_span_dimension(coeffs: np.ndarray = UI_PRINTED, tol: float = 1e-12) -> int:
    """Rank of the UI columns once delay tags are erased."""
    return int(np.linalg.matrix_rank(np.asarray(coeffs), tol=tol))


def delay(which: str) -> SinglePhotonMap:
    step = {"t0": (1, 0), "t1": (0, 1)}.get(which)
    if step is None:
        raise ValueError(f"delay must be t0 or t1, got {which!r}")
    return SinglePhotonMap("delay", (which,), lambda l: [(l._replace(delay=l.delay + step), 1.0)])


# -------------------------------------------------------------------- lifting

@dataclass(frozen=True)
class TwoPhotonOperator:
    map: SinglePhotonMap
    slot: str = "both"

    def __post_init__(self):
        if self.slot not in SLOTS:
            raise ValueError(f"slot must be one of {SLOTS}, got {self.slot!r}")


def lift(m: SinglePhotonMap, slot: str = "both") -> TwoPhotonOperator:
    return TwoPhotonOperator(m, slot)


def apply(op: TwoPhotonOperator, state: TwoPhotonState,
          threshold: float = ZERO_THRESHOLD) -> TwoPhotonState:
    cache: dict[Label, Column] = {}

    def col(l: Label) -> Column:
        c = cache.get(l)
        if c is None:
            c = cache[l] = op.map.column(l)
        return c

    do_a = op.slot in ("A", "both")
    do_b = op.slot in ("B", "both")
    out: dict = {}
    for (a, b), amp in state.items():
        ca = col(a) if do_a else [(a, 1.0)]
        cb = col(b) if do_b else [(b, 1.0)]
        for oa, ka in ca:
            for ob, kb in cb:
                key = (oa, ob)
                out[key] = out.get(key, 0j) + amp * ka * kb
    return TwoPhotonState(out, threshold)
