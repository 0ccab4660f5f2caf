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
"""Label space and two-photon amplitude maps.

Photons are first-quantized and ordered: slot A is the photon that
enters through the ``a`` arms, slot B the one entering through ``b``.
A state is a sparse map from ordered label pairs to complex amplitudes.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from typing import NamedTuple, Union

import numpy as np

ARMS = ("a1", "a2", "b1", "b2")
POLS = ("H", "V")
XTAGS = ("unset", "x1", "x2")
FREQS = ("w1", "w2")
BELL = ("phi+", "phi-", "psi+", "psi-")

ZERO_THRESHOLD = 1e-12
DEFAULT_TOL = 1e-10


class StateError(ValueError):
    """Raised for malformed states or labels."""


class Delay(NamedTuple):
    """Symbolic accumulated delay: n0 copies of t0 plus n1 copies of t1."""

    n0: int = 0
    n1: int = 0

    def __add__(self, other):  # type: ignore[override]
        return Delay(self.n0 + other[0], self.n1 + other[1])

    def __sub__(self, other):
        return (self.n0 - other[0], self.n1 - other[1])


NO_DELAY = Delay(0, 0)


class Label(NamedTuple):
    arm: str
    pol: str
    xtag: str = "unset"
    freq: str = "w1"
    delay: Delay = NO_DELAY

    def check(self) -> "Label":
        if self.arm not in ARMS:
            raise StateError(f"unknown arm {self.arm!r}")
        if self.pol not in POLS:
            raise StateError(f"unknown polarization {self.pol!r}")
        if self.xtag not in XTAGS:
            raise StateError(f"unknown frequency-path tag {self.xtag!r}")
        if self.freq not in FREQS:
            raise StateError(f"unknown frequency {self.freq!r}")
        n0, n1 = self.delay
        if n0 < 0 or n1 < 0:
            raise StateError(f"negative delay {self.delay!r}")
        return self

    def short(self) -> str:
        x = "" if self.xtag == "unset" else self.xtag
        d = "" if self.delay == NO_DELAY else f"@{self.delay.n0},{self.delay.n1}"
        return f"{self.arm}{self.pol}{x}{self.freq}{d}"


Pair = tuple[Label, Label]


def _prune(amps: Mapping, threshold: float) -> dict:
    return {k: complex(v) for k, v in amps.items() if abs(v) >= threshold}


class TwoPhotonState:
    """Immutable sparse superposition over ordered label pairs."""

    __slots__ = ("_amps",)

    def __init__(self, amplitudes: Mapping[Pair, complex] | None = None,
                 threshold: float = ZERO_THRESHOLD):
        amps = _prune(amplitudes or {}, threshold)
        for a, b in amps:
            Label(*a).check()
            Label(*b).check()
        object.__setattr__(self, "_amps", amps)

    def __setattr__(self, key, value):
        raise AttributeError("TwoPhotonState is immutable")

    # mapping-ish access
    def __len__(self) -> int:
        return len(self._amps)

    def __iter__(self):
        return iter(self._amps)

    def __getitem__(self, key: Pair) -> complex:
        return self._amps.get(key, 0j)

    def items(self):
        return self._amps.items()

    def keys(self):
        return self._amps.keys()

    def labels(self) -> Iterable[Label]:
        for a, b in self._amps:
            yield a
            yield b

    def as_dict(self) -> dict:
        return dict(self._amps)

    def __repr__(self) -> str:
        return f"TwoPhotonState({len(self)} terms, norm={self.norm():.6g})"

    # arithmetic
    def norm(self) -> float:
        return norm(self)

    def scale(self, c: complex) -> "TwoPhotonState":
        return TwoPhotonState({k: c * v for k, v in self._amps.items()})

    def __add__(self, other: "TwoPhotonState") -> "TwoPhotonState":
        out = dict(self._amps)
        for k, v in other.items():
            out[k] = out.get(k, 0j) + v
        return TwoPhotonState(out)

    def __sub__(self, other: "TwoPhotonState") -> "TwoPhotonState":
        return self + other.scale(-1)

    def __rmul__(self, c):
        return self.scale(c)

    def inner(self, other: "TwoPhotonState") -> complex:
        """<self|other>"""
        return sum((v.conjugate() * other[k] for k, v in self._amps.items()), 0j)

    def swapped(self) -> "TwoPhotonState":
        """Exchange the two slots."""
        return TwoPhotonState({(b, a): v for (a, b), v in self._amps.items()})

    def arm_exchanged(self) -> "TwoPhotonState":
        """Exchange only the spatial modes of the two photons."""
        out = {}
        for (a, b), v in self._amps.items():
            key = (a._replace(arm=b.arm), b._replace(arm=a.arm))
            out[key] = out.get(key, 0j) + v
        return TwoPhotonState(out)


def norm(state: TwoPhotonState) -> float:
    return math.sqrt(sum(abs(v) ** 2 for _, v in state.items()))


def normalize(state: TwoPhotonState) -> TwoPhotonState:
    n = norm(state)
    if len(state) == 0 or n < ZERO_THRESHOLD:
        raise StateError("cannot normalize the zero state")
    return state.scale(1.0 / n)


def equal_up_to_global_phase(s1: TwoPhotonState, s2: TwoPhotonState,
                             tol: float = DEFAULT_TOL) -> bool:
    """True iff ||s1 - c s2|| <= tol for a unit c.

    c is read off the largest-magnitude component the two states share.
    """
    if len(s1) == 0 and len(s2) == 0:
        return True
    shared = [k for k in s1.keys() if s2[k] != 0]
    if not shared:
        return norm(s1) <= tol and norm(s2) <= tol
    k = max(shared, key=lambda q: abs(s1[q]))
    ratio = s1[k] / s2[k]
    c = ratio / abs(ratio)
    return norm(s1 - s2.scale(c)) <= tol


# ---------------------------------------------------------------- constructors

_SQ = 1 / math.sqrt(2)

SPATIAL_BELL = {
    "phi+": {("a1", "b1"): _SQ, ("a2", "b2"): _SQ},
    "phi-": {("a1", "b1"): _SQ, ("a2", "b2"): -_SQ},
    "psi+": {("a1", "b2"): _SQ, ("a2", "b1"): _SQ},
    "psi-": {("a1", "b2"): _SQ, ("a2", "b1"): -_SQ},
}
POL_BELL = {
    "phi+": {("H", "H"): _SQ, ("V", "V"): _SQ},
    "phi-": {("H", "H"): _SQ, ("V", "V"): -_SQ},
    "psi+": {("H", "V"): _SQ, ("V", "H"): _SQ},
    "psi-": {("H", "V"): _SQ, ("V", "H"): -_SQ},
}
FREQ_STATES = {
    "psi+": {("w1", "w2"): _SQ, ("w2", "w1"): _SQ},
    "psi-": {("w1", "w2"): _SQ, ("w2", "w1"): -_SQ},
    "phi+": {("w1", "w1"): _SQ, ("w2", "w2"): _SQ},
    "phi-": {("w1", "w1"): _SQ, ("w2", "w2"): -_SQ},
    "w1w2": {("w1", "w2"): 1.0},
}

HyperBellIndex = tuple[str, str]
ALL_INDICES: tuple[HyperBellIndex, ...] = tuple((s, p) for s in BELL for p in BELL)

Part = Union[str, Mapping[tuple[str, str], complex]]


def _part(part: Part, table: dict, allowed: tuple, what: str) -> dict:
    if isinstance(part, str):
        try:
            part = table[part]
        except KeyError:
            raise StateError(f"unknown {what} state {part!r}") from None
    vec = {}
    for (x, y), v in dict(part).items():
        if x not in allowed or y not in allowed:
            raise StateError(f"{what} label {(x, y)!r} outside {allowed}")
        if abs(v) >= ZERO_THRESHOLD:
            vec[(x, y)] = complex(v)
    n = math.sqrt(sum(abs(v) ** 2 for v in vec.values()))
    if n < ZERO_THRESHOLD:
        raise StateError(f"{what} part is zero")
    return {k: v / n for k, v in vec.items()}


def make_custom(spatial: Part, pol: Part, freq: Part = "psi+") -> TwoPhotonState:
    """Tensor product of a spatial, a polarization and a frequency part.

    Parts are either a Bell name (``"phi+"`` ...) or a mapping from
    (slot-A value, slot-B value) to amplitude. Each part is normalized
    on its own before the product is taken.
    """
    sp = _part(spatial, SPATIAL_BELL, ARMS, "spatial")
    pp = _part(pol, POL_BELL, POLS, "polarization")
    fp = _part(freq, FREQ_STATES, FREQS, "frequency")
    amps = {}
    for (a1, a2), cs in sp.items():
        for (p1, p2), cp in pp.items():
            for (f1, f2), cf in fp.items():
                amps[(Label(a1, p1, "unset", f1), Label(a2, p2, "unset", f2))] = cs * cp * cf
    return normalize(TwoPhotonState(amps))


def make_hyper_bell(idx: HyperBellIndex, aux: Part = "psi+") -> TwoPhotonState:
    s, p = idx
    if s not in BELL or p not in BELL:
        raise StateError(f"bad hyper-Bell index {idx!r}")
    return make_custom(s, p, aux)


def as_vector(state: TwoPhotonState, basis: list[Pair]) -> np.ndarray:
    return np.array([state[k] for k in basis], dtype=complex)
