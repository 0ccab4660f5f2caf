# SPDX-License-Identifier: MIT
# Copyright (c) 2026 The hbsa Authors
"""Noise sweeps, group counting and shot sampling."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, fields

import networkx as nx
import numpy as np

from .circuit import Circuit, build_hbsa_circuit
from .measurement import (Classifier, DetectionEvent, Distribution, analyze,
                          signature_table)
from .state import ALL_INDICES, Part, TwoPhotonState


@dataclass(frozen=True)
class NoiseParams:
    hwp_jitter: float = 0.0     # degrees added to every 22.5 degree plate
    fs_leakage: float = 0.0     # un-flipped amplitude left by each FS
    bs_imbalance: float = 0.0   # transmission amplitude is sqrt(1/2 + this)

    def validate(self) -> "NoiseParams":
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite")
        if not 0.0 <= self.fs_leakage <= 1.0:
            raise ValueError("fs_leakage must lie in [0, 1]")
        if not -0.5 <= self.bs_imbalance <= 0.5:
            raise ValueError("bs_imbalance must lie in [-0.5, 0.5]")
        return self

    @classmethod
    def uniform(cls, x: float) -> "NoiseParams":
        return cls(x, x, x)


def perturbed_circuit(p: NoiseParams, ui_pairs=None) -> Circuit:
    p.validate()
    kw = {} if ui_pairs is None else {"ui_pairs": ui_pairs}
    return build_hbsa_circuit(hwp_angle=22.5 + p.hwp_jitter, fs_leakage=p.fs_leakage,
                              bs_imbalance=p.bs_imbalance, **kw)


_IDEAL: Classifier | None = None


def ideal_classifier() -> Classifier:
    global _IDEAL
    if _IDEAL is None:
        _IDEAL = Classifier(signature_table())
    return _IDEAL


@dataclass
class ConfusionMatrix:
    """16 x 17 array; the last column collects events no input produces."""

    entries: np.ndarray
    raw_totals: np.ndarray

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.entries[:, :16])

    @property
    def unclassified(self) -> np.ndarray:
        return self.entries[:, 16]


def confusion_matrix(p: NoiseParams, classifier: Classifier | None = None) -> ConfusionMatrix:
    clf = ideal_classifier() if classifier is None else classifier
    circuit = perturbed_circuit(p)
    pos = {idx: i for i, idx in enumerate(ALL_INDICES)}
    M = np.zeros((16, 17))
    raw = np.zeros(16)
    for i, idx in enumerate(ALL_INDICES):
        dist = analyze(idx, circuit)
        raw[i] = dist.raw_total
        for ev, prob in dist.events:
            j = clf.get(ev)
            M[i, 16 if j is None else pos[j]] += prob
        # dividing by the accumulated row keeps a one-cell row exactly 1.0
        M[i] /= M[i].sum()
    return ConfusionMatrix(M, raw)


def sweep(param: str, values, base: NoiseParams = NoiseParams()) -> list[dict]:
    if param not in {f.name for f in fields(NoiseParams)}:
        raise ValueError(f"unknown noise parameter {param!r}")
    rows = []
    for v in values:
        p = NoiseParams(**{**base.__dict__, param: float(v)})
        cm = confusion_matrix(p)
        rows.append({"param": param, "value": float(v),
                     "min_diagonal": float(cm.diagonal.min()),
                     "mean_diagonal": float(cm.diagonal.mean()),
                     "unclassified_mass": float(cm.unclassified.sum())})
    return rows


def group_count(aux_freq_state: Part = "psi+", circuit: Circuit | None = None) -> int:
    """Number of input classes under transitive closure of event overlap."""
    table = signature_table(circuit, aux=aux_freq_state, strict=False)
    g = nx.Graph()
    g.add_nodes_from(ALL_INDICES)
    owner: dict[DetectionEvent, tuple] = {}
    for idx, evs in table.rows.items():
        for ev in evs:
            if ev in owner:
                g.add_edge(owner[ev], idx)
            else:
                owner[ev] = idx
    return nx.number_connected_components(g)


def sample_events(source, shots: int, seed=None) -> Counter:
    """Multinomial sample of detection events.

    ``source`` is a Distribution, a TwoPhotonState (run through the ideal
    analyzer) or a hyper-Bell index.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    dist = source if isinstance(source, Distribution) else analyze(source)
    events = [e for e, _ in dist.events]
    p = np.array([q for _, q in dist.events], dtype=float)
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, p / p.sum())
    return Counter({e: int(c) for e, c in zip(events, counts) if c})
