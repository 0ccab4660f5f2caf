"""Element programs: the analyzer pipeline and generic step lists."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from . import elements as el
from .state import ARMS, TwoPhotonState

KINDS = ("hwp", "fbs", "fs", "stage2", "bs", "ui", "delay")

# Arm pairing used by the two interferometers of the last stage.
HBSA_UI_PAIRS = (("a1", "b2"), ("b1", "a2"))


class CircuitError(RuntimeError):
    """An element failed while a circuit was running."""

    def __init__(self, index: int, step: "Step", cause: Exception):
        super().__init__(f"step {index} ({step.name}): {cause}")
        self.index = index
        self.step = step
        self.cause = cause


@dataclass(frozen=True)
class Step:
    """One lifted element.  ``args`` is kind specific:

    hwp (angle,), fbs (), fs (path or None, leakage), stage2 (angle,),
    bs (imbalance,), ui (m, n), delay (t0|t1,).
    """

    kind: str
    args: tuple = ()
    slot: str = "both"
    tag: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown element {self.kind!r}")
        if self.slot not in el.SLOTS:
            raise ValueError(f"unknown slot {self.slot!r}")

    @property
    def name(self) -> str:
        return self.tag or f"{self.kind}{list(self.args) if self.args else ''}@{self.slot}"

    def single_map(self) -> el.SinglePhotonMap:
        k, a = self.kind, self.args
        if k == "hwp":
            return el.hwp(a[0])
        if k == "fbs":
            return el.fbs()
        if k == "fs":
            return el.fs(a[1], a[0])
        if k == "stage2":
            return el.stage2_map(a[0])
        if k == "bs":
            return el.bs(a[0])
        if k == "ui":
            return el.ui(a[0], a[1])
        return el.delay(a[0])

    @cached_property
    def operator(self) -> el.TwoPhotonOperator:
        return el.lift(self.single_map(), self.slot)


def hwp_step(angle=22.5, slot="both", tag=""):
    return Step("hwp", (float(angle),), slot, tag)


def fs_step(path=None, leakage=0.0, slot="both", tag=""):
    return Step("fs", (path, float(leakage)), slot, tag)


def stage2_step(angle=22.5, slot="both", tag=""):
    return Step("stage2", (float(angle),), slot, tag)


def bs_step(imbalance=0.0, slot="both", tag=""):
    return Step("bs", (float(imbalance),), slot, tag)


def ui_step(m, n, slot="both", tag=""):
    if m not in ARMS or n not in ARMS or m == n:
        raise ValueError(f"bad ui arms {m!r}, {n!r}")
    return Step("ui", (m, n), slot, tag)


@dataclass(frozen=True)
class Circuit:
    name: str
    steps: tuple[Step, ...] = ()
    # step index after which each analysis stage is complete (optional)
    stage_ends: tuple[int, ...] = field(default=(), compare=False)

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(f"{self.name}+{other.name}", self.steps + other.steps)

    def __len__(self):
        return len(self.steps)

    def same_steps(self, other: "Circuit") -> bool:
        return self.steps == other.steps


def build_hbsa_circuit(ui_pairs: Sequence[tuple[str, str]] = HBSA_UI_PAIRS,
                       hwp_angle: float = 22.5, fs_leakage: float = 0.0,
                       bs_imbalance: float = 0.0) -> Circuit:
    """The four-stage analyzer.

    Stage 1 is HWP, FBS and the x1-path frequency flip; stage 2 the
    PBS/HWP group; stage 3 the 50:50 beam splitters; stage 4 the two
    unbalanced interferometers.
    """
    steps = [
        hwp_step(hwp_angle, tag="HWP1-4"),
        Step("fbs", (), "both", "FBS1-4"),
        fs_step("x1", fs_leakage, tag="FS1-4"),
        stage2_step(hwp_angle, tag="PBS1-4+HWP5-12"),
        bs_step(bs_imbalance, tag="BS1-4"),
    ]
    for m, n in ui_pairs:
        steps.append(ui_step(m, n, tag=f"UI({m},{n})"))
    return Circuit("hbsa", tuple(steps), stage_ends=(3, 4, 5, len(steps)))


def run(circuit: Circuit, state: TwoPhotonState) -> TwoPhotonState:
    for i, step in enumerate(circuit.steps):
        try:
            state = el.apply(step.operator, state)
        except el.DomainError as exc:
            raise CircuitError(i, step, exc) from exc
    return state


def stage_states(circuit: Circuit, state: TwoPhotonState) -> list[tuple[str, TwoPhotonState]]:
    out = []
    for i, step in enumerate(circuit.steps):
        try:
            state = el.apply(step.operator, state)
        except el.DomainError as exc:
            raise CircuitError(i, step, exc) from exc
        out.append((step.name, state))
    return out


def stage_snapshots(circuit: Circuit, state: TwoPhotonState) -> list[tuple[str, TwoPhotonState]]:
    """Input plus the state at the end of every analysis stage."""
    snaps = stage_states(circuit, state)
    ends = circuit.stage_ends or tuple(range(1, len(snaps) + 1))
    return [("input", state)] + [(f"stage {k}", snaps[e - 1][1]) for k, e in enumerate(ends, 1)]


def steps_from(items: Iterable[Step], name: str = "circuit") -> Circuit:
    return Circuit(name, tuple(items))
