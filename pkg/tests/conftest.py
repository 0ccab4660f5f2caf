import math

import numpy as np
import pytest

from hbsa.state import ARMS, FREQS, POLS, Delay, Label, TwoPhotonState

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {text}")


def random_state(rng, n_terms=6, xtags=("unset", "x1", "x2"),
                 delays=((0, 0), (1, 0), (0, 1), (1, 1))) -> TwoPhotonState:
    """Random normalized superposition over a handful of label pairs."""
    amps = {}
    for _ in range(n_terms):
        labs = []
        for _slot in range(2):
            labs.append(Label(ARMS[rng.integers(4)], POLS[rng.integers(2)],
                              xtags[rng.integers(len(xtags))], FREQS[rng.integers(2)],
                              Delay(*delays[rng.integers(len(delays))])))
        amps[tuple(labs)] = complex(rng.normal(), rng.normal())
    n = math.sqrt(sum(abs(v) ** 2 for v in amps.values()))
    return TwoPhotonState({k: v / n for k, v in amps.items()})


@pytest.fixture
def rng():
    return np.random.default_rng(20260)
