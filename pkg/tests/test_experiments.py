import math

import numpy as np
import pytest

from hbsa.circuit import build_hbsa_circuit, run
from hbsa.experiments import (NoiseParams, confusion_matrix, group_count, perturbed_circuit,
                              sample_events, sweep)
from hbsa.measurement import analyze, exchange_symmetrize
from hbsa.state import ALL_INDICES, FREQ_STATES, make_hyper_bell


def test_zero_noise_is_identity():
    cm = confusion_matrix(NoiseParams())
    assert np.array_equal(cm.entries[:, :16], np.eye(16))
    assert not cm.unclassified.any()
    assert perturbed_circuit(NoiseParams()).same_steps(build_hbsa_circuit())


def test_tiny_noise_is_continuous():
    cm = confusion_matrix(NoiseParams.uniform(1e-6))
    assert cm.diagonal.min() >= 1 - 1e-4
    assert np.allclose(cm.entries.sum(axis=1), 1.0, atol=1e-9)


def test_jitter_definition():
    c = perturbed_circuit(NoiseParams(hwp_jitter=0.5))
    assert c.steps[0].args == (23.0,)
    assert c.steps[3].args == (23.0,)


def test_jitter_monotone_on_grid():
    rows = sweep("hwp_jitter", np.linspace(0, 5, 11))
    diag = [r["min_diagonal"] for r in rows]
    assert diag[0] == pytest.approx(1.0)
    assert all(b < a for a, b in zip(diag, diag[1:]))
    one = confusion_matrix(NoiseParams(hwp_jitter=1.0))
    assert one.diagonal.min() < 1


def test_no_frequency_flip_halves_success():
    cm = confusion_matrix(NoiseParams(fs_leakage=1.0))
    assert cm.diagonal == pytest.approx(np.full(16, 0.5))


def test_beam_splitter_imbalance():
    cm = confusion_matrix(NoiseParams(bs_imbalance=0.2))
    assert cm.diagonal.min() == pytest.approx(0.84, abs=1e-9)


@pytest.mark.parametrize("p", [NoiseParams(3.0, 0.4, -0.3), NoiseParams(-7.0, 1.0, 0.5),
                               NoiseParams(0.1, 0.01, 0.0)])
def test_rows_sum_to_one_and_norm_kept(p):
    cm = confusion_matrix(p)
    assert np.allclose(cm.entries.sum(axis=1), 1.0, atol=1e-9)
    assert np.allclose(cm.raw_totals, 1.0, atol=1e-10)
    c = perturbed_circuit(p)
    for idx in ALL_INDICES:
        assert run(c, exchange_symmetrize(make_hyper_bell(idx))).norm() == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("bad", [NoiseParams(fs_leakage=1.5), NoiseParams(bs_imbalance=-0.6),
                                 NoiseParams(hwp_jitter=math.inf)])
def test_out_of_range(bad):
    with pytest.raises(ValueError):
        perturbed_circuit(bad)


def test_sweep_columns_and_unknown_param():
    rows = sweep("fs_leakage", [0.0, 0.5])
    assert list(rows[0]) == ["param", "value", "min_diagonal", "mean_diagonal", "unclassified_mass"]
    with pytest.raises(ValueError):
        sweep("dark_counts", [0.1])


def test_group_counts():
    assert group_count("psi+") == 16
    product = group_count("w1w2")
    assert product == 8
    assert group_count({("w1", "w2"): 1j, ("w2", "w1"): 1j}) == 16
    for aux in FREQ_STATES:
        assert group_count(aux) >= 4


def test_sampling_phi_phi_all_zero_interval():
    counts = sample_events(("phi+", "phi+"), 100_000, seed=1)
    assert sum(counts.values()) == 100_000
    assert {e.interval for e in counts} == {"0"}


def test_sampling_within_five_sigma():
    n = 200_000
    dist = analyze(("psi-", "phi+"))
    counts = sample_events(dist, n, seed=3)
    for ev, p in dist.events:
        sigma = math.sqrt(n * p * (1 - p))
        assert abs(counts[ev] - n * p) <= 5 * sigma


def test_sampling_deterministic():
    a = sample_events(("psi+", "psi-"), 5000, seed=7)
    assert a == sample_events(("psi+", "psi-"), 5000, seed=7)
    assert a != sample_events(("psi+", "psi-"), 5000, seed=8)
    with pytest.raises(ValueError):
        sample_events(("psi+", "psi-"), 0)
