"""Acceptance gate.  Every test records one line into conftest.ACCEPTANCE,
printed at the end of the run as ``criterion k: PASS/FAIL``."""

import math
import random
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from hbsa import elements as el
from hbsa.circuit import build_hbsa_circuit
from hbsa.dsl import ParseError, parse_circuit, serialize_circuit
from hbsa.experiments import NoiseParams, confusion_matrix, group_count
from hbsa.measurement import (Classifier, IntervalClass, analyze, diff_tables, oracle_table,
                              signature_table)
from hbsa.reference import WORKED, check_worked_example
from hbsa.state import ALL_INDICES, Label, TwoPhotonState

from test_dsl import random_circuit


def record(k, ok, text):
    ACCEPTANCE[k] = (bool(ok), text)
    assert ok, text


def test_criterion_1_table_reproduction():
    t0 = time.perf_counter()
    table = signature_table(strict=False)
    elapsed = time.perf_counter() - t0
    report = diff_tables(table, oracle_table())
    worst = max(abs(t - 1) for t in table.raw_totals.values())
    ok = not report and worst <= 1e-10 and elapsed < 1.0
    record(1, ok, f"{16 - len(report)}/16 rows match, max |sum-1| = {worst:.1e}, "
                  f"{elapsed:.2f} s")


def test_criterion_2_stage_equations():
    levels = {}
    for idx in sorted(WORKED):
        checks = check_worked_example(idx, tol=1e-10)
        levels[idx] = [c.agreement.level for c in checks]
    exact = sum(lv.count("exact") for lv in levels.values())
    summary = ", ".join(f"{i[0]}/{i[1]}: {lv[-1]}" for i, lv in levels.items())
    ok = exact == 20
    ACCEPTANCE[2] = (ok, f"{exact}/20 snapshots exact up to phase and normalization; "
                         f"stage 4 {summary}")
    # the two typeset last-stage states that differ only by signs the
    # detectors cannot see are the known gap; anything else is a regression
    assert levels == {
        ("phi+", "phi+"): ["exact"] * 5,
        ("phi-", "psi+"): ["exact"] * 4 + ["magnitude"],
        ("psi+", "psi-"): ["exact"] * 5,
        ("psi-", "phi-"): ["exact"] * 4 + ["branch"],
    }
    if not ok:
        pytest.xfail("two typeset stage-4 states carry relative signs that no "
                     "exchange-symmetric two-photon state reproduces")


def test_criterion_3_interval_groups():
    table = signature_table()
    groups = {}
    for idx in ALL_INDICES:
        ivs = table.intervals(idx)
        assert len(ivs) == 1
        groups.setdefault(next(iter(ivs)), set()).add(idx)
    expected = {
        IntervalClass.ZERO: {(s, p) for s in ("phi+", "phi-") for p in ("phi+", "phi-")},
        IntervalClass.T0: {(s, p) for s in ("psi+", "psi-") for p in ("psi+", "psi-")},
        IntervalClass.T1: {(s, p) for s in ("phi+", "phi-") for p in ("psi+", "psi-")},
        IntervalClass.T1_PM_T0: {(s, p) for s in ("psi+", "psi-") for p in ("phi+", "phi-")},
    }
    record(3, groups == expected,
           "groups " + ", ".join(f"{k}:{len(v)}" for k, v in groups.items()))


def test_criterion_4_deterministic_classifier():
    table = signature_table()
    clf = Classifier(table)
    hits = 0
    for idx in ALL_INDICES:
        evs = analyze(idx).events
        if all(p > 1e-12 and clf.classify(e) == idx for e, p in evs):
            hits += 1
    record(4, hits == 16, f"round trip {hits}/16, {len(clf)} distinct events")


def _domain_state(rng, m, n_terms=5):
    labels = [l for l in el.probe_labels() if m.domain(l)]
    amps = {}
    for _ in range(n_terms):
        amps[(labels[rng.integers(len(labels))], labels[rng.integers(len(labels))])] = \
            complex(rng.normal(), rng.normal())
    n = math.sqrt(sum(abs(v) ** 2 for v in amps.values()))
    return TwoPhotonState({k: v / n for k, v in amps.items()})


def test_criterion_5_isometry_sweep():
    rng = np.random.default_rng(5)
    maps = [el.hwp(22.5), el.fs(), el.fs_on_x1(), el.fbs(), el.stage2_map(), el.bs(),
            el.ui("a1", "b2"), el.ui("b1", "a2"), el.delay("t0"), el.delay("t1")]
    for _ in range(8):
        p = NoiseParams(rng.uniform(-5, 5), rng.uniform(0, 1), rng.uniform(-0.5, 0.5))
        maps += [el.hwp(22.5 + p.hwp_jitter), el.fs_on_x1(p.fs_leakage),
                 el.stage2_map(22.5 + p.hwp_jitter), el.bs(p.bs_imbalance)]
    worst, n = 0.0, 0
    for m in maps:
        op = el.lift(m)
        for _ in range(40):
            s = _domain_state(rng, m)
            worst = max(worst, abs(el.apply(op, s).norm() - 1))
            n += 1
    record(5, n >= 1000 and worst <= 1e-12,
           f"{n} random states over {len(maps)} maps, max norm error {worst:.1e}")


def test_criterion_6_involutions():
    worst = 0.0
    for m in (el.hwp(22.5), el.fs(), el.bs()):
        twice = el.compose(m, m)
        for label in el.probe_labels():
            for out, k in twice.column(label):
                worst = max(worst, abs(k - (1.0 if out == label else 0.0)))
    record(6, worst <= 1e-12, f"max deviation from identity {worst:.1e}")


def test_criterion_7_auxiliary_entanglement():
    full = group_count("psi+")
    product = group_count("w1w2")
    record(7, full == 16 and product < 16,
           f"groups with psi+ aux: {full}, with product |w1 w2>: {product}")


def test_criterion_8_noise_continuity():
    zero = confusion_matrix(NoiseParams())
    tiny = confusion_matrix(NoiseParams.uniform(1e-6))
    exact = np.array_equal(zero.entries, np.hstack([np.eye(16), np.zeros((16, 1))]))
    ok = exact and tiny.diagonal.min() >= 1 - 1e-4
    record(8, ok, f"zero noise identity: {exact}, min diagonal at 1e-6: {tiny.diagonal.min():.12f}")


def test_criterion_9_parser_round_trip():
    canon = build_hbsa_circuit()
    ok = parse_circuit(serialize_circuit(canon)).same_steps(canon)
    r = random.Random(2026)
    trips = 0
    for _ in range(100):
        c = random_circuit(r)
        trips += parse_circuit(serialize_circuit(c)) == c
    bad = ["hwp 22.5 on X", "ui m=a1 on both", "fbs on A\nfbs on A", "circuit", "bs on both ?"]
    positioned = 0
    for text in bad:
        try:
            parse_circuit(text)
        except ParseError as err:
            positioned += err.line >= 1 and err.column >= 1
    record(9, ok and trips == 100 and positioned == len(bad),
           f"canonical {'ok' if ok else 'broken'}, random {trips}/100, "
           f"positioned errors {positioned}/{len(bad)}")
