import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hbsa import elements as el
from hbsa.state import Delay, Label, TwoPhotonState, make_hyper_bell, norm

R = 1 / math.sqrt(2)


def col(m, label):
    out = {}
    for l, k in m.column(label):
        out[l] = out.get(l, 0) + k
    return out


def pol_matrix(m, base=Label("a1", "H", "x1", "w1")):
    """2x2 matrix of ``m`` restricted to polarization."""
    M = np.zeros((2, 2), complex)
    for j, p in enumerate("HV"):
        for l, k in m.column(base._replace(pol=p)):
            M["HV".index(l.pol), j] += k
    return M


@pytest.mark.parametrize("theta", [0.0, 10.0, 22.5, 45.0, -13.7])
def test_hwp_matches_jones_matrix(theta):
    t = math.radians(2 * theta)
    expect = np.array([[math.cos(t), math.sin(t)], [math.sin(t), -math.cos(t)]])
    assert np.allclose(pol_matrix(el.hwp(theta)), expect, atol=1e-15)


def test_hwp_hadamard_and_zero_angle():
    H = Label("a1", "H")
    assert col(el.hwp(22.5), H) == pytest.approx({H: R, H._replace(pol="V"): R})
    assert col(el.hwp(22.5), H._replace(pol="V")) == pytest.approx({H: R, H._replace(pol="V"): -R})
    assert col(el.hwp(0), H._replace(pol="V")) == {H._replace(pol="V"): -1.0, H: 0.0}


def test_fs_flip_and_superposition():
    a = Label("b2", "V", "x2", "w1", Delay(1, 0))
    assert col(el.fs(), a) == {a._replace(freq="w2"): 1.0}
    s = TwoPhotonState({(a, a): R, (a, a._replace(freq="w2")): R})
    once = el.apply(el.lift(el.fs(), "B"), s)
    assert once[(a, a._replace(freq="w2"))] == pytest.approx(R)
    assert once[(a, a)] == pytest.approx(R)


def test_fbs_routing_and_double_use():
    a = Label("a1", "H", "unset", "w1")
    assert col(el.fbs(), a) == {a._replace(xtag="x1"): 1.0}
    assert col(el.fbs(), a._replace(freq="w2")) == {a._replace(freq="w2", xtag="x2"): 1.0}
    with pytest.raises(el.DomainError):
        el.fbs().column(a._replace(xtag="x1"))


def test_fbs_inverse_roundtrip():
    for f in ("w1", "w2"):
        a = Label("b1", "V", "unset", f)
        (routed, _), = el.fbs().column(a)
        assert dict(el.fbs_inverse().column(routed)) == {a: 1.0}


def test_fs_on_x1():
    x1 = Label("a2", "H", "x1", "w1")
    x2 = Label("a2", "H", "x2", "w2")
    m = el.fs_on_x1()
    assert col(m, x1) == {x1._replace(freq="w2"): 1.0}
    assert col(m, x2) == {x2: 1.0}
    twice = el.compose(m, m)
    assert col(twice, x1) == {x1: 1.0}
    with pytest.raises(el.DomainError):
        m.column(x1._replace(xtag="unset"))


def test_stage2_map_columns():
    h = Label("a1", "H", "x1", "w2")
    v = h._replace(pol="V")
    m = el.stage2_map()
    assert col(m, h) == pytest.approx({h: R, v: R})
    assert col(m, v) == pytest.approx({h._replace(xtag="x2"): R, v._replace(xtag="x2"): -R})
    with pytest.raises(el.DomainError):
        m.column(h._replace(xtag="unset"))


def test_bs_columns():
    a1 = Label("a1", "H", "x1", "w2")
    assert col(el.bs(), a1) == pytest.approx({a1: R, a1._replace(arm="b1"): R})
    b2 = a1._replace(arm="b2")
    assert col(el.bs(), b2) == pytest.approx({a1._replace(arm="a2"): R, b2: -R})


def test_ui_columns_and_delays():
    m = el.ui("a1", "b2")
    hm = Label("a1", "H", "x1", "w2")
    out = col(m, hm)
    assert {l.delay for l in out} == {Delay(0, 0)}
    assert out[hm] == pytest.approx(0.5)
    assert out[hm._replace(arm="b2")] == pytest.approx(-0.5)
    vn = Label("b2", "V", "x2", "w2")
    out = col(m, vn)
    assert {l.delay for l in out} == {Delay(1, 0)}
    signs = [out[Label(a, p, "x2", "w2", Delay(1, 0))] for a, p in
             (("a1", "H"), ("a1", "V"), ("b2", "H"), ("b2", "V"))]
    assert signs == pytest.approx([0.5, -0.5, -0.5, 0.5])
    assert {l.delay for l in col(m, hm._replace(pol="V"))} == {Delay(0, 1)}
    assert {l.delay for l in col(m, vn._replace(pol="H"))} == {Delay(1, 1)}
    # other arms untouched
    other = Label("a2", "V", "x1", "w2")
    assert col(m, other) == {other: 1.0}


def test_ui_as_printed_spans_three_directions():
    # the printed H,m and V,m columns coincide; delays alone separate them
    assert el.ui_span_dimension(el.UI_PRINTED) == 3
    assert el.ui_span_dimension(el.UI_COEFFS) == 4
    printed = el.ui("a1", "b2", el.UI_PRINTED)
    undelayed = list(el.probe_labels(((0, 0),)))
    # isometric on undelayed inputs only, because delays keep the clash apart
    assert el.is_isometry(printed, labels=undelayed)
    assert not el.is_isometry(printed)
    flat = el.ui("a1", "b2", el.UI_PRINTED, {k: (0, 0) for k in el.UI_DELAYS})
    assert not el.is_isometry(flat, labels=undelayed)


def test_ui_model_differs_from_printed_in_one_column():
    diff = np.abs(el.UI_COEFFS - el.UI_PRINTED).sum(axis=0)
    assert list(diff > 0) == [False, True, False, False]
    W = el.UI_COEFFS
    assert np.allclose(W.T @ W, np.eye(4))


@pytest.mark.parametrize("m", [el.hwp(22.5), el.hwp(7.0), el.fs(), el.fs(0.3), el.fs_on_x1(),
                               el.fbs(), el.stage2_map(), el.stage2_map(24.0), el.bs(),
                               el.bs(0.2), el.ui("a1", "b2"), el.ui("b1", "a2"),
                               el.delay("t0"), el.delay("t1")])
def test_every_element_is_isometric(m):
    assert el.isometry_defect(m) < 1e-12


@pytest.mark.parametrize("m", [el.hwp(22.5), el.fs(), el.bs()])
def test_involutions(m):
    twice = el.compose(m, m)
    for label in el.probe_labels(((0, 0),)):
        assert col(twice, label) == pytest.approx({label: 1.0}, abs=1e-12)


def test_lift_identity_and_slot():
    s = make_hyper_bell(("psi-", "phi+"))
    assert el.apply(el.lift(el.identity()), s).as_dict() == s.as_dict()
    only_a = el.apply(el.lift(el.hwp(0), "A"), s)
    for (a, b), v in s.items():
        assert only_a[(a, b)] == pytest.approx(v * (1 if a.pol == "H" else -1))


def test_lift_preserves_polarization_factor():
    s = el.apply(el.lift(el.hwp(22.5)), make_hyper_bell(("phi+", "phi+")))
    assert len(s) == 8
    assert {(a.pol, b.pol) for a, b in s.keys()} == {("H", "H"), ("V", "V")}


def test_domain_error_carries_label():
    s = make_hyper_bell(("phi+", "phi+"))
    routed = el.apply(el.lift(el.fbs()), s)
    with pytest.raises(el.DomainError) as info:
        el.apply(el.lift(el.fbs()), routed)
    assert info.value.label is not None


def test_bad_arguments():
    with pytest.raises(ValueError):
        el.ui("a1", "a1")
    with pytest.raises(ValueError):
        el.ui("a1", "c3")
    with pytest.raises(ValueError):
        el.bs(0.7)
    with pytest.raises(ValueError):
        el.fs(1.5)
    with pytest.raises(ValueError):
        el.delay("t2")


@settings(max_examples=80, deadline=None)
@given(st.floats(-90, 90), st.floats(0, 1), st.floats(-0.5, 0.5))
def test_perturbed_elements_stay_isometric(theta, leak, imb):
    for m in (el.hwp(theta), el.fs(leak), el.fs_on_x1(leak), el.stage2_map(theta), el.bs(imb)):
        assert el.isometry_defect(m) < 1e-12
