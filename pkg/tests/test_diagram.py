"""Diagram builders, rewrite rules, scripted derivations, serialization."""

import math

import numpy as np
import pytest

from spinsov.diagram import (
    ANCHOR,
    AFactor,
    DeltaPoint,
    DeltaSpectral,
    Diagram,
    LinearFactor,
    MomPower,
    Num,
    PiPower,
    PreconditionFailed,
    build_baxter,
    build_factorized_R,
    build_lambda,
    build_psi,
    deserialize,
    idx_s_plus_iu,
    serialize,
)
from spinsov.params import make_binding
from spinsov.powexpr import SymIndex, evaluate, sample_assignment
from spinsov.rewrite import (
    SCRIPTS,
    a1_closed,
    alpha_exchange_closed,
    apply_rule,
    measure_from_exchange,
    run_script,
    script_appendixB_2Ra,
    script_appendixB_2Rb,
    script_exchange2,
    script_lambda1,
    script_ll2,
)
from spinsov.specialfn import SepPoint, Spin
from spinsov.spectral import SpectrumPoint, measure

SPIN = Spin(0, 0.3)


def binding_xxp(n=2, nu=0.2, np_=4, nup=-0.4, **kw):
    return make_binding(
        spin=SPIN, seps={"1": SepPoint(n, nu), "p1": SepPoint(np_, nup)}, **kw
    )


# --- builders ---------------------------------------------------------------


def test_lambda_n1_tilde_structure():
    d = build_lambda(1, "tilde")
    assert d.internal() == []
    assert len(d.edges) == 1
    assert d.edges[0].tail == ANCHOR and d.edges[0].head == "z1"


def test_lambda_n2_plain_structure():
    d = build_lambda(2, "plain")
    assert len(d.edges) == 3
    assert sorted(d.external()) == ["w1", "z1", "z2"]
    # gamma edge along the z line, alpha/beta edges into the w slot
    pairs = sorted((e.tail, e.head) for e in d.edges)
    assert pairs == [("z1", "w1"), ("z2", "w1"), ("z2", "z1")]


def test_lambda_n3_plain_structure():
    # product formula gives 3(N-1) propagators; the w slots stay external
    d = build_lambda(3, "plain")
    assert len(d.edges) == 6
    assert d.internal() == []
    assert sorted(d.external()) == ["w1", "w2", "z1", "z2", "z3"]


def test_lambda_n3_tilde_has_seven_edges():
    assert len(build_lambda(3, "tilde").edges) == 7


def test_lambda_kernel_matches_explicit_product():
    # N=2 kernel: [z1-z2]^-(2s-1) [w-z1]^-(1-s-ix) [w-z2]^-(1-s+ix)
    d = build_lambda(2, "plain", "1", ws=["w"])
    e = d.to_powexpr()
    b = binding_xxp()
    rng = np.random.default_rng(3)
    from spinsov.powexpr import PowExpr
    from spinsov.diagram import idx_alpha, idx_beta, idx_gamma

    ref = (
        PowExpr.diff_power("z1", "z2", -idx_gamma())
        * PowExpr.diff_power("w", "z1", -idx_alpha("1"))
        * PowExpr.diff_power("w", "z2", -idx_beta("1"))
    )
    for _ in range(5):
        pts = sample_assignment(["z1", "z2", "w"], rng)
        assert evaluate(e, pts.points, b) == pytest.approx(evaluate(ref, pts.points, b), rel=1e-12)


def test_psi_b_n1_is_wave():
    d = build_psi("B", 1)
    assert d.edges == [] and d.internal() == []
    assert d.waves == {"z1": {"p": 1}}


def test_psi_a_n2_structure():
    d = build_psi("A", 2)
    assert len(d.internal()) == 1
    assert sorted(d.external()) == ["z1", "z2"]
    anchor_edges = [e for e in d.edges if ANCHOR in (e.tail, e.head)]
    assert len(anchor_edges) == 2  # [z2]^(ix1-s) and [w]^(ix2-s)
    assert len(d.edges) == 5


def test_psi_d_n2_anchor_pattern():
    from spinsov.diagram import idx_delta

    d = build_psi("D", 2)
    assert len(d.internal()) == 1
    anchor_edges = [e for e in d.edges if e.tail == ANCHOR]
    idxs = {repr(e.idx) for e in anchor_edges}
    assert repr(idx_delta("1")) in idxs and repr(idx_delta("2")) in idxs


def test_psi_c_n2_has_inverted_wave():
    d = build_psi("C", 2)
    (wv, mom), = ((v, m) for v, m in d.waves.items() if m)
    assert "inv:p" in mom


def test_psi_b_n3_internal_count():
    d = build_psi("B", 3)
    assert len(d.internal()) == 3  # two Lambda_3 slots + the wave variable


def test_baxter_d_n1_three_factors():
    d = build_baxter("D", 1)
    assert len(d.edges) == 3
    heads = sorted((e.tail, e.head) for e in d.edges)
    assert heads == [("o", "w1"), ("o", "z1"), ("w1", "z1")]


def test_baxter_b_n1_single_factor():
    d = build_baxter("B", 1)
    assert len(d.edges) == 1
    e = d.edges[0]
    assert (e.tail, e.head) == ("w1", "z1")


def test_baxter_c_n1_extra_anchor_factor():
    d = build_baxter("C", 1)
    assert len(d.edges) == 4
    assert any(e.head == ANCHOR for e in d.edges)


def test_baxter_a_boundary_convention():
    d = build_baxter("A", 2)
    # w_{N+1} = 0 anchors the last pair of factors
    assert any(e.tail == ANCHOR for e in d.edges)
    assert len(d.edges) == 6


def test_factorized_r_identity_leg():
    d = build_factorized_R(1, idx_s_plus_iu("u") - idx_s_plus_iu("u"), idx_s_plus_iu("u"))
    assert any(isinstance(a, DeltaPoint) for a in d.coeff.atoms)
    assert len(d.edges) == 3


# --- adjoint ----------------------------------------------------------------


def test_adjoint_kernel_is_complex_conjugate():
    d = build_lambda(2, "tilde", "1", ws=["w"])
    adj = d.adjoint()
    b = binding_xxp()
    rng = np.random.default_rng(11)
    e, ea = d.to_powexpr(), adj.to_powexpr()
    for _ in range(5):
        pts = sample_assignment(["z1", "z2", "w"], rng)
        v = evaluate(e, pts.points, b)
        va = evaluate(ea, pts.points, b)
        assert va == pytest.approx(v.conjugate(), rel=1e-11)


# --- scripted derivations ------------------------------------------------


def test_script_lambda1_gives_2pi2_delta():
    d, sc = script_lambda1()
    out = run_script(d, sc)
    simp = out.coeff.simplify(labels=("1", "p1"))
    kinds = sorted(type(a).__name__ for a in simp.atoms)
    assert kinds == ["DeltaSpectral", "Num", "PiPower"]
    assert simp.instantiate(binding_xxp()) == pytest.approx(2 * math.pi**2)


def test_script_exchange2_alpha_coefficient():
    d, sc = script_exchange2()
    out = run_script(d, sc)
    assert out.edges == [] and out.internal() == []
    b = binding_xxp()
    assert out.coeff.instantiate(b) == pytest.approx(alpha_exchange_closed(b), rel=1e-10)
    simp = out.coeff.simplify(labels=("1", "p1"))
    assert not any(isinstance(a, AFactor) for a in simp.atoms)
    assert simp.instantiate(b) == pytest.approx(alpha_exchange_closed(b), rel=1e-12)


def test_script_exchange2_half_integer_sector():
    spin = Spin(1, -0.2)
    b = make_binding(spin=spin, seps={"1": SepPoint(1, 0.2), "p1": SepPoint(3, -0.4)})
    d, sc = script_exchange2()
    out = run_script(d, sc)
    assert out.coeff.instantiate(b) == pytest.approx(alpha_exchange_closed(b), rel=1e-10)
    simp = out.coeff.simplify(labels=("1", "p1"))
    assert simp.instantiate(b) == pytest.approx(alpha_exchange_closed(b), rel=1e-10)


def test_script_ll2_plane_wave_coefficient():
    d, sc = script_ll2()
    out = run_script(d, sc)
    simp = out.coeff.simplify(labels=("1", "p1"), on_support=True)
    kinds = sorted(type(a).__name__ for a in simp.atoms)
    assert kinds == ["DeltaSpectral", "MomPower", "Num", "PiPower"]
    b = make_binding(spin=SPIN, seps={"1": SepPoint(2, 0.2), "p1": SepPoint(2, 0.2)}, p=0.7 + 0.3j)
    expect = 2 * math.pi**4 / abs(b["p"]) ** 2
    assert simp.instantiate(b) == pytest.approx(expect, rel=1e-12)
    assert out.waves.get("v") == {"p": 1}


def test_script_2ra_z_independent_and_matches_closed_form():
    d, sc = script_appendixB_2Ra()
    out = run_script(d, sc)
    assert out.edges == []
    b = make_binding(spin=SPIN)
    # generic admissible slots with m_u = 1 (odd): distinguishes the sign variants
    b["iu"], b["iub"] = 0.25 + 0.3j, -0.75 + 0.3j
    b["iv"], b["ivb"] = 1.2 + 0.1j, 1.2 + 0.1j
    raw = out.coeff.instantiate(b)
    assert raw == pytest.approx(a1_closed(b), rel=1e-12)
    assert raw == pytest.approx(-a1_closed(b, paper_sign=True), rel=1e-12)
    # even m_u: both sign conventions coincide
    b["iu"], b["iub"] = 0.25 + 0.3j, 0.25 + 0.3j
    raw = run_script(*script_appendixB_2Ra()).coeff.instantiate(b)
    assert raw == pytest.approx(a1_closed(b), rel=1e-12)
    assert raw == pytest.approx(a1_closed(b, paper_sign=True), rel=1e-12)


def test_script_2rb_delta_structure():
    d, sc = script_appendixB_2Rb()
    out = run_script(d, sc)
    deltas = {frozenset((a.v1, a.v2)) for a in out.coeff.atoms if isinstance(a, DeltaPoint)}
    assert deltas == {frozenset(("z2", "w1")), frozenset(("z2", "w2"))}
    b = make_binding(spin=SPIN)
    b["iu"], b["iub"] = 0.25 + 0.3j, -0.75 + 0.3j
    b["iv"], b["ivb"] = 1.2 + 0.1j, 1.2 + 0.1j
    assert out.coeff.instantiate(b) == pytest.approx(a1_closed(b), rel=1e-11)


def test_script_registry_names():
    assert set(SCRIPTS) == {"lambda1", "exchange2", "ll2", "appendixB_2Ra", "appendixB_2Rb"}


def test_step_failure_reports_index():
    from spinsov.diagram import StepFailed
    from spinsov.rewrite import RewriteScript

    d, _ = script_exchange2()
    bad = RewriteScript("bad", [("chain", "nosuch")])
    with pytest.raises(StepFailed) as err:
        run_script(d, bad)
    assert err.value.step_index == 0


# --- measures ----------------------------------------------------------------


@pytest.mark.parametrize("family,Ns", [("A", (1, 2, 3)), ("B", (2, 3))])
def test_measure_assembly_matches_spectral(family, Ns):
    for N in Ns:
        n_seps = N if family == "A" else N - 1
        seps = tuple(SepPoint(2 * (k - 1), 0.3 * k - 0.5) for k in range(1, n_seps + 1))
        b = make_binding(
            spin=SPIN, seps={str(k): s for k, s in enumerate(seps, start=1)}, p=0.7
        )
        cp = measure_from_exchange(N, family)
        pt = SpectrumPoint(seps, SPIN, momentum=0.7 if family == "B" else None)
        assert cp.instantiate(b).real == pytest.approx(1.0 / measure(family, pt), rel=1e-11)
        assert abs(cp.instantiate(b).imag) < 1e-9


# --- coefficient simplifier soundness ----------------------------------------


def test_simplifier_preserves_value_on_random_products():
    from spinsov.diagram import CoefficientProduct, SignPower, one_minus, one_minus_bar
    from spinsov.diagram import idx_alpha, idx_beta, idx_delta

    b = binding_xxp()
    cps = [
        CoefficientProduct([AFactor(idx_alpha("1")), AFactor(one_minus_bar(idx_alpha("1"))), PiPower(2)]),
        CoefficientProduct([AFactor(idx_beta("p1")), AFactor(one_minus(idx_beta("p1"))), Num(3.0)]),
        CoefficientProduct([AFactor(idx_delta("1"), 2), AFactor(one_minus_bar(idx_delta("1")), 2)]),
    ]
    for cp in cps:
        val = cp.instantiate(b)
        simp = cp.simplify(labels=("1", "p1"))
        assert simp.instantiate(b) == pytest.approx(val, rel=1e-10)


# --- serialization -------------------------------------------------------------


def test_serialize_roundtrip():
    d = build_psi("A", 2)
    text = serialize(d)
    d2 = deserialize(text)
    assert serialize(d2) == text
    b = make_binding(spin=SPIN, seps={"1": SepPoint(0, 0.1), "2": SepPoint(2, -0.3)})
    rng = np.random.default_rng(5)
    pts = sample_assignment(sorted(set(d.vertices) - {ANCHOR}), rng)
    assert evaluate(d2.to_powexpr(), pts.points, b) == pytest.approx(
        evaluate(d.to_powexpr(), pts.points, b), rel=1e-12
    )


def test_serialize_golden_stability():
    # stable ordering: byte-identical output across runs
    t1 = serialize(build_psi("D", 2))
    t2 = serialize(build_psi("D", 2))
    assert t1 == t2
    assert t1.startswith("spinsov-diagram 1\n")


def test_rule_precondition_failures():
    d = build_lambda(2, "plain")
    with pytest.raises(PreconditionFailed):
        apply_rule(d, "chain", "z1")  # z1 is external
    with pytest.raises(PreconditionFailed):
        apply_rule(d, "star_triangle", "w1")
