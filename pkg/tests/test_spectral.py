"""Spectral formulas: measures, q_D, energies, pairwise Hamiltonian values."""

import math

import numpy as np
import pytest

from spinsov.specialfn import PoleError, SepPoint, Spin, ZIndex, gamma
from spinsov.spectral import (
    ConformalSpinPair,
    SpectrumPoint,
    baxter_eigenvalue_D,
    energy,
    measure,
    pairwise_energy,
    pairwise_h_on_power,
    qd_epsilon_slope,
    qd_special_point,
    resolve_special_point,
)

SPIN0 = Spin(0, 0.3)


def test_measure_A_n1():
    pt = SpectrumPoint((SepPoint(0, 0.7),), SPIN0)
    assert measure("A", pt) == pytest.approx(1.0 / (2 * math.pi**2), rel=1e-14)


def test_measure_A_n2_quarter():
    pt = SpectrumPoint((SepPoint(0, 0.0), SepPoint(2, 0.0)), SPIN0)
    assert measure("A", pt) == pytest.approx(1.0 / (16 * math.pi**6), rel=1e-13)


def test_measure_B_n2_constant():
    pt = SpectrumPoint((SepPoint(2, -0.4),), SPIN0, momentum=1.0)
    assert measure("B", pt) == pytest.approx(1.0 / (2 * math.pi**6), rel=1e-13)


def test_measure_symmetry_and_nonnegativity():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        N = int(rng.integers(1, 5))
        seps = tuple(SepPoint(2 * int(rng.integers(-2, 3)), float(rng.uniform(-1, 1))) for _ in range(N))
        pt = SpectrumPoint(seps, SPIN0)
        val = measure("A", pt)
        assert val >= 0.0
        perm = rng.permutation(N)
        pt2 = SpectrumPoint(tuple(seps[i] for i in perm), SPIN0)
        assert measure("A", pt2) == pytest.approx(val, rel=1e-12)


def test_parity_enforced():
    with pytest.raises(ValueError):
        SpectrumPoint((SepPoint(1, 0.0),), SPIN0)  # half-integer n vs integer n_s


def test_qd_n1_structure_against_direct_gammas():
    # q_D at N=1 is pi * a(f1) a(f2) a(f3); cross-check with explicit Gammas
    spin = SPIN0
    pt = SpectrumPoint((SepPoint(0, 0.2),), spin)
    u = 0.17 + 0.05j
    got = baxter_eigenvalue_D(pt, u)
    s, sb = spin.s, spin.sbar
    x, xb = pt.seps[0].x, pt.seps[0].xbar
    ub = u
    direct = math.pi
    direct *= gamma(1 - (1 + 1j * u - 1j * x)) / gamma(1 + 1j * ub - 1j * xb)
    direct *= gamma(1 - (sb - 1j * ub)) / gamma(s - 1j * u)
    direct *= gamma(1 - (1 - sb + 1j * xb)) / gamma(1 - s + 1j * x)
    assert got == pytest.approx(direct, rel=1e-12)


def test_qd_against_scipy_gammas():
    from scipy.special import gamma as sg

    spin = Spin(2, -0.1)
    pt = SpectrumPoint((SepPoint(2, 0.4), SepPoint(0, -0.3)), spin)
    u = 0.23 - 0.4j
    got = baxter_eigenvalue_D(pt, u)
    s, sb = spin.s, spin.sbar
    ub = u + 1j * (0 - spin.ns) + 1j * spin.ns  # default pairing: quant_n = n_s
    direct = math.pi ** 2
    for sep in pt.seps:
        x, xb = sep.x, sep.xbar
        direct *= sg(1 - (1 + 1j * u - 1j * x)) / sg(1 + 1j * ub - 1j * xb)
        direct *= sg(1 - (sb - 1j * ub)) / sg(s - 1j * u)
        direct *= sg(1 - (1 - sb + 1j * xb)) / sg(1 - s + 1j * x)
    assert got == pytest.approx(complex(direct), rel=1e-11)


def test_resolve_special_point_prefers_plus():
    rep = resolve_special_point(SPIN0)
    assert rep["sign"] == +1
    assert rep["residuals"][+1] < 1e-3
    assert rep["residuals"][-1] > 0.1


def test_qd_slope_matches_energy():
    for seps in [
        (SepPoint(0, 0.2),),
        (SepPoint(0, 0.2), SepPoint(2, -0.5)),
        (SepPoint(0, 0.2), SepPoint(2, -0.5), SepPoint(-2, 0.8)),
    ]:
        pt = SpectrumPoint(seps, SPIN0)
        slope = qd_epsilon_slope(pt, eps=1e-4)
        expect = -1j * energy("s", pt)
        assert abs(slope - expect) < 1e-6


def test_energy_zero_point():
    pt = SpectrumPoint((SepPoint(0, 0.0),), Spin(-2, 0.0))
    assert abs(energy("s", pt)) < 1e-12


def test_energy_degenerate_point():
    spin = Spin(2, 0.45)
    for N in (1, 2, 3):
        pt = SpectrumPoint(tuple(SepPoint(2, 0.45) for _ in range(N)), spin)
        assert energy("s", pt) == pytest.approx(-4.0 * N * math.log(2.0), abs=1e-10)


def test_energy_one_minus_s_variant():
    spin = Spin(2, 0.1)
    pt = SpectrumPoint((SepPoint(-2, -0.1),), spin)
    # n + n_s = 0 and nu + nu_s = 0 lands on psi(1/2)
    assert energy("one_minus_s", pt) == pytest.approx(-4.0 * math.log(2.0), abs=1e-10)


def test_energy_realness_and_permutation():
    rng = np.random.default_rng(4)
    spin = Spin(1, -0.2)
    for _ in range(100):
        seps = tuple(SepPoint(2 * int(rng.integers(-2, 3)) + 1, float(rng.uniform(-1, 1))) for _ in range(3))
        pt = SpectrumPoint(seps, spin)
        val = energy("s", pt)
        assert isinstance(val, float)
        pt2 = SpectrumPoint(seps[::-1], spin)
        assert energy("s", pt2) == pytest.approx(val, rel=1e-12)


def test_qd_modulus_conjugation_invariance():
    spin = SPIN0
    u = 0.6 - 0.5j  # Im u = -1/2 so that quantization holds with n = 1
    ub = u.conjugate()
    pt = SpectrumPoint((SepPoint(2, 0.4),), spin)
    ptm = SpectrumPoint((SepPoint(-2, 0.4),), spin)
    q1 = baxter_eigenvalue_D(pt, u, ub)
    q2 = baxter_eigenvalue_D(ptm, u.conjugate(), ub.conjugate())
    assert abs(q1) == pytest.approx(abs(q2), rel=1e-10)


def test_pairwise_energy_half():
    val = pairwise_energy(ConformalSpinPair(0.5, 0.5))
    assert val == pytest.approx(-8.0 * math.log(2.0), abs=1e-12)


def test_pairwise_energy_reflection_symmetry():
    j, jb = 0.3 + 0.1j, 0.7 - 0.2j
    v1 = pairwise_energy(ConformalSpinPair(j, jb))
    v2 = pairwise_energy(ConformalSpinPair(1 - j, 1 - jb))
    assert v1 == pytest.approx(v2, rel=1e-12)


def test_pairwise_h_eigen_forms_3_4_agree():
    rng = np.random.default_rng(12)
    checked = 0
    while checked < 50:
        s = complex(rng.uniform(0.1, 0.9), rng.uniform(-0.5, 0.5))
        mq = int(rng.integers(-2, 3))
        sb = s - mq / 2.0  # 2(s - sb) = mq integer
        ma = int(rng.integers(-2, 3))
        a = ZIndex(complex(rng.uniform(-0.9, 0.9), rng.uniform(-0.6, 0.6)), ma)
        try:
            f3 = pairwise_h_on_power(a, s, sb, form=3)
            f4 = pairwise_h_on_power(a, s, sb, form=4)
        except PoleError:
            continue
        assert abs(f3 - f4) <= 1e-10 * max(1.0, abs(f3))
        checked += 1


def test_pairwise_h_form1_matches_form3():
    s, sb = 0.35 + 0.05j, 0.35 + 0.05j - 0.5
    a = ZIndex(0.21 - 0.13j, 1)
    f1 = pairwise_h_on_power(a, s, sb, form=1)
    f3 = pairwise_h_on_power(a, s, sb, form=3)
    assert abs(f1 - f3) < 1e-6


def test_pairwise_h_form2_matches_form3():
    s, sb = 0.4 - 0.1j, 0.4 - 0.1j  # mq = 0
    a = ZIndex(0.11 + 0.07j, -1)
    f2 = pairwise_h_on_power(a, s, sb, form=2)
    f3 = pairwise_h_on_power(a, s, sb, form=3)
    assert abs(f2 - f3) < 1e-6
