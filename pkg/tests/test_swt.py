import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from transmon_cas.device import TWO_PI, DeviceParams, build_static_hamiltonian
from transmon_cas.errors import DegenerateConnectedLevels, SingularDenominator
from transmon_cas.hilbert import ModeDims
from transmon_cas.spectrum import cas_rate_numeric
from transmon_cas.swt import (analytic_cas_rates, analytic_weak_drive_frequencies,
                              antihermiticity_residual, cas_matrix_element,
                              cas_rate_from_matrix_element, decompose, decompose_device,
                              drive_term, effective_cas_rate, effective_drive,
                              effective_static_hamiltonian, generator_residual,
                              offdiagonal_residual, solve_generator_order1,
                              solve_generator_order2, sw_transition_frequency)


def toy(g=0.05, w1=5.0, w2=6.0):
    """Two two-level modes with exchange coupling; basis |00>, |01>, |10>, |11>."""
    h0 = np.diag([0.0, w2, w1, w1 + w2]).astype(complex)
    o1 = np.zeros((4, 4), complex)
    o1[2, 1] = o1[1, 2] = g
    return h0, o1


@st.composite
def dispersive_devices(draw):
    w1 = draw(st.floats(5.0, 5.8))
    w2 = draw(st.floats(5.0, 5.8).filter(lambda w: abs(w - w1) > 0.05))
    wc = draw(st.floats(6.3, 7.0))
    a = draw(st.floats(-0.35, -0.15))
    return DeviceParams((w1, w2, wc), (a, a, draw(st.floats(-0.45, -0.2))),
                        draw(st.floats(0.005, 0.05)), draw(st.floats(0.005, 0.05)),
                        dims=ModeDims((3, 3, 3)))


def test_zero_perturbation():
    h0, _ = toy()
    z = np.zeros_like(h0)
    assert not solve_generator_order1(h0, z).any()
    d2, o2, s2 = solve_generator_order2(h0, z, z)
    assert not (d2.any() or o2.any() or s2.any())


def test_toy_generator():
    h0, o1 = toy()
    s1 = solve_generator_order1(h0, o1)
    assert np.isclose(s1[2, 1], -0.05)
    assert antihermiticity_residual(s1) < 1e-15


def test_toy_dispersive_shift():
    h0, o1 = toy()
    s1 = solve_generator_order1(h0, o1)
    d2, o2, _ = solve_generator_order2(h0, s1, o1)
    assert np.isclose(d2[2, 2], 0.05 ** 2 / (5.0 - 6.0))
    assert np.allclose(d2, np.diag(np.diag(d2)), atol=1e-12)
    assert np.allclose(d2, d2.conj().T, atol=1e-12)


def test_degenerate_levels_raise():
    h0, o1 = toy(w1=6.0, w2=6.0)
    with pytest.raises(DegenerateConnectedLevels) as err:
        solve_generator_order1(h0, o1)
    assert set(err.value.pair) == {1, 2}


def test_nondiagonal_h0_rejected():
    h0, o1 = toy()
    with pytest.raises(ValueError):
        solve_generator_order1(h0 + o1, o1)


def test_device_residuals(device):
    dec = decompose_device(device)
    assert generator_residual(dec.H0, dec.S1, dec.O1) < 1e-9
    assert generator_residual(dec.H0, dec.S2, dec.O2) < 1e-9
    assert antihermiticity_residual(dec.S1) < 1e-10
    assert antihermiticity_residual(dec.S2) < 1e-10


@given(dispersive_devices())
@settings(max_examples=25, deadline=None)
def test_residuals_random_devices(p):
    try:
        dec = decompose_device(p)
    except DegenerateConnectedLevels:
        assume(False)
    assert generator_residual(dec.H0, dec.S1, dec.O1) < 1e-9
    assert generator_residual(dec.H0, dec.S2, dec.O2) < 1e-9
    assert antihermiticity_residual(dec.S1) < 1e-10
    assert antihermiticity_residual(dec.S2) < 1e-10


def test_cubic_scaling(device):
    full = offdiagonal_residual(decompose_device(device))
    half = offdiagonal_residual(decompose_device(
        device.with_updates(g1c=device.g1c / 2, g2c=device.g2c / 2)))
    assert full / half >= 7.0


def test_effective_static_without_coupling():
    h0, _ = toy()
    dec = decompose(h0)
    assert np.array_equal(effective_static_hamiltonian(dec.H0, dec.D2), h0)


def test_sw_blue_frequency_matches_closed_form(device):
    dec = decompose_device(device)
    wb = sw_transition_frequency(dec, "blue")
    wd = analytic_weak_drive_frequencies(device)
    assert abs(wb - wd.omega_b_prime) < 1e-9
    assert abs(wb - 6.4207) < 0.030


def test_sw_red_frequency_matches_closed_form(device):
    dec = decompose_device(device)
    wd = analytic_weak_drive_frequencies(device)
    assert abs(sw_transition_frequency(dec, "red") - wd.omega_r_prime) < 1e-3


def test_effective_drive_trivial(device):
    hd = drive_term(device, 0.02)
    z = np.zeros_like(hd)
    assert np.array_equal(effective_drive(hd, z, z), hd)
    dec = decompose_device(device)
    assert not effective_drive(drive_term(device, 0.0), dec.S1, dec.S2).any()


def test_effective_drive_hermitian(device):
    dec = decompose_device(device)
    hd = effective_drive(drive_term(device, 0.02), dec.S1, dec.S2)
    assert np.allclose(hd, hd.conj().T, atol=1e-14)


def test_matrix_element_vs_closed_form(device):
    dec = decompose_device(device)
    hd = effective_drive(drive_term(device, 0.020), dec.S1, dec.S2)
    rate = cas_rate_from_matrix_element(hd, device.dims, "blue")
    closed = abs(analytic_cas_rates(device, 0.020).omega_b_rate)
    assert abs(rate - closed) / closed < 0.02


def test_matrix_element_zero_drive(device):
    dec = decompose_device(device)
    hd = effective_drive(drive_term(device, 0.0), dec.S1, dec.S2)
    assert cas_rate_from_matrix_element(hd, device.dims) == 0


def test_matrix_element_rate_near_measured(device):
    # linear extrapolation of the 2.2 MHz rate seen at 75 MHz drive
    rate = abs(effective_cas_rate(device, 0.072))
    assert abs(rate - 2.2e-3 * 72 / 75) / (2.2e-3 * 72 / 75) < 0.15


@given(st.floats(0.001, 0.05))
@settings(max_examples=10, deadline=None)
def test_matrix_element_linear(amp):
    p = DeviceParams((5.641, 5.507, 6.317), (-0.3, -0.303, -0.381), 0.04, 0.031,
                     dims=ModeDims((3, 3, 3)))
    dec = decompose_device(p)
    r1 = cas_matrix_element(effective_drive(drive_term(p, amp), dec.S1, dec.S2), p.dims)
    r2 = cas_matrix_element(effective_drive(drive_term(p, 2 * amp), dec.S1, dec.S2), p.dims)
    assert np.isclose(r2, 2 * r1, rtol=1e-12)


def test_analytic_rate_value(device):
    r = analytic_cas_rates(device, 0.075)
    assert abs(abs(r.omega_b_rate) - 2.2e-3) < 0.4e-3


def test_analytic_rates_need_coupler_nonlinearity(device):
    p = device.with_updates(alpha=(-0.3, -0.303, 0.0))
    r = analytic_cas_rates(p, 0.075)
    assert r.omega_b_rate == 0 and r.omega_r_rate == 0


@given(dispersive_devices(), st.floats(0.001, 0.1))
@settings(max_examples=40, deadline=None)
def test_exchange_symmetry(p, amp):
    q = p.with_updates(g1c=p.g2c, g2c=p.g1c)
    a, b = analytic_cas_rates(p, amp), analytic_cas_rates(q, amp)
    assert np.isclose(abs(a.omega_b_rate * a.omega_r_rate),
                      abs(b.omega_b_rate * b.omega_r_rate), rtol=1e-12)


def test_opposite_signs(device):
    r = analytic_cas_rates(device, 0.05)
    assert np.sign(r.omega_b_rate) != np.sign(r.omega_r_rate)
    sb = effective_cas_rate(device, 0.05, "blue")
    sr = effective_cas_rate(device, 0.05, "red")
    assert np.sign(sb) != np.sign(sr)


def test_sw_agrees_with_closed_form(device):
    assert max(device.dispersive_ratios()) <= 0.06
    an = analytic_cas_rates(device, 0.05)
    for tr, ref in (("blue", an.omega_b_rate), ("red", an.omega_r_rate)):
        assert abs(effective_cas_rate(device, 0.05, tr) - ref) / abs(ref) < 0.05


def test_singular_denominator_named(device):
    p = device.with_updates(omega=(5.641, 5.641, 6.317))
    with pytest.raises(SingularDenominator) as err:
        analytic_cas_rates(p, 0.05)
    assert "Delta_12" in str(err.value)


def test_weak_drive_decoupled():
    p = DeviceParams((5.6, 5.5, 6.3), (-0.3, -0.3, -0.38), 0.0, 0.0)
    wd = analytic_weak_drive_frequencies(p)
    assert wd.omega_b_prime == 6.3 + (5.6 - 5.5)
    assert wd.omega_r_prime == 6.3 - (5.6 - 5.5)


def test_weak_drive_singular():
    p = DeviceParams((5.5, 5.25, 6.0), (-0.3, -0.3, -0.5), 0.04, 0.03)
    with pytest.raises(SingularDenominator):
        analytic_weak_drive_frequencies(p)


def test_weak_drive_vs_sw_energies(device):
    dec = decompose_device(device)
    e = np.real(np.diag(effective_static_hamiltonian(dec.H0, dec.D2))) / TWO_PI
    wd = analytic_weak_drive_frequencies(device)
    assert abs(e[17] - e[4] - wd.omega_b_prime) < 1e-3


def test_weak_drive_vs_stark_trend_intercept(device):
    # the weakest-drive anticrossing stands in for the intercept of the Stark trend
    res = cas_rate_numeric(device, 0.005, "blue", include_g12=False)
    assert abs(analytic_weak_drive_frequencies(device).omega_b_prime - res.omega_resonance) < 0.010


def test_static_hamiltonian_split(device):
    dec = decompose_device(device)
    assert np.allclose(dec.H0 + dec.O1, build_static_hamiltonian(device, include_g12=False))
