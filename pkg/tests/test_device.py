import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transmon_cas.device import (TWO_PI, DeviceParams, DriveParams, build_drive_operator,
                                 build_rotating_hamiltonian, build_static_hamiltonian, detunings,
                                 lab_hamiltonian, measured_device)
from transmon_cas.hilbert import ModeDims, basis_index, basis_state, total_number
from transmon_cas.pulses import PulseShape
from transmon_cas.spectrum import diagonalize_and_label

freq = st.floats(4.0, 7.0)
anh = st.floats(-0.4, -0.1)
coup = st.floats(0.0, 0.08)


@st.composite
def devices(draw, levels=(3, 3, 3)):
    w1, w2 = draw(freq), draw(freq)
    wc = draw(st.floats(4.0, 7.0).filter(lambda w: abs(w - w1) > 1e-3 and abs(w - w2) > 1e-3))
    return DeviceParams((w1, w2, wc), (draw(anh), draw(anh), draw(anh)), draw(coup), draw(coup),
                        draw(st.floats(-0.01, 0.01)), ModeDims(levels))


def test_decoupled_spectrum():
    p = DeviceParams((5.1, 5.3, 6.2), (-0.3, -0.2, -0.4), 0, 0, 0, ModeDims((2, 2, 2)))
    e = np.sort(np.linalg.eigvalsh(build_static_hamiltonian(p))) / TWO_PI
    sums = sorted(sum(n * w for n, w in zip(occ, p.omega))
                  for occ in itertools.product((0, 1), repeat=3))
    assert np.allclose(e, sums, atol=1e-12)


def test_dressed_q1_near_dispersive_estimate(device):
    spec = diagonalize_and_label(build_static_hamiltonian(device), device.dims, [(1, 0, 0)])
    est = device.omega[0] + device.g1c ** 2 / device.delta_1c
    assert abs(spec.energy((1, 0, 0)) / TWO_PI - est) < 3e-3


def test_static_hermitian(device):
    h = build_static_hamiltonian(device)
    assert np.linalg.norm(h - h.conj().T) < 1e-12


def test_drive_operator_two_level():
    p = DeviceParams((5.0, 5.2, 6.0), (-0.3, -0.3, -0.3), 0.03, 0.03, dims=ModeDims((2, 2, 2)))
    x = np.array([[0, 1], [1, 0]])
    expect = np.kron(np.eye(4), x)
    assert np.array_equal(build_drive_operator(p), expect)


def test_drive_operator_element(device):
    op = build_drive_operator(device)
    assert np.allclose(op, op.conj().T)
    a = basis_state(device.dims, (0, 1, 0))
    b = basis_state(device.dims, (0, 1, 1))
    assert a @ op @ b == 1


def test_rotating_reduces_to_static(device):
    h = build_rotating_hamiltonian(device, DriveParams(0.0, 0.0))
    assert np.allclose(h, build_static_hamiltonian(device), atol=0)


def test_rotating_shift_per_excitation():
    p = DeviceParams((5.1, 5.3, 6.2), (-0.3, -0.2, -0.4), 0, 0, 0, ModeDims((3, 3, 3)))
    wd = 6.0
    hr = np.real(np.diag(build_rotating_hamiltonian(p, DriveParams(wd, 0.0))))
    hs = np.real(np.diag(build_static_hamiltonian(p)))
    n = np.real(np.diag(total_number(p.dims)))
    assert np.allclose(hr, hs - TWO_PI * wd * n, atol=1e-12)


def test_ground_energy_zero(device):
    h = build_static_hamiltonian(device)
    assert h[0, 0] == 0


@given(devices())
@settings(max_examples=30, deadline=None)
def test_excitation_number_conserved(p):
    n = total_number(p.dims)
    for h in (build_static_hamiltonian(p),
              build_rotating_hamiltonian(p, DriveParams(p.omega[2] + 0.1, 0.0))):
        assert np.linalg.norm(h @ n - n @ h) < 1e-10
        assert np.linalg.norm(h - h.conj().T) <= 1e-12 * np.linalg.norm(h)


def test_drive_breaks_number_conservation(device):
    h = build_rotating_hamiltonian(device, DriveParams(6.42, 0.05))
    n = total_number(device.dims)
    assert np.linalg.norm(h @ n - n @ h) > 1


def test_positive_anharmonicity_warns():
    with pytest.warns(UserWarning):
        DeviceParams((5.0, 5.2, 6.0), (0.1, -0.3, -0.3), 0.03, 0.03)


def test_resonant_data_coupler_rejected():
    with pytest.raises(ValueError):
        DeviceParams((6.0, 5.2, 6.0), (-0.3, -0.3, -0.3), 0.03, 0.03)


def test_negative_amp_rejected():
    with pytest.raises(ValueError):
        DriveParams(6.4, -0.01)


def test_drive_envelope_amplitude():
    d = DriveParams(6.4, 0.05, PulseShape(flat_duration=100.0))
    assert d.envelope.amplitude == 0.05
    assert d.amplitude_at(60.0) == 0.05
    with pytest.raises(ValueError):
        DriveParams(6.4, 0.05, PulseShape(amplitude=0.02))


def test_detunings(device):
    dt = detunings(device, DriveParams(6.4, 0.0))
    assert np.isclose(dt.delta_12, 0.134)
    assert np.isclose(dt.delta_1c, -0.676)
    assert np.isclose(dt.delta_c, -0.083)
    r1, r2 = device.dispersive_ratios()
    assert np.isfinite(r1) and np.isfinite(r2)


def test_lab_hamiltonian(device):
    d = DriveParams(6.4, 0.05)
    h = lab_hamiltonian(device, d)
    x = TWO_PI * build_drive_operator(device)
    assert np.allclose(h(0.0), build_static_hamiltonian(device) + 0.05 * x)
    t = 1 / (4 * 6.4)
    assert np.allclose(h(t), build_static_hamiltonian(device), atol=1e-12)


def test_measured_device_values():
    p = measured_device()
    assert p.omega == (5.641, 5.507, 6.317)
    assert basis_index(p.dims, (1, 0, 1)) == 17
