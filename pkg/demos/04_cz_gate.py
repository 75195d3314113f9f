"""Calibrate the CAS-based CZ gate with JAZZ and evaluate its average fidelity.

Run: python3 demos/04_cz_gate.py   (several minutes at 4 levels per mode)
"""
from transmon_cas import measured_coherence, measured_device
from transmon_cas.gates import average_gate_fidelity, calibrate_cz, channel_superoperator, simulate_jazz

p = measured_device()
cal = calibrate_cz(p, 0.075)
print(f"drive {cal.omega_d:.5f} GHz, plateau {cal.plateau:.1f} ns, "
      f"P(|110>) = {cal.p110:.4f} after {cal.iterations} iterations")

jazz = simulate_jazz(p, cal.drive())
print(f"JAZZ controlled phase {jazz.controlled_phase:.4f} rad, "
      f"coupler leakage {jazz.coupler_leakage:.1e}")

f, leak = average_gate_fidelity(channel_superoperator(p, cal))
print(f"coherent:  F = {f:.4f}, leakage {leak:.1e}")
for t2 in ("ramsey", "echo"):
    f, leak = average_gate_fidelity(channel_superoperator(p, cal, measured_coherence(), t2))
    print(f"with decoherence ({t2} T2):  F = {f:.4f}")
