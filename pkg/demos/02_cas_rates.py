"""CAS rate versus drive amplitude: closed form, Schrieffer-Wolff and numeric anticrossing.

Run: python3 demos/02_cas_rates.py   (about a minute)
"""
from transmon_cas import measured_device
from transmon_cas.spectrum import cas_rate_numeric
from transmon_cas.swt import analytic_cas_rates, analytic_weak_drive_frequencies, effective_cas_rate

p = measured_device()
wd = analytic_weak_drive_frequencies(p)
print(f"weak-drive transition frequencies: blue {wd.omega_b_prime:.4f} GHz, "
      f"red {wd.omega_r_prime:.4f} GHz\n")
print(" drive  | closed form | SW matrix el. | numeric (blue) | resonance")
print("  MHz   |     MHz     |      MHz      |      MHz       |    GHz")
for amp in (0.02, 0.04, 0.06, 0.075):
    an = abs(analytic_cas_rates(p, amp).omega_b_rate)
    sw = abs(effective_cas_rate(p, amp, "blue"))
    num = cas_rate_numeric(p, amp, "blue")
    print(f"  {amp * 1e3:5.1f} | {an * 1e3:11.3f} | {sw * 1e3:13.3f} | {num.rate * 1e3:14.3f} "
          f"| {num.omega_resonance:.4f}")
