"""Time-domain chevron around the blue CAS resonance and its on-resonance frequency.

Run: python3 demos/03_chevron.py   (a few minutes)
"""
import numpy as np

from transmon_cas import measured_device
from transmon_cas.dynamics import chevron_scan, fit_oscillation
from transmon_cas.spectrum import cas_rate_numeric

p = measured_device()
amp = 0.072
res = cas_rate_numeric(p, amp)
deltas = np.linspace(-0.006, 0.006, 7)
taus = np.linspace(0, 1500, 31)
grid = chevron_scan(p, amp, deltas, taus, omega_center=res.omega_resonance)

print("Q2 excited population; rows are detuning (MHz), columns are plateau length")
shades = " .:-=+*#%@"
for dl, row in zip(deltas, grid.population):
    bar = "".join(shades[min(int(v * 10), 9)] for v in row)
    print(f"  {dl * 1e3:+5.1f} |{bar}|")

fit = fit_oscillation(taus, grid.population[len(deltas) // 2])
print(f"\non-resonance oscillation {fit.frequency * 1e3:.3f} MHz, "
      f"anticrossing splitting {res.rate * 1e3:.3f} MHz")
