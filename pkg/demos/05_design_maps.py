"""ZZ and CAS drive-efficiency maps over detuning and coupling, with and without g12.

Run: python3 demos/05_design_maps.py
"""
import numpy as np

from transmon_cas.spectrum import SweepSpec, design_map

xs = np.linspace(0.5, 5.0, 12)
ys = np.linspace(0.005, 0.2, 12)
maps = {inc: design_map(SweepSpec(tuple(xs), tuple(ys), "cas_blue", inc)) for inc in (False, True)}

for inc, grid in maps.items():
    quiet = np.abs(grid.xi_zz) < 100e-6
    print(f"\n{'with' if inc else 'without'} direct coupling: "
          f"{quiet.sum()} of {quiet.size} cells have |xi_ZZ| < 100 kHz")
    print("   rows: Delta_12/|alpha| from 0.5 to 5; columns: g/Delta from 0.005 to 0.2")
    for x, row in zip(xs, quiet):
        print(f"   {x:4.2f} " + "".join("o" if q else "." for q in row))

same = np.array_equal(maps[False].eta, maps[True].eta, equal_nan=True)
print(f"\ndrive efficiency identical with and without g12: {same}")
