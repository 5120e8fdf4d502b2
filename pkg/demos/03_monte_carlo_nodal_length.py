"""Measured nodal length of sampled waves against the Kac-Rice integral.

Run: python demos/03_monte_carlo_nodal_length.py [out_dir]
"""

import sys
from pathlib import Path

from barw.field import sample
from barw.kacrice import Box, integrate_k1
from barw.nodal import deterministic_grid, mc_expected_length, write_overlay_png
from barw.spectrum import enumerate_spectrum

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

sp = enumerate_spectrum(5)
est = mc_expected_length(sp, Box.unit(), trials=2000, master_seed=1)
kr = integrate_k1(sp, Box.unit(), 1024)
print(f"n=5: Monte Carlo {est.mean_length:.4f} +- {est.std_error:.4f}   Kac-Rice {kr.value:.4f}")
print(f"     boundary of the square (f = 0 there trivially): {est.boundary_length}")

# n = 18 = 2 * 3^2: every lattice point has both coordinates divisible by 3,
# so every sample vanishes on the lines x = 1/3, 2/3 and y = 1/3, 2/3.
sp18 = enumerate_spectrum(18)
grid = deterministic_grid(sp18)
est18 = mc_expected_length(sp18, Box.unit(), trials=200, master_seed=2)
print(f"n=18: grid length {grid.total_length}, mean nodal length {est18.mean_length:.4f}, "
      f"shortest trial {min(est18.lengths):.4f}")

sp1105 = enumerate_spectrum(1105)
write_overlay_png(out / "nodal_1105.png", sample(sp1105, 7), Box.unit(), 600)
print(f"one n=1105 nodal picture -> {out / 'nodal_1105.png'}")
