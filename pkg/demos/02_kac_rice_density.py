"""The zero density K1 and the two-term expansion of the expected nodal length.

Run: python demos/02_kac_rice_density.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

from barw.kacrice import (
    Box,
    integrate_k1,
    k1_grid,
    leading_density,
    predict_one_term,
    predict_two_term,
    write_heatmap_png,
)
from barw.spectrum import enumerate_spectrum

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

sp = enumerate_spectrum(32045)
print(f"n={sp.n}, N={sp.N}, leading density pi sqrt(n)/(2 sqrt 2) = {leading_density(sp.n):.4f}")

# Far from the boundary K1 hovers around the leading density; near it, it dips.
x = (np.arange(400) + 0.5) / 400
K = k1_grid(sp, x, x)
write_heatmap_png(out / "k1_32045.png", K)
print(f"K1 over the square: min {K.min():.2f}, mean {K.mean():.2f}, max {K.max():.2f} -> {out / 'k1_32045.png'}")

for box in (Box.unit(), Box((0.05, 0.05), 0.1), Box((0.5, 0.5), 0.1), Box((0.37, 0.61), 0.1)):
    res = None if box.side == 1 else 4 * 2864
    q = integrate_k1(sp, box, res)
    p1, p2 = predict_one_term(sp, box), predict_two_term(sp, box)
    print(f"box centre {box.center} side {box.side}: integral {q.value:.5f} (+-{q.error_estimate:.1e})  "
          f"one-term {p1:.5f}  two-term {p2:.5f}")

# The centre box sits where the point (2, 179) leaves a slowly varying term
# cos(4 pi x1) in the variance; a box of side 0.1 cannot average it away.
