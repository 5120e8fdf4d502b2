"""Lattice points on circles and the one angular statistic that matters.

Run: python demos/01_lattice_points.py
"""

from barw.correlations import count_semicorrelations, count_vector, trivial_prediction
from barw.spectrum import enumerate_spectrum

# Each n that is a sum of two squares gives N points on the circle |xi|^2 = n.
for n in (5, 25, 65, 1105, 32045):
    sp = enumerate_spectrum(n)
    s = sp.summary
    print(f"n={n:6d}  N={sp.N:3d}  nu_hat_4={s.nu_hat_4!s:>22}  ({float(s.nu_hat_4):+.5f})  "
          f"min |coord|={s.min_coord}  grid divisor g={sp.fix.g}")

# The fourth Fourier coefficient multiplies over coprime factors: 65 = 5 * 13.
nu = {n: enumerate_spectrum(n).summary.nu_hat_4 for n in (5, 13, 65)}
print("\nnu(65) == nu(5) * nu(13):", nu[65] == nu[5] * nu[13])

# Cancelling sums: exact counts against the pairing count l!/(2^(l/2)(l/2)!) N^(l/2).
sp = enumerate_spectrum(32045)
print(f"\nn=32045 (N={sp.N}): ordered tuples whose first coordinates cancel")
for ell in (2, 4, 6):
    semi = count_semicorrelations(sp, ell, 1).count
    full = count_vector(sp, ell).count
    print(f"  l={ell}: semi={semi:>12d}  full vector={full:>10d}  pairing count={trivial_prediction(ell, sp.N):>10d}")
