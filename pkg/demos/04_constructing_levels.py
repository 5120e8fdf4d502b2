"""Eigenvalues n = q^m p with a chosen fourth Fourier coefficient.

Run: python demos/04_constructing_levels.py
"""

from barw.constructor import construct, correlation_check, nu_hat_prime, nu_hat_prime_power

# For a prime power the points spread over the angles (2j - m) phi, so the
# coefficient is an average of Chebyshev values, not the m-th power.
print("13^2:", nu_hat_prime_power(13, 2), "vs (nu_13)^2 =", nu_hat_prime(13) ** 2)

for a in (-0.5, 0.0, 0.5):
    for m in (1, 2):
        lvl = construct(a, 0.1, m)
        print(f"target {a:+.1f}, m={m}: n = {lvl.p_split}^{m} * {lvl.p_anchor} = {lvl.n}, "
              f"nu_hat_4 = {lvl.achieved_float:+.4f}, checked by enumeration: {lvl.enumeration_verified}")

lvl = construct(0.5, 0.1, 1)
print(f"\nV^1(n, 4, n^0.25) for n={lvl.n}:", correlation_check(lvl, ell=4, eps=0.25))
