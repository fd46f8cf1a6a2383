"""How well does the Krylov subspace track the dominant right singular subspace?

For each k the exact distance ||sin Theta|| between span(Q_k) and
span(v_1..v_k) is compared with the closed-form estimate built from the
singular values, the ratio |u_{k+1}^T b| / |u_k^T b| and the Lagrange
factors. Severe decay keeps the distance small up to the noise level;
mild decay drives it to one almost at once.

Run:  python3 demos/03_subspace_distance.py
"""

from regdiag import Geometric, PowerLaw, add_noise, diagnose, lagrange_factors, make_problem

cases = {
    "severe  rho=e^2": Geometric(7.38905609893065),
    "moderate alpha=3": PowerLaw(1.0, 3.0),
    "mild  alpha=0.6": PowerLaw(1.0, 0.6),
}

for label, decay in cases.items():
    noisy = add_noise(make_problem("synthetic", 64, decay=decay, seed=0), 1e-3, seed=1)
    d = diagnose(noisy.A, noisy.b, noisy.base.svd, decay, kmax=10)
    print(f"\n{label}")
    print(" k  sin exact   estimate   est/exact  max Lagrange")
    for i, k in enumerate(d.k):
        print(f"{k:2d}  {d.sin_theta_exact[i]:.3e}  {d.sin_theta_estimate[i]:.3e}  "
              f"{d.ratio[i]:9.3f}  {d.lagrange_max[i]:11.4g}")

print("\nLagrange factor maxima for sigma_i = i^-alpha, k = 10:")
for alpha in (0.6, 1.0, 3.0, 4.0):
    L, k1 = lagrange_factors(PowerLaw(1.0, alpha).singular_values(10), 10)
    print(f"  alpha={alpha}: {L.max():.5g} at j={k1}")
