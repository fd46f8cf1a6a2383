"""Test problems, the discrete Picard condition and where noise takes over.

Builds a severely ill-posed synthetic problem, adds 0.1% noise and prints
the SVD coefficients of the right-hand side next to the noise level. The
transition index marks where |u_i^T b| stops decaying and levels off at
the noise floor; the TSVD error curve has its minimum close to it.

Run:  python3 demos/01_problems_and_picard.py
"""

import numpy as np

from regdiag import (Geometric, add_noise, compute_svd, make_problem, picard_data,
                     transition_index, tsvd_error_curve)

problem = make_problem("synthetic", 64, decay=Geometric(np.exp(2.0)), beta=1.0, seed=0)
noisy = add_noise(problem, 1e-3, seed=1)
svd = problem.svd  # exact by construction

pic = picard_data(svd, noisy.b)
trans = transition_index(pic, noisy.eta)
curve = tsvd_error_curve(svd, noisy.b, noisy.x_true)

print(f"noise level eta = {noisy.eta:.3e}")
print(f"{'i':>3} {'sigma_i':>11} {'|u_i^T b|':>11} {'ratio':>11}")
for i in range(10):
    print(f"{i + 1:>3} {pic.sigma[i]:11.3e} {pic.coeff[i]:11.3e} {pic.ratio[i]:11.3e}")
print(f"\ntransition index k0 = {trans.k0} (rule: {trans.rule})")
print(f"best TSVD truncation = {curve.best_k}, relative error {curve.best_rel_error:.3e}")

# the quadrature problems follow the same pattern with a computed SVD
for kind, n in (("shaw", 64), ("deriv2", 100)):
    p = add_noise(make_problem(kind, n), 1e-3, seed=1)
    s = compute_svd(p.A)
    c = tsvd_error_curve(s, p.b, p.x_true)
    print(f"{kind:>7} n={n}: sigma_1/sigma_n = {s.sigma[0] / s.sigma[-1]:.2e}, "
          f"best TSVD k = {c.best_k}")
