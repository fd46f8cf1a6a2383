"""Ritz values versus singular values.

Checks, for each k, whether the cosine eps_k of the largest canonical
angle satisfies eps_k >= sigma_{k+1}/sigma_k and whether the smallest
Ritz value theta_k^(k) still lies above sigma_{k+1}. On a moderately
ill-posed problem the condition holds for the first few k and the Ritz
value drops below sigma_{k+1} shortly after it stops holding.

Run:  python3 demos/04_ritz_conditions.py
"""

from regdiag import PowerLaw, add_noise, diagnose, make_problem

for alpha in (3.0, 0.6):
    decay = PowerLaw(1.0, alpha)
    noisy = add_noise(make_problem("synthetic", 64, decay=decay, seed=0), 1e-3, seed=1)
    d = diagnose(noisy.A, noisy.b, noisy.base.svd, decay, kmax=12)
    print(f"\nalpha = {alpha}")
    print(" k    eps_k   s_{k+1}/s_k  cond   theta_k    sigma_{k+1}  above")
    for r in d.ritz_verdict:
        print(f"{r.k:2d}  {r.epsilon_k:.4f}  {r.sigma_ratio:10.4f}  {'yes' if r.sufficient_large_holds else ' no'}"
              f"   {r.theta_k:.3e}  {r.sigma_kplus1:.3e}  {'yes' if r.theta_gt_sigma else 'no'}")
