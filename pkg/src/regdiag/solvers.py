"""Krylov iterative regularization on a shared bidiagonalization.

LSQR, CGME and LSMR all draw their k-th iterate from the same Krylov
subspace ``span(Q_k)``; they differ only in the small projected problem
solved with ``B_k``:

* LSQR   ``min ||B_k y - beta_1 e_1||``
* CGME   ``L_k y = beta_1 e_1`` with ``L_k`` the leading k x k block
* LSMR   ``min ||A^T (b - A Q_k y)||``, a second bidiagonal least squares
  problem after a QR of ``B_k``.

``cgls_series`` runs the textbook CG recurrence on the normal equations
and exists to check that it reproduces the LSQR iterates.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._bdsqr import lower_to_upper
from .bidiag import lanczos_bidiag, ritz_values
from .errors import ValidationError

ITERATE_CAP = 64
NO_SEMICONV = "no-semi-convergence-within-kmax"
_LOG_CLAMP = np.log(1e300)


@dataclass(frozen=True, eq=False)
class SolutionSeries:
    """Per-iteration error curve of one method.

    ``iterates[k-1]`` holds ``x_k`` for k up to the storage cap.
    ``normal_residual_norm`` is ``||A^T (b - A x_k)||``.
    """

    method: str
    k: np.ndarray
    rel_error: np.ndarray
    residual_norm: np.ndarray
    solution_norm: np.ndarray
    normal_residual_norm: np.ndarray
    iterates: np.ndarray = field(repr=False)
    truncated: bool = False
    breakdown: Optional[int] = None

    @property
    def kstar(self):
        return semi_convergence(self).kstar

    @property
    def best_rel_error(self):
        return float(np.min(self.rel_error))

    def iterate(self, k):
        if k > self.iterates.shape[0]:
            raise ValidationError(f"iterate {k} not stored (cap {self.iterates.shape[0]})",
                                  "not-stored")
        return self.iterates[k - 1]


@dataclass(frozen=True)
class SemiConvergence:
    kstar: int
    best_rel_error: float
    flag: Optional[str] = None


def _series(method, A, b, x_true, xs, cap, state=None):
    xnorm = np.linalg.norm(x_true)
    X = np.asarray(xs)
    R = b[None, :] - X @ A.T
    k = np.arange(1, X.shape[0] + 1)
    breakdown = None if state is None else state.breakdown
    return SolutionSeries(
        method=method, k=k,
        rel_error=np.linalg.norm(X - x_true, axis=1) / xnorm,
        residual_norm=np.linalg.norm(R, axis=1),
        solution_norm=np.linalg.norm(X, axis=1),
        normal_residual_norm=np.linalg.norm(R @ A, axis=1),
        iterates=X[:cap].copy(),
        truncated=breakdown is not None,
        breakdown=breakdown)


def _prepare(problem, kmax, reorth, state):
    A, b = problem.A, problem.b
    n = A.shape[1]
    if kmax is None:
        kmax = n - 1 if state is None else state.k
    if not 1 <= kmax <= n:
        raise ValidationError(f"kmax must lie in [1, {n}]", "invalid-parameter")
    if state is None:
        state = lanczos_bidiag(A, b, kmax, reorth=reorth)
    return state, min(kmax, state.k)


def _back_subst_upper(d, e, rhs):
    k = d.shape[0]
    y = np.empty(k)
    y[-1] = rhs[-1] / d[-1]
    for i in range(k - 2, -1, -1):
        y[i] = (rhs[i] - e[i] * y[i + 1]) / d[i]
    return y


def _lsq_lower_bidiag(diag, sub, rhs0):
    """Minimize ``||L y - rhs0 e_1||`` for the (k+1) x k lower bidiagonal
    ``L`` with diagonal ``diag`` and subdiagonal ``sub`` (length k)."""
    betas = np.concatenate([[rhs0], sub])
    d, e, cs, sn = lower_to_upper(diag, betas)
    # rotate the right-hand side beta_1 e_1 alongside
    k = d.shape[0]
    phi = np.empty(k)
    phibar = rhs0
    for j in range(k):
        phi[j] = cs[j] * phibar
        phibar = -sn[j] * phibar
    return _back_subst_upper(d, e, phi), d, e


def lsqr_projected(state, k):
    """``y_k = beta_1 B_k^+ e_1`` through a Givens QR of ``B_k``."""
    y, _, _ = _lsq_lower_bidiag(state.alphas[:k], state.betas[1:k + 1], state.beta1)
    return y


def cgme_projected(state, k):
    """Forward substitution ``L_k z = beta_1 e_1``."""
    a, bt = state.alphas[:k], state.betas[1:k]
    z = np.empty(k)
    z[0] = state.beta1 / a[0]
    for j in range(1, k):
        z[j] = -bt[j - 1] * z[j - 1] / a[j]
    return z


def lsmr_projected(state, k):
    """Minimizer of ``||A^T r||`` over ``span(Q_k)`` in projected form.

    With ``B_k = Qhat [R; 0]`` the normal residual is
    ``||[R^T w - alpha_1 beta_1 e_1; gamma w_k / R_kk]||`` for ``w = R y``
    and ``gamma = alpha_{k+1} beta_{k+1}``: another lower bidiagonal least
    squares problem, so ``B_k^T B_k`` is never formed.
    """
    alpha_k1 = state.alphas[k] if k < state.k else state.alpha_next
    gamma = alpha_k1 * state.betas[k]
    d, e, _, _ = lower_to_upper(state.alphas[:k], state.betas[:k + 1])
    sub = np.concatenate([e, [gamma / d[-1]]])
    w, _, _ = _lsq_lower_bidiag(d, sub, state.alphas[0] * state.beta1)
    return _back_subst_upper(d, e, w)


_PROJECTED = {"lsqr": lsqr_projected, "cgme": cgme_projected, "lsmr": lsmr_projected}


def krylov_series(method, problem, kmax=None, reorth="full", state=None,
                  iterate_cap=ITERATE_CAP):
    """Iterates ``x_k = Q_k y_k`` of ``method`` for k = 1..kmax."""
    if method not in _PROJECTED:
        raise ValidationError(f"unknown method {method!r}", "invalid-method")
    state, kmax = _prepare(problem, kmax, reorth, state)
    solve = _PROJECTED[method]
    xs = [state.Q[:, :k] @ solve(state, k) for k in range(1, kmax + 1)]
    return _series(method, problem.A, problem.b, problem.x_true, xs, iterate_cap, state)


def lsqr_series(problem, kmax=None, reorth="full", state=None, iterate_cap=ITERATE_CAP):
    """LSQR iterates: minimum residual over the Krylov subspace."""
    return krylov_series("lsqr", problem, kmax, reorth, state, iterate_cap)


def cgme_series(problem, kmax=None, reorth="full", state=None, iterate_cap=ITERATE_CAP):
    """CGME (Craig) iterates, ``x_k = A^T y_k`` with CG on ``A A^T y = b``."""
    return krylov_series("cgme", problem, kmax, reorth, state, iterate_cap)


def lsmr_series(problem, kmax=None, reorth="full", state=None, iterate_cap=ITERATE_CAP):
    """LSMR iterates: minimum ``||A^T r||`` over the Krylov subspace."""
    return krylov_series("lsmr", problem, kmax, reorth, state, iterate_cap)


def cgls_iterates(A, b, kmax):
    """Textbook CGLS from ``x_0 = 0``; stops early if ``A^T r`` vanishes."""
    A = np.asarray(A, dtype=float)
    x = np.zeros(A.shape[1])
    r = np.array(b, dtype=float)
    s = A.T @ r
    p = s.copy()
    gamma = s @ s
    gamma0 = gamma
    xs = []
    for _ in range(kmax):
        q = A @ p
        qq = q @ q
        if qq == 0 or gamma <= (1e-30 * gamma0):
            break
        step = gamma / qq
        x = x + step * p
        r = r - step * q
        s = A.T @ r
        gamma_new = s @ s
        p = s + (gamma_new / gamma) * p
        gamma = gamma_new
        xs.append(x.copy())
    return xs


def cgls_series(problem, kmax=None, iterate_cap=ITERATE_CAP):
    """CGLS iterates, mathematically identical to LSQR."""
    n = problem.A.shape[1]
    kmax = n - 1 if kmax is None else kmax
    if not 1 <= kmax <= n:
        raise ValidationError(f"kmax must lie in [1, {n}]", "invalid-parameter")
    xs = cgls_iterates(problem.A, problem.b, kmax)
    return _series("cgls", problem.A, problem.b, problem.x_true, xs, iterate_cap)


def filter_factors(theta, sigma):
    """LSQR filter factors ``f_i = 1 - prod_j (theta_j^2 - sigma_i^2) / theta_j^2``.

    Each factor is ``(theta_j - sigma_i)(theta_j + sigma_i) / theta_j^2``;
    the product is accumulated as sign and log-magnitude, and
    ``1 - prod`` uses ``expm1`` when the product is positive so that
    tiny filters for small ``sigma_i`` keep full relative accuracy.
    """
    theta = np.asarray(theta, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if theta.size == 0 or np.any(theta <= 0):
        raise ValidationError("Ritz values must be positive", "invalid-spectrum")
    diff = theta[None, :] - sigma[:, None]
    summ = theta[None, :] + sigma[:, None]
    with np.errstate(divide="ignore"):
        logmag = np.log(np.abs(diff)) + np.log(summ) - 2.0 * np.log(theta)[None, :]
    logmag = np.minimum(logmag, _LOG_CLAMP)
    negatives = np.sum(diff < 0, axis=1)
    zero = np.any(diff == 0, axis=1)
    total = np.sum(logmag, axis=1)
    total = np.clip(total, -np.inf, _LOG_CLAMP)
    sign = np.where(negatives % 2 == 0, 1.0, -1.0)
    f = np.where(sign > 0, -np.expm1(total), 1.0 + np.exp(total))
    f[zero] = 1.0
    return f


def filtered_solution(svd, b, theta):
    """``sum_i f_i (u_i^T b / sigma_i) v_i`` for the given Ritz values."""
    f = filter_factors(theta, svd.sigma)
    c = svd.U.T @ np.asarray(b, dtype=float)
    return svd.V @ (f * c / svd.sigma)


def filter_matrix(state, sigma, kmax=None):
    """Rows ``f^(k)`` for k = 1..kmax."""
    kmax = state.k if kmax is None else min(kmax, state.k)
    return np.array([filter_factors(ritz_values(state, k), sigma) for k in range(1, kmax + 1)])


def semi_convergence(series):
    """Index of the smallest relative error (ties go to the smaller k)."""
    err = np.asarray(series.rel_error if hasattr(series, "rel_error") else series, dtype=float)
    if err.size < 2:
        raise ValidationError("need at least two iterations", "too-short")
    i = int(np.argmin(err))
    flag = NO_SEMICONV if i == err.size - 1 else None
    return SemiConvergence(kstar=i + 1, best_rel_error=float(err[i]), flag=flag)


def default_kmax(n, k0):
    return int(min(n - 1, 3 * k0))
