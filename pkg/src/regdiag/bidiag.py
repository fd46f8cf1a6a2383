"""Golub-Kahan (Lanczos) bidiagonalization with optional reorthogonalization.

Starting from ``p_1 = b / ||b||`` the process builds orthonormal bases
``P_{k+1}`` of K_{k+1}(A A^T, b) and ``Q_k`` of K_k(A^T A, A^T b) with

    A Q_k = P_{k+1} B_k,
    A^T P_{k+1} = Q_k B_k^T + alpha_{k+1} q_{k+1} e_{k+1}^T,

where ``B_k`` is (k+1) x k lower bidiagonal with diagonal ``alpha_j`` and
subdiagonal ``beta_{j+1}``. Its singular values are the Ritz values.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._bdsqr import lower_bidiag_svdvals
from .errors import NumericalError, ValidationError

REORTH_POLICIES = ("none", "full")
BREAKDOWN_RTOL = 1e-14


@dataclass(frozen=True, eq=False)
class BidiagState:
    """Result of ``k`` bidiagonalization steps.

    Attributes
    ----------
    P : (m, k+1) array
    Q : (n, k) array
    alphas : (k,) array
        ``alpha_1 .. alpha_k``.
    betas : (k+1,) array
        ``beta_1 = ||b||, beta_2 .. beta_{k+1}``.
    alpha_next, q_next :
        ``alpha_{k+1}`` and ``q_{k+1}`` (one extra half step), used by the
        second matrix relation and by LSMR. ``q_next`` is zero when
        ``alpha_next`` vanished.
    breakdown : int or None
        Step ``j`` at which a coefficient fell below tolerance.
        ``breakdown_kind`` tells which one: ``"alpha"`` (alpha_j small,
        the state stops at k = j - 1) or ``"beta"`` (beta_{j+1} small, the
        state stops at k = j and ``P[:, k]`` is zero).
    """

    P: np.ndarray
    Q: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    alpha_next: float
    q_next: np.ndarray
    reorth: str
    breakdown: Optional[int] = None
    breakdown_kind: Optional[str] = None

    @property
    def k(self):
        return self.alphas.shape[0]

    @property
    def beta1(self):
        return float(self.betas[0])

    def B(self, k=None):
        """Dense (k+1) x k lower bidiagonal ``B_k``."""
        k = self.k if k is None else k
        Bk = np.zeros((k + 1, k))
        idx = np.arange(k)
        Bk[idx, idx] = self.alphas[:k]
        Bk[idx + 1, idx] = self.betas[1:k + 1]
        return Bk

    def P_valid(self, k=None):
        """Columns of ``P_{k+1}`` that are genuine unit vectors."""
        k = self.k if k is None else k
        if self.breakdown_kind == "beta" and k == self.k:
            return self.P[:, :k]
        return self.P[:, :k + 1]


@dataclass(frozen=True)
class RelationReport:
    """Residuals of the two matrix relations and orthogonality defects."""

    residual_AQ: float
    residual_ATP: float
    orth_P: float
    orth_Q: float

    def max(self):
        return max(self.residual_AQ, self.residual_ATP, self.orth_P, self.orth_Q)


def _mgs2(v, basis, count):
    # two passes of modified Gram-Schmidt against the first `count` columns
    for _ in range(2):
        for i in range(count):
            col = basis[:, i]
            v -= (col @ v) * col
    return v


def lanczos_bidiag(A, b, kmax, reorth="full"):
    """Run up to ``kmax`` steps of Golub-Kahan bidiagonalization.

    Parameters
    ----------
    A : (m, n) array
    b : (m,) array
        Starting vector; must be nonzero.
    kmax : int
        Number of steps, ``1 <= kmax <= n``.
    reorth : {"full", "none"}
        ``"full"`` re-projects every new vector against all previous ones
        with two passes of modified Gram-Schmidt.

    Returns
    -------
    BidiagState
        Stops early, recording ``breakdown``, when ``alpha_j`` or
        ``beta_{j+1}`` drops below ``1e-14`` times a running estimate of
        ``sigma_1``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValidationError("A and b must be finite", "invalid-matrix")
    if reorth not in REORTH_POLICIES:
        raise ValidationError(f"reorth must be one of {REORTH_POLICIES}", "invalid-parameter")
    if not 1 <= kmax <= n:
        raise ValidationError(f"kmax must lie in [1, {n}]", "invalid-parameter")
    beta1 = np.linalg.norm(b)
    if beta1 == 0 or not np.isfinite(beta1):
        raise ValidationError("starting vector b is zero", "degenerate-start")

    full = reorth == "full"
    P = np.zeros((m, kmax + 1))
    Q = np.zeros((n, kmax + 1))
    alphas = np.zeros(kmax + 1)
    betas = np.zeros(kmax + 1)
    betas[0] = beta1
    P[:, 0] = b / beta1

    r = A.T @ P[:, 0]
    if full:
        r = _mgs2(r, Q, 0)
    alpha = np.linalg.norm(r)
    if alpha == 0:
        raise NumericalError("A^T b vanishes; the Krylov subspace is empty", "degenerate-start")
    sigma_est = alpha
    breakdown = kind = None
    k = 0
    for j in range(kmax):
        # alpha_{j+1}, q_{j+1} are already available in (alpha, r)
        alphas[j] = alpha
        Q[:, j] = r / alpha
        k = j + 1
        z = A @ Q[:, j] - alpha * P[:, j]
        if full:
            z = _mgs2(z, P, j + 1)
        beta = np.linalg.norm(z)
        sigma_est = max(sigma_est, np.hypot(alpha, beta))
        betas[j + 1] = beta
        if beta <= BREAKDOWN_RTOL * sigma_est:
            breakdown, kind = j + 1, "beta"
            break
        P[:, j + 1] = z / beta
        r = A.T @ P[:, j + 1] - beta * Q[:, j]
        if full:
            r = _mgs2(r, Q, j + 1)
        alpha = np.linalg.norm(r)
        if alpha <= BREAKDOWN_RTOL * sigma_est:
            if j + 1 < kmax:
                breakdown, kind = j + 2, "alpha"
            break

    if kind == "beta":
        alpha_next, q_next = 0.0, np.zeros(n)
    elif alpha <= BREAKDOWN_RTOL * sigma_est:
        alpha_next, q_next = float(alpha), np.zeros(n)
    else:
        alpha_next, q_next = float(alpha), r / alpha
    return BidiagState(P=P[:, :k + 1].copy(), Q=Q[:, :k].copy(), alphas=alphas[:k].copy(),
                       betas=betas[:k + 1].copy(), alpha_next=alpha_next, q_next=q_next,
                       reorth=reorth, breakdown=breakdown, breakdown_kind=kind)


def ritz_values(state, k=None):
    """Singular values of ``B_k``, descending."""
    k = state.k if k is None else int(k)
    if k < 1:
        raise ValidationError("k must be >= 1", "invalid-parameter")
    if k > state.k:
        raise NumericalError(f"only {state.k} steps available (breakdown at "
                             f"{state.breakdown})", "truncated-spectrum")
    return lower_bidiag_svdvals(state.alphas[:k], state.betas[:k + 1])


def ritz_table(state, kmax=None):
    """Ritz values for every k up to ``kmax`` as a list of arrays."""
    kmax = state.k if kmax is None else min(kmax, state.k)
    return [ritz_values(state, k) for k in range(1, kmax + 1)]


def orth_defect(X):
    """``||X^T X - I||_2``."""
    if X.shape[1] == 0:
        return 0.0
    G = X.T @ X - np.eye(X.shape[1])
    return float(np.linalg.norm(G, 2))


def verify_relations(state, A, k=None):
    """Residuals of both matrix relations and the orthogonality defects,
    for the leading ``k`` steps (default all)."""
    A = np.asarray(A, dtype=float)
    k = state.k if k is None else k
    Q = state.Q[:, :k]
    P = state.P[:, :k + 1]
    Bk = state.B(k)
    res1 = np.linalg.norm(A @ Q - P @ Bk, 2)
    R2 = A.T @ P - Q @ Bk.T
    if k == state.k:
        R2[:, k] -= state.alpha_next * state.q_next
    else:
        R2[:, k] -= state.alphas[k] * state.Q[:, k]
    res2 = np.linalg.norm(R2, 2)
    return RelationReport(residual_AQ=float(res1), residual_ATP=float(res2),
                          orth_P=orth_defect(state.P_valid(k)), orth_Q=orth_defect(Q))


def diagnostics_rows(state):
    """Per-step rows ``(k, alpha_k, beta_{k+1}, orth_P, orth_Q)``."""
    rows = []
    for k in range(1, state.k + 1):
        rows.append((k, float(state.alphas[k - 1]), float(state.betas[k]),
                     orth_defect(state.P_valid(k)), orth_defect(state.Q[:, :k])))
    return rows
