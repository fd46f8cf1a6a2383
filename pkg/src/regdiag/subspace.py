"""How well the Krylov subspace K_k(A^T A, A^T b) captures span(V_k).

The distance is the sine of the largest canonical angle between the two
k-dimensional subspaces. Writing the Krylov subspace as
``span(V [I; Delta_k])`` gives ``||sin Theta|| = ||Delta_k|| /
sqrt(1 + ||Delta_k||^2)``, i.e. ``||tan Theta|| = ||Delta_k||``.
``Delta_k`` involves inverting a Vandermonde matrix in ``sigma_i^2`` and
is never formed here: exact distances come from orthonormal bases, and
``||Delta_k||`` is only estimated through closed-form bounds built from
the Lagrange factors

    |L_j^(k)(0)| = prod_{i != j, i <= k} sigma_i^2 / |sigma_j^2 - sigma_i^2|.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .bidiag import lanczos_bidiag, orth_defect, ritz_values
from .errors import NumericalError, ValidationError
from .problems import Geometric, PowerLaw

DELTA_DEFAULT = 0.1
COND_WINDOW = 1e12
ORTH_TOL = 1e-10
KRYLOV_RANK_RTOL = 1e-13
KRYLOV_COND_WARN = 1e8


class KrylovConditioningWarning(RuntimeWarning):
    """The explicit power basis is too ill conditioned to be trusted fully."""


@dataclass(frozen=True)
class RitzConditionReport:
    """Checks relating the subspace distance to the smallest Ritz value.

    ``rayleigh_lower`` / ``rayleigh_upper`` bracket the Rayleigh quotient
    of ``A^T A`` at the unit vector of the Krylov subspace closest to
    ``span(V_k^perp)``.
    """

    k: int
    epsilon_k: float
    sigma_ratio: float
    sufficient_large_holds: bool
    delta: float
    delta_for_small: float
    sufficient_small_holds: bool
    rayleigh_lower: float
    rayleigh_upper: float
    theta_k: float
    sigma_kplus1: float
    theta_gt_sigma: bool
    degenerate: bool = False


@dataclass(frozen=True, eq=False)
class SubspaceDiagnostics:
    """Per-k record of exact and estimated distances (k = 1..K)."""

    k: np.ndarray
    sin_theta_exact: np.ndarray
    tan_theta: np.ndarray
    sin_theta_estimate: np.ndarray
    delta_estimate: np.ndarray
    coeff_ratio: np.ndarray
    lagrange: List[np.ndarray] = field(repr=False)
    lagrange_max: np.ndarray = None
    k1: np.ndarray = None
    epsilon_complement: np.ndarray = None
    ritz_verdict: List[RitzConditionReport] = field(default_factory=list, repr=False)
    regime: str = ""

    @property
    def ratio(self):
        return self.sin_theta_estimate / self.sin_theta_exact


def _check_orthonormal(Q):
    if orth_defect(Q) > ORTH_TOL:
        raise ValidationError("basis is not orthonormal to 1e-10", "invalid-basis")


def sin_theta_exact(V, Q):
    """``||sin Theta(span V[:, :k], span Q)||`` for an orthonormal n x k ``Q``.

    Computed as the largest singular value of ``V[:, k:]^T Q``, which keeps
    small angles accurate. ``V`` may be an :class:`SvdFactors`.
    """
    V = getattr(V, "V", V)
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if Q.shape[0] != V.shape[0]:
        Q = Q.T
    k = Q.shape[1]
    if not 1 <= k <= V.shape[0] - 1:
        raise ValidationError("need 1 <= k <= n-1", "invalid-parameter")
    _check_orthonormal(Q)
    s = np.linalg.svd(V[:, k:].T @ Q, compute_uv=False)[0]
    return float(min(max(s, 0.0), 1.0))


def cos_theta_max(V, Q):
    """Cosine of the largest canonical angle, i.e. ``epsilon_k``.

    Smallest singular value of ``V[:, :k]^T Q``; accurate when the angle is
    close to a right angle where ``sqrt(1 - sin^2)`` is not.
    """
    V = getattr(V, "V", V)
    k = Q.shape[1]
    c = np.linalg.svd(V[:, :k].T @ Q, compute_uv=False)[-1]
    return float(min(max(c, 0.0), 1.0))


def subspace_distance(X, Y):
    """Sine of the largest canonical angle between two orthonormal bases."""
    Y = np.asarray(Y, dtype=float)
    R = Y - X @ (X.T @ Y)
    return float(min(np.linalg.norm(R, 2), 1.0))


def delta_norm_from_sin(sin_theta):
    """``||Delta_k|| = ||tan Theta|| = s / sqrt(1 - s^2)``; infinite at 1."""
    s = float(sin_theta)
    if not 0.0 <= s <= 1.0:
        raise ValidationError(f"sin theta must lie in [0, 1], got {s}", "domain")
    if s == 1.0:
        return math.inf
    return s / math.sqrt((1.0 - s) * (1.0 + s))


def sin_from_delta(delta):
    """Inverse of :func:`delta_norm_from_sin`."""
    d = float(delta)
    if d < 0:
        raise ValidationError("||Delta|| must be nonnegative", "domain")
    if math.isinf(d):
        return 1.0
    return d / math.hypot(1.0, d)


def lagrange_factors(sigma, k):
    """``|L_j^(k)(0)|`` for j = 1..k and the (1-based) index of the largest.

    Evaluated in log-magnitude space. Ties in the maximum go to the larger j.
    For k = 1 the empty product gives ``[1.0]``.
    """
    s = np.asarray(sigma, dtype=float)[:k]
    if s.shape[0] < k or k < 1:
        raise ValidationError("need k >= 1 singular values", "invalid-parameter")
    if np.any(s <= 0):
        raise ValidationError("singular values must be positive", "invalid-spectrum")
    gap = np.abs(s[:, None] - s[None, :])
    np.fill_diagonal(gap, 1.0)
    if np.any(gap == 0):
        raise ValidationError("repeated singular value within the first k",
                              "division-by-zero-gap")
    logs = np.log(s)
    # log sigma_i^2 - log|sigma_j^2 - sigma_i^2| for i != j
    terms = 2 * logs[None, :] - np.log(gap) - np.log(s[:, None] + s[None, :])
    np.fill_diagonal(terms, 0.0)
    L = np.exp(terms.sum(axis=1))
    k1 = int(k - np.argmax(L[::-1]))
    return L, k1


def estimate_delta_severe(sigma, coeff_ratio, rho, k):
    """Severe-decay estimate of ``||Delta_k||``.

    ``(sigma_{k+1}/sigma_k) * coeff_ratio * c`` with ``c = 1 + 2 rho^-2``
    for k = 1 and ``c = 1 + 3 rho^-2`` (the amplification factor folded
    in) for k >= 2.
    """
    if not rho > 1:
        raise ValidationError("rho must exceed 1", "invalid-decay")
    sigma = np.asarray(sigma, dtype=float)
    c = 1.0 + (2.0 if k == 1 else 3.0) / rho ** 2
    return float(sigma[k] / sigma[k - 1] * coeff_ratio * c)


def moderate_growth_factor(alpha, k):
    """``sqrt(k^2/(4 alpha^2 - 1) + k/(2 alpha - 1))``; ``sqrt(1/(2 alpha - 1))`` at k = 1."""
    if k == 1:
        return math.sqrt(1.0 / (2 * alpha - 1))
    return math.sqrt(k * k / (4 * alpha * alpha - 1) + k / (2 * alpha - 1))


def estimate_delta_moderate(sigma, coeff_ratio, alpha, k, lagrange_max=None):
    """Power-law-decay estimate of ``||Delta_k||``.

    ``coeff_ratio * moderate_growth_factor(alpha, k) * |L_{k1}^(k)(0)|``
    (no Lagrange factor at k = 1). The Lagrange maximum is computed
    exactly from ``sigma`` unless supplied.
    """
    if not alpha > 0.5:
        raise ValidationError("alpha must exceed 1/2", "invalid-decay")
    if k == 1:
        return float(coeff_ratio * moderate_growth_factor(alpha, 1))
    if lagrange_max is None:
        lagrange_max = float(np.max(lagrange_factors(sigma, k)[0]))
    return float(coeff_ratio * moderate_growth_factor(alpha, k) * lagrange_max)


def estimate_lagrange_severe(rho, k, sigma=None):
    """Severe-decay estimates: the maximum ``1 + 3 rho^-2`` and per-j values
    ``(1 + 3 rho^-2) / prod_{i=j+1}^k (sigma_j / sigma_i)^2``.

    ``sigma`` defaults to the model ``rho^-i``.
    """
    if not rho > 1:
        raise ValidationError("rho must exceed 1", "invalid-decay")
    if sigma is None:
        sigma = Geometric(rho).singular_values(k)
    s = np.asarray(sigma, dtype=float)[:k]
    top = 1.0 + 3.0 / rho ** 2
    logs = np.log(s)
    # sum_{i>j} 2 (log sigma_j - log sigma_i)
    suffix = np.concatenate([np.cumsum(logs[::-1])[::-1][1:], [0.0]])
    count = np.arange(k - 1, -1, -1)
    per_j = top * np.exp(-2.0 * (count * logs - suffix))
    return top, per_j


@dataclass(frozen=True)
class ModerateLagrangeEstimate:
    upper: float
    lower: float
    lower_active: bool


def estimate_lagrange_moderate(alpha, k):
    """``1 + k/(2 alpha + 1)`` and the lower bound ``k/(2 alpha + 1)``,
    the latter valid only once ``k >= 2 alpha + 1``."""
    if not alpha > 0.5:
        raise ValidationError("alpha must exceed 1/2", "invalid-decay")
    lower = k / (2 * alpha + 1)
    return ModerateLagrangeEstimate(upper=1.0 + lower, lower=lower,
                                    lower_active=k >= 2 * alpha + 1)


def ritz_condition_check(sigma, sin_theta, theta_k, k, delta=DELTA_DEFAULT, epsilon_k=None):
    """Evaluate the two sufficient conditions linking ``epsilon_k`` to
    ``theta_k^(k)`` and record whether ``theta_k^(k) > sigma_{k+1}``.

    ``epsilon_k = sqrt(1 - sin_theta^2)``; pass ``epsilon_k`` directly to
    avoid the cancellation when ``sin_theta`` is close to one.
    """
    sigma = getattr(sigma, "sigma", sigma)
    sigma = np.asarray(sigma, dtype=float)
    if not delta > 0:
        raise ValidationError("delta must be positive", "invalid-parameter")
    if not 0.0 <= sin_theta <= 1.0:
        raise ValidationError("sin theta must lie in [0, 1]", "domain")
    if epsilon_k is None:
        epsilon_k = math.sqrt(max((1.0 - sin_theta) * (1.0 + sin_theta), 0.0))
    s1, sk, sk1, sn = sigma[0], sigma[k - 1], sigma[k], sigma[-1]
    e2 = epsilon_k ** 2
    ratio = sk1 / sk
    delta_small = delta / ((s1 / sk1) ** 2 - 1.0)
    return RitzConditionReport(
        k=k, epsilon_k=float(epsilon_k), sigma_ratio=float(ratio),
        sufficient_large_holds=bool(epsilon_k >= ratio),
        delta=float(delta), delta_for_small=float(delta_small),
        sufficient_small_holds=bool(e2 <= delta_small),
        rayleigh_lower=float(e2 * sk ** 2 + (1 - e2) * sn ** 2),
        rayleigh_upper=float(e2 * s1 ** 2 + (1 - e2) * sk1 ** 2),
        theta_k=float(theta_k), sigma_kplus1=float(sk1),
        theta_gt_sigma=bool(theta_k > sk1),
        degenerate=sin_theta == 1.0)


def explicit_krylov_basis(A, b, k):
    """Orthonormal basis of ``span{A^T b, (A^T A) A^T b, ...}`` from explicit powers.

    Each power is normalized before the next multiplication (the span is
    unchanged) and the columns are orthonormalized by two-pass Gram-Schmidt.
    Meant as an independent oracle for small k and n only: powers become
    numerically dependent quickly.

    Raises
    ------
    NumericalError
        ``rank-deficient-krylov`` when the normalized power matrix has
        numerical rank below k at relative tolerance 1e-13.

    Warns
    -----
    KrylovConditioningWarning
        When that matrix has condition number above 1e8.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[1]
    if not 1 <= k <= n:
        raise ValidationError("need 1 <= k <= n", "invalid-parameter")
    K = np.empty((n, k))
    w = A.T @ np.asarray(b, dtype=float)
    for j in range(k):
        nrm = np.linalg.norm(w)
        if nrm == 0:
            raise NumericalError("Krylov power vanished", "rank-deficient-krylov")
        K[:, j] = w / nrm
        w = A.T @ (A @ K[:, j])
    sv = np.linalg.svd(K, compute_uv=False)
    if sv[-1] <= KRYLOV_RANK_RTOL * sv[0]:
        rank = int(np.sum(sv > KRYLOV_RANK_RTOL * sv[0]))
        raise NumericalError(f"explicit Krylov matrix has numerical rank {rank} < {k}",
                             "rank-deficient-krylov")
    cond = sv[0] / sv[-1]
    if cond > KRYLOV_COND_WARN:
        warnings.warn(f"explicit Krylov matrix condition number {cond:.2e}",
                      KrylovConditioningWarning, stacklevel=2)
    Q = np.zeros((n, k))
    for j in range(k):
        v = K[:, j].copy()
        for _ in range(2):
            v -= Q[:, :j] @ (Q[:, :j].T @ v)
        Q[:, j] = v / np.linalg.norm(v)
    return Q


def diagnosable_kmax(sigma, window=COND_WINDOW):
    """Largest k with ``sigma_1 / sigma_k < window`` (and k <= n - 1)."""
    sigma = np.asarray(sigma, dtype=float)
    ok = sigma[0] / sigma < window
    k = int(np.argmin(ok)) if not ok.all() else sigma.shape[0]
    return max(1, min(k, sigma.shape[0] - 1))


def estimate_delta(decay, sigma, coeff_ratio, k):
    """Dispatch on the decay model."""
    if isinstance(decay, Geometric):
        return estimate_delta_severe(sigma, coeff_ratio, decay.rho, k)
    if isinstance(decay, PowerLaw):
        return estimate_delta_moderate(sigma, coeff_ratio, decay.alpha, k)
    raise ValidationError("no decay model to estimate with", "invalid-decay")


def diagnose(A, b, svd, decay, kmax=None, reorth="full", delta=DELTA_DEFAULT, state=None):
    """Exact and estimated subspace distances plus Ritz checks per k.

    Only k with ``sigma_1 / sigma_k < 1e12`` are diagnosed, since beyond
    that the singular triplets carry no accuracy.
    """
    sigma = svd.sigma
    kwin = diagnosable_kmax(sigma)
    kmax = kwin if kmax is None else min(int(kmax), kwin)
    if state is None:
        state = lanczos_bidiag(A, b, kmax, reorth=reorth)
    kmax = min(kmax, state.k)
    coeff = np.abs(svd.U.T @ np.asarray(b, dtype=float))

    out = {name: [] for name in ("sin", "tan", "est", "dest", "ratio", "lag", "lmax",
                                 "k1", "eps", "ritz")}
    for k in range(1, kmax + 1):
        Q = state.Q[:, :k]
        s = sin_theta_exact(svd.V, Q)
        eps_k = cos_theta_max(svd.V, Q)
        L, k1 = lagrange_factors(sigma, k)
        r = coeff[k] / coeff[k - 1]
        if isinstance(decay, PowerLaw):
            d_est = estimate_delta_moderate(sigma, r, decay.alpha, k, float(L[k1 - 1]))
        else:
            d_est = estimate_delta(decay, sigma, r, k)
        theta_k = ritz_values(state, k)[-1]
        out["sin"].append(s)
        out["tan"].append(delta_norm_from_sin(s))
        out["dest"].append(d_est)
        out["est"].append(sin_from_delta(d_est))
        out["ratio"].append(r)
        out["lag"].append(L)
        out["lmax"].append(L[k1 - 1])
        out["k1"].append(k1)
        out["eps"].append(eps_k)
        out["ritz"].append(ritz_condition_check(sigma, s, theta_k, k, delta, epsilon_k=eps_k))

    regime = "severe" if isinstance(decay, Geometric) else getattr(decay, "regime", "")
    return SubspaceDiagnostics(
        k=np.arange(1, kmax + 1), sin_theta_exact=np.array(out["sin"]),
        tan_theta=np.array(out["tan"]), sin_theta_estimate=np.array(out["est"]),
        delta_estimate=np.array(out["dest"]), coeff_ratio=np.array(out["ratio"]),
        lagrange=out["lag"], lagrange_max=np.array(out["lmax"]), k1=np.array(out["k1"]),
        epsilon_complement=np.array(out["eps"]), ritz_verdict=out["ritz"], regime=regime)
