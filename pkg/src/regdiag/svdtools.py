"""SVD-based reference solutions: TSVD, Tikhonov, Picard data and the
noise transition index."""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

#: threshold multiplier used by :func:`transition_index`
NU_DEFAULT = 1.5


@dataclass(frozen=True, eq=False)
class SvdFactors:
    """Thin SVD ``A = U diag(sigma) V^T`` with ``sigma`` descending.

    ``U`` is m x n with orthonormal columns and ``V`` is n x n orthogonal.
    Leading-column views ``U[:, :k]``, ``V[:, :k]`` give the dominant
    singular subspaces.
    """

    sigma: np.ndarray
    U: np.ndarray
    V: np.ndarray

    @property
    def n(self):
        return self.sigma.shape[0]

    def coefficients(self, b):
        """Fourier coefficients ``u_i^T b``."""
        return self.U.T @ np.asarray(b, dtype=float)

    def reconstruct(self):
        return (self.U * self.sigma) @ self.V.T


@dataclass(frozen=True, eq=False)
class PicardData:
    sigma: np.ndarray
    coeff: np.ndarray
    ratio: np.ndarray


@dataclass(frozen=True)
class TransitionReport:
    k0: int
    eta_estimate: float
    rule: str


@dataclass(frozen=True, eq=False)
class TsvdCurve:
    """Relative errors and residual norms of ``x_k^tsvd``, k = 1..kmax."""

    k: np.ndarray
    rel_error: np.ndarray
    residual_norm: np.ndarray

    @property
    def best_k(self):
        return int(self.k[np.argmin(self.rel_error)])

    @property
    def best_rel_error(self):
        return float(np.min(self.rel_error))


def _fix_signs(U, V):
    # largest-magnitude entry of every right singular vector is positive
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, V * signs


def compute_svd(A):
    """Thin SVD of ``A`` (m >= n >= 2) under a fixed sign convention.

    The largest-magnitude entry of each ``v_i`` is made positive, with
    ``u_i`` flipped alongside, so ``u_i^T b`` is comparable across runs.
    Singular values at the rounding floor are returned as computed; they
    need not be strictly decreasing there.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValidationError("expected a 2-D matrix", "invalid-matrix")
    m, n = A.shape
    if not (m >= n >= 2):
        raise ValidationError(f"need m >= n >= 2, got {A.shape}", "invalid-dimension")
    if not np.all(np.isfinite(A)):
        raise ValidationError("matrix has non-finite entries", "invalid-matrix")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    U, V = _fix_signs(U, Vt.T)
    return SvdFactors(sigma=s, U=U, V=V)


def tsvd_solve(svd, b, k):
    """``sum_{i<=k} (u_i^T b / sigma_i) v_i``."""
    if k < 1:
        raise ValidationError("truncation index must be >= 1", "invalid-truncation")
    if k > svd.n:
        raise ValidationError(f"k={k} exceeds n={svd.n}", "invalid-truncation")
    c = svd.U[:, :k].T @ np.asarray(b, dtype=float)
    return svd.V[:, :k] @ (c / svd.sigma[:k])


def tsvd_error_curve(svd, b, x_true, kmax=None):
    """Relative error and residual norm of every TSVD solution up to ``kmax``.

    The argmin of the error curve (``TsvdCurve.best_k``) is the best TSVD
    index that plays the role of the transition point in experiments.
    """
    b = np.asarray(b, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    n = svd.n
    kmax = n if kmax is None else int(kmax)
    if not 1 <= kmax <= n:
        raise ValidationError(f"kmax must lie in [1, {n}]", "invalid-truncation")
    xnorm = np.linalg.norm(x_true)
    if xnorm == 0:
        raise ValidationError("x_true is zero", "degenerate-truth")

    c = svd.U.T @ b
    w = c / svd.sigma
    # error_k^2 = ||V^T x_true - w_{1:k}||^2, evaluated directly for accuracy
    xt = svd.V.T @ x_true
    diff2 = (w - xt) ** 2
    tail2 = xt ** 2
    head = np.cumsum(diff2)
    rest = np.concatenate([np.cumsum(tail2[::-1])[::-1][1:], [0.0]])
    err = np.sqrt(head + rest)[:kmax] / xnorm

    b_perp = b - svd.U @ c
    res_tail = np.concatenate([np.cumsum((c ** 2)[::-1])[::-1][1:], [0.0]])
    res = np.sqrt(b_perp @ b_perp + res_tail)[:kmax]
    return TsvdCurve(k=np.arange(1, kmax + 1), rel_error=err, residual_norm=res)


def tikhonov_filters(sigma, lam):
    sigma = np.asarray(sigma, dtype=float)
    return sigma ** 2 / (sigma ** 2 + lam ** 2)


def tikhonov_solve(svd, b, lam):
    """Standard-form Tikhonov solution through its filtered SVD expansion."""
    if not lam > 0:
        raise ValidationError("lambda must be positive", "invalid-parameter")
    c = svd.U.T @ np.asarray(b, dtype=float)
    # f_i c_i / sigma_i written without the division by sigma_i
    return svd.V @ (svd.sigma * c / (svd.sigma ** 2 + lam ** 2))


def picard_data(svd, b):
    coeff = np.abs(svd.U.T @ np.asarray(b, dtype=float))
    return PicardData(sigma=svd.sigma.copy(), coeff=coeff, ratio=coeff / svd.sigma)


def _median3(x):
    padded = np.pad(x, 1, mode="edge")
    stacked = np.stack([padded[:-2], padded[1:-1], padded[2:]])
    return np.median(stacked, axis=0)


def transition_index(pic, eta, nu=NU_DEFAULT):
    """Detect k0, the last index whose Fourier coefficient stays above noise.

    ``k0`` is the largest k such that the 3-point median of ``|u_i^T b|``
    exceeds ``nu * eta`` for every i <= k, clamped to [1, n-1].
    """
    if not eta > 0:
        raise ValidationError("eta must be positive", "invalid-parameter")
    coeff = np.asarray(pic.coeff, dtype=float)
    n = coeff.shape[0]
    above = _median3(coeff) > nu * eta
    if not above[0]:
        return TransitionReport(k0=1, eta_estimate=float(eta), rule="noise-floor-everywhere")
    first_fail = np.flatnonzero(~above)
    k0 = n if first_fail.size == 0 else int(first_fail[0])
    return TransitionReport(k0=int(min(max(k0, 1), n - 1)), eta_estimate=float(eta),
                            rule="median3-threshold")
