"""Test problems for discrete ill-posed least squares.

Three generators are provided:

* :func:`gen_synthetic` builds ``A = U [Sigma; 0] V^T`` from Haar-random
  orthogonal factors, a prescribed singular value decay and Fourier
  coefficients ``|u_j^T b_true| = sigma_j^(1+beta)``; its SVD is exact by
  construction and kept on the problem for oracle use.
* :func:`gen_shaw` and :func:`gen_deriv2` discretize two classical first
  kind integral equations with the midpoint rule.

:func:`add_noise` adds seeded Gaussian white noise at an exact relative
level.
"""

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import ValidationError
from .svdtools import SvdFactors


@dataclass(frozen=True)
class Geometric:
    """Severe decay ``sigma_j = rho^(-j)``."""

    rho: float

    def __post_init__(self):
        if not self.rho > 1:
            raise ValidationError(f"geometric decay needs rho > 1, got {self.rho}",
                                  "invalid-decay")

    def singular_values(self, n):
        j = np.arange(1, n + 1)
        return np.exp(-j * np.log(self.rho))

    def to_dict(self):
        return {"variant": "geometric", "rho": self.rho}


@dataclass(frozen=True)
class PowerLaw:
    """Moderate (alpha > 1) or mild (1/2 < alpha <= 1) decay ``zeta j^(-alpha)``."""

    zeta: float
    alpha: float

    def __post_init__(self):
        if not self.zeta > 0:
            raise ValidationError("power-law decay needs zeta > 0", "invalid-decay")
        if not self.alpha > 0.5:
            raise ValidationError(f"power-law decay needs alpha > 1/2, got {self.alpha}",
                                  "invalid-decay")

    @property
    def regime(self):
        return "moderate" if self.alpha > 1 else "mild"

    def singular_values(self, n):
        j = np.arange(1, n + 1, dtype=float)
        return self.zeta * j ** (-self.alpha)

    def to_dict(self):
        return {"variant": "power", "zeta": self.zeta, "alpha": self.alpha}


DecayModel = Union[Geometric, PowerLaw]


def decay_from_dict(d):
    if d["variant"] == "geometric":
        return Geometric(float(d["rho"]))
    if d["variant"] == "power":
        return PowerLaw(float(d["zeta"]), float(d["alpha"]))
    raise ValidationError(f"unknown decay variant {d['variant']!r}", "invalid-decay")


@dataclass(frozen=True)
class SyntheticSpec:
    m: int
    n: int
    decay: DecayModel
    beta: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValidationError("n must be at least 2", "invalid-dimension")
        if self.m < self.n:
            raise ValidationError("need m >= n", "invalid-dimension")
        if not self.beta > 0:
            raise ValidationError("Picard exponent beta must be positive", "invalid-parameter")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer", "invalid-parameter")

    def to_dict(self):
        return {"m": self.m, "n": self.n, "decay": self.decay.to_dict(),
                "beta": self.beta, "seed": self.seed}


@dataclass(frozen=True, eq=False)
class IllPosedProblem:
    """``A x_true = b_true`` plus generator metadata.

    ``svd`` holds the exact factors for synthetic problems and is ``None``
    for quadrature problems. ``decay`` is the singular value model the
    estimates should use (the generating one, or the textbook rate for
    shaw and deriv2).
    """

    A: np.ndarray
    b_true: np.ndarray
    x_true: np.ndarray
    kind: str
    meta: dict
    decay: Optional[DecayModel] = None
    svd: Optional[SvdFactors] = field(default=None, repr=False)

    @property
    def shape(self):
        return self.A.shape


@dataclass(frozen=True, eq=False)
class NoisyProblem:
    base: IllPosedProblem
    e: np.ndarray
    b: np.ndarray
    epsilon: float
    eta: float
    seed: int

    @property
    def A(self):
        return self.base.A

    @property
    def x_true(self):
        return self.base.x_true


def haar_orthonormal(rng, m, n):
    """m x n matrix with orthonormal columns, Haar distributed.

    QR of a standard Gaussian matrix with R's diagonal made positive, then
    each column's first nonzero entry made positive.
    """
    G = rng.standard_normal((m, n))
    Q, R = np.linalg.qr(G)
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    Q = Q * d
    first = np.argmax(Q != 0, axis=0)
    s = np.sign(Q[first, np.arange(n)])
    s[s == 0] = 1.0
    return Q * s


def gen_synthetic(spec):
    """Synthetic problem with exactly known SVD and Picard behaviour."""
    m, n = spec.m, spec.n
    sigma = spec.decay.singular_values(n)
    if not (np.all(sigma > 0) and np.all(np.diff(sigma) < 0)):
        raise ValidationError("decay model underflows or repeats at this n; reduce n",
                              "invalid-decay")
    rng = np.random.default_rng(spec.seed)
    U = haar_orthonormal(rng, m, n)
    V = haar_orthonormal(rng, n, n)
    A = (U * sigma) @ V.T
    x_true = V @ sigma ** spec.beta
    b_true = U @ sigma ** (1.0 + spec.beta)
    meta = {"kind": "synthetic", **spec.to_dict()}
    return IllPosedProblem(A=A, b_true=b_true, x_true=x_true, kind="synthetic",
                           meta=meta, decay=spec.decay,
                           svd=SvdFactors(sigma=sigma, U=U, V=V))


def gen_shaw(n):
    """Midpoint discretization of the shaw kernel on [-pi/2, pi/2]."""
    if n < 8 or n % 2:
        raise ValidationError("shaw needs an even n >= 8", "invalid-dimension")
    h = np.pi / n
    t = -np.pi / 2 + (np.arange(1, n + 1) - 0.5) * h
    cs, sn = np.cos(t), np.sin(t)
    u = np.pi * (sn[:, None] + sn[None, :])
    sinc2 = np.ones_like(u)
    nz = u != 0
    sinc2[nz] = (np.sin(u[nz]) / u[nz]) ** 2
    A = h * (cs[:, None] + cs[None, :]) ** 2 * sinc2
    x_true = 2.0 * np.exp(-6.0 * (t - 0.8) ** 2) + np.exp(-2.0 * (t + 0.5) ** 2)
    return IllPosedProblem(A=A, b_true=A @ x_true, x_true=x_true, kind="shaw",
                           meta={"kind": "shaw", "m": n, "n": n},
                           decay=Geometric(float(np.exp(2.0))))


def gen_deriv2(n):
    """Midpoint discretization of the Green's function of -u'' on [0, 1]."""
    if n < 8:
        raise ValidationError("deriv2 needs n >= 8", "invalid-dimension")
    h = 1.0 / n
    t = (np.arange(1, n + 1) - 0.5) * h
    s, tt = t[:, None], t[None, :]
    K = np.where(s < tt, s * (tt - 1.0), tt * (s - 1.0))
    A = h * K
    x_true = t.copy()
    return IllPosedProblem(A=A, b_true=A @ x_true, x_true=x_true, kind="deriv2",
                           meta={"kind": "deriv2", "m": n, "n": n},
                           decay=PowerLaw(1.0, 2.0))


def add_noise(problem, epsilon, seed):
    """Add Gaussian white noise rescaled to ``||e|| = epsilon ||b_true||``."""
    if not 0 < epsilon < 1:
        if epsilon >= 1:
            raise ValidationError("noise level must be below 1", "noise-dominates")
        raise ValidationError("noise level must be positive", "invalid-parameter")
    if not 0 <= seed < 2 ** 64:
        raise ValidationError("seed must be a 64-bit unsigned integer", "invalid-parameter")
    bnorm = np.linalg.norm(problem.b_true)
    if bnorm == 0:
        raise ValidationError("b_true is zero", "degenerate-rhs")
    m = problem.b_true.shape[0]
    g = np.random.default_rng(seed).standard_normal(m)
    e = g * (epsilon * bnorm / np.linalg.norm(g))
    return NoisyProblem(base=problem, e=e, b=problem.b_true + e, epsilon=float(epsilon),
                        eta=float(np.linalg.norm(e) / np.sqrt(m)), seed=int(seed))


def make_problem(kind, n, m=None, decay=None, beta=1.0, seed=0):
    """Dispatch on ``kind`` (synthetic | shaw | deriv2)."""
    if kind == "synthetic":
        if decay is None:
            raise ValidationError("synthetic problems need a decay model", "invalid-decay")
        return gen_synthetic(SyntheticSpec(m=n if m is None else m, n=n, decay=decay,
                                           beta=beta, seed=seed))
    if m is not None and m != n:
        raise ValidationError(f"{kind} problems are square", "invalid-dimension")
    if kind == "shaw":
        return gen_shaw(n)
    if kind == "deriv2":
        return gen_deriv2(n)
    raise ValidationError(f"unknown problem kind {kind!r}", "invalid-kind")
