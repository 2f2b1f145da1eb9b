"""Entropy, mutual information and conditional mutual information estimators.

All results are in nats. Nearest-neighbor estimators work under the max
norm, which makes the log unit-ball volume of Kozachenko-Leonenko vanish and
keeps KSG marginal counts geometrically consistent with joint radii.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np
import scipy.special

from .errors import (
    DegenerateGeometry,
    DomainError,
    EmptyNeighborhood,
    InvalidRequest,
    SingularCovariance,
)
from .neighbors import NeighborIndex

LOG_2PIE = np.log(2 * np.pi * np.e)

DEFAULT_KNN = 4
DEFAULT_KERNEL_WIDTH = 0.5
DEFAULT_NOISE_AMPLITUDE = 1e-8
DEFAULT_NOISE_SEED = 0

# det of the sample correlation matrix at or below this is treated as singular
SINGULAR_CORR_DET = 1e-13

TAGS = ("gaussian", "kernel", "kozachenko", "ksg")


@dataclass(frozen=True)
class EstimatorKind:
    """Estimator choice and its parameters.

    ``kernel_width`` is only read by ``kernel`` (in units of standard
    deviations); ``k_nn`` only by ``kozachenko`` and ``ksg``.
    """

    tag: str = "gaussian"
    kernel_width: float = DEFAULT_KERNEL_WIDTH
    k_nn: int = DEFAULT_KNN

    def __post_init__(self):
        if self.tag not in TAGS:
            raise InvalidRequest(f"unknown estimator {self.tag!r}; choose from {TAGS}")
        if not self.kernel_width > 0:
            raise InvalidRequest(f"kernel width must be > 0, got {self.kernel_width}")
        if int(self.k_nn) != self.k_nn or self.k_nn < 1:
            raise InvalidRequest(f"k_nn must be a positive integer, got {self.k_nn}")

    @classmethod
    def gaussian(cls):
        return cls("gaussian")

    @classmethod
    def kernel(cls, width=DEFAULT_KERNEL_WIDTH):
        return cls("kernel", kernel_width=width)

    @classmethod
    def kozachenko(cls, k_nn=DEFAULT_KNN):
        return cls("kozachenko", k_nn=k_nn)

    @classmethod
    def ksg(cls, k_nn=DEFAULT_KNN):
        return cls("ksg", k_nn=k_nn)

    @property
    def uses_neighbors(self) -> bool:
        return self.tag in ("kozachenko", "ksg")

    def params(self) -> dict:
        if self.tag == "kernel":
            return {"kernel_width": self.kernel_width}
        if self.uses_neighbors:
            return {"knn": self.k_nn}
        return {}


def digamma(x):
    """psi(x) for x > 0; scalar in, float out, arrays elementwise."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"digamma is only defined here for x > 0, got {x!r}")
    out = scipy.special.digamma(arr)
    return float(out) if out.ndim == 0 else out


def _as_matrix(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InvalidRequest("samples must be an N x d matrix")
    return arr


def _check_knn(n, k_nn):
    if not 1 <= k_nn < n:
        raise InvalidRequest(f"k_nn={k_nn} needs 1 <= k_nn < N={n}")


def add_tie_noise(samples, amplitude=DEFAULT_NOISE_AMPLITUDE, seed=DEFAULT_NOISE_SEED):
    """Add seeded uniform jitter in ``[-amplitude*sd, amplitude*sd]`` per column.

    The noise stream of a column is seeded from ``seed`` and a digest of the
    column's sorted values, and is handed out by the rank of each value. A
    row permutation of the input therefore permutes the noise with it, and the
    same column receives the same jitter no matter which block it sits in.
    """
    arr = np.array(samples, dtype=float, copy=True)
    if amplitude < 0:
        raise InvalidRequest("noise amplitude must be >= 0")
    if amplitude == 0:
        return arr
    mat = arr[:, None] if arr.ndim == 1 else arr
    n = mat.shape[0]
    for j in range(mat.shape[1]):
        col = mat[:, j]
        sd = col.std(ddof=1) if n > 1 else 0.0
        if sd == 0:
            continue
        order = np.argsort(col, kind="stable")
        digest = zlib.crc32(np.ascontiguousarray(col[order]).tobytes())
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), digest]))
        noise = np.empty(n)
        noise[order] = rng.uniform(-1.0, 1.0, n)
        mat[:, j] = col + amplitude * sd * noise
    return arr


def entropy_gaussian(samples) -> float:
    """Closed-form entropy of a Gaussian fitted with the ML (divide-by-N) covariance."""
    x = _as_matrix(samples)
    n, d = x.shape
    if d == 0:
        return 0.0
    if n <= d:
        raise InvalidRequest(f"Gaussian entropy needs N > d, got N={n}, d={d}")
    xc = x - x.mean(axis=0)
    cov = xc.T @ xc / n
    var = np.diag(cov)
    if np.any(var <= 0):
        raise SingularCovariance("a coordinate has zero variance")
    scale = np.sqrt(var)
    corr = cov / np.outer(scale, scale)
    sign, logdet_corr = np.linalg.slogdet(corr)
    if sign <= 0 or logdet_corr <= np.log(SINGULAR_CORR_DET):
        raise SingularCovariance(f"sample covariance of dimension {d} is singular")
    logdet = logdet_corr + 2.0 * np.log(scale).sum()
    return 0.5 * (d * LOG_2PIE + logdet)


def entropy_knn(samples, k_nn: int = DEFAULT_KNN) -> float:
    """Kozachenko-Leonenko entropy under the max norm.

    ``psi(N) - psi(k) + d * mean(log eps_i)`` with ``eps_i`` twice the distance
    to the k-th neighbor. Inputs are expected to be free of exact ties.
    """
    x = _as_matrix(samples)
    n, d = x.shape
    if d == 0:
        return 0.0
    _check_knn(n, k_nn)
    eps = 2.0 * NeighborIndex(x).kth_distance(k_nn)
    if np.any(eps <= 0):
        i = int(np.flatnonzero(eps <= 0)[0])
        raise DegenerateGeometry(f"sample {i} has {k_nn} coincident neighbors (zero radius)")
    return digamma(n) - digamma(k_nn) + d * float(np.mean(np.log(eps)))


def entropy_kernel(samples, width: float = DEFAULT_KERNEL_WIDTH) -> float:
    """Leave-one-out box-kernel plug-in entropy.

    Density at each sample is the fraction of the other N-1 samples inside the
    closed max-norm box of half-width ``width``, divided by the box volume.
    """
    x = _as_matrix(samples)
    n, d = x.shape
    if d == 0:
        return 0.0
    if not width > 0:
        raise InvalidRequest(f"kernel width must be > 0, got {width}")
    if n < 2:
        raise InvalidRequest("kernel entropy needs at least 2 samples")
    counts = NeighborIndex(x).count_within(width, strict=False)
    if np.any(counts == 0):
        i = int(np.flatnonzero(counts == 0)[0])
        raise EmptyNeighborhood(f"sample {i} has no neighbor within width {width}", index=i)
    log_p = np.log(counts) - np.log(n - 1) - d * np.log(2.0 * width)
    return -float(np.mean(log_p))


def mi_ksg(block_x, block_y, k_nn: int = DEFAULT_KNN) -> float:
    """Kraskov-Stoegbauer-Grassberger mutual information (algorithm 1)."""
    x = _as_matrix(block_x)
    y = _as_matrix(block_y)
    n = x.shape[0]
    if y.shape[0] != n:
        raise InvalidRequest("paired blocks must have the same number of rows")
    _check_knn(n, k_nn)
    eps = NeighborIndex(np.hstack([x, y])).kth_distance(k_nn)
    if np.any(eps <= 0):
        raise DegenerateGeometry("zero joint-space radius; add tie noise")
    nx = NeighborIndex(x).count_within(eps)
    ny = NeighborIndex(y).count_within(eps)
    return digamma(k_nn) + digamma(n) - float(np.mean(digamma(nx + 1) + digamma(ny + 1)))


def cmi_ksg(block_x, block_y, block_z, k_nn: int = DEFAULT_KNN) -> float:
    """Conditional MI I(X;Y|Z) with the Frenzel-Pompe extension of KSG."""
    z = _as_matrix(block_z)
    if z.shape[1] == 0:
        return mi_ksg(block_x, block_y, k_nn)
    x = _as_matrix(block_x)
    y = _as_matrix(block_y)
    n = x.shape[0]
    if y.shape[0] != n or z.shape[0] != n:
        raise InvalidRequest("paired blocks must have the same number of rows")
    _check_knn(n, k_nn)
    eps = NeighborIndex(np.hstack([x, y, z])).kth_distance(k_nn)
    if np.any(eps <= 0):
        raise DegenerateGeometry("zero joint-space radius; add tie noise")
    nxz = NeighborIndex(np.hstack([x, z])).count_within(eps)
    nyz = NeighborIndex(np.hstack([y, z])).count_within(eps)
    nz = NeighborIndex(z).count_within(eps)
    terms = digamma(nxz + 1) + digamma(nyz + 1) - digamma(nz + 1)
    return digamma(k_nn) - float(np.mean(terms))
