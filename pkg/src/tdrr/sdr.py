"""
SIR and DEE-SIR target matrices.

Both estimators work on whitened covariates Z = (X - xbar) Sigma^{-1/2}, so
the returned matrix is symmetric and shares its eigenvalues with the
Sigma^{-1}-premultiplied form used in the literature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InputError, TooManySlicesError
from .spectra import (
    EigenSpectrum,
    as_data_matrix,
    as_response,
    inverse_sqrt,
    sample_covariance,
    standardize,
    symmetric_eigen,
)

__all__ = [
    "DEFAULT_SLICES",
    "SdrTarget",
    "SlicePlan",
    "make_slices",
    "slice_mean_matrix",
    "sir_matrix",
    "dee_sir_matrix",
    "dee_kernel_raw",
    "dee_sir_matrix_unwhitened",
    "DEE_WEIGHTINGS",
]

DEFAULT_SLICES = 10
DEE_WEIGHTINGS = ("none", "binary-sir", "mean-difference")


@dataclass(frozen=True)
class SlicePlan:
    """Equal-count partition of the sorted responses.

    ``order`` sorts the sample by (y, original index); slice k holds
    ``order[starts[k]:starts[k] + counts[k]]``.
    """

    H: int
    order: NDArray[np.intp]
    counts: NDArray[np.intp]
    boundaries: NDArray[np.float64]

    @property
    def starts(self) -> NDArray[np.intp]:
        return np.concatenate(([0], np.cumsum(self.counts)[:-1]))

    def members(self, k: int) -> NDArray[np.intp]:
        start = int(self.starts[k])
        return self.order[start : start + int(self.counts[k])]


@dataclass(frozen=True)
class SdrTarget:
    """Estimated p x p target matrix together with its eigen-structure.

    ``vectors`` are eigenvectors of ``matrix`` (whitened scale); map them to
    the original covariate scale with ``inv_sqrt @ vectors``.
    """

    matrix: NDArray[np.float64]
    spectrum: EigenSpectrum
    vectors: NDArray[np.float64]
    inv_sqrt: NDArray[np.float64]
    method: str
    n: int
    regularized: bool = False

    def directions(self, q: int) -> NDArray[np.float64]:
        """Leading q directions on the covariate scale, unit-norm columns."""
        if not 1 <= q <= self.matrix.shape[0]:
            raise InputError(f"q must lie in [1, {self.matrix.shape[0]}], got {q}")
        B = self.inv_sqrt @ self.vectors[:, :q]
        return B / np.linalg.norm(B, axis=0)


def make_slices(y: ArrayLike, H: int) -> SlicePlan:
    resp = np.asarray(y, dtype=np.float64).ravel()
    n = resp.size
    if H < 2:
        raise InputError(f"need at least 2 slices, got H={H}")
    if 2 * H > n:
        raise TooManySlicesError(f"H={H} slices need at least {2 * H} observations, got n={n}")
    # stable sort: ties keep original index order
    order = np.argsort(resp, kind="stable")
    base, extra = divmod(n, H)
    counts = np.full(H, base, dtype=np.intp)
    counts[:extra] += 1
    ends = np.cumsum(counts)[:-1]
    boundaries = resp[order[ends - 1]]
    return SlicePlan(H, order, counts, boundaries)


def slice_mean_matrix(Z: ArrayLike, plan: SlicePlan) -> NDArray[np.float64]:
    """sum_k (n_k/n) zbar_k zbar_k^T for already standardized Z."""
    data = np.asarray(Z, dtype=np.float64)
    if data.ndim == 1:
        data = data[:, None]
    n = data.shape[0]
    means = np.stack([data[plan.members(k)].mean(axis=0) for k in range(plan.H)])
    weights = plan.counts / n
    M = (means.T * weights) @ means
    return 0.5 * (M + M.T)


def sir_matrix(X: ArrayLike, y: ArrayLike, H: int = DEFAULT_SLICES) -> SdrTarget:
    data = as_data_matrix(X)
    resp = as_response(y, data.shape[0])
    plan = make_slices(resp, H)
    white = standardize(data)
    M = slice_mean_matrix(white.data, plan)
    spectrum, vectors = symmetric_eigen(M, n=data.shape[0])
    return SdrTarget(M, spectrum, vectors, white.inv_sqrt, f"SIR({H})", data.shape[0], white.regularized)


def _cumulative_means(
    Z: NDArray[np.float64], y: NDArray[np.float64], weighting: str = "none"
) -> NDArray[np.float64]:
    """Rows m_n(y_j) = n^{-1} sum_i z_i 1{y_i <= y_j}, one per observation j.

    ``weighting`` rescales each row by w_j^{1/2} so that m^T m / n is the
    weighted average of the per-cut kernels.
    """
    if weighting not in DEE_WEIGHTINGS:
        raise InputError(f"weighting must be one of {DEE_WEIGHTINGS}, got {weighting!r}")
    n = Z.shape[0]
    order = np.argsort(y, kind="stable")
    partial = np.cumsum(Z[order], axis=0)
    last = np.searchsorted(y[order], y, side="right") - 1
    m = partial[last] / n
    # at t >= max(y) every indicator is one and the centered sum is exactly zero
    top = last == n - 1
    m[top] = 0.0
    if weighting != "none":
        frac = (last + 1) / n
        var = np.where(top, 1.0, frac * (1.0 - frac))
        power = 0.5 if weighting == "binary-sir" else 1.0
        m = m / var[:, None] ** power
    return m


def dee_kernel_raw(X: ArrayLike, y: ArrayLike, weighting: str = "none") -> NDArray[np.float64]:
    """Lbar = n^{-1} sum_j m_n(y_j) m_n(y_j)^T on the centered, unwhitened covariates."""
    data = as_data_matrix(X)
    resp = as_response(y, data.shape[0])
    m = _cumulative_means(data - data.mean(axis=0), resp, weighting)
    L = m.T @ m / data.shape[0]
    return 0.5 * (L + L.T)


def dee_sir_matrix(X: ArrayLike, y: ArrayLike, weighting: str = "none") -> SdrTarget:
    """SIR-based DEE target, averaged over every observed cut point y_j.

    The per-cut kernel is m_n(t) m_n(t)^T (``weighting="none"``). With
    p_t = P_n(Y <= t), ``"binary-sir"`` divides it by p_t(1 - p_t), giving the
    two-slice SIR matrix of 1{Y <= t}; ``"mean-difference"`` divides by
    {p_t(1 - p_t)}^2, giving the outer product of the difference between
    the two slice means.

    Cumulative sums make this O(n log n + n p^2) instead of the O(n^2 p)
    double loop over (i, j).
    """
    data = as_data_matrix(X)
    n = data.shape[0]
    resp = as_response(y, n)
    white = standardize(data)
    m = _cumulative_means(white.data, resp, weighting)
    M = m.T @ m / n
    M = 0.5 * (M + M.T)
    spectrum, vectors = symmetric_eigen(M, n=n)
    tag = "DEE-SIR" if weighting == "none" else f"DEE-SIR[{weighting}]"
    return SdrTarget(M, spectrum, vectors, white.inv_sqrt, tag, n, white.regularized)


def dee_sir_matrix_unwhitened(X: ArrayLike, y: ArrayLike, weighting: str = "none") -> NDArray[np.float64]:
    """Second route: Sigma^{-1/2} Lbar Sigma^{-1/2} from the raw-scale kernel."""
    inv, _ = inverse_sqrt(sample_covariance(X))
    M = inv @ dee_kernel_raw(X, y, weighting) @ inv
    return 0.5 * (M + M.T)
