"""
Dense-matrix primitives: moments, whitening and clean descending spectra.

Covariances use the 1/n convention throughout (not 1/(n-1)), matching the
population formulas the SIR and DEE estimators are built from.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateInputError, InputError, NotPSDError

__all__ = [
    "EigenSpectrum",
    "Whitened",
    "as_data_matrix",
    "as_response",
    "sample_covariance",
    "inverse_sqrt",
    "standardize",
    "symmetric_eigen",
]

SYMMETRY_TOL = 1e-10
CLAMP_TOL = 1e-12
SINGULAR_TOL = 1e-8


@dataclass(frozen=True)
class EigenSpectrum:
    """Descending, nonnegative eigenvalues with their sample context."""

    values: NDArray[np.float64]
    n: int | None = None

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=np.float64).ravel()
        if vals.size == 0:
            raise InputError("spectrum must contain at least one eigenvalue")
        if not np.all(np.isfinite(vals)):
            raise InputError("spectrum contains non-finite values")
        if np.any(vals < 0.0):
            raise InputError("spectrum must be nonnegative")
        if np.any(np.diff(vals) > 0.0):
            raise InputError("spectrum must be sorted in nonincreasing order")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def p(self) -> int:
        return int(self.values.size)

    @classmethod
    def from_unsorted(cls, values: ArrayLike, n: int | None = None) -> "EigenSpectrum":
        vals = np.clip(np.asarray(values, dtype=np.float64).ravel(), 0.0, None)
        return cls(np.sort(vals)[::-1], n)


@dataclass(frozen=True)
class Whitened:
    """Result of :func:`standardize`."""

    data: NDArray[np.float64]
    mean: NDArray[np.float64]
    inv_sqrt: NDArray[np.float64]
    regularized: bool = field(default=False)


def as_data_matrix(X: ArrayLike, *, min_rows: int = 2) -> NDArray[np.float64]:
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InputError("data matrix must be two-dimensional")
    if arr.shape[1] < 1:
        raise InputError("data matrix needs at least one column")
    if arr.shape[0] < min_rows:
        raise DegenerateInputError(f"need at least {min_rows} rows, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InputError("data matrix contains non-finite entries")
    return arr


def as_response(y: ArrayLike, n: int) -> NDArray[np.float64]:
    arr = np.asarray(y, dtype=np.float64).ravel()
    if arr.size != n:
        raise InputError(f"response has length {arr.size}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise InputError("response contains non-finite entries")
    return arr


def sample_covariance(X: ArrayLike) -> NDArray[np.float64]:
    """(1/n) * sum_i (x_i - xbar)(x_i - xbar)^T."""
    data = as_data_matrix(X)
    centered = data - data.mean(axis=0)
    cov = centered.T @ centered / data.shape[0]
    return 0.5 * (cov + cov.T)


def _check_symmetric(A: NDArray[np.float64]) -> None:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError("matrix must be square")
    if not np.all(np.isfinite(A)):
        raise InputError("matrix contains non-finite entries")
    scale = 1.0 + (float(np.max(np.abs(A))) if A.size else 0.0)
    if A.size and float(np.max(np.abs(A - A.T))) > SYMMETRY_TOL * scale:
        raise InputError("matrix is not symmetric")


def inverse_sqrt(cov: ArrayLike) -> tuple[NDArray[np.float64], bool]:
    """Symmetric inverse square root V D^{-1/2} V^T.

    If the smallest eigenvalue falls below ``1e-8 * trace/p`` the matrix is
    ridged once by that amount and the returned flag is ``True``.
    """
    S = np.asarray(cov, dtype=np.float64)
    _check_symmetric(S)
    p = S.shape[0]
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    eps = SINGULAR_TOL * float(np.trace(S)) / p
    regularized = bool(w[0] < eps)
    if regularized:
        if eps <= 0.0:
            raise DegenerateInputError("covariance matrix is identically zero")
        w = w + eps
    if np.any(w <= 0.0):
        raise NotPSDError("covariance matrix is not positive semi-definite")
    out = (V * w ** -0.5) @ V.T
    return 0.5 * (out + out.T), regularized


def standardize(X: ArrayLike, cov: ArrayLike | None = None) -> Whitened:
    """Center and whiten X: Z = (X - xbar) Sigma^{-1/2}."""
    data = as_data_matrix(X)
    mean = data.mean(axis=0)
    S = sample_covariance(data) if cov is None else np.asarray(cov, dtype=np.float64)
    inv, regularized = inverse_sqrt(S)
    return Whitened((data - mean) @ inv, mean, inv, regularized)


def symmetric_eigen(
    A: ArrayLike, n: int | None = None
) -> tuple[EigenSpectrum, NDArray[np.float64]]:
    """Eigendecomposition of a PSD matrix, eigenvalues sorted descending.

    Eigenvalues in ``[-1e-12 * scale, 0)`` are clamped to zero; anything more
    negative raises :class:`NotPSDError`. Eigenvector columns follow the
    eigenvalue order.
    """
    M = np.asarray(A, dtype=np.float64)
    _check_symmetric(M)
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    w, V = w[::-1], V[:, ::-1]
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if w.size and w[-1] < -CLAMP_TOL * scale:
        raise NotPSDError(f"matrix has eigenvalue {w[-1]:.3e} below the PSD tolerance")
    w = np.clip(w, 0.0, None)
    # eigh is ascending up to rounding; re-sort to guarantee exact monotonicity
    order = np.argsort(-w, kind="stable")
    return EigenSpectrum(w[order], n), np.ascontiguousarray(V[:, order])
