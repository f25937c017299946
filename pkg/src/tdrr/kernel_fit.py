"""
Nadaraya-Watson fit on projected covariates and its residual sum of squares.

Used after dimension selection: project X onto the leading q directions,
smooth y with a product quartic kernel and compare RSS across q.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InputError
from .sdr import SdrTarget
from .spectra import as_data_matrix, as_response

__all__ = [
    "ProjectedDesign",
    "NWFit",
    "project",
    "quartic_kernel",
    "nw_fit",
    "rss",
    "bandwidth_rule",
    "bandwidth_grid",
    "cv_bandwidth",
    "grid_search",
]


@dataclass(frozen=True)
class ProjectedDesign:
    directions: NDArray[np.float64]
    data: NDArray[np.float64]

    @property
    def q(self) -> int:
        return int(self.data.shape[1])


@dataclass(frozen=True)
class NWFit:
    fitted: NDArray[np.float64]
    fallback: NDArray[np.bool_]
    bandwidth: float


def project(target: SdrTarget, X: ArrayLike, q: int) -> ProjectedDesign:
    data = as_data_matrix(X)
    B = target.directions(q)
    return ProjectedDesign(B, data @ B)


def quartic_kernel(u: ArrayLike) -> NDArray[np.float64]:
    """K(u) = 15/16 (1 - u^2)^2 on |u| <= 1, zero elsewhere."""
    u = np.asarray(u, dtype=np.float64)
    return np.where(np.abs(u) <= 1.0, 15.0 / 16.0 * (1.0 - u * u) ** 2, 0.0)


def _weights(Z: NDArray[np.float64], h: float) -> NDArray[np.float64]:
    W = np.ones((Z.shape[0], Z.shape[0]))
    for col in Z.T:
        W *= quartic_kernel((col[:, None] - col[None, :]) / h)
    return W


def nw_fit(proj: ProjectedDesign | ArrayLike, y: ArrayLike, h: float, *, loo: bool = False) -> NWFit:
    """Kernel-weighted mean at every sample point.

    Points whose neighbourhood is empty (all weights zero, possible for a
    small h or with ``loo=True``) get the global mean of y and are flagged.
    The h^q normalisation cancels between numerator and denominator.
    """
    if not h > 0.0:
        raise InputError(f"bandwidth must be positive, got {h}")
    Z = proj.data if isinstance(proj, ProjectedDesign) else as_data_matrix(proj, min_rows=1)
    resp = as_response(y, Z.shape[0])
    W = _weights(Z, h)
    if loo:
        np.fill_diagonal(W, 0.0)
    denom = W.sum(axis=1)
    empty = denom <= 0.0
    fitted = np.full(resp.size, resp.mean())
    fitted[~empty] = (W[~empty] @ resp) / denom[~empty]
    return NWFit(fitted, empty, float(h))


def rss(fit: NWFit | ArrayLike, y: ArrayLike) -> float:
    """Mean squared residual sum_i (y_i - fit_i)^2 / n."""
    values = fit.fitted if isinstance(fit, NWFit) else np.asarray(fit, dtype=np.float64).ravel()
    resp = np.asarray(y, dtype=np.float64).ravel()
    if values.size != resp.size:
        raise InputError(f"fit has length {values.size}, response has {resp.size}")
    return float(np.mean((resp - values) ** 2))


def bandwidth_rule(n: int, q_hat: int) -> float:
    """h = n^{-1/(4+q)} / 4."""
    if n < 1 or q_hat < 1:
        raise InputError("bandwidth rule needs n >= 1 and q >= 1")
    return n ** (-1.0 / (4.0 + q_hat)) / 4.0


def bandwidth_grid(full: bool = False) -> NDArray[np.float64]:
    """Grid l/20: l = 2..20 by default (drops 0.05), l = 1..20 with ``full``."""
    start = 1 if full else 2
    return np.arange(start, 21) / 20.0


def grid_search(
    proj: ProjectedDesign | ArrayLike, y: ArrayLike, grid: ArrayLike | None = None, *, loo: bool = False
) -> tuple[float, float, NDArray[np.float64]]:
    """(best h, best RSS, RSS per grid point); ties go to the smaller h."""
    hs = bandwidth_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    values = np.array([rss(nw_fit(proj, y, h, loo=loo), y) for h in hs])
    k = int(np.argmin(values))
    return float(hs[k]), float(values[k]), values


def cv_bandwidth(proj: ProjectedDesign | ArrayLike, y: ArrayLike, grid: ArrayLike | None = None) -> float:
    """Leave-one-out cross-validated bandwidth over ``grid``."""
    return grid_search(proj, y, grid, loo=True)[0]
