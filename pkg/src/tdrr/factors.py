"""Factor-number estimation from the spectrum of Y Y^T / (n p)."""

from __future__ import annotations

from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .criteria import DimensionEstimate, select
from .errors import InputError
from .spectra import EigenSpectrum

__all__ = ["as_panel", "factor_spectrum", "estimate_num_factors"]


def as_panel(Y: ArrayLike) -> NDArray[np.float64]:
    """Validate a p x n panel (rows are series, columns are observations)."""
    arr = np.asarray(Y, dtype=np.float64)
    if arr.ndim != 2:
        raise InputError("panel must be a two-dimensional p x n array")
    p, n = arr.shape
    if p < 3 or n < 3:
        raise InputError(f"panel needs p >= 3 and n >= 3, got p={p}, n={n}")
    if not np.all(np.isfinite(arr)):
        raise InputError("panel contains non-finite entries")
    return arr


def factor_spectrum(Y: ArrayLike, *, demean: bool = False, dual: bool | None = None) -> EigenSpectrum:
    """Descending eigenvalues of Y Y^T / (n p), padded with zeros to length p.

    When p > n (or ``dual=True``) the n x n matrix Y^T Y / (n p) is
    decomposed instead; its nonzero eigenvalues are the same.
    """
    panel = as_panel(Y)
    if demean:
        panel = panel - panel.mean(axis=1, keepdims=True)
    p, n = panel.shape
    use_dual = p > n if dual is None else dual
    gram = panel.T @ panel if use_dual else panel @ panel.T
    gram = 0.5 * (gram + gram.T) / (n * p)
    w = np.linalg.eigvalsh(gram)
    w = np.clip(w, 0.0, None)
    vals = np.zeros(p)
    k = min(p, w.size)
    vals[:k] = np.sort(w)[::-1][:k]
    return EigenSpectrum(vals, n)


def estimate_num_factors(
    Y: ArrayLike,
    method: str = "TDRR",
    *,
    demean: bool = False,
    overrides: dict[str, Any] | None = None,
) -> DimensionEstimate:
    panel = as_panel(Y)
    spec = factor_spectrum(panel, demean=demean)
    p, n = panel.shape
    return select(spec, method, setting="factor", n=n, p=p, overrides=overrides)
