"""
Dimension-selection criteria on an eigenvalue spectrum.

TDRR (thresholding double ridge ratio) maps eigenvalues to s_j = l_j/(1+l_j),
forms a first round of ridge ratios of s_j^2 (s_j for factor models), a
second round of ridge ratios of those, and returns the largest index whose
second-round ratio is at most tau. RRE, RE, BIC and the sequential
chi-squared test are provided as competitors.

All logarithms are natural logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.stats import chi2

from .errors import DimensionTooSmallError, InputError, InvariantError
from .spectra import EigenSpectrum

__all__ = [
    "METHODS",
    "RidgeSchedule",
    "RatioTrace",
    "DimensionEstimate",
    "default_ridges_sdr",
    "default_ridges_factor",
    "standardized_eigenvalues",
    "tdrr_sdr",
    "tdrr_factor",
    "rre",
    "re",
    "bic",
    "sequential_test",
    "select",
    "make_spectrum",
    "OVERRIDE_TYPES",
]

METHODS = ("TDRR", "RRE", "RE", "BIC", "ST")
DEFAULT_TAU = 0.5
DEFAULT_SDR_DMAX = 10
DEFAULT_BIC_GAIN = "minus"


def _parse_bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes"):
        return True
    if low in ("0", "false", "no"):
        return False
    raise ValueError(text)


# tuning keys accepted by select() and their parsers for text input
OVERRIDE_TYPES: dict[str, Any] = {
    "c1": float,
    "c2": float,
    "tau": float,
    "c": float,
    "alpha_n": float,
    "d_max": int,
    "level": float,
    "maximize": _parse_bool,
    "bic_gain": str,
}


@dataclass(frozen=True)
class RidgeSchedule:
    c1: float
    c2: float
    tau: float = DEFAULT_TAU

    def __post_init__(self) -> None:
        if not (self.c1 > 0.0 and math.isfinite(self.c1)):
            raise InputError(f"c1 must be positive, got {self.c1}")
        if not (self.c2 > 0.0 and math.isfinite(self.c2)):
            raise InputError(f"c2 must be positive, got {self.c2}")
        if not 0.0 < self.tau < 1.0:
            raise InputError(f"tau must lie in (0, 1), got {self.tau}")


@dataclass(frozen=True)
class RatioTrace:
    """Both TDRR ratio rounds; index j (1-based) sits at position j-1."""

    s: NDArray[np.float64]
    first_round: NDArray[np.float64]
    second_round: NDArray[np.float64]
    qualifying: tuple[int, ...]


@dataclass(frozen=True)
class DimensionEstimate:
    """Selected dimension plus whatever the criterion evaluated to get there.

    ``criterion[k]`` is the criterion value at index k+1 for RRE, RE, BIC and
    the sequential test; TDRR stores its two rounds in ``trace`` instead.
    """

    q_hat: int
    method: str
    trace: RatioTrace | None = None
    criterion: NDArray[np.float64] | None = None
    flags: tuple[str, ...] = field(default=())


def default_ridges_sdr(n: int) -> RidgeSchedule:
    if n < 2:
        raise InputError(f"sample size must be at least 2, got {n}")
    base = math.log(n) / math.sqrt(n)
    return RidgeSchedule(base / 10.0, base / 5.0, DEFAULT_TAU)


def default_ridges_factor(n: int, p: int) -> RidgeSchedule:
    m = min(n, p)
    if m < 2:
        raise InputError(f"min(n, p) must be at least 2, got {m}")
    base = math.log(m) / math.sqrt(m)
    return RidgeSchedule(base / 10.0, base / 5.0, DEFAULT_TAU)


def standardized_eigenvalues(spec: EigenSpectrum) -> NDArray[np.float64]:
    lam = spec.values
    return lam / (lam + 1.0)


def _tdrr(spec: EigenSpectrum, sched: RidgeSchedule, power: int, tag: str) -> DimensionEstimate:
    if spec.p < 3:
        raise DimensionTooSmallError(f"TDRR needs at least 3 eigenvalues (p >= 3), got p={spec.p}")
    s = standardized_eigenvalues(spec)
    u = s**power
    first = (u[:-1] + sched.c1) / (u[1:] + sched.c1) - 1.0
    denom = first + sched.c2
    if np.any(denom[:-1] <= 0.0):
        raise InvariantError("first-round ratio fell below -c2; spectrum is not descending")
    second = (first[1:] + sched.c2) / denom[:-1]
    qualifying = tuple(int(j) + 1 for j in np.flatnonzero(second <= sched.tau))
    q_hat = max(qualifying) if qualifying else 0
    flags = () if qualifying else ("empty-qualifying-set",)
    return DimensionEstimate(q_hat, tag, RatioTrace(s, first, second, qualifying), None, flags)


def tdrr_sdr(spec: EigenSpectrum, sched: RidgeSchedule) -> DimensionEstimate:
    """TDRR with squared standardized eigenvalues in the first round."""
    return _tdrr(spec, sched, 2, "TDRR")


def tdrr_factor(spec: EigenSpectrum, sched: RidgeSchedule) -> DimensionEstimate:
    """Factor-model TDRR: first round uses s_j rather than s_j^2."""
    return _tdrr(spec, sched, 1, "TDRR")


def _first_argmin(values: NDArray[np.float64]) -> int:
    # np.argmin returns the first occurrence, i.e. the smallest index on ties
    return int(np.argmin(values)) + 1


def rre(spec: EigenSpectrum, c: float) -> DimensionEstimate:
    """Ridge-type ratio: argmin_j (l_{j+1} + c) / (l_j + c), 1 <= j <= p-1."""
    if spec.p < 2:
        raise DimensionTooSmallError("RRE needs at least 2 eigenvalues")
    if not c > 0.0:
        raise InputError(f"RRE ridge must be positive, got {c}")
    lam = spec.values
    ratios = (lam[1:] + c) / (lam[:-1] + c)
    return DimensionEstimate(_first_argmin(ratios), "RRE", criterion=ratios)


def _eigen_ratios(lam: NDArray[np.float64]) -> NDArray[np.float64]:
    num, den = lam[1:], lam[:-1]
    out = np.empty_like(num)
    zero = den == 0.0
    out[~zero] = num[~zero] / den[~zero]
    out[zero] = np.where(num[zero] == 0.0, 1.0, np.inf)
    return out


def re(spec: EigenSpectrum, d_max: int) -> DimensionEstimate:
    """Ratio estimator: argmin_j l_{j+1}/l_j over 1 <= j <= d_max, with 0/0 := 1.

    ``d_max`` above p-1 is truncated to p-1.
    """
    if d_max < 1:
        raise InputError(f"d_max must be at least 1, got {d_max}")
    if spec.p < 2:
        raise DimensionTooSmallError("RE needs at least 2 eigenvalues")
    d = min(int(d_max), spec.p - 1)
    ratios = _eigen_ratios(spec.values)[:d]
    flags = ("d_max-truncated",) if d < d_max else ()
    return DimensionEstimate(_first_argmin(ratios), "RE", criterion=ratios, flags=flags)


def bic_values(
    spec: EigenSpectrum, alpha_n: float, n: int, gain: str = DEFAULT_BIC_GAIN
) -> NDArray[np.float64]:
    lam = spec.values
    if gain == "plus":
        gains = np.log1p(lam) + lam
    elif gain == "minus":
        gains = np.log1p(lam) - lam
    else:
        raise InputError(f"BIC gain must be 'plus' or 'minus', got {gain!r}")
    total = float(gains.sum())
    j = np.arange(1, spec.p + 1, dtype=np.float64)
    reward = n * np.cumsum(gains) / (2.0 * total) if total != 0.0 else np.zeros(spec.p)
    return reward - alpha_n * j * (j + 1.0) / spec.p


def bic(
    spec: EigenSpectrum,
    alpha_n: float,
    n: int | None = None,
    *,
    maximize: bool = True,
    gain: str = DEFAULT_BIC_GAIN,
) -> DimensionEstimate:
    """BIC-type criterion G(j) = n*sum_{l<=j} g_l / (2*sum_l g_l) - alpha_n*j(j+1)/p.

    ``gain="plus"`` uses g_l = log(1 + l_l) + l_l, ``gain="minus"`` uses
    g_l = log(1 + l_l) - l_l. The selected j maximizes G; ``maximize=False``
    takes the argmin instead. Ties resolve to the smallest index.
    """
    if not alpha_n > 0.0:
        raise InputError(f"BIC penalty must be positive, got {alpha_n}")
    size = spec.n if n is None else n
    if size is None:
        raise InputError("BIC needs the sample size n")
    values = bic_values(spec, alpha_n, size, gain)
    q = int(np.argmax(values)) + 1 if maximize else _first_argmin(values)
    return DimensionEstimate(q, "BIC", criterion=values)


def sequential_test(
    spec: EigenSpectrum, n: int | None = None, H: int = 10, level: float = 0.05
) -> DimensionEstimate:
    """Li's sequential chi-squared test for SIR.

    T_k = n * sum_{j>k} l_j is referred to chi^2 with (p-k)(H-k-1) degrees of
    freedom; the first k whose statistic falls below the upper ``level``
    quantile is returned. ``criterion`` holds the statistics that were computed.
    """
    if not 0.0 < level < 1.0:
        raise InputError(f"level must lie in (0, 1), got {level}")
    size = spec.n if n is None else n
    if size is None:
        raise InputError("the sequential test needs the sample size n")
    lam = spec.values
    p = spec.p
    tails = np.concatenate((np.cumsum(lam[::-1])[::-1], [0.0]))
    stats: list[float] = []
    k = 0
    flags: tuple[str, ...] = ()
    while k < p - 1:
        dof = (p - k) * (H - k - 1)
        if H - k - 1 <= 0:
            flags = ("slices-exhausted",)
            break
        stat = size * float(tails[k])
        stats.append(stat)
        if stat < chi2.ppf(1.0 - level, dof):
            break
        k += 1
    return DimensionEstimate(k, "ST", criterion=np.asarray(stats), flags=flags)


def select(
    spec: EigenSpectrum,
    method: str,
    *,
    setting: str = "sdr",
    n: int | None = None,
    p: int | None = None,
    H: int = 10,
    overrides: dict[str, Any] | None = None,
) -> DimensionEstimate:
    """Apply one criterion with the recommended defaults for ``setting``.

    ``setting`` is ``"sdr"`` or ``"factor"``. For factor models ``n`` is the
    number of observations and ``p`` the number of series (defaults to the
    spectrum length). Recognised overrides: c1, c2, tau, c (RRE ridge),
    alpha_n, d_max, level, maximize, bic_gain.
    """
    opts = dict(overrides or {})
    method = method.upper()
    size = spec.n if n is None else n
    if size is None:
        raise InputError("sample size n is required to form default tuning constants")
    if setting == "sdr":
        sched = default_ridges_sdr(size)
        rre_c = sched.c1
        d_max = DEFAULT_SDR_DMAX
        alpha = math.sqrt(size)
        tdrr_fn = tdrr_sdr
    elif setting == "factor":
        dim = spec.p if p is None else p
        sched = default_ridges_factor(size, dim)
        rre_c = math.log(size) / (10.0 * size)
        d_max = max(1, min(dim, size) // 2)
        alpha = math.log(size)
        tdrr_fn = tdrr_factor
    else:
        raise InputError(f"unknown setting {setting!r}")

    if method == "TDRR":
        sched = RidgeSchedule(
            float(opts.get("c1", sched.c1)),
            float(opts.get("c2", sched.c2)),
            float(opts.get("tau", sched.tau)),
        )
        return tdrr_fn(spec, sched)
    if method == "RRE":
        return rre(spec, float(opts.get("c", rre_c)))
    if method == "RE":
        return re(spec, int(opts.get("d_max", d_max)))
    if method == "BIC":
        return bic(
            spec,
            float(opts.get("alpha_n", alpha)),
            size,
            maximize=bool(opts.get("maximize", True)),
            gain=str(opts.get("bic_gain", DEFAULT_BIC_GAIN)),
        )
    if method == "ST":
        return sequential_test(spec, size, H, float(opts.get("level", 0.05)))
    raise InputError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


def make_spectrum(values: ArrayLike, n: int | None = None) -> EigenSpectrum:
    """Convenience constructor accepting unsorted or slightly negative input."""
    return EigenSpectrum.from_unsorted(values, n)
