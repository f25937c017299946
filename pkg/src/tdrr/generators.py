"""
Seeded generators for the simulation designs.

Random streams: every draw comes from ``numpy.random.PCG64`` seeded with
``SeedSequence(base, spawn_key=(stream, purpose))``. ``purpose`` separates
covariates / factors (0), additive noise (1) and loadings (2), so changing a
noise level never perturbs the covariates. Normal deviates use numpy's
ziggurat sampler (``Generator.standard_normal``), chi-square deviates use
``Generator.chisquare``; both are stable across numpy >= 1.17.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InputError

__all__ = [
    "Seed",
    "SdrModelSpec",
    "SdrSample",
    "FactorModelSpec",
    "rng_for",
    "odd_power",
    "gen_sdr",
    "factor_covariance",
    "sample_factors",
    "gen_factor",
]

COVARIATES, NOISE, LOADINGS = 0, 1, 2

_SDR_DEFAULTS: dict[str, dict[str, float]] = {
    "ex1": {"sigma": 0.2, "q": 3},
    "ex2": {"sigma": 0.5, "q": 2},
    "ex3": {"sigma": 1.0, "q": 2, "q1": 1, "scale": 2.0},
    "ex4": {"sigma": 1.0, "q": 2, "q1": 1, "scale": 1.0},
}
FRACTIONAL_POWER_MODES = ("odd", "abs")


@dataclass(frozen=True)
class Seed:
    base: int
    stream: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.base < 2**64:
            raise InputError("seed base must be a 64-bit unsigned integer")
        if self.stream < 0:
            raise InputError("seed stream must be nonnegative")


def rng_for(seed: Seed, purpose: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed.base, spawn_key=(seed.stream, purpose))
    return np.random.Generator(np.random.PCG64(ss))


def odd_power(x: ArrayLike, a: float) -> NDArray[np.float64]:
    """sign(x) * |x|**a; the odd extension of x**a to negative reals."""
    arr = np.asarray(x, dtype=np.float64)
    return np.sign(arr) * np.abs(arr) ** a


@dataclass(frozen=True)
class SdrModelSpec:
    """One of the four regression designs.

    ``sigma=None`` takes the example's own noise level. For the local
    designs (ex3, ex4) the drift coefficient is ``a = local_scale /
    n**local_exponent`` unless ``a`` is given explicitly. ``fractional_power``
    picks how u**1.5 is evaluated for negative u: ``"odd"`` (sign(u)|u|^1.5)
    or ``"abs"`` (|u|^1.5).
    """

    example: str
    n: int
    p: int
    sigma: float | None = None
    local_exponent: float = 0.25
    local_scale: float | None = None
    a: float | None = None
    fractional_power: str = "odd"

    def __post_init__(self) -> None:
        if self.example not in _SDR_DEFAULTS:
            raise InputError(f"unknown example {self.example!r}; choose ex1..ex4")
        if self.n < 20:
            raise InputError(f"n must be at least 20, got {self.n}")
        if self.p < self.q_true or self.p < 3:
            raise InputError(f"p={self.p} is too small for {self.example}")
        if self.fractional_power not in FRACTIONAL_POWER_MODES:
            raise InputError(f"fractional_power must be one of {FRACTIONAL_POWER_MODES}")

    @property
    def q_true(self) -> int:
        return int(_SDR_DEFAULTS[self.example]["q"])

    @property
    def q1(self) -> int | None:
        q1 = _SDR_DEFAULTS[self.example].get("q1")
        return None if q1 is None else int(q1)

    @property
    def noise_sd(self) -> float:
        return float(_SDR_DEFAULTS[self.example]["sigma"] if self.sigma is None else self.sigma)

    @property
    def drift(self) -> float | None:
        if self.example not in ("ex3", "ex4"):
            return None
        if self.a is not None:
            return float(self.a)
        scale = _SDR_DEFAULTS[self.example]["scale"] if self.local_scale is None else self.local_scale
        return float(scale) / self.n**self.local_exponent

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SdrSample:
    X: NDArray[np.float64]
    y: NDArray[np.float64]
    q_true: int
    q1: int | None = None


def _power15(u: NDArray[np.float64], mode: str) -> NDArray[np.float64]:
    if mode == "abs":
        return np.abs(u) ** 1.5
    return odd_power(u, 1.5)


def sdr_mean(spec: SdrModelSpec, X: NDArray[np.float64]) -> NDArray[np.float64]:
    """Noise-free regression function of the design evaluated at X."""
    x1, x2, x3 = X[:, 0], X[:, 1], X[:, 2]
    if spec.example == "ex1":
        return x1 / (0.5 + _power15(x2 + 1.5, spec.fractional_power)) + x3**3 / 4.0
    if spec.example == "ex2":
        return x1 * (x2 + x3 + 1.0)
    a = spec.drift
    if spec.example == "ex3":
        return (x1 + x2) + a * (x1 + x2) * _power15(x3, spec.fractional_power)
    return 0.25 * np.exp(2.0 * x1) + a * x2**3


def gen_sdr(spec: SdrModelSpec, seed: Seed) -> SdrSample:
    X = rng_for(seed, COVARIATES).standard_normal((spec.n, spec.p))
    eps = rng_for(seed, NOISE).standard_normal(spec.n)
    y = sdr_mean(spec, X) + spec.noise_sd * eps
    return SdrSample(X, y, spec.q_true, spec.q1)


COVARIANCES = ("I", "AR", "EQ")
FACTOR_DISTS = ("normal", "t")


@dataclass(frozen=True)
class FactorModelSpec:
    """Approximate factor design Y_t = B F_t + U_t.

    ``cov``: ``"I"`` identity, ``"AR"`` entries 0.8**|i-j|, ``"EQ"`` unit
    diagonal with 0.7 off the diagonal. ``factor_dist="t"`` draws
    multivariate t with ``nu`` degrees of freedom, rescaled so that Cov(F_t)
    equals the chosen matrix. ``loading_scale=0`` switches the factors off.
    """

    n: int
    p: int
    d: int = 4
    factor_dist: str = "normal"
    nu: float = 2.5
    cov: str = "I"
    loading_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.factor_dist not in FACTOR_DISTS:
            raise InputError(f"factor_dist must be one of {FACTOR_DISTS}")
        if self.cov not in COVARIANCES:
            raise InputError(f"cov must be one of {COVARIANCES}")
        if self.d < 1 or self.d > min(self.n, self.p):
            raise InputError(f"d={self.d} must lie in [1, min(n, p)]")
        if self.factor_dist == "t" and not self.nu > 2.0:
            raise InputError("t factors need nu > 2 for a finite covariance")
        if min(self.n, self.p) < 3:
            raise InputError("factor designs need n >= 3 and p >= 3")

    @property
    def q_true(self) -> int:
        return self.d

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def factor_covariance(kind: str, d: int) -> NDArray[np.float64]:
    idx = np.arange(d)
    gap = np.abs(idx[:, None] - idx[None, :])
    if kind == "I":
        return np.eye(d)
    if kind == "AR":
        return 0.8**gap
    if kind == "EQ":
        return np.where(gap == 0, 1.0, 0.7)
    raise InputError(f"unknown covariance {kind!r}")


def sample_factors(
    rng: np.random.Generator, n: int, cov: NDArray[np.float64], dist: str = "normal", nu: float = 2.5
) -> NDArray[np.float64]:
    """n draws (as a d x n matrix) with covariance ``cov``."""
    d = cov.shape[0]
    chol = np.linalg.cholesky(cov)
    F = chol @ rng.standard_normal((d, n))
    if dist == "t":
        w = rng.chisquare(nu, size=n)
        F = F * np.sqrt((nu - 2.0) / w)
    return F


def gen_factor(spec: FactorModelSpec, seed: Seed) -> NDArray[np.float64]:
    B = spec.loading_scale * rng_for(seed, LOADINGS).standard_normal((spec.p, spec.d))
    F = sample_factors(
        rng_for(seed, COVARIATES), spec.n, factor_covariance(spec.cov, spec.d), spec.factor_dist, spec.nu
    )
    U = rng_for(seed, NOISE).standard_normal((spec.p, spec.n))
    return B @ F + U
