"""Simulation of four-regime bubble paths and their error processes."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .rng import as_generator
from .types import (
    ConfigError,
    ConstantVolatility,
    DgpConfig,
    LinearProcessCoeffs,
    Series,
    SingleShiftVolatility,
    VolatilityProfile,
)

__all__ = [
    "IidGaussian",
    "VolatilityScaled",
    "LinearProcess",
    "ErrorSpec",
    "generate_errors",
    "simulate",
    "path_from_errors",
    "batch_paths",
    "variance_profile",
]

# Default pre-sample length for linear-process errors.  Must cover the
# filter order so every in-sample error sees a fully populated filter.
DEFAULT_BURN_IN = 50


@dataclass(frozen=True)
class IidGaussian:
    """e_t = sigma * z_t with z_t i.i.d. standard normal."""

    sigma: float = 1.0

    def __post_init__(self):
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ConfigError([f"sigma must be positive and finite, got {self.sigma}"])


@dataclass(frozen=True)
class VolatilityScaled:
    """e_t = omega(t / T) * z_t: independent normals under a volatility schedule."""

    profile: VolatilityProfile

    def __post_init__(self):
        if not isinstance(self.profile, (ConstantVolatility, SingleShiftVolatility)):
            raise ConfigError([f"unsupported volatility profile: {type(self.profile).__name__}"])


@dataclass(frozen=True)
class LinearProcess:
    """e_t = sum_j psi_j v_{t-j} with i.i.d. normal innovations v."""

    coeffs: LinearProcessCoeffs
    innovation_sigma: float = 1.0
    burn_in: Optional[int] = None

    def __post_init__(self):
        if not (self.innovation_sigma > 0.0 and math.isfinite(self.innovation_sigma)):
            raise ConfigError([f"innovation_sigma must be positive and finite, got {self.innovation_sigma}"])
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", max(self.coeffs.order, DEFAULT_BURN_IN))
        elif self.burn_in < self.coeffs.order:
            raise ConfigError(
                [f"burn_in must be at least the filter order {self.coeffs.order}, got {self.burn_in}"]
            )


ErrorSpec = Union[IidGaussian, VolatilityScaled, LinearProcess]


def _filter_innovations(psi: np.ndarray, v: np.ndarray, burn_in: int, T: int) -> np.ndarray:
    # v covers t = 1 - burn_in .. T; the full convolution at output index
    # burn_in + (t - 1) is sum_j psi_j v_{t-j}, fully inside v for t >= 1.
    return np.convolve(v, psi, mode="full")[burn_in : burn_in + T]


def generate_errors(spec: ErrorSpec, T: int, seed_or_rng) -> np.ndarray:
    """Draw the error sequence e_1 .. e_T for one replication.

    A Generator may be passed instead of an integer seed, which is how the
    Monte Carlo driver hands each replication its own stream.
    """
    if T < 1:
        raise ConfigError([f"T must be positive, got {T}"])
    rng = as_generator(seed_or_rng)
    if isinstance(spec, IidGaussian):
        return spec.sigma * rng.standard_normal(T)
    if isinstance(spec, VolatilityScaled):
        z = rng.standard_normal(T)
        t = np.arange(1, T + 1, dtype=np.float64)
        return spec.profile.omega_array(t / T) * z
    if isinstance(spec, LinearProcess):
        v = spec.innovation_sigma * rng.standard_normal(spec.burn_in + T)
        return _filter_innovations(spec.coeffs.as_array(), v, spec.burn_in, T)
    raise ConfigError([f"unsupported error spec: {type(spec).__name__}"])


def batch_paths(config: DgpConfig, errors: np.ndarray) -> np.ndarray:
    """Run the regime recursion on a (reps, T) error matrix.

    Returns a (reps, T+1) array whose column 0 is y_0.  The recursion is
    applied one time step at a time with identical elementwise operations
    to the single-path case, so batched and per-path simulation agree bit
    for bit.
    """
    errors = np.atleast_2d(np.asarray(errors, dtype=np.float64))
    reps, T = errors.shape
    if T != config.T:
        raise ConfigError([f"error matrix has T={T}, config expects {config.T}"])
    k_e, k_c, k_r = config.break_indices
    d0 = config.drift_pre_value
    d1 = config.drift_post_value
    y = np.empty((reps, T + 1), dtype=np.float64)
    y[:, 0] = config.y0
    for t in range(1, T + 1):
        prev = y[:, t - 1]
        e = errors[:, t - 1]
        if t <= k_e:
            y[:, t] = d0 + prev + e
        elif t <= k_c:
            y[:, t] = config.phi_a * prev + e
        elif t <= k_r:
            y[:, t] = config.phi_b * prev + e
        else:
            y[:, t] = d1 + prev + e
    return y


def path_from_errors(config: DgpConfig, errors: np.ndarray) -> np.ndarray:
    """Single-path regime recursion; returns y_0 .. y_T."""
    return batch_paths(config, np.asarray(errors, dtype=np.float64)[np.newaxis, :])[0]


def simulate(config: DgpConfig, errors: ErrorSpec, seed_or_rng) -> Series:
    """Simulate one path and wrap it as a Series carrying its y_0."""
    eps = generate_errors(errors, config.T, seed_or_rng)
    y = path_from_errors(config, eps)
    return Series(y[1:], y0=float(y[0]))


def variance_profile(profile: VolatilityProfile, tau: float) -> float:
    """Normalized cumulative squared volatility kappa(tau) in [0, 1].

    kappa(tau) = int_0^tau omega(s)^2 ds / int_0^1 omega(s)^2 ds.  The
    squared schedule is integrated in both numerator and denominator, so
    kappa is the fraction of total error variance accumulated by time
    fraction tau; kappa(1) = 1 and kappa is nondecreasing.  This is a
    diagnostic only; nothing downstream consumes it.
    """
    if not (0.0 <= tau <= 1.0):
        raise ConfigError([f"tau must lie in [0, 1], got {tau}"])
    if isinstance(profile, ConstantVolatility):
        return tau
    if isinstance(profile, SingleShiftVolatility):
        s0sq = profile.sigma0 ** 2
        s1sq = profile.sigma1 ** 2
        ts = profile.tau_sigma
        num = s0sq * min(tau, ts) + s1sq * max(0.0, tau - ts)
        den = s0sq * ts + s1sq * (1.0 - ts)
        return num / den
    raise ConfigError([f"unsupported volatility profile: {type(profile).__name__}"])
