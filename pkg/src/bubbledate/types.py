"""Core domain types for bubble break-date estimation.

The model behind everything in this package is a scalar series that moves
through up to four autoregressive regimes: a unit root with a small drift,
a mildly explosive phase (AR coefficient above one), a mildly stationary
collapse (AR coefficient below one), and a final unit-root phase.  The
three regime boundaries are the emergence, collapse and recovery dates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

__all__ = [
    "MIN_ESTIMATION_LENGTH",
    "BubbleDateError",
    "SeriesValidationError",
    "ConfigError",
    "NonFinite",
    "TooShort",
    "LabelMismatch",
    "Series",
    "validate_series",
    "DgpConfig",
    "DerivedExponents",
    "derived_exponents",
    "explosion_exponent",
    "collapse_exponent",
    "ConstantVolatility",
    "SingleShiftVolatility",
    "VolatilityProfile",
    "LinearProcessCoeffs",
    "TrimmingPolicy",
    "UnavailableReason",
    "BreakEstimates",
]

# Shortest series accepted by the estimation entry points.  With the widest
# allowed trimming fraction (0.25) this still leaves a two-candidate scan.
MIN_ESTIMATION_LENGTH = 40

# Guard for products like 0.7 * 360 that land one binary ulp below the
# intended integer before floor/ceil is applied.
_GRID_EPS = 1e-9


class BubbleDateError(Exception):
    """Base class for every error raised by this package."""


@dataclass(frozen=True)
class NonFinite:
    """A NaN or infinite observation at 1-based position ``index``."""

    index: int


@dataclass(frozen=True)
class TooShort:
    """Series of length ``length`` below :data:`MIN_ESTIMATION_LENGTH`."""

    length: int


@dataclass(frozen=True)
class LabelMismatch:
    """Label vector of length ``actual`` attached to ``expected`` values."""

    expected: int
    actual: int


class SeriesValidationError(BubbleDateError):
    """Raised when observed data violates the series invariants.

    ``issues`` lists every violation found, not just the first one.
    """

    def __init__(self, issues: Sequence[object]):
        self.issues = list(issues)
        super().__init__("; ".join(repr(i) for i in self.issues))


class ConfigError(BubbleDateError):
    """Raised when a configuration object violates its invariants."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class Series:
    """An observed or simulated sample path.

    Parameters
    ----------
    values : ndarray
        Observations ``y_1 .. y_T`` (1-based time convention throughout).
    y0 : float, optional
        Pre-sample value.  A simulator knows its initial condition and
        stores it here, which lets regressions start at t = 1.  Raw data
        leaves it unset and regressions start at t = 2, with ``y_1``
        serving only as the first lag.
    labels : tuple of str, optional
        Per-observation labels (calendar dates, usually), same length as
        ``values``.
    """

    values: np.ndarray
    y0: Optional[float] = None
    labels: Optional[tuple] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise SeriesValidationError([f"expected 1-d values, got shape {values.shape}"])
        issues = _collect_series_issues(values, self.labels, self.y0)
        if issues:
            raise SeriesValidationError(issues)
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @property
    def T(self) -> int:
        return int(self.values.shape[0])


def _collect_series_issues(values: np.ndarray, labels, y0) -> list:
    issues: list = []
    finite = np.isfinite(values)
    if not finite.all():
        issues.extend(NonFinite(int(i) + 1) for i in np.nonzero(~finite)[0])
    if labels is not None and len(labels) != values.shape[0]:
        issues.append(LabelMismatch(expected=int(values.shape[0]), actual=len(labels)))
    if y0 is not None and not math.isfinite(y0):
        issues.append("y0 is not finite")
    return issues


def validate_series(values, labels=None, y0: Optional[float] = None) -> Series:
    """Validate raw observations for estimation and wrap them in a Series.

    Collects every violated invariant (non-finite entries by position,
    length below the estimation minimum, label-length mismatch) into a
    single :class:`SeriesValidationError` rather than stopping at the
    first problem.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise SeriesValidationError([f"expected 1-d values, got shape {values.shape}"])
    issues = _collect_series_issues(values, labels, y0)
    if values.shape[0] < MIN_ESTIMATION_LENGTH:
        issues.append(TooShort(int(values.shape[0])))
    if issues:
        raise SeriesValidationError(issues)
    return Series(values, y0=y0, labels=labels)


@dataclass(frozen=True)
class DgpConfig:
    """Parameters of the four-regime data-generating process.

    The path evolves as

    * ``t <= k_e``:          y_t = drift_pre + y_{t-1} + e_t
    * ``k_e < t <= k_c``:    y_t = phi_a * y_{t-1} + e_t        (phi_a > 1)
    * ``k_c < t <= k_r``:    y_t = phi_b * y_{t-1} + e_t        (0 < phi_b < 1)
    * ``k_r < t <= T``:      y_t = drift_post + y_{t-1} + e_t

    with break dates ``k = floor(tau * T)``.  ``tau_r = 1`` is allowed and
    leaves the fourth regime empty (a three-regime path).

    Drifts are parametrized as ``c * T**(-eta)`` with ``c >= 0`` and
    ``eta > 1/2``; ``drift_pre`` / ``drift_post`` override that
    parametrization directly when set (useful to pin the same drift across
    different sample sizes).
    """

    tau_e: float
    tau_c: float
    tau_r: float
    phi_a: float
    phi_b: float
    T: int
    y0: float = 0.0
    c0: float = 0.0
    eta0: float = 1.0
    c1: float = 0.0
    eta1: float = 1.0
    drift_pre: Optional[float] = None
    drift_post: Optional[float] = None

    def __post_init__(self):
        problems = []
        if not (0.0 < self.tau_e < self.tau_c < self.tau_r <= 1.0):
            problems.append(
                f"break fractions must satisfy 0 < tau_e < tau_c < tau_r <= 1, "
                f"got ({self.tau_e}, {self.tau_c}, {self.tau_r})"
            )
        if not self.phi_a > 1.0:
            problems.append(f"phi_a must exceed 1, got {self.phi_a}")
        if not (0.0 < self.phi_b < 1.0):
            problems.append(f"phi_b must lie in (0, 1), got {self.phi_b}")
        if self.T < 2:
            problems.append(f"T must be at least 2, got {self.T}")
        if self.c0 < 0.0 or self.c1 < 0.0:
            problems.append(f"drift scales must be nonnegative, got c0={self.c0}, c1={self.c1}")
        if self.eta0 <= 0.5 or self.eta1 <= 0.5:
            problems.append(f"drift exponents must exceed 1/2, got eta0={self.eta0}, eta1={self.eta1}")
        if not math.isfinite(self.y0):
            problems.append("y0 must be finite")
        for name in ("drift_pre", "drift_post"):
            v = getattr(self, name)
            if v is not None and not math.isfinite(v):
                problems.append(f"{name} must be finite when set")
        if not problems:
            k_e, k_c, k_r = self._break_indices_unchecked()
            if not (1 <= k_e < k_c < k_r <= self.T):
                problems.append(
                    f"break fractions map to non-increasing dates "
                    f"(k_e={k_e}, k_c={k_c}, k_r={k_r}) at T={self.T}"
                )
        if problems:
            raise ConfigError(problems)

    def _break_indices_unchecked(self):
        k_e = int(math.floor(self.tau_e * self.T + _GRID_EPS))
        k_c = int(math.floor(self.tau_c * self.T + _GRID_EPS))
        k_r = int(math.floor(self.tau_r * self.T + _GRID_EPS))
        return k_e, k_c, k_r

    @property
    def break_indices(self) -> tuple:
        """True break dates ``(k_e, k_c, k_r)`` implied by the fractions."""
        return self._break_indices_unchecked()

    @property
    def drift_pre_value(self) -> float:
        if self.drift_pre is not None:
            return self.drift_pre
        return self.c0 * self.T ** (-self.eta0)

    @property
    def drift_post_value(self) -> float:
        if self.drift_post is not None:
            return self.drift_post
        return self.c1 * self.T ** (-self.eta1)


@dataclass(frozen=True)
class DerivedExponents:
    """Local-to-unity exponents implied by (phi_a, phi_b, T)."""

    a: float
    b: float
    c_a: float
    c_b: float


def explosion_exponent(phi_a: float, T: int, c_a: float = 1.0) -> float:
    """Exponent a solving phi_a = 1 + c_a / T**a."""
    if phi_a <= 1.0:
        raise ConfigError([f"phi_a must exceed 1, got {phi_a}"])
    if c_a <= 0.0:
        raise ConfigError([f"c_a must be positive, got {c_a}"])
    return (math.log(c_a) - math.log(phi_a - 1.0)) / math.log(T)


def collapse_exponent(phi_b: float, T: int, c_b: float = 1.0) -> float:
    """Exponent b solving phi_b = 1 - c_b / T**b."""
    if not (0.0 < phi_b < 1.0):
        raise ConfigError([f"phi_b must lie in (0, 1), got {phi_b}"])
    if c_b <= 0.0:
        raise ConfigError([f"c_b must be positive, got {c_b}"])
    return (math.log(c_b) - math.log(1.0 - phi_b)) / math.log(T)


def derived_exponents(config: DgpConfig, c_a: float = 1.0, c_b: float = 1.0) -> DerivedExponents:
    """Exponents (a, b) implied by the config's AR coefficients.

    By convention the scale constants default to one, so that
    ``a = -ln(phi_a - 1)/ln T`` and ``b = -ln(1 - phi_b)/ln T``.
    """
    return DerivedExponents(
        a=explosion_exponent(config.phi_a, config.T, c_a),
        b=collapse_exponent(config.phi_b, config.T, c_b),
        c_a=c_a,
        c_b=c_b,
    )


@dataclass(frozen=True)
class ConstantVolatility:
    """Flat volatility schedule: omega(s) = sigma for all s in [0, 1]."""

    sigma: float = 1.0

    def __post_init__(self):
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ConfigError([f"sigma must be positive and finite, got {self.sigma}"])

    def omega(self, s: float) -> float:
        return self.sigma

    def omega_array(self, s: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(s, dtype=np.float64), self.sigma)


@dataclass(frozen=True)
class SingleShiftVolatility:
    """One-time volatility shift: sigma0 before tau_sigma, sigma1 strictly after."""

    sigma0: float
    sigma1: float
    tau_sigma: float = 0.5

    def __post_init__(self):
        problems = []
        if not (self.sigma0 > 0.0 and math.isfinite(self.sigma0)):
            problems.append(f"sigma0 must be positive and finite, got {self.sigma0}")
        if not (self.sigma1 > 0.0 and math.isfinite(self.sigma1)):
            problems.append(f"sigma1 must be positive and finite, got {self.sigma1}")
        if not (0.0 < self.tau_sigma < 1.0):
            problems.append(f"tau_sigma must lie in (0, 1), got {self.tau_sigma}")
        if problems:
            raise ConfigError(problems)

    def omega(self, s: float) -> float:
        return self.sigma1 if s > self.tau_sigma else self.sigma0

    def omega_array(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=np.float64)
        return np.where(s > self.tau_sigma, self.sigma1, self.sigma0)


VolatilityProfile = Union[ConstantVolatility, SingleShiftVolatility]


@dataclass(frozen=True)
class LinearProcessCoeffs:
    """Finite moving-average filter psi_0 .. psi_L applied to innovations."""

    psi: tuple

    def __post_init__(self):
        psi = tuple(float(p) for p in np.atleast_1d(np.asarray(self.psi, dtype=np.float64)))
        if len(psi) == 0:
            raise ConfigError(["psi must contain at least one coefficient"])
        if not all(math.isfinite(p) for p in psi):
            raise ConfigError(["psi coefficients must be finite"])
        object.__setattr__(self, "psi", psi)

    @property
    def order(self) -> int:
        return len(self.psi) - 1

    def as_array(self) -> np.ndarray:
        return np.asarray(self.psi, dtype=np.float64)

    def summability_diagnostic(self) -> float:
        """sum_j j^{3/2} |psi_j|, the weighted absolute-coefficient mass.

        Finite by construction here (the filter is finite); exposed so
        configured filters can be screened for disproportionate weight at
        long lags.
        """
        j = np.arange(len(self.psi), dtype=np.float64)
        return float(np.sum(j ** 1.5 * np.abs(self.as_array())))


@dataclass(frozen=True)
class TrimmingPolicy:
    """Fraction of the sample excluded at each end of every break scan."""

    rho: float = 0.05

    def __post_init__(self):
        if not (0.0 < self.rho <= 0.25):
            raise ConfigError([f"trimming fraction must lie in (0, 0.25], got {self.rho}"])

    def margin(self, T: int) -> int:
        """ceil(rho * T): number of dates excluded at each boundary."""
        return int(math.ceil(self.rho * T - _GRID_EPS))

    def k_lo(self, T: int) -> int:
        return self.margin(T)

    def k_hi(self, T: int) -> int:
        return int(math.floor((1.0 - self.rho) * T + _GRID_EPS))


class UnavailableReason(Enum):
    """Why a second-stage break estimate could not be produced."""

    # collapse estimate too close to a sample edge: the trimmed subsample
    # scan has no admissible candidate
    BOUNDARY_VIOLATION = "boundary_violation"
    # every candidate split in the admissible range had a zero lag moment
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class BreakEstimates:
    """Estimated break dates with their scan diagnostics.

    ``k_c_hat`` is always present; the emergence and recovery estimates may
    be absent, in which case the matching ``unavailable_reason_*`` explains
    why.  ``range_*`` holds the admissible candidate range actually scanned
    and ``ssr_curve_*`` the evaluated (k, SSR) pairs, one row per candidate.
    """

    k_c_hat: int
    k_e_hat: Optional[int] = None
    k_r_hat: Optional[int] = None
    unavailable_reason_e: Optional[UnavailableReason] = None
    unavailable_reason_r: Optional[UnavailableReason] = None
    range_c: Optional[tuple] = None
    range_e: Optional[tuple] = None
    range_r: Optional[tuple] = None
    ssr_curve_c: Optional[np.ndarray] = field(default=None, repr=False)
    ssr_curve_e: Optional[np.ndarray] = field(default=None, repr=False)
    ssr_curve_r: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if (self.k_e_hat is None) == (self.unavailable_reason_e is None):
            raise ConfigError(["emergence estimate and its unavailable reason are mutually exclusive"])
        if (self.k_r_hat is None) == (self.unavailable_reason_r is None):
            raise ConfigError(["recovery estimate and its unavailable reason are mutually exclusive"])
        if self.k_e_hat is not None and not self.k_e_hat < self.k_c_hat:
            raise ConfigError([f"ordering violated: k_e_hat={self.k_e_hat} >= k_c_hat={self.k_c_hat}"])
        if self.k_r_hat is not None and not self.k_c_hat < self.k_r_hat:
            raise ConfigError([f"ordering violated: k_r_hat={self.k_r_hat} <= k_c_hat={self.k_c_hat}"])
        for name, k in (("c", self.k_c_hat), ("e", self.k_e_hat), ("r", self.k_r_hat)):
            rng = getattr(self, f"range_{name}")
            if k is not None and rng is not None and not (rng[0] <= k <= rng[1]):
                raise ConfigError([f"k_{name}_hat={k} outside admissible range {rng}"])
