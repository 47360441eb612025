"""Least-squares break-date estimation for bubble episodes.

The collapse date is estimated first by fitting a no-intercept AR(1) on
each side of every candidate split of the full sample and minimizing the
total sum of squared residuals.  The sample is then split at the estimated
collapse date: the same one-break scan on the first subsample dates the
emergence of the explosive regime, and on the second subsample the
recovery to a unit root.  All scans run on prefix moments, so each
candidate costs O(1) after an O(T) setup pass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .types import (
    MIN_ESTIMATION_LENGTH,
    BreakEstimates,
    BubbleDateError,
    Series,
    SeriesValidationError,
    TooShort,
    TrimmingPolicy,
    UnavailableReason,
)

__all__ = [
    "PrefixMoments",
    "SegmentFit",
    "BreakScan",
    "ModelChoice",
    "BicReport",
    "DegenerateSegmentError",
    "EmptyRangeError",
    "build_prefix_moments",
    "fit_segment",
    "ssr_split",
    "argmin_break",
    "estimate_dates",
    "bic_select",
]

# Relative slack under which two SSR values count as an exact tie; ties
# resolve to the smallest candidate date.
SSR_TIE_REL = 1e-9

# A tiny negative SSR of magnitude up to this fraction of the segment's
# sum of squares is rounding noise from the prefix-moment identity and is
# clamped to zero.
SSR_CLAMP_REL = 1e-9


class DegenerateSegmentError(BubbleDateError):
    """A segment whose lagged sum of squares is exactly zero cannot be fit."""


class EmptyRangeError(BubbleDateError):
    """A break scan was asked to search an empty candidate range."""


@dataclass(frozen=True)
class PrefixMoments:
    """Cumulative regression moments of a series.

    Index k of each array holds the sum over regression times t <= k of
    y_{t-1} y_t, y_{t-1}^2 and y_t^2 respectively; index 0 is the empty
    sum.  Regression times start at ``t_start`` (1 when a presample value
    y_0 is available, 2 otherwise), and earlier increments are zero, so
    any in-sample segment sum is a difference of two entries.
    """

    s_cross: np.ndarray = field(repr=False)
    s_lag2: np.ndarray = field(repr=False)
    s_sq: np.ndarray = field(repr=False)
    T: int
    t_start: int
    y0: Optional[float]


@dataclass(frozen=True)
class SegmentFit:
    """No-intercept AR(1) fit on one segment: phi_hat, its SSR, and n obs."""

    phi_hat: float
    ssr: float
    n_obs: int


@dataclass(frozen=True)
class BreakScan:
    """Result of one SSR scan: the minimizer, the curve, skipped candidates."""

    k_hat: int
    curve: np.ndarray = field(repr=False)  # rows (k, SSR) for every evaluated candidate
    skipped: np.ndarray = field(repr=False)  # candidates dropped as degenerate


class ModelChoice(Enum):
    TWO_REGIME = "two_regime"
    THREE_REGIME = "three_regime"
    FOUR_REGIME = "four_regime"


@dataclass(frozen=True)
class BicReport:
    """Information-criterion comparison of the nested regime models.

    ``bic`` maps each candidate model to N*ln(SSR/N) + p*ln(N) where p
    counts AR coefficients plus break dates (3, 5 and 7 for the two-,
    three- and four-regime models).  Models whose break dates were
    unavailable carry +inf.  Ties resolve toward fewer regimes.
    """

    bic: dict
    chosen: ModelChoice
    dates: dict
    n_obs: int
    estimates: BreakEstimates = field(repr=False)


def build_prefix_moments(series: Series) -> PrefixMoments:
    """O(T) pass producing the cumulative moments behind every scan."""
    v = series.values
    T = series.T
    lags = np.empty(T, dtype=np.float64)
    lags[1:] = v[:-1]
    if series.y0 is not None:
        lags[0] = series.y0
        t_start = 1
    else:
        lags[0] = 0.0
        t_start = 2
    cross = lags * v
    lag2 = lags * lags
    sq = v * v
    if t_start == 2:
        # t = 1 is not a regression observation without a presample value
        cross[0] = 0.0
        lag2[0] = 0.0
        sq[0] = 0.0
    s_cross = np.zeros(T + 1, dtype=np.float64)
    s_lag2 = np.zeros(T + 1, dtype=np.float64)
    s_sq = np.zeros(T + 1, dtype=np.float64)
    np.cumsum(cross, out=s_cross[1:])
    np.cumsum(lag2, out=s_lag2[1:])
    np.cumsum(sq, out=s_sq[1:])
    return PrefixMoments(s_cross=s_cross, s_lag2=s_lag2, s_sq=s_sq, T=T, t_start=t_start, y0=series.y0)


def _clamp_ssr(ssr: float, seg_sq: float) -> float:
    if ssr < 0.0 and -ssr <= SSR_CLAMP_REL * seg_sq:
        return 0.0
    return ssr


def fit_segment(moments: PrefixMoments, start: int, end: int) -> SegmentFit:
    """Fit y_t = phi * y_{t-1} on regression times start..end (inclusive)."""
    if not (1 <= start <= end <= moments.T):
        raise EmptyRangeError(f"segment [{start}, {end}] outside 1..{moments.T}")
    d_lag2 = float(moments.s_lag2[end] - moments.s_lag2[start - 1])
    if d_lag2 == 0.0:
        raise DegenerateSegmentError(f"segment [{start}, {end}] has zero lagged sum of squares")
    d_cross = float(moments.s_cross[end] - moments.s_cross[start - 1])
    d_sq = float(moments.s_sq[end] - moments.s_sq[start - 1])
    phi_hat = d_cross / d_lag2
    ssr = _clamp_ssr(d_sq - phi_hat * phi_hat * d_lag2, d_sq)
    n_obs = end - max(start, moments.t_start) + 1
    return SegmentFit(phi_hat=phi_hat, ssr=ssr, n_obs=n_obs)


def ssr_split(moments: PrefixMoments, k: int) -> float:
    """Total SSR of the two-segment fit splitting the full sample at k."""
    if not (1 <= k < moments.T):
        raise EmptyRangeError(f"split k={k} leaves an empty segment for T={moments.T}")
    return fit_segment(moments, 1, k).ssr + fit_segment(moments, k + 1, moments.T).ssr


def _scan(moments: PrefixMoments, seg_start: int, seg_end: int, k_lo: int, k_hi: int) -> BreakScan:
    """Vectorized SSR scan over splits of the window [seg_start, seg_end].

    For each candidate k the two segments are [seg_start, k] and
    [k+1, seg_end].  Candidates with a zero lagged sum of squares on
    either side are skipped.  SSR values within a relative tolerance of
    the minimum count as ties and the smallest date wins.
    """
    if k_lo > k_hi:
        raise EmptyRangeError(f"empty candidate range [{k_lo}, {k_hi}]")
    if not (seg_start <= k_lo and k_hi < seg_end):
        raise EmptyRangeError(
            f"candidates [{k_lo}, {k_hi}] must split [{seg_start}, {seg_end}] into nonempty segments"
        )
    ks = np.arange(k_lo, k_hi + 1)
    c0 = moments.s_cross[seg_start - 1]
    l0 = moments.s_lag2[seg_start - 1]
    q0 = moments.s_sq[seg_start - 1]
    d_c1 = moments.s_cross[ks] - c0
    d_l1 = moments.s_lag2[ks] - l0
    d_q1 = moments.s_sq[ks] - q0
    d_c2 = moments.s_cross[seg_end] - moments.s_cross[ks]
    d_l2 = moments.s_lag2[seg_end] - moments.s_lag2[ks]
    d_q2 = moments.s_sq[seg_end] - moments.s_sq[ks]
    ok = (d_l1 > 0.0) & (d_l2 > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi1 = d_c1 / d_l1
        phi2 = d_c2 / d_l2
        ssr1 = d_q1 - phi1 * phi1 * d_l1
        ssr2 = d_q2 - phi2 * phi2 * d_l2
    ssr1 = np.where((ssr1 < 0.0) & (-ssr1 <= SSR_CLAMP_REL * d_q1), 0.0, ssr1)
    ssr2 = np.where((ssr2 < 0.0) & (-ssr2 <= SSR_CLAMP_REL * d_q2), 0.0, ssr2)
    total = ssr1 + ssr2
    if not ok.any():
        raise DegenerateSegmentError(
            f"every candidate in [{k_lo}, {k_hi}] has a degenerate segment"
        )
    valid_ks = ks[ok]
    valid_ssr = total[ok]
    best = float(valid_ssr.min())
    # the band must widen away from best regardless of its sign, or a
    # negative best (possible when float truncation corrupts a huge
    # dynamic-range series) would fail its own tie test
    tied = valid_ssr <= best + SSR_TIE_REL * abs(best)
    k_hat = int(valid_ks[tied][0])
    curve = np.column_stack([valid_ks.astype(np.float64), valid_ssr])
    return BreakScan(k_hat=k_hat, curve=curve, skipped=ks[~ok])


def argmin_break(moments: PrefixMoments, k_lo: int, k_hi: int) -> BreakScan:
    """Minimize the full-sample two-segment SSR over k in [k_lo, k_hi]."""
    return _scan(moments, 1, moments.T, k_lo, k_hi)


def estimate_dates(series: Series, trimming: TrimmingPolicy = TrimmingPolicy()) -> BreakEstimates:
    """Three-step break-date estimation with trimmed scans.

    Step 1 scans the whole sample for the collapse date over
    [ceil(rho*T), floor((1-rho)*T)].  Step 2 rescans the first subsample
    (observations up to the collapse estimate) for the emergence date over
    [ceil(rho*T), k_c_hat - ceil(rho*T)]; step 3 rescans the second
    subsample for the recovery date over
    [k_c_hat + ceil(rho*T) + 1, floor((1-rho)*T)].  A subsample scan whose
    range is empty reports a boundary violation instead of an estimate; a
    failed step never blocks the others.
    """
    T = series.T
    if T < MIN_ESTIMATION_LENGTH:
        raise SeriesValidationError([TooShort(T)])
    moments = build_prefix_moments(series)
    margin = trimming.margin(T)
    range_c = (trimming.k_lo(T), trimming.k_hi(T))
    scan_c = _scan(moments, 1, T, range_c[0], range_c[1])
    k_c = scan_c.k_hat

    k_e = None
    reason_e = None
    curve_e = None
    range_e = (margin, k_c - margin)
    if range_e[0] > range_e[1]:
        reason_e = UnavailableReason.BOUNDARY_VIOLATION
        range_e = None
    else:
        try:
            scan_e = _scan(moments, 1, k_c, range_e[0], range_e[1])
            k_e = scan_e.k_hat
            curve_e = scan_e.curve
        except DegenerateSegmentError:
            reason_e = UnavailableReason.DEGENERATE

    k_r = None
    reason_r = None
    curve_r = None
    range_r = (k_c + margin + 1, trimming.k_hi(T))
    if range_r[0] > range_r[1]:
        reason_r = UnavailableReason.BOUNDARY_VIOLATION
        range_r = None
    else:
        try:
            scan_r = _scan(moments, k_c + 1, T, range_r[0], range_r[1])
            k_r = scan_r.k_hat
            curve_r = scan_r.curve
        except DegenerateSegmentError:
            reason_r = UnavailableReason.DEGENERATE

    return BreakEstimates(
        k_c_hat=k_c,
        k_e_hat=k_e,
        k_r_hat=k_r,
        unavailable_reason_e=reason_e,
        unavailable_reason_r=reason_r,
        range_c=range_c,
        range_e=range_e,
        range_r=range_r,
        ssr_curve_c=scan_c.curve,
        ssr_curve_e=curve_e,
        ssr_curve_r=curve_r,
    )


def _segmentation_ssr(moments: PrefixMoments, breaks: tuple) -> float:
    bounds = [0, *breaks, moments.T]
    total = 0.0
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        total += fit_segment(moments, lo + 1, hi).ssr
    return total


def _bic_value(ssr: float, n: int, n_params: int) -> float:
    if ssr <= 0.0:
        return -math.inf
    return n * math.log(ssr / n) + n_params * math.log(n)


def bic_select(series: Series, trimming: TrimmingPolicy = TrimmingPolicy()) -> BicReport:
    """Compare two-, three- and four-regime fits of one series by BIC.

    Each model keeps the break dates produced by its own scans: the
    two-regime model uses the full-sample split, the three-regime model
    adds the emergence date (tail observations stay in the collapse
    regime), and the four-regime model adds the recovery date.  The scans
    coincide with the three estimation steps, so one pass serves all
    models.
    """
    est = estimate_dates(series, trimming)
    moments = build_prefix_moments(series)
    n = moments.T - (moments.t_start - 1)

    dates = {ModelChoice.TWO_REGIME: (est.k_c_hat,)}
    bic = {
        ModelChoice.TWO_REGIME: _bic_value(
            _segmentation_ssr(moments, (est.k_c_hat,)), n, 3
        )
    }
    if est.k_e_hat is not None:
        dates[ModelChoice.THREE_REGIME] = (est.k_e_hat, est.k_c_hat)
        bic[ModelChoice.THREE_REGIME] = _bic_value(
            _segmentation_ssr(moments, (est.k_e_hat, est.k_c_hat)), n, 5
        )
    else:
        dates[ModelChoice.THREE_REGIME] = None
        bic[ModelChoice.THREE_REGIME] = math.inf
    if est.k_e_hat is not None and est.k_r_hat is not None:
        dates[ModelChoice.FOUR_REGIME] = (est.k_e_hat, est.k_c_hat, est.k_r_hat)
        bic[ModelChoice.FOUR_REGIME] = _bic_value(
            _segmentation_ssr(moments, (est.k_e_hat, est.k_c_hat, est.k_r_hat)), n, 7
        )
    else:
        dates[ModelChoice.FOUR_REGIME] = None
        bic[ModelChoice.FOUR_REGIME] = math.inf

    chosen = ModelChoice.TWO_REGIME
    for model in (ModelChoice.THREE_REGIME, ModelChoice.FOUR_REGIME):
        if bic[model] < bic[chosen]:  # strict: ties stay with fewer regimes
            chosen = model
    return BicReport(bic=bic, chosen=chosen, dates=dates, n_obs=n, estimates=est)
