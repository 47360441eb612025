"""Samplers for the limit distributions of the break-date estimators.

Two laws are covered, both expressed as the argmax of a two-sided random
objective over a discretized grid:

* the emergence-date limit, a two-sided Brownian motion scaled by an
  independent normal level and penalized by |v|/2;
* the recovery-date limit, driven on the negative side by stochastic
  integrals of the tail process B~(s) = int_s^inf exp(-c_b (t-s)) dB_1(t)
  and on the positive side by an independent Brownian motion, with an
  optional penalty correction for serially correlated errors.

Ito integrals against adapted integrands use left-endpoint sums; the
integral of B~ against dB_1 pairs each increment with the tail value at
the next grid point instead, because B~ looks forward and already
contains the current increment.  B~ itself is built by an exponentially
discounted backward recursion over Brownian increments on an extended
horizon so its truncation error is exp(-c_b * horizon).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.signal import lfilter

from .rng import as_generator, stream
from .types import BubbleDateError, ConfigError, LinearProcessCoeffs

__all__ = [
    "Discretization",
    "BnDecomposition",
    "OuPath",
    "LimitSample",
    "ZeroLongRunVarianceError",
    "bn_decompose",
    "sample_ou_path",
    "sample_recovery_limit",
    "sample_emergence_limit",
    "recovery_limit_draws",
    "emergence_limit_draws",
]

# Draws whose normalizing level is this close to zero are discarded and
# redrawn; the objective divides by the level.
REJECTION_THRESHOLD = 1e-8


class ZeroLongRunVarianceError(BubbleDateError):
    """The filter coefficients sum to zero, so no long-run scale exists."""


@dataclass(frozen=True)
class Discretization:
    """Grid controls shared by the limit-law samplers.

    ``step`` is the grid spacing, ``v_max`` the half-width of the argmax
    search window, ``ou_horizon`` the extra horizon carried beyond v_max
    when building the tail process, and ``paths`` the default number of
    draws for batch sampling.
    """

    step: float = 0.01
    v_max: float = 50.0
    ou_horizon: float = 10.0
    paths: int = 10_000

    def __post_init__(self):
        problems = []
        if not (self.step > 0.0 and math.isfinite(self.step)):
            problems.append(f"step must be positive, got {self.step}")
        if not (self.v_max > 0.0 and math.isfinite(self.v_max)):
            problems.append(f"v_max must be positive, got {self.v_max}")
        elif self.step > 0.01 * self.v_max * (1.0 + 1e-12):
            problems.append(f"step must not exceed v_max/100, got step={self.step}, v_max={self.v_max}")
        if not (self.ou_horizon > 0.0 and math.isfinite(self.ou_horizon)):
            problems.append(f"ou_horizon must be positive, got {self.ou_horizon}")
        if self.paths < 1:
            problems.append(f"paths must be at least 1, got {self.paths}")
        if problems:
            raise ConfigError(problems)

    @staticmethod
    def default(c_b: float) -> "Discretization":
        return Discretization(ou_horizon=max(10.0 / c_b, 10.0))

    def n_grid(self) -> int:
        return int(round(self.v_max / self.step))

    def require_horizon(self, c_b: float) -> None:
        if self.ou_horizon < 10.0 / c_b - 1e-12:
            raise ConfigError(
                [f"ou_horizon={self.ou_horizon} too short for c_b={c_b}; need at least {10.0 / c_b}"]
            )


@dataclass(frozen=True)
class BnDecomposition:
    """Long-run decomposition of a moving-average filter.

    For coefficients psi_0..psi_L, ``psi_sum`` is the long-run coefficient
    sum(psi_j), ``psi_tilde[l]`` the tail sums sum_{k>l} psi_k (so that
    psi_j = psi_tilde[j-1] - psi_tilde[j]), ``psi_sq_sum`` is
    sum(psi_j^2), and ``psi_check`` the penalty adjustment
    (4/psi_sum^2) * (psi_sum*psi_tilde[0] - sum(psi_tilde^2)
    + sum(psi_tilde[j]*psi_tilde[j+1])).
    """

    psi_sum: float
    psi_tilde: np.ndarray = field(repr=False)
    psi_check: float
    psi_sq_sum: float


def bn_decompose(coeffs: LinearProcessCoeffs) -> BnDecomposition:
    """Long-run decomposition of a finite filter."""
    psi = coeffs.as_array()
    psi_sum = float(psi.sum())
    if psi_sum == 0.0:
        raise ZeroLongRunVarianceError("filter coefficients sum to zero")
    tails = np.cumsum(psi[::-1])[::-1]  # tails[l] = sum_{k >= l} psi_k
    psi_tilde = np.concatenate([tails[1:], [0.0]])
    cross = float(np.dot(psi_tilde[:-1], psi_tilde[1:])) if psi_tilde.size > 1 else 0.0
    psi_check = (4.0 / psi_sum**2) * (
        psi_sum * float(psi_tilde[0]) - float(np.dot(psi_tilde, psi_tilde)) + cross
    )
    return BnDecomposition(
        psi_sum=psi_sum,
        psi_tilde=psi_tilde,
        psi_check=psi_check,
        psi_sq_sum=float(np.dot(psi, psi)),
    )


@dataclass(frozen=True)
class OuPath:
    """Discretized tail process with the Brownian increments that drove it.

    ``b_tilde[i]`` approximates B~(grid[i]); ``db1[i]`` is the increment of
    B_1 over [grid[i], grid[i+1]), shared with the stochastic integrals on
    the negative branch of the recovery objective.
    """

    grid: np.ndarray = field(repr=False)
    b_tilde: np.ndarray = field(repr=False)
    db1: np.ndarray = field(repr=False)
    c_b: float
    step: float


def _discounted_backward(increments: np.ndarray, gamma: float) -> np.ndarray:
    # x[i] = increments[i] + gamma * x[i+1], computed right to left
    rev = lfilter([1.0], [1.0, -gamma], increments[::-1])
    return rev[::-1]


def _ou_from_increments(db_ext: np.ndarray, c_b: float, step: float, n_keep: int) -> np.ndarray:
    gamma = math.exp(-c_b * step)
    b_ext = _discounted_backward(db_ext, gamma)
    return b_ext[: n_keep + 1]


def sample_ou_path(c_b: float, disc: Discretization, seed_or_rng) -> OuPath:
    """Draw one discretized tail-process path on [0, v_max]."""
    if c_b <= 0.0:
        raise ConfigError([f"c_b must be positive, got {c_b}"])
    disc.require_horizon(c_b)
    rng = as_generator(seed_or_rng)
    n = disc.n_grid()
    n_ext = int(round((disc.v_max + disc.ou_horizon) / disc.step))
    db_ext = rng.standard_normal(n_ext) * math.sqrt(disc.step)
    b_tilde = _ou_from_increments(db_ext, c_b, disc.step, n)
    grid = np.arange(n + 1) * disc.step
    return OuPath(grid=grid, b_tilde=b_tilde, db1=db_ext[:n], c_b=c_b, step=disc.step)


def _recovery_objective(
    c_b: float,
    b_tilde: np.ndarray,
    db1: np.ndarray,
    db2: np.ndarray,
    step: float,
    psi_star_neg: float,
    psi_star_pos: float,
) -> tuple:
    """Evaluate the recovery objective on the symmetric grid.

    Returns (v_grid, values) with v ascending from -v_max to v_max; the
    value at v = 0 is exactly zero.

    On the negative branch the tail process anticipates B_1: B~(s)
    contains the increment dB_1 over [s, s + step) with weight one, so a
    plain left-endpoint product would add E[dB_1^2] = step per cell and
    tilt the objective upward linearly.  The sums therefore pair each
    increment with B~ at the next grid point, the discrete analogue of the
    lagged state multiplying the innovation, which excludes the cell's own
    increment and keeps the integral mean zero.
    """
    n = db1.shape[0]
    t = np.arange(1, n + 1) * step
    b0 = float(b_tilde[0])

    bt_next = b_tilde[1 : n + 1]
    i1 = np.cumsum(bt_next * db1)
    i2 = np.cumsum(bt_next * bt_next - 1.0 / (2.0 * c_b)) * step
    c_neg = 2.0 * i1 - c_b * i2
    obj_neg = c_neg - 0.5 * t * psi_star_neg

    b2 = np.concatenate([[0.0], np.cumsum(db2)])
    j1 = np.cumsum(b2[:n] * db2)
    j2 = np.cumsum((b2[:n] / (2.0 * b0) + 1.0) * b2[:n]) * step
    c_pos = -(b2[1:] + j1 / b0 + c_b * j2) / (c_b * b0)
    obj_pos = c_pos - 0.5 * t * psi_star_pos

    v_grid = np.concatenate([-t[::-1], [0.0], t])
    values = np.concatenate([obj_neg[::-1], [0.0], obj_pos])
    return v_grid, values


def _one_recovery_draw(c_b, disc, rng, bn: Optional[BnDecomposition]) -> tuple:
    n = disc.n_grid()
    n_ext = int(round((disc.v_max + disc.ou_horizon) / disc.step))
    rejections = 0
    while True:
        db_ext = rng.standard_normal(n_ext) * math.sqrt(disc.step)
        db2 = rng.standard_normal(n) * math.sqrt(disc.step)
        b_tilde = _ou_from_increments(db_ext, c_b, disc.step, n)
        b0 = float(b_tilde[0])
        if abs(b0) < REJECTION_THRESHOLD:
            rejections += 1
            continue
        if bn is None:
            psi_neg = 1.0
            psi_pos = 1.0
        else:
            psi_neg = 1.0 - bn.psi_check
            ratio = bn.psi_sq_sum / bn.psi_sum**2
            psi_pos = 1.0 + (1.0 - ratio) / (c_b * b0 * b0)
        v_grid, values = _recovery_objective(
            c_b, b_tilde, db_ext[:n], db2, disc.step, psi_neg, psi_pos
        )
        return float(v_grid[int(np.argmax(values))]), rejections


@dataclass(frozen=True)
class LimitSample:
    """A batch of limit-law draws plus the number of rejected paths."""

    values: np.ndarray
    rejections: int


def sample_recovery_limit(
    c_b: float,
    disc: Optional[Discretization] = None,
    seed_or_rng=0,
    correction: Optional[LinearProcessCoeffs] = None,
) -> float:
    """One draw from the recovery-date limit law.

    ``correction`` supplies moving-average coefficients whose long-run
    decomposition adjusts the |v|/2 penalty on both branches; without it
    the white-noise law is sampled.
    """
    if c_b <= 0.0:
        raise ConfigError([f"c_b must be positive, got {c_b}"])
    disc = disc or Discretization.default(c_b)
    disc.require_horizon(c_b)
    bn = bn_decompose(correction) if correction is not None else None
    rng = as_generator(seed_or_rng)
    value, _ = _one_recovery_draw(c_b, disc, rng, bn)
    return value


def recovery_limit_draws(
    c_b: float,
    draws: Optional[int] = None,
    disc: Optional[Discretization] = None,
    seed: int = 0,
    correction: Optional[LinearProcessCoeffs] = None,
) -> LimitSample:
    """Batch of independent recovery-limit draws.

    Draw i comes from the (seed, i) stream, so any subset or reordering of
    the batch reproduces the same values.
    """
    if c_b <= 0.0:
        raise ConfigError([f"c_b must be positive, got {c_b}"])
    disc = disc or Discretization.default(c_b)
    disc.require_horizon(c_b)
    if draws is None:
        draws = disc.paths
    bn = bn_decompose(correction) if correction is not None else None
    values = np.empty(draws, dtype=np.float64)
    rejections = 0
    for i in range(draws):
        values[i], rej = _one_recovery_draw(c_b, disc, stream(seed, i), bn)
        rejections += rej
    return LimitSample(values=values, rejections=rejections)


def _emergence_objective(
    w_left: np.ndarray, w_right: np.ndarray, level: float, step: float
) -> tuple:
    """Two-sided scaled-Brownian objective W*(v)/level - |v|/2."""
    n = w_left.shape[0]
    t = np.arange(1, n + 1) * step
    obj_neg = w_left / level - 0.5 * t
    obj_pos = w_right / level - 0.5 * t
    v_grid = np.concatenate([-t[::-1], [0.0], t])
    values = np.concatenate([obj_neg[::-1], [0.0], obj_pos])
    return v_grid, values


def _one_emergence_draw(tau_e: float, disc: Discretization, rng) -> tuple:
    n = disc.n_grid()
    sqrt_step = math.sqrt(disc.step)
    rejections = 0
    while True:
        w_left = np.cumsum(rng.standard_normal(n) * sqrt_step)
        w_right = np.cumsum(rng.standard_normal(n) * sqrt_step)
        # the normalizing level W_1(tau_e) is asymptotically independent of
        # the local window around the break, so it is drawn independently
        level = math.sqrt(tau_e) * rng.standard_normal()
        if abs(level) < REJECTION_THRESHOLD:
            rejections += 1
            continue
        v_grid, values = _emergence_objective(w_left, w_right, level, disc.step)
        return float(v_grid[int(np.argmax(values))]), rejections


def sample_emergence_limit(
    tau_e: float,
    disc: Optional[Discretization] = None,
    seed_or_rng=0,
) -> float:
    """One draw from the emergence-date limit law."""
    if not (0.0 < tau_e < 1.0):
        raise ConfigError([f"tau_e must lie in (0, 1), got {tau_e}"])
    disc = disc or Discretization()
    rng = as_generator(seed_or_rng)
    value, _ = _one_emergence_draw(tau_e, disc, rng)
    return value


def emergence_limit_draws(
    tau_e: float,
    draws: Optional[int] = None,
    disc: Optional[Discretization] = None,
    seed: int = 0,
) -> LimitSample:
    """Batch of independent emergence-limit draws, keyed like recovery draws."""
    if not (0.0 < tau_e < 1.0):
        raise ConfigError([f"tau_e must lie in (0, 1), got {tau_e}"])
    disc = disc or Discretization()
    if draws is None:
        draws = disc.paths
    values = np.empty(draws, dtype=np.float64)
    rejections = 0
    for i in range(draws):
        values[i], rej = _one_emergence_draw(tau_e, disc, stream(seed, i))
        rejections += rej
    return LimitSample(values=values, rejections=rejections)
