"""
Annealing schedule s(theta), the path lambda = s^q and the short-time estimates
built on them (effective tunneling amplitude and perturbative fidelity).
"""
from abc import ABC, abstractmethod

import numpy as np
from scipy.integrate import quad

from app.common.models import ScheduleSample
from app.common.schemas import as_fraction
from ..utils.logger import get_logger

logger = get_logger(__name__)


def _check_theta(theta):
    arr = np.asarray(theta, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1) or np.any(np.isnan(arr)):
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    return arr


class Schedule(ABC):
    """Monotone map theta -> s on [0, 1] with s(0) = 0 and s(1) = 1."""

    @abstractmethod
    def s(self, theta):
        ...

    @abstractmethod
    def s_dot(self, theta):
        ...

    @abstractmethod
    def s_ddot(self, theta):
        ...


class QuinticSchedule(Schedule):
    """6 theta^5 - 15 theta^4 + 10 theta^3; first and second derivatives vanish at both ends."""

    def s(self, theta):
        t = _check_theta(theta)
        return t ** 3 * (6 * t ** 2 - 15 * t + 10)

    def s_dot(self, theta):
        t = _check_theta(theta)
        return 30 * t ** 2 * (1 - t) ** 2

    def s_ddot(self, theta):
        t = _check_theta(theta)
        return 60 * t * (1 - t) * (1 - 2 * t)


QUINTIC = QuinticSchedule()


def s_of_theta(theta, schedule: Schedule = QUINTIC):
    return schedule.s(theta)


def s_dot(theta, schedule: Schedule = QUINTIC):
    return schedule.s_dot(theta)


def s_ddot(theta, schedule: Schedule = QUINTIC):
    return schedule.s_ddot(theta)


def lambda_and_dot(theta, q: float, schedule: Schedule = QUINTIC):
    """(lambda, d lambda / d theta) on the path lambda = s^q.

    At s = 0 the derivative is defined as 0. This equals the theta -> 0+ limit
    only for q > 1/3. Near 0 the derivative behaves like theta^(3q - 1), so for
    q <= 1/3 the value at theta = 0 is a convention, not a limit.
    """
    if q <= 0:
        raise ValueError(f"q must be > 0, got {q}")
    s = schedule.s(theta)
    sd = schedule.s_dot(theta)
    lam = s ** q
    with np.errstate(divide="ignore", invalid="ignore"):
        lam_dot = np.where(s > 0, q * s ** (q - 1) * sd, 0.0)
    if np.ndim(lam_dot) == 0:
        return float(lam), float(lam_dot)
    return lam, lam_dot


def sample(theta: float, q: float, schedule: Schedule = QUINTIC) -> ScheduleSample:
    lam, lam_dot = lambda_and_dot(theta, q, schedule)
    return ScheduleSample(theta=float(theta), s=float(schedule.s(theta)),
                          s_dot=float(schedule.s_dot(theta)), lam=lam, lam_dot=lam_dot, q=q)


def effective_gamma(tau: float, gamma: float, q: float, schedule: Schedule = QUINTIC) -> float:
    """tau * gamma * int_0^1 lambda (1 - s) d theta (adaptive Gauss-Kronrod)."""
    if tau <= 0 or gamma <= 0:
        raise ValueError(f"tau and gamma must be > 0, got ({tau}, {gamma})")

    def integrand(theta):
        s = float(schedule.s(theta))
        return s ** q * (1 - s)

    value, abserr = quad(integrand, 0.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=200)
    logger.debug(f"effective gamma integral q={q}: {value} (+/- {abserr})")
    return tau * gamma * value


def perturbative_pgs(N: int, c, gamma_eff: float) -> float:
    """Short-time estimate gamma_eff^(2 N (1 - c)) for flipping the N(1-c) down spins."""
    if gamma_eff >= 1:
        logger.warning(f"effective gamma {gamma_eff:.4g} >= 1, perturbative estimate is not meaningful")
    flips = N - as_fraction(c) * N
    return float(gamma_eff ** (2 * float(flips)))


def predicted_exponent(c, gamma_eff: float) -> float:
    """gamma_pred = 2 (1 - c) |log2 gamma_eff| in P_GS ~ 2^(-gamma N)."""
    return 2 * float(1 - as_fraction(c)) * abs(np.log2(gamma_eff))
