"""Closed-form one-sided market: two builders bidding for one shared bundle.

With builder values v1 ~ Exp(rate1) and v2 ~ Exp(rate2), the difference
follows an asymmetric Laplace density. The searcher's expected payoff is a
piecewise integral against that density, split where the winning builder
flips; the tails are exponential-polynomial integrals with elementary
antiderivatives and the finite middle piece is evaluated by adaptive
quadrature. The derivative of the expected payoff with respect to the bid-gap
(with the bid to the weaker builder fixed at zero) has a closed form that is
strictly negative, so bidding the two builders evenly is optimal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from .errors import ConfigError, NumericalError


@dataclass(frozen=True)
class OneSidedMarket:
    rate1: float  # exponential rate of builder 1's value
    rate2: float
    value: float  # the searcher's bundle value
    beta1: float  # bid ratio offered to builder 1
    beta2: float
    rebate1: float  # builder 1's rebate ratio
    rebate2: float

    def __post_init__(self):
        if self.rate1 <= 0 or self.rate2 <= 0:
            raise ConfigError("value rates must be positive")
        if self.value < 0:
            raise ConfigError(f"bundle value must be >= 0, got {self.value}")
        for name in ("beta1", "beta2"):
            b = getattr(self, name)
            if not 0 <= b <= 1:
                raise ConfigError(f"{name} must be in [0, 1], got {b}")
        for name in ("rebate1", "rebate2"):
            a = getattr(self, name)
            if not 0 <= a < 1:
                raise ConfigError(f"{name} must be in [0, 1), got {a}")

    @property
    def delta_beta(self) -> float:
        return self.beta1 - self.beta2


def laplace_pdf(x: float, rate1: float, rate2: float) -> float:
    """Density of v1 - v2 for independent exponentials with the given rates."""
    if rate1 <= 0 or rate2 <= 0:
        raise ConfigError("rates must be positive")
    k = rate1 * rate2 / (rate1 + rate2)
    return k * math.exp(-rate1 * x) if x >= 0 else k * math.exp(rate2 * x)


def laplace_cdf(x: float, rate1: float, rate2: float) -> float:
    if x < 0:
        return rate1 / (rate1 + rate2) * math.exp(rate2 * x)
    return 1.0 - rate2 / (rate1 + rate2) * math.exp(-rate1 * x)


def _payoff_coefficients(market: OneSidedMarket) -> tuple[float, float, float, float]:
    """Linear payoff pieces: a1 + rebate1*x when builder 1 wins, b0 - rebate2*x otherwise."""
    v3, db = market.value, market.delta_beta
    a1 = (1.0 - market.beta1) * v3 + market.rebate1 * db * v3
    b0 = (1.0 - market.beta2) * v3 - market.rebate2 * db * v3
    return a1, market.rebate1, b0, -market.rebate2


def _tail_upper(a: float, b: float, c: float, rate: float) -> float:
    """Integral of (a + b x) e^(-rate x) over [c, inf)."""
    return math.exp(-rate * c) * ((a + b * c) / rate + b / rate**2)


def _tail_lower(a: float, b: float, c: float, rate: float) -> float:
    """Integral of (a + b x) e^(rate x) over (-inf, c]."""
    return math.exp(rate * c) * ((a + b * c) / rate - b / rate**2)


def _quad_middle(a: float, b: float, rate_sign: float, lo: float, hi: float) -> float:
    """Adaptive quadrature of (a + b x) e^(rate_sign x) over the finite [lo, hi]."""
    if lo == hi:
        return 0.0
    result = integrate.quad(
        lambda x: (a + b * x) * math.exp(rate_sign * x),
        lo,
        hi,
        epsabs=1e-13,
        epsrel=1e-12,
        full_output=1,
    )
    if len(result) > 3:
        raise NumericalError(f"quadrature failed on [{lo}, {hi}]: {result[3]}")
    return result[0]


def expected_searcher_payoff(market: OneSidedMarket) -> float:
    """Expected searcher payoff over the two builders' random values.

    A zero-value bundle bids nothing and triggers the zero-denominator rebate
    convention, so its expected payoff is exactly 0.
    """
    v3 = market.value
    if v3 == 0:
        return 0.0
    l1, l2 = market.rate1, market.rate2
    k = l1 * l2 / (l1 + l2)
    a0, a_slope, b0, b_slope = _payoff_coefficients(market)
    split = -market.delta_beta * v3

    if split <= 0:
        win1_tail = _tail_upper(a0, a_slope, 0.0, l1)
        win1_middle = _quad_middle(a0, a_slope, l2, split, 0.0)
        win2_tail = _tail_lower(b0, b_slope, split, l2)
        return k * (win1_tail + win1_middle + win2_tail)

    win1_tail = _tail_upper(a0, a_slope, split, l1)
    win2_middle = _quad_middle(b0, b_slope, -l1, 0.0, split)
    win2_tail = _tail_lower(b0, b_slope, 0.0, l2)
    return k * (win1_tail + win2_middle + win2_tail)


def monte_carlo_searcher_payoff(
    market: OneSidedMarket, n_samples: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Sample mean and standard error of the searcher payoff."""
    if market.value == 0:
        return 0.0, 0.0
    v1 = rng.exponential(1.0 / market.rate1, size=n_samples)
    v2 = rng.exponential(1.0 / market.rate2, size=n_samples)
    x = v1 - v2
    a0, a_slope, b0, b_slope = _payoff_coefficients(market)
    payoff = np.where(x >= -market.delta_beta * market.value, a0 + a_slope * x, b0 + b_slope * x)
    return float(payoff.mean()), float(payoff.std(ddof=1) / math.sqrt(n_samples))


def payoff_derivative(market: OneSidedMarket) -> float:
    """Closed-form d E[payoff] / d delta_beta; beta2 must be 0, delta_beta >= 0."""
    if market.beta2 != 0:
        raise ConfigError("the derivative is defined with beta2 fixed at 0")
    if market.delta_beta < 0:
        raise ConfigError(f"delta_beta must be >= 0, got {market.delta_beta}")
    l1, l2 = market.rate1, market.rate2
    v3, db = market.value, market.delta_beta
    k = l1 * l2 / (l1 + l2)
    decay = math.exp(-l2 * db * v3)
    return k * (
        v3 * (market.rebate1 - 1.0) / l1
        + v3 * (market.rebate1 - 1.0) / l2 * (1.0 - decay)
        - v3**2 * db * decay
        - market.rebate2 * v3 * decay / l2
    )


def sample_market(
    rng: np.random.Generator, min_beta1: float = 0.0, max_beta1: float = 1.0
) -> OneSidedMarket:
    """Random valid market with beta2 = 0 for verification grids."""
    return OneSidedMarket(
        rate1=rng.uniform(1.0, 20.0),
        rate2=rng.uniform(1.0, 20.0),
        value=rng.uniform(0.01, 0.5),
        beta1=rng.uniform(min_beta1, max_beta1),
        beta2=0.0,
        rebate1=rng.uniform(0.0, 1.0),
        rebate2=rng.uniform(0.0, 1.0),
    )


def finite_difference_derivative(market: OneSidedMarket, step: float = 1e-4) -> float:
    """Central finite difference of the expected payoff in delta_beta."""
    up = expected_searcher_payoff(replace(market, beta1=market.beta1 + step))
    down = expected_searcher_payoff(replace(market, beta1=market.beta1 - step))
    return (up - down) / (2 * step)


def verification_report(
    sign_points: int = 1000,
    mc_points: int = 50,
    mc_samples: int = 10**6,
    fd_points: int = 100,
    seed: int = 0,
) -> dict:
    """Grid verification of the closed-form market: signs, MC deltas, FD match."""
    rng = np.random.default_rng(seed)

    sign_values = []
    for _ in range(sign_points):
        sign_values.append(payoff_derivative(sample_market(rng)))
    sign_violations = sum(1 for d in sign_values if d >= 0)

    mc_rows = []
    for _ in range(mc_points):
        market = sample_market(rng)
        exact = expected_searcher_payoff(market)
        mc_mean, mc_err = monte_carlo_searcher_payoff(market, mc_samples, rng)
        z = abs(exact - mc_mean) / mc_err if mc_err > 0 else 0.0
        mc_rows.append({"quadrature": exact, "mc_mean": mc_mean, "mc_stderr": mc_err, "z": z})
    mc_failures = sum(1 for r in mc_rows if r["z"] > 3.0)

    fd_errors = []
    for _ in range(fd_points):
        market = sample_market(rng, min_beta1=0.01, max_beta1=0.99)
        closed = payoff_derivative(market)
        fd = finite_difference_derivative(market)
        fd_errors.append(abs(fd - closed) / max(abs(closed), 1e-12))
    max_fd_error = max(fd_errors) if fd_errors else 0.0

    return {
        "sign_check": {
            "points": sign_points,
            "violations": sign_violations,
            "max_derivative": max(sign_values) if sign_values else None,
        },
        "mc_check": {
            "points": mc_points,
            "samples": mc_samples,
            "failures": mc_failures,
            "max_z": max((r["z"] for r in mc_rows), default=0.0),
            "rows": mc_rows,
        },
        "fd_check": {"points": fd_points, "max_relative_error": max_fd_error},
        "passed": sign_violations == 0 and mc_failures == 0 and max_fd_error < 1e-4,
    }
