"""Closed-form regions of the binary degraded channels and the Dueck channel.

Everything here is a formula in the channel parameters; the generic bound
evaluators in ``regions`` are the numerical counterpart and the tests tie
the two together.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

from scipy.optimize import minimize_scalar

from .errors import DomainError, RegimeError
from .logging_utils import log_with_context
from .prob import DOMAIN_SLACK, binary_entropy
from .regions import RegionPoint, rate_corners

GAMMA_XATOL = 1e-10
ENVELOPE_SLACK = 1e-12
ADMIT_TOL = 1e-9

PRODUCT_REGIME = 1
FEEDBACK_REGIME = 2
COUPLED_REGIME = 3


def _unit(value: float, name: str) -> float:
    value = float(value)
    if not (-DOMAIN_SLACK <= value <= 1.0 + DOMAIN_SLACK):
        raise DomainError(f"{name}={value!r} must lie in [0, 1]")
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class ClosedFormParams:
    """Free parameters of the closed-form regions, each in [0, 1].

    ``p`` and ``r`` parametrize the degraded binary regions and the Dueck
    outer bound (with ``q_aux`` and ``beta``); ``beta`` and ``gamma_ts`` the
    Dueck inner bound.
    """

    p: float = 0.5
    r: float = 1.0
    q_aux: float = 0.0
    beta: float = 0.0
    gamma_ts: float = 1.0

    def __post_init__(self) -> None:
        for name in ("p", "r", "q_aux", "beta", "gamma_ts"):
            object.__setattr__(self, name, _unit(getattr(self, name), name))


def corollary1_region(q: float, gamma: float, p: float, r: float) -> RegionPoint:
    q, gamma, p, r = _unit(q, "q"), _unit(gamma, "gamma"), _unit(p, "p"), _unit(r, "r")
    rate = q * binary_entropy(p)
    return RegionPoint(
        rate * r,
        gamma * rate * (1.0 - r),
        (1.0 - p) * min(q, 1.0 - q),
        (1.0 - p) * min(gamma * q, 1.0 - gamma * q),
        "corollary1",
    )


def corollary2_region(q: float, gamma: float, p: float, r: float) -> RegionPoint:
    """Corner of the flipping BC region; D1 and D2 now pull ``p`` in opposite directions."""
    q, gamma, p, r = _unit(q, "q"), _unit(gamma, "gamma"), _unit(p, "p"), _unit(r, "r")
    rate = q * binary_entropy(p)
    return RegionPoint(
        rate * r,
        gamma * rate * (1.0 - r),
        (1.0 - p) * min(q * (1.0 - gamma), 1.0 - q),
        p * q * min(gamma, 1.0 - gamma),
        "corollary2",
    )


def corollary1_admits(q: float, gamma: float, point: RegionPoint, *, tol: float = ADMIT_TOL) -> bool:
    """Whether ``point`` lies in the multiplicative BC region (up to ``tol``).

    The distortions force P(X=1) >= p_min; the rates then need
    R1/q + R2/(gamma q) <= max over p >= p_min of H_b(p).
    """
    q, gamma = _unit(q, "q"), _unit(gamma, "gamma")
    d_scale = (min(q, 1.0 - q), min(gamma * q, 1.0 - gamma * q))
    p_min = 0.0
    for distortion, scale in zip((point.d1, point.d2), d_scale):
        if scale > 0.0:
            p_min = max(p_min, 1.0 - distortion / scale)
    p_min = min(p_min, 1.0)
    h_max = 1.0 if p_min <= 0.5 else binary_entropy(p_min)

    load = 0.0
    for rate, capacity in ((point.r1, q), (point.r2, gamma * q)):
        if capacity <= 0.0:
            if rate > tol:
                return False
            continue
        load += rate / capacity
    return load <= h_max + tol


def _probabilities(p_s1: float) -> Tuple[float, float]:
    p1 = _unit(p_s1, "P_S(1)")
    return 1.0 - p1, p1


def dueck_regime(p_s1: float) -> int:
    """1 when P_S(1) <= P_S(0); 2 when P_S(1) <= P_S(0)(1 + P_S(0)); 3 otherwise."""
    p0, p1 = _probabilities(p_s1)
    if p1 <= p0:
        return PRODUCT_REGIME
    if p1 <= p0 * (1.0 + p0):
        return FEEDBACK_REGIME
    return COUPLED_REGIME


def dueck_distortion_bound(p_s1: float, beta: float) -> float:
    """Per-receiver distortion of the optimal estimator when P(X1 != X2) = beta.

    Affine in beta.
    """
    p0, p1 = _probabilities(p_s1)
    beta = _unit(beta, "beta")
    equal = 0.5 * (1.0 - beta) * min(p1, p0 * (1.0 + p0))
    differ = 0.5 * beta * p1 * (p0 + min(p0, p1))
    return equal + differ


def dueck_min_distortion(p_s1: float) -> float:
    return min(dueck_distortion_bound(p_s1, 0.0), dueck_distortion_bound(p_s1, 1.0))


def dueck_saturation_distortion(p_s1: float) -> float:
    return dueck_distortion_bound(p_s1, 0.5)


def dueck_feedback_probability(p_s1: float, x_equal: bool, z: int) -> float:
    """P(Z = z | X1, X2) with z = 2 y'1 + y'2."""
    p0, p1 = _probabilities(p_s1)
    if z not in range(4):
        raise DomainError(f"feedback symbol must be in 0..3, got {z}")
    if x_equal:
        return ((1.0 + p0 * p0) / 2.0, p0 * p1 / 2.0, p0 * p1 / 2.0, p1 * p1 / 2.0)[z]
    return (p0, p1 / 2.0, p1 / 2.0, 0.0)[z]


def dueck_conditional_distortion(p_s1: float, k: int, x_equal: bool, z: int) -> float:
    p0, p1 = _probabilities(p_s1)
    if k not in (1, 2):
        raise DomainError(f"receiver index must be 1 or 2, got {k}")
    if z not in range(4):
        raise DomainError(f"feedback symbol must be in 0..3, got {z}")
    if z == 3:
        return 0.0
    if z in (1, 2):
        # the receiver whose y' is 1 knows its state; the other learns nothing when x1 != x2
        own_is_one = (k == 1 and z == 2) or (k == 2 and z == 1)
        if own_is_one or x_equal:
            return 0.0
        return min(p0, p1)
    if x_equal:
        return 0.5 * min(p0 * (1.0 + p0), p1) / dueck_feedback_probability(p_s1, True, 0)
    if p0 <= 0.0:
        return 0.0
    return 0.5 * p0 * min(1.0 + p0, p1) / p0


@dataclass(frozen=True)
class DueckOuterBound:
    r1_max: float
    r2_max: float
    distortion: float

    @property
    def sum_rate(self) -> float:
        return self.r1_max + self.r2_max

    def corners(self) -> List[RegionPoint]:
        return [RegionPoint(self.r1_max, self.r2_max, self.distortion, self.distortion, "dueck_outer")]


def dueck_outer(p_s1: float, params: ClosedFormParams) -> DueckOuterBound:
    _, p1 = _probabilities(p_s1)
    feedback_gain = p1 * p1 * binary_entropy(params.beta)
    return DueckOuterBound(
        r1_max=min(1.0 - params.p, params.q_aux + feedback_gain),
        r2_max=min(params.p + feedback_gain, 1.0 - params.q_aux),
        distortion=dueck_distortion_bound(p_s1, params.beta),
    )


def dueck_feasible_betas(p_s1: float, distortion: float) -> Optional[Tuple[float, float]]:
    base = dueck_distortion_bound(p_s1, 0.0)
    slope = dueck_distortion_bound(p_s1, 1.0) - base
    budget = distortion - base
    if abs(slope) <= ENVELOPE_SLACK:
        return (0.0, 1.0) if budget >= -ENVELOPE_SLACK else None
    edge = min(max(budget / slope, 0.0), 1.0)
    if slope > 0.0:
        return (0.0, edge) if budget >= -ENVELOPE_SLACK else None
    return (edge, 1.0) if budget >= slope - ENVELOPE_SLACK else None


def _best_beta(interval: Tuple[float, float]) -> float:
    # both sum-rate expressions are concave in beta and peak at 1/2
    low, high = interval
    return min(max(0.5, low), high)


def dueck_outer_sum_rate(p_s1: float, distortion: float) -> Optional[float]:
    interval = dueck_feasible_betas(p_s1, distortion)
    if interval is None:
        return None
    _, p1 = _probabilities(p_s1)
    return 1.0 + p1 * p1 * binary_entropy(_best_beta(interval))


def _coupled_sum_rate(p_s1: float, share: float, gamma_ts: float) -> float:
    """1 + gamma P_S(1) (H_b(share / gamma) - P_S(0)), with 0 H_b(0/0) = 0."""
    p0, p1 = _probabilities(p_s1)
    if gamma_ts <= 0.0:
        return 1.0
    ratio = min(share / gamma_ts, 1.0)
    return 1.0 + gamma_ts * p1 * (binary_entropy(ratio) - p0)


def dueck_best_gamma(p_s1: float, share: float, *, xatol: float = GAMMA_XATOL) -> Tuple[float, float]:
    """Maximize the coupled sum-rate over gamma in [share, 1]; returns (gamma, sum_rate)."""
    share = _unit(share, "share")
    if share <= 0.0:
        return 0.0, 1.0
    candidates = [(share, _coupled_sum_rate(p_s1, share, share)), (1.0, _coupled_sum_rate(p_s1, share, 1.0))]
    if share < 1.0:
        result = minimize_scalar(
            lambda g: -_coupled_sum_rate(p_s1, share, g),
            bounds=(share, 1.0),
            method="bounded",
            options={"xatol": xatol},
        )
        candidates.append((float(result.x), -float(result.fun)))
    return max(candidates, key=lambda item: item[1])


@dataclass(frozen=True)
class DueckInnerReport:
    regime: int
    points: Tuple[RegionPoint, ...]
    d_min: float
    sum_rate: float
    distortion: float

    @property
    def product_form(self) -> bool:
        return self.regime == PRODUCT_REGIME

    def describe(self) -> str:
        if self.product_form:
            return f"regime 1: CD = C x D with D_min = {self.d_min:.9g}"
        return f"regime {self.regime}: sum-rate {self.sum_rate:.9g} at D = {self.distortion:.9g} (D_min = {self.d_min:.9g})"


def dueck_inner(p_s1: float, params: ClosedFormParams) -> DueckInnerReport:
    regime = dueck_regime(p_s1)
    _, p1 = _probabilities(p_s1)
    d_min = dueck_min_distortion(p_s1)
    if regime == PRODUCT_REGIME:
        sum_rate = 1.0 + p1 * p1
        distortion = d_min
    else:
        share = params.beta if regime == COUPLED_REGIME else 1.0 - params.beta
        if share > params.gamma_ts + DOMAIN_SLACK:
            constraint = "beta <= gamma_ts" if regime == COUPLED_REGIME else "1 - beta <= gamma_ts"
            raise RegimeError(
                f"regime {regime} requires {constraint}; got beta={params.beta}, gamma_ts={params.gamma_ts}"
            )
        sum_rate = _coupled_sum_rate(p_s1, share, params.gamma_ts)
        distortion = dueck_distortion_bound(p_s1, params.beta)
    points = tuple(rate_corners(1.0, 1.0, sum_rate, distortion, distortion, "dueck_inner"))
    log_with_context(
        logging.DEBUG,
        "Evaluated Dueck inner bound",
        p_s1=p_s1,
        regime=regime,
        sum_rate=sum_rate,
        distortion=distortion,
    )
    return DueckInnerReport(regime, points, d_min, sum_rate, distortion)


def dueck_inner_sum_rate(p_s1: float, distortion: float, *, xatol: float = GAMMA_XATOL) -> Optional[float]:
    interval = dueck_feasible_betas(p_s1, distortion)
    if interval is None:
        return None
    regime = dueck_regime(p_s1)
    if regime == PRODUCT_REGIME:
        _, p1 = _probabilities(p_s1)
        return 1.0 + p1 * p1
    beta = _best_beta(interval)
    share = beta if regime == COUPLED_REGIME else 1.0 - beta
    _, value = dueck_best_gamma(p_s1, share, xatol=xatol)
    return value


def stationary_ratio(p_s1: float) -> float:
    """share / gamma at which the coupled sum-rate stops growing in gamma: 1 - 2^(-P_S(0))."""
    p0, _ = _probabilities(p_s1)
    return 1.0 - math.pow(2.0, -p0)
