"""Symbolwise state estimation from (X, Z).

The optimal estimator only depends on the posterior P(S_k | X = x, Z = z),
which the channel fixes on its own because states are independent of inputs.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, List, Optional, Tuple

import numpy as np

from .channels import DistortionMeasure, SdmbcSpec
from .config import DEFAULT_BRUTE_FORCE_LIMIT
from .errors import DomainError, SearchSpaceError, ShapeMismatchError, UnreachablePairError
from .exports import CSV_SIGNIFICANT_DIGITS
from .logging_utils import channel_log_context, log_with_context
from .prob import Pmf

TIE_TOL = 1e-12
ENUMERATION_CHUNK = 1 << 15


@dataclass(frozen=True, eq=False)
class EstimatorTable:
    """Decisions s^_k(x, z) and the conditional distortion d'_k(x, z) they achieve.

    Arrays have shape (2, |X|, |Z|); index 0 is receiver 1.
    """

    decisions: np.ndarray
    conditional_distortion: np.ndarray
    reachable: np.ndarray

    def __post_init__(self) -> None:
        decisions = np.array(self.decisions, dtype=int)
        distortion = np.array(self.conditional_distortion, dtype=float)
        reachable = np.array(self.reachable, dtype=bool)
        if decisions.ndim != 3 or decisions.shape[0] != 2:
            raise ShapeMismatchError(f"decisions must have shape (2, |X|, |Z|), got {decisions.shape}")
        if distortion.shape != decisions.shape:
            raise ShapeMismatchError("conditional distortions must match the decision table")
        if reachable.shape != decisions.shape[1:]:
            raise ShapeMismatchError("reachability mask must have shape (|X|, |Z|)")
        if np.any(decisions < 0) or np.any(distortion < 0):
            raise DomainError("estimator entries must be non-negative")
        for name, array in (("decisions", decisions), ("conditional_distortion", distortion), ("reachable", reachable)):
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    def decision(self, k: int, x: int, z: int) -> int:
        return int(self.decisions[k - 1, x, z])

    def receiver(self, k: int) -> np.ndarray:
        if k not in (1, 2):
            raise DomainError(f"receiver index must be 1 or 2, got {k}")
        return self.decisions[k - 1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EstimatorTable):
            return NotImplemented
        return (
            bool(np.array_equal(self.decisions, other.decisions))
            and bool(np.array_equal(self.reachable, other.reachable))
            and bool(np.allclose(self.conditional_distortion, other.conditional_distortion, rtol=0.0, atol=TIE_TOL))
        )

    __hash__ = None  # type: ignore[assignment]


def _measure(spec: SdmbcSpec, d: Optional[DistortionMeasure]) -> DistortionMeasure:
    measure = spec.distortion if d is None else d
    assert measure is not None
    if (measure.d1.shape[0], measure.d2.shape[0]) != (spec.s1_size, spec.s2_size):
        raise ShapeMismatchError("distortion rows must match the state alphabets")
    return measure


def _posteriors(spec: SdmbcSpec, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """(P(s | x, z) as (X, S_k, Z), P(z | x) as (X, Z)); unreachable columns are zero."""
    joint = spec.state_feedback_table(k)
    mass = joint.sum(axis=1)
    posterior = np.divide(joint, mass[:, None, :], out=np.zeros_like(joint), where=mass[:, None, :] > 0.0)
    return posterior, mass


def posterior_state(spec: SdmbcSpec, k: int, x: int, z: int) -> Pmf:
    if not (0 <= x < spec.x_size and 0 <= z < spec.z_size):
        raise DomainError(f"pair (x={x}, z={z}) is outside the channel alphabets")
    posterior, mass = _posteriors(spec, k)
    if mass[x, z] <= 0.0:
        raise UnreachablePairError(k, x, z)
    return Pmf(posterior[x, :, z])


def _decide(expected_cost: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Lowest-index argmin along the last axis, treating costs within TIE_TOL as ties."""
    best = expected_cost.min(axis=-1)
    choice = np.argmax(expected_cost <= best[..., None] + TIE_TOL, axis=-1)
    return choice, best


def optimal_estimator(spec: SdmbcSpec, d: Optional[DistortionMeasure] = None) -> EstimatorTable:
    measure = _measure(spec, d)
    decisions = np.zeros((2, spec.x_size, spec.z_size), dtype=int)
    distortion = np.zeros((2, spec.x_size, spec.z_size))
    reachable = np.zeros((spec.x_size, spec.z_size), dtype=bool)
    for k in (1, 2):
        posterior, mass = _posteriors(spec, k)
        reachable = mass > 0.0
        # cost[x, z, s^] = sum_s P(s | x, z) d_k(s, s^)
        cost = np.einsum("xsz,st->xzt", posterior, measure.matrix(k))
        choice, best = _decide(cost)
        decisions[k - 1] = np.where(reachable, choice, 0)
        distortion[k - 1] = np.where(reachable, best, 0.0)
    log_with_context(
        logging.DEBUG,
        "Computed optimal estimator",
        **channel_log_context(spec),
        reachable_pairs=int(reachable.sum()),
    )
    return EstimatorTable(decisions, distortion, reachable)


def prior_estimator(spec: SdmbcSpec, d: Optional[DistortionMeasure] = None) -> EstimatorTable:
    """Estimator that ignores the feedback: one decision from the prior P(S_k)."""
    measure = _measure(spec, d)
    decisions = np.zeros((2, spec.x_size, spec.z_size), dtype=int)
    distortion = np.zeros((2, spec.x_size, spec.z_size))
    reachable = np.zeros((spec.x_size, spec.z_size), dtype=bool)
    for k in (1, 2):
        prior = spec.state_law.probs.sum(axis=1 if k == 1 else 0)
        choice, _ = _decide(prior @ measure.matrix(k))
        posterior, mass = _posteriors(spec, k)
        reachable = mass > 0.0
        decisions[k - 1] = int(choice)
        distortion[k - 1] = np.where(reachable, posterior.transpose(0, 2, 1) @ measure.matrix(k)[:, int(choice)], 0.0)
    return EstimatorTable(decisions, distortion, reachable)


def per_input_distortion(
    spec: SdmbcSpec,
    estimator: EstimatorTable,
    d: Optional[DistortionMeasure] = None,
) -> np.ndarray:
    """c_k(x) = E[d_k(S_k, s^_k(x, Z)) | X = x], shape (2, |X|).

    Expected distortion is linear in the input law: D_k = sum_x P_X(x) c_k(x).
    """
    measure = _measure(spec, d)
    if estimator.decisions.shape[1:] != (spec.x_size, spec.z_size):
        raise ShapeMismatchError("estimator does not match the channel's (X, Z) alphabets")
    costs = np.zeros((2, spec.x_size))
    for k in (1, 2):
        matrix = measure.matrix(k)
        decisions = estimator.receiver(k)
        if np.any(decisions >= matrix.shape[1]):
            raise ShapeMismatchError(f"estimator for receiver {k} uses symbols outside the reconstruction alphabet")
        joint = spec.state_feedback_table(k)
        # penalty[x, s, z] = d_k(s, s^_k(x, z))
        penalty = matrix[:, decisions].transpose(1, 0, 2)
        costs[k - 1] = np.sum(joint * penalty, axis=(1, 2))
    return costs


def _input_vector(spec: SdmbcSpec, input_law: Pmf) -> np.ndarray:
    law = input_law.flat()
    if law.size != spec.x_size:
        raise ShapeMismatchError(f"input law has {law.size} symbols, channel input has {spec.x_size}")
    return law


def expected_distortion(
    spec: SdmbcSpec,
    input_law: Pmf,
    estimator: EstimatorTable,
    d: Optional[DistortionMeasure] = None,
) -> Tuple[float, float]:
    costs = per_input_distortion(spec, estimator, d) @ _input_vector(spec, input_law)
    return float(costs[0]), float(costs[1])


def brute_force_estimator(
    spec: SdmbcSpec,
    input_law: Pmf,
    d: Optional[DistortionMeasure] = None,
    *,
    limit: int = DEFAULT_BRUTE_FORCE_LIMIT,
) -> EstimatorTable:
    """Enumerate every deterministic table (x, z) -> s^_k and keep the cheapest.

    Tables are visited in mixed-radix order so ties resolve to the first one.
    """
    measure = _measure(spec, d)
    law = _input_vector(spec, input_law)
    cells = spec.x_size * spec.z_size
    for k in (1, 2):
        count = measure.matrix(k).shape[1] ** cells
        if count > limit:
            raise SearchSpaceError(f"receiver {k} has {count} candidate estimators, limit is {limit}")

    decisions = np.zeros((2, spec.x_size, spec.z_size), dtype=int)
    distortion = np.zeros((2, spec.x_size, spec.z_size))
    reachable = np.zeros((spec.x_size, spec.z_size), dtype=bool)
    for k in (1, 2):
        matrix = measure.matrix(k)
        radix = matrix.shape[1]
        joint = spec.state_feedback_table(k)
        # weight[cell, s^] = P_X(x) sum_s P(s, z | x) d_k(s, s^), cell = x * |Z| + z
        weight = np.einsum("x,xsz,st->xzt", law, joint, matrix).reshape(cells, radix)
        powers = radix ** np.arange(cells - 1, -1, -1, dtype=np.int64)
        best_cost = np.inf
        best_index = 0
        total = radix**cells
        for start in range(0, total, ENUMERATION_CHUNK):
            index = np.arange(start, min(start + ENUMERATION_CHUNK, total), dtype=np.int64)
            digits = (index[:, None] // powers[None, :]) % radix
            costs = weight[np.arange(cells)[None, :], digits].sum(axis=1)
            position = int(np.argmin(costs))
            if costs[position] < best_cost - TIE_TOL:
                best_cost = float(costs[position])
                best_index = int(index[position])
        table = ((best_index // powers) % radix).reshape(spec.x_size, spec.z_size)

        posterior, mass = _posteriors(spec, k)
        reachable = mass > 0.0
        achieved = np.take_along_axis(
            np.einsum("xsz,st->xzt", posterior, matrix), table[..., None], axis=-1
        )[..., 0]
        decisions[k - 1] = table
        distortion[k - 1] = np.where(reachable, achieved, 0.0)
    log_with_context(
        logging.DEBUG,
        "Brute-force estimator search finished",
        **channel_log_context(spec),
        cells=cells,
    )
    return EstimatorTable(decisions, distortion, reachable)


ESTIMATOR_COLUMNS = ("k", "x", "x_label", "z", "z_label", "shat", "conditional_distortion", "reachable", "posterior")


def estimator_rows(spec: SdmbcSpec, estimator: EstimatorTable) -> List[Tuple[Any, ...]]:
    """One row per (k, x, z) with the decision, d'_k(x, z) and the posterior on S_k."""
    rows: List[Tuple[Any, ...]] = []
    for k in (1, 2):
        posterior, _ = _posteriors(spec, k)
        for x in range(spec.x_size):
            for z in range(spec.z_size):
                reachable = bool(estimator.reachable[x, z])
                posterior_text = (
                    " ".join(f"{value:.{CSV_SIGNIFICANT_DIGITS}g}" for value in posterior[x, :, z]) if reachable else ""
                )
                rows.append(
                    (
                        k,
                        x,
                        spec.label("X", x),
                        z,
                        spec.label("Z", z),
                        estimator.decision(k, x, z),
                        float(estimator.conditional_distortion[k - 1, x, z]),
                        reachable,
                        posterior_text,
                    )
                )
    return rows
