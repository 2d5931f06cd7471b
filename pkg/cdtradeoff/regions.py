"""Rate-distortion region bounds evaluated from channel laws.

Rates are in bits per channel use. Every bound is paired with the distortions
of the optimal symbolwise estimator under the input law it was evaluated at.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .auxiliary import (
    DegradedAuxiliary,
    InnerAuxiliary,
    OuterAuxiliary,
    V_NAMES,
    check_inner_aux,
    degraded_laws,
    dueck_input_law,
    outer_aux_grid,
)
from .channels import (
    DUECK,
    MULTIPLICATIVE,
    DistortionMeasure,
    SdmbcSpec,
    build_dueck_bc,
    build_multiplicative_bc,
    check_physically_degraded,
)
from .config import DEFAULT_CMI_CLAMP_TOL, DEFAULT_MAX_GRID_POINTS
from .errors import DomainError, ShapeMismatchError
from .estimation import expected_distortion, optimal_estimator, per_input_distortion, prior_estimator
from .logging_utils import channel_log_context, log_with_context
from .parallel import ordered_map
from .prob import LabeledJoint, Pmf, cond_mutual_information, extend_joint

NEGATIVE_SLACK = 1e-12
REGION_COLUMNS = ("R1", "R2", "D1", "D2", "source")


@dataclass(frozen=True)
class RegionPoint:
    r1: float
    r2: float
    d1: float
    d2: float
    source: str = ""

    def __post_init__(self) -> None:
        for name in ("r1", "r2", "d1", "d2"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < -NEGATIVE_SLACK:
                raise DomainError(f"region coordinate {name}={value!r} must be finite and non-negative")
            object.__setattr__(self, name, max(value, 0.0))

    def coordinates(self) -> Tuple[float, float, float, float]:
        return self.r1, self.r2, self.d1, self.d2

    def as_row(self) -> Tuple[float, float, float, float, str]:
        return self.r1, self.r2, self.d1, self.d2, self.source

    @property
    def sum_rate(self) -> float:
        return self.r1 + self.r2


def dominates(a: RegionPoint, b: RegionPoint) -> bool:
    at_least = a.r1 >= b.r1 and a.r2 >= b.r2 and a.d1 <= b.d1 and a.d2 <= b.d2
    strictly = a.r1 > b.r1 or a.r2 > b.r2 or a.d1 < b.d1 or a.d2 < b.d2
    return at_least and strictly


@dataclass(frozen=True)
class ParetoSet:
    points: Tuple[RegionPoint, ...] = ()

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[RegionPoint]:
        return iter(self.points)

    def rows(self) -> List[Tuple[float, float, float, float, str]]:
        return [point.as_row() for point in self.points]

    def coordinates(self) -> np.ndarray:
        return np.array([point.coordinates() for point in self.points]).reshape(-1, 4)


PARETO_CHUNK = 64


def pareto_frontier(points: Iterable[RegionPoint]) -> ParetoSet:
    """Non-dominated points ordered by (-R1, -R2, D1, D2); exact duplicates kept once."""
    candidates = list(points)
    if not candidates:
        return ParetoSet()
    # minimisation form: (-R1, -R2, D1, D2)
    costs = np.array([(-p.r1, -p.r2, p.d1, p.d2) for p in candidates])
    order = np.lexsort(costs.T[::-1])
    costs = costs[order]
    keep_unique = np.ones(len(costs), dtype=bool)
    keep_unique[1:] = np.any(costs[1:] != costs[:-1], axis=1)
    order = order[keep_unique]
    costs = costs[keep_unique]

    dominated = np.zeros(len(costs), dtype=bool)
    for start in range(0, len(costs), PARETO_CHUNK):
        block = costs[start : start + PARETO_CHUNK]
        no_worse = np.all(costs[None, :, :] <= block[:, None, :], axis=2)
        better = np.any(costs[None, :, :] < block[:, None, :], axis=2)
        dominated[start : start + PARETO_CHUNK] = np.any(no_worse & better, axis=1)
    return ParetoSet(tuple(candidates[i] for i in order[~dominated]))


def rate_corners(
    r1_max: float,
    r2_max: float,
    sum_max: float,
    d1: float,
    d2: float,
    source: str = "",
) -> List[RegionPoint]:
    a, b, s = max(r1_max, 0.0), max(r2_max, 0.0), max(sum_max, 0.0)
    first = min(a, s)
    corner_a = (first, max(0.0, min(b, s - first)))
    second = min(b, s)
    corner_b = (max(0.0, min(a, s - second)), second)
    corners = [RegionPoint(corner_a[0], corner_a[1], d1, d2, source)]
    if corner_b != corner_a:
        corners.append(RegionPoint(corner_b[0], corner_b[1], d1, d2, source))
    return corners


def _distortion_costs(spec: SdmbcSpec, d: Optional[DistortionMeasure]) -> np.ndarray:
    return per_input_distortion(spec, optimal_estimator(spec, d), d)


def degraded_rates(spec: SdmbcSpec, aux: DegradedAuxiliary, *, clamp_tol: float = DEFAULT_CMI_CLAMP_TOL) -> Tuple[float, float]:
    """(I(U; Y1 | S1), I(X; Y2 | S2, U))."""
    joint = spec.joint(aux.law)
    r1 = cond_mutual_information(joint, ("U",), ("Y1",), ("S1",), clamp_tol=clamp_tol)
    r2 = cond_mutual_information(joint, ("X",), ("Y2",), ("S2", "U"), clamp_tol=clamp_tol)
    return r1, r2


def degraded_region(
    spec: SdmbcSpec,
    d: Optional[DistortionMeasure] = None,
    u_card: Optional[int] = None,
    grid_res: int = 20,
    *,
    max_points: int = DEFAULT_MAX_GRID_POINTS,
    threads: int = 1,
) -> ParetoSet:
    """Pareto frontier of the degraded-channel region over a simplex grid of P_{UX}.

    ``u_card`` defaults to |X| + 1.
    """
    u_card = spec.x_size + 1 if u_card is None else u_card
    if u_card < 1:
        raise DomainError(f"u_card must be positive, got {u_card}")
    if not check_physically_degraded(spec):
        log_with_context(
            logging.WARNING,
            "Degraded region evaluated on a channel that is not physically degraded",
            **channel_log_context(spec),
        )
    costs = _distortion_costs(spec, d)
    laws = list(degraded_laws(u_card, spec.x_size, grid_res, max_points=max_points))

    def evaluate(aux: DegradedAuxiliary) -> RegionPoint:
        r1, r2 = degraded_rates(spec, aux)
        d1, d2 = costs @ aux.law.table(("X",))
        return RegionPoint(r1, r2, d1, d2, "degraded")

    frontier = pareto_frontier(ordered_map(evaluate, laws, threads))
    log_with_context(
        logging.INFO,
        "Degraded region sweep finished",
        **channel_log_context(spec),
        u_card=u_card,
        grid_res=grid_res,
        evaluated=len(laws),
        frontier=len(frontier),
    )
    return frontier


@dataclass(frozen=True)
class OuterBoundEvaluation:
    r1_bound: float
    sum_bound_u1: float
    sum_bound_u2: float
    r2_bound: float
    d1: float
    d2: float

    @property
    def sum_bound(self) -> float:
        return min(self.sum_bound_u1, self.sum_bound_u2)

    def corners(self, source: str = "thm1") -> List[RegionPoint]:
        return rate_corners(self.r1_bound, self.r2_bound, self.sum_bound, self.d1, self.d2, source)


def _outer_bounds(
    spec: SdmbcSpec,
    aux: OuterAuxiliary,
    costs: np.ndarray,
    clamp_tol: float,
) -> OuterBoundEvaluation:
    if aux.input_law.support_size != spec.x_size:
        raise ShapeMismatchError(f"input law has {aux.input_law.support_size} symbols, channel input has {spec.x_size}")
    joint = spec.joint(aux.joint())

    def mi(a: Tuple[str, ...], b: Tuple[str, ...], c: Tuple[str, ...]) -> float:
        return cond_mutual_information(joint, a, b, c, clamp_tol=clamp_tol)

    outputs = ("Y1", "Y2")
    states = ("S1", "S2")
    d1, d2 = costs @ aux.input_law.flat()
    return OuterBoundEvaluation(
        r1_bound=mi(("U1",), ("Y1",), ("S1",)),
        sum_bound_u1=mi(("X",), outputs, states + ("U1",)),
        sum_bound_u2=mi(("X",), outputs, states + ("U2",)),
        r2_bound=mi(("U2",), ("Y2",), ("S2",)),
        d1=float(d1),
        d2=float(d2),
    )


def theorem1_outer(
    spec: SdmbcSpec,
    d: Optional[DistortionMeasure],
    aux: OuterAuxiliary,
    *,
    clamp_tol: float = DEFAULT_CMI_CLAMP_TOL,
) -> OuterBoundEvaluation:
    return _outer_bounds(spec, aux, _distortion_costs(spec, d), clamp_tol)


def theorem1_envelope(
    spec: SdmbcSpec,
    d: Optional[DistortionMeasure] = None,
    u_card: int = 2,
    grid_res: int = 2,
    *,
    max_points: int = DEFAULT_MAX_GRID_POINTS,
    threads: int = 1,
) -> ParetoSet:
    choices = list(outer_aux_grid(spec.x_size, u_card, grid_res, max_points=max_points))
    costs = _distortion_costs(spec, d)

    def evaluate(aux: OuterAuxiliary) -> List[RegionPoint]:
        return _outer_bounds(spec, aux, costs, DEFAULT_CMI_CLAMP_TOL).corners()

    corners = [point for batch in ordered_map(evaluate, choices, threads) for point in batch]
    frontier = pareto_frontier(corners)
    log_with_context(
        logging.INFO,
        "Outer-bound envelope finished",
        **channel_log_context(spec),
        evaluated=len(choices),
        frontier=len(frontier),
    )
    return frontier


@dataclass(frozen=True)
class InnerBoundEvaluation:
    r1_bound: float
    r2_bound: float
    sum_bound: float
    d1: float
    d2: float
    terms: Dict[str, float] = field(default_factory=dict, compare=False)

    def corners(self, source: str = "prop3") -> List[RegionPoint]:
        return rate_corners(self.r1_bound, self.r2_bound, self.sum_bound, self.d1, self.d2, source)


def prop3_inner(
    spec: SdmbcSpec,
    d: Optional[DistortionMeasure],
    aux: InnerAuxiliary,
    *,
    clamp_tol: float = DEFAULT_CMI_CLAMP_TOL,
) -> InnerBoundEvaluation:
    """Evaluate the feedback superposition inner bound at the given auxiliaries.

    Each rate bound is clamped at 0 from below.
    """
    check_inner_aux(spec, aux)
    joint: LabeledJoint = extend_joint(spec.joint(aux.law), aux.v_kernel, ("U0", "U1", "U2", "Z"), V_NAMES)

    def mi(a: Tuple[str, ...], b: Tuple[str, ...], c: Tuple[str, ...] = ()) -> float:
        return cond_mutual_information(joint, a, b, c, clamp_tol=clamp_tol)

    all_u_z = ("U0", "U1", "U2", "Z")
    terms = {
        "I(U0,U1;Y1,V1|S1)": mi(("U0", "U1"), ("Y1", "V1"), ("S1",)),
        "I(U0,U1,U2,Z;V0,V1|S1,Y1)": mi(all_u_z, ("V0", "V1"), ("S1", "Y1")),
        "I(U0,U2;Y2,V2|S2)": mi(("U0", "U2"), ("Y2", "V2"), ("S2",)),
        "I(U0,U1,U2,Z;V0,V2|S2,Y2)": mi(all_u_z, ("V0", "V2"), ("S2", "Y2")),
        "I(U1;Y1,V1|U0,S1)": mi(("U1",), ("Y1", "V1"), ("U0", "S1")),
        "I(U2;Y2,V2|U0,S2)": mi(("U2",), ("Y2", "V2"), ("U0", "S2")),
        "I(U0;Y1,V1|S1)": mi(("U0",), ("Y1", "V1"), ("S1",)),
        "I(U0;Y2,V2|S2)": mi(("U0",), ("Y2", "V2"), ("S2",)),
        "I(U1;U2|U0)": mi(("U1",), ("U2",), ("U0",)),
        "I(U0,U1,U2,Z;V1|V0,S1,Y1)": mi(all_u_z, ("V1",), ("V0", "S1", "Y1")),
        "I(U0,U1,U2,Z;V2|V0,S2,Y2)": mi(all_u_z, ("V2",), ("V0", "S2", "Y2")),
        "I(U0,U1,U2,Z;V0|S1,Y1)": mi(all_u_z, ("V0",), ("S1", "Y1")),
        "I(U0,U1,U2,Z;V0|S2,Y2)": mi(all_u_z, ("V0",), ("S2", "Y2")),
    }
    r1 = terms["I(U0,U1;Y1,V1|S1)"] - terms["I(U0,U1,U2,Z;V0,V1|S1,Y1)"]
    r2 = terms["I(U0,U2;Y2,V2|S2)"] - terms["I(U0,U1,U2,Z;V0,V2|S2,Y2)"]
    total = (
        terms["I(U1;Y1,V1|U0,S1)"]
        + terms["I(U2;Y2,V2|U0,S2)"]
        + min(terms["I(U0;Y1,V1|S1)"], terms["I(U0;Y2,V2|S2)"])
        - terms["I(U1;U2|U0)"]
        - terms["I(U0,U1,U2,Z;V1|V0,S1,Y1)"]
        - terms["I(U0,U1,U2,Z;V2|V0,S2,Y2)"]
        - max(terms["I(U0,U1,U2,Z;V0|S1,Y1)"], terms["I(U0,U1,U2,Z;V0|S2,Y2)"])
    )
    d1, d2 = expected_distortion(spec, aux.input_law, optimal_estimator(spec, d), d)
    log_with_context(
        logging.DEBUG,
        "Evaluated inner bound",
        **channel_log_context(spec),
        r1=r1,
        r2=r2,
        sum_rate=total,
    )
    return InnerBoundEvaluation(max(r1, 0.0), max(r2, 0.0), max(total, 0.0), d1, d2, terms)


@dataclass(frozen=True)
class ResourceSplitting:
    sensing: RegionPoint
    communication: Tuple[RegionPoint, ...]

    def segment(self, steps: int = 10) -> List[RegionPoint]:
        points: List[RegionPoint] = []
        for endpoint in self.communication:
            for i in range(steps + 1):
                share = i / steps
                points.append(baseline_time_sharing([self.sensing, endpoint], [1.0 - share, share]))
        return points

    def frontier(self, steps: int = 10) -> ParetoSet:
        return pareto_frontier(self.segment(steps))


def baseline_resource_splitting(
    kind: str,
    *,
    q: float = 0.6,
    gamma: float = 0.5,
    ps1: float = 0.75,
    r_values: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0),
) -> ResourceSplitting:
    """Sensing mode without messages versus communication mode that ignores the feedback.

    Distortions come from the generic estimators: the optimal one for sensing and
    the prior-only one for communication.
    """
    if kind == MULTIPLICATIVE:
        spec = build_multiplicative_bc(q, gamma)
        sensing_law = Pmf.point_mass(1, 2)
        sensing = expected_distortion(spec, sensing_law, optimal_estimator(spec))
        comm = expected_distortion(spec, Pmf.uniform(2), prior_estimator(spec))
        communication = tuple(
            RegionPoint(q * r, gamma * q * (1.0 - r), comm[0], comm[1], "resource_splitting") for r in r_values
        )
        return ResourceSplitting(RegionPoint(0.0, 0.0, sensing[0], sensing[1], "resource_splitting"), communication)
    if kind == DUECK:
        spec = build_dueck_bc(Pmf.bernoulli(ps1))
        estimator = optimal_estimator(spec)
        # X1, X2 either always equal or always different, whichever senses better; X0 sends uncoded bits
        sensing = min(
            (expected_distortion(spec, dueck_input_law(beta), estimator) for beta in (0.0, 1.0)),
            key=sum,
        )
        comm = expected_distortion(spec, Pmf.uniform(8), prior_estimator(spec))
        communication = tuple(
            RegionPoint(r, 1.0 - r, comm[0], comm[1], "resource_splitting") for r in r_values
        )
        return ResourceSplitting(RegionPoint(0.0, 0.0, sensing[0], sensing[1], "resource_splitting"), communication)
    raise DomainError(f"resource splitting is defined for {MULTIPLICATIVE!r} and {DUECK!r}, not {kind!r}")


def baseline_time_sharing(points: Sequence[RegionPoint], weights: Sequence[float]) -> RegionPoint:
    if len(points) != len(weights) or not points:
        raise DomainError("time sharing needs one weight per point")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0.0) or abs(float(w.sum()) - 1.0) > 1e-9:
        raise DomainError(f"time-sharing weights must lie on the simplex, got {list(weights)}")
    coords = np.array([point.coordinates() for point in points])
    r1, r2, d1, d2 = (w @ coords).tolist()
    return RegionPoint(r1, r2, d1, d2, points[0].source if len({p.source for p in points}) == 1 else "time_sharing")

