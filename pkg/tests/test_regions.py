import numpy as np
import pytest

from cdtradeoff.auxiliary import (
    NO_FEEDBACK,
    FEEDBACK_RECEIVER1,
    constant_inner_aux,
    constant_outer_aux,
    degraded_superposition_law,
    dueck_feedback_preset,
    identity_outer_aux,
    private_input_inner_aux,
    random_degraded_law,
)
from cdtradeoff.channels import DUECK, MULTIPLICATIVE, build_dueck_bc, build_flipping_bc, build_multiplicative_bc
from cdtradeoff.closed_forms import (
    ClosedFormParams,
    corollary1_admits,
    corollary1_region,
    dueck_distortion_bound,
    dueck_inner,
    dueck_inner_sum_rate,
    dueck_min_distortion,
    dueck_outer_sum_rate,
)
from cdtradeoff.errors import DomainError, SearchSpaceError
from cdtradeoff.prob import LabeledJoint, Pmf, binary_entropy, cond_mutual_information
from cdtradeoff.regions import (
    RegionPoint,
    baseline_resource_splitting,
    baseline_time_sharing,
    degraded_rates,
    degraded_region,
    dominates,
    pareto_frontier,
    prop3_inner,
    rate_corners,
    theorem1_envelope,
    theorem1_outer,
)


def coordinates_close(a: RegionPoint, b: RegionPoint, tol: float) -> bool:
    return all(abs(x - y) <= tol for x, y in zip(a.coordinates(), b.coordinates()))


def test_region_point_rejects_negative_and_nan() -> None:
    with pytest.raises(DomainError):
        RegionPoint(-0.1, 0.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        RegionPoint(float("nan"), 0.0, 0.0, 0.0)
    assert RegionPoint(-1e-13, 0.0, 0.0, 0.0).r1 == 0.0


def test_pareto_frontier_examples() -> None:
    single = RegionPoint(0.3, 0.2, 0.1, 0.1)
    assert list(pareto_frontier([single])) == [single]

    better = RegionPoint(1.0, 0.0, 0.1, 0.1)
    worse = RegionPoint(0.5, 0.0, 0.2, 0.2)
    assert list(pareto_frontier([worse, better, better])) == [better]

    tradeoff = [RegionPoint(0.2, 0.0, 0.1, 0.1), RegionPoint(0.6, 0.0, 0.2, 0.2), RegionPoint(0.6, 0.1, 0.3, 0.3)]
    assert [p.r1 for p in pareto_frontier(tradeoff)] == [0.6, 0.6, 0.2]
    assert len(pareto_frontier([])) == 0


def test_corollary1_corners_form_a_non_dominated_family() -> None:
    grid = np.linspace(0.5, 1.0, 21)
    corners = [corollary1_region(0.6, 0.5, p, 0.5) for p in grid]
    # more message rate always costs distortion along this family
    assert len(pareto_frontier(corners)) == 21
    assert not any(dominates(a, b) for a in corners for b in corners)


def test_dominance_needs_one_strict_improvement() -> None:
    point = RegionPoint(0.5, 0.2, 0.1, 0.1)
    assert not dominates(point, point)
    assert dominates(RegionPoint(0.5, 0.2, 0.1, 0.05), point)
    assert not dominates(RegionPoint(0.6, 0.2, 0.2, 0.1), point)


def test_rate_corners_of_pentagon() -> None:
    corners = rate_corners(0.6, 0.5, 0.8, 0.1, 0.2, "test")
    assert [(p.r1, p.r2) for p in corners] == [(0.6, pytest.approx(0.2)), (pytest.approx(0.3), 0.5)]
    assert rate_corners(0.0, 0.0, 0.7, 0.0, 0.0) == [RegionPoint(0.0, 0.0, 0.0, 0.0)]


def test_degraded_rates_of_superposition_law_match_corollary1() -> None:
    spec = build_multiplicative_bc(0.6, 0.5)
    r1, r2 = degraded_rates(spec, degraded_superposition_law(0.5, 0.0))
    assert r1 == pytest.approx(0.6)
    assert r2 == pytest.approx(0.0, abs=1e-12)

    # X = U xor V with U ~ Bern(1/2): P(X = 1) = 1/2 whatever V is
    r1, r2 = degraded_rates(spec, degraded_superposition_law(0.5, 0.11))
    h_v = binary_entropy(0.11)
    assert r1 == pytest.approx(0.6 * (1.0 - h_v))
    assert r2 == pytest.approx(0.3 * h_v)


def test_degraded_region_on_coarse_grid_contains_anchor_points() -> None:
    spec = build_multiplicative_bc(0.6, 0.5)
    frontier = degraded_region(spec, u_card=2, grid_res=4)
    anchor = corollary1_region(0.6, 0.5, 0.5, 1.0)
    assert any(coordinates_close(point, anchor, 1e-9) for point in frontier)
    assert any(point.coordinates() == pytest.approx((0.0, 0.0, 0.0, 0.0), abs=1e-12) for point in frontier)


def test_degraded_region_refuses_oversized_grids() -> None:
    with pytest.raises(SearchSpaceError):
        degraded_region(build_multiplicative_bc(0.6, 0.5), u_card=3, grid_res=40, max_points=1000)


def test_degraded_grid_stays_inside_and_tracks_corollary1_surface() -> None:
    q, gamma = 0.6, 0.5
    frontier = list(degraded_region(build_multiplicative_bc(q, gamma), u_card=2, grid_res=33))

    for point in frontier:
        assert corollary1_admits(q, gamma, point)

    # every sampled corner is approached from the right side within 0.02 per coordinate
    for p in np.linspace(0.5, 1.0, 50):
        for r in (0.0, 1.0):
            corner = corollary1_region(q, gamma, p, r)
            assert any(
                point.r1 >= corner.r1 - 0.02
                and point.r2 >= corner.r2 - 0.02
                and point.d1 <= corner.d1 + 0.02
                and point.d2 <= corner.d2 + 0.02
                for point in frontier
            ), (p, r)


@pytest.mark.parametrize("builder", [build_multiplicative_bc, build_flipping_bc])
def test_degraded_channels_lose_nothing_by_dropping_receiver2_output(builder) -> None:
    spec = builder(0.6, 0.5)
    rng = np.random.default_rng(7)
    for _ in range(50):
        joint = spec.joint(random_degraded_law(rng, 2, 2).law)
        both = cond_mutual_information(joint, ("X",), ("Y1", "Y2"), ("S1", "S2", "U"))
        strong = cond_mutual_information(joint, ("X",), ("Y1",), ("S1", "U"))
        weak = cond_mutual_information(joint, ("X",), ("Y2",), ("S2", "U"))
        assert both == pytest.approx(strong, abs=1e-9)
        assert weak <= both + 1e-9


def test_theorem1_with_identity_and_constant_auxiliaries() -> None:
    spec = build_multiplicative_bc(0.6, 0.5)
    law = Pmf.uniform(2)
    joint = spec.joint(identity_outer_aux(law).joint())

    identity = theorem1_outer(spec, None, identity_outer_aux(law))
    assert identity.r1_bound == pytest.approx(cond_mutual_information(joint, ("X",), ("Y1",), ("S1",)))
    assert identity.sum_bound == pytest.approx(0.0, abs=1e-12)

    constant = theorem1_outer(spec, None, constant_outer_aux(law))
    assert constant.r1_bound == pytest.approx(0.0, abs=1e-12)
    assert constant.r2_bound == pytest.approx(0.0, abs=1e-12)
    assert constant.sum_bound == pytest.approx(cond_mutual_information(joint, ("X",), ("Y1", "Y2"), ("S1", "S2")))
    (corner,) = constant.corners()
    assert corner.coordinates() == pytest.approx((0.0, 0.0, 0.2, 0.15), abs=1e-12)
    assert corner.source == "thm1"


def test_theorem1_envelope_is_capped_by_the_full_output_rate() -> None:
    spec = build_multiplicative_bc(0.6, 0.5)
    envelope = list(theorem1_envelope(spec, u_card=2, grid_res=2))
    assert envelope
    # R1 + R2 <= I(X; Y1, Y2 | S1, S2) = q H(X) <= q
    assert all(point.sum_rate <= 0.6 + 1e-9 for point in envelope)
    assert any(point.coordinates() == pytest.approx((0.0, 0.0, 0.0, 0.0), abs=1e-12) for point in envelope)


def test_prop3_feedback_preset_matches_closed_form_inner_bound() -> None:
    spec = build_dueck_bc(Pmf.bernoulli(0.75))
    for beta in (0.1, 0.3, 0.5):
        evaluation = prop3_inner(spec, None, dueck_feedback_preset(FEEDBACK_RECEIVER1, beta))
        closed = dueck_inner(0.75, ClosedFormParams(beta=beta, gamma_ts=1.0))
        assert evaluation.sum_bound == pytest.approx(closed.sum_rate, abs=1e-9)
        assert evaluation.r1_bound == pytest.approx(1.0, abs=1e-9)
        assert evaluation.d1 == pytest.approx(dueck_distortion_bound(0.75, beta), abs=1e-12)
        assert len(evaluation.terms) == 13


def test_prop3_without_feedback_has_non_negative_bounds() -> None:
    spec = build_dueck_bc(Pmf.bernoulli(0.75))
    evaluation = prop3_inner(spec, None, dueck_feedback_preset(NO_FEEDBACK, 0.5))
    assert evaluation.r1_bound >= 0.0
    assert evaluation.r2_bound >= 0.0
    assert evaluation.sum_bound <= 1.0 + 1e-9


def test_prop3_with_constant_auxiliaries_has_no_rate() -> None:
    for spec in (build_multiplicative_bc(0.6, 0.5), build_dueck_bc(Pmf.bernoulli(0.75))):
        evaluation = prop3_inner(spec, None, constant_inner_aux(Pmf.uniform(spec.x_size), spec.z_size))
        assert (evaluation.r1_bound, evaluation.r2_bound, evaluation.sum_bound) == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)


def test_prop3_private_input_for_receiver1_gives_its_mutual_information() -> None:
    spec = build_multiplicative_bc(0.6, 0.5)
    law = Pmf([0.3, 0.7])
    evaluation = prop3_inner(spec, None, private_input_inner_aux(law, spec.z_size))

    direct = cond_mutual_information(spec.joint(LabeledJoint(("X",), law.flat())), ("X",), ("Y1",), ("S1",))
    assert direct == pytest.approx(0.6 * binary_entropy(0.3))
    assert evaluation.r1_bound == pytest.approx(direct, abs=1e-12)
    assert evaluation.r2_bound == pytest.approx(0.0, abs=1e-12)
    assert evaluation.sum_bound == pytest.approx(direct, abs=1e-12)


def test_dueck_inner_never_exceeds_outer_on_a_distortion_grid() -> None:
    for p_s1 in (0.25, 0.55, 0.6, 0.75, 0.9):
        d_min = dueck_min_distortion(p_s1)
        for distortion in np.linspace(d_min, d_min + 0.1, 50):
            inner = dueck_inner_sum_rate(p_s1, distortion)
            outer = dueck_outer_sum_rate(p_s1, distortion)
            assert inner is not None and outer is not None
            assert inner <= outer + 1e-9


def test_multiplicative_resource_splitting_endpoints() -> None:
    splitting = baseline_resource_splitting(MULTIPLICATIVE, q=0.6, gamma=0.5, r_values=(1.0,))
    assert splitting.sensing.coordinates() == pytest.approx((0.0, 0.0, 0.0, 0.0), abs=1e-12)
    assert splitting.communication[0].coordinates() == pytest.approx((0.6, 0.0, 0.4, 0.3))
    midpoint = baseline_time_sharing([splitting.sensing, splitting.communication[0]], [0.5, 0.5])
    assert midpoint.coordinates() == pytest.approx((0.3, 0.0, 0.2, 0.15))
    assert len(splitting.segment(steps=4)) == 5


def test_dueck_resource_splitting_endpoints() -> None:
    splitting = baseline_resource_splitting(DUECK, ps1=0.75, r_values=(0.5,))
    assert splitting.sensing.d1 == pytest.approx(5 / 32, abs=1e-12)
    assert splitting.sensing.sum_rate == 0.0
    assert splitting.communication[0].d1 == pytest.approx(0.25, abs=1e-12)
    assert splitting.communication[0].sum_rate == pytest.approx(1.0)


def test_resource_splitting_rejects_other_channels() -> None:
    with pytest.raises(DomainError):
        baseline_resource_splitting("erasure")


def test_time_sharing_weights() -> None:
    a = RegionPoint(1.0, 0.0, 0.1, 0.2, "a")
    b = RegionPoint(0.0, 1.0, 0.3, 0.4, "b")
    assert baseline_time_sharing([a, b], [1.0, 0.0]).coordinates() == a.coordinates()
    assert baseline_time_sharing([a, b], [0.25, 0.75]).source == "time_sharing"
    with pytest.raises(DomainError):
        baseline_time_sharing([a, b], [0.6, 0.6])
    with pytest.raises(DomainError):
        baseline_time_sharing([a], [0.5, 0.5])
