import numpy as np
import pytest

from cdtradeoff.auxiliary import dueck_input_law
from cdtradeoff.channels import build_dueck_bc, build_multiplicative_bc, dueck_input_index
from cdtradeoff.errors import DomainError, ShapeMismatchError
from cdtradeoff.estimation import expected_distortion, optimal_estimator
from cdtradeoff.montecarlo import SimConfig, simulate, simulate_feedback_stats
from cdtradeoff.prob import Pmf


def test_multiplicative_simulation_matches_expected_distortion() -> None:
    spec = build_multiplicative_bc(0.6, 0.5)
    result = simulate(spec, optimal_estimator(spec), None, SimConfig(n=10**6, seed=1))
    assert abs(result.mean[0] - 0.2) <= 3 * result.stderr[0]
    assert abs(result.mean[1] - 0.15) <= 3 * result.stderr[1]
    assert 0.0 < result.stderr[0] < 1e-3


def test_dueck_simulation_reaches_minimum_distortion() -> None:
    spec = build_dueck_bc(Pmf.bernoulli(0.75))
    cfg = SimConfig(n=10**6, seed=3, input_law=dueck_input_law(0.0))
    result = simulate(spec, optimal_estimator(spec), None, cfg)
    for k in range(2):
        assert abs(result.mean[k] - 5 / 32) <= 3 * result.stderr[k]


def test_results_do_not_depend_on_thread_count() -> None:
    spec = build_multiplicative_bc(0.6, 0.5)
    estimator = optimal_estimator(spec)
    single = simulate(spec, estimator, None, SimConfig(n=40_000, seed=9, block_size=5_000, threads=1))
    pooled = simulate(spec, estimator, None, SimConfig(n=40_000, seed=9, block_size=5_000, threads=4))
    assert single.mean == pooled.mean
    assert single.stderr == pooled.stderr
    assert np.array_equal(single.feedback.counts, pooled.feedback.counts)


def test_point_mass_input_senses_without_error() -> None:
    spec = build_multiplicative_bc(0.6, 0.5)
    result = simulate(spec, optimal_estimator(spec), None, SimConfig(n=5_000, input_law=Pmf.point_mass(1, 2)))
    assert result.mean == (0.0, 0.0)
    assert result.stderr == (0.0, 0.0)
    # X = 0 never happens
    assert result.feedback.table()[0] == [None] * spec.z_size


def test_dueck_feedback_frequencies() -> None:
    spec = build_dueck_bc(Pmf.bernoulli(0.75))
    stats = simulate_feedback_stats(spec, SimConfig(n=400_000, seed=5, input_law=dueck_input_law(0.5)))
    analytic = spec.feedback_given_input()
    assert analytic[dueck_input_index(0, 1, 1), 0] == pytest.approx(17 / 32)
    assert analytic[dueck_input_index(1, 0, 1), 0] == pytest.approx(1 / 4)
    assert stats.counts[dueck_input_index(1, 0, 1), 3] == 0

    for x in range(spec.x_size):
        for z in range(spec.z_size):
            gap = abs(stats.frequencies[x, z] - analytic[x, z])
            assert gap <= 4 * stats.stderr[x, z] + 1e-12, (x, z)


def test_simulation_error_shrinks_with_more_rounds() -> None:
    spec = build_multiplicative_bc(0.6, 0.5)
    estimator = optimal_estimator(spec)
    law = Pmf([0.3, 0.7])
    exact = expected_distortion(spec, law, estimator)[0]
    improved = 0
    for seed in range(20):
        small = simulate(spec, estimator, None, SimConfig(n=10**4, seed=seed, input_law=law))
        large = simulate(spec, estimator, None, SimConfig(n=10**6, seed=100 + seed, input_law=law))
        improved += abs(large.mean[0] - exact) < abs(small.mean[0] - exact)
    assert improved >= 16


def test_sim_config_validation() -> None:
    with pytest.raises(DomainError):
        SimConfig(n=0)
    with pytest.raises(DomainError):
        SimConfig(n=10, seed=-1)
    with pytest.raises(ShapeMismatchError):
        simulate_feedback_stats(build_multiplicative_bc(0.6, 0.5), SimConfig(n=10, input_law=Pmf.uniform(3)))


def test_result_dictionary_layout() -> None:
    spec = build_multiplicative_bc(0.6, 0.5)
    payload = simulate(spec, optimal_estimator(spec), None, SimConfig(n=1_000, seed=2)).to_dict()
    assert payload["n"] == 1_000
    assert [entry["k"] for entry in payload["receivers"]] == [1, 2]
    assert len(payload["feedback_frequencies"]) == spec.x_size
    assert sum(payload["feedback_frequencies"][1]) == pytest.approx(1.0)
