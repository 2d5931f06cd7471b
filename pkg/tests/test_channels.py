import numpy as np
import pytest

from cdtradeoff.channels import (
    DUECK,
    ERASURE_CHANNEL,
    MULTIPLICATIVE,
    NoTradeoffWitness,
    SdmbcSpec,
    build_channel,
    build_erasure_bc,
    build_flipping_bc,
    build_multiplicative_bc,
    check_no_tradeoff,
    check_physically_degraded,
    independent_erasure_law,
)
from cdtradeoff.errors import DomainError, ShapeMismatchError
from cdtradeoff.estimation import expected_distortion, optimal_estimator
from cdtradeoff.prob import Kernel, LabeledJoint, Pmf, random_pmf


def test_builtin_channels_have_expected_alphabets() -> None:
    multiplicative = build_channel(MULTIPLICATIVE)
    assert multiplicative.alphabet_sizes["Z"] == 4
    assert multiplicative.x_size == 2

    dueck = build_channel(DUECK, ps1=0.75)
    assert (dueck.x_size, dueck.y1_size, dueck.z_size) == (8, 16, 4)
    assert np.allclose(dueck.state_law.probs, [[1 / 16, 3 / 16], [3 / 16, 9 / 16]])

    erasure = build_channel(ERASURE_CHANNEL)
    assert (erasure.s1_size, erasure.z_size) == (4, 9)
    assert erasure.label("Z", 8) == "??"


def test_build_channel_rejects_unknown_names_and_parameters() -> None:
    with pytest.raises(DomainError):
        build_channel("ring")
    with pytest.raises(DomainError):
        build_multiplicative_bc(1.5, 0.5)


def test_degraded_state_law_nests_s2_inside_s1() -> None:
    spec = build_multiplicative_bc(0.6, 0.5)
    assert np.allclose(spec.state_law.probs, [[0.4, 0.0], [0.3, 0.3]])


def test_multiplicative_and_flipping_channels_are_physically_degraded() -> None:
    for spec in (build_multiplicative_bc(0.6, 0.5), build_flipping_bc(0.6, 0.5)):
        check = check_physically_degraded(spec)
        assert check
        assert check.kernel is not None
        assert check.describe() == "channel is physically degraded"


@pytest.mark.parametrize("builder", [build_multiplicative_bc, build_flipping_bc])
def test_degradedness_witness_rebuilds_the_channel_joint(builder) -> None:
    spec = builder(0.6, 0.5)
    check = check_physically_degraded(spec)
    assert check
    witness = check.kernel.table  # P(y2, s2 | s1, y1)

    p_s1 = spec.state_law.probs.sum(axis=1)
    s2_given_s1 = spec.state_law.probs / p_s1[:, None]
    # P(y1 | s1, x) with S2 and the other outputs summed out
    y1_given_s1_x = np.einsum("ab,abxi->axi", s2_given_s1, spec.transition.table.sum(axis=(4, 5)))

    rng = np.random.default_rng(11)
    for _ in range(5):
        p_x = random_pmf(rng, spec.x_size).flat()
        rebuilt = np.einsum("x,a,axi,aijb->xabij", p_x, p_s1, y1_given_s1_x, witness)
        composed = spec.joint(LabeledJoint(("X",), p_x)).table(("X", "S1", "S2", "Y1", "Y2"))
        assert np.allclose(rebuilt, composed, rtol=0.0, atol=1e-9)


def test_erasure_channel_with_independent_states_is_not_degraded() -> None:
    spec = build_erasure_bc(independent_erasure_law(0.3, 0.3, 0.3, 0.3))
    check = check_physically_degraded(spec)
    assert not check
    assert check.kernel is None
    assert "differs between X=" in check.describe()


def test_dueck_channel_is_not_degraded_and_names_the_witness() -> None:
    check = check_physically_degraded(build_channel(DUECK))
    assert not check
    assert check.violation is not None
    assert "differs between X=" in check.describe()


def test_perturbed_multiplicative_channel_fails_degradedness() -> None:
    spec = build_multiplicative_bc(0.6, 0.5)
    table = np.array(spec.transition.table)
    # S1 = S2 = 0, X = 1: Y2 turns into a fair coin, so (S1, Y1) no longer screens off X
    table[0, 0, 1, 0, 0, 0] = 0.5
    table[0, 0, 1, 0, 1, 1] = 0.5
    perturbed = SdmbcSpec(
        name="perturbed",
        state_law=spec.state_law,
        transition=Kernel((2, 2, 2), (2, 2, 4), table),
    )
    assert not check_physically_degraded(perturbed)


def test_erasure_channel_satisfies_no_tradeoff_with_indicator_witness() -> None:
    spec = build_erasure_bc(independent_erasure_law(0.3, 0.4, 0.2, 0.1))
    result = check_no_tradeoff(spec, NoTradeoffWitness.erasure_indicator(), 20, 0)
    assert result
    assert result.violation is None


def test_erasure_distortion_does_not_depend_on_the_input_law() -> None:
    spec = build_erasure_bc(independent_erasure_law(0.3, 0.4, 0.2, 0.1))
    estimator = optimal_estimator(spec)
    rng = np.random.default_rng(11)
    reference = expected_distortion(spec, Pmf.uniform(2), estimator)
    for _ in range(20):
        law = Pmf(rng.dirichlet(np.ones(2)))
        assert expected_distortion(spec, law, estimator) == pytest.approx(reference, abs=1e-9)


def test_erasure_without_feedback_erasures_senses_perfectly() -> None:
    spec = build_erasure_bc(independent_erasure_law(0.3, 0.4, 0.0, 0.0))
    estimator = optimal_estimator(spec)
    assert expected_distortion(spec, Pmf.uniform(2), estimator) == pytest.approx((0.0, 0.0), abs=1e-12)


def test_identity_witness_fails_on_multiplicative_channel() -> None:
    spec = build_multiplicative_bc(0.6, 0.5)
    result = check_no_tradeoff(spec, NoTradeoffWitness.identity(spec.z_size), 5, 0)
    assert not result
    assert "receiver" in result.violation


def test_witness_must_cover_the_feedback_alphabet() -> None:
    with pytest.raises(ShapeMismatchError):
        check_no_tradeoff(build_multiplicative_bc(0.6, 0.5), NoTradeoffWitness.erasure_indicator())
