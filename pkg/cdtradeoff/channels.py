"""State-dependent memoryless broadcast channels with generalized feedback.

A channel is the state law P_{S1S2}, the transition kernel
P_{Y1Y2Z|S1S2X} and one distortion matrix per receiver.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT_DEGRADED_TOL
from .errors import DomainError, ShapeMismatchError
from .logging_utils import channel_log_context, log_with_context
from .prob import Kernel, LabeledJoint, Pmf, compose_joint

ERASURE = 2
MULTIPLICATIVE = "multiplicative"
FLIPPING = "flipping"
ERASURE_CHANNEL = "erasure"
DUECK = "dueck"
BUILTIN_CHANNELS = (MULTIPLICATIVE, FLIPPING, ERASURE_CHANNEL, DUECK)


def hamming_matrix(size: int, reconstruction_size: Optional[int] = None) -> np.ndarray:
    reconstruction_size = size if reconstruction_size is None else reconstruction_size
    return (np.arange(size)[:, None] != np.arange(reconstruction_size)[None, :]).astype(float)


def _check_distortion_matrix(matrix: object, k: int) -> np.ndarray:
    array = np.array(matrix, dtype=float)
    if array.ndim != 2 or array.shape[0] < 1 or array.shape[1] < 1:
        raise ShapeMismatchError(f"distortion matrix of receiver {k} must be a non-empty 2-D table, got shape {array.shape}")
    if not np.all(np.isfinite(array)) or np.any(array < 0):
        raise DomainError(f"distortion matrix of receiver {k} must be finite and non-negative")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class DistortionMeasure:
    d1: np.ndarray
    d2: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "d1", _check_distortion_matrix(self.d1, 1))
        object.__setattr__(self, "d2", _check_distortion_matrix(self.d2, 2))

    @classmethod
    def hamming(cls, s1_size: int, s2_size: int) -> "DistortionMeasure":
        return cls(hamming_matrix(s1_size), hamming_matrix(s2_size))

    def matrix(self, k: int) -> np.ndarray:
        if k == 1:
            return self.d1
        if k == 2:
            return self.d2
        raise DomainError(f"receiver index must be 1 or 2, got {k}")

    @property
    def reconstruction_sizes(self) -> Tuple[int, int]:
        return int(self.d1.shape[1]), int(self.d2.shape[1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DistortionMeasure):
            return NotImplemented
        return (
            self.d1.shape == other.d1.shape
            and self.d2.shape == other.d2.shape
            and bool(np.array_equal(self.d1, other.d1))
            and bool(np.array_equal(self.d2, other.d2))
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class SdmbcSpec:
    name: str
    state_law: Pmf
    transition: Kernel
    distortion: Optional[DistortionMeasure] = None
    labels: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.state_law.probs.ndim != 2:
            raise ShapeMismatchError(f"state law must be a (S1, S2) table, got shape {self.state_law.shape}")
        if len(self.transition.input_shape) != 3 or len(self.transition.output_shape) != 3:
            raise ShapeMismatchError("transition must map (S1, S2, X) to (Y1, Y2, Z)")
        if self.transition.input_shape[:2] != self.state_law.shape:
            raise ShapeMismatchError(
                f"transition state axes {self.transition.input_shape[:2]} do not match state law {self.state_law.shape}"
            )
        distortion = self.distortion
        if distortion is None:
            distortion = DistortionMeasure.hamming(*self.state_law.shape)
        elif (distortion.d1.shape[0], distortion.d2.shape[0]) != self.state_law.shape:
            raise ShapeMismatchError(
                f"distortion rows {(distortion.d1.shape[0], distortion.d2.shape[0])} do not match states {self.state_law.shape}"
            )
        object.__setattr__(self, "distortion", distortion)
        sizes = self.alphabet_sizes
        labels: Dict[str, Tuple[str, ...]] = {}
        for variable, names in dict(self.labels).items():
            if variable not in sizes:
                raise ShapeMismatchError(f"labels given for unknown alphabet {variable!r}")
            names = tuple(str(name) for name in names)
            if len(names) != sizes[variable]:
                raise ShapeMismatchError(f"{len(names)} labels for alphabet {variable} of size {sizes[variable]}")
            labels[variable] = names
        object.__setattr__(self, "labels", labels)

    @property
    def s1_size(self) -> int:
        return self.transition.input_shape[0]

    @property
    def s2_size(self) -> int:
        return self.transition.input_shape[1]

    @property
    def x_size(self) -> int:
        return self.transition.input_shape[2]

    @property
    def y1_size(self) -> int:
        return self.transition.output_shape[0]

    @property
    def y2_size(self) -> int:
        return self.transition.output_shape[1]

    @property
    def z_size(self) -> int:
        return self.transition.output_shape[2]

    @property
    def alphabet_sizes(self) -> Dict[str, int]:
        assert self.distortion is not None
        shat1, shat2 = self.distortion.reconstruction_sizes
        return {
            "X": self.x_size,
            "Y1": self.y1_size,
            "Y2": self.y2_size,
            "Z": self.z_size,
            "S1": self.s1_size,
            "S2": self.s2_size,
            "Shat1": shat1,
            "Shat2": shat2,
        }

    def state_size(self, k: int) -> int:
        if k not in (1, 2):
            raise DomainError(f"receiver index must be 1 or 2, got {k}")
        return self.s1_size if k == 1 else self.s2_size

    def feedback_kernel(self) -> np.ndarray:
        return self.transition.table.sum(axis=(3, 4))

    def feedback_given_input(self) -> np.ndarray:
        return np.einsum("ab,abxz->xz", self.state_law.probs, self.feedback_kernel())

    def state_feedback_table(self, k: int) -> np.ndarray:
        if k == 1:
            return np.einsum("ab,abxz->xaz", self.state_law.probs, self.feedback_kernel())
        if k == 2:
            return np.einsum("ab,abxz->xbz", self.state_law.probs, self.feedback_kernel())
        raise DomainError(f"receiver index must be 1 or 2, got {k}")

    def joint(self, input_law: LabeledJoint) -> LabeledJoint:
        return compose_joint(input_law, self.state_law, self.transition)

    def label(self, variable: str, index: int) -> str:
        names = self.labels.get(variable)
        return names[index] if names else str(index)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SdmbcSpec):
            return NotImplemented
        return (
            self.name == other.name
            and self.state_law == other.state_law
            and self.transition == other.transition
            and self.distortion == other.distortion
            and dict(self.labels) == dict(other.labels)
        )

    __hash__ = None  # type: ignore[assignment]


def _check_parameter(value: float, name: str) -> float:
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name}={value!r} must lie in [0, 1]")
    return float(value)


def degraded_state_law(q: float, gamma: float) -> Pmf:
    """S1 ~ Bern(q) and S2 = S1 * Bern(gamma): S2 is a degraded copy of S1."""
    q = _check_parameter(q, "q")
    gamma = _check_parameter(gamma, "gamma")
    return Pmf([[1.0 - q, 0.0], [q * (1.0 - gamma), q * gamma]])


def _binary_output_feedback_channel(name: str, q: float, gamma: float, flip_second: bool) -> SdmbcSpec:
    table = np.zeros((2, 2, 2, 2, 2, 4))
    for s1 in range(2):
        for s2 in range(2):
            for x in range(2):
                y1 = x * s1
                y2 = (1 - x) * s2 if flip_second else x * s2
                table[s1, s2, x, y1, y2, 2 * y1 + y2] = 1.0
    return SdmbcSpec(
        name=name,
        state_law=degraded_state_law(q, gamma),
        transition=Kernel((2, 2, 2), (2, 2, 4), table),
        labels={"Z": ("00", "01", "10", "11")},
    )


def build_multiplicative_bc(q: float, gamma: float) -> SdmbcSpec:
    """Y_k = X * S_k with output feedback Z = (Y1, Y2)."""
    return _binary_output_feedback_channel(MULTIPLICATIVE, q, gamma, flip_second=False)


def build_flipping_bc(q: float, gamma: float) -> SdmbcSpec:
    """Y1 = X * S1, Y2 = (1 - X) * S2 with output feedback Z = (Y1, Y2)."""
    return _binary_output_feedback_channel(FLIPPING, q, gamma, flip_second=True)


def independent_erasure_law(p_s1: float, p_s2: float, p_e1: float, p_e2: float) -> Pmf:
    marginals = [
        np.array([1.0 - _check_parameter(p, name), p])
        for p, name in ((p_s1, "p_s1"), (p_s2, "p_s2"), (p_e1, "p_e1"), (p_e2, "p_e2"))
    ]
    return Pmf(np.einsum("a,b,c,d->abcd", *marginals))


def build_erasure_bc(joint_se: Pmf) -> SdmbcSpec:
    """Erasure BC whose per-receiver state is the pair (S_k, E_k).

    Y_k = X if S_k = 0 else ?, and Z_k = Y_k if E_k = 0 else ?. The erasure
    symbol is index 2, Z = (Z1, Z2) is flattened to 3 * z1 + z2 and the
    distortion only looks at the S component of the pair state.
    """
    probs = np.asarray(joint_se.probs, dtype=float)
    if probs.size != 16:
        raise ShapeMismatchError(f"erasure state law must cover {{0,1}}^4, got {probs.size} entries")
    probs = probs.reshape(2, 2, 2, 2)
    # (s1, s2, e1, e2) -> ((s1, e1), (s2, e2))
    state_law = Pmf(probs.transpose(0, 2, 1, 3).reshape(4, 4))

    table = np.zeros((4, 4, 2, 3, 3, 9))
    for a in range(4):
        s1, e1 = divmod(a, 2)
        for b in range(4):
            s2, e2 = divmod(b, 2)
            for x in range(2):
                y1 = ERASURE if s1 else x
                y2 = ERASURE if s2 else x
                z1 = ERASURE if e1 else y1
                z2 = ERASURE if e2 else y2
                table[a, b, x, y1, y2, 3 * z1 + z2] = 1.0

    state_distortion = np.array([[float(s != shat) for shat in range(2)] for s in (0, 0, 1, 1)])
    symbols = ("0", "1", "?")
    pair_labels = tuple(f"s={s},e={e}" for s in range(2) for e in range(2))
    return SdmbcSpec(
        name=ERASURE_CHANNEL,
        state_law=state_law,
        transition=Kernel((4, 4, 2), (3, 3, 9), table),
        distortion=DistortionMeasure(state_distortion, state_distortion.copy()),
        labels={
            "S1": pair_labels,
            "S2": pair_labels,
            "Y1": symbols,
            "Y2": symbols,
            "Z": tuple(a + b for a in symbols for b in symbols),
        },
    )


def dueck_input_index(x0: int, x1: int, x2: int) -> int:
    return 4 * x0 + 2 * x1 + x2


def dueck_output_index(x0: int, y_prime: int, s1: int, s2: int) -> int:
    return 8 * x0 + 4 * y_prime + 2 * s1 + s2


def build_dueck_bc(p_s: Pmf) -> SdmbcSpec:
    """Dueck BC with multiplicative states and Z = (Y'1, Y'2).

    X = (X0, X1, X2), Y'_k = S_k (X_k xor N) with N ~ Bern(1/2) marginalized,
    and receiver k observes Y_k = (X0, Y'_k, S1, S2).
    """
    if p_s.support_size != 2:
        raise ShapeMismatchError(f"Dueck state law must be binary, got {p_s.support_size} symbols")
    marginal = p_s.flat()
    table = np.zeros((2, 2, 8, 16, 16, 4))
    for s1 in range(2):
        for s2 in range(2):
            for x0 in range(2):
                for x1 in range(2):
                    for x2 in range(2):
                        x = dueck_input_index(x0, x1, x2)
                        for noise in range(2):
                            y1 = s1 * (x1 ^ noise)
                            y2 = s2 * (x2 ^ noise)
                            table[
                                s1,
                                s2,
                                x,
                                dueck_output_index(x0, y1, s1, s2),
                                dueck_output_index(x0, y2, s1, s2),
                                2 * y1 + y2,
                            ] += 0.5
    return SdmbcSpec(
        name=DUECK,
        state_law=Pmf(np.outer(marginal, marginal)),
        transition=Kernel((2, 2, 8), (16, 16, 4), table),
        labels={
            "X": tuple(f"{x0}{x1}{x2}" for x0 in range(2) for x1 in range(2) for x2 in range(2)),
            "Z": ("00", "01", "10", "11"),
        },
    )


@dataclass(frozen=True)
class DegradedCheck:
    holds: bool
    kernel: Optional[Kernel] = None
    violation: Optional[Tuple[int, int, int, int]] = None

    def __bool__(self) -> bool:
        return self.holds

    def describe(self) -> str:
        if self.holds:
            return "channel is physically degraded"
        assert self.violation is not None
        s1, y1, x_a, x_b = self.violation
        return (
            f"P(Y2, S2 | S1={s1}, Y1={y1}, X) differs between X={x_a} and X={x_b}"
        )


def check_physically_degraded(spec: SdmbcSpec, *, tol: float = DEFAULT_DEGRADED_TOL) -> DegradedCheck:
    """Test X - (S1, Y1) - (S2, Y2) row by row and extract P(Y2, S2 | S1, Y1)."""
    # P(s1, y1, y2, s2 | x) as (X, S1, Y1, Y2, S2)
    joint = np.einsum("ab,abxijz->xaijb", spec.state_law.probs, spec.transition.table)
    mass = joint.sum(axis=(3, 4))
    witness = np.full((spec.s1_size, spec.y1_size, spec.y2_size, spec.s2_size), 1.0 / (spec.y2_size * spec.s2_size))

    for s1 in range(spec.s1_size):
        for y1 in range(spec.y1_size):
            reachable = np.flatnonzero(mass[:, s1, y1] > 0.0)
            if reachable.size == 0:
                continue
            conditionals = joint[reachable, s1, y1] / mass[reachable, s1, y1][:, None, None]
            reference = conditionals[0]
            gaps = np.abs(conditionals - reference).reshape(reachable.size, -1).max(axis=1)
            if np.any(gaps > tol):
                other = int(reachable[int(np.argmax(gaps > tol))])
                result = DegradedCheck(False, violation=(s1, y1, int(reachable[0]), other))
                log_with_context(
                    logging.INFO,
                    "Degradedness check failed",
                    **channel_log_context(spec),
                    violation=result.violation,
                )
                return result
            witness[s1, y1] = reference

    kernel = Kernel((spec.s1_size, spec.y1_size), (spec.y2_size, spec.s2_size), witness)
    log_with_context(logging.INFO, "Degradedness check passed", **channel_log_context(spec))
    return DegradedCheck(True, kernel=kernel)


@dataclass(frozen=True)
class NoTradeoffWitness:
    psi1: Tuple[int, ...]
    psi2: Tuple[int, ...]

    def __post_init__(self) -> None:
        for name in ("psi1", "psi2"):
            values = tuple(int(v) for v in getattr(self, name))
            if any(v < 0 for v in values):
                raise DomainError(f"{name} must map into non-negative symbol indices")
            object.__setattr__(self, name, values)
        if len(self.psi1) != len(self.psi2):
            raise ShapeMismatchError("psi1 and psi2 must cover the same feedback alphabet")

    def psi(self, k: int) -> np.ndarray:
        return np.asarray(self.psi1 if k == 1 else self.psi2, dtype=int)

    @classmethod
    def identity(cls, z_size: int) -> "NoTradeoffWitness":
        return cls(tuple(range(z_size)), tuple(range(z_size)))

    @classmethod
    def constant(cls, z_size: int) -> "NoTradeoffWitness":
        return cls((0,) * z_size, (0,) * z_size)

    @classmethod
    def erasure_indicator(cls) -> "NoTradeoffWitness":
        """psi_k(Z) = 1{Z_k = ?} on the flattened erasure feedback alphabet."""
        psi1 = tuple(int(z // 3 == ERASURE) for z in range(9))
        psi2 = tuple(int(z % 3 == ERASURE) for z in range(9))
        return cls(psi1, psi2)


@dataclass(frozen=True)
class NoTradeoffCheck:
    holds: bool
    violation: Optional[str] = None

    def __bool__(self) -> bool:
        return self.holds


def _candidate_input_laws(x_size: int, sample_count: int, seed: Optional[int]) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    laws = [np.eye(x_size)[x] for x in range(x_size)]
    laws.extend(rng.dirichlet(np.ones(x_size), size=max(sample_count, 0)))
    return laws


def _no_tradeoff_violation(
    spec: SdmbcSpec,
    witness: NoTradeoffWitness,
    k: int,
    laws: Sequence[np.ndarray],
    tol: float,
) -> Optional[str]:
    psi = witness.psi(k)
    w_size = int(psi.max()) + 1
    # P(S_k = s, Z = z | X = x) and its image under psi
    state_feedback = spec.state_feedback_table(k)
    onto_psi = np.eye(w_size)[psi]
    state_psi = state_feedback @ onto_psi

    z_mass = state_feedback.sum(axis=1, keepdims=True)
    posterior_zx = np.divide(state_feedback, z_mass, out=np.zeros_like(state_feedback), where=z_mass > 0.0)

    reference: Optional[np.ndarray] = None
    for law in laws:
        joint = law[:, None, None] * state_psi
        marginal = joint.sum(axis=0)
        if np.max(np.abs(joint - law[:, None, None] * marginal[None])) > tol:
            return f"receiver {k}: (S_{k}, psi_{k}(Z)) depends on X under P_X={np.round(law, 6).tolist()}"
        if reference is None:
            reference = marginal
        elif np.max(np.abs(marginal - reference)) > tol:
            return f"receiver {k}: law of (S_{k}, psi_{k}(Z)) changes with the input law"

        psi_mass = marginal.sum(axis=0, keepdims=True)
        posterior_psi = np.divide(marginal, psi_mass, out=np.zeros_like(marginal), where=psi_mass > 0.0)
        # compare P(s | z, x) with P(s | psi(z)) on every (x, z) of positive probability
        defined = (law[:, None] > 0.0) & (z_mass[:, 0, :] > 0.0)
        expected = posterior_psi[:, psi]
        gaps = np.abs(posterior_zx - expected[None]).max(axis=1)
        gaps = np.where(defined, gaps, 0.0)
        if np.max(gaps) > tol:
            x, z = np.unravel_index(int(np.argmax(gaps)), gaps.shape)
            return (
                f"receiver {k}: P(S_{k} | Z={int(z)}, X={int(x)}) differs from "
                f"P(S_{k} | psi_{k}(Z)={int(psi[z])})"
            )
    return None


def check_no_tradeoff(
    spec: SdmbcSpec,
    witness: NoTradeoffWitness,
    sample_count: int = 20,
    seed: Optional[int] = 0,
    *,
    tol: float = DEFAULT_DEGRADED_TOL,
) -> NoTradeoffCheck:
    """Numerically test (S_k, psi_k(Z)) independent of X and S_k - psi_k(Z) - (Z, X).

    Input laws are every point mass plus ``sample_count`` Dirichlet-uniform draws.
    """
    if len(witness.psi1) != spec.z_size:
        raise ShapeMismatchError(f"witness covers {len(witness.psi1)} feedback symbols, channel has {spec.z_size}")
    laws = _candidate_input_laws(spec.x_size, sample_count, seed)
    for k in (1, 2):
        violation = _no_tradeoff_violation(spec, witness, k, laws, tol)
        if violation is not None:
            log_with_context(logging.INFO, "No-tradeoff check failed", **channel_log_context(spec), reason=violation)
            return NoTradeoffCheck(False, violation)
    log_with_context(
        logging.INFO,
        "No-tradeoff check passed",
        **channel_log_context(spec),
        input_laws=len(laws),
    )
    return NoTradeoffCheck(True)


def build_channel(
    name: str,
    *,
    q: float = 0.6,
    gamma: float = 0.5,
    ps1: float = 0.75,
    erasure_law: Optional[Pmf] = None,
) -> SdmbcSpec:
    if name == MULTIPLICATIVE:
        return build_multiplicative_bc(q, gamma)
    if name == FLIPPING:
        return build_flipping_bc(q, gamma)
    if name == ERASURE_CHANNEL:
        return build_erasure_bc(erasure_law or independent_erasure_law(0.3, 0.3, 0.2, 0.2))
    if name == DUECK:
        return build_dueck_bc(Pmf.bernoulli(_check_parameter(ps1, "ps1")))
    raise DomainError(f"unknown channel {name!r}; choose one of {', '.join(BUILTIN_CHANNELS)}")

