"""Exact finite-alphabet probability tables and information measures.

Every quantity is computed by exact summation over dense ``numpy`` tables.
Information is measured in bits and ``0 * log 0`` is taken as 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.special import entr

from .config import DEFAULT_CMI_CLAMP_TOL, DEFAULT_NORMALIZATION_TOL
from .errors import (
    DomainError,
    NormalizationError,
    ShapeMismatchError,
    UnknownVariableError,
    ZeroProbabilityError,
)

LN2 = math.log(2.0)
DOMAIN_SLACK = 1e-12


def _frozen_array(values: object) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


def _check_mass(array: np.ndarray, *, what: str, tol: float) -> None:
    if not np.all(np.isfinite(array)):
        raise NormalizationError(f"{what} contains non-finite entries")
    if np.any(array < -tol):
        raise NormalizationError(f"{what} has negative entries (min={array.min():.3g})")


@dataclass(frozen=True, eq=False)
class Pmf:
    """Probability mass function stored as a dense table.

    The table may be multi-dimensional (e.g. a joint state law over (S1, S2));
    ``support_size`` counts all cells.
    """

    probs: np.ndarray
    tol: float = field(default=DEFAULT_NORMALIZATION_TOL, repr=False)

    def __post_init__(self) -> None:
        array = np.array(self.probs, dtype=float)
        if array.size == 0:
            raise NormalizationError("pmf must have at least one entry")
        _check_mass(array, what="pmf", tol=self.tol)
        total = float(array.sum())
        if abs(total - 1.0) > self.tol:
            raise NormalizationError(f"pmf sums to {total:.12g}, expected 1")
        array = np.clip(array, 0.0, None)
        object.__setattr__(self, "probs", _frozen_array(array))

    @classmethod
    def uniform(cls, *shape: int) -> "Pmf":
        table = np.ones(shape, dtype=float)
        return cls(table / table.size)

    @classmethod
    def point_mass(cls, index: int, size: int) -> "Pmf":
        table = np.zeros(size, dtype=float)
        table[index] = 1.0
        return cls(table)

    @classmethod
    def bernoulli(cls, p: float) -> "Pmf":
        _check_unit_interval(p, "p")
        p = min(max(p, 0.0), 1.0)
        return cls([1.0 - p, p])

    @property
    def support_size(self) -> int:
        return int(self.probs.size)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.probs.shape)

    def flat(self) -> np.ndarray:
        return self.probs.reshape(-1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Pmf):
            return NotImplemented
        return self.probs.shape == other.probs.shape and bool(np.array_equal(self.probs, other.probs))

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class Kernel:
    """Conditional probability table P(out | in).

    ``table`` has shape ``input_shape + output_shape`` and every slice over the
    output axes is a pmf.
    """

    input_shape: Tuple[int, ...]
    output_shape: Tuple[int, ...]
    table: np.ndarray
    tol: float = field(default=DEFAULT_NORMALIZATION_TOL, repr=False)

    def __post_init__(self) -> None:
        input_shape = tuple(int(size) for size in self.input_shape)
        output_shape = tuple(int(size) for size in self.output_shape)
        if any(size < 1 for size in input_shape + output_shape):
            raise ShapeMismatchError("alphabet sizes must be positive")
        array = np.array(self.table, dtype=float)
        if array.shape != input_shape + output_shape:
            raise ShapeMismatchError(
                f"kernel table has shape {array.shape}, expected {input_shape + output_shape}"
            )
        _check_mass(array, what="kernel", tol=self.tol)
        out_axes = tuple(range(len(input_shape), array.ndim))
        row_sums = array.sum(axis=out_axes) if out_axes else array
        worst = float(np.max(np.abs(row_sums - 1.0))) if row_sums.size else 0.0
        if worst > self.tol:
            bad = np.unravel_index(int(np.argmax(np.abs(row_sums - 1.0))), row_sums.shape)
            raise NormalizationError(
                f"kernel row {tuple(int(i) for i in bad)} sums to {float(row_sums[bad]):.12g}, expected 1"
            )
        object.__setattr__(self, "input_shape", input_shape)
        object.__setattr__(self, "output_shape", output_shape)
        object.__setattr__(self, "table", _frozen_array(np.clip(array, 0.0, None)))

    def row(self, index: Sequence[int]) -> Pmf:
        return Pmf(self.table[tuple(index)], tol=self.tol)

    def rows(self) -> np.ndarray:
        return self.table.reshape(int(np.prod(self.input_shape)), int(np.prod(self.output_shape)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Kernel):
            return NotImplemented
        return (
            self.input_shape == other.input_shape
            and self.output_shape == other.output_shape
            and bool(np.array_equal(self.table, other.table))
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class LabeledJoint:
    """Joint pmf whose axes carry variable names (``U``, ``X``, ``S1`` ...)."""

    variable_names: Tuple[str, ...]
    probs: np.ndarray
    tol: float = field(default=DEFAULT_NORMALIZATION_TOL, repr=False)

    def __post_init__(self) -> None:
        names = tuple(self.variable_names)
        array = np.array(self.probs, dtype=float)
        if len(set(names)) != len(names):
            raise UnknownVariableError(f"duplicate variable names in {names}")
        if array.ndim != len(names):
            raise ShapeMismatchError(f"{len(names)} variable names for a {array.ndim}-dimensional table")
        _check_mass(array, what="joint", tol=self.tol)
        total = float(array.sum())
        if abs(total - 1.0) > self.tol:
            raise NormalizationError(f"joint sums to {total:.12g}, expected 1")
        object.__setattr__(self, "variable_names", names)
        object.__setattr__(self, "probs", _frozen_array(np.clip(array, 0.0, None)))

    @property
    def alphabet_sizes(self) -> Dict[str, int]:
        return dict(zip(self.variable_names, self.probs.shape))

    def axis(self, name: str) -> int:
        try:
            return self.variable_names.index(name)
        except ValueError as exc:
            raise UnknownVariableError(f"unknown variable {name!r}; known: {self.variable_names}") from exc

    def axes(self, names: Iterable[str]) -> Tuple[int, ...]:
        return tuple(self.axis(name) for name in names)

    def table(self, names: Sequence[str]) -> np.ndarray:
        keep = self.axes(names)
        if len(set(keep)) != len(keep):
            raise UnknownVariableError(f"repeated variables in {tuple(names)}")
        drop = tuple(axis for axis in range(self.probs.ndim) if axis not in keep)
        reduced = self.probs.sum(axis=drop) if drop else self.probs
        remaining = [axis for axis in range(self.probs.ndim) if axis in keep]
        order = [remaining.index(axis) for axis in keep]
        return np.transpose(reduced, order) if order else reduced

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledJoint):
            return NotImplemented
        return self.variable_names == other.variable_names and bool(np.array_equal(self.probs, other.probs))

    __hash__ = None  # type: ignore[assignment]


def _check_unit_interval(value: float, name: str) -> None:
    if not (-DOMAIN_SLACK <= value <= 1.0 + DOMAIN_SLACK):
        raise DomainError(f"{name}={value!r} is outside [0, 1]")


def binary_entropy(p: float) -> float:
    _check_unit_interval(p, "p")
    p = min(max(float(p), 0.0), 1.0)
    return float((entr(p) + entr(1.0 - p)) / LN2)


def entropy_of_table(table: np.ndarray) -> float:
    return float(np.sum(entr(np.asarray(table, dtype=float))) / LN2)


def entropy(joint: LabeledJoint, variables: Sequence[str]) -> float:
    variables = tuple(variables)
    if not variables:
        raise UnknownVariableError("entropy needs at least one variable")
    return entropy_of_table(joint.table(variables))


def _joint_entropy_or_zero(joint: LabeledJoint, variables: Tuple[str, ...]) -> float:
    if not variables:
        return 0.0
    return entropy_of_table(joint.table(variables))


def cond_mutual_information(
    joint: LabeledJoint,
    a: Sequence[str],
    b: Sequence[str],
    c: Sequence[str] = (),
    *,
    clamp_tol: float = DEFAULT_CMI_CLAMP_TOL,
) -> float:
    """I(A; B | C) in bits, clamped at zero from below.

    Conditioning cells with zero mass contribute nothing.
    """
    a, b, c = tuple(a), tuple(b), tuple(c)
    if not a or not b:
        raise UnknownVariableError("mutual information needs non-empty A and B")
    for name in a + b + c:
        joint.axis(name)
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise UnknownVariableError(f"variable sets overlap: A={a}, B={b}, C={c}")
    value = (
        _joint_entropy_or_zero(joint, a + c)
        + _joint_entropy_or_zero(joint, b + c)
        - _joint_entropy_or_zero(joint, a + b + c)
        - _joint_entropy_or_zero(joint, c)
    )
    if value < -clamp_tol:
        # pure entropy arithmetic can only undershoot by rounding
        raise ArithmeticError(f"conditional mutual information evaluated to {value:.3g}")
    return max(value, 0.0)


def marginalize(joint: LabeledJoint, variables: Sequence[str]) -> LabeledJoint:
    variables = tuple(variables)
    if not variables:
        return LabeledJoint((), np.array(joint.probs.sum()), tol=joint.tol)
    return LabeledJoint(variables, joint.table(variables), tol=joint.tol)


def condition(joint: LabeledJoint, evidence: Mapping[str, int]) -> LabeledJoint:
    index: list[object] = [slice(None)] * joint.probs.ndim
    for name, value in evidence.items():
        axis = joint.axis(name)
        size = joint.probs.shape[axis]
        if not 0 <= int(value) < size:
            raise DomainError(f"symbol {value} outside alphabet of {name} (size {size})")
        index[axis] = int(value)
    sliced = joint.probs[tuple(index)]
    mass = float(sliced.sum())
    if mass <= 0.0:
        raise ZeroProbabilityError(f"evidence {dict(evidence)} has zero probability")
    remaining = tuple(name for name in joint.variable_names if name not in evidence)
    return LabeledJoint(remaining, sliced / mass, tol=joint.tol)


def conditional_kernel(
    joint: LabeledJoint,
    target: Sequence[str],
    given: Sequence[str],
    *,
    zero_rows: str = "error",
) -> Kernel:
    """P(target | given) as a Kernel.

    ``zero_rows`` selects what to do with conditioning values of zero mass:
    ``"error"`` raises, ``"uniform"`` fills the row with the uniform pmf.
    """
    target, given = tuple(target), tuple(given)
    if set(target) & set(given):
        raise UnknownVariableError(f"target {target} and given {given} overlap")
    table = joint.table(given + target)
    in_shape = table.shape[: len(given)]
    out_shape = table.shape[len(given):]
    flat = table.reshape(int(np.prod(in_shape)), int(np.prod(out_shape)))
    mass = flat.sum(axis=1)
    empty = mass <= 0.0
    if np.any(empty):
        if zero_rows != "uniform":
            bad = np.unravel_index(int(np.argmax(empty)), in_shape)
            raise ZeroProbabilityError(
                f"conditioning value {dict(zip(given, (int(i) for i in bad)))} has zero probability"
            )
    rows = np.where(empty[:, None], 1.0 / flat.shape[1], flat / np.where(empty, 1.0, mass)[:, None])
    return Kernel(in_shape, out_shape, rows.reshape(in_shape + out_shape), tol=joint.tol)


def extend_joint(
    joint: LabeledJoint,
    kernel: Kernel,
    given: Sequence[str],
    new_names: Sequence[str],
) -> LabeledJoint:
    given, new_names = tuple(given), tuple(new_names)
    if len(new_names) != len(kernel.output_shape):
        raise ShapeMismatchError(f"{len(new_names)} names for {len(kernel.output_shape)} kernel outputs")
    clash = set(new_names) & set(joint.variable_names)
    if clash:
        raise UnknownVariableError(f"variables {sorted(clash)} already present")
    sizes = joint.alphabet_sizes
    expected = tuple(sizes[name] for name in given) if all(n in sizes for n in given) else None
    if expected is None:
        missing = [name for name in given if name not in sizes]
        raise UnknownVariableError(f"unknown conditioning variables {missing}")
    if expected != kernel.input_shape:
        raise ShapeMismatchError(f"kernel input shape {kernel.input_shape} does not match {given}={expected}")

    # broadcast the kernel onto the joint's axes, then append the new axes
    n_old = joint.probs.ndim
    letters = [chr(ord("a") + i) for i in range(n_old + len(new_names))]
    old_sub = "".join(letters[:n_old])
    kern_sub = "".join(letters[joint.axis(name)] for name in given) + "".join(letters[n_old:])
    out_sub = "".join(letters)
    probs = np.einsum(f"{old_sub},{kern_sub}->{out_sub}", joint.probs, kernel.table)
    return LabeledJoint(joint.variable_names + new_names, probs, tol=joint.tol)


STATE_NAMES = ("S1", "S2")
OUTPUT_NAMES = ("Y1", "Y2", "Z")


def compose_joint(input_law: LabeledJoint, state_law: Pmf, channel: Kernel) -> LabeledJoint:
    """(aux..., X) ~ input_law, (S1, S2) ~ state_law, (Y1, Y2, Z) ~ channel(. | S1, S2, X).

    Inputs and states are independent by construction.
    """
    if "X" not in input_law.variable_names:
        raise UnknownVariableError("input law must contain the channel input X")
    for name in STATE_NAMES + OUTPUT_NAMES:
        if name in input_law.variable_names:
            raise UnknownVariableError(f"input law may not contain {name}")
    if state_law.probs.ndim != 2:
        raise ShapeMismatchError(f"state law must be a (S1, S2) table, got shape {state_law.shape}")
    x_size = input_law.alphabet_sizes["X"]
    if channel.input_shape != state_law.shape + (x_size,):
        raise ShapeMismatchError(
            f"channel input shape {channel.input_shape} does not match states {state_law.shape} and |X|={x_size}"
        )
    if len(channel.output_shape) != 3:
        raise ShapeMismatchError("channel must output (Y1, Y2, Z)")

    states = np.multiply.outer(input_law.probs, state_law.probs)
    with_states = LabeledJoint(input_law.variable_names + STATE_NAMES, states, tol=input_law.tol)
    return extend_joint(with_states, channel, ("S1", "S2", "X"), OUTPUT_NAMES)


def random_pmf(rng: np.random.Generator, size: int, *, alpha: float = 1.0) -> Pmf:
    return Pmf(rng.dirichlet(np.full(size, alpha)))


def random_kernel(
    rng: np.random.Generator,
    input_shape: Tuple[int, ...],
    output_shape: Tuple[int, ...],
    *,
    alpha: float = 1.0,
) -> Kernel:
    n_rows = int(np.prod(input_shape))
    n_out = int(np.prod(output_shape))
    rows = rng.dirichlet(np.full(n_out, alpha), size=n_rows)
    return Kernel(input_shape, output_shape, rows.reshape(tuple(input_shape) + tuple(output_shape)))


def as_pmf(values: Sequence[float], *, tol: Optional[float] = None) -> Pmf:
    return Pmf(np.asarray(values, dtype=float), tol=DEFAULT_NORMALIZATION_TOL if tol is None else tol)
