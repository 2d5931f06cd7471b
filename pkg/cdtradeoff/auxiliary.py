"""Auxiliary-variable laws for the region bounds, simplex grids and presets."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Tuple, Union

import numpy as np

from .channels import SdmbcSpec, dueck_input_index
from .config import DEFAULT_MAX_GRID_POINTS
from .errors import DomainError, SearchSpaceError, ShapeMismatchError, UnknownVariableError
from .prob import Kernel, LabeledJoint, Pmf

DEGRADED_NAMES = ("U", "X")
INNER_NAMES = ("U0", "U1", "U2", "X")
V_NAMES = ("V0", "V1", "V2")

FEEDBACK_RECEIVER1 = 1
FEEDBACK_RECEIVER2 = 2
NO_FEEDBACK = 3
DUECK_PRESETS = (FEEDBACK_RECEIVER1, FEEDBACK_RECEIVER2, NO_FEEDBACK)


@dataclass(frozen=True)
class DegradedAuxiliary:
    """Joint law P_{UX} for the degraded-channel region."""

    law: LabeledJoint

    def __post_init__(self) -> None:
        if self.law.variable_names != DEGRADED_NAMES:
            raise UnknownVariableError(f"degraded auxiliary law must be over {DEGRADED_NAMES}")

    @property
    def input_law(self) -> Pmf:
        return Pmf(self.law.table(("X",)))


@dataclass(frozen=True)
class OuterAuxiliary:
    """P_X with the two test channels P_{U1|X} and P_{U2|X}."""

    input_law: Pmf
    u1: Kernel
    u2: Kernel

    def __post_init__(self) -> None:
        x_size = self.input_law.support_size
        for name, kernel in (("u1", self.u1), ("u2", self.u2)):
            if kernel.input_shape != (x_size,) or len(kernel.output_shape) != 1:
                raise ShapeMismatchError(f"{name} must be a kernel from X (size {x_size}) to one auxiliary alphabet")

    def joint(self) -> LabeledJoint:
        probs = np.einsum("x,xa,xb->abx", self.input_law.flat(), self.u1.table, self.u2.table)
        return LabeledJoint(("U1", "U2", "X"), probs)


@dataclass(frozen=True)
class InnerAuxiliary:
    """P_{U0U1U2X} with the feedback kernel P_{V0V1V2|U0U1U2Z}."""

    law: LabeledJoint
    v_kernel: Kernel

    def __post_init__(self) -> None:
        if self.law.variable_names != INNER_NAMES:
            raise UnknownVariableError(f"inner auxiliary law must be over {INNER_NAMES}")
        u_shape = tuple(self.law.probs.shape[:3])
        if self.v_kernel.input_shape[:3] != u_shape or len(self.v_kernel.input_shape) != 4:
            raise ShapeMismatchError(f"V kernel must be conditioned on (U0, U1, U2, Z) with U sizes {u_shape}")
        if len(self.v_kernel.output_shape) != 3:
            raise ShapeMismatchError("V kernel must output (V0, V1, V2)")

    @property
    def input_law(self) -> Pmf:
        return Pmf(self.law.table(("X",)))


AuxiliaryChoice = Union[DegradedAuxiliary, OuterAuxiliary, InnerAuxiliary]


def simplex_grid_size(dim: int, res: int) -> int:
    return math.comb(res + dim - 1, dim - 1)


def simplex_grid(dim: int, res: int, *, max_points: int = DEFAULT_MAX_GRID_POINTS) -> np.ndarray:
    """All pmfs on ``dim`` symbols whose entries are multiples of 1/res (vertices included).

    Rows come in lexicographic order of the bar positions, so the grid is reproducible.
    """
    if dim < 1 or res < 1:
        raise DomainError(f"simplex grid needs dim >= 1 and res >= 1, got dim={dim}, res={res}")
    size = simplex_grid_size(dim, res)
    if size > max_points:
        raise SearchSpaceError(f"simplex grid with dim={dim}, res={res} has {size} points, limit is {max_points}")
    rows = np.empty((size, dim))
    for row, bars in enumerate(itertools.combinations(range(res + dim - 1), dim - 1)):
        edges = np.array((-1,) + bars + (res + dim - 1,))
        rows[row] = (np.diff(edges) - 1) / res
    return rows


def degraded_laws(
    u_card: int,
    x_size: int,
    grid_res: int,
    *,
    max_points: int = DEFAULT_MAX_GRID_POINTS,
) -> Iterator[DegradedAuxiliary]:
    for row in simplex_grid(u_card * x_size, grid_res, max_points=max_points):
        yield DegradedAuxiliary(LabeledJoint(DEGRADED_NAMES, row.reshape(u_card, x_size)))


def degraded_superposition_law(p_u: float, p_v: float) -> DegradedAuxiliary:
    """X = U xor V with independent U ~ Bern(p_u) and V ~ Bern(p_v)."""
    u = Pmf.bernoulli(p_u).flat()
    v = Pmf.bernoulli(p_v).flat()
    probs = np.zeros((2, 2))
    for a in range(2):
        for b in range(2):
            probs[a, a ^ b] += u[a] * v[b]
    return DegradedAuxiliary(LabeledJoint(DEGRADED_NAMES, probs))


def random_degraded_law(rng: np.random.Generator, u_card: int, x_size: int) -> DegradedAuxiliary:
    probs = rng.dirichlet(np.ones(u_card * x_size)).reshape(u_card, x_size)
    return DegradedAuxiliary(LabeledJoint(DEGRADED_NAMES, probs))


def constant_outer_aux(input_law: Pmf) -> OuterAuxiliary:
    x_size = input_law.support_size
    constant = Kernel((x_size,), (1,), np.ones((x_size, 1)))
    return OuterAuxiliary(input_law, constant, constant)


def identity_outer_aux(input_law: Pmf) -> OuterAuxiliary:
    x_size = input_law.support_size
    identity = Kernel((x_size,), (x_size,), np.eye(x_size))
    return OuterAuxiliary(input_law, identity, identity)


def outer_aux_grid(
    x_size: int,
    u_card: int,
    grid_res: int,
    *,
    max_points: int = DEFAULT_MAX_GRID_POINTS,
) -> Iterator[OuterAuxiliary]:
    """P_X on the simplex grid crossed with every gridded row of both test channels."""
    inputs = simplex_grid(x_size, grid_res, max_points=max_points)
    kernel_rows = simplex_grid(u_card, grid_res, max_points=max_points)
    total = len(inputs) * len(kernel_rows) ** (2 * x_size)
    if total > max_points:
        raise SearchSpaceError(f"outer-bound sweep has {total} auxiliary choices, limit is {max_points}")
    for p_x in inputs:
        for picks in itertools.product(range(len(kernel_rows)), repeat=2 * x_size):
            u1 = kernel_rows[list(picks[:x_size])]
            u2 = kernel_rows[list(picks[x_size:])]
            yield OuterAuxiliary(
                Pmf(p_x),
                Kernel((x_size,), (u_card,), u1),
                Kernel((x_size,), (u_card,), u2),
            )


def dueck_input_law(beta: float) -> Pmf:
    """X0 uniform and independent of (X1, X2); P(X1 != X2) = beta, each case uniform."""
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"beta={beta!r} must lie in [0, 1]")
    probs = np.zeros(8)
    for x0 in range(2):
        for x1 in range(2):
            for x2 in range(2):
                pair = beta / 2.0 if x1 != x2 else (1.0 - beta) / 2.0
                probs[dueck_input_index(x0, x1, x2)] = 0.5 * pair
    return Pmf(probs)


def dueck_feedback_preset(choice: int, beta_prime: float) -> InnerAuxiliary:
    """U_i = X_i with the coupled input law; the V's depend on ``choice``.

    1: V1 = (X0, X1), V2 = (X0, X2), V0 = X1 xor Y'1
    2: V1 = (X0, X1), V2 = (X0, X2), V0 = X2 xor Y'2
    3: V0 = V1 = V2 = 0 (feedback not used for communication)
    """
    if choice not in DUECK_PRESETS:
        raise DomainError(f"unknown Dueck feedback preset {choice}; choose one of {DUECK_PRESETS}")
    input_law = dueck_input_law(beta_prime).flat()
    law = np.zeros((2, 2, 2, 8))
    for x0 in range(2):
        for x1 in range(2):
            for x2 in range(2):
                x = dueck_input_index(x0, x1, x2)
                law[x0, x1, x2, x] = input_law[x]

    if choice == NO_FEEDBACK:
        v_kernel = Kernel((2, 2, 2, 4), (1, 1, 1), np.ones((2, 2, 2, 4, 1, 1, 1)))
        return InnerAuxiliary(LabeledJoint(INNER_NAMES, law), v_kernel)

    table = np.zeros((2, 2, 2, 4, 2, 4, 4))
    for u0, u1, u2, z in itertools.product(range(2), range(2), range(2), range(4)):
        y1_prime, y2_prime = divmod(z, 2)
        v0 = u1 ^ y1_prime if choice == FEEDBACK_RECEIVER1 else u2 ^ y2_prime
        table[u0, u1, u2, z, v0, 2 * u0 + u1, 2 * u0 + u2] = 1.0
    return InnerAuxiliary(LabeledJoint(INNER_NAMES, law), Kernel((2, 2, 2, 4), (2, 4, 4), table))


def check_inner_aux(spec: SdmbcSpec, aux: InnerAuxiliary) -> None:
    if aux.law.alphabet_sizes["X"] != spec.x_size:
        raise ShapeMismatchError(f"auxiliary law is over {aux.law.alphabet_sizes['X']} inputs, channel has {spec.x_size}")
    if aux.v_kernel.input_shape[3] != spec.z_size:
        raise ShapeMismatchError(f"V kernel is conditioned on {aux.v_kernel.input_shape[3]} feedback symbols, channel has {spec.z_size}")


def _silent_v_kernel(u_shape: Tuple[int, ...], z_size: int) -> Kernel:
    input_shape = tuple(u_shape) + (z_size,)
    return Kernel(input_shape, (1, 1, 1), np.ones(input_shape + (1, 1, 1)))


def constant_inner_aux(input_law: Pmf, z_size: int) -> InnerAuxiliary:
    """Every auxiliary is a constant; the law only carries P_X."""
    law = input_law.flat().reshape(1, 1, 1, -1)
    return InnerAuxiliary(LabeledJoint(INNER_NAMES, law), _silent_v_kernel((1, 1, 1), z_size))


def private_input_inner_aux(input_law: Pmf, z_size: int) -> InnerAuxiliary:
    """U1 = X for receiver 1, everything else constant and the feedback unused."""
    x = input_law.flat()
    law = np.zeros((1, x.size, 1, x.size))
    law[0, np.arange(x.size), 0, np.arange(x.size)] = x
    return InnerAuxiliary(LabeledJoint(INNER_NAMES, law), _silent_v_kernel((1, x.size, 1), z_size))
