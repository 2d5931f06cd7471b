"""Seeded i.i.d. simulation of states, channel outputs, feedback and estimates.

Rounds are split into fixed-size blocks. Block ``b`` draws from its own
PCG64 stream, spawned as child ``b`` of ``SeedSequence(seed)``, and block
sums are reduced in block order, so results do not depend on the thread count.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .channels import DistortionMeasure, SdmbcSpec
from .config import DEFAULT_SIM_BLOCK_SIZE
from .errors import DomainError, ShapeMismatchError
from .estimation import EstimatorTable
from .logging_utils import channel_log_context, log_with_context
from .parallel import ordered_map
from .prob import Pmf


@dataclass(frozen=True)
class SimConfig:
    n: int
    seed: int = 0
    input_law: Optional[Pmf] = None
    block_size: int = DEFAULT_SIM_BLOCK_SIZE
    threads: int = 1

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"sample count must be at least 1, got {self.n}")
        if self.seed < 0:
            raise DomainError(f"seed must be non-negative, got {self.seed}")
        if self.block_size < 1:
            raise DomainError(f"block size must be at least 1, got {self.block_size}")

    def law_for(self, spec: SdmbcSpec) -> np.ndarray:
        law = Pmf.uniform(spec.x_size) if self.input_law is None else self.input_law
        if law.support_size != spec.x_size:
            raise ShapeMismatchError(f"input law has {law.support_size} symbols, channel input has {spec.x_size}")
        return law.flat()

    def blocks(self) -> List[Tuple[int, int]]:
        return [(start, min(start + self.block_size, self.n)) for start in range(0, self.n, self.block_size)]


@dataclass(frozen=True, eq=False)
class FeedbackStats:
    """Empirical P(Z = z | X = x) with binomial standard errors; rows of unseen inputs are NaN."""

    counts: np.ndarray
    frequencies: np.ndarray
    stderr: np.ndarray

    @classmethod
    def from_counts(cls, counts: np.ndarray) -> "FeedbackStats":
        totals = counts.sum(axis=1, keepdims=True).astype(float)
        with np.errstate(invalid="ignore", divide="ignore"):
            frequencies = np.where(totals > 0, counts / totals, np.nan)
            stderr = np.where(totals > 0, np.sqrt(frequencies * (1.0 - frequencies) / totals), np.nan)
        return cls(counts, frequencies, stderr)

    def table(self) -> List[List[Optional[float]]]:
        return [[None if math.isnan(value) else float(value) for value in row] for row in self.frequencies]


@dataclass(frozen=True, eq=False)
class SimResult:
    n: int
    seed: int
    mean: Tuple[float, float]
    stderr: Tuple[float, float]
    feedback: FeedbackStats = field(repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "seed": self.seed,
            "receivers": [
                {"k": k, "mean": self.mean[k - 1], "stderr": self.stderr[k - 1]} for k in (1, 2)
            ],
            "feedback_frequencies": self.feedback.table(),
        }


def _cumulative(table: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(table, axis=-1)
    cdf[..., -1] = 1.0
    return cdf


def _inverse_cdf(cdf: np.ndarray, rows: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Symbol index per draw from the cumulative row ``cdf[rows[i]]``."""
    picks = np.empty(uniforms.size, dtype=np.int64)
    for row in np.unique(rows):
        mask = rows == row
        picks[mask] = np.searchsorted(cdf[row], uniforms[mask], side="right")
    return np.minimum(picks, cdf.shape[-1] - 1)


@dataclass(frozen=True, eq=False)
class _Sampler:
    spec: SdmbcSpec
    input_cdf: np.ndarray
    state_cdf: np.ndarray
    output_cdf: np.ndarray

    @classmethod
    def build(cls, spec: SdmbcSpec, input_law: np.ndarray) -> "_Sampler":
        outputs = spec.transition.table.reshape(spec.s1_size * spec.s2_size * spec.x_size, -1)
        return cls(
            spec,
            _cumulative(input_law),
            _cumulative(spec.state_law.flat()),
            _cumulative(outputs),
        )

    def draw(self, rng: np.random.Generator, size: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(x, s1, s2, z) for ``size`` rounds."""
        spec = self.spec
        x = np.minimum(np.searchsorted(self.input_cdf, rng.random(size), side="right"), spec.x_size - 1)
        states = np.minimum(np.searchsorted(self.state_cdf, rng.random(size), side="right"), self.state_cdf.size - 1)
        s1, s2 = np.divmod(states, spec.s2_size)
        rows = states * spec.x_size + x
        outputs = _inverse_cdf(self.output_cdf, rows, rng.random(size))
        z = outputs % spec.z_size
        return x, s1, s2, z


def _block_streams(cfg: SimConfig) -> List[Tuple[Tuple[int, int], np.random.SeedSequence]]:
    blocks = cfg.blocks()
    return list(zip(blocks, np.random.SeedSequence(cfg.seed).spawn(len(blocks))))


def simulate(
    spec: SdmbcSpec,
    estimator: EstimatorTable,
    d: Optional[DistortionMeasure],
    cfg: SimConfig,
) -> SimResult:
    """Mean per-round distortion of ``estimator`` with plug-in standard errors."""
    measure = spec.distortion if d is None else d
    assert measure is not None
    if estimator.decisions.shape[1:] != (spec.x_size, spec.z_size):
        raise ShapeMismatchError("estimator does not match the channel's (X, Z) alphabets")
    sampler = _Sampler.build(spec, cfg.law_for(spec))
    matrices = (measure.matrix(1), measure.matrix(2))

    def run(block: Tuple[Tuple[int, int], np.random.SeedSequence]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        (start, stop), stream = block
        rng = np.random.Generator(np.random.PCG64(stream))
        x, s1, s2, z = sampler.draw(rng, stop - start)
        losses = np.stack(
            [
                matrices[0][s1, estimator.decisions[0][x, z]],
                matrices[1][s2, estimator.decisions[1][x, z]],
            ]
        )
        counts = np.zeros((spec.x_size, spec.z_size), dtype=np.int64)
        np.add.at(counts, (x, z), 1)
        return losses.sum(axis=1), (losses * losses).sum(axis=1), counts

    totals = np.zeros(2)
    squares = np.zeros(2)
    counts = np.zeros((spec.x_size, spec.z_size), dtype=np.int64)
    for block_sum, block_squares, block_counts in ordered_map(run, _block_streams(cfg), cfg.threads):
        totals += block_sum
        squares += block_squares
        counts += block_counts

    mean = totals / cfg.n
    variance = np.maximum(squares / cfg.n - mean * mean, 0.0)
    stderr = np.sqrt(variance / cfg.n)
    result = SimResult(
        cfg.n,
        cfg.seed,
        (float(mean[0]), float(mean[1])),
        (float(stderr[0]), float(stderr[1])),
        FeedbackStats.from_counts(counts),
    )
    log_with_context(
        logging.INFO,
        "Simulation finished",
        **channel_log_context(spec),
        n=cfg.n,
        seed=cfg.seed,
        d1=result.mean[0],
        d2=result.mean[1],
    )
    return result


def simulate_feedback_stats(spec: SdmbcSpec, cfg: SimConfig) -> FeedbackStats:
    """Empirical feedback law per input symbol, from the same streams ``simulate`` uses."""
    sampler = _Sampler.build(spec, cfg.law_for(spec))

    def run(block: Tuple[Tuple[int, int], np.random.SeedSequence]) -> np.ndarray:
        (start, stop), stream = block
        rng = np.random.Generator(np.random.PCG64(stream))
        x, _, _, z = sampler.draw(rng, stop - start)
        counts = np.zeros((spec.x_size, spec.z_size), dtype=np.int64)
        np.add.at(counts, (x, z), 1)
        return counts

    counts = np.zeros((spec.x_size, spec.z_size), dtype=np.int64)
    for block_counts in ordered_map(run, _block_streams(cfg), cfg.threads):
        counts += block_counts
    log_with_context(logging.DEBUG, "Feedback statistics collected", **channel_log_context(spec), n=cfg.n)
    return FeedbackStats.from_counts(counts)
