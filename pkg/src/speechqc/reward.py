"""Rubric reward arithmetic and the composite instruction-tuning loss.

Only the arithmetic lives here: normalization of evaluator scores, fixed
weight aggregation, the reasoning/answer loss combination, and group
advantage normalization. Policy optimization itself is out of scope; the
JSON-lines reward log is the hand-off point for external trainers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .core import GENERATIVE_TASKS, TaskKind

NUM_LOSS_DIMENSIONS = 8


class RewardDimension(str, Enum):
    HELPFULNESS = "helpfulness"
    RELEVANCE = "relevance"
    ACCURACY = "accuracy"
    DETAIL = "detail"


@dataclass(frozen=True)
class RewardWeights:
    """Per-dimension aggregation weights; defaults (1, 1, 2, 0.5)."""

    helpfulness: float = 1.0
    relevance: float = 1.0
    accuracy: float = 2.0
    detail: float = 0.5

    def __post_init__(self):
        values = self.as_tuple()
        if any(w < 0 for w in values):
            raise ValueError("weights must be non-negative")
        if not any(w > 0 for w in values):
            raise ValueError("at least one weight must be positive")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.helpfulness, self.relevance, self.accuracy, self.detail)

    def weight_of(self, dimension: RewardDimension) -> float:
        return getattr(self, dimension.value)

    @property
    def total(self) -> float:
        return math.fsum(self.as_tuple())


@dataclass(frozen=True)
class RewardBreakdown:
    """Normalized per-dimension rewards and their weighted total."""

    rewards: dict[RewardDimension, float]
    total: float
    weights: RewardWeights

    @property
    def normalized_total(self) -> float:
        return self.total / self.weights.total


def normalize_reward(
    task: TaskKind,
    evaluator_score: Optional[int] = None,
    match: Optional[bool] = None,
) -> float:
    """Normalize one dimension's raw signal into [0, 1].

    Generative tasks divide the 0..10 evaluator integer by 10; detection
    uses the exact-match indicator (no evaluator involved).
    """
    if task in GENERATIVE_TASKS:
        if evaluator_score is None:
            raise ValueError(f"task {task.value} requires an evaluator score")
        if not 0 <= evaluator_score <= 10:
            raise ValueError(f"evaluator score must be in 0..10, got {evaluator_score}")
        return evaluator_score / 10.0
    if match is None:
        raise ValueError("detection requires the match indicator")
    return 1.0 if match else 0.0


def total_reward(
    rewards: dict[RewardDimension, float], weights: RewardWeights = RewardWeights()
) -> RewardBreakdown:
    """Weighted sum of the four normalized rewards.

    Summation uses math.fsum so that the exact decimal totals of the default
    weights (for example 4.5 for all-ones) come out bit-exact.
    """
    missing = [d.value for d in RewardDimension if d not in rewards]
    if missing:
        raise ValueError(f"missing reward dimensions: {', '.join(missing)}")
    for dimension, value in rewards.items():
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{dimension.value} reward {value} outside [0, 1]")
    total = math.fsum(
        weights.weight_of(dimension) * rewards[dimension]
        for dimension in RewardDimension
    )
    return RewardBreakdown(rewards=dict(rewards), total=total, weights=weights)


def score_rewards(
    task: TaskKind,
    evaluator_scores: Optional[dict[RewardDimension, int]] = None,
    match: Optional[bool] = None,
    weights: RewardWeights = RewardWeights(),
) -> RewardBreakdown:
    """Normalize and aggregate in one step.

    For detection the indicator applies identically to all four dimensions,
    so the weighted form stays well defined there too.
    """
    if task in GENERATIVE_TASKS:
        if evaluator_scores is None:
            raise ValueError("generative tasks require evaluator scores")
        rewards = {
            d: normalize_reward(task, evaluator_score=evaluator_scores[d])
            for d in RewardDimension
        }
    else:
        rewards = {d: normalize_reward(task, match=match) for d in RewardDimension}
    return total_reward(rewards, weights)


@dataclass(frozen=True)
class LossSpec:
    """Inputs to the composite loss: eight per-dimension reasoning losses,
    one answer loss, and the reasoning contribution weight."""

    dim_losses: tuple[float, ...]
    ans_loss: float
    lambda_cot: float = 0.3

    def __post_init__(self):
        if len(self.dim_losses) != NUM_LOSS_DIMENSIONS:
            raise ValueError(
                f"expected {NUM_LOSS_DIMENSIONS} dimension losses, got {len(self.dim_losses)}"
            )
        for value in (*self.dim_losses, self.ans_loss):
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"losses must be finite and non-negative, got {value}")


def cot_loss(spec: LossSpec) -> float:
    """lambda * sum of the eight dimension losses, plus the answer loss."""
    return spec.lambda_cot * math.fsum(spec.dim_losses) + spec.ans_loss


def group_advantages(rewards: Sequence[float], epsilon: float = 1e-8) -> list[float]:
    """Mean-centered, std-normalized advantages for one prompt's candidate
    group. A zero-variance group gets all-zero advantages."""
    if len(rewards) < 2:
        raise ValueError("group size must be at least 2")
    mean = math.fsum(rewards) / len(rewards)
    variance = math.fsum((r - mean) ** 2 for r in rewards) / len(rewards)
    std = math.sqrt(variance)
    if std < epsilon:
        return [0.0] * len(rewards)
    return [(r - mean) / (std + epsilon) for r in rewards]


@dataclass(frozen=True)
class RewardLogEntry:
    prompt_id: str
    candidate_id: str
    breakdown: RewardBreakdown
    advantage: Optional[float] = None

    def to_record(self) -> dict:
        record = {
            "prompt_id": self.prompt_id,
            "candidate_id": self.candidate_id,
            "r_total": self.breakdown.total,
            "r_total_normalized": self.breakdown.normalized_total,
            "advantage": self.advantage,
        }
        for dimension in RewardDimension:
            record[f"r_{dimension.value}"] = self.breakdown.rewards[dimension]
        return record


def write_reward_log(path: str | Path, entries: Iterable[RewardLogEntry]) -> None:
    """Append-free JSON-lines dump for consumption by external trainers."""
    with open(path, "w", encoding="utf-8") as handle:
        for entry in entries:
            handle.write(json.dumps(entry.to_record(), sort_keys=True) + "\n")
