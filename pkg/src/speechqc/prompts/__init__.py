"""Prompt construction from versioned text assets.

Task prompts come in two styles: the compact tuned-model templates and the
long-form criteria prompts used with untuned models (the latter are
reconstructions and versioned as our own). Judge prompts embed the fixed
rubric band blocks. Every asset is a UTF-8 text file under ``assets/`` and
is hash-pinned by the test suite; edit an asset and the checksum test fails
on purpose.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Sequence

from ..core import Sample, TaskKind
from ..reward import RewardDimension

AUDIO_PLACEHOLDER = "<AUDIO_PLACEHOLDER>"
AUDIO_A_PLACEHOLDER = "<AUDIO_A_PLACEHOLDER>"
AUDIO_B_PLACEHOLDER = "<AUDIO_B_PLACEHOLDER>"


class PromptStyle(str, Enum):
    TUNED = "tuned"
    ZEROSHOT = "zeroshot"


@dataclass(frozen=True)
class Message:
    role: str  # "system" | "user"
    content: str


@dataclass(frozen=True)
class PromptBundle:
    """Ordered role-tagged messages plus the audio paths the placeholders
    stand for."""

    task: TaskKind
    messages: tuple[Message, ...]
    audio_slots: tuple[str, ...] = ()

    def rendered(self) -> str:
        return "\n".join(m.content for m in self.messages)


@lru_cache(maxsize=None)
def asset_text(name: str) -> str:
    return (resources.files(__package__) / "assets" / name).read_text(encoding="utf-8")


def asset_names() -> list[str]:
    root = resources.files(__package__) / "assets"
    return sorted(entry.name for entry in root.iterdir() if entry.name.endswith(".txt"))


def asset_hashes() -> dict[str, str]:
    """sha256 of every asset, recorded in report provenance blocks."""
    return {
        name: hashlib.sha256(asset_text(name).encode("utf-8")).hexdigest()
        for name in asset_names()
    }


_PLACEHOLDERS_BY_ARITY = {
    1: (AUDIO_PLACEHOLDER,),
    2: (AUDIO_A_PLACEHOLDER, AUDIO_B_PLACEHOLDER),
}


def _check_placeholders(text: str, placeholders: Sequence[str]) -> None:
    for token in placeholders:
        count = text.count(token)
        if count != 1:
            raise ValueError(f"placeholder {token} appears {count} times, expected 1")


def build_task_prompt(
    task: TaskKind, samples: Sequence[Sample], style: PromptStyle = PromptStyle.TUNED
) -> PromptBundle:
    """Build the prompt for one task item; sample count must match the task."""
    if len(samples) != task.sample_arity:
        raise ValueError(
            f"task {task.value} takes {task.sample_arity} sample(s), got {len(samples)}"
        )
    prefix = "task" if style is PromptStyle.TUNED else "zeroshot"
    text = asset_text(f"{prefix}_{task.value}.txt")
    placeholders = _PLACEHOLDERS_BY_ARITY[task.sample_arity]
    _check_placeholders(text, placeholders)
    return PromptBundle(
        task=task,
        messages=(Message("user", text),),
        audio_slots=tuple(s.audio_path for s in samples),
    )


_DIMENSION_LABELS = {
    RewardDimension.HELPFULNESS: "Helpfulness",
    RewardDimension.RELEVANCE: "Relevance",
    RewardDimension.ACCURACY: "Accuracy",
    RewardDimension.DETAIL: "Level of Detail",
}


def build_reward_judge_prompt(
    task: TaskKind,
    dimension: RewardDimension,
    prompt: str,
    output: str,
    ground_truth: str,
) -> PromptBundle:
    """Rubric evaluation prompt for one (task, dimension) pair.

    Detection is rejected: its reward is the exact-match indicator and never
    goes through a judge.
    """
    if not task.is_generative:
        raise ValueError("detection rewards are indicator-based; no judge prompt exists")
    rubric = asset_text(f"rubric_{dimension.value}_{task.value}.txt").rstrip("\n")
    body = asset_text("judge_rubric.txt").format(
        dimension_label=_DIMENSION_LABELS[dimension],
        task_label=task.value,
        rubric=rubric,
        prompt=prompt,
        output=output,
        ground_truth=ground_truth,
    )
    return PromptBundle(
        task=task,
        messages=(Message("system", asset_text("judge_system.txt")), Message("user", body)),
    )


def build_dimension_extraction_prompt(task: TaskKind, description: str) -> PromptBundle:
    """Prompt asking the judge to map prose onto the eight dimensions, in the
    same line layout the CoT parser reads."""
    if task not in (TaskKind.ASSESSMENT, TaskKind.COMPARISON):
        raise ValueError(f"dimension extraction supports assessment/comparison, not {task.value}")
    if not description.strip():
        raise ValueError("description must be non-empty")
    body = asset_text(f"extract_{task.value}.txt").format(description=description)
    return PromptBundle(
        task=task,
        messages=(Message("system", asset_text("judge_system.txt")), Message("user", body)),
    )


def build_draft_prompt(questionnaire: str) -> PromptBundle:
    """Annotation-workflow prompt: draft one description from questionnaire
    fields (our reconstruction of the assistant step)."""
    if not questionnaire.strip():
        raise ValueError("questionnaire text must be non-empty")
    body = asset_text("draft_generation.txt").format(questionnaire=questionnaire)
    return PromptBundle(
        task=TaskKind.ASSESSMENT,
        messages=(Message("system", asset_text("judge_system.txt")), Message("user", body)),
    )


def build_variant_prompt(description: str, k: int) -> PromptBundle:
    if k < 1:
        raise ValueError("need at least one variant")
    if not description.strip():
        raise ValueError("description must be non-empty")
    body = asset_text("variant_generation.txt").format(description=description, k=k)
    return PromptBundle(
        task=TaskKind.ASSESSMENT,
        messages=(Message("system", asset_text("judge_system.txt")), Message("user", body)),
    )
