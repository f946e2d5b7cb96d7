"""Domain types shared across the speech quality evaluation stack.

Samples, annotations, the four evaluation tasks, and the eight-dimension
scoring schema, plus schema validation and manifest record conversion.
Everything here is an immutable value; instances are safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

SCHEMA_VERSION = 1


class TaskKind(str, Enum):
    """The four evaluation tasks."""

    ASSESSMENT = "assessment"
    COMPARISON = "comparison"
    SUGGESTION = "suggestion"
    DETECTION = "detection"

    @property
    def is_generative(self) -> bool:
        return self in GENERATIVE_TASKS

    @property
    def sample_arity(self) -> int:
        return 2 if self is TaskKind.COMPARISON else 1


# The three free-text tasks; detection sits outside this set and is scored
# by exact label match rather than by a rubric judge.
GENERATIVE_TASKS = frozenset(
    {TaskKind.ASSESSMENT, TaskKind.COMPARISON, TaskKind.SUGGESTION}
)


class DimensionId(str, Enum):
    """The eight quality dimensions every structured judgment covers."""

    OVERALL_QUALITY = "overall_quality"
    INTELLIGIBILITY = "intelligibility"
    DISTORTION = "distortion"
    SPEECH_RATE = "speech_rate"
    DYNAMIC_RANGE = "dynamic_range"
    EMOTIONAL_IMPACT = "emotional_impact"
    ARTISTIC_EXPRESSION = "artistic_expression"
    SUBJECTIVE_EXPERIENCE = "subjective_experience"

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]


_DISPLAY_NAMES = {
    DimensionId.OVERALL_QUALITY: "Overall Quality",
    DimensionId.INTELLIGIBILITY: "Intelligibility",
    DimensionId.DISTORTION: "Distortion",
    DimensionId.SPEECH_RATE: "Speech Rate",
    DimensionId.DYNAMIC_RANGE: "Dynamic Range",
    DimensionId.EMOTIONAL_IMPACT: "Emotional Impact",
    DimensionId.ARTISTIC_EXPRESSION: "Artistic Expression",
    DimensionId.SUBJECTIVE_EXPERIENCE: "Subjective Experience",
}

NUM_DIMENSIONS = len(DimensionId)
assert NUM_DIMENSIONS == 8


class RateCategory(str, Enum):
    """Speech rate categories, bijective with the 1..5 rate scores."""

    SLOW = "slow"
    SLIGHTLY_SLOW = "slightly_slow"
    APPROPRIATE = "appropriate"
    SLIGHTLY_FAST = "slightly_fast"
    FAST = "fast"

    @property
    def display_name(self) -> str:
        return {
            RateCategory.SLOW: "Slow",
            RateCategory.SLIGHTLY_SLOW: "Slightly Slow",
            RateCategory.APPROPRIATE: "Appropriate",
            RateCategory.SLIGHTLY_FAST: "Slightly Fast",
            RateCategory.FAST: "Fast",
        }[self]


_RATE_TO_SCORE = {
    RateCategory.SLOW: 1,
    RateCategory.SLIGHTLY_SLOW: 2,
    RateCategory.APPROPRIATE: 3,
    RateCategory.SLIGHTLY_FAST: 4,
    RateCategory.FAST: 5,
}
_SCORE_TO_RATE = {v: k for k, v in _RATE_TO_SCORE.items()}

# Lexicon accepted for rate categories when parsing free text. Annotation
# and model text uses "suitable"/"moderate" interchangeably with
# "appropriate"; all are canonicalized here.
RATE_SYNONYMS: dict[str, RateCategory] = {
    "slow": RateCategory.SLOW,
    "slightly slow": RateCategory.SLIGHTLY_SLOW,
    "appropriate": RateCategory.APPROPRIATE,
    "suitable": RateCategory.APPROPRIATE,
    "moderate": RateCategory.APPROPRIATE,
    "slightly fast": RateCategory.SLIGHTLY_FAST,
    "fast": RateCategory.FAST,
}


def rate_category_to_score(category: RateCategory) -> int:
    """Map a rate category to its 1..5 score (Slow=1 .. Fast=5)."""
    return _RATE_TO_SCORE[category]


def score_to_rate_category(score: int) -> RateCategory:
    """Inverse of :func:`rate_category_to_score`; rejects scores outside 1..5."""
    try:
        return _SCORE_TO_RATE[score]
    except KeyError:
        raise ValueError(f"rate score must be in 1..5, got {score!r}") from None


def parse_rate_word(text: str) -> Optional[RateCategory]:
    """Canonicalize a free-text rate word, or None if unrecognized."""
    return RATE_SYNONYMS.get(" ".join(text.lower().split()))


class Preference(str, Enum):
    """Pairwise preference for one dimension of a comparison."""

    A_BETTER = "a_better"
    B_BETTER = "b_better"
    SIMILAR = "similar"


class Language(str, Enum):
    EN = "en"
    ZH = "zh"
    JA = "ja"
    FR = "fr"


class Authenticity(str, Enum):
    REAL = "real"
    FAKE = "fake"
    UNKNOWN = "unknown"


class Gender(str, Enum):
    MALE = "male"
    FEMALE = "female"
    UNKNOWN = "unknown"


class DetectionLabel(str, Enum):
    """Ground-truth authenticity label carried by detection annotations."""

    REAL = "real"
    FAKE = "fake"


@dataclass(frozen=True)
class Sample:
    """One audio item with provenance metadata. audio_path is opaque."""

    id: str
    language: Language
    speaker_id: str
    source_id: str
    text_id: str
    audio_path: str
    authenticity: Authenticity = Authenticity.UNKNOWN

    def to_record(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "sample",
            "id": self.id,
            "language": self.language.value,
            "speaker_id": self.speaker_id,
            "source_id": self.source_id,
            "text_id": self.text_id,
            "audio_path": self.audio_path,
            "authenticity": self.authenticity.value,
        }

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "Sample":
        return cls(
            id=record["id"],
            language=Language(record["language"]),
            speaker_id=record["speaker_id"],
            source_id=record["source_id"],
            text_id=record["text_id"],
            audio_path=record["audio_path"],
            authenticity=Authenticity(record.get("authenticity", "unknown")),
        )


@dataclass(frozen=True)
class DimensionScore:
    """A 1..5 judgment for one dimension, with an optional short qualifier.

    Speech rate scores sit on the slow(1) to fast(5) axis rather than a
    quality axis; use :func:`score_to_rate_category` to read them.
    """

    dimension: DimensionId
    value: int
    qualifier: Optional[str] = None

    def to_record(self) -> dict[str, Any]:
        return {
            "dimension": self.dimension.value,
            "value": self.value,
            "qualifier": self.qualifier,
        }

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "DimensionScore":
        return cls(
            dimension=DimensionId(record["dimension"]),
            value=int(record["value"]),
            qualifier=record.get("qualifier"),
        )


@dataclass(frozen=True)
class PreferenceJudgment:
    """A per-dimension A/B/Similar call for a comparison annotation."""

    dimension: DimensionId
    preference: Preference

    def to_record(self) -> dict[str, Any]:
        return {"dimension": self.dimension.value, "preference": self.preference.value}

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "PreferenceJudgment":
        return cls(
            dimension=DimensionId(record["dimension"]),
            preference=Preference(record["preference"]),
        )


@dataclass(frozen=True)
class CategoricalMetadata:
    """The three categorical annotation fields.

    Distortion and emotion vocabularies are open ended, so they stay plain
    strings with "unknown" as the explicit absent value.
    """

    distortion_type: str = "unknown"
    emotion_type: str = "unknown"
    gender: Gender = Gender.UNKNOWN

    def to_record(self) -> dict[str, Any]:
        return {
            "distortion_type": self.distortion_type,
            "emotion_type": self.emotion_type,
            "gender": self.gender.value,
        }

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "CategoricalMetadata":
        return cls(
            distortion_type=record.get("distortion_type", "unknown"),
            emotion_type=record.get("emotion_type", "unknown"),
            gender=Gender(record.get("gender", "unknown")),
        )


@dataclass(frozen=True)
class OpenFields:
    """Free-text annotation fields, stored verbatim."""

    distortion_duration: str = ""
    distortion_severity: str = ""
    perceptual_description: str = ""
    speaker_age: str = ""
    speaking_tone: str = ""

    def to_record(self) -> dict[str, Any]:
        return {
            "distortion_duration": self.distortion_duration,
            "distortion_severity": self.distortion_severity,
            "perceptual_description": self.perceptual_description,
            "speaker_age": self.speaker_age,
            "speaking_tone": self.speaking_tone,
        }

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "OpenFields":
        return cls(
            distortion_duration=record.get("distortion_duration", ""),
            distortion_severity=record.get("distortion_severity", ""),
            perceptual_description=record.get("perceptual_description", ""),
            speaker_age=record.get("speaker_age", ""),
            speaking_tone=record.get("speaking_tone", ""),
        )


@dataclass(frozen=True)
class Annotation:
    """One per-task label record.

    Assessment and suggestion annotations carry ``scores``; comparison
    annotations carry ``preferences``; detection annotations carry ``label``
    and nothing dimension-wise. Construction never raises on bad shape so
    that records read from disk can be validated with
    :func:`validate_annotation`, which reports every violation.
    """

    sample_ids: tuple[str, ...]
    task: TaskKind
    scores: tuple[DimensionScore, ...] = ()
    preferences: tuple[PreferenceJudgment, ...] = ()
    metadata: CategoricalMetadata = field(default_factory=CategoricalMetadata)
    open_fields: OpenFields = field(default_factory=OpenFields)
    description: str = ""
    label: Optional[DetectionLabel] = None

    @property
    def key(self) -> str:
        """Join key used to match model outputs: sample id, or "a+b" for pairs."""
        return "+".join(self.sample_ids)

    def to_record(self) -> dict[str, Any]:
        if self.task is TaskKind.COMPARISON:
            scores: list[dict[str, Any]] = [p.to_record() for p in self.preferences]
        else:
            scores = [s.to_record() for s in self.scores]
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "annotation",
            "sample_ids": list(self.sample_ids),
            "task": self.task.value,
            "scores": scores,
            "metadata": self.metadata.to_record(),
            "open_fields": self.open_fields.to_record(),
            "description": self.description,
            "label": self.label.value if self.label is not None else None,
        }

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> "Annotation":
        task = TaskKind(record["task"])
        raw_scores = record.get("scores", [])
        scores: tuple[DimensionScore, ...] = ()
        preferences: tuple[PreferenceJudgment, ...] = ()
        if task is TaskKind.COMPARISON:
            preferences = tuple(PreferenceJudgment.from_record(s) for s in raw_scores)
        else:
            scores = tuple(DimensionScore.from_record(s) for s in raw_scores)
        label = record.get("label")
        return cls(
            sample_ids=tuple(record["sample_ids"]),
            task=task,
            scores=scores,
            preferences=preferences,
            metadata=CategoricalMetadata.from_record(record.get("metadata", {})),
            open_fields=OpenFields.from_record(record.get("open_fields", {})),
            description=record.get("description", ""),
            label=DetectionLabel(label) if label is not None else None,
        )


def validate_annotation(annotation: Annotation) -> list[str]:
    """Check an annotation against the schema; returns every violation found.

    An empty list means the annotation conforms. Violations are data, not
    failures: callers decide whether to reject, log, or repair.
    """
    violations: list[str] = []
    task = annotation.task

    expected_arity = task.sample_arity
    if len(annotation.sample_ids) != expected_arity:
        violations.append(
            f"task {task.value} requires {expected_arity} sample id(s), "
            f"got {len(annotation.sample_ids)}"
        )

    if task is TaskKind.COMPARISON:
        if annotation.scores:
            violations.append("comparison annotations must not carry scalar scores")
        violations.extend(_check_dimension_coverage(
            [p.dimension for p in annotation.preferences], "preference"))
    elif task is TaskKind.ASSESSMENT:
        if annotation.preferences:
            violations.append("assessment annotations must not carry preferences")
        violations.extend(_check_dimension_coverage(
            [s.dimension for s in annotation.scores], "score"))
        violations.extend(_check_score_ranges(annotation.scores))
    elif task is TaskKind.SUGGESTION:
        # Suggestion questionnaires may carry any subset of dimension scores.
        if annotation.preferences:
            violations.append("suggestion annotations must not carry preferences")
        seen: set[DimensionId] = set()
        for score in annotation.scores:
            if score.dimension in seen:
                violations.append(f"duplicate dimension {score.dimension.value}")
            seen.add(score.dimension)
        violations.extend(_check_score_ranges(annotation.scores))
    elif task is TaskKind.DETECTION:
        if annotation.label is None:
            violations.append("detection annotations require a real/fake label")
        if annotation.scores or annotation.preferences:
            violations.append("detection annotations must not carry dimension entries")

    if task is not TaskKind.DETECTION and annotation.label is not None:
        violations.append(f"label is only valid for detection, not {task.value}")

    return violations


def _check_dimension_coverage(dimensions: list[DimensionId], what: str) -> list[str]:
    violations = []
    if len(dimensions) != NUM_DIMENSIONS:
        violations.append(
            f"expected {NUM_DIMENSIONS} dimension {what} entries, got {len(dimensions)}"
        )
    seen: set[DimensionId] = set()
    for dim in dimensions:
        if dim in seen:
            violations.append(f"duplicate dimension {dim.value}")
        seen.add(dim)
    missing = [d.value for d in DimensionId if d not in seen]
    if missing and len(dimensions) == NUM_DIMENSIONS:
        violations.append(f"missing dimensions: {', '.join(missing)}")
    return violations


def _check_score_ranges(scores: tuple[DimensionScore, ...]) -> list[str]:
    return [
        f"{s.dimension.value} score {s.value} outside 1..5"
        for s in scores
        if not 1 <= s.value <= 5
    ]
