"""Parsing and serialization of the structured think/answer output format.

Model responses carry a ``<think>`` block of dimension-wise judgments
followed by an ``<answer>`` prose block. The parser is total: any input
either yields a record or raises one of the typed errors below, each
carrying the offending character span.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .core import (
    DetectionLabel,
    DimensionId,
    DimensionScore,
    NUM_DIMENSIONS,
    Preference,
    PreferenceJudgment,
    TaskKind,
    parse_rate_word,
    rate_category_to_score,
    score_to_rate_category,
)

DetectionVerdict = DetectionLabel


class CoTParseError(ValueError):
    """Base class for parse failures; ``span`` is (start, end) in the input."""

    def __init__(self, message: str, span: tuple[int, int]):
        super().__init__(message)
        self.span = span


class MissingBlock(CoTParseError):
    pass


class BadDimension(CoTParseError):
    pass


class BadValue(CoTParseError):
    pass


class IncompleteDims(CoTParseError):
    pass


@dataclass(frozen=True)
class CoTRecord:
    """A parsed model response.

    ``scores`` is populated for assessment, ``preferences`` for comparison,
    and ``notes`` (verbatim value text per dimension line) for suggestion.
    Detection records carry only the raw blocks.
    """

    task: TaskKind
    think: str
    answer: str
    scores: tuple[DimensionScore, ...] = ()
    preferences: tuple[PreferenceJudgment, ...] = ()
    notes: tuple[tuple[DimensionId, str], ...] = ()


_DIMENSION_LOOKUP = {
    dim.display_name.lower(): dim for dim in DimensionId
}
_DIMENSION_LOOKUP.update({dim.value.replace("_", " "): dim for dim in DimensionId})

_LINE_RE = re.compile(r"^\s*(?P<name>[A-Za-z][A-Za-z _]*?)\s*:\s*(?P<value>\S.*?)\s*$")
_SCORE_RE = re.compile(r"^(?P<num>\d+)\s*/\s*5(?:\s*\((?P<qual>.*)\))?\s*\.?$")
_BARE_SCORE_RE = re.compile(r"^(?P<num>\d+)(?:\s*\((?P<qual>.*)\))?\s*\.?$")
_RATE_RE = re.compile(r"^(?P<word>[A-Za-z][A-Za-z ]*?)(?:\s*\((?P<qual>.*)\))?\s*\.?$")
_PREFERENCE_PATTERNS = (
    (re.compile(r"^a\s+is\s+better\s+than\s+b\s*\.?$", re.IGNORECASE), Preference.A_BETTER),
    (re.compile(r"^b\s+is\s+better\s+than\s+a\s*\.?$", re.IGNORECASE), Preference.B_BETTER),
    (re.compile(r"^a\s+and\s+b\s+are\s+similar\s*\.?$", re.IGNORECASE), Preference.SIMILAR),
)
_DETECTION_RE = re.compile(r"\b(real|fake)\b", re.IGNORECASE)

PREFERENCE_PHRASES = {
    Preference.A_BETTER: "A is better than B",
    Preference.B_BETTER: "B is better than A",
    Preference.SIMILAR: "A and B are similar",
}


def _lookup_dimension(name: str) -> Optional[DimensionId]:
    return _DIMENSION_LOOKUP.get(" ".join(name.lower().replace("_", " ").split()))


def _parse_preference(value: str) -> Optional[Preference]:
    for pattern, preference in _PREFERENCE_PATTERNS:
        if pattern.match(value):
            return preference
    return None


def _looks_like_judgment(value: str) -> bool:
    """True when a line's value is score- or preference-shaped, meaning its
    unknown dimension name is an error rather than incidental prose."""
    return bool(
        _SCORE_RE.match(value)
        or _BARE_SCORE_RE.match(value)
        or _parse_preference(value)
        or parse_rate_word(value)
    )


def parse_dimension_lines(
    text: str,
    task: TaskKind,
    require_all: bool = True,
    base_offset: int = 0,
) -> tuple[tuple[DimensionScore, ...], tuple[PreferenceJudgment, ...], tuple[tuple[DimensionId, str], ...]]:
    """Scan ``text`` for ``Dimension: value`` lines and parse them per task.

    Dimension names match case-insensitively and in any order; the first
    occurrence of each dimension wins. Lines that do not look like
    judgments are skipped as prose.
    """
    scores: dict[DimensionId, DimensionScore] = {}
    preferences: dict[DimensionId, Preference] = {}
    notes: dict[DimensionId, str] = {}

    offset = 0
    for line in text.splitlines(keepends=True):
        start = base_offset + offset
        offset += len(line)
        match = _LINE_RE.match(line.rstrip("\n"))
        if not match:
            continue
        span = (start + match.start("name"), start + match.end("value"))
        name, value = match.group("name"), match.group("value")
        dimension = _lookup_dimension(name)
        if dimension is None:
            if _looks_like_judgment(value):
                raise BadDimension(f"unknown dimension {name!r}", span)
            continue

        if task is TaskKind.COMPARISON:
            if dimension in preferences:
                continue
            preference = _parse_preference(value)
            if preference is None:
                raise BadValue(f"cannot read preference from {value!r}", span)
            preferences[dimension] = preference
        elif task is TaskKind.SUGGESTION:
            notes.setdefault(dimension, value)
        else:
            if dimension in scores:
                continue
            scores[dimension] = _parse_score_value(dimension, value, span)

    if task is TaskKind.COMPARISON:
        found: set[DimensionId] = set(preferences)
    elif task is TaskKind.SUGGESTION:
        found = set(DimensionId)  # free-form: no cardinality requirement
    else:
        found = set(scores)
    if require_all and len(found) < NUM_DIMENSIONS:
        missing = ", ".join(d.display_name for d in DimensionId if d not in found)
        raise IncompleteDims(
            f"found {len(found)} of {NUM_DIMENSIONS} dimensions; missing: {missing}",
            (base_offset, base_offset + len(text)),
        )

    ordered_scores = tuple(scores[d] for d in DimensionId if d in scores)
    ordered_preferences = tuple(
        PreferenceJudgment(d, preferences[d]) for d in DimensionId if d in preferences
    )
    ordered_notes = tuple((d, notes[d]) for d in DimensionId if d in notes)
    return ordered_scores, ordered_preferences, ordered_notes


def _parse_score_value(
    dimension: DimensionId, value: str, span: tuple[int, int]
) -> DimensionScore:
    match = _SCORE_RE.match(value) or _BARE_SCORE_RE.match(value)
    if match:
        number = int(match.group("num"))
        if not 1 <= number <= 5:
            raise BadValue(f"score {number} outside 1..5", span)
        return DimensionScore(dimension, number, match.group("qual"))
    if dimension is DimensionId.SPEECH_RATE:
        rate_match = _RATE_RE.match(value)
        if rate_match:
            category = parse_rate_word(rate_match.group("word"))
            if category is not None:
                return DimensionScore(
                    dimension, rate_category_to_score(category), rate_match.group("qual")
                )
    raise BadValue(f"cannot read a score from {value!r}", span)


def _find_block(text: str, tag: str, start: int = 0) -> Optional[tuple[str, int, int]]:
    open_tag, close_tag = f"<{tag}>", f"</{tag}>"
    begin = text.find(open_tag, start)
    if begin < 0:
        return None
    end = text.find(close_tag, begin + len(open_tag))
    if end < 0:
        return None
    inner_start = begin + len(open_tag)
    return text[inner_start:end], inner_start, end


def parse_cot(raw: str, task: TaskKind) -> CoTRecord:
    """Parse the first well-formed think and answer blocks of a response."""
    think = _find_block(raw, "think")
    if think is None:
        raise MissingBlock("no <think> block", (0, len(raw)))
    think_text, think_start, think_end = think

    answer = _find_block(raw, "answer", think_end)
    if answer is None:
        # Allow an answer block that precedes the think block, but never one
        # nested inside it (spans must not overlap).
        answer = _find_block(raw[:think_start], "answer")
        if answer is None:
            raise MissingBlock("no <answer> block", (0, len(raw)))
    answer_text = answer[0]

    scores: tuple[DimensionScore, ...] = ()
    preferences: tuple[PreferenceJudgment, ...] = ()
    notes: tuple[tuple[DimensionId, str], ...] = ()
    if task in (TaskKind.ASSESSMENT, TaskKind.COMPARISON):
        scores, preferences, notes = parse_dimension_lines(
            think_text, task, base_offset=think_start
        )
    elif task is TaskKind.SUGGESTION:
        scores, preferences, notes = parse_dimension_lines(
            think_text, task, require_all=False, base_offset=think_start
        )

    return CoTRecord(
        task=task,
        think=think_text.strip(),
        answer=answer_text.strip(),
        scores=scores,
        preferences=preferences,
        notes=notes,
    )


def parse_detection(raw: str) -> Optional[DetectionVerdict]:
    """Return the first standalone Real/Fake token, or None when absent.

    "deepfake" does not count: the token must stand on a word boundary.
    A None result is counted as incorrect by accuracy and excluded from
    score-based detection metrics.
    """
    match = _DETECTION_RE.search(raw)
    if match is None:
        return None
    return DetectionVerdict(match.group(1).lower())


def serialize_cot(record: CoTRecord) -> str:
    """Render a record back to think/answer text; inverse of parse_cot on
    parsed fields."""
    if record.task is TaskKind.ASSESSMENT:
        if len(record.scores) != NUM_DIMENSIONS:
            raise ValueError("assessment records need all 8 dimension scores")
        body = "\n".join(_format_score_line(s) for s in record.scores)
    elif record.task is TaskKind.COMPARISON:
        if len(record.preferences) != NUM_DIMENSIONS:
            raise ValueError("comparison records need all 8 dimension preferences")
        body = "\n".join(
            f"{p.dimension.display_name}: {PREFERENCE_PHRASES[p.preference]}"
            for p in record.preferences
        )
    else:
        body = record.think
    return f"<think>\n{body}\n</think>\n<answer>\n{record.answer}\n</answer>"


def _format_score_line(score: DimensionScore) -> str:
    if score.dimension is DimensionId.SPEECH_RATE:
        value = score_to_rate_category(score.value).display_name
    else:
        value = f"{score.value}/5"
    if score.qualifier is not None:
        value += f" ({score.qualifier})"
    return f"{score.dimension.display_name}: {value}"
