"""Client for an external chat-completion LLM acting as rubric evaluator,
dimension extractor, and annotation-draft generator.

Wire protocol: HTTP POST of ``{"model", "messages", "temperature"}`` to the
configured endpoint; the response body is JSON with the generated text under
``"text"``. Endpoints of the form ``mock://<seed>`` get the bundled
deterministic mock instead of a socket, which is what offline runs and the
golden tests use.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import httpx

from . import prompts
from .core import DimensionId, DimensionScore, PreferenceJudgment, TaskKind
from .cot import parse_dimension_lines
from .prompts import Message, PromptBundle
from .reward import RewardDimension

ENDPOINT_ENV = "JUDGE_ENDPOINT"
API_KEY_ENV = "JUDGE_API_KEY"


class TransportError(Exception):
    """Wire-level failure (or scripted equivalent); retryable."""


class UnparseableVerdict(Exception):
    """The judge kept replying without an extractable value."""


@dataclass(frozen=True)
class JudgeConfig:
    endpoint: str
    model: str
    timeout: float = 30.0
    max_retries: int = 3
    parallelism: int = 4
    temperature: float = 0.0
    api_key: Optional[str] = None

    def __post_init__(self):
        if self.parallelism < 1:
            raise ValueError("parallelism cap must be at least 1")
        if self.max_retries < 0:
            raise ValueError("max retries must be non-negative")

    @classmethod
    def from_dict(cls, raw: Mapping, env: Mapping[str, str] = os.environ) -> "JudgeConfig":
        """Build from a config mapping; environment variables win for the
        endpoint and credentials."""
        return cls(
            endpoint=env.get(ENDPOINT_ENV, raw.get("endpoint", "")),
            model=raw.get("model", "judge"),
            timeout=float(raw.get("timeout", 30.0)),
            max_retries=int(raw.get("max_retries", 3)),
            parallelism=int(raw.get("parallelism", 4)),
            temperature=float(raw.get("temperature", 0.0)),
            api_key=env.get(API_KEY_ENV, raw.get("api_key")),
        )


@dataclass(frozen=True)
class JudgeVerdict:
    """One judged reply. ``score`` is set in rubric mode, the dimension
    fields in extraction mode; a missing value always means the parse
    failed, never a fabricated default."""

    raw: str
    score: Optional[int] = None
    scores: tuple[DimensionScore, ...] = ()
    preferences: tuple[PreferenceJudgment, ...] = ()
    latency: float = 0.0
    attempts: int = 1


_SCORE_TOKEN_RE = re.compile(r"\b\d+\b")


def extract_rubric_score(text: str) -> Optional[int]:
    """The last standalone integer in 0..10; robust to rubric band echoes."""
    best = None
    for match in _SCORE_TOKEN_RE.finditer(text):
        value = int(match.group())
        if 0 <= value <= 10:
            best = value
    return best


class HttpTransport:
    def __init__(self, config: JudgeConfig):
        self._config = config
        headers = {}
        if config.api_key:
            headers["Authorization"] = f"Bearer {config.api_key}"
        self._client = httpx.Client(timeout=config.timeout, headers=headers)

    def __call__(self, request: dict) -> str:
        try:
            response = self._client.post(self._config.endpoint, json=request)
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        if response.status_code != 200:
            raise TransportError(f"judge endpoint returned {response.status_code}")
        try:
            return response.json()["text"]
        except (KeyError, ValueError) as exc:
            raise TransportError(f"malformed judge response body: {exc}") from exc


def make_transport(config: JudgeConfig) -> Callable[[dict], str]:
    if config.endpoint.startswith("mock://"):
        seed = int(config.endpoint[len("mock://"):] or "0")
        return MockJudge(seed=seed)
    return HttpTransport(config)


class JudgeClient:
    """Thread-safe judge client.

    Requests are issued under the parallelism cap (a semaphore shared by all
    threads using this client) and retried with jittered exponential backoff:
    base 0.5 s, factor 2, cap 8 s. Transport errors and, in rubric mode,
    unparseable replies both count against the retry budget; exhaustion
    raises instead of defaulting.
    """

    def __init__(
        self,
        config: JudgeConfig,
        transport: Optional[Callable[[dict], str]] = None,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self._transport = transport if transport is not None else make_transport(config)
        self._sleeper = sleeper
        self._semaphore = threading.BoundedSemaphore(config.parallelism)

    def _request(self, messages: Sequence[Message]) -> dict:
        return {
            "model": self.config.model,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": self.config.temperature,
        }

    def _call_once(self, request: dict) -> str:
        with self._semaphore:
            return self._transport(request)

    def _backoff(self, attempt: int, request: dict) -> None:
        # Deterministic jitter derived from the request so retried runs
        # reproduce byte-identical schedules.
        digest = hashlib.sha256(
            json.dumps(request, sort_keys=True).encode("utf-8") + bytes([attempt % 256])
        ).digest()
        jitter = 0.5 + digest[0] / 510.0  # in [0.5, 1.0]
        self._sleeper(min(8.0, 0.5 * (2**attempt)) * jitter)

    def complete(self, bundle: PromptBundle) -> str:
        """Bare completion with transport retries; used for drafts/variants."""
        request = self._request(bundle.messages)
        for attempt in range(self.config.max_retries + 1):
            try:
                return self._call_once(request)
            except TransportError:
                if attempt == self.config.max_retries:
                    raise
                self._backoff(attempt, request)
        raise AssertionError("unreachable")

    def score_dimension(
        self,
        task: TaskKind,
        dimension: RewardDimension,
        prompt: str,
        output: str,
        ground_truth: str,
    ) -> JudgeVerdict:
        """Rubric-score one output on one dimension; extracts the last
        standalone 0..10 integer from the reply."""
        bundle = prompts.build_reward_judge_prompt(task, dimension, prompt, output, ground_truth)
        request = self._request(bundle.messages)
        started = time.monotonic()
        last_raw = ""
        for attempt in range(self.config.max_retries + 1):
            try:
                last_raw = self._call_once(request)
            except TransportError:
                if attempt == self.config.max_retries:
                    raise
                self._backoff(attempt, request)
                continue
            score = extract_rubric_score(last_raw)
            if score is None:
                if attempt == self.config.max_retries:
                    raise UnparseableVerdict(
                        f"no 0..10 integer in judge reply after {attempt + 1} attempts: "
                        f"{last_raw[:200]!r}"
                    )
                self._backoff(attempt, request)
                continue
            return JudgeVerdict(
                raw=last_raw,
                score=score,
                latency=time.monotonic() - started,
                attempts=attempt + 1,
            )
        raise AssertionError("unreachable")

    def extract_dimensions(self, task: TaskKind, description: str) -> JudgeVerdict:
        """Map prose onto the eight dimensions via the judge's fixed layout.

        Transport errors are retried; a reply that fails the dimension-line
        parser raises that parse error directly.
        """
        bundle = prompts.build_dimension_extraction_prompt(task, description)
        request = self._request(bundle.messages)
        started = time.monotonic()
        for attempt in range(self.config.max_retries + 1):
            try:
                raw = self._call_once(request)
            except TransportError:
                if attempt == self.config.max_retries:
                    raise
                self._backoff(attempt, request)
                continue
            scores, preferences, _ = parse_dimension_lines(raw, task)
            return JudgeVerdict(
                raw=raw,
                scores=scores,
                preferences=preferences,
                latency=time.monotonic() - started,
                attempts=attempt + 1,
            )
        raise AssertionError("unreachable")


@dataclass
class MockJudge:
    """Deterministic judge endpoint substitute.

    Replies are derived from a hash of the request content, so identical
    requests always get identical replies, across processes and runs.
    Failure paths are scriptable either by queueing behaviors with
    :meth:`push_script` or by embedding ``[[MOCK:TRANSPORT]]``,
    ``[[MOCK:SLOW:<s>]]`` or ``[[MOCK:UNPARSEABLE]]`` markers in the prompt.
    Tracks in-flight concurrency so cap enforcement is observable.
    """

    seed: int = 0
    hold_seconds: float = 0.0
    calls: int = 0
    max_in_flight: int = 0
    _in_flight: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _script: list = field(default_factory=list, repr=False)

    def push_script(self, *behaviors) -> None:
        """Queue replies (str) or exceptions to raise, consumed in order
        before content-derived behavior."""
        self._script.extend(behaviors)

    def _digest(self, content: str, salt: str = "") -> bytes:
        payload = f"{self.seed}|{salt}|{content}".encode("utf-8")
        return hashlib.sha256(payload).digest()

    def __call__(self, request: dict) -> str:
        with self._lock:
            self.calls += 1
            self._in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self._in_flight)
            scripted = self._script.pop(0) if self._script else None
        try:
            if self.hold_seconds:
                time.sleep(self.hold_seconds)
            if scripted is not None:
                if isinstance(scripted, Exception):
                    raise scripted
                return scripted
            return self._reply(request)
        finally:
            with self._lock:
                self._in_flight -= 1

    def _reply(self, request: dict) -> str:
        content = "\n".join(m["content"] for m in request.get("messages", []))
        if "[[MOCK:TRANSPORT]]" in content:
            raise TransportError("scripted transport failure")
        slow = re.search(r"\[\[MOCK:SLOW:([0-9.]+)\]\]", content)
        if slow:
            time.sleep(float(slow.group(1)))
            raise TransportError("scripted timeout")
        if "[[MOCK:UNPARSEABLE]]" in content:
            return "excellent"

        if "map it onto the eight quality" in content:
            if 'verdict is one of' in content and "A is better than B" in content:
                return self._extraction_reply_comparison(content)
            return self._extraction_reply_assessment(content)
        if "Score: <n>" in content:
            score = self._digest(content, "rubric")[0] % 11
            return f"The response was weighed against every rubric band. Score: {score}"
        if "Write the paragraph only." in content:
            return self._draft_reply(content)
        match = re.search(r"into (\d+) diverse variants", content)
        if match:
            return self._variant_reply(content, int(match.group(1)))
        return f"ack {self._digest(content).hex()[:12]}"

    def _extraction_reply_assessment(self, content: str) -> str:
        lines = []
        rates = ("Slow", "Slightly Slow", "Appropriate", "Slightly Fast", "Fast")
        for dim in DimensionId:
            digest = self._digest(content, dim.value)
            if dim is DimensionId.SPEECH_RATE:
                lines.append(f"{dim.display_name}: {rates[digest[0] % 5]}")
            else:
                lines.append(f"{dim.display_name}: {digest[0] % 5 + 1}/5")
        return "\n".join(lines)

    def _extraction_reply_comparison(self, content: str) -> str:
        phrases = ("A is better than B", "B is better than A", "A and B are similar")
        return "\n".join(
            f"{dim.display_name}: {phrases[self._digest(content, dim.value)[0] % 3]}"
            for dim in DimensionId
        )

    def _draft_reply(self, content: str) -> str:
        digest = self._digest(content, "draft")
        clarity = ("poor", "limited", "acceptable", "good", "excellent")[digest[0] % 5]
        pacing = ("slow", "steady", "appropriate", "brisk")[digest[1] % 4]
        feel = ("flat", "restrained", "engaging", "expressive")[digest[2] % 4]
        return (
            f"The recording shows {clarity} production quality with {pacing} pacing. "
            f"Subjectively the delivery feels {feel}, and the listening experience "
            f"matches the questionnaire judgments throughout."
        )

    def _variant_reply(self, content: str, k: int) -> str:
        lines = []
        for i in range(1, k + 1):
            token = self._digest(content, f"variant{i}").hex()[:8]
            lines.append(
                f"{i}. Variant {i} of the description, rephrased while keeping "
                f"every judgment intact ({token})."
            )
        return "\n".join(lines)
