"""Manifest ingestion, deterministic split assignment, and leakage auditing.

Split assignment is a pure function of (manifest, policies, seed): shuffling
uses an explicit splitmix64 stream so results are byte-identical across runs
and portable across platforms and language runtimes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from .core import Annotation, Authenticity, Sample, TaskKind

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """splitmix64 generator (documented constants, stable output stream)."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Unbiased draw from [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % n)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def _fnv1a64(text: str) -> int:
    value = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        value ^= byte
        value = (value * 0x100000001B3) & _MASK64
    return value


class Split(str, Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


SPLITS = (Split.TRAIN, Split.VAL, Split.TEST)

DEFAULT_RATIO = (7.0, 1.5, 1.5)


@dataclass(frozen=True)
class SplitPolicy:
    """A train:val:test ratio triple for one source."""

    train: float
    val: float
    test: float

    def __post_init__(self):
        ratios = (self.train, self.val, self.test)
        if any(r < 0 for r in ratios) or not any(r > 0 for r in ratios):
            raise ValueError(f"ratios must be non-negative with one nonzero: {ratios}")

    @property
    def ratios(self) -> tuple[float, float, float]:
        return (self.train, self.val, self.test)

    @property
    def pinned_split(self) -> Optional[Split]:
        """The single split this policy allows, if exactly one ratio is nonzero."""
        nonzero = [s for s, r in zip(SPLITS, self.ratios) if r > 0]
        return nonzero[0] if len(nonzero) == 1 else None

    @classmethod
    def parse(cls, text: str) -> "SplitPolicy":
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"policy must look like 'a:b:c', got {text!r}")
        return cls(*(float(p) for p in parts))

    def __str__(self) -> str:
        return ":".join(f"{r:g}" for r in self.ratios)


@dataclass(frozen=True)
class PolicyTable:
    """source_id -> policy mapping with a default for unlisted sources."""

    default: SplitPolicy = SplitPolicy(*DEFAULT_RATIO)
    sources: dict[str, SplitPolicy] = field(default_factory=dict)

    def policy_for(self, source_id: str) -> SplitPolicy:
        return self.sources.get(source_id, self.default)

    @classmethod
    def from_dict(cls, raw: dict) -> "PolicyTable":
        default = SplitPolicy.parse(raw.get("default", "7:1.5:1.5"))
        sources = {
            source: SplitPolicy.parse(policy)
            for source, policy in raw.get("sources", {}).items()
        }
        return cls(default=default, sources=sources)

    @classmethod
    def load(cls, path: str | Path) -> "PolicyTable":
        with open(path, encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))


@dataclass
class SplitAssignment:
    """A total partition of manifest samples into train/val/test.

    ``issues`` records constraints the assigner could not honor (for example
    a nonzero-target split left empty because one group owns all the data);
    they are reported, never silently relaxed into a clean-looking result.
    """

    assignments: dict[str, Split]
    seed: int
    issues: list[str] = field(default_factory=list)

    def split_of(self, sample_id: str) -> Split:
        return self.assignments[sample_id]

    def ids_in(self, split: Split) -> list[str]:
        return sorted(i for i, s in self.assignments.items() if s is split)

    def counts(self) -> dict[Split, int]:
        counts = {s: 0 for s in SPLITS}
        for split in self.assignments.values():
            counts[split] += 1
        return counts


class ManifestError(Exception):
    """Raised for unparseable or inconsistent manifest files."""


def load_manifest(path: str | Path) -> tuple[list[Sample], list[Annotation]]:
    """Read a JSON-lines manifest of samples and annotations.

    Rejects duplicate sample ids; parse errors cite the 1-based line number.
    """
    samples: list[Sample] = []
    annotations: list[Annotation] = []
    seen_ids: dict[str, int] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"line {lineno}: invalid JSON: {exc.msg}") from exc
            kind = record.get("kind")
            try:
                if kind == "sample":
                    sample = Sample.from_record(record)
                    if sample.id in seen_ids:
                        raise ManifestError(
                            f"line {lineno}: duplicate sample id {sample.id!r} "
                            f"(first seen on line {seen_ids[sample.id]})"
                        )
                    seen_ids[sample.id] = lineno
                    samples.append(sample)
                elif kind == "annotation":
                    annotations.append(Annotation.from_record(record))
                else:
                    raise ManifestError(f"line {lineno}: unknown record kind {kind!r}")
            except (KeyError, ValueError) as exc:
                raise ManifestError(f"line {lineno}: bad record: {exc}") from exc
    return samples, annotations


def write_manifest(
    path: str | Path, samples: Iterable[Sample], annotations: Iterable[Annotation] = ()
) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for sample in samples:
            handle.write(json.dumps(sample.to_record(), sort_keys=True) + "\n")
        for annotation in annotations:
            handle.write(json.dumps(annotation.to_record(), sort_keys=True) + "\n")


def apportion(total: int, ratios: tuple[float, float, float]) -> tuple[int, int, int]:
    """Largest-remainder apportionment; sizes deviate at most 1 from exact."""
    weight = sum(ratios)
    exact = [total * r / weight for r in ratios]
    base = [math.floor(e) for e in exact]
    leftover = total - sum(base)
    by_remainder = sorted(range(3), key=lambda i: (-(exact[i] - base[i]), i))
    for i in by_remainder[:leftover]:
        base[i] += 1
    return base[0], base[1], base[2]


def assign_splits(
    samples: list[Sample],
    policies: PolicyTable,
    seed: int,
    grouped: bool = False,
) -> SplitAssignment:
    """Assign every sample to train/val/test.

    Item mode (``grouped=False``, the detection protocol): each source is
    shuffled with its own deterministic stream and cut at largest-remainder
    boundaries, so per-source sizes match the policy ratios within 1 item.

    Grouped mode (generative tasks): samples sharing a speaker, source
    system, or text id are merged into atomic groups (union-find), and whole
    groups are sampled into splits against the global targets. Val and test
    therefore only contain speakers, systems, and text content unseen in
    train. Sources whose policy allows a single split pin their groups to
    it. Group atomicity can push sizes further than 1 item from the targets;
    anything structural (an unfillable nonzero target, conflicting pins)
    lands in ``issues``.
    """
    assignments: dict[str, Split] = {}
    issues: list[str] = []

    by_source: dict[str, list[Sample]] = {}
    for sample in samples:
        by_source.setdefault(sample.source_id, []).append(sample)

    if not grouped:
        for source_id in sorted(by_source):
            items = sorted(by_source[source_id], key=lambda s: s.id)
            ids = [s.id for s in items]
            rng = SplitMix64(seed ^ _fnv1a64(source_id))
            rng.shuffle(ids)
            n_train, n_val, _ = apportion(len(ids), policies.policy_for(source_id).ratios)
            for i, sample_id in enumerate(ids):
                if i < n_train:
                    assignments[sample_id] = Split.TRAIN
                elif i < n_train + n_val:
                    assignments[sample_id] = Split.VAL
                else:
                    assignments[sample_id] = Split.TEST
        return SplitAssignment(assignments=assignments, seed=seed, issues=issues)

    # Grouped mode: union-find over speaker/system/text keys.
    parent: dict[str, str] = {}

    def find(key: str) -> str:
        root = key
        while parent.setdefault(root, root) != root:
            root = parent[root]
        while parent[key] != root:
            parent[key], key = root, parent[key]
        return root

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for sample in samples:
        spk, src, txt = f"spk:{sample.speaker_id}", f"src:{sample.source_id}", f"txt:{sample.text_id}"
        union(spk, src)
        union(src, txt)

    groups: dict[str, list[Sample]] = {}
    for sample in samples:
        groups.setdefault(find(f"spk:{sample.speaker_id}"), []).append(sample)

    targets = [0, 0, 0]
    for source_id in sorted(by_source):
        counts = apportion(len(by_source[source_id]), policies.policy_for(source_id).ratios)
        for i in range(3):
            targets[i] += counts[i]
    demand = {split: targets[i] for i, split in enumerate(SPLITS)}

    pinned: list[tuple[str, Split]] = []
    free: list[str] = []
    for root in sorted(groups, key=lambda r: min(s.id for s in groups[r])):
        pins = {
            policies.policy_for(s.source_id).pinned_split
            for s in groups[root]
            if policies.policy_for(s.source_id).pinned_split is not None
        }
        if len(pins) > 1:
            names = "/".join(sorted(p.value for p in pins))
            issues.append(
                f"group {root!r} mixes sources pinned to different splits ({names}); "
                f"kept in {sorted(pins)[0].value}"
            )
            pinned.append((root, sorted(pins)[0]))
        elif pins:
            pinned.append((root, next(iter(pins))))
        else:
            free.append(root)

    for root, split in pinned:
        for sample in groups[root]:
            assignments[sample.id] = split
        demand[split] -= len(groups[root])

    rng = SplitMix64(seed)
    rng.shuffle(free)
    for root in free:
        size = len(groups[root])
        split = max(SPLITS, key=lambda s: (demand[s], -SPLITS.index(s)))
        for sample in groups[root]:
            assignments[sample.id] = split
        demand[split] -= size

    achieved = {s: 0 for s in SPLITS}
    for split in assignments.values():
        achieved[split] += 1
    for i, split in enumerate(SPLITS):
        if targets[i] >= 1 and achieved[split] == 0:
            issues.append(
                f"split {split.value} has target {targets[i]} but received no samples "
                f"(group structure makes the ratios unsatisfiable)"
            )

    return SplitAssignment(assignments=assignments, seed=seed, issues=issues)


@dataclass(frozen=True)
class SplitRecord:
    """One line of an assignment file."""

    sample_id: str
    task: TaskKind
    split: Split


def write_assignment(
    path: str | Path, assignment: SplitAssignment, task: TaskKind
) -> None:
    """Write an assignment as JSON-lines, sorted by sample id (byte-stable)."""
    with open(path, "w", encoding="utf-8") as handle:
        for sample_id in sorted(assignment.assignments):
            record = {
                "sample_id": sample_id,
                "task": task.value,
                "split": assignment.assignments[sample_id].value,
            }
            handle.write(json.dumps(record, sort_keys=True) + "\n")


def load_assignment(path: str | Path) -> list[SplitRecord]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            records.append(
                SplitRecord(
                    sample_id=raw["sample_id"],
                    task=TaskKind(raw["task"]),
                    split=Split(raw["split"]),
                )
            )
    return records


@dataclass(frozen=True)
class LeakageFinding:
    kind: str  # multi_split | cross_task | zero_shot
    sample_id: str
    detail: str


@dataclass
class LeakageReport:
    findings: list[LeakageFinding]

    @property
    def clean(self) -> bool:
        return not self.findings


def check_leakage(
    records: Iterable[SplitRecord],
    samples: Optional[list[Sample]] = None,
    policies: Optional[PolicyTable] = None,
) -> LeakageReport:
    """Audit split records for leakage. Findings are data, not failures.

    Reports: (a) a sample id assigned to two splits within one task,
    (b) a test sample of one task sitting in another task's train split,
    (c) samples from zero-shot sources (policy pinned to test) escaping to
    train or val. (c) requires ``samples`` and ``policies``.
    """
    findings: list[LeakageFinding] = []
    records = list(records)

    seen: dict[tuple[TaskKind, str], Split] = {}
    for record in records:
        key = (record.task, record.sample_id)
        if key in seen and seen[key] is not record.split:
            findings.append(
                LeakageFinding(
                    kind="multi_split",
                    sample_id=record.sample_id,
                    detail=(
                        f"{record.sample_id} in both {seen[key].value} and "
                        f"{record.split.value} for task {record.task.value}"
                    ),
                )
            )
        seen[key] = record.split

    test_ids: dict[TaskKind, set[str]] = {}
    train_ids: dict[TaskKind, set[str]] = {}
    for record in records:
        if record.split is Split.TEST:
            test_ids.setdefault(record.task, set()).add(record.sample_id)
        elif record.split is Split.TRAIN:
            train_ids.setdefault(record.task, set()).add(record.sample_id)
    for test_task, ids in sorted(test_ids.items()):
        for train_task, tids in sorted(train_ids.items()):
            if test_task is train_task:
                continue
            for sample_id in sorted(ids & tids):
                findings.append(
                    LeakageFinding(
                        kind="cross_task",
                        sample_id=sample_id,
                        detail=(
                            f"{sample_id} is test data for {test_task.value} but "
                            f"train data for {train_task.value}"
                        ),
                    )
                )

    if samples is not None and policies is not None:
        source_of = {s.id: s.source_id for s in samples}
        for record in records:
            source = source_of.get(record.sample_id)
            if source is None:
                continue
            if (
                policies.policy_for(source).pinned_split is Split.TEST
                and record.split is not Split.TEST
            ):
                findings.append(
                    LeakageFinding(
                        kind="zero_shot",
                        sample_id=record.sample_id,
                        detail=(
                            f"{record.sample_id} from zero-shot source {source!r} "
                            f"leaked into {record.split.value} ({record.task.value})"
                        ),
                    )
                )

    return LeakageReport(findings=findings)


@dataclass
class SplitSummary:
    totals: dict[str, int]
    real: dict[str, int]
    fake: dict[str, int]
    real_rate: dict[str, float]
    by_language: dict[str, dict[str, int]]  # language -> split -> count

    def to_dict(self) -> dict:
        return {
            "totals": self.totals,
            "real": self.real,
            "fake": self.fake,
            "real_rate": self.real_rate,
            "by_language": self.by_language,
        }


def summarize(samples: list[Sample], assignment: SplitAssignment) -> SplitSummary:
    """Per-split and per-language counts plus real:fake rates."""
    totals = {s.value: 0 for s in SPLITS}
    real = {s.value: 0 for s in SPLITS}
    fake = {s.value: 0 for s in SPLITS}
    by_language: dict[str, dict[str, int]] = {}
    for sample in samples:
        split = assignment.assignments.get(sample.id)
        if split is None:
            continue
        totals[split.value] += 1
        if sample.authenticity is Authenticity.REAL:
            real[split.value] += 1
        elif sample.authenticity is Authenticity.FAKE:
            fake[split.value] += 1
        lang = by_language.setdefault(sample.language.value, {s.value: 0 for s in SPLITS})
        lang[split.value] += 1
    real_rate = {
        split: (real[split] / totals[split]) if totals[split] else 0.0
        for split in totals
    }
    return SplitSummary(
        totals=totals, real=real, fake=fake, real_rate=real_rate, by_language=by_language
    )
