"""Durable state for the human-in-the-loop annotation workflow.

Every work item owns an append-only JSON-lines event log, fsynced on each
transition; the in-memory state is only ever a fold over that log, so
replaying the log reconstructs the exact item state. Writes are serialized
per item and gated by lease tokens.
"""

from __future__ import annotations

import json
import os
import re
import secrets
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Optional

from ..core import Annotation, Authenticity, DetectionLabel, Sample, TaskKind, validate_annotation


class ItemState(str, Enum):
    PENDING = "pending"
    QUESTIONNAIRE_DONE = "questionnaire_done"
    DRAFT_READY = "draft_ready"
    REVISION_DONE = "revision_done"
    VARIANTS_READY = "variants_ready"
    COMPLETED = "completed"


# The only legal workflow order. Each entry maps an event type to the state
# it requires and the state it produces.
_TRANSITIONS: dict[str, tuple[ItemState, ItemState]] = {
    "questionnaire_submitted": (ItemState.PENDING, ItemState.QUESTIONNAIRE_DONE),
    "draft_stored": (ItemState.QUESTIONNAIRE_DONE, ItemState.DRAFT_READY),
    "revision_stored": (ItemState.DRAFT_READY, ItemState.REVISION_DONE),
    "variants_stored": (ItemState.REVISION_DONE, ItemState.VARIANTS_READY),
    "variant_selected": (ItemState.VARIANTS_READY, ItemState.COMPLETED),
}

_ITEM_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.+-]*$")


class IllegalTransition(Exception):
    """The requested operation is not valid in the item's current state."""


class LeaseError(Exception):
    """Missing, stale, or foreign lease token."""


class ValidationFailure(Exception):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass
class WorkItem:
    id: str
    sample_ids: tuple[str, ...]
    task: TaskKind
    state: ItemState = ItemState.PENDING
    questionnaire: Optional[dict] = None
    draft: Optional[str] = None
    revision: Optional[str] = None
    variants: tuple[str, ...] = ()
    selection: Optional[int] = None
    annotator: Optional[str] = None
    timestamps: dict[str, float] = field(default_factory=dict)
    lease: Optional[dict] = None  # {annotator, token, expires}

    def view(self) -> dict:
        """JSON view served over HTTP (the lease token itself is withheld)."""
        lease = None
        if self.lease is not None:
            lease = {"annotator": self.lease["annotator"], "expires": self.lease["expires"]}
        return {
            "id": self.id,
            "sample_ids": list(self.sample_ids),
            "task": self.task.value,
            "state": self.state.value,
            "questionnaire": self.questionnaire,
            "draft": self.draft,
            "revision": self.revision,
            "variants": list(self.variants),
            "selection": self.selection,
            "annotator": self.annotator,
            "timestamps": self.timestamps,
            "lease": lease,
        }


def apply_event(item: WorkItem, event: dict) -> None:
    """Fold one event into the item, enforcing the workflow order."""
    kind = event["type"]
    if kind == "created":
        return
    if kind == "lease_acquired":
        item.lease = {
            "annotator": event["annotator"],
            "token": event["token"],
            "expires": event["expires"],
        }
        item.annotator = event["annotator"]
        return
    if kind not in _TRANSITIONS:
        raise IllegalTransition(f"unknown event type {kind!r}")
    required, target = _TRANSITIONS[kind]
    if item.state is not required:
        raise IllegalTransition(
            f"{kind} requires state {required.value}, item {item.id} is {item.state.value}"
        )
    if kind == "questionnaire_submitted":
        item.questionnaire = event["fields"]
    elif kind == "draft_stored":
        item.draft = event["text"]
    elif kind == "revision_stored":
        item.revision = event["text"]
    elif kind == "variants_stored":
        item.variants = tuple(event["texts"])
    elif kind == "variant_selected":
        index = event["index"]
        if not 0 <= index < len(item.variants):
            raise IllegalTransition(
                f"variant index {index} out of range for {len(item.variants)} variants"
            )
        item.selection = index
    item.state = target
    item.timestamps[target.value] = event["at"]


class WorkItemStore:
    """Event-sourced store with per-item locking and lease enforcement."""

    DEFAULT_LEASE_SECONDS = 600.0

    def __init__(self, root: str | Path, clock: Callable[[], float] = time.time):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._clock = clock
        self._items: dict[str, WorkItem] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        for log in sorted(self.root.glob("items/*/events.jsonl")):
            item = self._replay_log(log)
            self._items[item.id] = item

    def _lock_for(self, item_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(item_id, threading.Lock())

    def _log_path(self, item_id: str) -> Path:
        return self.root / "items" / item_id / "events.jsonl"

    def _append(self, item_id: str, event: dict) -> None:
        path = self._log_path(item_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(event, sort_keys=True) + "\n")
            handle.flush()
            os.fsync(handle.fileno())

    def _replay_log(self, path: Path) -> WorkItem:
        with open(path, encoding="utf-8") as handle:
            events = [json.loads(line) for line in handle if line.strip()]
        if not events or events[0]["type"] != "created":
            raise ValueError(f"corrupt event log: {path}")
        head = events[0]
        item = WorkItem(
            id=head["item_id"],
            sample_ids=tuple(head["sample_ids"]),
            task=TaskKind(head["task"]),
        )
        for event in events[1:]:
            apply_event(item, event)
        return item

    # -- reads ---------------------------------------------------------

    def get(self, item_id: str) -> WorkItem:
        try:
            return self._items[item_id]
        except KeyError:
            raise KeyError(f"no work item {item_id!r}") from None

    def replay(self, item_id: str) -> WorkItem:
        """Rebuild the item purely from its on-disk log."""
        self.get(item_id)
        return self._replay_log(self._log_path(item_id))

    def item_ids(self) -> list[str]:
        return sorted(self._items)

    def queue(self, annotator: Optional[str] = None) -> list[dict]:
        """Items leased to the annotator or currently leasable."""
        now = self._clock()
        entries = []
        for item_id in self.item_ids():
            item = self._items[item_id]
            lease = item.lease
            lease_live = lease is not None and lease["expires"] > now
            if annotator is not None and lease_live and lease["annotator"] != annotator:
                continue
            view = item.view()
            view["leasable"] = not lease_live
            entries.append(view)
        return entries

    # -- writes --------------------------------------------------------

    def create_item(self, item_id: str, sample_ids: tuple[str, ...], task: TaskKind) -> WorkItem:
        if not _ITEM_ID_RE.match(item_id):
            raise ValueError(f"item id {item_id!r} is not filesystem-safe")
        if task is TaskKind.DETECTION:
            raise ValueError("detection labels are derived from metadata; no workflow item")
        if len(sample_ids) != task.sample_arity:
            raise ValueError(
                f"task {task.value} needs {task.sample_arity} sample id(s), got {len(sample_ids)}"
            )
        with self._lock_for(item_id):
            if item_id in self._items:
                raise ValueError(f"work item {item_id!r} already exists")
            event = {
                "type": "created",
                "item_id": item_id,
                "sample_ids": list(sample_ids),
                "task": task.value,
                "at": self._clock(),
            }
            self._append(item_id, event)
            item = WorkItem(id=item_id, sample_ids=tuple(sample_ids), task=task)
            self._items[item_id] = item
            return item

    def acquire_lease(
        self, item_id: str, annotator: str, ttl: float = DEFAULT_LEASE_SECONDS
    ) -> str:
        """Single-annotator locking; re-acquiring your own lease renews it."""
        with self._lock_for(item_id):
            item = self.get(item_id)
            now = self._clock()
            lease = item.lease
            if lease is not None and lease["expires"] > now and lease["annotator"] != annotator:
                raise LeaseError(f"item {item_id} is leased to {lease['annotator']!r}")
            token = secrets.token_hex(16)
            event = {
                "type": "lease_acquired",
                "annotator": annotator,
                "token": token,
                "expires": now + ttl,
                "at": now,
            }
            self._append(item_id, event)
            apply_event(item, event)
            return token

    def _check_lease(self, item: WorkItem, token: str) -> None:
        lease = item.lease
        if lease is None:
            raise LeaseError(f"item {item.id} has no active lease")
        if lease["expires"] <= self._clock():
            raise LeaseError(f"lease on item {item.id} has expired")
        if lease["token"] != token:
            raise LeaseError(f"wrong lease token for item {item.id}")

    def _transition(self, item_id: str, token: str, event: dict) -> WorkItem:
        with self._lock_for(item_id):
            item = self.get(item_id)
            self._check_lease(item, token)
            event = dict(event, at=self._clock())
            # Validate against a copy first so the log never records an
            # illegal transition.
            probe = self._replay_log(self._log_path(item_id))
            apply_event(probe, event)
            self._append(item_id, event)
            apply_event(item, event)
            return item

    def submit_questionnaire(self, item_id: str, fields: dict, token: str) -> WorkItem:
        item = self.get(item_id)
        annotation = self._annotation_from_fields(item, fields, description="")
        violations = validate_annotation(annotation)
        if violations:
            raise ValidationFailure(violations)
        return self._transition(
            item_id, token, {"type": "questionnaire_submitted", "fields": fields}
        )

    def store_draft(self, item_id: str, text: str, token: str) -> WorkItem:
        return self._transition(item_id, token, {"type": "draft_stored", "text": text})

    def submit_revision(self, item_id: str, text: str, token: str) -> WorkItem:
        return self._transition(item_id, token, {"type": "revision_stored", "text": text})

    def store_variants(self, item_id: str, texts: list[str], token: str) -> WorkItem:
        if not texts:
            raise ValueError("need at least one variant")
        return self._transition(item_id, token, {"type": "variants_stored", "texts": texts})

    def select_variant(self, item_id: str, index: int, token: str) -> Annotation:
        item = self.get(item_id)
        if item.state is ItemState.VARIANTS_READY and not 0 <= index < len(item.variants):
            raise ValueError(
                f"variant index {index} out of range for {len(item.variants)} variants"
            )
        item = self._transition(item_id, token, {"type": "variant_selected", "index": index})
        return self.final_annotation(item_id)

    def final_annotation(self, item_id: str) -> Annotation:
        """The completed item's annotation; description is the chosen variant."""
        item = self.get(item_id)
        if item.state is not ItemState.COMPLETED:
            raise IllegalTransition(f"item {item_id} is not completed")
        return self._annotation_from_fields(
            item, item.questionnaire or {}, description=item.variants[item.selection]
        )

    @staticmethod
    def _annotation_from_fields(item: WorkItem, fields: dict, description: str) -> Annotation:
        record = dict(fields)
        record.setdefault("sample_ids", list(item.sample_ids))
        record.setdefault("task", item.task.value)
        record["description"] = description
        return Annotation.from_record(record)


def derive_detection_label(sample: Sample) -> DetectionLabel:
    """Detection ground truth comes straight from sample provenance; there is
    no human step on this path."""
    if sample.authenticity is Authenticity.REAL:
        return DetectionLabel.REAL
    if sample.authenticity is Authenticity.FAKE:
        return DetectionLabel.FAKE
    raise ValueError(f"sample {sample.id} has unknown authenticity")
