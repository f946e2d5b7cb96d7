"""End-to-end evaluation pipeline: join model outputs to gold annotations,
compute every requested metric, and render report tables.

Reports are deterministic: aggregation walks items in sorted id order, the
JSON render is canonical, and with the mock judge two identical runs produce
byte-identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

from . import cot, metrics, prompts
from .core import (
    Annotation,
    DimensionId,
    Language,
    Sample,
    TaskKind,
)
from .dataset import Split, load_assignment, load_manifest
from .judge import JudgeClient, JudgeConfig, TransportError, UnparseableVerdict
from .metrics import (
    DcfParams,
    HashEmbeddingProvider,
    ScoredTrial,
    TokenizedText,
    TrialLabel,
    ZeroVariance,
    tokenize,
)
from .reward import RewardDimension

TASK_ORDER = (TaskKind.ASSESSMENT, TaskKind.COMPARISON, TaskKind.SUGGESTION, TaskKind.DETECTION)


class HarnessError(Exception):
    """Configuration or input validation failure (CLI exit code 2)."""


@dataclass(frozen=True)
class MetricToggles:
    text: bool = True
    llm_score: bool = True
    dimension_extraction: bool = True
    detection: bool = True

    @classmethod
    def from_dict(cls, raw: dict) -> "MetricToggles":
        return cls(
            text=raw.get("text", True),
            llm_score=raw.get("llm_score", True),
            dimension_extraction=raw.get("dimension_extraction", True),
            detection=raw.get("detection", True),
        )


@dataclass
class RunConfig:
    manifest: Path
    outputs: Optional[Path]
    output_dir: Path
    tasks: tuple[TaskKind, ...]
    seed: int = 0
    split: Optional[Split] = None
    assignment: Optional[Path] = None
    judge: Optional[JudgeConfig] = None
    toggles: MetricToggles = field(default_factory=MetricToggles)
    judge_failure_threshold: float = 0.25
    detection_score_file: Optional[Path] = None
    detection_binarize_threshold: float = 0.5
    dcf: DcfParams = field(default_factory=DcfParams)
    raw: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
        base = path.parent

        def resolve(key: str) -> Optional[Path]:
            value = raw.get(key)
            return (base / value) if value is not None else None

        manifest = resolve("manifest")
        if manifest is None:
            raise HarnessError("config must name a manifest")
        tasks = tuple(TaskKind(t) for t in raw.get("tasks", [t.value for t in TASK_ORDER]))
        judge = JudgeConfig.from_dict(raw["judge"]) if raw.get("judge") else None
        split = Split(raw["split"]) if raw.get("split") else None
        dcf_raw = raw.get("dcf", {})
        return cls(
            manifest=manifest,
            outputs=resolve("outputs"),
            output_dir=base / raw.get("output_dir", "eval-out"),
            tasks=tasks,
            seed=int(raw.get("seed", 0)),
            split=split,
            assignment=resolve("assignment"),
            judge=judge,
            toggles=MetricToggles.from_dict(raw.get("metrics", {})),
            judge_failure_threshold=float(raw.get("judge_failure_threshold", 0.25)),
            detection_score_file=resolve("detection_score_file"),
            detection_binarize_threshold=float(raw.get("detection_binarize_threshold", 0.5)),
            dcf=DcfParams(
                c_miss=float(dcf_raw.get("c_miss", 1.0)),
                c_fa=float(dcf_raw.get("c_fa", 10.0)),
                p_target=float(dcf_raw.get("p_target", 0.05)),
            ),
            raw=raw,
        )

    def validate(self) -> None:
        for label, path in (
            ("manifest", self.manifest),
            ("outputs", self.outputs),
            ("assignment", self.assignment),
            ("detection score file", self.detection_score_file),
        ):
            if path is not None and not Path(path).exists():
                raise HarnessError(f"{label} file does not exist: {path}")
        if self.split is not None and self.assignment is None:
            raise HarnessError("selecting a split requires an assignment file")
        needs_outputs = any(t is not TaskKind.DETECTION for t in self.tasks) or (
            self.detection_score_file is None and TaskKind.DETECTION in self.tasks
        )
        if needs_outputs and self.outputs is None:
            raise HarnessError("config must name a model outputs file")


@dataclass(frozen=True)
class OutputRecord:
    """One model output line: id, raw text, optional key-token logits."""

    id: str
    text: str
    task: Optional[TaskKind] = None
    logit_real: Optional[float] = None
    logit_fake: Optional[float] = None


def load_outputs(path: str | Path) -> list[OutputRecord]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                records.append(
                    OutputRecord(
                        id=raw["id"],
                        text=raw.get("text", ""),
                        task=TaskKind(raw["task"]) if raw.get("task") else None,
                        logit_real=raw.get("logit_real"),
                        logit_fake=raw.get("logit_fake"),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise HarnessError(f"{path}: line {lineno}: bad output record: {exc}") from exc
    return records


@dataclass
class EvalReport:
    """Aggregated metrics per task and language plus a provenance block."""

    provenance: dict
    tasks: dict  # task value -> language -> {metric: value | {"skipped": reason}}
    issues: list[str]
    judge_failures: int = 0
    judge_calls: int = 0

    @property
    def judge_failure_rate(self) -> float:
        return self.judge_failures / self.judge_calls if self.judge_calls else 0.0

    def to_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "tasks": self.tasks,
            "issues": self.issues,
            "judge_failures": self.judge_failures,
            "judge_calls": self.judge_calls,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "EvalReport":
        return cls(
            provenance=raw.get("provenance", {}),
            tasks=raw.get("tasks", {}),
            issues=raw.get("issues", []),
            judge_failures=raw.get("judge_failures", 0),
            judge_calls=raw.get("judge_calls", 0),
        )


@dataclass
class _JoinedItem:
    key: str
    annotation: Annotation
    output: OutputRecord
    language: Language


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def run_eval(config: RunConfig) -> EvalReport:
    """Run the full evaluation described by ``config``.

    Partial judge failures are recorded per item and excluded from means with
    counts; they never abort the run. Unjoinable output ids do abort, naming
    the id.
    """
    config.validate()
    samples, annotations = load_manifest(config.manifest)
    samples_by_id = {s.id: s for s in samples}

    allowed_keys: Optional[dict[TaskKind, set[str]]] = None
    if config.assignment is not None and config.split is not None:
        allowed: dict[TaskKind, set[str]] = {}
        for record in load_assignment(config.assignment):
            if record.split is config.split:
                allowed.setdefault(record.task, set()).add(record.sample_id)
        allowed_keys = allowed

    gold: dict[TaskKind, dict[str, Annotation]] = {t: {} for t in config.tasks}
    for annotation in annotations:
        if annotation.task not in gold:
            continue
        if allowed_keys is not None:
            in_split = allowed_keys.get(annotation.task, set())
            if not all(sid in in_split for sid in annotation.sample_ids):
                continue
        gold[annotation.task][annotation.key] = annotation

    outputs = load_outputs(config.outputs) if config.outputs is not None else []
    joined: dict[TaskKind, list[_JoinedItem]] = {t: [] for t in config.tasks}
    for output in outputs:
        candidates = [output.task] if output.task is not None else list(config.tasks)
        matched = False
        for task in candidates:
            annotation = gold.get(task, {}).get(output.id)
            if annotation is None:
                continue
            language = samples_by_id[annotation.sample_ids[0]].language
            joined[task].append(_JoinedItem(output.id, annotation, output, language))
            matched = True
        if not matched:
            if output.task is not None and output.task not in gold:
                continue  # output for a task outside this run's task set
            if allowed_keys is not None:
                continue  # split selection active: output may belong elsewhere
            raise HarnessError(f"output id {output.id!r} does not match any gold annotation")

    judge_client = JudgeClient(config.judge) if config.judge is not None else None
    issues: list[str] = []
    tasks_block: dict[str, dict] = {}
    judge_failures = 0
    judge_calls = 0

    for task in config.tasks:
        items = sorted(joined[task], key=lambda item: item.key)
        if task is TaskKind.DETECTION:
            if config.detection_score_file is not None:
                tasks_block[task.value] = _evaluate_score_file(config)
            else:
                tasks_block[task.value] = _evaluate_detection(items, config)
        else:
            cell_block, failures, calls = _evaluate_generative(task, items, config, judge_client)
            tasks_block[task.value] = cell_block
            judge_failures += failures
            judge_calls += calls

    provenance = {
        "config_sha256": hashlib.sha256(
            json.dumps(config.raw, sort_keys=True).encode("utf-8")
        ).hexdigest(),
        "template_hashes": prompts.asset_hashes(),
        "judge_model": config.judge.model if config.judge else None,
        "seed": config.seed,
    }
    return EvalReport(
        provenance=provenance,
        tasks=tasks_block,
        issues=issues,
        judge_failures=judge_failures,
        judge_calls=judge_calls,
    )


def _language_groups(items: list[_JoinedItem]) -> dict[str, list[_JoinedItem]]:
    groups: dict[str, list[_JoinedItem]] = {"all": list(items)}
    for item in items:
        groups.setdefault(item.language.value, []).append(item)
    return groups


@dataclass
class _GenerativeItem:
    joined: _JoinedItem
    answer_text: str
    parse_error: Optional[str]
    pred_scores: dict[DimensionId, int]
    pred_preferences: dict[DimensionId, Any]
    llm_scores: Optional[dict[RewardDimension, int]] = None
    llm_error: Optional[str] = None


def _prepare_generative_item(
    task: TaskKind, item: _JoinedItem, config: RunConfig, judge_client: Optional[JudgeClient]
) -> _GenerativeItem:
    raw = item.output.text
    answer_text = raw
    parse_error: Optional[str] = None
    pred_scores: dict[DimensionId, int] = {}
    pred_preferences: dict[DimensionId, Any] = {}
    try:
        record = cot.parse_cot(raw, task)
        answer_text = record.answer or raw
        pred_scores = {s.dimension: s.value for s in record.scores}
        pred_preferences = {p.dimension: p.preference for p in record.preferences}
    except cot.CoTParseError as exc:
        parse_error = f"{type(exc).__name__}: {exc}"

    needs_extraction = (
        task in (TaskKind.ASSESSMENT, TaskKind.COMPARISON)
        and not pred_scores
        and not pred_preferences
        and config.toggles.dimension_extraction
        and judge_client is not None
    )
    if needs_extraction:
        try:
            verdict = judge_client.extract_dimensions(task, raw)
            pred_scores = {s.dimension: s.value for s in verdict.scores}
            pred_preferences = {p.dimension: p.preference for p in verdict.preferences}
        except (TransportError, UnparseableVerdict, cot.CoTParseError):
            pass  # stays excluded; the parse_error already tells the story

    return _GenerativeItem(
        joined=item,
        answer_text=answer_text,
        parse_error=parse_error,
        pred_scores=pred_scores,
        pred_preferences=pred_preferences,
    )


def _judge_item(
    task: TaskKind,
    prepared: _GenerativeItem,
    judge_client: JudgeClient,
) -> None:
    annotation = prepared.joined.annotation
    prompt_text = prompts.asset_text(f"task_{task.value}.txt")
    scores: dict[RewardDimension, int] = {}
    try:
        for dimension in RewardDimension:
            verdict = judge_client.score_dimension(
                task, dimension, prompt_text, prepared.joined.output.text, annotation.description
            )
            scores[dimension] = verdict.score
        prepared.llm_scores = scores
    except (TransportError, UnparseableVerdict) as exc:
        prepared.llm_error = f"{type(exc).__name__}: {exc}"


def _evaluate_generative(
    task: TaskKind,
    items: list[_JoinedItem],
    config: RunConfig,
    judge_client: Optional[JudgeClient],
) -> tuple[dict, int, int]:
    prepared = [
        _prepare_generative_item(task, item, config, judge_client) for item in items
    ]

    judge_calls = 0
    judge_failures = 0
    if config.toggles.llm_score and judge_client is not None and prepared:
        workers = min(config.judge.parallelism, len(prepared))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda p: _judge_item(task, p, judge_client), prepared))
        judge_calls = len(prepared)
        judge_failures = sum(1 for p in prepared if p.llm_error is not None)

    cells: dict[str, dict] = {}
    by_language: dict[str, list[_GenerativeItem]] = {"all": prepared}
    for item in prepared:
        by_language.setdefault(item.joined.language.value, []).append(item)

    for language, group in by_language.items():
        cells[language] = _generative_cell(task, group, config, judge_client is not None)
    return cells, judge_failures, judge_calls


def _generative_cell(
    task: TaskKind,
    group: list[_GenerativeItem],
    config: RunConfig,
    judge_available: bool,
) -> dict:
    cell: dict[str, Any] = {
        "n": len(group),
        "parse_failures": sum(1 for g in group if g.parse_error is not None),
    }

    if config.toggles.text:
        if group:
            provider = HashEmbeddingProvider()
            candidates: list[TokenizedText] = []
            references: list[TokenizedText] = []
            for g in group:
                language = g.joined.language
                candidates.append(tokenize(g.answer_text, language))
                references.append(tokenize(g.joined.annotation.description, language))
            stats = metrics.corpus_stats([[r] for r in references])
            cell["bleu4"] = _mean(
                [metrics.bleu4(c, [r]) for c, r in zip(candidates, references)]
            )
            cell["meteor"] = _mean(
                [metrics.meteor_lite(c, r) for c, r in zip(candidates, references)]
            )
            cell["rouge_l"] = _mean(
                [metrics.rouge_l(c, r) for c, r in zip(candidates, references)]
            )
            cell["cider_d"] = _mean(
                [metrics.cider_d(c, [r], stats) for c, r in zip(candidates, references)]
            )
            cell["sbert_sim"] = _mean(
                [
                    metrics.embedding_similarity(
                        g.answer_text, g.joined.annotation.description, provider
                    )
                    for g in group
                ]
            )
        else:
            for name in ("bleu4", "meteor", "rouge_l", "cider_d", "sbert_sim"):
                cell[name] = {"skipped": "no items"}
    else:
        for name in ("bleu4", "meteor", "rouge_l", "cider_d", "sbert_sim"):
            cell[name] = {"skipped": "text metrics disabled"}

    if config.toggles.llm_score:
        if not judge_available:
            cell["llm_score"] = {"skipped": "no judge configured"}
        else:
            judged = [g for g in group if g.llm_scores is not None]
            cell["llm_judged"] = len(judged)
            cell["llm_failed"] = len(group) - len(judged)
            if judged:
                cell["llm_score"] = _mean(
                    [_mean([float(v) for v in g.llm_scores.values()]) for g in judged]
                )
                for dimension in RewardDimension:
                    cell[f"llm_score_{dimension.value}"] = _mean(
                        [float(g.llm_scores[dimension]) for g in judged]
                    )
            else:
                cell["llm_score"] = {"skipped": "no items judged successfully"}
    else:
        cell["llm_score"] = {"skipped": "llm score disabled"}

    if task is TaskKind.ASSESSMENT:
        _assessment_dimension_metrics(cell, group, config)
    elif task is TaskKind.COMPARISON:
        _comparison_dimension_metrics(cell, group, config)
    return cell


def _assessment_dimension_metrics(
    cell: dict, group: list[_GenerativeItem], config: RunConfig
) -> None:
    if not config.toggles.dimension_extraction:
        cell["pcc"] = {"skipped": "dimension extraction disabled"}
        return
    evaluated = [g for g in group if g.pred_scores]
    cell["dims_evaluated"] = len(evaluated)
    cell["dims_excluded"] = len(group) - len(evaluated)
    pcc_values = []
    for dimension in DimensionId:
        if dimension is DimensionId.SPEECH_RATE:
            continue
        pairs = [
            (g.pred_scores[dimension], _gold_score(g, dimension))
            for g in evaluated
            if dimension in g.pred_scores and _gold_score(g, dimension) is not None
        ]
        name = f"pcc_{dimension.value}"
        if len(pairs) < 2:
            cell[name] = {"skipped": "fewer than 2 scored items"}
            continue
        try:
            value = metrics.pearson([p[0] for p in pairs], [p[1] for p in pairs])
            cell[name] = value
            pcc_values.append(value)
        except ZeroVariance:
            cell[name] = {"skipped": "zero variance"}
    cell["pcc_mean"] = _mean(pcc_values) if pcc_values else {"skipped": "no computable dimensions"}

    rate_pairs = [
        (g.pred_scores.get(DimensionId.SPEECH_RATE), _gold_score(g, DimensionId.SPEECH_RATE))
        for g in evaluated
    ]
    rate_pairs = [(p, g) for p, g in rate_pairs if g is not None]
    if rate_pairs:
        cell["speech_rate_acc"] = metrics.accuracy(
            [p for p, _ in rate_pairs], [g for _, g in rate_pairs]
        )
    else:
        cell["speech_rate_acc"] = {"skipped": "no speech rate golds"}


def _comparison_dimension_metrics(
    cell: dict, group: list[_GenerativeItem], config: RunConfig
) -> None:
    if not config.toggles.dimension_extraction:
        cell["acc"] = {"skipped": "dimension extraction disabled"}
        return
    evaluated = [g for g in group if g.pred_preferences]
    cell["dims_evaluated"] = len(evaluated)
    cell["dims_excluded"] = len(group) - len(evaluated)
    acc_values = []
    for dimension in DimensionId:
        pairs = [
            (g.pred_preferences.get(dimension), _gold_preference(g, dimension))
            for g in evaluated
        ]
        pairs = [(p, gold) for p, gold in pairs if gold is not None]
        name = f"acc_{dimension.value}"
        if not pairs:
            cell[name] = {"skipped": "no gold preferences"}
            continue
        value = metrics.accuracy([p for p, _ in pairs], [g for _, g in pairs])
        cell[name] = value
        acc_values.append(value)
    cell["acc_mean"] = _mean(acc_values) if acc_values else {"skipped": "no computable dimensions"}


def _gold_score(item: _GenerativeItem, dimension: DimensionId) -> Optional[int]:
    for score in item.joined.annotation.scores:
        if score.dimension is dimension:
            return score.value
    return None


def _gold_preference(item: _GenerativeItem, dimension: DimensionId):
    for judgment in item.joined.annotation.preferences:
        if judgment.dimension is dimension:
            return judgment.preference
    return None


def _evaluate_detection(items: list[_JoinedItem], config: RunConfig) -> dict:
    cells: dict[str, dict] = {}
    by_language: dict[str, list[_JoinedItem]] = {"all": list(items)}
    for item in items:
        by_language.setdefault(item.language.value, []).append(item)

    for language, group in by_language.items():
        cell: dict[str, Any] = {"n": len(group)}
        preds = []
        golds = []
        trials: list[ScoredTrial] = []
        invalid = 0
        for item in group:
            verdict = cot.parse_detection(item.output.text)
            gold_label = item.annotation.label
            preds.append(verdict)
            golds.append(gold_label)
            if verdict is None:
                invalid += 1
                continue  # invalid outputs are excluded from score metrics
            out = item.output
            if out.logit_real is None or out.logit_fake is None:
                continue
            score = metrics.token_posterior(out.logit_real, out.logit_fake)
            label = TrialLabel.SPOOF if gold_label.value == "fake" else TrialLabel.BONAFIDE
            trials.append(ScoredTrial(score=score, label=label))
        cell["acc"] = metrics.accuracy(preds, golds) if group else {"skipped": "no items"}
        cell["invalid"] = invalid
        cell["scored"] = len(trials)
        cell["excluded"] = len(group) - len(trials)
        labels = {t.label for t in trials}
        if len(labels) == 2:
            cell["eer"] = metrics.eer(trials)
            cell["min_dcf"] = metrics.min_dcf(trials, config.dcf)
        else:
            reason = "needs scored trials of both labels"
            cell["eer"] = {"skipped": reason}
            cell["min_dcf"] = {"skipped": reason}
        cells[language] = cell
    return cells


def _evaluate_score_file(config: RunConfig) -> dict:
    """Detection metrics straight from an external score file."""
    trials = metrics.load_trials(config.detection_score_file)
    threshold = config.detection_binarize_threshold
    preds = [t.score >= threshold for t in trials]
    golds = [t.label is TrialLabel.SPOOF for t in trials]
    cell: dict[str, Any] = {
        "n": len(trials),
        "acc": metrics.accuracy(preds, golds) if trials else {"skipped": "no trials"},
    }
    labels = {t.label for t in trials}
    if len(labels) == 2:
        cell["eer"] = metrics.eer(trials)
        cell["min_dcf"] = metrics.min_dcf(trials, config.dcf)
    else:
        reason = "needs trials of both labels"
        cell["eer"] = {"skipped": reason}
        cell["min_dcf"] = {"skipped": reason}
    return {"all": cell}


_METRIC_ORDER = [
    "n",
    "parse_failures",
    "bleu4",
    "meteor",
    "rouge_l",
    "cider_d",
    "sbert_sim",
    "llm_score",
    "llm_score_helpfulness",
    "llm_score_relevance",
    "llm_score_accuracy",
    "llm_score_detail",
    "llm_judged",
    "llm_failed",
    "pcc_overall_quality",
    "pcc_intelligibility",
    "pcc_distortion",
    "pcc_dynamic_range",
    "pcc_emotional_impact",
    "pcc_artistic_expression",
    "pcc_subjective_experience",
    "pcc_mean",
    "speech_rate_acc",
    "acc_overall_quality",
    "acc_intelligibility",
    "acc_distortion",
    "acc_speech_rate",
    "acc_dynamic_range",
    "acc_emotional_impact",
    "acc_artistic_expression",
    "acc_subjective_experience",
    "acc_mean",
    "dims_evaluated",
    "dims_excluded",
    "acc",
    "invalid",
    "scored",
    "excluded",
    "eer",
    "min_dcf",
]


def _metric_sort_key(name: str) -> tuple[int, str]:
    try:
        return (_METRIC_ORDER.index(name), name)
    except ValueError:
        return (len(_METRIC_ORDER), name)


def _ordered_languages(cells: dict) -> list[str]:
    return ["all"] + sorted(k for k in cells if k != "all")


def _ordered_tasks(tasks: dict) -> list[str]:
    order = [t.value for t in TASK_ORDER]
    return [t for t in order if t in tasks] + sorted(t for t in tasks if t not in order)


def render_report(report: EvalReport, fmt: str = "json") -> bytes:
    """Render a report as canonical JSON, full-precision CSV, or a text table."""
    if fmt == "json":
        return (
            json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
        ).encode("utf-8")
    if fmt == "csv":
        return _render_csv(report)
    if fmt == "text":
        return _render_text(report)
    raise ValueError(f"unknown report format {fmt!r}")


def _format_value(value: Any) -> str:
    if isinstance(value, dict) and "skipped" in value:
        return f"skipped: {value['skipped']}"
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _render_csv(report: EvalReport) -> bytes:
    import csv
    import io

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["task", "language", "metric", "value"])
    for task in _ordered_tasks(report.tasks):
        cells = report.tasks[task]
        for language in _ordered_languages(cells):
            cell = cells[language]
            for metric in sorted(cell, key=_metric_sort_key):
                writer.writerow([task, language, metric, _format_value(cell[metric])])
    return buffer.getvalue().encode("utf-8")


def _render_text(report: EvalReport) -> bytes:
    lines = []
    for task in _ordered_tasks(report.tasks):
        cells = report.tasks[task]
        for language in _ordered_languages(cells):
            cell = cells[language]
            lines.append(f"== {task} / {language} ==")
            width = max((len(m) for m in cell), default=0)
            for metric in sorted(cell, key=_metric_sort_key):
                value = cell[metric]
                if isinstance(value, float):
                    shown = f"{value:.4f}"
                else:
                    shown = _format_value(value)
                lines.append(f"  {metric.ljust(width)}  {shown}")
            lines.append("")
    if report.issues:
        lines.append("issues:")
        lines.extend(f"  - {issue}" for issue in report.issues)
        lines.append("")
    lines.append(
        f"judge calls: {report.judge_calls}, failures: {report.judge_failures}"
    )
    return ("\n".join(lines) + "\n").encode("utf-8")
