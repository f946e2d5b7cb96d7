"""Regenerate the bundled 30-item end-to-end fixture and its golden reports.

Run from the repository root:

    python tests/fixtures/make_e2e_fixture.py

The outputs are committed; the harness tests byte-compare against them, so
regenerate only when the report schema intentionally changes and re-review
the goldens.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from speechqc.core import (
    Annotation,
    Authenticity,
    CategoricalMetadata,
    DetectionLabel,
    DimensionId,
    DimensionScore,
    Gender,
    Language,
    OpenFields,
    Preference,
    PreferenceJudgment,
    Sample,
    TaskKind,
)
from speechqc.cot import CoTRecord, serialize_cot
from speechqc.dataset import write_manifest

HERE = Path(__file__).parent
OUT = HERE / "e2e"

LANGS = [Language.EN, Language.EN, Language.ZH, Language.ZH, Language.JA, Language.FR]

PHRASES = {
    Language.EN: ["the voice is", "clear and warm", "with mild artifacts",
                  "pacing feels steady", "a pleasant listen", "noticeable hiss remains"],
    Language.ZH: ["语音清晰", "音色温暖", "存在轻微杂音", "语速平稳", "听感舒适", "结尾有噪声"],
    Language.JA: ["音声は明瞭で", "温かい音色", "軽い歪みがある", "話速は安定", "聞きやすい", "末尾にノイズ"],
    Language.FR: ["la voix est claire", "timbre chaleureux", "avec de legers artefacts",
                  "le debit est stable", "une ecoute agreable", "un souffle subsiste"],
}


def sentence(rng: random.Random, language: Language, k: int = 4) -> str:
    parts = [rng.choice(PHRASES[language]) for _ in range(k)]
    return " ".join(parts) + "."


def perturb(rng: random.Random, text: str, language: Language) -> str:
    words = text.rstrip(".").split(" ")
    if len(words) > 3 and rng.random() < 0.8:
        words[rng.randrange(len(words))] = rng.choice(PHRASES[language]).split(" ")[0]
    return " ".join(words) + "."


def clamp(v: int) -> int:
    return max(1, min(5, v))


def main() -> None:
    rng = random.Random(20240901)
    OUT.mkdir(parents=True, exist_ok=True)

    samples: list[Sample] = []
    annotations: list[Annotation] = []
    outputs: list[dict] = []
    counter = 0

    def new_sample(language: Language, authenticity=Authenticity.REAL) -> Sample:
        nonlocal counter
        counter += 1
        sample = Sample(
            id=f"e2e-{counter:03d}",
            language=language,
            speaker_id=f"spk-{counter % 7}",
            source_id="fixture" if authenticity is Authenticity.REAL else "fixture-tts",
            text_id=f"txt-{counter:03d}",
            audio_path=f"audio/{counter:03d}.wav",
            authenticity=authenticity,
        )
        samples.append(sample)
        return sample

    # 10 assessment items; item 7 emits prose without a think block so the
    # harness has to fall back to judge extraction.
    for i in range(10):
        language = LANGS[i % len(LANGS)]
        sample = new_sample(language)
        gold_values = [rng.randint(1, 5) for _ in range(8)]
        gold_scores = tuple(
            DimensionScore(dim, value) for dim, value in zip(DimensionId, gold_values)
        )
        description = sentence(rng, language)
        annotations.append(
            Annotation(
                sample_ids=(sample.id,),
                task=TaskKind.ASSESSMENT,
                scores=gold_scores,
                metadata=CategoricalMetadata(
                    distortion_type=rng.choice(["artifacts", "background noise", "jitter"]),
                    emotion_type=rng.choice(["neutral", "happy", "sad"]),
                    gender=rng.choice([Gender.MALE, Gender.FEMALE]),
                ),
                open_fields=OpenFields(perceptual_description=sentence(rng, language, 2)),
                description=description,
            )
        )
        if i == 7:
            text = "Overall this clip sounds acceptable. " + perturb(rng, description, language)
        else:
            predicted = tuple(
                DimensionScore(dim, clamp(value + rng.choice([-1, 0, 0, 0, 1])))
                for dim, value in zip(DimensionId, gold_values)
            )
            record = CoTRecord(
                task=TaskKind.ASSESSMENT,
                think="",
                answer=perturb(rng, description, language),
                scores=predicted,
            )
            text = serialize_cot(record)
        outputs.append({"id": sample.id, "task": "assessment", "text": text})

    # 6 comparison pairs; item 3 replies free-form (extraction fallback).
    for i in range(6):
        language = LANGS[i]
        a = new_sample(language)
        b = new_sample(language)
        gold_prefs = tuple(
            PreferenceJudgment(dim, rng.choice(list(Preference))) for dim in DimensionId
        )
        description = sentence(rng, language)
        annotations.append(
            Annotation(
                sample_ids=(a.id, b.id),
                task=TaskKind.COMPARISON,
                preferences=gold_prefs,
                description=description,
            )
        )
        key = f"{a.id}+{b.id}"
        if i == 3:
            text = "Sample B carries the stronger delivery overall. " + perturb(
                rng, description, language
            )
        else:
            predicted = tuple(
                PreferenceJudgment(
                    p.dimension,
                    p.preference if rng.random() < 0.7 else rng.choice(list(Preference)),
                )
                for p in gold_prefs
            )
            record = CoTRecord(
                task=TaskKind.COMPARISON,
                think="",
                answer=perturb(rng, description, language),
                preferences=predicted,
            )
            text = serialize_cot(record)
        outputs.append({"id": key, "task": "comparison", "text": text})

    # 6 suggestion items.
    for i in range(6):
        language = LANGS[i]
        sample = new_sample(language)
        description = sentence(rng, language, 5)
        annotations.append(
            Annotation(
                sample_ids=(sample.id,),
                task=TaskKind.SUGGESTION,
                description=description,
            )
        )
        think = "Distortion: persistent hiss after 2s\nSpeech Rate: slightly fast"
        record = CoTRecord(
            task=TaskKind.SUGGESTION,
            think=think,
            answer=perturb(rng, description, language),
        )
        outputs.append({"id": sample.id, "task": "suggestion", "text": serialize_cot(record)})

    # 8 detection items: one without logits, one without a verdict token.
    detection_plan = [
        (Language.EN, Authenticity.REAL), (Language.EN, Authenticity.FAKE),
        (Language.ZH, Authenticity.REAL), (Language.ZH, Authenticity.FAKE),
        (Language.JA, Authenticity.REAL), (Language.JA, Authenticity.FAKE),
        (Language.FR, Authenticity.REAL), (Language.FR, Authenticity.FAKE),
    ]
    score_rows = []
    for i, (language, authenticity) in enumerate(detection_plan):
        sample = new_sample(language, authenticity)
        label = DetectionLabel.REAL if authenticity is Authenticity.REAL else DetectionLabel.FAKE
        annotations.append(
            Annotation(sample_ids=(sample.id,), task=TaskKind.DETECTION, label=label)
        )
        is_fake = label is DetectionLabel.FAKE
        correct = rng.random() < 0.8
        said_fake = is_fake if correct else not is_fake
        if i == 3:
            text = "The evidence is ambiguous; no determination."
        else:
            text = f"<think>spectral check</think>\n<answer>{'Fake' if said_fake else 'Real'}</answer>"
        row: dict = {"id": sample.id, "task": "detection", "text": text}
        if i != 5:
            margin = rng.uniform(0.5, 3.0)
            row["logit_fake"] = margin if said_fake else -margin
            row["logit_real"] = -row["logit_fake"]
        outputs.append(row)
        score_rows.append(
            {
                "id": sample.id,
                "score": rng.uniform(0.55, 0.95) if is_fake else rng.uniform(0.05, 0.45),
                "label": "spoof" if is_fake else "bonafide",
            }
        )

    write_manifest(OUT / "manifest.jsonl", samples, annotations)
    with open(OUT / "outputs.jsonl", "w", encoding="utf-8") as handle:
        for row in outputs:
            handle.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
    with open(OUT / "scores.jsonl", "w", encoding="utf-8") as handle:
        for row in score_rows:
            handle.write(json.dumps(row, sort_keys=True) + "\n")

    config = {
        "manifest": "manifest.jsonl",
        "outputs": "outputs.jsonl",
        "output_dir": "out",
        "tasks": ["assessment", "comparison", "suggestion", "detection"],
        "seed": 7,
        "judge": {
            "endpoint": "mock://7",
            "model": "mock-judge",
            "parallelism": 4,
            "max_retries": 2,
        },
        "metrics": {
            "text": True,
            "llm_score": True,
            "dimension_extraction": True,
            "detection": True,
        },
        "judge_failure_threshold": 0.5,
    }
    (OUT / "config.json").write_text(json.dumps(config, indent=2) + "\n")

    score_config = {
        "manifest": "manifest.jsonl",
        "output_dir": "out-scores",
        "tasks": ["detection"],
        "seed": 7,
        "detection_score_file": "scores.jsonl",
        "detection_binarize_threshold": 0.5,
    }
    (OUT / "config_scores.json").write_text(json.dumps(score_config, indent=2) + "\n")

    from speechqc.harness import RunConfig, render_report, run_eval

    golden = OUT / "golden"
    golden.mkdir(exist_ok=True)
    report = run_eval(RunConfig.load(OUT / "config.json"))
    (golden / "report.json").write_bytes(render_report(report, "json"))
    (golden / "report.csv").write_bytes(render_report(report, "csv"))
    (golden / "report.txt").write_bytes(render_report(report, "text"))
    print(f"wrote fixture with {len(samples)} samples, {len(annotations)} annotations, "
          f"{len(outputs)} outputs")


if __name__ == "__main__":
    main()
