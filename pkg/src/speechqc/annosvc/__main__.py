"""Serve the annotation workflow: python -m speechqc.annosvc --root DIR"""

from __future__ import annotations

import argparse
from pathlib import Path

import uvicorn

from ..core import TaskKind
from ..dataset import load_manifest
from ..judge import JudgeClient, JudgeConfig
from .service import create_app
from .store import WorkItemStore


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="speechqc-annosvc")
    parser.add_argument("--root", required=True, help="state directory for event logs")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8400)
    parser.add_argument("--audio-dir", default=None, help="directory served under /audio")
    parser.add_argument(
        "--judge-endpoint", default="mock://0", help="generation endpoint (mock://<seed> offline)"
    )
    parser.add_argument("--judge-model", default="draft-generator")
    parser.add_argument(
        "--seed-manifest", default=None, help="create one pending item per manifest sample"
    )
    parser.add_argument(
        "--seed-task",
        default="assessment",
        choices=[t.value for t in TaskKind if t is not TaskKind.DETECTION],
    )
    parser.add_argument("--cors-origin", action="append", default=None)
    args = parser.parse_args(argv)

    store = WorkItemStore(args.root)
    if args.seed_manifest:
        task = TaskKind(args.seed_task)
        samples, _ = load_manifest(args.seed_manifest)
        for sample in samples:
            item_id = f"{task.value}-{sample.id}"
            if item_id not in store.item_ids():
                store.create_item(item_id, (sample.id,), task)

    judge = JudgeClient(JudgeConfig(endpoint=args.judge_endpoint, model=args.judge_model))
    app = create_app(
        store,
        judge_client=judge,
        audio_dir=Path(args.audio_dir) if args.audio_dir else None,
        cors_origins=tuple(args.cors_origin) if args.cors_origin else ("*",),
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
