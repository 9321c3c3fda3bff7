"""Loading the training file formats.

The ranker trains on the pipeline's exported subgraph-dataset JSONL
(`question_id`, `linearized`, `is_correct`, ...). Question text is joined
from an optional questions JSONL by id; without it the question side is
empty, which the scorer accepts. The classifier trains on a labeled
questions JSONL (`question`, `type`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .model import QUESTION_TYPES


@dataclass(frozen=True)
class TrainingExample:
    question: str
    sequence: str
    target: float

    def __post_init__(self):
        if not self.sequence:
            raise ValueError("sequence must be non-empty")
        if self.target not in (0.0, 1.0):
            raise ValueError("target must be 0 or 1")


def _iter_jsonl(path: Path):
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                yield json.loads(line)


def load_ranker_examples(
    dataset_path: str | Path, questions_path: str | Path | None = None
) -> list[TrainingExample]:
    questions: dict[str, str] = {}
    if questions_path is not None:
        for raw in _iter_jsonl(Path(questions_path)):
            questions[str(raw["id"])] = raw["question"]
    examples = []
    for raw in _iter_jsonl(Path(dataset_path)):
        examples.append(
            TrainingExample(
                question=questions.get(str(raw["question_id"]), ""),
                sequence=raw["linearized"],
                target=1.0 if raw["is_correct"] else 0.0,
            )
        )
    if not examples:
        raise ValueError(f"no training examples in {dataset_path}")
    return examples


def load_labeled_questions(path: str | Path) -> list[tuple[str, str]]:
    labeled = []
    for raw in _iter_jsonl(Path(path)):
        qtype = raw["type"]
        if qtype not in QUESTION_TYPES:
            raise ValueError(f"unknown question type {qtype!r}")
        labeled.append((raw["question"], qtype))
    if not labeled:
        raise ValueError(f"no labeled questions in {path}")
    return labeled
