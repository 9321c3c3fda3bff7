"""Paths and loaders for the bundled toy fixtures.

`toy_g0` is a five-triple micro graph used across examples and tests;
`toy_kg` is a ~200-triple synthetic world with question and candidate files
for end-to-end evaluation. Both are regenerated by scripts/make_toy_dataset.py.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .kg import KnowledgeGraph, load_knowledge_graph_files


def data_path(name: str) -> Path:
    return Path(resources.files("kgqa_rerank").joinpath("data", name))


TOY_G0_TRIPLES = "toy_g0.tsv"
TOY_G0_LABELS = "toy_g0_labels.tsv"
TOY_KG_TRIPLES = "toy_kg.tsv"
TOY_KG_LABELS = "toy_kg_labels.tsv"
TOY_QUESTIONS = "toy_questions.jsonl"
TOY_CANDIDATES = "toy_candidates.jsonl"


def load_toy_g0() -> KnowledgeGraph:
    return load_knowledge_graph_files(data_path(TOY_G0_TRIPLES), data_path(TOY_G0_LABELS))


def load_toy_kg() -> KnowledgeGraph:
    return load_knowledge_graph_files(data_path(TOY_KG_TRIPLES), data_path(TOY_KG_LABELS))
