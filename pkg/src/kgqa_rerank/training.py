"""Turning exported subgraph records back into feature-ranker training data.

Exported records carry the evidence subgraph itself, which preserves every
shortest path found at export time, so path-based features can be recomputed
inside the record without touching the full graph.
"""

from __future__ import annotations

from typing import Mapping

from .extraction import ExtractionConfig, PathSet, all_shortest_paths
from .graph_metrics import complexity_from_edges
from .kg import graph_from_triples
from .pipeline import QuestionRecord, SubgraphDatasetRecord
from .ranking import FeatureVector, feature_vector


def features_from_record(
    record: SubgraphDatasetRecord,
    question: QuestionRecord,
    labels: Mapping[str, str],
    max_hops: int = 4,
) -> FeatureVector:
    """Feature vector for one exported (question, candidate) record."""
    mini = graph_from_triples(record.edges)
    cfg = ExtractionConfig(max_hops=max_hops, max_paths_per_pair=1)
    path_sets = []
    for entity in question.question_entities:
        if entity in mini and record.candidate in mini:
            path_sets.append(all_shortest_paths(mini, entity, record.candidate, cfg))
        else:
            path_sets.append(PathSet(entity, record.candidate, None, ()))
    report = complexity_from_edges(record.nodes, record.edges)
    shell = _SubgraphShell(
        question_entities=tuple(question.question_entities),
        candidate=record.candidate,
        path_sets=tuple(path_sets),
    )
    return feature_vector(
        question.question,
        shell,
        report,
        candidate_label=labels.get(record.candidate, record.candidate),
        max_hops=max_hops,
    )


class _SubgraphShell:
    """Just enough of the evidence-subgraph surface for feature extraction."""

    def __init__(self, question_entities, candidate, path_sets):
        self.question_entities = question_entities
        self.candidate = candidate
        self.path_sets = path_sets
