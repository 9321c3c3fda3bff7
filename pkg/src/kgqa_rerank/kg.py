"""In-memory store for a directed labeled multigraph loaded from triple files.

The graph is built once and never mutated afterwards, so it can be shared
freely between threads during extraction and evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Mapping

EntityId = str
PredicateId = str
Triple = tuple[EntityId, PredicateId, EntityId]

COMMENT_PREFIX = "#"
FIELD_SEPARATOR = "\t"


class GraphLoadError(ValueError):
    """Raised when a triples or labels source cannot be parsed."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


@dataclass(frozen=True)
class KnowledgeGraph:
    """Immutable directed multigraph with per-id display labels.

    Adjacency lists are stored sorted by (predicate, neighbor) so neighbor
    queries are deterministic regardless of input order. Parallel edges with
    distinct predicates are kept; exact duplicate triples collapse to one.
    """

    nodes: frozenset[EntityId]
    out_adjacency: Mapping[EntityId, tuple[tuple[PredicateId, EntityId], ...]]
    in_adjacency: Mapping[EntityId, tuple[tuple[PredicateId, EntityId], ...]]
    labels: Mapping[str, str] = field(default_factory=dict)

    def __contains__(self, node: EntityId) -> bool:
        return node in self.nodes

    @property
    def num_edges(self) -> int:
        return sum(len(pairs) for pairs in self.out_adjacency.values())


def _check_id(value: str, what: str, line_number: int) -> str:
    if not value:
        raise GraphLoadError(f"empty {what}", line_number)
    if any(ch.isspace() for ch in value):
        raise GraphLoadError(f"{what} {value!r} contains whitespace", line_number)
    return value


def parse_triples(source: Iterable[str]) -> Iterator[tuple[int, Triple]]:
    """Yield (line_number, triple) from a tab-separated triples stream."""
    for line_number, raw in enumerate(source, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith(COMMENT_PREFIX):
            continue
        fields = line.split(FIELD_SEPARATOR)
        if len(fields) != 3:
            raise GraphLoadError(
                f"expected 3 tab-separated fields, got {len(fields)}", line_number
            )
        subject = _check_id(fields[0], "subject", line_number)
        predicate = _check_id(fields[1], "predicate", line_number)
        obj = _check_id(fields[2], "object", line_number)
        if subject == obj:
            raise GraphLoadError(f"self-loop on {subject!r}", line_number)
        yield line_number, (subject, predicate, obj)


def parse_labels(source: Iterable[str]) -> dict[str, str]:
    """Parse an `id<TAB>label` stream; later entries override earlier ones."""
    labels: dict[str, str] = {}
    for line_number, raw in enumerate(source, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith(COMMENT_PREFIX):
            continue
        fields = line.split(FIELD_SEPARATOR)
        if len(fields) != 2:
            raise GraphLoadError(
                f"expected 2 tab-separated fields, got {len(fields)}", line_number
            )
        if not fields[0]:
            raise GraphLoadError("empty id", line_number)
        labels[fields[0]] = fields[1]
    return labels


def graph_from_triples(
    triples: Iterable[Triple], labels: Mapping[str, str] | None = None
) -> KnowledgeGraph:
    """Build an immutable graph from already-parsed triples."""
    out_sets: dict[EntityId, set[tuple[PredicateId, EntityId]]] = {}
    in_sets: dict[EntityId, set[tuple[PredicateId, EntityId]]] = {}
    nodes: set[EntityId] = set()
    for subject, predicate, obj in triples:
        nodes.add(subject)
        nodes.add(obj)
        out_sets.setdefault(subject, set()).add((predicate, obj))
        in_sets.setdefault(obj, set()).add((predicate, subject))
    out_adjacency = {node: tuple(sorted(pairs)) for node, pairs in out_sets.items()}
    in_adjacency = {node: tuple(sorted(pairs)) for node, pairs in in_sets.items()}
    return KnowledgeGraph(
        nodes=frozenset(nodes),
        out_adjacency=out_adjacency,
        in_adjacency=in_adjacency,
        labels=dict(labels or {}),
    )


def load_knowledge_graph(
    triples_source: IO[str] | Iterable[str],
    labels_source: IO[str] | Iterable[str] | None = None,
) -> KnowledgeGraph:
    """Load a graph from a triples stream and an optional labels stream.

    Raises GraphLoadError (with the offending line number) on malformed
    lines, empty fields, or self-loops.
    """
    triples = [triple for _, triple in parse_triples(triples_source)]
    labels = parse_labels(labels_source) if labels_source is not None else {}
    return graph_from_triples(triples, labels)


def load_knowledge_graph_files(
    triples_path, labels_path=None
) -> KnowledgeGraph:
    with open(triples_path, encoding="utf-8") as triples_source:
        if labels_path is None:
            return load_knowledge_graph(triples_source)
        with open(labels_path, encoding="utf-8") as labels_source:
            return load_knowledge_graph(triples_source, labels_source)


def neighbors(
    graph: KnowledgeGraph, node: EntityId, direction: str = "out"
) -> list[tuple[PredicateId, EntityId]]:
    """Sorted (predicate, neighbor) pairs of `node` in the given direction.

    `both` merges the out and in lists into one sorted union. Unknown nodes
    yield an empty list.
    """
    if direction == "out":
        return list(graph.out_adjacency.get(node, ()))
    if direction == "in":
        return list(graph.in_adjacency.get(node, ()))
    if direction == "both":
        merged = set(graph.out_adjacency.get(node, ()))
        merged.update(graph.in_adjacency.get(node, ()))
        return sorted(merged)
    raise ValueError(f"unknown direction {direction!r}")


def label_of(graph: KnowledgeGraph, id_: str) -> str:
    """Display label for an entity or predicate id, falling back to the id."""
    return graph.labels.get(id_, id_)


def iter_edges(graph: KnowledgeGraph) -> Iterator[Triple]:
    """All edges as (subject, predicate, object), in sorted subject order."""
    for subject in sorted(graph.out_adjacency):
        for predicate, obj in graph.out_adjacency[subject]:
            yield subject, predicate, obj
