"""Evidence-subgraph extraction: all shortest paths from question entities to
an answer candidate, closed under every graph edge between the collected nodes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .kg import EntityId, KnowledgeGraph, Triple

logger = logging.getLogger(__name__)

TRAVERSAL_MODES = ("undirected", "directed")


class ExtractionError(ValueError):
    """Raised when path search is asked about ids missing from the graph."""


@dataclass(frozen=True)
class ExtractionConfig:
    """Bounds for the shortest-path search.

    max_hops caps path length, max_paths_per_pair caps how many equal-length
    paths are kept per (entity, candidate) pair, and traversal selects whether
    edge direction is ignored (`undirected`, the default) or respected.
    """

    max_hops: int = 4
    max_paths_per_pair: int = 16
    traversal: str = "undirected"

    def __post_init__(self):
        if self.max_hops < 1:
            raise ValueError("max_hops must be >= 1")
        if self.max_paths_per_pair < 1:
            raise ValueError("max_paths_per_pair must be >= 1")
        if self.traversal not in TRAVERSAL_MODES:
            raise ValueError(f"traversal must be one of {TRAVERSAL_MODES}")


@dataclass(frozen=True)
class PathSet:
    """All minimal-length simple paths between one source/target pair.

    `length` is None exactly when no path of length <= max_hops exists,
    in which case `paths` is empty.
    """

    source: EntityId
    target: EntityId
    length: int | None
    paths: tuple[tuple[EntityId, ...], ...]

    @property
    def reachable(self) -> bool:
        return self.length is not None


@dataclass(frozen=True)
class EvidenceSubgraph:
    """Induced subgraph over shortest-path nodes for one candidate.

    `nodes` always contains the candidate and every question entity; `edges`
    are exactly the graph edges with both endpoints in `nodes`, original
    directions and predicates preserved. `path_sets` keeps the per-entity
    shortest paths for provenance.
    """

    question_entities: tuple[EntityId, ...]
    candidate: EntityId
    nodes: frozenset[EntityId]
    edges: frozenset[Triple]
    path_sets: tuple[PathSet, ...] = field(default_factory=tuple)

    @property
    def num_edges(self) -> int:
        return len(self.edges)


def _step_neighbors(graph: KnowledgeGraph, node: EntityId, traversal: str, reverse: bool):
    """Nodes reachable from `node` in one traversal step (deduplicated)."""
    if traversal == "undirected":
        seen = {n for _, n in graph.out_adjacency.get(node, ())}
        seen.update(n for _, n in graph.in_adjacency.get(node, ()))
        return seen
    adjacency = graph.in_adjacency if reverse else graph.out_adjacency
    return {n for _, n in adjacency.get(node, ())}


def _bfs_distances(
    graph: KnowledgeGraph, start: EntityId, traversal: str, reverse: bool, limit: int
) -> dict[EntityId, int]:
    distances = {start: 0}
    frontier = [start]
    depth = 0
    while frontier and depth < limit:
        depth += 1
        next_frontier = []
        for node in frontier:
            for neighbor in _step_neighbors(graph, node, traversal, reverse):
                if neighbor not in distances:
                    distances[neighbor] = depth
                    next_frontier.append(neighbor)
        frontier = next_frontier
    return distances


def all_shortest_paths(
    graph: KnowledgeGraph,
    source: EntityId,
    target: EntityId,
    cfg: ExtractionConfig = ExtractionConfig(),
) -> PathSet:
    """Every minimal-length simple path from source to target.

    Paths are produced in lexicographic node-id order and truncated to
    cfg.max_paths_per_pair. Shortest paths never repeat a node, so the
    result is node-simple by construction.
    """
    for name, node in (("source", source), ("target", target)):
        if node not in graph:
            raise ExtractionError(f"{name} {node!r} is not in the graph")
    if source == target:
        return PathSet(source, target, 0, ((source,),))

    from_source = _bfs_distances(graph, source, cfg.traversal, False, cfg.max_hops)
    total = from_source.get(target)
    if total is None:
        return PathSet(source, target, None, ())
    # Distances back from the target prune the forward walk to shortest paths only.
    to_target = _bfs_distances(graph, target, cfg.traversal, True, total)

    paths: list[tuple[EntityId, ...]] = []
    stack = [source]

    def walk(node: EntityId, depth: int) -> bool:
        if node == target:
            paths.append(tuple(stack))
            return len(paths) >= cfg.max_paths_per_pair
        for neighbor in sorted(_step_neighbors(graph, node, cfg.traversal, False)):
            if from_source.get(neighbor) != depth + 1:
                continue
            if to_target.get(neighbor) != total - depth - 1:
                continue
            stack.append(neighbor)
            if walk(neighbor, depth + 1):
                return True
            stack.pop()
        return False

    walk(source, 0)
    return PathSet(source, target, total, tuple(paths))


def induced_edges(graph: KnowledgeGraph, nodes: frozenset[EntityId]) -> frozenset[Triple]:
    """All graph edges whose endpoints both lie in `nodes`."""
    edges = set()
    for subject in nodes:
        for predicate, obj in graph.out_adjacency.get(subject, ()):
            if obj in nodes:
                edges.add((subject, predicate, obj))
    return frozenset(edges)


def extract_subgraph(
    graph: KnowledgeGraph,
    entities: list[EntityId] | tuple[EntityId, ...],
    candidate: EntityId,
    cfg: ExtractionConfig = ExtractionConfig(),
) -> EvidenceSubgraph:
    """Build the evidence subgraph connecting question entities to a candidate.

    Collects all capped shortest paths per entity, pools their nodes together
    with the candidate and every entity (reachable or not), then closes over
    every graph edge between pooled nodes. Unknown question entities are kept
    as isolated nodes with a logged warning; an unknown candidate is an error.
    """
    if not entities:
        raise ExtractionError("entities must be non-empty")
    if candidate not in graph:
        raise ExtractionError(f"candidate {candidate!r} is not in the graph")

    nodes: set[EntityId] = {candidate}
    path_sets: list[PathSet] = []
    for entity in entities:
        nodes.add(entity)
        if entity not in graph:
            logger.warning("question entity %s not in graph; kept isolated", entity)
            path_sets.append(PathSet(entity, candidate, None, ()))
            continue
        path_set = all_shortest_paths(graph, entity, candidate, cfg)
        path_sets.append(path_set)
        for path in path_set.paths:
            nodes.update(path)

    frozen = frozenset(nodes)
    return EvidenceSubgraph(
        question_entities=tuple(entities),
        candidate=candidate,
        nodes=frozen,
        edges=induced_edges(graph, frozen),
        path_sets=tuple(path_sets),
    )
