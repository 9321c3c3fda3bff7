"""Structural statistics for evidence subgraphs and per-label aggregation.

Cycle counts are distinct elementary circuits of the directed graph (node
sequences, so parallel predicates do not multiply cycles). Bridges are
computed on the undirected simple projection. Density is the fraction of
ordered node pairs joined by at least one edge.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Iterable, Sequence

CYCLE_CAP = 10_000

CORRECT = "correct"
INCORRECT = "incorrect"

# Row names follow the aggregate table layout used in reports.
METRIC_ROWS = (
    ("Number of Nodes", "num_nodes"),
    ("Number of Edges", "num_edges"),
    ("Density", "density"),
    ("Number of Simple Cycles", "num_simple_cycles"),
    ("Number of Bridges", "num_bridges"),
)


@dataclass(frozen=True)
class GraphComplexityReport:
    num_nodes: int
    num_edges: int
    density: float
    num_simple_cycles: int
    num_bridges: int
    cycles_saturated: bool = False


@dataclass(frozen=True)
class AggregateReport:
    """Arithmetic means of every report field, split by correctness label."""

    correct_means: dict[str, float]
    incorrect_means: dict[str, float]
    count_correct: int
    count_incorrect: int


def count_simple_cycles(
    adjacency: dict[str, set[str]], cap: int = CYCLE_CAP
) -> tuple[int, bool]:
    """Count elementary circuits of a directed graph, Johnson-style.

    Runs a blocked depth-first search from each start node restricted to
    nodes >= the start, so each circuit is counted exactly once (at its
    smallest node). Returns (count, saturated); saturated means the count
    stopped at `cap`.
    """
    order = sorted(adjacency)
    rank = {node: i for i, node in enumerate(order)}
    count = 0
    for start in order:
        start_rank = rank[start]
        blocked: set[str] = set()
        block_map: dict[str, set[str]] = {}

        def unblock(node: str):
            stack = [node]
            while stack:
                current = stack.pop()
                if current in blocked:
                    blocked.discard(current)
                    stack.extend(block_map.pop(current, ()))

        def successors(node: str):
            return [n for n in adjacency.get(node, ()) if rank[n] >= start_rank]

        def circuit(node: str) -> bool:
            nonlocal count
            found = False
            blocked.add(node)
            for neighbor in successors(node):
                if neighbor == start:
                    count += 1
                    found = True
                    if count >= cap:
                        return True
                elif neighbor not in blocked:
                    if circuit(neighbor):
                        if count >= cap:
                            return True
                        found = True
            if found:
                unblock(node)
            else:
                for neighbor in successors(node):
                    block_map.setdefault(neighbor, set()).add(node)
            return found

        circuit(start)
        if count >= cap:
            return cap, True
    return count, False


def find_bridges(undirected: dict[str, set[str]]) -> set[frozenset]:
    """Bridges of an undirected simple graph via iterative low-link DFS."""
    preorder: dict[str, int] = {}
    low: dict[str, int] = {}
    bridges: set[frozenset] = set()
    counter = 0
    for root in sorted(undirected):
        if root in preorder:
            continue
        stack: list[tuple[str, str | None, Iterable]] = [
            (root, None, iter(sorted(undirected[root])))
        ]
        preorder[root] = low[root] = counter
        counter += 1
        while stack:
            node, parent, children = stack[-1]
            advanced = False
            for child in children:
                if child not in preorder:
                    preorder[child] = low[child] = counter
                    counter += 1
                    stack.append((child, node, iter(sorted(undirected[child]))))
                    advanced = True
                    break
                if child != parent:
                    low[node] = min(low[node], preorder[child])
            if not advanced:
                stack.pop()
                if parent is not None:
                    low[parent] = min(low[parent], low[node])
                    if low[node] > preorder[parent]:
                        bridges.add(frozenset((parent, node)))
    return bridges


def complexity_from_edges(
    nodes: Iterable[str], edges: Iterable[tuple[str, str, str]], cap: int = CYCLE_CAP
) -> GraphComplexityReport:
    """Compute the report directly from a node set and directed edge triples."""
    node_set = set(nodes)
    edge_list = list(edges)
    directed_pairs: set[tuple[str, str]] = set()
    adjacency: dict[str, set[str]] = {node: set() for node in node_set}
    undirected: dict[str, set[str]] = {node: set() for node in node_set}
    for subject, _, obj in edge_list:
        node_set.add(subject)
        node_set.add(obj)
        adjacency.setdefault(subject, set()).add(obj)
        adjacency.setdefault(obj, set())
        undirected.setdefault(subject, set()).add(obj)
        undirected.setdefault(obj, set()).add(subject)
        directed_pairs.add((subject, obj))
    n = len(node_set)
    density = len(directed_pairs) / (n * (n - 1)) if n >= 2 else 0.0
    cycles, saturated = count_simple_cycles(adjacency, cap)
    return GraphComplexityReport(
        num_nodes=n,
        num_edges=len(edge_list),
        density=density,
        num_simple_cycles=cycles,
        num_bridges=len(find_bridges(undirected)),
        cycles_saturated=saturated,
    )


def complexity_report(subgraph, cap: int = CYCLE_CAP) -> GraphComplexityReport:
    """Structural statistics of an evidence subgraph (Table-style metrics)."""
    return complexity_from_edges(subgraph.nodes, subgraph.edges, cap)


def _means(reports: Sequence[GraphComplexityReport]) -> dict[str, float]:
    names = [f.name for f in fields(GraphComplexityReport) if f.name != "cycles_saturated"]
    if not reports:
        return {name: float("nan") for name in names}
    return {
        name: sum(getattr(r, name) for r in reports) / len(reports) for name in names
    }


def aggregate(
    reports: Sequence[GraphComplexityReport], labels: Sequence[str]
) -> AggregateReport:
    """Per-label means of every metric. Labels are 'correct' / 'incorrect'."""
    if not reports:
        raise ValueError("no reports to aggregate")
    if len(reports) != len(labels):
        raise ValueError("reports and labels must align")
    unknown = set(labels) - {CORRECT, INCORRECT}
    if unknown:
        raise ValueError(f"unknown labels: {sorted(unknown)}")
    correct = [r for r, l in zip(reports, labels) if l == CORRECT]
    incorrect = [r for r, l in zip(reports, labels) if l == INCORRECT]
    return AggregateReport(
        correct_means=_means(correct),
        incorrect_means=_means(incorrect),
        count_correct=len(correct),
        count_incorrect=len(incorrect),
    )


def aggregate_tsv(report: AggregateReport) -> str:
    """Render the aggregate as a TSV table with one metric per row."""
    lines = ["Complexity Metrics\t\"Correct\" Subgraphs\t\"Incorrect\" Subgraphs"]
    for row_name, field_name in METRIC_ROWS:
        correct = report.correct_means[field_name]
        incorrect = report.incorrect_means[field_name]
        lines.append(f"{row_name}\t{correct:.2f}\t{incorrect:.2f}")
    return "\n".join(lines)
