"""Deterministic serialization of evidence subgraphs into triple-list strings.

The subgraph is viewed as a labeled adjacency matrix over a fixed node order
and unraveled row by row into `from, edge, to` triples. The answer candidate's
label can be wrapped in a highlight token so a downstream encoder can tell
which node is being judged.
"""

from __future__ import annotations

from dataclasses import dataclass

from .extraction import EvidenceSubgraph
from .kg import EntityId, KnowledgeGraph, PredicateId, label_of

DEFAULT_HIGHLIGHT_TOKEN = "[SEP]"
FIELD_SEP = ", "
TRIPLE_SEP = "; "


class LinearizationParseError(ValueError):
    """Raised when a string cannot be read back as a linearized subgraph."""


@dataclass(frozen=True)
class LabeledAdjacency:
    """Adjacency matrix over `order` whose cells hold predicate lists."""

    order: tuple[EntityId, ...]
    cells: tuple[tuple[tuple[PredicateId, ...], ...], ...]


@dataclass(frozen=True)
class LinearizedSequence:
    text: str
    triple_count: int
    highlight_token: str
    highlighted: bool


def node_order(subgraph: EvidenceSubgraph) -> list[EntityId]:
    """Fixed node ordering: question entities first (stored order, deduplicated),
    remaining nodes in ascending id order, candidate last."""
    ordered: list[EntityId] = []
    seen: set[EntityId] = set()
    for entity in subgraph.question_entities:
        if entity in seen or entity == subgraph.candidate or entity not in subgraph.nodes:
            continue
        ordered.append(entity)
        seen.add(entity)
    middle = sorted(
        node for node in subgraph.nodes if node not in seen and node != subgraph.candidate
    )
    ordered.extend(middle)
    ordered.append(subgraph.candidate)
    return ordered


def labeled_adjacency(subgraph: EvidenceSubgraph) -> LabeledAdjacency:
    order = node_order(subgraph)
    index = {node: i for i, node in enumerate(order)}
    cell_sets: dict[tuple[int, int], list[PredicateId]] = {}
    for subject, predicate, obj in subgraph.edges:
        cell_sets.setdefault((index[subject], index[obj]), []).append(predicate)
    cells = tuple(
        tuple(tuple(sorted(cell_sets.get((i, j), ()))) for j in range(len(order)))
        for i in range(len(order))
    )
    return LabeledAdjacency(order=tuple(order), cells=cells)


def linearize(
    subgraph: EvidenceSubgraph,
    graph: KnowledgeGraph,
    highlight: bool = True,
    highlight_token: str = DEFAULT_HIGHLIGHT_TOKEN,
) -> LinearizedSequence:
    """Render the subgraph as `from, edge, to` triples joined by `; `.

    Rows and columns follow node_order; predicates within a cell are sorted.
    With highlighting on, every occurrence of the candidate as a node is
    rendered as `<token> <label> <token>`. An edgeless subgraph degrades to
    the candidate label alone.
    """
    if highlight and not highlight_token:
        raise ValueError("highlight_token must be non-empty when highlighting")

    def render(node: EntityId) -> str:
        label = label_of(graph, node)
        if highlight and node == subgraph.candidate:
            return f"{highlight_token} {label} {highlight_token}"
        return label

    adjacency = labeled_adjacency(subgraph)
    parts: list[str] = []
    count = 0
    for i, subject in enumerate(adjacency.order):
        for j, obj in enumerate(adjacency.order):
            for predicate in adjacency.cells[i][j]:
                parts.append(
                    f"{render(subject)}{FIELD_SEP}{label_of(graph, predicate)}"
                    f"{FIELD_SEP}{render(obj)}"
                )
                count += 1
    text = TRIPLE_SEP.join(parts) if parts else render(subgraph.candidate)
    return LinearizedSequence(
        text=text,
        triple_count=count,
        highlight_token=highlight_token,
        highlighted=highlight,
    )


def _unwrap(field: str, highlight_token: str) -> tuple[str, bool]:
    prefix = f"{highlight_token} "
    suffix = f" {highlight_token}"
    if field.startswith(prefix) and field.endswith(suffix) and len(field) >= len(prefix) + len(suffix):
        return field[len(prefix) : -len(suffix)], True
    return field, False


def parse_linearized(
    text: str, highlight_token: str = DEFAULT_HIGHLIGHT_TOKEN
) -> tuple[list[tuple[str, str, str]], set[str]]:
    """Recover the ordered label triples and the set of highlighted labels.

    Accepts the degenerate single-label form an edgeless subgraph produces
    (returning no triples). Empty text and triples with a field count other
    than three are parse errors.
    """
    if not text:
        raise LinearizationParseError("empty text")
    highlighted: set[str] = set()
    if FIELD_SEP not in text:
        label, wrapped = _unwrap(text, highlight_token)
        if wrapped:
            highlighted.add(label)
        return [], highlighted
    triples: list[tuple[str, str, str]] = []
    for chunk in text.split(TRIPLE_SEP):
        fields = chunk.split(FIELD_SEP)
        if len(fields) != 3:
            raise LinearizationParseError(
                f"expected 3 fields in triple, got {len(fields)}: {chunk!r}"
            )
        subject, subject_wrapped = _unwrap(fields[0], highlight_token)
        predicate = fields[1]
        obj, obj_wrapped = _unwrap(fields[2], highlight_token)
        if subject_wrapped:
            highlighted.add(subject)
        if obj_wrapped:
            highlighted.add(obj)
        triples.append((subject, predicate, obj))
    return triples, highlighted
