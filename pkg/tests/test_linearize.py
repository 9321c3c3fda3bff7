import random
import string

import pytest
from hypothesis import given, strategies as st

from kgqa_rerank.extraction import EvidenceSubgraph, extract_subgraph
from kgqa_rerank.kg import graph_from_triples
from kgqa_rerank.linearize import (
    LinearizationParseError,
    labeled_adjacency,
    linearize,
    node_order,
    parse_linearized,
)

EXPECTED_G0_TEXT = (
    "Alpha, related to, Beta; Alpha, member of, Delta; "
    "Beta, part of, [SEP] Gamma [SEP]; Delta, part of, [SEP] Gamma [SEP]"
)


def make_subgraph(entities, candidate, nodes, edges):
    return EvidenceSubgraph(
        question_entities=tuple(entities),
        candidate=candidate,
        nodes=frozenset(nodes),
        edges=frozenset(edges),
    )


def test_node_order_g0(g0):
    sub = extract_subgraph(g0, ["Q1"], "Q3")
    assert node_order(sub) == ["Q1", "Q2", "Q4", "Q3"]


def test_node_order_candidate_only():
    sub = make_subgraph([], "Q9", {"Q9"}, set())
    assert node_order(sub) == ["Q9"]


def test_node_order_entities_first():
    sub = make_subgraph(["Q4", "Q2"], "Q3", {"Q1", "Q2", "Q3", "Q4"}, set())
    assert node_order(sub) == ["Q4", "Q2", "Q1", "Q3"]


def test_node_order_dedupes_and_keeps_candidate_last():
    sub = make_subgraph(["Q2", "Q2", "Q3"], "Q3", {"Q2", "Q3"}, set())
    assert node_order(sub) == ["Q2", "Q3"]


def test_linearize_g0_highlighted(g0):
    sub = extract_subgraph(g0, ["Q1"], "Q3")
    seq = linearize(sub, g0, highlight=True, highlight_token="[SEP]")
    assert seq.text == EXPECTED_G0_TEXT
    assert seq.triple_count == 4
    assert seq.highlighted


def test_linearize_single_edge(g0):
    sub = make_subgraph(["Q2"], "Q3", {"Q2", "Q3"}, {("Q2", "P2", "Q3")})
    seq = linearize(sub, g0, highlight=False)
    assert seq.text == "Beta, part of, Gamma"
    assert seq.triple_count == 1


def test_linearize_edgeless_highlight(g0):
    sub = make_subgraph(["Q1"], "Q3", {"Q1", "Q3"}, set())
    seq = linearize(sub, g0, highlight=True)
    assert seq.text == "[SEP] Gamma [SEP]"
    assert seq.triple_count == 0


def test_linearize_empty_token_rejected(g0):
    sub = make_subgraph(["Q1"], "Q3", {"Q1", "Q3"}, set())
    with pytest.raises(ValueError):
        linearize(sub, g0, highlight=True, highlight_token="")


def test_highlight_wraps_by_node_not_label():
    # Two nodes share a label; only the candidate node's occurrences wrap.
    graph = graph_from_triples(
        [("A", "P", "B"), ("C", "P", "B")], {"A": "Twin", "C": "Twin", "B": "Mid"}
    )
    sub = make_subgraph(["C"], "A", {"A", "B", "C"}, {("A", "P", "B"), ("C", "P", "B")})
    seq = linearize(sub, graph, highlight=True)
    assert seq.text == "Twin, P, Mid; [SEP] Twin [SEP], P, Mid"


def test_parse_g0_roundtrip(g0):
    sub = extract_subgraph(g0, ["Q1"], "Q3")
    triples, highlighted = parse_linearized(linearize(sub, g0, highlight=True).text)
    assert triples == [
        ("Alpha", "related to", "Beta"),
        ("Alpha", "member of", "Delta"),
        ("Beta", "part of", "Gamma"),
        ("Delta", "part of", "Gamma"),
    ]
    assert highlighted == {"Gamma"}


def test_parse_empty_errors():
    with pytest.raises(LinearizationParseError):
        parse_linearized("")


def test_parse_single_triple():
    assert parse_linearized("A, b, C") == ([("A", "b", "C")], set())


def test_parse_bad_field_count():
    with pytest.raises(LinearizationParseError):
        parse_linearized("A, b, C; D, e")


def test_parse_degenerate_candidate_only():
    assert parse_linearized("[SEP] Gamma [SEP]") == ([], {"Gamma"})
    assert parse_linearized("Gamma") == ([], set())


def test_triple_count_counts_parallel_predicates():
    graph = graph_from_triples([("A", "P1", "B"), ("A", "P2", "B")])
    sub = make_subgraph(["A"], "B", {"A", "B"}, {("A", "P1", "B"), ("A", "P2", "B")})
    seq = linearize(sub, graph, highlight=False)
    assert seq.triple_count == 2
    assert seq.text == "A, P1, B; A, P2, B"


def test_adjacency_diagonal_empty(g0):
    sub = extract_subgraph(g0, ["Q1"], "Q3")
    adj = labeled_adjacency(sub)
    assert all(not adj.cells[i][i] for i in range(len(adj.order)))
    total = sum(len(cell) for row in adj.cells for cell in row)
    assert total == len(sub.edges)


def _random_labeled_world(rng: random.Random):
    n = rng.randint(2, 8)
    nodes = [f"Q{i}" for i in range(n)]
    labels = {}
    used = set()
    for node in nodes:
        while True:
            label = "".join(rng.choice(string.ascii_letters) for _ in range(rng.randint(1, 6)))
            if label not in used:
                used.add(label)
                labels[node] = label
                break
    triples = set()
    for _ in range(rng.randint(1, 14)):
        a, b = rng.sample(nodes, 2)
        predicate = f"P{rng.randint(1, 3)}"
        labels.setdefault(predicate, f"rel{predicate}")
        triples.add((a, predicate, b))
    graph = graph_from_triples(sorted(triples), labels)
    present = sorted(graph.nodes)
    entities = rng.sample(present, rng.randint(1, min(2, len(present))))
    candidate = rng.choice(present)
    sub = extract_subgraph(graph, entities, candidate)
    return graph, sub, labels


@pytest.mark.parametrize("seed", range(50))
def test_roundtrip_random_subgraphs(seed):
    rng = random.Random(seed)
    graph, sub, labels = _random_labeled_world(rng)
    seq = linearize(sub, graph, highlight=True)
    triples, highlighted = parse_linearized(seq.text)
    expected = _expected_label_triples(sub, graph, labels)
    assert triples == expected
    candidate_label = labels[sub.candidate]
    if any(candidate_label in (t[0], t[2]) for t in expected) or not expected:
        assert highlighted == {candidate_label}
    else:
        assert highlighted == set()
    # token count: one wrap per rendered candidate occurrence
    touching = sum(1 for s, _, o in sub.edges if sub.candidate in (s, o))
    expected_tokens = 2 * touching if sub.edges else 2
    assert seq.text.count(seq.highlight_token) == expected_tokens


def _expected_label_triples(sub, graph, labels):
    from kgqa_rerank.linearize import node_order as order_fn

    order = order_fn(sub)
    pos = {node: i for i, node in enumerate(order)}
    ordered_edges = sorted(sub.edges, key=lambda e: (pos[e[0]], pos[e[2]], e[1]))
    return [
        (labels[s], labels.get(p, p), labels[o]) for s, p, o in ordered_edges
    ]


@pytest.mark.parametrize("seed", range(25))
def test_highlight_toggle_only_changes_wrapping(seed):
    rng = random.Random(100 + seed)
    graph, sub, _ = _random_labeled_world(rng)
    token = "[HL]"
    with_hl = linearize(sub, graph, highlight=True, highlight_token=token).text
    without = linearize(sub, graph, highlight=False).text
    stripped = with_hl.replace(f"{token} ", "").replace(f" {token}", "")
    assert stripped == without


def test_determinism(g0):
    sub = extract_subgraph(g0, ["Q1"], "Q3")
    assert linearize(sub, g0).text == linearize(sub, g0).text


@given(st.integers(min_value=0, max_value=10**6))
def test_triple_count_equals_edges(seed):
    rng = random.Random(seed)
    graph, sub, _ = _random_labeled_world(rng)
    assert linearize(sub, graph).triple_count == len(sub.edges)
