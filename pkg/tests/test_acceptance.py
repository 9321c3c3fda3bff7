"""Acceptance suite: one test per criterion, at the stated scale and
tolerance. The conftest hook prints an `ACCEPTANCE PASS/FAIL` line per
criterion as the suite runs."""

import os
import random
import string
import time
from itertools import combinations, permutations

import pytest

from kgqa_rerank.candidates import DiverseBeamConfig, diverse_beam_search
from kgqa_rerank.extraction import ExtractionConfig, all_shortest_paths, extract_subgraph
from kgqa_rerank.fixtures import TOY_CANDIDATES, TOY_QUESTIONS, data_path, load_toy_kg
from kgqa_rerank.graph_metrics import (
    CORRECT,
    INCORRECT,
    aggregate,
    complexity_from_edges,
    count_simple_cycles,
)
from kgqa_rerank.kg import graph_from_triples
from kgqa_rerank.linearize import linearize, node_order, parse_linearized
from kgqa_rerank.pipeline import (
    GenerationScorer,
    OracleScorer,
    PoolCandidateSource,
    TYPE_COUNT,
    TYPE_YESNO,
    evaluate,
    load_questions,
    load_subgraph_dataset,
)
from kgqa_rerank.candidates import Candidate, load_candidates_file
from kgqa_rerank.ranking import FeatureVector, rerank, train_feature_ranker

import oracles

UNCAPPED = 10**9


# ---------------------------------------------------------------------------
# Criterion: induced-subgraph oracle equality on >= 1000 random multigraphs


def test_induced_subgraph_oracle():
    started = time.time()
    rng = random.Random(20240501)
    cfg = ExtractionConfig()
    for trial in range(1000):
        graph = oracles.random_multigraph(rng, max_nodes=12, max_edges=24)
        nodes = sorted(graph.nodes)
        entities = rng.sample(nodes, rng.randint(1, min(3, len(nodes))))
        candidate = rng.choice(nodes)
        traversal = "directed" if trial % 4 == 0 else "undirected"
        trial_cfg = ExtractionConfig(traversal=traversal)
        members, edges, path_sets = oracles.expected_subgraph(
            graph, entities, candidate, trial_cfg.max_hops,
            trial_cfg.max_paths_per_pair, traversal,
        )
        sub = extract_subgraph(graph, entities, candidate, trial_cfg)
        assert sub.nodes == frozenset(members)
        assert sub.edges == frozenset(edges)
        for (entity, length, paths), got in zip(path_sets, sub.path_sets):
            assert got.source == entity
            assert got.length == length
            assert list(got.paths) == paths
    assert time.time() - started < 60.0
    assert cfg.max_hops == 4  # the documented default bounds the oracle too


# ---------------------------------------------------------------------------
# Criterion: shortest-path minimality and completeness below the cap


def test_shortest_path_minimality_and_completeness():
    rng = random.Random(20240502)
    for trial in range(1000):
        graph = oracles.random_multigraph(rng, max_nodes=12, max_edges=24)
        nodes = sorted(graph.nodes)
        source, target = rng.sample(nodes, 2)
        traversal = "directed" if trial % 3 == 0 else "undirected"
        cfg = ExtractionConfig(traversal=traversal, max_paths_per_pair=UNCAPPED)
        expected_length, expected_paths = oracles.minimal_paths(
            graph, source, target, cfg.max_hops, UNCAPPED, traversal
        )
        got = all_shortest_paths(graph, source, target, cfg)
        assert got.length == expected_length
        assert list(got.paths) == expected_paths


# ---------------------------------------------------------------------------
# Criterion: linearization round-trip on >= 1000 random subgraphs


def _random_world(rng: random.Random):
    n = rng.randint(2, 9)
    nodes = [f"Q{i}" for i in range(n)]
    labels = {}
    used = set()
    for node in nodes:
        while True:
            label = "".join(
                rng.choice(string.ascii_letters + " '-")
                for _ in range(rng.randint(1, 8))
            ).strip()
            if label and label not in used and ", " not in label and "; " not in label:
                used.add(label)
                labels[node] = label
                break
    triples = set()
    for _ in range(rng.randint(1, 16)):
        a, b = rng.sample(nodes, 2)
        predicate = f"P{rng.randint(1, 4)}"
        labels.setdefault(predicate, f"pred {predicate}")
        triples.add((a, predicate, b))
    graph = graph_from_triples(sorted(triples), labels)
    present = sorted(graph.nodes)
    entities = rng.sample(present, rng.randint(1, min(3, len(present))))
    candidate = rng.choice(present)
    return graph, extract_subgraph(graph, entities, candidate), labels


def test_linearization_roundtrip():
    rng = random.Random(20240503)
    for _ in range(1000):
        graph, sub, labels = _random_world(rng)
        seq = linearize(sub, graph, highlight=True)
        triples, highlighted = parse_linearized(seq.text)
        order = {node: i for i, node in enumerate(node_order(sub))}
        expected = [
            (labels[s], labels.get(p, p), labels[o])
            for s, p, o in sorted(sub.edges, key=lambda e: (order[e[0]], order[e[2]], e[1]))
        ]
        assert triples == expected
        assert seq.triple_count == len(sub.edges)
        candidate_label = labels[sub.candidate]
        touches_candidate = any(
            sub.candidate in (s, o) for s, _, o in sub.edges
        )
        if touches_candidate or not sub.edges:
            assert highlighted == {candidate_label}
        else:
            assert highlighted == set()


# ---------------------------------------------------------------------------
# Criterion: diverse-beam reductions over >= 100 random toy scorers


def test_diverse_beam_reductions():
    rng = random.Random(20240504)
    for trial in range(100):
        scorer = oracles.random_table_scorer(rng, ("a", "b", "c"), max_length=2)
        width = rng.choice([1, 2, 3, 4, 6, 8])
        reference = oracles.classic_beam_reference(scorer, width, 2)
        for cfg in (
            DiverseBeamConfig(width, 1, 0.0, 2),
            DiverseBeamConfig(width, 1, rng.uniform(0.1, 2.0), 2),
            DiverseBeamConfig(width, width, 0.0, 2),
        ):
            got = diverse_beam_search(scorer, cfg)
            assert [(g.tokens, g.score) for g in got] == reference

        space = oracles.enumerate_complete_sequences(scorer, 2)
        full = diverse_beam_search(scorer, DiverseBeamConfig(len(space), 1, 0.0, 2))
        expected = oracles.exhaustive_top_b(scorer, 2, len(space))
        assert [(g.tokens, g.score) for g in full] == [
            (tokens, score) for tokens, score in expected
        ]


# ---------------------------------------------------------------------------
# Criterion: graph-metrics oracle, exhaustive to 5 nodes plus random 8-node


FIVE = list("ABCDE")
PAIRS5 = [(a, b) for a in FIVE for b in FIVE if a != b]


def _circuit_masks(nodes, pairs):
    bit = {pair: 1 << i for i, pair in enumerate(pairs)}
    masks = []
    for size in range(2, len(nodes) + 1):
        for subset in combinations(nodes, size):
            first = subset[0]
            for rest in permutations(subset[1:]):
                cycle = (first, *rest, first)
                mask = 0
                for a, b in zip(cycle, cycle[1:]):
                    mask |= bit[(a, b)]
                masks.append(mask)
    return masks


def test_metrics_cycles_exhaustive_to_five_nodes():
    # n <= 4: full complexity reports against both oracles.
    for n in range(1, 5):
        nodes = FIVE[:n]
        pairs = [(a, b) for a in nodes for b in nodes if a != b]
        for g in range(1 << len(pairs)):
            edges = [(a, "P", b) for i, (a, b) in enumerate(pairs) if g >> i & 1]
            report = complexity_from_edges(nodes, edges)
            directed = {node: set() for node in nodes}
            undirected = {node: set() for node in nodes}
            for a, _, b in edges:
                directed[a].add(b)
                undirected[a].add(b)
                undirected[b].add(a)
            assert report.num_simple_cycles == oracles.count_circuits_bruteforce(directed)
            assert report.num_bridges == oracles.count_bridges_bruteforce(undirected)
            distinct = len({(a, b) for a, _, b in edges})
            expected_density = distinct / (n * (n - 1)) if n >= 2 else 0.0
            assert abs(report.density - expected_density) <= 1e-12

    # n == 5: every directed graph, via the cycle counter the report uses;
    # the candidate-circuit masks are an independent enumeration oracle.
    masks = _circuit_masks(FIVE, PAIRS5)
    assert len(masks) == 84
    for g in range(1 << 20):
        adj = {node: set() for node in FIVE}
        for i, (a, b) in enumerate(PAIRS5):
            if g >> i & 1:
                adj[a].add(b)
        impl, saturated = count_simple_cycles(adj)
        assert not saturated
        expected = 0
        for mask in masks:
            if g & mask == mask:
                expected += 1
        assert impl == expected


def test_metrics_bridges_exhaustive_projections_to_five_nodes():
    # Bridges are computed on the undirected simple projection, so sweeping
    # every 5-node projection (realized as a directed graph) covers every
    # directed graph on <= 5 nodes.
    upairs = list(combinations(FIVE, 2))
    for g in range(1 << len(upairs)):
        edges = [(a, "P", b) for i, (a, b) in enumerate(upairs) if g >> i & 1]
        report = complexity_from_edges(FIVE, edges)
        undirected = {node: set() for node in FIVE}
        for a, _, b in edges:
            undirected[a].add(b)
            undirected[b].add(a)
        assert report.num_bridges == oracles.count_bridges_bruteforce(undirected)


def test_metrics_random_eight_node_graphs():
    rng = random.Random(20240505)
    for _ in range(500):
        graph = oracles.random_multigraph(rng, max_nodes=8, max_edges=20)
        edges = [
            (s, p, o) for s, pairs in graph.out_adjacency.items() for p, o in pairs
        ]
        report = complexity_from_edges(graph.nodes, edges)
        directed, undirected = oracles.graph_to_adjacency(graph)
        assert report.num_simple_cycles == oracles.count_circuits_bruteforce(directed)
        assert report.num_bridges == oracles.count_bridges_bruteforce(undirected)
        n = len(graph.nodes)
        distinct = len({(s, o) for s, _, o in edges})
        expected_density = distinct / (n * (n - 1)) if n >= 2 else 0.0
        assert abs(report.density - expected_density) <= 1e-12


# ---------------------------------------------------------------------------
# Criterion: oracle upper bound and generation-order bound on the bundled toy
# fixture


@pytest.fixture(scope="module")
def toy_eval_inputs():
    graph = load_toy_kg()
    questions = load_questions(data_path(TOY_QUESTIONS))
    pools = PoolCandidateSource(load_candidates_file(data_path(TOY_CANDIDATES)))
    assert len(questions) >= 30
    assert graph.num_edges >= 180
    return graph, questions, pools


def test_oracle_upper_bound_on_fixture(toy_eval_inputs):
    graph, questions, pools = toy_eval_inputs
    report, _ = evaluate(questions, graph, pools, OracleScorer())
    assert report.overall.hits_at_1 == report.overall.hits_at_all
    for block in report.per_type.values():
        assert block.hits_at_1 == block.hits_at_all

    generation, _ = evaluate(questions, graph, pools, GenerationScorer())
    assert generation.overall.hits_at_1 <= generation.overall.hits_at_all
    for block in generation.per_type.values():
        assert block.hits_at_1 <= block.hits_at_all


# ---------------------------------------------------------------------------
# Criterion: routing bypass is byte-identical to generator top-1


def test_routing_bypass_byte_identical(toy_eval_inputs):
    graph, questions, pools = toy_eval_inputs
    _, details = evaluate(questions, graph, pools, OracleScorer())
    routed = [d for d in details if d.question_type in (TYPE_YESNO, TYPE_COUNT)]
    assert routed
    for detail in routed:
        top_surface = pools.pools[detail.record.id][0][0]
        assert detail.answers[0].candidate == top_surface
        assert detail.answers[0].generation_rank == 0


# ---------------------------------------------------------------------------
# Criterion: feature-ranker learnability on the separable synthetic corpus


def _synthetic_feature(rng, correct: bool) -> FeatureVector:
    density = rng.uniform(0.25, 0.35) if correct else rng.uniform(0.85, 0.95)
    return FeatureVector(
        num_nodes=3.0,
        num_edges=3.0,
        density=density,
        num_simple_cycles=1.0,
        num_bridges=2.0,
        min_path_length=1.0,
        num_question_entities_connected=1.0,
        lexical_overlap=0.0,
    )


def test_feature_ranker_learnability():
    started = time.time()
    rng = random.Random(20240506)
    examples = []
    for _ in range(100):
        examples.append((_synthetic_feature(rng, True), 1.0))
        examples.append((_synthetic_feature(rng, False), 0.0))
    model = train_feature_ranker(examples)

    correct_scores = [model.score(f) for f, t in examples if t == 1.0]
    incorrect_scores = [model.score(f) for f, t in examples if t == 0.0]
    gap = sum(correct_scores) / len(correct_scores) - sum(incorrect_scores) / len(
        incorrect_scores
    )
    assert gap > 0.5

    hits = 0
    trials = 50
    for _ in range(trials):
        pool = [Candidate("gold", "GOLD", 0, -0.1)] + [
            Candidate(f"d{i}", f"D{i}", i + 1, -0.2 * i) for i in range(4)
        ]
        features = [_synthetic_feature(rng, True)] + [
            _synthetic_feature(rng, False) for _ in range(4)
        ]
        scores = [model.score(f) for f in features]
        ranked = rerank(pool, scores)
        hits += ranked[0].candidate == "GOLD"
    assert hits / trials >= 0.9
    assert time.time() - started < 10.0


# ---------------------------------------------------------------------------
# Criterion (optional, dataset-dependent): published-subgraph-dataset means

TABLE_CORRECT = {
    "num_nodes": 2.98,
    "num_edges": 3.31,
    "density": 0.61,
    "num_simple_cycles": 1.04,
    "num_bridges": 2.96,
}
TABLE_INCORRECT = {
    "num_nodes": 3.14,
    "num_edges": 3.64,
    "density": 0.63,
    "num_simple_cycles": 1.18,
    "num_bridges": 3.10,
}

DATASET_ENV = "KGQA_SUBGRAPH_DATASET"


@pytest.mark.skipif(
    DATASET_ENV not in os.environ,
    reason=f"set {DATASET_ENV} to a subgraph-dataset JSONL to run the published-data check",
)
def test_published_dataset_reproduces_reported_means():
    records = load_subgraph_dataset(os.environ[DATASET_ENV])
    reports = [complexity_from_edges(r.nodes, r.edges) for r in records]
    labels = [CORRECT if r.is_correct else INCORRECT for r in records]
    agg = aggregate(reports, labels)
    for field, expected in TABLE_CORRECT.items():
        assert abs(agg.correct_means[field] - expected) <= 0.10
    for field, expected in TABLE_INCORRECT.items():
        assert abs(agg.incorrect_means[field] - expected) <= 0.10
    for field in TABLE_CORRECT:
        assert agg.incorrect_means[field] >= agg.correct_means[field]
