"""End-to-end demo on the bundled toy fixture.

Compares the generator's own ordering against oracle re-ranking and a
structural-feature ranker trained on the fly, mirroring the
original/re-ranked/upper-bound table layout. Run from the repository root:

    python scripts/run_toy_eval.py
"""

from __future__ import annotations

from kgqa_rerank.candidates import load_candidates_file
from kgqa_rerank.fixtures import TOY_CANDIDATES, TOY_QUESTIONS, data_path, load_toy_kg
from kgqa_rerank.pipeline import (
    FeatureScorer,
    GenerationScorer,
    OracleScorer,
    PoolCandidateSource,
    evaluate,
    export_subgraph_dataset,
    load_questions,
)
from kgqa_rerank.ranking import train_feature_ranker
from kgqa_rerank.training import features_from_record


def main():
    graph = load_toy_kg()
    questions = load_questions(data_path(TOY_QUESTIONS))
    pools = PoolCandidateSource(load_candidates_file(data_path(TOY_CANDIDATES)))

    print(f"toy KG: {len(graph.nodes)} nodes, {graph.num_edges} edges")
    print(f"questions: {len(questions)}\n")

    entity_questions = [q for q in questions if q.gold_entity is not None]
    records = list(export_subgraph_dataset(entity_questions, graph, pools))
    by_id = {q.id: q for q in questions}
    examples = [
        (
            features_from_record(r, by_id[r.question_id], graph.labels),
            1.0 if r.is_correct else 0.0,
        )
        for r in records
    ]
    model = train_feature_ranker(examples)
    print(f"feature ranker trained on {len(examples)} exported subgraphs\n")

    for name, scorer in (
        ("generation order", GenerationScorer()),
        ("feature ranker", FeatureScorer(model, graph)),
        ("oracle (upper bound)", OracleScorer()),
    ):
        report, _ = evaluate(questions, graph, pools, scorer)
        print(f"== {name} ==")
        print(report.to_table())
        print()


if __name__ == "__main__":
    main()
