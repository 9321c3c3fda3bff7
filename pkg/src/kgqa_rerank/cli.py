"""Command-line entry points for every pipeline stage.

Each stage is independently runnable (`extract`, `linearize`, `metrics`,
`export-dataset`, `train-ranker`, `rank`) and `answer`/`eval` compose the
full flow. Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
from pathlib import Path

from . import graph_metrics
from .candidates import load_candidates_file
from .extraction import ExtractionConfig, ExtractionError, extract_subgraph
from .kg import GraphLoadError, KnowledgeGraph, load_knowledge_graph_files
from .linearize import DEFAULT_HIGHLIGHT_TOKEN, linearize
from .pipeline import (
    NeighborCandidateSource,
    OracleScorer,
    FeatureScorer,
    GenerationScorer,
    PipelineConfig,
    PipelineError,
    PoolCandidateSource,
    RemoteScorerAdapter,
    evaluate,
    export_subgraph_dataset,
    load_questions,
    load_subgraph_dataset,
)
from .ranking import (
    FeatureRanker,
    RemoteScorer,
    SCORING_MODES,
    ScoringError,
    train_feature_ranker,
)
from .training import features_from_record

SCORER_URL_ENV = "KGQA_SCORER_URL"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

# Flags every subcommand must end up with after merging config-file defaults;
# enforced post-parse so a config file can satisfy them.
REQUIRED_FLAGS = {
    "extract": ("graph", "entities", "candidate"),
    "linearize": ("graph", "entities", "candidate"),
    "metrics": ("subgraphs",),
    "export-dataset": ("graph", "questions"),
    "train-ranker": ("graph", "dataset", "questions", "model_out"),
    "rank": ("graph", "questions", "scorer"),
    "answer": ("graph", "questions", "scorer"),
    "eval": ("graph", "questions", "scorer"),
}
NEEDS_CANDIDATE_SOURCE = ("export-dataset", "rank", "answer", "eval")


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _coerce(value: str):
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    for converter in (int, float):
        try:
            return converter(value)
        except ValueError:
            continue
    return value


def _read_config(path: str) -> dict:
    """Parse a `key=value` config file into flag defaults."""
    values: dict = {}
    for line_number, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {line_number}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = _coerce(value.strip())
    return values


def _add_graph_flags(parser):
    parser.add_argument("--graph", help="triples TSV file")
    parser.add_argument(
        "--labels",
        help="labels TSV file (defaults to <graph-stem>_labels.tsv when present)",
    )


def _add_extraction_flags(parser):
    parser.add_argument("--max-hops", type=int, default=4)
    parser.add_argument("--max-paths-per-pair", type=int, default=16)
    parser.add_argument(
        "--traversal", choices=["undirected", "directed"], default="undirected"
    )


def _add_common_flags(parser):
    parser.add_argument("--config", help="key=value file of flag defaults")
    parser.add_argument("--seed", type=int, default=0, help="fix stochastic components")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("-v", "--verbose", action="store_true")


def _load_graph(args) -> KnowledgeGraph:
    labels = args.labels
    if labels is None:
        sibling = Path(args.graph).with_name(Path(args.graph).stem + "_labels.tsv")
        if sibling.exists():
            labels = sibling
            logging.getLogger(__name__).info("using labels file %s", sibling)
    return load_knowledge_graph_files(args.graph, labels)


def _extraction_config(args) -> ExtractionConfig:
    return ExtractionConfig(
        max_hops=args.max_hops,
        max_paths_per_pair=args.max_paths_per_pair,
        traversal=args.traversal,
    )


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _build_scorer(spec: str, graph, args):
    url_override = os.environ.get(SCORER_URL_ENV)
    if spec == "oracle":
        return OracleScorer()
    if spec == "generation":
        return GenerationScorer()
    if spec.startswith("feature:"):
        return FeatureScorer(
            FeatureRanker.load(spec.split(":", 1)[1]), graph, max_hops=args.max_hops
        )
    if spec == "remote" or spec.startswith("remote:"):
        url = url_override or (spec.split(":", 1)[1] if ":" in spec else "")
        if not url:
            raise ValueError(f"remote scorer needs a URL ({SCORER_URL_ENV} or remote:<url>)")
        return RemoteScorerAdapter(RemoteScorer(url))
    raise ValueError(f"unknown scorer {spec!r}")


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        extraction=_extraction_config(args),
        scoring_mode=args.mode,
        highlight_token=args.highlight_token,
        max_candidates=args.max_candidates,
    )


def _candidate_source(args, graph):
    if getattr(args, "neighbor_candidates", False):
        return NeighborCandidateSource(graph)
    if not args.candidates:
        raise ValueError("need --candidates FILE or --neighbor-candidates")
    return PoolCandidateSource(load_candidates_file(args.candidates))


# --------------------------------------------------------------------------
# Subcommands


def _cmd_extract(args) -> int:
    graph = _load_graph(args)
    subgraph = extract_subgraph(
        graph, args.entities.split(","), args.candidate, _extraction_config(args)
    )
    payload = {
        "question_entities": list(subgraph.question_entities),
        "candidate": subgraph.candidate,
        "nodes": sorted(subgraph.nodes),
        "edges": [list(e) for e in sorted(subgraph.edges)],
        "path_sets": [
            {
                "source": ps.source,
                "target": ps.target,
                "length": ps.length,
                "paths": [list(p) for p in ps.paths],
            }
            for ps in subgraph.path_sets
        ],
    }
    _emit(args, json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_linearize(args) -> int:
    graph = _load_graph(args)
    subgraph = extract_subgraph(
        graph, args.entities.split(","), args.candidate, _extraction_config(args)
    )
    sequence = linearize(
        subgraph, graph, highlight=args.highlight, highlight_token=args.highlight_token
    )
    _emit(args, sequence.text)
    return EXIT_OK


def _cmd_metrics(args) -> int:
    records = load_subgraph_dataset(args.subgraphs)
    if not records:
        raise PipelineError(f"no records in {args.subgraphs}")
    reports = [graph_metrics.complexity_from_edges(r.nodes, r.edges) for r in records]
    labels = [
        graph_metrics.CORRECT if r.is_correct else graph_metrics.INCORRECT
        for r in records
    ]
    _emit(args, graph_metrics.aggregate_tsv(graph_metrics.aggregate(reports, labels)))
    return EXIT_OK


def _cmd_export_dataset(args) -> int:
    graph = _load_graph(args)
    questions = load_questions(args.questions)
    source = _candidate_source(args, graph)
    cfg = PipelineConfig(
        extraction=_extraction_config(args),
        highlight_token=args.highlight_token,
        max_candidates=args.max_candidates,
    )
    lines = [
        record.to_json()
        for record in export_subgraph_dataset(questions, graph, source, cfg, jobs=args.jobs)
    ]
    _emit(args, "\n".join(lines))
    return EXIT_OK


def _cmd_train_ranker(args) -> int:
    graph = _load_graph(args)
    questions = {q.id: q for q in load_questions(args.questions)}
    records = load_subgraph_dataset(args.dataset)
    if not records:
        raise PipelineError(f"no records in {args.dataset}")
    examples = []
    for record in records:
        question = questions.get(record.question_id)
        if question is None:
            raise PipelineError(f"question {record.question_id!r} missing from questions file")
        fv = features_from_record(record, question, graph.labels, max_hops=args.max_hops)
        examples.append((fv, 1.0 if record.is_correct else 0.0))
    model = train_feature_ranker(examples)
    model.save(args.model_out)
    print(f"trained on {len(examples)} examples -> {args.model_out}")
    return EXIT_OK


def _run_eval(args):
    graph = _load_graph(args)
    questions = load_questions(args.questions)
    source = _candidate_source(args, graph)
    scorer = _build_scorer(args.scorer, graph, args)
    cfg = _pipeline_config(args)
    return evaluate(questions, graph, source, scorer, cfg, jobs=args.jobs)


def _cmd_rank(args) -> int:
    report, details = _run_eval(args)
    lines = []
    for detail in details:
        lines.append(
            json.dumps(
                {
                    "question_id": detail.record.id,
                    "question_type": detail.question_type,
                    "answers": [
                        {
                            "candidate": a.candidate,
                            "final_score": a.final_score,
                            "generation_rank": a.generation_rank,
                            "rank_after": a.rank_after,
                        }
                        for a in detail.answers
                    ],
                },
                sort_keys=True,
            )
        )
    _emit(args, "\n".join(lines))
    return EXIT_OK


def _cmd_answer(args) -> int:
    report, details = _run_eval(args)
    lines = []
    for detail in details:
        top = detail.answers[0]
        lines.append(
            json.dumps(
                {
                    "question_id": detail.record.id,
                    "question_type": detail.question_type,
                    "answer": top.candidate,
                    "final_score": top.final_score,
                },
                sort_keys=True,
            )
        )
    _emit(args, "\n".join(lines))
    return EXIT_OK


def _cmd_eval(args) -> int:
    report, _ = _run_eval(args)
    print(report.to_table())
    if args.out:
        Path(args.out).write_text(report.to_json() + "\n", encoding="utf-8")
    return EXIT_OK


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(prog="kgqa", description=__doc__)
    subparsers = parser.add_subparsers(dest="command", parser_class=_Parser)
    registry: dict[str, _Parser] = {}

    def sub(name, func, help_):
        p = subparsers.add_parser(name, help=help_)
        p.set_defaults(func=func)
        _add_common_flags(p)
        registry[name] = p
        return p

    p = sub("extract", _cmd_extract, "extract one evidence subgraph")
    _add_graph_flags(p)
    _add_extraction_flags(p)
    p.add_argument("--entities", help="comma-separated entity ids")
    p.add_argument("--candidate")

    p = sub("linearize", _cmd_linearize, "extract and linearize one subgraph")
    _add_graph_flags(p)
    _add_extraction_flags(p)
    p.add_argument("--entities")
    p.add_argument("--candidate")
    p.add_argument("--highlight", action=argparse.BooleanOptionalAction, default=False)
    p.add_argument("--highlight-token", default=DEFAULT_HIGHLIGHT_TOKEN)

    p = sub("metrics", _cmd_metrics, "aggregate structural metrics of a subgraph dataset")
    p.add_argument("--subgraphs", help="subgraph dataset JSONL")

    p = sub("export-dataset", _cmd_export_dataset, "export correct/incorrect subgraph records")
    _add_graph_flags(p)
    _add_extraction_flags(p)
    p.add_argument("--questions")
    p.add_argument("--candidates", help="pre-generated candidates JSONL")
    p.add_argument(
        "--neighbor-candidates",
        action="store_true",
        help="draw candidates from question-entity neighbors instead of a file",
    )
    p.add_argument("--highlight-token", default=DEFAULT_HIGHLIGHT_TOKEN)
    p.add_argument("--max-candidates", type=int, default=200)
    p.add_argument("--jobs", type=int, default=1)

    p = sub("train-ranker", _cmd_train_ranker, "fit the structural-feature ranker")
    _add_graph_flags(p)
    p.add_argument("--dataset", help="subgraph dataset JSONL")
    p.add_argument("--questions")
    p.add_argument("--model-out")
    p.add_argument("--max-hops", type=int, default=4)

    for name, func, help_ in (
        ("rank", _cmd_rank, "write full re-ranked candidate lists"),
        ("answer", _cmd_answer, "write the final top-1 answer per question"),
        ("eval", _cmd_eval, "evaluate ranking metrics over a question file"),
    ):
        p = sub(name, func, help_)
        _add_graph_flags(p)
        _add_extraction_flags(p)
        p.add_argument("--questions")
        p.add_argument("--candidates")
        p.add_argument("--neighbor-candidates", action="store_true")
        p.add_argument(
            "--scorer",
            help="oracle | generation | feature:<model.json> | remote:<url>",
        )
        p.add_argument("--mode", choices=SCORING_MODES, default="highlighted")
        p.add_argument("--highlight-token", default=DEFAULT_HIGHLIGHT_TOKEN)
        p.add_argument("--max-candidates", type=int, default=200)
        p.add_argument("--jobs", type=int, default=1)

    return parser, registry


def main(argv=None) -> int:
    parser, registry = build_parser()
    args, remaining = parser.parse_known_args(argv)
    if args.command is None:
        parser.error("a subcommand is required")
    if getattr(args, "config", None):
        subparser = registry[args.command]
        try:
            defaults = _read_config(args.config)
            known = {action.dest for action in subparser._actions}
            unknown = set(defaults) - known
            if unknown:
                raise ValueError(f"unknown config keys: {sorted(unknown)}")
        except (OSError, ValueError) as exc:
            print(f"kgqa: config error: {exc}", file=sys.stderr)
            return EXIT_DATA
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    elif remaining:
        parser.error(f"unrecognized arguments: {' '.join(remaining)}")
    missing = [
        f"--{name.replace('_', '-')}"
        for name in REQUIRED_FLAGS.get(args.command, ())
        if getattr(args, name, None) in (None, "")
    ]
    if missing:
        parser.error(f"missing required flags: {' '.join(missing)}")
    if args.command in NEEDS_CANDIDATE_SOURCE and not (
        args.candidates or args.neighbor_candidates
    ):
        parser.error("need --candidates FILE or --neighbor-candidates")

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    random.seed(args.seed)
    try:
        return args.func(args)
    except (
        GraphLoadError,
        ExtractionError,
        PipelineError,
        ScoringError,
        FileNotFoundError,
        json.JSONDecodeError,
        ValueError,
    ) as exc:
        print(f"kgqa: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
