"""End-to-end question answering: route by question type, expand and link
candidates, extract and linearize evidence, score, re-rank, and evaluate.

Yes/no and count questions bypass evidence entirely and return the
generator's top-1 string untouched; everything else flows through the
subgraph machinery.
"""

from __future__ import annotations

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

from .candidates import (
    Candidate,
    CandidateSet,
    DiverseBeamConfig,
    RemoteLinker,
    TokenScorer,
    build_candidate_set,
    diverse_beam_search,
)
from .extraction import EvidenceSubgraph, ExtractionConfig, extract_subgraph
from .graph_metrics import GraphComplexityReport, complexity_report
from .kg import EntityId, KnowledgeGraph, label_of, neighbors
from .linearize import DEFAULT_HIGHLIGHT_TOKEN, linearize
from .ranking import (
    MODE_HIGHLIGHTED,
    RankedAnswer,
    RemoteScorer,
    ScoringError,
    FeatureRanker,
    build_scorer_sequence,
    feature_vector,
    rerank,
)

logger = logging.getLogger(__name__)

TYPE_YESNO = "yesno"
TYPE_COUNT = "count"
TYPE_OTHER = "other"

_AUXILIARIES = frozenset(
    "is are was were do does did has have had can could will would should".split()
)
_COUNT_PHRASES = ("how many", "how much", "number of")


class PipelineError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuestionRecord:
    id: str
    question: str
    question_entities: tuple[EntityId, ...] = ()
    gold_entity: EntityId | None = None
    gold_text: str = ""
    complexity_type: str | None = None

    def __post_init__(self):
        if not self.question:
            raise ValueError("question must be non-empty")


def load_questions(path: str | Path) -> list[QuestionRecord]:
    records = []
    seen = set()
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            record = QuestionRecord(
                id=str(raw["id"]),
                question=raw["question"],
                question_entities=tuple(raw.get("question_entities", ())),
                gold_entity=raw.get("gold_entity"),
                gold_text=raw.get("gold_text", ""),
                complexity_type=raw.get("complexity_type"),
            )
            if record.id in seen:
                raise ValueError(f"duplicate question id {record.id!r}")
            seen.add(record.id)
            records.append(record)
    return records


class RemoteClassifier:
    """Client for an optional question-type service (POST /classify)."""

    def __init__(self, endpoint_url: str, timeout: float = 10.0):
        self.endpoint_url = endpoint_url.rstrip("/")
        self.timeout = timeout

    def classify(self, question: str) -> str:
        import requests

        response = requests.post(
            f"{self.endpoint_url}/classify",
            json={"question": question},
            timeout=self.timeout,
        )
        response.raise_for_status()
        qtype = response.json()["type"]
        if qtype not in (TYPE_YESNO, TYPE_COUNT, TYPE_OTHER):
            raise ValueError(f"unknown question type {qtype!r}")
        return qtype


def classify_question_type(question: str, remote: RemoteClassifier | None = None) -> str:
    """Three-way routing: yesno / count / other.

    The rule baseline fires `yesno` when the first word is an auxiliary verb
    and `count` on counting phrases; a configured remote classifier overrides
    the rule, falling back to it on transport failure.
    """
    if remote is not None:
        try:
            return remote.classify(question)
        except Exception as exc:
            logger.warning("remote classifier failed (%s); using rule baseline", exc)
    folded = question.casefold()
    match = re.match(r"\s*([a-z']+)", folded)
    if match and match.group(1) in _AUXILIARIES:
        return TYPE_YESNO
    if any(phrase in folded for phrase in _COUNT_PHRASES):
        return TYPE_COUNT
    return TYPE_OTHER


# ---------------------------------------------------------------------------
# Candidate sources


class PoolCandidateSource:
    """Pre-generated candidates keyed by question id."""

    def __init__(self, pools: dict[str, list[tuple[str, float]]]):
        self.pools = pools

    def candidates_for(self, record: QuestionRecord) -> list[tuple[str, float]]:
        return list(self.pools.get(record.id, ()))


class DecoderCandidateSource:
    """Candidates decoded on the fly from a token scorer."""

    def __init__(self, scorer: TokenScorer, cfg: DiverseBeamConfig):
        self.scorer = scorer
        self.cfg = cfg

    def candidates_for(self, record: QuestionRecord) -> list[tuple[str, float]]:
        generations = diverse_beam_search(self.scorer, self.cfg)
        return [(g.surface, g.score) for g in generations]


class NeighborCandidateSource:
    """Entities adjacent to the question entities, as candidate ids.

    Mirrors building incorrect examples from the question entities'
    neighborhoods; surfaces are raw entity ids, which the linker resolves
    directly.
    """

    def __init__(self, graph: KnowledgeGraph, limit: int = 50):
        self.graph = graph
        self.limit = limit

    def candidates_for(self, record: QuestionRecord) -> list[tuple[str, float]]:
        pool: list[tuple[str, float]] = []
        seen: set[str] = set()
        for entity in record.question_entities:
            for _, neighbor in neighbors(self.graph, entity, "both"):
                if neighbor in seen or neighbor in record.question_entities:
                    continue
                seen.add(neighbor)
                pool.append((neighbor, -float(len(pool))))
                if len(pool) >= self.limit:
                    return pool
        return pool


# ---------------------------------------------------------------------------
# Scorers


@dataclass(frozen=True)
class EvidenceBundle:
    """Everything a scorer may need about one linked candidate."""

    candidate: Candidate
    subgraph: EvidenceSubgraph
    report: GraphComplexityReport
    sequence: str


class OracleScorer:
    """1.0 for the gold entity, 0.0 otherwise (upper-bound scorer)."""

    uses_evidence = True

    def score_candidates(
        self, record: QuestionRecord, bundles: Sequence[EvidenceBundle]
    ) -> list[float]:
        return [
            1.0 if b.candidate.entity == record.gold_entity else 0.0 for b in bundles
        ]


class GenerationScorer:
    """Keeps the generator's own ordering (no re-ranking)."""

    uses_evidence = False

    def score_candidates(self, record, bundles):  # pragma: no cover - bypassed
        raise NotImplementedError


class FeatureScorer:
    """Scores candidates with a trained structural-feature model."""

    uses_evidence = True

    def __init__(self, model: FeatureRanker, graph: KnowledgeGraph, max_hops: int = 4):
        self.model = model
        self.graph = graph
        self.max_hops = max_hops

    def score_candidates(
        self, record: QuestionRecord, bundles: Sequence[EvidenceBundle]
    ) -> list[float]:
        scores = []
        for bundle in bundles:
            fv = feature_vector(
                record.question,
                bundle.subgraph,
                bundle.report,
                candidate_label=label_of(self.graph, bundle.subgraph.candidate),
                max_hops=self.max_hops,
            )
            scores.append(self.model.score(fv))
        return scores


class RemoteScorerAdapter:
    """Sends each candidate's sequence to a remote scoring service."""

    uses_evidence = True

    def __init__(self, client: RemoteScorer):
        self.client = client

    def score_candidates(
        self, record: QuestionRecord, bundles: Sequence[EvidenceBundle]
    ) -> list[float]:
        return self.client.score(record.question, [b.sequence for b in bundles])


# ---------------------------------------------------------------------------
# Answering


@dataclass(frozen=True)
class PipelineConfig:
    extraction: ExtractionConfig = ExtractionConfig()
    scoring_mode: str = MODE_HIGHLIGHTED
    highlight_token: str = DEFAULT_HIGHLIGHT_TOKEN
    max_candidates: int = 200
    remote_linker: RemoteLinker | None = None
    classifier: RemoteClassifier | None = None


@dataclass
class AnswerDetails:
    record: QuestionRecord
    question_type: str
    answers: list[RankedAnswer]
    candidates: CandidateSet
    warnings: list[str] = field(default_factory=list)


def _generation_order_answers(candidates: CandidateSet) -> list[RankedAnswer]:
    scores = [-float(c.generation_rank) for c in candidates]
    return rerank(candidates, scores)


def _score_with_evidence(
    record: QuestionRecord,
    graph: KnowledgeGraph,
    candidates: CandidateSet,
    scorer,
    cfg: PipelineConfig,
) -> list[float]:
    linked = [c for c in candidates if c.entity is not None]
    bundles = []
    for candidate in linked:
        subgraph = extract_subgraph(
            graph, list(record.question_entities), candidate.entity, cfg.extraction
        )
        report = complexity_report(subgraph)
        sequence = build_scorer_sequence(
            subgraph, graph, cfg.scoring_mode, cfg.highlight_token
        )
        bundles.append(EvidenceBundle(candidate, subgraph, report, sequence))

    evidence_scores = (
        scorer.score_candidates(record, bundles) if bundles else []
    )
    by_entity = {b.candidate.entity: s for b, s in zip(bundles, evidence_scores)}

    unlinked = [c for c in candidates if c.entity is None]
    unlinked_scores: dict[int, float] = {}
    if unlinked:
        if evidence_scores:
            # Unlinked strings carry only their generation score, pushed below
            # every evidence-backed score so they never displace one.
            floor = min(evidence_scores)
            top = max(c.generation_score for c in unlinked)
            for c in unlinked:
                unlinked_scores[c.generation_rank] = floor - 1.0 + (c.generation_score - top)
        else:
            for c in unlinked:
                unlinked_scores[c.generation_rank] = c.generation_score

    return [
        by_entity[c.entity] if c.entity is not None else unlinked_scores[c.generation_rank]
        for c in candidates
    ]


def _answer_details(
    record: QuestionRecord,
    graph: KnowledgeGraph,
    candidate_source,
    scorer,
    cfg: PipelineConfig = PipelineConfig(),
) -> AnswerDetails:
    question_type = classify_question_type(record.question, cfg.classifier)
    pool = candidate_source.candidates_for(record)
    if not pool:
        raise PipelineError(f"no candidates for question {record.id!r}")

    if question_type in (TYPE_YESNO, TYPE_COUNT):
        surface, score = pool[0]
        answers = [RankedAnswer(surface, float(score), 0, 0)]
        top = Candidate(surface, None, 0, float(score))
        return AnswerDetails(record, question_type, answers, [top])

    candidates = build_candidate_set(pool, graph, cfg.remote_linker, cfg.max_candidates)
    warnings: list[str] = []
    if getattr(scorer, "uses_evidence", True):
        try:
            scores = _score_with_evidence(record, graph, candidates, scorer, cfg)
            answers = rerank(candidates, scores)
        except ScoringError as exc:
            message = f"scorer failed for question {record.id!r}: {exc}"
            logger.warning(message)
            warnings = [message]
            answers = _generation_order_answers(candidates)
    else:
        answers = _generation_order_answers(candidates)
    return AnswerDetails(record, question_type, answers, candidates, warnings)


def answer_question(
    record: QuestionRecord,
    graph: KnowledgeGraph,
    candidate_source,
    scorer,
    cfg: PipelineConfig = PipelineConfig(),
) -> list[RankedAnswer]:
    """Answer one question; yes/no and count bypass re-ranking entirely."""
    return _answer_details(record, graph, candidate_source, scorer, cfg).answers


# ---------------------------------------------------------------------------
# Metrics


def hits_at_k(predictions: Sequence[Sequence[str]], gold: Sequence[str], k: int) -> float:
    """Fraction of questions whose gold id appears in the top k predictions."""
    if not predictions or len(predictions) != len(gold):
        raise ValueError("predictions and gold must be non-empty and aligned")
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = sum(1 for preds, g in zip(predictions, gold) if g in list(preds)[:k])
    return hits / len(predictions)


def hits_at_all(predictions: Sequence[Sequence[str]], gold: Sequence[str]) -> float:
    """Fraction with gold anywhere in the pool (the re-ranking upper bound)."""
    if not predictions or len(predictions) != len(gold):
        raise ValueError("predictions and gold must be non-empty and aligned")
    return sum(1 for preds, g in zip(predictions, gold) if g in preds) / len(predictions)


def mean_reciprocal_rank(predictions: Sequence[Sequence[str]], gold: Sequence[str]) -> float:
    if not predictions or len(predictions) != len(gold):
        raise ValueError("predictions and gold must be non-empty and aligned")
    total = 0.0
    for preds, g in zip(predictions, gold):
        for position, prediction in enumerate(preds, start=1):
            if prediction == g:
                total += 1.0 / position
                break
    return total / len(predictions)


@dataclass
class TypeMetrics:
    count: int = 0
    hits_at_1: float = 0.0
    hits_at_all: float = 0.0
    mrr: float = 0.0
    original_hits_at_1: float = 0.0


@dataclass
class EvalReport:
    overall: TypeMetrics
    per_type: dict[str, TypeMetrics]

    def to_json(self) -> str:
        def block(m: TypeMetrics) -> dict:
            return {
                "count": m.count,
                "hits_at_1": m.hits_at_1,
                "hits_at_all": m.hits_at_all,
                "mrr": m.mrr,
                "original_hits_at_1": m.original_hits_at_1,
            }

        payload = {
            "overall": block(self.overall),
            "per_type": {name: block(m) for name, m in sorted(self.per_type.items())},
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_table(self) -> str:
        """Aligned text table: one row per complexity type plus a total row."""
        header = ("ComplexityType", "Original", "Re-ranked", "Hits@All")
        rows = [header]
        for name in sorted(self.per_type):
            m = self.per_type[name]
            rows.append(
                (name, f"{m.original_hits_at_1:.2f}", f"{m.hits_at_1:.2f}", f"{m.hits_at_all:.2f}")
            )
        m = self.overall
        rows.append(
            ("All", f"{m.original_hits_at_1:.2f}", f"{m.hits_at_1:.2f}", f"{m.hits_at_all:.2f}")
        )
        widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
        lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]
        return "\n".join(lines)


def _gold_rank(record: QuestionRecord, answers: Sequence[RankedAnswer]) -> int | None:
    """1-based rank of the gold answer, matching entity ids when the gold is
    an entity and casefolded text otherwise."""
    for position, answer in enumerate(answers, start=1):
        if record.gold_entity is not None:
            if answer.candidate == record.gold_entity:
                return position
        elif record.gold_text and answer.candidate.casefold() == record.gold_text.casefold():
            return position
    return None


def _metrics_from_ranks(pairs: list[tuple[int | None, bool]]) -> TypeMetrics:
    count = len(pairs)
    if count == 0:
        return TypeMetrics()
    return TypeMetrics(
        count=count,
        hits_at_1=sum(1 for rank, _ in pairs if rank == 1) / count,
        hits_at_all=sum(1 for rank, _ in pairs if rank is not None) / count,
        mrr=sum(1.0 / rank for rank, _ in pairs if rank is not None) / count,
        original_hits_at_1=sum(1 for _, orig in pairs if orig) / count,
    )


def evaluate(
    questions: Sequence[QuestionRecord],
    graph: KnowledgeGraph,
    candidate_source,
    scorer,
    cfg: PipelineConfig = PipelineConfig(),
    jobs: int = 1,
) -> tuple[EvalReport, list[AnswerDetails]]:
    """Answer every question and aggregate ranking metrics.

    `original_hits_at_1` scores the generator's own top-1 before re-ranking.
    Results are gathered in input order regardless of `jobs`.
    """
    if not questions:
        raise PipelineError("no questions to evaluate")

    def run(record: QuestionRecord) -> AnswerDetails:
        return _answer_details(record, graph, candidate_source, scorer, cfg)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            details = list(pool.map(run, questions))
    else:
        details = [run(record) for record in questions]

    by_type: dict[str, list[tuple[int | None, bool]]] = {}
    all_pairs: list[tuple[int | None, bool]] = []
    for detail in details:
        rank = _gold_rank(detail.record, detail.answers)
        original = _generation_order_answers(detail.candidates)
        original_rank = _gold_rank(detail.record, original[:1])
        pair = (rank, original_rank == 1)
        bucket = detail.record.complexity_type or detail.question_type
        by_type.setdefault(bucket, []).append(pair)
        all_pairs.append(pair)

    report = EvalReport(
        overall=_metrics_from_ranks(all_pairs),
        per_type={name: _metrics_from_ranks(pairs) for name, pairs in by_type.items()},
    )
    return report, details


# ---------------------------------------------------------------------------
# Subgraph dataset export


@dataclass(frozen=True)
class SubgraphDatasetRecord:
    question_id: str
    candidate: EntityId
    is_correct: bool
    nodes: tuple[EntityId, ...]
    edges: tuple[tuple[str, str, str], ...]
    linearized: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "question_id": self.question_id,
                "candidate": self.candidate,
                "is_correct": self.is_correct,
                "nodes": list(self.nodes),
                "edges": [list(edge) for edge in self.edges],
                "linearized": self.linearized,
            },
            sort_keys=True,
        )


def load_subgraph_dataset(path: str | Path) -> list[SubgraphDatasetRecord]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            records.append(
                SubgraphDatasetRecord(
                    question_id=raw["question_id"],
                    candidate=raw["candidate"],
                    is_correct=bool(raw["is_correct"]),
                    nodes=tuple(raw["nodes"]),
                    edges=tuple(tuple(edge) for edge in raw["edges"]),
                    linearized=raw["linearized"],
                )
            )
    return records


def _dataset_record(
    record: QuestionRecord,
    graph: KnowledgeGraph,
    entity: EntityId,
    is_correct: bool,
    cfg: PipelineConfig,
) -> SubgraphDatasetRecord:
    subgraph = extract_subgraph(
        graph, list(record.question_entities), entity, cfg.extraction
    )
    sequence = linearize(
        subgraph, graph, highlight=True, highlight_token=cfg.highlight_token
    )
    return SubgraphDatasetRecord(
        question_id=record.id,
        candidate=entity,
        is_correct=is_correct,
        nodes=tuple(sorted(subgraph.nodes)),
        edges=tuple(sorted(subgraph.edges)),
        linearized=sequence.text,
    )


def export_subgraph_dataset(
    questions: Sequence[QuestionRecord],
    graph: KnowledgeGraph,
    candidate_source,
    cfg: PipelineConfig = PipelineConfig(),
    jobs: int = 1,
) -> Iterator[SubgraphDatasetRecord]:
    """One correct record (the gold entity, force-included) plus one record per
    distinct incorrect linked candidate, per question. Questions whose gold is
    missing from the graph are skipped with a warning."""

    def run(record: QuestionRecord) -> list[SubgraphDatasetRecord]:
        if record.gold_entity is None or record.gold_entity not in graph:
            logger.warning(
                "skipping question %s: gold entity %r not in graph",
                record.id,
                record.gold_entity,
            )
            return []
        out = [_dataset_record(record, graph, record.gold_entity, True, cfg)]
        pool = candidate_source.candidates_for(record)
        candidates = build_candidate_set(pool, graph, cfg.remote_linker, cfg.max_candidates)
        for candidate in candidates:
            if candidate.entity is None or candidate.entity == record.gold_entity:
                continue
            out.append(_dataset_record(record, graph, candidate.entity, False, cfg))
        return out

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool_exec:
            for records in pool_exec.map(run, questions):
                yield from records
    else:
        for record in questions:
            yield from run(record)
