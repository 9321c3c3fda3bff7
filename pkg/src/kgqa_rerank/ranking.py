"""Candidate scoring and re-ranking.

Two scorer families share one contract: a built-in least-squares ranker over
structural subgraph features, and a client for a remote scoring service
speaking the JSON wire protocol (POST /score, GET /health). Re-ranking sorts
candidates by score with generation rank breaking ties.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np
import requests

from .candidates import Candidate, CandidateSet
from .extraction import EvidenceSubgraph
from .graph_metrics import GraphComplexityReport
from .kg import KnowledgeGraph, label_of
from .linearize import DEFAULT_HIGHLIGHT_TOKEN, linearize

RIDGE_STRENGTH = 1e-3
DEFAULT_MAX_HOPS = 4

# Scoring-input ablation modes: what sequence is sent for each candidate.
MODE_HIGHLIGHTED = "highlighted"
MODE_PLAIN = "plain"
MODE_CANDIDATE_ONLY = "candidate-only"
SCORING_MODES = (MODE_HIGHLIGHTED, MODE_PLAIN, MODE_CANDIDATE_ONLY)


class ScoringError(RuntimeError):
    """Raised when a remote scorer cannot produce aligned scores."""

    def __init__(self, endpoint: str, cause: str):
        super().__init__(f"scoring via {endpoint} failed: {cause}")
        self.endpoint = endpoint
        self.cause = cause


@dataclass(frozen=True)
class FeatureVector:
    num_nodes: float
    num_edges: float
    density: float
    num_simple_cycles: float
    num_bridges: float
    min_path_length: float
    num_question_entities_connected: float
    lexical_overlap: float

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=float)


FEATURE_NAMES = tuple(f.name for f in fields(FeatureVector))


def _tokens(text: str) -> list[str]:
    return re.findall(r"\w+", text.casefold())


def feature_vector(
    question: str,
    subgraph: EvidenceSubgraph,
    report: GraphComplexityReport,
    candidate_label: str | None = None,
    max_hops: int = DEFAULT_MAX_HOPS,
) -> FeatureVector:
    """Structural and lexical features of one (question, evidence) pair.

    An unreachable candidate is encoded as min_path_length = max_hops + 1.
    lexical_overlap is the fraction of candidate-label tokens present in the
    question, casefolded.
    """
    lengths = [ps.length for ps in subgraph.path_sets if ps.length is not None]
    min_path_length = min(lengths) if lengths else max_hops + 1
    connected = sum(1 for ps in subgraph.path_sets if ps.length is not None)
    label_tokens = _tokens(candidate_label or subgraph.candidate)
    question_tokens = set(_tokens(question))
    overlap = (
        sum(1 for tok in label_tokens if tok in question_tokens) / len(label_tokens)
        if label_tokens
        else 0.0
    )
    return FeatureVector(
        num_nodes=float(report.num_nodes),
        num_edges=float(report.num_edges),
        density=float(report.density),
        num_simple_cycles=float(report.num_simple_cycles),
        num_bridges=float(report.num_bridges),
        min_path_length=float(min_path_length),
        num_question_entities_connected=float(connected),
        lexical_overlap=float(overlap),
    )


@dataclass(frozen=True)
class FeatureRanker:
    """Linear model over FeatureVector components; last weight is the bias."""

    weights: tuple[float, ...]
    feature_names: tuple[str, ...] = FEATURE_NAMES

    def score(self, features: FeatureVector) -> float:
        x = features.to_array()
        w = np.asarray(self.weights)
        return float(x @ w[:-1] + w[-1])

    def save(self, path: str | Path):
        payload = {"weights": list(self.weights), "feature_names": list(self.feature_names)}
        Path(path).write_text(json.dumps(payload, indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "FeatureRanker":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            weights=tuple(float(w) for w in payload["weights"]),
            feature_names=tuple(payload["feature_names"]),
        )


def train_feature_ranker(
    examples: Sequence[tuple[FeatureVector, float]],
    ridge: float = RIDGE_STRENGTH,
) -> FeatureRanker:
    """Closed-form ridge regression of targets on feature vectors.

    The penalty applies to feature weights only, so degenerate inputs with
    all-identical features collapse to a bias-only model predicting the
    target mean.
    """
    if not examples:
        raise ValueError("need at least one training example")
    X = np.stack([fv.to_array() for fv, _ in examples])
    X = np.hstack([X, np.ones((X.shape[0], 1))])
    y = np.array([target for _, target in examples], dtype=float)
    n, d = X.shape
    penalty = np.eye(d) * ridge
    penalty[-1, -1] = 0.0
    gram = X.T @ X / n + penalty
    rhs = X.T @ y / n
    try:
        weights = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        weights = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    return FeatureRanker(weights=tuple(float(w) for w in weights))


def build_scorer_sequence(
    subgraph: EvidenceSubgraph,
    graph: KnowledgeGraph,
    mode: str = MODE_HIGHLIGHTED,
    highlight_token: str = DEFAULT_HIGHLIGHT_TOKEN,
) -> str:
    """Sequence sent to a scorer for one candidate, per ablation mode."""
    if mode == MODE_HIGHLIGHTED:
        return linearize(subgraph, graph, highlight=True, highlight_token=highlight_token).text
    if mode == MODE_PLAIN:
        return linearize(subgraph, graph, highlight=False).text
    if mode == MODE_CANDIDATE_ONLY:
        return label_of(graph, subgraph.candidate)
    raise ValueError(f"unknown scoring mode {mode!r}")


class RemoteScorer:
    """HTTP client for the `/score` wire protocol with retry and backoff."""

    def __init__(
        self,
        endpoint_url: str,
        timeout: float = 10.0,
        retries: int = 2,
        backoff: float = 0.5,
    ):
        self.endpoint_url = endpoint_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff

    def health(self) -> bool:
        try:
            response = requests.get(f"{self.endpoint_url}/health", timeout=self.timeout)
            return response.status_code == 200 and response.json().get("status") == "ok"
        except requests.RequestException:
            return False

    def score(self, question: str, sequences: Sequence[str]) -> list[float]:
        if not sequences:
            raise ValueError("sequences must be non-empty")
        payload = {"question": question, "sequences": list(sequences)}
        last_error = "unknown"
        for attempt in range(self.retries + 1):
            try:
                response = requests.post(
                    f"{self.endpoint_url}/score", json=payload, timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = str(exc)
            else:
                if response.status_code != 200:
                    raise ScoringError(
                        self.endpoint_url, f"status {response.status_code}"
                    )
                try:
                    scores = response.json()["scores"]
                except (ValueError, KeyError) as exc:
                    raise ScoringError(self.endpoint_url, f"malformed response: {exc}")
                if len(scores) != len(sequences):
                    raise ScoringError(self.endpoint_url, "score count mismatch")
                result = [float(s) for s in scores]
                if not all(np.isfinite(result)):
                    raise ScoringError(self.endpoint_url, "non-finite score")
                return result
            if attempt < self.retries:
                time.sleep(self.backoff * (2**attempt))
        raise ScoringError(self.endpoint_url, last_error)


def score_remote(
    endpoint: RemoteScorer | str, question: str, sequences: Sequence[str]
) -> list[float]:
    """Score sequences against a remote endpoint (URL or prebuilt client)."""
    scorer = endpoint if isinstance(endpoint, RemoteScorer) else RemoteScorer(endpoint)
    return scorer.score(question, sequences)


@dataclass(frozen=True)
class RankedAnswer:
    candidate: str  # entity id when linked, surface string otherwise
    final_score: float
    generation_rank: int
    rank_after: int


def rerank(candidates: CandidateSet, scores: Sequence[float]) -> list[RankedAnswer]:
    """Sort candidates by descending score, generation rank breaking ties."""
    if len(candidates) != len(scores):
        raise ValueError(
            f"got {len(scores)} scores for {len(candidates)} candidates"
        )
    order = sorted(
        range(len(candidates)),
        key=lambda i: (-scores[i], candidates[i].generation_rank),
    )
    return [
        RankedAnswer(
            candidate=_candidate_key(candidates[i]),
            final_score=float(scores[i]),
            generation_rank=candidates[i].generation_rank,
            rank_after=position,
        )
        for position, i in enumerate(order)
    ]


def _candidate_key(candidate: Candidate) -> str:
    return candidate.entity if candidate.entity is not None else candidate.surface
