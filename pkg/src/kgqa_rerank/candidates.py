"""Answer-candidate generation: group-wise diverse beam decoding over a
pluggable token scorer, plus linking of answer strings to graph entities.

The decoder works on any object satisfying TokenScorer, so tests drive it
with exact toy distributions and integrators can plug a real generator or
skip decoding entirely by loading pre-generated candidate files.
"""

from __future__ import annotations

import json
import logging
import threading
import time
import weakref
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import requests

from .kg import EntityId, KnowledgeGraph

logger = logging.getLogger(__name__)

DEFAULT_MAX_CANDIDATES = 200


class TokenScorer(Protocol):
    """Scores continuations of a token-sequence prefix.

    `log_scores(prefix)` must return a finite log-score for every vocabulary
    token plus the end-of-sequence symbol `eos`.
    """

    vocab: tuple[str, ...]
    eos: str

    def log_scores(self, prefix: tuple[str, ...]) -> dict[str, float]: ...


@dataclass(frozen=True)
class TableScorer:
    """Toy scorer backed by an explicit (prefix -> token -> score) table.

    Missing prefixes fall back to the empty-prefix row, so a single row
    defines a position-independent distribution.
    """

    vocab: tuple[str, ...]
    table: dict[tuple[str, ...], dict[str, float]]
    eos: str = "</s>"

    def log_scores(self, prefix: tuple[str, ...]) -> dict[str, float]:
        row = self.table.get(prefix)
        if row is None:
            row = self.table[()]
        return row


@dataclass(frozen=True)
class DiverseBeamConfig:
    """Beam budget split into groups with a per-group diversity strength.

    `diversity_strength` is either one constant applied to every group or a
    tuple with one value per group.
    """

    num_beams: int = 8
    num_groups: int = 4
    diversity_strength: float | tuple[float, ...] = 0.5
    max_length: int = 8

    def __post_init__(self):
        if self.num_groups < 1 or self.num_beams < self.num_groups:
            raise ValueError("need num_beams >= num_groups >= 1")
        if self.num_beams % self.num_groups != 0:
            raise ValueError("num_groups must divide num_beams")
        if any(s < 0 for s in self.group_strengths):
            raise ValueError("diversity_strength must be >= 0")
        if isinstance(self.diversity_strength, tuple) and len(
            self.diversity_strength
        ) != self.num_groups:
            raise ValueError("need one diversity_strength per group")
        if self.max_length < 1:
            raise ValueError("max_length must be >= 1")

    @property
    def group_strengths(self) -> tuple[float, ...]:
        if isinstance(self.diversity_strength, tuple):
            return self.diversity_strength
        return (self.diversity_strength,) * self.num_groups

    @property
    def group_size(self) -> int:
        return self.num_beams // self.num_groups


@dataclass(frozen=True)
class Generation:
    tokens: tuple[str, ...]
    score: float
    group: int

    @property
    def surface(self) -> str:
        return " ".join(self.tokens)


GenerationList = list[Generation]


@dataclass(frozen=True)
class _Beam:
    tokens: tuple[str, ...]
    score: float
    finished: bool
    step_token: str | None  # symbol chosen at the current step, None if carried over


def _expand(scorer: TokenScorer, beams: list[_Beam], max_length: int) -> list[_Beam]:
    """All single-step continuations plus finished beams carried over."""
    out: list[_Beam] = []
    for beam in beams:
        if beam.finished:
            out.append(_Beam(beam.tokens, beam.score, True, None))
            continue
        scores = scorer.log_scores(beam.tokens)
        for token in (*scorer.vocab, scorer.eos):
            score = beam.score + scores[token]
            if token == scorer.eos:
                out.append(_Beam(beam.tokens, score, True, token))
            else:
                tokens = beam.tokens + (token,)
                out.append(_Beam(tokens, score, len(tokens) >= max_length, token))
    return out


def _select(candidates: list[_Beam], keys: list[float], width: int) -> list[_Beam]:
    ranked = sorted(
        range(len(candidates)), key=lambda i: (-keys[i], candidates[i].tokens)
    )
    return [candidates[i] for i in ranked[:width]]


def _classic_beam_search(scorer: TokenScorer, width: int, max_length: int) -> list[_Beam]:
    beams = [_Beam((), 0.0, False, None)]
    for _ in range(max_length):
        if all(beam.finished for beam in beams):
            break
        candidates = _expand(scorer, beams, max_length)
        beams = _select(candidates, [beam.score for beam in candidates], width)
    return beams


def diverse_beam_search(scorer: TokenScorer, cfg: DiverseBeamConfig) -> GenerationList:
    """Group-wise diverse beam decoding.

    Groups are processed in order within each time step; group g selects its
    beams by cumulative model log-score plus `diversity_strength` times the
    negative count of earlier-group beams that chose the same symbol at this
    step. The penalty steers selection only; stored scores stay pure model
    log-scores. With one group, or zero diversity strength, the objective's
    cross-group term vanishes and decoding collapses to classical beam search
    over the full width.
    """
    strengths = cfg.group_strengths
    if cfg.num_groups == 1 or all(s == 0.0 for s in strengths):
        beams = _classic_beam_search(scorer, cfg.num_beams, cfg.max_length)
        finals = [(beam, 0) for beam in beams]
    else:
        groups = [[_Beam((), 0.0, False, None)] for _ in range(cfg.num_groups)]
        for _ in range(cfg.max_length):
            if all(beam.finished for group in groups for beam in group):
                break
            chosen_tokens: list[str] = []
            for g in range(cfg.num_groups):
                candidates = _expand(scorer, groups[g], cfg.max_length)
                keys = []
                for beam in candidates:
                    penalty = 0.0
                    if beam.step_token is not None:
                        matches = sum(1 for t in chosen_tokens if t == beam.step_token)
                        penalty = -strengths[g] * matches
                    keys.append(beam.score + penalty)
                groups[g] = _select(candidates, keys, cfg.group_size)
                chosen_tokens.extend(
                    beam.step_token for beam in groups[g] if beam.step_token is not None
                )
        finals = [(beam, g) for g, group in enumerate(groups) for beam in group]

    finals.sort(key=lambda item: (-item[0].score, item[1], item[0].tokens))
    return [Generation(beam.tokens, beam.score, group) for beam, group in finals]


class RemoteLinker:
    """Client for a Wikidata-style `wbsearchentities` search endpoint.

    Results are cached on disk keyed by the query string; cache hits never
    touch the network. Requests respect a minimum inter-request delay and a
    bound on concurrent calls.
    """

    def __init__(
        self,
        endpoint_url: str,
        cache_path: str | Path | None = None,
        timeout: float = 10.0,
        min_delay: float = 0.2,
        max_in_flight: int = 2,
    ):
        self.endpoint_url = endpoint_url
        self.timeout = timeout
        self.min_delay = min_delay
        self.cache_path = Path(cache_path) if cache_path else None
        self._cache: dict[str, str | None] = {}
        self._lock = threading.Lock()
        self._slots = threading.Semaphore(max_in_flight)
        self._last_request = 0.0
        if self.cache_path and self.cache_path.exists():
            self._cache = json.loads(self.cache_path.read_text(encoding="utf-8"))

    def _save_cache(self):
        if self.cache_path:
            self.cache_path.parent.mkdir(parents=True, exist_ok=True)
            self.cache_path.write_text(
                json.dumps(self._cache, sort_keys=True), encoding="utf-8"
            )

    def search(self, text: str) -> str | None:
        """Top search-hit id for `text`, or None; raises on transport failure."""
        with self._lock:
            if text in self._cache:
                return self._cache[text]
        with self._slots:
            with self._lock:
                wait = self.min_delay - (time.monotonic() - self._last_request)
            if wait > 0:
                time.sleep(wait)
            try:
                response = requests.get(
                    self.endpoint_url,
                    params={
                        "action": "wbsearchentities",
                        "search": text,
                        "language": "en",
                        "format": "json",
                    },
                    timeout=self.timeout,
                )
                response.raise_for_status()
                hits = response.json().get("search", [])
            finally:
                with self._lock:
                    self._last_request = time.monotonic()
        result = hits[0]["id"] if hits else None
        with self._lock:
            self._cache[text] = result
            self._save_cache()
        return result


def _label_index(graph: KnowledgeGraph) -> tuple[dict[str, str], dict[str, str]]:
    """Exact and casefolded label -> entity-id maps (smallest id wins ties)."""
    exact: dict[str, str] = {}
    folded: dict[str, str] = {}
    for id_, label in graph.labels.items():
        if id_ not in graph.nodes:
            continue
        if label not in exact or id_ < exact[label]:
            exact[label] = id_
        key = label.casefold()
        if key not in folded or id_ < folded[key]:
            folded[key] = id_
    return exact, folded


_INDEX_CACHE: dict[int, tuple[dict[str, str], dict[str, str]]] = {}


def link_answer_string(
    text: str, graph: KnowledgeGraph, remote: RemoteLinker | None = None
) -> EntityId | None:
    """Resolve an answer string to a graph entity.

    Tries an exact label match, then a casefolded one (lexicographically
    smallest id on ties), then the text itself as a node id, then the remote
    search endpoint; remote hits only count when the returned id exists in
    the loaded graph. Remote transport failures degrade to the local result
    with a logged warning.
    """
    cached = _INDEX_CACHE.get(id(graph))
    if cached is None:
        cached = _label_index(graph)
        _INDEX_CACHE[id(graph)] = cached
        weakref.finalize(graph, _INDEX_CACHE.pop, id(graph), None)
    exact, folded = cached
    entity = exact.get(text)
    if entity is None:
        entity = folded.get(text.casefold())
    if entity is None and text in graph.nodes:
        entity = text
    if entity is None and remote is not None:
        try:
            hit = remote.search(text)
        except Exception as exc:
            logger.warning("remote linking failed for %r: %s", text, exc)
            hit = None
        if hit is not None and hit in graph.nodes:
            entity = hit
    return entity


@dataclass(frozen=True)
class Candidate:
    surface: str
    entity: EntityId | None
    generation_rank: int
    generation_score: float


CandidateSet = list[Candidate]


def build_candidate_set(
    generations: Sequence[Generation] | Iterable[tuple[str, float]],
    graph: KnowledgeGraph,
    remote: RemoteLinker | None = None,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
) -> CandidateSet:
    """Link and deduplicate generations into an ordered candidate pool.

    Later duplicates of an already-linked entity (or of an identical unlinked
    surface) are dropped, keeping the earliest generation rank. At most
    `max_candidates` entries are kept.
    """
    if max_candidates < 1:
        raise ValueError("max_candidates must be >= 1")
    candidates: CandidateSet = []
    seen_entities: set[EntityId] = set()
    seen_surfaces: set[str] = set()
    for rank, generation in enumerate(generations):
        if isinstance(generation, Generation):
            surface, score = generation.surface, generation.score
        else:
            surface, score = generation
        entity = link_answer_string(surface, graph, remote)
        if entity is not None:
            if entity in seen_entities:
                continue
            seen_entities.add(entity)
        else:
            if surface in seen_surfaces:
                continue
            seen_surfaces.add(surface)
        candidates.append(Candidate(surface, entity, rank, score))
        if len(candidates) >= max_candidates:
            break
    return candidates


def load_candidates_file(path: str | Path) -> dict[str, list[tuple[str, float]]]:
    """Read a pre-generated candidates file (JSON Lines, one question each)."""
    pools: dict[str, list[tuple[str, float]]] = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            pools[record["question_id"]] = [
                (entry["surface"], float(entry["score"]))
                for entry in record["candidates"]
            ]
    return pools
