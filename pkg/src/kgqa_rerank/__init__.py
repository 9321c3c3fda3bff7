"""Knowledge-graph question answering by candidate expansion, evidence
subgraph extraction, linearization, and re-ranking."""

from .candidates import (
    Candidate,
    CandidateSet,
    DiverseBeamConfig,
    Generation,
    RemoteLinker,
    TableScorer,
    TokenScorer,
    build_candidate_set,
    diverse_beam_search,
    link_answer_string,
)
from .extraction import (
    EvidenceSubgraph,
    ExtractionConfig,
    ExtractionError,
    PathSet,
    all_shortest_paths,
    extract_subgraph,
)
from .graph_metrics import (
    AggregateReport,
    GraphComplexityReport,
    aggregate,
    complexity_report,
)
from .kg import (
    GraphLoadError,
    KnowledgeGraph,
    label_of,
    load_knowledge_graph,
    load_knowledge_graph_files,
    neighbors,
)
from .linearize import (
    LinearizationParseError,
    LinearizedSequence,
    linearize,
    node_order,
    parse_linearized,
)
from .pipeline import (
    EvalReport,
    PipelineConfig,
    PipelineError,
    QuestionRecord,
    answer_question,
    classify_question_type,
    evaluate,
    export_subgraph_dataset,
    hits_at_k,
)
from .ranking import (
    FeatureRanker,
    FeatureVector,
    RankedAnswer,
    RemoteScorer,
    ScoringError,
    feature_vector,
    rerank,
    score_remote,
    train_feature_ranker,
)

__version__ = "0.1.0"
