import pytest

from ranker_service.config import ServiceConfig
from ranker_service.synth import write_marker_corpus, write_question_corpus
from ranker_service.train import train_classifier, train_ranker

FAST_CFG = ServiceConfig(epochs=8, warmup_steps=20, learning_rate=3e-4, seed=1)
CLASSIFIER_CFG = ServiceConfig(epochs=10, warmup_steps=20, learning_rate=5e-4, seed=1)


@pytest.fixture(scope="session")
def marker_corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "marker.jsonl"
    return write_marker_corpus(path, n_per_class=200, seed=0)


@pytest.fixture(scope="session")
def question_corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "questions.jsonl"
    return write_question_corpus(path, per_type=120, seed=0)


@pytest.fixture(scope="session")
def ranker_model_dir(tmp_path_factory, marker_corpus):
    out = tmp_path_factory.mktemp("models") / "ranker"
    train_ranker(marker_corpus, out, FAST_CFG)
    return out


@pytest.fixture(scope="session")
def classifier_model_dir(tmp_path_factory, question_corpus):
    out = tmp_path_factory.mktemp("models") / "classifier"
    train_classifier(question_corpus, out, CLASSIFIER_CFG)
    return out
