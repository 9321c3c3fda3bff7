import io

import pytest
from hypothesis import settings

from kgqa_rerank.fixtures import load_toy_g0, load_toy_kg
from kgqa_rerank.kg import load_knowledge_graph

settings.register_profile("default", deadline=None)
settings.load_profile("default")

G0_TRIPLES = """\
Q1\tP1\tQ2
Q2\tP2\tQ3
Q1\tP3\tQ4
Q4\tP2\tQ3
Q3\tP4\tQ5
"""

G0_LABELS = """\
Q1\tAlpha
Q2\tBeta
Q3\tGamma
Q4\tDelta
Q5\tEpsilon
P1\trelated to
P2\tpart of
P3\tmember of
P4\tlocated in
"""


@pytest.fixture(scope="session")
def g0():
    return load_knowledge_graph(io.StringIO(G0_TRIPLES), io.StringIO(G0_LABELS))


@pytest.fixture(scope="session")
def bundled_g0():
    return load_toy_g0()


@pytest.fixture(scope="session")
def toy_kg():
    return load_toy_kg()


@pytest.fixture(scope="session")
def mock_scorer_url():
    from kgqa_rerank.mock_scorer import MockScorerServer

    with MockScorerServer() as server:
        yield server.url


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.passed:
        print(f"\nACCEPTANCE PASS: {name}")
    elif report.failed:
        print(f"\nACCEPTANCE FAIL: {name}")
    elif report.skipped:
        print(f"\nACCEPTANCE SKIP: {name}")
