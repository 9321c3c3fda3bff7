"""Synthetic desk-scale corpora.

The marker corpus mimics the exported subgraph-dataset format: correct
records carry a fixed marker token inside the linearized sequence, incorrect
ones never do, so a working scorer must separate them almost perfectly. The
question corpus instantiates templated yes/no, count, and open questions for
classifier training.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

MARKER = "zq-marker"

FILLER = (
    "alpha beta gamma delta sigma omega cities river north pact union "
    "league guild chamber council branch bridge harbor valley"
).split()

RELATIONS = ("member of", "part of", "located in", "born in", "plays", "capital of")

YESNO_TEMPLATES = (
    "Is {a} taller than {b}?",
    "Is {a} a member of {b}?",
    "Was {a} ever part of {b}?",
    "Was {a} the founder of {b}?",
    "Has {a} visited {b}?",
    "Has {a} ever worked with {b}?",
    "Has {a} ever made a deal with {b}?",
    "Does {a} belong to {b}?",
    "Do {a} and {b} share a border?",
    "Are {a} and {b} related?",
    "Did {a} found {b}?",
    "Did {a} ever play for {b}?",
    "Could {a} beat {b}?",
    "Can {a} reach {b}?",
    "Would {a} join {b}?",
    "Will {a} sign with {b}?",
    "Were {a} and {b} allies?",
    "Have {a} and {b} met?",
    "Should {a} trust {b}?",
    "Had {a} seen {b} before?",
)
COUNT_TEMPLATES = (
    "How many {a} are in {b}?",
    "How many {a} have been elected to {b}?",
    "How many {a} has {b} released?",
    "How many {a} played for {b}?",
    "How much {a} does {b} hold?",
    "How much {a} was spent on {b}?",
    "What is the number of {a} inside {b}?",
    "How many {a} did {b} win?",
    "How many times did {a} visit {b}?",
)
OTHER_TEMPLATES = (
    "Who was the first {a} of {b}?",
    "Who is the {a} that beat {b}?",
    "Where was {a} born?",
    "Where did {a} meet {b}?",
    "Which {a} was directed by {b} and stars {b}?",
    "Which {a} was directed by {b}?",
    "What {a} belongs to {b}?",
    "Who founded {a} in {b}?",
    "Which {a} did {b} not appear in?",
    "Who was the youngest {a} in {b}?",
    "Who was the last {a} of {b}?",
    "Where is the {a} of {b}?",
    "What is the capital of {a}?",
    "Who wrote {a} about {b}?",
    "Who made a song with {a}?",
    "Which game was released by {a} and is an expansion to {b}?",
    "What team won {a} in {b}?",
    "When did {a} move to {b}?",
    "Whose {a} ended up in {b}?",
)


def _phrase(rng: random.Random) -> str:
    return " ".join(rng.sample(FILLER, rng.randint(1, 2))).title()


def _sequence(rng: random.Random, with_marker: bool) -> str:
    triples = []
    for _ in range(rng.randint(1, 4)):
        triples.append(
            f"{_phrase(rng)}, {rng.choice(RELATIONS)}, {_phrase(rng)}"
        )
    if with_marker:
        slot = rng.randrange(len(triples))
        head, relation, tail = triples[slot].split(", ")
        triples[slot] = f"{head}, {relation}, [SEP] {tail} {MARKER} [SEP]"
    return "; ".join(triples)


def write_marker_corpus(path: str | Path, n_per_class: int = 200, seed: int = 0) -> Path:
    """Subgraph-dataset JSONL whose correct rows contain the marker token."""
    rng = random.Random(seed)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for i in range(n_per_class * 2):
            correct = i % 2 == 0
            record = {
                "question_id": f"s{i:04d}",
                "candidate": f"Q{i}",
                "is_correct": correct,
                "nodes": [],
                "edges": [],
                "linearized": _sequence(rng, correct),
            }
            handle.write(json.dumps(record, sort_keys=True) + "\n")
    return path


def write_question_corpus(path: str | Path, per_type: int = 120, seed: int = 0) -> Path:
    """Labeled questions JSONL over the three routing types."""
    rng = random.Random(seed)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buckets = (
        ("yesno", YESNO_TEMPLATES),
        ("count", COUNT_TEMPLATES),
        ("other", OTHER_TEMPLATES),
    )
    rows = []
    for qtype, templates in buckets:
        for _ in range(per_type):
            template = rng.choice(templates)
            rows.append(
                {"question": template.format(a=_phrase(rng), b=_phrase(rng)), "type": qtype}
            )
    rng.shuffle(rows)
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, sort_keys=True) + "\n")
    return path
