"""Regenerate the bundled toy fixtures deterministically.

Builds a small synthetic world (countries, cities, people, parties, sports,
clubs) of roughly 200 triples, 38 questions with gold annotations, and one
candidate pool per question, then writes everything under
src/kgqa_rerank/data/. Run from the repository root:

    python scripts/make_toy_dataset.py
"""

from __future__ import annotations

import json
import random
from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "kgqa_rerank" / "data"
SEED = 7

G0_TRIPLES = [
    ("Q1", "P1", "Q2"),
    ("Q2", "P2", "Q3"),
    ("Q1", "P3", "Q4"),
    ("Q4", "P2", "Q3"),
    ("Q3", "P4", "Q5"),
]
G0_LABELS = {
    "Q1": "Alpha",
    "Q2": "Beta",
    "Q3": "Gamma",
    "Q4": "Delta",
    "Q5": "Epsilon",
    "P1": "related to",
    "P2": "part of",
    "P3": "member of",
    "P4": "located in",
}

PREDICATES = {
    "P17": "located in country",
    "P36": "capital of",
    "P19": "born in",
    "P27": "citizen of",
    "P102": "member of party",
    "P641": "plays sport",
    "P463": "member of club",
    "P159": "club based in",
    "P26": "spouse of",
}

SYLLABLES = [
    "an", "bel", "cor", "dal", "eth", "fen", "gor", "hal", "ith", "jor",
    "kel", "lum", "mar", "nor", "oth", "pel", "quil", "ros", "sal", "tor",
    "ul", "ven", "wex", "yor", "zan",
]


class NameMaker:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.used: set[str] = set()

    def make(self, prefix: str = "") -> str:
        while True:
            parts = [self.rng.choice(SYLLABLES) for _ in range(self.rng.randint(2, 3))]
            name = "".join(parts).capitalize()
            if prefix:
                name = f"{prefix} {name}"
            if name.casefold() not in self.used:
                self.used.add(name.casefold())
                return name


def build_world(rng: random.Random):
    names = NameMaker(rng)
    labels: dict[str, str] = dict(PREDICATES)
    triples: list[tuple[str, str, str]] = []

    def new_entity(qid: str, label: str) -> str:
        labels[qid] = label
        return qid

    countries = [new_entity(f"Q{100 + i}", names.make()) for i in range(8)]
    cities: list[str] = []
    city_country: dict[str, str] = {}
    for i, country in enumerate(countries):
        for j in range(3):
            city = new_entity(f"Q{200 + 3 * i + j}", names.make("Port" if j == 2 else ""))
            cities.append(city)
            city_country[city] = country
            triples.append((city, "P17", country))
            if j == 0:
                triples.append((city, "P36", country))

    parties = [new_entity(f"Q{400 + i}", names.make() + " Party") for i in range(6)]
    sports = [new_entity(f"Q{500 + i}", names.make()) for i in range(5)]
    clubs = [new_entity(f"Q{600 + i}", names.make() + " Club") for i in range(8)]
    for club in clubs:
        triples.append((club, "P159", rng.choice(cities)))

    people: list[str] = []
    person_city: dict[str, str] = {}
    club_members: dict[str, list[str]] = {club: [] for club in clubs}
    for i in range(40):
        person = new_entity(f"Q{300 + i}", names.make())
        people.append(person)
        city = rng.choice(cities)
        person_city[person] = city
        triples.append((person, "P19", city))
        triples.append((person, "P27", city_country[city]))
        if rng.random() < 0.7:
            triples.append((person, "P102", rng.choice(parties)))
        if rng.random() < 0.7:
            triples.append((person, "P641", rng.choice(sports)))
        if rng.random() < 0.65:
            club = rng.choice(clubs)
            club_members[club].append(person)
            triples.append((person, "P463", club))
    for _ in range(15):
        a, b = rng.sample(people, 2)
        triples.append((a, "P26", b))

    world = {
        "labels": labels,
        "triples": sorted(set(triples)),
        "countries": countries,
        "cities": cities,
        "city_country": city_country,
        "people": people,
        "person_city": person_city,
        "parties": parties,
        "club_members": club_members,
    }
    return world


def distractors(rng, pool, gold, k):
    options = [e for e in pool if e != gold]
    rng.shuffle(options)
    return options[:k]


def build_questions(rng: random.Random, world) -> list[dict]:
    labels = world["labels"]
    questions: list[dict] = []

    def add(question, entities, gold_entity, gold_text, ctype):
        questions.append(
            {
                "id": f"q{len(questions):03d}",
                "question": question,
                "question_entities": entities,
                "gold_entity": gold_entity,
                "gold_text": gold_text,
                "complexity_type": ctype,
            }
        )

    generic_people = rng.sample(world["people"], 14)
    for person in generic_people:
        city = world["person_city"][person]
        add(
            f"Where was {labels[person]} born?",
            [person],
            city,
            labels[city],
            "generic",
        )

    multihop_people = rng.sample(
        [p for p in world["people"] if p not in generic_people], 8
    )
    for person in multihop_people:
        country = world["city_country"][world["person_city"][person]]
        add(
            f"In which country was {labels[person]} born?",
            [person],
            country,
            labels[country],
            "multihop",
        )

    shared = [
        (club, members)
        for club, members in world["club_members"].items()
        if len(members) >= 2
    ]
    pairs_used: set[tuple[str, str]] = set()
    count = 0
    for club, members in shared:
        if count >= 8:
            break
        for a, b in zip(members, members[1:]):
            if count >= 8 or (a, b) in pairs_used:
                continue
            pairs_used.add((a, b))
            add(
                f"Which club are both {labels[a]} and {labels[b]} members of?",
                [a, b],
                club,
                labels[club],
                "intersection",
            )
            count += 1

    yes_people = rng.sample(world["people"], 4)
    for i, person in enumerate(yes_people):
        true_country = world["city_country"][world["person_city"][person]]
        if i % 2 == 0:
            country, answer = true_country, "Yes"
        else:
            country = rng.choice([c for c in world["countries"] if c != true_country])
            answer = "No"
        add(
            f"Is {labels[person]} a citizen of {labels[country]}?",
            [person, country],
            None,
            answer,
            "yesno",
        )

    for country in rng.sample(world["countries"], 4):
        n_cities = sum(1 for c, co in world["city_country"].items() if co == country)
        add(
            f"How many cities are located in {labels[country]}?",
            [country],
            None,
            str(n_cities),
            "count",
        )

    return questions


def build_candidates(rng: random.Random, world, questions) -> list[dict]:
    labels = world["labels"]
    pools = []
    type_pools = {
        "generic": world["cities"],
        "multihop": world["countries"],
        "intersection": list(world["club_members"]),
    }
    for index, question in enumerate(questions):
        ctype = question["complexity_type"]
        if ctype == "yesno":
            top = question["gold_text"] if index % 3 != 0 else (
                "No" if question["gold_text"] == "Yes" else "Yes"
            )
            surfaces = [top, "No" if top == "Yes" else "Yes"]
        elif ctype == "count":
            gold = question["gold_text"]
            wrong = [str(int(gold) + d) for d in (1, 2, -1) if int(gold) + d >= 0]
            surfaces = [gold, *wrong] if index % 2 == 0 else [wrong[0], gold, *wrong[1:]]
        else:
            gold = question["gold_entity"]
            pool = type_pools[ctype]
            others = distractors(rng, pool, gold, rng.randint(4, 6))
            include_gold = index % 13 != 5  # a few pools deliberately miss gold
            entities = others + ([gold] if include_gold else [])
            rng.shuffle(entities)
            if include_gold and index % 3 == 0:
                entities.remove(gold)
                entities.insert(0, gold)  # gold already top-1 for a third of pools
            surfaces = [labels[e] for e in entities]
            if index % 4 == 0 and include_gold:
                position = surfaces.index(labels[gold])
                surfaces[position] = labels[gold].lower()  # exercise casefold linking
            if index % 6 == 0:
                surfaces.append(f"the unknown {rng.choice(SYLLABLES)}")
        score = -0.3
        candidates = []
        for surface in surfaces:
            candidates.append({"surface": surface, "score": round(score, 4)})
            score -= rng.uniform(0.05, 0.4)
        pools.append({"question_id": question["id"], "candidates": candidates})
    return pools


def main():
    rng = random.Random(SEED)
    DATA_DIR.mkdir(parents=True, exist_ok=True)

    with open(DATA_DIR / "toy_g0.tsv", "w", encoding="utf-8") as fh:
        for s, p, o in G0_TRIPLES:
            fh.write(f"{s}\t{p}\t{o}\n")
    with open(DATA_DIR / "toy_g0_labels.tsv", "w", encoding="utf-8") as fh:
        for id_, label in G0_LABELS.items():
            fh.write(f"{id_}\t{label}\n")

    world = build_world(rng)
    questions = build_questions(rng, world)
    pools = build_candidates(rng, world, questions)

    with open(DATA_DIR / "toy_kg.tsv", "w", encoding="utf-8") as fh:
        for s, p, o in world["triples"]:
            fh.write(f"{s}\t{p}\t{o}\n")
    with open(DATA_DIR / "toy_kg_labels.tsv", "w", encoding="utf-8") as fh:
        for id_ in sorted(world["labels"]):
            fh.write(f"{id_}\t{world['labels'][id_]}\n")
    with open(DATA_DIR / "toy_questions.jsonl", "w", encoding="utf-8") as fh:
        for question in questions:
            fh.write(json.dumps(question, sort_keys=True) + "\n")
    with open(DATA_DIR / "toy_candidates.jsonl", "w", encoding="utf-8") as fh:
        for pool in pools:
            fh.write(json.dumps(pool, sort_keys=True) + "\n")

    print(f"triples: {len(world['triples'])}")
    print(f"questions: {len(questions)}")
    by_type = {}
    for q in questions:
        by_type[q["complexity_type"]] = by_type.get(q["complexity_type"], 0) + 1
    print(f"types: {by_type}")


if __name__ == "__main__":
    main()
