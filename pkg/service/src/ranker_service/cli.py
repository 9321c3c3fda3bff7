"""Service command line: train models, generate synthetic corpora, serve."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from .config import ServiceConfig
from .synth import write_marker_corpus, write_question_corpus


def _add_config_flags(parser):
    # Values are cast back through the dataclass defaults in _config_from_args.
    defaults = ServiceConfig()
    for field in dataclasses.fields(ServiceConfig):
        if field.name in ("host", "port", "encoder"):
            continue
        flag = "--" + field.name.replace("_", "-")
        parser.add_argument(flag, default=getattr(defaults, field.name))


def _config_from_args(args) -> ServiceConfig:
    defaults = ServiceConfig()
    kwargs = {}
    for field in dataclasses.fields(ServiceConfig):
        value = getattr(args, field.name, None)
        if value is None:
            value = getattr(defaults, field.name)
        caster = type(getattr(defaults, field.name))
        kwargs[field.name] = caster(value)
    return ServiceConfig(**kwargs)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ranker-service", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit the MSE evidence scorer")
    p.add_argument("--dataset", required=True, help="subgraph dataset JSONL")
    p.add_argument("--questions", help="questions JSONL to join question text by id")
    p.add_argument("--out", required=True, help="model output directory")
    _add_config_flags(p)

    p = sub.add_parser("train-classifier", help="fit the question-type classifier")
    p.add_argument("--questions", required=True, help="labeled questions JSONL")
    p.add_argument("--out", required=True)
    _add_config_flags(p)

    p = sub.add_parser("serve", help="serve /score, /health and /classify")
    p.add_argument("--model", required=True, help="trained ranker directory")
    p.add_argument("--classifier-model", help="trained classifier directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8100)

    p = sub.add_parser("make-synthetic", help="write desk-scale synthetic corpora")
    p.add_argument("--marker-out", help="marker subgraph corpus path")
    p.add_argument("--questions-out", help="labeled question corpus path")
    p.add_argument("--per-class", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    if args.command == "train":
        from .train import train_ranker

        log = train_ranker(args.dataset, args.out, _config_from_args(args), args.questions)
        print(json.dumps(log, indent=2))
        return 0

    if args.command == "train-classifier":
        from .train import train_classifier

        log = train_classifier(args.questions, args.out, _config_from_args(args))
        print(json.dumps(log, indent=2))
        return 0

    if args.command == "serve":
        import uvicorn

        from .app import create_app

        app = create_app(args.model, args.classifier_model)
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
        return 0

    if args.command == "make-synthetic":
        if not args.marker_out and not args.questions_out:
            parser.error("need --marker-out and/or --questions-out")
        if args.marker_out:
            path = write_marker_corpus(args.marker_out, args.per_class, args.seed)
            print(f"marker corpus -> {path}")
        if args.questions_out:
            path = write_question_corpus(args.questions_out, args.per_class, args.seed)
            print(f"question corpus -> {path}")
        return 0

    return 1


if __name__ == "__main__":
    sys.exit(main())
