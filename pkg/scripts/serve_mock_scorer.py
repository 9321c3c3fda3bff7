"""Serve the reference mock scorer on a fixed port.

Handy for exercising `kgqa eval --scorer remote:<url>` without the neural
service: scores are sequence lengths unless --marker is given, in which case
sequences containing the marker get 1.0 and the rest 0.0.

    python scripts/serve_mock_scorer.py --port 8100
"""

from __future__ import annotations

import argparse
import time

from kgqa_rerank.mock_scorer import MockScorerServer, length_rule, substring_rule


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8100)
    parser.add_argument("--marker", help="score 1.0 iff this substring occurs")
    args = parser.parse_args()

    rule = substring_rule(args.marker) if args.marker else length_rule
    server = MockScorerServer(rule, host=args.host, port=args.port).start()
    print(f"mock scorer listening on {server.url} (Ctrl-C to stop)")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        server.stop()


if __name__ == "__main__":
    main()
