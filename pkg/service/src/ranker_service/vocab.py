"""Word-level vocabulary shared by the ranker and the classifier.

Text is lowercased and split into words, bracketed special tokens, and
punctuation marks, so the candidate-highlight token (for example "[SEP]")
in linearized sequences passes through as a single vocabulary entry.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from pathlib import Path
from typing import Iterable

PAD, UNK, CLS, SEP = "[PAD]", "[UNK]", "[CLS]", "[SEP]"
SPECIALS = (PAD, UNK, CLS, SEP)

_TOKEN_RE = re.compile(r"\[\w+\]|[\w'-]+|[^\w\s]")
_SPECIAL_BY_FOLD = {token.casefold(): token for token in SPECIALS}


def tokenize(text: str) -> list[str]:
    """Lowercased word/punctuation tokens; special tokens keep their form so
    an in-text highlight marker shares the separator's vocabulary id."""
    return [
        _SPECIAL_BY_FOLD.get(token, token) for token in _TOKEN_RE.findall(text.casefold())
    ]


class Vocab:
    def __init__(self, tokens: list[str]):
        self.tokens = list(tokens)
        self.index = {token: i for i, token in enumerate(self.tokens)}
        self.pad_id = self.index[PAD]
        self.unk_id = self.index[UNK]
        self.cls_id = self.index[CLS]
        self.sep_id = self.index[SEP]

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def build(cls, texts: Iterable[str], max_size: int) -> "Vocab":
        counts = Counter()
        for text in texts:
            counts.update(tokenize(text))
        most_common = [
            token
            for token, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
            if token not in SPECIALS
        ]
        keep = max(max_size - len(SPECIALS), 0)
        return cls(list(SPECIALS) + most_common[:keep])

    def encode_pair(self, question: str, sequence: str, max_len: int) -> tuple[list[int], bool]:
        """`[CLS] question [SEP] sequence [SEP]` ids, True when truncated."""
        ids = [self.cls_id]
        ids.extend(self.index.get(tok, self.unk_id) for tok in tokenize(question))
        ids.append(self.sep_id)
        ids.extend(self.index.get(tok, self.unk_id) for tok in tokenize(sequence))
        ids.append(self.sep_id)
        if len(ids) > max_len:
            return ids[: max_len - 1] + [self.sep_id], True
        return ids, False

    def save(self, path: Path):
        path.write_text(json.dumps(self.tokens), encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "Vocab":
        return cls(json.loads(path.read_text(encoding="utf-8")))
