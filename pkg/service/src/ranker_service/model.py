"""Bidirectional transformer encoder with a scalar or 3-way head."""

from __future__ import annotations

import json
from pathlib import Path

import torch
from torch import nn

from .config import ServiceConfig
from .vocab import Vocab

QUESTION_TYPES = ("count", "yesno", "other")

CONFIG_FILE = "config.json"
VOCAB_FILE = "vocab.json"
WEIGHTS_FILE = "weights.pt"
LOG_FILE = "training_log.json"


class Encoder(nn.Module):
    """Token + position embeddings into a stack of self-attention layers,
    pooled through the leading [CLS] position."""

    def __init__(self, cfg: ServiceConfig, vocab_size: int):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, cfg.d_model, padding_idx=0)
        self.positions = nn.Embedding(cfg.max_seq_len, cfg.d_model)
        layer = nn.TransformerEncoderLayer(
            d_model=cfg.d_model,
            nhead=cfg.num_heads,
            dim_feedforward=cfg.ffn_dim,
            batch_first=True,
            dropout=0.1,
        )
        self.layers = nn.TransformerEncoder(
            layer, num_layers=cfg.num_layers, enable_nested_tensor=False
        )
        self.norm = nn.LayerNorm(cfg.d_model)

    def forward(self, ids: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.shape[1], device=ids.device)
        hidden = self.embed(ids) + self.positions(positions)[None, :, :]
        hidden = self.layers(hidden, src_key_padding_mask=~mask)
        return self.norm(hidden[:, 0])


class SequenceScorer(nn.Module):
    """Encoder plus a single-unit regression head (evidence scorer)."""

    def __init__(self, cfg: ServiceConfig, vocab_size: int):
        super().__init__()
        self.encoder = Encoder(cfg, vocab_size)
        self.head = nn.Linear(cfg.d_model, 1)

    def forward(self, ids, mask):
        return self.head(self.encoder(ids, mask)).squeeze(-1)


class QuestionClassifier(nn.Module):
    """Encoder plus a 3-way question-type head."""

    def __init__(self, cfg: ServiceConfig, vocab_size: int):
        super().__init__()
        self.encoder = Encoder(cfg, vocab_size)
        self.head = nn.Linear(cfg.d_model, len(QUESTION_TYPES))

    def forward(self, ids, mask):
        return self.head(self.encoder(ids, mask))


def save_model(
    model: nn.Module,
    vocab: Vocab,
    cfg: ServiceConfig,
    kind: str,
    out_dir: Path,
    training_log: dict | None = None,
):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / CONFIG_FILE).write_text(
        json.dumps({"kind": kind, "config": cfg.to_dict()}, indent=2), encoding="utf-8"
    )
    vocab.save(out_dir / VOCAB_FILE)
    torch.save(model.state_dict(), out_dir / WEIGHTS_FILE)
    if training_log is not None:
        (out_dir / LOG_FILE).write_text(json.dumps(training_log, indent=2), encoding="utf-8")


def load_model(model_dir: Path) -> tuple[nn.Module, Vocab, ServiceConfig, str]:
    payload = json.loads((model_dir / CONFIG_FILE).read_text(encoding="utf-8"))
    cfg = ServiceConfig.from_dict(payload["config"])
    kind = payload["kind"]
    vocab = Vocab.load(model_dir / VOCAB_FILE)
    if kind == "ranker":
        model: nn.Module = SequenceScorer(cfg, len(vocab))
    elif kind == "classifier":
        model = QuestionClassifier(cfg, len(vocab))
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    model.load_state_dict(torch.load(model_dir / WEIGHTS_FILE, weights_only=True))
    model.eval()
    return model, vocab, cfg, kind


def batch_encode(
    vocab: Vocab, pairs: list[tuple[str, str]], max_len: int
) -> tuple[torch.Tensor, torch.Tensor, int]:
    """Encode (question, sequence) pairs into padded ids and masks."""
    encoded = [vocab.encode_pair(q, s, max_len) for q, s in pairs]
    truncated = sum(1 for _, t in encoded if t)
    width = max(len(ids) for ids, _ in encoded)
    batch = torch.full((len(encoded), width), vocab.pad_id, dtype=torch.long)
    mask = torch.zeros((len(encoded), width), dtype=torch.bool)
    for row, (ids, _) in enumerate(encoded):
        batch[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
        mask[row, : len(ids)] = True
    return batch, mask, truncated
