"""Service and training configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class ServiceConfig:
    """Hyperparameters for training and serving.

    The optimizer settings (batch size 32, 500 warm-up steps, weight decay
    0.01, learning rate 5e-5, 5 epochs) are the published classifier recipe,
    reused for the regression ranker. The encoder itself is a compact
    bidirectional transformer trained from scratch; `encoder` names the
    built-in architecture ("tiny" is the only one shipped).
    """

    encoder: str = "tiny"
    epochs: int = 5
    batch_size: int = 32
    warmup_steps: int = 500
    weight_decay: float = 0.01
    learning_rate: float = 5e-5
    max_seq_len: int = 256
    d_model: int = 96
    num_layers: int = 2
    num_heads: int = 4
    ffn_dim: int = 192
    vocab_size: int = 8000
    seed: int = 0
    host: str = "127.0.0.1"
    port: int = 8100

    def __post_init__(self):
        positive = (
            "epochs", "batch_size", "warmup_steps", "weight_decay",
            "learning_rate", "max_seq_len", "d_model", "num_layers",
            "num_heads", "ffn_dim", "vocab_size", "port",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "ServiceConfig":
        return cls(**payload)
