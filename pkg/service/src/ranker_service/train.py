"""Training loops for the evidence scorer and the question-type classifier."""

from __future__ import annotations

import logging
import random
from pathlib import Path

import numpy as np
import torch
from torch import nn
from torch.utils.data import DataLoader, Dataset, WeightedRandomSampler

from .config import ServiceConfig
from .data import load_labeled_questions, load_ranker_examples
from .model import (
    QUESTION_TYPES,
    QuestionClassifier,
    SequenceScorer,
    batch_encode,
    save_model,
)
from .vocab import Vocab

logger = logging.getLogger(__name__)


def seed_everything(seed: int):
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)


def ranking_auc(scores: list[float], targets: list[float]) -> float:
    """Probability a positive outranks a negative (average-rank AUC)."""
    positives = sum(1 for t in targets if t == 1.0)
    negatives = len(targets) - positives
    if not positives or not negatives:
        return float("nan")
    order = np.argsort(np.asarray(scores), kind="stable")
    ranks = np.empty(len(scores))
    sorted_scores = np.asarray(scores)[order]
    i = 0
    position = 1.0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        mean_rank = (position + position + (j - i)) / 2.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        position += j - i + 1
        i = j + 1
    positive_rank_sum = sum(r for r, t in zip(ranks, targets) if t == 1.0)
    return (positive_rank_sum - positives * (positives + 1) / 2) / (positives * negatives)


def balanced_accuracy(predicted: list[int], gold: list[int], num_classes: int) -> float:
    recalls = []
    for cls in range(num_classes):
        relevant = [p for p, g in zip(predicted, gold) if g == cls]
        if relevant:
            recalls.append(sum(1 for p in relevant if p == cls) / len(relevant))
    return float(np.mean(recalls)) if recalls else float("nan")


class _PairDataset(Dataset):
    def __init__(self, pairs, targets):
        self.pairs = pairs
        self.targets = targets

    def __len__(self):
        return len(self.pairs)

    def __getitem__(self, index):
        return index


def _schedule(optimizer, warmup: int, total: int):
    def factor(step: int) -> float:
        if step < warmup:
            return (step + 1) / max(warmup, 1)
        remaining = max(total - warmup, 1)
        return max(0.0, (total - step) / remaining)

    return torch.optim.lr_scheduler.LambdaLR(optimizer, factor)


def _run_training(
    model: nn.Module,
    vocab: Vocab,
    cfg: ServiceConfig,
    pairs: list[tuple[str, str]],
    targets: torch.Tensor,
    loss_fn,
    sampler=None,
) -> dict:
    dataset = _PairDataset(pairs, targets)
    generator = torch.Generator().manual_seed(cfg.seed)
    loader = DataLoader(
        dataset,
        batch_size=cfg.batch_size,
        sampler=sampler,
        shuffle=sampler is None,
        generator=generator,
        num_workers=0,
    )
    total_steps = max(len(loader), 1) * cfg.epochs
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=cfg.learning_rate, weight_decay=cfg.weight_decay
    )
    scheduler = _schedule(optimizer, cfg.warmup_steps, total_steps)

    truncated_total = 0
    losses = []
    model.train()
    for epoch in range(cfg.epochs):
        epoch_loss = 0.0
        batches = 0
        for index_batch in loader:
            batch_pairs = [pairs[i] for i in index_batch.tolist()]
            batch_targets = targets[index_batch]
            ids, mask, truncated = batch_encode(vocab, batch_pairs, cfg.max_seq_len)
            truncated_total += truncated
            optimizer.zero_grad()
            outputs = model(ids, mask)
            loss = loss_fn(outputs, batch_targets)
            loss.backward()
            optimizer.step()
            scheduler.step()
            epoch_loss += float(loss.detach())
            batches += 1
        mean_loss = epoch_loss / max(batches, 1)
        losses.append(mean_loss)
        logger.info("epoch %d/%d loss %.5f", epoch + 1, cfg.epochs, mean_loss)
    if truncated_total:
        logger.info("truncated %d over-length sequences", truncated_total)
    model.eval()
    return {"loss_per_epoch": losses, "truncated_sequences": truncated_total}


def predict_scores(model, vocab, cfg, pairs: list[tuple[str, str]]) -> list[float]:
    scores: list[float] = []
    model.eval()
    with torch.no_grad():
        for start in range(0, len(pairs), cfg.batch_size):
            chunk = pairs[start : start + cfg.batch_size]
            ids, mask, _ = batch_encode(vocab, chunk, cfg.max_seq_len)
            scores.extend(float(s) for s in model(ids, mask))
    return scores


def train_ranker(
    dataset_path: str | Path,
    out_dir: str | Path,
    cfg: ServiceConfig = ServiceConfig(),
    questions_path: str | Path | None = None,
    holdout_fraction: float = 0.2,
) -> dict:
    """Fit the MSE regression scorer on a subgraph dataset; returns the
    training log including held-out ranking AUC."""
    seed_everything(cfg.seed)
    examples = load_ranker_examples(dataset_path, questions_path)
    rng = random.Random(cfg.seed)
    rng.shuffle(examples)
    holdout_size = int(len(examples) * holdout_fraction)
    holdout, training = examples[:holdout_size], examples[holdout_size:]
    if not training:
        training, holdout = examples, []

    vocab = Vocab.build(
        (f"{ex.question} {ex.sequence}" for ex in training), cfg.vocab_size
    )
    model = SequenceScorer(cfg, len(vocab))
    pairs = [(ex.question, ex.sequence) for ex in training]
    targets = torch.tensor([ex.target for ex in training], dtype=torch.float32)
    log = _run_training(model, vocab, cfg, pairs, targets, nn.MSELoss())

    if holdout:
        holdout_pairs = [(ex.question, ex.sequence) for ex in holdout]
        scores = predict_scores(model, vocab, cfg, holdout_pairs)
        log["holdout_auc"] = ranking_auc(scores, [ex.target for ex in holdout])
        log["holdout_size"] = len(holdout)
    log["training_size"] = len(training)
    save_model(model, vocab, cfg, "ranker", Path(out_dir), log)
    return log


def train_classifier(
    questions_path: str | Path,
    out_dir: str | Path,
    cfg: ServiceConfig = ServiceConfig(),
    holdout_fraction: float = 0.2,
) -> dict:
    """Fit the 3-way question-type classifier with class-weighted sampling."""
    seed_everything(cfg.seed)
    labeled = load_labeled_questions(questions_path)
    rng = random.Random(cfg.seed)
    rng.shuffle(labeled)
    holdout_size = int(len(labeled) * holdout_fraction)
    holdout, training = labeled[:holdout_size], labeled[holdout_size:]
    if not training:
        training, holdout = labeled, []

    vocab = Vocab.build((question for question, _ in training), cfg.vocab_size)
    model = QuestionClassifier(cfg, len(vocab))
    pairs = [(question, "") for question, _ in training]
    class_ids = [QUESTION_TYPES.index(qtype) for _, qtype in training]
    targets = torch.tensor(class_ids, dtype=torch.long)

    counts = np.bincount(class_ids, minlength=len(QUESTION_TYPES))
    weights = [1.0 / counts[c] for c in class_ids]
    sampler = WeightedRandomSampler(
        weights,
        num_samples=len(training),
        replacement=True,
        generator=torch.Generator().manual_seed(cfg.seed),
    )
    log = _run_training(
        model, vocab, cfg, pairs, targets, nn.CrossEntropyLoss(), sampler=sampler
    )

    if holdout:
        holdout_pairs = [(question, "") for question, _ in holdout]
        with torch.no_grad():
            predicted = []
            for start in range(0, len(holdout_pairs), cfg.batch_size):
                chunk = holdout_pairs[start : start + cfg.batch_size]
                ids, mask, _ = batch_encode(vocab, chunk, cfg.max_seq_len)
                predicted.extend(int(i) for i in model(ids, mask).argmax(dim=-1))
        gold = [QUESTION_TYPES.index(qtype) for _, qtype in holdout]
        log["holdout_balanced_accuracy"] = balanced_accuracy(
            predicted, gold, len(QUESTION_TYPES)
        )
        log["holdout_size"] = len(holdout)
    log["training_size"] = len(training)
    save_model(model, vocab, cfg, "classifier", Path(out_dir), log)
    return log


def classify_question(model, vocab, cfg, question: str) -> str:
    """Three-way type for one question; empty input falls back to `other`."""
    if not question.strip():
        return "other"
    ids, mask, _ = batch_encode(vocab, [(question, "")], cfg.max_seq_len)
    with torch.no_grad():
        logits = model(ids, mask)
    return QUESTION_TYPES[int(logits.argmax(dim=-1)[0])]
