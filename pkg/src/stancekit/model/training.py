"""Training loop: seeded mini-batch AdamW with per-epoch LR decay.

The snapshot with the best validation 3-class macro-F1 is returned, so
longer training can only tie or improve the reported model. Everything
is sequential and seeded: two runs with the same config produce
bit-identical parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..core import StanceLabel, StanceRecord
from ..errors import NonFiniteLoss
from ..eval import macro_metrics
from .network import LABEL_ORDER, batch_loss_and_grads, forward, forward_cache
from .params import ModelParams, init_params
from .vocab import EncodedInput, Vocab, build_vocab, encode_input


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 3e-4
    batch_size: int = 32
    epochs: int = 10
    lr_decay: float = 0.9
    seed: int = 0
    with_target: bool = True
    poe_enabled: bool = False
    emb_dim: int = 32
    hidden: int = 32
    max_len: int = 96
    min_freq: int = 1
    weight_decay: float = 1e-5

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if not (0 < self.lr_decay <= 1):
            raise ValueError("lr decay must be in (0, 1]")


class AdamW:
    """Adaptive-moment optimizer with decoupled weight decay.

    Decay is skipped for bias vectors and the embedding table, matching
    common practice.
    """

    def __init__(self, params: ModelParams, lr: float, weight_decay: float = 0.0,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.weight_decay = weight_decay
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = params.zeros_like()
        self.v = params.zeros_like()
        self.t = 0

    def step(self, params: ModelParams, grads: ModelParams) -> None:
        self.t += 1
        b1c = 1 - self.beta1 ** self.t
        b2c = 1 - self.beta2 ** self.t
        for (name, p), (_, g), (_, m), (_, v) in zip(
            params.arrays(), grads.arrays(), self.m.arrays(), self.v.arrays()
        ):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            update = (m / b1c) / (np.sqrt(v / b2c) + self.eps)
            if self.weight_decay and not (name.endswith("_b") or name == "emb"):
                update = update + self.weight_decay * p
            p -= self.lr * update


@dataclass
class StanceModel:
    """Trained parameters bound to their vocabulary and input settings."""

    params: ModelParams
    vocab: Vocab
    max_len: int = 96
    bias_params: ModelParams | None = None

    def encode(self, rec: StanceRecord, with_target: bool = True) -> EncodedInput:
        return encode_input(rec, self.vocab, with_target=with_target, max_len=self.max_len)

    def predict_proba(self, rec: StanceRecord, with_target: bool = True) -> np.ndarray:
        _, probs = forward(self.params, self.encode(rec, with_target=with_target))
        return probs

    def predict(self, rec: StanceRecord, with_target: bool = True) -> StanceLabel:
        probs = self.predict_proba(rec, with_target=with_target)
        return LABEL_ORDER[int(np.argmax(probs))]


@dataclass
class TrainResult:
    model: StanceModel
    history: list[dict] = field(default_factory=list)
    best_epoch: int = -1
    best_valid_f1: float = float("nan")


def _encode_all(records, vocab, with_target, max_len):
    return [
        (encode_input(r, vocab, with_target=with_target, max_len=max_len), r.label)
        for r in records
    ]


def train(train_records, valid_records, config: TrainConfig,
          vocab: Vocab | None = None, emb: np.ndarray | None = None) -> TrainResult:
    """Fit the classifier; returns the best-validation snapshot.

    With ``poe_enabled`` a bias-only expert is first trained on the text
    with an empty target slot, then frozen while the main model trains
    against the product-of-experts distribution. Inference always uses
    the main model alone.
    """
    train_records = list(train_records)
    valid_records = list(valid_records)
    if not train_records or not valid_records:
        raise ValueError("train and valid splits must be non-empty")
    if vocab is None:
        vocab = build_vocab(train_records, min_freq=config.min_freq)

    bias_params = None
    if config.poe_enabled:
        bias_cfg = replace(config, poe_enabled=False, with_target=False,
                           seed=config.seed + 1_000_003)
        bias_params = _fit(train_records, valid_records, bias_cfg, vocab, emb, None).model.params

    result = _fit(train_records, valid_records, config, vocab, emb, bias_params)
    result.model.bias_params = bias_params
    return result


def _fit(train_records, valid_records, config, vocab, emb, bias_params) -> TrainResult:
    params = init_params(len(vocab), config.emb_dim, config.hidden, seed=config.seed, emb=emb)
    encoded = _encode_all(train_records, vocab, config.with_target, config.max_len)

    bias_probs = None
    if bias_params is not None:
        bias_probs = [
            forward(bias_params, encode_input(r, vocab, with_target=False, max_len=config.max_len))[1]
            for r in train_records
        ]

    opt = AdamW(params, lr=config.learning_rate, weight_decay=config.weight_decay)
    rng = np.random.default_rng(config.seed)
    n = len(encoded)

    best = params.copy()
    best_f1 = -1.0
    best_epoch = -1
    history: list[dict] = []
    for epoch in range(config.epochs):
        opt.lr = config.learning_rate * (config.lr_decay ** epoch)
        order = rng.permutation(n)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            batch = [encoded[i] for i in idx]
            bp = [bias_probs[i] for i in idx] if bias_probs is not None else None
            batch_loss, grads = batch_loss_and_grads(params, batch, bias_probs=bp)
            if not math.isfinite(batch_loss):
                raise NonFiniteLoss(
                    f"non-finite loss at epoch {epoch}, batch {n_batches} (records {list(idx)[:5]}...)"
                )
            opt.step(params, grads)
            epoch_loss += batch_loss
            n_batches += 1
        valid_f1 = _validation_f1(params, vocab, valid_records, config)
        history.append({
            "epoch": epoch,
            "train_loss": epoch_loss / max(n_batches, 1),
            "valid_macro_f1": valid_f1,
        })
        if valid_f1 > best_f1:
            best_f1 = valid_f1
            best = params.copy()
            best_epoch = epoch
    model = StanceModel(params=best, vocab=vocab, max_len=config.max_len)
    return TrainResult(model=model, history=history, best_epoch=best_epoch, best_valid_f1=best_f1)


def _validation_f1(params, vocab, valid_records, config) -> float:
    preds = []
    golds = []
    for rec in valid_records:
        enc = encode_input(rec, vocab, with_target=config.with_target, max_len=config.max_len)
        _, probs = forward(params, enc)
        preds.append(LABEL_ORDER[int(np.argmax(probs))])
        golds.append(rec.label)
    return macro_metrics(preds, golds, "3-class").macro_f1
