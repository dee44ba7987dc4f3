"""Model parameters: layout, initialization, flattening, checkpoints."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from typing import Iterator

import numpy as np

from ..errors import ConfigError

CHECKPOINT_VERSION = 1

N_CLASSES = 3


@dataclass
class ModelParams:
    """All trainable arrays of the target-aware classifier.

    Two bidirectional recurrent layers (hidden size H per direction),
    a linear target-attention scorer, and a 3-way softmax head.
    """

    emb: np.ndarray          # (V, D)
    l0f_Wx: np.ndarray       # (D, 4H)
    l0f_Wh: np.ndarray       # (H, 4H)
    l0f_b: np.ndarray        # (4H,)
    l0b_Wx: np.ndarray
    l0b_Wh: np.ndarray
    l0b_b: np.ndarray
    l1f_Wx: np.ndarray       # (2H, 4H)
    l1f_Wh: np.ndarray
    l1f_b: np.ndarray
    l1b_Wx: np.ndarray
    l1b_Wh: np.ndarray
    l1b_b: np.ndarray
    attn_Wh: np.ndarray      # (2H, H) hidden-state projection
    attn_Wt: np.ndarray      # (D, H) target projection
    attn_b: np.ndarray       # (H,)
    attn_u: np.ndarray       # (H,) scoring vector
    head_W: np.ndarray       # (3, 2H)
    head_b: np.ndarray       # (3,)

    @property
    def hidden(self) -> int:
        return self.l0f_Wh.shape[0]

    @property
    def emb_dim(self) -> int:
        return self.emb.shape[1]

    @property
    def vocab_size(self) -> int:
        return self.emb.shape[0]

    def arrays(self) -> Iterator[tuple[str, np.ndarray]]:
        for f in fields(self):
            yield f.name, getattr(self, f.name)

    def check_finite(self) -> None:
        for name, arr in self.arrays():
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"parameter {name} contains non-finite entries")

    # --- flat-vector view (gradient checking, optimizers) ------------------

    def to_vector(self) -> np.ndarray:
        return np.concatenate([arr.ravel() for _, arr in self.arrays()])

    def from_vector(self, vec: np.ndarray) -> "ModelParams":
        out = {}
        pos = 0
        for name, arr in self.arrays():
            n = arr.size
            out[name] = vec[pos:pos + n].reshape(arr.shape).copy()
            pos += n
        if pos != vec.size:
            raise ValueError(f"vector has {vec.size} entries, parameters need {pos}")
        return ModelParams(**out)

    def zeros_like(self) -> "ModelParams":
        return ModelParams(**{name: np.zeros_like(arr) for name, arr in self.arrays()})

    def copy(self) -> "ModelParams":
        return ModelParams(**{name: arr.copy() for name, arr in self.arrays()})

    @property
    def size(self) -> int:
        return sum(arr.size for _, arr in self.arrays())


def init_params(vocab_size: int, emb_dim: int, hidden: int, seed: int,
                emb: np.ndarray | None = None) -> ModelParams:
    """Seeded uniform initialization; forget-gate biases start at 1."""
    rng = np.random.default_rng(seed)
    H = hidden

    def u(*shape, scale=None):
        scale = scale if scale is not None else 1.0 / np.sqrt(max(shape[-1], 1))
        return rng.uniform(-scale, scale, size=shape)

    def lstm_b():
        b = np.zeros(4 * H)
        b[H:2 * H] = 1.0
        return b

    if emb is None:
        emb = rng.uniform(-0.05, 0.05, size=(vocab_size, emb_dim))
    else:
        emb = np.asarray(emb, dtype=np.float64).copy()
        if emb.shape != (vocab_size, emb_dim):
            raise ConfigError(f"embedding shape {emb.shape} != ({vocab_size}, {emb_dim})")
    params = ModelParams(
        emb=emb,
        l0f_Wx=u(emb_dim, 4 * H), l0f_Wh=u(H, 4 * H), l0f_b=lstm_b(),
        l0b_Wx=u(emb_dim, 4 * H), l0b_Wh=u(H, 4 * H), l0b_b=lstm_b(),
        l1f_Wx=u(2 * H, 4 * H), l1f_Wh=u(H, 4 * H), l1f_b=lstm_b(),
        l1b_Wx=u(2 * H, 4 * H), l1b_Wh=u(H, 4 * H), l1b_b=lstm_b(),
        attn_Wh=u(2 * H, H), attn_Wt=u(emb_dim, H), attn_b=np.zeros(H), attn_u=u(H),
        head_W=u(N_CLASSES, 2 * H), head_b=np.zeros(N_CLASSES),
    )
    return params


def save_checkpoint(path, params: ModelParams, vocab_hash: str, meta: dict | None = None) -> None:
    """Versioned npz container: shapes, vocab hash, and the flat arrays."""
    payload = {name: arr for name, arr in params.arrays()}
    header = {
        "version": CHECKPOINT_VERSION,
        "vocab_hash": vocab_hash,
        "hidden": params.hidden,
        "emb_dim": params.emb_dim,
        "vocab_size": params.vocab_size,
        "meta": meta or {},
    }
    payload["__header__"] = np.frombuffer(json.dumps(header).encode("utf-8"), dtype=np.uint8)
    np.savez(path, **payload)


def load_checkpoint(path) -> tuple[ModelParams, dict]:
    with np.load(path) as data:
        header = json.loads(bytes(data["__header__"]).decode("utf-8"))
        if header.get("version") != CHECKPOINT_VERSION:
            raise ConfigError(f"unsupported checkpoint version {header.get('version')!r}")
        arrays = {k: data[k] for k in data.files if k != "__header__"}
    return ModelParams(**arrays), header
