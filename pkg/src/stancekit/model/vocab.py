"""Vocabulary, input encoding, and pretrained embedding loading."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import StanceRecord
from ..errors import DimensionMismatch, FileUnreadable
from ..text import tokenize

PAD, UNK, TGT_OPEN, TGT_CLOSE, SEP = "<pad>", "<unk>", "<t>", "</t>", "<sep>"
RESERVED = (PAD, UNK, TGT_OPEN, TGT_CLOSE, SEP)

PAD_ID, UNK_ID, TGT_OPEN_ID, TGT_CLOSE_ID, SEP_ID = range(5)


@dataclass(frozen=True)
class Vocab:
    """Dense token -> index lookup with fixed reserved marker indices."""

    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        if tuple(self.tokens[:len(RESERVED)]) != RESERVED:
            raise ValueError("vocab must start with the reserved marker tokens")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def index(self, token: str) -> int:
        return self._index.get(token, UNK_ID)

    def content_hash(self) -> str:
        h = hashlib.sha256()
        for t in self.tokens:
            h.update(t.encode("utf-8"))
            h.update(b"\x00")
        return h.hexdigest()


def build_vocab(records, min_freq: int = 1) -> Vocab:
    """Vocabulary over text and target tokens of ``records``.

    Order is deterministic: reserved markers first, then frequency
    descending with lexicographic tie-break.
    """
    if min_freq < 1:
        raise ValueError(f"min_freq must be >= 1, got {min_freq}")
    freq: dict[str, int] = {}
    for rec in records:
        for tok in tokenize(rec.text) + tokenize(rec.target):
            freq[tok] = freq.get(tok, 0) + 1
    kept = sorted(
        (t for t, c in freq.items() if c >= min_freq),
        key=lambda t: (-freq[t], t),
    )
    return Vocab(tokens=RESERVED + tuple(kept))


@dataclass(frozen=True)
class EncodedInput:
    """Index sequence plus the spans the encoder needs.

    ``target_span`` covers the target tokens between the markers (empty
    when encoding without a target); ``text_span`` covers the text tokens
    after the separator. Both are [start, end) positions into ``ids``.
    """

    ids: np.ndarray
    target_span: tuple[int, int]
    text_span: tuple[int, int]


def encode_input(
    rec: StanceRecord,
    vocab: Vocab,
    with_target: bool = True,
    max_len: int = 128,
) -> EncodedInput:
    """[<t> target </t> <sep> text] indices; the target slot is empty without a target.

    Over-length inputs are truncated at the tail of the text so the
    target slot is never cut.
    """
    target_toks = tokenize(rec.target) if with_target else []
    text_toks = tokenize(rec.text)
    head = [TGT_OPEN_ID] + [vocab.index(t) for t in target_toks] + [TGT_CLOSE_ID, SEP_ID]
    budget = max(0, max_len - len(head))
    body = [vocab.index(t) for t in text_toks[:budget]]
    ids = np.asarray(head + body, dtype=np.int64)
    return EncodedInput(
        ids=ids,
        target_span=(1, 1 + len(target_toks)),
        text_span=(len(head), len(head) + len(body)),
    )


def load_embeddings(path, vocab: Vocab, dim: Optional[int] = None, seed: int = 0) -> np.ndarray:
    """|vocab| x D matrix from a word-vector text file (token then D reals per line).

    In-file vectors are copied exactly; tokens missing from the file
    (reserved markers included) get seeded uniform(-0.05, 0.05) rows.
    """
    vectors: dict[str, np.ndarray] = {}
    file_dim = None
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise FileUnreadable(f"cannot open embedding file {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2:
                continue
            token, values = parts[0], parts[1:]
            if file_dim is None:
                file_dim = len(values)
                if dim is not None and file_dim != dim:
                    raise DimensionMismatch(
                        f"{path}:{lineno}: file dimension {file_dim} != requested {dim}"
                    )
            elif len(values) != file_dim:
                raise DimensionMismatch(
                    f"{path}:{lineno}: row has {len(values)} values, expected {file_dim}"
                )
            if token in vocab._index:
                vectors[token] = np.asarray([float(v) for v in values], dtype=np.float64)
    if file_dim is None:
        raise FileUnreadable(f"embedding file {path} contains no vectors")
    rng = np.random.default_rng(seed)
    out = np.empty((len(vocab), file_dim), dtype=np.float64)
    for i, token in enumerate(vocab.tokens):
        if token in vectors:
            out[i] = vectors[token]
        else:
            out[i] = rng.uniform(-0.05, 0.05, size=file_dim)
    return out
