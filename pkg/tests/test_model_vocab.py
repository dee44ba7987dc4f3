import numpy as np
import pytest

from stancekit.core import StanceLabel, StanceRecord
from stancekit.errors import DimensionMismatch, FileUnreadable
from stancekit.model.vocab import (
    PAD_ID,
    RESERVED,
    SEP_ID,
    TGT_CLOSE_ID,
    TGT_OPEN_ID,
    UNK_ID,
    Vocab,
    build_vocab,
    encode_input,
    load_embeddings,
)

F = StanceLabel.FAVOR


def rec(text="i wear a mask", target="mask rules"):
    return StanceRecord(id="r", text=text, target=target, label=F)


def test_reserved_markers_fixed():
    v = build_vocab([rec()])
    assert v.tokens[:5] == RESERVED
    assert (PAD_ID, UNK_ID, TGT_OPEN_ID, TGT_CLOSE_ID, SEP_ID) == (0, 1, 2, 3, 4)


def test_vocab_rejects_missing_reserved_prefix():
    with pytest.raises(ValueError):
        Vocab(tokens=("a", "b"))


def test_build_vocab_deterministic_order():
    records = [rec("b b a", "c"), rec("a c", "b")]
    v1, v2 = build_vocab(records), build_vocab(records)
    assert v1.tokens == v2.tokens
    # frequency descending (b:3, a:2, c:2), then lexicographic tie-break
    assert v1.tokens[5:] == ("b", "a", "c")


def test_build_vocab_min_freq():
    v = build_vocab([rec("a a b", "a")], min_freq=2)
    assert "a" in v.tokens and "b" not in v.tokens
    with pytest.raises(ValueError):
        build_vocab([rec()], min_freq=0)


def test_unknown_token_maps_to_unk():
    v = build_vocab([rec()])
    assert v.index("zzznotthere") == UNK_ID


def test_content_hash_changes_with_tokens():
    a = build_vocab([rec("a", "b")])
    b = build_vocab([rec("a", "c")])
    assert a.content_hash() != b.content_hash()
    assert a.content_hash() == build_vocab([rec("a", "b")]).content_hash()


def test_encode_layout_with_target():
    v = build_vocab([rec()])
    enc = encode_input(rec(), v, with_target=True)
    ids = enc.ids.tolist()
    assert ids[0] == TGT_OPEN_ID
    ts, te = enc.target_span
    assert (ts, te) == (1, 3)  # "mask", "rules"
    assert ids[te] == TGT_CLOSE_ID
    assert ids[te + 1] == SEP_ID
    xs, xe = enc.text_span
    assert xe - xs == 4  # "i wear a mask"
    assert len(ids) == xe


def test_encode_without_target_keeps_markers():
    v = build_vocab([rec()])
    enc = encode_input(rec(), v, with_target=False)
    ids = enc.ids.tolist()
    assert ids[:3] == [TGT_OPEN_ID, TGT_CLOSE_ID, SEP_ID]
    assert enc.target_span == (1, 1)


def test_encode_truncates_text_tail_not_target():
    v = build_vocab([rec()])
    long = rec(text=" ".join(["tok"] * 50))
    enc = encode_input(long, v, max_len=10)
    assert len(enc.ids) == 10
    ts, te = enc.target_span
    assert te - ts == 2  # target survives intact


def test_load_embeddings(tmp_path):
    v = build_vocab([rec("alpha beta", "alpha")])
    path = tmp_path / "vecs.txt"
    path.write_text("alpha 1.0 2.0 3.0\nbeta -1.0 0.5 0.25\nunused 9 9 9\n")
    emb = load_embeddings(path, v, seed=0)
    assert emb.shape == (len(v), 3)
    ai = v.index("alpha")
    assert emb[ai].tolist() == [1.0, 2.0, 3.0]
    # absent tokens (markers included) fall in the seeded uniform range
    assert np.all(np.abs(emb[PAD_ID]) <= 0.05)
    # same seed, same rows
    assert np.array_equal(emb, load_embeddings(path, v, seed=0))
    assert not np.array_equal(emb[PAD_ID], load_embeddings(path, v, seed=1)[PAD_ID])


def test_load_embeddings_ragged_rows(tmp_path):
    v = build_vocab([rec()])
    path = tmp_path / "vecs.txt"
    path.write_text("a 1.0 2.0\nb 1.0 2.0 3.0\n")
    with pytest.raises(DimensionMismatch):
        load_embeddings(path, v)


def test_load_embeddings_dim_mismatch(tmp_path):
    v = build_vocab([rec()])
    path = tmp_path / "vecs.txt"
    path.write_text("a 1.0 2.0\n")
    with pytest.raises(DimensionMismatch):
        load_embeddings(path, v, dim=5)


def test_load_embeddings_unreadable(tmp_path):
    v = build_vocab([rec()])
    with pytest.raises(FileUnreadable):
        load_embeddings(tmp_path / "missing.txt", v)
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    with pytest.raises(FileUnreadable):
        load_embeddings(empty, v)
