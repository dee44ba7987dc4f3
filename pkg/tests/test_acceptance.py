"""End-to-end acceptance suite.

Each test asserts one contract of the toolkit at its stated tolerance:
label algebra, metric and kappa oracles, gradient checking, KL
properties, the synthetic cross-target benchmark (training-effect,
target-dependency, and ablation directions), None-extension, corpus
statistics against official files (skipped when absent), and
crash-restart replay of the annotation service.

Set ``STANCEKIT_CORPORA_DIR`` to a directory holding the official corpus
files (one subdirectory per adapter config name) to enable the corpus
statistics test.
"""

import json
import os
import random
import signal
import socket
import subprocess
import sys
import time
from collections import Counter
from fractions import Fraction
from pathlib import Path

import pytest

from stancekit.core import StanceLabel, StanceRecord, compose_label, derive_alignment
from stancekit.corpus import CorpusAdapterConfig, Dataset, extend_none_subset, ingest, stats
from stancekit.enrich import cohen_kappa, detect_explicit_mention
from stancekit.errors import UndefinedAlignment, UndefinedComposition
from stancekit.eval import kl_target_dependency, macro_metrics, run_ablation
from stancekit.model.network import forward, grad_check
from stancekit.model.params import init_params
from stancekit.model.training import TrainConfig, train
from stancekit.model.vocab import build_vocab, encode_input
from stancekit.synth import SynthConfig, generate

F, A, N = StanceLabel.FAVOR, StanceLabel.AGAINST, StanceLabel.NONE
LABELS = [F, A, N]


# --- 1. label algebra ---------------------------------------------------------

def test_acceptance_label_algebra():
    table = {
        (F, 1): F, (F, -1): A, (F, 0): N,
        (A, 1): A, (A, -1): F, (A, 0): N,
        (N, 0): N,
    }
    for (explicit, alignment), expected in table.items():
        assert compose_label(explicit, alignment) is expected
        assert derive_alignment(explicit, expected) == alignment
    for explicit, alignment in [(N, 1), (N, -1)]:
        with pytest.raises(UndefinedComposition):
            compose_label(explicit, alignment)
    for target in (F, A):
        with pytest.raises(UndefinedAlignment):
            derive_alignment(N, target)
    # round trip over every defined input
    for explicit in (F, A):
        for alignment in (-1, 0, 1):
            assert derive_alignment(explicit, compose_label(explicit, alignment)) == alignment


# --- 2. metric oracle ---------------------------------------------------------

def _brute_macro(preds, golds, classes):
    stats_ = []
    for lab in classes:
        tp = sum(1 for p, g in zip(preds, golds) if p is lab and g is lab)
        fp = sum(1 for p, g in zip(preds, golds) if p is lab and g is not lab)
        fn = sum(1 for p, g in zip(preds, golds) if p is not lab and g is lab)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        stats_.append((prec, rec, f1))
    k = len(classes)
    return tuple(sum(s[i] for s in stats_) / k for i in range(3))


def test_acceptance_metric_oracle_equivalence():
    rng = random.Random(2024)
    for _ in range(500):
        n = rng.randint(1, 50)
        preds = [rng.choice(LABELS) for _ in range(n)]
        golds = [rng.choice(LABELS) for _ in range(n)]
        report = macro_metrics(preds, golds, "3-class")
        assert (report.macro_precision, report.macro_recall, report.macro_f1) == \
            _brute_macro(preds, golds, LABELS)
        polar = [(p, g) for p, g in zip(preds, golds) if g is not N]
        if polar:
            report2 = macro_metrics(preds, golds, "2-class")
            assert (report2.macro_precision, report2.macro_recall, report2.macro_f1) == \
                _brute_macro([p for p, _ in polar], [g for _, g in polar], [F, A])


# --- 3. kappa oracle ----------------------------------------------------------

def _brute_kappa(a, b):
    n = len(a)
    p_o = Fraction(sum(1 for x, y in zip(a, b) if x == y), n)
    ca, cb = Counter(a), Counter(b)
    p_e = sum(Fraction(ca[l], n) * Fraction(cb[l], n) for l in set(ca) | set(cb))
    return 1.0 if p_e == 1 else float((p_o - p_e) / (1 - p_e))


def test_acceptance_kappa_oracle():
    fixtures = [
        ([F, A, N], [F, A, N], 1.0),                 # identity
        ([F, F, A, A], [F, A, A, F], 0.0),           # chance level
        ([F, F], [A, A], 0.0),                       # disjoint marginals
        ([F, A, N, F], [F, A, N, A], 7 / 11),        # hand-computed
        ([F, F, F], [F, F, F], 1.0),                 # degenerate p_e = 1
    ]
    for a, b, expected in fixtures:
        assert abs(cohen_kappa(a, b) - expected) < 1e-12
    rng = random.Random(11)
    for _ in range(200):
        n = rng.randint(1, 40)
        a = [rng.choice(LABELS) for _ in range(n)]
        b = [rng.choice(LABELS) for _ in range(n)]
        assert cohen_kappa(a, b) == pytest.approx(_brute_kappa(a, b), abs=1e-12)


# --- 4. gradient check --------------------------------------------------------

def _random_batch(rng_seed, n_records=2):
    rng = random.Random(rng_seed)
    words = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf"]
    records = []
    for i in range(max(n_records, 3)):
        text = " ".join(rng.choice(words) for _ in range(rng.randint(4, 8)))
        target = " ".join(rng.sample(words, 2))
        records.append(StanceRecord(id=f"g{i}", text=text, target=target,
                                    label=rng.choice(LABELS)))
    vocab = build_vocab(records)
    params = init_params(len(vocab), emb_dim=6, hidden=5, seed=rng_seed)
    batch = [(encode_input(r, vocab, max_len=24), r.label) for r in records[:n_records]]
    return params, batch


def test_acceptance_gradient_check_20_seeds():
    worst = 0.0
    for seed in range(20):
        params, batch = _random_batch(seed)
        err = grad_check(params, batch, n_samples=100, seed=seed)
        worst = max(worst, err)
    assert worst < 1e-6, f"max relative gradient error {worst:.3e}"


def test_acceptance_gradient_check_negative_control():
    params, batch = _random_batch(0)
    assert grad_check(params, batch, n_samples=100, seed=0, corrupt=True) > 1e-2


# --- 5. KL properties ---------------------------------------------------------

class _ParamsModel:
    """predict_proba adapter around raw parameters for KL analysis."""

    def __init__(self, params, vocab, attend_text_only=False, max_len=32):
        self.params = params
        self.vocab = vocab
        self.attend_text_only = attend_text_only
        self.max_len = max_len

    def predict_proba(self, rec, with_target=True):
        enc = encode_input(rec, self.vocab, with_target=with_target,
                           max_len=self.max_len)
        return forward(self.params, enc, attend_text_only=self.attend_text_only)[1]


def test_acceptance_kl_nonnegative_1000_draws():
    rng = random.Random(5)
    words = ["zeta", "eta", "theta", "iota", "kappa", "mu", "nu"]
    total_draws = 0
    for model_seed in range(100):
        records = []
        for i in range(10):
            text = " ".join(rng.choice(words) for _ in range(5))
            target = rng.choice(words)
            records.append(StanceRecord(id=f"k{model_seed}:{i}", text=text,
                                        target=target, label=rng.choice(LABELS)))
        vocab = build_vocab(records)
        params = init_params(len(vocab), emb_dim=5, hidden=4, seed=model_seed)
        model = _ParamsModel(params, vocab)
        for rec in records:
            p = model.predict_proba(rec, with_target=True)
            q = model.predict_proba(rec, with_target=False)
            from stancekit.eval import kl_divergence

            assert kl_divergence(p, q) >= 0.0
            total_draws += 1
        assert kl_target_dependency(model, records) >= 0.0
    assert total_draws == 1000


def test_acceptance_kl_exactly_zero_constructed_case():
    # Construction: severed recurrence (all recurrent weights zero, forget
    # gates saturated shut) makes every hidden state a function of its own
    # input token only; target-token embedding rows are zeroed and
    # attention is restricted to the text span, so the target slot
    # provably cannot influence the prediction.
    records = [
        StanceRecord(id=f"z{i}", text="lorem ipsum dolor sit amet",
                     target="special token target", label=F)
        for i in range(5)
    ]
    vocab = build_vocab(records)
    params = init_params(len(vocab), emb_dim=6, hidden=5, seed=0)
    H = params.hidden
    for name, arr in params.arrays():
        if name.endswith("_Wh"):
            arr[:] = 0.0
        if name.endswith("_Wx"):
            arr[:, H:2 * H] = 0.0  # forget-gate columns
        if name.endswith("_b") and arr.shape == (4 * H,):
            arr[H:2 * H] = -500.0  # sigmoid(-500) == 0.0 in float64
    for tok in ("special", "token", "target", "<t>", "</t>"):
        params.emb[vocab.index(tok)] = 0.0
    model = _ParamsModel(params, vocab, attend_text_only=True)
    value = kl_target_dependency(model, records)
    assert abs(value) < 1e-12


# --- 6-8. synthetic benchmark analogs ----------------------------------------

SYNTH_TRAIN_CONFIG = dict(epochs=20, hidden=24, emb_dim=24, batch_size=32,
                          learning_rate=3e-3, max_len=32, lr_decay=0.95)


@pytest.fixture(scope="module")
def synth_bench():
    return generate(SynthConfig(n_train=2000, n_valid=300, n_test=600,
                                n_enriched=1500, seed=0))


def _test_f1(model, test_records):
    preds = [model.predict(r) for r in test_records]
    return macro_metrics(preds, [r.label for r in test_records], "3-class").macro_f1


@pytest.fixture(scope="module")
def synth_models(synth_bench):
    """Base and enriched-trained models for seeds 0-2, shared across tests."""
    out = {}
    for seed in range(3):
        config = TrainConfig(seed=seed, **SYNTH_TRAIN_CONFIG)
        base = train(synth_bench.train, synth_bench.valid, config).model
        enriched = train(synth_bench.train + synth_bench.enriched_pool,
                         synth_bench.valid, config).model
        out[seed] = (base, enriched)
    return out


def test_acceptance_synthetic_cross_target_gain(synth_bench, synth_models):
    base, enriched = synth_models[0]
    f1_base = _test_f1(base, synth_bench.test)
    f1_enriched = _test_f1(enriched, synth_bench.test)
    gain = f1_enriched - f1_base
    assert gain >= 0.10, (
        f"enriched {f1_enriched:.4f} vs base {f1_base:.4f}: gain {gain:.4f} < 0.10"
    )


def test_acceptance_kl_grows_with_enrichment_3_seeds(synth_bench, synth_models):
    for seed, (base, enriched) in synth_models.items():
        kl_base = kl_target_dependency(base, synth_bench.test)
        kl_enriched = kl_target_dependency(enriched, synth_bench.test)
        assert kl_enriched > kl_base, (
            f"seed {seed}: KL enriched {kl_enriched:.4f} <= base {kl_base:.4f}"
        )


def test_acceptance_ablation_curve(synth_bench):
    config = TrainConfig(seed=0, **SYNTH_TRAIN_CONFIG)
    curve = run_ablation(synth_bench.train, synth_bench.valid,
                         synth_bench.enriched_pool, [0, 150, 300, 600], config,
                         {"synthetic": synth_bench.test})
    f1 = {p.enriched_size: p.reports["synthetic"].macro_f1 for p in curve.points}
    assert set(f1) == {0, 150, 300, 600}
    assert f1[600] >= f1[0] + 0.05, f"size-600 {f1[600]:.4f} vs size-0 {f1[0]:.4f}"


# --- 9. None-extension contract -----------------------------------------------

def test_acceptance_none_extension_contract():
    n = 2914
    rng = random.Random(0)
    words = ["apple", "river", "stone", "cloud", "maple", "ember", "frost"]
    records = []
    for i in range(n):
        text = " ".join(rng.choice(words) for _ in range(6))
        target = f"topic{i % 97} {rng.choice(words)}x"
        records.append(StanceRecord(id=f"c{i}", text=text, target=target,
                                    label=rng.choice(LABELS)))
    ds = Dataset(name="contract", records=tuple(records))
    out1 = extend_none_subset(ds, fraction=0.2, seed=13)
    out2 = extend_none_subset(ds, fraction=0.2, seed=13)
    added = out1.records[n:]
    assert len(added) == 582
    assert all(r.label is N for r in added)
    hosts = {r.id: r for r in records}
    for r in added:
        host = hosts[r.id.rsplit("-none", 1)[0]]
        assert not detect_explicit_mention(host.text, r.target)
    assert [r.to_dict() for r in out1.records] == [r.to_dict() for r in out2.records]


# --- 10. corpus statistics (official files required) ----------------------------

TABLE_COUNTS = {
    "semeval16-taskA": {"train": 2914, "valid": 0, "test": 1249},
    "semeval16-taskB": {"train": 0, "valid": 0, "test": 707},
    "pstance": {"train": 19228, "valid": 2462, "test": 2374},
    "vast": {"train": 13477, "valid": 2062, "test": 3006},
    "tweet-covid": {"train": 4533, "valid": 800, "test": 800},
}


@pytest.mark.parametrize("corpus", sorted(TABLE_COUNTS))
def test_acceptance_corpus_stats(corpus):
    root = os.environ.get("STANCEKIT_CORPORA_DIR")
    if not root:
        pytest.skip("STANCEKIT_CORPORA_DIR not set; official corpus files absent")
    source = Path(root) / corpus
    if not source.is_dir():
        pytest.skip(f"corpus files for {corpus} not present under {root}")
    import yaml

    config_path = Path(__file__).resolve().parents[1] / "configs" / f"{corpus}.yaml"
    with open(config_path, encoding="utf-8") as fh:
        adapter = CorpusAdapterConfig.from_dict(yaml.safe_load(fh))
    report = stats(ingest(source, adapter))
    assert report.split_counts == TABLE_COUNTS[corpus]


# --- 11. service crash-restart replay ------------------------------------------

def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _wait_for(url, timeout=20.0):
    import httpx

    deadline = time.time() + timeout
    while time.time() < deadline:
        try:
            httpx.get(url, timeout=1.0)
            return
        except Exception:
            time.sleep(0.1)
    raise TimeoutError(f"service at {url} did not come up")


def _spawn_service(batch_path, log_path, port):
    return subprocess.Popen(
        [sys.executable, "-m", "stancekit.cli", "serve",
         "--batch", str(batch_path), "--log", str(log_path),
         "--port", str(port)],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL,
    )


def test_acceptance_service_replay_after_kill(tmp_path):
    import httpx

    from stancekit.service import BatchItem, write_batch_jsonl
    from stancekit.core import ExplicitObject

    items = []
    for i in range(6):
        text = f"we love the delta{i} act yet hate the omega{i} act"
        rec = StanceRecord(id=f"s{i}", text=text, target=f"sigma{i} bill",
                           label=F if i % 2 == 0 else A)
        d = text.index(f"delta{i}")
        o = text.index(f"omega{i}")
        items.append(BatchItem(record=rec, candidates=(
            ExplicitObject(f"delta{i} act", d, d + len(f"delta{i} act")),
            ExplicitObject(f"omega{i} act", o, o + len(f"omega{i} act")),
        )))
    batch_path = tmp_path / "batch.jsonl"
    log_path = tmp_path / "events.jsonl"
    write_batch_jsonl(batch_path, items)

    port = _free_port()
    base = f"http://127.0.0.1:{port}/api/v1"
    proc = _spawn_service(batch_path, log_path, port)
    try:
        _wait_for(f"{base}/progress")
        sids = {}
        for ann in ("ann1", "ann2"):
            sids[ann] = httpx.post(f"{base}/sessions",
                                   json={"annotator_id": ann}).json()["session_id"]
        votes = [("ann1", "s0", "delta0 act", "AGAINST"),
                 ("ann2", "s0", "delta0 act", "AGAINST"),
                 ("ann1", "s1", "omega1 act", "FAVOR"),
                 ("ann2", "s1", "omega1 act", "NONE")]
        for ann, rec_id, surface, label in votes:
            r = httpx.post(f"{base}/sessions/{sids[ann]}/votes",
                           json={"record_id": rec_id, "object_surface": surface,
                                 "label": label})
            assert r.status_code == 200, r.text
        pre_progress = httpx.get(f"{base}/progress").content
        pre_agreement = httpx.get(f"{base}/agreement").content
        pre_export = httpx.get(f"{base}/export").content

        proc.send_signal(signal.SIGKILL)
        proc.wait(timeout=10)

        port2 = _free_port()
        base2 = f"http://127.0.0.1:{port2}/api/v1"
        proc = _spawn_service(batch_path, log_path, port2)
        _wait_for(f"{base2}/progress")

        # replayed state is byte-identical to the pre-kill snapshot
        assert httpx.get(f"{base2}/progress").content == pre_progress
        assert httpx.get(f"{base2}/agreement").content == pre_agreement
        assert httpx.get(f"{base2}/export").content == pre_export

        # the revived service keeps accepting and logging subsequent votes
        r = httpx.post(f"{base2}/sessions/{sids['ann1']}/votes",
                       json={"record_id": "s2", "object_surface": "delta2 act",
                             "label": "NONE"})
        assert r.status_code == 200
        assert json.loads(httpx.get(f"{base2}/progress").content)["votes"] == 5
    finally:
        if proc.poll() is None:
            proc.kill()
            proc.wait(timeout=10)
