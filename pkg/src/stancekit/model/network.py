"""Forward pass, hand-derived gradients, PoE combination, gradient check.

The encoder runs two bidirectional recurrent layers over the encoded
sequence, scores every position by projecting its hidden state together
with the mean-pooled target-span embedding through a tanh layer and a
linear scoring vector, softmax-normalizes the scores into attention
weights, and classifies the attention-weighted summary vector with a
3-way softmax head.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import StanceLabel
from .kernels import bilstm_backward, bilstm_forward
from .params import ModelParams, N_CLASSES
from .vocab import EncodedInput

#: Probability floor applied before any log.
PROB_FLOOR = 1e-12

LABEL_ORDER = (StanceLabel.FAVOR, StanceLabel.AGAINST, StanceLabel.NONE)
LABEL_INDEX = {lab: i for i, lab in enumerate(LABEL_ORDER)}


def softmax(x: np.ndarray) -> np.ndarray:
    z = x - np.max(x)
    e = np.exp(z)
    return e / np.sum(e)


@dataclass
class ForwardCache:
    enc: EncodedInput
    E: np.ndarray
    v_tgt: np.ndarray
    h1_cache: tuple
    h2_cache: tuple
    H2: np.ndarray
    attn_positions: np.ndarray
    attn_M: np.ndarray
    alpha: np.ndarray
    v_enc: np.ndarray
    probs: np.ndarray


def forward(
    params: ModelParams,
    enc: EncodedInput,
    attend_text_only: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """(v_enc, class probabilities) for one encoded input."""
    cache = forward_cache(params, enc, attend_text_only)
    return cache.v_enc, cache.probs


def forward_cache(
    params: ModelParams,
    enc: EncodedInput,
    attend_text_only: bool = False,
) -> ForwardCache:
    ids = enc.ids
    E = params.emb[ids]

    ts, te = enc.target_span
    if te > ts:
        v_tgt = E[ts:te].mean(axis=0)
    else:
        v_tgt = np.zeros(params.emb_dim)

    H1, c1 = bilstm_forward(E, (params.l0f_Wx, params.l0f_Wh, params.l0f_b),
                            (params.l0b_Wx, params.l0b_Wh, params.l0b_b))
    H2, c2 = bilstm_forward(H1, (params.l1f_Wx, params.l1f_Wh, params.l1f_b),
                            (params.l1b_Wx, params.l1b_Wh, params.l1b_b))

    if attend_text_only:
        xs, xe = enc.text_span
        positions = np.arange(xs, xe)
        if positions.size == 0:
            positions = np.arange(len(ids))
    else:
        positions = np.arange(len(ids))

    Hsel = H2[positions]
    M = np.tanh(Hsel @ params.attn_Wh + v_tgt @ params.attn_Wt + params.attn_b)
    alpha = softmax(M @ params.attn_u)
    v_enc = alpha @ Hsel
    probs = softmax(params.head_W @ v_enc + params.head_b)
    return ForwardCache(
        enc=enc, E=E, v_tgt=v_tgt, h1_cache=c1, h2_cache=c2, H2=H2,
        attn_positions=positions, attn_M=M, alpha=alpha, v_enc=v_enc, probs=probs,
    )


def loss(pred: np.ndarray, gold: StanceLabel) -> float:
    """Cross-entropy -log pred[gold] with the probability floor applied."""
    p = max(float(pred[LABEL_INDEX[gold]]), PROB_FLOOR)
    return -float(np.log(p))


def poe_combine(main: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Product-of-experts: softmax of summed log probabilities.

    Used as the training-time prediction when de-biasing; inference uses
    the main distribution alone.
    """
    log_main = np.log(np.maximum(main, PROB_FLOOR))
    log_bias = np.log(np.maximum(bias, PROB_FLOOR))
    return softmax(log_main + log_bias)


def backward(
    params: ModelParams,
    cache: ForwardCache,
    gold: StanceLabel,
    bias_probs: np.ndarray | None = None,
) -> ModelParams:
    """Analytic gradients of the cross-entropy loss for one record.

    With ``bias_probs`` given, the loss is taken on the product-of-experts
    distribution; the bias expert is frozen (no gradient flows into it).
    """
    grads = params.zeros_like()
    one_hot = np.zeros(N_CLASSES)
    one_hot[LABEL_INDEX[gold]] = 1.0

    train_probs = cache.probs if bias_probs is None else poe_combine(cache.probs, bias_probs)
    dlogits = train_probs - one_hot

    grads.head_W += np.outer(dlogits, cache.v_enc)
    grads.head_b += dlogits
    dv_enc = params.head_W.T @ dlogits

    pos = cache.attn_positions
    Hsel = cache.H2[pos]
    dalpha = Hsel @ dv_enc
    ds = cache.alpha * (dalpha - float(cache.alpha @ dalpha))

    M = cache.attn_M
    grads.attn_u += M.T @ ds
    dpre = np.outer(ds, params.attn_u) * (1.0 - M * M)
    dpre_sum = dpre.sum(axis=0)
    grads.attn_Wh += Hsel.T @ dpre
    grads.attn_Wt += np.outer(cache.v_tgt, dpre_sum)
    grads.attn_b += dpre_sum
    dv_tgt = params.attn_Wt @ dpre_sum

    dH2 = np.zeros_like(cache.H2)
    dH2[pos] += np.outer(cache.alpha, dv_enc)
    dH2[pos] += dpre @ params.attn_Wh.T

    dH1, g1f, g1b = bilstm_backward(
        dH2,
        (params.l1f_Wx, params.l1f_Wh, params.l1f_b),
        (params.l1b_Wx, params.l1b_Wh, params.l1b_b),
        cache.h2_cache,
    )
    grads.l1f_Wx += g1f[0]; grads.l1f_Wh += g1f[1]; grads.l1f_b += g1f[2]
    grads.l1b_Wx += g1b[0]; grads.l1b_Wh += g1b[1]; grads.l1b_b += g1b[2]

    dE, g0f, g0b = bilstm_backward(
        dH1,
        (params.l0f_Wx, params.l0f_Wh, params.l0f_b),
        (params.l0b_Wx, params.l0b_Wh, params.l0b_b),
        cache.h1_cache,
    )
    grads.l0f_Wx += g0f[0]; grads.l0f_Wh += g0f[1]; grads.l0f_b += g0f[2]
    grads.l0b_Wx += g0b[0]; grads.l0b_Wh += g0b[1]; grads.l0b_b += g0b[2]

    ts, te = cache.enc.target_span
    if te > ts:
        dE = dE.copy()
        dE[ts:te] += dv_tgt / (te - ts)

    np.add.at(grads.emb, cache.enc.ids, dE)
    return grads


def batch_loss_and_grads(
    params: ModelParams,
    batch: list[tuple[EncodedInput, StanceLabel]],
    bias_probs: list[np.ndarray] | None = None,
) -> tuple[float, ModelParams]:
    """Mean loss and mean gradients over a batch of (encoded, gold) pairs."""
    total = 0.0
    grads = params.zeros_like()
    for k, (enc, gold) in enumerate(batch):
        cache = forward_cache(params, enc)
        bp = bias_probs[k] if bias_probs is not None else None
        train_probs = cache.probs if bp is None else poe_combine(cache.probs, bp)
        total += loss(train_probs, gold)
        g = backward(params, cache, gold, bias_probs=bp)
        for (_, acc), (_, arr) in zip(grads.arrays(), g.arrays()):
            acc += arr
    n = len(batch)
    for _, acc in grads.arrays():
        acc /= n
    return total / n, grads


# --- gradient checking -----------------------------------------------------
#
# The numeric side is an independent plain-numpy re-implementation of the
# forward pass, evaluated in extended precision so the central differences
# resolve even tiny gradient components. It deliberately shares no code
# with the kernel path it checks.

def _ref_lstm(X, Wx, Wh, b):
    T, H = X.shape[0], Wh.shape[0]
    h = np.zeros(H, dtype=X.dtype)
    c = np.zeros(H, dtype=X.dtype)
    out = np.empty((T, H), dtype=X.dtype)
    for t in range(T):
        a = X[t] @ Wx + h @ Wh + b
        i = 1 / (1 + np.exp(-a[:H]))
        f = 1 / (1 + np.exp(-a[H:2 * H]))
        g = np.tanh(a[2 * H:3 * H])
        o = 1 / (1 + np.exp(-a[3 * H:]))
        c = f * c + i * g
        h = o * np.tanh(c)
        out[t] = h
    return out


def _ref_bilstm(X, Wxf, Whf, bf, Wxb, Whb, bb):
    Hf = _ref_lstm(X, Wxf, Whf, bf)
    Hb = _ref_lstm(X[::-1].copy(), Wxb, Whb, bb)[::-1]
    return np.concatenate([Hf, Hb], axis=1)


def _ref_softmax(x):
    z = x - np.max(x)
    e = np.exp(z)
    return e / np.sum(e)


def _ref_batch_loss(p: ModelParams, batch) -> np.ndarray:
    dtype = p.emb.dtype
    total = np.zeros((), dtype=dtype)
    for enc, gold in batch:
        E = p.emb[enc.ids]
        ts, te = enc.target_span
        v_tgt = E[ts:te].mean(axis=0) if te > ts else np.zeros(p.emb.shape[1], dtype=dtype)
        H1 = _ref_bilstm(E, p.l0f_Wx, p.l0f_Wh, p.l0f_b, p.l0b_Wx, p.l0b_Wh, p.l0b_b)
        H2 = _ref_bilstm(H1, p.l1f_Wx, p.l1f_Wh, p.l1f_b, p.l1b_Wx, p.l1b_Wh, p.l1b_b)
        M = np.tanh(H2 @ p.attn_Wh + v_tgt @ p.attn_Wt + p.attn_b)
        alpha = _ref_softmax(M @ p.attn_u)
        v_enc = alpha @ H2
        probs = _ref_softmax(p.head_W @ v_enc + p.head_b)
        total = total - np.log(np.maximum(probs[LABEL_INDEX[gold]], PROB_FLOOR))
    return total / len(batch)


def grad_check(
    params: ModelParams,
    batch: list[tuple[EncodedInput, StanceLabel]],
    epsilon: float = 1e-4,
    n_samples: int = 200,
    seed: int = 0,
    corrupt: bool = False,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Checks a seeded random subset of at least ``n_samples`` parameters
    (all of them when the model is smaller). Central differences are
    Richardson-extrapolated (steps epsilon and 2*epsilon) on the
    extended-precision reference forward. ``corrupt=True`` scales the
    largest checked analytic component as a negative control.
    Zero-sample requests return 0 by convention.
    """
    if n_samples <= 0:
        return 0.0
    _, grads = batch_loss_and_grads(params, batch)
    g_analytic = grads.to_vector()

    vec = params.to_vector().astype(np.longdouble)
    rng = np.random.default_rng(seed)
    n_check = min(n_samples, vec.size)
    indices = rng.choice(vec.size, size=n_check, replace=False)

    if corrupt:
        g_analytic = g_analytic.copy()
        worst = indices[int(np.argmax(np.abs(g_analytic[indices])))]
        g_analytic[worst] = g_analytic[worst] * 3.0 + 1.0

    def central(idx: int, step) -> np.ndarray:
        v_plus = vec.copy(); v_plus[idx] += step
        v_minus = vec.copy(); v_minus[idx] -= step
        return (
            _ref_batch_loss(params.from_vector(v_plus), batch)
            - _ref_batch_loss(params.from_vector(v_minus), batch)
        ) / (2 * step)

    h = np.longdouble(epsilon)
    max_err = 0.0
    for idx in indices:
        g_num = float((4 * central(idx, h) - central(idx, 2 * h)) / 3)
        g_ana = float(g_analytic[idx])
        err = abs(g_ana - g_num) / max(1e-8, abs(g_ana) + abs(g_num))
        max_err = max(max_err, err)
    return max_err
