"""Recurrent-cell kernels: the training hot loops.

Both the JIT-compiled and the plain-numpy path run the same function
bodies; results agree to within a few ULPs (the JIT links its own libm
for exp/tanh). Set STANCEKIT_NUMBA=0 to force the pure-numpy fallback
(e.g. for debugging or on platforms where numba is unavailable);
``benchmarks/bench_kernels.py`` compares the two. Within one selected
path, everything is bit-deterministic.

Gate layout per timestep is [i, f, g, o] packed into one 4H vector:
    a_t = x_t Wx + h_{t-1} Wh + b
    c_t = sigmoid(a_i) * tanh(a_g) + sigmoid(a_f) * c_{t-1}
    h_t = sigmoid(a_o) * tanh(c_t)
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("STANCEKIT_NUMBA", "1")
NUMBA_REQUESTED = _env != "0"
NUMBA_ENABLED = False

if NUMBA_REQUESTED:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):  # type: ignore[misc]
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn


def _lstm_forward_impl(X, Wx, Wh, b):
    T = X.shape[0]
    H = Wh.shape[0]
    G = np.empty((T, 4 * H))
    C = np.empty((T, H))
    Hout = np.empty((T, H))
    h = np.zeros(H)
    c = np.zeros(H)
    for t in range(T):
        a = np.dot(X[t], Wx) + np.dot(h, Wh) + b
        i = 1.0 / (1.0 + np.exp(-a[:H]))
        f = 1.0 / (1.0 + np.exp(-a[H:2 * H]))
        g = np.tanh(a[2 * H:3 * H])
        o = 1.0 / (1.0 + np.exp(-a[3 * H:]))
        c = f * c + i * g
        h = o * np.tanh(c)
        G[t, :H] = i
        G[t, H:2 * H] = f
        G[t, 2 * H:3 * H] = g
        G[t, 3 * H:] = o
        C[t] = c
        Hout[t] = h
    return Hout, G, C


def _lstm_backward_impl(dH, X, Wx, Wh, G, C, Hout):
    T = X.shape[0]
    H = Wh.shape[0]
    dX = np.zeros_like(X)
    dWx = np.zeros_like(Wx)
    dWh = np.zeros_like(Wh)
    db = np.zeros(4 * H)
    dh_next = np.zeros(H)
    dc_next = np.zeros(H)
    da = np.empty(4 * H)
    for t in range(T - 1, -1, -1):
        i = G[t, :H]
        f = G[t, H:2 * H]
        g = G[t, 2 * H:3 * H]
        o = G[t, 3 * H:]
        c = C[t]
        c_prev = C[t - 1] if t > 0 else np.zeros(H)
        h_prev = Hout[t - 1] if t > 0 else np.zeros(H)
        tanh_c = np.tanh(c)
        dh = dH[t] + dh_next
        dc = dh * o * (1.0 - tanh_c * tanh_c) + dc_next
        da[:H] = dc * g * i * (1.0 - i)
        da[H:2 * H] = dc * c_prev * f * (1.0 - f)
        da[2 * H:3 * H] = dc * i * (1.0 - g * g)
        da[3 * H:] = dh * tanh_c * o * (1.0 - o)
        dX[t] = np.dot(Wx, da)
        dWx += np.outer(X[t], da)
        dWh += np.outer(h_prev, da)
        db += da
        dh_next = np.dot(Wh, da)
        dc_next = dc * f
    return dX, dWx, dWh, db


#: Pure-python references, kept callable for the benchmark and for
#: bit-identity checks against the compiled versions.
lstm_forward_py = _lstm_forward_impl
lstm_backward_py = _lstm_backward_impl

if NUMBA_ENABLED:
    lstm_forward = njit(cache=True)(_lstm_forward_impl)
    lstm_backward = njit(cache=True)(_lstm_backward_impl)
else:
    lstm_forward = _lstm_forward_impl
    lstm_backward = _lstm_backward_impl


def bilstm_forward(X, params_fw, params_bw):
    """Concatenated forward/backward hidden states for one layer.

    ``params_*`` are (Wx, Wh, b) triples. Returns (H2dir, cache) where
    H2dir is (T, 2H) and cache holds what the backward pass needs.
    """
    Xr = X[::-1].copy()
    Hf, Gf, Cf = lstm_forward(X, *params_fw)
    Hb_r, Gb, Cb = lstm_forward(Xr, *params_bw)
    Hb = Hb_r[::-1].copy()
    out = np.concatenate([Hf, Hb], axis=1)
    cache = (X, Xr, Hf, Gf, Cf, Hb_r, Gb, Cb)
    return out, cache


def bilstm_backward(dOut, params_fw, params_bw, cache):
    """Gradients for one bidirectional layer; returns (dX, grads_fw, grads_bw)."""
    X, Xr, Hf, Gf, Cf, Hb_r, Gb, Cb = cache
    H = Hf.shape[1]
    dHf = np.ascontiguousarray(dOut[:, :H])
    dHb_r = np.ascontiguousarray(dOut[::-1, H:])
    dXf, dWxf, dWhf, dbf = lstm_backward(dHf, X, params_fw[0], params_fw[1], Gf, Cf, Hf)
    dXb_r, dWxb, dWhb, dbb = lstm_backward(dHb_r, Xr, params_bw[0], params_bw[1], Gb, Cb, Hb_r)
    dX = dXf + dXb_r[::-1]
    return dX, (dWxf, dWhf, dbf), (dWxb, dWhb, dbb)
