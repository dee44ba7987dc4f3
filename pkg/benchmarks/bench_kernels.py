"""Compare the JIT-compiled recurrent kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Prints per-kernel wall
times and the speedup ratio, and asserts that both paths agree within a
tight tolerance (same function bodies; the JIT's libm may differ from
numpy's by a few ULPs on exp/tanh).
"""

from __future__ import annotations

import time

import numpy as np

from stancekit.model.kernels import (
    NUMBA_ENABLED,
    lstm_backward,
    lstm_backward_py,
    lstm_forward,
    lstm_forward_py,
)


def bench(fn, args, repeats: int = 20) -> float:
    fn(*args)  # warm-up (triggers compilation on the JIT path)
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def main() -> None:
    rng = np.random.default_rng(0)
    T, D, H = 96, 64, 64
    X = rng.standard_normal((T, D))
    Wx = rng.standard_normal((D, 4 * H)) * 0.1
    Wh = rng.standard_normal((H, 4 * H)) * 0.1
    b = rng.standard_normal(4 * H) * 0.1
    dH = rng.standard_normal((T, H))

    Hout, G, C = lstm_forward_py(X, Wx, Wh, b)
    fwd_args = (X, Wx, Wh, b)
    bwd_args = (dH, X, Wx, Wh, G, C, Hout)

    if not NUMBA_ENABLED:
        print("JIT path disabled (STANCEKIT_NUMBA=0 or numba unavailable); "
              "nothing to compare.")
        return

    for a, b_ in zip(lstm_forward(*fwd_args), lstm_forward_py(*fwd_args)):
        np.testing.assert_allclose(a, b_, rtol=1e-12, atol=1e-12)
    for a, b_ in zip(lstm_backward(*bwd_args), lstm_backward_py(*bwd_args)):
        np.testing.assert_allclose(a, b_, rtol=1e-12, atol=1e-12)
    print("path agreement within 1e-12: OK (forward and backward)")

    rows = [
        ("lstm_forward", bench(lstm_forward_py, fwd_args), bench(lstm_forward, fwd_args)),
        ("lstm_backward", bench(lstm_backward_py, bwd_args), bench(lstm_backward, bwd_args)),
    ]
    print(f"{'kernel':<16}{'numpy (ms)':>12}{'jit (ms)':>12}{'speedup':>10}")
    for name, t_py, t_jit in rows:
        print(f"{name:<16}{t_py * 1e3:>12.3f}{t_jit * 1e3:>12.3f}{t_py / t_jit:>10.2f}x")


if __name__ == "__main__":
    main()
