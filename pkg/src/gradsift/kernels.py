"""Hot inner kernels: batched LSTM forward and per-sample loss gradients.

Two interchangeable implementations live side by side:

* ``*_loops``: scalar loops, compiled with ``numba.njit`` when available.
* ``*_numpy``: vectorized over the batch, pure NumPy.

The active pair is picked at import time. Numba is the default whenever it
imports; setting ``GRADSIFT_NUMBA=0`` (or ``false``/``off``/``no``) forces
the NumPy path. ``benchmarks/bench_kernels.py`` times both and reports the
numerical gap between them.

Flat parameter layout (float64, length P):

    [ w_x (4H*I) | w_h (4H*H) | b (4H) | w_out (H) | b_out (1) ]

Gate rows inside each 4H block are ordered input, forget, candidate,
output. Sigmoid/tanh arguments are clamped to +/-30 so exp never overflows;
the backward pass zeroes the derivative wherever the clamp is active.
"""

import math
import os

import numpy as np

CLAMP = 30.0

_env = os.environ.get("GRADSIFT_NUMBA", "1").strip().lower()
_want_numba = _env not in ("0", "false", "off", "no")

try:
    from numba import njit

    numba_available = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_available = False

numba_enabled = numba_available and _want_numba


def _forward_batch_loops(wx, wh, b, wd, bd, xs):
    """xs (B, T, I) -> predictions (B,). Weights as unpacked views."""
    B, T, nin = xs.shape
    H = wh.shape[1]
    H4 = 4 * H
    preds = np.empty(B)
    a = np.empty(H4)
    h = np.empty(H)
    c = np.empty(H)
    for s in range(B):
        for k in range(H):
            h[k] = 0.0
            c[k] = 0.0
        for t in range(T):
            for j in range(H4):
                acc = b[j]
                for k in range(nin):
                    acc += wx[j, k] * xs[s, t, k]
                for k in range(H):
                    acc += wh[j, k] * h[k]
                a[j] = acc
            for k in range(H):
                gi = 1.0 / (1.0 + math.exp(-min(max(a[k], -CLAMP), CLAMP)))
                gf = 1.0 / (1.0 + math.exp(-min(max(a[H + k], -CLAMP), CLAMP)))
                gg = math.tanh(min(max(a[2 * H + k], -CLAMP), CLAMP))
                go = 1.0 / (1.0 + math.exp(-min(max(a[3 * H + k], -CLAMP), CLAMP)))
                ck = gf * c[k] + gi * gg
                c[k] = ck
                h[k] = go * math.tanh(min(max(ck, -CLAMP), CLAMP))
        acc = bd[0]
        for k in range(H):
            acc += wd[k] * h[k]
        preds[s] = acc
    return preds


def _grads_batch_loops(wx, wh, b, wd, bd, xs, ys):
    """Per-sample squared-error gradients.

    xs (B, T, I), ys (B,) -> (preds (B,), grads (B, P)); row s of grads is
    d (pred_s - y_s)^2 / d theta in the flat layout.
    """
    B, T, nin = xs.shape
    H = wh.shape[1]
    H4 = 4 * H
    n_wx = H4 * nin
    off_wh = n_wx
    off_b = n_wx + H4 * H
    off_wd = off_b + H4
    off_bd = off_wd + H
    P = off_bd + 1

    preds = np.empty(B)
    grads = np.zeros((B, P))

    # per-sample caches along the time axis, reused across the batch
    A = np.empty((T, H4))       # raw gate preactivations
    I = np.empty((T, H))
    F = np.empty((T, H))
    G = np.empty((T, H))
    O = np.empty((T, H))
    Cs = np.empty((T + 1, H))   # raw cell states, Cs[0] = 0
    TC = np.empty((T, H))       # tanh of clamped cell state
    Hs = np.empty((T + 1, H))   # hidden states, Hs[0] = 0
    da = np.empty(H4)
    dh = np.empty(H)
    dc = np.empty(H)
    dcp = np.empty(H)
    dhn = np.empty(H)

    for s in range(B):
        for k in range(H):
            Hs[0, k] = 0.0
            Cs[0, k] = 0.0
        for t in range(T):
            for j in range(H4):
                acc = b[j]
                for k in range(nin):
                    acc += wx[j, k] * xs[s, t, k]
                for k in range(H):
                    acc += wh[j, k] * Hs[t, k]
                A[t, j] = acc
            for k in range(H):
                gi = 1.0 / (1.0 + math.exp(-min(max(A[t, k], -CLAMP), CLAMP)))
                gf = 1.0 / (1.0 + math.exp(-min(max(A[t, H + k], -CLAMP), CLAMP)))
                gg = math.tanh(min(max(A[t, 2 * H + k], -CLAMP), CLAMP))
                go = 1.0 / (1.0 + math.exp(-min(max(A[t, 3 * H + k], -CLAMP), CLAMP)))
                ck = gf * Cs[t, k] + gi * gg
                I[t, k] = gi
                F[t, k] = gf
                G[t, k] = gg
                O[t, k] = go
                Cs[t + 1, k] = ck
                tc = math.tanh(min(max(ck, -CLAMP), CLAMP))
                TC[t, k] = tc
                Hs[t + 1, k] = go * tc
        pred = bd[0]
        for k in range(H):
            pred += wd[k] * Hs[T, k]
        preds[s] = pred

        dpred = 2.0 * (pred - ys[s])
        grads[s, off_bd] = dpred
        for k in range(H):
            grads[s, off_wd + k] = dpred * Hs[T, k]
            dh[k] = wd[k] * dpred
            dc[k] = 0.0

        for t in range(T - 1, -1, -1):
            for k in range(H):
                tc = TC[t, k]
                go = O[t, k]
                do = dh[k] * tc
                dck = dc[k]
                if -CLAMP < Cs[t + 1, k] < CLAMP:
                    dck += dh[k] * go * (1.0 - tc * tc)
                gi = I[t, k]
                gf = F[t, k]
                gg = G[t, k]
                dcp[k] = dck * gf
                da[k] = dck * gg * gi * (1.0 - gi) if -CLAMP < A[t, k] < CLAMP else 0.0
                da[H + k] = (
                    dck * Cs[t, k] * gf * (1.0 - gf)
                    if -CLAMP < A[t, H + k] < CLAMP
                    else 0.0
                )
                da[2 * H + k] = (
                    dck * gi * (1.0 - gg * gg)
                    if -CLAMP < A[t, 2 * H + k] < CLAMP
                    else 0.0
                )
                da[3 * H + k] = (
                    do * go * (1.0 - go) if -CLAMP < A[t, 3 * H + k] < CLAMP else 0.0
                )
            for j in range(H4):
                daj = da[j]
                for k in range(nin):
                    grads[s, j * nin + k] += daj * xs[s, t, k]
                for k in range(H):
                    grads[s, off_wh + j * H + k] += daj * Hs[t, k]
                grads[s, off_b + j] += daj
            for k in range(H):
                acc = 0.0
                for j in range(H4):
                    acc += wh[j, k] * da[j]
                dhn[k] = acc
            for k in range(H):
                dh[k] = dhn[k]
                dc[k] = dcp[k]
    return preds, grads


def _sigmoid(z):
    # callers clamp z, so the plain form never overflows
    return 1.0 / (1.0 + np.exp(-z))


def _forward_batch_numpy(wx, wh, b, wd, bd, xs):
    """Vectorized twin of _forward_batch_loops."""
    B, T, _ = xs.shape
    H = wh.shape[1]
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    # IEEE inf/nan flow through silently (as in the scalar twin); callers
    # are responsible for finiteness checks on the outputs
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(T):
            a = np.clip(xs[:, t, :] @ wx.T + h @ wh.T + b, -CLAMP, CLAMP)
            gi = _sigmoid(a[:, :H])
            gf = _sigmoid(a[:, H : 2 * H])
            gg = np.tanh(a[:, 2 * H : 3 * H])
            go = _sigmoid(a[:, 3 * H :])
            c = gf * c + gi * gg
            h = go * np.tanh(np.clip(c, -CLAMP, CLAMP))
        return h @ wd + bd[0]


def _grads_batch_numpy(wx, wh, b, wd, bd, xs, ys):
    """Vectorized twin of _grads_batch_loops."""
    B, T, _ = xs.shape
    H = wh.shape[1]
    H4 = 4 * H
    n_wx = H4 * xs.shape[2]
    off_wh = n_wx
    off_b = n_wx + H4 * H
    off_wd = off_b + H4
    off_bd = off_wd + H
    P = off_bd + 1

    A = np.empty((T, B, H4))
    I = np.empty((T, B, H))
    F = np.empty((T, B, H))
    G = np.empty((T, B, H))
    O = np.empty((T, B, H))
    Cs = np.zeros((T + 1, B, H))
    TC = np.empty((T, B, H))
    Hs = np.zeros((T + 1, B, H))
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(T):
            a = xs[:, t, :] @ wx.T + Hs[t] @ wh.T + b
            A[t] = a
            ac = np.clip(a, -CLAMP, CLAMP)
            gi = _sigmoid(ac[:, :H])
            gf = _sigmoid(ac[:, H : 2 * H])
            gg = np.tanh(ac[:, 2 * H : 3 * H])
            go = _sigmoid(ac[:, 3 * H :])
            c = gf * Cs[t] + gi * gg
            I[t], F[t], G[t], O[t] = gi, gf, gg, go
            Cs[t + 1] = c
            tc = np.tanh(np.clip(c, -CLAMP, CLAMP))
            TC[t] = tc
            Hs[t + 1] = go * tc
        preds = Hs[T] @ wd + bd[0]

    grads = np.zeros((B, P))
    dpred = 2.0 * (preds - ys)
    grads[:, off_wd : off_wd + H] = dpred[:, None] * Hs[T]
    grads[:, off_bd] = dpred
    dh = dpred[:, None] * wd[None, :]
    dc = np.zeros((B, H))
    # masked terms are dropped with np.where (not multiplied by 0) so that
    # saturated coordinates stay exactly zero even when upstream is inf,
    # matching the loop twin; inf*0 warnings inside dead branches are noise
    with np.errstate(invalid="ignore", over="ignore"):
        for t in range(T - 1, -1, -1):
            tc = TC[t]
            go = O[t]
            dc = dc + np.where(
                np.abs(Cs[t + 1]) < CLAMP, dh * go * (1.0 - tc * tc), 0.0
            )
            gi, gf, gg = I[t], F[t], G[t]
            do = dh * tc
            da = np.where(
                np.abs(A[t]) < CLAMP,
                np.concatenate(
                    [
                        dc * gg * gi * (1.0 - gi),
                        dc * Cs[t] * gf * (1.0 - gf),
                        dc * gi * (1.0 - gg * gg),
                        do * go * (1.0 - go),
                    ],
                    axis=1,
                ),
                0.0,
            )
            grads[:, :n_wx] += (da[:, :, None] * xs[:, t, None, :]).reshape(B, -1)
            grads[:, off_wh:off_b] += (da[:, :, None] * Hs[t][:, None, :]).reshape(B, -1)
            grads[:, off_b:off_wd] += da
            dh = da @ wh
            dc = dc * gf
    return preds, grads


if numba_available:
    forward_batch_numba = njit(cache=True, nogil=True)(_forward_batch_loops)
    grads_batch_numba = njit(cache=True, nogil=True)(_grads_batch_loops)
else:  # pragma: no cover
    forward_batch_numba = None
    grads_batch_numba = None

if numba_enabled:
    forward_batch = forward_batch_numba
    grads_batch = grads_batch_numba
else:
    forward_batch = _forward_batch_numpy
    grads_batch = _grads_batch_numpy


def backend_name() -> str:
    """Name of the active kernel backend ("numba" or "numpy")."""
    return "numba" if numba_enabled else "numpy"
