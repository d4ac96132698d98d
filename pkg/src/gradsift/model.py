"""Network state and the operations differentiated by the kernels.

The only architecture supported is a single LSTM layer feeding a dense
scalar readout; everything here works on the flat float64 parameter vector
described in :mod:`gradsift.kernels`.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import NumericalError


@dataclass(frozen=True)
class Topology:
    """Layer sizes: input width, LSTM hidden units, dense output width."""

    input_size: int = 1
    hidden_size: int = 32
    output_size: int = 1

    def __post_init__(self):
        for name in ("input_size", "hidden_size", "output_size"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")

    def param_count(self) -> int:
        """4*(h*(h+i)+h) LSTM weights plus h*o+o dense weights."""
        h, i, o = self.hidden_size, self.input_size, self.output_size
        return 4 * (h * (h + i) + h) + h * o + o


@dataclass
class ModelState:
    """Trainable parameters plus the topology and seed they came from."""

    topology: Topology
    params: np.ndarray
    init_seed: int

    def __post_init__(self):
        self.params = np.ascontiguousarray(self.params, dtype=np.float64)
        expected = self.topology.param_count()
        if self.params.shape != (expected,):
            raise ValueError(
                f"parameter vector has shape {self.params.shape}, expected ({expected},)"
            )

    def copy(self) -> "ModelState":
        return replace(self, params=self.params.copy())

    def views(self):
        """Zero-copy (w_x, w_h, b, w_out, b_out) views into the flat vector.

        Kernel layout assumes a scalar readout, so output_size must be 1.
        """
        top = self.topology
        if top.output_size != 1:
            raise ValueError("forward/backward support output_size=1 only")
        h, i = top.hidden_size, top.input_size
        h4 = 4 * h
        p = self.params
        o0 = h4 * i
        o1 = o0 + h4 * h
        o2 = o1 + h4
        o3 = o2 + h
        wx = p[:o0].reshape(h4, i)
        wh = p[o0:o1].reshape(h4, h)
        return wx, wh, p[o1:o2], p[o2:o3], p[o3:]


def _xavier(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


def init_model(topology: Topology, seed: int) -> ModelState:
    """Xavier-uniform weight matrices, zero biases; bit-reproducible in seed.

    Draw order is fixed (w_x, then w_h, then w_out) so the same seed always
    produces the same parameter vector.
    """
    rng = np.random.default_rng(seed)
    h, i, o = topology.hidden_size, topology.input_size, topology.output_size
    wx = _xavier(rng, 4 * h, i)
    wh = _xavier(rng, 4 * h, h)
    wd = _xavier(rng, o, h)
    params = np.concatenate(
        [wx.ravel(), wh.ravel(), np.zeros(4 * h), wd.ravel(), np.zeros(o)]
    )
    return ModelState(topology=topology, params=params, init_seed=int(seed))


def _check_input(topology: Topology, x) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] != topology.input_size:
        raise ValueError(
            f"input must have shape (timesteps, {topology.input_size}), got {x.shape}"
        )
    return x


def forward(model: ModelState, x) -> float:
    """Scalar prediction for one sample of shape (timesteps, input_size).

    Hidden and cell state start at zero on every call; the model is never
    mutated.
    """
    x = _check_input(model.topology, x)
    wx, wh, b, wd, bd = model.views()
    pred = float(kernels.forward_batch(wx, wh, b, wd, bd, x[None, :, :])[0])
    if not math.isfinite(pred):
        raise NumericalError("forward produced a non-finite prediction")
    return pred


def loss_mse(pred: float, target: float) -> float:
    """Squared error for a single scalar prediction."""
    if not (math.isfinite(pred) and math.isfinite(target)):
        raise ValueError("loss inputs must be finite")
    d = pred - target
    return d * d


def backward_per_sample(model: ModelState, x, y: float) -> np.ndarray:
    """Exact gradient of loss_mse(forward(model, x), y) w.r.t. every parameter.

    Returns a fresh flat vector of length param_count(); the model is not
    touched.
    """
    x = _check_input(model.topology, x)
    wx, wh, b, wd, bd = model.views()
    _, grads = kernels.grads_batch(
        wx, wh, b, wd, bd, x[None, :, :], np.array([float(y)])
    )
    g = grads[0]
    if not np.all(np.isfinite(g)):
        raise NumericalError("backward produced non-finite gradient entries")
    return g


def grad_norms_rows(grads: np.ndarray) -> np.ndarray:
    """Euclidean norm of every row of a (B, P) gradient block."""
    grads = np.asarray(grads, dtype=np.float64)
    return np.sqrt(np.sum(np.square(grads), axis=1))


def grad_norm(g) -> float:
    """Euclidean norm over all parameters of one gradient vector."""
    g = np.asarray(g, dtype=np.float64)
    if not np.all(np.isfinite(g)):
        raise ValueError("gradient entries must be finite")
    return float(grad_norms_rows(g[None, :])[0])


@dataclass(frozen=True)
class AdamParams:
    """Adam hyperparameters; the defaults are the usual ones."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class AdamState:
    """First/second moment accumulators and the step counter."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0


def adam_state_for(model: ModelState) -> AdamState:
    p = model.params.size
    return AdamState(m=np.zeros(p), v=np.zeros(p), t=0)


def _adam_update(params, g, m, v, t, hyper: AdamParams) -> int:
    """In-place bias-corrected Adam step shared by adam_step and the trainer."""
    t += 1
    b1, b2 = hyper.beta1, hyper.beta2
    m *= b1
    m += (1.0 - b1) * g
    v *= b2
    v += (1.0 - b2) * np.square(g)
    mhat = m / (1.0 - b1**t)
    vhat = v / (1.0 - b2**t)
    params -= hyper.learning_rate * mhat / (np.sqrt(vhat) + hyper.eps)
    return t


def adam_step(
    model: ModelState, g: np.ndarray, state: AdamState, hyper: AdamParams
) -> tuple[ModelState, AdamState]:
    """One Adam update. Pure: returns fresh model and optimizer state."""
    g = np.asarray(g, dtype=np.float64)
    if g.shape != model.params.shape:
        raise ValueError(f"gradient shape {g.shape} != params {model.params.shape}")
    params = model.params.copy()
    m = state.m.copy()
    v = state.v.copy()
    t = _adam_update(params, g, m, v, state.t, hyper)
    if not np.all(np.isfinite(params)):
        raise NumericalError("Adam update produced non-finite parameters")
    return replace(model, params=params), AdamState(m=m, v=v, t=t)


CHECKPOINT_MAGIC = b"GSCK"
CHECKPOINT_VERSION = 1


def save_checkpoint(model: ModelState, path, config_hash: str | None = None) -> None:
    """Versioned flat-parameter binary: magic, JSON header, raw float64 bytes."""
    header = {
        "version": CHECKPOINT_VERSION,
        "topology": {
            "input_size": model.topology.input_size,
            "hidden_size": model.topology.hidden_size,
            "output_size": model.topology.output_size,
        },
        "init_seed": model.init_seed,
        "param_count": int(model.params.size),
        "dtype": "float64",
        "config_hash": config_hash,
    }
    payload = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", CHECKPOINT_VERSION, len(payload)))
        fh.write(payload)
        fh.write(model.params.tobytes())


def load_checkpoint(path) -> tuple[ModelState, dict]:
    """Inverse of save_checkpoint; returns the model and its header."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"not a checkpoint file: bad magic {magic!r}")
        version, header_len = struct.unpack("<II", fh.read(8))
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        header = json.loads(fh.read(header_len).decode("utf-8"))
        top = Topology(**header["topology"])
        params = np.frombuffer(
            fh.read(8 * header["param_count"]), dtype=np.float64
        ).copy()
    model = ModelState(topology=top, params=params, init_seed=header["init_seed"])
    return model, header
