"""Small fully-connected Q-network, TD loss with analytic gradient, replay memory."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

WEIGHT_MAGIC = b"HSRQNET\x00"
WEIGHT_VERSION = 1

_ACTIVATIONS = {
    "tanh": (np.tanh, lambda a: 1.0 - a * a),
    "identity": (lambda z: z, lambda a: np.ones_like(a)),
}


class WeightFileError(ValueError):
    pass


@dataclass
class QNetworkParams:
    weights: list[np.ndarray]  # weights[k] has shape (in_k, out_k)
    biases: list[np.ndarray]
    activation: str = "tanh"

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for pair in zip(self.weights, self.biases) for a in pair])

    def copy(self) -> "QNetworkParams":
        return QNetworkParams([w.copy() for w in self.weights],
                              [b.copy() for b in self.biases], self.activation)


def init_params(layer_sizes: Sequence[int], rng: np.random.Generator,
                activation: str = "tanh", input_sharpness: float = 0.0) -> QNetworkParams:
    """Glorot-uniform weights, zero biases.

    With ``input_sharpness > 0`` the first layer is instead laid out so each
    unit switches at a random point of the [0, 1] input range, with slope of
    order ``input_sharpness``; a plain Glorot layer is nearly linear there.
    """
    if activation not in _ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}")
    ws, bs = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        ws.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        bs.append(np.zeros(fan_out))
    if input_sharpness > 0:
        fan_in, fan_out = ws[0].shape
        w = input_sharpness * rng.uniform(0.5, 1.0, size=(fan_in, fan_out))
        w *= rng.choice([-1.0, 1.0], size=(fan_in, fan_out))
        centres = rng.uniform(0.0, 1.0, size=fan_out)
        ws[0] = w / np.sqrt(fan_in)
        bs[0] = -(centres * ws[0].sum(axis=0))
    return QNetworkParams(ws, bs, activation)


def zeros_like(params: QNetworkParams) -> QNetworkParams:
    return QNetworkParams([np.zeros_like(w) for w in params.weights],
                          [np.zeros_like(b) for b in params.biases], params.activation)


def _forward_cache(params: QNetworkParams, x: np.ndarray) -> list[np.ndarray]:
    act = _ACTIVATIONS[params.activation][0]
    outs = [x]
    h = x
    last = len(params.weights) - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        h = z if k == last else act(z)
        outs.append(h)
    return outs


def forward(params: QNetworkParams, x) -> np.ndarray:
    """Q-values for a batch ``(B, in)`` or a single feature vector ``(in,)``."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != params.weights[0].shape[0]:
        raise ValueError(f"input dim {x.shape[1]} != network input {params.weights[0].shape[0]}")
    q = _forward_cache(params, x)[-1]
    return q[0] if single else q


class Batch(NamedTuple):
    states: np.ndarray  # (B, in)
    actions: np.ndarray  # (B,) 0-based
    rewards: np.ndarray
    next_states: np.ndarray
    terminal: np.ndarray  # (B,) bool


def td_targets(target_params: QNetworkParams, batch: Batch, alpha: float) -> np.ndarray:
    q_next = forward(target_params, batch.next_states).max(axis=1)
    return batch.rewards + alpha * np.where(batch.terminal, 0.0, q_next)


def td_loss(params: QNetworkParams, target_params: QNetworkParams, batch: Batch,
            alpha: float) -> tuple[float, QNetworkParams]:
    """Mean squared TD error and its gradient w.r.t. ``params``.

    Targets come from ``target_params`` and are held constant.
    """
    n = len(batch.actions)
    if n == 0:
        raise ValueError("empty batch")
    y = td_targets(target_params, batch, alpha)
    outs = _forward_cache(params, np.asarray(batch.states, dtype=float))
    rows = np.arange(n)
    err = y - outs[-1][rows, batch.actions]
    loss = float(np.mean(err * err))

    dact = _ACTIVATIONS[params.activation][1]
    delta = np.zeros_like(outs[-1])
    delta[rows, batch.actions] = -2.0 * err / n
    gw = [None] * len(params.weights)
    gb = [None] * len(params.weights)
    for k in range(len(params.weights) - 1, -1, -1):
        gw[k] = outs[k].T @ delta
        gb[k] = delta.sum(axis=0)
        if k:
            delta = (delta @ params.weights[k].T) * dact(outs[k])
    return loss, QNetworkParams(gw, gb, params.activation)


def sgd_step(params: QNetworkParams, grad: QNetworkParams, lr: float) -> QNetworkParams:
    if params.layer_sizes != grad.layer_sizes:
        raise ValueError("gradient shape does not match parameters")
    return QNetworkParams([w - lr * g for w, g in zip(params.weights, grad.weights)],
                          [b - lr * g for b, g in zip(params.biases, grad.biases)],
                          params.activation)


def sync_target(params: QNetworkParams) -> QNetworkParams:
    return params.copy()


@dataclass
class ReplayBuffer:
    capacity: int
    state_dim: int = 1
    _states: np.ndarray = field(init=False, repr=False)
    _next: np.ndarray = field(init=False, repr=False)
    _actions: np.ndarray = field(init=False, repr=False)
    _rewards: np.ndarray = field(init=False, repr=False)
    _terminal: np.ndarray = field(init=False, repr=False)
    _pos: int = field(default=0, init=False)
    _size: int = field(default=0, init=False)

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be positive")
        self._states = np.zeros((self.capacity, self.state_dim))
        self._next = np.zeros((self.capacity, self.state_dim))
        self._actions = np.zeros(self.capacity, dtype=np.int64)
        self._rewards = np.zeros(self.capacity)
        self._terminal = np.zeros(self.capacity, dtype=bool)

    def __len__(self) -> int:
        return self._size

    def add(self, state, action: int, reward: float, next_state, terminal: bool) -> None:
        i = self._pos
        self._states[i] = state
        self._actions[i] = action
        self._rewards[i] = reward
        self._next[i] = next_state
        self._terminal[i] = terminal
        self._pos = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        if self._size < batch_size:
            raise ValueError(f"buffer holds {self._size} < batch size {batch_size}")
        idx = rng.integers(0, self._size, size=batch_size)
        return Batch(self._states[idx], self._actions[idx], self._rewards[idx],
                     self._next[idx], self._terminal[idx])


def save_params(params: QNetworkParams, path) -> None:
    """Binary layout: magic, u32 version, activation, u32 layer count,
    u32 layer sizes, then per layer row-major float64 weights and biases."""
    sizes = params.layer_sizes
    act = params.activation.encode("ascii")
    with open(path, "wb") as fh:
        fh.write(WEIGHT_MAGIC)
        fh.write(struct.pack("<II", WEIGHT_VERSION, len(act)))
        fh.write(act)
        fh.write(struct.pack("<I", len(sizes)))
        fh.write(struct.pack(f"<{len(sizes)}I", *sizes))
        for w, b in zip(params.weights, params.biases):
            fh.write(np.ascontiguousarray(w, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_params(path) -> QNetworkParams:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != WEIGHT_MAGIC:
        raise WeightFileError(f"{path}: not a Q-network weight file")
    version, alen = struct.unpack_from("<II", data, 8)
    if version != WEIGHT_VERSION:
        raise WeightFileError(f"{path}: weight file version {version}, expected {WEIGHT_VERSION}")
    off = 16
    activation = data[off:off + alen].decode("ascii")
    off += alen
    (nsz,) = struct.unpack_from("<I", data, off)
    off += 4
    sizes = struct.unpack_from(f"<{nsz}I", data, off)
    off += 4 * nsz
    ws, bs = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        w = np.frombuffer(data, dtype="<f8", count=fan_in * fan_out, offset=off)
        off += 8 * fan_in * fan_out
        b = np.frombuffer(data, dtype="<f8", count=fan_out, offset=off)
        off += 8 * fan_out
        ws.append(w.reshape(fan_in, fan_out).astype(float))
        bs.append(b.astype(float))
    if off != len(data):
        raise WeightFileError(f"{path}: trailing bytes after last layer")
    return QNetworkParams(ws, bs, activation)
