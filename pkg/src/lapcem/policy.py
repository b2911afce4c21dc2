"""Feedforward policy network with GELU hidden layers and a 2-way softmax head.

Parameters live in one flat float64 vector (per layer: a row-major
``(fan_in, fan_out)`` weight block followed by the bias), which is also the
layout the rollout kernels read and the checkpoint file stores.
"""

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .errors import InputShapeError, NumericalFailure, ParseError

DEFAULT_HIDDEN = (72, 12)
DEFAULT_LR = 0.002
BETA1 = 0.9
BETA2 = 0.999
ADAM_EPS = 1e-8

_SQRT_HALF = np.sqrt(0.5)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class NetworkArchitecture:
    input_size: int
    hidden_sizes: tuple = DEFAULT_HIDDEN
    output_size: int = 2

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.output_size != 2:
            raise ValueError("the policy head has exactly two outputs")
        if self.input_size < 2 or self.input_size % 2:
            raise ValueError(f"input size must be even and positive, got {self.input_size}")
        if not self.hidden_sizes or min(self.hidden_sizes) < 1:
            raise ValueError("need at least one hidden layer of positive width")

    @classmethod
    def for_vertices(cls, n: int, hidden_sizes=DEFAULT_HIDDEN):
        return cls(n * (n - 1), tuple(hidden_sizes))

    @property
    def sizes(self) -> tuple:
        return (self.input_size, *self.hidden_sizes, self.output_size)

    @property
    def n_params(self) -> int:
        s = self.sizes
        return sum(a * b + b for a, b in zip(s[:-1], s[1:]))


@dataclass(eq=False)
class PolicyNetwork:
    arch: NetworkArchitecture
    theta: np.ndarray
    m: np.ndarray = field(default=None)
    v: np.ndarray = field(default=None)
    t: int = 0

    def __post_init__(self):
        p = self.arch.n_params
        self.theta = np.ascontiguousarray(self.theta, dtype=np.float64)
        if self.theta.shape != (p,):
            raise InputShapeError(f"expected {p} parameters, got {self.theta.shape}")
        self.m = np.zeros(p) if self.m is None else np.ascontiguousarray(self.m, dtype=np.float64)
        self.v = np.zeros(p) if self.v is None else np.ascontiguousarray(self.v, dtype=np.float64)

    def layers(self, flat=None):
        """(weight, bias) views into ``flat`` (default: the parameters)."""
        flat = self.theta if flat is None else flat
        out = []
        pos = 0
        s = self.arch.sizes
        for fin, fout in zip(s[:-1], s[1:]):
            w = flat[pos:pos + fin * fout].reshape(fin, fout)
            pos += fin * fout
            out.append((w, flat[pos:pos + fout]))
            pos += fout
        return out

    def copy(self):
        return PolicyNetwork(self.arch, self.theta.copy(), self.m.copy(), self.v.copy(), self.t)


def init_network(arch: NetworkArchitecture, seed) -> PolicyNetwork:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases."""
    rng = np.random.default_rng(seed)
    net = PolicyNetwork(arch, np.zeros(arch.n_params))
    for w, _ in net.layers():
        lim = 1.0 / np.sqrt(w.shape[0])
        w[...] = rng.uniform(-lim, lim, size=w.shape)
    return net


def gelu(x):
    return 0.5 * x * (1.0 + erf(x * _SQRT_HALF))


def gelu_grad(x):
    return 0.5 * (1.0 + erf(x * _SQRT_HALF)) + x * _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def _softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _check_obs(net, obs):
    obs = np.asarray(obs, dtype=np.float64)
    if obs.shape[-1] != net.arch.input_size:
        raise InputShapeError(
            f"observation length {obs.shape[-1]} does not match input size {net.arch.input_size}"
        )
    return obs


def forward_batch(net: PolicyNetwork, obs) -> np.ndarray:
    h = np.atleast_2d(_check_obs(net, obs))
    layers = net.layers()
    for w, b in layers[:-1]:
        h = gelu(h @ w + b)
    w, b = layers[-1]
    return _softmax(h @ w + b)


def forward(net: PolicyNetwork, obs) -> tuple:
    """Action probabilities ``(p0, p1)`` for one observation."""
    obs = _check_obs(net, obs)
    if obs.ndim != 1:
        raise InputShapeError("forward takes a single observation vector")
    p = forward_batch(net, obs)[0]
    return float(p[0]), float(p[1])


@dataclass
class TrainBatch:
    observations: np.ndarray
    actions: np.ndarray

    def __post_init__(self):
        self.observations = np.atleast_2d(np.asarray(self.observations, dtype=np.float64))
        self.actions = np.asarray(self.actions, dtype=np.int64).ravel()
        if len(self.observations) != len(self.actions):
            raise InputShapeError("observations and actions differ in length")


def loss_and_grad(net: PolicyNetwork, batch: TrainBatch, theta=None):
    """Mean cross-entropy of the batch actions and its gradient w.r.t. the flat parameters."""
    theta = net.theta if theta is None else theta
    x = _check_obs(net, batch.observations)
    y = batch.actions
    if len(y) == 0:
        raise InputShapeError("empty training batch")
    layers = net.layers(theta)
    acts = [x]
    pre = []
    h = x
    for w, b in layers[:-1]:
        z = h @ w + b
        pre.append(z)
        h = gelu(z)
        acts.append(h)
    w, b = layers[-1]
    logits = h @ w + b
    mx = logits.max(axis=1, keepdims=True)
    lse = mx[:, 0] + np.log(np.exp(logits - mx).sum(axis=1))
    rows = np.arange(len(y))
    loss = float(np.mean(lse - logits[rows, y]))

    grad = np.zeros_like(theta)
    glayers = net.layers(grad)
    delta = _softmax(logits)
    delta[rows, y] -= 1.0
    delta /= len(y)
    for k in range(len(layers) - 1, -1, -1):
        gw, gb = glayers[k]
        gw[...] = acts[k].T @ delta
        gb[...] = delta.sum(axis=0)
        if k:
            delta = (delta @ layers[k][0].T) * gelu_grad(pre[k - 1])
    return loss, grad


def train_step(net: PolicyNetwork, batch: TrainBatch, lr: float = DEFAULT_LR) -> float:
    """One full-batch ADAM step; returns the loss before the update."""
    loss, grad = loss_and_grad(net, batch)
    if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
        raise NumericalFailure("non-finite loss or gradient", best_estimate=loss)
    t = net.t + 1
    m = BETA1 * net.m + (1.0 - BETA1) * grad
    v = BETA2 * net.v + (1.0 - BETA2) * grad * grad
    m_hat = m / (1.0 - BETA1 ** t)
    v_hat = v / (1.0 - BETA2 ** t)
    net.theta -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
    net.m, net.v, net.t = m, v, t
    return loss


# Checkpoint layout (all little-endian):
#   8s  magic b"LAPCEMNN"
#   H   format version (1)
#   H   number of layer sizes L
#   L*I layer sizes, input first, output last
#   Q   ADAM step counter t
#   P*d parameters, then P*d first moments, then P*d second moments
CHECKPOINT_MAGIC = b"LAPCEMNN"
CHECKPOINT_VERSION = 1


def checkpoint_bytes(net: PolicyNetwork) -> bytes:
    sizes = net.arch.sizes
    head = struct.pack(f"<8sHH{len(sizes)}IQ", CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(sizes), *sizes, net.t)
    le = np.dtype("<f8")
    return head + net.theta.astype(le).tobytes() + net.m.astype(le).tobytes() + net.v.astype(le).tobytes()


def network_from_bytes(data: bytes) -> PolicyNetwork:
    if len(data) < 12 or data[:8] != CHECKPOINT_MAGIC:
        raise ParseError("not a policy checkpoint (bad magic)")
    version, n_sizes = struct.unpack_from("<HH", data, 8)
    if version != CHECKPOINT_VERSION:
        raise ParseError(f"unsupported checkpoint version {version}")
    off = 12
    try:
        sizes = struct.unpack_from(f"<{n_sizes}I", data, off)
        off += 4 * n_sizes
        (t,) = struct.unpack_from("<Q", data, off)
        off += 8
        arch = NetworkArchitecture(sizes[0], tuple(sizes[1:-1]), sizes[-1])
    except (struct.error, ValueError, IndexError) as exc:
        raise ParseError(f"corrupt checkpoint header: {exc}") from None
    p = arch.n_params
    if len(data) != off + 24 * p:
        raise ParseError(f"checkpoint length {len(data)} does not match {p} parameters")
    arrs = np.frombuffer(data, dtype="<f8", offset=off).astype(np.float64).reshape(3, p)
    return PolicyNetwork(arch, arrs[0].copy(), arrs[1].copy(), arrs[2].copy(), int(t))


def save_checkpoint(net: PolicyNetwork, path) -> None:
    with open(path, "wb") as fh:
        fh.write(checkpoint_bytes(net))


def load_checkpoint(path) -> PolicyNetwork:
    with open(path, "rb") as fh:
        return network_from_bytes(fh.read())
