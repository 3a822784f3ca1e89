"""Embedding + LSTM network: parameters, forward pass, loss and BPTT gradients.

Gates are stacked in the order (candidate, input, forget, output) wherever a
single matrix holds all four. The classifier reads the last hidden state
after dropout through a single sigmoid unit.
"""
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from scipy.special import expit

from src.config.settings import ModelConfig

GATES = ("c", "i", "f", "o")
Mode = Literal["train", "infer"]
LOSS_EPSILON = 1e-7


@dataclass
class LstmParameters:
    """Named parameter tensors.

    ``embedding`` (V, D); ``W_g`` (H, D) and ``U_g`` (H, H) per gate g;
    optional ``b_g`` (H,); dense head ``w_d`` (H,) and ``b_d`` (1,).
    """

    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    @staticmethod
    def shapes(config: ModelConfig, vocab_size: int) -> dict[str, tuple[int, ...]]:
        D, H = config.embed_dim, config.hidden_dim
        shapes: dict[str, tuple[int, ...]] = {"embedding": (vocab_size, D)}
        for g in GATES:
            shapes[f"W_{g}"] = (H, D)
        for g in GATES:
            shapes[f"U_{g}"] = (H, H)
        if config.gate_bias:
            for g in GATES:
                shapes[f"b_{g}"] = (H,)
        shapes["w_d"] = (H,)
        shapes["b_d"] = (1,)
        return shapes

    @classmethod
    def initialize(cls, config: ModelConfig, vocab_size: int, rng: np.random.Generator) -> "LstmParameters":
        """Uniform(-init_scale, init_scale) weights; biases start at zero."""
        tensors = {}
        for name, shape in cls.shapes(config, vocab_size).items():
            if name.startswith("b_"):
                tensors[name] = np.zeros(shape)
            else:
                tensors[name] = rng.uniform(-config.init_scale, config.init_scale, size=shape)
        return cls(tensors)

    @classmethod
    def zeros(cls, config: ModelConfig, vocab_size: int) -> "LstmParameters":
        return cls({name: np.zeros(shape) for name, shape in cls.shapes(config, vocab_size).items()})

    def copy(self) -> "LstmParameters":
        return LstmParameters({name: t.copy() for name, t in self.tensors.items()})

    def check_shapes(self, config: ModelConfig, vocab_size: int) -> None:
        """Raise ValueError unless tensors match the configured shapes exactly."""
        expected = self.shapes(config, vocab_size)
        if set(expected) != set(self.tensors):
            raise ValueError(f"parameter names {sorted(self.tensors)} do not match {sorted(expected)}")
        for name, shape in expected.items():
            if self.tensors[name].shape != shape:
                raise ValueError(f"{name} has shape {self.tensors[name].shape}, expected {shape}")

    @property
    def embedding(self) -> np.ndarray:
        return self.tensors["embedding"]

    @property
    def w_d(self) -> np.ndarray:
        return self.tensors["w_d"]

    @property
    def b_d(self) -> float:
        return float(self.tensors["b_d"][0])

    @property
    def hidden_dim(self) -> int:
        return self.tensors["w_d"].shape[0]

    @property
    def has_gate_bias(self) -> bool:
        return "b_c" in self.tensors

    def W(self, gate: str) -> np.ndarray:
        return self.tensors[f"W_{gate}"]

    def U(self, gate: str) -> np.ndarray:
        return self.tensors[f"U_{gate}"]

    def stacked(self) -> tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
        """(4H, D) input weights, (4H, H) recurrent weights and (4H,) biases or None."""
        W = np.concatenate([self.W(g) for g in GATES], axis=0)
        U = np.concatenate([self.U(g) for g in GATES], axis=0)
        b = np.concatenate([self.tensors[f"b_{g}"] for g in GATES]) if self.has_gate_bias else None
        return W, U, b


@dataclass
class LstmState:
    """Hidden and cell state, each (H,) or (B, H)."""

    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden_dim: int, batch: Optional[int] = None) -> "LstmState":
        shape = (hidden_dim,) if batch is None else (batch, hidden_dim)
        return cls(np.zeros(shape), np.zeros(shape))


@dataclass
class CellGates:
    """Post-activation gate values of one step."""

    candidate: np.ndarray
    input: np.ndarray
    forget: np.ndarray
    output: np.ndarray
    tanh_c: np.ndarray


def _cell(
    x: np.ndarray,
    h: np.ndarray,
    c: np.ndarray,
    W: np.ndarray,
    U: np.ndarray,
    b: Optional[np.ndarray],
) -> tuple[np.ndarray, np.ndarray, CellGates]:
    H = h.shape[-1]
    a = x @ W.T + h @ U.T
    if b is not None:
        a = a + b
    g = np.tanh(a[..., :H])
    i = expit(a[..., H:2 * H])
    f = expit(a[..., 2 * H:3 * H])
    o = expit(a[..., 3 * H:])
    c_new = f * c + i * g
    tanh_c = np.tanh(c_new)
    h_new = o * tanh_c
    return h_new, c_new, CellGates(g, i, f, o, tanh_c)


def cell_forward(x_t: np.ndarray, prev: LstmState, params: LstmParameters) -> tuple[LstmState, CellGates]:
    """One LSTM step returning the new state and the gate activations."""
    W, U, b = params.stacked()
    h, c, gates = _cell(np.asarray(x_t, dtype=float), prev.h, prev.c, W, U, b)
    return LstmState(h, c), gates


def lstm_cell_step(x_t: np.ndarray, prev: LstmState, params: LstmParameters) -> LstmState:
    """One LSTM step.

    c~ = tanh(W_c x + U_c h), i/f/o = sigmoid(W_g x + U_g h),
    c = f*c_prev + i*c~, h = o*tanh(c).

    Args:
        x_t: Input embedding, (D,) or (B, D)
        prev: Previous state
        params: Network parameters

    Returns:
        New state
    """
    return cell_forward(x_t, prev, params)[0]


@dataclass
class ForwardCache:
    """Everything the backward pass needs from one batched forward pass."""

    params: LstmParameters
    tokens: np.ndarray
    x: np.ndarray
    embed_mask: Optional[np.ndarray]
    h: np.ndarray
    c: np.ndarray
    gates: list[CellGates]
    feature_mask: Optional[np.ndarray]
    features: np.ndarray
    probs: np.ndarray


def _dropout_mask(shape: tuple[int, ...], rate: float, rng: np.random.Generator) -> np.ndarray:
    # inverted dropout: kept units are scaled by 1/(1-rate)
    return (rng.random(shape) >= rate) / (1.0 - rate)


def forward_batch(
    tokens: np.ndarray,
    params: LstmParameters,
    config: ModelConfig,
    mode: Mode = "infer",
    rng: Optional[np.random.Generator] = None,
) -> tuple[np.ndarray, np.ndarray, ForwardCache]:
    """Run the network over a batch of encoded windows.

    Args:
        tokens: (B, T) token indices with T == config.window_len
        params: Network parameters
        config: Network configuration (dropout rate, window length)
        mode: ``train`` applies dropout after the embedding and after the LSTM
        rng: Dropout randomness, required in train mode with a non-zero rate

    Returns:
        (probabilities (B,), pre-dropout features (B, H), cache)

    Raises:
        ValueError: On a wrong sequence length or a missing rng
    """
    tokens = np.asarray(tokens)
    if tokens.ndim != 2 or tokens.shape[1] != config.window_len:
        raise ValueError(f"expected token matrix of width {config.window_len}, got shape {tokens.shape}")
    B, T = tokens.shape
    H = params.hidden_dim
    dropout = mode == "train" and config.dropout_rate > 0.0
    if dropout and rng is None:
        raise ValueError("train mode with dropout needs an rng")

    x = params.embedding[tokens]
    embed_mask = None
    if dropout:
        embed_mask = _dropout_mask(x.shape, config.dropout_rate, rng)
        x = x * embed_mask

    W, U, b = params.stacked()
    h = np.zeros((T + 1, B, H))
    c = np.zeros((T + 1, B, H))
    gates: list[CellGates] = []
    for t in range(T):
        h[t + 1], c[t + 1], step = _cell(x[:, t], h[t], c[t], W, U, b)
        gates.append(step)

    features = h[T]
    feature_mask = None
    head_in = features
    if dropout:
        feature_mask = _dropout_mask(features.shape, config.dropout_rate, rng)
        head_in = features * feature_mask
    probs = expit(head_in @ params.w_d + params.b_d)
    cache = ForwardCache(params, tokens, x, embed_mask, h, c, gates, feature_mask, features, probs)
    return probs, features, cache


def forward_sequence(
    tokens: np.ndarray,
    params: LstmParameters,
    config: ModelConfig,
    mode: Mode = "infer",
    rng: Optional[np.random.Generator] = None,
) -> tuple[float, np.ndarray, ForwardCache]:
    """Single-window form of ``forward_batch``: (probability, feature (H,), cache)."""
    probs, features, cache = forward_batch(np.asarray(tokens)[None, :], params, config, mode, rng)
    return float(probs[0]), features[0], cache


def bce_loss(probs: np.ndarray, labels: np.ndarray, eps: float = LOSS_EPSILON) -> float:
    """Mean binary cross-entropy with probabilities clipped to [eps, 1-eps]."""
    probs = np.asarray(probs, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if probs.shape != labels.shape:
        raise ValueError(f"probability shape {probs.shape} does not match label shape {labels.shape}")
    if probs.size == 0:
        raise ValueError("empty batch")
    p = np.clip(probs, eps, 1.0 - eps)
    return float(-np.mean(labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p)))


def backward_gradients(
    cache: ForwardCache,
    labels: np.ndarray,
    eps: float = LOSS_EPSILON,
) -> dict[str, np.ndarray]:
    """Gradients of ``bce_loss`` with respect to every parameter tensor.

    Probabilities pinned by the loss clipping contribute no gradient.
    """
    params = cache.params
    labels = np.asarray(labels, dtype=float)
    p = cache.probs
    B, T = cache.tokens.shape
    H = params.hidden_dim
    if labels.shape != p.shape:
        raise ValueError(f"label shape {labels.shape} does not match batch {p.shape}")

    active = (p > eps) & (p < 1.0 - eps)
    dz = np.where(active, p - labels, 0.0) / B

    head_in = cache.features if cache.feature_mask is None else cache.features * cache.feature_mask
    grads: dict[str, np.ndarray] = {
        "w_d": head_in.T @ dz,
        "b_d": np.array([dz.sum()]),
    }
    dh = np.outer(dz, params.w_d)
    if cache.feature_mask is not None:
        dh = dh * cache.feature_mask

    W, U, _ = params.stacked()
    dW = np.zeros_like(W)
    dU = np.zeros_like(U)
    db = np.zeros(4 * H)
    dE = np.zeros_like(params.embedding)
    dc = np.zeros((B, H))

    for t in reversed(range(T)):
        step = cache.gates[t]
        do = dh * step.tanh_c
        dc = dc + dh * step.output * (1.0 - step.tanh_c ** 2)
        dg = dc * step.input
        di = dc * step.candidate
        df = dc * cache.c[t]
        da = np.concatenate(
            [
                dg * (1.0 - step.candidate ** 2),
                di * step.input * (1.0 - step.input),
                df * step.forget * (1.0 - step.forget),
                do * step.output * (1.0 - step.output),
            ],
            axis=1,
        )
        dW += da.T @ cache.x[:, t]
        dU += da.T @ cache.h[t]
        db += da.sum(axis=0)
        dx = da @ W
        if cache.embed_mask is not None:
            dx = dx * cache.embed_mask[:, t]
        np.add.at(dE, cache.tokens[:, t], dx)
        dh = da @ U
        dc = dc * step.forget

    grads["embedding"] = dE
    for k, g in enumerate(GATES):
        grads[f"W_{g}"] = dW[k * H:(k + 1) * H]
        grads[f"U_{g}"] = dU[k * H:(k + 1) * H]
        if params.has_gate_bias:
            grads[f"b_{g}"] = db[k * H:(k + 1) * H]
    return {name: grads[name] for name in params.tensors}
