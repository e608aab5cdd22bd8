"""
From-scratch neural kernels for the predictor and the error correctors
MLP (BPNN), vanilla RNN, GRU and attention-GRU with manual backpropagation
through time, Adam/SGD training, finite-difference gradient verification and
a versioned weight format
"""

import io
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from config import (
    ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON, BATCH_SIZE, EPOCHS, GRADCHECK_FLOOR,
    GRADCHECK_STEP, HIDDEN_UNITS, LEARNING_RATE, LOSS, MLP_LAYERS, MODEL_KINDS,
    OPTIMIZER, OPTIMIZERS, PARAMS_FORMAT_VERSION,
)
from errors import DataError, EmptySequence, NonFinite, ShapeMismatch
from series_core import Series, WindowSet

logger = logging.getLogger(__name__)

PREDICT_CHUNK = 512  # windows per forward pass when predicting


@dataclass(frozen=True)
class ModelSpec:
    """Architecture descriptor: kind, window length, hidden width, MLP layers, init seed"""

    kind: str
    input_dim: int
    hidden: int = HIDDEN_UNITS
    layers: Tuple[int, ...] = MLP_LAYERS
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(int(n) for n in self.layers))
        if self.kind not in MODEL_KINDS:
            raise DataError(f"model kind must be one of {MODEL_KINDS}, got '{self.kind}'")
        if self.input_dim < 1 or self.hidden < 1 or any(n < 1 for n in self.layers):
            raise DataError(f"model dimensions must be positive: input_dim={self.input_dim}, hidden={self.hidden}, layers={self.layers}")

    def as_dict(self) -> Dict:
        return {'kind': self.kind, 'input_dim': self.input_dim, 'hidden': self.hidden,
                'layers': list(self.layers), 'seed': self.seed}


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = EPOCHS
    batch_size: int = BATCH_SIZE
    learning_rate: float = LEARNING_RATE
    optimizer: str = OPTIMIZER
    loss: str = LOSS
    seed: int = 0

    def __post_init__(self):
        problems = []
        if self.epochs < 1:
            problems.append(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            problems.append(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate < 0:
            problems.append(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.optimizer not in OPTIMIZERS:
            problems.append(f"optimizer must be one of {OPTIMIZERS}, got '{self.optimizer}'")
        if self.loss != LOSS:
            problems.append(f"loss must be 'MSE', got '{self.loss}'")
        if problems:
            raise DataError("invalid training config: " + "; ".join(problems))


@dataclass(frozen=True)
class GruParams:
    W_r: np.ndarray
    W_z: np.ndarray
    W_h: np.ndarray
    b_r: np.ndarray
    b_z: np.ndarray
    b_h: np.ndarray
    W_o: Optional[np.ndarray] = None
    b_o: Optional[np.ndarray] = None

    @property
    def hidden(self) -> int:
        return len(self.b_r)


@dataclass(frozen=True)
class AttentionParams:
    W: np.ndarray
    U: np.ndarray
    v: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class NetworkParams:
    """Complete weight set of one model plus its architecture descriptor"""

    spec: ModelSpec
    weights: Dict[str, np.ndarray]

    def gru(self) -> GruParams:
        w = self.weights
        if self.spec.kind == "GRU":
            return GruParams(w['W_r'], w['W_z'], w['W_h'], w['b_r'], w['b_z'], w['b_h'], w['W_o'], w['b_o'])
        if self.spec.kind == "AtGRU":
            return GruParams(w['W_r'], w['W_z'], w['W_h'], w['b_r'], w['b_z'], w['b_h'])
        raise ShapeMismatch(f"{self.spec.kind} model has no GRU cell")

    def attention(self) -> AttentionParams:
        if self.spec.kind != "AtGRU":
            raise ShapeMismatch(f"{self.spec.kind} model has no attention layer")
        w = self.weights
        return AttentionParams(w['att_W'], w['att_U'], w['att_v'], w['att_b'])

    def copy(self) -> "NetworkParams":
        return NetworkParams(self.spec, {name: value.copy() for name, value in self.weights.items()})


@dataclass
class TrainResult:
    params: NetworkParams
    loss_curve: List[float] = field(default_factory=list)


# Parameter layout and initialization

def parameter_shapes(spec: ModelSpec) -> List[Tuple[str, Tuple[int, ...]]]:
    """Ordered (name, shape) list; the order fixes initialization and serialization"""
    h = spec.hidden
    if spec.kind == "MLP":
        sizes = [spec.input_dim] + list(spec.layers)
        shapes = []
        for i in range(1, len(sizes)):
            shapes += [(f'W_{i}', (sizes[i], sizes[i - 1])), (f'b_{i}', (sizes[i],))]
        return shapes + [('W_o', (1, sizes[-1])), ('b_o', (1,))]
    if spec.kind == "RNN":
        return [('W_h', (h, h + 1)), ('b_h', (h,)), ('W_o', (1, h)), ('b_o', (1,))]

    cell = [('W_r', (h, h + 1)), ('W_z', (h, h + 1)), ('W_h', (h, h + 1)),
            ('b_r', (h,)), ('b_z', (h,)), ('b_h', (h,))]
    if spec.kind == "GRU":
        return cell + [('W_o', (1, h)), ('b_o', (1,))]
    return cell + [('att_W', (h, h)), ('att_U', (h, h)), ('att_v', (h,)), ('att_b', (h,)),
                   ('W_o', (1, 2 * h)), ('b_o', (1,))]


def _is_bias(name: str) -> bool:
    return name.startswith('b_') or name == 'att_b'


def init_params(spec: ModelSpec) -> NetworkParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases, seeded"""
    rng = np.random.default_rng(spec.seed)
    weights = {}
    for name, shape in parameter_shapes(spec):
        if _is_bias(name):
            weights[name] = np.zeros(shape)
        else:
            bound = 1.0 / np.sqrt(shape[-1])
            weights[name] = rng.uniform(-bound, bound, size=shape)
    return NetworkParams(spec, weights)


# Activations

def sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


# Recurrent cells (batched, row-vector convention: pre = [h, x] @ W.T + b)

def _gru_forward(w: Dict[str, np.ndarray], X: np.ndarray, keep: bool = True):
    batch, steps = X.shape
    hidden = w['b_r'].shape[0]
    h = np.zeros((batch, hidden))
    states = np.empty((batch, steps, hidden))
    caches = []
    for t in range(steps):
        x = X[:, t:t + 1]
        a = np.concatenate([h, x], axis=1)
        r = sigmoid(a @ w['W_r'].T + w['b_r'])
        z = sigmoid(a @ w['W_z'].T + w['b_z'])
        a_reset = np.concatenate([r * h, x], axis=1)
        c = np.tanh(a_reset @ w['W_h'].T + w['b_h'])
        if keep:
            caches.append((h, a, r, z, a_reset, c))
        h = (1.0 - z) * h + z * c
        states[:, t, :] = h
    return states, caches


def _gru_backward(w, caches, d_states, grads):
    hidden = w['b_r'].shape[0]
    dh = np.zeros_like(d_states[:, 0, :])
    for t in range(len(caches) - 1, -1, -1):
        h_prev, a, r, z, a_reset, c = caches[t]
        dh = dh + d_states[:, t, :]

        d_pre_c = dh * z * (1.0 - c ** 2)
        dz = dh * (c - h_prev)
        dh_prev = dh * (1.0 - z)

        grads['W_h'] += d_pre_c.T @ a_reset
        grads['b_h'] += d_pre_c.sum(axis=0)
        d_reset_h = (d_pre_c @ w['W_h'])[:, :hidden]
        dh_prev += d_reset_h * r

        d_pre_z = dz * z * (1.0 - z)
        d_pre_r = d_reset_h * h_prev * r * (1.0 - r)
        grads['W_z'] += d_pre_z.T @ a
        grads['b_z'] += d_pre_z.sum(axis=0)
        grads['W_r'] += d_pre_r.T @ a
        grads['b_r'] += d_pre_r.sum(axis=0)
        dh_prev += (d_pre_z @ w['W_z'] + d_pre_r @ w['W_r'])[:, :hidden]
        dh = dh_prev


def _rnn_forward(w, X, keep: bool = True):
    batch, steps = X.shape
    hidden = w['b_h'].shape[0]
    h = np.zeros((batch, hidden))
    states = np.empty((batch, steps, hidden))
    caches = []
    for t in range(steps):
        a = np.concatenate([h, X[:, t:t + 1]], axis=1)
        h = np.tanh(a @ w['W_h'].T + w['b_h'])
        if keep:
            caches.append((a, h))
        states[:, t, :] = h
    return states, caches


def _rnn_backward(w, caches, d_states, grads):
    hidden = w['b_h'].shape[0]
    dh = np.zeros_like(d_states[:, 0, :])
    for t in range(len(caches) - 1, -1, -1):
        a, h = caches[t]
        d_pre = (dh + d_states[:, t, :]) * (1.0 - h ** 2)
        grads['W_h'] += d_pre.T @ a
        grads['b_h'] += d_pre.sum(axis=0)
        dh = (d_pre @ w['W_h'])[:, :hidden]


# Attention: S_i = v . tanh(W h_k + U h_i + b), softmax over i

def _attend(w, states):
    final = states[:, -1, :]
    energy = np.tanh((final @ w['att_W'].T)[:, None, :] + states @ w['att_U'].T + w['att_b'])
    scores = energy @ w['att_v']
    scores = scores - scores.max(axis=1, keepdims=True)
    weights = np.exp(scores)
    weights /= weights.sum(axis=1, keepdims=True)
    context = np.einsum('bt,bth->bh', weights, states)
    return weights, context, energy


def _attend_backward(w, states, weights, energy, d_context, grads):
    """Returns the gradient w.r.t. every hidden state"""
    final = states[:, -1, :]
    d_states = weights[:, :, None] * d_context[:, None, :]
    d_weights = np.einsum('bh,bth->bt', d_context, states)
    d_scores = weights * (d_weights - np.sum(weights * d_weights, axis=1, keepdims=True))

    grads['att_v'] += np.einsum('bt,bth->h', d_scores, energy)
    d_pre = d_scores[:, :, None] * w['att_v'][None, None, :] * (1.0 - energy ** 2)
    grads['att_b'] += d_pre.sum(axis=(0, 1))
    d_query = d_pre.sum(axis=1)
    grads['att_W'] += d_query.T @ final
    grads['att_U'] += np.einsum('bth,bti->hi', d_pre, states)

    d_states += d_pre @ w['att_U']
    d_states[:, -1, :] += d_query @ w['att_W']
    return d_states


# Whole-model forward / backward

def _forward(kind: str, w: Dict[str, np.ndarray], X: np.ndarray, keep: bool = True):
    """Predictions y (B,) and the cache needed by ``_backward``"""
    if kind == "MLP":
        acts = [X]
        n_layers = (len(w) - 2) // 2
        for i in range(1, n_layers + 1):
            acts.append(np.tanh(acts[-1] @ w[f'W_{i}'].T + w[f'b_{i}']))
        features = acts[-1]
        cache = acts
    elif kind == "RNN":
        states, steps = _rnn_forward(w, X, keep)
        features = states[:, -1, :]
        cache = (states, steps)
    elif kind == "GRU":
        states, steps = _gru_forward(w, X, keep)
        features = states[:, -1, :]
        cache = (states, steps)
    else:
        states, steps = _gru_forward(w, X, keep)
        att_weights, context, energy = _attend(w, states)
        features = np.concatenate([context, states[:, -1, :]], axis=1)
        cache = (states, steps, att_weights, energy)

    y = sigmoid(features @ w['W_o'].T + w['b_o'])[:, 0]
    return y, (features, cache)


def _backward(kind: str, w, cache, dy: np.ndarray) -> Dict[str, np.ndarray]:
    features, inner = cache
    grads = {name: np.zeros_like(value) for name, value in w.items()}
    y_pre_grad = dy  # already multiplied by the sigmoid derivative by the caller
    grads['W_o'] += y_pre_grad[None, :] @ features
    grads['b_o'] += y_pre_grad.sum(keepdims=True)
    d_features = y_pre_grad[:, None] @ w['W_o']

    if kind == "MLP":
        acts = inner
        d_act = d_features
        for i in range(len(acts) - 1, 0, -1):
            d_pre = d_act * (1.0 - acts[i] ** 2)
            grads[f'W_{i}'] += d_pre.T @ acts[i - 1]
            grads[f'b_{i}'] += d_pre.sum(axis=0)
            d_act = d_pre @ w[f'W_{i}']
        return grads

    if kind == "AtGRU":
        states, steps, att_weights, energy = inner
        hidden = states.shape[2]
        d_states = _attend_backward(w, states, att_weights, energy, d_features[:, :hidden], grads)
        d_states[:, -1, :] += d_features[:, hidden:]
        _gru_backward(w, steps, d_states, grads)
        return grads

    states, steps = inner
    d_states = np.zeros_like(states)
    d_states[:, -1, :] = d_features
    if kind == "RNN":
        _rnn_backward(w, steps, d_states, grads)
    else:
        _gru_backward(w, steps, d_states, grads)
    return grads


def _check_inputs(params: NetworkParams, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != params.spec.input_dim:
        raise ShapeMismatch(f"{params.spec.kind} expects windows of length {params.spec.input_dim}, got shape {X.shape}")
    return X


def loss_and_gradients(params: NetworkParams, inputs: np.ndarray, targets: np.ndarray) -> Tuple[float, Dict[str, np.ndarray]]:
    """Mean squared error of a batch and its gradient w.r.t. every parameter"""
    X = _check_inputs(params, inputs)
    t = np.asarray(targets, dtype=np.float64).reshape(-1)
    if len(t) != len(X):
        raise ShapeMismatch(f"{len(X)} windows but {len(t)} targets")
    if len(t) == 0:
        raise EmptySequence("gradient of an empty batch")
    y, cache = _forward(params.spec.kind, params.weights, X)
    error = y - t
    loss = float(np.mean(error ** 2))
    dy = (2.0 / len(t)) * error * y * (1.0 - y)
    return loss, _backward(params.spec.kind, params.weights, cache, dy)


def forward(params: NetworkParams, inputs: np.ndarray) -> np.ndarray:
    X = _check_inputs(params, inputs)
    out = np.empty(len(X))
    for start in range(0, len(X), PREDICT_CHUNK):
        out[start:start + PREDICT_CHUNK] = _forward(params.spec.kind, params.weights, X[start:start + PREDICT_CHUNK], keep=False)[0]
    return out


# Single-sample operations

def gru_step(params: GruParams, x: np.ndarray, h_prev: np.ndarray) -> Tuple[np.ndarray, Optional[float]]:
    """One GRU update; y is None when the cell carries no output head"""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    h_prev = np.asarray(h_prev, dtype=np.float64).reshape(-1)
    if len(h_prev) != params.hidden or params.W_r.shape[1] != params.hidden + len(x):
        raise ShapeMismatch(f"GRU cell expects hidden {params.hidden} and input {params.W_r.shape[1] - params.hidden}, got {len(h_prev)} and {len(x)}")
    a = np.concatenate([h_prev, x])
    r = sigmoid(params.W_r @ a + params.b_r)
    z = sigmoid(params.W_z @ a + params.b_z)
    c = np.tanh(params.W_h @ np.concatenate([r * h_prev, x]) + params.b_h)
    h = (1.0 - z) * h_prev + z * c
    if params.W_o is None:
        return h, None
    return h, float(sigmoid(params.W_o @ h + params.b_o)[0])


def attention_context(params: AttentionParams, states) -> Tuple[np.ndarray, np.ndarray]:
    states = np.asarray(states, dtype=np.float64)
    if states.size == 0:
        raise EmptySequence("attention needs at least one hidden state")
    if states.ndim != 2 or states.shape[1] != len(params.v):
        raise ShapeMismatch(f"attention expects states of width {len(params.v)}, got shape {states.shape}")
    w = {'att_W': params.W, 'att_U': params.U, 'att_v': params.v, 'att_b': params.b}
    weights, context, _ = _attend(w, states[None, :, :])
    return weights[0], context[0]


def atgru_forward(model: NetworkParams, window) -> float:
    if model.spec.kind != "AtGRU":
        raise ShapeMismatch(f"atgru_forward needs an AtGRU model, got {model.spec.kind}")
    return float(forward(model, np.asarray(window, dtype=np.float64).reshape(1, -1))[0])


def backward(model: NetworkParams, batch: WindowSet) -> Dict[str, np.ndarray]:
    """Gradients of the batch MSE w.r.t. every parameter"""
    return loss_and_gradients(model, batch.inputs, batch.targets)[1]


def predict_sequence(params: NetworkParams, windows: WindowSet, name: str = "prediction") -> Series:
    """One normalized output per window, in window order"""
    if len(windows) == 0:
        return Series(np.empty(0), name)
    return Series(forward(params, windows.inputs), name)


# Optimizers

class Adam:
    """Adaptive moment estimation with bias correction"""

    def __init__(self, weights: Dict[str, np.ndarray], learning_rate: float = LEARNING_RATE,
                 beta1: float = ADAM_BETA1, beta2: float = ADAM_BETA2, eps: float = ADAM_EPSILON):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(value) for name, value in weights.items()}
        self.v = {name: np.zeros_like(value) for name, value in weights.items()}

    def step(self, weights: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]):
        self.t += 1
        for name, g in grads.items():
            self.m[name] = self.beta1 * self.m[name] + (1 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1 - self.beta2) * g ** 2
            m_hat = self.m[name] / (1 - self.beta1 ** self.t)
            v_hat = self.v[name] / (1 - self.beta2 ** self.t)
            weights[name] -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


class SGD:
    def __init__(self, weights: Dict[str, np.ndarray], learning_rate: float = LEARNING_RATE):
        self.learning_rate = learning_rate

    def step(self, weights, grads):
        for name, g in grads.items():
            weights[name] -= self.learning_rate * g


def train(model_spec: ModelSpec, windows: WindowSet, config: TrainConfig,
          initial: Optional[NetworkParams] = None) -> TrainResult:
    """Minibatch training; deterministic given ModelSpec.seed and TrainConfig.seed"""
    n = len(windows)
    if n == 0:
        raise EmptySequence("cannot train on an empty WindowSet")
    if windows.spec.dimension != model_spec.input_dim:
        raise ShapeMismatch(f"windows have dimension {windows.spec.dimension}, model expects {model_spec.input_dim}")

    params = (initial or init_params(model_spec)).copy()
    optimizer = (Adam if config.optimizer == "Adam" else SGD)(params.weights, config.learning_rate)
    rng = np.random.default_rng(config.seed)
    logger.info(f"Training {model_spec.kind} (hidden={model_spec.hidden}) on {n} windows for {config.epochs} epochs")

    curve = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            loss, grads = loss_and_gradients(params, windows.inputs[batch], windows.targets[batch])
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
                raise NonFinite(f"{model_spec.kind} loss or gradient is not finite", epoch=epoch)
            optimizer.step(params.weights, grads)
            total += loss * len(batch)
        curve.append(total / n)
        logger.debug(f"{model_spec.kind} epoch {epoch}/{config.epochs}: loss {curve[-1]:.6f}")

    logger.info(f"{model_spec.kind} training done, final loss {curve[-1]:.6f}")
    return TrainResult(params, curve)


# Gradient verification

def numerical_gradients(params: NetworkParams, inputs, targets, step: float = GRADCHECK_STEP) -> Dict[str, np.ndarray]:
    """Central finite differences of the batch MSE, one entry at a time"""
    perturbed = params.copy()
    t = np.asarray(targets, dtype=np.float64)

    def loss():
        y, _ = _forward(perturbed.spec.kind, perturbed.weights, np.asarray(inputs, dtype=np.float64), keep=False)
        return float(np.mean((y - t) ** 2))

    numeric = {}
    for name, value in perturbed.weights.items():
        grad = np.zeros_like(value)
        flat = value.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            upper = loss()
            flat[i] = original - step
            lower = loss()
            flat[i] = original
            grad.reshape(-1)[i] = (upper - lower) / (2.0 * step)
        numeric[name] = grad
    return numeric


def gradient_check(params: NetworkParams, inputs, targets, step: float = GRADCHECK_STEP,
                   floor: float = GRADCHECK_FLOOR) -> Dict[str, float]:
    """Max relative error between analytic and numerical gradients, per parameter"""
    _, analytic = loss_and_gradients(params, inputs, targets)
    numeric = numerical_gradients(params, inputs, targets, step)
    errors = {}
    for name in analytic:
        a, n = analytic[name], numeric[name]
        scale = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        errors[name] = float(np.max(np.abs(a - n) / scale))
    return errors


def random_instance(kind: str, seed: int, hidden: int, window: int, batch: int = 3):
    """Small randomized model (biases included) with random windows and targets"""
    rng = np.random.default_rng(seed)
    layers = (hidden, max(1, hidden // 2))
    spec = ModelSpec(kind, window, hidden, layers, seed)
    weights = {name: rng.normal(0.0, 0.5, size=shape) for name, shape in parameter_shapes(spec)}
    inputs = rng.uniform(0.0, 1.0, size=(batch, window))
    targets = rng.uniform(0.05, 0.95, size=batch)
    return NetworkParams(spec, weights), inputs, targets


# Serialization

PARAMS_MAGIC = b"FCPARAMS"


def params_to_bytes(params: NetworkParams) -> bytes:
    """Magic tag, length-prefixed JSON header (version, architecture, seed, layout),
    then one .npy record per weight in layout order; output is byte-stable"""
    header = {
        'version': PARAMS_FORMAT_VERSION,
        'spec': params.spec.as_dict(),
        'layout': [[name, list(value.shape)] for name, value in params.weights.items()],
    }
    encoded = json.dumps(header, sort_keys=True).encode('utf-8')
    buffer = io.BytesIO()
    buffer.write(PARAMS_MAGIC)
    buffer.write(len(encoded).to_bytes(4, 'little'))
    buffer.write(encoded)
    for value in params.weights.values():
        np.lib.format.write_array(buffer, np.ascontiguousarray(value, dtype=np.float64), allow_pickle=False)
    return buffer.getvalue()


def params_from_bytes(data: bytes) -> NetworkParams:
    buffer = io.BytesIO(data)
    if buffer.read(len(PARAMS_MAGIC)) != PARAMS_MAGIC:
        raise DataError("not a serialized weight set")
    size = int.from_bytes(buffer.read(4), 'little')
    header = json.loads(buffer.read(size).decode('utf-8'))
    if header.get('version') != PARAMS_FORMAT_VERSION:
        raise DataError(f"unsupported weight format version {header.get('version')}")

    fields = header['spec']
    spec = ModelSpec(fields['kind'], fields['input_dim'], fields['hidden'], tuple(fields['layers']), fields['seed'])
    expected = dict(parameter_shapes(spec))
    weights = {}
    for name, shape in header['layout']:
        value = np.lib.format.read_array(buffer, allow_pickle=False)
        if expected.get(name) != value.shape or list(value.shape) != shape:
            raise ShapeMismatch(f"weight '{name}' has shape {value.shape}, architecture expects {expected.get(name)}")
        weights[name] = value
    if set(weights) != set(expected):
        raise ShapeMismatch(f"weight set {sorted(weights)} does not match {spec.kind} layout {sorted(expected)}")
    return NetworkParams(spec, weights)
