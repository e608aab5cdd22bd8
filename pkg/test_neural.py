"""
Tests for the neural kernels: GRU cell, attention, whole-model forward,
backpropagation against finite differences, training and weight serialization
"""

import math

import numpy as np
import pytest

from config import MODEL_KINDS
from errors import DataError, EmptySequence, NonFinite, ShapeMismatch
from neural import (
    AttentionParams, GruParams, ModelSpec, NetworkParams, TrainConfig, atgru_forward,
    attention_context, backward, forward, gradient_check, gru_step, init_params,
    loss_and_gradients, params_from_bytes, params_to_bytes, parameter_shapes,
    predict_sequence, random_instance, sigmoid, train,
)
from psr import EmbeddingSpec
from series_core import WindowSet, make_windows


def naive_sigmoid(a):
    return 1.0 / (1.0 + math.exp(-a))


def naive_gru_step(p, x, h_prev):
    """Element-by-element GRU update used as an independent oracle"""
    hidden = len(h_prev)
    a = list(h_prev) + list(x)
    r = [naive_sigmoid(sum(p.W_r[i][j] * a[j] for j in range(len(a))) + p.b_r[i]) for i in range(hidden)]
    z = [naive_sigmoid(sum(p.W_z[i][j] * a[j] for j in range(len(a))) + p.b_z[i]) for i in range(hidden)]
    reset = [r[i] * h_prev[i] for i in range(hidden)] + list(x)
    c = [math.tanh(sum(p.W_h[i][j] * reset[j] for j in range(len(reset))) + p.b_h[i]) for i in range(hidden)]
    h = [(1 - z[i]) * h_prev[i] + z[i] * c[i] for i in range(hidden)]
    y = None
    if p.W_o is not None:
        y = naive_sigmoid(sum(p.W_o[0][i] * h[i] for i in range(hidden)) + p.b_o[0])
    return h, y


def random_gru(rng, hidden, inputs=1, head=True):
    def mat(rows, cols):
        return rng.normal(0.0, 0.6, size=(rows, cols))
    return GruParams(
        mat(hidden, hidden + inputs), mat(hidden, hidden + inputs), mat(hidden, hidden + inputs),
        rng.normal(size=hidden), rng.normal(size=hidden), rng.normal(size=hidden),
        mat(1, hidden) if head else None, rng.normal(size=1) if head else None,
    )


def trained_atgru(seed=3, hidden=4, window=5):
    params = init_params(ModelSpec("AtGRU", window, hidden, seed=seed))
    rng = np.random.default_rng(seed)
    for name in params.weights:
        params.weights[name] += rng.normal(0.0, 0.3, size=params.weights[name].shape)
    return params


# GRU cell

def test_gru_step_all_zero_weights():
    hidden = 3
    zeros = GruParams(np.zeros((hidden, hidden + 1)), np.zeros((hidden, hidden + 1)), np.zeros((hidden, hidden + 1)),
                      np.zeros(hidden), np.zeros(hidden), np.zeros(hidden), np.zeros((1, hidden)), np.zeros(1))
    v = np.array([0.4, -0.2, 0.8])
    h, y = gru_step(zeros, [1.7], v)
    np.testing.assert_allclose(h, 0.5 * v, rtol=0, atol=1e-15)
    assert y == 0.5


def test_gru_step_origin_is_fixed_with_zero_biases():
    rng = np.random.default_rng(0)
    p = random_gru(rng, 4)
    p = GruParams(p.W_r, p.W_z, p.W_h, np.zeros(4), np.zeros(4), np.zeros(4), p.W_o, p.b_o)
    h, _ = gru_step(p, [0.0], np.zeros(4))
    np.testing.assert_array_equal(h, 0.0)


def test_gru_step_matches_naive_oracle():
    rng = np.random.default_rng(1)
    for _ in range(10):
        p = random_gru(rng, 5)
        x = rng.uniform(-1, 1, size=1)
        h_prev = rng.uniform(-1, 1, size=5)
        h, y = gru_step(p, x, h_prev)
        oracle_h, oracle_y = naive_gru_step(p, x, h_prev)
        np.testing.assert_allclose(h, oracle_h, rtol=0, atol=1e-12)
        assert y == pytest.approx(oracle_y, abs=1e-12)


def test_gru_state_stays_bounded():
    rng = np.random.default_rng(2)
    for _ in range(50):
        p = random_gru(rng, 6, head=False)
        h = rng.uniform(-0.999, 0.999, size=6)
        for x in rng.uniform(-5, 5, size=10):
            h, y = gru_step(p, [x], h)
            assert y is None
            assert np.all(np.abs(h) < 1.0)


def test_gru_step_shape_mismatch():
    p = random_gru(np.random.default_rng(3), 3)
    with pytest.raises(ShapeMismatch):
        gru_step(p, [1.0], np.zeros(4))


# Attention

def test_attention_single_state():
    rng = np.random.default_rng(4)
    att = AttentionParams(rng.normal(size=(3, 3)), rng.normal(size=(3, 3)), rng.normal(size=3), rng.normal(size=3))
    state = rng.normal(size=(1, 3))
    weights, context = attention_context(att, state)
    np.testing.assert_array_equal(weights, [1.0])
    np.testing.assert_allclose(context, state[0], rtol=0, atol=1e-15)


def test_attention_identical_states_are_uniform():
    rng = np.random.default_rng(5)
    att = AttentionParams(rng.normal(size=(4, 4)), rng.normal(size=(4, 4)), rng.normal(size=4), rng.normal(size=4))
    states = np.tile(rng.normal(size=4), (6, 1))
    weights, context = attention_context(att, states)
    np.testing.assert_allclose(weights, 1.0 / 6, rtol=0, atol=1e-12)
    np.testing.assert_allclose(context, states[0], rtol=0, atol=1e-12)


def test_attention_hand_case():
    att = AttentionParams(W=np.array([[0.5, -0.2], [0.1, 0.3]]), U=np.array([[0.4, 0.0], [-0.3, 0.2]]),
                          v=np.array([1.0, -0.5]), b=np.array([0.05, -0.1]))
    h1, h2 = [0.2, -0.4], [0.6, 0.1]

    def score(hi):
        query = [0.5 * h2[0] - 0.2 * h2[1], 0.1 * h2[0] + 0.3 * h2[1]]
        key = [0.4 * hi[0], -0.3 * hi[0] + 0.2 * hi[1]]
        return 1.0 * math.tanh(query[0] + key[0] + 0.05) - 0.5 * math.tanh(query[1] + key[1] - 0.1)

    s1, s2 = score(h1), score(h2)
    a1 = math.exp(s1) / (math.exp(s1) + math.exp(s2))
    a2 = 1.0 - a1
    weights, context = attention_context(att, [h1, h2])
    np.testing.assert_allclose(weights, [a1, a2], rtol=0, atol=1e-12)
    np.testing.assert_allclose(context, [a1 * h1[0] + a2 * h2[0], a1 * h1[1] + a2 * h2[1]], rtol=0, atol=1e-12)


def test_attention_weights_are_a_distribution():
    rng = np.random.default_rng(6)
    for k in (2, 5, 17):
        att = AttentionParams(rng.normal(size=(4, 4)), rng.normal(size=(4, 4)), rng.normal(size=4) * 3, rng.normal(size=4))
        weights, _ = attention_context(att, rng.normal(size=(k, 4)))
        assert weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(weights > 0)


def test_softmax_shift_invariance():
    rng = np.random.default_rng(7)
    states = rng.normal(size=(5, 3))
    W, U, v, b = rng.normal(size=(3, 3)), rng.normal(size=(3, 3)), rng.normal(size=3), rng.normal(size=3)
    base, _ = attention_context(AttentionParams(W, U, v, b), states)

    # extra unit whose energy is tanh(2) for every state: all scores move by 3*tanh(2)
    W4, U4 = np.zeros((4, 4)), np.zeros((4, 4))
    W4[:3, :3], U4[:3, :3] = W, U
    padded = np.hstack([states, np.zeros((5, 1))])
    shifted, _ = attention_context(AttentionParams(W4, U4, np.append(v, 3.0), np.append(b, 2.0)), padded)
    np.testing.assert_allclose(shifted, base, rtol=0, atol=1e-12)


def test_attention_errors():
    att = AttentionParams(np.eye(2), np.eye(2), np.ones(2), np.zeros(2))
    with pytest.raises(EmptySequence):
        attention_context(att, np.empty((0, 2)))
    with pytest.raises(ShapeMismatch):
        attention_context(att, np.ones((3, 5)))


# Whole-model forward

def test_atgru_output_is_in_unit_interval():
    rng = np.random.default_rng(8)
    for seed in range(10):
        params = trained_atgru(seed)
        y = atgru_forward(params, rng.uniform(-3, 3, size=5))
        assert 0.0 < y < 1.0


def test_atgru_single_step_reduces_to_gru_head():
    params = trained_atgru(seed=9, window=1)
    x = 0.37
    h, _ = gru_step(params.gru(), [x], np.zeros(4))
    w = params.weights
    expected = sigmoid(w['W_o'] @ np.concatenate([h, h]) + w['b_o'])[0]
    assert atgru_forward(params, [x]) == pytest.approx(expected, abs=1e-12)


def test_atgru_equals_composition_of_cell_and_attention():
    params = trained_atgru(seed=10, window=6)
    window = np.random.default_rng(10).uniform(0, 1, size=6)
    h = np.zeros(4)
    states = []
    for x in window:
        h, _ = gru_step(params.gru(), [x], h)
        states.append(h)
    _, context = attention_context(params.attention(), states)
    w = params.weights
    expected = sigmoid(w['W_o'] @ np.concatenate([context, states[-1]]) + w['b_o'])[0]
    assert atgru_forward(params, window) == pytest.approx(expected, abs=1e-12)


def test_layouts_and_init():
    spec = ModelSpec("MLP", 7, layers=(6, 3), seed=1)
    assert parameter_shapes(spec) == [('W_1', (6, 7)), ('b_1', (6,)), ('W_2', (3, 6)), ('b_2', (3,)),
                                      ('W_o', (1, 3)), ('b_o', (1,))]
    params = init_params(spec)
    assert np.all(params.weights['b_1'] == 0.0)
    assert np.all(np.abs(params.weights['W_1']) <= 1.0 / np.sqrt(7))
    with pytest.raises(ShapeMismatch):
        params.gru()
    with pytest.raises(DataError):
        ModelSpec("LSTM", 5)


# Gradients

def test_zero_error_batch_has_zero_gradients():
    for kind in MODEL_KINDS:
        params, inputs, _ = random_instance(kind, seed=0, hidden=4, window=5)
        targets = forward(params, inputs)
        loss, grads = loss_and_gradients(params, inputs, targets)
        assert loss == 0.0
        for g in grads.values():
            np.testing.assert_array_equal(g, 0.0)


def test_single_sample_gradient_scales_with_residual():
    params, inputs, _ = random_instance("GRU", seed=1, hidden=4, window=5, batch=1)
    y = forward(params, inputs)[0]
    _, first = loss_and_gradients(params, inputs, [y - 0.1])
    _, second = loss_and_gradients(params, inputs, [y - 0.3])
    for name in first:
        np.testing.assert_allclose(second[name], 3.0 * first[name], rtol=1e-10, atol=1e-15)


@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_gradients_match_finite_differences(kind):
    for seed in range(20):
        params, inputs, targets = random_instance(kind, seed, hidden=4, window=5)
        errors = gradient_check(params, inputs, targets)
        assert set(errors) == set(params.weights)
        worst = max(errors, key=errors.get)
        assert errors[worst] < 1e-4, (kind, seed, worst, errors[worst])


def test_backward_uses_window_batch():
    params, inputs, targets = random_instance("AtGRU", seed=2, hidden=3, window=4)
    batch = WindowSet(inputs, targets, EmbeddingSpec(1, 4))
    grads = backward(params, batch)
    _, expected = loss_and_gradients(params, inputs, targets)
    for name in grads:
        np.testing.assert_array_equal(grads[name], expected[name])


# Training

def small_windows(seed=0, n=120, d=5):
    x = 0.5 + 0.3 * np.sin(np.arange(n) * 0.4) + 0.05 * np.random.default_rng(seed).normal(size=n)
    return make_windows(x, EmbeddingSpec(1, d))


def test_zero_learning_rate_leaves_parameters():
    spec = ModelSpec("GRU", 5, hidden=4, seed=3)
    result = train(spec, small_windows(), TrainConfig(epochs=3, batch_size=16, learning_rate=0.0))
    initial = init_params(spec)
    for name, value in initial.weights.items():
        np.testing.assert_array_equal(result.params.weights[name], value)
    assert len(result.loss_curve) == 3


def test_constant_target_loss_decreases():
    windows = small_windows(1)
    constant = WindowSet(windows.inputs, np.full(len(windows), 0.5), windows.spec)
    spec = ModelSpec("MLP", 5, layers=(8, 4), seed=4)
    result = train(spec, constant, TrainConfig(epochs=40, batch_size=16, learning_rate=1e-2, seed=4))
    assert result.loss_curve[-1] < result.loss_curve[0]


def test_training_is_deterministic():
    spec = ModelSpec("AtGRU", 5, hidden=4, seed=5)
    config = TrainConfig(epochs=4, batch_size=8, seed=6)
    first = train(spec, small_windows(2), config)
    second = train(spec, small_windows(2), config)
    assert first.loss_curve == second.loss_curve
    for name in first.params.weights:
        np.testing.assert_array_equal(first.params.weights[name], second.params.weights[name])


def test_sgd_training_runs():
    result = train(ModelSpec("RNN", 5, hidden=4), small_windows(3), TrainConfig(epochs=2, optimizer="SGD"))
    assert all(np.isfinite(result.loss_curve))


def test_non_finite_inputs_are_reported():
    windows = small_windows(4)
    poisoned = windows.inputs.copy()
    poisoned[0, 0] = np.nan
    with pytest.raises(NonFinite) as excinfo:
        train(ModelSpec("GRU", 5, hidden=4), WindowSet(poisoned, windows.targets, windows.spec),
              TrainConfig(epochs=2, batch_size=len(windows)))
    assert excinfo.value.epoch == 1


def test_training_errors():
    with pytest.raises(DataError):
        TrainConfig(learning_rate=-1.0)
    with pytest.raises(DataError):
        TrainConfig(optimizer="RMSprop")
    with pytest.raises(ShapeMismatch):
        train(ModelSpec("GRU", 3, hidden=4), small_windows(), TrainConfig(epochs=1))
    with pytest.raises(EmptySequence):
        train(ModelSpec("GRU", 5, hidden=4), WindowSet(np.empty((0, 5)), np.empty(0), EmbeddingSpec(1, 5)),
              TrainConfig(epochs=1))


# Prediction

def test_predict_sequence():
    params = trained_atgru(seed=11)
    spec = EmbeddingSpec(1, 5)
    empty = predict_sequence(params, WindowSet(np.empty((0, 5)), np.empty(0), spec))
    assert len(empty) == 0

    windows = small_windows(5, n=40)
    single = predict_sequence(params, windows.subset(slice(0, 1)))
    assert single.values[0] == atgru_forward(params, windows.inputs[0])

    batch = predict_sequence(params, windows, "fit")
    assert batch.name == "fit"
    looped = [atgru_forward(params, row) for row in windows.inputs]
    np.testing.assert_allclose(batch.values, looped, rtol=0, atol=1e-14)


# Serialization

@pytest.mark.parametrize("kind", MODEL_KINDS)
def test_serialization_is_exact_and_stable(kind):
    params, _, _ = random_instance(kind, seed=12, hidden=5, window=4)
    data = params_to_bytes(params)
    assert params_to_bytes(params) == data
    restored = params_from_bytes(data)
    assert restored.spec == params.spec
    assert list(restored.weights) == list(params.weights)
    for name, value in params.weights.items():
        assert restored.weights[name].tobytes() == value.tobytes()
    assert params_to_bytes(restored) == data


def test_deserialization_rejects_foreign_bytes():
    with pytest.raises(DataError):
        params_from_bytes(b"not a weight file")

    params, _, _ = random_instance("GRU", seed=13, hidden=3, window=4)
    trimmed = NetworkParams(params.spec, {k: v for k, v in params.weights.items() if k != 'b_o'})
    with pytest.raises(ShapeMismatch):
        params_from_bytes(params_to_bytes(trimmed))
