import numpy as np
import pytest

from corrnet.errors import (BadMagicError, ParameterError, ShapeMismatchError, TrainingDivergence,
                            TruncationError)
from corrnet.mlp import (SELU_ALPHA, SELU_SCALE, AdamState, TrainConfig, backward, forward,
                         grad_check, init_model, load_model, loss, loss_grad, parameter_count,
                         predict, save_model, selu, train)


def small_model(gen, seed, hidden="selu", output="tanh", bias=True):
    dims = [int(gen.integers(2, 6)), int(gen.integers(2, 6)), int(gen.integers(2, 5)), 3]
    return init_model(dims, hidden, output, seed, use_bias=bias)


def test_selu_constants_and_shape():
    assert selu(np.array([1.0]))[0] == SELU_SCALE
    assert selu(np.array([-1e9]))[0] == pytest.approx(-SELU_SCALE * SELU_ALPHA)
    assert selu(np.array([0.0]))[0] == 0.0


def test_parameter_count_full_scale():
    dims = [2000, 1225, 5041, 4950]
    body = 2000 * 1225 + 1225 * 5041 + 5041 * 4950
    assert parameter_count(dims, use_bias=False) == body
    assert parameter_count(dims) == body + 1225 + 5041 + 4950


def test_init_statistics_and_determinism():
    m = init_model([400, 300, 3], init_seed=5)
    assert m == init_model([400, 300, 3], init_seed=5)
    assert m != init_model([400, 300, 3], init_seed=6)
    assert abs(m.weights[0].var() - 1 / 400) < 0.1 / 400
    assert all(np.all(b == 0) for b in m.biases)
    assert m.parameter_count() == parameter_count([400, 300, 3])


def test_forward_range_and_purity(gen):
    m = init_model([6, 8, 3], init_seed=1)
    x = gen.normal(size=6) * 10
    out = predict(m, x)
    assert out.shape == (3,) and np.all(np.abs(out) < 1)
    assert np.array_equal(out, predict(m, x.copy()))
    batch = predict(m, np.vstack([x, x]))
    assert np.array_equal(batch[0], batch[1])


def test_loss_examples():
    t = np.array([0.1, -0.3, 0.5])
    assert loss(t, t) == 0.0
    assert loss(t + 0.1, t) == pytest.approx(0.01, abs=1e-15)


def test_grad_check_random_models(gen):
    worst = 0.0
    for seed in range(20):
        for bias in (True, False):
            m = small_model(gen, seed, output=["tanh", "sigmoid", "linear"][seed % 3], bias=bias)
            x = gen.normal(size=m.input_dim)
            t = gen.uniform(-0.9, 0.9, size=m.output_dim)
            worst = max(worst, grad_check(m, x, t, h=1e-5))
    assert worst < 1e-4


def test_grad_check_linear_model(gen):
    m = init_model([4, 3, 3], "linear", "linear", 2)
    x = gen.normal(size=4)
    t = gen.normal(size=3)
    assert grad_check(m, x, t) < 1e-8


def test_grad_check_large_step_degrades(gen):
    m = init_model([4, 5, 3], init_seed=3)
    x = gen.normal(size=4) * 2
    t = gen.uniform(-0.5, 0.5, size=3)
    assert grad_check(m, x, t, h=0.1) > 10 * grad_check(m, x, t, h=1e-5)


def test_batch_gradient_is_mean_of_single_gradients(gen):
    m = init_model([3, 4, 3], init_seed=4)
    xb = gen.normal(size=(5, 3))
    tb = gen.uniform(-0.5, 0.5, size=(5, 3))
    fp = forward(m, xb)
    grads = backward(m, fp, loss_grad(fp.output, tb))
    singles = []
    for x, t in zip(xb, tb):
        f1 = forward(m, x)
        singles.append(backward(m, f1, loss_grad(f1.output, t)))
    for k, g in enumerate(grads):
        assert np.allclose(g, np.mean([s[k] for s in singles], axis=0), atol=1e-14)


def test_adam_zero_gradient_and_first_step():
    p = [np.array([1.0, -2.0])]
    opt = AdamState(lr=1e-3)
    opt.step(p, [np.zeros(2)])
    assert np.array_equal(p[0], [1.0, -2.0])
    q = [np.array([0.5])]
    AdamState(lr=1e-3).step(q, [np.array([3.0])])
    assert q[0][0] == pytest.approx(0.5 - 1e-3, abs=1e-9)


def test_training_reduces_loss_and_is_deterministic(gen):
    x = gen.normal(size=(200, 8))
    w = gen.normal(size=(8, 3)) / 4
    y = np.tanh(x @ w)
    m = init_model([8, 16, 3], init_seed=1)
    cfg = TrainConfig(epochs=40, batch_size=16, lr=3e-3, shuffle_seed=2, init_seed=1)
    a, hist = train(m, (x, y), cfg)
    b, _ = train(m, (x, y), cfg)
    assert hist[-1] < 0.2 * hist[0]
    assert a == b
    assert m == init_model([8, 16, 3], init_seed=1)  # input model untouched


def test_training_divergence_is_typed():
    x = np.ones((4, 2))
    y = np.full((4, 1), np.inf)
    m = init_model([2, 2, 1], output_activation="linear")
    with pytest.raises(TrainingDivergence):
        train(m, (x, y), TrainConfig(epochs=1, batch_size=2))


def test_bad_activation():
    with pytest.raises(ParameterError):
        init_model([2, 2], "relu")


def test_model_round_trip_and_corruption(tmp_path):
    m = init_model([5, 7, 3], "selu", "sigmoid", 9, use_bias=False)
    p = tmp_path / "m.cnnn"
    save_model(m, p)
    back = load_model(p, expected_dims=[5, 7, 3])
    assert back == m
    q = tmp_path / "q.cnnn"
    save_model(back, q)
    assert q.read_bytes() == p.read_bytes()
    with pytest.raises(ShapeMismatchError, match="shape mismatch"):
        load_model(p, expected_dims=[5, 8, 3])
    raw = p.read_bytes()
    (tmp_path / "t.cnnn").write_bytes(raw[:-8])
    with pytest.raises(TruncationError, match="truncation"):
        load_model(tmp_path / "t.cnnn")
    (tmp_path / "b.cnnn").write_bytes(b"CNDS" + raw[4:])
    with pytest.raises(BadMagicError):
        load_model(tmp_path / "b.cnnn")
