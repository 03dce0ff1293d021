import numpy as np
import pytest

from v2vrl import (ConfigError, ContractError, TrainingError, rng_stream)
from v2vrl.qnet import (QNetwork, backward, backward_batch, copy_params,
                        forward, forward_batch, gradient_check, init_qnetwork,
                        load_checkpoint, save_checkpoint, sgd_update)


def tiny_net(seed=0, dims=(3, 4, 2)):
    return init_qnetwork(list(dims), rng_stream(seed, "init"))


# -- init ----------------------------------------------------------------

def test_init_shapes_and_bounds():
    net = init_qnetwork([5, 7, 3], rng_stream(1, "init"))
    assert [w.shape for w in net.weights] == [(7, 5), (3, 7)]
    assert [b.shape for b in net.biases] == [(7,), (3,)]
    for w in net.weights:
        fan_in, fan_out = w.shape[1], w.shape[0]
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        assert np.all(np.abs(w) <= limit)
    for b in net.biases:
        assert np.all(b == 0.0)


def test_init_is_seed_deterministic():
    a = init_qnetwork([4, 6, 2], rng_stream(3, "init"))
    b = init_qnetwork([4, 6, 2], rng_stream(3, "init"))
    for wa, wb in zip(a.weights, b.weights):
        assert np.array_equal(wa, wb)


@pytest.mark.parametrize("dims", [[], [4], [4, 0, 2], [4, -1, 2]])
def test_init_rejects_bad_dims(dims):
    with pytest.raises(ConfigError):
        init_qnetwork(dims, rng_stream(0, "init"))


# -- forward -------------------------------------------------------------

def test_forward_matches_hand_matrix_math():
    net = QNetwork(
        dims=[2, 3, 2],
        weights=[np.array([[1.0, 0.0], [0.0, 1.0], [1.0, -1.0]]),
                 np.array([[1.0, 2.0, 0.5], [0.0, -1.0, 1.0]])],
        biases=[np.array([0.1, -0.2, 0.0]), np.array([0.0, 1.0])])
    x = np.array([2.0, 1.0])
    h = np.maximum(0.0, np.array([2.1, 0.8, 1.0]))
    expect = np.array([
        1.0 * h[0] + 2.0 * h[1] + 0.5 * h[2],
        0.0 * h[0] - 1.0 * h[1] + 1.0 * h[2] + 1.0,
    ])
    assert np.allclose(forward(net, x), expect)


def test_forward_relu_clips_negative_preactivations():
    net = QNetwork(dims=[1, 1, 1],
                   weights=[np.array([[1.0]]), np.array([[5.0]])],
                   biases=[np.array([0.0]), np.array([0.0])])
    assert forward(net, np.array([-3.0]))[0] == 0.0
    assert forward(net, np.array([2.0]))[0] == 10.0


def test_forward_batch_agrees_with_single():
    net = tiny_net(2, (6, 8, 4))
    rng = rng_stream(2, "x")
    xs = rng.normal(size=(10, 6))
    batch = forward_batch(net, xs)
    for i in range(10):
        assert np.allclose(batch[i], forward(net, xs[i]))


def test_forward_rejects_wrong_width():
    net = tiny_net()
    with pytest.raises(ContractError):
        forward(net, np.zeros(5))
    with pytest.raises(ContractError):
        forward_batch(net, np.zeros((4, 5)))


# -- backward -----------------------------------------------------------

def test_single_linear_layer_gradient_by_hand():
    # no hidden layer: Q = W x + b, loss = 0.5 td^2, td on action 1
    net = QNetwork(dims=[2, 2],
                   weights=[np.array([[1.0, 2.0], [3.0, 4.0]])],
                   biases=[np.array([0.0, 0.0])])
    x = np.array([0.5, -1.0])
    td = 2.0
    g = backward(net, x, action_index=1, td_error=td)
    assert np.allclose(g.d_weights[0], [[0.0, 0.0], [td * 0.5, td * -1.0]])
    assert np.allclose(g.d_biases[0], [0.0, td])


def test_backward_batch_averages_per_sample_gradients():
    net = tiny_net(4, (5, 6, 3))
    rng = rng_stream(4, "x")
    xs = rng.normal(size=(8, 5))
    acts = rng.integers(3, size=8)
    tds = rng.normal(size=8)
    gb = backward_batch(net, xs, acts, tds)
    singles = [backward(net, xs[i], int(acts[i]), float(tds[i])) for i in range(8)]
    for li in range(len(net.weights)):
        mean_w = np.mean([s.d_weights[li] for s in singles], axis=0)
        mean_b = np.mean([s.d_biases[li] for s in singles], axis=0)
        assert np.allclose(gb.d_weights[li], mean_w)
        assert np.allclose(gb.d_biases[li], mean_b)


def test_gradient_touches_only_chosen_output_row():
    net = tiny_net(5, (4, 6, 3))
    g = backward(net, np.ones(4), action_index=2, td_error=1.5)
    out_w = g.d_weights[-1]
    assert np.allclose(out_w[[0, 1]], 0.0)
    assert np.any(out_w[2] != 0.0)


def test_finite_difference_gradient_check():
    worst = gradient_check(n_triples=60, seed=0)
    assert worst < 1e-5


# -- sgd ------------------------------------------------------------------

def test_sgd_update_is_plain_descent():
    net = tiny_net(6)
    before = [w.copy() for w in net.weights]
    g = backward(net, np.ones(3), action_index=0, td_error=1.0)
    sgd_update(net, g, lr=0.1)
    for w0, w1, dw in zip(before, net.weights, g.d_weights):
        assert np.allclose(w1, w0 - 0.1 * dw)


def test_sgd_rejects_bad_lr_and_nonfinite_grads():
    net = tiny_net(7)
    g = backward(net, np.ones(3), action_index=0, td_error=1.0)
    with pytest.raises(ContractError):
        sgd_update(net, g, lr=0.0)
    g.d_weights[0][0, 0] = np.inf
    snapshot = [w.copy() for w in net.weights]
    with pytest.raises(TrainingError):
        sgd_update(net, g, lr=0.1)
    for w0, w1 in zip(snapshot, net.weights):  # params untouched on failure
        assert np.array_equal(w0, w1)


def test_repeated_updates_descend_on_fixed_target():
    net = tiny_net(8, (4, 8, 3))
    rng = rng_stream(8, "x")
    x = rng.normal(size=4)
    target = 3.0
    action = 1

    def loss():
        return 0.5 * (forward(net, x)[action] - target) ** 2

    losses = [loss()]
    for _ in range(200):
        td = forward(net, x)[action] - target
        sgd_update(net, backward(net, x, action, td), lr=1e-2)
        losses.append(loss())
    assert losses[-1] < 1e-3 * losses[0]


def test_copy_params_detaches_storage():
    src = tiny_net(9)
    dst = copy_params(src)
    rng = rng_stream(9, "x")
    x = rng.normal(size=3)
    assert np.array_equal(forward(src, x), forward(dst, x))
    before = forward(dst, x).copy()
    src.weights[0][0, 0] += 1.0
    src.biases[-1][0] -= 2.0
    assert np.array_equal(forward(dst, x), before)


# -- checkpoint ------------------------------------------------------------

def test_checkpoint_roundtrip_is_exact(tmp_path):
    net = tiny_net(11, (18, 64, 32, 12))
    # make sure full float64 precision survives the text format
    net.weights[0][0, 0] = 0.1 + 0.2
    net.biases[1][3] = np.pi * 1e-8
    path = tmp_path / "model.ckpt"
    save_checkpoint(net, path)
    loaded = load_checkpoint(path)
    assert loaded.dims == net.dims
    for a, b in zip(net.weights, loaded.weights):
        assert np.array_equal(a, b)
    for a, b in zip(net.biases, loaded.biases):
        assert np.array_equal(a, b)


def test_checkpoint_file_is_line_oriented_text(tmp_path):
    net = tiny_net(12, (3, 4, 2))
    path = tmp_path / "model.ckpt"
    save_checkpoint(net, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "QNET v1"
    assert lines[1] == "3 4 2"
    # W0 b0 W1 b1: one line per tensor
    assert len(lines) == 2 + 4


@pytest.mark.parametrize("body", [
    "NOT A CHECKPOINT\n",
    "QNET v1\n",
    "QNET v1\nthree four\n",
    "QNET v1\n3 4 2\n1 2 3\n",          # truncated
    "QNET v1\n3 4 2\n" + "x\n" * 4,     # non-numeric tensors
])
def test_load_rejects_corrupt_files(tmp_path, body):
    p = tmp_path / "bad.ckpt"
    p.write_text(body)
    with pytest.raises(ConfigError):
        load_checkpoint(p)
