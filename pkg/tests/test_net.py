import numpy as np
import pytest

from mimicrl import net
from mimicrl.errors import DimensionMismatch, NonFiniteError


def single_layer(w, b, activation="identity"):
    return net.NetworkParams([net.Layer(np.array(w), np.array(b), activation)])


def test_forward_single_affine_unit():
    p = single_layer([[2.0]], [1.0])
    assert net.forward(p, np.array([3.0])) == pytest.approx([7.0])


def test_forward_zero_final_layer_gives_zero_vector():
    rng = np.random.default_rng(0)
    p = net.init_network([3, 8, 2], ["tanh", "identity"], rng)
    p.layers[-1].weights[:] = 0.0
    p.layers[-1].bias[:] = 0.0
    out = net.forward(p, rng.standard_normal(3))
    assert np.array_equal(out, np.zeros(2))


def test_forward_tanh_zero_preactivation():
    p = single_layer([[1.0, -1.0]], [0.0], "tanh")
    assert net.forward(p, np.array([0.5, 0.5])) == pytest.approx([0.0], abs=0)


def test_forward_is_pure():
    rng = np.random.default_rng(1)
    p = net.init_network([4, 16, 3], ["relu", "tanh"], rng)
    x = rng.standard_normal(4)
    a = net.forward(p, x)
    b = net.forward(p, x)
    assert np.array_equal(a, b)


def test_forward_dimension_mismatch():
    p = single_layer([[2.0]], [1.0])
    with pytest.raises(DimensionMismatch):
        net.forward(p, np.array([1.0, 2.0]))


def test_layer_chain_mismatch_rejected():
    with pytest.raises(DimensionMismatch):
        net.NetworkParams([
            net.Layer(np.zeros((3, 2)), np.zeros(3), "relu"),
            net.Layer(np.zeros((1, 4)), np.zeros(1), "identity"),
        ])


def test_backward_single_affine_chain_rule():
    p = single_layer([[2.0]], [1.0])
    grads, input_grad = net.backward(p, np.array([3.0]), np.array([1.0]))
    assert grads == pytest.approx([3.0, 1.0])   # dW = x, db = 1
    assert input_grad == pytest.approx([2.0])   # dx = W


def test_backward_zero_upstream_gives_zero_grads():
    rng = np.random.default_rng(2)
    p = net.init_network([3, 8, 2], ["tanh", "sigmoid"], rng)
    grads, input_grad = net.backward(p, rng.standard_normal(3), np.zeros(2))
    assert np.array_equal(grads, np.zeros(p.n_params))
    assert np.array_equal(input_grad, np.zeros(3))


def test_backward_matches_finite_differences_two_layer_tanh():
    rng = np.random.default_rng(3)
    p = net.init_network([4, 8, 1], ["tanh", "tanh"], rng)
    x = rng.standard_normal(4)
    upstream = np.array([1.0])
    grads, input_grad = net.backward(p, x, upstream)

    def by_params(flat):
        q = p.copy()
        q.set_flat(flat)
        return float(net.forward(q, x)[0])

    def by_input(xv):
        return float(net.forward(p, xv)[0])

    assert net.finite_diff_check(by_params, p.get_flat(), grads) < 1e-4
    assert net.finite_diff_check(by_input, x, input_grad) < 1e-4


@pytest.mark.parametrize("dims,acts", [
    ([3, 64, 64, 1], ["relu", "relu", "tanh"]),      # actor shape
    ([3, 64, 64, 1], ["relu", "relu", "sigmoid"]),   # critic shape
    ([2, 64, 64, 1], ["relu", "relu", "identity"]),  # BC mean shape
])
def test_repo_network_shapes_pass_gradient_check(dims, acts):
    rng = np.random.default_rng(42)
    for _ in range(3):
        p = net.init_network(dims, acts, rng)
        x = rng.standard_normal(dims[0])
        upstream = rng.standard_normal(dims[-1])
        grads, input_grad = net.backward(p, x, upstream)

        def by_input(xv):
            return float(upstream @ net.forward(p, xv))

        assert net.finite_diff_check(by_input, x, input_grad) < 1e-4
        # spot-check a slice of parameter coordinates at full batch cost
        flat = p.get_flat()
        idx = rng.integers(0, flat.size, size=60)

        def by_coord(i, v):
            f = flat.copy()
            f[i] = v
            q = p.copy()
            q.set_flat(f)
            return float(upstream @ net.forward(q, x))

        for i in idx:
            hi = by_coord(i, flat[i] + 1e-5)
            lo = by_coord(i, flat[i] - 1e-5)
            numeric = (hi - lo) / 2e-5
            denom = max(abs(numeric), abs(grads[i]), 1e-8)
            assert abs(numeric - grads[i]) / denom < 1e-4


def test_batch_backward_sums_over_rows():
    rng = np.random.default_rng(4)
    p = net.init_network([3, 8, 2], ["tanh", "identity"], rng)
    x = rng.standard_normal((5, 3))
    up = rng.standard_normal((5, 2))
    flat_batch, gin_batch = net.backward_batch(p, x, up)
    singles = [net.backward(p, x[i], up[i]) for i in range(5)]
    assert flat_batch == pytest.approx(sum(s[0] for s in singles))
    for i in range(5):
        assert gin_batch[i] == pytest.approx(singles[i][1])


def test_flat_view_round_trip():
    rng = np.random.default_rng(5)
    p = net.init_network([4, 8, 3], ["relu", "identity"], rng)
    flat = p.get_flat()
    assert flat.shape == (4 * 8 + 8 + 8 * 3 + 3,)
    q = p.copy()
    q.set_flat(flat)
    assert np.array_equal(q.get_flat(), flat)
    for la, lb in zip(p.layers, q.layers):
        assert np.array_equal(la.weights, lb.weights)
        assert np.array_equal(la.bias, lb.bias)


def test_set_flat_wrong_length():
    p = single_layer([[2.0]], [1.0])
    with pytest.raises(DimensionMismatch):
        p.set_flat(np.zeros(5))


def test_init_network_bounds_and_zero_bias():
    rng = np.random.default_rng(6)
    p = net.init_network([16, 8, 2], ["relu", "identity"], rng)
    for l in p.layers:
        bound = 1.0 / np.sqrt(l.n_in)
        assert np.all(np.abs(l.weights) <= bound)
        assert np.array_equal(l.bias, np.zeros(l.n_out))


def test_adam_zero_gradient_leaves_params_unchanged():
    p = single_layer([[2.0]], [1.0])
    st = net.AdamState.for_params(p.n_params, lr=0.1)
    before = p.get_flat()
    p, st = net.adam_step(st, p, np.zeros(2))
    assert np.array_equal(p.get_flat(), before)
    assert st.step_count == 1


def test_adam_first_step_hand_computed():
    # scalar parameter 0, grad 1, lr 0.1: bias correction makes
    # m_hat = v_hat = 1, so the step is lr / (1 + eps) ~ 0.1
    p = single_layer([[0.0]], [0.0])
    st = net.AdamState.for_params(2, lr=0.1)
    p, st = net.adam_step(st, p, np.array([1.0, 0.0]))
    assert p.layers[0].weights[0, 0] == pytest.approx(-0.1, abs=1e-6)
    assert p.layers[0].bias[0] == 0.0


def test_adam_two_steps_monotone_descent():
    p = single_layer([[0.0]], [0.0])
    st = net.AdamState.for_params(2, lr=0.05)
    g = np.array([1.0, 0.0])
    p, st = net.adam_step(st, p, g)
    w1 = p.layers[0].weights[0, 0]
    p, st = net.adam_step(st, p, g)
    w2 = p.layers[0].weights[0, 0]
    assert w1 < 0.0
    assert w2 < w1


def test_adam_rejects_non_finite_gradients():
    p = single_layer([[0.0]], [0.0])
    st = net.AdamState.for_params(2, lr=0.1)
    with pytest.raises(NonFiniteError):
        net.adam_step(st, p, np.array([np.nan, 0.0]))


def test_finite_diff_check_quadratic():
    fn = lambda v: float(v[0] ** 2)
    assert net.finite_diff_check(fn, np.array([3.0]), np.array([6.0])) < 1e-8


def test_finite_diff_check_constant():
    fn = lambda v: 1.5
    assert net.finite_diff_check(fn, np.array([3.0]), np.array([0.0])) == 0.0


def test_finite_diff_check_reports_wrong_gradient():
    fn = lambda v: float(v[0] ** 2)
    err = net.finite_diff_check(fn, np.array([3.0]), np.array([5.0]))
    assert err == pytest.approx(1.0 / 6.0, rel=1e-5)


def test_checkpoint_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    p = net.init_network([3, 8, 2], ["relu", "tanh"], rng)
    path = tmp_path / "net.ckpt"
    net.save_checkpoint(p, path, extra={"clamp_eps": 1e-6})
    q, doc = net.load_checkpoint(path)
    assert doc["clamp_eps"] == 1e-6
    assert [l["activation"] for l in doc["layers"]] == ["relu", "tanh"]
    assert doc["layers"][0]["in"] == 3 and doc["layers"][0]["out"] == 8
    assert np.array_equal(p.get_flat(), q.get_flat())
