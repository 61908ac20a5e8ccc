"""Numeric core: forward/backward, Adam, polyak, squashed Gaussian."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from guardrl.errors import ConfigError, ShapeError
from guardrl.numeric import (
    OptState,
    ParamSet,
    adam_step,
    flatten_params,
    forward,
    forward_cached,
    backward,
    init_mlp,
    load_checkpoint,
    polyak,
    sample_squashed_gaussian,
    save_checkpoint,
    value_and_grad,
    zeros_like_params,
)
from guardrl.numeric.gaussian import SQUASH_EPS

from helpers import finite_difference_grad, relative_error


def linear_params(w, b):
    return ParamSet([np.asarray(w, dtype=float)], [np.asarray(b, dtype=float)])


class TestForward:
    def test_identity_layer(self):
        p = linear_params(np.eye(3), np.zeros(3))
        x = np.array([1.0, -2.0, 0.5])
        assert np.array_equal(forward(p, x), x)

    def test_zero_net_maps_to_zero(self):
        p = ParamSet([np.zeros((4, 3)), np.zeros((3, 2))], [np.zeros(3), np.zeros(2)])
        assert np.array_equal(forward(p, np.array([1.0, 2.0, 3.0, 4.0])), np.zeros(2))

    def test_fixed_221_net_hand_computed(self):
        # hand evaluation: h = relu(W1 x + b1), y = W2 h + b2
        w1 = np.array([[1.0, -1.0], [2.0, 0.5]])
        b1 = np.array([0.5, -0.25])
        w2 = np.array([[1.5], [-2.0]])
        b2 = np.array([0.75])
        p = ParamSet([w1, w2], [b1, b2])
        x = np.array([1.0, 0.0])
        # W1 rows are per-input: z = x @ W1 + b1 = [1*1+0*2+0.5, 1*(-1)+0*0.5-0.25] = [1.5, -1.25]
        # relu -> [1.5, 0]; y = 1.5*1.5 + 0*(-2) + 0.75 = 3.0
        assert forward(p, x) == pytest.approx([3.0], abs=1e-15)

    def test_dimension_mismatch_reports_shapes(self):
        p = linear_params(np.eye(3), np.zeros(3))
        with pytest.raises(ShapeError, match="width 2"):
            forward(p, np.array([1.0, 2.0]))

    def test_batch_and_single_agree(self):
        rng = np.random.default_rng(0)
        p = init_mlp(rng, [4, 8, 2])
        x = rng.normal(size=4)
        single = forward(p, x)
        batched = forward(p, x[None, :])[0]
        assert np.array_equal(single, batched)

    def test_purity_bitwise(self):
        rng = np.random.default_rng(1)
        p = init_mlp(rng, [5, 16, 3], "tanh")
        x = rng.normal(size=(7, 5))
        assert np.array_equal(forward(p, x), forward(p, x))


class TestGradient:
    def test_constant_loss_zero_gradient(self):
        p = init_mlp(np.random.default_rng(0), [3, 4, 2])
        _, grads, _ = value_and_grad(p, np.ones(3), lambda y: (7.0, np.zeros_like(y)))
        assert np.all(flatten_params(grads) == 0.0)

    def test_squared_linear_output_closed_form(self):
        # loss = y^2 with y = w.x: dloss/dw = 2*y*x
        w = np.array([[0.7], [-1.2], [0.3]])
        p = linear_params(w, np.zeros(1))
        x = np.array([1.5, -0.5, 2.0])
        y = float(x @ w)
        loss, grads, dx = value_and_grad(p, x, lambda out: (float(out[0] ** 2), 2.0 * out))
        assert loss == pytest.approx(y * y)
        assert grads.weights[0] == pytest.approx((2.0 * y * x)[:, None], rel=1e-12)
        assert dx == pytest.approx(2.0 * y * w[:, 0], rel=1e-12)

    @pytest.mark.parametrize("trial", range(4))
    def test_three_layer_matches_central_differences(self, trial):
        rng = np.random.default_rng(100 + trial)
        p = init_mlp(rng, [4, 6, 5, 1], "tanh")
        for w in p.weights:
            w += 0.5 * rng.normal(size=w.shape)
        x = rng.normal(size=(8, 4))
        t = rng.normal(size=(8, 1))

        def head(y):
            return float(np.mean((y - t) ** 2)), 2.0 * (y - t) / len(t)

        _, grads, _ = value_and_grad(p, x, head)
        fd = finite_difference_grad(lambda q: value_and_grad(q, x, head)[0], p, step=1e-6)
        assert relative_error(grads, fd) < 1e-4

    def test_relu_backward_away_from_kinks(self):
        # fixed net whose preactivations are far from zero
        p = ParamSet([np.array([[1.0, -1.0]]), np.array([[1.0], [1.0]])], [np.array([5.0, 5.0]), np.zeros(1)])
        x = np.array([1.0])

        def head(y):
            return float(y[0]), np.ones(1)

        _, grads, _ = value_and_grad(p, x, head)
        fd = finite_difference_grad(lambda q: value_and_grad(q, x, head)[0], p, step=1e-6)
        assert relative_error(grads, fd) < 1e-7

    def test_input_gradient_chains_networks(self):
        rng = np.random.default_rng(5)
        p = init_mlp(rng, [3, 8, 1], "tanh")
        x0 = rng.normal(size=3)

        def loss_of_input(x):
            return float(forward(p, x)[0])

        _, cache = forward_cached(p, x0)
        _, dx = backward(p, cache, np.ones(1))
        step = 1e-6
        for i in range(3):
            up, dn = x0.copy(), x0.copy()
            up[i] += step
            dn[i] -= step
            fd = (loss_of_input(up) - loss_of_input(dn)) / (2 * step)
            assert dx[i] == pytest.approx(fd, rel=1e-6, abs=1e-9)


class TestAdam:
    def test_zero_gradient_keeps_params(self):
        p = init_mlp(np.random.default_rng(0), [2, 3, 1])
        before = flatten_params(p).copy()
        opt = OptState.for_params(p)
        adam_step(p, zeros_like_params(p), opt, lr=0.01)
        assert np.array_equal(flatten_params(p), before)

    def test_constant_gradient_monotone_decrease(self):
        p = linear_params(np.array([[1.0]]), np.zeros(1))
        opt = OptState.for_params(p)
        g = linear_params(np.array([[1.0]]), np.zeros(1))
        values = [p.weights[0][0, 0]]
        for _ in range(50):
            adam_step(p, g, opt, lr=0.01)
            values.append(p.weights[0][0, 0])
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_first_step_magnitude(self):
        # fresh state, g=1, lr=1e-3: bias-corrected step is ~ -lr
        p = linear_params(np.array([[0.0]]), np.zeros(1))
        opt = OptState.for_params(p)
        g = linear_params(np.array([[1.0]]), np.zeros(1))
        adam_step(p, g, opt, lr=1e-3)
        assert p.weights[0][0, 0] == pytest.approx(-1e-3, rel=1e-6)
        assert opt.step == 1

    def test_nonfinite_gradient_skips_update(self, caplog):
        p = linear_params(np.array([[1.0]]), np.zeros(1))
        opt = OptState.for_params(p)
        g = linear_params(np.array([[np.nan]]), np.zeros(1))
        with caplog.at_level("WARNING"):
            adam_step(p, g, opt, lr=0.01)
        assert p.weights[0][0, 0] == 1.0
        assert opt.step == 0
        assert "skipped" in caplog.text


class TestPolyak:
    def test_tau_one_copies_online(self):
        rng = np.random.default_rng(0)
        a, b = init_mlp(rng, [2, 3, 1]), init_mlp(rng, [2, 3, 1])
        out = polyak(a, b, 1.0)
        assert np.array_equal(flatten_params(out), flatten_params(b))

    def test_tau_zero_keeps_target(self):
        rng = np.random.default_rng(1)
        a, b = init_mlp(rng, [2, 3, 1]), init_mlp(rng, [2, 3, 1])
        out = polyak(a, b, 0.0)
        assert np.array_equal(flatten_params(out), flatten_params(a))

    def test_small_tau_value(self):
        a = linear_params(np.array([[0.0]]), np.zeros(1))
        b = linear_params(np.array([[1.0]]), np.zeros(1))
        assert polyak(a, b, 0.005).weights[0][0, 0] == pytest.approx(0.005)

    @given(tau=st.floats(0.0, 1.0))
    @settings(max_examples=30, deadline=None)
    def test_contraction_toward_online(self, tau):
        rng = np.random.default_rng(7)
        a, b = init_mlp(rng, [3, 4, 2]), init_mlp(rng, [3, 4, 2])
        out = polyak(a, b, tau)
        lhs = np.abs(flatten_params(out) - flatten_params(b))
        rhs = (1.0 - tau) * np.abs(flatten_params(a) - flatten_params(b))
        assert np.all(lhs <= rhs + 1e-12)

    def test_shape_mismatch_rejected(self):
        a = linear_params(np.zeros((2, 2)), np.zeros(2))
        b = linear_params(np.zeros((2, 3)), np.zeros(3))
        with pytest.raises(ShapeError):
            polyak(a, b, 0.5)


class TestSquashedGaussian:
    def test_zero_noise_small_std_is_tanh_mean(self):
        mean = np.array([0.3, -1.2])
        out = sample_squashed_gaussian(mean, np.full(2, -20.0), np.zeros(2))
        assert out.action == pytest.approx(np.tanh(mean), abs=1e-8)

    def test_hand_computed_log_prob_1d(self):
        out = sample_squashed_gaussian(np.zeros(1), np.zeros(1), np.zeros(1))
        expected = -0.5 * np.log(2 * np.pi) - np.log(1.0 + SQUASH_EPS)
        assert out.log_prob == pytest.approx(expected, abs=1e-12)

    @given(
        mean=st.floats(-3, 3),
        log_std=st.floats(-4, 1),
        noise=st.floats(-4, 4),
    )
    @settings(max_examples=100, deadline=None)
    def test_action_strictly_inside_cube_and_logp_finite(self, mean, log_std, noise):
        out = sample_squashed_gaussian(np.array([mean]), np.array([log_std]), np.array([noise]))
        assert -1.0 < out.action[0] < 1.0
        assert np.isfinite(out.log_prob)

    def test_density_integrates_to_one_1d(self):
        # integrate exp(log_prob) over a fine action grid via change of variables
        mean, log_std = np.array([0.4]), np.array([-0.3])
        grid_a = np.linspace(-1 + 1e-6, 1 - 1e-6, 20001)
        u = np.arctanh(grid_a)
        z = (u - mean[0]) / np.exp(log_std[0])
        gauss = -0.5 * np.log(2 * np.pi) - log_std[0] - 0.5 * z * z
        corr = np.log(1.0 - grid_a**2 + SQUASH_EPS)
        dens = np.exp(gauss - corr)
        integral = np.trapz(dens, grid_a)
        assert integral == pytest.approx(1.0, abs=1e-2)


class TestCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        arrays = {"a.w": rng.normal(size=(5, 4)), "b.v": rng.normal(size=7)}
        scalars = {"step": 12, "alpha": 0.125}
        path = tmp_path / "ck.bin"
        save_checkpoint(path, arrays, scalars, "deadbeef", {"note": "t"})
        arr2, sc2, h, meta = load_checkpoint(path)
        assert h == "deadbeef"
        assert sc2 == scalars
        assert meta == {"note": "t"}
        for k in arrays:
            assert np.array_equal(arrays[k], arr2[k])

    def test_identical_state_identical_bytes(self, tmp_path):
        arrays = {"x": np.arange(12, dtype=float).reshape(3, 4)}
        p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
        save_checkpoint(p1, arrays, {"s": 1}, "h")
        save_checkpoint(p2, arrays, {"s": 1}, "h")
        assert p1.read_bytes() == p2.read_bytes()

    def test_rejects_garbage(self, tmp_path):
        p = tmp_path / "bad.bin"
        p.write_bytes(b"not a checkpoint\n")
        with pytest.raises(ConfigError):
            load_checkpoint(p)
