"""Model state, forward/backward correctness, and the Adam update."""

import math

import numpy as np
import pytest

from gradsift.errors import NumericalError
from gradsift.model import (
    AdamParams,
    ModelState,
    Topology,
    adam_state_for,
    adam_step,
    backward_per_sample,
    forward,
    grad_norm,
    grad_norms_rows,
    init_model,
    load_checkpoint,
    loss_mse,
    save_checkpoint,
)


def central_differences(model, x, y, eps=1e-5):
    """Independent loss-gradient oracle: central finite differences."""
    fd = np.empty(model.params.size)
    for j in range(model.params.size):
        orig = model.params[j]
        model.params[j] = orig + eps
        lp = loss_mse(forward(model, x), y)
        model.params[j] = orig - eps
        lm = loss_mse(forward(model, x), y)
        model.params[j] = orig
        fd[j] = (lp - lm) / (2.0 * eps)
    return fd


class TestTopology:
    def test_param_count_h4(self):
        # 4*(4*(4+1)+4) + 4*1 + 1
        assert Topology(1, 4, 1).param_count() == 101

    @pytest.mark.parametrize("bad", [
        dict(input_size=0), dict(hidden_size=0), dict(output_size=0),
        dict(hidden_size=-3),
    ])
    def test_rejects_nonpositive_dims(self, bad):
        with pytest.raises(ValueError):
            Topology(**bad)

    def test_param_count_matches_allocation(self, rng):
        # enumeration oracle: count the weights init_model actually allocates
        for _ in range(20):
            top = Topology(
                input_size=int(rng.integers(1, 5)),
                hidden_size=int(rng.integers(1, 12)),
                output_size=int(rng.integers(1, 4)),
            )
            model = init_model(top, 3)
            assert model.params.size == top.param_count()


class TestInit:
    def test_deterministic_in_seed(self):
        top = Topology(1, 4, 1)
        a = init_model(top, 7)
        b = init_model(top, 7)
        assert np.array_equal(a.params, b.params)

    def test_different_seeds_differ(self):
        top = Topology(1, 4, 1)
        assert not np.array_equal(init_model(top, 1).params, init_model(top, 2).params)

    def test_biases_zero(self):
        top = Topology(2, 3, 1)
        wx, wh, b, wd, bd = init_model(top, 0).views()
        assert np.all(b == 0.0) and np.all(bd == 0.0)
        assert np.any(wx != 0.0) and np.any(wh != 0.0) and np.any(wd != 0.0)

    def test_param_vector_length_validated(self):
        with pytest.raises(ValueError):
            ModelState(Topology(1, 2, 1), np.zeros(5), 0)


class TestForward:
    def test_zero_params_predict_zero(self):
        model = init_model(Topology(1, 4, 1), 0)
        model.params[:] = 0.0
        assert forward(model, np.array([[0.7]])) == 0.0
        assert forward(model, np.array([[0.1], [0.9]])) == 0.0

    def test_pure_and_deterministic(self, rng):
        model = init_model(Topology(1, 5, 1), 9)
        before = model.params.tobytes()
        x = rng.random((3, 1))
        assert forward(model, x) == forward(model, x)
        assert model.params.tobytes() == before

    def test_shape_mismatch_rejected(self):
        model = init_model(Topology(1, 3, 1), 0)
        with pytest.raises(ValueError):
            forward(model, np.zeros((2, 2)))
        with pytest.raises(ValueError):
            forward(model, np.zeros(3))

    def test_matches_hand_rolled_cell(self):
        # h=2, one timestep, hand-set weights; oracle below applies the
        # standard cell equations with plain scalar math.
        top = Topology(1, 2, 1)
        model = init_model(top, 0)
        wx = np.array([[0.5], [-0.3], [0.8], [0.1], [0.9], [-0.7], [0.2], [0.4]])
        wh = np.zeros((8, 2))  # first step: h_prev = 0, recurrent part inert
        b = np.array([0.05, -0.1, 0.0, 0.2, -0.05, 0.0, 0.3, -0.2])
        wd = np.array([1.5, -2.0])
        bd = 0.25
        model.params[:] = np.concatenate([wx.ravel(), wh.ravel(), b, wd, [bd]])

        x_val = 1.0
        expected_h = []
        for k in range(2):
            ai = wx[k, 0] * x_val + b[k]
            af = wx[2 + k, 0] * x_val + b[2 + k]
            ag = wx[4 + k, 0] * x_val + b[4 + k]
            ao = wx[6 + k, 0] * x_val + b[6 + k]
            gi = 1.0 / (1.0 + math.exp(-ai))
            gf = 1.0 / (1.0 + math.exp(-af))
            gg = math.tanh(ag)
            go = 1.0 / (1.0 + math.exp(-ao))
            c = gf * 0.0 + gi * gg
            expected_h.append(go * math.tanh(c))
        expected = bd + wd[0] * expected_h[0] + wd[1] * expected_h[1]
        assert forward(model, np.array([[x_val]])) == pytest.approx(expected, rel=1e-12)


class TestLoss:
    @pytest.mark.parametrize("pred,target,expected", [(2, 2, 0), (3, 1, 4), (-1, 1, 4)])
    def test_values(self, pred, target, expected):
        assert loss_mse(pred, target) == expected

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            loss_mse(float("nan"), 0.0)


class TestBackward:
    def test_zero_residual_zero_gradient(self):
        model = init_model(Topology(1, 4, 1), 0)
        model.params[:] = 0.0  # prediction is exactly 0
        g = backward_per_sample(model, np.array([[0.4]]), 0.0)
        assert np.all(g == 0.0)

    def test_output_layer_is_linear_probe(self, rng):
        # d loss / d b_out = 2*(pred - y); d loss / d w_out = 2*(pred - y)*h
        model = init_model(Topology(1, 3, 1), 5)
        x = rng.random((2, 1))
        y = 2.0
        pred = forward(model, x)
        g = backward_per_sample(model, x, y)
        assert g[-1] == pytest.approx(2.0 * (pred - y), rel=1e-12)

    def test_doubling_residual_doubles_dense_block(self, rng):
        model = init_model(Topology(1, 4, 1), 11)
        x = rng.random((1, 1))
        pred = forward(model, x)
        y1 = pred - 0.25
        y2 = pred - 0.5  # doubles the residual
        h = 4
        dense = slice(model.params.size - h - 1, model.params.size)
        g1 = backward_per_sample(model, x, y1)[dense]
        g2 = backward_per_sample(model, x, y2)[dense]
        np.testing.assert_allclose(g2, 2.0 * g1, rtol=1e-12)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        top = Topology(int(rng.integers(1, 3)), int(rng.integers(2, 7)), 1)
        model = init_model(top, seed)
        model.params[:] += rng.normal(0.0, 0.2, model.params.size)
        x = rng.random((int(rng.integers(1, 4)), top.input_size))
        y = float(rng.normal())
        g = backward_per_sample(model, x, y)
        fd = central_differences(model, x, y)
        assert np.all(np.abs(g - fd) <= np.maximum(1e-7, 1e-4 * np.abs(fd)))

    def test_nonfinite_reported(self):
        model = init_model(Topology(1, 3, 1), 0)
        model.params[:] = 1e308  # dense layer overflows the prediction
        with pytest.raises(NumericalError):
            backward_per_sample(model, np.array([[1.0]]), 0.0)

    def test_model_untouched(self, rng):
        model = init_model(Topology(1, 4, 1), 3)
        before = model.params.tobytes()
        backward_per_sample(model, rng.random((2, 1)), 0.1)
        assert model.params.tobytes() == before


class TestGradNorm:
    def test_values(self):
        assert grad_norm([0.0, 0.0, 0.0]) == 0.0
        assert grad_norm([42.0, 56.0]) == 70.0
        assert grad_norm([-3.0]) == 3.0

    def test_rows_match_single_vector_bitwise(self, rng):
        grads = rng.normal(0, 1, (16, 377))
        rows = grad_norms_rows(grads)
        for s in range(grads.shape[0]):
            assert rows[s] == grad_norm(grads[s])

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            grad_norm([1.0, float("inf")])


class TestAdam:
    def test_zero_gradient_is_noop(self):
        model = init_model(Topology(1, 3, 1), 1)
        state = adam_state_for(model)
        updated, new_state = adam_step(model, np.zeros(model.params.size), state, AdamParams())
        assert np.array_equal(updated.params, model.params)
        assert np.all(new_state.m == 0.0) and np.all(new_state.v == 0.0)
        assert new_state.t == 1

    def test_first_step_moves_by_lr_sign(self, rng):
        model = init_model(Topology(1, 3, 1), 2)
        g = rng.normal(0, 1, model.params.size)
        g[np.abs(g) < 0.1] = 0.1  # keep the eps term negligible
        hyper = AdamParams(learning_rate=1e-3)
        updated, _ = adam_step(model, g, adam_state_for(model), hyper)
        np.testing.assert_allclose(
            updated.params - model.params, -hyper.learning_rate * np.sign(g), atol=1e-9
        )

    def test_deterministic(self, rng):
        model = init_model(Topology(1, 3, 1), 2)
        g = rng.normal(0, 1, model.params.size)
        state = adam_state_for(model)
        a1, s1 = adam_step(model, g, state, AdamParams())
        a2, s2 = adam_step(model, g, state, AdamParams())
        assert np.array_equal(a1.params, a2.params)
        assert np.array_equal(s1.m, s2.m) and np.array_equal(s1.v, s2.v)

    def test_wrong_length_rejected(self):
        model = init_model(Topology(1, 3, 1), 0)
        with pytest.raises(ValueError):
            adam_step(model, np.zeros(3), adam_state_for(model), AdamParams())


class TestCheckpoint:
    def test_round_trip(self, tmp_path, rng):
        model = init_model(Topology(2, 5, 1), 21)
        model.params[:] += rng.normal(0, 0.1, model.params.size)
        path = tmp_path / "model.ckpt"
        save_checkpoint(model, path, config_hash="abc123")
        loaded, header = load_checkpoint(path)
        assert np.array_equal(loaded.params, model.params)
        assert loaded.topology == model.topology
        assert loaded.init_seed == model.init_seed
        assert header["config_hash"] == "abc123"

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(ValueError):
            load_checkpoint(path)
