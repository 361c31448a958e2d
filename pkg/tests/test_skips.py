"""Skip modes and COM combiners: frozen blends, invariants, gradients."""

import numpy as np
import pytest

from deepgnn import tensor as T
from deepgnn.errors import ConfigError
from deepgnn.rng import Rng
from deepgnn.skips import (SkipSpec, com_apply, init_com_params,
                           jumping_aggregate, skip_combine)
from deepgnn.tensor import GradTape, Tensor, backward

import oracles


def _rand(shape, seed=0):
    return np.random.default_rng(seed).uniform(-1.0, 1.0, shape)


def test_none_and_jumping_pass_through():
    x = Tensor(_rand((4, 3)))
    h = [Tensor(_rand((4, 3), 1))]
    assert skip_combine(SkipSpec(mode="none"), x, h) is x
    assert skip_combine(SkipSpec(mode="jumping"), x, h) is x


def test_residual_blend_frozen():
    x = Tensor(np.full((2, 2), 2.0))
    prev = Tensor(np.full((2, 2), -1.0))
    out = skip_combine(SkipSpec(mode="residual", alpha=0.4), x, [Tensor(np.zeros((2, 2))), prev])
    # 0.6*2 + 0.4*(-1) = 0.8
    assert np.max(np.abs(out.data - 0.8)) < 1e-15


def test_initial_blend_uses_first_entry():
    x0 = Tensor(np.full((2, 2), 10.0))
    mid = Tensor(np.full((2, 2), 99.0))
    x = Tensor(np.full((2, 2), 0.0))
    out = skip_combine(SkipSpec(mode="initial", alpha=0.2), x, [x0, mid])
    assert np.max(np.abs(out.data - 2.0)) < 1e-15  # 0.8*0 + 0.2*10


def test_alpha_edge_cases():
    x = Tensor(_rand((3, 3), 2))
    prev = Tensor(_rand((3, 3), 3))
    h = [prev]
    a0 = skip_combine(SkipSpec(mode="residual", alpha=0.0), x, h)
    assert np.array_equal(a0.data, x.data)
    a1 = skip_combine(SkipSpec(mode="residual", alpha=1.0), x, h)
    assert np.array_equal(a1.data, prev.data)


def test_empty_history_raises():
    with pytest.raises(ConfigError):
        skip_combine(SkipSpec(mode="residual"), Tensor(np.ones((2, 2))), [])


class TestComs:
    def test_maxpool_is_elementwise_max(self):
        stack = [Tensor(_rand((5, 4), s)) for s in range(3)]
        out = com_apply(SkipSpec(mode="jumping", com="maxpool"), stack, {})
        want = np.maximum.reduce([t.data for t in stack])
        assert np.array_equal(out.data, want)

    def test_concat_projects_back_to_width(self):
        spec = SkipSpec(mode="dense", com="concat")
        stack = [Tensor(_rand((5, 4), s)) for s in range(3)]
        params = init_com_params(spec, 4, 3, Rng(0))
        out = com_apply(spec, stack, {k: Tensor(v) for k, v in params.items()})
        assert out.shape == (5, 4)
        want = np.concatenate([t.data for t in stack], axis=1) @ params["w"]
        assert np.max(np.abs(out.data - want)) < 1e-12

    def test_concat_missing_or_mismatched_params(self):
        spec = SkipSpec(mode="dense", com="concat")
        stack = [Tensor(np.ones((2, 4))), Tensor(np.ones((2, 4)))]
        with pytest.raises(ConfigError):
            com_apply(spec, stack, {})
        bad = {"w": Tensor(np.ones((4, 4)))}  # needs 8 rows
        with pytest.raises(ConfigError):
            com_apply(spec, stack, bad)

    def test_attention_uniform_scores_give_mean(self):
        # zero scoring vector -> sigmoid(0) = 0.5 for every layer -> weights 1/k
        spec = SkipSpec(mode="jumping", com="attention")
        stack = [Tensor(_rand((6, 3), s)) for s in range(4)]
        out = com_apply(spec, stack, {"w": Tensor(np.zeros((3, 1)))})
        want = np.mean([t.data for t in stack], axis=0)
        assert np.max(np.abs(out.data - want)) < 1e-12

    def test_attention_weights_sum_to_one(self):
        for softmax in (False, True):
            spec = SkipSpec(mode="jumping", com="attention", attention_softmax=softmax)
            stack = [Tensor(_rand((6, 3), s + 10)) for s in range(3)]
            w = Tensor(_rand((3, 1), 42))
            # reconstruct the weights the combiner used
            scores = np.concatenate(
                [1.0 / (1.0 + np.exp(-(t.data @ w.data))) for t in stack], axis=1)
            if softmax:
                e = np.exp(scores - scores.max(axis=1, keepdims=True))
                weights = e / e.sum(axis=1, keepdims=True)
            else:
                weights = scores / scores.sum(axis=1, keepdims=True)
            assert np.max(np.abs(weights.sum(axis=1) - 1.0)) < 1e-10
            got = com_apply(spec, stack, {"w": w})
            want = sum(weights[:, k:k + 1] * stack[k].data for k in range(3))
            assert np.max(np.abs(got.data - want)) < 1e-10

    def test_single_entry_stack_passes_through(self):
        x = Tensor(_rand((3, 3), 5))
        out = com_apply(SkipSpec(mode="jumping", com="maxpool"), [x], {})
        assert out is x


def test_jumping_aggregate_matches_com_apply():
    spec = SkipSpec(mode="jumping", com="maxpool")
    stack = [Tensor(_rand((4, 2), s)) for s in range(3)]
    a = jumping_aggregate(spec, stack, {})
    b = com_apply(spec, stack, {})
    assert np.array_equal(a.data, b.data)


def test_spec_validation():
    with pytest.raises(ConfigError):
        SkipSpec(mode="skipper").validate()
    with pytest.raises(ConfigError):
        SkipSpec(mode="initial", alpha=1.5).validate()
    with pytest.raises(ConfigError):
        SkipSpec(mode="dense", com="avg").validate()
    SkipSpec(mode="dense", com="attention").validate()


class TestSkipGradients:
    def _fd_check(self, build, arrays):
        tape = GradTape()
        leaves = [tape.leaf(a.copy()) for a in arrays]
        backward(build(*leaves))
        for i, leaf in enumerate(leaves):
            def f(x, i=i):
                args = [Tensor(a) for a in arrays]
                args[i] = Tensor(x)
                return build(*args).data[0, 0]

            fd = oracles.finite_difference_grad(f, arrays[i])
            assert oracles.relative_grad_error(leaf.grad, fd) < 1e-4

    def test_residual_grad(self):
        spec = SkipSpec(mode="residual", alpha=0.3)

        def build(x, prev):
            out = skip_combine(spec, x, [prev])
            return T.sum_all(T.mul(out, out))

        self._fd_check(build, [_rand((4, 3), 1), _rand((4, 3), 2)])

    def test_dense_concat_grad(self):
        spec = SkipSpec(mode="dense", com="concat")

        def build(x, h0, w):
            out = skip_combine(spec, x, [h0], {"w": w})
            return T.sum_all(T.mul(out, out))

        self._fd_check(build, [_rand((3, 2), 3), _rand((3, 2), 4), _rand((4, 2), 5)])

    def test_attention_grad(self):
        spec = SkipSpec(mode="jumping", com="attention")

        def build(a, b, w):
            out = com_apply(spec, [a, b], {"w": w})
            return T.sum_all(T.mul(out, out))

        self._fd_check(build, [_rand((3, 3), 6), _rand((3, 3), 7), _rand((3, 1), 8)])
