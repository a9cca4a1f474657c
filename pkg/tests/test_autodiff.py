import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from priming_bench import autodiff as ad
from priming_bench.autodiff import ShapeError, Tape, TapeError, Tensor, backward
from priming_bench.gradcheck import max_relative_error, numeric_gradient

N_RANDOM = 20


def _leaf(rng, *shape):
    return Tensor(rng.normal(size=shape), requires_grad=True)


def _weighted_sum(out, rng):
    # a fixed random projection exercises every entry of the Jacobian
    return ad.sum_all(ad.mul(out, Tensor(rng.normal(size=out.shape))))


class TestElementwise:
    def test_sigmoid_zero(self):
        assert ad.sigmoid(Tensor(0.0)).data == 0.5

    def test_add_zeros_identity_and_grad(self):
        x = Tensor(np.array([1.5, -2.0, 3.0]), requires_grad=True)
        with Tape():
            y = ad.elementwise("add", x, ad.zeros_like(x))
            np.testing.assert_array_equal(y.data, x.data)
            backward(ad.sum_all(y))
        np.testing.assert_array_equal(x.grad, np.ones(3))

    def test_mul_values_and_fd_grad(self):
        a = Tensor([2.0, 3.0], requires_grad=True)
        b = Tensor([4.0, 5.0], requires_grad=True)
        np.testing.assert_array_equal(ad.mul(a, b).data, [8.0, 15.0])
        (ga,) = numeric_gradient(lambda: ad.sum_all(ad.mul(a, b)), [a])
        np.testing.assert_allclose(ga, [4.0, 5.0], rtol=1e-9)
        with Tape():
            backward(ad.sum_all(ad.mul(a, b)))
        np.testing.assert_array_equal(a.grad, b.data)

    def test_shape_mismatch_names_both_shapes(self):
        with pytest.raises(ShapeError, match=r"\(2, 3\).*\(4,\)"):
            ad.add(Tensor(np.zeros((2, 3))), Tensor(np.zeros(4)))

    def test_unary_given_two_args(self):
        with pytest.raises(TypeError):
            ad.elementwise("sigmoid", Tensor(1.0), Tensor(2.0))

    @pytest.mark.parametrize("op", ["add", "sub", "mul"])
    def test_binary_broadcast_gradcheck(self, op):
        rng = np.random.default_rng(1)
        for _ in range(N_RANDOM):
            a, b = _leaf(rng, 3, 4), _leaf(rng, 4)
            r = rng.normal(size=(3, 4))
            f = lambda: ad.sum_all(ad.mul(ad.elementwise(op, a, b), Tensor(r)))
            assert max_relative_error(f, [a, b]) < 1e-4

    @pytest.mark.parametrize("op", ["sigmoid", "tanh"])
    def test_unary_gradcheck(self, op):
        rng = np.random.default_rng(2)
        for _ in range(N_RANDOM):
            a = _leaf(rng, 2, 5)
            r = rng.normal(size=(2, 5))
            assert max_relative_error(lambda: ad.sum_all(ad.mul(ad.elementwise(op, a), Tensor(r))), [a]) < 1e-4


class TestMatmul:
    def test_identity(self):
        m = np.random.default_rng(0).normal(size=(3, 3))
        np.testing.assert_array_equal(ad.matmul(Tensor(np.eye(3)), Tensor(m)).data, m)

    def test_hand_arithmetic(self):
        out = ad.matmul(Tensor([[1.0, 2.0], [3.0, 4.0]]), Tensor([[5.0], [6.0]]))
        np.testing.assert_array_equal(out.data, [[17.0], [39.0]])

    def test_gradcheck_4x5_5x3(self):
        rng = np.random.default_rng(3)
        for _ in range(N_RANDOM):
            a, b = _leaf(rng, 4, 5), _leaf(rng, 5, 3)
            r = rng.normal(size=(4, 3))
            assert max_relative_error(lambda: ad.sum_all(ad.mul(ad.matmul(a, b), Tensor(r))), [a, b]) < 1e-4

    def test_batched_broadcast_gradcheck(self):
        rng = np.random.default_rng(4)
        a, b = _leaf(rng, 2, 3, 4), _leaf(rng, 4, 2)
        r = rng.normal(size=(2, 3, 2))
        assert max_relative_error(lambda: ad.sum_all(ad.mul(ad.matmul(a, b), Tensor(r))), [a, b]) < 1e-4

    def test_inner_mismatch(self):
        with pytest.raises(ShapeError, match=r"\(2, 3\).*\(4, 2\)"):
            ad.matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((4, 2))))


class TestSoftmax:
    def test_single_element(self):
        assert ad.softmax(Tensor([[3.7]]), axis=-1).data[0, 0] == 1.0

    def test_ln3(self):
        np.testing.assert_allclose(ad.softmax(Tensor([0.0, math.log(3)])).data, [0.25, 0.75], atol=1e-15)

    def test_uniform(self):
        np.testing.assert_allclose(ad.softmax(Tensor([5.0, 5.0, 5.0])).data, [1 / 3] * 3, atol=1e-15)

    def test_axis_out_of_range(self):
        with pytest.raises(ShapeError):
            ad.softmax(Tensor(np.zeros((2, 2))), axis=2)

    def test_mask_gives_exact_zero_weight_and_grad(self):
        x = Tensor(np.random.default_rng(0).normal(size=(2, 4)), requires_grad=True)
        mask = np.array([[True, True, False, True], [False, True, True, True]])
        r = np.random.default_rng(1).normal(size=(2, 4))
        with Tape():
            y = ad.softmax(x, mask=mask)
            backward(ad.sum_all(ad.mul(y, Tensor(r))))
        assert np.all(y.data[~mask] == 0.0)
        assert np.all(x.grad[~mask] == 0.0)

    def test_gradcheck(self):
        rng = np.random.default_rng(5)
        for _ in range(N_RANDOM):
            x = _leaf(rng, 3, 4)
            r = rng.normal(size=(3, 4))
            axis = int(rng.integers(2))
            assert max_relative_error(lambda: ad.sum_all(ad.mul(ad.softmax(x, axis=axis), Tensor(r))), [x]) < 1e-4

    @settings(max_examples=100, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 6)),
                  elements=st.floats(-50, 50, allow_nan=False)))
    def test_rows_sum_to_one_and_positive(self, x):
        y = ad.softmax(Tensor(x), axis=-1).data
        np.testing.assert_allclose(y.sum(axis=-1), 1.0, atol=1e-12)
        assert np.all(y > 0)


class TestLayerNorm:
    def test_constant_row(self):
        out = ad.layer_norm(Tensor([[2.0, 2.0, 2.0]]), Tensor(np.ones(3)), Tensor(np.zeros(3)))
        np.testing.assert_array_equal(out.data, [[0.0, 0.0, 0.0]])

    def test_pm_one(self):
        eps = 1e-5
        out = ad.layer_norm(Tensor([[1.0, -1.0]]), Tensor(np.ones(2)), Tensor(np.zeros(2)), eps)
        expected = 1 / math.sqrt(1 + eps)
        np.testing.assert_allclose(out.data, [[expected, -expected]], rtol=1e-14)

    def test_normalized_moments(self):
        x = np.random.default_rng(0).normal(3.0, 5.0, size=(6, 16))
        out = ad.layer_norm(Tensor(x), Tensor(np.ones(16)), Tensor(np.zeros(16)), eps=0.0).data
        np.testing.assert_allclose(out.mean(axis=-1), 0.0, atol=1e-8)
        np.testing.assert_allclose(out.var(axis=-1), 1.0, atol=1e-8)

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            ad.layer_norm(Tensor(np.zeros((2, 3))), Tensor(np.ones(4)), Tensor(np.zeros(4)))

    def test_gradcheck(self):
        rng = np.random.default_rng(6)
        for _ in range(N_RANDOM):
            x, g, b = _leaf(rng, 2, 3, 5), _leaf(rng, 5), _leaf(rng, 5)
            r = rng.normal(size=(2, 3, 5))
            assert max_relative_error(lambda: ad.sum_all(ad.mul(ad.layer_norm(x, g, b), Tensor(r))), [x, g, b]) < 1e-4


class TestEmbedding:
    def test_first_row(self):
        table = np.arange(12.0).reshape(4, 3)
        np.testing.assert_array_equal(ad.embedding_lookup(Tensor(table), [[0]]).data, [[[0.0, 1.0, 2.0]]])

    def test_repeated_id_accumulates(self):
        table = Tensor(np.zeros((5, 2)), requires_grad=True)
        with Tape():
            backward(ad.sum_all(ad.embedding_lookup(table, np.array([[1, 1]]))))
        np.testing.assert_array_equal(table.grad[1], [2.0, 2.0])
        np.testing.assert_array_equal(table.grad[0], [0.0, 0.0])

    def test_random_vs_gather_oracle(self):
        rng = np.random.default_rng(7)
        table = rng.normal(size=(9, 4))
        ids = rng.integers(0, 9, size=(3, 5))
        out = ad.embedding_lookup(Tensor(table), ids).data
        for i in range(3):
            for j in range(5):
                np.testing.assert_array_equal(out[i, j], table[ids[i][j]])

    def test_out_of_range_names_position(self):
        with pytest.raises(IndexError, match=r"id 9 at position \(0, 1\)"):
            ad.embedding_lookup(Tensor(np.zeros((4, 2))), np.array([[0, 9]]))

    def test_gradcheck(self):
        rng = np.random.default_rng(8)
        for _ in range(N_RANDOM):
            table = _leaf(rng, 6, 3)
            ids = rng.integers(0, 6, size=(2, 4))
            r = rng.normal(size=(2, 4, 3))
            assert max_relative_error(lambda: ad.sum_all(ad.mul(ad.embedding_lookup(table, ids), Tensor(r))), [table]) < 1e-4


def _masked_mean_nll_oracle(logits, labels):
    total, count = 0.0, 0
    for idx in np.ndindex(labels.shape):
        if labels[idx] == -100:
            continue
        row = logits[idx]
        total += -(row[labels[idx]] - math.log(sum(math.exp(v) for v in row)))
        count += 1
    return total / count if count else 0.0


class TestCrossEntropy:
    def test_all_masked(self):
        logits = Tensor(np.random.default_rng(0).normal(size=(2, 3, 5)), requires_grad=True)
        labels = np.full((2, 3), -100)
        with Tape():
            loss = ad.cross_entropy_masked(logits, labels)
            backward(loss)
        assert loss.data == 0.0
        assert np.all(logits.grad == 0.0)

    def test_uniform_ln8(self):
        loss = ad.cross_entropy_masked(Tensor(np.zeros((1, 1, 8))), np.array([[3]]))
        assert loss.data == pytest.approx(math.log(8), abs=1e-12)
        assert round(float(loss.data), 4) == 2.0794

    def test_mixed_mask_vs_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(N_RANDOM):
            logits = rng.normal(size=(3, 4, 6))
            labels = rng.integers(0, 6, size=(3, 4))
            labels[rng.random((3, 4)) < 0.4] = -100
            got = float(ad.cross_entropy_masked(Tensor(logits), labels).data)
            assert got == pytest.approx(_masked_mean_nll_oracle(logits, labels), abs=1e-12)

    def test_masked_positions_get_zero_grad(self):
        rng = np.random.default_rng(10)
        logits = _leaf(rng, 2, 3, 4)
        labels = np.array([[1, -100, 2], [-100, 0, -100]])
        with Tape():
            backward(ad.cross_entropy_masked(logits, labels))
        assert np.all(logits.grad[labels == -100] == 0.0)

    def test_gradcheck(self):
        rng = np.random.default_rng(11)
        for _ in range(N_RANDOM):
            logits = _leaf(rng, 2, 3, 5)
            labels = rng.integers(0, 5, size=(2, 3))
            labels[0, -1] = -100
            assert max_relative_error(lambda: ad.cross_entropy_masked(logits, labels), [logits]) < 1e-4

    def test_label_out_of_range(self):
        with pytest.raises(IndexError):
            ad.cross_entropy_masked(Tensor(np.zeros((1, 1, 4))), np.array([[4]]))

    def test_empty_logits(self):
        with pytest.raises(ValueError):
            ad.cross_entropy_masked(Tensor(np.zeros((1, 0, 4))), np.zeros((1, 0), dtype=int))


class TestShapeOps:
    def test_gradchecks(self):
        rng = np.random.default_rng(12)
        for _ in range(N_RANDOM):
            a, b = _leaf(rng, 2, 3, 4), _leaf(rng, 2, 3, 2)
            cases = [
                (lambda: _proj(ad.reshape(a, (6, 4)), 0), [a]),
                (lambda: _proj(ad.transpose(a, (2, 0, 1)), 1), [a]),
                (lambda: _proj(ad.concat([a, b], axis=-1), 2), [a, b]),
                (lambda: _proj(ad.stack([a, a], axis=1), 3), [a]),
                (lambda: _proj(ad.select(a, 1, 1), 4), [a]),
                (lambda: _proj(ad.relu(a), 5), [a]),
                (lambda: _proj(ad.scale(a, -2.5), 6), [a]),
            ]
            for f, ts in cases:
                assert max_relative_error(f, ts) < 1e-4


def _proj(out, seed):
    return ad.sum_all(ad.mul(out, Tensor(np.random.default_rng(seed).normal(size=out.shape))))


class TestBackward:
    def test_sum_grad_is_ones(self):
        x = Tensor(np.random.default_rng(0).normal(size=(3, 2)), requires_grad=True)
        with Tape():
            backward(ad.sum_all(x))
        np.testing.assert_array_equal(x.grad, np.ones((3, 2)))

    def test_square(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with Tape():
            backward(ad.sum_all(ad.mul(x, x)))
        np.testing.assert_array_equal(x.grad, [2.0, 4.0])

    def test_twice_doubles_exactly(self):
        rng = np.random.default_rng(13)
        w, x = _leaf(rng, 4, 3), _leaf(rng, 2, 4)
        with Tape():
            loss = ad.sum_all(ad.tanh(ad.matmul(x, w)))
            backward(loss)
            once = w.grad.copy(), x.grad.copy()
            backward(loss)
        np.testing.assert_array_equal(w.grad, 2 * once[0])
        np.testing.assert_array_equal(x.grad, 2 * once[1])

    def test_non_scalar_loss(self):
        x = Tensor(np.ones(3), requires_grad=True)
        with Tape():
            with pytest.raises(TapeError):
                backward(ad.mul(x, x))

    def test_loss_not_on_active_tape(self):
        x = Tensor(np.ones(3), requires_grad=True)
        with Tape():
            loss = ad.sum_all(x)
        with Tape():
            with pytest.raises(TapeError):
                backward(loss)
        with pytest.raises(TapeError):
            backward(loss)

    def test_no_tape_records_nothing(self):
        x = Tensor(np.ones(3), requires_grad=True)
        y = ad.sum_all(x)
        assert y.node is None and not y.requires_grad

    def test_tape_order_is_topological(self):
        rng = np.random.default_rng(14)
        a, b = _leaf(rng, 2, 2), _leaf(rng, 2, 2)
        with Tape() as tape:
            ad.sum_all(ad.add(ad.matmul(a, b), ad.sigmoid(a)))
        for i, node in enumerate(tape.nodes):
            assert node.output.node == i
            for inp in node.inputs:
                assert inp.node is None or inp.node < i

    def test_deterministic(self):
        def run():
            rng = np.random.default_rng(15)
            a, b = _leaf(rng, 3, 4), _leaf(rng, 4, 2)
            with Tape():
                loss = ad.sum_all(ad.softmax(ad.matmul(a, b)))
                backward(loss)
            return loss.data.tobytes(), a.grad.tobytes()

        assert run() == run()
