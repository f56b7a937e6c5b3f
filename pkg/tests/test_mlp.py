"""
Tests for the network, its input jets and its parameter gradients.
"""

import unittest

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from src.core.exceptions import ConfigError, NonFiniteLossError
from src.models.constitutive import encode_law
from src.models.mlp import (Jet, LossTerms, MlpArch, ParamVector, SamplePoint, forward, forward_batch,
                            forward_jet, init_params, jet_batch, loss_gradient)

SMALL_ARCH = MlpArch(hidden_layers=2, hidden_width=6)


def random_inputs(rng, count):
    """Interior inputs with random one-hot laws."""
    x = rng.uniform(0.1, 0.9, count)
    t = rng.uniform(0.1, 0.9, count)
    onehot = np.eye(3)[rng.integers(0, 3, count)]
    return np.column_stack([x, t, onehot])


def random_params(arch, rng, scale=0.5):
    return ParamVector(rng.normal(0.0, scale, arch.param_count), arch)


def swap_hidden_neurons(params, layer, a, b):
    """Exchange hidden neurons a and b of a layer with their outgoing weights."""
    arch = params.arch
    values = params.values.copy()
    shapes = arch.layer_shapes()

    def swap(i, k):
        values[i], values[k] = values[k], values[i]

    for col in range(shapes[layer][1]):
        swap(arch.flat_index(layer, "weight", a, col), arch.flat_index(layer, "weight", b, col))
    swap(arch.flat_index(layer, "bias", a), arch.flat_index(layer, "bias", b))
    for row in range(shapes[layer + 1][0]):
        swap(arch.flat_index(layer + 1, "weight", row, a), arch.flat_index(layer + 1, "weight", row, b))
    return params.replace(values)


class WeightedJetLoss:
    """Quadratic loss in every jet field, with its exact adjoint."""

    def __init__(self, weights=(1.0, 0.5, 0.3, 0.2)):
        self.weights = weights

    def __call__(self, jet):
        fields = (jet.n, jet.dn_dx, jet.dn_dt, jet.d2n_dx2)
        per_sample = sum(w * f ** 2 for w, f in zip(self.weights, fields))
        size = per_sample.size
        adjoint = Jet(*(2.0 * w * f / size for w, f in zip(self.weights, fields)))
        return LossTerms(float(np.mean(per_sample)), per_sample, adjoint)


class TestMlpArch(unittest.TestCase):
    """Tests for the architecture and the flat parameter layout."""

    def test_default_param_count(self):
        arch = MlpArch()
        # 5->50, four 50->50, 50->1
        self.assertEqual(arch.param_count, 50 * 6 + 4 * 50 * 51 + 51)
        self.assertEqual(arch.layer_shapes()[0], (50, 5))
        self.assertEqual(arch.layer_shapes()[-1], (1, 50))

    def test_layout_is_weights_then_bias(self):
        arch = SMALL_ARCH
        self.assertEqual(arch.flat_index(0, "weight", 0, 0), 0)
        self.assertEqual(arch.flat_index(0, "weight", 1, 2), 1 * 5 + 2)
        self.assertEqual(arch.flat_index(0, "bias", 0), 30)
        self.assertEqual(arch.flat_index(1, "weight", 0, 0), 36)
        self.assertEqual(arch.flat_index(2, "bias", 0), arch.param_count - 1)

    def test_flat_index_out_of_range(self):
        with self.assertRaises(IndexError):
            SMALL_ARCH.flat_index(0, "weight", 6, 0)
        with self.assertRaises(ValueError):
            SMALL_ARCH.flat_index(0, "kernel", 0, 0)

    def test_invalid_arch_rejected(self):
        with self.assertRaises(ConfigError):
            MlpArch(activation="relu")
        with self.assertRaises(ConfigError):
            MlpArch(hidden_layers=0)
        with self.assertRaises(ConfigError):
            MlpArch(input_dim=4)


class TestParams(unittest.TestCase):
    """Tests for ParamVector and initialization."""

    def test_wrong_length_rejected(self):
        with self.assertRaises(ValueError):
            ParamVector(np.zeros(3), SMALL_ARCH)

    def test_values_read_only(self):
        params = init_params(SMALL_ARCH, 0)
        with self.assertRaises(ValueError):
            params.values[0] = 1.0

    def test_init_deterministic(self):
        assert_array_equal(init_params(SMALL_ARCH, 7).values, init_params(SMALL_ARCH, 7).values)
        self.assertFalse(np.array_equal(init_params(SMALL_ARCH, 7).values,
                                        init_params(SMALL_ARCH, 8).values))

    def test_init_zero_biases_and_glorot_bound(self):
        params = init_params(MlpArch(), 3)
        for (w, b), (fan_out, fan_in) in zip(params.layers(), MlpArch().layer_shapes()):
            assert_array_equal(b, 0.0)
            self.assertLessEqual(np.max(np.abs(w)), np.sqrt(6.0 / (fan_in + fan_out)))


class TestForward(unittest.TestCase):
    """Tests for the forward pass and input jets."""

    def setUp(self):
        self.rng = np.random.default_rng(2024)

    def test_sample_point_domain(self):
        with self.assertRaises(ValueError):
            SamplePoint(1.5, 0.2, encode_law(1))

    def test_zero_params_give_zero_output(self):
        params = ParamVector(np.zeros(SMALL_ARCH.param_count), SMALL_ARCH)
        jet = forward_jet(params, SMALL_ARCH, SamplePoint(0.3, 0.4, encode_law(2)))
        self.assertEqual((jet.n, jet.dn_dx, jet.dn_dt, jet.d2n_dx2), (0.0, 0.0, 0.0, 0.0))

    def test_forward_matches_jet_value_exactly(self):
        params = init_params(MlpArch(), 11)
        point = SamplePoint(0.37, 0.61, encode_law(3))
        self.assertEqual(forward(params, MlpArch(), point), forward_jet(params, MlpArch(), point).n)

    def test_batch_matches_single_points(self):
        params = random_params(SMALL_ARCH, self.rng)
        inputs = random_inputs(self.rng, 5)
        batch = forward_batch(params, SMALL_ARCH, inputs)
        for row, value in zip(inputs, batch):
            point = SamplePoint(row[0], row[1], encode_law(int(np.argmax(row[2:])) + 1))
            self.assertAlmostEqual(forward(params, SMALL_ARCH, point), value, delta=1e-14)

    def test_swapping_hidden_neurons_keeps_output(self):
        params = random_params(SMALL_ARCH, self.rng)
        inputs = random_inputs(self.rng, 8)
        before = jet_batch(params, SMALL_ARCH, inputs)
        for layer in (0, 1):
            swapped = swap_hidden_neurons(params, layer, 1, 4)
            self.assertFalse(np.array_equal(swapped.values, params.values))
            after = jet_batch(swapped, SMALL_ARCH, inputs)
            for field in ("n", "dn_dx", "dn_dt", "d2n_dx2"):
                assert_allclose(getattr(after, field), getattr(before, field), rtol=0, atol=1e-13)

    def test_swapping_identical_neurons_is_exact(self):
        index = SMALL_ARCH.flat_index
        values = random_params(SMALL_ARCH, self.rng).values.copy()
        for col in range(5):
            values[index(0, "weight", 3, col)] = values[index(0, "weight", 2, col)]
        values[index(0, "bias", 3)] = values[index(0, "bias", 2)]
        for row in range(6):
            values[index(1, "weight", row, 3)] = values[index(1, "weight", row, 2)]
        params = ParamVector(values, SMALL_ARCH)
        inputs = random_inputs(self.rng, 8)
        assert_array_equal(forward_batch(swap_hidden_neurons(params, 0, 2, 3), SMALL_ARCH, inputs),
                           forward_batch(params, SMALL_ARCH, inputs))

    def test_wrong_arch_rejected(self):
        params = init_params(SMALL_ARCH, 0)
        with self.assertRaises(ValueError):
            forward_batch(params, MlpArch(), random_inputs(self.rng, 2))

    def test_jet_matches_finite_differences(self):
        step = 1e-4
        arch = MlpArch(hidden_layers=3, hidden_width=10)
        for _ in range(100):
            params = random_params(arch, self.rng)
            inputs = random_inputs(self.rng, 1)
            jet = jet_batch(params, arch, inputs)

            def shifted(dx=0.0, dt=0.0):
                moved = inputs.copy()
                moved[:, 0] += dx
                moved[:, 1] += dt
                return forward_batch(params, arch, moved)

            center = shifted()
            d_x = (shifted(dx=step) - shifted(dx=-step)) / (2.0 * step)
            d_t = (shifted(dt=step) - shifted(dt=-step)) / (2.0 * step)
            d_xx = (shifted(dx=step) - 2.0 * center + shifted(dx=-step)) / step ** 2
            assert_allclose(jet.n, center, rtol=0, atol=0)
            assert_allclose(jet.dn_dx, d_x, rtol=1e-5, atol=1e-7)
            assert_allclose(jet.dn_dt, d_t, rtol=1e-5, atol=1e-7)
            assert_allclose(jet.d2n_dx2, d_xx, rtol=1e-5, atol=1e-6)

            # Second oracle: central difference of the exact first derivative.
            slope_plus = jet_batch(params, arch, inputs + [[step, 0.0, 0.0, 0.0, 0.0]]).dn_dx
            slope_minus = jet_batch(params, arch, inputs - [[step, 0.0, 0.0, 0.0, 0.0]]).dn_dx
            d_xx_of_slope = (slope_plus - slope_minus) / (2.0 * step)
            assert_allclose(jet.d2n_dx2, d_xx_of_slope, rtol=1e-5, atol=1e-7)
            assert_allclose(d_xx, d_xx_of_slope, rtol=1e-5, atol=1e-6)


class TestLossGradient(unittest.TestCase):
    """Tests for the reverse pass through the jet."""

    def setUp(self):
        self.rng = np.random.default_rng(99)

    def test_gradient_matches_finite_differences(self):
        step = 1e-6
        loss = WeightedJetLoss()
        for _ in range(100):
            params = random_params(SMALL_ARCH, self.rng)
            inputs = random_inputs(self.rng, 4)
            _, grad = loss_gradient(params, SMALL_ARCH, inputs, loss)
            self.assertEqual(len(grad), SMALL_ARCH.param_count)

            indices = self.rng.choice(SMALL_ARCH.param_count, size=10, replace=False)
            for index in indices:
                plus = params.values.copy()
                minus = params.values.copy()
                plus[index] += step
                minus[index] -= step
                up = loss(jet_batch(params.replace(plus), SMALL_ARCH, inputs)).value
                down = loss(jet_batch(params.replace(minus), SMALL_ARCH, inputs)).value
                assert_allclose(grad.values[index], (up - down) / (2.0 * step), rtol=1e-4, atol=1e-8)

    def test_full_gradient_single_configuration(self):
        step = 1e-6
        loss = WeightedJetLoss()
        params = random_params(SMALL_ARCH, self.rng)
        inputs = random_inputs(self.rng, 6)
        _, grad = loss_gradient(params, SMALL_ARCH, inputs, loss)
        numeric = np.empty(SMALL_ARCH.param_count)
        for index in range(SMALL_ARCH.param_count):
            plus = params.values.copy()
            minus = params.values.copy()
            plus[index] += step
            minus[index] -= step
            numeric[index] = (loss(jet_batch(params.replace(plus), SMALL_ARCH, inputs)).value
                              - loss(jet_batch(params.replace(minus), SMALL_ARCH, inputs)).value) / (2.0 * step)
        assert_allclose(grad.values, numeric, rtol=1e-4, atol=1e-8)

    def test_stationary_point_has_zero_gradient(self):
        def squared_output(jet):
            zeros = np.zeros_like(jet.n)
            return LossTerms(float(np.sum(jet.n ** 2)), jet.n ** 2, Jet(2.0 * jet.n, zeros, zeros, zeros))

        params = ParamVector(np.zeros(SMALL_ARCH.param_count), SMALL_ARCH)
        value, grad = loss_gradient(params, SMALL_ARCH, random_inputs(self.rng, 3), squared_output)
        self.assertEqual(value, 0.0)
        assert_array_equal(grad.values, 0.0)

    def test_gradient_is_deterministic(self):
        loss = WeightedJetLoss()
        params = random_params(SMALL_ARCH, self.rng)
        inputs = random_inputs(self.rng, 8)
        first = loss_gradient(params, SMALL_ARCH, inputs, loss)
        second = loss_gradient(params, SMALL_ARCH, inputs, loss)
        self.assertEqual(first[0], second[0])
        assert_array_equal(first[1].values, second[1].values)

    def test_non_finite_loss_reports_sample(self):
        def broken(jet):
            per_sample = np.ones_like(jet.n)
            per_sample[2] = np.nan
            zeros = np.zeros_like(jet.n)
            return LossTerms(float(np.mean(per_sample)), per_sample, Jet(zeros, zeros, zeros, zeros))

        params = init_params(SMALL_ARCH, 0)
        with self.assertRaises(NonFiniteLossError) as ctx:
            loss_gradient(params, SMALL_ARCH, random_inputs(self.rng, 4), broken)
        self.assertEqual(ctx.exception.index, 2)


if __name__ == "__main__":
    unittest.main()
