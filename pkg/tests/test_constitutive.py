"""
Tests for the constitutive laws, mobility and diffusivity.
"""

import unittest

import numpy as np
from numpy.testing import assert_allclose

from src.core.exceptions import ConfigError, DomainError
from src.models.constitutive import (ALL_LAWS, LawId, MaterialProps, OneHotLaw, as_law, diffusivity,
                                     diffusivity_derivative, diffusivity_second_derivative,
                                     encode_law, mobility, stiffness_antiderivative,
                                     stiffness_modulus, stiffness_modulus_derivative)


def central_difference(fn, j, step=1e-6):
    return (fn(j + step) - fn(j - step)) / (2.0 * step)


class TestMaterialProps(unittest.TestCase):
    """Tests for MaterialProps validation."""

    def test_defaults(self):
        props = MaterialProps()
        self.assertAlmostEqual(props.gamma_hat, 1.0 / 3.0)
        self.assertAlmostEqual(props.mu_hat, 1.0 / 3.0)
        self.assertEqual(props.phi0, 0.3)
        self.assertEqual(props.j_bar, 0.8)
        self.assertAlmostEqual(props.phi0_cubed, 0.027)

    def test_j_bar_at_collapse_rejected(self):
        with self.assertRaises(ConfigError):
            MaterialProps(j_bar=0.7)

    def test_invalid_porosity_rejected(self):
        for phi0 in (0.0, 1.0, -0.1):
            with self.assertRaises(ConfigError):
                MaterialProps(phi0=phi0)

    def test_invalid_lame_constants_rejected(self):
        with self.assertRaises(ConfigError):
            MaterialProps(mu_hat=0.0)
        with self.assertRaises(ConfigError):
            MaterialProps(gamma_hat=-1.0)


class TestLawEncoding(unittest.TestCase):
    """Tests for law indices and one-hot encodings."""

    def test_encode_law(self):
        self.assertEqual(encode_law(1).e, (1.0, 0.0, 0.0))
        self.assertEqual(encode_law(LawId.MODIFIED_SAINT_VENANT_KIRCHHOFF).e, (0.0, 1.0, 0.0))
        self.assertEqual(encode_law(3).e, (0.0, 0.0, 1.0))

    def test_law_property_inverts_encoding(self):
        for law in ALL_LAWS:
            self.assertEqual(encode_law(law).law, law)

    def test_invalid_law_rejected(self):
        for bad in (0, 4, "x", None):
            with self.assertRaises(ConfigError):
                as_law(bad)

    def test_invalid_onehot_rejected(self):
        with self.assertRaises(ValueError):
            OneHotLaw((1.0, 1.0, 0.0))
        with self.assertRaises(ValueError):
            OneHotLaw((0.5, 0.5))


class TestStiffnessModulus(unittest.TestCase):
    """Tests for g_i, its derivatives and antiderivative."""

    def setUp(self):
        self.props = MaterialProps()

    def test_unit_at_undeformed_state(self):
        for law in ALL_LAWS:
            self.assertAlmostEqual(stiffness_modulus(law, 1.0, self.props), 1.0, delta=1e-12)

    def test_known_values(self):
        self.assertAlmostEqual(stiffness_modulus(1, 0.8, self.props), 0.46, delta=1e-12)
        # gamma(1 - ln 0.8)/0.64 + mu(3*0.64 - 1)
        expected = (1.0 / 3.0) * (1.0 - np.log(0.8)) / 0.64 + (1.0 / 3.0) * 0.92
        self.assertAlmostEqual(stiffness_modulus(2, 0.8, self.props), expected, delta=1e-12)
        expected = (1.0 / 3.0) * (1.0 - np.log(0.8)) / 0.64 + (1.0 / 3.0) * (1.0 + 1.0 / 0.64)
        self.assertAlmostEqual(stiffness_modulus(3, 0.8, self.props), expected, delta=1e-12)

    def test_vectorized(self):
        j = np.array([0.8, 0.9, 1.0])
        values = stiffness_modulus(1, j, self.props)
        assert_allclose(values, 0.5 * (3.0 * j ** 2 - 1.0), rtol=0, atol=1e-14)

    def test_derivatives_match_finite_differences(self):
        for law in ALL_LAWS:
            for j in np.linspace(0.75, 1.1, 8):
                first = central_difference(lambda v: stiffness_modulus(law, v, self.props), j)
                self.assertAlmostEqual(stiffness_modulus_derivative(law, j, self.props), first, delta=1e-6)
                second = central_difference(
                    lambda v: stiffness_modulus_derivative(law, v, self.props), j)
                self.assertAlmostEqual(stiffness_modulus_derivative(law, j, self.props, order=2),
                                       second, delta=1e-5)

    def test_antiderivative_vanishes_at_one(self):
        for law in ALL_LAWS:
            self.assertAlmostEqual(stiffness_antiderivative(law, 1.0, self.props), 0.0, delta=1e-15)

    def test_antiderivative_law1_value(self):
        self.assertAlmostEqual(stiffness_antiderivative(1, 0.8, self.props), -0.144, delta=1e-12)

    def test_antiderivative_derivative_is_modulus(self):
        j = np.random.default_rng(0).uniform(0.75, 1.1, 100)
        for law in ALL_LAWS:
            slope = central_difference(lambda v: stiffness_antiderivative(law, v, self.props), j)
            assert_allclose(slope, stiffness_modulus(law, j, self.props), rtol=0, atol=1e-8)

    def test_non_positive_j_rejected(self):
        with self.assertRaises(DomainError):
            stiffness_modulus(2, 0.0, self.props)
        with self.assertRaises(DomainError) as ctx:
            stiffness_antiderivative(3, np.array([0.9, -0.1]), self.props)
        self.assertEqual(ctx.exception.index, 1)


class TestDiffusivity(unittest.TestCase):
    """Tests for the mobility and the diffusivity D_i."""

    def setUp(self):
        self.props = MaterialProps()

    def test_scaled_diffusivity_unit_at_one(self):
        for law in ALL_LAWS:
            scaled = diffusivity(law, 1.0, self.props) / self.props.phi0_cubed
            self.assertAlmostEqual(scaled, 1.0, delta=1e-12)

    def test_mobility_value(self):
        self.assertAlmostEqual(mobility(0.8, self.props), 0.1 ** 3 / 0.64, delta=1e-15)

    def test_mobility_derivatives(self):
        for j in (0.75, 0.9, 1.0):
            first = central_difference(lambda v: mobility(v, self.props), j)
            self.assertAlmostEqual(mobility(j, self.props, order=1), first, delta=1e-8)
            second = central_difference(lambda v: mobility(v, self.props, order=1), j)
            self.assertAlmostEqual(mobility(j, self.props, order=2), second, delta=1e-6)

    def test_invalid_order_rejected(self):
        with self.assertRaises(ValueError):
            mobility(0.9, self.props, order=3)

    def test_strict_domain_guard(self):
        with self.assertRaises(DomainError):
            diffusivity(1, 0.69, self.props)
        with self.assertRaises(DomainError) as ctx:
            diffusivity(2, np.array([0.9, 0.8, 0.65]), self.props)
        self.assertEqual(ctx.exception.index, 2)

    def test_non_strict_extension(self):
        # Below 1 - phi0 the polynomial extension is evaluated instead of raising.
        value = diffusivity(1, 0.6, self.props, strict=False)
        expected = (0.6 - 0.7) ** 3 / 0.36 * 0.5 * (3.0 * 0.36 - 1.0)
        self.assertAlmostEqual(value, expected, delta=1e-15)
        with self.assertRaises(DomainError):
            diffusivity(1, 0.0, self.props, strict=False)

    def test_derivatives_match_finite_differences(self):
        for law in ALL_LAWS:
            for j in np.linspace(0.75, 1.05, 7):
                first = central_difference(lambda v: diffusivity(law, v, self.props), j)
                self.assertAlmostEqual(diffusivity_derivative(law, j, self.props), first, delta=1e-8)
                second = central_difference(lambda v: diffusivity_derivative(law, v, self.props), j)
                self.assertAlmostEqual(diffusivity_second_derivative(law, j, self.props),
                                       second, delta=1e-6)

    def test_positive_on_physical_range(self):
        j = np.linspace(self.props.j_bar, 1.0, 201)
        self.assertTrue(np.all(mobility(j, self.props) > 0.0))
        for law in ALL_LAWS:
            self.assertTrue(np.all(stiffness_modulus(law, j, self.props) > 0.0))
            self.assertTrue(np.all(diffusivity(law, j, self.props) > 0.0))

    def test_laws_coincide_near_undeformed_state(self):
        # Each law leaves g(1) = 1 along its own slope.
        step = 1e-3
        for law in ALL_LAWS:
            slope = abs(stiffness_modulus_derivative(law, 1.0, self.props))
            deviation = abs(stiffness_modulus(law, 1.0 - step, self.props) - 1.0)
            self.assertLessEqual(deviation, 1.01 * slope * step)
        self.assertAlmostEqual(stiffness_modulus(1, 1.0 - step, self.props), 0.9970015, delta=1e-12)


if __name__ == "__main__":
    unittest.main()
