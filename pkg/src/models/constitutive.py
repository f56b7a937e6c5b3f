"""
Constitutive laws for large-strain consolidation.

Three hyper-elastic laws relate the pore-pressure gradient to the gradient of
the deformation measure J through a stiffness modulus g_i(J):

    dp/dX = g_i(J) dJ/dX

    law 1 (Saint-Venant Kirchhoff):           g1 = (3J^2 - 1) / 2
    law 2 (modified Saint-Venant Kirchhoff):  g2 = gamma (1 - ln J) / J^2 + mu (3J^2 - 1)
    law 3 (Neo-Hookean):                      g3 = gamma (1 - ln J) / J^2 + mu (1 + 1/J^2)

The mass balance carries a Kozeny-Carman mobility (J - 1 + phi0)^3 / J^2, and
the product of mobility and stiffness is the nonlinear diffusivity D(J).

All functions accept floats or numpy arrays and evaluate in float64.
"""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from src.core.exceptions import ConfigError, DomainError


class LawId(IntEnum):
    """Constitutive law selector, numbered as in the one-hot encoding."""

    SAINT_VENANT_KIRCHHOFF = 1
    MODIFIED_SAINT_VENANT_KIRCHHOFF = 2
    NEO_HOOKEAN = 3


ALL_LAWS = (LawId.SAINT_VENANT_KIRCHHOFF,
            LawId.MODIFIED_SAINT_VENANT_KIRCHHOFF,
            LawId.NEO_HOOKEAN)


def as_law(value):
    """Coerce an integer or LawId into a LawId.

    Args:
        value (int or LawId): Law index in {1, 2, 3}.

    Returns:
        LawId: The matching law.

    Raises:
        ConfigError: If the index is not one of the three laws.
    """
    try:
        return LawId(int(value))
    except (TypeError, ValueError):
        raise ConfigError(f"Invalid constitutive law index {value!r}; expected 1, 2 or 3")


@dataclass(frozen=True)
class MaterialProps:
    """Dimensionless material constants, identical for all three laws.

    Args:
        gamma_hat: Dimensionless Lame constant gamma.
        mu_hat: Dimensionless Lame constant mu.
        phi0: Reference porosity, in (0, 1).
        j_bar: Dirichlet value of J at the loaded surface, in (1 - phi0, 1].
    """

    gamma_hat: float = 1.0 / 3.0
    mu_hat: float = 1.0 / 3.0
    phi0: float = 0.3
    j_bar: float = 0.8

    def __post_init__(self):
        if not 0.0 < self.phi0 < 1.0:
            raise ConfigError(f"phi0 must lie in (0, 1), got {self.phi0}")
        if not 1.0 - self.phi0 < self.j_bar <= 1.0:
            raise ConfigError(
                f"j_bar must lie in (1 - phi0, 1] = ({1.0 - self.phi0:g}, 1], got {self.j_bar}")
        if self.gamma_hat < 0.0:
            raise ConfigError(f"gamma_hat must be non-negative, got {self.gamma_hat}")
        if self.mu_hat <= 0.0:
            raise ConfigError(f"mu_hat must be positive, got {self.mu_hat}")

    @property
    def phi0_cubed(self):
        """phi0^3, the denominator of the mass-balance scale factor."""
        return self.phi0 ** 3


@dataclass(frozen=True)
class OneHotLaw:
    """One-hot law encoding (e1, e2, e3)."""

    e: tuple

    def __post_init__(self):
        if len(self.e) != 3 or sorted(self.e) != [0.0, 0.0, 1.0]:
            raise ValueError(f"One-hot law encoding must have a single unit component, got {self.e}")

    @property
    def law(self):
        """LawId whose component is set."""
        return LawId(self.e.index(1.0) + 1)

    def as_array(self):
        return np.asarray(self.e, dtype=np.float64)


def encode_law(law):
    """Encode a law as its one-hot vector.

    Args:
        law (LawId or int): Law to encode.

    Returns:
        OneHotLaw: (1,0,0), (0,1,0) or (0,0,1).
    """
    law = as_law(law)
    e = [0.0, 0.0, 0.0]
    e[law - 1] = 1.0
    return OneHotLaw(tuple(e))


def _first_violation(mask):
    """Return the flat index of the first True entry of mask, or None."""
    mask = np.atleast_1d(mask)
    if not mask.any():
        return None
    return int(np.flatnonzero(mask)[0])


def _check_positive(j):
    bad = _first_violation(~(j > 0.0))
    if bad is not None:
        value = np.atleast_1d(j)[bad]
        raise DomainError(f"Deformation measure must be positive, got J={value!r} at index {bad}", index=bad)


def _check_mobility_domain(j, props):
    bad = _first_violation(~(j > 1.0 - props.phi0))
    if bad is not None:
        value = np.atleast_1d(j)[bad]
        raise DomainError(
            f"J={value!r} at index {bad} is at or below 1 - phi0 = {1.0 - props.phi0:g} (pore collapse)",
            index=bad)


def _as_float(j):
    return np.asarray(j, dtype=np.float64)


def _unwrap(value):
    """Return a Python float for 0-d results, arrays otherwise."""
    if np.ndim(value) == 0:
        return float(value)
    return value


def stiffness_modulus(law, j, props):
    """Stiffness modulus g_i(J) with dp/dX = g_i(J) dJ/dX.

    Args:
        law (LawId or int): Constitutive law.
        j (float or numpy.ndarray): Deformation measure, positive.
        props (MaterialProps): Material constants.

    Returns:
        float or numpy.ndarray: g_i(J).

    Raises:
        DomainError: If any J is not positive.
    """
    law = as_law(law)
    j = _as_float(j)
    _check_positive(j)
    if law == LawId.SAINT_VENANT_KIRCHHOFF:
        g = 0.5 * (3.0 * j * j - 1.0)
    else:
        g = props.gamma_hat * (1.0 - np.log(j)) / (j * j)
        if law == LawId.MODIFIED_SAINT_VENANT_KIRCHHOFF:
            g = g + props.mu_hat * (3.0 * j * j - 1.0)
        else:
            g = g + props.mu_hat * (1.0 + 1.0 / (j * j))
    return _unwrap(g)


def stiffness_modulus_derivative(law, j, props, order=1):
    """First or second J-derivative of the stiffness modulus.

    Args:
        law (LawId or int): Constitutive law.
        j (float or numpy.ndarray): Deformation measure, positive.
        props (MaterialProps): Material constants.
        order (int): 1 or 2.

    Returns:
        float or numpy.ndarray: d^order g_i / dJ^order.
    """
    law = as_law(law)
    j = _as_float(j)
    _check_positive(j)
    if order not in (1, 2):
        raise ValueError(f"Derivative order must be 1 or 2, got {order}")
    log_j = None if law == LawId.SAINT_VENANT_KIRCHHOFF else np.log(j)
    if order == 1:
        if law == LawId.SAINT_VENANT_KIRCHHOFF:
            return _unwrap(3.0 * j)
        dg = props.gamma_hat * (2.0 * log_j - 3.0) / j ** 3
        if law == LawId.MODIFIED_SAINT_VENANT_KIRCHHOFF:
            dg = dg + 6.0 * props.mu_hat * j
        else:
            dg = dg - 2.0 * props.mu_hat / j ** 3
        return _unwrap(dg)
    if law == LawId.SAINT_VENANT_KIRCHHOFF:
        return _unwrap(np.full_like(j, 3.0))
    d2g = props.gamma_hat * (11.0 - 6.0 * log_j) / j ** 4
    if law == LawId.MODIFIED_SAINT_VENANT_KIRCHHOFF:
        d2g = d2g + 6.0 * props.mu_hat
    else:
        d2g = d2g + 6.0 * props.mu_hat / j ** 4
    return _unwrap(d2g)


def stiffness_antiderivative(law, j, props):
    """Closed-form antiderivative G_i(J) of the stiffness modulus, G_i(1) = 0.

    Args:
        law (LawId or int): Constitutive law.
        j (float or numpy.ndarray): Deformation measure, positive.
        props (MaterialProps): Material constants.

    Returns:
        float or numpy.ndarray: G_i(J).
    """
    law = as_law(law)
    j = _as_float(j)
    _check_positive(j)
    if law == LawId.SAINT_VENANT_KIRCHHOFF:
        return _unwrap(0.5 * (j ** 3 - j))
    big_g = props.gamma_hat * np.log(j) / j
    if law == LawId.MODIFIED_SAINT_VENANT_KIRCHHOFF:
        big_g = big_g + props.mu_hat * (j ** 3 - j)
    else:
        big_g = big_g + props.mu_hat * (j - 1.0 / j)
    return _unwrap(big_g)


def mobility(j, props, strict=True, order=0):
    """Kozeny-Carman mobility (J - 1 + phi0)^3 / J^2 and its J-derivatives.

    Args:
        j (float or numpy.ndarray): Deformation measure.
        props (MaterialProps): Material constants.
        strict (bool): Enforce J > 1 - phi0. When False only J > 0 is
            required and the polynomial extension is evaluated.
        order (int): 0 for the value, 1 or 2 for derivatives.

    Returns:
        float or numpy.ndarray: Mobility or its derivative.

    Raises:
        DomainError: If J violates the requested domain.
    """
    j = _as_float(j)
    _check_positive(j)
    if strict:
        _check_mobility_domain(j, props)
    u = j - 1.0 + props.phi0
    if order == 0:
        return _unwrap(u ** 3 / (j * j))
    if order == 1:
        return _unwrap(3.0 * u ** 2 / j ** 2 - 2.0 * u ** 3 / j ** 3)
    if order == 2:
        return _unwrap(6.0 * u / j ** 2 - 12.0 * u ** 2 / j ** 3 + 6.0 * u ** 3 / j ** 4)
    raise ValueError(f"Derivative order must be 0, 1 or 2, got {order}")


def diffusivity(law, j, props, strict=True):
    """Nonlinear diffusivity D_i(J) = mobility(J) * g_i(J).

    Args:
        law (LawId or int): Constitutive law.
        j (float or numpy.ndarray): Deformation measure.
        props (MaterialProps): Material constants.
        strict (bool): See mobility.

    Returns:
        float or numpy.ndarray: D_i(J), not yet divided by phi0^3.
    """
    return _unwrap(np.asarray(mobility(j, props, strict)) * stiffness_modulus(law, j, props))


def diffusivity_derivative(law, j, props, strict=True):
    """First J-derivative of the diffusivity, by the product rule.

    Args:
        law (LawId or int): Constitutive law.
        j (float or numpy.ndarray): Deformation measure.
        props (MaterialProps): Material constants.
        strict (bool): See mobility.

    Returns:
        float or numpy.ndarray: dD_i/dJ.
    """
    m = np.asarray(mobility(j, props, strict))
    dm = mobility(j, props, strict, order=1)
    return _unwrap(dm * stiffness_modulus(law, j, props)
                   + m * stiffness_modulus_derivative(law, j, props))


def diffusivity_second_derivative(law, j, props, strict=True):
    """Second J-derivative of the diffusivity.

    Needed by the parameter gradient of the residual, which depends on J
    through D_i'(J).

    Args:
        law (LawId or int): Constitutive law.
        j (float or numpy.ndarray): Deformation measure.
        props (MaterialProps): Material constants.
        strict (bool): See mobility.

    Returns:
        float or numpy.ndarray: d^2 D_i / dJ^2.
    """
    m = np.asarray(mobility(j, props, strict))
    dm = mobility(j, props, strict, order=1)
    d2m = mobility(j, props, strict, order=2)
    g = stiffness_modulus(law, j, props)
    dg = stiffness_modulus_derivative(law, j, props)
    d2g = stiffness_modulus_derivative(law, j, props, order=2)
    return _unwrap(d2m * g + 2.0 * dm * dg + m * d2g)
