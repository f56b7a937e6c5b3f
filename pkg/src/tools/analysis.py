"""
Post-processing: error metrics, settlement, pore pressure and figure data.
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd

from src.core.exceptions import ConfigError
from src.models.constitutive import encode_law, stiffness_antiderivative
from src.models.mlp import Jet, forward_batch
from src.models.physics import transform_output


@dataclass
class SettlementProfile:
    """Dimensionless settlement U on equispaced nodes at one time."""

    x: np.ndarray
    u: np.ndarray
    t_hat: float


@dataclass
class PressureProfile:
    """Dimensionless pore pressure p on nodes at one time, p(0) = datum."""

    x: np.ndarray
    p: np.ndarray
    t_hat: float


def relative_error(pred, ref):
    """Relative RMS error in percent: 100 * sqrt(mean((pred/ref - 1)^2)).

    Args:
        pred (array-like): Predicted J at the evaluation points.
        ref (array-like): Reference J at the same points, non-zero.

    Returns:
        float: Error in percent.

    Raises:
        ValueError: If the two point sets differ in shape.
    """
    pred = np.asarray(pred, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if pred.shape != ref.shape:
        raise ValueError(f"Prediction shape {pred.shape} does not match reference shape {ref.shape}")
    if pred.size == 0:
        raise ValueError("Cannot compute a relative error over zero points")
    return float(100.0 * np.sqrt(np.mean((pred / ref - 1.0) ** 2)))


def _equispaced(x):
    x = np.asarray(x, dtype=np.float64)
    if x.size < 2:
        raise ValueError(f"Need at least 2 nodes, got {x.size}")
    steps = np.diff(x)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12) or steps[0] <= 0:
        raise ValueError("Nodes must be increasing and equispaced")
    return x


def settlement_profile(x, j, t_hat):
    """Settlement U(X) = integral of (1 - J) from X to 1, by the trapezoid rule.

    Args:
        x (array-like): Equispaced nodes ending at X=1.
        j (array-like): J at the nodes.
        t_hat (float): Snapshot time.

    Returns:
        SettlementProfile: U with U(1) = 0 exactly.
    """
    x = _equispaced(x)
    j = np.asarray(j, dtype=np.float64)
    if j.shape != x.shape:
        raise ValueError(f"J has shape {j.shape}, nodes have shape {x.shape}")
    integrand = 1.0 - j
    segments = 0.5 * (integrand[:-1] + integrand[1:]) * np.diff(x)
    u = np.zeros_like(x)
    u[:-1] = np.cumsum(segments[::-1])[::-1]
    return SettlementProfile(x, u, float(t_hat))


def reconstruct_pressure(x, j, law, props, t_hat, datum=0.0):
    """Pore pressure from J by exact change of variables.

    p(X) = G(J(X)) - G(J(0)) + datum, with G the stiffness antiderivative.

    Args:
        x (array-like): Nodes, starting at X=0.
        j (array-like): J at the nodes.
        law (LawId or int): Constitutive law.
        props (MaterialProps): Material constants.
        t_hat (float): Snapshot time.
        datum (float): Pressure at the drained top surface.

    Returns:
        PressureProfile: Pressure profile.
    """
    x = np.asarray(x, dtype=np.float64)
    j = np.asarray(j, dtype=np.float64)
    if j.shape != x.shape or x.size == 0:
        raise ValueError(f"J has shape {j.shape}, nodes have shape {x.shape}")
    big_g = np.asarray(stiffness_antiderivative(law, j, props))
    return PressureProfile(x, big_g - big_g[0] + datum, float(t_hat))


def evaluate_model_on_grid(params, arch, law, points, props):
    """Predicted J at (x_hat, t_hat) points for one law.

    Args:
        params (ParamVector): Trained parameters.
        arch (MlpArch): Network shape.
        law (LawId or int): Law whose encoding is fed to the network.
        points (numpy.ndarray): (P, 2) array of (x_hat, t_hat).
        props (MaterialProps): Supplies J_bar for the output transform.

    Returns:
        numpy.ndarray: J at each point.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    onehot = np.tile(encode_law(law).as_array(), (points.shape[0], 1))
    inputs = np.column_stack([points, onehot])
    n = forward_batch(params, arch, inputs)
    zeros = np.zeros_like(n)
    return transform_output(Jet(n, zeros, zeros, zeros), points[:, 0], props).j


def field_frame(points, j_pred, j_ref):
    """Figure data: x_hat, t_hat, j_pred, j_ref, abs_diff."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    j_pred = np.asarray(j_pred, dtype=np.float64)
    j_ref = np.asarray(j_ref, dtype=np.float64)
    return pd.DataFrame({
        "x_hat": points[:, 0],
        "t_hat": points[:, 1],
        "j_pred": j_pred,
        "j_ref": j_ref,
        "abs_diff": np.abs(j_pred - j_ref),
    })


def settlement_frame(pred, ref):
    """Figure data for one snapshot: x_hat, u_pred, u_ref."""
    if not np.array_equal(pred.x, ref.x):
        raise ValueError("Settlement profiles are on different nodes")
    return pd.DataFrame({"x_hat": pred.x, "u_pred": pred.u, "u_ref": ref.u})


def pressure_frame(pred, ref):
    """Pore-pressure data for one snapshot: x_hat, p_pred, p_ref."""
    if not np.array_equal(pred.x, ref.x):
        raise ValueError("Pressure profiles are on different nodes")
    return pd.DataFrame({"x_hat": pred.x, "p_pred": pred.p, "p_ref": ref.p})


def metrics_frame(rows):
    """Summary table: law, method, relative_error_percent.

    Args:
        rows (list): (law, method, error) tuples, kept in the given order.

    Returns:
        pandas.DataFrame: Metrics table.
    """
    if not rows:
        raise ConfigError("No metrics to summarise")
    return pd.DataFrame(
        [(int(law), method, float(err)) for law, method, err in rows],
        columns=["law", "method", "relative_error_percent"],
    )
