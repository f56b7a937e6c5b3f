"""
Physics layer: from raw network jets to the consolidation training loss.

The raw output N is mapped to J = J_bar + X * N so the loaded surface X=0
holds J = J_bar for every parameter vector. The residual of law i is the
expanded mass balance

    f_i = J_t - (1/phi0^3) [ D_i'(J) J_X^2 + D_i(J) J_XX ]

and the per-sample loss is (sum_i e_i f_i)^2 plus the boundary/initial
penalty of the stratum the sample lies in.
"""

from dataclasses import dataclass

import numpy as np

from src.core.exceptions import DomainError
from src.core.sampling import CollocationSet, Stratum, stratum_of
from src.models import constitutive
from src.models.mlp import Jet, LossTerms, jet_batch


@dataclass(frozen=True)
class PhysicalJet:
    """J and the derivatives entering the residual (floats or arrays)."""

    j: object
    dj_dx: object
    dj_dt: object
    d2j_dx2: object


def transform_output(jet, x_hat, props):
    """Apply the hard Dirichlet transform J = J_bar + X * N.

    Args:
        jet (Jet): Raw network jet.
        x_hat (float or numpy.ndarray): Spatial coordinate(s) of the jet.
        props (MaterialProps): Supplies J_bar.

    Returns:
        PhysicalJet: J, J_X, J_t and J_XX by the product rule.
    """
    x = x_hat
    return PhysicalJet(
        j=props.j_bar + x * jet.n,
        dj_dx=jet.n + x * jet.dn_dx,
        dj_dt=x * jet.dn_dt,
        d2j_dx2=2.0 * jet.dn_dx + x * jet.d2n_dx2,
    )


def _residual_with_partials(law, pj, props, strict):
    """Residual f_i and its partials with respect to (J, J_X, J_t, J_XX)."""
    j = np.asarray(pj.j, dtype=np.float64)
    jx = np.asarray(pj.dj_dx, dtype=np.float64)
    jt = np.asarray(pj.dj_dt, dtype=np.float64)
    jxx = np.asarray(pj.d2j_dx2, dtype=np.float64)
    scale = 1.0 / props.phi0_cubed

    d = np.asarray(constitutive.diffusivity(law, j, props, strict))
    d1 = np.asarray(constitutive.diffusivity_derivative(law, j, props, strict))
    d2 = np.asarray(constitutive.diffusivity_second_derivative(law, j, props, strict))

    f = jt - scale * (d1 * jx * jx + d * jxx)
    df_dj = -scale * (d2 * jx * jx + d1 * jxx)
    df_djx = -2.0 * scale * d1 * jx
    df_djt = np.ones_like(f)
    df_djxx = -scale * d
    return f, (df_dj, df_djx, df_djt, df_djxx)


def pde_residual(law, pj, props, strict=True):
    """Residual f_i of the mass balance under law i.

    Args:
        law (LawId or int): Constitutive law.
        pj (PhysicalJet): J and its derivatives.
        props (MaterialProps): Material constants.
        strict (bool): Enforce the physical domain J > 1 - phi0.

    Returns:
        float or numpy.ndarray: f_i.

    Raises:
        DomainError: If J leaves the constitutive domain.
    """
    f, _ = _residual_with_partials(law, pj, props, strict)
    return float(f) if f.ndim == 0 else f


def contracted_residual(onehot, pj, props, strict=True):
    """One-hot contraction sum_i e_i f_i for a batch, with partials.

    Only laws with a non-zero component are evaluated, so a sample's loss
    never depends on the residuals of the laws it is not encoded with.

    Args:
        onehot (numpy.ndarray): (B, 3) law encodings.
        pj (PhysicalJet): Batch of physical jets, arrays of length B.
        props (MaterialProps): Material constants.
        strict (bool): See pde_residual.

    Returns:
        tuple: (r, (dr_dj, dr_djx, dr_djt, dr_djxx)), arrays of length B.

    Raises:
        DomainError: With the batch index of the offending sample.
    """
    onehot = np.asarray(onehot, dtype=np.float64)
    size = onehot.shape[0]
    r = np.zeros(size)
    partials = tuple(np.zeros(size) for _ in range(4))
    fields = [np.broadcast_to(np.asarray(v, dtype=np.float64), (size,))
              for v in (pj.j, pj.dj_dx, pj.dj_dt, pj.d2j_dx2)]
    for law in constitutive.ALL_LAWS:
        weight = onehot[:, law - 1]
        rows = np.flatnonzero(weight != 0.0)
        if rows.size == 0:
            continue
        sub = PhysicalJet(*(field[rows] for field in fields))
        try:
            f, df = _residual_with_partials(law, sub, props, strict)
        except DomainError as e:
            index = int(rows[e.index]) if e.index is not None else None
            raise DomainError(f"Sample {index} (law {int(law)}): {e}", index=index) from e
        w = weight[rows]
        r[rows] += w * f
        for total, part in zip(partials, df):
            total[rows] += w * part
    return r, partials


def boundary_terms(strata, pj, props):
    """Boundary/initial penalty per sample and its partials in J and J_X.

    Args:
        strata (numpy.ndarray): Stratum codes.
        pj (PhysicalJet): Batch of physical jets.
        props (MaterialProps): Supplies J_bar.

    Returns:
        tuple: (penalty, d_penalty/dJ, d_penalty/dJ_X), arrays.
    """
    strata = np.asarray(strata)
    j = np.broadcast_to(np.asarray(pj.j, dtype=np.float64), strata.shape)
    jx = np.broadcast_to(np.asarray(pj.dj_dx, dtype=np.float64), strata.shape)
    top = strata == int(Stratum.TOP)
    bottom = strata == int(Stratum.BOTTOM)
    initial = strata == int(Stratum.INITIAL)

    top_gap = j - props.j_bar
    initial_gap = j - 1.0
    penalty = np.where(top, top_gap ** 2, 0.0) + np.where(bottom, jx ** 2, 0.0) \
        + np.where(initial, initial_gap ** 2, 0.0)
    d_j = np.where(top, 2.0 * top_gap, 0.0) + np.where(initial, 2.0 * initial_gap, 0.0)
    d_jx = np.where(bottom, 2.0 * jx, 0.0)
    return penalty, d_j, d_jx


def sample_loss(pj, point, props, strict=True):
    """Loss of one training sample: squared contracted residual plus L_BI.

    Args:
        pj (PhysicalJet): J and derivatives at the point (J_X doubles as
            the Neumann quantity at X=1).
        point (SamplePoint): The sample, classified by its coordinates.
        props (MaterialProps): Material constants.
        strict (bool): See pde_residual.

    Returns:
        float: Non-negative loss.
    """
    onehot = point.law.as_array()[None, :]
    r, _ = contracted_residual(onehot, pj, props, strict)
    strata = np.atleast_1d(int(stratum_of(point.x_hat, point.t_hat)))
    penalty, _, _ = boundary_terms(strata, pj, props)
    return float(r[0] ** 2 + penalty[0])


class ConsolidationLoss:
    """Mean consolidation loss over a fixed collocation batch.

    Calling the object on a batch jet returns LossTerms, including the
    adjoint jet consumed by mlp.loss_gradient.

    Args:
        batch (CollocationSet or sequence of SamplePoint): Samples.
        props (MaterialProps): Material constants.
        strict (bool): Enforce J > 1 - phi0. Training runs unstrict since
            early iterates can pass through unphysical states.
    """

    def __init__(self, batch, props, strict=False):
        if not isinstance(batch, CollocationSet):
            batch = CollocationSet.from_points(batch)
        if len(batch) == 0:
            raise ValueError("Loss needs a non-empty batch")
        self.batch = batch
        self.props = props
        self.strict = strict

    def __call__(self, jet):
        x = self.batch.x_hat
        size = x.size
        pj = transform_output(jet, x, self.props)
        r, (dr_dj, dr_djx, dr_djt, dr_djxx) = contracted_residual(
            self.batch.onehot, pj, self.props, self.strict)
        penalty, dp_dj, dp_djx = boundary_terms(self.batch.strata, pj, self.props)

        per_sample = r * r + penalty
        value = float(np.mean(per_sample))

        scale = 1.0 / size
        g_j = scale * (2.0 * r * dr_dj + dp_dj)
        g_jx = scale * (2.0 * r * dr_djx + dp_djx)
        g_jt = scale * 2.0 * r * dr_djt
        g_jxx = scale * 2.0 * r * dr_djxx

        adjoint = Jet(
            n=g_j * x + g_jx,
            dn_dx=g_jx * x + 2.0 * g_jxx,
            dn_dt=g_jt * x,
            d2n_dx2=g_jxx * x,
        )
        return LossTerms(value, per_sample, adjoint)


def batch_loss(params, arch, batch, props, strict=False):
    """Mean per-sample loss of a parameter vector over a batch.

    Args:
        params (ParamVector): Network parameters.
        arch (MlpArch): Network shape.
        batch (CollocationSet or sequence of SamplePoint): Non-empty batch.
        props (MaterialProps): Material constants.
        strict (bool): See ConsolidationLoss; the default matches training.

    Returns:
        float: Mean loss.

    Raises:
        ValueError: If the batch is empty.
    """
    loss = ConsolidationLoss(batch, props, strict)
    return loss(jet_batch(params, arch, loss.batch)).value
