"""
Fully connected tanh network with hand-derived differentiation.

The network maps a 5-vector (X, t, e1, e2, e3) to a raw scalar N. Besides the
value, the forward pass carries three input tangents through every layer:
dN/dX, dN/dt and d2N/dX2. For a hidden layer a = tanh(z), z = W a_prev + b:

    a_x  = s1 z_x
    a_t  = s1 z_t
    a_xx = s2 z_x^2 + s1 z_xx

with s1 = tanh'(z), s2 = tanh''(z). The reverse pass differentiates these
rules again, so gradients of any loss written in terms of the jet
(N, N_x, N_t, N_xx) are exact with respect to every weight and bias.

All arrays are float64; batch reductions are matrix products over a fixed
sample order, so identical inputs give identical results.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from src.core.exceptions import ConfigError, NonFiniteLossError
from src.models.constitutive import OneHotLaw

INPUT_DIM = 5
OUTPUT_DIM = 1


@dataclass(frozen=True)
class MlpArch:
    """Layer shapes of the network.

    Args:
        input_dim: Must be 5 (X, t and three one-hot components).
        hidden_layers: Number of hidden tanh layers, at least 1.
        hidden_width: Neurons per hidden layer.
        activation: Only "tanh" is supported.
        output_dim: Must be 1.
    """

    input_dim: int = INPUT_DIM
    hidden_layers: int = 5
    hidden_width: int = 50
    activation: str = "tanh"
    output_dim: int = OUTPUT_DIM

    def __post_init__(self):
        if self.input_dim != INPUT_DIM or self.output_dim != OUTPUT_DIM:
            raise ConfigError(
                f"Network must map {INPUT_DIM} inputs to {OUTPUT_DIM} output, "
                f"got {self.input_dim} -> {self.output_dim}")
        if self.hidden_layers < 1 or self.hidden_width < 1:
            raise ConfigError(
                f"Need at least one hidden layer of positive width, got "
                f"{self.hidden_layers} x {self.hidden_width}")
        if self.activation != "tanh":
            raise ConfigError(f"Unsupported activation {self.activation!r}; only 'tanh' is implemented")

    def layer_shapes(self):
        """Weight shapes (fan_out, fan_in) from input to output."""
        widths = [self.input_dim] + [self.hidden_width] * self.hidden_layers + [self.output_dim]
        return [(widths[i + 1], widths[i]) for i in range(len(widths) - 1)]

    @property
    def param_count(self):
        return sum(out * (inp + 1) for out, inp in self.layer_shapes())

    def layout(self):
        """Offsets of each layer inside the flat parameter vector.

        Each layer stores its weight matrix row-major, followed by its bias.

        Returns:
            list: (weight_offset, weight_shape, bias_offset) per layer.
        """
        slots = []
        offset = 0
        for shape in self.layer_shapes():
            size = shape[0] * shape[1]
            slots.append((offset, shape, offset + size))
            offset += size + shape[0]
        return slots

    def flat_index(self, layer, kind, row, col=0):
        """Map (layer, 'weight'|'bias', row, col) to a flat parameter index."""
        w_offset, (fan_out, fan_in), b_offset = self.layout()[layer]
        if not 0 <= row < fan_out:
            raise IndexError(f"Row {row} out of range for layer {layer}")
        if kind == "weight":
            if not 0 <= col < fan_in:
                raise IndexError(f"Column {col} out of range for layer {layer}")
            return w_offset + row * fan_in + col
        if kind == "bias":
            return b_offset + row
        raise ValueError(f"Unknown parameter kind {kind!r}")


class ParamVector:
    """Immutable flat parameter vector tied to an architecture."""

    def __init__(self, values, arch):
        values = np.array(values, dtype=np.float64).ravel()
        if values.size != arch.param_count:
            raise ValueError(
                f"Parameter vector has {values.size} entries, architecture needs {arch.param_count}")
        values.setflags(write=False)
        self.values = values
        self.arch = arch

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return f"ParamVector(n={self.values.size}, arch={self.arch})"

    def layers(self):
        """Return read-only (W, b) views per layer."""
        out = []
        for w_offset, shape, b_offset in self.arch.layout():
            w = self.values[w_offset:w_offset + shape[0] * shape[1]].reshape(shape)
            b = self.values[b_offset:b_offset + shape[0]]
            out.append((w, b))
        return out

    def replace(self, values):
        """Return a new vector with the same architecture and new values."""
        return ParamVector(values, self.arch)


@dataclass(frozen=True)
class SamplePoint:
    """A collocation point (X, t) together with its law encoding."""

    x_hat: float
    t_hat: float
    law: OneHotLaw

    def __post_init__(self):
        if not (0.0 <= self.x_hat <= 1.0 and 0.0 <= self.t_hat <= 1.0):
            raise ValueError(f"Sample point ({self.x_hat}, {self.t_hat}) lies outside the unit domain")

    def inputs(self):
        return np.array([self.x_hat, self.t_hat, *self.law.e], dtype=np.float64)


@dataclass(frozen=True)
class Jet:
    """Raw network output and its input derivatives (floats or arrays)."""

    n: object
    dn_dx: object
    dn_dt: object
    d2n_dx2: object


class LossTerms(NamedTuple):
    """What a jet loss returns to loss_gradient.

    value: scalar loss.
    per_sample: per-sample contributions, used to locate non-finite samples.
    adjoint: Jet of d(value)/d(field), one array per jet field.
    """

    value: float
    per_sample: np.ndarray
    adjoint: Jet


def init_params(arch, seed):
    """Glorot-uniform weights and zero biases.

    Args:
        arch (MlpArch): Network shape.
        seed (int): Seed for numpy's default generator.

    Returns:
        ParamVector: Initial parameters.
    """
    rng = np.random.default_rng(seed)
    values = np.zeros(arch.param_count, dtype=np.float64)
    for w_offset, (fan_out, fan_in), _ in arch.layout():
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        values[w_offset:w_offset + fan_out * fan_in] = rng.uniform(-bound, bound, size=fan_out * fan_in)
    return ParamVector(values, arch)


def _check_params(params, arch):
    if params.arch != arch:
        raise ValueError(f"Parameters belong to {params.arch}, not {arch}")


def batch_inputs(batch):
    """Turn a batch into a (B, 5) float64 input matrix.

    Args:
        batch: An object with an inputs() method (CollocationSet), a (B, 5)
            array, or a sequence of SamplePoint.

    Returns:
        numpy.ndarray: Input matrix.
    """
    if hasattr(batch, "inputs"):
        inputs = batch.inputs()
    elif isinstance(batch, np.ndarray):
        inputs = batch
    else:
        inputs = np.stack([point.inputs() for point in batch]) if len(batch) else np.empty((0, INPUT_DIM))
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != INPUT_DIM:
        raise ValueError(f"Expected inputs of shape (B, {INPUT_DIM}), got {inputs.shape}")
    return inputs


def forward_batch(params, arch, inputs):
    """Raw outputs N for a (B, 5) input matrix."""
    _check_params(params, arch)
    a = batch_inputs(inputs)
    layers = params.layers()
    for w, b in layers[:-1]:
        a = np.tanh(a @ w.T + b)
    w, b = layers[-1]
    return (a @ w.T + b)[:, 0]


def forward(params, arch, point):
    """Raw output N at one sample point.

    Args:
        params (ParamVector): Network parameters.
        arch (MlpArch): Network shape.
        point (SamplePoint): Evaluation point.

    Returns:
        float: N(X, t, e).
    """
    return float(forward_batch(params, arch, [point])[0])


def _tangent_seed(batch_size):
    """Input tangents stacked as [d/dX; d/dt; d2/dX2], shape (3B, 5)."""
    seed = np.zeros((3 * batch_size, INPUT_DIM))
    seed[:batch_size, 0] = 1.0
    seed[batch_size:2 * batch_size, 1] = 1.0
    return seed


def _jet_forward(params, arch, inputs):
    """Forward pass carrying tangents; returns the jet and the tape for reverse."""
    _check_params(params, arch)
    a = batch_inputs(inputs)
    size = a.shape[0]
    tangents = _tangent_seed(size)
    layers = params.layers()
    tape = []
    for w, b in layers[:-1]:
        # Value stream uses the same expression as forward_batch.
        z = a @ w.T + b
        zt = tangents @ w.T
        z_x, z_t, z_xx = zt[:size], zt[size:2 * size], zt[2 * size:]
        s = np.tanh(z)
        s1 = 1.0 - s * s
        s2 = -2.0 * s * s1
        tape.append((a, tangents, s, s1, s2, z_x, z_t, z_xx))
        a = s
        tangents = np.concatenate([s1 * z_x, s1 * z_t, s2 * z_x * z_x + s1 * z_xx])
    w, b = layers[-1]
    n = (a @ w.T + b)[:, 0]
    nt = (tangents @ w.T)[:, 0]
    tape.append((a, tangents))
    jet = Jet(n, nt[:size], nt[size:2 * size], nt[2 * size:])
    return jet, tape


def jet_batch(params, arch, inputs):
    """Jets for a (B, 5) input matrix; each field is an array of length B."""
    jet, _ = _jet_forward(params, arch, inputs)
    return jet


def forward_jet(params, arch, point):
    """Raw output and its exact input derivatives at one point.

    Args:
        params (ParamVector): Network parameters.
        arch (MlpArch): Network shape.
        point (SamplePoint): Evaluation point.

    Returns:
        Jet: (N, dN/dX, dN/dt, d2N/dX2) as floats.
    """
    jet = jet_batch(params, arch, [point])
    return Jet(float(jet.n[0]), float(jet.dn_dx[0]), float(jet.dn_dt[0]), float(jet.d2n_dx2[0]))


def _reverse(params, arch, tape, adjoint):
    """Back-propagate a jet adjoint into a flat parameter gradient."""
    grad = np.zeros(arch.param_count, dtype=np.float64)
    slots = arch.layout()
    layers = params.layers()

    a_prev, t_prev = tape[-1]
    g = np.asarray(adjoint.n, dtype=np.float64)[:, None]
    gt = np.concatenate([np.asarray(adjoint.dn_dx, dtype=np.float64),
                         np.asarray(adjoint.dn_dt, dtype=np.float64),
                         np.asarray(adjoint.d2n_dx2, dtype=np.float64)])[:, None]
    size = g.shape[0]

    for index in range(len(layers) - 1, -1, -1):
        w, _ = layers[index]
        w_offset, shape, b_offset = slots[index]
        if index < len(layers) - 1:
            a_prev, t_prev, s, s1, s2, z_x, z_t, z_xx = tape[index]
            ga, gtan = g, gt
            ga_x, ga_t, ga_xx = gtan[:size], gtan[size:2 * size], gtan[2 * size:]
            s3 = -2.0 * s1 * s1 + 4.0 * s * s * s1
            g = (ga * s1
                 + (ga_x * z_x + ga_t * z_t) * s2
                 + ga_xx * (s3 * z_x * z_x + s2 * z_xx))
            gt = np.concatenate([ga_x * s1 + 2.0 * ga_xx * s2 * z_x,
                                 ga_t * s1,
                                 ga_xx * s1])
        dw = g.T @ a_prev + gt.T @ t_prev
        grad[w_offset:w_offset + shape[0] * shape[1]] = dw.ravel()
        grad[b_offset:b_offset + shape[0]] = g.sum(axis=0)
        if index > 0:
            g = g @ w
            gt = gt @ w
    return grad


def loss_gradient(params, arch, batch, loss):
    """Loss value and its exact gradient with respect to every parameter.

    Args:
        params (ParamVector): Network parameters.
        arch (MlpArch): Network shape.
        batch: Samples accepted by batch_inputs.
        loss (callable): Maps a batch Jet to LossTerms.

    Returns:
        tuple: (loss value as float, gradient as ParamVector).

    Raises:
        NonFiniteLossError: If any per-sample loss is NaN or infinite.
    """
    jet, tape = _jet_forward(params, arch, batch)
    terms = loss(jet)
    per_sample = np.atleast_1d(np.asarray(terms.per_sample, dtype=np.float64))
    bad = np.flatnonzero(~np.isfinite(per_sample))
    if bad.size or not np.isfinite(terms.value):
        index = int(bad[0]) if bad.size else None
        raise NonFiniteLossError(f"Non-finite loss at sample {index}", index=index)
    grad = _reverse(params, arch, tape, terms.adjoint)
    return float(terms.value), ParamVector(grad, arch)
