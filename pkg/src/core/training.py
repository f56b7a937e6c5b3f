"""
Training module: Adam optimizer and the MCNN / single-law PINN drivers.

MCNN mode trains one network on the collocation points of all three laws at
once; PINN mode trains a network on a single law's points. Every epoch is one
full-batch Adam step.
"""

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from src.core.exceptions import ConfigError, NonFiniteLossError, NumericalError
from src.core.logger import logger
from src.core.sampling import SamplingPlan, sample_training_set
from src.models.constitutive import ALL_LAWS, MaterialProps, as_law
from src.models.mlp import MlpArch, ParamVector, init_params, loss_gradient
from src.models.physics import ConsolidationLoss

MODE_MCNN = "mcnn"
MODE_PINN = "pinn"

# Epoch schedules: MCNN, then single-law PINNs keyed by law index.
DEFAULT_EPOCHS = {MODE_MCNN: 100000, 1: 50000, 2: 20000, 3: 10000}
DEFAULT_LEARNING_RATE = 5e-4


def default_epochs(mode, law=None):
    """Epoch count of the reference schedule for a mode/law."""
    if mode == MODE_MCNN:
        return DEFAULT_EPOCHS[MODE_MCNN]
    return DEFAULT_EPOCHS[int(as_law(law))]


@dataclass(frozen=True)
class AdamState:
    """Moments and hyperparameters of Adam.

    Args:
        first_moment, second_moment: Arrays shaped like the parameters.
        step_count: Number of updates applied so far.
        learning_rate, beta1, beta2, epsilon: Adam hyperparameters.
    """

    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0
    learning_rate: float = DEFAULT_LEARNING_RATE
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def zeros(cls, size, learning_rate=DEFAULT_LEARNING_RATE, beta1=0.9, beta2=0.999, epsilon=1e-8):
        return cls(np.zeros(size), np.zeros(size), 0, learning_rate, beta1, beta2, epsilon)


def adam_step(state, params, grad):
    """Apply one bias-corrected Adam update.

    Args:
        state (AdamState): Current optimizer state.
        params (ParamVector or numpy.ndarray): Current parameters.
        grad (ParamVector or numpy.ndarray): Gradient at params.

    Returns:
        tuple: (new AdamState, new parameters of the same type as params).

    Raises:
        NumericalError: If the gradient contains NaN or infinity.
    """
    p = params.values if isinstance(params, ParamVector) else np.asarray(params, dtype=np.float64)
    g = grad.values if isinstance(grad, ParamVector) else np.asarray(grad, dtype=np.float64)
    if p.shape != g.shape or p.shape != state.first_moment.shape:
        raise ValueError(f"Shape mismatch: params {p.shape}, grad {g.shape}, "
                         f"moments {state.first_moment.shape}")
    if not np.all(np.isfinite(g)):
        raise NumericalError(f"Non-finite gradient entry at index {int(np.flatnonzero(~np.isfinite(g))[0])}")

    step = state.step_count + 1
    m = state.beta1 * state.first_moment + (1.0 - state.beta1) * g
    v = state.beta2 * state.second_moment + (1.0 - state.beta2) * (g * g)
    m_hat = m / (1.0 - state.beta1 ** step)
    v_hat = v / (1.0 - state.beta2 ** step)
    new_p = p - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)

    new_state = replace(state, first_moment=m, second_moment=v, step_count=step)
    if isinstance(params, ParamVector):
        return new_state, params.replace(new_p)
    return new_state, new_p


@dataclass(frozen=True)
class TrainConfig:
    """Everything a training run depends on.

    Args:
        mode: "mcnn" or "pinn".
        law: Law index for PINN mode, ignored for MCNN.
        arch: Network shape.
        plan: Collocation sampling plan (per law).
        epochs: Full-batch Adam steps, at least 1.
        learning_rate: Adam step size.
        seed: Seed for parameter initialization.
        log_every: History/log interval in epochs.
        props: Material constants.
        clip_norm: Gradient-norm clip; 0 disables clipping.
    """

    mode: str = MODE_MCNN
    law: object = None
    arch: MlpArch = field(default_factory=MlpArch)
    plan: SamplingPlan = field(default_factory=SamplingPlan)
    epochs: int = DEFAULT_EPOCHS[MODE_MCNN]
    learning_rate: float = DEFAULT_LEARNING_RATE
    seed: int = 42
    log_every: int = 1000
    props: MaterialProps = field(default_factory=MaterialProps)
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    clip_norm: float = 0.0

    def __post_init__(self):
        if self.mode not in (MODE_MCNN, MODE_PINN):
            raise ConfigError(f"Unknown training mode {self.mode!r}; expected 'mcnn' or 'pinn'")
        if self.mode == MODE_PINN:
            if self.law is None:
                raise ConfigError("PINN mode needs a constitutive law")
            object.__setattr__(self, "law", as_law(self.law))
        if self.epochs < 1:
            raise ConfigError(f"epochs must be at least 1, got {self.epochs}")
        if self.log_every < 1:
            raise ConfigError(f"log_every must be at least 1, got {self.log_every}")
        if self.learning_rate <= 0.0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.clip_norm < 0.0:
            raise ConfigError(f"clip_norm must be non-negative, got {self.clip_norm}")

    @property
    def laws(self):
        return ALL_LAWS if self.mode == MODE_MCNN else (self.law,)

    @property
    def label(self):
        return MODE_MCNN if self.mode == MODE_MCNN else f"pinn_law{int(self.law)}"


@dataclass
class TrainReport:
    """Outcome of a training run."""

    params: ParamVector
    history: list
    wall_time: float
    config: TrainConfig

    def history_frame(self):
        """Loss history as a DataFrame with columns epoch, loss."""
        return pd.DataFrame(self.history, columns=["epoch", "loss"])


def _clip(grad, clip_norm):
    norm = float(np.linalg.norm(grad.values))
    if clip_norm > 0.0 and norm > clip_norm:
        return grad.replace(grad.values * (clip_norm / norm))
    return grad


def train(config):
    """Run full-batch Adam training for one configuration.

    Args:
        config (TrainConfig): Mode, schedule, network and sampling settings.

    Returns:
        TrainReport: Final parameters, loss history and wall time.

    Raises:
        NonFiniteLossError: If the loss or the constitutive domain breaks
            down; carries the epoch index.
    """
    start = time.perf_counter()
    samples = sample_training_set(config.plan, config.laws)
    loss = ConsolidationLoss(samples, config.props)
    params = init_params(config.arch, config.seed)
    state = AdamState.zeros(len(params), config.learning_rate,
                            config.beta1, config.beta2, config.epsilon)

    logger.info(f"Training {config.label}: {config.epochs} epochs, {len(samples)} samples, "
                f"{len(params)} parameters, lr={config.learning_rate:g}")
    history = []
    for epoch in range(config.epochs):
        try:
            value, grad = loss_gradient(params, config.arch, samples, loss)
            grad = _clip(grad, config.clip_norm)
            state, params = adam_step(state, params, grad)
        except NumericalError as e:
            logger.error(f"Training {config.label} aborted at epoch {epoch}: {e}")
            raise NonFiniteLossError(f"Epoch {epoch}: {e}", index=getattr(e, "index", None),
                                     epoch=epoch) from e
        if epoch % config.log_every == 0:
            history.append((epoch, value))
            logger.info(f"[{config.label}] epoch {epoch:>7d}  loss {value:.6e}")

    try:
        final_value, _ = loss_gradient(params, config.arch, samples, loss)
    except NumericalError as e:
        raise NonFiniteLossError(f"Epoch {config.epochs}: {e}", epoch=config.epochs) from e
    history.append((config.epochs, final_value))

    wall_time = time.perf_counter() - start
    logger.info(f"[{config.label}] finished: final loss {final_value:.6e} in {wall_time:.1f}s")
    return TrainReport(params=params, history=history, wall_time=wall_time, config=config)


def expected_history_length(epochs, log_every):
    """Number of history entries train() records."""
    return math.ceil(epochs / log_every) + 1
