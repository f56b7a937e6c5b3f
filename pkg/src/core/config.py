"""
Configuration module for MCNN runs.

A run configuration is a flat `key=value` file (one key per line, `#`
comments) read with python-dotenv. File values are overlaid on the defaults,
command-line overrides are overlaid on the file, and the result is a frozen
RunConfig from which every component gets its own settings object.
"""

import os
from dataclasses import asdict, dataclass, replace

import numpy as np
from dotenv import dotenv_values

from src.core.exceptions import ConfigError
from src.core.logger import logger
from src.core.sampling import SamplingPlan
from src.core.training import DEFAULT_EPOCHS, MODE_MCNN, MODE_PINN, TrainConfig
from src.models.constitutive import MaterialProps, as_law
from src.models.mlp import MlpArch
from src.tools.fdref import FdGridSpec

DEFAULT_CONFIG_FILE = "mcnn.env"


def get_default_config():
    """Get default configuration.

    Returns:
        dict: Default value of every configuration key.
    """
    return {
        # Material
        "gamma_hat": 1.0 / 3.0,
        "mu_hat": 1.0 / 3.0,
        "phi0": 0.3,
        "j_bar": 0.8,
        # Network
        "hidden_layers": 5,
        "hidden_width": 50,
        "activation": "tanh",
        # Run
        "mode": MODE_MCNN,
        "law": None,
        "seed": 42,
        # Optimizer
        "learning_rate": 5e-4,
        "beta1": 0.9,
        "beta2": 0.999,
        "epsilon": 1e-8,
        "clip_norm": 0.0,
        "log_every": 1000,
        # Schedules
        "mcnn_epochs": DEFAULT_EPOCHS[MODE_MCNN],
        "pinn_epochs_law1": DEFAULT_EPOCHS[1],
        "pinn_epochs_law2": DEFAULT_EPOCHS[2],
        "pinn_epochs_law3": DEFAULT_EPOCHS[3],
        "epochs": None,
        "fast_factor": 5,
        # Sampling
        "per_law_total": 1000,
        "pinn_points": 3000,
        # X=0 is pinned by the output transform; the initial line gets its share.
        "interior_fraction": 0.5,
        "top_fraction": 0.1,
        "bottom_fraction": 0.1,
        "initial_fraction": 0.3,
        # Reference solver
        "fd_dx": 0.02,
        "fd_dt": 1e-5,
        "fd_t_end": 1.0,
        # Evaluation
        "test_nx": 100,
        "test_nt": 100,
        "settlement_times": (0.01, 0.1, 0.5, 1.0),
        # Output
        "output_dir": "results",
        "run_label": "mcnn",
    }


_INT_KEYS = {"hidden_layers", "hidden_width", "seed", "log_every", "mcnn_epochs",
             "pinn_epochs_law1", "pinn_epochs_law2", "pinn_epochs_law3", "epochs",
             "fast_factor", "per_law_total", "pinn_points", "test_nx", "test_nt"}
_STR_KEYS = {"activation", "mode", "output_dir", "run_label"}
_OPTIONAL_KEYS = {"law", "epochs"}
_EPOCH_KEYS = ("mcnn_epochs", "pinn_epochs_law1", "pinn_epochs_law2", "pinn_epochs_law3", "epochs")


def _coerce(key, value):
    """Convert a raw (usually string) value to the type of its key."""
    if key in _OPTIONAL_KEYS and (value is None or str(value).strip().lower() in ("", "none")):
        return None
    if value is None:
        raise ConfigError(f"Key {key!r} has no value")
    try:
        if key == "law":
            return int(as_law(int(str(value).strip())))
        if key in _INT_KEYS:
            return int(str(value).strip())
        if key in _STR_KEYS:
            return str(value).strip()
        if key == "settlement_times":
            if isinstance(value, (tuple, list)):
                return tuple(float(v) for v in value)
            return tuple(float(v) for v in str(value).split(",") if v.strip())
        return float(value)
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"Invalid value {value!r} for key {key!r}")


def _render(value):
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ",".join(repr(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings of one CLI run; see get_default_config for keys."""

    gamma_hat: float
    mu_hat: float
    phi0: float
    j_bar: float
    hidden_layers: int
    hidden_width: int
    activation: str
    mode: str
    law: object
    seed: int
    learning_rate: float
    beta1: float
    beta2: float
    epsilon: float
    clip_norm: float
    log_every: int
    mcnn_epochs: int
    pinn_epochs_law1: int
    pinn_epochs_law2: int
    pinn_epochs_law3: int
    epochs: object
    fast_factor: int
    per_law_total: int
    pinn_points: int
    interior_fraction: float
    top_fraction: float
    bottom_fraction: float
    initial_fraction: float
    fd_dx: float
    fd_dt: float
    fd_t_end: float
    test_nx: int
    test_nt: int
    settlement_times: tuple
    output_dir: str
    run_label: str

    def __post_init__(self):
        if self.mode not in (MODE_MCNN, MODE_PINN):
            raise ConfigError(f"Unknown mode {self.mode!r}; expected 'mcnn' or 'pinn'")
        if self.mode == MODE_PINN and self.law is None:
            raise ConfigError("mode=pinn needs law=1, 2 or 3")
        for key in _EPOCH_KEYS:
            value = getattr(self, key)
            if value is not None and value < 1:
                raise ConfigError(f"{key} must be at least 1, got {value}")
        if self.fast_factor < 1:
            raise ConfigError(f"fast_factor must be at least 1, got {self.fast_factor}")
        if self.pinn_points < 1:
            raise ConfigError(f"pinn_points must be at least 1, got {self.pinn_points}")
        if self.test_nx < 2 or self.test_nt < 1:
            raise ConfigError(f"Test grid needs test_nx >= 2 and test_nt >= 1, "
                              f"got {self.test_nx} x {self.test_nt}")
        if not self.settlement_times:
            raise ConfigError("settlement_times must name at least one time")
        for t in self.settlement_times:
            if not 0.0 < t <= self.fd_t_end:
                raise ConfigError(f"Settlement time {t} lies outside (0, {self.fd_t_end}]")
        if not self.output_dir:
            raise ConfigError("output_dir must not be empty")
        # Building the component settings validates their own invariants.
        self.material_props()
        self.arch()
        self.sampling_plan(MODE_MCNN)
        self.fd_spec()

    def material_props(self):
        return MaterialProps(self.gamma_hat, self.mu_hat, self.phi0, self.j_bar)

    def arch(self):
        return MlpArch(hidden_layers=self.hidden_layers, hidden_width=self.hidden_width,
                       activation=self.activation)

    def sampling_plan(self, mode, seed=None):
        """Sampling plan of a mode: per_law_total points per law for MCNN, pinn_points for PINN."""
        total = self.per_law_total if mode == MODE_MCNN else self.pinn_points
        return SamplingPlan(per_law_total=total,
                            interior_fraction=self.interior_fraction,
                            top_fraction=self.top_fraction,
                            bottom_fraction=self.bottom_fraction,
                            initial_fraction=self.initial_fraction,
                            seed=self.seed if seed is None else seed)

    def epochs_for(self, mode, law=None):
        """Epoch count of a mode/law; an explicit `epochs` key wins over the schedule."""
        if self.epochs is not None:
            return self.epochs
        if mode == MODE_MCNN:
            return self.mcnn_epochs
        return getattr(self, f"pinn_epochs_law{int(as_law(law))}")

    def train_config(self, mode=None, law=None, seed=None):
        """TrainConfig for a mode/law, defaulting to the configured ones.

        Args:
            mode (str, optional): "mcnn" or "pinn".
            law (int, optional): Law of a PINN run.
            seed (int, optional): Seed for sampling and initialization.

        Returns:
            TrainConfig: Settings of the training run.
        """
        mode = self.mode if mode is None else mode
        if mode == MODE_PINN and law is None:
            law = self.law
        law = None if mode == MODE_MCNN else law
        seed = self.seed if seed is None else seed
        return TrainConfig(
            mode=mode,
            law=law,
            arch=self.arch(),
            plan=self.sampling_plan(mode, seed),
            epochs=self.epochs_for(mode, law),
            learning_rate=self.learning_rate,
            seed=seed,
            log_every=self.log_every,
            props=self.material_props(),
            beta1=self.beta1,
            beta2=self.beta2,
            epsilon=self.epsilon,
            clip_norm=self.clip_norm,
        )

    def test_times(self):
        """Snapshot times of the test grid: (k+1)/test_nt."""
        return tuple((np.arange(self.test_nt) + 1) / self.test_nt)

    def fd_spec(self):
        """FD grid recording the test-grid times and every settlement time."""
        times = sorted(set(self.test_times()) | set(self.settlement_times))
        return FdGridSpec(dx=self.fd_dx, dt=self.fd_dt, t_end=self.fd_t_end,
                          snapshot_times=tuple(times))

    def seed_for(self, mode, law=None):
        """Seed of a repro run: base seed for MCNN, base seed + law for PINN law i."""
        return self.seed if mode == MODE_MCNN else self.seed + int(as_law(law))

    def scaled(self, factor):
        """Copy with every epoch schedule divided by factor (at least 1 epoch)."""
        changes = {}
        for key in _EPOCH_KEYS:
            value = getattr(self, key)
            if value is not None:
                changes[key] = max(1, value // factor)
        return replace(self, **changes)

    def to_lines(self):
        """Resolved-config echo: sorted key=value lines."""
        return [f"{key}={_render(value)}" for key, value in sorted(asdict(self).items())]


def load_config(config_file=None, overrides=None, fast=False):
    """Load the run configuration.

    Args:
        config_file (str, optional): Path to a key=value file; defaults only
            when None.
        overrides (dict, optional): Values that take precedence over the file.
        fast (bool): Divide every epoch schedule by fast_factor.

    Returns:
        RunConfig: Resolved, validated configuration.

    Raises:
        ConfigError: On a missing file, unknown keys or invalid values.
    """
    values = get_default_config()
    raw = {}
    if config_file is not None:
        if not os.path.isfile(config_file):
            logger.error(f"Configuration file {config_file} not found.")
            raise ConfigError(f"Configuration file {config_file} not found")
        raw.update(dotenv_values(config_file))
        logger.info(f"Configuration loaded from {config_file}")
    raw.update(overrides or {})

    unknown = sorted(set(raw) - set(values))
    if unknown:
        raise ConfigError(f"Unknown configuration keys: {', '.join(unknown)}")
    for key, value in raw.items():
        values[key] = _coerce(key, value)

    config = RunConfig(**values)
    if fast:
        config = config.scaled(config.fast_factor)
        logger.info(f"Fast mode: epoch schedules divided by {config.fast_factor}")
    return config


def parse_assignments(assignments):
    """Turn `KEY=VALUE` strings into an overrides dict.

    Raises:
        ConfigError: If an entry has no '='.
    """
    overrides = {}
    for item in assignments or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"Expected KEY=VALUE, got {item!r}")
        overrides[key.strip()] = value.strip()
    return overrides

