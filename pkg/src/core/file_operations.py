"""
File operations module for saving and loading run artifacts.

CSV files are written with 17 significant digits so values round-trip
exactly. Checkpoints are plain text: a header of `key value` lines followed
by one parameter per line in flat-layout order.
"""

import os

import numpy as np
import pandas as pd

from src.core.exceptions import ConfigError
from src.core.logger import logger
from src.models.mlp import MlpArch, ParamVector

FLOAT_FORMAT = "%.17g"
CHECKPOINT_MAGIC = "mcnn-checkpoint"
CHECKPOINT_VERSION = 1
_HEADER_KEYS = ("input_dim", "hidden_layers", "hidden_width", "activation", "output_dim",
                "mode", "law", "seed", "epochs", "param_count")


def _ensure_parent(filepath):
    directory = os.path.dirname(filepath)
    if directory:
        os.makedirs(directory, exist_ok=True)


def save_csv(frame, filepath):
    """Save a DataFrame as CSV without index.

    Args:
        frame (pandas.DataFrame): Data to save.
        filepath (str): Path to the file.

    Returns:
        bool: True if successful.

    Raises:
        OSError: If the file cannot be written.
    """
    try:
        _ensure_parent(filepath)
        frame.to_csv(filepath, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"Data saved to {filepath}")
        return True
    except OSError as e:
        logger.error(f"Error saving data to {filepath}: {e}")
        raise


def load_csv(filepath):
    """Load a CSV file into a DataFrame.

    Args:
        filepath (str): Path to the file.

    Returns:
        pandas.DataFrame: Loaded data.

    Raises:
        ConfigError: If the file is missing or cannot be parsed.
    """
    try:
        frame = pd.read_csv(filepath, float_precision="round_trip")
        logger.info(f"Data loaded from {filepath}")
        return frame
    except FileNotFoundError:
        logger.error(f"File {filepath} not found.")
        raise ConfigError(f"File {filepath} not found")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        logger.error(f"Error parsing CSV in {filepath}: {e}")
        raise ConfigError(f"Cannot parse {filepath}: {e}")


def save_text(content, filepath):
    """Save text content to a file.

    Args:
        content (str): Text to save.
        filepath (str): Path to the file.

    Returns:
        bool: True if successful.
    """
    try:
        _ensure_parent(filepath)
        with open(filepath, "w", newline="\n") as f:
            f.write(content)
        logger.info(f"Text saved to {filepath}")
        return True
    except OSError as e:
        logger.error(f"Error saving text to {filepath}: {e}")
        raise


def save_checkpoint(filepath, params, seed, epochs, mode="mcnn", law=None):
    """Write network parameters and metadata to a text checkpoint.

    Args:
        filepath (str): Destination path.
        params (ParamVector): Parameters; the architecture comes from it.
        seed (int): Initialization seed of the run.
        epochs (int): Epochs the parameters were trained for.
        mode (str): "mcnn" or "pinn".
        law (int, optional): Law index of a PINN checkpoint.

    Returns:
        bool: True if successful.
    """
    arch = params.arch
    header = {
        "input_dim": arch.input_dim,
        "hidden_layers": arch.hidden_layers,
        "hidden_width": arch.hidden_width,
        "activation": arch.activation,
        "output_dim": arch.output_dim,
        "mode": mode,
        "law": "none" if law is None else int(law),
        "seed": int(seed),
        "epochs": int(epochs),
        "param_count": len(params),
    }
    lines = [f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}"]
    lines += [f"{key} {header[key]}" for key in _HEADER_KEYS]
    lines.append("values")
    lines += [FLOAT_FORMAT % v for v in params.values]
    return save_text("\n".join(lines) + "\n", filepath)


def load_checkpoint(filepath, expected_arch=None):
    """Read a checkpoint written by save_checkpoint.

    Args:
        filepath (str): Checkpoint path.
        expected_arch (MlpArch, optional): Reject checkpoints of another shape.

    Returns:
        tuple: (ParamVector, metadata dict with mode, law, seed, epochs).

    Raises:
        ConfigError: If the file is missing, malformed, of another version,
            or does not match expected_arch.
    """
    try:
        with open(filepath, "r") as f:
            lines = f.read().splitlines()
    except FileNotFoundError:
        logger.error(f"Checkpoint {filepath} not found.")
        raise ConfigError(f"Checkpoint {filepath} not found")

    if not lines or lines[0] != f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}":
        raise ConfigError(f"{filepath} is not a version {CHECKPOINT_VERSION} MCNN checkpoint")
    header = {}
    for line in lines[1:1 + len(_HEADER_KEYS)]:
        key, _, value = line.partition(" ")
        header[key] = value
    if (len(lines) < 2 + len(_HEADER_KEYS) or list(header) != list(_HEADER_KEYS)
            or lines[1 + len(_HEADER_KEYS)] != "values"):
        raise ConfigError(f"Malformed checkpoint header in {filepath}")

    try:
        arch = MlpArch(
            input_dim=int(header["input_dim"]),
            hidden_layers=int(header["hidden_layers"]),
            hidden_width=int(header["hidden_width"]),
            activation=header["activation"],
            output_dim=int(header["output_dim"]),
        )
        values = np.array([float(v) for v in lines[2 + len(_HEADER_KEYS):]], dtype=np.float64)
        count = int(header["param_count"])
        metadata = {
            "mode": header["mode"],
            "law": None if header["law"] == "none" else int(header["law"]),
            "seed": int(header["seed"]),
            "epochs": int(header["epochs"]),
        }
    except ValueError as e:
        raise ConfigError(f"Malformed checkpoint {filepath}: {e}")

    if values.size != count or count != arch.param_count:
        raise ConfigError(f"Checkpoint {filepath} holds {values.size} values, "
                          f"header says {count}, architecture needs {arch.param_count}")
    if expected_arch is not None and arch != expected_arch:
        raise ConfigError(f"Checkpoint architecture {arch} does not match configured {expected_arch}")
    logger.info(f"Checkpoint loaded from {filepath}")
    return ParamVector(values, arch), metadata
