"""
Logger module for the MCNN consolidation solver.
"""

import os
import logging
from logging.handlers import RotatingFileHandler

from dotenv import load_dotenv

# Environment overrides (.env) apply before the log settings are read
load_dotenv()

# Log directory
LOG_DIR = os.getenv('MCNN_LOG_DIR', 'logs')
LOG_LEVEL = os.getenv('MCNN_LOG_LEVEL', 'INFO').upper()


def setup_logger(name, level=None):
    """Setup and return a logger with the given name and level.

    Handlers are attached only the first time a given name is configured,
    so repeated calls return the same logger without duplicated output.

    Args:
        name (str): Logger name.
        level (int, optional): Logging level. Defaults to MCNN_LOG_LEVEL.

    Returns:
        logging.Logger: Configured logger.
    """
    if level is None:
        level = getattr(logging, LOG_LEVEL, logging.INFO)

    logger = logging.getLogger(name)
    logger.setLevel(level)
    if logger.handlers:
        return logger

    # Create formatter
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    # Create console handler
    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    # Create file handler for detailed logging
    try:
        os.makedirs(LOG_DIR, exist_ok=True)
        file_handler = RotatingFileHandler(
            os.path.join(LOG_DIR, f'{name}.log'),
            maxBytes=10485760,  # 10MB
            backupCount=5
        )
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
    except OSError as e:
        logger.warning(f"File logging disabled, cannot write to {LOG_DIR}: {e}")

    return logger


# Create default logger
logger = setup_logger('mcnn')
