"""
Tests for the file operations module.
"""

import os
import tempfile
import unittest

import numpy as np
import pandas as pd
import pytest

from src.core.exceptions import ConfigError
from src.core.file_operations import (CHECKPOINT_MAGIC, load_checkpoint, load_csv, save_checkpoint,
                                      save_csv, save_text)
from src.models.mlp import MlpArch, init_params


class TestFileOperationsModule(unittest.TestCase):
    """Tests for the file operations module."""

    @pytest.fixture(autouse=True)
    def _mocker(self, mocker):
        self.mocker = mocker

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.temp_dir.cleanup()

    def path(self, *parts):
        return os.path.join(self.temp_dir.name, *parts)

    def test_save_csv_round_trips_floats(self):
        frame = pd.DataFrame({"x_hat": [0.0, 1.0 / 3.0], "j": [0.1 + 0.2, np.nextafter(0.8, 1.0)]})
        filepath = self.path("nested", "data.csv")
        self.assertTrue(save_csv(frame, filepath))
        loaded = load_csv(filepath)
        pd.testing.assert_frame_equal(loaded, frame)

    def test_save_csv_format(self):
        filepath = self.path("data.csv")
        save_csv(pd.DataFrame({"epoch": [0, 10], "loss": [0.5, 0.25]}), filepath)
        with open(filepath) as f:
            self.assertEqual(f.read(), "epoch,loss\n0,0.5\n10,0.25\n")

    def test_save_csv_error(self):
        to_csv = self.mocker.patch("pandas.DataFrame.to_csv", side_effect=OSError("disk full"))
        with self.assertRaises(OSError):
            save_csv(pd.DataFrame({"a": [1]}), self.path("data.csv"))
        to_csv.assert_called_once()

    def test_load_csv_file_not_found(self):
        with self.assertRaises(ConfigError):
            load_csv(self.path("nonexistent.csv"))

    def test_load_csv_empty_file(self):
        filepath = self.path("empty.csv")
        open(filepath, "w").close()
        with self.assertRaises(ConfigError):
            load_csv(filepath)

    def test_save_text(self):
        filepath = self.path("out", "config_resolved.env")
        self.assertTrue(save_text("seed=42\n", filepath))
        with open(filepath) as f:
            self.assertEqual(f.read(), "seed=42\n")


class TestCheckpointFormat(unittest.TestCase):
    """Tests for the checkpoint text layout."""

    def test_header_layout(self):
        arch = MlpArch(hidden_layers=1, hidden_width=3)
        params = init_params(arch, 2)
        with tempfile.TemporaryDirectory() as temp_dir:
            filepath = os.path.join(temp_dir, "checkpoint.txt")
            save_checkpoint(filepath, params, seed=2, epochs=10, mode="pinn", law=1)
            with open(filepath) as f:
                lines = f.read().splitlines()
            loaded, _ = load_checkpoint(filepath)
        self.assertEqual(lines[0], f"{CHECKPOINT_MAGIC} 1")
        self.assertIn("law 1", lines)
        self.assertIn("param_count 22", lines)
        self.assertEqual(len(lines), 1 + 10 + 1 + arch.param_count)
        np.testing.assert_array_equal(loaded.values, params.values)


if __name__ == "__main__":
    unittest.main()
