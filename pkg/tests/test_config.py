"""
Tests for the run configuration.
"""

import os
import tempfile
import unittest

from src.core.config import get_default_config, load_config, parse_assignments
from src.core.exceptions import ConfigError
from src.models.constitutive import LawId


class TestConfigModule(unittest.TestCase):
    """Tests for load_config and RunConfig."""

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.temp_dir.cleanup()

    def write(self, text):
        path = os.path.join(self.temp_dir.name, "run.env")
        with open(path, "w") as f:
            f.write(text)
        return path

    def test_defaults(self):
        config = load_config()
        self.assertEqual(config.mode, "mcnn")
        self.assertIsNone(config.law)
        self.assertEqual(config.seed, 42)
        self.assertEqual(config.arch().param_count, 50 * 6 + 4 * 50 * 51 + 51)
        self.assertEqual(config.material_props().j_bar, 0.8)
        self.assertEqual(config.epochs_for("mcnn"), 100000)
        self.assertEqual(config.epochs_for("pinn", 1), 50000)
        self.assertEqual(config.settlement_times, (0.01, 0.1, 0.5, 1.0))
        self.assertEqual(set(get_default_config()), set(vars(config)))

    def test_default_split_favours_initial_line(self):
        config = load_config()
        self.assertEqual(config.sampling_plan("mcnn").stratum_counts(), [500, 100, 100, 300])
        self.assertEqual(config.sampling_plan("pinn").stratum_counts(), [1500, 300, 300, 900])
        shipped = load_config(os.path.join(os.path.dirname(__file__), os.pardir, "mcnn.env"))
        self.assertEqual(shipped.to_lines(), config.to_lines())

    def test_file_values_applied(self):
        path = self.write("# PINN run\nmode=pinn\nlaw=2\nj_bar=0.85\nhidden_width=20\n"
                          "settlement_times=0.2,0.4\n")
        config = load_config(path)
        self.assertEqual(config.law, 2)
        self.assertEqual(config.material_props().j_bar, 0.85)
        self.assertEqual(config.arch().hidden_width, 20)
        self.assertEqual(config.settlement_times, (0.2, 0.4))
        train_config = config.train_config()
        self.assertEqual(train_config.law, LawId.MODIFIED_SAINT_VENANT_KIRCHHOFF)
        self.assertEqual(train_config.epochs, 20000)
        self.assertEqual(train_config.plan.per_law_total, 3000)

    def test_overrides_beat_file(self):
        path = self.write("seed=3\n")
        config = load_config(path, overrides={"seed": "9"})
        self.assertEqual(config.seed, 9)

    def test_missing_file_rejected(self):
        with self.assertRaises(ConfigError):
            load_config(os.path.join(self.temp_dir.name, "absent.env"))

    def test_unknown_key_rejected(self):
        with self.assertRaises(ConfigError):
            load_config(self.write("learning_rte=0.1\n"))

    def test_invalid_values_rejected(self):
        for text in ("law=4\n", "law=two\n", "seed=1.5\n", "phi0=abc\n", "mode=ensemble\n",
                     "mode=pinn\n", "settlement_times=1.5\n", "j_bar=0.6\n", "fd_dx=0.03\n"):
            with self.assertRaises(ConfigError, msg=text):
                load_config(self.write(text))

    def test_empty_optional_keys(self):
        config = load_config(self.write("law=\nepochs=none\n"))
        self.assertIsNone(config.law)
        self.assertIsNone(config.epochs)

    def test_explicit_epochs_win(self):
        config = load_config(overrides={"epochs": "7"})
        self.assertEqual(config.epochs_for("mcnn"), 7)
        self.assertEqual(config.epochs_for("pinn", 3), 7)

    def test_fast_mode_divides_schedules(self):
        config = load_config(fast=True)
        self.assertEqual(config.mcnn_epochs, 20000)
        self.assertEqual(config.pinn_epochs_law1, 10000)
        self.assertEqual(config.pinn_epochs_law3, 2000)
        tiny = load_config(overrides={"epochs": "3"}, fast=True)
        self.assertEqual(tiny.epochs, 1)

    def test_seed_for(self):
        config = load_config()
        self.assertEqual(config.seed_for("mcnn"), 42)
        self.assertEqual(config.seed_for("pinn", 2), 44)
        self.assertEqual(config.train_config("pinn", 2, seed=44).plan.seed, 44)

    def test_fd_spec_records_settlement_times(self):
        config = load_config(overrides={"test_nt": "10", "settlement_times": "0.25,1.0"})
        spec = config.fd_spec()
        self.assertEqual(len(spec.snapshot_times), 11)
        self.assertIn(0.25, spec.snapshot_times)
        self.assertEqual(list(spec.snapshot_times), sorted(spec.snapshot_times))

    def test_resolved_lines_reload_identically(self):
        config = load_config(overrides={"law": "3", "mode": "pinn", "learning_rate": "1e-3"})
        lines = config.to_lines()
        keys = [line.split("=", 1)[0] for line in lines]
        self.assertEqual(keys, sorted(keys))
        path = self.write("\n".join(lines) + "\n")
        self.assertEqual(load_config(path), config)


class TestParseAssignments(unittest.TestCase):
    """Tests for parse_assignments."""

    def test_pairs(self):
        self.assertEqual(parse_assignments(["seed=1", " law = 2 "]), {"seed": "1", "law": "2"})
        self.assertEqual(parse_assignments(None), {})

    def test_missing_equals_rejected(self):
        with self.assertRaises(ConfigError):
            parse_assignments(["seed"])
        with self.assertRaises(ConfigError):
            parse_assignments(["=3"])


if __name__ == "__main__":
    unittest.main()
