import os
import unittest
from unittest.mock import mock_open, patch

from src import config_loader
from src.config_loader import BenchGrid, load_config, parse_grid
from src.fv_store import TABLE_CAP_ENV


class TestParseGrid(unittest.TestCase):

    def test_full_spec(self):
        grid = parse_grid("n=14:20:2;sigma=4,16;dist=uniform,skewed;backend=entropy")
        self.assertEqual(grid.lg_n, (14, 16, 18, 20))
        self.assertEqual(grid.sigmas, (4, 16))
        self.assertEqual(grid.dists, ("uniform", "skewed"))
        self.assertEqual(grid.backends, ("entropy",))

    def test_defaults_and_unit_step(self):
        grid = parse_grid("n=3:5")
        self.assertEqual(grid.lg_n, (3, 4, 5))
        self.assertEqual(grid.sigmas, BenchGrid().sigmas)

    def test_empty_n_yields_no_cells(self):
        self.assertEqual(list(parse_grid("n=;sigma=4").cells()), [])

    def test_cell_order(self):
        grid = parse_grid("n=2:3;sigma=4;dist=uniform;backend=mn,chain")
        self.assertEqual(list(grid.cells()), [
            (2, 4, "uniform", "mn"), (3, 4, "uniform", "mn"),
            (2, 4, "uniform", "chain"), (3, 4, "uniform", "chain"),
        ])

    def test_rejections(self):
        for spec in ("n=1", "n=a:b", "m=1:2", "sigma=1", "dist=zipf", "backend=fenwick", "n"):
            with self.subTest(spec=spec):
                with self.assertRaises(ValueError):
                    parse_grid(spec)


@patch("src.config_loader.os.path.exists", return_value=False)
class TestLoadConfig(unittest.TestCase):
    """
    Unit tests for load_config.

    The defaults file is reported missing unless a test mocks one, so the
    working directory never leaks into the results.
    """

    def test_build(self, mock_exists):
        config = load_config(["build", "-i", "g.graph", "-o", "g.wgi", "--backend", "entropy"])
        self.assertEqual(config.command, "build")
        self.assertEqual((config.input_path, config.output_path), ("g.graph", "g.wgi"))
        self.assertEqual(config.backend, "entropy")
        self.assertEqual(config.log_level, "WARNING")
        self.assertEqual(config.config_path, "")

    def test_query_patterns(self, mock_exists):
        config = load_config(["--json", "query", "-i", "g.wgi", "-p", "CG", "-p", "A",
                              "--patterns", "p.txt"])
        self.assertEqual(config.patterns, ["CG", "A"])
        self.assertEqual(config.patterns_file, "p.txt")
        self.assertTrue(config.json_output)

    def test_stats_k(self, mock_exists):
        self.assertEqual(load_config(["stats", "-i", "s.txt", "-k", "2"]).k, 2)
        self.assertEqual(load_config(["stats", "-i", "s.txt"]).k, config_loader.DEFAULTS["k"])

    def test_bench(self, mock_exists):
        config = load_config(["--log-level", "info", "bench", "--grid", "n=4:6;backend=mn",
                              "--seed", "7", "--queries", "10"])
        self.assertEqual(config.grid.lg_n, (4, 5, 6))
        self.assertEqual((config.seed, config.queries, config.log_level), (7, 10, "INFO"))

    def test_negative_k(self, mock_exists):
        with self.assertRaises(ValueError):
            load_config(["stats", "-i", "s.txt", "-k", "-1"])

    def test_unknown_backend_flag_exits(self, mock_exists):
        with self.assertRaises(SystemExit):
            load_config(["build", "-i", "g", "-o", "o", "--backend", "fenwick"])

    @patch.dict(os.environ, {TABLE_CAP_ENV: "12"})
    def test_table_cap_from_environment(self, mock_exists):
        self.assertEqual(load_config(["stats", "-i", "s.txt"]).table_cap, 12)
        self.assertEqual(load_config(["--table-cap", "8", "stats", "-i", "s.txt"]).table_cap, 8)

    @patch.dict(os.environ, {TABLE_CAP_ENV: "zero"})
    def test_invalid_environment_cap(self, mock_exists):
        with self.assertRaises(ValueError):
            load_config(["stats", "-i", "s.txt"])

    def test_missing_explicit_config(self, mock_exists):
        with self.assertRaises(FileNotFoundError):
            load_config(["--config", "nope.json", "stats", "-i", "s.txt"])


class TestConfigFile(unittest.TestCase):

    @patch("src.config_loader.open", new_callable=mock_open,
           read_data='{"backend": "chain", "seed": 5, "grid": "n=2:2"}')
    @patch("src.config_loader.os.path.exists", return_value=True)
    def test_file_defaults_under_flags(self, mock_exists, mock_file):
        config = load_config(["bench", "--seed", "9"])
        mock_file.assert_called_with(config_loader.DEFAULT_CONFIG_NAME, "r", encoding="utf-8")
        self.assertEqual(config.backend, "chain")
        self.assertEqual(config.seed, 9)
        self.assertEqual(config.grid.lg_n, (2,))
        self.assertEqual(config.config_path, config_loader.DEFAULT_CONFIG_NAME)

    @patch("src.config_loader.logger")
    @patch("src.config_loader.open", new_callable=mock_open, read_data="{not json")
    @patch("src.config_loader.os.path.exists", return_value=True)
    def test_corrupted_file_is_ignored(self, mock_exists, mock_file, mock_logger):
        config = load_config(["--config", "bad.json", "stats", "-i", "s.txt"])
        self.assertEqual(config.backend, config_loader.DEFAULTS["backend"])
        self.assertEqual(config.config_path, "")
        mock_logger.warning.assert_called_once()

    @patch("src.config_loader.logger")
    @patch("src.config_loader.open", new_callable=mock_open, read_data='{"colour": "blue", "k": 1}')
    @patch("src.config_loader.os.path.exists", return_value=True)
    def test_unknown_keys_warned(self, mock_exists, mock_file, mock_logger):
        config = load_config(["stats", "-i", "s.txt"])
        self.assertEqual(config.k, 1)
        mock_logger.warning.assert_called_once()

    @patch("src.config_loader.open", new_callable=mock_open, read_data='{"backend": "fenwick"}')
    @patch("src.config_loader.os.path.exists", return_value=True)
    def test_invalid_file_value(self, mock_exists, mock_file):
        with self.assertRaises(ValueError):
            load_config(["stats", "-i", "s.txt"])


if __name__ == "__main__":
    unittest.main()
