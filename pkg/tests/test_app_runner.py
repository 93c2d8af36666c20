"""
Unit tests for the wheeler-sums application runner.

Covers configuration loading, the mapping from library errors to exit codes,
and full runs of the command line against temporary files.
"""
import io
import os
import tempfile
import unittest
from contextlib import redirect_stdout
from unittest import mock

from src import app_runner
from src.config_loader import RunConfig
from src.file_utils import GraphParseError, IndexFormatError
from src.wheeler_index import WheelerViolation, WheelerViolationError

FIXTURE = os.path.join(os.path.dirname(__file__), "data", "debruijn_k3.graph")


class TestExitCodes(unittest.TestCase):
    """
    Test suite for start_app's error handling.

    ``main`` is mocked to raise each error kind; the logger is mocked to check
    every failure is reported before the code is returned.
    """

    def run_with(self, error):
        with mock.patch("src.app_runner.main", side_effect=error), \
                mock.patch("src.app_runner.logger") as mock_logger:
            code = app_runner.start_app(RunConfig("build", input_path="g.graph"))
        mock_logger.error.assert_called_once()
        return code, mock_logger

    def test_parse_error(self):
        code, _ = self.run_with(GraphParseError(3, "expected 'u v label'"))
        self.assertEqual(code, 2)

    def test_wheeler_violation_reports_witness(self):
        violation = WheelerViolation(2, "axiom 2: out of order", ((1, 2, "A"), (3, 4, "C")))
        code, mock_logger = self.run_with(WheelerViolationError(violation))
        self.assertEqual(code, 3)
        message = mock_logger.error.call_args[0][0]
        self.assertIn("axiom 2", message)
        self.assertIn("(1, 2, 'A')", message)

    def test_bad_index(self):
        self.assertEqual(self.run_with(IndexFormatError("bad index magic"))[0], 4)
        self.assertEqual(self.run_with(FileNotFoundError("g.wgi"))[0], 4)

    def test_other_value_error(self):
        self.assertEqual(self.run_with(ValueError("S[2] = 0 is not positive"))[0], 1)

    @mock.patch("src.app_runner.main", return_value=0)
    def test_success(self, mock_main):
        self.assertEqual(app_runner.start_app(RunConfig("stats")), 0)

    def test_exit_code_for(self):
        self.assertEqual(app_runner.exit_code_for(GraphParseError(1, "x")), 2)
        self.assertEqual(app_runner.exit_code_for(KeyError("x")), 1)


class TestGetConfig(unittest.TestCase):

    @mock.patch("src.app_runner.load_config")
    @mock.patch("src.app_runner.logger")
    def test_config_file_not_found(self, mock_logger, mock_load_config):
        """A missing config file is logged and re-raised."""
        mock_load_config.side_effect = FileNotFoundError("file missing")
        with self.assertRaises(FileNotFoundError):
            app_runner.get_config(["stats", "-i", "x"])
        mock_logger.error.assert_called_once_with("Config file not found: file missing")

    @mock.patch("src.app_runner.load_config")
    @mock.patch("src.app_runner.logger")
    def test_invalid_value(self, mock_logger, mock_load_config):
        mock_load_config.side_effect = ValueError("unknown backend")
        with self.assertRaises(ValueError):
            app_runner.get_config([])
        mock_logger.error.assert_called_once()

    @mock.patch("src.app_runner.load_config", side_effect=ValueError("bad grid"))
    def test_run_exits_on_bad_config(self, mock_load_config):
        with self.assertRaises(SystemExit) as ctx:
            app_runner.run(["bench"])
        self.assertEqual(ctx.exception.code, 1)


@mock.patch("src.config_loader.os.path.exists", return_value=False)
class TestRun(unittest.TestCase):
    """End-to-end runs through argument parsing, logging setup and dispatch."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def run_cli(self, argv):
        out = io.StringIO()
        with mock.patch("src.app_runner.setup_logging"), redirect_stdout(out):
            with self.assertRaises(SystemExit) as ctx:
                app_runner.run(argv)
        return ctx.exception.code, out.getvalue()

    def test_build_then_query(self, mock_exists):
        index = os.path.join(self.tmp.name, "debruijn.wgi")
        code, _ = self.run_cli(["build", "-i", FIXTURE, "-o", index, "--backend", "chain"])
        self.assertEqual(code, 0)
        code, text = self.run_cli(["query", "-i", index, "-p", "CG", "-p", "AA"])
        self.assertEqual(code, 0)
        self.assertEqual(text, "CG\t7\t8\nAA\t-\n")

    def test_parse_failure_exit_code(self, mock_exists):
        bad = os.path.join(self.tmp.name, "bad.graph")
        with open(bad, "w") as f:
            f.write("n 3\n1 2\n")
        code, _ = self.run_cli(["build", "-i", bad, "-o", os.path.join(self.tmp.name, "x")])
        self.assertEqual(code, 2)

    def test_non_wheeler_exit_code(self, mock_exists):
        bad = os.path.join(self.tmp.name, "bad.graph")
        with open(bad, "w") as f:
            f.write("n 4\n1 4 a\n2 3 a\n")
        code, _ = self.run_cli(["build", "-i", bad, "-o", os.path.join(self.tmp.name, "x")])
        self.assertEqual(code, 3)

    def test_missing_index_exit_code(self, mock_exists):
        code, _ = self.run_cli(["query", "-i", os.path.join(self.tmp.name, "none.wgi"), "-p", "A"])
        self.assertEqual(code, 4)

    def test_alphabet_too_large_for_entropy_tables(self, mock_exists):
        """A star with out-degree 5000 needs a search table over the cap: exit 1, not a crash."""
        star = os.path.join(self.tmp.name, "star.graph")
        with open(star, "w") as f:
            f.write("n 5001\n" + "".join(f"1 {v} a\n" for v in range(2, 5002)))
        code, _ = self.run_cli(["build", "-i", star, "-o", os.path.join(self.tmp.name, "x"),
                                "--backend", "entropy"])
        self.assertEqual(code, 1)


class TestSetupLogging(unittest.TestCase):

    @mock.patch("src.app_runner.logging.basicConfig")
    def test_level_and_stream(self, mock_basic):
        app_runner.setup_logging("INFO")
        kwargs = mock_basic.call_args.kwargs
        self.assertEqual(kwargs["level"], 20)
        self.assertIs(kwargs["stream"], app_runner.sys.stderr)


if __name__ == "__main__":
    unittest.main()
