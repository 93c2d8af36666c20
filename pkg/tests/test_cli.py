"""
Tests for the four commands, run against temporary files with their output
captured in a StringIO.
"""
import io
import json
import os
import tempfile
import unittest
from unittest.mock import patch

import numpy as np

from src import cli
from src.config_loader import RunConfig, parse_grid
from src.file_utils import load_graph, load_index, save_index, write_graph
from src.graph_gen import random_cycles, random_paths, random_trie
from src.wheeler_index import LabeledGraph, WheelerViolationError, build_index

FIXTURE = os.path.join(os.path.dirname(__file__), "data", "debruijn_k3.graph")


def records(text):
    return dict(line.split("\t", 1) for line in text.splitlines())


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def run_command(self, cmd_fn, **fields):
        out = io.StringIO()
        status = cmd_fn(RunConfig(**fields), out)
        self.assertEqual(status, 0)
        return out.getvalue()


class TestBuildAndQuery(CliTestCase):

    def test_build_reports_graph_and_space(self):
        text = self.run_command(cli.cmd_build, command="build", input_path=FIXTURE,
                                output_path=self.path("debruijn.wgi"), backend="entropy")
        report = records(text)
        self.assertEqual(report["n"], "11")
        self.assertEqual(report["edges"], "12")
        self.assertEqual((report["delta_out"], report["delta_in"]), ("2", "2"))
        self.assertEqual(report["backend"], "entropy")
        self.assertIn("bits.dout.tables", report)
        self.assertEqual(int(report["index_bytes"]), os.path.getsize(self.path("debruijn.wgi")))

    def test_build_rejects_non_wheeler_order(self):
        g = load_graph(FIXTURE)
        edges = [({2: 9, 9: 2}.get(u, u), {2: 9, 9: 2}.get(v, v), g.label_of(a)) for u, v, a in g.edges]
        write_graph(self.path("bad.graph"), LabeledGraph.from_labelled_edges(11, edges))
        with self.assertRaises(WheelerViolationError):
            cli.cmd_build(RunConfig("build", input_path=self.path("bad.graph"),
                                    output_path=self.path("bad.wgi")), io.StringIO())
        self.assertFalse(os.path.exists(self.path("bad.wgi")))

    def test_empty_graph_builds(self):
        with open(self.path("empty.graph"), "w") as f:
            f.write("n 0\n")
        self.run_command(cli.cmd_build, command="build", input_path=self.path("empty.graph"),
                         output_path=self.path("empty.wgi"))
        self.assertEqual(load_index(self.path("empty.wgi")).n, 0)

    def test_query_tsv(self):
        save_index(self.path("debruijn.wgi"), build_index(load_graph(FIXTURE)))
        with open(self.path("patterns.txt"), "w") as f:
            f.write("GAC\nTT\n")
        text = self.run_command(cli.cmd_query, command="query", input_path=self.path("debruijn.wgi"),
                                patterns=["CG", "ZZ", ""], patterns_file=self.path("patterns.txt"))
        self.assertEqual(text, "CG\t7\t8\nZZ\t-\n\t1\t11\nGAC\t4\t4\nTT\t-\n")

    def test_query_json(self):
        save_index(self.path("debruijn.wgi"), build_index(load_graph(FIXTURE)))
        text = self.run_command(cli.cmd_query, command="query", input_path=self.path("debruijn.wgi"),
                                patterns=["CG", "AA"], json_output=True)
        self.assertEqual(json.loads(text), [{"pattern": "CG", "start": 7, "end": 8},
                                            {"pattern": "AA", "start": None, "end": None}])

    def test_reloaded_index_answers_byte_identically(self):
        """Query output from a saved and reloaded index equals the in-memory index's."""
        rng = np.random.default_rng(17)
        graphs = [load_graph(FIXTURE)]
        for i in range(10):
            maker = (random_trie, random_paths, random_cycles)[i % 3]
            graphs.append(maker(rng, 6, 5, ("A", "C", "G")))
        patterns = ["", "A", "C", "G", "T", "AC", "CA", "GG", "ACG", "CGT", "GAC", "AAA"]
        for i, g in enumerate(graphs):
            backend = ("mn", "entropy", "chain")[i % 3]
            index = build_index(g, backend=backend)
            path = self.path(f"g{i}.wgi")
            save_index(path, index)
            fresh = cli.format_query_rows(cli.query_rows(index, patterns))
            reloaded = cli.format_query_rows(cli.query_rows(load_index(path), patterns))
            self.assertEqual(reloaded, fresh)


class TestStats(CliTestCase):

    def test_index_input(self):
        save_index(self.path("debruijn.wgi"), build_index(load_graph(FIXTURE)))
        report = records(self.run_command(cli.cmd_stats, command="stats",
                                          input_path=self.path("debruijn.wgi"), k=2))
        self.assertEqual(report["n"], "11")
        self.assertIn("h2_out", report)
        self.assertNotIn("h3_out", report)
        for backend in ("mn", "entropy", "chain"):
            self.assertIn(f"{backend}.dout.payload_bpe", report)
            self.assertIn(f"{backend}.din.payload_bpe", report)
        self.assertIn("entropy.dout.search_index_bpe", report)

    def test_sequence_input(self):
        with open(self.path("seq.txt"), "w") as f:
            f.write("1 2 1 2 1 2 1 2\n")
        report = records(self.run_command(cli.cmd_stats, command="stats",
                                          input_path=self.path("seq.txt"), k=1))
        self.assertEqual(report["n"], "8")
        self.assertEqual(report["h0"], "1.000000")
        self.assertEqual(report["h1"], "0.000000")
        self.assertEqual(report["transform"], "none")
        self.assertEqual(report["mn.payload_bpe"], "1.500000")

    def test_sequence_with_zeros_uses_out_transform(self):
        with open(self.path("seq.txt"), "w") as f:
            f.write("0 1 0 2\n")
        report = records(self.run_command(cli.cmd_stats, command="stats",
                                          input_path=self.path("seq.txt")))
        self.assertEqual(report["transform"], "out")
        self.assertEqual(report["mn.payload_bpe"], "1.750000")

    def test_json_wrapping(self):
        with open(self.path("seq.txt"), "w") as f:
            f.write("3 1 2\n")
        text = self.run_command(cli.cmd_stats, command="stats", input_path=self.path("seq.txt"),
                                json_output=True)
        self.assertEqual(json.loads(text)["total"], 6)

    def test_backend_over_the_table_cap_is_skipped(self):
        star = LabeledGraph.from_labelled_edges(5001, [(1, v, "a") for v in range(2, 5002)])
        save_index(self.path("star.wgi"), build_index(star, backend="mn"))
        with self.assertLogs("src.cli", level="WARNING"):
            report = records(self.run_command(cli.cmd_stats, command="stats",
                                              input_path=self.path("star.wgi"), k=1))
        self.assertIn("search table", report["entropy.dout.skipped"])
        self.assertNotIn("entropy.dout.payload_bpe", report)
        self.assertIn("entropy.din.payload_bpe", report)
        self.assertIn("mn.dout.payload_bpe", report)


class TestBench(CliTestCase):

    def bench(self, spec, **fields):
        return self.run_command(cli.cmd_bench, command="bench", grid=parse_grid(spec),
                                queries=40, **fields)

    def test_matrix_and_flatness(self):
        text = self.bench("n=6:7;sigma=4;dist=uniform,skewed,trie;backend=mn,entropy,chain", seed=3)
        lines = text.splitlines()
        self.assertEqual(lines[0].split("\t"), list(cli.BENCH_COLUMNS))
        rows = [line.split("\t") for line in lines[1:] if not line.startswith("#")]
        flat = [line for line in lines if line.startswith("#flatness")]
        self.assertEqual(len(rows), 18)
        self.assertEqual(len(flat), 9)
        self.assertEqual(rows[0][:4], ["64", "4", "uniform", "mn"])
        self.assertEqual(rows[1][:4], ["128", "4", "uniform", "mn"])

    def test_non_timing_columns_repeat_under_a_seed(self):
        def stable(text):
            keep = [i for i, c in enumerate(cli.BENCH_COLUMNS) if not c.endswith(("_ms", "_ns"))]
            return [[line.split("\t")[i] for i in keep]
                    for line in text.splitlines()[1:] if not line.startswith("#")]

        spec = "n=5:6;sigma=4,8;dist=skewed;backend=entropy,chain"
        self.assertEqual(stable(self.bench(spec, seed=11)), stable(self.bench(spec, seed=11)))

    def test_empty_grid_prints_header_only(self):
        self.assertEqual(self.bench("n=;sigma=4"), "\t".join(cli.BENCH_COLUMNS) + "\n")

    def test_json(self):
        text = self.bench("n=5:5;sigma=4;dist=uniform;backend=mn", json_output=True)
        data = json.loads(text)
        self.assertEqual(len(data["rows"]), 1)
        self.assertEqual(data["flatness"][0]["backend"], "mn")

    def test_generated_values_stay_in_alphabet(self):
        rng = np.random.default_rng(0)
        for dist in ("uniform", "skewed", "trie"):
            for sigma in (2, 3, 16):
                values = cli.generate_values(rng, 300, sigma, dist)
                self.assertEqual(len(values), 300)
                self.assertGreaterEqual(int(values.min()), 1)
                self.assertLess(int(values.max()), sigma)

    def test_skewed_is_mostly_ones(self):
        values = cli.generate_values(np.random.default_rng(1), 10_000, 4, "skewed")
        self.assertGreater(float(np.mean(values == 1)), 0.85)

    @patch("src.cli.time.perf_counter_ns", side_effect=[0, 10, 100, 130, 200, 300])
    def test_median_of_single_call_latencies(self, mock_clock):
        calls = []
        self.assertEqual(cli._median_ns(calls.append, [5, 6, 7]), 30.0)
        self.assertEqual(calls, [5, 6, 7])

    def test_flatness_ratio(self):
        rows = [
            {"sigma": 4, "dist": "uniform", "backend": "mn", "sum_ns": 100.0, "search_ns": 50.0},
            {"sigma": 4, "dist": "uniform", "backend": "mn", "sum_ns": 150.0, "search_ns": 50.0},
        ]
        self.assertEqual(cli.flatness(rows), [{"sigma": 4, "dist": "uniform", "backend": "mn",
                                               "sum": 1.5, "search": 1.0}])


if __name__ == "__main__":
    unittest.main()
