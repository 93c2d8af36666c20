import unittest

import numpy as np

from src.graph_gen import brute_force_match, random_cycles, random_paths, random_trie
from src.wheeler_index import LabeledGraph, validate_wheeler


class TestGenerators(unittest.TestCase):
    """Every generated graph satisfies the Wheeler axioms under its ranking."""

    def test_tries(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            g = random_trie(rng, 15, 8)
            self.assertIsNone(validate_wheeler(g))
            self.assertEqual(len(g.edges), g.n - 1)
            self.assertEqual(g.in_degrees()[0], 0)
            self.assertLessEqual(max(g.out_degrees()), 4)

    def test_paths(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            g = random_paths(rng, 5, 6, alphabet=("a", "b"))
            self.assertIsNone(validate_wheeler(g))
            self.assertEqual(g.n - len(g.edges), 5)
            self.assertEqual(g.in_degrees()[:5], [0] * 5)

    def test_cycles(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            g = random_cycles(rng, 3, 6, alphabet=("a", "b", "c"))
            self.assertIsNone(validate_wheeler(g))
            self.assertEqual(len(g.edges), g.n)
            self.assertEqual(set(g.in_degrees()), {1})

    def test_seeded_generation_repeats(self):
        first = random_trie(np.random.default_rng(5), 10, 5)
        second = random_trie(np.random.default_rng(5), 10, 5)
        self.assertEqual(first, second)


class TestBruteForceMatch(unittest.TestCase):

    def setUp(self):
        self.g = LabeledGraph.from_labelled_edges(
            4, [(1, 2, "a"), (1, 3, "b"), (2, 4, "b"), (3, 4, "b")])

    def test_follows_labelled_paths(self):
        self.assertEqual(brute_force_match(self.g, []), [1, 2, 3, 4])
        self.assertEqual(brute_force_match(self.g, ["a"]), [2])
        self.assertEqual(brute_force_match(self.g, ["b"]), [3, 4])
        self.assertEqual(brute_force_match(self.g, ["a", "b"]), [4])

    def test_unknown_label(self):
        self.assertEqual(brute_force_match(self.g, ["z"]), [])


if __name__ == "__main__":
    unittest.main()
