"""
Random graphs that are Wheeler by construction, and a brute-force matcher.

Tries, collections of labelled paths and collections of labelled cycles all
admit a Wheeler order: sort vertices co-lexicographically by the labels read
backwards from them (ties between identical path prefixes broken by
component). No recognition is needed; the order falls out of the construction.
"""
import logging

import numpy as np

from src.wheeler_index import LabeledGraph

logger = logging.getLogger(__name__)

DEFAULT_ALPHABET = ("A", "C", "G", "T")


def _ranked_graph(keys: dict, edges) -> LabeledGraph:
    """Assign ranks by sorting ``keys`` (node -> sort key) and relabel ``edges``."""
    order = sorted(keys, key=keys.get)
    rank = {node: r for r, node in enumerate(order, start=1)}
    return LabeledGraph.from_labelled_edges(
        len(order), [(rank[u], rank[v], label) for u, v, label in edges])


def random_trie(rng: np.random.Generator, num_strings: int, max_len: int,
                alphabet=DEFAULT_ALPHABET) -> LabeledGraph:
    """
    Trie of ``num_strings`` random strings of length ``1..max_len``.

    Args:
        rng (numpy.random.Generator): Source of randomness.
        num_strings (int): Strings inserted.
        max_len (int): Longest string.
        alphabet: Label strings to draw from.

    Returns:
        LabeledGraph: The trie, root at rank 1.
    """
    keys = {(): ()}
    edges = []
    for _ in range(num_strings):
        length = int(rng.integers(1, max_len + 1))
        word = tuple(alphabet[i] for i in rng.integers(0, len(alphabet), size=length))
        for depth in range(1, length + 1):
            node = word[:depth]
            if node not in keys:
                keys[node] = tuple(reversed(node))
                edges.append((node[:-1], node, node[-1]))
    return _ranked_graph(keys, edges)


def random_paths(rng: np.random.Generator, num_paths: int, max_len: int,
                 alphabet=DEFAULT_ALPHABET) -> LabeledGraph:
    """Disjoint labelled paths with ``1..max_len`` edges each."""
    keys = {}
    edges = []
    for c in range(num_paths):
        length = int(rng.integers(1, max_len + 1))
        word = tuple(alphabet[i] for i in rng.integers(0, len(alphabet), size=length))
        keys[(c, 0)] = ((), c)
        for depth in range(1, length + 1):
            keys[(c, depth)] = (tuple(reversed(word[:depth])), c)
            edges.append(((c, depth - 1), (c, depth), word[depth - 1]))
    return _ranked_graph(keys, edges)


def _canonical_rotation(word: tuple) -> tuple:
    return min(word[i:] + word[:i] for i in range(len(word)))


def _is_primitive(word: tuple) -> bool:
    return all(word[i:] + word[:i] != word for i in range(1, len(word)))


def random_cycles(rng: np.random.Generator, num_cycles: int, max_len: int,
                  alphabet=DEFAULT_ALPHABET, max_attempts: int = 1000) -> LabeledGraph:
    """
    Disjoint labelled cycles over primitive, pairwise non-conjugate words.

    Every vertex is keyed by the labels read backwards around its cycle, long
    enough that no two vertices tie.
    """
    words = []
    seen = set()
    for _ in range(max_attempts):
        if len(words) == num_cycles:
            break
        length = int(rng.integers(1, max_len + 1))
        word = tuple(alphabet[i] for i in rng.integers(0, len(alphabet), size=length))
        canonical = _canonical_rotation(word)
        if _is_primitive(word) and canonical not in seen:
            seen.add(canonical)
            words.append(word)
    horizon = 2 * max_len + 2
    keys = {}
    edges = []
    for c, word in enumerate(words):
        m = len(word)
        for v in range(m):
            # edge word[v] enters vertex (v + 1) % m
            keys[(c, v)] = tuple(word[(v - 1 - t) % m] for t in range(horizon))
            edges.append(((c, v), (c, (v + 1) % m), word[v]))
    return _ranked_graph(keys, edges)


def brute_force_match(g: LabeledGraph, pattern) -> list:
    """
    Vertices reached by some path labelled ``pattern`` (label strings), by
    following edges from every vertex.
    """
    ids = {label: i for i, label in enumerate(g.labels)}
    current = set(range(1, g.n + 1))
    for token in pattern:
        a = ids.get(token, -1)
        current = {v for u, v, label in g.edges if label == a and u in current}
    return sorted(current)
