"""
Wheeler graphs and their pattern-matching index.

Vertices are identified by their Wheeler rank ``1..n``. The index keeps four
components: sums over the out-degrees, per-label rank over the edge labels
sorted by origin, the label counts ``C``, and search over the in-degrees.
Extending a matched pattern by one label maps a vertex interval to the
interval of its out-edges, narrows it to the edges carrying the label, and
maps those back to vertices through the in-degrees.
"""
import json
import logging
import struct
from dataclasses import dataclass, field

import numpy as np

from src.bitvector import BitVector
from src.entropy_stats import entropy_profile
from src.partial_sums import (
    InDegreeSums,
    OutDegreeSums,
    load_partial_sums,
    transform_in_degrees,
    transform_out_degrees,
)

logger = logging.getLogger(__name__)

MAGIC = b"WGI1"
_HEADER = struct.Struct("<4sQQQQ")
_COUNT = struct.Struct("<Q")


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[start, end]`` of ranks; empty when ``start > end``."""
    start: int
    end: int

    @property
    def empty(self) -> bool:
        return self.start > self.end

    def __len__(self):
        return max(0, self.end - self.start + 1)


EMPTY = Interval(1, 0)


@dataclass
class LabeledGraph:
    """
    Edge-labelled directed multigraph over Wheeler ranks.

    Attributes:
        n (int): Vertex count.
        edges (list): ``(origin, destination, label_id)`` triples, ranks 1-based.
        labels (list): Label strings by id, in lexicographic order.
    """
    n: int
    edges: list = field(default_factory=list)
    labels: list = field(default_factory=list)

    @property
    def sigma(self) -> int:
        return len(self.labels)

    @classmethod
    def from_labelled_edges(cls, n: int, edges):
        """
        Build a graph from ``(origin, destination, label_string)`` triples.

        Label strings are mapped to dense ids preserving their lexicographic order.
        """
        edges = list(edges)
        labels = sorted({label for _, _, label in edges})
        ids = {label: i for i, label in enumerate(labels)}
        return cls(n, [(u, v, ids[label]) for u, v, label in edges], labels)

    def label_of(self, label_id: int) -> str:
        return self.labels[label_id]

    def out_degrees(self) -> list:
        degrees = [0] * self.n
        for u, _, _ in self.edges:
            degrees[u - 1] += 1
        return degrees

    def in_degrees(self) -> list:
        degrees = [0] * self.n
        for _, v, _ in self.edges:
            degrees[v - 1] += 1
        return degrees


@dataclass(frozen=True)
class WheelerViolation:
    """First violated axiom, a message, and the witnessing vertices or edges."""
    axiom: int
    message: str
    witness: tuple


class WheelerViolationError(ValueError):
    def __init__(self, violation: WheelerViolation):
        super().__init__(violation.message)
        self.violation = violation


@dataclass(frozen=True)
class StepTrace:
    """Intermediate intervals of one forward step."""
    edge_out: Interval
    edge_label: Interval
    result: Interval


def _check_well_formed(g: LabeledGraph):
    if g.n < 0:
        raise ValueError(f"vertex count must be non-negative, got {g.n}")
    for u, v, a in g.edges:
        if not (1 <= u <= g.n and 1 <= v <= g.n):
            raise ValueError(f"edge ({u}, {v}) has a rank outside [1, {g.n}]")
        if not 0 <= a < g.sigma:
            raise ValueError(f"edge ({u}, {v}) has label id {a} outside [0, {g.sigma})")


def validate_wheeler(g: LabeledGraph) -> WheelerViolation | None:
    """
    Check the three Wheeler axioms under the graph's ranking.

    1. Vertices with no in-edges come first.
    2. If ``u`` has an in-edge labelled ``a``, ``v`` one labelled ``b`` and ``a < b``, then ``u < v``.
    3. If ``(u, v)`` and ``(w, x)`` carry the same label and ``u < w``, then ``v <= x``.

    Args:
        g (LabeledGraph): Graph with explicit ranks.

    Returns:
        WheelerViolation or None: The first violated axiom with its witness,
        or None when the ranking is a Wheeler order.

    Raises:
        ValueError: If a rank or label id is out of range.
    """
    _check_well_formed(g)
    name = g.label_of

    in_degrees = g.in_degrees()
    with_in = [r for r in range(1, g.n + 1) if in_degrees[r - 1]]
    if with_in:
        first = with_in[0]
        late = [r for r in range(first + 1, g.n + 1) if not in_degrees[r - 1]]
        if late:
            return WheelerViolation(
                1, f"axiom 1: vertex {late[0]} has no in-edges but comes after vertex {first}, "
                   "which has in-edges",
                (late[0], first))

    by_destination = sorted(g.edges, key=lambda e: (e[1], e[2]))
    previous = None
    for edge in by_destination:
        if previous is not None and edge[2] < previous[2]:
            u, v = previous[1], edge[1]
            return WheelerViolation(
                2, f"axiom 2: vertex {u} has in-label {name(previous[2])} but vertex {v} "
                   f"with the smaller in-label {name(edge[2])} is not before it",
                (_named(previous, name), _named(edge, name)))
        if previous is not None and edge[1] == previous[1] and edge[2] != previous[2]:
            return WheelerViolation(
                2, f"axiom 2: vertex {edge[1]} has in-labels {name(previous[2])} and {name(edge[2])}",
                (_named(previous, name), _named(edge, name)))
        previous = edge

    by_label = sorted(g.edges, key=lambda e: (e[2], e[0], e[1]))
    best = None
    group_best = None
    for i, edge in enumerate(by_label):
        if i and edge[2] != by_label[i - 1][2]:
            best = group_best = None
        elif i and edge[0] != by_label[i - 1][0]:
            if group_best is not None and (best is None or group_best[1] > best[1]):
                best = group_best
            group_best = None
        if best is not None and edge[1] < best[1]:
            return WheelerViolation(
                3, f"axiom 3: edges ({best[0]}, {best[1]}) and ({edge[0]}, {edge[1]}) are both "
                   f"labelled {name(edge[2])} but {best[0]} < {edge[0]} and {best[1]} > {edge[1]}",
                (_named(best, name), _named(edge, name)))
        if group_best is None or edge[1] > group_best[1]:
            group_best = edge
    return None


def _named(edge, name):
    return edge[0], edge[1], name(edge[2])


class WheelerIndex:
    """
    Four-component pattern-matching index of a Wheeler graph.

    Attributes:
        n (int): Vertex count.
        dout (OutDegreeSums): ``sum`` over the out-degrees.
        din (InDegreeSums): ``search`` over the in-degrees.
        labels (list): Label strings by id.
        label_sequence (numpy.ndarray): ``L``, label ids of the edges sorted by origin.
        label_bits (list): One ``BitVector`` per label id marking its positions in ``L``.
        counts (numpy.ndarray): ``C``, ``counts[a]`` labels strictly smaller than ``a``;
            ``counts[sigma] = |L|``.
    """

    def __init__(self, n, dout, din, labels, label_sequence):
        self.n = n
        self.dout = dout
        self.din = din
        self.labels = list(labels)
        self.label_ids = {label: i for i, label in enumerate(self.labels)}
        self.label_sequence = np.asarray(label_sequence, dtype=np.int64)
        self.label_bits = [BitVector(self.label_sequence == a) for a in range(len(self.labels))]
        frequencies = np.bincount(self.label_sequence, minlength=len(self.labels))
        self.counts = np.zeros(len(self.labels) + 1, dtype=np.int64)
        np.cumsum(frequencies, out=self.counts[1:])

    @property
    def sigma(self) -> int:
        return len(self.labels)

    @property
    def edge_count(self) -> int:
        return len(self.label_sequence)

    @property
    def backend(self) -> str:
        return self.dout.backend

    def symbol_id(self, token: str) -> int:
        """Dense id of a label string, or -1 when the label is not in the graph."""
        return self.label_ids.get(token, -1)

    def tokenize(self, pattern: str) -> list:
        """Split a pattern per character when every label is one character, else on whitespace."""
        if all(len(label) == 1 for label in self.labels):
            return list(pattern)
        return pattern.split()

    def label_rank(self, a: int, i: int) -> int:
        """
        Occurrences of label ``a`` among the first ``i`` entries of ``L``.

        Labels outside the alphabet occur 0 times.

        Raises:
            IndexError: If ``i`` is outside ``[0, |L|]``.
        """
        if not 0 <= i <= self.edge_count:
            raise IndexError(f"label rank position {i} outside [0, {self.edge_count}]")
        if not 0 <= a < self.sigma:
            return 0
        return self.label_bits[a].rank1(i)

    def csum(self, a: int) -> int:
        """Number of edge labels strictly smaller than ``a``."""
        if a < 0:
            return 0
        if a > self.sigma:
            return self.edge_count
        return int(self.counts[a])

    def forward_step_trace(self, interval: Interval, a: int) -> StepTrace:
        """
        Extend the pattern whose vertex interval is ``interval`` by label ``a``.

        Returns:
            StepTrace: Out-edge interval in ``L``, interval of the ``a``-edges in
            label-sorted edge order, and the resulting vertex interval. Once an
            interval is empty the later ones are empty too.
        """
        if interval.empty:
            return StepTrace(EMPTY, EMPTY, EMPTY)
        edge_out = Interval(self.dout.sum(interval.start - 1) + 1, self.dout.sum(interval.end))
        if edge_out.empty:
            return StepTrace(edge_out, EMPTY, EMPTY)
        offset = self.csum(a)
        edge_label = Interval(self.label_rank(a, edge_out.start - 1) + 1 + offset,
                              self.label_rank(a, edge_out.end) + offset)
        if edge_label.empty:
            return StepTrace(edge_out, edge_label, EMPTY)
        result = Interval(self.din.search(edge_label.start), self.din.search(edge_label.end))
        return StepTrace(edge_out, edge_label, result)

    def forward_step(self, interval: Interval, a: int) -> Interval:
        return self.forward_step_trace(interval, a).result

    def match_pattern(self, pattern) -> Interval:
        """
        Interval of the vertices reached by paths labelled ``pattern``.

        Args:
            pattern: Sequence of label strings (unknown labels give an empty
                interval) or a string, tokenized with ``tokenize``.

        Returns:
            Interval: Starting from every vertex, one forward step per label.
        """
        if isinstance(pattern, str):
            pattern = self.tokenize(pattern)
        interval = Interval(1, self.n) if self.n else EMPTY
        for token in pattern:
            interval = self.forward_step(interval, self.symbol_id(token))
            if interval.empty:
                return EMPTY
        return interval

    def space_breakdown(self) -> dict:
        """Bits per component: out-degree sums, in-degree sums, label ranks and counts."""
        label_bits = [bits.space_report() for bits in self.label_bits]
        return {
            "dout": self.dout.space_breakdown(),
            "din": self.din.space_breakdown(),
            "labels": {"payload": sum(r["payload"] for r in label_bits),
                       "index": sum(r["index"] for r in label_bits)},
            "counts": {"payload": len(self.counts) * max(1, self.edge_count.bit_length())},
        }

    def to_bytes(self) -> bytes:
        """
        Serialize as a ``WGI1`` container: header, label dictionary, ``L``,
        the in-degree leading-zero count and both partial-sums structures.
        """
        dictionary = json.dumps(self.labels).encode("utf-8")
        parts = [
            _HEADER.pack(MAGIC, self.n, self.edge_count, self.sigma, len(dictionary)),
            dictionary,
            self.label_sequence.astype("<u4").tobytes(),
            _COUNT.pack(self.din.leading_zeros),
            self.dout.inner.to_bytes(),
            self.din.inner.to_bytes(),
        ]
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes):
        """
        Load an index written by ``to_bytes``; rank and count components are rebuilt.

        Raises:
            ValueError: On a bad magic or a truncated or inconsistent container.
        """
        if len(data) < _HEADER.size:
            raise ValueError("truncated index header")
        magic, n, edges, sigma, dictionary_len = _HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise ValueError(f"bad index magic {magic!r}")
        pos = _HEADER.size
        labels = json.loads(bytes(data[pos:pos + dictionary_len]).decode("utf-8"))
        pos += dictionary_len
        sequence = np.frombuffer(data[pos:pos + 4 * edges], dtype="<u4").astype(np.int64)
        pos += 4 * edges
        if len(labels) != sigma or len(sequence) != edges or len(data) < pos + _COUNT.size:
            raise ValueError("truncated index container")
        (leading_zeros,) = _COUNT.unpack_from(data, pos)
        dout_inner, pos = load_partial_sums(data, pos + _COUNT.size)
        din_inner, pos = load_partial_sums(data, pos)
        index = cls(n, OutDegreeSums(dout_inner), InDegreeSums(din_inner, leading_zeros),
                    labels, sequence)
        if index.dout.n != n or index.din.n != n:
            raise ValueError("index degree sequences do not match the vertex count")
        return index


def build_index(g: LabeledGraph, backend: str = "mn", table_cap: int | None = None) -> WheelerIndex:
    """
    Validate ``g`` and build its index.

    Args:
        g (LabeledGraph): Graph with explicit Wheeler ranks.
        backend (str): Partial-sums backend for both degree sequences.
        table_cap (int, optional): Universal-table key cap for the entropy backend.

    Returns:
        WheelerIndex: The index.

    Raises:
        WheelerViolationError: If the ranking is not a Wheeler order.
    """
    violation = validate_wheeler(g)
    if violation is not None:
        logger.error(f"Rejected graph: {violation.message}")
        raise WheelerViolationError(violation)
    order = sorted(range(len(g.edges)), key=lambda e: g.edges[e][0])
    label_sequence = [g.edges[e][2] for e in order]
    dout = transform_out_degrees(g.out_degrees(), backend, table_cap=table_cap)
    din = transform_in_degrees(g.in_degrees(), backend, table_cap=table_cap)
    index = WheelerIndex(g.n, dout, din, g.labels, label_sequence)
    logger.info(f"Built {backend} Wheeler index: {g.n} vertices, {len(g.edges)} edges, "
                f"{g.sigma} labels.")
    return index


def graph_stats(g: LabeledGraph, max_k: int = 3) -> dict:
    """
    Sizes, maximum degrees and degree-sequence entropies of a graph.

    Returns:
        dict: ``n``, ``edges``, ``delta_in``, ``delta_out``, ``delta`` and the
        lists ``h_out`` / ``h_in`` of ``H_0 .. H_max_k``.
    """
    out_degrees = g.out_degrees()
    in_degrees = g.in_degrees()
    delta_out = max(out_degrees, default=0)
    delta_in = max(in_degrees, default=0)
    return {
        "n": g.n,
        "edges": len(g.edges),
        "delta_out": delta_out,
        "delta_in": delta_in,
        "delta": max(delta_out, delta_in),
        "h_out": entropy_profile(out_degrees, max_k),
        "h_in": entropy_profile(in_degrees, max_k),
    }


def index_stats(index: WheelerIndex, max_k: int = 3) -> dict:
    """``graph_stats`` equivalent computed from a loaded index's degree sequences."""
    out_degrees = index.dout.decode()
    in_degrees = index.din.decode()
    delta_out = max(out_degrees, default=0)
    delta_in = max(in_degrees, default=0)
    return {
        "n": index.n,
        "edges": index.edge_count,
        "delta_out": delta_out,
        "delta_in": delta_in,
        "delta": max(delta_out, delta_in),
        "h_out": entropy_profile(out_degrees, max_k),
        "h_in": entropy_profile(in_degrees, max_k),
    }
