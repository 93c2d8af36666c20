import logging
import os

from src.wheeler_index import MAGIC as INDEX_MAGIC
from src.wheeler_index import LabeledGraph, WheelerIndex

logger = logging.getLogger(__name__)


class GraphParseError(ValueError):
    """A graph file line that does not parse; ``line_number`` is 1-based."""

    def __init__(self, line_number, message):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class IndexFormatError(ValueError):
    """An index file with a bad magic or a truncated container."""


def parse_graph_text(text):
    """
    Parse the graph text format.

    One edge per line as ``u v label`` with 1-based Wheeler ranks, after a
    header line ``n <count>``. Blank lines and lines starting with ``#`` are
    skipped.

    Args:
        text (str): File contents.

    Returns:
        LabeledGraph: The parsed graph.

    Raises:
        GraphParseError: On the first malformed line, naming its line number.
    """
    n = None
    edges = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split()
        if n is None:
            if len(fields) != 2 or fields[0] != "n":
                raise GraphParseError(line_number, f"expected header 'n <count>', got {stripped!r}")
            try:
                n = int(fields[1])
            except ValueError:
                raise GraphParseError(line_number, f"vertex count {fields[1]!r} is not an integer") from None
            if n < 0:
                raise GraphParseError(line_number, "vertex count must be non-negative")
            continue
        if len(fields) != 3:
            raise GraphParseError(line_number, f"expected 'u v label', got {stripped!r}")
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            raise GraphParseError(line_number, f"ranks must be integers, got {fields[0]!r} {fields[1]!r}") from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphParseError(line_number, f"rank outside [1, {n}] in edge ({u}, {v})")
        edges.append((u, v, fields[2]))
    if n is None:
        raise GraphParseError(max(1, len(text.splitlines())), "missing header 'n <count>'")
    return LabeledGraph.from_labelled_edges(n, edges)


def load_graph(path):
    """Read and parse a graph file; see ``parse_graph_text``."""
    with open(path, "r", encoding="utf-8") as f:
        graph = parse_graph_text(f.read())
    logger.info(f"Loaded graph '{path}': {graph.n} vertices, {len(graph.edges)} edges.")
    return graph


def write_graph(path, graph):
    """Write ``graph`` in the text format ``parse_graph_text`` reads."""
    lines = [f"n {graph.n}"]
    lines.extend(f"{u} {v} {graph.label_of(a)}" for u, v, a in graph.edges)
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def read_sequence(path):
    """
    Read whitespace-separated non-negative integers.

    Raises:
        ValueError: On a token that is not a non-negative integer, naming its line.
    """
    values = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if line.lstrip().startswith("#"):
                continue
            for token in line.split():
                try:
                    value = int(token)
                except ValueError:
                    raise ValueError(f"line {line_number}: {token!r} is not an integer") from None
                if value < 0:
                    raise ValueError(f"line {line_number}: {value} is negative")
                values.append(value)
    return values


def read_patterns(path):
    """Return one pattern per line; an empty line is the empty pattern."""
    with open(path, "r", encoding="utf-8") as f:
        return f.read().splitlines()


def is_index_file(path):
    """True when ``path`` starts with the index container magic."""
    if not os.path.isfile(path):
        return False
    with open(path, "rb") as f:
        return f.read(len(INDEX_MAGIC)) == INDEX_MAGIC


def save_index(path, index):
    """
    Serialize ``index`` to ``path``.

    Args:
        path (str): Destination file.
        index (WheelerIndex): Index to write.

    Returns:
        int: Bytes written.
    """
    data = index.to_bytes()
    with open(path, "wb") as f:
        f.write(data)
    logger.info(f"Index saved to '{path}' ({len(data)} bytes).")
    return len(data)


def load_index(path):
    """
    Load an index written by ``save_index``.

    Raises:
        FileNotFoundError: If ``path`` does not exist.
        IndexFormatError: If the file is not a valid index container.
    """
    with open(path, "rb") as f:
        data = f.read()
    try:
        index = WheelerIndex.from_bytes(data)
    except ValueError as e:
        logger.error(f"Error reading index '{path}': {e}")
        raise IndexFormatError(str(e)) from e
    logger.info(f"Loaded index '{path}': {index.n} vertices, {index.edge_count} edges.")
    return index
