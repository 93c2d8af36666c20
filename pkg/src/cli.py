"""
The four commands: build, query, stats and bench.

Each command takes a ``RunConfig`` and a text stream, writes TSV (or JSON with
``--json``) to the stream and returns 0. Failures propagate as exceptions;
``app_runner`` turns them into exit codes.
"""
import json
import logging
import statistics
import sys
import time
from functools import partial

import numpy as np

from src.config_loader import DISTRIBUTIONS
from src.entropy_stats import entropy_profile, sequence_stats
from src.file_utils import (is_index_file, load_graph, load_index, read_patterns,
                            read_sequence, save_index)
from src.graph_gen import random_trie
from src.partial_sums import (BACKENDS, build_partial_sums, transform_in_degrees,
                              transform_out_degrees)
from src.wheeler_index import build_index, graph_stats, index_stats

logger = logging.getLogger(__name__)

BENCH_COLUMNS = ("n", "sigma", "dist", "backend", "build_ms", "sum_ns", "search_ns",
                 "payload_bpe", "index_bpe", "tables_bpe")
ORACLE_CHECKS = 16


def _format(value):
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def emit_records(records, config, out):
    """Write ``(key, value)`` pairs as ``key<TAB>value`` lines, or one JSON object."""
    if config.json_output:
        json.dump({key: value for key, value in records}, out, indent=2)
        out.write("\n")
        return
    for key, value in records:
        out.write(f"{key}\t{_format(value)}\n")


def stats_records(stats):
    """Flatten ``graph_stats`` / ``index_stats`` output into ordered records."""
    records = [(key, stats[key]) for key in ("n", "edges", "delta_out", "delta_in", "delta")]
    records += [(f"h{k}_out", h) for k, h in enumerate(stats["h_out"])]
    records += [(f"h{k}_in", h) for k, h in enumerate(stats["h_in"])]
    return records


def _flatten(prefix, breakdown):
    records = []
    for key, value in breakdown.items():
        name = f"{prefix}.{key}"
        if isinstance(value, dict):
            records += _flatten(name, value)
        else:
            records.append((name, value))
    return records


def cmd_build(config, out=sys.stdout):
    """Parse, validate, index and save a graph; report its stats and space per component."""
    graph = load_graph(config.input_path)
    index = build_index(graph, backend=config.backend, table_cap=config.table_cap)
    written = save_index(config.output_path, index)
    records = stats_records(graph_stats(graph, config.k))
    records.append(("backend", config.backend))
    records.append(("index_bytes", written))
    records += _flatten("bits", index.space_breakdown())
    emit_records(records, config, out)
    return 0


def query_rows(index, patterns):
    """
    Match every pattern.

    Returns:
        list: ``(pattern, start, end)`` triples; ``start`` and ``end`` are None
        for an empty result.
    """
    rows = []
    for pattern in patterns:
        interval = index.match_pattern(pattern)
        if interval.empty:
            rows.append((pattern, None, None))
        else:
            rows.append((pattern, interval.start, interval.end))
    return rows


def format_query_rows(rows):
    lines = []
    for pattern, start, end in rows:
        if start is None:
            lines.append(f"{pattern}\t-")
        else:
            lines.append(f"{pattern}\t{start}\t{end}")
    return "".join(line + "\n" for line in lines)


def cmd_query(config, out=sys.stdout):
    """Answer patterns from ``-p`` flags, then from the patterns file, one TSV line each."""
    index = load_index(config.input_path)
    patterns = list(config.patterns)
    if config.patterns_file:
        patterns += read_patterns(config.patterns_file)
    rows = query_rows(index, patterns)
    if config.json_output:
        json.dump([{"pattern": p, "start": s, "end": e} for p, s, e in rows], out, indent=2)
        out.write("\n")
    else:
        out.write(format_query_rows(rows))
    return 0


def _bpe_records(prefix, build, n):
    """
    Bits per element of the structure returned by ``build()``, or a single
    ``{prefix}.skipped`` record when that backend rejects the input.
    """
    try:
        structure = build()
    except ValueError as e:
        logger.warning(f"Skipping {prefix}: {e}")
        return [(f"{prefix}.skipped", str(e))]
    return [(f"{prefix}.{key}_bpe", bits / n) for key, bits in structure.space_breakdown().items()]


def sequence_report(values, k, table_cap=None):
    """
    Entropy profile of ``values`` and bits per element of every backend over it.

    Sequences with zeros are measured through the out-degree transform.
    """
    summary = sequence_stats(values)
    records = [("n", summary.n), ("sigma", summary.sigma), ("total", summary.total)]
    records += [(f"h{order}", h) for order, h in enumerate(entropy_profile(values, k))]
    if not values:
        return records
    shifted = min(values) == 0
    records.append(("transform", "out" if shifted else "none"))
    for backend in BACKENDS:
        if shifted:
            build = partial(transform_out_degrees, values, backend, table_cap=table_cap)
        else:
            build = partial(build_partial_sums, values, backend, table_cap=table_cap)
        records += _bpe_records(backend, build, summary.n)
    return records


def index_report(index, k, table_cap=None):
    """Stats of a loaded index plus bits per vertex of every backend over both degree sequences."""
    records = stats_records(index_stats(index, k))
    if index.n == 0:
        return records
    dout = index.dout.decode()
    din = index.din.decode()
    for backend in BACKENDS:
        records += _bpe_records(f"{backend}.dout", partial(transform_out_degrees, dout, backend, table_cap), index.n)
        records += _bpe_records(f"{backend}.din", partial(transform_in_degrees, din, backend, table_cap), index.n)
    return records


def cmd_stats(config, out=sys.stdout):
    """Entropy and space report of an index file or an integer sequence file."""
    if is_index_file(config.input_path):
        records = index_report(load_index(config.input_path), config.k, config.table_cap)
    else:
        records = sequence_report(read_sequence(config.input_path), config.k, config.table_cap)
    emit_records(records, config, out)
    return 0


def generate_values(rng, n, sigma, dist):
    """
    Positive bench values below ``sigma``.

    ``uniform`` draws from ``[1, sigma)``; ``skewed`` is 1 with probability 0.9
    and uniform over ``[2, sigma)`` otherwise; ``trie`` is the incremented
    out-degree sequence of a random trie over ``max(1, sigma - 2)`` labels,
    repeated to length ``n`` and capped at ``sigma - 1``.
    """
    if dist == "uniform":
        return rng.integers(1, sigma, size=n)
    if dist == "skewed":
        values = np.ones(n, dtype=np.int64)
        if sigma > 2:
            rare = rng.random(n) < 0.1
            values[rare] = rng.integers(2, sigma, size=int(rare.sum()))
        return values
    if dist == "trie":
        alphabet = tuple(str(a) for a in range(max(1, sigma - 2)))
        trie = random_trie(rng, max(1, n // 4), 16, alphabet)
        degrees = np.asarray(trie.out_degrees(), dtype=np.int64) + 1
        return np.minimum(np.resize(degrees, n), sigma - 1)
    raise ValueError(f"unknown distribution {dist!r}; expected one of {', '.join(DISTRIBUTIONS)}")


def _median_ns(function, arguments):
    """Median latency of single calls ``function(x)`` over ``arguments``, in nanoseconds."""
    timings = []
    for x in np.asarray(arguments).tolist():
        start = time.perf_counter_ns()
        function(x)
        timings.append(time.perf_counter_ns() - start)
    return float(statistics.median(timings)) if timings else 0.0


def _check_against_prefix(structure, values, rng):
    prefix = np.concatenate(([0], np.cumsum(values)))
    for i in rng.integers(0, len(values) + 1, size=ORACLE_CHECKS).tolist():
        if structure.sum(i) != int(prefix[i]):
            raise ValueError(f"{structure.backend} sum({i}) disagrees with the prefix sums")
        j = int(prefix[i])
        if j and structure.search(j) != i:
            raise ValueError(f"{structure.backend} search({j}) disagrees with the prefix sums")


def bench_cell(lg_n, sigma, dist, backend, seed, queries, table_cap=None):
    """
    Build and time one grid cell.

    The data depends on ``(seed, lg_n, sigma, dist)`` only, so every backend
    in a row group sees the same sequence.

    Returns:
        dict: One value per ``BENCH_COLUMNS`` entry.
    """
    data_rng = np.random.default_rng([seed, lg_n, sigma, DISTRIBUTIONS.index(dist)])
    n = 1 << lg_n
    values = generate_values(data_rng, n, sigma, dist)

    start = time.perf_counter_ns()
    structure = build_partial_sums(values, backend, sigma=sigma, table_cap=table_cap)
    build_ms = (time.perf_counter_ns() - start) / 1e6

    query_rng = np.random.default_rng([seed, lg_n, sigma, DISTRIBUTIONS.index(dist), 1])
    _check_against_prefix(structure, values, query_rng)
    sum_ns = _median_ns(structure.sum, query_rng.integers(1, n + 1, size=queries))
    search_ns = _median_ns(structure.search, query_rng.integers(1, structure.total + 1, size=queries))

    breakdown = structure.space_breakdown()
    tables = breakdown.get("tables", 0)
    index = sum(bits for key, bits in breakdown.items() if key not in ("payload", "tables"))
    logger.info(f"Bench cell n=2^{lg_n} sigma={sigma} dist={dist} backend={backend}: "
                f"build {build_ms:.1f} ms.")
    return {
        "n": n, "sigma": sigma, "dist": dist, "backend": backend,
        "build_ms": build_ms, "sum_ns": sum_ns, "search_ns": search_ns,
        "payload_bpe": breakdown["payload"] / n, "index_bpe": index / n, "tables_bpe": tables / n,
    }


def flatness(rows):
    """
    Max/min ratio of the median sum and search times across ``n``, per
    ``(sigma, dist, backend)`` group in first-seen order.
    """
    groups = {}
    for row in rows:
        groups.setdefault((row["sigma"], row["dist"], row["backend"]), []).append(row)
    summary = []
    for (sigma, dist, backend), members in groups.items():
        ratios = {}
        for column in ("sum_ns", "search_ns"):
            times = [m[column] for m in members]
            ratios[column] = max(times) / min(times) if min(times) > 0 else 0.0
        summary.append({"sigma": sigma, "dist": dist, "backend": backend,
                        "sum": ratios["sum_ns"], "search": ratios["search_ns"]})
    return summary


def _bench_value(column, value):
    if column in ("build_ms", "sum_ns", "search_ns"):
        return f"{value:.1f}"
    if column.endswith("_bpe"):
        return f"{value:.4f}"
    return str(value)


def cmd_bench(config, out=sys.stdout):
    """Run every grid cell in grid order; write the matrix then the flatness summary."""
    rows = [bench_cell(lg, sigma, dist, backend, config.seed, config.queries, config.table_cap)
            for lg, sigma, dist, backend in config.grid.cells()]
    summary = flatness(rows)
    if config.json_output:
        json.dump({"rows": rows, "flatness": summary}, out, indent=2)
        out.write("\n")
        return 0
    out.write("\t".join(BENCH_COLUMNS) + "\n")
    for row in rows:
        out.write("\t".join(_bench_value(c, row[c]) for c in BENCH_COLUMNS) + "\n")
    for group in summary:
        out.write(f"#flatness\tsigma={group['sigma']}\tdist={group['dist']}\t"
                  f"backend={group['backend']}\tsum={group['sum']:.2f}\tsearch={group['search']:.2f}\n")
    return 0
