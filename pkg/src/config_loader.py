import argparse
import json
import logging
import os
from dataclasses import dataclass, field

from src.fv_store import resolve_table_cap
from src.partial_sums import BACKENDS

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_NAME = "wheeler_sums.json"
COMMANDS = ("build", "query", "stats", "bench")
DISTRIBUTIONS = ("uniform", "skewed", "trie")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

DEFAULTS = {
    "backend": "mn",
    "k": 3,
    "seed": 0,
    "queries": 2000,
    "log_level": "WARNING",
    "grid": "n=10:14:2;sigma=4;dist=uniform,skewed;backend=mn,entropy,chain",
}


@dataclass(frozen=True)
class BenchGrid:
    """
    Benchmark cells: every combination of the listed values, in listed order.

    Attributes:
        lg_n (tuple): Exponents; each cell uses ``n = 2 ** lg_n`` elements.
        sigmas (tuple): Alphabet bounds.
        dists (tuple): Value distributions, from ``DISTRIBUTIONS``.
        backends (tuple): Partial-sums backends.
    """
    lg_n: tuple = ()
    sigmas: tuple = (4,)
    dists: tuple = ("uniform",)
    backends: tuple = BACKENDS

    def cells(self):
        for sigma in self.sigmas:
            for dist in self.dists:
                for backend in self.backends:
                    for lg in self.lg_n:
                        yield lg, sigma, dist, backend


@dataclass
class RunConfig:
    command: str
    input_path: str = ""
    output_path: str = ""
    backend: str = DEFAULTS["backend"]
    k: int = DEFAULTS["k"]
    grid: BenchGrid = field(default_factory=BenchGrid)
    seed: int = DEFAULTS["seed"]
    patterns: list = field(default_factory=list)
    patterns_file: str = ""
    json_output: bool = False
    queries: int = DEFAULTS["queries"]
    table_cap: int | None = None
    log_level: str = DEFAULTS["log_level"]
    config_path: str = ""


def _int_list(key, raw):
    try:
        return tuple(int(x) for x in raw.split(",") if x.strip())
    except ValueError:
        raise ValueError(f"grid field '{key}' must list integers, got {raw!r}") from None


def _name_list(key, raw, allowed):
    names = tuple(x.strip() for x in raw.split(",") if x.strip())
    unknown = [x for x in names if x not in allowed]
    if unknown:
        raise ValueError(f"grid field '{key}' has unknown value(s) {', '.join(unknown)}; "
                         f"expected {', '.join(allowed)}")
    return names


def parse_grid(spec):
    """
    Parse ``n=<lo>:<hi>[:<step>];sigma=<a,b>;dist=<...>;backend=<...>``.

    ``n`` bounds are inclusive lg n exponents; ``n=`` with no value yields no
    cells. Omitted fields keep the ``BenchGrid`` defaults.

    Raises:
        ValueError: On an unknown field, a malformed range or an unknown name.
    """
    fields = {}
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        key, sep, value = part.partition("=")
        key = key.strip()
        if not sep or key not in ("n", "sigma", "dist", "backend"):
            raise ValueError(f"bad grid field {part!r}")
        fields[key] = value.strip()

    grid = {}
    if "n" in fields:
        raw = fields["n"]
        if raw:
            bounds = raw.split(":")
            if len(bounds) not in (2, 3):
                raise ValueError(f"grid field 'n' must be <lo>:<hi>[:<step>], got {raw!r}")
            try:
                lo, hi, step = int(bounds[0]), int(bounds[1]), int(bounds[2]) if len(bounds) == 3 else 1
            except ValueError:
                raise ValueError(f"grid field 'n' must hold integers, got {raw!r}") from None
            if step < 1 or lo < 1 or hi > 40:
                raise ValueError(f"grid field 'n' out of range: {raw!r}")
            grid["lg_n"] = tuple(range(lo, hi + 1, step))
        else:
            grid["lg_n"] = ()
    if "sigma" in fields:
        sigmas = _int_list("sigma", fields["sigma"])
        if any(s < 2 for s in sigmas):
            raise ValueError("grid sigma values must be at least 2")
        grid["sigmas"] = sigmas
    if "dist" in fields:
        grid["dists"] = _name_list("dist", fields["dist"], DISTRIBUTIONS)
    if "backend" in fields:
        grid["backends"] = _name_list("backend", fields["backend"], BACKENDS)
    return BenchGrid(**grid)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wheeler-sums",
        description="Searchable partial sums and Wheeler graph pattern matching")
    parser.add_argument("--config", help=f"JSON defaults file (default: ./{DEFAULT_CONFIG_NAME} if present)")
    parser.add_argument("--json", action="store_true", dest="json_output",
                        help="Wrap output records in JSON instead of TSV")
    parser.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, help="Logging level on stderr")
    parser.add_argument("--table-cap", type=int, help="Universal table key cap in bits")
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build", help="Build an index from a graph file")
    build.add_argument("-i", "--input", dest="input_path", required=True, help="Graph file")
    build.add_argument("-o", "--output", dest="output_path", required=True, help="Index file to write")
    build.add_argument("--backend", choices=BACKENDS, help="Partial sums backend")

    query = sub.add_parser("query", help="Match patterns against an index")
    query.add_argument("-i", "--input", dest="input_path", required=True, help="Index file")
    query.add_argument("-p", "--pattern", dest="patterns", action="append", default=[],
                       help="Pattern to match (repeatable)")
    query.add_argument("--patterns", dest="patterns_file", help="File with one pattern per line")

    stats = sub.add_parser("stats", help="Entropy and space report")
    stats.add_argument("-i", "--input", dest="input_path", required=True, help="Index or integer sequence file")
    stats.add_argument("-k", type=int, help="Highest entropy order reported")

    bench = sub.add_parser("bench", help="Run the benchmark matrix")
    bench.add_argument("--grid", help="Grid spec, e.g. 'n=14:20:2;sigma=4;dist=skewed;backend=entropy'")
    bench.add_argument("--seed", type=int, help="Random seed")
    bench.add_argument("--queries", type=int, help="Timed queries per cell")
    return parser


def read_defaults(config_path=None):
    """
    Load JSON defaults layered under the command line.

    Returns:
        tuple: ``(defaults dict, path used or "")``. A corrupted or unreadable
        file is logged as a warning and yields the built-in defaults.
    """
    defaults = dict(DEFAULTS)
    path = config_path or DEFAULT_CONFIG_NAME
    if not os.path.exists(path):
        if config_path:
            raise FileNotFoundError(f"Config file '{config_path}' does not exist.")
        return defaults, ""
    with open(path, "r", encoding="utf-8") as f:
        try:
            loaded = json.load(f)
        except json.JSONDecodeError as e:
            logger.warning(f"Ignoring corrupted config '{path}': {e}")
            return defaults, ""
    if not isinstance(loaded, dict):
        logger.warning(f"Ignoring config '{path}': expected a JSON object.")
        return defaults, ""
    unknown = sorted(set(loaded) - set(DEFAULTS) - {"table_cap"})
    if unknown:
        logger.warning(f"Ignoring unknown config keys in '{path}': {', '.join(unknown)}")
    defaults.update({k: v for k, v in loaded.items() if k not in unknown})
    return defaults, path


def load_config(argv=None):
    """
    Build the run configuration.

    Command-line flags override the JSON defaults file, which overrides the
    built-in defaults. The table cap falls back to ``WHEELER_SUMS_TABLE_CAP``.

    Args:
        argv (list, optional): Arguments without the program name; defaults to ``sys.argv[1:]``.

    Returns:
        RunConfig: The validated configuration.

    Raises:
        ValueError: On an invalid value in any layer.
        FileNotFoundError: If an explicit ``--config`` file is missing.
    """
    args = build_parser().parse_args(argv)
    defaults, config_path = read_defaults(args.config)

    def pick(name):
        value = getattr(args, name, None)
        return defaults.get(name) if value is None else value

    backend = pick("backend")
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {', '.join(BACKENDS)}")
    k = int(pick("k"))
    if k < 0:
        raise ValueError(f"entropy order k must be non-negative, got {k}")
    queries = int(pick("queries"))
    if queries < 1:
        raise ValueError(f"bench queries must be positive, got {queries}")
    log_level = str(pick("log_level")).upper()
    if log_level not in LOG_LEVELS:
        raise ValueError(f"unknown log level {log_level!r}")
    cap = pick("table_cap")
    table_cap = resolve_table_cap(None if cap is None else int(cap))

    return RunConfig(
        command=args.command,
        input_path=getattr(args, "input_path", "") or "",
        output_path=getattr(args, "output_path", "") or "",
        backend=backend,
        k=k,
        grid=parse_grid(pick("grid")) if args.command == "bench" else BenchGrid(),
        seed=int(pick("seed")),
        patterns=list(getattr(args, "patterns", []) or []),
        patterns_file=getattr(args, "patterns_file", "") or "",
        json_output=bool(args.json_output),
        queries=queries,
        table_cap=table_cap,
        log_level=log_level,
        config_path=config_path,
    )
