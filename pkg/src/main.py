import logging
import sys

logger = logging.getLogger(__name__)


def main(config, out=None):
    """
    Run the command named by ``config.command``.

    Args:
        config (RunConfig): Validated configuration.
        out: Text stream for command output; defaults to ``sys.stdout``.

    Returns:
        int: The command's exit status.

    Raises:
        ValueError: If the command is unknown.
    """
    from src.cli import cmd_bench, cmd_build, cmd_query, cmd_stats
    commands = {
        "build": cmd_build,
        "query": cmd_query,
        "stats": cmd_stats,
        "bench": cmd_bench,
    }
    command = commands.get(config.command)
    if command is None:
        raise ValueError(f"unknown command {config.command!r}")
    logger.info(f"Running '{config.command}' with backend {config.backend}.")
    return command(config, out or sys.stdout)
