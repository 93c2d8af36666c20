"""
Entry point for the wheeler-sums command line.

Loads the configuration, sets up logging on stderr and runs the requested
command, turning the library's errors into process exit codes.
"""
import logging
import sys

from src.config_loader import load_config
from src.file_utils import GraphParseError, IndexFormatError
from src.main import main
from src.wheeler_index import WheelerViolationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARSE = 2
EXIT_NOT_WHEELER = 3
EXIT_BAD_INDEX = 4


def setup_logging(level):
    """Send log records at ``level`` and above to stderr; stdout carries command output only."""
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def get_config(argv=None):
    """
    Load and return the run configuration.

    Raises:
        FileNotFoundError: If an explicit config file is missing.
        ValueError: If a configured value is invalid.
    """
    try:
        return load_config(argv)
    except FileNotFoundError as e:
        logger.error(f"Config file not found: {e}")
        raise
    except ValueError as e:
        logger.error(f"Invalid configuration: {e}")
        raise


def exit_code_for(error):
    """Map an exception raised by a command to its exit status."""
    if isinstance(error, GraphParseError):
        return EXIT_PARSE
    if isinstance(error, WheelerViolationError):
        return EXIT_NOT_WHEELER
    if isinstance(error, (IndexFormatError, FileNotFoundError)):
        return EXIT_BAD_INDEX
    return EXIT_INVALID


def start_app(config, out=None):
    """
    Run ``config``'s command and return its exit status.

    Parse errors, Wheeler violations, unreadable indexes and invalid values are
    logged and mapped to exit codes 2, 3, 4 and 1.
    """
    try:
        return main(config, out)
    except WheelerViolationError as e:
        v = e.violation
        logger.error(f"Not a Wheeler order (axiom {v.axiom}): {v.message}; witness {v.witness}")
        return EXIT_NOT_WHEELER
    except GraphParseError as e:
        logger.error(f"Cannot parse graph '{config.input_path}': {e}")
        return EXIT_PARSE
    except (IndexFormatError, FileNotFoundError) as e:
        logger.error(f"Cannot read input: {e}")
        return EXIT_BAD_INDEX
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INVALID


def run(argv=None):
    """
    Run the command line and exit with the command's status.

    Configuration errors exit with status 4 for a missing config file and 1
    otherwise.
    """
    try:
        config = get_config(argv)
    except (FileNotFoundError, ValueError) as e:
        sys.exit(exit_code_for(e))
    setup_logging(config.log_level)
    sys.exit(start_app(config))
