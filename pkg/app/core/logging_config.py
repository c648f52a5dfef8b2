"""Centralized logging configuration for Herdflow."""
import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

from core.config.settings import get_settings

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'
LOG_FILE_NAME = 'herdflow.log'

# Third-party loggers that are chatty at DEBUG
QUIET_LOGGERS = ('PIL', 'matplotlib')


def setup_logging(level: Optional[str] = None, log_dir: Optional[Path] = None) -> logging.Logger:
    """
    Configure process-wide logging for a CLI run.

    Logs to:
    - Console (stdout) at `level`, else HERDFLOW_LOG_LEVEL
    - File: <log_dir>/herdflow.log (rotated at 10MB, 5 backups, DEBUG)
      only when a directory is passed or HERDFLOW_LOG_DIR is set

    Calling it again replaces the handlers, so tests and repeated
    `main()` calls do not duplicate output.
    """
    settings = get_settings()
    level_name = (level or settings.log_level).upper()
    log_dir = log_dir or settings.log_dir

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    root_logger.handlers.clear()

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(getattr(logging, level_name, logging.INFO))
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)

    if log_dir is None:
        return root_logger

    try:
        log_file = Path(log_dir) / LOG_FILE_NAME
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=5,
            encoding='utf-8'
        )
        # Per-step solver progress only ends up here
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)
        logging.info(f"Logging initialized - file: {log_file}")
    except OSError as e:
        logging.warning(f"Could not set up file logging in {log_dir}: {e}")

    return root_logger
