"""
Root logger setup shared by the CLI and the demo entry point
"""
import logging
import os
from typing import Optional

from config.settings import LOG_DIR, LOG_FILE, LOG_LEVEL


def setup_logging(level: Optional[str] = None, log_dir: Optional[str] = None) -> None:
    """
    Configure file + console logging once per process.

    Args:
        level: Level name overriding LOG_LEVEL
        log_dir: Directory for the log file overriding LOG_DIR
    """
    directory = log_dir or LOG_DIR
    os.makedirs(directory, exist_ok=True)
    logging.basicConfig(
        level=getattr(logging, (level or LOG_LEVEL).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(os.path.join(directory, LOG_FILE)),
            logging.StreamHandler()
        ]
    )
