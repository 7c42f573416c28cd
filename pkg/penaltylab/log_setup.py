"""
Logging setup for penaltylab
All status output goes to standard error through loguru
"""

import sys

from loguru import logger

LEVELS = {0: "WARNING", 1: "INFO", 2: "DEBUG"}

_current_level = "WARNING"


def configure_logging(verbosity: int = 0) -> str:
    """Route loguru to stderr at a level picked by the -v count"""
    global _current_level
    _current_level = LEVELS.get(min(max(verbosity, 0), 2), "WARNING")
    logger.remove()
    logger.add(sys.stderr, level=_current_level, format="{time:HH:mm:ss} | {level: <7} | {message}")
    return _current_level


def progress_enabled() -> bool:
    """tqdm bars are shown only when INFO lines would be shown"""
    return _current_level in ("INFO", "DEBUG")
