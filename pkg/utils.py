"""
Utility functions for the crowd monitor
"""

import logging
from pathlib import Path
from typing import Any, List, Optional, Sequence

from belief import MassFunction


def setup_logging(log_level: str = "INFO", log_file: Optional[str] = None) -> logging.Logger:
    """
    Setup logging configuration

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
        log_file: Optional path to a log file

    Returns:
        Configured logger
    """
    log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    date_format = "%Y-%m-%d %H:%M:%S"
    formatter = logging.Formatter(log_format, date_format)

    # stdout is kept for result tables
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))

    logger = logging.getLogger()
    logger.setLevel(getattr(logging, log_level.upper(), logging.INFO))
    # repeated calls replace our own handlers only
    for handler in list(logger.handlers):
        if getattr(handler, "_crowd_monitor", False):
            logger.removeHandler(handler)
            handler.close()
    for handler in handlers:
        handler.setFormatter(formatter)
        handler._crowd_monitor = True
        logger.addHandler(handler)

    return logger


def format_number(value: Any, digits: int = 3) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)


def format_table(headers: Sequence[str], rows: Sequence[Sequence[Any]], max_rows: int = 50) -> str:
    """
    Format rows as an aligned plain-text table

    Args:
        headers: Column titles
        rows: Row values; floats are shown with 3 decimals
        max_rows: Maximum rows to show

    Returns:
        Formatted string
    """
    if not rows:
        return "(no rows)"

    cells = [[format_number(v) for v in row] for row in rows[:max_rows]]
    widths = [
        max(len(str(h)), *(len(r[i]) for r in cells)) for i, h in enumerate(headers)
    ]
    lines = [
        "  ".join(str(h).ljust(w) for h, w in zip(headers, widths)),
        "  ".join("-" * w for w in widths),
    ]
    for row in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))

    if len(rows) > max_rows:
        lines.append(f"... and {len(rows) - max_rows} more")

    return "\n".join(lines)


def format_mass(m: MassFunction, digits: int = 3) -> str:
    """
    Compact text form of a mass function, e.g. "{a}:0.400 {a,b}:0.300 Ω:0.300"
    """
    parts = []
    for labels, value in m.items_by_label():
        if len(labels) == m.frame.size:
            name = "Ω"
        else:
            name = "{" + ",".join(labels) + "}"
        parts.append(f"{name}:{value:.{digits}f}")
    return " ".join(parts)


def log_run(command: str, success: bool = True, detail: str = ""):
    """
    Log the outcome of a command-line run

    Args:
        command: Subcommand executed
        success: Whether it succeeded
        detail: Extra context
    """
    logger = logging.getLogger(__name__)
    status = "SUCCESS" if success else "FAILED"
    logger.info(f"[{status}] {command}{': ' + detail if detail else ''}")
