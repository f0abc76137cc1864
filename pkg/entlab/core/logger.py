"""Structured logging configuration."""
import json
import logging
import os
import sys
import time
from functools import wraps
from typing import Any, Callable, Dict, Optional


class JSONFormatter(logging.Formatter):
    """Render each record as a single JSON object."""

    def format(self, record: logging.LogRecord) -> str:
        log_obj: Dict[str, Any] = {
            "timestamp": self.formatTime(record),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        # Fields passed as extra={"extra": {...}}
        if hasattr(record, "extra"):
            log_obj.update(record.extra)

        if record.exc_info:
            log_obj["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_obj, default=str)


def get_logger(name: str) -> logging.Logger:
    """Get a structured logger writing to stderr.

    stdout is reserved for the tables and records the CLI prints.
    """
    logger = logging.getLogger(name)

    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(JSONFormatter())
        logger.addHandler(handler)
        logger.setLevel(os.environ.get("ENTLAB_LOG_LEVEL", "WARNING").upper())
        logger.propagate = False

    return logger


def set_level(level: str) -> None:
    """Apply a level to every entlab logger created so far and to later ones."""
    os.environ["ENTLAB_LOG_LEVEL"] = level.upper()
    for name, logger in logging.Logger.manager.loggerDict.items():
        if name.startswith("entlab") and isinstance(logger, logging.Logger):
            logger.setLevel(level.upper())


def log_audit(logger: logging.Logger, check: str, value: Any, passed: Optional[bool]) -> None:
    """Emit one audit event for a named check."""
    logger.info(
        f"Audit {check}",
        extra={"extra": {"event_type": "audit", "check": check, "value": value, "passed": passed}},
    )


def log_execution_time(logger: logging.Logger):
    """Decorator to log execution time of an operation."""
    def decorator(func: Callable):
        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                extra = {
                    "event_type": "performance",
                    "operation": func.__qualname__,
                    "duration_seconds": round(time.perf_counter() - start_time, 4),
                    "status": "error",
                    "error_type": type(e).__name__,
                }
                logger.error(f"Failed {func.__name__}: {e}", extra={"extra": extra})
                raise
            extra = {
                "event_type": "performance",
                "operation": func.__qualname__,
                "duration_seconds": round(time.perf_counter() - start_time, 4),
                "status": "success",
            }
            logger.info(f"Executed {func.__name__}", extra={"extra": extra})
            return result
        return wrapper
    return decorator
