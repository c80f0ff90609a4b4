"""
Structured logging on top of the standard library ``logging`` module.

Library modules get their logger from :func:`get_logger`; events travel
through the ``cslamgen`` stdlib logger, so nothing is printed unless an
application installs a handler (the CLI does so via :func:`configure_logging`).
"""

import logging
import sys
from typing import Any, Optional

import structlog

from .config import LoggingConfig

ROOT_LOGGER_NAME = "cslamgen"

_PROCESSORS = [
    structlog.stdlib.filter_by_level,
    structlog.stdlib.add_logger_name,
    structlog.stdlib.add_log_level,
    structlog.processors.TimeStamper(fmt="iso"),
    structlog.stdlib.ProcessorFormatter.wrap_for_formatter,
]

_handler: Optional[logging.Handler] = None


def get_logger(name: str) -> Any:
    """A structlog logger bound to the stdlib logger ``name``."""
    return structlog.wrap_logger(
        logging.getLogger(name),
        processors=_PROCESSORS,
        wrapper_class=structlog.stdlib.BoundLogger,
    )


def configure_logging(config: Optional[LoggingConfig] = None) -> None:
    """
    Render cslamgen events to stderr, filtered at the configured level.

    Calling it again replaces the previously installed handler.

    Args:
        config: Level and renderer choice; defaults come from the environment
    """
    global _handler
    config = config or LoggingConfig()
    renderer = (
        structlog.processors.JSONRenderer()
        if config.json_logs
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(
        structlog.stdlib.ProcessorFormatter(
            processors=[
                structlog.stdlib.ProcessorFormatter.remove_processors_meta,
                structlog.processors.format_exc_info,
                renderer,
            ],
        )
    )

    root = logging.getLogger(ROOT_LOGGER_NAME)
    if _handler is not None:
        root.removeHandler(_handler)
    root.addHandler(handler)
    root.setLevel(getattr(logging, config.level))
    root.propagate = False
    _handler = handler
