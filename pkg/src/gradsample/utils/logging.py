# -*- coding: utf-8 -*-


import logging
from typing import Union

_MAX_HIER_LEVEL = 2
_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def get_logger(module: str) -> logging.Logger:
    parts = module.split(".")
    name = module
    if len(parts) > _MAX_HIER_LEVEL:
        name = ".".join(parts[:_MAX_HIER_LEVEL])
    return logging.getLogger(name)


def setup_logging(level: Union[int, str] = logging.INFO) -> None:
    """
    Attach a single stream handler to the package root logger.

    Calling it again only updates the level, so the CLI and tests can both
    invoke it without duplicating output.
    """
    root = logging.getLogger("gradsample")
    if isinstance(level, str):
        level = level.upper()
    root.setLevel(level)
    if not any(getattr(handler, "_gradsample", False) for handler in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_LOG_FORMAT))
        handler._gradsample = True  # type: ignore[attr-defined]
        root.addHandler(handler)
