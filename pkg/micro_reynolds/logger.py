import json
from datetime import datetime, timedelta, timezone

import numpy as np
from pydantic import BaseModel


class Logger:
    """Logger baseline"""

    def __init__(
        self,
        path: str | None,
        verbose: bool = True,
        _timezone: int | timezone = 0,
        _verbose_method: callable = print,
    ):
        """Initialize the logger.
        Args:
            path: path to the log file, terminal only if None.
            verbose: whether print to the terminal or not.
        """
        self.path = path
        self.verbose = verbose
        if isinstance(_timezone, int):
            _timezone = timezone(timedelta(hours=_timezone))
        self._timezone = _timezone
        self._verbose_method = _verbose_method

    def log(self, msg: str):
        """Write the log into the file and verbose to the terminal if verbose option is on.
        Args:
            msg: a log message.
        """
        timestamp = datetime.now(self._timezone).strftime("%Y.%m.%dT%H:%M:%S")
        msg = f"[{timestamp}] {msg}"
        if self.path is not None:
            with open(self.path, "a") as f:
                f.write(msg + "\n")
        if self.verbose:
            self._verbose_method(msg)


def _jsonable(obj):
    # numpy scalars and arrays are not json-serializable as-is
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"object of type {type(obj).__name__} is not json serializable")


class ReportLogger(Logger):
    """Logger for the structured pipeline events."""

    def __init__(
        self,
        path: str | None = "micro-reynolds.log",
        verbose: bool = True,
    ):
        """Initialize the logger.
        Args:
            path: a path to the log file.
            verbose: whether print to the terminal or not.
        """
        super().__init__(path, verbose)

    def log(self, msg):
        """Log the json-serializable object.
        Args:
            msg: a json serializable object, e.g. pydantic model, dictionary or plain string.
        """
        if isinstance(msg, str):
            return super().log(msg)
        if isinstance(msg, BaseModel):
            msg = msg.model_dump(mode="json")
        super().log(json.dumps(msg, ensure_ascii=False, default=_jsonable))

