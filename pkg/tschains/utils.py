"""
Utility functions module for tschains.

This module contains helpers for logging, time formatting and writing
result files (JSON and CSV) with full float precision.
"""

import json
import logging
import math
import os
from typing import Any

import numpy as np
import pandas as pd

SCHEMA_VERSION = "1"

# every float in an output file carries 17 significant digits
FLOAT_FORMAT = ".17g"
CSV_FLOAT_FORMAT = "%.17g"


def has_handler_of_type(logger, handler_class):
    """Check if logger already has a handler of the specified type."""
    return any(isinstance(handler, handler_class) for handler in logger.handlers)


def format_time_for_display(seconds: float) -> str:
    """
    Format time in seconds to a human-readable string with appropriate units.

    Args:
        seconds (float): Time in seconds

    Returns:
        str: Formatted time string with appropriate units
    """
    if seconds < 60:
        return f"{seconds:.2f} seconds"
    elif seconds < 3600:
        minutes = seconds / 60
        return f"{minutes:.2f} minutes ({seconds:.2f} seconds)"
    hours = seconds / 3600
    return f"{hours:.2f} hours ({seconds:.2f} seconds)"


def format_float(x: float) -> str:
    """JSON token for a float: 17 significant digits, Infinity/NaN for non-finite values."""
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = format(x, FLOAT_FORMAT)
    # keep the token a float when read back
    if all(c not in text for c in ".eE"):
        text += ".0"
    return text


class _Float(str):
    """Marker for a pre-rendered float token."""


def _prepare(obj: Any) -> Any:
    """Replace floats with markers and numpy scalars/arrays with Python values."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _Float(format_float(float(obj)))
    if isinstance(obj, np.ndarray):
        return [_prepare(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _prepare(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_prepare(v) for v in obj]
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return _prepare(obj.to_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(obj: Any) -> str:
    """
    Serialize obj with indentation 2 and 17-significant-digit floats.

    Floats are swapped for placeholder strings, dumped, and the quoted
    placeholders are then replaced by the bare tokens.
    """
    tokens = {}

    def place(value):
        if isinstance(value, _Float):
            key = f"\u0000f{len(tokens)}\u0000"
            tokens[key] = str(value)
            return key
        if isinstance(value, dict):
            return {k: place(v) for k, v in value.items()}
        if isinstance(value, list):
            return [place(v) for v in value]
        return value

    text = json.dumps(place(_prepare(obj)), indent=2, ensure_ascii=False)
    for key, token in tokens.items():
        text = text.replace(json.dumps(key), token, 1)
    return text


def with_schema(doc: dict) -> dict:
    """Copy of doc with schemaVersion as its first key."""
    out = {"schemaVersion": SCHEMA_VERSION}
    out.update((k, v) for k, v in doc.items() if k != "schemaVersion")
    return out


def write_json(path: str, doc: dict) -> None:
    ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_json(with_schema(doc)))
        fh.write("\n")
    logging.info(f"Wrote {path}")


def read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_csv(path: str, frame: pd.DataFrame) -> None:
    ensure_parent(path)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    logging.info(f"Wrote {path} ({len(frame)} rows)")


def ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
