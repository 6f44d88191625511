"""
Time series representation and pairwise window distances.

This module handles:
- Loading a univariate series from plain-text or CSV input
- Rolling per-window mean / standard deviation
- The two distance modes (z-normalized and raw Euclidean)

All window indices are 0-based. The source literature numbers windows from 1.
"""

import io
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import pandas as pd


ZNORM = "znorm"
RAW = "raw"
MODES = (ZNORM, RAW)

# sigma below this marks a flat window
DEGENERATE_TOL = 1e-12


class SeriesParseError(ValueError):
    """Raised when a series source cannot be parsed."""


class SeriesTooShortError(ValueError):
    """Raised when a series has too few samples for the requested window."""


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """An ordered list of finite samples."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64).ravel()
        if arr.size < 1:
            raise ValueError("a time series needs at least one sample")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise ValueError(f"non-finite sample at index {bad}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n

    def window(self, i: int, l: int) -> np.ndarray:
        return self.values[i:i + l]


@dataclass(frozen=True)
class WindowSpec:
    """
    Window length, distance mode and exclusion radius.

    Two windows i, j are comparable only when |i - j| >= exclusion.
    The default exclusion ceil(l/2) rejects pairs that overlap by more
    than half a window.
    """

    l: int
    mode: str = ZNORM
    exclusion: Optional[int] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown distance mode '{self.mode}' (expected one of {MODES})")
        if self.mode == RAW and self.l < 1:
            raise ValueError("raw mode needs a window length of at least 1")
        if self.mode == ZNORM and self.l < 3:
            raise ValueError("znorm mode needs a window length of at least 3")
        if self.exclusion is None:
            object.__setattr__(self, "exclusion", int(math.ceil(self.l / 2)))
        if self.exclusion < 1:
            raise ValueError("exclusion radius must be at least 1")

    def windows(self, T: TimeSeries) -> int:
        """Number of admissible window starts w = n - l + 1."""
        return T.n - self.l + 1

    def check(self, T: TimeSeries) -> int:
        w = self.windows(T)
        if w < 2:
            raise SeriesTooShortError(
                f"series too short: n={T.n} gives {max(w, 0)} windows of length {self.l}, need 2"
            )
        return w


@dataclass(frozen=True, eq=False)
class WindowStats:
    """
    Per-window mean and population standard deviation.

    centred_mu holds the window means of the series shifted by centre (the
    series mean). Dot products for z-normalized distances are taken in that
    shifted frame, so a large constant offset does not cancel catastrophically.
    """

    mu: np.ndarray
    sigma: np.ndarray
    degenerate: np.ndarray = field(repr=False)
    centre: float = 0.0
    centred_mu: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.centred_mu is None:
            centred_mu = np.asarray(self.mu, dtype=np.float64) - self.centre
            centred_mu.setflags(write=False)
            object.__setattr__(self, "centred_mu", centred_mu)


# --------------------------------------------------------------------------- #
# Loading
# --------------------------------------------------------------------------- #
def _decode(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        line = data[:e.start].count(b"\n") + 1
        raise SeriesParseError(f"line {line}: invalid UTF-8 byte 0x{data[e.start]:02x}") from e


def _read_text(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        return _decode(bytes(source))
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return _decode(fh.read())
    data = source.read()
    return _decode(data) if isinstance(data, bytes) else data


def _parse_tokens(tokens: pd.Series, first_line: int) -> np.ndarray:
    """Convert string tokens to floats; tokens index is the 0-based data row."""
    stripped = tokens.str.strip()
    present = stripped.notna() & (stripped != "")
    stripped = stripped[present]
    if stripped.empty:
        raise SeriesParseError("empty input: no values found")

    values = pd.to_numeric(stripped, errors="coerce")
    finite = np.isfinite(values.to_numpy(dtype=np.float64))
    if not finite.all():
        row = stripped.index[int(np.flatnonzero(~finite)[0])]
        token = stripped.loc[row]
        raise SeriesParseError(f"line {row + first_line}: invalid value '{token}'")
    return values.to_numpy(dtype=np.float64)


def load_series(
    source: Union[str, os.PathLike, bytes, io.IOBase],
    fmt: str = "plain",
    column: Union[str, int, None] = None,
) -> TimeSeries:
    """
    Load a series from a path, bytes or an open stream.

    Args:
        source: file path, raw bytes, or a readable text/byte stream.
        fmt (str): "plain" (one value per line, optional "value" header) or
            "csv" (header row, one designated column).
        column: csv column name or 0-based position (default: first column).

    Returns:
        TimeSeries: the parsed samples in file order.
    """
    text = _read_text(source)
    if not text.strip():
        raise SeriesParseError("empty input: no values found")

    if fmt == "plain":
        lines = pd.Series(text.splitlines(), dtype=object)
        first = lines.iloc[0].strip() if len(lines) else ""
        if first.lower() == "value":
            lines = lines.iloc[1:]
        multi = lines.str.strip().str.contains(r"[,\s]", regex=True)
        if multi.any():
            row = int(multi[multi].index[0])
            raise SeriesParseError(f"line {row + 1}: expected one value per line")
        values = _parse_tokens(lines, first_line=1)
    elif fmt == "csv":
        try:
            frame = pd.read_csv(io.StringIO(text), dtype=str, skip_blank_lines=False)
        except pd.errors.ParserError as e:
            raise SeriesParseError(f"malformed csv: {e}") from e
        if column is None:
            column = 0
        if isinstance(column, int):
            if column >= frame.shape[1]:
                raise SeriesParseError(f"column {column} not present (found {frame.shape[1]})")
            tokens = frame.iloc[:, column]
        else:
            if column not in frame.columns:
                raise SeriesParseError(f"column '{column}' not present")
            tokens = frame[column]
        # row k of the frame sits on line k + 2 (line 1 is the header)
        values = _parse_tokens(tokens.reset_index(drop=True), first_line=2)
    else:
        raise ValueError(f"unknown series format '{fmt}' (expected plain or csv)")

    logging.info(f"Loaded series with {values.size} samples")
    return TimeSeries(values)


# --------------------------------------------------------------------------- #
# Window statistics and distances
# --------------------------------------------------------------------------- #
def sliding_windows(T: Union[TimeSeries, np.ndarray], l: int) -> np.ndarray:
    """Read-only (w, l) view of every window of a series or a sample array."""
    values = T.values if isinstance(T, TimeSeries) else np.asarray(T, dtype=np.float64)
    return np.lib.stride_tricks.sliding_window_view(values, l)


def centred_values(T: TimeSeries, stats: WindowStats) -> np.ndarray:
    """Samples minus stats.centre, the frame z-normalized dot products use."""
    values = T.values - stats.centre
    values.setflags(write=False)
    return values


def rolling_stats(T: TimeSeries, l: int) -> WindowStats:
    """
    Per-window mean and population standard deviation.

    Two-pass per window on a strided view of the series minus its mean, so
    each sigma is computed from centred values rather than from the
    sum-of-squares identity.
    """
    if l < 1:
        raise ValueError("window length must be at least 1")
    if l > T.n:
        raise SeriesTooShortError(f"series too short: n={T.n} < window length {l}")

    centre = float(T.values.mean())
    windows = sliding_windows(T.values - centre, l)
    centred_mu = windows.mean(axis=1)
    sigma = np.sqrt(((windows - centred_mu[:, None]) ** 2).mean(axis=1))
    mu = centred_mu + centre
    degenerate = sigma < DEGENERATE_TOL
    for arr in (mu, centred_mu, sigma, degenerate):
        arr.setflags(write=False)
    return WindowStats(mu=mu, sigma=sigma, degenerate=degenerate, centre=centre, centred_mu=centred_mu)


def znorm_from_dot(qt, l: int, mu_i, sig_i, mu_j, sig_j):
    """
    z-normalized distance sqrt(2l(1 - r)) from a window dot product.

    r = (QT - l*mu_i*mu_j) / (l*sig_i*sig_j). QT and the means must come from
    the same frame (see WindowStats.centred_mu). Negative round-off in the
    squared distance is clamped to 0. Works elementwise on arrays.
    """
    r = (qt - l * (mu_i * mu_j)) / (l * (sig_i * sig_j))
    return np.sqrt(np.maximum(2.0 * l * (1.0 - r), 0.0))


def pair_distance(
    T: TimeSeries,
    i: int,
    j: int,
    spec: WindowSpec,
    stats: Optional[WindowStats] = None,
) -> float:
    """
    Distance between windows i and j under the window spec's mode.

    Returns +inf in znorm mode when either window is flat.
    """
    w = spec.windows(T)
    for idx in (i, j):
        if not 0 <= idx < w:
            raise IndexError(f"window start {idx} out of range [0, {w})")

    a = T.window(i, spec.l)
    b = T.window(j, spec.l)
    if spec.mode == RAW:
        return float(np.sqrt(np.sum((a - b) ** 2)))

    if stats is None:
        stats = rolling_stats(T, spec.l)
    if stats.degenerate[i] or stats.degenerate[j]:
        return math.inf
    qt = float(np.dot(a - stats.centre, b - stats.centre))
    cmu = stats.centred_mu
    return float(znorm_from_dot(qt, spec.l, cmu[i], stats.sigma[i], cmu[j], stats.sigma[j]))


def znormalize(window: np.ndarray) -> np.ndarray:
    """Zero-mean, unit-variance copy of a window; flat windows map to zeros."""
    window = np.asarray(window, dtype=np.float64)
    sigma = window.std()
    if sigma < DEGENERATE_TOL:
        return np.zeros_like(window)
    return (window - window.mean()) / sigma


def window_vector(T: TimeSeries, i: int, spec: WindowSpec) -> np.ndarray:
    """A window as a point in l-dimensional space, in the window spec's geometry."""
    vec = T.window(i, spec.l)
    return znormalize(vec) if spec.mode == ZNORM else np.array(vec, dtype=np.float64)


def pearson_from_distance(d: float, l: int) -> float:
    """Pearson correlation of two windows from their z-normalized distance."""
    return 1.0 - d * d / (2.0 * l)
