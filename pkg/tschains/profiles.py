"""
Left/right matrix profiles and incremental nearest neighbor sets (INNS).

All three are produced from a single pass over distance rows. In znorm mode
each row is derived from the previous one with the sliding dot-product
recurrence; a direct row is recomputed at the start of every ROW_BLOCK rows
so the result does not depend on how blocks are spread over workers.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from .series import (
    RAW,
    SeriesTooShortError,
    TimeSeries,
    WindowSpec,
    WindowStats,
    centred_values,
    rolling_stats,
    sliding_windows,
    znorm_from_dot,
)
from .utils import format_time_for_display


ROW_BLOCK = 256
DEFAULT_MAX_INNS_TOTAL = None  # unlimited

NO_NEIGHBOR = -1


class InnsCapExceeded(ValueError):
    """Raised when the total INNS size passes the configured cap."""


@dataclass(frozen=True, eq=False)
class DistanceRow:
    index: int
    distances: np.ndarray


@dataclass(frozen=True, eq=False)
class ProfileSet:
    """
    Per-window left/right nearest neighbors plus the INNS table.

    left_idx / right_idx hold NO_NEIGHBOR (-1) where no admissible
    neighbor exists. inns[i] is an ascending int array.
    """

    spec: WindowSpec
    left_dist: np.ndarray
    left_idx: np.ndarray
    right_dist: np.ndarray
    right_idx: np.ndarray
    inns: Tuple[np.ndarray, ...]

    @property
    def w(self) -> int:
        return int(self.left_dist.size)

    def _check(self, i: int) -> None:
        if not 0 <= i < self.w:
            raise IndexError(f"window index {i} out of range [0, {self.w})")

    def lnn(self, i: int) -> Optional[int]:
        self._check(i)
        j = int(self.left_idx[i])
        return None if j == NO_NEIGHBOR else j

    def rnn(self, i: int) -> Optional[int]:
        self._check(i)
        j = int(self.right_idx[i])
        return None if j == NO_NEIGHBOR else j

    def inns_of(self, i: int) -> List[int]:
        self._check(i)
        return [int(j) for j in self.inns[i]]

    def in_inns(self, i: int, j: int) -> bool:
        """True when window j belongs to INNS(i)."""
        row = self.inns[i]
        k = int(np.searchsorted(row, j))
        return k < row.size and int(row[k]) == j

    @property
    def inns_total(self) -> int:
        return int(sum(row.size for row in self.inns))

    def matrix_profile(self) -> Tuple[np.ndarray, np.ndarray]:
        """Two-sided profile: the nearer of the left and right neighbors."""
        use_left = self.left_dist <= self.right_dist
        dist = np.where(use_left, self.left_dist, self.right_dist)
        idx = np.where(use_left, self.left_idx, self.right_idx)
        return dist, idx


def _freeze(*arrays: np.ndarray) -> None:
    for arr in arrays:
        arr.setflags(write=False)


# --------------------------------------------------------------------------- #
# Distance rows
# --------------------------------------------------------------------------- #
def _raw_row(candidates: np.ndarray, query: np.ndarray) -> np.ndarray:
    return np.sqrt(((candidates - query) ** 2).sum(axis=1))


def _znorm_row(qt: np.ndarray, i: int, l: int, stats: WindowStats, lo: int = 0) -> np.ndarray:
    """Distances from window i to windows lo, lo+1, ... given their centred dot products."""
    if stats.degenerate[i]:
        return np.full(qt.size, np.inf)
    cmu = stats.centred_mu
    mu, sigma, flat = cmu[lo:], stats.sigma[lo:], stats.degenerate[lo:]
    with np.errstate(divide="ignore", invalid="ignore"):
        row = znorm_from_dot(qt, l, cmu[i], stats.sigma[i], mu, sigma)
    row[flat] = np.inf
    return row


def distance_profile(
    T: TimeSeries, i: int, spec: WindowSpec, stats: Optional[WindowStats] = None
) -> DistanceRow:
    """
    Distances from window i to every window, +inf inside the exclusion zone.

    Args:
        T (TimeSeries): the series.
        i (int): query window start.
        spec (WindowSpec): window length, mode and exclusion radius.

    Returns:
        DistanceRow: one entry per window start.
    """
    w = spec.check(T)
    if not 0 <= i < w:
        raise IndexError(f"window start {i} out of range [0, {w})")
    if spec.mode == RAW:
        windows = sliding_windows(T, spec.l)
        row = _raw_row(windows, windows[i])
    else:
        if stats is None:
            stats = rolling_stats(T, spec.l)
        windows = sliding_windows(centred_values(T, stats), spec.l)
        row = _znorm_row(windows @ windows[i], i, spec.l, stats)
    lo = max(0, i - spec.exclusion + 1)
    row[lo:i + spec.exclusion] = np.inf
    _freeze(row)
    return DistanceRow(index=i, distances=row)


# --------------------------------------------------------------------------- #
# Streaming profile pass
# --------------------------------------------------------------------------- #
@dataclass
class _BlockResult:
    start: int
    right_dist: np.ndarray
    right_idx: np.ndarray
    inns: List[np.ndarray]
    # best left candidate seen by this block for every window
    left_dist: np.ndarray
    left_idx: np.ndarray


def _incremental_minima(right: np.ndarray, offset: int) -> np.ndarray:
    """Ascending indices of strict new minima met scanning right-to-left."""
    rev = right[::-1]
    seen = np.empty_like(rev)
    seen[0] = np.inf
    if rev.size > 1:
        seen[1:] = np.minimum.accumulate(rev)[:-1]
    hits = np.flatnonzero(rev < seen)
    return (offset + right.size - 1 - hits)[::-1].astype(np.int64)


def _process_block(
    t: np.ndarray,
    spec: WindowSpec,
    stats: Optional[WindowStats],
    windows: np.ndarray,
    start: int,
    stop: int,
) -> _BlockResult:
    """Rows start..stop-1. windows views t, which is centred in znorm mode."""
    w = windows.shape[0]
    l = spec.l
    excl = spec.exclusion

    right_dist = np.full(stop - start, np.inf)
    right_idx = np.full(stop - start, NO_NEIGHBOR, dtype=np.int64)
    inns: List[np.ndarray] = []
    left_dist = np.full(w, np.inf)
    left_idx = np.full(w, NO_NEIGHBOR, dtype=np.int64)

    qt = None
    for i in range(start, stop):
        if spec.mode == RAW:
            lo = i + excl
            right = _raw_row(windows[lo:], windows[i]) if lo < w else np.empty(0)
        else:
            if qt is None:
                qt = windows @ windows[i]
            else:
                # QT(i, j) = QT(i-1, j-1) - t[i-1]*t[j-1] + t[i-1+l]*t[j-1+l]
                nxt = np.empty_like(qt)
                nxt[1:] = qt[:-1] - t[i - 1] * t[:w - 1] + t[i - 1 + l] * t[l:l + w - 1]
                nxt[0] = np.dot(windows[0], windows[i])
                qt = nxt
            lo = i + excl
            right = _znorm_row(qt[lo:], i, l, stats, lo) if lo < w else np.empty(0)

        k = i - start
        if right.size:
            best = int(np.argmin(right))
            if np.isfinite(right[best]):
                right_dist[k] = right[best]
                right_idx[k] = lo + best
            inns.append(_incremental_minima(right, lo))

            # later rows are closer in time to every j, so they win ties
            target = left_dist[lo:]
            better = (right <= target) & np.isfinite(right)
            target[better] = right[better]
            left_idx[lo:][better] = i
        else:
            inns.append(np.empty(0, dtype=np.int64))

    return _BlockResult(start, right_dist, right_idx, inns, left_dist, left_idx)


def compute_profiles(
    T: TimeSeries,
    spec: WindowSpec,
    workers: int = 1,
    max_inns_total: Optional[int] = DEFAULT_MAX_INNS_TOTAL,
    block: int = ROW_BLOCK,
) -> ProfileSet:
    """
    Exact left/right matrix profiles and the full INNS table.

    Args:
        T (TimeSeries): the series.
        spec (WindowSpec): window length, mode and exclusion radius.
        workers (int): threads used for row blocks; output is identical
            for any value.
        max_inns_total (int, optional): abort when the INNS table would
            hold more entries than this.
        block (int): rows per block.

    Returns:
        ProfileSet: the precomputed neighbor index.
    """
    w = spec.windows(T)
    if w < 2:
        raise SeriesTooShortError(
            f"series too short for profiling: n={T.n}, window length {spec.l}"
        )
    if block < 1:
        raise ValueError("block size must be positive")

    t0 = time.time()
    if spec.mode == RAW:
        stats, values = None, T.values
    else:
        stats = rolling_stats(T, spec.l)
        values = centred_values(T, stats)
    windows = sliding_windows(values, spec.l)
    if stats is not None and stats.degenerate.any():
        logging.info(f"{int(stats.degenerate.sum())} flat windows excluded from all comparisons")

    spans = [(s, min(s + block, w)) for s in range(0, w, block)]

    left_dist = np.full(w, np.inf)
    left_idx = np.full(w, NO_NEIGHBOR, dtype=np.int64)
    right_dist = np.full(w, np.inf)
    right_idx = np.full(w, NO_NEIGHBOR, dtype=np.int64)
    inns: List[np.ndarray] = []
    inns_total = 0

    def run(span):
        return _process_block(values, spec, stats, windows, span[0], span[1])

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        # map() yields in submission order, so merging is deterministic
        for res in pool.map(run, spans):
            stop = res.start + res.right_dist.size
            right_dist[res.start:stop] = res.right_dist
            right_idx[res.start:stop] = res.right_idx
            inns.extend(res.inns)
            inns_total += sum(row.size for row in res.inns)
            if max_inns_total is not None and inns_total > max_inns_total:
                raise InnsCapExceeded(
                    f"INNS table exceeds the cap of {max_inns_total} entries "
                    f"(reached {inns_total} by window {stop - 1})"
                )
            better = (res.left_dist <= left_dist) & (res.left_idx != NO_NEIGHBOR)
            left_dist[better] = res.left_dist[better]
            left_idx[better] = res.left_idx[better]

    for row in inns:
        row.setflags(write=False)
    _freeze(left_dist, left_idx, right_dist, right_idx)

    logging.info(
        f"Profiles for {w} windows (l={spec.l}, {spec.mode}) in "
        f"{format_time_for_display(time.time() - t0)}; INNS total {inns_total}"
    )
    return ProfileSet(
        spec=spec,
        left_dist=left_dist,
        left_idx=left_idx,
        right_dist=right_dist,
        right_idx=right_idx,
        inns=tuple(inns),
    )


def inns_of(ps: ProfileSet, i: int) -> List[int]:
    """INNS(i) as an ascending list; empty when nothing lies to the right."""
    return ps.inns_of(i)


# --------------------------------------------------------------------------- #
# Dump helpers
# --------------------------------------------------------------------------- #
def profiles_frame(ps: ProfileSet) -> pd.DataFrame:
    """Tabular view with columns index,leftDist,leftIdx,rightDist,rightIdx."""
    def idx_col(arr):
        col = pd.array(arr, dtype="Int64")
        col[arr == NO_NEIGHBOR] = pd.NA
        return col

    return pd.DataFrame(
        {
            "index": np.arange(ps.w),
            "leftDist": ps.left_dist,
            "leftIdx": idx_col(ps.left_idx),
            "rightDist": ps.right_dist,
            "rightIdx": idx_col(ps.right_idx),
        }
    )


def inns_table(ps: ProfileSet) -> Dict[str, List[int]]:
    return {str(i): ps.inns_of(i) for i in range(ps.w)}
