"""
Definition-literal reference implementations.

Everything here is written for readability on small inputs and is used to
cross-check the optimized modules. Size guards raise OracleGuardError
instead of truncating.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .chains import DEFAULT_ANGLE, TSC17, TSC20, TSC22, METHODS, ChainSet, Chain, discover
from .profiles import NO_NEIGHBOR, ProfileSet, compute_profiles
from .series import RAW, ZNORM, TimeSeries, WindowSpec, pair_distance, rolling_stats, window_vector
from .utils import format_time_for_display

MAX_PROFILE_WINDOWS = 2048
MAX_CHAIN_WINDOWS = 256

# distance agreement required between the streaming and direct paths
DISTANCE_TOL = 1e-8

GEOMETRY_STRIDE = 3
FILLER_SCALE = 1e6


class OracleGuardError(ValueError):
    """Raised when an input is too large for a brute-force computation."""


@dataclass(frozen=True, eq=False)
class DenseDistances:
    """Full w x w distances; pairs inside the exclusion band hold +inf."""

    spec: WindowSpec
    matrix: np.ndarray

    @property
    def w(self) -> int:
        return int(self.matrix.shape[0])

    def __call__(self, i: int, j: int) -> float:
        return float(self.matrix[i, j])


def _guard(w: int, limit: int, what: str) -> None:
    if w > limit:
        raise OracleGuardError(f"{what} is limited to {limit} windows, got {w}")


def dense_distances(T: TimeSeries, spec: WindowSpec) -> DenseDistances:
    w = spec.check(T)
    stats = rolling_stats(T, spec.l) if spec.mode == ZNORM else None
    matrix = np.full((w, w), np.inf)
    for i in range(w):
        for j in range(i + spec.exclusion, w):
            d = pair_distance(T, i, j, spec, stats)
            matrix[i, j] = d
            matrix[j, i] = d
    matrix.setflags(write=False)
    return DenseDistances(spec=spec, matrix=matrix)


# --------------------------------------------------------------------------- #
# Profiles
# --------------------------------------------------------------------------- #
def _is_inns(row: np.ndarray, i: int, j: int, excl: int) -> bool:
    """j in INNS(i): j is right of i and strictly closer than every k > j."""
    if j < i + excl or not math.isfinite(row[j]):
        return False
    return bool(np.all(row[j] < row[j + 1:]))


def brute_profiles(T: TimeSeries, spec: WindowSpec) -> ProfileSet:
    """
    Left/right nearest neighbors and INNS straight from the definitions.

    Ties go to the neighbor closest in time on both sides.
    """
    w = spec.check(T)
    _guard(w, MAX_PROFILE_WINDOWS, "brute_profiles")
    dd = dense_distances(T, spec)
    excl = spec.exclusion

    left_dist = np.full(w, np.inf)
    left_idx = np.full(w, NO_NEIGHBOR, dtype=np.int64)
    right_dist = np.full(w, np.inf)
    right_idx = np.full(w, NO_NEIGHBOR, dtype=np.int64)
    inns = []
    for i in range(w):
        row = dd.matrix[i]
        for j in range(i - excl, -1, -1):
            if row[j] < left_dist[i]:
                left_dist[i], left_idx[i] = row[j], j
        for j in range(i + excl, w):
            if row[j] < right_dist[i]:
                right_dist[i], right_idx[i] = row[j], j
        inns.append(np.array([j for j in range(i + excl, w) if _is_inns(row, i, j, excl)], dtype=np.int64))

    return ProfileSet(
        spec=spec,
        left_dist=left_dist,
        left_idx=left_idx,
        right_dist=right_dist,
        right_idx=right_idx,
        inns=tuple(inns),
    )


# --------------------------------------------------------------------------- #
# Chains
# --------------------------------------------------------------------------- #
def _backward(ps: ProfileSet, start: int) -> List[int]:
    walk = [start]
    while ps.left_idx[walk[-1]] != NO_NEIGHBOR:
        walk.append(int(ps.left_idx[walk[-1]]))
    return walk


def _is_critical(ps: ProfileSet, i: int) -> bool:
    j = int(ps.left_idx[i])
    return j != NO_NEIGHBOR and i in set(ps.inns[j].tolist())


def _valid_tsc17(ps: ProfileSet, seq: Sequence[int]) -> bool:
    return all(int(ps.right_idx[b]) == a for a, b in zip(seq, seq[1:]))


def _valid_tsc22(ps: ProfileSet, seq: Sequence[int]) -> bool:
    if not _is_critical(ps, seq[0]):
        return False
    anchor = seq[0]
    for k in range(len(seq) - 1):
        if _is_critical(ps, seq[k]):
            anchor = seq[k]
        if anchor not in set(ps.inns[seq[k + 1]].tolist()):
            return False
    return True


def _angle(anchor: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    u, v = b - anchor, c - anchor
    nu, nv = np.sqrt(np.sum(u * u)), np.sqrt(np.sum(v * v))
    if nu < 1e-12 or nv < 1e-12:
        return 0.0
    return float(np.degrees(np.arccos(np.clip(np.sum(u * v) / (nu * nv), -1.0, 1.0))))


def _valid_tsc20(vecs: List[np.ndarray], seq: Sequence[int], theta: float) -> bool:
    x = [vecs[s] for s in seq]
    return all(_angle(x[0], x[k], x[k + 1]) <= theta for k in range(1, len(seq) - 1))


def _contained(small: Tuple[int, ...], big: Tuple[int, ...]) -> bool:
    n = len(small)
    return n < len(big) and any(big[p:p + n] == small for p in range(len(big) - n + 1))


def _maximal(chains: Iterable[Tuple[int, ...]]) -> List[Tuple[int, ...]]:
    chains = list(dict.fromkeys(chains))
    return [c for c in chains if not any(_contained(c, other) for other in chains)]


def brute_chains(
    T: TimeSeries,
    spec: WindowSpec,
    method: str,
    params: Optional[Dict[str, Any]] = None,
    profiles: Optional[ProfileSet] = None,
) -> ChainSet:
    """
    Enumerate the backward chain from every window and test each of its
    prefixes against the method's definition.

    Every valid prefix is kept. Maximal chains are those not contained in
    another kept chain. A brute_profiles result may be passed in to be reused.
    """
    params = params or {}
    w = spec.check(T)
    _guard(w, MAX_CHAIN_WINDOWS, "brute_chains")
    ps = profiles if profiles is not None else brute_profiles(T, spec)

    if method == TSC20:
        theta = float(params.get("angle", DEFAULT_ANGLE))
        vecs = [window_vector(T, i, spec) for i in range(w)]
    elif method not in (TSC17, TSC22):
        raise ValueError(f"unknown chain method '{method}' (expected one of {METHODS})")

    kept: List[Tuple[int, ...]] = []
    for s in range(w - 1, -1, -1):
        walk = _backward(ps, s)
        valid = []
        for n in range(2, len(walk) + 1):
            seq = walk[:n]
            if method == TSC17:
                ok = _valid_tsc17(ps, seq)
            elif method == TSC22:
                ok = _valid_tsc22(ps, seq)
            else:
                ok = _valid_tsc20(vecs, seq, theta)
            if ok:
                valid.append(tuple(reversed(seq)))
        kept.extend(valid)

    kept = list(dict.fromkeys(kept))
    l = spec.l
    return ChainSet(
        method=method,
        maximal=tuple(Chain(method, c, l) for c in _maximal(kept)),
        candidates=tuple(Chain(method, c, l) for c in kept),
        spec=spec,
        params={"angle": theta} if method == TSC20 else {},
    )


# --------------------------------------------------------------------------- #
# Planar test series
# --------------------------------------------------------------------------- #
def designated_starts(count: int, stride: int = GEOMETRY_STRIDE) -> List[int]:
    return [stride * k for k in range(count)]


def geometry_builder(points: Sequence[Sequence[float]], stride: int = GEOMETRY_STRIDE) -> TimeSeries:
    """
    Raw-mode l=2 series whose windows at designated_starts(len(points))
    equal the given points, in the given (time) order.

    Between two points sit stride - 2 filler samples F_k = 1e6 * (k + 1),
    so windows straddling a point and a filler are far from every point.
    The series ends on the last point.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
        raise ValueError("points must be a non-empty list of (x, y) pairs")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    if stride < 2:
        raise ValueError("stride must be at least 2")

    values: List[float] = []
    for k, (x, y) in enumerate(pts):
        values.extend((x, y))
        if k < len(pts) - 1:
            values.extend([FILLER_SCALE * (k + 1)] * (stride - 2))
    return TimeSeries(np.array(values))


def geometry_spec() -> WindowSpec:
    return WindowSpec(2, RAW)


def restrict_to_starts(cands: ChainSet, starts: Iterable[int]) -> ChainSet:
    """Candidates (and maximal chains) whose nodes are all in starts."""
    allowed = set(int(s) for s in starts)

    def keep(chains):
        return tuple(c for c in chains if allowed.issuperset(c.nodes))

    return ChainSet(
        method=cands.method,
        maximal=keep(cands.maximal),
        candidates=keep(cands.candidates),
        spec=cands.spec,
        params=dict(cands.params),
    )


# --------------------------------------------------------------------------- #
# Randomized cross-check
# --------------------------------------------------------------------------- #
VERIFY_CONFIGS = (
    (RAW, 1),
    (RAW, 4),
    (RAW, 8),
    (ZNORM, 4),
    (ZNORM, 8),
)


def _same_index(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and bool(np.array_equal(a, b))


def _same_dist(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and bool(np.allclose(a, b, rtol=0.0, atol=DISTANCE_TOL, equal_nan=False))


def compare_profiles(fast: ProfileSet, slow: ProfileSet) -> List[str]:
    """Names of the fields that disagree."""
    diffs = []
    if not _same_index(fast.left_idx, slow.left_idx):
        diffs.append("leftIdx")
    if not _same_index(fast.right_idx, slow.right_idx):
        diffs.append("rightIdx")
    if not _same_dist(fast.left_dist, slow.left_dist):
        diffs.append("leftDist")
    if not _same_dist(fast.right_dist, slow.right_dist):
        diffs.append("rightDist")
    if len(fast.inns) != len(slow.inns) or any(
        not np.array_equal(a, b) for a, b in zip(fast.inns, slow.inns)
    ):
        diffs.append("inns")
    return diffs


def chain_keys(chains: Iterable[Chain]) -> set:
    return {c.nodes for c in chains}


def compare_chains(fast: ChainSet, slow: ChainSet) -> List[str]:
    diffs = []
    if chain_keys(fast.maximal) != chain_keys(slow.maximal):
        diffs.append("maximal")
    if chain_keys(fast.candidates) != chain_keys(slow.candidates):
        diffs.append("candidates")
    return diffs


def random_series(rng: np.random.Generator, n_max: int, n_min: int = 16) -> TimeSeries:
    n = int(rng.integers(n_min, n_max + 1))
    return TimeSeries(rng.standard_normal(n))


def run_verification(
    n: int = 64,
    trials: int = 200,
    seed: int = 0,
    configs: Sequence[Tuple[str, int]] = VERIFY_CONFIGS,
    angle: float = DEFAULT_ANGLE,
) -> Dict[str, Any]:
    """
    Compare optimized profiles and discovery with the oracles on random
    series of 16..n samples, and check every tsc17 chain is a tsc22
    candidate. Returns a summary with every mismatch found.
    """
    if n < 16:
        raise ValueError("verification series need at least 16 samples")
    t0 = time.time()
    mismatches = []
    checked = 0
    for mode, l in configs:
        spec = WindowSpec(l, mode)
        rng = np.random.default_rng([seed, l, 0 if mode == RAW else 1])
        for trial in range(trials):
            T = random_series(rng, n)
            where = {"mode": mode, "window": l, "trial": trial, "n": T.n}
            fast = compute_profiles(T, spec)
            slow = brute_profiles(T, spec)
            for field_name in compare_profiles(fast, slow):
                mismatches.append(dict(where, check="profiles", field=field_name))
            found = {}
            for method in METHODS:
                params = {"angle": angle}
                found[method] = discover(fast, T, method, params)
                for field_name in compare_chains(found[method], brute_chains(T, spec, method, params, slow)):
                    mismatches.append(dict(where, check=method, field=field_name))
            missing = chain_keys(found[TSC17].candidates) - chain_keys(found[TSC22].candidates)
            if missing:
                mismatches.append(dict(where, check="containment", field=str(sorted(missing)[0])))
            checked += 1

    if mismatches:
        logging.warning(f"Verification found {len(mismatches)} mismatches")
    logging.info(f"Verified {checked} instances in {format_time_for_display(time.time() - t0)}")
    return {
        "instances": checked,
        "trials": trials,
        "maxLength": n,
        "seed": seed,
        "configs": [{"mode": m, "window": l} for m, l in configs],
        "mismatches": mismatches,
        "ok": not mismatches,
    }
