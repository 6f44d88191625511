"""
Chain discovery under the bi-directional (tsc17), geometric (tsc20) and
relaxed bi-directional (tsc22) definitions.

Chains store their nodes in increasing time order. The literature writes
chains latest-first (C_1 > C_2 > ...); "backward" below means walking from
the latest node towards earlier ones through left nearest neighbors.
"""

import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .profiles import ProfileSet
from .series import TimeSeries, WindowSpec, sliding_windows, znormalize, ZNORM

TSC17 = "tsc17"
TSC20 = "tsc20"
TSC22 = "tsc22"
METHODS = (TSC17, TSC20, TSC22)

DEFAULT_ANGLE = 40.0
DEFAULT_MAX_CANDIDATES = 100000

# difference vectors shorter than this give a 0 degree angle
ANGLE_NORM_TOL = 1e-12


@dataclass(frozen=True)
class Chain:
    """Window starts in increasing time order plus the method that found them."""

    method: str
    nodes: Tuple[int, ...]
    window: Optional[int] = None

    def __post_init__(self):
        nodes = tuple(int(v) for v in self.nodes)
        if any(b <= a for a, b in zip(nodes, nodes[1:])):
            raise ValueError(f"chain nodes must be strictly increasing: {nodes}")
        object.__setattr__(self, "nodes", nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def latest(self) -> int:
        return self.nodes[-1]

    @property
    def earliest(self) -> int:
        return self.nodes[0]

    def backward(self) -> Tuple[int, ...]:
        """Nodes latest-first, the order chains are grown in."""
        return self.nodes[::-1]


@dataclass(frozen=True, eq=False)
class CriticalSet:
    mask: np.ndarray

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def __contains__(self, i) -> bool:
        return 0 <= int(i) < self.mask.size and bool(self.mask[int(i)])

    def __len__(self) -> int:
        return int(self.mask.sum())


@dataclass(frozen=True)
class ChainSet:
    method: str
    maximal: Tuple[Chain, ...]
    candidates: Tuple[Chain, ...]
    spec: WindowSpec
    params: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __len__(self) -> int:
        return len(self.candidates)


def _from_backward(method: str, backward: Sequence[int], window: int) -> Chain:
    return Chain(method=method, nodes=tuple(reversed(backward)), window=window)


# --------------------------------------------------------------------------- #
# Plain chains and critical nodes
# --------------------------------------------------------------------------- #
def backward_chain(ps: ProfileSet, start: int) -> Chain:
    """Follow left nearest neighbors from start until none is left."""
    walk = [start]
    prev = ps.lnn(start)
    while prev is not None:
        walk.append(prev)
        prev = ps.lnn(prev)
    return _from_backward("backward", walk, ps.spec.l)


def forward_chain(ps: ProfileSet, start: int) -> Chain:
    """Follow right nearest neighbors from start until none is left."""
    walk = [start]
    nxt = ps.rnn(start)
    while nxt is not None:
        walk.append(nxt)
        nxt = ps.rnn(nxt)
    return Chain(method="forward", nodes=tuple(walk), window=ps.spec.l)


def critical_nodes(ps: ProfileSet) -> CriticalSet:
    """Windows i whose left nearest neighbor j has i in INNS(j)."""
    mask = np.zeros(ps.w, dtype=bool)
    for i in np.flatnonzero(ps.left_idx >= 0):
        mask[i] = ps.in_inns(int(ps.left_idx[i]), int(i))
    mask.setflags(write=False)
    return CriticalSet(mask=mask)


# --------------------------------------------------------------------------- #
# Candidate bookkeeping
# --------------------------------------------------------------------------- #
# A walk is a backward node list plus the positions runs may start from; its
# candidates are the runs walk[p..q] with q > p, stored time-ordered.
Walk = Tuple[List[int], Sequence[int]]


def _dedup(chains: Iterable[Tuple[int, ...]]) -> List[Tuple[int, ...]]:
    seen = set()
    out = []
    for c in chains:
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


def _runs_in_order(walks: Sequence[Walk]) -> Iterable[Tuple[int, ...]]:
    for backward, starts in walks:
        for p in starts:
            for q in range(p + 1, len(backward)):
                yield tuple(reversed(backward[p:q + 1]))


def _longest_runs(walks: Sequence[Walk], cap: int) -> List[Tuple[int, ...]]:
    """
    Distinct runs longest first, stopping after cap of them.

    Each start contributes one heap entry at a time, so only the runs that
    are kept are ever built.
    """
    # (-size, earliest node, latest node, walk, start)
    heap = []
    for k, (backward, starts) in enumerate(walks):
        for p in starts:
            size = len(backward) - p
            if size >= 2:
                heap.append((-size, backward[p + size - 1], backward[p], k, p))
    heapq.heapify(heap)

    seen = set()
    out: List[Tuple[int, ...]] = []
    while heap and len(out) < cap:
        neg_size, _, latest, k, p = heapq.heappop(heap)
        size = -neg_size
        backward = walks[k][0]
        run = tuple(reversed(backward[p:p + size]))
        if run not in seen:
            seen.add(run)
            out.append(run)
        if size > 2:
            heapq.heappush(heap, (1 - size, backward[p + size - 2], latest, k, p))
    return out


def _candidate_runs(method: str, walks: Sequence[Walk], cap: Optional[int]) -> List[Tuple[int, ...]]:
    """All runs in discovery order, or the cap longest when there are more."""
    total = sum(max(len(backward) - 1 - p, 0) for backward, starts in walks for p in starts)
    if cap is None or total <= cap:
        return _dedup(_runs_in_order(walks))
    logging.warning(f"{method}: {total} candidate runs, keeping the {cap} longest")
    return _longest_runs(walks, cap)


def _build(method, maximal, candidates, spec, params) -> ChainSet:
    l = spec.l
    result = ChainSet(
        method=method,
        maximal=tuple(Chain(method, c, l) for c in maximal),
        candidates=tuple(Chain(method, c, l) for c in candidates),
        spec=spec,
        params=dict(params),
    )
    logging.info(f"{method}: {len(result.maximal)} maximal chains, {len(result.candidates)} candidates")
    return result


# --------------------------------------------------------------------------- #
# tsc22
# --------------------------------------------------------------------------- #
def _grow_tsc22(ps: ProfileSet, crit: CriticalSet, start: int, visited: Optional[np.ndarray] = None) -> List[int]:
    """
    Grow backward from start. The anchor is the most recent critical node
    met so far (start itself initially); a step to LNN(cursor) is taken only
    while the anchor belongs to INNS(LNN(cursor)).
    """
    walk = [start]
    anchor = cursor = start
    while True:
        prev = ps.lnn(cursor)
        if prev is None or not ps.in_inns(prev, anchor):
            break
        walk.append(prev)
        cursor = prev
        if visited is not None:
            visited[cursor] = True
        if cursor in crit:
            anchor = cursor
    return walk


def discover_tsc22(ps: ProfileSet, max_candidates: Optional[int] = DEFAULT_MAX_CANDIDATES) -> ChainSet:
    """
    Find every relaxed bi-directional chain.

    Critical nodes are visited latest-first; a critical node already reached
    by an earlier walk would only regrow a piece of that walk, so it is
    skipped. Candidates are the contiguous pieces of each maximal chain
    whose latest node is critical.
    """
    crit = critical_nodes(ps)
    visited = np.zeros(ps.w, dtype=bool)
    maximal: List[Tuple[int, ...]] = []
    walks: List[Walk] = []

    for s in crit.indices[::-1]:
        s = int(s)
        if visited[s]:
            continue
        visited[s] = True
        walk = _grow_tsc22(ps, crit, s, visited)
        if len(walk) < 2:
            continue
        maximal.append(tuple(reversed(walk)))
        walks.append((walk, [p for p, node in enumerate(walk) if node in crit]))

    candidates = _candidate_runs(TSC22, walks, max_candidates)
    return _build(TSC22, maximal, candidates, ps.spec, {})


# --------------------------------------------------------------------------- #
# tsc17
# --------------------------------------------------------------------------- #
def _mutual(ps: ProfileSet) -> np.ndarray:
    """mutual[i]: LNN(i) exists and RNN(LNN(i)) == i."""
    mutual = np.zeros(ps.w, dtype=bool)
    has_left = np.flatnonzero(ps.left_idx >= 0)
    mutual[has_left] = ps.right_idx[ps.left_idx[has_left]] == has_left
    return mutual


def discover_tsc17(ps: ProfileSet, max_candidates: Optional[int] = DEFAULT_MAX_CANDIDATES) -> ChainSet:
    """Maximal paths of mutual LNN/RNN links and all their contiguous pieces."""
    mutual = _mutual(ps)
    # a window has a mutual successor when some later window links back to it
    has_successor = np.zeros(ps.w, dtype=bool)
    has_successor[ps.left_idx[mutual]] = True

    maximal: List[Tuple[int, ...]] = []
    walks: List[Walk] = []
    for head in np.flatnonzero(mutual & ~has_successor)[::-1]:
        walk = [int(head)]
        while mutual[walk[-1]]:
            walk.append(int(ps.left_idx[walk[-1]]))
        maximal.append(tuple(reversed(walk)))
        walks.append((walk, range(len(walk) - 1)))

    candidates = _candidate_runs(TSC17, walks, max_candidates)
    return _build(TSC17, maximal, candidates, ps.spec, {})


# --------------------------------------------------------------------------- #
# tsc20
# --------------------------------------------------------------------------- #
def direction_angle(anchor: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Angle in degrees between (b - anchor) and (c - anchor)."""
    u = np.asarray(b, dtype=np.float64) - anchor
    v = np.asarray(c, dtype=np.float64) - anchor
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < ANGLE_NORM_TOL or nv < ANGLE_NORM_TOL:
        return 0.0
    cos = float(np.dot(u, v) / (nu * nv))
    return math.degrees(math.acos(min(1.0, max(-1.0, cos))))


def window_vectors(T: TimeSeries, spec: WindowSpec) -> np.ndarray:
    """All windows as points: z-normalized in znorm mode, raw otherwise."""
    windows = sliding_windows(T, spec.l)
    if spec.mode != ZNORM:
        return np.array(windows, dtype=np.float64)
    return np.vstack([znormalize(row) for row in windows]) if windows.shape[0] else windows


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not 0.0 < theta <= 180.0:
        raise ValueError(f"angle threshold must lie in (0, 180], got {theta}")
    return theta


def _grow_tsc20(ps: ProfileSet, vectors: np.ndarray, anchor: int, theta: float) -> List[int]:
    walk = [anchor]
    prev = ps.lnn(anchor)
    if prev is None:
        return walk
    walk.append(prev)
    while True:
        nxt = ps.lnn(walk[-1])
        if nxt is None:
            break
        if direction_angle(vectors[anchor], vectors[walk[-1]], vectors[nxt]) > theta:
            break
        walk.append(nxt)
    return walk


def discover_tsc20(
    ps: ProfileSet,
    T: TimeSeries,
    theta: float = DEFAULT_ANGLE,
    max_candidates: Optional[int] = DEFAULT_MAX_CANDIDATES,
) -> ChainSet:
    """
    Grow an angle-constrained backward chain from every anchor window.

    Every prefix of an anchor's chain (two nodes or more) is a candidate:
    the sub-chains that keep the anchor as their latest node. An anchor's
    full chain is maximal unless another anchor's chain contains it as a
    contiguous run.
    """
    theta = _check_theta(theta)
    vectors = window_vectors(T, ps.spec)

    walks: List[List[int]] = []
    for a in range(ps.w - 1, -1, -1):
        walk = _grow_tsc20(ps, vectors, a, theta)
        if len(walk) >= 2:
            walks.append(walk)

    # reach[v]: longest tail (v included) of any walk passing through v
    # without starting there; a walk from v is covered when reach >= its length
    reach = np.zeros(ps.w, dtype=np.int64)
    for walk in walks:
        for p in range(1, len(walk)):
            tail = len(walk) - p
            if tail > reach[walk[p]]:
                reach[walk[p]] = tail
    maximal = [tuple(reversed(walk)) for walk in walks if reach[walk[0]] < len(walk)]
    candidates = _candidate_runs(TSC20, [(walk, [0]) for walk in walks], max_candidates)
    return _build(TSC20, maximal, candidates, ps.spec, {"angle": theta})


# --------------------------------------------------------------------------- #
# Forced growth
# --------------------------------------------------------------------------- #
def grow_forced(
    ps: ProfileSet,
    T: TimeSeries,
    start: int,
    method: str,
    params: Optional[Dict[str, Any]] = None,
) -> Chain:
    """
    Grow one backward chain from a given start under a method's rule.

    tsc22 treats start as the first anchor whether or not it is critical.
    params may carry "angle" (tsc20) and a precomputed "critical" set (tsc22).
    """
    params = params or {}
    ps._check(start)
    if method == TSC17:
        walk = [start]
        while True:
            prev = ps.lnn(walk[-1])
            if prev is None or ps.rnn(prev) != walk[-1]:
                break
            walk.append(prev)
    elif method == TSC20:
        theta = _check_theta(params.get("angle", DEFAULT_ANGLE))
        vectors = params.get("vectors")
        if vectors is None:
            vectors = window_vectors(T, ps.spec)
        walk = _grow_tsc20(ps, vectors, start, theta)
    elif method == TSC22:
        crit = params.get("critical")
        if crit is None:
            crit = critical_nodes(ps)
        walk = _grow_tsc22(ps, crit, start)
    else:
        raise ValueError(f"unknown chain method '{method}' (expected one of {METHODS})")
    return _from_backward("forced", walk, ps.spec.l)


def discover(ps: ProfileSet, T: TimeSeries, method: str, params: Optional[Dict[str, Any]] = None) -> ChainSet:
    """Dispatch to the discovery routine for method."""
    params = params or {}
    cap = params.get("max_candidates", DEFAULT_MAX_CANDIDATES)
    if method == TSC17:
        return discover_tsc17(ps, max_candidates=cap)
    if method == TSC20:
        return discover_tsc20(ps, T, theta=params.get("angle", DEFAULT_ANGLE), max_candidates=cap)
    if method == TSC22:
        return discover_tsc22(ps, max_candidates=cap)
    raise ValueError(f"unknown chain method '{method}' (expected one of {METHODS})")
