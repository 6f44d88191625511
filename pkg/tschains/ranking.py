"""
Chain scoring and ranking.

effective length: distance between the earliest and latest nodes divided by
the largest consecutive-pair distance, rounded half away from zero. Noise
chains sit near 1; a uniformly drifting chain of m nodes reaches m - 1.

correlation length: sum over consecutive pairs of |r| * r, r the Pearson
correlation of the z-normalized windows.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .chains import TSC17, TSC20, TSC22, Chain, ChainSet
from .series import (
    RAW,
    TimeSeries,
    WindowSpec,
    WindowStats,
    pair_distance,
    rolling_stats,
)

# denominators below this are floored and the score is flagged
ZERO_DENOMINATOR = 1e-12


@dataclass(frozen=True)
class ChainScore:
    effRaw: float
    effLen: int
    corrLen: float
    m: int
    maxConsecutive: float
    flagged: bool = False

    @property
    def meaningful(self) -> bool:
        """False for chains that look like noise (effLen <= 1)."""
        return not self.flagged and self.effLen > 1

    def to_dict(self) -> Dict:
        return {
            "effRaw": self.effRaw,
            "effLen": self.effLen,
            "corrLen": self.corrLen,
            "m": self.m,
            "maxConsecutive": self.maxConsecutive,
            "flagged": self.flagged,
        }


def round_half_away(x: float) -> int:
    """round(2.5) == 3, round(-2.5) == -3."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


class _Distances:
    """Memoized pair distances in one mode, shared across many candidates."""

    def __init__(self, T: TimeSeries, spec: WindowSpec, stats: Optional[WindowStats] = None):
        self.T = T
        self.spec = spec
        self.stats = stats
        self._cache: Dict[Tuple[int, int], float] = {}

    def __call__(self, i: int, j: int) -> float:
        key = (i, j) if i <= j else (j, i)
        d = self._cache.get(key)
        if d is None:
            d = pair_distance(self.T, key[0], key[1], self.spec, self.stats)
            self._cache[key] = d
        return d


class _Correlations:
    """Memoized Pearson correlations of z-normalized windows of length l."""

    def __init__(self, T: TimeSeries, l: int):
        self.T = T
        self.l = l
        self.stats = rolling_stats(T, l)
        self._cache: Dict[Tuple[int, int], float] = {}

    def __call__(self, i: int, j: int) -> Optional[float]:
        """r(i, j), or None when either window is flat."""
        key = (i, j) if i <= j else (j, i)
        if key in self._cache:
            return self._cache[key]
        s = self.stats
        if s.degenerate[i] or s.degenerate[j]:
            r = None
        else:
            l = self.l
            qt = float(np.dot(self.T.window(i, l) - s.centre, self.T.window(j, l) - s.centre))
            r = (qt - l * s.centred_mu[i] * s.centred_mu[j]) / (l * s.sigma[i] * s.sigma[j])
            # r = 1 - d^2 / (2l) with d the z-normalized distance
            r = float(min(1.0, max(-1.0, r)))
        self._cache[key] = r
        return r


def _check_length(chain: Chain) -> Tuple[int, ...]:
    if len(chain) < 2:
        raise ValueError(f"scoring needs a chain of at least 2 nodes, got {len(chain)}")
    return chain.nodes


def _effective(nodes: Sequence[int], dist) -> Tuple[float, int, float, bool]:
    numerator = dist(nodes[0], nodes[-1])
    steps = [dist(a, b) for a, b in zip(nodes, nodes[1:])]
    max_step = max(steps)
    if not (math.isfinite(numerator) and math.isfinite(max_step)):
        return 0.0, 0, max_step, True
    flagged = max_step < ZERO_DENOMINATOR
    if flagged and numerator == 0.0:
        eff = 0.0
    else:
        eff = numerator / max(max_step, ZERO_DENOMINATOR)
    return eff, round_half_away(eff), max_step, flagged


def effective_length(T: TimeSeries, chain: Chain, spec: WindowSpec) -> Tuple[float, int]:
    """(effRaw, effLen) in the window spec's distance mode."""
    stats = rolling_stats(T, spec.l) if spec.mode != RAW else None
    eff, eff_len, _, _ = _effective(_check_length(chain), _Distances(T, spec, stats))
    return eff, eff_len


def _correlation(nodes: Sequence[int], corr) -> float:
    total = 0.0
    for a, b in zip(nodes, nodes[1:]):
        r = corr(a, b)
        total += -1.0 if r is None else abs(r) * r
    return total


def correlation_length(T: TimeSeries, chain: Chain, l: int) -> float:
    """Sum of |r|*r over consecutive pairs; a flat window contributes -1."""
    return _correlation(_check_length(chain), _Correlations(T, l))


class Scorer:
    """Scores many chains over one series, reusing pair computations."""

    def __init__(self, T: TimeSeries, spec: WindowSpec):
        self.spec = spec
        stats = rolling_stats(T, spec.l) if spec.mode != RAW else None
        self._dist = _Distances(T, spec, stats)
        self._corr = _Correlations(T, spec.l)

    def __call__(self, chain: Chain) -> ChainScore:
        nodes = _check_length(chain)
        eff, eff_len, max_step, flagged = _effective(nodes, self._dist)
        return ChainScore(
            effRaw=eff,
            effLen=eff_len,
            corrLen=_correlation(nodes, self._corr),
            m=len(nodes),
            maxConsecutive=max_step,
            flagged=flagged,
        )


def score_chain(T: TimeSeries, chain: Chain, spec: WindowSpec) -> ChainScore:
    return Scorer(T, spec)(chain)


def _check_window(cands: ChainSet, spec: WindowSpec) -> None:
    if cands.spec.l != spec.l:
        raise ValueError(f"window mismatch: candidates use l={cands.spec.l}, ranking asked for l={spec.l}")


def _top(ranked: List[Tuple[Chain, ChainScore]], topk: Optional[int]) -> List[Tuple[Chain, ChainScore]]:
    if topk is not None:
        if topk < 1:
            raise ValueError("topk must be at least 1")
        ranked = ranked[:topk]
    return ranked


def rank_two_stage(
    cands: ChainSet, T: TimeSeries, spec: WindowSpec, topk: Optional[int] = None
) -> List[Tuple[Chain, ChainScore]]:
    """
    Effective length first, correlation length among equal effective
    lengths, then longer chains, then the earlier latest node.
    Flagged scores go last.
    """
    _check_window(cands, spec)
    if not cands.candidates:
        return []
    scorer = Scorer(T, spec)
    scored = [(c, scorer(c)) for c in cands.candidates]
    scored.sort(key=lambda cs: (cs[1].flagged, -cs[1].effLen, -cs[1].corrLen, -cs[1].m, cs[0].latest))
    logging.info(f"Ranked {len(scored)} {cands.method} candidates")
    return _top(scored, topk)


def rank_baseline(
    cands: ChainSet,
    T: TimeSeries,
    spec: WindowSpec,
    method: Optional[str] = None,
    topk: Optional[int] = None,
) -> List[Tuple[Chain, ChainScore]]:
    """
    tsc17: longest first, then the latest-ending chain, then the smaller
    largest step. The latest node is compared before the step size, so
    among equally long chains the one that has grown furthest towards the
    end of the series wins even when its largest step is bigger.

    tsc20: effective length, then its unrounded value.
    """
    method = method or cands.method
    _check_window(cands, spec)
    if not cands.candidates:
        return []
    scorer = Scorer(T, spec)
    scored = [(c, scorer(c)) for c in cands.candidates]
    if method == TSC17:
        scored.sort(key=lambda cs: (-cs[1].m, -cs[0].latest, cs[1].maxConsecutive))
    elif method == TSC20:
        scored.sort(key=lambda cs: (cs[1].flagged, -cs[1].effLen, -cs[1].effRaw, -cs[1].m, cs[0].latest))
    else:
        raise ValueError(f"no baseline ranking for method '{method}'")
    return _top(scored, topk)


def rank(
    cands: ChainSet, T: TimeSeries, spec: WindowSpec, topk: Optional[int] = None
) -> List[Tuple[Chain, ChainScore]]:
    """The ranking each method is evaluated with."""
    if cands.method == TSC22:
        return rank_two_stage(cands, T, spec, topk)
    return rank_baseline(cands, T, spec, cands.method, topk)
