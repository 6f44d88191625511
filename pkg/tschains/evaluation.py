"""
Hit/precision/recall/F1 scoring of detected chains against a benchmark
manifest, the two evaluation protocols, and the benchmark suite runner.

A detected node hits a ground-truth node when their windows overlap by
more than half a window. Matching is one-to-one and greedy in time order.
"""

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd
from tqdm import tqdm

from .benchgen import FAMILIES, GenParams, Manifest, generate
from .chains import METHODS, TSC20, TSC22, Chain, critical_nodes, discover, grow_forced, window_vectors
from .profiles import ProfileSet, compute_profiles
from .ranking import rank
from .series import TimeSeries, WindowSpec
from .utils import format_time_for_display

WITH_RANKING = "with-ranking"
WITHOUT_RANKING = "without-ranking"
PROTOCOLS = (WITH_RANKING, WITHOUT_RANKING)

# truth starts tried by the without-ranking protocol
FORCED_STARTS = 5

NO_CHAIN = "no chain found"
NO_MEANINGFUL_CHAIN = "no meaningful chain"
EMPTY_CHAIN = "empty chain"


@dataclass(frozen=True)
class EvalReport:
    method: str
    protocol: str
    hits: int
    recall: float
    precision: float
    f1: float
    detected_len: int
    truth_len: int
    matches: Tuple[Tuple[int, int], ...] = ()
    nodes: Tuple[int, ...] = ()
    flag: Optional[str] = None
    forced_start: Optional[int] = None
    trials: int = 1
    instance: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "protocol": self.protocol,
            "hits": self.hits,
            "recall": self.recall,
            "precision": self.precision,
            "f1": self.f1,
            "detectedLen": self.detected_len,
            "truthLen": self.truth_len,
            "nodes": list(self.nodes),
            "matches": [{"detected": d, "truth": t} for d, t in self.matches],
            "flag": self.flag,
            "forcedStart": self.forced_start,
            "trials": self.trials,
        }


def _nodes(chain: Union[Chain, Sequence[int], None]) -> Tuple[int, ...]:
    if chain is None:
        return ()
    if isinstance(chain, Chain):
        return chain.nodes
    return tuple(int(v) for v in chain)


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def match_hits(chain: Union[Chain, Sequence[int]], manifest: Manifest) -> Tuple[int, List[Tuple[int, int]]]:
    """
    One-to-one greedy matching of detected starts to truth starts.

    Detected starts are taken in increasing time order; each consumes the
    earliest unused truth node overlapping it by more than l/2 samples.

    Returns:
        (hits, [(detected, truth), ...])
    """
    l = manifest.window_len
    if isinstance(chain, Chain) and chain.window is not None and chain.window != l:
        raise ValueError(f"window mismatch: chain uses l={chain.window}, manifest l={l}")

    truth = sorted(manifest.chain_starts)
    used = [False] * len(truth)
    matches = []
    for d in sorted(_nodes(chain)):
        for k, t in enumerate(truth):
            if not used[k] and l - abs(d - t) > l / 2:
                used[k] = True
                matches.append((d, t))
                break
    return len(matches), matches


def score(
    chain: Union[Chain, Sequence[int], None],
    manifest: Manifest,
    method: Optional[str] = None,
    protocol: str = WITH_RANKING,
) -> EvalReport:
    """Recall, precision and F1 of one detected chain."""
    nodes = _nodes(chain)
    if method is None:
        method = chain.method if isinstance(chain, Chain) else "unknown"
    truth_len = len(manifest.chain_starts)
    if not nodes:
        return EvalReport(method, protocol, 0, 0.0, 0.0, 0.0, 0, truth_len, flag=EMPTY_CHAIN)

    hits, matches = match_hits(chain if isinstance(chain, Chain) else nodes, manifest)
    recall = hits / truth_len if truth_len else 0.0
    precision = hits / len(nodes)
    return EvalReport(
        method=method,
        protocol=protocol,
        hits=hits,
        recall=recall,
        precision=precision,
        f1=f1_score(precision, recall),
        detected_len=len(nodes),
        truth_len=truth_len,
        matches=tuple(matches),
        nodes=nodes,
    )


def _profiles(T: TimeSeries, spec: WindowSpec, params: Dict[str, Any]) -> ProfileSet:
    ps = params.get("profiles")
    if ps is None:
        ps = compute_profiles(T, spec, workers=params.get("workers", 1))
    return ps


def eval_with_ranking(
    method: str,
    T: TimeSeries,
    manifest: Manifest,
    spec: WindowSpec,
    params: Optional[Dict[str, Any]] = None,
) -> EvalReport:
    """
    Discover with method, rank with the method's own ranking and score the
    top-1 chain. params may carry "angle", "max_candidates", "workers" and
    a precomputed "profiles".
    """
    params = params or {}
    if spec.l != manifest.window_len:
        raise ValueError(f"window mismatch: spec l={spec.l}, manifest l={manifest.window_len}")
    ps = _profiles(T, spec, params)
    ranked = rank(discover(ps, T, method, params), T, spec, topk=1)
    if not ranked:
        return replace(score(None, manifest, method), flag=NO_CHAIN)

    top, top_score = ranked[0]
    report = score(top, manifest, method, WITH_RANKING)
    if not top_score.meaningful:
        report = replace(report, flag=NO_MEANINGFUL_CHAIN)
    return report


def eval_without_ranking(
    method: str,
    T: TimeSeries,
    manifest: Manifest,
    spec: WindowSpec,
    params: Optional[Dict[str, Any]] = None,
) -> EvalReport:
    """
    Grow a chain from each of the last FORCED_STARTS truth starts and keep
    the best-scoring one (the earliest start wins F1 ties).
    """
    params = dict(params or {})
    if spec.l != manifest.window_len:
        raise ValueError(f"window mismatch: spec l={spec.l}, manifest l={manifest.window_len}")
    ps = _profiles(T, spec, params)
    if method == TSC22 and "critical" not in params:
        params["critical"] = critical_nodes(ps)
    if method == TSC20 and "vectors" not in params:
        params["vectors"] = window_vectors(T, spec)

    starts = [s for s in manifest.chain_starts[-FORCED_STARTS:] if s < ps.w]
    if not starts:
        return replace(score(None, manifest, method, WITHOUT_RANKING), flag=NO_CHAIN, trials=0)

    best = None
    for s in starts:
        chain = grow_forced(ps, T, s, method, params)
        report = replace(score(chain, manifest, method, WITHOUT_RANKING), forced_start=s)
        if best is None or report.f1 > best.f1:
            best = report
    return replace(best, trials=len(starts))


def evaluate(method, T, manifest, spec, protocol=WITH_RANKING, params=None) -> EvalReport:
    if protocol == WITH_RANKING:
        return eval_with_ranking(method, T, manifest, spec, params)
    if protocol == WITHOUT_RANKING:
        return eval_without_ranking(method, T, manifest, spec, params)
    raise ValueError(f"unknown protocol '{protocol}' (expected one of {PROTOCOLS})")


def _frame(reports: Iterable[EvalReport]) -> pd.DataFrame:
    rows = [
        {
            "instance": r.instance if r.instance is not None else str(k),
            "method": r.method,
            "recall": r.recall,
            "precision": r.precision,
            "f1": r.f1,
        }
        for k, r in enumerate(reports)
    ]
    return pd.DataFrame(rows, columns=["instance", "method", "recall", "precision", "f1"])


def _wins(frame: pd.DataFrame) -> pd.Series:
    """Per method, the number of instances where its f1 is strictly the greatest."""
    wins = pd.Series(0, index=pd.Index(frame["method"].unique(), name="method"))
    for _, group in frame.groupby("instance", sort=False):
        top = group["f1"].max()
        leaders = group.loc[group["f1"] == top, "method"]
        if len(leaders) == 1 and len(group) > 1:
            wins[leaders.iloc[0]] += 1
    return wins


def aggregate(reports: Sequence[EvalReport]) -> pd.DataFrame:
    """
    Per-method mean recall, precision and F1, plus win counts.

    Reports sharing an instance id are compared for wins; a win needs the
    strictly greatest F1 on that instance.
    """
    if not reports:
        raise ValueError("aggregate needs at least one report")
    frame = _frame(reports)
    summary = frame.groupby("method", sort=False)[["recall", "precision", "f1"]].mean()
    summary["runs"] = frame.groupby("method", sort=False).size()
    summary["wins"] = _wins(frame)
    return summary.reset_index()[["method", "runs", "recall", "precision", "f1", "wins"]]


@dataclass
class SuiteConfig:
    families: Tuple[str, ...] = FAMILIES[:5]
    seeds: Tuple[int, ...] = (0, 1, 2, 3, 4)
    methods: Tuple[str, ...] = METHODS
    protocol: str = WITH_RANKING
    base: GenParams = field(default_factory=GenParams)
    mode: str = "znorm"
    angle: float = 40.0
    workers: int = 1


def run_benchmark(cfg: SuiteConfig, verbose: bool = False) -> Tuple[List[EvalReport], pd.DataFrame]:
    """
    Generate every (family, seed) instance and evaluate each method on it.

    Returns:
        (reports, table): all reports and a family x method table with
        mean recall/precision/f1 and wins, plus "average" rows.
    """
    t0 = time.time()
    spec = WindowSpec(cfg.base.window_len, cfg.mode)
    jobs = [(fam, seed) for fam in cfg.families for seed in cfg.seeds]
    reports: List[EvalReport] = []
    for fam, seed in tqdm(jobs, desc="benchmark", disable=not verbose):
        T, manifest = generate(replace(cfg.base, shape=fam, seed=seed))
        ps = compute_profiles(T, spec, workers=cfg.workers)
        params = {"profiles": ps, "angle": cfg.angle}
        for method in cfg.methods:
            report = evaluate(method, T, manifest, spec, cfg.protocol, params)
            reports.append(replace(report, instance=f"{fam}/{seed}"))
            logging.info(f"{fam}/{seed} {method}: f1={report.f1:.3f}")

    tables = []
    by_family: Dict[str, List[EvalReport]] = {}
    for r in reports:
        by_family.setdefault(r.instance.split("/")[0], []).append(r)
    for fam, rs in by_family.items():
        tables.append(aggregate(rs).assign(family=fam))
    tables.append(aggregate(reports).assign(family="average"))
    table = pd.concat(tables, ignore_index=True)[["family", "method", "runs", "recall", "precision", "f1", "wins"]]
    logging.info(f"Benchmark of {len(jobs)} instances in {format_time_for_display(time.time() - t0)}")
    return reports, table


def mean_f1(table: pd.DataFrame) -> Dict[str, float]:
    avg = table[table["family"] == "average"]
    return {m: float(f) for m, f in zip(avg["method"], avg["f1"])}
