"""
Seeded synthetic benchmark series with an embedded evolving chain.

Layout of a generated series:

    [head pad | core | tail pad]

The core is uniform background noise into which m chain nodes and a number
of distractor patterns are written at random non-overlapping positions.
Node k is (1 - a) * P_k + a * RW with a = k / (m - 1): RW a random walk and
P_k an instance of the start pattern, both z-normalized first. Instances
differ the way members of one class do: UCR nodes each take their own
instance of the class, and every instance is smoothly time-warped by up to
warp * l samples. Distractors come from the other families (other classes
for UCR input). Additive uniform noise is then applied across the core.

Randomness: numpy PCG64 generators spawned from SeedSequence(seed), one
stream per role in STREAMS order.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .series import SeriesParseError, TimeSeries, znormalize
from .utils import read_json, write_json

FAMILIES = ("sine", "bump", "cylinder", "bell", "funnel", "two_peak")
STREAMS = ("shape", "walk", "placement", "noise", "distractors")
RNG_DESCRIPTION = "numpy PCG64 via SeedSequence(seed).spawn(5): " + ", ".join(STREAMS)
NOISE_DESCRIPTION = "uniform"

DEFAULT_WARP = 0.03
# low-frequency sine modes summed into a time warp
WARP_MODES = 4


@dataclass(frozen=True)
class GenParams:
    node_count: int = 10
    window_len: int = 100
    core_pad_len: int = 8000
    head_pad_len: int = 4000
    tail_pad_len: int = 4000
    noise_amp: float = 0.1
    distractor_count: int = 10
    shape: str = "sine"
    ucr_path: Optional[str] = None
    ucr_class: Optional[Union[int, str]] = None
    seed: int = 0
    background_amp: float = 1.0
    warp: float = DEFAULT_WARP

    def __post_init__(self):
        if self.node_count < 2:
            raise ValueError("node_count must be at least 2")
        if self.window_len < 2:
            raise ValueError("window_len must be at least 2")
        for name in ("core_pad_len", "head_pad_len", "tail_pad_len"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.distractor_count < 0:
            raise ValueError("distractor_count must be non-negative")
        if self.noise_amp < 0 or self.background_amp < 0:
            raise ValueError("noise amplitudes must be non-negative")
        if not 0.0 <= self.warp < 0.5:
            raise ValueError(f"warp must lie in [0, 0.5), got {self.warp}")
        if self.ucr_path is None and self.shape not in FAMILIES:
            raise ValueError(f"unknown shape family '{self.shape}' (expected one of {FAMILIES})")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def min_gap(self) -> int:
        return self.window_len // 2

    def full_scale(self) -> "GenParams":
        """Same parameters on the 20000/20000/20000 layout."""
        return replace(self, core_pad_len=20000, head_pad_len=20000, tail_pad_len=20000)

    def to_dict(self) -> Dict:
        return {
            "nodeCount": self.node_count,
            "windowLen": self.window_len,
            "corePadLen": self.core_pad_len,
            "headPadLen": self.head_pad_len,
            "tailPadLen": self.tail_pad_len,
            "noiseAmp": self.noise_amp,
            "backgroundAmp": self.background_amp,
            "warp": self.warp,
            "distractorCount": self.distractor_count,
            "shape": self.shape,
            "ucrPath": self.ucr_path,
            "ucrClass": self.ucr_class,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: Dict) -> "GenParams":
        return cls(
            node_count=int(d["nodeCount"]),
            window_len=int(d["windowLen"]),
            core_pad_len=int(d["corePadLen"]),
            head_pad_len=int(d["headPadLen"]),
            tail_pad_len=int(d["tailPadLen"]),
            noise_amp=float(d["noiseAmp"]),
            background_amp=float(d.get("backgroundAmp", 1.0)),
            warp=float(d.get("warp", DEFAULT_WARP)),
            distractor_count=int(d["distractorCount"]),
            shape=d.get("shape", "sine"),
            ucr_path=d.get("ucrPath"),
            ucr_class=d.get("ucrClass"),
            seed=int(d["seed"]),
        )


@dataclass(frozen=True)
class Manifest:
    """Ground truth for one generated series; all positions 0-based."""

    window_len: int
    chain_starts: Tuple[int, ...]
    distractor_starts: Tuple[int, ...]
    seed: int
    params: Dict = field(default_factory=dict, compare=False)
    rng: str = RNG_DESCRIPTION
    noise: str = NOISE_DESCRIPTION

    def __post_init__(self):
        object.__setattr__(self, "chain_starts", tuple(int(s) for s in self.chain_starts))
        object.__setattr__(self, "distractor_starts", tuple(int(s) for s in self.distractor_starts))
        l = self.window_len
        if any(b - a < l for a, b in zip(self.chain_starts, self.chain_starts[1:])):
            raise ValueError("chain starts must increase with gaps of at least the window length")
        for c in self.chain_starts:
            for d in self.distractor_starts:
                if abs(c - d) < l:
                    raise ValueError(f"distractor at {d} overlaps chain node at {c}")

    def to_dict(self) -> Dict:
        return {
            "windowLen": self.window_len,
            "chainStarts": list(self.chain_starts),
            "distractorStarts": list(self.distractor_starts),
            "seed": self.seed,
            "rng": self.rng,
            "noise": self.noise,
            "params": dict(self.params),
        }

    @classmethod
    def from_dict(cls, d: Dict) -> "Manifest":
        return cls(
            window_len=int(d["windowLen"]),
            chain_starts=tuple(d["chainStarts"]),
            distractor_starts=tuple(d.get("distractorStarts", ())),
            seed=int(d.get("seed", 0)),
            params=dict(d.get("params", {})),
            rng=d.get("rng", RNG_DESCRIPTION),
            noise=d.get("noise", NOISE_DESCRIPTION),
        )

    def save(self, path: str) -> None:
        write_json(path, self.to_dict())

    @classmethod
    def load(cls, path: str) -> "Manifest":
        return cls.from_dict(read_json(path))


# --------------------------------------------------------------------------- #
# Shapes
# --------------------------------------------------------------------------- #
def _cbf_support(l: int, rng: np.random.Generator) -> Tuple[np.ndarray, float, float, float]:
    t = np.arange(l, dtype=np.float64)
    a = rng.uniform(l / 8, l / 4)
    b = rng.uniform(0.7 * l, 0.95 * l)
    height = 6.0 + rng.standard_normal()
    return t, a, b, height


def sample_shape(family: str, l: int, rng: np.random.Generator) -> np.ndarray:
    """
    Draw one z-normalized pattern of length l from a built-in family.

    Families: sine (one full period, random phase), bump (smooth plateau),
    cylinder / bell / funnel (CBF-style), two_peak (two Gaussian bumps).
    """
    if l < 2:
        raise ValueError("pattern length must be at least 2")
    t = np.arange(l, dtype=np.float64)

    if family == "sine":
        phase = rng.uniform(0.0, 2.0 * np.pi)
        x = np.sin(2.0 * np.pi * t / l + phase)
    elif family == "bump":
        a = rng.uniform(l / 8, l / 4)
        b = rng.uniform(0.6 * l, 0.85 * l)
        s = max(l / 50.0, 0.5) * rng.uniform(0.8, 1.25)
        x = np.tanh((t - a) / s) - np.tanh((t - b) / s)
    elif family in ("cylinder", "bell", "funnel"):
        t, a, b, height = _cbf_support(l, rng)
        inside = ((t >= a) & (t <= b)).astype(np.float64)
        if family == "cylinder":
            x = height * inside
        elif family == "bell":
            x = height * inside * (t - a) / (b - a)
        else:
            x = height * inside * (b - t) / (b - a)
    elif family == "two_peak":
        c1 = rng.uniform(0.2 * l, 0.35 * l)
        c2 = rng.uniform(0.65 * l, 0.8 * l)
        w1, w2 = rng.uniform(l / 20, l / 10, size=2)
        h2 = rng.uniform(0.6, 1.0)
        x = np.exp(-0.5 * ((t - c1) / w1) ** 2) + h2 * np.exp(-0.5 * ((t - c2) / w2) ** 2)
    else:
        raise ValueError(f"unknown shape family '{family}' (expected one of {FAMILIES})")
    return znormalize(x)


def sample_distractor(shape: str, l: int, rng: np.random.Generator) -> Tuple[str, np.ndarray]:
    """A pattern from a built-in family other than shape, with its family name."""
    others = [f for f in FAMILIES if f != shape]
    family = others[int(rng.integers(len(others)))]
    return family, sample_shape(family, l, rng)


def warp_instance(pattern: np.ndarray, strength: float, rng: np.random.Generator) -> np.ndarray:
    """
    A smoothly time-warped, z-normalized copy of pattern.

    Sample positions move by at most strength * l following a random sum of
    WARP_MODES half-sine modes, which keeps both ends in place.
    """
    pattern = np.asarray(pattern, dtype=np.float64)
    if strength == 0.0:
        return pattern.copy()
    l = pattern.size
    t = np.arange(l, dtype=np.float64)
    k = np.arange(1, WARP_MODES + 1)
    weights = rng.standard_normal(WARP_MODES) / k
    shift = np.sin(np.pi * np.outer(t / (l - 1), k)) @ weights
    peak = np.abs(shift).max()
    if peak > 0:
        shift *= strength * l / peak
    return znormalize(np.interp(np.clip(t + shift, 0, l - 1), t, pattern))


def random_walk(l: int, rng: np.random.Generator) -> np.ndarray:
    return znormalize(np.cumsum(rng.standard_normal(l)))


def evolving_nodes(start: np.ndarray, end: np.ndarray, m: int) -> np.ndarray:
    """
    (m, l) array of nodes interpolating linearly from start to end.

    start is one pattern, or an (m, l) array with the start instance each
    node mixes from.
    """
    end = np.asarray(end, dtype=np.float64)
    starts = np.broadcast_to(np.asarray(start, dtype=np.float64), (m, end.size))
    alphas = np.arange(m, dtype=np.float64) / (m - 1)
    nodes = (1.0 - alphas)[:, None] * starts + alphas[:, None] * end[None, :]
    # pin the endpoints exactly
    nodes[0] = starts[0]
    nodes[-1] = end
    return nodes


# --------------------------------------------------------------------------- #
# UCR archive
# --------------------------------------------------------------------------- #
def _label(token: str):
    value = float(token)
    return int(value) if value.is_integer() else value


def load_ucr(path: str) -> List[Tuple[Union[int, float], np.ndarray]]:
    """
    Read a UCR-format file: one instance per line, label first, values
    separated by whitespace or commas. Trailing NaN padding is dropped.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()

    instances = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        tokens = pd.Series(line.replace(",", " ").split())
        values = pd.to_numeric(tokens, errors="coerce").to_numpy(dtype=np.float64)
        if values.size < 2 or np.isnan(values[0]):
            raise SeriesParseError(f"line {lineno}: malformed UCR record")
        body = values[1:]
        bad = np.flatnonzero(np.isnan(body) & ~tokens.iloc[1:].str.lower().eq("nan").to_numpy())
        if bad.size:
            raise SeriesParseError(f"line {lineno}: invalid value '{tokens.iloc[bad[0] + 1]}'")
        finite = np.flatnonzero(~np.isnan(body))
        if finite.size == 0:
            raise SeriesParseError(f"line {lineno}: no values")
        instances.append((_label(tokens.iloc[0]), body[: finite[-1] + 1]))
    logging.info(f"Loaded {len(instances)} UCR instances from {path}")
    return instances


def _resample(x: np.ndarray, l: int) -> np.ndarray:
    x = x[~np.isnan(x)]
    if x.size == l:
        return znormalize(x)
    src = np.linspace(0.0, 1.0, x.size)
    dst = np.linspace(0.0, 1.0, l)
    return znormalize(np.interp(dst, src, x))


class _UcrSource:
    """Start instances from one class, distractors from the others when present."""

    def __init__(self, path: str, cls, l: int):
        instances = load_ucr(path)
        if not instances:
            raise ValueError(f"UCR file {path} holds no instances")
        if cls is None:
            cls = instances[0][0]
        self.same = [x for lab, x in instances if str(lab) == str(cls)]
        if not self.same:
            raise ValueError(f"class {cls} not present in {path}")
        self.other = [x for lab, x in instances if str(lab) != str(cls)] or self.same
        self.l = l

    def start(self, rng: np.random.Generator) -> np.ndarray:
        return _resample(self.same[int(rng.integers(len(self.same)))], self.l)

    def distractor(self, rng: np.random.Generator) -> np.ndarray:
        return _resample(self.other[int(rng.integers(len(self.other)))], self.l)


# --------------------------------------------------------------------------- #
# Generation
# --------------------------------------------------------------------------- #
def spawn_streams(seed: int) -> Dict[str, np.random.Generator]:
    children = np.random.SeedSequence(int(seed)).spawn(len(STREAMS))
    return {name: np.random.Generator(np.random.PCG64(ss)) for name, ss in zip(STREAMS, children)}


def place_patterns(core_len: int, count: int, l: int, min_gap: int, rng: np.random.Generator) -> np.ndarray:
    """
    Random non-overlapping starts for count patterns of length l inside
    [0, core_len), at least min_gap samples apart.
    """
    required = count * l + (count - 1) * min_gap
    slack = core_len - required
    if slack < 0:
        raise ValueError(
            f"core too short: {core_len} samples cannot hold {count} patterns of length {l} "
            f"with gap {min_gap} (need {required})"
        )
    cuts = np.sort(rng.integers(0, slack + 1, size=count))
    # extra[k] is the slack placed before pattern k
    extra = np.diff(np.concatenate(([0], cuts)))
    offsets = np.arange(count) * (l + min_gap)
    return offsets + np.cumsum(extra)


def generate(params: GenParams) -> Tuple[TimeSeries, Manifest]:
    """
    Build a benchmark series and its ground truth.

    Args:
        params (GenParams): layout, pattern source and seed.

    Returns:
        (TimeSeries, Manifest): the series and the embedded positions.
    """
    rngs = spawn_streams(params.seed)
    l, m, k = params.window_len, params.node_count, params.distractor_count

    shape_rng = rngs["shape"]
    if params.ucr_path is not None:
        source = _UcrSource(params.ucr_path, params.ucr_class, l)
        instances = [source.start(shape_rng) for _ in range(m)]
        distractors = [source.distractor(rngs["distractors"]) for _ in range(k)]
    else:
        instances = [sample_shape(params.shape, l, shape_rng)] * m
        distractors = [sample_distractor(params.shape, l, rngs["distractors"])[1] for _ in range(k)]
    instances = np.vstack([warp_instance(p, params.warp, shape_rng) for p in instances])
    nodes = evolving_nodes(instances, random_walk(l, rngs["walk"]), m)

    placement = rngs["placement"]
    slots = place_patterns(params.core_pad_len, m + k, l, params.min_gap, placement)
    roles = placement.permutation(m + k)
    chain_slots = np.sort(slots[roles < m])
    distractor_slots = np.sort(slots[roles >= m])

    noise = rngs["noise"]
    amp = params.background_amp
    core = noise.uniform(-amp, amp, size=params.core_pad_len)
    for node, s in zip(nodes, chain_slots):
        core[s:s + l] = node
    for pattern, s in zip(distractors, distractor_slots):
        core[s:s + l] = pattern
    core += noise.uniform(-params.noise_amp, params.noise_amp, size=core.size)
    head = noise.uniform(-amp, amp, size=params.head_pad_len)
    tail = noise.uniform(-amp, amp, size=params.tail_pad_len)

    values = np.concatenate((head, core, tail))
    offset = params.head_pad_len
    manifest = Manifest(
        window_len=l,
        chain_starts=tuple(int(s) + offset for s in chain_slots),
        distractor_starts=tuple(int(s) + offset for s in distractor_slots),
        seed=int(params.seed),
        params=params.to_dict(),
    )
    logging.info(
        f"Generated {values.size} samples (shape={params.shape if params.ucr_path is None else 'ucr'}, "
        f"seed={params.seed}): {m} nodes, {k} distractors"
    )
    return TimeSeries(values), manifest


def series_frame(T: TimeSeries) -> pd.DataFrame:
    return pd.DataFrame({"value": T.values})
