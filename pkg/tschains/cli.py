"""
Command-line interface module for tschains.

This module handles argument parsing and CLI configuration.
"""

import argparse
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence

from .benchgen import DEFAULT_WARP, FAMILIES
from .chains import DEFAULT_ANGLE, DEFAULT_MAX_CANDIDATES, METHODS
from .series import MODES, ZNORM

COMMANDS = ("profiles", "discover", "rank", "synth", "eval", "bench", "verify")
PROTOCOL_FLAGS = {"rank": "with-ranking", "norank": "without-ranking"}


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Optional[str] = None
    output: Optional[str] = None
    fmt: str = "plain"
    column: Optional[str] = None
    window: Optional[int] = None
    mode: str = ZNORM
    exclusion: Optional[int] = None
    method: Optional[str] = None
    angle: float = DEFAULT_ANGLE
    topk: int = 10
    max_candidates: Optional[int] = DEFAULT_MAX_CANDIDATES
    max_inns: Optional[int] = None
    seed: int = 0
    series: Optional[str] = None
    manifest: Optional[str] = None
    protocol: str = "with-ranking"
    threads: Optional[int] = None
    verbose: bool = False
    log_file: Optional[str] = None
    inns: Optional[str] = None
    suite: Dict[str, Any] = field(default_factory=dict)


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return n


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--verbose', '-v', action='store_true',
                        help='Enable verbose logging output')
    common.add_argument('--log-file', type=str, default=None,
                        help='Also log to this file (if a directory is specified, \
                              the file name is generated using host and date)')
    common.add_argument('--threads', type=int, default=None,
                        help='Worker threads for profile computation (default: physical cores)')

    window = argparse.ArgumentParser(add_help=False)
    window.add_argument('--window', '-l', type=int, default=None,
                        help='Subsequence length l')
    window.add_argument('--mode', choices=MODES, default=ZNORM,
                        help='Distance mode (default: znorm)')
    window.add_argument('--exclusion', type=int, default=None,
                        help='Exclusion radius (default: ceil(l/2))')

    series_in = argparse.ArgumentParser(add_help=False)
    series_in.add_argument('--input', '-i', type=str, required=True,
                           help='Series file: one value per line (optional "value" header) or CSV')
    series_in.add_argument('--format', dest='fmt', choices=('plain', 'csv'), default='plain',
                           help='Input layout (default: plain)')
    series_in.add_argument('--column', type=str, default=None,
                           help='CSV column name or 0-based position')

    parser = argparse.ArgumentParser(
        prog='tschains',
        description='Discover, rank and evaluate time series chains',
    )
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    p = sub.add_parser('profiles', parents=[common, window, series_in],
                       help='Left/right matrix profiles and INNS')
    p.add_argument('--out', '-o', type=str, default=None, help='Profiles CSV (default: stdout)')
    p.add_argument('--inns', type=str, default=None, help='Also write the INNS table as JSON')
    p.add_argument('--max-inns', type=_positive, default=None, help='Abort past this many INNS entries')

    p = sub.add_parser('discover', parents=[common, window, series_in],
                       help='Discover and rank chains')
    p.add_argument('--method', choices=METHODS, default='tsc22', help='Chain definition')
    p.add_argument('--angle', type=float, default=DEFAULT_ANGLE, help='tsc20 angle threshold in degrees')
    p.add_argument('--topk', type=int, default=10, help='Chains to report')
    p.add_argument('--max-candidates', type=_positive, default=DEFAULT_MAX_CANDIDATES,
                   help='Candidate cap (longest kept)')
    p.add_argument('--max-inns', type=_positive, default=None, help='Abort past this many INNS entries')
    p.add_argument('--out', '-o', type=str, default=None, help='Discovery JSON (default: stdout)')

    p = sub.add_parser('rank', parents=[common],
                       help='Score and order the chains of a discovery JSON')
    p.add_argument('--input', '-i', type=str, required=True, help='Discovery JSON')
    p.add_argument('--series', type=str, required=True, help='Series the chains were found in')
    p.add_argument('--format', dest='fmt', choices=('plain', 'csv'), default='plain')
    p.add_argument('--column', type=str, default=None)
    p.add_argument('--topk', type=int, default=10, help='Chains to keep')
    p.add_argument('--out', '-o', type=str, default=None, help='Ranked JSON (default: stdout)')

    p = sub.add_parser('synth', parents=[common], help='Generate a benchmark series')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--nodes', type=int, default=10, help='Chain nodes')
    p.add_argument('--window', '-l', type=int, default=100, help='Pattern length')
    p.add_argument('--distractors', type=int, default=10)
    p.add_argument('--shape', choices=FAMILIES, default='sine', help='Built-in start pattern family')
    p.add_argument('--ucr', type=str, default=None, help='UCR-format file to draw patterns from')
    p.add_argument('--ucr-class', type=str, default=None, help='UCR class of the start pattern')
    p.add_argument('--noise', type=float, default=0.1, help='Additive noise amplitude')
    p.add_argument('--warp', type=float, default=DEFAULT_WARP,
                   help='Largest time shift of a node instance, as a fraction of the pattern length')
    p.add_argument('--core-len', type=int, default=8000)
    p.add_argument('--head-len', type=int, default=4000)
    p.add_argument('--tail-len', type=int, default=4000)
    p.add_argument('--full-scale', action='store_true', help='Use the 20000/20000/20000 layout')
    p.add_argument('--out', '-o', type=str, required=True, help='Series CSV')
    p.add_argument('--manifest', type=str, required=True, help='Manifest JSON')

    p = sub.add_parser('eval', parents=[common], help='Score one method against a manifest')
    p.add_argument('--series', type=str, required=True)
    p.add_argument('--manifest', type=str, required=True)
    p.add_argument('--method', choices=METHODS, required=True)
    p.add_argument('--protocol', choices=tuple(PROTOCOL_FLAGS), default='rank')
    p.add_argument('--mode', choices=MODES, default=ZNORM)
    p.add_argument('--angle', type=float, default=DEFAULT_ANGLE)
    p.add_argument('--out', '-o', type=str, default=None, help='Report JSON (default: stdout)')

    p = sub.add_parser('bench', parents=[common], help='Run the seeded benchmark suite')
    p.add_argument('--families', nargs='+', choices=FAMILIES, default=list(FAMILIES[:5]))
    p.add_argument('--seeds', type=_positive, default=5, help='Seeds 0..N-1 per family')
    p.add_argument('--methods', nargs='+', choices=METHODS, default=list(METHODS))
    p.add_argument('--protocol', choices=tuple(PROTOCOL_FLAGS), default='rank')
    p.add_argument('--mode', choices=MODES, default=ZNORM)
    p.add_argument('--angle', type=float, default=DEFAULT_ANGLE)
    p.add_argument('--window', '-l', type=int, default=100)
    p.add_argument('--core-len', type=int, default=8000)
    p.add_argument('--head-len', type=int, default=4000)
    p.add_argument('--tail-len', type=int, default=4000)
    p.add_argument('--full-scale', action='store_true')
    p.add_argument('--monitoring-interval', type=float, default=10.0,
                   help='Seconds between resource samples')
    p.add_argument('--out', '-o', type=str, default=None, help='Table CSV (default: stdout)')

    p = sub.add_parser('verify', parents=[common], help='Cross-check against brute-force oracles')
    p.add_argument('--n', type=int, default=64, help='Largest random series length')
    p.add_argument('--trials', type=_positive, default=200, help='Instances per configuration')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out', '-o', type=str, default=None, help='Report JSON (default: stdout)')

    return parser


def _validate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be at least 1")

    if args.command in ("profiles", "discover"):
        if args.window is None:
            parser.error(f"{args.command} requires --window")
        if args.window < 1:
            parser.error("--window must be at least 1")
        if args.mode == ZNORM and args.window < 3:
            parser.error("znorm mode requires --window of at least 3 (use --mode raw for shorter windows)")
        if args.exclusion is not None and args.exclusion < 1:
            parser.error("--exclusion must be at least 1")

    if args.command in ("discover", "eval", "bench"):
        if not 0 < args.angle <= 180:
            parser.error("--angle must lie in (0, 180]")

    if args.command in ("discover", "rank") and args.topk < 1:
        parser.error("--topk must be at least 1")

    if args.command == "synth":
        if args.nodes < 2:
            parser.error("--nodes must be at least 2")
        if args.window < 2:
            parser.error("--window must be at least 2")
        if args.distractors < 0:
            parser.error("--distractors must be non-negative")
        if args.noise < 0:
            parser.error("--noise must be non-negative")
        if not 0 <= args.warp < 0.5:
            parser.error("--warp must lie in [0, 0.5)")
        if args.seed < 0:
            parser.error("--seed must be non-negative")
        if args.ucr_class is not None and args.ucr is None:
            parser.error("--ucr-class requires --ucr")

    if args.command == "bench":
        if args.window < 3 and args.mode == ZNORM:
            parser.error("znorm mode requires --window of at least 3")
        if args.monitoring_interval <= 0:
            parser.error("--monitoring-interval must be positive")

    if args.command == "verify" and args.n < 16:
        parser.error("--n must be at least 16")


def parse_arguments(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """
    Parses command-line arguments.

    Args:
        argv: argument list without the program name (default: sys.argv[1:]).

    Returns:
        argparse.Namespace: An object containing the parsed arguments.
    """
    parser = _build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    return args


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Freeze a validated namespace into a RunConfig."""
    def get(name, default=None):
        return getattr(args, name, default)

    cmd = args.command

    suite: Dict[str, Any] = {}
    if cmd in ("synth", "bench"):
        suite = {
            "window": args.window,
            "core_len": args.core_len,
            "head_len": args.head_len,
            "tail_len": args.tail_len,
            "full_scale": args.full_scale,
        }
    if cmd == "synth":
        suite.update(
            nodes=args.nodes,
            distractors=args.distractors,
            shape=args.shape,
            ucr=args.ucr,
            ucr_class=args.ucr_class,
            noise=args.noise,
            warp=args.warp,
        )
    elif cmd == "bench":
        suite.update(
            families=tuple(args.families),
            seeds=args.seeds,
            methods=tuple(args.methods),
            monitoring_interval=args.monitoring_interval,
        )
    elif cmd == "verify":
        suite = {"n": args.n, "trials": args.trials}

    protocol = get("protocol")
    return RunConfig(
        command=cmd,
        input=get("input"),
        output=get("out"),
        fmt=get("fmt", "plain"),
        column=get("column"),
        window=get("window") if cmd in ("profiles", "discover") else None,
        mode=get("mode", ZNORM),
        exclusion=get("exclusion"),
        method=get("method"),
        angle=get("angle", DEFAULT_ANGLE),
        topk=get("topk", 10),
        max_candidates=get("max_candidates", DEFAULT_MAX_CANDIDATES),
        max_inns=get("max_inns"),
        seed=get("seed", 0),
        series=get("series"),
        manifest=get("manifest"),
        protocol=PROTOCOL_FLAGS.get(protocol, "with-ranking") if protocol else "with-ranking",
        threads=args.threads,
        verbose=args.verbose,
        log_file=args.log_file,
        inns=get("inns"),
        suite=suite,
    )
