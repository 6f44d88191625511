"""
Core processing logic and main entry point for tschains.
"""

import datetime
import json
import logging
import os
import platform
import sys
import time
from typing import List, Optional, Sequence

from .cli import RunConfig, build_run_config, parse_arguments
from . import system  # live module, not frozen flags
from .benchgen import DEFAULT_WARP, GenParams, Manifest, generate, series_frame
from .chains import Chain, ChainSet, discover
from .evaluation import SuiteConfig, evaluate, mean_f1, run_benchmark
from .oracle import run_verification
from .profiles import compute_profiles, inns_table, profiles_frame
from .ranking import rank
from .series import WindowSpec, load_series
from .utils import (
    format_time_for_display,
    has_handler_of_type,
    read_json,
    to_json,
    with_schema,
    write_csv,
    write_json,
)


class VerificationMismatch(ValueError):
    """Raised when the optimized path disagrees with the oracles."""


# --------------------------------------------------------------------------- #
# Logging helpers
# --------------------------------------------------------------------------- #
def setup_logging():
    logger = logging.getLogger()
    logger.setLevel(logging.INFO)
    log_fmt = logging.Formatter("%(asctime)s %(levelname)s: %(message)s")

    if not has_handler_of_type(logger, logging.StreamHandler):
        ch = logging.StreamHandler()
        ch.setFormatter(log_fmt)
        ch.setLevel(logging.WARNING)
        logger.addHandler(ch)

    return logger, log_fmt


def _set_verbose(logger: logging.Logger) -> None:
    for h in logger.handlers:
        if isinstance(h, logging.StreamHandler) and not isinstance(h, logging.FileHandler):
            h.setLevel(logging.INFO)


def log_file_path(target: str) -> str:
    """target itself, or a host/date-stamped file inside it when it is a directory."""
    if os.path.isdir(target):
        stamp = datetime.datetime.now().strftime("%Y%m%d")
        host = platform.node()
        return os.path.join(target, f"tschains_{host}_{stamp}.log")
    return target


def add_file_handler(logger: logging.Logger, log_fmt: logging.Formatter, target: str) -> str:
    log_file = log_file_path(target)

    # single file handler per path
    fh_id = f"file_handler_{log_file}"
    fh = next(
        (h for h in logger.handlers if getattr(h, "_tschains_id", "") == fh_id), None
    )
    if fh is None:
        fh = logging.FileHandler(log_file, mode="a")
        fh.setFormatter(log_fmt)
        fh.setLevel(logging.INFO)
        fh._tschains_id = fh_id
        logger.addHandler(fh)
    return log_file


def emit_error(name: str, message: str) -> None:
    """One machine-parsable line on stderr."""
    sys.stderr.write(json.dumps({"error": name, "message": message}) + "\n")
    sys.stderr.flush()


# --------------------------------------------------------------------------- #
# Output helpers
# --------------------------------------------------------------------------- #
def _emit_json(doc: dict, path: Optional[str]) -> None:
    if path:
        write_json(path, doc)
    else:
        sys.stdout.write(to_json(with_schema(doc)) + "\n")


def _emit_csv(frame, path: Optional[str]) -> None:
    if path:
        write_csv(path, frame)
    else:
        frame.to_csv(sys.stdout, index=False, float_format="%.17g", lineterminator="\n")


def _column(value: Optional[str]):
    if value is not None and value.isdigit():
        return int(value)
    return value


def _workers(cfg: RunConfig) -> int:
    return cfg.threads if cfg.threads else system.default_workers()


def _spec(cfg: RunConfig) -> WindowSpec:
    return WindowSpec(cfg.window, cfg.mode, cfg.exclusion)


def _chains_doc(ranked) -> List[dict]:
    return [{"nodes": list(c.nodes), "scores": s.to_dict()} for c, s in ranked]


# --------------------------------------------------------------------------- #
# Subcommands
# --------------------------------------------------------------------------- #
def run_profiles(cfg: RunConfig) -> None:
    T = load_series(cfg.input, cfg.fmt, _column(cfg.column))
    spec = _spec(cfg)
    ps = compute_profiles(T, spec, workers=_workers(cfg), max_inns_total=cfg.max_inns)
    _emit_csv(profiles_frame(ps), cfg.output)
    if cfg.inns:
        write_json(cfg.inns, {
            "window": spec.l,
            "mode": spec.mode,
            "exclusion": spec.exclusion,
            "inns": inns_table(ps),
        })


def run_discover(cfg: RunConfig) -> None:
    T = load_series(cfg.input, cfg.fmt, _column(cfg.column))
    spec = _spec(cfg)
    ps = compute_profiles(T, spec, workers=_workers(cfg), max_inns_total=cfg.max_inns)
    params = {"angle": cfg.angle, "max_candidates": cfg.max_candidates}
    cs = discover(ps, T, cfg.method, params)
    ranked = rank(cs, T, spec, cfg.topk)
    _emit_json({
        "method": cs.method,
        "window": spec.l,
        "mode": spec.mode,
        "exclusion": spec.exclusion,
        "params": cs.params,
        "maximalCount": len(cs.maximal),
        "candidateCount": len(cs.candidates),
        "chains": _chains_doc(ranked),
    }, cfg.output)


def run_rank(cfg: RunConfig) -> None:
    doc = read_json(cfg.input)
    for key in ("method", "window", "chains"):
        if key not in doc:
            raise ValueError(f"discovery JSON {cfg.input} lacks '{key}'")
    T = load_series(cfg.series, cfg.fmt, _column(cfg.column))
    spec = WindowSpec(int(doc["window"]), doc.get("mode", "znorm"), doc.get("exclusion"))
    method = doc["method"]
    chains = tuple(Chain(method, tuple(c["nodes"]), spec.l) for c in doc["chains"])
    for c in chains:
        if c.nodes[-1] >= spec.windows(T):
            raise IndexError(f"chain node {c.nodes[-1]} outside the series ({spec.windows(T)} windows)")
    cs = ChainSet(method=method, maximal=(), candidates=chains, spec=spec, params=doc.get("params", {}))
    ranked = rank(cs, T, spec, cfg.topk)
    out = dict(doc)
    out["chains"] = _chains_doc(ranked)
    _emit_json(out, cfg.output)


def _gen_params(cfg: RunConfig, **overrides) -> GenParams:
    s = cfg.suite
    params = GenParams(
        window_len=s["window"],
        core_pad_len=s["core_len"],
        head_pad_len=s["head_len"],
        tail_pad_len=s["tail_len"],
        seed=cfg.seed,
        **overrides,
    )
    return params.full_scale() if s.get("full_scale") else params


def run_synth(cfg: RunConfig) -> None:
    s = cfg.suite
    ucr_class = _column(s["ucr_class"])
    params = _gen_params(
        cfg,
        node_count=s["nodes"],
        distractor_count=s["distractors"],
        shape=s["shape"],
        ucr_path=s["ucr"],
        ucr_class=ucr_class,
        noise_amp=s["noise"],
        warp=s.get("warp", DEFAULT_WARP),
    )
    T, manifest = generate(params)
    write_csv(cfg.output, series_frame(T))
    manifest.save(cfg.manifest)


def run_eval(cfg: RunConfig) -> None:
    T = load_series(cfg.series)
    manifest = Manifest.load(cfg.manifest)
    spec = WindowSpec(manifest.window_len, cfg.mode)
    params = {"angle": cfg.angle, "workers": _workers(cfg)}
    report = evaluate(cfg.method, T, manifest, spec, cfg.protocol, params)
    _emit_json(report.to_dict(), cfg.output)


def run_bench(cfg: RunConfig) -> None:
    s = cfg.suite
    suite = SuiteConfig(
        families=s["families"],
        seeds=tuple(range(s["seeds"])),
        methods=s["methods"],
        protocol=cfg.protocol,
        base=_gen_params(cfg),
        mode=cfg.mode,
        angle=cfg.angle,
        workers=_workers(cfg),
    )
    stop_evt, mon_thr = system.start_monitor(s["monitoring_interval"])
    try:
        _, table = run_benchmark(suite, verbose=cfg.verbose)
    finally:
        stop_evt.set()
        mon_thr.join()
    for method, f1 in mean_f1(table).items():
        logging.info(f"mean F1 {method}: {f1:.3f}")
    _emit_csv(table, cfg.output)


def run_verify(cfg: RunConfig) -> None:
    report = run_verification(n=cfg.suite["n"], trials=cfg.suite["trials"], seed=cfg.seed)
    _emit_json(report, cfg.output)
    if not report["ok"]:
        first = report["mismatches"][0]
        raise VerificationMismatch(
            f"{len(report['mismatches'])} mismatches, first: {first['check']}/{first['field']} "
            f"(mode={first['mode']}, window={first['window']}, trial={first['trial']})"
        )


COMMANDS = {
    "profiles": run_profiles,
    "discover": run_discover,
    "rank": run_rank,
    "synth": run_synth,
    "eval": run_eval,
    "bench": run_bench,
    "verify": run_verify,
}


# --------------------------------------------------------------------------- #
# Main
# --------------------------------------------------------------------------- #
def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        logger, log_fmt = setup_logging()
        try:
            args = parse_arguments(argv)
        except SystemExit as e:
            if e.code is None:
                return 0
            return e.code if isinstance(e.code, int) else 2
        cfg = build_run_config(args)

        if cfg.verbose:
            logger.setLevel(logging.INFO)
            _set_verbose(logger)

        system.initialize_system_checks(verbose=cfg.verbose)

        if cfg.log_file:
            log_file = add_file_handler(logger, log_fmt, cfg.log_file)
            logging.info(f"Log file: {log_file}")
            logging.info(f"System: {platform.system()} {platform.release()}")
            logging.info(f"Python: {platform.python_version()}")

        t0 = time.time()
        COMMANDS[cfg.command](cfg)
        logging.info(f"{cfg.command} finished in {format_time_for_display(time.time() - t0)}")
        return 0

    except KeyboardInterrupt:
        logging.info("Interrupted by user.")
        return 130
    except (ValueError, OSError, IndexError) as e:
        logging.info(f"{type(e).__name__}: {e}")
        emit_error(type(e).__name__, str(e))
        return 1
    except Exception as e:
        logging.exception("Unhandled exception")
        emit_error(type(e).__name__, str(e))
        return 1


if __name__ == "__main__":
    sys.exit(main())
