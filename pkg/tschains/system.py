"""
System capability detection and resource monitoring.

This module handles:
- Optional psutil import (physical core count, CPU/RSS sampling)
- Default worker count for profile computation
- Resource monitoring while a benchmark runs
"""

import logging
import os
import threading
import time

# Global state variables
psutil_available = False

# Module references
psutil = None


def initialize_system_checks(verbose=False):
    """
    Initialize system capability checks.

    Args:
        verbose (bool): Whether to show detailed information messages
    """
    global psutil_available, psutil

    log_level = logging.INFO if verbose else logging.DEBUG

    try:
        import psutil as _psutil
        psutil = _psutil
        psutil_available = True
    except ImportError:
        logging.log(log_level, "psutil not available. Core detection and CPU monitoring will be limited.")
        psutil = None
        psutil_available = False


def default_workers() -> int:
    """Physical core count, falling back to logical cores and then 1."""
    if psutil_available:
        try:
            cores = psutil.cpu_count(logical=False)
            if cores:
                return int(cores)
        except Exception as e:
            logging.debug(f"Could not query physical cores: {e}")
    return os.cpu_count() or 1


def monitor_resources(stop_event: threading.Event, interval: float) -> None:
    """
    Samples CPU utilisation and process memory at regular intervals and
    logs avg/min/max when stop_event is set.

    Args:
        stop_event (threading.Event): Event to signal the monitoring to stop.
        interval (float): Seconds between samples.
    """
    cpu_usage_data = []
    rss_data = []

    if not psutil_available:
        logging.info("psutil not available, resource monitoring disabled")
        stop_event.wait()
        return

    proc = psutil.Process(os.getpid())

    def sample_resources():
        try:
            cpu_usage_data.append(psutil.cpu_percent(interval=None))
            rss_data.append(proc.memory_info().rss / (1024 ** 2))
        except Exception as e:
            logging.warning(f"Error monitoring resources: {str(e)}")

    sample_resources()
    logging.debug("Initial resource sample taken")

    start = time.time()
    while not stop_event.wait(interval):
        sample_resources()

    logging.info(f"Resource usage statistics over {time.time() - start:.2f} s:")
    if cpu_usage_data:
        cpu_avg = sum(cpu_usage_data) / len(cpu_usage_data)
        logging.info(
            f"CPU Usage: Avg={cpu_avg:.2f}%, Min={min(cpu_usage_data):.2f}%, Max={max(cpu_usage_data):.2f}%"
        )
    if rss_data:
        rss_avg = sum(rss_data) / len(rss_data)
        logging.info(f"Memory (RSS): Avg={rss_avg:.1f} MB, Max={max(rss_data):.1f} MB")


def start_monitor(interval: float):
    """Start monitor_resources on a daemon thread; returns (stop_event, thread)."""
    stop_evt = threading.Event()
    mon_thr = threading.Thread(target=monitor_resources, args=(stop_evt, interval), daemon=True)
    mon_thr.start()
    return stop_evt, mon_thr
