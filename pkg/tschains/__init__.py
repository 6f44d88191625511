"""
tschains - Discover, rank and evaluate evolving-pattern chains in time series.
"""

__version__ = "0.1.0"

# Import key functions to make them available at package level
# Note: We import only essential functions to avoid circular imports

__all__ = [
    "main",
    "parse_arguments",
    "load_series",
    "compute_profiles",
    "discover",
    "rank",
    "generate",
    "format_time_for_display",
]

# Import main function
def main(argv=None):
    from .core import main as _main
    return _main(argv)

# Import other functions on demand to avoid circular imports
def parse_arguments(argv=None):
    from .cli import parse_arguments as _parse_arguments
    return _parse_arguments(argv)

def load_series(source, fmt="plain", column=None):
    from .series import load_series as _load_series
    return _load_series(source, fmt, column)

def compute_profiles(T, spec, workers=1, max_inns_total=None):
    from .profiles import compute_profiles as _compute_profiles
    return _compute_profiles(T, spec, workers=workers, max_inns_total=max_inns_total)

def discover(ps, T, method, params=None):
    from .chains import discover as _discover
    return _discover(ps, T, method, params)

def rank(cands, T, spec, topk=None):
    from .ranking import rank as _rank
    return _rank(cands, T, spec, topk)

def generate(params):
    from .benchgen import generate as _generate
    return _generate(params)

def format_time_for_display(seconds):
    from .utils import format_time_for_display as _format_time_for_display
    return _format_time_for_display(seconds)
