"""Solvers for the time-critical testing and search problems."""

from tctp.core import (
    Bounds,
    Instance,
    InstanceError,
    InvalidScheduleError,
    Schedule,
    Variant,
    evaluate,
    global_bounds,
    make_schedule,
    pad_to_full,
    set_ratio,
    sort_by_ratio,
    validate,
)

__version__ = "0.1.0"
