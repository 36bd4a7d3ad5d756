# __init__.py
#
# @date 26-10-18
#

from .commands import (
    EXIT_FAILURE,
    EXIT_OK,
    EXIT_USAGE,
    cmd_diag_asymmetry,
    cmd_diag_bound,
    cmd_plot,
    cmd_train,
    cmd_verify,
)
from .csvlog import CURVE_COLUMNS, CurveRow, aggregate_runs, read_curve_csv, write_curve_csv
from .runconfig import RunConfig, parse_seeds
from .worker import SeedWorker, WorkerManager


__all__ = [
    "EXIT_FAILURE",
    "EXIT_OK",
    "EXIT_USAGE",
    "cmd_diag_asymmetry",
    "cmd_diag_bound",
    "cmd_plot",
    "cmd_train",
    "cmd_verify",
    "CURVE_COLUMNS",
    "CurveRow",
    "aggregate_runs",
    "read_curve_csv",
    "write_curve_csv",
    "RunConfig",
    "parse_seeds",
    "SeedWorker",
    "WorkerManager",
]
