"""
metrics.py
Tracks and reports sweep statistics.

Collected metrics
-----------------
    solved_rows   : rows where every requested state has a bound state
    missing_rows  : rows with at least one empty model cell
    missing_cells : empty model cells per state label
    residuals     : |g(η) - η| of every solved level (for the worst case)
"""

import sys
from collections import Counter


class SweepMetrics:
    """
    Aggregates the outcome of every row of one sweep.

    Usage
    -----
    Call record_row() for each finished row, passing the labels of the
    states without a bound state. Call report() at the end to print a
    summary to stderr (stdout carries the data).
    """

    def __init__(self, name: str = "sweep"):
        self.name = name
        self.solved_rows: int = 0
        self.missing_rows: int = 0
        self.missing_cells: Counter = Counter()
        self.residuals: list[float] = []

    # ------------------------------------------------------------------------------
    # Recording
    # ------------------------------------------------------------------------------

    def record_row(self, missing: tuple[str, ...] = (), residuals: tuple[float, ...] = ()) -> None:
        if missing:
            self.missing_rows += 1
            self.missing_cells.update(missing)
        else:
            self.solved_rows += 1
        self.residuals.extend(residuals)

    # ------------------------------------------------------------------------------
    # Derived statistics
    # ------------------------------------------------------------------------------

    @property
    def total_rows(self) -> int:
        return self.solved_rows + self.missing_rows

    @property
    def missing_rate(self) -> float:
        """Fraction of rows with an empty model cell."""
        if self.total_rows == 0:
            return 0.0
        return self.missing_rows / self.total_rows

    @property
    def worst_residual(self) -> float:
        return max(self.residuals, default=0.0)

    def compute_summary(self) -> dict:
        return {
            "sweep": self.name,
            "rows": self.total_rows,
            "solved": self.solved_rows,
            "missing": self.missing_rows,
            "missing_cells": dict(sorted(self.missing_cells.items())),
            "worst_residual": self.worst_residual,
        }

    # ------------------------------------------------------------------------------
    # Reporting
    # ------------------------------------------------------------------------------

    def report(self, stream=None) -> None:
        """Print a formatted summary (stderr by default)."""
        stream = sys.stderr if stream is None else stream
        separator = "=" * 50
        print(separator, file=stream)
        print(f"       Sweep report - {self.name}", file=stream)
        print(separator, file=stream)
        print(f"  Rows computed           : {self.total_rows}", file=stream)
        print(f"  Rows fully solved       : {self.solved_rows}", file=stream)
        print(f"  Rows with empty cells   : {self.missing_rows}", file=stream)
        print(f"  Missing rate            : {self.missing_rate:.2%}", file=stream)
        for label, count in sorted(self.missing_cells.items()):
            print(f"    no bound state ({label}) : {count}", file=stream)
        if self.residuals:
            print(f"  Worst root residual     : {self.worst_residual:.3e}", file=stream)
        print(separator, file=stream)

    def __repr__(self) -> str:
        return (
            f"SweepMetrics(name={self.name!r}, solved={self.solved_rows}, "
            f"missing={self.missing_rows})"
        )
