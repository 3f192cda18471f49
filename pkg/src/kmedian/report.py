"""Outcome records for bound and axiom checks, plus their CSV serialization."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field


@dataclass
class BoundReport:
    """Result of one inequality or axiom check.

    ``holds`` is true iff ``lhs <= rhs + tolerance``.  ``slack`` is
    ``rhs - lhs``; a negative slack beyond the tolerance means a violation.
    ``witness`` names the point/set/step where the check was tightest or
    violated.
    """

    check: str
    holds: bool
    lhs: float
    rhs: float
    witness: str = ""
    instance: str = ""
    params: str = ""
    tolerance: float = 0.0

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


REPORT_HEADER = ["check", "instance", "params", "holds", "lhs", "rhs", "slack", "witness"]


def write_report_csv(reports, path):
    """Write verification reports in the fixed column order.

    Output is a pure function of the reports: re-running a verification with
    the same seeds reproduces the file byte for byte.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for r in reports:
            writer.writerow(
                [r.check, r.instance, r.params,
                 "true" if r.holds else "false",
                 repr(float(r.lhs)), repr(float(r.rhs)), repr(float(r.slack)),
                 r.witness]
            )
