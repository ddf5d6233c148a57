"""Run reports: named residual rows, delimited tables, and figures.

A report carries the task name, the exact inputs it was built from, a
results dictionary, and a list of named residuals, each with a pass flag.
``inputs_hash`` is the sha256 of the canonical JSON of the inputs, so two
runs on the same data produce the same hash; timing never enters it.
``residuals.csv`` holds one row per residual, and the numeric validation
task additionally writes ``errors.csv`` and a log-log convergence figure.
"""
from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from typing import Any

from .oracles import LaplaceReport
from .problems import canonical_json


@dataclass(frozen=True)
class Residual:
    name: str
    value: str
    passed: bool


def exact_residual(name: str, obj: Any) -> Residual:
    """Row for an exact object expected to vanish identically."""
    ok = obj.is_zero if hasattr(obj, "is_zero") else obj == 0
    return Residual(name, "0" if ok else str(obj), ok)


def bound_residual(name: str, value: float, tol: float) -> Residual:
    return Residual(name, f"{value:.6e}", abs(value) <= tol)


@dataclass
class Report:
    task: str
    inputs: dict
    results: dict = field(default_factory=dict)
    residuals: list[Residual] = field(default_factory=list)

    @property
    def inputs_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.inputs).encode()).hexdigest()

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.residuals)

    def add(self, residual: Residual) -> None:
        self.residuals.append(residual)

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "inputs_hash": self.inputs_hash,
            "results": self.results,
            "residuals": [
                {"name": r.name, "value": r.value, "pass": r.passed}
                for r in self.residuals
            ],
            "pass": self.passed,
        }

    def delimited(self) -> str:
        lines = [f"task,{self.task}", f"inputs_hash,{self.inputs_hash}"]
        for key, value in self.results.items():
            lines.append(f"{key},{value}")
        for r in self.residuals:
            lines.append(f"{r.name},{r.value},{'pass' if r.passed else 'FAIL'}")
        lines.append(f"pass,{str(self.passed).lower()}")
        return "\n".join(lines)


def write_residuals_csv(report: Report, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "value", "pass"])
        for r in report.residuals:
            writer.writerow([r.name, r.value, "pass" if r.passed else "FAIL"])


def write_errors_csv(rep: LaplaceReport, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["h", "numeric", "predicted", "abs_err", "rel_err"])
        for row in rep.rows:
            writer.writerow([
                f"{row.h:.6g}", f"{row.numeric:.12e}", f"{row.predicted:.12e}",
                f"{row.abs_err:.6e}", f"{row.rel_err:.6e}",
            ])


def write_convergence_png(rep: LaplaceReport, path: str) -> None:
    """Log-log error plot against the expected remainder power."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    hs = [row.h for row in rep.rows]
    errs = [max(row.abs_err, 1e-300) for row in rep.rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.loglog(hs, errs, "o-", label="absolute error")
    anchor = errs[-1] / hs[-1] ** rep.expected_slope
    ref = [anchor * h ** rep.expected_slope for h in hs]
    ax.loglog(hs, ref, "--", color="gray",
              label=f"h^{rep.expected_slope:g} reference")
    ax.set_xlabel("h")
    ax.set_ylabel("|numeric - predicted|")
    slope = "n/a" if math.isnan(rep.slope) else f"{rep.slope:.3f}"
    ax.set_title(f"fitted slope {slope}, expected {rep.expected_slope:g}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def laplace_results(rep: LaplaceReport) -> dict:
    return {
        "series": str(rep.series),
        "slope": "n/a" if math.isnan(rep.slope) else f"{rep.slope:.4f}",
        "expected_slope": f"{rep.expected_slope:g}",
        "max_rel_err": f"{rep.max_rel_err:.6e}",
    }
