"""Run reports: deterministic text/JSON rendering, CSV rows, and figures.

Reports embed the seed and tool version and contain no timestamps, so a
fixed seed reproduces byte-identical output.  The figure path renders
per-trial deviations and branch outcomes with matplotlib to files next to
the delimited trial table.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np

from .specfile import format_complex


@dataclass(frozen=True)
class TrialRow:
    index: int
    branch: str = ""
    zero_amplitude: bool = False
    passed: bool = True
    factor_residual: float = 0.0
    match_deviation: float = 0.0


@dataclass
class RunReport:
    command: str
    seed: int | None = None
    tol: float | None = None
    version: str = ""
    notes: list[str] = field(default_factory=list)
    trials: list[TrialRow] = field(default_factory=list)
    corrections: list[tuple[str, np.ndarray]] = field(default_factory=list)
    matrices: list[tuple[str, np.ndarray]] = field(default_factory=list)

    @property
    def counts(self) -> tuple[int, int, int]:
        passed = sum(1 for t in self.trials if t.passed and not t.zero_amplitude)
        failed = sum(1 for t in self.trials if not t.passed and not t.zero_amplitude)
        zero = sum(1 for t in self.trials if t.zero_amplitude)
        return passed, failed, zero

    @property
    def passed(self) -> bool:
        return self.counts[1] == 0

    # -- renderers ----------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"command: {self.command}", f"version: {self.version}"]
        if self.seed is not None:
            lines.append(f"seed: {self.seed}")
        if self.tol is not None:
            lines.append(f"tol: {self.tol!r}")
        lines.extend(self.notes)
        for name, mat in self.matrices:
            lines.append(f"{name}:")
            lines.extend(_matrix_lines(mat))
        if self.trials:
            lines.append("trials:")
            for t in self.trials:
                tag = f" branch={t.branch}" if t.branch else ""
                if t.zero_amplitude:
                    lines.append(f"  trial {t.index}{tag}: zero amplitude")
                else:
                    verdict = "pass" if t.passed else "FAIL"
                    lines.append(
                        f"  trial {t.index}{tag}: {verdict} "
                        f"residual={_fmt(t.factor_residual)} "
                        f"deviation={_fmt(t.match_deviation)}"
                    )
            passed, failed, zero = self.counts
            lines.append(f"summary: passed={passed} failed={failed} zero={zero}")
        for branch, mat in self.corrections:
            lines.append(f"correction {branch}:")
            lines.extend(_matrix_lines(mat))
        lines.append(f"result: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "version": self.version,
            "seed": self.seed,
            "tol": self.tol,
            "notes": list(self.notes),
            "matrices": {
                name: _matrix_json(mat) for name, mat in self.matrices
            },
            "trials": [
                {
                    "index": t.index,
                    "branch": t.branch,
                    "zero_amplitude": t.zero_amplitude,
                    "passed": t.passed,
                    "factor_residual": _json_float(t.factor_residual),
                    "match_deviation": _json_float(t.match_deviation),
                }
                for t in self.trials
            ],
            "corrections": {
                branch: _matrix_json(mat) for branch, mat in self.corrections
            },
            "summary": dict(zip(("passed", "failed", "zero"), self.counts)),
            "result": "PASS" if self.passed else "FAIL",
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    # -- files ----------------------------------------------------------------

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["trial", "branch", "zero_amplitude", "passed",
                             "factor_residual", "match_deviation"])
            for t in self.trials:
                writer.writerow([
                    t.index, t.branch, int(t.zero_amplitude), int(t.passed),
                    _fmt(t.factor_residual), _fmt(t.match_deviation),
                ])

    def write_figures(self, directory) -> list[str]:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        directory = FsPath(directory)
        written: list[str] = []

        live = [t for t in self.trials if not t.zero_amplitude]
        if live:
            fig, ax = plt.subplots(figsize=(7, 4))
            xs = np.arange(len(live))
            devs = np.array([max(t.match_deviation, 1e-18) for t in live])
            colors = ["tab:blue" if t.passed else "tab:red" for t in live]
            ax.scatter(xs, devs, c=colors, s=18)
            if self.tol:
                ax.axhline(self.tol, color="tab:orange", lw=1, ls="--",
                           label=f"tolerance {self.tol:g}")
                ax.legend(loc="upper right")
            ax.set_yscale("log")
            ax.set_xlabel("trial")
            ax.set_ylabel("prediction deviation")
            ax.set_title(self.command)
            fig.tight_layout()
            target = directory / "deviations.png"
            fig.savefig(target, dpi=120)
            plt.close(fig)
            written.append(str(target))

        if self.trials:
            passed, failed, zero = self.counts
            fig, ax = plt.subplots(figsize=(4, 3.2))
            ax.bar(["pass", "fail", "zero"], [passed, failed, zero],
                   color=["tab:green", "tab:red", "tab:gray"])
            ax.set_ylabel("trials")
            ax.set_title("outcomes")
            fig.tight_layout()
            target = directory / "outcomes.png"
            fig.savefig(target, dpi=120)
            plt.close(fig)
            written.append(str(target))
        return written

    def write_all(self, directory, as_json: bool) -> list[str]:
        directory = FsPath(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        name = "report.json" if as_json else "report.txt"
        body = self.to_json() if as_json else self.to_text()
        (directory / name).write_text(body)
        written.append(str(directory / name))
        if self.trials:
            self.write_csv(directory / "trials.csv")
            written.append(str(directory / "trials.csv"))
        written.extend(self.write_figures(directory))
        return written


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(float(x), ".6e")


def _json_float(x: float):
    if isinstance(x, float) and math.isnan(x):
        return None
    return float(x)


def _matrix_lines(mat: np.ndarray) -> list[str]:
    arr = np.asarray(mat, dtype=complex)
    out = []
    for row in arr:
        cells = "  ".join(f"{format_complex(_round(z)):>14}" for z in row)
        out.append(f"  [ {cells} ]")
    return out


def _matrix_json(mat: np.ndarray) -> list[list[str]]:
    arr = np.asarray(mat, dtype=complex)
    return [[format_complex(_round(z)) for z in row] for row in arr]


def _round(z: complex, digits: int = 12) -> complex:
    return complex(round(z.real, digits), round(z.imag, digits))
