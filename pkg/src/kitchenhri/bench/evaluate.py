"""Slot-accuracy evaluation of a dialogue backend over the benchmark."""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Optional

from ..nlu.types import Command, DialogueContext, SymbolicState
from .generator import BenchmarkInstruction

FIELDS = (
    "command",
    "add_type", "add_color", "add_size", "add_location",
    "delete_type", "delete_color", "delete_size", "delete_location",
)


def _field_value(cmd: Command, name: str) -> Optional[str]:
    if name == "command":
        return cmd.kind
    side, attr = name.split("_", 1)
    query = cmd.add if side == "add" else cmd.delete
    if query is None:
        return None
    value = getattr(query, "source_location" if attr == "location" else attr)
    return value.value if value is not None else None


@dataclass
class AccuracyReport:
    """Per-field accuracy, mean and standard deviation over repeated runs."""

    backend_name: str
    runs: int
    instructions: int
    mean: dict[str, float] = field(default_factory=dict)      # percent
    sd: dict[str, float] = field(default_factory=dict)        # percentage points

    def to_dict(self) -> dict:
        return {
            "backend": self.backend_name,
            "runs": self.runs,
            "instructions": self.instructions,
            "accuracy_mean_pct": dict(self.mean),
            "accuracy_sd_pct": dict(self.sd),
        }

    def render_table(self) -> str:
        """Plain-text table: command plus add/delete object properties."""
        header = (f"{'Backend':24s} {'Command':>9s} "
                  "|  Add: " + " ".join(f"{h:>7s}" for h in ("Type", "Color", "Size", "Loc"))
                  + " |  Del: " + " ".join(f"{h:>7s}" for h in ("Type", "Color", "Size", "Loc")))
        order = FIELDS
        means = " ".join(f"{self.mean[f]:7.2f}" for f in order[1:5])
        dels = " ".join(f"{self.mean[f]:7.2f}" for f in order[5:])
        row = (f"{self.backend_name:24s} {self.mean['command']:9.2f} |       "
               f"{means} |       {dels}")
        sds = (f"{'± sd':24s} {self.sd['command']:9.2f} |       "
               + " ".join(f"{self.sd[f]:7.2f}" for f in order[1:5])
               + " |       " + " ".join(f"{self.sd[f]:7.2f}" for f in order[5:]))
        return "\n".join([header, "-" * len(header), row, sds])


def evaluate_backend(backend, instructions: list[BenchmarkInstruction],
                     runs: int = 1) -> AccuracyReport:
    """Score a backend's field-level extraction accuracy against gold."""
    if not instructions:
        raise ValueError("no instructions to evaluate")
    per_run: dict[str, list[float]] = {f: [] for f in FIELDS}
    state = SymbolicState()
    for _ in range(runs):
        correct = {f: 0 for f in FIELDS}
        for instr in instructions:
            # fresh context: benchmark sentences are self-contained
            pred = backend.extract(instr.text, state, DialogueContext())
            for f in FIELDS:
                if _field_value(pred, f) == _field_value(instr.gold, f):
                    correct[f] += 1
        for f in FIELDS:
            per_run[f].append(100.0 * correct[f] / len(instructions))
    report = AccuracyReport(
        backend_name=getattr(backend, "name", type(backend).__name__),
        runs=runs,
        instructions=len(instructions),
    )
    for f in FIELDS:
        report.mean[f] = statistics.fmean(per_run[f])
        report.sd[f] = statistics.pstdev(per_run[f]) if runs > 1 else 0.0
    return report
