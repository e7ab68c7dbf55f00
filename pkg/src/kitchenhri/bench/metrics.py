"""Trial metrics: sentence-corruption rate, repetition rate, success, and
the executed/ignored command breakdown, with a plain-table rendering."""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field

from .trials import TrialLog

#: Command rows reported per scenario, mirroring the trial protocol.
SCENARIO_ROWS = {
    1: ("bring_me", "replace_object", "ignored"),
    2: ("setting_breakfast", "bring_me", "stop", "ignored"),
}


@dataclass
class Metrics:
    scenario: int
    trials: int
    success_rate: float
    ies_mean: float
    ies_sd: float
    rr_mean: float
    rr_sd: float
    ignored_rate: float
    received_commands: int
    executed_share: dict[str, float] = field(default_factory=dict)
    ignored_reasons: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "trials": self.trials,
            "success_rate": self.success_rate,
            "ies_mean": self.ies_mean,
            "ies_sd": self.ies_sd,
            "rr_mean": self.rr_mean,
            "rr_sd": self.rr_sd,
            "ignored_rate": self.ignored_rate,
            "received_commands": self.received_commands,
            "executed_share": dict(self.executed_share),
            "ignored_reasons": dict(self.ignored_reasons),
        }

    def rows(self) -> list[tuple[str, float]]:
        """The fixed command-share rows for this scenario's report table."""
        out = []
        for key in SCENARIO_ROWS[self.scenario]:
            if key == "ignored":
                out.append((key, self.ignored_rate))
            else:
                out.append((key, self.executed_share.get(key, 0.0)))
        return out

    def render_table(self) -> str:
        lines = [
            f"Scenario {self.scenario}  ({self.trials} trials, "
            f"{self.received_commands} commands received)",
            f"{'Command':20s} {'Share':>8s}",
            "-" * 30,
        ]
        for name, share in self.rows():
            lines.append(f"{name:20s} {100.0 * share:7.2f}%")
        lines.append("-" * 30)
        lines.append(f"{'Success rate':20s} {100.0 * self.success_rate:7.2f}%")
        lines.append(f"IES {100.0 * self.ies_mean:.2f}% ± {100.0 * self.ies_sd:.2f}%   "
                     f"RR {self.rr_mean:.4f} ± {self.rr_sd:.4f}")
        return "\n".join(lines)


def compute_metrics(logs: list[TrialLog]) -> Metrics:
    """Aggregate one scenario's trial logs; exact arithmetic, no sampling."""
    if not logs:
        raise ValueError("no trial logs")
    scenarios = {log.scenario for log in logs}
    if len(scenarios) != 1:
        raise ValueError(f"logs mix scenarios {sorted(scenarios)}")
    summaries = [log.summary for log in logs]
    ies_values = [s["ies"] for s in summaries]
    successes = [s for s in summaries if s["success"]]
    rr_values = [s["resubmissions"] for s in successes]
    received = sum(s["received_commands"] for s in summaries)
    executed: dict[str, int] = {}
    reasons: dict[str, int] = {}
    for s in summaries:
        for kind, count in s["executed"].items():
            executed[kind] = executed.get(kind, 0) + count
        for reason, count in s["ignored_reasons"].items():
            reasons[reason] = reasons.get(reason, 0) + count
    ignored_total = sum(s["ignored_total"] for s in summaries)
    return Metrics(
        scenario=logs[0].scenario,
        trials=len(logs),
        success_rate=len(successes) / len(logs),
        ies_mean=statistics.fmean(ies_values),
        ies_sd=statistics.pstdev(ies_values) if len(ies_values) > 1 else 0.0,
        rr_mean=statistics.fmean(rr_values) if rr_values else 0.0,
        rr_sd=statistics.pstdev(rr_values) if len(rr_values) > 1 else 0.0,
        ignored_rate=ignored_total / received if received else 0.0,
        received_commands=received,
        executed_share={
            kind: count / received for kind, count in sorted(executed.items())
        } if received else {},
        ignored_reasons=dict(sorted(reasons.items())),
    )
