"""Scripted system trials over the full pipeline.

A scripted user agent submits its lines when its trigger condition is
observed on the bus, re-submits when no matching confirmation arrives in
time, and the whole exchange is captured as a replayable trial log.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Optional

from ..bus import Topic
from ..config import RunConfig
from ..nlu.types import ResponseCategory
from ..session import Session
from ..speech import AgeGroup

PLACEMENT = ("table", "counter")


@dataclass
class ScriptLine:
    text: str
    expect_kind: str
    expect_add: Optional[dict] = None      # full echoed query must match
    expect_delete: Optional[dict] = None
    trigger: str = "start"  # start | event:<action kind> | completion
    delay: int = 1
    age_group: Optional[str] = None


@dataclass
class TrialScript:
    scenario: int
    lines: list[ScriptLine]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "lines": [vars(line) for line in self.lines],
        }


def scenario_script(scenario: int) -> TrialScript:
    """The two reference interaction scripts."""
    if scenario == 1:
        return TrialScript(1, [
            ScriptLine("Bring me the cup.", expect_kind="bring_me",
                       expect_add={"type": "cup"}, trigger="start"),
            ScriptLine("Bring me the bowl instead of the cup.",
                       expect_kind="replace_object", expect_add={"type": "bowl"},
                       expect_delete={"type": "cup"}, trigger="event:open_container",
                       delay=2),
        ])
    if scenario == 2:
        return TrialScript(2, [
            ScriptLine("Please set the table for breakfast.",
                       expect_kind="setting_breakfast", trigger="start"),
            ScriptLine("Bring me the cup as well.", expect_kind="bring_me",
                       expect_add={"type": "cup"}, trigger="event:place"),
            ScriptLine("Stop!", expect_kind="stop", trigger="completion"),
        ])
    raise ValueError(f"unknown scenario {scenario}")


class UserAgent:
    """Plays the user: submits lines, watches responses, repeats itself."""

    def __init__(self, session: Session, script: TrialScript):
        self.session = session
        self.script = script
        self.sub = session.bus.subscribe("user-agent", Topic.RESPONSE_OUT, Topic.TRIAL_EVENT)
        trial_cfg = session.config.trial
        self.timeout = int(trial_cfg["confirm_timeout_ticks"])
        self.max_resubmits = int(trial_cfg["max_resubmits"])
        self.idx = 0
        self.state = "waiting"  # waiting | submitted | finished | aborted
        self.activation_tick = 0
        self.submitted_tick: Optional[int] = None
        self.resubmits_here = 0
        self.resubmissions = 0
        self.event_ticks: dict[str, int] = {}  # first completion tick per action kind
        self.completion_tick: Optional[int] = None

    # -- observation ---------------------------------------------------------

    def observe(self) -> None:
        for env in self.sub.drain():
            if env.topic == Topic.TRIAL_EVENT:
                ev = env.payload
                if ev.kind == "action_completed":
                    kind = ev.data["action"]["kind"]
                    self.event_ticks.setdefault(kind, env.tick)
                elif ev.kind == "plan_completed" and self.completion_tick is None:
                    self.completion_tick = env.tick
            elif self.state == "submitted":
                resp = env.payload
                line = self.script.lines[self.idx]
                if (resp.category == ResponseCategory.CONFIRMATION
                        and resp.command_kind == line.expect_kind
                        and (line.expect_add is None or resp.add_query == line.expect_add)
                        and (line.expect_delete is None
                             or resp.delete_query == line.expect_delete)):
                    self._advance(env.tick)

    def _advance(self, tick: int) -> None:
        self.idx += 1
        self.resubmits_here = 0
        self.submitted_tick = None
        self.activation_tick = tick
        self.state = "finished" if self.idx >= len(self.script.lines) else "waiting"

    # -- acting ----------------------------------------------------------------

    def act(self, tick: int) -> None:
        if self.state in ("finished", "aborted"):
            return
        line = self.script.lines[self.idx]
        if self.state == "waiting":
            trigger_tick = self._trigger_tick(line)
            if trigger_tick is not None and tick >= trigger_tick + line.delay:
                self._submit(line, tick, resubmission=False)
        elif self.state == "submitted" and tick - self.submitted_tick >= self.timeout:
            if self.resubmits_here >= self.max_resubmits:
                self.state = "aborted"
                return
            self._submit(line, tick, resubmission=True)

    def _trigger_tick(self, line: ScriptLine) -> Optional[int]:
        if line.trigger == "start":
            return self.activation_tick
        if line.trigger == "completion":
            seen = self.completion_tick
        elif line.trigger.startswith("event:"):
            seen = self.event_ticks.get(line.trigger.split(":", 1)[1])
        else:
            raise ValueError(f"unknown trigger {line.trigger}")
        if seen is None:
            return None
        return max(seen, self.activation_tick)

    def _submit(self, line: ScriptLine, tick: int, resubmission: bool) -> None:
        if resubmission:
            self.resubmits_here += 1
            self.resubmissions += 1
        age = AgeGroup(line.age_group) if line.age_group else None
        self.session.submit(line.text, age_group=age, at_tick=tick,
                            line_index=self.idx, resubmission=resubmission)
        self.submitted_tick = tick
        self.state = "submitted"

    @property
    def done(self) -> bool:
        return self.state in ("finished", "aborted")


@dataclass
class TrialLog:
    scenario: int
    seed: str
    config: dict
    frames: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_lines(self) -> list[str]:
        dump = lambda obj: json.dumps(obj, sort_keys=True, separators=(",", ":"))
        header = dump({"type": "header", "scenario": self.scenario,
                       "seed": self.seed, "config": self.config})
        body = [dump({"type": "envelope", **frame}) for frame in self.frames]
        footer = dump({"type": "summary", **self.summary})
        return [header] + body + [footer]

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.to_lines()) + "\n")

    @classmethod
    def read(cls, path: str) -> "TrialLog":
        with open(path, "r", encoding="utf-8") as fh:
            lines = [json.loads(line) for line in fh if line.strip()]
        header = lines[0]
        assert header["type"] == "header", "malformed trial log"
        log = cls(scenario=header["scenario"], seed=header["seed"],
                  config=header["config"])
        for entry in lines[1:]:
            if entry["type"] == "envelope":
                entry = dict(entry)
                entry.pop("type")
                log.frames.append(entry)
            elif entry["type"] == "summary":
                summary = dict(entry)
                summary.pop("type")
                log.summary = summary
        return log

    # -- derived views ---------------------------------------------------------

    def snapshots(self) -> dict[str, dict]:
        out = {}
        for frame in self.frames:
            if frame["topic"] == "trial_event" and frame["payload"]["kind"] == "world_snapshot":
                out[frame["payload"]["data"]["label"]] = frame["payload"]["data"]
        return out

    def delivered_types(self) -> list[str]:
        final = self.snapshots()["final"]["world"]
        return sorted(o["type"] for o in final["objects"] if o["location"] in PLACEMENT)


def score_trial(log: TrialLog, scenario: Optional[int] = None) -> bool:
    """Success per the scenario's world-outcome rule; pure function of the log."""
    scenario = scenario if scenario is not None else log.scenario
    snapshots = log.snapshots()
    if "initial" not in snapshots or "final" not in snapshots:
        return False
    initial, final = snapshots["initial"], snapshots["final"]
    locations = {o["id"]: o["location"] for o in final["world"]["objects"]}
    initial_locations = {o["id"]: o["location"] for o in initial["world"]["objects"]}
    delivered = sorted(o["type"] for o in final["world"]["objects"]
                       if o["location"] in PLACEMENT)
    if scenario == 1:
        cups_home = all(
            locations[o["id"]] == initial_locations[o["id"]]
            for o in final["world"]["objects"] if o["type"] == "cup"
        )
        return delivered == ["bowl"] and cups_home
    if scenario == 2:
        breakfast = set(log.config["planner"]["breakfast_set"])
        return (breakfast | {"cup"}) <= set(delivered) and final["mode"] == "stopped"
    raise ValueError(f"unknown scenario {scenario}")


def analyze(log: TrialLog) -> dict:
    """Counts every metric needs, derived only from the log's frames."""
    transcripts = 0
    corrupted = 0
    resubmissions = 0
    received = 0
    executed: dict[str, int] = {}
    ignored_reasons: dict[str, int] = {}
    for frame in log.frames:
        topic = frame["topic"]
        payload = frame["payload"]
        if topic == "transcript":
            transcripts += 1
            if payload["corruption"] != "clean":
                corrupted += 1
        elif topic == "utterance_in":
            if payload.get("resubmission"):
                resubmissions += 1
        elif topic == "command":
            received += 1
        elif topic == "trial_event" and payload["kind"] == "disposition":
            disposition = payload["data"]["disposition"]
            kind = payload["data"]["command"]["kind"]
            if disposition["kind"] in ("applied", "stopped"):
                executed[kind] = executed.get(kind, 0) + 1
            elif disposition["kind"] == "ignored":
                reason = disposition.get("reason", "unknown")
                ignored_reasons[reason] = ignored_reasons.get(reason, 0) + 1
    executed_total = sum(executed.values())
    return {
        "transcripts": transcripts,
        "corrupted_transcripts": corrupted,
        "ies": corrupted / transcripts if transcripts else 0.0,
        "resubmissions": resubmissions,
        "received_commands": received,
        "executed": executed,
        "executed_total": executed_total,
        "ignored_total": received - executed_total,
        "ignored_reasons": ignored_reasons,
        "success": score_trial(log),
    }


def run_trial(script: TrialScript, config: RunConfig, seed: str) -> TrialLog:
    """One full seeded run of speech -> dialogue -> executor over the bus."""
    rng = random.Random(seed)
    session = Session(config, rng=rng)
    log_sub = session.bus.subscribe("trial-log", *list(Topic))
    agent = UserAgent(session, script)
    session.publish_snapshot("initial")
    max_ticks = int(config.trial["max_ticks"])
    for tick in range(1, max_ticks + 1):
        agent.act(tick)
        session.step()
        agent.observe()
        if agent.done and session.quiescent():
            break
    session.publish_snapshot("final")
    log = TrialLog(scenario=script.scenario, seed=seed, config=config.to_dict())
    log.frames = [env.to_frame() for env in log_sub.drain()]
    log.summary = analyze(log)
    return log


def run_trials(scenario: int, n: int, seed: int, config: RunConfig) -> list[TrialLog]:
    """n independent seeded trials; aggregation is order-independent."""
    script = scenario_script(scenario)
    return [run_trial(script, config, f"{seed}:{scenario}:{i}") for i in range(n)]


def replay_log(log: TrialLog) -> TrialLog:
    """Re-run a log's recorded inputs under its seed and config.

    A healthy log regenerates itself byte for byte.
    """
    config = RunConfig.from_dict(log.config)
    session = Session(config, rng=random.Random(log.seed))
    log_sub = session.bus.subscribe("trial-log", *list(Topic))
    session.publish_snapshot("initial")
    for frame in log.frames:
        if frame["topic"] != "utterance_in":
            continue
        payload = frame["payload"]
        group = payload.get("true_age_group")
        session.submit(
            payload["text"],
            age_group=AgeGroup(group) if group else None,
            at_tick=frame["tick"],
            line_index=payload.get("line_index"),
            resubmission=bool(payload.get("resubmission")),
        )
    last_tick = max((frame["tick"] for frame in log.frames), default=0)
    for _ in range(last_tick):
        session.step()
    session.publish_snapshot("final")
    out = TrialLog(scenario=log.scenario, seed=log.seed, config=config.to_dict())
    out.frames = [env.to_frame() for env in log_sub.drain()]
    out.summary = analyze(out)
    return out
