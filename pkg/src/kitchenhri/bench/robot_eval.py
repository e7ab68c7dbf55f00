"""Module-level robot evaluation: generated command permutations are run
straight against the executor (no speech or dialogue noise), reproducing
the executed/ignored breakdown of the planner-only tests."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..config import RunConfig
from ..nlu.types import Command, CommandKind
from ..planner import (
    Executor,
    ExecutorMode,
    Unplannable,
    classify_ignored,
    compile_command,
)
from ..world import Color, ObjectQuery, ObjectType, Size

#: Command-kind mix per scenario; ``invalid`` draws a fully random
#: attribute spec, which rarely matches anything in the default world.
SCENARIO_MIX = {
    1: (("bring_me", 0.50), ("replace_object", 0.48), ("invalid", 0.02)),
    2: (("setting_breakfast", 0.46), ("bring_me", 0.42), ("stop", 0.04),
        ("invalid", 0.08)),
}


@dataclass
class RobotEvalReport:
    scenario: int
    commands: int
    executed_share: dict[str, float] = field(default_factory=dict)
    ignored_share: float = 0.0
    failed_share: float = 0.0
    ignored_reasons: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "commands": self.commands,
            "executed_share": dict(self.executed_share),
            "ignored_share": self.ignored_share,
            "failed_share": self.failed_share,
            "ignored_reasons": dict(self.ignored_reasons),
        }

    def render_table(self) -> str:
        lines = [f"Robot evaluation, scenario {self.scenario} "
                 f"({self.commands} generated commands)",
                 f"{'Command':20s} {'Share':>8s}", "-" * 30]
        for kind, share in sorted(self.executed_share.items()):
            lines.append(f"{kind:20s} {100.0 * share:7.2f}%")
        lines.append(f"{'ignored':20s} {100.0 * self.ignored_share:7.2f}%")
        if self.failed_share:
            lines.append(f"{'failed':20s} {100.0 * self.failed_share:7.2f}%")
        return "\n".join(lines)


def _draw_command(rng: random.Random, mix) -> Command:
    u = rng.random()
    cumulative = 0.0
    label = mix[-1][0]
    for name, weight in mix:
        cumulative += weight
        if u < cumulative:
            label = name
            break
    types = list(ObjectType)
    if label == "bring_me":
        return Command(kind=CommandKind.BRING_ME.value,
                       add=ObjectQuery(type=rng.choice(types)))
    if label == "replace_object":
        add = rng.choice(types)
        delete = rng.choice([t for t in types if t != add])
        return Command(kind=CommandKind.REPLACE_OBJECT.value,
                       add=ObjectQuery(type=add), delete=ObjectQuery(type=delete))
    if label == "setting_breakfast":
        return Command(kind=CommandKind.SETTING_BREAKFAST.value)
    if label == "stop":
        return Command(kind=CommandKind.STOP.value)
    # fully attributed request; usually nothing in the world matches it
    return Command(kind=CommandKind.BRING_ME.value, add=ObjectQuery(
        type=rng.choice(types), color=rng.choice(list(Color)),
        size=rng.choice(list(Size))))


def run_robot_eval(scenario: int, n: int, seed: int,
                   config: RunConfig) -> RobotEvalReport:
    """Run n generated commands, each against a fresh world."""
    if scenario not in SCENARIO_MIX:
        raise ValueError(f"unknown scenario {scenario}")
    rng = random.Random(f"robot-eval:{seed}:{scenario}")
    executed: dict[str, int] = {}
    reasons: dict[str, int] = {}
    failed = 0
    for _ in range(n):
        cmd = _draw_command(rng, SCENARIO_MIX[scenario])
        world = config.build_world()
        executor = Executor(world, config.planner_config(), rng)
        reason = classify_ignored(cmd, world, executor)
        if reason is not None:
            reasons[reason.value] = reasons.get(reason.value, 0) + 1
            continue
        if cmd.kind == CommandKind.STOP.value:
            executor.interrupt_major()
            executed["stop"] = executed.get("stop", 0) + 1
            continue
        plan_cmd = cmd
        if cmd.kind == CommandKind.REPLACE_OBJECT.value:
            plan_cmd = Command(kind=CommandKind.BRING_ME.value, add=cmd.add)
        try:
            plan = compile_command(plan_cmd, world, executor.cfg)
        except Unplannable as exc:
            reasons[exc.reason.value] = reasons.get(exc.reason.value, 0) + 1
            continue
        executor.start_plan(plan)
        while executor.mode == ExecutorMode.EXECUTING:
            executor.tick()
        if executor.mode == ExecutorMode.FAILED:
            failed += 1
        else:
            executed[cmd.kind] = executed.get(cmd.kind, 0) + 1
    return RobotEvalReport(
        scenario=scenario,
        commands=n,
        executed_share={k: v / n for k, v in sorted(executed.items())},
        ignored_share=sum(reasons.values()) / n,
        failed_share=failed / n,
        ignored_reasons=dict(sorted(reasons.items())),
    )
