"""One running pipeline instance: speech, dialogue bridge, and executor
exchanging messages over the bus, advanced tick by tick.

Per-tick order is fixed (inject inputs, speech, dialogue, dispatch,
execute, publish state), which makes every run a pure function of
(seed, inputs, config).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .bus import MessageBus, Topic
from .config import RunConfig
from .nlu.dialogue import DialogueBridge
from .nlu.grammar import GrammarBackend
from .nlu.llm import ChatCompletionBackend
from .nlu.stub import StubBackend
from .nlu.types import Command, CommandKind, Response, ResponseCategory, SymbolicState
from .planner import (
    Disposition,
    DispositionKind,
    Executor,
    ExecutorMode,
    IgnoreReason,
    PlannerEvent,
    Unplannable,
    classify_ignored,
    compile_command,
)
from .speech import AgeGroup, AgeSmoother, BinaryAge, Transcript, corrupt, estimate_age, to_binary


@dataclass
class Utterance:
    """Raw user input line entering the pipeline."""

    text: str
    true_age_group: Optional[AgeGroup] = None
    line_index: Optional[int] = None
    resubmission: bool = False

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "true_age_group": self.true_age_group.value if self.true_age_group else None,
            "line_index": self.line_index,
            "resubmission": self.resubmission,
        }


@dataclass
class TranscriptMessage:
    """Speech output: transcript plus the smoothed age signal."""

    transcript: Transcript
    age_group: AgeGroup
    binary_age: BinaryAge
    line_index: Optional[int] = None
    resubmission: bool = False

    def to_dict(self) -> dict:
        out = self.transcript.to_dict()
        out.update({
            "age_group": self.age_group.value,
            "binary_age": self.binary_age.value,
            "line_index": self.line_index,
            "resubmission": self.resubmission,
        })
        return out


@dataclass
class InterruptRequest:
    """Out-of-band interrupt, e.g. the console's stop button."""

    major: bool = True
    command: Optional[Command] = None

    def to_dict(self) -> dict:
        return {
            "major": self.major,
            "command": self.command.to_dict() if self.command else None,
        }


BUS_SCHEMA = {
    Topic.UTTERANCE_IN: Utterance,
    Topic.TRANSCRIPT: TranscriptMessage,
    Topic.COMMAND: Command,
    Topic.ROBOT_STATE: SymbolicState,
    Topic.RESPONSE_OUT: Response,
    Topic.INTERRUPT: InterruptRequest,
    Topic.TRIAL_EVENT: PlannerEvent,
}


def build_backend(config: RunConfig, rng: random.Random):
    choice = config.nlu["backend"]
    if choice == "grammar":
        return GrammarBackend()
    if choice == "stub":
        return StubBackend(config.nlu["stub_confusion"], rng)
    if choice == "external":
        ext = config.nlu["external"]
        return ChatCompletionBackend(
            base_url=ext["base_url"],
            model=ext["model"],
            api_key_env=ext["api_key_env"],
            timeout_s=float(ext["timeout_s"]),
            log_bodies=bool(ext["log_bodies"]),
        )
    raise ValueError(f"unknown nlu backend {choice!r}")


class Session:
    """Owns the bus, the world, and all three pipeline stages."""

    def __init__(self, config: RunConfig, rng: Optional[random.Random] = None,
                 backend=None):
        self.config = config
        self.rng = rng or random.Random(config.seed)
        self.world = config.build_world()
        self.bus = MessageBus(schema=BUS_SCHEMA)
        self.executor = Executor(self.world, config.planner_config(), self.rng)
        self.bridge = DialogueBridge(
            backend=backend or build_backend(config, self.rng),
            min_confidence=config.nlu.get("min_confidence"),
        )
        self.smoother = AgeSmoother()
        self.noise = config.noise_config()
        self.age_noise = config.age_noise_config()
        self.split = config.binary_split()
        self.default_age = AgeGroup(config.trial["true_age_group"])
        self.forward_other = bool(config.nlu.get("forward_other", True))
        self.tick_count = 0
        self.last_state = self.executor.symbolic_state()
        self._inbox: list[tuple[int, Utterance]] = []

        self._speech_sub = self.bus.subscribe("speech", Topic.UTTERANCE_IN)
        self._nlu_sub = self.bus.subscribe("nlu", Topic.TRANSCRIPT)
        self._exec_sub = self.bus.subscribe("executor", Topic.COMMAND, Topic.INTERRUPT)

    # -- input -------------------------------------------------------------

    def submit(self, text: str, age_group: Optional[AgeGroup] = None,
               at_tick: Optional[int] = None, line_index: Optional[int] = None,
               resubmission: bool = False) -> None:
        """Schedule an utterance; default is the next tick. Blank lines drop."""
        if not text.strip():
            return
        utt = Utterance(text=text, true_age_group=age_group or self.default_age,
                        line_index=line_index, resubmission=resubmission)
        self._inbox.append((at_tick if at_tick is not None else self.tick_count + 1, utt))

    def request_interrupt(self, major: bool = True, command: Optional[Command] = None) -> None:
        self.bus.publish(Topic.INTERRUPT, InterruptRequest(major=major, command=command))

    def reset(self) -> None:
        for ev in self.executor.reset():
            self.bus.publish(Topic.TRIAL_EVENT, ev)
        self.bus.publish(Topic.RESPONSE_OUT,
                         Response("Okay, I am ready again.", ResponseCategory.CONFIRMATION))

    # -- per-tick pipeline ---------------------------------------------------

    def step(self) -> None:
        self.tick_count += 1
        self.bus.set_tick(self.tick_count)
        self._inject_due_inputs()
        self._speech_stage()
        self._dialogue_stage()
        self._dispatch_stage()
        self._execute_stage()
        self.last_state = self.executor.symbolic_state()
        self.bus.publish(Topic.ROBOT_STATE, self.last_state)

    def quiescent(self) -> bool:
        """No scheduled input and nothing executing."""
        return not self._inbox and self.executor.mode != ExecutorMode.EXECUTING

    def _inject_due_inputs(self) -> None:
        due = [utt for tick, utt in self._inbox if tick <= self.tick_count]
        self._inbox = [(tick, utt) for tick, utt in self._inbox if tick > self.tick_count]
        for utt in due:
            self.bus.publish(Topic.UTTERANCE_IN, utt)

    def _speech_stage(self) -> None:
        for env in self._speech_sub.drain():
            utt: Utterance = env.payload
            transcript = corrupt(utt.text, self.rng, self.noise)
            estimated = estimate_age(utt.true_age_group or self.default_age,
                                     self.rng, self.age_noise)
            binary = self.smoother.update(to_binary(estimated, self.split))
            self.bridge.ctx.age = binary
            self.bus.publish(Topic.TRANSCRIPT, TranscriptMessage(
                transcript=transcript,
                age_group=estimated,
                binary_age=binary,
                line_index=utt.line_index,
                resubmission=utt.resubmission,
            ))

    def _dialogue_stage(self) -> None:
        for env in self._nlu_sub.drain():
            msg: TranscriptMessage = env.payload
            response, cmd = self.bridge.route(msg.transcript, self.last_state)
            if cmd.kind == CommandKind.OTHER.value and not self.forward_other:
                self.bus.publish(Topic.RESPONSE_OUT, response)
                continue
            self.bus.publish(Topic.COMMAND, cmd)
            self.bus.publish(Topic.RESPONSE_OUT, response)

    def _dispatch_stage(self) -> None:
        for env in self._exec_sub.drain():
            if env.topic == Topic.INTERRUPT:
                req: InterruptRequest = env.payload
                if req.major:
                    self._do_stop(Command(kind=CommandKind.STOP.value), voiced=True)
                elif req.command is not None:
                    self._dispatch_command(req.command)
            else:
                self._dispatch_command(env.payload)

    def _dispatch_command(self, cmd: Command) -> None:
        reason = classify_ignored(cmd, self.world, self.executor)
        if reason is not None:
            self._publish_disposition(cmd, Disposition(DispositionKind.IGNORED, reason))
            return
        kind = cmd.kind_enum()
        if kind == CommandKind.STOP:
            self._do_stop(cmd, voiced=False)
            return
        if self.executor.mode == ExecutorMode.STOPPED:
            # absorbing until reset: arrived too late for this interaction
            self._publish_disposition(
                cmd, Disposition(DispositionKind.IGNORED, IgnoreReason.TOO_LATE))
            return
        if self.executor.mode == ExecutorMode.EXECUTING:
            disposition, events = self.executor.interrupt_minor(cmd)
            self._publish_disposition(cmd, disposition)
            self._publish_events(events)
            return
        # idle or failed: fresh plan
        plan_cmd = cmd
        if kind == CommandKind.REPLACE_OBJECT:
            # nothing is running; fetching the replacement is all that is left
            plan_cmd = Command(kind=CommandKind.BRING_ME.value, add=cmd.add,
                               destination=cmd.destination)
        try:
            plan = compile_command(plan_cmd, self.world, self.executor.cfg)
        except Unplannable as exc:
            self._publish_disposition(cmd, Disposition(DispositionKind.IGNORED, exc.reason))
            return
        self._publish_disposition(cmd, Disposition(DispositionKind.APPLIED))
        self._publish_events(self.executor.start_plan(plan))

    def _do_stop(self, cmd: Command, voiced: bool) -> None:
        disposition, events = self.executor.interrupt_major()
        self._publish_disposition(cmd, disposition)
        self._publish_events(events)
        if voiced:
            self.bus.publish(Topic.RESPONSE_OUT,
                             Response("Stopping right away.", ResponseCategory.CONFIRMATION,
                                      command_kind=CommandKind.STOP.value))

    def _execute_stage(self) -> None:
        if self.executor.mode != ExecutorMode.EXECUTING:
            return
        events = self.executor.tick()
        self._publish_events(events)
        if any(ev.kind == "action_completed" and ev.data.get("world_events")
               for ev in events):
            self.publish_snapshot("update")

    # -- event fan-out -------------------------------------------------------

    def _publish_disposition(self, cmd: Command, disposition: Disposition) -> None:
        event = PlannerEvent("disposition", {
            "command": cmd.to_dict(),
            "disposition": disposition.to_dict(),
        })
        self.bus.publish(Topic.TRIAL_EVENT, event)
        if disposition.kind == DispositionKind.IGNORED:
            feedback = self.bridge.narrate(PlannerEvent("ignored", {
                "command": cmd.to_dict(),
                "reason": disposition.reason.value if disposition.reason else None,
            }))
            if feedback is not None:
                self.bus.publish(Topic.RESPONSE_OUT, feedback)

    def _publish_events(self, events: list[PlannerEvent]) -> None:
        for event in events:
            deferred = bool(event.data.pop("deferred", False))
            if deferred and event.kind == "ignored":
                # queued change whose moment passed: its final disposition
                self._publish_disposition(
                    Command.from_dict(event.data["command"]),
                    Disposition(DispositionKind.IGNORED, IgnoreReason(event.data["reason"])),
                )
                continue
            self.bus.publish(Topic.TRIAL_EVENT, event)
            if deferred and event.kind == "replan":
                self._publish_disposition(Command.from_dict(event.data["command"]),
                                          Disposition(DispositionKind.APPLIED))
            narration = self.bridge.narrate(event)
            if narration is not None:
                self.bus.publish(Topic.RESPONSE_OUT, narration)

    def publish_snapshot(self, label: str) -> None:
        self.bus.publish(Topic.TRIAL_EVENT, PlannerEvent("world_snapshot", {
            "label": label,
            "world": self.world.snapshot(),
            "mode": self.executor.mode.value,
        }))
