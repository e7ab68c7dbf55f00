"""Designator-based plan compiler and tick-driven executor.

Commands compile into transport designators whose concrete objects are
resolved at perception time. The executor advances one tick at a time,
commits world events only when an atomic action completes, and accepts
plan changes (minor) or a full stop (major) between and, where allowed,
inside actions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .nlu.types import Command, CommandKind, SymbolicState
from .world import (
    CONTAINER_LOCATIONS,
    STORAGE_LOCATIONS,
    EventKind,
    Location,
    ObjectInstance,
    ObjectQuery,
    WorldEvent,
    WorldState,
)


class ActionKind(str, Enum):
    NAVIGATE = "navigate"
    OPEN_CONTAINER = "open_container"
    CLOSE_CONTAINER = "close_container"
    PERCEIVE = "perceive"
    GRASP = "grasp"
    PLACE = "place"
    RETURN_OBJECT = "return_object"


class DesignatorType(str, Enum):
    TRANSPORT = "transport"
    SEARCH = "search"
    OPEN = "open"
    CLOSE = "close"
    PLACE = "place"


@dataclass
class Designator:
    """Symbolic action description; concrete params fill in at perception."""

    action_type: DesignatorType
    query: ObjectQuery
    destination: Optional[Location] = None
    resolution: Optional[dict] = None  # {"object_id", "source_location"}

    def to_dict(self) -> dict:
        return {
            "action_type": self.action_type.value,
            "query": self.query.to_dict(),
            "destination": self.destination.value if self.destination else None,
            "resolution": self.resolution,
        }


@dataclass
class AtomicAction:
    kind: ActionKind
    interruptable: bool
    duration_ticks: int
    location: Optional[Location] = None
    designator: Optional[int] = None  # index into Plan.designators

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "interruptable": self.interruptable,
            "duration_ticks": self.duration_ticks,
            "location": self.location.value if self.location else None,
            "designator": self.designator,
        }


@dataclass
class Plan:
    steps: list[AtomicAction]
    designators: list[Designator]
    originating_command: Command
    destination: Location
    cursor: int = 0
    claimed: set[str] = field(default_factory=set)  # object ids targeted by this plan

    def remaining(self) -> list[AtomicAction]:
        return self.steps[self.cursor:]

    def done(self) -> bool:
        return self.cursor >= len(self.steps)


class ExecutorMode(str, Enum):
    IDLE = "idle"
    EXECUTING = "executing"
    STOPPED = "stopped"
    FAILED = "failed"


class IgnoreReason(str, Enum):
    CLASSIFIED_OTHER = "classified_other"
    UNKNOWN_COMMAND_TYPE = "unknown_command_type"
    UNAVAILABLE_OBJECT = "unavailable_object"
    CRITERIA_MISMATCH = "criteria_mismatch"
    TOO_LATE = "too_late"
    MALFORMED = "malformed"


class DispositionKind(str, Enum):
    APPLIED = "applied"
    QUEUED = "queued"
    IGNORED = "ignored"
    STOPPED = "stopped"


@dataclass(frozen=True)
class Disposition:
    kind: DispositionKind
    reason: Optional[IgnoreReason] = None

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.reason is not None:
            out["reason"] = self.reason.value
        return out


class Unplannable(Exception):
    def __init__(self, reason: IgnoreReason, detail: str = ""):
        self.reason = reason
        super().__init__(f"{reason.value}: {detail}" if detail else reason.value)


@dataclass
class PlannerConfig:
    durations: dict[ActionKind, int] = field(default_factory=lambda: {
        ActionKind.NAVIGATE: 3,
        ActionKind.OPEN_CONTAINER: 2,
        ActionKind.CLOSE_CONTAINER: 2,
        ActionKind.PERCEIVE: 1,
        ActionKind.GRASP: 2,
        ActionKind.PLACE: 2,
        ActionKind.RETURN_OBJECT: 5,
    })
    interruptable: dict[ActionKind, bool] = field(default_factory=lambda: {
        ActionKind.NAVIGATE: True,
        ActionKind.OPEN_CONTAINER: False,
        ActionKind.CLOSE_CONTAINER: False,
        ActionKind.PERCEIVE: True,
        ActionKind.GRASP: False,
        ActionKind.PLACE: False,
        ActionKind.RETURN_OBJECT: True,
    })
    search_order: tuple[Location, ...] = STORAGE_LOCATIONS
    breakfast_set: tuple = ("bowl", "cereal", "milk", "spoon")
    default_destination: Location = Location.TABLE
    max_retries: int = 2
    p_grasp_fail: float = 0.0


@dataclass
class PlannerEvent:
    """One executor-side transition, published on the trial_event topic."""

    kind: str
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "data": self.data}


# ---------------------------------------------------------------------------
# plan compilation


@dataclass
class _Projection:
    """World effects of steps not yet executed, tracked during compilation."""

    robot: Location
    container_open: dict[Location, bool]
    claimed: set[str]

    @classmethod
    def from_world(cls, world: WorldState, claimed: Optional[set[str]] = None) -> "_Projection":
        return cls(
            robot=world.robot_location,
            container_open=dict(world.container_open),
            claimed=set(claimed or ()),
        )


def available_objects(world: WorldState, query: ObjectQuery,
                      claimed: Optional[set[str]] = None) -> list[ObjectInstance]:
    """Matching objects still sitting in a storage location and unclaimed."""
    claimed = claimed or set()
    return [
        o for o in world.find(query)
        if o.location in STORAGE_LOCATIONS and o.id not in claimed
    ]


def _locate_target(world: WorldState, query: ObjectQuery, proj: _Projection,
                   cfg: PlannerConfig) -> tuple[ObjectInstance, list[Location]]:
    """First matching object along the search order plus the locations visited."""
    order = [query.source_location] if query.source_location else list(cfg.search_order)
    visited: list[Location] = []
    for loc in order:
        visited.append(loc)
        at_loc = [o for o in available_objects(world, query, proj.claimed)
                  if o.location == loc]
        if at_loc:
            return at_loc[0], visited
    if query.type is not None and not world.find(ObjectQuery(type=query.type)):
        raise Unplannable(IgnoreReason.UNAVAILABLE_OBJECT, f"no {query.type.value} in the world")
    if query.type is not None and not available_objects(
            world, ObjectQuery(type=query.type), proj.claimed):
        raise Unplannable(IgnoreReason.UNAVAILABLE_OBJECT,
                          f"no {query.type.value} left to fetch")
    raise Unplannable(IgnoreReason.CRITERIA_MISMATCH, "no object meets the requested criteria")


def _transport_steps(world: WorldState, query: ObjectQuery, dest: Location,
                     proj: _Projection, cfg: PlannerConfig,
                     designator_idx: int) -> list[AtomicAction]:
    target, visits = _locate_target(world, query, proj, cfg)
    steps: list[AtomicAction] = []

    def add(kind: ActionKind, loc: Optional[Location] = None, designator=None):
        steps.append(AtomicAction(
            kind=kind,
            interruptable=cfg.interruptable[kind],
            duration_ticks=cfg.durations[kind],
            location=loc,
            designator=designator,
        ))

    for loc in visits:
        if proj.robot != loc:
            add(ActionKind.NAVIGATE, loc)
            proj.robot = loc
        if loc in CONTAINER_LOCATIONS and not proj.container_open[loc]:
            add(ActionKind.OPEN_CONTAINER, loc)
            proj.container_open[loc] = True
        add(ActionKind.PERCEIVE, loc, designator=designator_idx)
    add(ActionKind.GRASP, target.location, designator=designator_idx)
    if proj.robot != dest:
        add(ActionKind.NAVIGATE, dest)
        proj.robot = dest
    add(ActionKind.PLACE, dest, designator=designator_idx)
    proj.claimed.add(target.id)
    return steps


def compile_command(cmd: Command, world: WorldState, cfg: PlannerConfig) -> Plan:
    """Compile bring_me or setting_breakfast into a concrete step sequence."""
    kind = cmd.kind_enum()
    dest = cmd.destination or cfg.default_destination
    proj = _Projection.from_world(world)
    designators: list[Designator] = []
    steps: list[AtomicAction] = []
    if kind == CommandKind.BRING_ME:
        queries = [cmd.add]
    elif kind == CommandKind.SETTING_BREAKFAST:
        from .world import ObjectType
        queries = [ObjectQuery(type=ObjectType(name)) for name in cfg.breakfast_set]
    else:
        raise ValueError(f"cannot compile command kind {cmd.kind}")
    for query in queries:
        idx = len(designators)
        designators.append(Designator(DesignatorType.TRANSPORT, query, dest))
        steps.extend(_transport_steps(world, query, dest, proj, cfg, idx))
    return Plan(steps=steps, designators=designators, originating_command=cmd,
                destination=dest, claimed=set(proj.claimed))


# ---------------------------------------------------------------------------
# ignore classification


def classify_ignored(cmd: Command, world: WorldState,
                     executor: "Executor") -> Optional[IgnoreReason]:
    """Reason this command cannot execute, or None when it can."""
    kind = cmd.kind_enum()
    if kind is not None and cmd.structural_error() is not None:
        return IgnoreReason.MALFORMED
    if kind == CommandKind.OTHER:
        return IgnoreReason.CLASSIFIED_OTHER
    if kind is None:
        return IgnoreReason.UNKNOWN_COMMAND_TYPE
    if kind == CommandKind.STOP:
        return None
    if kind == CommandKind.CHANGE_LOCATION:
        # nothing in flight to redirect once the plan is gone
        if executor.mode == ExecutorMode.EXECUTING or executor.mode == ExecutorMode.STOPPED:
            return None
        return IgnoreReason.TOO_LATE

    claimed = executor.active_claims()
    if kind == CommandKind.SETTING_BREAKFAST:
        from .world import ObjectType
        queries = [ObjectQuery(type=ObjectType(name)) for name in executor.cfg.breakfast_set]
    else:
        queries = [cmd.add]
    for q in queries:
        reason = _query_reason(q, world, claimed)
        if reason is not None:
            return reason
    if kind == CommandKind.REPLACE_OBJECT:
        delivered = []
        if cmd.delete is not None:
            delivered = [
                o for o in world.find(cmd.delete)
                if o.location is not None and o.location not in STORAGE_LOCATIONS
            ]
        active = executor.delete_target(cmd.delete) if cmd.delete is not None else None
        if delivered and active is None:
            return IgnoreReason.TOO_LATE
        if executor.mode == ExecutorMode.EXECUTING and active is None:
            # the robot is busy but not with anything the user wants swapped
            return IgnoreReason.CRITERIA_MISMATCH
    return None


def _query_reason(q: ObjectQuery, world: WorldState, claimed: set[str]) -> Optional[IgnoreReason]:
    if q.type is not None:
        if not world.find(ObjectQuery(type=q.type)):
            return IgnoreReason.UNAVAILABLE_OBJECT
        if not available_objects(world, ObjectQuery(type=q.type), claimed):
            return IgnoreReason.UNAVAILABLE_OBJECT
    if not available_objects(world, q, claimed):
        return IgnoreReason.CRITERIA_MISMATCH
    return None


# ---------------------------------------------------------------------------
# executor


class Executor:
    """Tick-driven plan executor with interrupt client and retry recovery."""

    def __init__(self, world: WorldState, cfg: PlannerConfig, rng: random.Random):
        self.world = world
        self.cfg = cfg
        self.rng = rng
        self.mode = ExecutorMode.IDLE
        self.plan: Optional[Plan] = None
        self.ticks_remaining = 0
        self.pending_minor: dict[str, Command] = {}  # newest command per kind
        self.retry_counts: dict[int, int] = {}

    # -- queries -----------------------------------------------------------

    def active_claims(self) -> set[str]:
        claims = set(self.plan.claimed) if self.plan and self.mode == ExecutorMode.EXECUTING else set()
        if self.world.holding:
            claims.add(self.world.holding)
        return claims

    def delete_target(self, query: ObjectQuery) -> Optional[str]:
        """Id of the object this plan is moving that matches ``query``."""
        if self.world.holding:
            held = self.world.get(self.world.holding)
            if _attrs_match(query, held):
                return held.id
        if self.plan and self.mode == ExecutorMode.EXECUTING:
            for obj_id in sorted(self.plan.claimed):
                obj = self.world.get(obj_id)
                if obj.location in STORAGE_LOCATIONS and _attrs_match(query, obj):
                    return obj_id
        return None

    def current_action(self) -> Optional[AtomicAction]:
        if self.mode == ExecutorMode.EXECUTING and self.plan and not self.plan.done():
            return self.plan.steps[self.plan.cursor]
        return None

    def symbolic_state(self) -> SymbolicState:
        action = self.current_action()
        if action is None:
            return SymbolicState(
                step=self.mode.value,
                interruptable=True,
                move_arm=False,
                move_base=False,
                current_location=self.world.robot_location,
                destination_location=None,
            )
        move_base = action.kind in (ActionKind.NAVIGATE, ActionKind.RETURN_OBJECT)
        move_arm = action.kind in (ActionKind.GRASP, ActionKind.PLACE, ActionKind.RETURN_OBJECT)
        if action.kind == ActionKind.NAVIGATE:
            heading = action.location
        else:
            heading = self.plan.destination if self.plan else None
        return SymbolicState(
            step=action.kind.value,
            interruptable=action.interruptable,
            move_arm=move_arm,
            move_base=move_base,
            current_location=self.world.robot_location,
            destination_location=heading,
        )

    # -- lifecycle ---------------------------------------------------------

    def start_plan(self, plan: Plan) -> list[PlannerEvent]:
        if self.mode == ExecutorMode.STOPPED:
            raise RuntimeError("stopped executor requires reset before a new plan")
        self.plan = plan
        self.mode = ExecutorMode.EXECUTING
        self.retry_counts = {}
        self.pending_minor = {}
        self.ticks_remaining = plan.steps[0].duration_ticks if plan.steps else 0
        events = [PlannerEvent("plan_compiled", {
            "command": plan.originating_command.to_dict(),
            "steps": [s.to_dict() for s in plan.steps],
        })]
        if plan.steps:
            events.append(self._started_event())
        else:
            self.mode = ExecutorMode.IDLE
            events.append(PlannerEvent("plan_completed",
                                       {"command": plan.originating_command.to_dict()}))
        return events

    def reset(self) -> list[PlannerEvent]:
        """Leave the absorbing stopped state; the world stays as it is."""
        self.mode = ExecutorMode.IDLE
        self.plan = None
        self.pending_minor = {}
        self.retry_counts = {}
        self.ticks_remaining = 0
        return [PlannerEvent("reset", {})]

    # -- interrupts ----------------------------------------------------------

    def interrupt_major(self) -> tuple[Disposition, list[PlannerEvent]]:
        """Stop immediately: the in-flight action is abandoned uncommitted."""
        if self.mode == ExecutorMode.STOPPED:
            return Disposition(DispositionKind.STOPPED), []
        abandoned = self.current_action()
        self.mode = ExecutorMode.STOPPED
        self.ticks_remaining = 0
        events = [PlannerEvent("ignored", {
            "command": cmd.to_dict(),
            "reason": IgnoreReason.TOO_LATE.value,
            "deferred": True,
        }) for cmd in self.pending_minor.values()]
        self.pending_minor = {}
        events.append(PlannerEvent("stopped", {
            "abandoned": abandoned.to_dict() if abandoned else None,
        }))
        return Disposition(DispositionKind.STOPPED), events

    def interrupt_minor(self, cmd: Command) -> tuple[Disposition, list[PlannerEvent]]:
        if self.mode == ExecutorMode.STOPPED:
            return Disposition(DispositionKind.STOPPED), []
        action = self.current_action()
        if action is None:
            raise RuntimeError("minor interrupt with no active plan")
        if action.interruptable:
            try:
                events = self._apply_minor(cmd)
            except Unplannable as exc:
                return Disposition(DispositionKind.IGNORED, exc.reason), []
            return Disposition(DispositionKind.APPLIED), events
        events = []
        old = self.pending_minor.get(cmd.kind)
        if old is not None:
            events.append(PlannerEvent("superseded", {
                "old": old.to_dict(), "new": cmd.to_dict(),
            }))
        self.pending_minor[cmd.kind] = cmd
        events.append(PlannerEvent("queued", {"command": cmd.to_dict()}))
        return Disposition(DispositionKind.QUEUED), events

    # -- ticking -------------------------------------------------------------

    def tick(self) -> list[PlannerEvent]:
        """Advance one tick; commit effects only at action completion."""
        if self.mode != ExecutorMode.EXECUTING:
            raise RuntimeError(f"tick in mode {self.mode.value}")
        assert self.plan is not None
        events: list[PlannerEvent] = []
        action = self.plan.steps[self.plan.cursor]
        self.ticks_remaining -= 1
        if self.ticks_remaining > 0:
            return events

        # action completes this tick
        if action.kind == ActionKind.GRASP and self.rng.random() < self.cfg.p_grasp_fail:
            events.extend(self._handle_grasp_failure(action))
            return events

        world_events = self._commit(action)
        events.append(PlannerEvent("action_completed", {
            "index": self.plan.cursor,
            "action": action.to_dict(),
            "world_events": [ev.to_dict() for ev in world_events],
        }))
        self.plan.cursor += 1
        if action.kind == ActionKind.GRASP:
            self.retry_counts.pop(action.designator, None)

        events.extend(self._drain_pending())
        if self.mode != ExecutorMode.EXECUTING:
            return events
        if self.plan.done():
            self.mode = ExecutorMode.IDLE
            events.append(PlannerEvent("plan_completed", {
                "command": self.plan.originating_command.to_dict(),
            }))
        else:
            self.ticks_remaining = self.plan.steps[self.plan.cursor].duration_ticks
            events.append(self._started_event())
        return events

    # -- internals -----------------------------------------------------------

    def _started_event(self) -> PlannerEvent:
        assert self.plan is not None
        action = self.plan.steps[self.plan.cursor]
        data = {
            "index": self.plan.cursor,
            "action": action.to_dict(),
            "from_location": self.world.robot_location.value,
        }
        if action.designator is not None:
            d = self.plan.designators[action.designator]
            if d.resolution is not None:
                data["object"] = self.world.get(d.resolution["object_id"]).spec.type.value
            elif d.query.type is not None:
                data["object"] = d.query.type.value
        return PlannerEvent("action_started", data)

    def _resolve(self, designator: Designator, loc: Location) -> Optional[ObjectInstance]:
        taken = {
            d.resolution["object_id"] for d in self.plan.designators
            if d is not designator and d.resolution is not None
        }
        matches = [o for o in self.world.find(designator.query)
                   if o.location == loc and o.id not in taken]
        return matches[0] if matches else None

    def _commit(self, action: AtomicAction) -> list[WorldEvent]:
        """World events for a completing action, applied atomically."""
        events: list[WorldEvent] = []
        if action.kind == ActionKind.NAVIGATE:
            events.append(WorldEvent(EventKind.NAVIGATE, location=action.location))
        elif action.kind == ActionKind.OPEN_CONTAINER:
            events.append(WorldEvent(EventKind.OPEN, location=action.location))
        elif action.kind == ActionKind.CLOSE_CONTAINER:
            events.append(WorldEvent(EventKind.CLOSE, location=action.location))
        elif action.kind == ActionKind.PERCEIVE:
            designator = self.plan.designators[action.designator]
            found = self._resolve(designator, action.location)
            if found is not None:
                designator.resolution = {
                    "object_id": found.id,
                    "source_location": found.location.value,
                }
        elif action.kind == ActionKind.GRASP:
            designator = self.plan.designators[action.designator]
            if designator.resolution is None:
                raise RuntimeError("grasp before perception resolved the designator")
            events.append(WorldEvent(EventKind.GRASP,
                                     object_id=designator.resolution["object_id"]))
        elif action.kind == ActionKind.PLACE:
            designator = self.plan.designators[action.designator]
            events.append(WorldEvent(EventKind.PLACE, location=action.location,
                                     object_id=designator.resolution["object_id"]))
        elif action.kind == ActionKind.RETURN_OBJECT:
            designator = self.plan.designators[action.designator]
            obj_id = designator.resolution["object_id"]
            origin = self.world.get(obj_id).origin
            events.append(WorldEvent(EventKind.NAVIGATE, location=origin))
            events.append(WorldEvent(EventKind.RETURN, object_id=obj_id))
        for ev in events:
            self.world.apply_event(ev)
        return events

    def _handle_grasp_failure(self, action: AtomicAction) -> list[PlannerEvent]:
        assert self.plan is not None
        idx = action.designator
        prior = self.retry_counts.get(idx, 0)
        events = [PlannerEvent("action_failed", {
            "index": self.plan.cursor,
            "action": action.to_dict(),
            "reason": "grasp_failure",
        })]
        if prior < self.cfg.max_retries:
            self.retry_counts[idx] = prior + 1
            retry_steps = [
                AtomicAction(ActionKind.PERCEIVE,
                             self.cfg.interruptable[ActionKind.PERCEIVE],
                             self.cfg.durations[ActionKind.PERCEIVE],
                             location=action.location, designator=idx),
                AtomicAction(ActionKind.GRASP,
                             self.cfg.interruptable[ActionKind.GRASP],
                             self.cfg.durations[ActionKind.GRASP],
                             location=action.location, designator=idx),
            ]
            self.plan.steps[self.plan.cursor:self.plan.cursor + 1] = retry_steps
            self.ticks_remaining = retry_steps[0].duration_ticks
            events.append(PlannerEvent("retry", {
                "designator": idx,
                "attempt": self.retry_counts[idx],
                "steps": [s.to_dict() for s in self.plan.steps],
                "cursor": self.plan.cursor,
            }))
            events.append(self._started_event())
        else:
            self.mode = ExecutorMode.FAILED
            events.append(PlannerEvent("plan_failed", {
                "reason": "grasp retries exhausted",
                "designator": idx,
            }))
        return events

    def _drain_pending(self) -> list[PlannerEvent]:
        """Apply queued minor changes at the action boundary just reached."""
        events: list[PlannerEvent] = []
        if not self.pending_minor:
            return events
        for kind in list(self.pending_minor):
            cmd = self.pending_minor.pop(kind)
            if self.mode != ExecutorMode.EXECUTING or self.plan is None or self.plan.done():
                # plan ran out before the boundary change could land
                events.append(PlannerEvent("ignored", {
                    "command": cmd.to_dict(),
                    "reason": IgnoreReason.TOO_LATE.value,
                    "deferred": True,
                }))
                continue
            try:
                applied = self._apply_minor(cmd)
            except Unplannable as exc:
                events.append(PlannerEvent("ignored", {
                    "command": cmd.to_dict(),
                    "reason": exc.reason.value,
                    "deferred": True,
                }))
                continue
            for ev in applied:
                if ev.kind == "replan":
                    ev.data["deferred"] = True
            events.extend(applied)
        return events

    def _apply_minor(self, cmd: Command) -> list[PlannerEvent]:
        """Rebuild the not-yet-executed tail of the plan around ``cmd``."""
        assert self.plan is not None
        new_tail = self._replan_tail(cmd)
        self.plan.steps = self.plan.steps[:self.plan.cursor] + new_tail
        replan_event = PlannerEvent("replan", {
            "command": cmd.to_dict(),
            "steps": [s.to_dict() for s in self.plan.steps],
            "cursor": self.plan.cursor,
        })
        if self.plan.done():
            self.mode = ExecutorMode.IDLE
            return [
                replan_event,
                PlannerEvent("plan_completed", {
                    "command": self.plan.originating_command.to_dict(),
                }),
            ]
        self.ticks_remaining = self.plan.steps[self.plan.cursor].duration_ticks
        return [replan_event, self._started_event()]

    def _replan_tail(self, cmd: Command) -> list[AtomicAction]:
        assert self.plan is not None
        plan = self.plan
        pending = plan.remaining()
        kind = cmd.kind_enum()

        if kind == CommandKind.CHANGE_LOCATION:
            old_dest, new_dest = plan.destination, cmd.destination
            plan.destination = new_dest
            for d in plan.designators:
                if d.destination == old_dest:
                    d.destination = new_dest
            out = []
            for step in pending:
                if step.location == old_dest and step.kind in (ActionKind.NAVIGATE,
                                                               ActionKind.PLACE):
                    out.append(AtomicAction(step.kind, step.interruptable,
                                            step.duration_ticks, new_dest, step.designator))
                else:
                    out.append(step)
            return out

        if kind == CommandKind.BRING_ME:
            proj = self._project(pending)
            idx = len(plan.designators)
            dest = cmd.destination or plan.destination
            plan.designators.append(Designator(DesignatorType.TRANSPORT, cmd.add, dest))
            extra = _transport_steps(self.world, cmd.add, dest, proj, self.cfg, idx)
            plan.claimed = set(proj.claimed)
            return pending + extra

        if kind == CommandKind.REPLACE_OBJECT:
            return self._replan_replace(cmd, pending)

        raise Unplannable(IgnoreReason.UNKNOWN_COMMAND_TYPE, f"minor kind {cmd.kind}")

    def _replan_replace(self, cmd: Command, pending: list[AtomicAction]) -> list[AtomicAction]:
        assert self.plan is not None
        plan = self.plan
        delete = cmd.delete or ObjectQuery()
        held_id = self.world.holding
        held_matches = (
            held_id is not None
            and not delete.is_empty()
            and _attrs_match(delete, self.world.get(held_id))
        )

        # segment of the still-pending designator fetching the deleted object
        victim_idx: Optional[int] = None
        if not delete.is_empty():
            for i, d in enumerate(plan.designators):
                if d.action_type != DesignatorType.TRANSPORT:
                    continue
                seg_pending = [s for s in pending if s.designator == i]
                if not seg_pending:
                    continue
                if _query_overlaps(delete, d, self.world):
                    victim_idx = i
                    break

        steps: list[AtomicAction] = []
        if held_matches:
            ret_idx = len(plan.designators)
            held = self.world.get(held_id)
            ret = Designator(DesignatorType.PLACE, ObjectQuery(type=held.spec.type),
                             destination=held.origin,
                             resolution={"object_id": held_id,
                                         "source_location": held.origin.value})
            plan.designators.append(ret)
            steps.append(AtomicAction(
                ActionKind.RETURN_OBJECT,
                self.cfg.interruptable[ActionKind.RETURN_OBJECT],
                self.cfg.durations[ActionKind.RETURN_OBJECT],
                location=held.origin,
                designator=ret_idx,
            ))
            plan.claimed.discard(held_id)
            # everything that served the abandoned fetch is dropped
            pending = [s for s in pending
                       if s.designator is None
                       or not _serves_held(plan, s.designator, held_id)]
            base_robot = held.origin
        elif victim_idx is not None:
            dropped = plan.designators[victim_idx]
            if dropped.resolution is not None:
                plan.claimed.discard(dropped.resolution["object_id"])
            pending = [s for s in pending if s.designator != victim_idx]
            base_robot = None
        else:
            base_robot = None

        proj = self._project(pending, robot_override=base_robot)
        new_idx = len(plan.designators)
        dest = cmd.destination or plan.destination
        plan.designators.append(Designator(DesignatorType.TRANSPORT, cmd.add, dest))
        fetch = _transport_steps(self.world, cmd.add, dest, proj, self.cfg, new_idx)
        plan.claimed = set(proj.claimed) | plan.claimed
        return steps + pending + fetch

    def _project(self, pending: list[AtomicAction],
                 robot_override: Optional[Location] = None) -> _Projection:
        proj = _Projection.from_world(self.world, claimed=self.plan.claimed if self.plan else None)
        if robot_override is not None:
            proj.robot = robot_override
        for step in pending:
            if step.kind in (ActionKind.NAVIGATE,):
                proj.robot = step.location
            elif step.kind == ActionKind.OPEN_CONTAINER:
                proj.container_open[step.location] = True
            elif step.kind == ActionKind.CLOSE_CONTAINER:
                proj.container_open[step.location] = False
            elif step.kind in (ActionKind.PLACE, ActionKind.RETURN_OBJECT):
                proj.robot = step.location
        return proj


def _attrs_match(query: ObjectQuery, obj: ObjectInstance) -> bool:
    """Type/color/size match, ignoring where the object currently is."""
    attrs_only = ObjectQuery(type=query.type, color=query.color, size=query.size)
    if attrs_only.is_empty():
        return False
    return attrs_only.matches(obj)


def _query_overlaps(delete: ObjectQuery, designator: Designator, world: WorldState) -> bool:
    """Could this designator be fetching the object the user wants dropped?"""
    if designator.resolution is not None:
        return _attrs_match(delete, world.get(designator.resolution["object_id"]))
    # unresolved: overlap unless the symbolic descriptions conflict
    for field_name in ("type", "color", "size"):
        va = getattr(delete, field_name)
        vb = getattr(designator.query, field_name)
        if va is not None and vb is not None and va != vb:
            return False
    return True


def _serves_held(plan: Plan, designator_idx: int, held_id: str) -> bool:
    d = plan.designators[designator_idx]
    return d.resolution is not None and d.resolution["object_id"] == held_id
