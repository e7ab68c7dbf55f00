import random

import pytest

from kitchenhri.config import DEFAULT_WORLD
from kitchenhri.nlu.types import Command, CommandKind
from kitchenhri.planner import (
    ActionKind,
    DispositionKind,
    Executor,
    ExecutorMode,
    IgnoreReason,
    PlannerConfig,
    Unplannable,
    classify_ignored,
    compile_command,
)
from kitchenhri.world import Color, Location, ObjectQuery, ObjectType, Size, WorldState


def make_world():
    return WorldState.from_manifest(DEFAULT_WORLD)


def make_executor(world=None, seed=0, **cfg_overrides):
    world = world or make_world()
    cfg = PlannerConfig(**cfg_overrides)
    return Executor(world, cfg, random.Random(seed))


def bring(type_, **fields):
    return Command(kind=CommandKind.BRING_ME.value,
                   add=ObjectQuery(type=type_, **fields))


def run_until_idle(executor, max_ticks=500):
    events = []
    ticks = 0
    while executor.mode == ExecutorMode.EXECUTING and ticks < max_ticks:
        events.extend(executor.tick())
        ticks += 1
    assert ticks < max_ticks, "plan did not converge"
    return events


def kinds(plan):
    return [s.kind for s in plan.steps]


class TestCompile:
    def test_cup_plan_contains_uninterruptable_open(self):
        plan = compile_command(bring(ObjectType.CUP), make_world(), PlannerConfig())
        opens = [s for s in plan.steps if s.kind == ActionKind.OPEN_CONTAINER]
        assert len(opens) == 1
        assert opens[0].location == Location.CABINET
        assert opens[0].interruptable is False

    def test_cup_plan_golden_shape(self):
        plan = compile_command(bring(ObjectType.CUP), make_world(), PlannerConfig())
        assert kinds(plan) == [
            ActionKind.NAVIGATE,        # countertop, searched first
            ActionKind.PERCEIVE,
            ActionKind.NAVIGATE,        # cabinet
            ActionKind.OPEN_CONTAINER,
            ActionKind.PERCEIVE,
            ActionKind.GRASP,
            ActionKind.NAVIGATE,        # delivery to the table
            ActionKind.PLACE,
        ]

    def test_breakfast_four_segments_bowl_first(self):
        plan = compile_command(Command(kind=CommandKind.SETTING_BREAKFAST.value),
                               make_world(), PlannerConfig())
        assert len(plan.designators) == 4
        assert [d.query.type.value for d in plan.designators] == [
            "bowl", "cereal", "milk", "spoon"]
        assert plan.steps[-1].kind == ActionKind.PLACE
        # cabinet opened exactly once across all four segments
        opens = [s.location for s in plan.steps if s.kind == ActionKind.OPEN_CONTAINER]
        assert opens == [Location.CABINET, Location.DISHWASHER]

    def test_criteria_mismatch(self):
        with pytest.raises(Unplannable) as err:
            compile_command(bring(ObjectType.CUP, color=Color.GREEN),
                            make_world(), PlannerConfig())
        assert err.value.reason == IgnoreReason.CRITERIA_MISMATCH

    def test_unavailable_object(self):
        world = WorldState()
        world.spawn(make_world().get("cup-4").spec, Location.CABINET)  # only a cup
        with pytest.raises(Unplannable) as err:
            compile_command(bring(ObjectType.SPOON), world, PlannerConfig())
        assert err.value.reason == IgnoreReason.UNAVAILABLE_OBJECT

    def test_source_location_goes_straight_there(self):
        plan = compile_command(
            bring(ObjectType.CUP, source_location=Location.CABINET),
            make_world(), PlannerConfig())
        assert kinds(plan)[0] == ActionKind.NAVIGATE
        assert plan.steps[0].location == Location.CABINET


class TestTick:
    def test_plan_runs_to_completion(self):
        ex = make_executor()
        ex.start_plan(compile_command(bring(ObjectType.CUP), ex.world, ex.cfg))
        events = run_until_idle(ex)
        assert ex.mode == ExecutorMode.IDLE
        assert any(e.kind == "plan_completed" for e in events)
        cup = next(o for o in ex.world.objects.values() if o.spec.type == ObjectType.CUP)
        assert cup.location == Location.TABLE

    def test_duration_sum_matches_tick_count(self):
        ex = make_executor()
        plan = compile_command(bring(ObjectType.CUP), ex.world, ex.cfg)
        expected = sum(s.duration_ticks for s in plan.steps)
        ex.start_plan(plan)
        ticks = 0
        while ex.mode == ExecutorMode.EXECUTING:
            ex.tick()
            ticks += 1
        assert ticks == expected

    def test_tick_outside_executing_raises(self):
        ex = make_executor()
        with pytest.raises(RuntimeError):
            ex.tick()

    def test_grasp_failure_triggers_retry(self):
        ex = make_executor(p_grasp_fail=1.0, max_retries=2)
        ex.start_plan(compile_command(bring(ObjectType.CUP), ex.world, ex.cfg))
        events = []
        while ex.mode == ExecutorMode.EXECUTING:
            events.extend(ex.tick())
        retries = [e for e in events if e.kind == "retry"]
        assert len(retries) == 2  # two recovery attempts, third failure kills the plan
        assert ex.mode == ExecutorMode.FAILED
        assert any(e.kind == "plan_failed" for e in events)

    def test_first_failure_recovers(self):
        # fail exactly the first grasp attempt, then behave
        class OneShot(random.Random):
            def __init__(self):
                super().__init__(0)
                self.calls = 0
            def random(self):
                self.calls += 1
                return 0.0 if self.calls == 1 else 0.99

        world = make_world()
        ex = Executor(world, PlannerConfig(p_grasp_fail=0.5), OneShot())
        ex.start_plan(compile_command(bring(ObjectType.CUP), world, ex.cfg))
        events = run_until_idle(ex)
        assert sum(1 for e in events if e.kind == "retry") == 1
        assert ex.mode == ExecutorMode.IDLE


class TestMajorInterrupt:
    def test_stop_mid_open_leaves_container_closed(self):
        ex = make_executor()
        ex.start_plan(compile_command(bring(ObjectType.CUP), ex.world, ex.cfg))
        # run until the open_container action is in progress
        while True:
            action = ex.current_action()
            if action is not None and action.kind == ActionKind.OPEN_CONTAINER:
                break
            ex.tick()
        disposition, events = ex.interrupt_major()
        assert disposition.kind == DispositionKind.STOPPED
        assert ex.mode == ExecutorMode.STOPPED
        assert ex.world.container_open[Location.CABINET] is False
        assert events[0].data["abandoned"]["kind"] == "open_container"

    def test_stop_keeps_held_object_held(self):
        ex = make_executor()
        ex.start_plan(compile_command(bring(ObjectType.CUP), ex.world, ex.cfg))
        while ex.world.holding is None:
            ex.tick()
        ex.interrupt_major()
        assert ex.world.holding is not None
        assert ex.mode == ExecutorMode.STOPPED

    def test_stopped_is_absorbing_until_reset(self):
        ex = make_executor()
        ex.start_plan(compile_command(bring(ObjectType.CUP), ex.world, ex.cfg))
        ex.tick()
        ex.interrupt_major()
        disposition, _ = ex.interrupt_minor(bring(ObjectType.BOWL))
        assert disposition.kind == DispositionKind.STOPPED
        with pytest.raises(RuntimeError):
            ex.start_plan(compile_command(bring(ObjectType.BOWL), ex.world, ex.cfg))
        ex.reset()
        assert ex.mode == ExecutorMode.IDLE

    def test_stop_while_idle_still_stops(self):
        ex = make_executor()
        disposition, events = ex.interrupt_major()
        assert ex.mode == ExecutorMode.STOPPED
        assert disposition.kind == DispositionKind.STOPPED
        assert events[0].data["abandoned"] is None


def replace(add_type, delete_type):
    return Command(kind=CommandKind.REPLACE_OBJECT.value,
                   add=ObjectQuery(type=add_type),
                   delete=ObjectQuery(type=delete_type))


class TestMinorInterrupt:
    def test_replace_while_held_returns_then_fetches(self):
        ex = make_executor()
        ex.start_plan(compile_command(bring(ObjectType.CUP), ex.world, ex.cfg))
        while ex.world.holding is None:
            ex.tick()
        # robot now holds the cup and is about to deliver it
        disposition, events = ex.interrupt_minor(replace(ObjectType.BOWL, ObjectType.CUP))
        assert disposition.kind == DispositionKind.APPLIED
        assert any(e.kind == "replan" for e in events)
        run_until_idle(ex)
        cup = next(o for o in ex.world.objects.values() if o.spec.type == ObjectType.CUP)
        bowl = next(o for o in ex.world.objects.values() if o.spec.type == ObjectType.BOWL)
        assert cup.location == Location.CABINET  # back where it was grasped
        assert bowl.location == Location.TABLE
        delivered = [o.spec.type.value for o in ex.world.objects.values()
                     if o.location == Location.TABLE]
        assert delivered == ["bowl"]

    def test_replace_before_grasp_just_switches_target(self):
        ex = make_executor()
        ex.start_plan(compile_command(bring(ObjectType.CUP), ex.world, ex.cfg))
        ex.tick()  # mid first navigate, nothing touched yet
        disposition, _ = ex.interrupt_minor(replace(ObjectType.BOWL, ObjectType.CUP))
        assert disposition.kind == DispositionKind.APPLIED
        run_until_idle(ex)
        cup = next(o for o in ex.world.objects.values() if o.spec.type == ObjectType.CUP)
        assert cup.location == Location.CABINET  # untouched
        delivered = [o.spec.type.value for o in ex.world.objects.values()
                     if o.location == Location.TABLE]
        assert delivered == ["bowl"]

    def test_minor_during_grasp_queues_until_boundary(self):
        ex = make_executor()
        ex.start_plan(compile_command(bring(ObjectType.CUP), ex.world, ex.cfg))
        while True:
            action = ex.current_action()
            if action is not None and action.kind == ActionKind.GRASP:
                break
            ex.tick()
        disposition, events = ex.interrupt_minor(replace(ObjectType.BOWL, ObjectType.CUP))
        assert disposition.kind == DispositionKind.QUEUED
        assert any(e.kind == "queued" for e in events)
        # grasp must finish before the replan lands
        boundary_events = []
        while not any(e.kind == "replan" for e in boundary_events):
            boundary_events = ex.tick()
        grasped = [e for e in boundary_events if e.kind == "action_completed"
                   and e.data["action"]["kind"] == "grasp"]
        assert grasped, "replan applied in the same events batch as grasp completion"
        run_until_idle(ex)
        delivered = [o.spec.type.value for o in ex.world.objects.values()
                     if o.location == Location.TABLE]
        assert delivered == ["bowl"]

    def test_newest_queued_command_supersedes(self):
        ex = make_executor()
        ex.start_plan(compile_command(bring(ObjectType.CUP), ex.world, ex.cfg))
        while True:
            action = ex.current_action()
            if action is not None and action.kind == ActionKind.GRASP:
                break
            ex.tick()
        ex.interrupt_minor(replace(ObjectType.BOWL, ObjectType.CUP))
        _, events = ex.interrupt_minor(replace(ObjectType.MILK, ObjectType.CUP))
        assert any(e.kind == "superseded" for e in events)
        run_until_idle(ex)
        delivered = {o.spec.type.value for o in ex.world.objects.values()
                     if o.location == Location.TABLE}
        assert delivered == {"milk"}

    def test_change_location_redirects_delivery(self):
        ex = make_executor()
        ex.start_plan(compile_command(bring(ObjectType.CUP), ex.world, ex.cfg))
        ex.tick()
        disposition, _ = ex.interrupt_minor(Command(
            kind=CommandKind.CHANGE_LOCATION.value, destination=Location.COUNTER))
        assert disposition.kind == DispositionKind.APPLIED
        run_until_idle(ex)
        cup = next(o for o in ex.world.objects.values() if o.spec.type == ObjectType.CUP)
        assert cup.location == Location.COUNTER

    def test_additional_bring_me_during_breakfast(self):
        ex = make_executor()
        ex.start_plan(compile_command(Command(kind=CommandKind.SETTING_BREAKFAST.value),
                                      ex.world, ex.cfg))
        for _ in range(6):
            ex.tick()  # mid navigate toward the cabinet
        assert ex.current_action().kind == ActionKind.NAVIGATE
        disposition, _ = ex.interrupt_minor(bring(ObjectType.CUP))
        assert disposition.kind == DispositionKind.APPLIED
        run_until_idle(ex)
        delivered = {o.spec.type.value for o in ex.world.objects.values()
                     if o.location == Location.TABLE}
        assert delivered == {"bowl", "cereal", "milk", "spoon", "cup"}


class TestClassifyIgnored:
    def test_other_is_classified_other(self):
        ex = make_executor()
        assert classify_ignored(Command(kind="other"), ex.world, ex) == \
            IgnoreReason.CLASSIFIED_OTHER

    def test_unknown_kind(self):
        ex = make_executor()
        assert classify_ignored(Command(kind="fetch_object"), ex.world, ex) == \
            IgnoreReason.UNKNOWN_COMMAND_TYPE

    def test_malformed_takes_precedence(self):
        ex = make_executor()
        cmd = Command(kind=CommandKind.BRING_ME.value)  # no add slot
        assert classify_ignored(cmd, ex.world, ex) == IgnoreReason.MALFORMED

    def test_unavailable_object(self):
        world = WorldState()
        world.spawn(make_world().get("cup-4").spec, Location.CABINET)
        ex = Executor(world, PlannerConfig(), random.Random(0))
        assert classify_ignored(bring(ObjectType.SPOON), world, ex) == \
            IgnoreReason.UNAVAILABLE_OBJECT

    def test_criteria_mismatch(self):
        ex = make_executor()
        cmd = bring(ObjectType.CUP, color=Color.GREEN)
        assert classify_ignored(cmd, ex.world, ex) == IgnoreReason.CRITERIA_MISMATCH

    def test_valid_command_passes(self):
        ex = make_executor()
        assert classify_ignored(bring(ObjectType.CUP), ex.world, ex) is None

    def test_replace_after_delivery_is_too_late(self):
        ex = make_executor()
        ex.start_plan(compile_command(bring(ObjectType.CUP), ex.world, ex.cfg))
        run_until_idle(ex)
        cmd = replace(ObjectType.BOWL, ObjectType.CUP)
        assert classify_ignored(cmd, ex.world, ex) == IgnoreReason.TOO_LATE

    def test_duplicate_fetch_of_claimed_object(self):
        ex = make_executor()
        ex.start_plan(compile_command(bring(ObjectType.CUP), ex.world, ex.cfg))
        ex.tick()
        assert classify_ignored(bring(ObjectType.CUP), ex.world, ex) == \
            IgnoreReason.UNAVAILABLE_OBJECT

    def test_stop_always_executable(self):
        ex = make_executor()
        assert classify_ignored(Command(kind="stop"), ex.world, ex) is None


class TestSymbolicState:
    def test_idle_state(self):
        ex = make_executor()
        s = ex.symbolic_state()
        assert s.step == "idle"
        assert s.interruptable is True
        assert s.current_location == Location.TABLE

    def test_navigate_state_flags(self):
        ex = make_executor()
        ex.start_plan(compile_command(bring(ObjectType.CUP), ex.world, ex.cfg))
        s = ex.symbolic_state()
        assert s.step == "navigate"
        assert s.move_base is True and s.move_arm is False
        assert s.interruptable is True
        assert s.destination_location == Location.COUNTERTOP

    def test_grasp_state_flags(self):
        ex = make_executor()
        ex.start_plan(compile_command(bring(ObjectType.CUP), ex.world, ex.cfg))
        while ex.current_action().kind != ActionKind.GRASP:
            ex.tick()
        s = ex.symbolic_state()
        assert s.step == "grasp"
        assert s.move_arm is True and s.move_base is False
        assert s.interruptable is False
