import random
import string

from kitchenhri.nlu.dialogue import DialogueBridge, describe
from kitchenhri.nlu.types import (
    Command,
    CommandKind,
    ResponseCategory,
    SymbolicState,
    VerbosityPolicy,
)
from kitchenhri.planner import PlannerEvent
from kitchenhri.speech import BinaryAge, Corruption, Transcript
from kitchenhri.world import Location, ObjectQuery, ObjectType


def clean(text):
    return Transcript(text, 0.95, Corruption.CLEAN)


def idle_state():
    return SymbolicState(step="idle", interruptable=True)


def test_young_bring_me_confirmation():
    bridge = DialogueBridge()
    bridge.ctx.age = BinaryAge.YOUNG
    response, cmd = bridge.route(clean("Bring me the cup."), idle_state())
    assert response.category == ResponseCategory.CONFIRMATION
    assert response.text == "Getting you the cup."
    assert cmd.kind == "bring_me"


def test_old_confirmation_is_fuller():
    bridge = DialogueBridge()
    bridge.ctx.age = BinaryAge.OLD
    response, _ = bridge.route(clean("Bring me the cup."), idle_state())
    assert response.category == ResponseCategory.CONFIRMATION
    assert "fetch the cup" in response.text


def test_unknown_object_refusal_names_it():
    bridge = DialogueBridge()
    response, cmd = bridge.route(clean("bring me a pole"), idle_state())
    assert response.category == ResponseCategory.REFUSAL
    assert "pole" in response.text
    assert cmd.kind == "other"


def test_stop_confirmed_unconditionally():
    bridge = DialogueBridge()
    bridge.ctx.age = BinaryAge.OLD
    busy = SymbolicState(step="grasp", interruptable=False)
    response, cmd = bridge.route(clean("Stop!"), busy)
    assert cmd.kind == "stop"
    assert response.category == ResponseCategory.CONFIRMATION


def test_minor_during_uninterruptable_step_says_queued():
    bridge = DialogueBridge()
    busy = SymbolicState(step="grasp", interruptable=False)
    response, cmd = bridge.route(clean("Bring me the bowl instead of the cup."), busy)
    assert cmd.kind == "replace_object"
    assert "as soon as I finish" in response.text
    assert response.category == ResponseCategory.CONFIRMATION


def test_confirmation_echoes_queries():
    bridge = DialogueBridge()
    response, _ = bridge.route(clean("Bring me the bowl instead of the cup."),
                               idle_state())
    assert response.command_kind == "replace_object"
    assert response.add_query == {"type": "bowl"}
    assert response.delete_query == {"type": "cup"}


def test_last_add_context_updates():
    bridge = DialogueBridge()
    bridge.route(clean("Bring me the small red cup."), idle_state())
    assert bridge.ctx.last_add == ObjectQuery.from_dict(
        {"type": "cup", "color": "red", "size": "small"})
    _, cmd = bridge.route(clean("Bring me the bowl instead."), idle_state())
    assert cmd.kind == "replace_object"
    assert cmd.delete.type == ObjectType.BOWL or cmd.delete.type == ObjectType.CUP
    assert cmd.delete.type == ObjectType.CUP


def test_route_is_total_on_fuzz():
    bridge = DialogueBridge()
    rng = random.Random(3)
    for _ in range(500):
        text = "".join(rng.choice(string.printable) for _ in range(rng.randrange(1, 40)))
        response, cmd = bridge.route(clean(text), idle_state())
        assert response is not None and cmd is not None


def test_low_confidence_reask_disabled_by_default():
    bridge = DialogueBridge()
    weak = Transcript("Bring me the cup.", 0.05, Corruption.CLEAN)
    _, cmd = bridge.route(weak, idle_state())
    assert cmd.kind == "bring_me"


def test_low_confidence_reask_hook():
    bridge = DialogueBridge(min_confidence=0.5)
    weak = Transcript("Bring me the cup.", 0.05, Corruption.CLEAN)
    response, cmd = bridge.route(weak, idle_state())
    assert response.category == ResponseCategory.REFUSAL
    assert cmd.kind == "other"


def nav_event():
    return PlannerEvent("action_started", {
        "action": {"kind": "navigate", "location": "cabinet"},
        "from_location": "countertop",
    })


def test_narrate_movement_for_old_users():
    bridge = DialogueBridge()
    response = bridge.narrate(nav_event(), BinaryAge.OLD)
    assert response.category == ResponseCategory.NARRATION
    assert response.text == "Moving from the countertop to the cabinet."


def test_no_movement_narration_for_young_users():
    bridge = DialogueBridge()
    assert bridge.narrate(nav_event(), BinaryAge.YOUNG) is None


def test_completion_always_voiced():
    bridge = DialogueBridge()
    done = PlannerEvent("plan_completed", {"command": {"kind": "bring_me"}})
    for age in (BinaryAge.YOUNG, BinaryAge.OLD):
        response = bridge.narrate(done, age)
        assert response.category == ResponseCategory.COMPLETION
    breakfast_done = PlannerEvent("plan_completed",
                                  {"command": {"kind": "setting_breakfast"}})
    assert "Breakfast" in bridge.narrate(breakfast_done, BinaryAge.YOUNG).text


def test_ignored_feedback():
    bridge = DialogueBridge()
    ev = PlannerEvent("ignored", {
        "command": {"kind": "bring_me", "add": {"type": "spoon"}},
        "reason": "unavailable_object",
    })
    response = bridge.narrate(ev, BinaryAge.YOUNG)
    assert response.category == ResponseCategory.ERROR
    assert "spoon" in response.text
    # other/unknown/malformed were already refused at routing time
    ev = PlannerEvent("ignored", {"command": {"kind": "other"},
                                  "reason": "classified_other"})
    assert bridge.narrate(ev, BinaryAge.OLD) is None


def test_describe_orders_attributes():
    q = ObjectQuery.from_dict({"type": "cup", "color": "red", "size": "small"})
    assert describe(q) == "the small red cup"
    assert describe(None) == "something"
    q = ObjectQuery.from_dict({"type": "milk", "source_location": "cabinet"})
    assert describe(q) == "the milk from the cabinet"


def test_verbosity_policy_override():
    policy = VerbosityPolicy(narrate_actions={BinaryAge.YOUNG: True,
                                              BinaryAge.OLD: False})
    bridge = DialogueBridge(policy=policy)
    assert bridge.narrate(nav_event(), BinaryAge.YOUNG) is not None
    assert bridge.narrate(nav_event(), BinaryAge.OLD) is None
