"""Dialogue bridge: routes utterances to commands and voices the robot.

Response text comes from fixed templates conditioned on the user's binary
age group: older users hear the robot think out loud step by step, younger
users get short confirmations and the completion message.
"""

from __future__ import annotations

from typing import Optional

from ..speech import BinaryAge, Transcript
from ..world import ObjectQuery
from .grammar import GrammarBackend, parse_with_info
from .types import (
    BackendUnavailable,
    Command,
    CommandKind,
    DialogueContext,
    Response,
    ResponseCategory,
    SymbolicState,
    VerbosityPolicy,
)


def describe(query: Optional[ObjectQuery]) -> str:
    """Render an object query the way a person would say it."""
    if query is None or query.is_empty():
        return "something"
    words = []
    if query.size is not None:
        words.append(query.size.value)
    if query.color is not None:
        words.append(query.color.value)
    words.append(query.type.value if query.type is not None else "object")
    phrase = "the " + " ".join(words)
    if query.source_location is not None:
        phrase += f" from the {query.source_location.value}"
    return phrase


def _confirmation(cmd: Command, age: BinaryAge, queued: bool) -> Response:
    kind = cmd.kind_enum()
    if kind == CommandKind.BRING_ME:
        text = f"Getting you {describe(cmd.add)}."
        if age == BinaryAge.OLD:
            text = f"Of course. I will fetch {describe(cmd.add)} and bring it to you."
    elif kind == CommandKind.SETTING_BREAKFAST:
        text = "Setting the table for breakfast."
        if age == BinaryAge.OLD:
            text = "Of course. I will set the table for breakfast now."
    elif kind == CommandKind.REPLACE_OBJECT:
        what = describe(cmd.delete) if cmd.delete else "that"
        text = f"Swapping {what} for {describe(cmd.add)}."
        if age == BinaryAge.OLD:
            text = f"Understood. I will put {what} back and get {describe(cmd.add)} instead."
    elif kind == CommandKind.CHANGE_LOCATION:
        text = f"I will place it on the {cmd.destination.value} instead."
    else:
        text = "Okay."
    if queued:
        text += " I will make the change as soon as I finish this step."
    return Response(text, ResponseCategory.CONFIRMATION, command_kind=cmd.kind,
                    add_query=cmd.add.to_dict() if cmd.add else None,
                    delete_query=cmd.delete.to_dict() if cmd.delete else None)


class DialogueBridge:
    """Maps (utterance, symbolic state, age) to (response, command)."""

    def __init__(self, backend=None, policy: Optional[VerbosityPolicy] = None,
                 min_confidence: Optional[float] = None):
        self.backend = backend or GrammarBackend()
        self.policy = policy or VerbosityPolicy()
        self.min_confidence = min_confidence  # re-ask hook, disabled by default
        self.ctx = DialogueContext()

    def route(self, transcript: Transcript, state: SymbolicState) -> tuple[Response, Command]:
        """Every transcript yields exactly one (response, command) pair."""
        self.ctx.turns += 1
        if self.min_confidence is not None and transcript.confidence < self.min_confidence:
            return (
                Response("Sorry, I did not hear that well. Could you repeat it?",
                         ResponseCategory.REFUSAL),
                Command(kind=CommandKind.OTHER.value),
            )
        try:
            cmd = self.backend.extract(transcript.text, state, self.ctx)
        except BackendUnavailable:
            return (
                Response("I am having trouble understanding right now, please try again.",
                         ResponseCategory.ERROR),
                Command(kind=CommandKind.OTHER.value),
            )
        response = self._respond(transcript, cmd, state)
        if cmd.add is not None and cmd.structural_error() is None:
            self.ctx.last_add = cmd.add
        return response, cmd

    def _respond(self, transcript: Transcript, cmd: Command, state: SymbolicState) -> Response:
        kind = cmd.kind_enum()
        if kind == CommandKind.STOP:
            return Response("Stopping right away.", ResponseCategory.CONFIRMATION,
                            command_kind=cmd.kind)
        if kind == CommandKind.OTHER or kind is None:
            _, info = parse_with_info(transcript.text, self.ctx)
            if info.unknown_nouns:
                return Response(
                    f"Sorry, I do not know what a {info.unknown_nouns[0]} is.",
                    ResponseCategory.REFUSAL,
                )
            return Response("Sorry, I did not understand that. Could you rephrase?",
                            ResponseCategory.REFUSAL)
        if cmd.structural_error() is not None:
            return Response("Sorry, I got confused by that request. Could you say it again?",
                            ResponseCategory.REFUSAL)
        queued = (
            kind in (CommandKind.REPLACE_OBJECT, CommandKind.CHANGE_LOCATION,
                     CommandKind.BRING_ME, CommandKind.SETTING_BREAKFAST)
            and state.step not in ("idle", "stopped", "failed")
            and not state.interruptable
        )
        return _confirmation(cmd, self.ctx.age, queued)

    # -- planner-event feedback ------------------------------------------

    def narrate(self, event, age: Optional[BinaryAge] = None) -> Optional[Response]:
        """Voice a planner event per the verbosity policy; None stays silent."""
        age = age if age is not None else self.ctx.age
        kind = event.kind
        data = event.data
        if kind == "action_started":
            if not self.policy.narrates(age):
                return None
            return self._narrate_action(data)
        if kind == "plan_completed":
            cmd = data.get("command", {})
            if cmd.get("kind") == CommandKind.SETTING_BREAKFAST.value:
                text = "Breakfast is served."
            else:
                text = "Done. Everything you asked for is in place."
            return Response(text, ResponseCategory.COMPLETION,
                            command_kind=cmd.get("kind"))
        if kind == "plan_failed":
            return Response(f"I could not finish that: {data.get('reason', 'unknown failure')}.",
                            ResponseCategory.ERROR)
        if kind == "retry":
            if not self.policy.narrates(age):
                return None
            return Response("That grip did not work, let me try again.",
                            ResponseCategory.NARRATION)
        if kind == "ignored":
            return self._narrate_ignored(data)
        return None

    def _narrate_action(self, data: dict) -> Optional[Response]:
        action = data.get("action", {})
        loc = action.get("location")
        obj = data.get("object", "object")
        templates = {
            "navigate": f"Moving from the {data.get('from_location')} to the {loc}.",
            "open_container": f"Opening the {loc}.",
            "close_container": f"Closing the {loc}.",
            "perceive": f"Looking around the {loc}.",
            "grasp": f"Picking up the {obj}.",
            "place": f"Placing the {obj} on the {loc}.",
            "return_object": f"Taking the {obj} back to the {loc}.",
        }
        text = templates.get(action.get("kind"))
        return Response(text, ResponseCategory.NARRATION) if text else None

    def _narrate_ignored(self, data: dict) -> Optional[Response]:
        reason = data.get("reason")
        cmd = Command.from_dict(data.get("command", {}))
        if reason == "unavailable_object":
            return Response(f"I could not find {describe(cmd.add)} anywhere.",
                            ResponseCategory.ERROR)
        if reason == "criteria_mismatch":
            return Response(f"Nothing here matches {describe(cmd.add)}.",
                            ResponseCategory.ERROR)
        if reason == "too_late":
            return Response("Too late for that change, I already finished it.",
                            ResponseCategory.ERROR)
        # other/unknown/malformed were already refused at routing time
        return None
