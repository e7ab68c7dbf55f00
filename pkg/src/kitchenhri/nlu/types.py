"""Message types shared between the dialogue bridge, planner, and logs."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from ..speech import BinaryAge
from ..world import Location, ObjectQuery


class BackendUnavailable(Exception):
    """The configured dialogue backend could not produce a reply."""


class MalformedReply(Exception):
    """The backend replied, but not in the command schema."""


class CommandKind(str, Enum):
    BRING_ME = "bring_me"
    SETTING_BREAKFAST = "setting_breakfast"
    REPLACE_OBJECT = "replace_object"
    CHANGE_LOCATION = "change_location"
    STOP = "stop"
    OTHER = "other"


#: Plan changes the executor folds in without restarting the interaction.
MINOR_KINDS = (
    CommandKind.BRING_ME,
    CommandKind.SETTING_BREAKFAST,
    CommandKind.REPLACE_OBJECT,
    CommandKind.CHANGE_LOCATION,
)
KNOWN_KINDS = {k.value for k in CommandKind}


@dataclass
class Command:
    """A routed instruction for the robot.

    ``kind`` stays a plain string on the wire so that unknown types coming
    out of a flaky backend survive to the planner, which ignores them with
    an explicit reason instead of crashing.
    """

    kind: str = CommandKind.OTHER.value
    add: Optional[ObjectQuery] = None
    delete: Optional[ObjectQuery] = None
    destination: Optional[Location] = None

    def kind_enum(self) -> Optional[CommandKind]:
        try:
            return CommandKind(self.kind)
        except ValueError:
            return None

    def structural_error(self) -> Optional[str]:
        """Reason this command violates its kind's slot contract, if any."""
        kind = self.kind_enum()
        if kind is None:
            return None  # unknown kinds are classified separately
        if kind == CommandKind.BRING_ME and (self.add is None or self.add.is_empty()):
            return "bring_me without a target object"
        if kind == CommandKind.REPLACE_OBJECT and (self.add is None or self.add.is_empty()):
            return "replace_object without a replacement object"
        if kind == CommandKind.CHANGE_LOCATION and self.destination is None:
            return "change_location without a destination"
        if kind in (CommandKind.STOP, CommandKind.OTHER) and (
            self.add is not None or self.delete is not None or self.destination is not None
        ):
            return f"{kind.value} carries object slots"
        return None

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.add is not None:
            out["add"] = self.add.to_dict()
        if self.delete is not None:
            out["delete"] = self.delete.to_dict()
        if self.destination is not None:
            out["destination"] = self.destination.value
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Command":
        return cls(
            kind=d.get("kind", CommandKind.OTHER.value),
            add=ObjectQuery.from_dict(d["add"]) if d.get("add") else None,
            delete=ObjectQuery.from_dict(d["delete"]) if d.get("delete") else None,
            destination=Location(d["destination"]) if d.get("destination") else None,
        )


@dataclass
class SymbolicState:
    """Planner-published execution state, one envelope per tick."""

    step: str = "idle"
    interruptable: bool = True
    move_arm: bool = False
    move_base: bool = False
    current_location: Optional[Location] = None
    destination_location: Optional[Location] = None

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "interruptable": self.interruptable,
            "move_arm": self.move_arm,
            "move_base": self.move_base,
            "current_location": self.current_location.value if self.current_location else None,
            "destination_location": (
                self.destination_location.value if self.destination_location else None
            ),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SymbolicState":
        return cls(
            step=d.get("step", "idle"),
            interruptable=bool(d.get("interruptable", True)),
            move_arm=bool(d.get("move_arm", False)),
            move_base=bool(d.get("move_base", False)),
            current_location=Location(d["current_location"]) if d.get("current_location") else None,
            destination_location=(
                Location(d["destination_location"]) if d.get("destination_location") else None
            ),
        )


class ResponseCategory(str, Enum):
    CONFIRMATION = "confirmation"
    NARRATION = "narration"
    REFUSAL = "refusal"
    COMPLETION = "completion"
    ERROR = "error"


@dataclass(frozen=True)
class Response:
    text: str
    category: ResponseCategory
    command_kind: Optional[str] = None  # echo of the acknowledged command
    add_query: Optional[dict] = None
    delete_query: Optional[dict] = None

    def to_dict(self) -> dict:
        out: dict = {"text": self.text, "category": self.category.value}
        if self.command_kind is not None:
            out["command_kind"] = self.command_kind
        if self.add_query is not None:
            out["add_query"] = self.add_query
        if self.delete_query is not None:
            out["delete_query"] = self.delete_query
        return out


@dataclass
class VerbosityPolicy:
    """Which planner events get voiced per binary age group."""

    narrate_actions: dict[BinaryAge, bool] = field(
        default_factory=lambda: {BinaryAge.OLD: True, BinaryAge.YOUNG: False}
    )

    def narrates(self, age: BinaryAge) -> bool:
        return self.narrate_actions.get(age, False)


@dataclass
class DialogueContext:
    """Rolling dialogue state for contextual references like a bare "instead"."""

    last_add: Optional[ObjectQuery] = None
    age: BinaryAge = BinaryAge.YOUNG
    turns: int = 0
