"""Kinematics-free kitchen world model.

Objects with type/color/size live at named locations or in the robot's
hand; containers open and close; all mutation flows through apply_event
so that executors stay replayable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional


class ObjectType(str, Enum):
    MILK = "milk"
    BOWL = "bowl"
    CEREAL = "cereal"
    SPOON = "spoon"
    CUP = "cup"


class Color(str, Enum):
    GREEN = "green"
    BLUE = "blue"
    RED = "red"
    WHITE = "white"


class Size(str, Enum):
    SMALL = "small"
    NORMAL = "normal"
    BIG = "big"


class Location(str, Enum):
    COUNTERTOP = "countertop"
    DISHWASHER = "dishwasher"
    CABINET = "cabinet"
    TABLE = "table"
    COUNTER = "counter"


#: Locations the robot searches when looking for an object.
STORAGE_LOCATIONS = (Location.COUNTERTOP, Location.CABINET, Location.DISHWASHER)
#: Locations in front of the user where fetched objects are delivered.
PLACEMENT_LOCATIONS = (Location.TABLE, Location.COUNTER)
#: Storage locations with an open/closed state.
CONTAINER_LOCATIONS = (Location.DISHWASHER, Location.CABINET)


@dataclass(frozen=True)
class ObjectSpec:
    """Fully attributed object: no wildcards."""

    type: ObjectType
    color: Color
    size: Size

    def to_dict(self) -> dict:
        return {"type": self.type.value, "color": self.color.value, "size": self.size.value}


@dataclass(frozen=True)
class ObjectQuery:
    """Partial object description; absent fields are wildcards."""

    type: Optional[ObjectType] = None
    color: Optional[Color] = None
    size: Optional[Size] = None
    source_location: Optional[Location] = None

    def is_empty(self) -> bool:
        return (
            self.type is None
            and self.color is None
            and self.size is None
            and self.source_location is None
        )

    def matches(self, inst: "ObjectInstance") -> bool:
        if self.type is not None and inst.spec.type != self.type:
            return False
        if self.color is not None and inst.spec.color != self.color:
            return False
        if self.size is not None and inst.spec.size != self.size:
            return False
        if self.source_location is not None and inst.location != self.source_location:
            return False
        return True

    def to_dict(self) -> dict:
        out = {}
        if self.type is not None:
            out["type"] = self.type.value
        if self.color is not None:
            out["color"] = self.color.value
        if self.size is not None:
            out["size"] = self.size.value
        if self.source_location is not None:
            out["source_location"] = self.source_location.value
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ObjectQuery":
        return cls(
            type=ObjectType(d["type"]) if d.get("type") else None,
            color=Color(d["color"]) if d.get("color") else None,
            size=Size(d["size"]) if d.get("size") else None,
            source_location=Location(d["source_location"]) if d.get("source_location") else None,
        )


@dataclass
class ObjectInstance:
    """One concrete object. ``location`` is None exactly while held."""

    id: str
    spec: ObjectSpec
    location: Optional[Location]
    origin: Optional[Location] = None  # location at time of most recent grasp

    @property
    def held(self) -> bool:
        return self.location is None


class EventKind(str, Enum):
    NAVIGATE = "navigate"
    OPEN = "open"
    CLOSE = "close"
    GRASP = "grasp"
    PLACE = "place"
    RETURN = "return"


@dataclass(frozen=True)
class WorldEvent:
    kind: EventKind
    location: Optional[Location] = None
    object_id: Optional[str] = None

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.location is not None:
            out["location"] = self.location.value
        if self.object_id is not None:
            out["object_id"] = self.object_id
        return out


class PreconditionViolated(Exception):
    """An event was applied in a state that forbids it: an executor bug."""

    def __init__(self, event: WorldEvent, reason: str):
        self.event = event
        self.reason = reason
        super().__init__(f"{event.kind.value}: {reason}")


class WorldState:
    """Mutable world; every change goes through apply_event."""

    def __init__(self, robot_location: Location = Location.TABLE):
        self.objects: dict[str, ObjectInstance] = {}
        self.container_open: dict[Location, bool] = {loc: False for loc in CONTAINER_LOCATIONS}
        self.robot_location: Location = robot_location
        self.holding: Optional[str] = None
        self._next_id = 1

    # -- construction ------------------------------------------------------

    def spawn(self, spec: ObjectSpec, loc: Location) -> str:
        """Add a new instance of ``spec`` at ``loc`` and return its fresh id."""
        obj_id = f"{spec.type.value}-{self._next_id}"
        self._next_id += 1
        self.objects[obj_id] = ObjectInstance(id=obj_id, spec=spec, location=loc)
        return obj_id

    @classmethod
    def from_manifest(cls, manifest: dict) -> "WorldState":
        """Build a world from a config manifest (objects, containers, robot start)."""
        world = cls(robot_location=Location(manifest.get("robot_start", "table")))
        for entry in manifest.get("objects", []):
            spec = ObjectSpec(
                type=ObjectType(entry["type"]),
                color=Color(entry["color"]),
                size=Size(entry["size"]),
            )
            world.spawn(spec, Location(entry["location"]))
        for loc, state in manifest.get("containers", {}).items():
            world.container_open[Location(loc)] = state == "open"
        return world

    # -- queries -----------------------------------------------------------

    def find(self, query: ObjectQuery) -> list[ObjectInstance]:
        """All instances matching every present query field, ordered by id."""
        if query.is_empty():
            raise ValueError("empty object query")
        return [obj for _, obj in sorted(self.objects.items()) if query.matches(obj)]

    def get(self, obj_id: str) -> ObjectInstance:
        return self.objects[obj_id]

    # -- transitions -------------------------------------------------------

    def apply_event(self, ev: WorldEvent) -> None:
        """Apply one event, raising PreconditionViolated on any contract breach."""
        kind = ev.kind
        if kind == EventKind.NAVIGATE:
            if ev.location is None:
                raise PreconditionViolated(ev, "navigate needs a location")
            self.robot_location = ev.location
        elif kind == EventKind.OPEN or kind == EventKind.CLOSE:
            if ev.location not in CONTAINER_LOCATIONS:
                raise PreconditionViolated(ev, f"{ev.location} is not a container")
            self.container_open[ev.location] = kind == EventKind.OPEN
        elif kind == EventKind.GRASP:
            obj = self._require_object(ev)
            if obj.held:
                raise PreconditionViolated(ev, f"{obj.id} is already held")
            if self.holding is not None:
                raise PreconditionViolated(ev, f"already holding {self.holding}")
            if self.robot_location != obj.location:
                raise PreconditionViolated(
                    ev, f"robot at {self.robot_location.value}, object at {obj.location.value}"
                )
            if obj.location in CONTAINER_LOCATIONS and not self.container_open[obj.location]:
                raise PreconditionViolated(ev, f"{obj.location.value} is closed")
            obj.origin = obj.location
            obj.location = None
            self.holding = obj.id
        elif kind == EventKind.PLACE:
            obj = self._require_object(ev)
            if self.holding != obj.id:
                raise PreconditionViolated(ev, f"not holding {obj.id}")
            if ev.location is None:
                raise PreconditionViolated(ev, "place needs a location")
            obj.location = ev.location
            self.holding = None
        elif kind == EventKind.RETURN:
            obj = self._require_object(ev)
            if self.holding != obj.id:
                raise PreconditionViolated(ev, f"not holding {obj.id}")
            if obj.origin is None:
                raise PreconditionViolated(ev, f"{obj.id} has no recorded origin")
            obj.location = obj.origin
            self.holding = None
        else:  # pragma: no cover - enum is closed
            raise PreconditionViolated(ev, f"unknown event kind {kind}")

    def _require_object(self, ev: WorldEvent) -> ObjectInstance:
        if ev.object_id is None or ev.object_id not in self.objects:
            raise PreconditionViolated(ev, f"no such object {ev.object_id}")
        return self.objects[ev.object_id]

    # -- snapshots ---------------------------------------------------------

    def snapshot(self) -> dict:
        """Canonical dict view, stable ordering; embedded in trial logs."""
        return {
            "objects": [
                {
                    "id": obj.id,
                    "type": obj.spec.type.value,
                    "color": obj.spec.color.value,
                    "size": obj.spec.size.value,
                    "location": obj.location.value if obj.location else "held",
                    "origin": obj.origin.value if obj.origin else None,
                }
                for _, obj in sorted(self.objects.items())
            ],
            "containers": {loc.value: ("open" if is_open else "closed")
                           for loc, is_open in sorted(self.container_open.items())},
            "robot": {
                "location": self.robot_location.value,
                "holding": self.holding,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True, separators=(",", ":"))

    def copy(self) -> "WorldState":
        clone = WorldState(robot_location=self.robot_location)
        clone.objects = {
            oid: ObjectInstance(id=o.id, spec=o.spec, location=o.location, origin=o.origin)
            for oid, o in self.objects.items()
        }
        clone.container_open = dict(self.container_open)
        clone.holding = self.holding
        clone._next_id = self._next_id
        return clone


def iter_specs(types: Iterable[ObjectType] = tuple(ObjectType),
               colors: Iterable[Color] = tuple(Color),
               sizes: Iterable[Size] = tuple(Size)) -> list[ObjectSpec]:
    """Every fully attributed spec over the given attribute domains."""
    return [ObjectSpec(t, c, s) for t in types for c in colors for s in sizes]
