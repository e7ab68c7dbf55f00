"""In-process topic bus with deterministic, globally ordered delivery.

Every publish appends an Envelope carrying a global sequence number and
the current simulation tick. Subscribers pull with drain(), which keeps
interrupt timing deterministic and makes trial logs replayable.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional


class Topic(str, Enum):
    UTTERANCE_IN = "utterance_in"
    TRANSCRIPT = "transcript"
    COMMAND = "command"
    ROBOT_STATE = "robot_state"
    RESPONSE_OUT = "response_out"
    INTERRUPT = "interrupt"
    TRIAL_EVENT = "trial_event"


class TypeMismatch(TypeError):
    """Payload type does not match the topic's declared message type."""


@dataclass(frozen=True)
class Envelope:
    seq: int
    tick: int
    topic: Topic
    payload: Any

    def to_frame(self) -> dict:
        payload = self.payload.to_dict() if hasattr(self.payload, "to_dict") else self.payload
        return {"seq": self.seq, "tick": self.tick, "topic": self.topic.value, "payload": payload}

    def to_json(self) -> str:
        return json.dumps(self.to_frame(), sort_keys=True, separators=(",", ":"))


class Subscription:
    """Private FIFO queue of envelopes for one subscriber."""

    def __init__(self, name: str, topics: tuple[Topic, ...]):
        self.name = name
        self.topics = topics
        self._pending: list[Envelope] = []

    def drain(self) -> list[Envelope]:
        """Return and consume all pending envelopes, in publish order."""
        out = self._pending
        self._pending = []
        return out


class MessageBus:
    """Topic pub/sub with one global sequence counter.

    Operations are serialized behind a single lock; payload types per
    topic are enforced when a schema is registered.
    """

    def __init__(self, schema: Optional[dict[Topic, type]] = None):
        self._lock = threading.Lock()
        self._seq = 0
        self._tick = 0
        self._subs: dict[Topic, list[Subscription]] = {t: [] for t in Topic}
        self._schema = schema or {}

    @property
    def tick(self) -> int:
        return self._tick

    def set_tick(self, tick: int) -> None:
        with self._lock:
            if tick < self._tick:
                raise ValueError(f"tick moved backwards: {tick} < {self._tick}")
            self._tick = tick

    def subscribe(self, name: str, *topics: Topic) -> Subscription:
        sub = Subscription(name, topics)
        with self._lock:
            for topic in topics:
                self._subs[topic].append(sub)
        return sub

    def publish(self, topic: Topic, payload: Any) -> int:
        """Append an envelope; all current subscribers of ``topic`` see it once."""
        expected = self._schema.get(topic)
        if expected is not None and not isinstance(payload, expected):
            raise TypeMismatch(
                f"topic {topic.value} expects {expected.__name__}, got {type(payload).__name__}"
            )
        with self._lock:
            self._seq += 1
            env = Envelope(seq=self._seq, tick=self._tick, topic=topic, payload=payload)
            for sub in self._subs[topic]:
                sub._pending.append(env)
            return self._seq
