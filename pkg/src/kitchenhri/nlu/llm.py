"""Chat-completion backend: command extraction over an external HTTP endpoint.

The reply must contain a JSON object in the command schema; anything else
degrades to an ``other`` command with the raw reply preserved for the log.
"""

from __future__ import annotations

import json
import logging
import os
import re
from typing import Optional

import requests

from ..world import Color, Location, ObjectQuery, ObjectType, Size
from .types import BackendUnavailable, Command, DialogueContext, MalformedReply, SymbolicState

logger = logging.getLogger(__name__)

SYSTEM_PROMPT = """\
You are the dialogue bridge of a kitchen service robot. Extract the user's
command and object properties from each utterance and reply with exactly one
JSON object, no prose:

{"kind": "<bring_me|setting_breakfast|replace_object|change_location|stop|other>",
 "add": {"type": ..., "color": ..., "size": ..., "location": ...} or null,
 "delete": {"type": ..., "color": ..., "size": ...} or null,
 "destination": "table" or "counter" or null}

Object types: milk, bowl, cereal, spoon, cup. Colors: green, blue, red, white.
Sizes: small, normal, big. Storage locations: countertop, dishwasher, cabinet.
Omit fields the user did not mention. Use "other" for anything you cannot map.

Examples:
User: Bring me the small red cup.
{"kind": "bring_me", "add": {"type": "cup", "color": "red", "size": "small"}}
User: Bring me a cup instead of a bowl.
{"kind": "replace_object", "add": {"type": "cup"}, "delete": {"type": "bowl"}}
User: Stop!
{"kind": "stop"}
"""


def command_to_wire(cmd: Command) -> dict:
    """Render a command in the reply schema (location key, not source_location)."""
    def query_wire(query):
        if query is None:
            return None
        out = {}
        if query.type is not None:
            out["type"] = query.type.value
        if query.color is not None:
            out["color"] = query.color.value
        if query.size is not None:
            out["size"] = query.size.value
        if query.source_location is not None:
            out["location"] = query.source_location.value
        return out or None
    wire: dict = {"kind": cmd.kind}
    add = query_wire(cmd.add)
    delete = query_wire(cmd.delete)
    if add is not None:
        wire["add"] = add
    if delete is not None:
        wire["delete"] = delete
    if cmd.destination is not None:
        wire["destination"] = cmd.destination.value
    return wire


def parse_reply(content: str) -> Command:
    """Strict schema parse; raises MalformedReply on anything off-contract."""
    match = re.search(r"\{.*\}", content, re.DOTALL)
    if not match:
        raise MalformedReply("no JSON object in reply")
    try:
        data = json.loads(match.group(0))
    except json.JSONDecodeError as exc:
        raise MalformedReply(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise MalformedReply("reply is not a command object")
    add = _lenient_query(data.get("add"))
    delete = _lenient_query(data.get("delete"))
    dest = data.get("destination")
    destination = None
    if isinstance(dest, str):
        try:
            destination = Location(dest)
        except ValueError:
            destination = None
    kind = data.get("kind")
    if not isinstance(kind, str):
        raise MalformedReply("missing command kind")
    return Command(kind=kind, add=add, delete=delete, destination=destination)


def _lenient_query(data) -> Optional[ObjectQuery]:
    """Build a query from reply fields, dropping values the robot cannot ground."""
    if data is None:
        return None
    if not isinstance(data, dict):
        raise MalformedReply(f"object slot must be a mapping, got {type(data).__name__}")
    def grab(enum_cls, key):
        value = data.get(key)
        if not isinstance(value, str):
            return None
        try:
            return enum_cls(value)
        except ValueError:
            return None
    query = ObjectQuery(
        type=grab(ObjectType, "type"),
        color=grab(Color, "color"),
        size=grab(Size, "size"),
        source_location=grab(Location, "location"),
    )
    return None if query.is_empty() else query


class ChatCompletionBackend:
    """Talks to a chat-completion endpoint configured via URL + env credential."""

    name = "external"

    def __init__(self, base_url: str, model: str, api_key_env: str = "KITCHENHRI_API_KEY",
                 timeout_s: float = 10.0, log_bodies: bool = False,
                 session: Optional[requests.Session] = None):
        if not base_url:
            raise ValueError("external backend needs a base_url")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = os.environ.get(api_key_env, "")
        self.timeout_s = timeout_s
        self.log_bodies = log_bodies
        self.http = session or requests.Session()
        self.last_raw_reply: Optional[str] = None

    def extract(self, text: str, state: SymbolicState, ctx: DialogueContext) -> Command:
        body = {
            "model": self.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": SYSTEM_PROMPT},
                {"role": "user", "content": (
                    f"Robot state: {json.dumps(state.to_dict(), sort_keys=True)}\n"
                    f"User age group: {ctx.age.value}\n"
                    f"Utterance: {text}"
                )},
            ],
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = self.http.post(f"{self.base_url}/chat/completions",
                                  json=body, headers=headers, timeout=self.timeout_s)
        except requests.RequestException as exc:
            raise BackendUnavailable(str(exc)) from exc
        if resp.status_code in (401, 403):
            raise BackendUnavailable(f"authentication failed: HTTP {resp.status_code}")
        if resp.status_code != 200:
            raise BackendUnavailable(f"HTTP {resp.status_code}")
        if self.log_bodies:
            logger.info("chat request: %s", json.dumps(body, sort_keys=True))
            logger.info("chat reply: %s", resp.text)
        try:
            content = resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError) as exc:
            raise BackendUnavailable(f"unusable completion payload: {exc}") from exc
        self.last_raw_reply = content
        try:
            return parse_reply(content)
        except MalformedReply as exc:
            logger.warning("malformed backend reply (%s): %r", exc, content)
            return Command(kind="other")
