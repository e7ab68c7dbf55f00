"""Stub dialogue backend: grammar truth corrupted at configurable rates.

Reproduces the error profile of a remote chat model without the network.
Each command field is corrupted independently, so the expected per-field
accuracy equals one minus its configured confusion rate. The same model
also runs behind a local fake chat-completion HTTP server so the external
client path can be exercised offline.
"""

from __future__ import annotations

import json
import random
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from ..world import Color, Location, ObjectQuery, ObjectType, Size
from .grammar import parse
from .llm import command_to_wire
from .types import Command, DialogueContext, SymbolicState

#: Kind mix-ups a sloppy language model plausibly makes; stop is excluded
#: because nothing in the benchmark reads as an emergency halt.
_KIND_POOL = ["bring_me", "setting_breakfast", "replace_object", "change_location",
              "other", "fetch_object"]

_FIELD_DOMAINS = {
    "type": [t.value for t in ObjectType],
    "color": [c.value for c in Color],
    "size": [s.value for s in Size],
    "location": [loc.value for loc in (Location.COUNTERTOP, Location.DISHWASHER,
                                       Location.CABINET)],
}


class ConfusionModel:
    """Independent per-field corruption of a gold command.

    Fields the gold carries are corrupted at their configured rate;
    fields the gold lacks are hallucinated at the separate (small)
    ``hallucination`` rate, the way a real model occasionally invents a
    slot but mangles present ones far more often.
    """

    def __init__(self, rates: dict[str, float], rng: random.Random):
        self.rates = dict(rates)
        self.hallucination = float(self.rates.pop("hallucination", 0.0))
        self.rng = rng

    def corrupt(self, gold: Command) -> Command:
        kind = gold.kind
        if self.rng.random() < self.rates.get("command", 0.0):
            pool = [k for k in _KIND_POOL if k != kind]
            kind = pool[self.rng.randrange(len(pool))]
        add = self._corrupt_query(gold.add, "add", with_location=True)
        delete = self._corrupt_query(gold.delete, "delete", with_location=True)
        return Command(kind=kind, add=add, delete=delete, destination=gold.destination)

    def _corrupt_query(self, query: Optional[ObjectQuery], side: str,
                       with_location: bool) -> Optional[ObjectQuery]:
        fields = {}
        keys = ["type", "color", "size"] + (["location"] if with_location else [])
        for key in keys:
            attr = "source_location" if key == "location" else key
            gold_value = getattr(query, attr, None) if query is not None else None
            gold_str = gold_value.value if gold_value is not None else None
            fields[attr] = self._corrupt_field(f"{side}_{key}", gold_str, key)
        query_out = ObjectQuery(
            type=ObjectType(fields["type"]) if fields["type"] else None,
            color=Color(fields["color"]) if fields["color"] else None,
            size=Size(fields["size"]) if fields["size"] else None,
            source_location=Location(fields["source_location"])
            if fields["source_location"] else None,
        )
        return None if query_out.is_empty() else query_out

    def _corrupt_field(self, rate_key: str, gold: Optional[str], domain_key: str) -> Optional[str]:
        rate = self.rates.get(rate_key, 0.0) if gold is not None else self.hallucination
        if self.rng.random() >= rate:
            return gold
        wrong = [v for v in _FIELD_DOMAINS[domain_key] if v != gold]
        if gold is not None:
            wrong.append(None)  # dropping the slot is also an error
        choice = self.rng.randrange(len(wrong))
        return wrong[choice]


class StubBackend:
    """In-process backend: grammar gold put through the confusion model."""

    name = "stub"

    def __init__(self, rates: dict[str, float], rng: random.Random):
        self.model = ConfusionModel(rates, rng)

    def extract(self, text: str, state: SymbolicState, ctx: DialogueContext) -> Command:
        return self.model.corrupt(parse(text, ctx))


class StubChatServer:
    """Local fake of the chat-completion endpoint.

    In scripted mode it replays canned reply bodies in order; otherwise it
    parses the utterance with the grammar, applies the confusion model, and
    answers in the wire schema the real endpoint would use.
    """

    def __init__(self, rates: Optional[dict[str, float]] = None, seed: int = 0,
                 canned_replies: Optional[list[str]] = None, port: int = 0):
        self._model = ConfusionModel(rates or {}, random.Random(seed))
        self._canned = list(canned_replies or [])
        self._lock = threading.Lock()
        outer = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"  # keep-alive; evals send thousands of requests

            def do_POST(self):  # noqa: N802 - http.server API
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                content = outer._reply_content(body)
                payload = json.dumps({
                    "choices": [{"message": {"role": "assistant", "content": content}}]
                }).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", port), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    def _reply_content(self, request_body: dict) -> str:
        with self._lock:
            if self._canned:
                return self._canned.pop(0)
            text = ""
            for message in request_body.get("messages", []):
                if message.get("role") == "user":
                    for line in str(message.get("content", "")).splitlines():
                        if line.startswith("Utterance:"):
                            text = line[len("Utterance:"):].strip()
            cmd = self._model.corrupt(parse(text))
            return json.dumps(command_to_wire(cmd), sort_keys=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    def start(self) -> "StubChatServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "StubChatServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
