"""WebSocket gateway: bridges the in-process bus to external clients.

Outbound, every bus envelope goes to every connected client as one JSON
frame (identical bytes to a trial-log envelope line). Inbound frames are
{"type": "utterance"|"interrupt"|"reset"|"set_age", ...} and feed the
session in arrival order.
"""

from __future__ import annotations

import json
import logging
import queue
import threading

from websockets.sync.server import Server, ServerConnection, serve

logger = logging.getLogger(__name__)


class Gateway:
    """One process-wide WebSocket fan-out with an inbound frame queue."""

    def __init__(self, port: int = 8765, host: str = "127.0.0.1"):
        self.inbound: "queue.Queue[dict]" = queue.Queue()
        self._clients: set[ServerConnection] = set()
        self._lock = threading.Lock()
        self._server: Server = serve(self._handle, host, port)
        self.port = self._server.socket.getsockname()[1]
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    def start(self) -> "Gateway":
        self._thread.start()
        return self

    def close(self) -> None:
        self._server.shutdown()

    def _handle(self, ws: ServerConnection) -> None:
        with self._lock:
            self._clients.add(ws)
        try:
            for raw in ws:
                try:
                    frame = json.loads(raw)
                except json.JSONDecodeError:
                    logger.warning("dropping undecodable gateway frame: %r", raw[:120])
                    continue
                if isinstance(frame, dict):
                    self.inbound.put(frame)
        finally:
            with self._lock:
                self._clients.discard(ws)

    def broadcast(self, payload: str) -> None:
        """Send one frame to every live client; dead clients are dropped."""
        with self._lock:
            clients = list(self._clients)
        for ws in clients:
            try:
                ws.send(payload)
            except Exception:
                with self._lock:
                    self._clients.discard(ws)

    def drain_inbound(self) -> list[dict]:
        frames = []
        while True:
            try:
                frames.append(self.inbound.get_nowait())
            except queue.Empty:
                return frames
