// Gateway client: one WebSocket, reconnect with backoff, typed senders.
// The socket constructor is injectable so tests can run under node.

import { Envelope, OutboundFrame } from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
}

export type SocketCtor = new (url: string) => SocketLike;

export interface GatewayHandlers {
  onFrame: (env: Envelope) => void;
  onStatus?: (connected: boolean) => void;
}

export class GatewayClient {
  private socket: SocketLike | null = null;
  private backoffMs = 500;
  private closed = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly handlers: GatewayHandlers,
    private readonly socketCtor: SocketCtor =
      (globalThis as { WebSocket?: SocketCtor }).WebSocket as SocketCtor,
  ) {
    if (!this.socketCtor) {
      throw new Error("no WebSocket implementation available");
    }
  }

  connect(): void {
    this.closed = false;
    const socket = new this.socketCtor(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.backoffMs = 500;
      this.handlers.onStatus?.(true);
    };
    socket.onmessage = (ev) => {
      let frame: Envelope;
      try {
        frame = JSON.parse(String(ev.data)) as Envelope;
      } catch {
        return; // not a frame; ignore
      }
      this.handlers.onFrame(frame);
    };
    socket.onerror = () => { /* onclose follows and schedules the retry */ };
    socket.onclose = () => {
      this.handlers.onStatus?.(false);
      this.socket = null;
      if (!this.closed) {
        this.timer = setTimeout(() => this.connect(), this.backoffMs);
        this.backoffMs = Math.min(this.backoffMs * 2, 10_000);
      }
    };
  }

  close(): void {
    this.closed = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.socket?.close();
  }

  private send(frame: OutboundFrame): void {
    this.socket?.send(JSON.stringify(frame));
  }

  sendUtterance(text: string, ageGroup?: string): void {
    this.send(ageGroup ? { type: "utterance", text, age_group: ageGroup }
                       : { type: "utterance", text });
  }

  sendStop(): void {
    this.send({ type: "interrupt" });
  }

  sendReset(): void {
    this.send({ type: "reset" });
  }

  setAge(group: string): void {
    this.send({ type: "set_age", group });
  }
}
