/**
 * Bridge connection: one stream per session, with auto-reconnect.
 *
 * The client transmits only chat text and e-stop presses; everything else
 * is received and handed to the caller in stream order.
 */

import { ClientFrame, ServerFrame, SessionInfo } from "./types";

export interface WebSocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  readyState?: number;
}

export type WebSocketFactory = (url: string) => WebSocketLike;

export interface BridgeClientOptions {
  baseUrl: string; // e.g. http://127.0.0.1:8732
  sessionId: string;
  onFrame: (frame: ServerFrame) => void;
  onConnectionChange?: (connected: boolean) => void;
  wsFactory?: WebSocketFactory;
  reconnectDelayMs?: number;
}

export function wsUrl(baseUrl: string, sessionId: string): string {
  return baseUrl.replace(/^http/, "ws") + `/session/${sessionId}/ws`;
}

export class BridgeClient {
  private opts: BridgeClientOptions;
  private ws: WebSocketLike | null = null;
  private closed = false;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(opts: BridgeClientOptions) {
    this.opts = opts;
  }

  connect(): void {
    const factory =
      this.opts.wsFactory ?? ((url: string) => new WebSocket(url) as unknown as WebSocketLike);
    const ws = factory(wsUrl(this.opts.baseUrl, this.opts.sessionId));
    this.ws = ws;
    ws.onopen = () => this.opts.onConnectionChange?.(true);
    ws.onmessage = (ev) => {
      let frame: ServerFrame;
      try {
        frame = JSON.parse(ev.data);
      } catch {
        return; // not ours to interpret
      }
      this.opts.onFrame(frame);
    };
    ws.onclose = () => {
      this.opts.onConnectionChange?.(false);
      this.scheduleReconnect();
    };
    ws.onerror = () => {
      /* onclose follows and handles the retry */
    };
  }

  private scheduleReconnect(): void {
    if (this.closed || this.reconnectTimer !== null) return;
    const delay = this.opts.reconnectDelayMs ?? 1000;
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      if (!this.closed) this.connect();
    }, delay);
  }

  close(): void {
    this.closed = true;
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    this.ws?.close();
  }

  private sendFrame(frame: ClientFrame): boolean {
    try {
      this.ws?.send(JSON.stringify(frame));
      return true;
    } catch {
      return false;
    }
  }

  sendChat(text: string): boolean {
    return this.sendFrame({ type: "chat", text });
  }

  sendEstop(): boolean {
    return this.sendFrame({ type: "estop" });
  }

  sendStart(): boolean {
    return this.sendFrame({ type: "start" });
  }
}

// ---------------------------------------------------------------------
// session HTTP helpers

export async function listPlans(baseUrl: string): Promise<string[]> {
  const res = await fetch(`${baseUrl}/plans`);
  return (await res.json()).plans;
}

export async function createSession(
  baseUrl: string,
  body: Record<string, unknown>
): Promise<SessionInfo> {
  const res = await fetch(`${baseUrl}/session`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!res.ok) throw new Error(`create session failed: ${res.status}`);
  return res.json();
}

export async function startSession(baseUrl: string, sessionId: string): Promise<SessionInfo> {
  const res = await fetch(`${baseUrl}/session/${sessionId}/start`, { method: "POST" });
  if (!res.ok) throw new Error(`start failed: ${res.status}`);
  return res.json();
}
