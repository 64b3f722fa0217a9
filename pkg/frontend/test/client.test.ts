import { describe, expect, it, vi } from "vitest";

import { BridgeClient, WebSocketLike, wsUrl } from "../src/client";
import { ServerFrame } from "../src/types";

class FakeSocket implements WebSocketLike {
  sent: string[] = [];
  closed = false;
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }
  close(): void {
    this.closed = true;
  }
  emit(frame: unknown): void {
    this.onmessage?.({ data: JSON.stringify(frame) });
  }
}

function makeClient(onFrame: (f: ServerFrame) => void = () => {}) {
  const sockets: FakeSocket[] = [];
  const client = new BridgeClient({
    baseUrl: "http://host:1",
    sessionId: "abc",
    onFrame,
    wsFactory: (url) => {
      expect(url).toBe("ws://host:1/session/abc/ws");
      const s = new FakeSocket();
      sockets.push(s);
      return s;
    },
    reconnectDelayMs: 5,
  });
  return { client, sockets };
}

describe("wsUrl", () => {
  it("switches scheme and appends the stream path", () => {
    expect(wsUrl("https://a.example", "s1")).toBe("wss://a.example/session/s1/ws");
  });
});

describe("BridgeClient", () => {
  it("parses frames and hands them over in order", () => {
    const seen: ServerFrame[] = [];
    const { client, sockets } = makeClient((f) => seen.push(f));
    client.connect();
    sockets[0].emit({ v: 1, session_id: "abc", t: 0.1, type: "mode", payload: { mode: "TrajectoryMode" } });
    sockets[0].emit({ v: 1, session_id: "abc", t: 0.2, type: "speed", payload: { scale: 0.6 } });
    expect(seen.map((f) => f.type)).toEqual(["mode", "speed"]);
  });

  it("ignores unparsable messages", () => {
    const seen: ServerFrame[] = [];
    const { client, sockets } = makeClient((f) => seen.push(f));
    client.connect();
    sockets[0].onmessage?.({ data: "{nope" });
    expect(seen).toHaveLength(0);
  });

  it("formats chat and estop frames", () => {
    const { client, sockets } = makeClient();
    client.connect();
    client.sendChat("slow down");
    client.sendEstop();
    expect(sockets[0].sent.map((s) => JSON.parse(s))).toEqual([
      { type: "chat", text: "slow down" },
      { type: "estop" },
    ]);
  });

  it("reconnects after the socket drops", async () => {
    vi.useFakeTimers();
    const { client, sockets } = makeClient();
    client.connect();
    expect(sockets).toHaveLength(1);
    sockets[0].onclose?.();
    await vi.advanceTimersByTimeAsync(10);
    expect(sockets).toHaveLength(2);
    vi.useRealTimers();
  });

  it("stops reconnecting once closed", async () => {
    vi.useFakeTimers();
    const { client, sockets } = makeClient();
    client.connect();
    client.close();
    sockets[0].onclose?.();
    await vi.advanceTimersByTimeAsync(50);
    expect(sockets).toHaveLength(1);
    vi.useRealTimers();
  });
});
