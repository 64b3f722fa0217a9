/**
 * Live round trip against a running bridge (BRIDGE_URL, default
 * http://127.0.0.1:8732):
 *
 *  1. snag flow: drive a human-intervention session through the console
 *     view model, answer the snag prompt with quick replies, and require
 *     TrajectoryModeEntered on the timeline within 500 ms of the confirm.
 *  2. e-stop: latch the stop in a baseline session and watch it terminate.
 *
 * Run `dressim serve` first, then `npm run e2e`.
 */

import WebSocket from "ws";

import { ConsoleViewModel, QUICK_REPLY_TEXT } from "../src/viewmodel";
import { ServerFrame } from "../src/types";

const BASE = process.env.BRIDGE_URL ?? "http://127.0.0.1:8732";

const SNAG_PLAN = {
  version: 1,
  name: "console_e2e",
  scenario: {
    version: 1,
    seed: 11,
    baseline: { c0: 3.0, c1: 2.0, noise: 0.3 },
    snags: [
      {
        id: "snag-1",
        segment: "LWRS",
        progress: 0.3,
        ramp_slope: 400.0,
        hold_force: 45.0,
        resolvable_by_assist: true,
        assist_delay: 1.0,
      },
    ],
    strategy: { variant: "human_intervention", prompt_timeout: 10000.0 },
  },
  agent: { kind: "none" },
  max_sim_s: 50000.0,
};

const BASELINE_PLAN = {
  version: 1,
  name: "console_e2e_baseline",
  scenario: {
    version: 1,
    seed: 31,
    baseline: { c0: 3.0, c1: 2.0, noise: 0.3 },
    snags: [
      {
        id: "snag-1",
        segment: "LWRS",
        progress: 0.3,
        ramp_slope: 400.0,
        hold_force: 62.0,
      },
    ],
    strategy: { variant: "baseline" },
  },
  agent: { kind: "none" },
  max_sim_s: 50000.0,
};

interface Live {
  vm: ConsoleViewModel;
  ws: WebSocket;
  sessionId: string;
  waitFor(pred: (vm: ConsoleViewModel, frame: ServerFrame) => boolean, timeoutMs: number): Promise<ServerFrame>;
  chat(text: string): void;
  close(): void;
}

async function openSession(plan: unknown): Promise<Live> {
  const created = await fetch(`${BASE}/session`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ plan, real_time_ratio: 0.0 }),
  });
  if (!created.ok) throw new Error(`create failed: ${created.status} ${await created.text()}`);
  const sessionId = (await created.json()).session_id as string;

  const vm = new ConsoleViewModel();
  const ws = new WebSocket(`${BASE.replace(/^http/, "ws")}/session/${sessionId}/ws`);
  const waiters: { pred: (vm: ConsoleViewModel, f: ServerFrame) => boolean; resolve: (f: ServerFrame) => void }[] = [];

  ws.on("message", (data) => {
    const frame = JSON.parse(data.toString()) as ServerFrame;
    vm.apply(frame);
    for (let i = waiters.length - 1; i >= 0; i--) {
      if (waiters[i].pred(vm, frame)) {
        const [w] = waiters.splice(i, 1);
        w.resolve(frame);
      }
    }
  });
  await new Promise<void>((resolve, reject) => {
    ws.once("open", () => resolve());
    ws.once("error", reject);
  });
  const started = await fetch(`${BASE}/session/${sessionId}/start`, { method: "POST" });
  if (!started.ok) throw new Error(`start failed: ${started.status}`);

  return {
    vm,
    ws,
    sessionId,
    waitFor(pred, timeoutMs) {
      return new Promise((resolve, reject) => {
        const timer = setTimeout(() => reject(new Error("timed out waiting for frame")), timeoutMs);
        waiters.push({
          pred,
          resolve: (f) => {
            clearTimeout(timer);
            resolve(f);
          },
        });
      });
    },
    chat(text) {
      vm.echoUserText(text);
      ws.send(JSON.stringify({ type: "chat", text }));
    },
    close() {
      ws.close();
    },
  };
}

function hasMarker(vm: ConsoleViewModel, kind: string): boolean {
  return vm.markers.some((m) => m.kind === kind);
}

async function snagRoundTrip(): Promise<void> {
  const live = await openSession(SNAG_PLAN);
  try {
    await live.waitFor((vm) => vm.activePrompt?.kind === "snag_assist", 15000);
    const replies = live.vm.quickReplies;
    const assist = replies.find((r) => r.intent === "snag_assist");
    if (!assist) throw new Error(`no snag_assist quick reply: ${JSON.stringify(replies)}`);
    live.chat(assist.text); // quick-reply click
    await live.waitFor(
      (_vm, f) => f.type === "force_sample" && (f.payload.force as number) < 10.0,
      15000
    );
    const t0 = Date.now();
    live.chat(QUICK_REPLY_TEXT.confirm_fixed); // second quick reply
    await live.waitFor((vm) => hasMarker(vm, "TrajectoryModeEntered"), 15000);
    const elapsed = Date.now() - t0;
    if (elapsed > 500) {
      throw new Error(`TrajectoryModeEntered took ${elapsed} ms (> 500 ms)`);
    }
    console.log(`PASS: snag quick-reply round trip (${elapsed} ms to TrajectoryModeEntered)`);
  } finally {
    live.close();
  }
}

async function estopLatch(): Promise<void> {
  const live = await openSession(BASELINE_PLAN);
  try {
    await live.waitFor((vm) => hasMarker(vm, "Cross35"), 15000);
    if (!live.vm.estopEnabled) throw new Error("e-stop not enabled while running");
    if (!live.vm.pressEstop()) throw new Error("e-stop press rejected");
    live.ws.send(JSON.stringify({ type: "estop" }));
    await live.waitFor((vm) => vm.status === "terminal", 15000);
    if (!live.vm.estopLatched) throw new Error("e-stop did not latch");
    if (live.vm.trialStatus !== "EmergencyStop") {
      throw new Error(`unexpected trial status ${live.vm.trialStatus}`);
    }
    if (live.vm.pressEstop()) throw new Error("latched e-stop accepted a second press");
    console.log("PASS: e-stop latched and terminated the baseline session");
  } finally {
    live.close();
  }
}

async function main(): Promise<void> {
  await snagRoundTrip();
  await estopLatch();
  console.log("console round trip: all checks passed");
}

main().catch((err) => {
  console.error(`FAIL: ${err.message ?? err}`);
  process.exit(1);
});
