import { describe, expect, it } from "vitest";

import { ConsoleViewModel } from "../src/viewmodel";
import { ServerFrame } from "../src/types";

function frame(type: ServerFrame["type"], t: number, payload: Record<string, any>): ServerFrame {
  return { v: 1, session_id: "s", t, type, payload };
}

function forceFrame(t: number, force: number, velocity = 0.05): ServerFrame {
  return frame("force_sample", t, { force, velocity, arc: 0 });
}

describe("series and windowing", () => {
  it("appends force and velocity points", () => {
    const vm = new ConsoleViewModel();
    vm.apply(forceFrame(0.1, 3.2));
    vm.apply(forceFrame(0.2, 3.4));
    expect(vm.force.map((p) => p.value)).toEqual([3.2, 3.4]);
    expect(vm.velocity).toHaveLength(2);
  });

  it("stays under the point budget across a long session", () => {
    const vm = new ConsoleViewModel(120);
    // 10 minutes at 20 samples/s
    for (let i = 0; i < 600 * 20; i++) {
      vm.apply(forceFrame(i / 20, 3 + (i % 7)));
    }
    expect(vm.pointBudgetRespected).toBe(true);
    expect(vm.force.length).toBeLessThanOrEqual(120 * 20 + 1);
    // the window holds only the trailing 120 s
    expect(vm.force[0].t).toBeGreaterThanOrEqual(600 - 120 - 0.1);
  });
});

describe("timeline markers", () => {
  it("keeps control events in stream order", () => {
    const vm = new ConsoleViewModel();
    vm.apply(frame("control_event", 1.0, { t: 1.0, kind: "PotentialSnagDetected", force: 15.2 }));
    vm.apply(frame("control_event", 2.0, { t: 2.0, kind: "Cross35", force: 35.1 }));
    vm.apply(frame("control_event", 2.0, { t: 2.0, kind: "RobotStopped", force: null }));
    expect(vm.markers.map((m) => m.kind)).toEqual([
      "PotentialSnagDetected",
      "Cross35",
      "RobotStopped",
    ]);
    expect(vm.markers[1].force).toBeCloseTo(35.1);
  });
});

describe("prompts and quick replies", () => {
  it("mirrors the allowed intents as buttons", () => {
    const vm = new ConsoleViewModel();
    vm.apply(
      frame("prompt", 5.0, {
        kind: "snag_assist",
        text: "I have detected a snag. ...",
        allowed_intents: ["abort_task", "cannot_resolve", "confirm_fixed", "snag_assist"],
      })
    );
    const intents = vm.quickReplies.map((r) => r.intent);
    expect(intents).toEqual(["abort_task", "cannot_resolve", "confirm_fixed", "snag_assist"]);
    expect(vm.quickReplies.every((r) => r.text.length > 0)).toBe(true);
  });

  it("clears the prompt once the user reply is acknowledged", () => {
    const vm = new ConsoleViewModel();
    vm.apply(frame("prompt", 5.0, { kind: "pain_choice", text: "?", allowed_intents: ["more_gentle"] }));
    expect(vm.activePrompt).not.toBeNull();
    vm.apply(frame("transcript", 6.0, { speaker: "user", text: "Be more gentle", t: 6.0 }));
    expect(vm.activePrompt).toBeNull();
  });
});

describe("transcript", () => {
  it("is append-only and reconciles the optimistic echo", () => {
    const vm = new ConsoleViewModel();
    vm.apply(frame("transcript", 1.0, { speaker: "robot", text: "hello", t: 1.0 }));
    vm.echoUserText("pause");
    expect(vm.transcript[1].pending).toBe(true);
    vm.apply(frame("transcript", 1.5, { speaker: "user", text: "pause", t: 1.5 }));
    expect(vm.transcript).toHaveLength(2);
    expect(vm.transcript[1].pending).toBe(false);
    expect(vm.transcript[1].t).toBe(1.5);
  });
});

describe("badges", () => {
  it("steps the speed indicator down on speed frames", () => {
    const vm = new ConsoleViewModel();
    vm.apply(frame("speed", 2.0, { scale: 1.0 }));
    vm.apply(frame("speed", 8.0, { scale: 0.6 }));
    expect(vm.speedScale).toBe(0.6);
  });

  it("tracks waypoint progress in order", () => {
    const vm = new ConsoleViewModel();
    vm.apply(frame("waypoint", 0.0, { label: "HAND" }));
    vm.apply(frame("waypoint", 5.0, { label: "LWRS" }));
    const reached = vm.waypointProgress.filter((w) => w.reached).map((w) => w.label);
    expect(reached).toEqual(["HAND", "LWRS"]);
  });

  it("flags a stale stream after a gap while running", () => {
    const vm = new ConsoleViewModel();
    vm.apply(frame("status", 0.0, { status: "running" }), 1000);
    vm.apply(forceFrame(0.1, 3.0), 1000);
    vm.markStale(1500);
    expect(vm.stale).toBe(false);
    vm.markStale(4000);
    expect(vm.stale).toBe(true);
    vm.apply(forceFrame(0.2, 3.0), 4100);
    expect(vm.stale).toBe(false);
  });
});

describe("e-stop", () => {
  it("is enabled while running and latches after a press", () => {
    const vm = new ConsoleViewModel();
    vm.apply(frame("status", 0.0, { status: "running" }));
    expect(vm.estopEnabled).toBe(true);
    expect(vm.pressEstop()).toBe(true);
    expect(vm.estopLatched).toBe(true);
    expect(vm.pressEstop()).toBe(false); // latched: one press only
  });

  it("latches from the server event as well", () => {
    const vm = new ConsoleViewModel();
    vm.apply(frame("control_event", 3.0, { t: 3.0, kind: "EmergencyStop", force: 47.0 }));
    expect(vm.estopLatched).toBe(true);
  });

  it("is disabled once the session is terminal", () => {
    const vm = new ConsoleViewModel();
    vm.apply(frame("status", 9.0, { status: "terminal", trial_status: "Completed" }));
    expect(vm.estopEnabled).toBe(false);
    expect(vm.trialStatus).toBe("Completed");
  });
});
